import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIG1B, brute_group, small_instance
from sbclift.errors import ParseError
from sbclift.pup_core import GroundAtom, Solution, is_valid, make_fig1_instance, solution_atoms
from sbclift.pup_solver import enumerate_solutions
from sbclift.symmetry import (
    ORDER_PREDICATES,
    AtomOrder,
    AtomPermutation,
    apply,
    detect_generators,
    dominated,
    graph_automorphisms,
    lex_smallest,
    moved_atoms,
    orbit,
    orbit_partition,
    parse_generators,
    write_generators,
)

FIG1_GENERATORS = """\
units: (); vertices: (z1 z3)(z4 z6)(s1 s3)(s2 s5)(s6 s7)
units: (); vertices: (z1 z4)(z2 z5)(z3 z6)(s1 s6)(s3 s7)
units: (1 2); vertices: ()
units: (2 3); vertices: ()
units: (3 4); vertices: ()
"""


def _closure(perms, n):
    ident = tuple(range(n))
    seen, frontier = {ident}, [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in perms:
                q = tuple(g[i] for i in p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return seen


def test_fig1_generators_text(fig1_gens):
    assert write_generators(fig1_gens) == FIG1_GENERATORS


def test_generators_preserve_edges(fig1, fig1_gens):
    assert all(g.preserves_edges(fig1) and not g.is_identity() for g in fig1_gens)


def test_fig1_group_order(fig1, fig1_gens):
    # building symmetries (4) times unit renamings (24)
    gens = [g.zone_map + tuple(6 + s for s in g.sensor_map) + tuple(13 + u for u in g.unit_map)
            for g in fig1_gens]
    gens = [tuple(x - 1 for x in g) for g in gens]
    assert len(_closure(gens, 17)) == len(brute_group(fig1)) == 96


@pytest.mark.parametrize("n,edges,order", [
    (5, [(i, (i + 1) % 5) for i in range(5)], 10),
    (4, [(0, 1), (1, 2), (2, 3)], 2),
    (4, [(a, b) for a in range(4) for b in range(a + 1, 4)], 24),
    (6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], 72),
])
def test_graph_automorphisms_generate_full_group(n, edges, order):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    gens = graph_automorphisms(n, adj, [0] * n)
    es = {frozenset(e) for e in edges}
    for g in gens:
        assert {frozenset((g[a], g[b])) for a, b in edges} == es
    assert len(_closure([tuple(g) for g in gens], n)) == order


def test_colors_respected():
    adj = [[1], [0, 2], [1]]
    assert graph_automorphisms(3, adj, [0, 1, 2]) == []


def test_apply_unit_swap_to_fig1b(fig1):
    swap = parse_generators("units: (1 2); vertices: ()", fig1)[0]
    img = apply(swap, FIG1B)
    assert img.zone_unit == (2, 2, 1, 1, 3, 3)
    assert img.sensor_unit == (2, 2, 1, 1, 3, 3, 4)
    assert is_valid(fig1, img)


def test_apply_matches_atom_mapping(fig1, fig1_gens):
    def core(sol):
        return {a for a in solution_atoms(fig1, sol) if a.predicate in ORDER_PREDICATES}

    for g in fig1_gens:
        assert {g.map_atom(a) for a in core(FIG1B)} == core(apply(g, FIG1B))


def test_inverse_and_compose(fig1_gens):
    for g, h in itertools.product(fig1_gens, repeat=2):
        assert g.compose(g.inverse()).is_identity()
        assert apply(g.compose(h), FIG1B) == apply(g, apply(h, FIG1B))


def test_generator_round_trip(fig1, fig1_gens):
    assert parse_generators(write_generators(fig1_gens), fig1) == fig1_gens


@pytest.mark.parametrize("bad", [
    "units: (1 9); vertices: ()",
    "units: (); vertices: (z1 s1)",
    "units (1 2)",
    "units: (1 1); vertices: ()",
])
def test_generator_parse_errors(fig1, bad):
    with pytest.raises(ParseError):
        parse_generators(bad, fig1)


def test_atom_order_key_is_lex_order(fig1, fig1_order):
    sols = list(itertools.islice(enumerate_solutions(fig1), 300))
    # "present" sorts before "absent"
    by_key = sorted(sols, key=fig1_order.key)
    by_vec = sorted(sols, key=lambda s: tuple(1 - b for b in fig1_order.bitvector(s)))
    assert by_key == by_vec


def test_moved_atoms_exclude_fixed(fig1, fig1_gens):
    only_units = [g for g in fig1_gens if g.zone_map == tuple(fig1.zones) and g.sensor_map == tuple(fig1.sensors)]
    moved = moved_atoms(fig1, only_units)
    assert GroundAtom("unit2zone", 4, 2) in moved
    assert len(AtomOrder.for_generators(fig1, fig1_gens)) == len(moved_atoms(fig1, fig1_gens))


def test_lex_smallest_empty(fig1_order):
    with pytest.raises(ValueError):
        lex_smallest([], fig1_order)


def test_orbit_cap(fig1_gens):
    orb = orbit(FIG1B, fig1_gens, cap=5)
    assert orb.truncated and len(orb.members) == 5 and orb.members[0] == FIG1B


def test_fig1b_orbit_size(fig1_gens):
    orb = orbit(FIG1B, fig1_gens)
    assert not orb.truncated
    assert len(orb.members) == 96


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_orbit_equals_brute_force_closure_fig1(seed):
    fig1 = make_fig1_instance()
    gens = detect_generators(fig1)
    rng = random.Random(seed)
    sols = list(itertools.islice(enumerate_solutions(fig1), 2000))
    sol = rng.choice(sols)
    assert set(orbit(sol, gens).members) == {apply(g, sol) for g in _FIG1_GROUP}


_FIG1_GROUP = brute_group(make_fig1_instance())


def test_orbit_members_are_solutions(fig1, fig1_gens):
    assert all(is_valid(fig1, s) for s in orbit(FIG1B, fig1_gens).members)


def test_partition_of_small_instance():
    inst = small_instance(3)
    gens = detect_generators(inst)
    order = AtomOrder.for_generators(inst, gens)
    sols = list(enumerate_solutions(inst))
    parts = orbit_partition(sols, gens)
    members = [s for p in parts for s in p.members]
    assert len(members) == len(set(members)) == len(sols)
    assert set(members) == set(sols)
    for p in parts:
        leader = lex_smallest(p.members, order)
        assert not dominated(leader, gens, order)
        assert all(apply(g, s) in set(p.members) for g in gens for s in p.members)


def test_dominated_means_smaller_image(fig1, fig1_gens, fig1_order):
    for sol in itertools.islice(enumerate_solutions(fig1), 200):
        if dominated(sol, fig1_gens, fig1_order):
            assert lex_smallest(orbit(sol, fig1_gens).members, fig1_order) != sol


def test_identity_permutation(fig1):
    ident = AtomPermutation.identity(fig1)
    assert ident.is_identity() and str(ident) == "units: (); vertices: ()"
    assert apply(ident, FIG1B) == FIG1B
    assert isinstance(apply(ident, FIG1B), Solution)
