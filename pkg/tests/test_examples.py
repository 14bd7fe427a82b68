import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIG1B
from sbclift.errors import InvariantError, ParseError
from sbclift.examples import (
    INF,
    CdpiExample,
    gen_positive,
    parse_examples,
    partial_interpretation,
    scalable_enum,
    scalable_fullsbcs,
    write_examples,
)
from sbclift.pup_core import GroundAtom, generate_instance, make_fig1_instance, solution_atoms
from sbclift.pup_solver import accepting_answer_set_exists
from sbclift.symmetry import AtomOrder, detect_generators, dominated, lex_smallest, orbit


def _solution_of(e, gens):
    ok, sol = accepting_answer_set_exists(e.context, e.inclusions, e.exclusions)
    assert ok
    return sol


def test_partial_interpretation_splits_vocabulary(fig1, fig1_order):
    inc, exc = partial_interpretation(fig1, FIG1B, fig1_order)
    assert inc | exc == set(fig1_order.atoms) and not inc & exc
    assert inc == solution_atoms(fig1, FIG1B) & set(fig1_order.atoms)


def test_example_invariants(fig1):
    a = GroundAtom("unit2zone", 1, 1)
    with pytest.raises(InvariantError):
        CdpiExample("x", "positive", frozenset({a}), frozenset({a}), fig1)
    with pytest.raises(InvariantError):
        CdpiExample("x", "negative", frozenset(), frozenset(), fig1)
    with pytest.raises(InvariantError):
        CdpiExample("x", "negative", frozenset(), frozenset(), fig1, weight=0)
    with pytest.raises(InvariantError):
        CdpiExample("x", "maybe", frozenset(), frozenset(), fig1)


def test_enum_labels_follow_dominance(fig1, fig1_gens, fig1_order):
    exs = scalable_enum(fig1, fig1_gens, fig1_order, 30, seed=4)
    assert 0 < len(exs) <= 30
    assert len({(e.inclusions, e.exclusions) for e in exs}) == len(exs)
    for e in exs:
        sol = _solution_of(e, fig1_gens)
        assert dominated(sol, fig1_gens, fig1_order) == (not e.positive)
        assert e.weight == (INF if e.positive else 1)


def test_enum_rejects_nonpositive_n(fig1, fig1_gens, fig1_order):
    with pytest.raises(ValueError):
        scalable_enum(fig1, fig1_gens, fig1_order, 0)


@pytest.mark.parametrize("cells", [1, 5, 20])
@pytest.mark.parametrize("size", [0, 1, 5])
def test_fullsbcs_bounds(fig1, fig1_gens, fig1_order, cells, size):
    exs = scalable_fullsbcs(fig1, fig1_gens, fig1_order, cells, size, seed=2)
    assert len(exs.positives) == cells
    assert len(exs.negatives) <= cells * size
    for e in exs.positives:
        assert not dominated(_solution_of(e, fig1_gens), fig1_gens, fig1_order)
    if size == 0:
        assert exs.one_sided and exs.diagnostic


def test_fullsbcs_orbits_disjoint_and_leaders_minimal(fig1, fig1_gens, fig1_order):
    exs = scalable_fullsbcs(fig1, fig1_gens, fig1_order, 10, 5, seed=7)
    orbits = []
    for e in exs.positives:
        sol = _solution_of(e, fig1_gens)
        members = orbit(sol, fig1_gens).members
        assert lex_smallest(members, fig1_order) == sol
        orbits.append(set(members))
    for i, a in enumerate(orbits):
        for b in orbits[i + 1:]:
            assert not a & b
    for e in exs.negatives:
        cell = int(e.id.split("_c")[1].split("_")[0])
        assert _solution_of(e, fig1_gens) in orbits[cell - 1]


def test_fullsbcs_argument_checks(fig1, fig1_gens, fig1_order):
    with pytest.raises(ValueError):
        scalable_fullsbcs(fig1, fig1_gens, fig1_order, 0, 1)
    with pytest.raises(ValueError):
        scalable_fullsbcs(fig1, fig1_gens, fig1_order, 1, -1)


def test_exhaustive_mode_covers_every_orbit():
    inst = generate_instance("doublev", 5)
    gens = detect_generators(inst)
    order = AtomOrder.for_generators(inst, gens)
    exs = scalable_fullsbcs(inst, gens, order, None, 1)
    from sbclift.pup_solver import enumerate_solutions
    from sbclift.symmetry import orbit_partition
    assert len(exs.positives) == len(orbit_partition(enumerate_solutions(inst), gens))


def test_unsat_instance_gives_empty_set_with_diagnostic():
    inst = generate_instance("double", 6, unsat=True)
    gens = detect_generators(inst)
    order = AtomOrder.for_generators(inst, gens)
    for exs in (scalable_enum(inst, gens, order, 5), scalable_fullsbcs(inst, gens, order, 5, 2)):
        assert len(exs) == 0 and "unsatisfiable" in exs.diagnostic


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2 ** 32), st.booleans())
def test_generation_deterministic(seed, full):
    fig1 = make_fig1_instance()
    gens = detect_generators(fig1)
    order = AtomOrder.for_generators(fig1, gens)
    if full:
        make = lambda: scalable_fullsbcs(fig1, gens, order, 4, 3, seed=seed)
    else:
        make = lambda: scalable_enum(fig1, gens, order, 10, seed=seed)
    assert write_examples(make()) == write_examples(make())


def test_text_round_trip(fig1, fig1_gens, fig1_order):
    exs = list(scalable_fullsbcs(fig1, fig1_gens, fig1_order, 3, 3, seed=1))
    exs.append(gen_positive(generate_instance("double", 8)))
    text = write_examples(exs)
    back = parse_examples(text)
    assert back == exs
    assert [e.weight for e in back] == [e.weight for e in exs]
    assert [e.context.edges for e in back] == [e.context.edges for e in exs]
    assert write_examples(back) == text


def test_text_format(fig1):
    e = CdpiExample("dbl_6_n1", "negative", frozenset({GroundAtom("unit2zone", 1, 1)}), frozenset(), fig1, 3)
    line = write_examples([e])
    assert line.startswith("#neg(dbl_6_n1@3, {unit2zone(1,1)}, {}, {")
    assert gen_positive(fig1).id == "gen_dbl_6"


@pytest.mark.parametrize("bad", ["#pos(x, {foo}, {}, {ucap(2).}).", "#pos(x, {}, {})", "garbage"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_examples(bad)
