import itertools

import pytest

from sbclift.hypothesis import build_space, generic_bias, pup_bias
from sbclift.pup_core import PupInstance, Solution, is_valid, make_fig1_instance
from sbclift.symmetry import AtomOrder, detect_generators


FIG1B = Solution.from_maps(
    {1: 1, 2: 1, 3: 2, 4: 2, 5: 3, 6: 3},
    {1: 1, 2: 1, 3: 2, 4: 2, 5: 3, 6: 3, 7: 4},
)


def small_instance(n_units=3):
    """Fig. 1 restricted to zones 1-4 and their sensors."""
    edges = [(z, s) for z, s in make_fig1_instance().edges if z <= 4]
    return PupInstance.from_edges(edges, n_units, name="fig1-z4")


def naive_solutions(inst):
    """Generate-and-test over every assignment."""
    nz, ns = len(inst.zones), len(inst.sensors)
    out = set()
    for combo in itertools.product(inst.units, repeat=nz + ns):
        sol = Solution(combo[:nz], combo[nz:])
        if is_valid(inst, sol):
            out.add(sol)
    return out


@pytest.fixture(scope="session")
def fig1():
    return make_fig1_instance()


@pytest.fixture(scope="session")
def fig1_gens(fig1):
    return detect_generators(fig1)


@pytest.fixture(scope="session")
def fig1_order(fig1, fig1_gens):
    return AtomOrder.for_generators(fig1, fig1_gens)


@pytest.fixture(scope="session")
def generic_space():
    return build_space(generic_bias())


@pytest.fixture(scope="session")
def pup_space():
    return build_space(pup_bias())


def brute_group(inst):
    """Every (zone, sensor, unit) permutation preserving the edge set, by exhaustion."""
    from sbclift.symmetry import AtomPermutation

    nbrs = {s: frozenset(inst.sensor_neighbors[s]) for s in inst.sensors}
    out = []
    for zp in itertools.permutations(inst.zones):
        zmap = dict(zip(inst.zones, zp))
        choices = []
        for s in inst.sensors:
            image = frozenset(zmap[z] for z in nbrs[s])
            choices.append([t for t in inst.sensors if nbrs[t] == image])
        for sp in itertools.product(*choices):
            if len(set(sp)) != len(sp):
                continue
            for up in itertools.permutations(inst.units):
                out.append(AtomPermutation(tuple(zp), tuple(sp), tuple(up)))
    return out


ACCEPTANCE: dict[int, str] = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
