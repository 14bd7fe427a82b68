"""Complete backtracking solver for PUP instances.

Variables are decided in breadth-first order over the zone/sensor graph,
so the items of one neighbourhood are assigned together.  Unit capacity and
the partner-unit limit are propagated incrementally.  Ground constraints are
indexed by the variable that completes their assignment literals and by the
unit pairs of their positive ``partnerunits`` literals; constraints with
negative ``partnerunits`` literals are re-checked on total assignments.
"""

from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from . import kernel
from .errors import DomainError, PreconditionError, SbcliftError
from .hypothesis import Constraint
from .pup_core import (
    PREDICATE_SIGNATURE,
    STATIC_PREDICATES,
    GroundAtom,
    PupInstance,
    Solution,
)


class SearchTimeout(SbcliftError):
    """Raised by counting helpers when the wall-clock budget runs out."""

    def __init__(self, partial: int, nodes: int):
        super().__init__(f"search timed out after {partial} solutions / {nodes} nodes")
        self.partial = partial
        self.nodes = nodes


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    limit: int | None = None
    timeout: float | None = None  # milliseconds
    randomize_values: bool = False
    # canonical unit numbering (units opened in order); only sound on plain instances
    first_use_units: bool = False

    def __post_init__(self):
        if self.limit is not None and self.limit < 1:
            raise ValueError("limit must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class GroundConstraint:
    """Set of signed ground atoms; violated when all of them hold."""

    literals: frozenset[tuple[bool, GroundAtom]]

    def __post_init__(self):
        if not self.literals:
            raise ValueError("ground constraint must be non-empty")
        pos = {a for s, a in self.literals if s}
        if any(a in pos for s, a in self.literals if not s):
            raise ValueError("atom occurs with both signs")

    @classmethod
    def of(cls, *lits: tuple[bool, GroundAtom]) -> "GroundConstraint":
        return cls(frozenset(lits))

    def violated_by(self, atoms: set[GroundAtom]) -> bool:
        return all((a in atoms) == s for s, a in self.literals)

    def __str__(self) -> str:
        parts = sorted((str(a) if s else f"not {a}") for s, a in self.literals)
        return ":- " + ", ".join(parts) + "."


# ---------------------------------------------------------------- grounding

def ground_constraint(c: Constraint, inst: PupInstance) -> list[GroundConstraint]:
    """All typed groundings of ``c`` whose positive domain literals hold in ``inst``.

    A variable ranges over the intersection of the domains of the positions it
    occupies in positive literals; atoms of negative literals that fall outside
    the atom universe are simply false.
    """
    for lit in c.body:
        if lit.predicate not in PREDICATE_SIGNATURE:
            raise DomainError(f"unknown predicate {lit.predicate!r}")
    variables = sorted({v for l in c.body for v in (l.a, l.b)})
    domains: dict[int, set[int]] = {}
    for lit in c.body:
        if not lit.positive:
            continue
        ka, kb = PREDICATE_SIGNATURE[lit.predicate]
        for v, kind in ((lit.a, ka), (lit.b, kb)):
            dom = set(inst.domain(kind))
            domains[v] = domains[v] & dom if v in domains else dom
    for v in variables:
        if v not in domains:
            raise DomainError(f"variable V{v} occurs only in negative literals")
    static = inst.static_atoms
    out = []
    for values in itertools.product(*(sorted(domains[v]) for v in variables)):
        theta = dict(zip(variables, values))
        lits, drop = set(), False
        for lit in c.body:
            atom = GroundAtom(lit.predicate, theta[lit.a], theta[lit.b])
            if lit.positive and lit.predicate in STATIC_PREDICATES and atom not in static:
                drop = True
                break
            lits.add((lit.positive, atom))
        if drop:
            continue
        pos = {a for s, a in lits if s}
        if any(a in pos for s, a in lits if not s):
            continue
        out.append(GroundConstraint(frozenset(lits)))
    return out


def ground_all(constraints: Iterable[Constraint], inst: PupInstance) -> list[GroundConstraint]:
    out = []
    for c in constraints:
        out.extend(ground_constraint(c, inst))
    return out


# ---------------------------------------------------------------- compilation

class _Unsat(Exception):
    pass


def _atom_truth_static(atom: GroundAtom, inst: PupInstance):
    """True/False for atoms fixed by the instance, None for search-dependent ones."""
    p = atom.predicate
    if p in STATIC_PREDICATES:
        return atom in inst.static_atoms
    nu = len(inst.units)
    if not 1 <= atom.a <= nu:
        return False
    if p == "partnerunits":
        if not 1 <= atom.b <= nu or atom.a == atom.b:
            return False
        return None
    kind = PREDICATE_SIGNATURE[p][1]
    if atom.b not in inst.domain(kind):
        return False
    return None


@lru_cache(maxsize=256)
def search_order(inst: PupInstance) -> tuple[tuple[str, int], ...]:
    """Variables in breadth-first graph order, so neighbouring items are decided together."""
    order: list[tuple[str, int]] = []
    seen: set[tuple[str, int]] = set()
    nbrs = {("z", z): [("s", s) for s in inst.zone_neighbors[z]] for z in inst.zones}
    nbrs.update({("s", s): [("z", z) for z in inst.sensor_neighbors[s]] for s in inst.sensors})
    for root in [("z", z) for z in inst.zones] + [("s", s) for s in inst.sensors]:
        if root in seen:
            continue
        seen.add(root)
        queue = deque([root])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return tuple(order)


@lru_cache(maxsize=256)
def _positions(inst: PupInstance) -> dict[tuple[str, int], int]:
    return {v: i for i, v in enumerate(search_order(inst))}


def _position(inst: PupInstance, predicate: str, item: int) -> int:
    return _positions(inst)[(PREDICATE_SIGNATURE[predicate][1], item)]


def compile_problem(inst: PupInstance, extra: Sequence[GroundConstraint],
                    inclusions: Iterable[GroundAtom] = (), exclusions: Iterable[GroundAtom] = ()):
    """Kernel arguments for ``inst``; raises _Unsat when trivially infeasible."""
    nz, ns, nu = len(inst.zones), len(inst.sensors), len(inst.units)
    n = nz + ns
    dom = [1] * (n * nu)

    def restrict(pos, allowed):
        for u in range(nu):
            if not allowed(u):
                dom[pos * nu + u] = 0

    constraints: list[list[tuple[int, int, int, int]]] = []

    def add_literal_constraint(lits):
        compiled = []
        for positive, atom in lits:
            truth = _atom_truth_static(atom, inst)
            if truth is not None:
                if truth != positive:
                    return  # literal false: never fires
                continue
            p = atom.predicate
            if p == "partnerunits":
                compiled.append((kernel_PARTNER, atom.a - 1, atom.b - 1, int(positive)))
            elif p in ("unit2zone", "unit2sensor"):
                compiled.append((kernel_EQ, _position(inst, p, atom.b), atom.a - 1, int(positive)))
            else:
                compiled.append((kernel_GEQ, _position(inst, p, atom.b), atom.a - 1, int(positive)))
        if not compiled:
            raise _Unsat
        constraints.append(compiled)

    for atom, include in itertools.chain(((a, True) for a in inclusions), ((a, False) for a in exclusions)):
        truth = _atom_truth_static(atom, inst)
        if truth is not None:
            if truth != include:
                raise _Unsat
            continue
        p = atom.predicate
        if p in ("unit2zone", "unit2sensor"):
            pos, u = _position(inst, p, atom.b), atom.a - 1
            restrict(pos, (lambda x: x == u) if include else (lambda x: x != u))
        elif p in ("unit2zoneGEQ", "unit2sensorGEQ"):
            pos, u = _position(inst, p, atom.b), atom.a - 1
            restrict(pos, (lambda x: x >= u) if include else (lambda x: x < u))
        else:
            add_literal_constraint([(not include, atom)])

    for gc in extra:
        add_literal_constraint(gc.literals)

    # neighbours in variable positions
    order = search_order(inst)
    pos_of = _positions(inst)
    nbr_ptr, nbr_idx = [0], []
    for kind, item in order:
        if kind == "z":
            nbr_idx.extend(pos_of["s", s] for s in inst.zone_neighbors[item])
        else:
            nbr_idx.extend(pos_of["z", z] for z in inst.sensor_neighbors[item])
        nbr_ptr.append(len(nbr_idx))

    lit_ptr, lit_kind, lit_a, lit_b, lit_sign, cmaxpos = [0], [], [], [], [], []
    trig = [[] for _ in range(n)]
    pair = [[] for _ in range(nu * nu)]
    leaf = []
    for ci, lits in enumerate(constraints):
        maxpos, has_neg_partner = -1, False
        for kind, a, b, sign in lits:
            lit_kind.append(kind)
            lit_a.append(a)
            lit_b.append(b)
            lit_sign.append(sign)
            if kind == kernel_PARTNER:
                if sign:
                    lo, hi = min(a, b), max(a, b)
                    if ci not in pair[lo * nu + hi]:
                        pair[lo * nu + hi].append(ci)
                else:
                    has_neg_partner = True
            else:
                maxpos = max(maxpos, a)
        lit_ptr.append(len(lit_kind))
        cmaxpos.append(maxpos)
        if maxpos >= 0:
            trig[maxpos].append(ci)
        if has_neg_partner:
            leaf.append(ci)

    def csr(lists):
        ptr, idx = [0], []
        for xs in lists:
            idx.extend(xs)
            ptr.append(len(idx))
        return ptr, idx

    trig_ptr, trig_idx = csr(trig)
    pair_ptr, pair_idx = csr(pair)
    is_zone = [int(kind == "z") for kind, _ in order]
    return dict(
        n=n, nu=nu, is_zone=is_zone, nbr_ptr=nbr_ptr, nbr_idx=nbr_idx, dom=dom,
        ucap=inst.ucap, iucap=inst.iucap,
        lit_ptr=lit_ptr, lit_kind=lit_kind, lit_a=lit_a, lit_b=lit_b, lit_sign=lit_sign,
        cmaxpos=cmaxpos, trig_ptr=trig_ptr, trig_idx=trig_idx, pair_ptr=pair_ptr,
        pair_idx=pair_idx, leaf_idx=leaf,
    )


kernel_EQ, kernel_GEQ, kernel_PARTNER = 0, 1, 2


def _make_kernel(inst, extra, cfg, inclusions=(), exclusions=(), backend=None):
    try:
        args = compile_problem(inst, extra, inclusions, exclusions)
    except _Unsat:
        return None
    timeout_s = None if cfg.timeout is None else cfg.timeout / 1000.0
    cls = kernel.SearchKernel if backend is None else backend.SearchKernel
    return cls(seed=cfg.seed, randomize=cfg.randomize_values, timeout_s=timeout_s,
               first_use=cfg.first_use_units, **args)


def _to_solution(inst: PupInstance, assign: Sequence[int]) -> Solution:
    zu = [0] * len(inst.zones)
    su = [0] * len(inst.sensors)
    for (kind, item), u in zip(search_order(inst), assign):
        (zu if kind == "z" else su)[item - 1] = u + 1
    return Solution(tuple(zu), tuple(su))


class SolutionStream:
    """Iterator over solutions; ``truncated`` is set when a timeout cut it short."""

    def __init__(self, inst, extra=(), cfg=SearchConfig(), inclusions=(), exclusions=(), backend=None):
        self.inst = inst
        self.cfg = cfg
        self._k = _make_kernel(inst, list(extra), cfg, inclusions, exclusions, backend)
        self.emitted = 0
        self.truncated = False
        self.started = time.perf_counter()

    @property
    def nodes(self) -> int:
        return 0 if self._k is None else self._k.nodes

    def __iter__(self) -> Iterator[Solution]:
        return self

    def __next__(self) -> Solution:
        if self._k is None or (self.cfg.limit is not None and self.emitted >= self.cfg.limit):
            raise StopIteration
        assign = self._k.next_solution()
        if assign is None:
            if self._k.timed_out:
                self.truncated = True
            raise StopIteration
        self.emitted += 1
        return _to_solution(self.inst, assign)


def enumerate_solutions(inst: PupInstance, extra: Sequence[GroundConstraint] = (),
                        cfg: SearchConfig = SearchConfig(), backend=None) -> SolutionStream:
    return SolutionStream(inst, extra, cfg, backend=backend)


@dataclass(frozen=True)
class SearchResult:
    count: int
    nodes: int
    timed_out: bool
    elapsed_ms: float


def run_count(inst: PupInstance, extra: Sequence[GroundConstraint] = (),
              cfg: SearchConfig = SearchConfig(), inclusions=(), exclusions=(),
              backend=None) -> SearchResult:
    t0 = time.perf_counter()
    k = _make_kernel(inst, list(extra), cfg, inclusions, exclusions, backend)
    if k is None:
        return SearchResult(0, 0, False, (time.perf_counter() - t0) * 1000)
    found = k.count_all(-1 if cfg.limit is None else cfg.limit)
    return SearchResult(found, k.nodes, bool(k.timed_out), (time.perf_counter() - t0) * 1000)


def count(inst: PupInstance, extra: Sequence[GroundConstraint] = (),
          cfg: SearchConfig = SearchConfig(), backend=None) -> int:
    res = run_count(inst, extra, cfg, backend=backend)
    if res.timed_out:
        raise SearchTimeout(res.count, res.nodes)
    return res.count


def solve_one(inst: PupInstance, extra: Sequence[GroundConstraint] = (),
              cfg: SearchConfig = SearchConfig(), inclusions=(), exclusions=()) -> Solution | None:
    """First solution, or None when none exists; raises SearchTimeout on timeout."""
    stream = SolutionStream(inst, extra, cfg, inclusions, exclusions)
    sol = next(stream, None)
    if sol is None and stream.truncated:
        raise SearchTimeout(0, stream.nodes)
    return sol


def accepting_answer_set_exists(inst: PupInstance, inclusions: Iterable[GroundAtom] = (),
                                exclusions: Iterable[GroundAtom] = (),
                                hypothesis: Sequence[Constraint] = (),
                                timeout_ms: float | None = None,
                                grounded: Sequence[GroundConstraint] | None = None):
    """Return ``(exists, witness)``; ``exists`` is None when the search timed out."""
    inclusions, exclusions = set(inclusions), set(exclusions)
    if inclusions & exclusions:
        raise PreconditionError("inclusions and exclusions overlap")
    extra = list(grounded) if grounded is not None else ground_all(hypothesis, inst)
    cfg = SearchConfig(timeout=timeout_ms)
    try:
        sol = solve_one(inst, extra, cfg, inclusions, exclusions)
    except SearchTimeout:
        return None, None
    return (sol is not None), sol


def write_solution(sol: Solution) -> str:
    return sol.to_facts()
