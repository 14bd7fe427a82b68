"""Conflict-driven learning of symmetry-breaking constraints.

The learner alternates between finding a cheapest hypothesis consistent
with the coverage constraints collected so far and checking that hypothesis
against the examples with the solver.  Uncovered examples are explained by a
new coverage formula:

* ``sbca``: syntactic, from the subsumers of the hypothesis' rules;
* ``semantic_conflict_negative``: rules that would eliminate the surviving
  answer set of a negative example;
* ``semantic_conflict_positive``: for each candidate answer set of a
  positive example, "drop every rule that kills it".

Formulas are disjunctions of conjunctions of id-literals.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernel
from .errors import InvariantError, PreconditionError, UnsatisfiableTask
from .examples import CdpiExample
from .hypothesis import Constraint, HypothesisSpace
from .pup_core import PREDICATES, PupInstance, Solution, solution_atoms
from .pup_solver import SearchConfig, SearchTimeout, SolutionStream, accepting_answer_set_exists, ground_all

log = logging.getLogger(__name__)

SBCA_ENUMERATION_LIMIT_MS = 5000.0


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Conjunction:
    pos: frozenset[int] = frozenset()
    neg: frozenset[int] = frozenset()

    def holds(self, h: frozenset[int] | set[int]) -> bool:
        return self.pos <= h and not (self.neg & h)

    def __str__(self) -> str:
        lits = [f"r{i}" for i in sorted(self.pos)] + [f"not r{i}" for i in sorted(self.neg)]
        return "(" + " & ".join(lits) + ")" if lits else "true"


def _minimal(disjuncts: Iterable[Conjunction]) -> tuple[Conjunction, ...]:
    """Drop duplicate disjuncts and those implied by a weaker one."""
    uniq = sorted(set(disjuncts), key=lambda d: (len(d.pos) + len(d.neg), sorted(d.pos), sorted(d.neg)))
    kept: list[Conjunction] = []
    by_lit: dict[tuple[bool, int], list[Conjunction]] = {}
    for d in uniq:
        lits = [(True, i) for i in d.pos] + [(False, i) for i in d.neg]
        if any(k.pos <= d.pos and k.neg <= d.neg for lit in lits for k in by_lit.get(lit, ())):
            continue
        if not lits:
            return (d,)  # "true" absorbs everything
        kept.append(d)
        by_lit.setdefault(lits[0], []).append(d)
    return tuple(kept)


@dataclass(frozen=True)
class CoverageConstraint:
    example_id: str
    disjuncts: tuple[Conjunction, ...]
    method: str = ""

    @classmethod
    def build(cls, example_id: str, disjuncts: Iterable[Conjunction], method: str = "") -> "CoverageConstraint":
        return cls(example_id, _minimal(disjuncts), method)

    def holds(self, h: Iterable[int]) -> bool:
        h = frozenset(h)
        return any(d.holds(h) for d in self.disjuncts)

    @property
    def ids(self) -> frozenset[int]:
        out: set[int] = set()
        for d in self.disjuncts:
            out |= d.pos | d.neg
        return frozenset(out)

    @property
    def uncoverable(self) -> bool:
        return not self.disjuncts

    def __str__(self) -> str:
        if not self.disjuncts:
            return "false"
        return " | ".join(str(d) for d in self.disjuncts)


# ---------------------------------------------------------------- rule evaluation

class RuleTable:
    """Flat encoding of a hypothesis space for ``kernel.violation_matrix``."""

    def __init__(self, space: HypothesisSpace):
        self.space = space
        self.pred_index = {p: i for i, p in enumerate(PREDICATES)}
        self.ids = np.array([c.id for c in space], dtype=np.int64)
        pred, sign, va, vb, ptr, nvars = [], [], [], [], [0], []
        for c in space:
            vidx = {v: i for i, v in enumerate(c.variables)}
            for lit in c.body:
                if lit.predicate not in self.pred_index:
                    raise PreconditionError(f"predicate {lit.predicate!r} has no PUP semantics")
                pred.append(self.pred_index[lit.predicate])
                sign.append(1 if lit.positive else 0)
                va.append(vidx[lit.a])
                vb.append(vidx[lit.b])
            ptr.append(len(pred))
            nvars.append(len(vidx))
        self.arrays = (pred, sign, va, vb, ptr, nvars)

    def relations(self, inst: PupInstance, sols: Sequence[Solution]) -> np.ndarray:
        d = inst.max_id + 1
        rel = np.zeros((len(sols), len(PREDICATES), d, d), dtype=np.uint8)
        for k, sol in enumerate(sols):
            for p, a, b in solution_atoms(inst, sol):
                rel[k, self.pred_index[p], a, b] = 1
        return rel

    def violated(self, inst: PupInstance, sols: Sequence[Solution]) -> list[frozenset[int]]:
        """For each solution, the ids of space rules with a violated ground instance."""
        if not sols:
            return []
        mat = kernel.violation_matrix(self.relations(inst, sols), *self.arrays)
        return [frozenset(int(i) for i in self.ids[mat[:, k].astype(bool)]) for k in range(len(sols))]


# ---------------------------------------------------------------- conflict analysis

def sbca(e: CdpiExample, hypothesis: Iterable[Constraint], space: HypothesisSpace) -> CoverageConstraint:
    """Disjunction over r in H of "no subsumer of r is chosen"."""
    hypothesis = list(hypothesis)
    if not hypothesis:
        raise PreconditionError("sbca needs a non-empty hypothesis: the empty set covers every satisfiable positive")
    if not e.positive:
        raise PreconditionError("sbca applies to positive examples")
    disjuncts = [Conjunction(neg=frozenset(s.id for s in space.subsumers(space[r.id]))) for r in hypothesis]
    return CoverageConstraint.build(e.id, disjuncts, "sbca")


def semantic_conflict_negative(e: CdpiExample, hypothesis: Iterable[Constraint], space: HypothesisSpace,
                               inst: PupInstance | None = None, witness: Solution | None = None,
                               table: RuleTable | None = None,
                               timeout_ms: float | None = None) -> CoverageConstraint:
    """Some rule eliminating the surviving answer set must be chosen."""
    if e.positive:
        raise PreconditionError("semantic_conflict_negative applies to negative examples")
    inst = inst or e.context
    if witness is None:
        exists, witness = accepting_answer_set_exists(inst, e.inclusions, e.exclusions, list(hypothesis),
                                                      timeout_ms=timeout_ms)
        if exists is None:
            raise SearchTimeout(0, 0)
        if not exists:
            raise PreconditionError(f"negative example {e.id} is already covered")
    table = table or RuleTable(space)
    hits = table.violated(inst, [witness])[0]
    return CoverageConstraint.build(e.id, [Conjunction(pos=frozenset([i])) for i in hits], "semantic-")


class BudgetExceeded(Exception):
    """Candidate enumeration for a positive example went over budget."""


def semantic_conflict_positive(e: CdpiExample, hypothesis: Iterable[Constraint], space: HypothesisSpace,
                               inst: PupInstance | None = None, max_candidates: int = 2000,
                               timeout_ms: float | None = 5000.0,
                               table: RuleTable | None = None) -> CoverageConstraint:
    """Some candidate answer set of ``e`` must survive every chosen rule."""
    if not e.positive:
        raise PreconditionError("semantic_conflict_positive applies to positive examples")
    inst = inst or e.context
    stream = SolutionStream(inst, (), SearchConfig(timeout=timeout_ms), e.inclusions, e.exclusions)
    cands = []
    for sol in stream:
        cands.append(sol)
        if len(cands) > max_candidates:
            raise BudgetExceeded(f"{e.id}: more than {max_candidates} candidates")
    if stream.truncated:
        raise BudgetExceeded(f"{e.id}: candidate enumeration timed out")
    table = table or RuleTable(space)
    cc = CoverageConstraint.build(e.id, [Conjunction(neg=v) for v in table.violated(inst, cands)], "semantic+")
    if cc.holds(c.id for c in hypothesis):
        raise PreconditionError(f"positive example {e.id} is covered by the hypothesis")
    return cc


# ---------------------------------------------------------------- optimisation

@dataclass
class LearnerState:
    space: HypothesisSpace
    examples: list[CdpiExample]
    cc: list[CoverageConstraint] = field(default_factory=list)
    scheme: str = "default"
    sbca_example_ids: set[str] = field(default_factory=set)
    sbca_events: list[dict] = field(default_factory=list)

    def example(self, eid: str) -> CdpiExample:
        for e in self.examples:
            if e.id == eid:
                return e
        raise KeyError(eid)


def _objective(ids: Iterable[int], sacrificed: Iterable[str], cost_of, weight_of) -> float:
    return sum(cost_of[i] for i in ids) + sum(weight_of[e] for e in sacrificed)


class _BranchAndBound:
    """Exact minimisation of rule cost plus penalties over DNF coverage formulas.

    Ties on total cost are broken by fewer rules, then by the
    lexicographically smallest sorted id tuple.
    """

    def __init__(self, formulas: list[tuple[str, CoverageConstraint]], cost_of: dict[int, int],
                 weight_of: dict[str, float]):
        self.cost_of = cost_of
        self.weight_of = weight_of
        self.by_example: dict[str, list[tuple[Conjunction, ...]]] = {}
        for eid, cc in formulas:
            self.by_example.setdefault(eid, []).append(cc.disjuncts)
        self.best: tuple | None = None
        self.nodes = 0

    def _preprocess(self) -> tuple[set[int], set[int]]:
        inc: set[int] = set()
        exc: set[int] = set()
        changed = True
        while changed:
            changed = False
            for eid, fs in self.by_example.items():
                if self.weight_of[eid] != math.inf:
                    continue
                for disj in fs:
                    alive = [d for d in disj if not (d.pos & exc) and not (d.neg & inc)]
                    if not alive:
                        raise UnsatisfiableTask(f"example {eid} cannot be covered")
                    if len(alive) == 1:
                        d = alive[0]
                        if d.pos - inc or d.neg - exc:
                            if d.pos & d.neg:
                                raise UnsatisfiableTask(f"example {eid} cannot be covered")
                            inc |= d.pos
                            exc |= d.neg
                            changed = True
            if inc & exc:
                raise UnsatisfiableTask("forced inclusions contradict forced exclusions")
        # a rule is only worth choosing when it appears positively somewhere
        useful = set()
        for fs in self.by_example.values():
            for disj in fs:
                for d in disj:
                    useful |= d.pos
        self.universe = useful - exc
        self._dominance(inc, exc)
        return inc, exc

    def _dominance(self, inc: set[int], exc: set[int]) -> None:
        """Exclude rules another rule beats on every formula and on (cost, id)."""
        pos_occ: dict[int, int] = {i: 0 for i in self.universe}
        neg_occ: dict[int, int] = {i: 0 for i in self.universe}
        exempt: set[int] = set()
        fslot = dslot = 0
        for fs in self.by_example.values():
            for disj in fs:
                fbit = 1 << fslot
                fslot += 1
                for d in disj:
                    dbit = 1 << dslot
                    dslot += 1
                    if len(d.pos) == 1 and not d.neg:
                        (i,) = d.pos
                        if i in pos_occ:
                            pos_occ[i] |= fbit
                    else:
                        exempt |= d.pos & self.universe
                    for i in d.neg:
                        if i in neg_occ:
                            neg_occ[i] |= dbit
        cand = sorted(self.universe - exempt - inc, key=lambda i: (self.cost_of[i], i))
        groups: dict[tuple[int, int], int] = {}
        removed = set()
        for i in cand:
            sig = (pos_occ[i], neg_occ[i])
            if sig in groups:
                removed.add(i)
            else:
                groups[sig] = i
        reps = sorted(groups.values(), key=lambda i: (self.cost_of[i], i))
        for k, j in enumerate(reps):
            pj, nj = pos_occ[j], neg_occ[j]
            for i in reps[:k]:
                if i in removed:
                    continue
                if pos_occ[i] & pj == pj and neg_occ[i] & nj == neg_occ[i]:
                    removed.add(j)
                    break
        exc |= removed
        self.universe -= removed

    def run(self) -> tuple[tuple[int, ...], frozenset[str]]:
        inc, exc = self._preprocess()
        self._search(set(inc), set(exc), frozenset())
        if self.best is None:
            raise UnsatisfiableTask("no hypothesis satisfies the infinite-weight examples")
        _, _, ids, sac = self.best
        return ids, sac

    def _status(self, inc: set[int], exc: set[int], sacrificed: frozenset[str]):
        """Violated formulas with their alive disjuncts; None when an infinite example is lost."""
        violated = []
        lost = set()
        for eid, fs in self.by_example.items():
            if eid in sacrificed:
                continue
            for disj in fs:
                if any(d.holds(inc) for d in disj):
                    continue
                alive = [d for d in disj if not (d.pos & exc) and not (d.neg & inc)]
                if not alive:
                    if self.weight_of[eid] == math.inf:
                        return None, None
                    lost.add(eid)
                    break
                violated.append((eid, alive))
        return violated, lost

    def _bound(self, inc, sacrificed, violated) -> tuple[float, int]:
        cost = _objective(inc, sacrificed, self.cost_of, self.weight_of)
        count = len(inc)
        used_ids: set[int] = set()
        used_ex: set[str] = set()
        scored = []
        for eid, alive in violated:
            needs = [d.pos - inc for d in alive]
            c = min(sum(self.cost_of[i] for i in n) for n in needs)
            w = self.weight_of[eid]
            n_min = 0 if w != math.inf else min(len(n) for n in needs)
            scored.append((min(c, w), n_min, eid, set().union(*needs)))
        scored.sort(key=lambda t: (-t[0], -t[1]))
        for c, n, eid, ids in scored:
            if eid in used_ex or ids & used_ids:
                continue
            used_ex.add(eid)
            used_ids |= ids
            cost += c
            count += n
        return cost, count

    def _search(self, inc: set[int], exc: set[int], sacrificed: frozenset[str]) -> None:
        self.nodes += 1
        violated, lost = self._status(inc, exc, sacrificed)
        if violated is None:
            return
        if lost:
            sacrificed = sacrificed | lost
            violated, _ = self._status(inc, exc, sacrificed)
            if violated is None:
                return
        lb_cost, lb_count = self._bound(inc, sacrificed, violated)
        if self.best is not None and (lb_cost, lb_count) > self.best[:2]:
            return
        if not violated:
            cand = (_objective(inc, sacrificed, self.cost_of, self.weight_of), len(inc),
                    tuple(sorted(inc)), sacrificed)
            if self.best is None or cand[:3] < self.best[:3]:
                self.best = cand
            return
        eid, alive = min(violated, key=lambda t: (len(t[1]), t[0]))
        alive = sorted(alive, key=lambda d: (sum(self.cost_of[i] for i in d.pos - inc), sorted(d.pos)))
        singles = all(len(d.pos) == 1 and not d.neg for d in alive)
        blocked: set[int] = set()
        for d in alive:
            new_inc = inc | d.pos
            new_exc = exc | d.neg | blocked
            if not (new_inc & new_exc):
                self._search(new_inc, new_exc, sacrificed)
            if singles:
                blocked |= d.pos
        if self.weight_of[eid] != math.inf:
            self._search(inc, exc | blocked, sacrificed | {eid})


def optimize(state: LearnerState) -> tuple[list[Constraint], set[str]]:
    """Cheapest hypothesis plus the finite-weight examples it gives up on."""
    weight_of = {e.id: e.weight for e in state.examples}
    formulas = []
    for cc in state.cc:
        if cc.example_id not in weight_of:
            raise InvariantError(f"coverage constraint for unknown example {cc.example_id}")
        for i in cc.ids:
            if i not in state.space.by_id:
                raise InvariantError(f"coverage constraint mentions unknown id {i}")
        formulas.append((cc.example_id, cc))
    cost_of = {c.id: c.cost(state.scheme) for c in state.space}
    bb = _BranchAndBound(formulas, cost_of, weight_of)
    ids, sacrificed = bb.run()
    return [state.space[i] for i in ids], set(sacrificed)


def hypothesis_cost(h: Iterable[Constraint], scheme: str) -> int:
    return sum(c.cost(scheme) for c in h)


# ---------------------------------------------------------------- enumeration flagging

def enumeration_exceeds(inst: PupInstance, limit_ms: float = SBCA_ENUMERATION_LIMIT_MS) -> bool:
    """True when enumerating every solution of ``inst`` takes longer than ``limit_ms``."""
    from .pup_solver import run_count

    return run_count(inst, cfg=SearchConfig(timeout=limit_ms)).timed_out


# ---------------------------------------------------------------- main loop

@dataclass
class LearnReport:
    hypothesis: list[Constraint]
    optimal: bool
    sacrificed: list[str]
    iterations: list[dict]
    elapsed_ms: float
    indeterminate: list[str]
    scheme: str

    def to_json(self) -> str:
        return json.dumps({
            "hypothesis": [str(c) for c in self.hypothesis],
            "hypothesis_ids": [c.id for c in self.hypothesis],
            "cost": hypothesis_cost(self.hypothesis, self.scheme),
            "scheme": self.scheme,
            "optimal": self.optimal,
            "sacrificed": sorted(self.sacrificed),
            "indeterminate": sorted(self.indeterminate),
            "elapsed_ms": round(self.elapsed_ms, 3),
            "iterations": self.iterations,
        }, indent=2, sort_keys=True)


def _covered(e: CdpiExample, grounded, timeout_ms):
    exists, witness = accepting_answer_set_exists(e.context, e.inclusions, e.exclusions,
                                                  grounded=grounded, timeout_ms=timeout_ms)
    if exists is None:
        return None, None
    return (exists if e.positive else not exists), witness


def cdilp(state: LearnerState, budget_ms: float | None = None, check_timeout_ms: float = 10000.0,
          max_candidates: int = 2000, candidate_timeout_ms: float = 5000.0) -> tuple[list[Constraint], LearnReport]:
    """Optimise, verify, analyse conflicts; repeat until no new conflict appears."""
    t0 = time.perf_counter()
    table = RuleTable(state.space)
    seen_pairs: set[tuple[frozenset[int], str]] = set()
    iterations: list[dict] = []
    hyp: list[Constraint] = []
    sacrificed: set[str] = set()
    optimal = False
    indeterminate: set[str] = set()

    def elapsed():
        return (time.perf_counter() - t0) * 1000

    while True:
        it_start = time.perf_counter()
        hyp, sacrificed = optimize(state)
        hids = frozenset(c.id for c in hyp)
        grounded_cache: dict[str, list] = {}
        indeterminate = set()
        new: list[CoverageConstraint] = []
        methods: list[dict] = []
        expired = False
        for e in sorted(state.examples, key=lambda x: x.id):
            if e.id in sacrificed:
                continue
            if budget_ms is not None and elapsed() > budget_ms:
                expired = True
                break
            key = e.context_key
            if key not in grounded_cache:
                grounded_cache[key] = ground_all(hyp, e.context)
            covered, witness = _covered(e, grounded_cache[key], check_timeout_ms)
            if covered is None:
                log.warning("coverage check of %s timed out; skipped this iteration", e.id)
                indeterminate.add(e.id)
                continue
            if covered:
                continue
            pair = (hids, e.id)
            if pair in seen_pairs:
                raise InvariantError(f"conflict for {e.id} under the same hypothesis analysed twice")
            seen_pairs.add(pair)
            if not e.positive:
                cc = semantic_conflict_negative(e, hyp, state.space, witness=witness, table=table)
            elif e.id in state.sbca_example_ids:
                cc = sbca(e, hyp, state.space)
            else:
                try:
                    cc = semantic_conflict_positive(e, hyp, state.space, max_candidates=max_candidates,
                                                    timeout_ms=candidate_timeout_ms, table=table)
                except BudgetExceeded:
                    state.sbca_example_ids.add(e.id)
                    cc = sbca(e, hyp, state.space)
            if cc.method == "sbca":
                state.sbca_events.append({"example": e.id, "hypothesis": sorted(hids), "formula": cc})
            if cc.holds(hids):
                raise InvariantError(f"conflict for {e.id} does not exclude the current hypothesis")
            new.append(cc)
            methods.append({"example": e.id, "method": cc.method, "disjuncts": len(cc.disjuncts)})
        state.cc.extend(new)
        iterations.append({
            "iteration": len(iterations) + 1,
            "cc_size": len(state.cc),
            "cost": hypothesis_cost(hyp, state.scheme),
            "hypothesis_ids": sorted(hids),
            "analyzed": methods,
            "elapsed_ms": round((time.perf_counter() - it_start) * 1000, 3),
        })
        if expired:
            break
        if not new:
            optimal = not indeterminate
            break
        if budget_ms is not None and elapsed() > budget_ms:
            break
    report = LearnReport(hyp, optimal, sorted(sacrificed), iterations, elapsed(), sorted(indeterminate), state.scheme)
    return hyp, report
