"""Training examples for constraint learning.

Two strategies turn solutions of small instances into labelled partial
interpretations over atoms(Π): *scalable enum* samples random solutions and
labels them by the single-generator lex check, *scalable fullSBCs* closes
whole orbits and keeps their lex-leaders as positives.
"""

from __future__ import annotations

import logging
import math
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvariantError, ParseError
from .pup_core import GroundAtom, PupInstance, Solution, parse_instance, solution_atoms, write_instance
from .pup_solver import SearchConfig, SearchTimeout, SolutionStream, solve_one
from .symmetry import AtomOrder, AtomPermutation, dominated, lex_smallest, orbit

log = logging.getLogger(__name__)

POSITIVE, NEGATIVE = "positive", "negative"
INF = math.inf


@dataclass(frozen=True)
class CdpiExample:
    id: str
    label: str
    inclusions: frozenset[GroundAtom]
    exclusions: frozenset[GroundAtom]
    context: PupInstance = field(compare=False)
    weight: float = INF

    def __post_init__(self):
        if self.label not in (POSITIVE, NEGATIVE):
            raise InvariantError(f"bad label {self.label!r}")
        if self.inclusions & self.exclusions:
            raise InvariantError(f"example {self.id}: inclusions and exclusions overlap")
        if not (self.weight == INF or (isinstance(self.weight, int) and self.weight > 0)):
            raise InvariantError(f"example {self.id}: weight must be a positive integer or infinite")
        if self.label == NEGATIVE and self.weight == INF:
            raise InvariantError(f"example {self.id}: negative examples need a finite weight")

    @property
    def positive(self) -> bool:
        return self.label == POSITIVE

    @property
    def context_key(self) -> str:
        return write_instance(self.context)


class ExampleSet(list):
    """List of examples plus generation diagnostics."""

    def __init__(self, items: Iterable[CdpiExample] = (), diagnostic: str | None = None):
        super().__init__(items)
        self.diagnostic = diagnostic

    @property
    def positives(self) -> list[CdpiExample]:
        return [e for e in self if e.positive]

    @property
    def negatives(self) -> list[CdpiExample]:
        return [e for e in self if not e.positive]

    @property
    def one_sided(self) -> bool:
        """True when the set lacks either label; such learning tasks are degenerate."""
        return not self.positives or not self.negatives


def _tag(inst: PupInstance) -> str:
    return re.sub(r"\W", "_", inst.name) or "inst"


def partial_interpretation(inst: PupInstance, sol: Solution, order: AtomOrder):
    present = solution_atoms(inst, sol)
    vocab = set(order.atoms)
    inc = frozenset(vocab & present)
    return inc, frozenset(vocab - inc)


def _example(inst, sol, order, label, ident, weight) -> CdpiExample:
    inc, exc = partial_interpretation(inst, sol, order)
    return CdpiExample(ident, label, inc, exc, inst, weight)


def _empty(inst: PupInstance, what: str) -> ExampleSet:
    msg = f"{inst.name or 'instance'} is unsatisfiable; {what} produced no examples"
    log.warning(msg)
    return ExampleSet(diagnostic=msg)


def scalable_enum(inst: PupInstance, gens: Sequence[AtomPermutation], order: AtomOrder, n: int,
                  seed: int = 0, positive_weight: float = INF, negative_weight: int = 1,
                  max_attempts: int | None = None, timeout_ms: float | None = None) -> ExampleSet:
    """Label up to ``n`` distinct random solutions by the single-generator dominance check.

    Each draw is an independent randomized first-solution search with a seed
    derived from ``seed``; repeated draws are discarded.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    attempts = max_attempts if max_attempts is not None else 20 * n
    seen: list[Solution] = []
    seen_set: set[Solution] = set()
    for _ in range(attempts):
        if len(seen) >= n:
            break
        cfg = SearchConfig(seed=rng.getrandbits(64), randomize_values=True, timeout=timeout_ms)
        try:
            sol = solve_one(inst, (), cfg)
        except SearchTimeout:
            continue
        if sol is None:
            return _empty(inst, "scalable_enum")
        if sol not in seen_set:
            seen_set.add(sol)
            seen.append(sol)
    tag = _tag(inst)
    out = ExampleSet()
    for k, sol in enumerate(seen, 1):
        if dominated(sol, gens, order):
            out.append(_example(inst, sol, order, NEGATIVE, f"{tag}_n{k}", negative_weight))
        else:
            out.append(_example(inst, sol, order, POSITIVE, f"{tag}_p{k}", positive_weight))
    if out.one_sided:
        out.diagnostic = "one-sided example set"
        log.warning("%s: scalable_enum produced a one-sided example set", inst.name)
    return out


def scalable_fullsbcs(inst: PupInstance, gens: Sequence[AtomPermutation], order: AtomOrder,
                      cells: int | None, max_cell_size: int, seed: int = 0,
                      positive_weight: float = INF, negative_weight: int = 1,
                      timeout_ms: float | None = None) -> ExampleSet:
    """Close up to ``cells`` orbits of randomly found solutions.

    The lex-smallest member of each orbit becomes a positive; the first
    ``max_cell_size`` members in closure order, minus that minimum, become
    negatives.  ``cells=None`` analyses every orbit (exhaustive debug mode).
    """
    if cells is not None and cells < 1:
        raise ValueError("cells must be positive")
    if max_cell_size < 0:
        raise ValueError("max_cell_size must be non-negative")
    stream = SolutionStream(inst, (), SearchConfig(seed=seed, randomize_values=True, timeout=timeout_ms))
    explored: set[Solution] = set()
    tag = _tag(inst)
    out = ExampleSet()
    done = 0
    any_solution = False
    for sol in stream:
        any_solution = True
        if sol in explored:
            continue
        members = orbit(sol, gens).members
        explored.update(members)
        done += 1
        leader = lex_smallest(members, order)
        out.append(_example(inst, leader, order, POSITIVE, f"{tag}_c{done}_p", positive_weight))
        k = 0
        for m in members[:max_cell_size]:
            if m == leader:
                continue
            k += 1
            out.append(_example(inst, m, order, NEGATIVE, f"{tag}_c{done}_n{k}", negative_weight))
        if cells is not None and done >= cells:
            break
    if not any_solution:
        if stream.truncated:
            out.diagnostic = "search timed out before the first solution"
            return out
        return _empty(inst, "scalable_fullsbcs")
    if out.one_sided:
        out.diagnostic = "one-sided example set"
        log.warning("%s: scalable_fullsbcs produced a one-sided example set", inst.name)
    return out


def gen_positive(inst: PupInstance) -> CdpiExample:
    return CdpiExample(f"gen_{_tag(inst)}", POSITIVE, frozenset(), frozenset(), inst, INF)


# ---------------------------------------------------------------- text form

def _atoms_text(atoms: Iterable[GroundAtom]) -> str:
    return "{" + ", ".join(str(a) for a in sorted(atoms)) + "}"


def write_example(e: CdpiExample) -> str:
    head = "#pos" if e.positive else "#neg"
    ident = e.id if e.weight == INF else f"{e.id}@{e.weight}"
    ctx = " ".join(write_instance(e.context).split())
    return f"{head}({ident}, {_atoms_text(e.inclusions)}, {_atoms_text(e.exclusions)}, {{{ctx}}}).\n"


def write_examples(examples: Iterable[CdpiExample]) -> str:
    return "".join(write_example(e) for e in examples)


_EXAMPLE = re.compile(r"#(pos|neg)\(\s*([\w]+)(?:@(\d+))?\s*,\s*\{([^}]*)\}\s*,\s*\{([^}]*)\}\s*,\s*\{([^}]*)\}\s*\)\.")
_ATOM = re.compile(r"(\w+)\((\d+),(\d+)\)")


def _parse_atoms(text: str) -> frozenset[GroundAtom]:
    text = text.strip()
    if not text:
        return frozenset()
    out = []
    for part in text.split("),"):
        part = part.strip()
        if not part.endswith(")"):
            part += ")"
        m = _ATOM.fullmatch(part.replace(" ", ""))
        if not m:
            raise ParseError(f"malformed atom {part!r}")
        out.append(GroundAtom(m.group(1), int(m.group(2)), int(m.group(3))))
    return frozenset(out)


def parse_examples(text: str) -> list[CdpiExample]:
    out = []
    contexts: dict[str, PupInstance] = {}
    pos = 0
    for m in _EXAMPLE.finditer(text):
        if text[pos:m.start()].strip():
            raise ParseError(f"unexpected text {text[pos:m.start()].strip()[:40]!r}")
        pos = m.end()
        kind, ident, w, inc, exc, ctx = m.groups()
        if ctx not in contexts:
            contexts[ctx] = parse_instance(ctx.replace(". ", ".\n"))
        weight = INF if w is None else int(w)
        out.append(CdpiExample(ident, POSITIVE if kind == "pos" else NEGATIVE,
                               _parse_atoms(inc), _parse_atoms(exc), contexts[ctx], weight))
    if text[pos:].strip():
        raise ParseError(f"unexpected text {text[pos:].strip()[:40]!r}")
    return out
