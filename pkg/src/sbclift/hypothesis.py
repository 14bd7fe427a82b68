"""Hypothesis space of headless first-order constraints.

Constraints are bodies of at most three literals over at most three variables
``V1..V3``.  Every constraint is stored in canonical form so that two
constraints equal up to variable renaming (and argument order of symmetric
predicates) compare equal.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .errors import ParseError

V_MAX = 3
B_MAX = 3

# predicates whose literals keep cost 1 under the custom scheme
DOMAIN_PREDICATES = frozenset({"r", "close", "zone2sensor", "closesensors", "closezones"})
SYMMETRIC_PREDICATES = frozenset({"close", "closesensors", "closezones"})


class Literal(NamedTuple):
    predicate: str
    positive: bool
    a: int
    b: int

    def __str__(self) -> str:
        atom = f"{self.predicate}(V{self.a},V{self.b})"
        return atom if self.positive else f"not {atom}"


@dataclass(frozen=True)
class ModeDecl:
    recall: int
    predicate: str
    placeholder_types: tuple[str, str] = ("t", "t")
    modifiers: frozenset[str] = frozenset()

    def __post_init__(self):
        bad = set(self.modifiers) - {"symmetric", "anti_reflexive"}
        if bad:
            raise ValueError(f"unknown modifiers {sorted(bad)}")
        if self.recall < 1:
            raise ValueError("recall must be positive")

    @property
    def symmetric(self) -> bool:
        return "symmetric" in self.modifiers

    @property
    def anti_reflexive(self) -> bool:
        return "anti_reflexive" in self.modifiers

    def __str__(self) -> str:
        t1, t2 = self.placeholder_types
        mods = f",({','.join(sorted(self.modifiers))})" if self.modifiers else ""
        return f"#modeb({self.recall},{self.predicate}(var({t1}),var({t2})){mods})."


_MODEB = re.compile(
    r"#modeb\(\s*(?:(\d+)\s*,)?\s*(\w+)\(\s*var\((\w+)\)\s*,\s*var\((\w+)\)\s*\)\s*"
    r"(?:,\s*\(([^)]*)\))?\s*\)\s*\.?"
)


def parse_modeb(text: str) -> ModeDecl:
    m = _MODEB.fullmatch(text.strip())
    if not m:
        raise ParseError(f"malformed mode declaration {text!r}")
    mods = frozenset(x.strip() for x in (m.group(5) or "").split(",") if x.strip())
    return ModeDecl(int(m.group(1) or 1), m.group(2), (m.group(3), m.group(4)), mods)


def parse_bias(text: str) -> list[ModeDecl]:
    return [parse_modeb(line) for line in text.splitlines() if line.strip().startswith("#modeb")]


# the generic scheme with abstract predicate names r, close, pGEQ, q
GENERIC_BIAS_TEXT = """\
#modeb(1,r(var(t),var(t))).
#modeb(1,close(var(t),var(t)),(symmetric,anti_reflexive)).
#modeb(2,pGEQ(var(t),var(t))).
#modeb(1,q(var(t),var(t))).
"""

PUP_BIAS_TEXT = """\
#modeb(1,zone2sensor(var(t),var(t))).
#modeb(1,closesensors(var(t),var(t)),(symmetric,anti_reflexive)).
#modeb(1,closezones(var(t),var(t)),(symmetric,anti_reflexive)).
#modeb(2,unit2zoneGEQ(var(t),var(t))).
#modeb(2,unit2sensorGEQ(var(t),var(t))).
#modeb(1,partnerunits(var(t),var(t))).
"""


def generic_bias() -> list[ModeDecl]:
    return parse_bias(GENERIC_BIAS_TEXT)


def pup_bias() -> list[ModeDecl]:
    return parse_bias(PUP_BIAS_TEXT)


# ---------------------------------------------------------------- canonical form

def _norm(lit: Literal, symmetric: frozenset[str]) -> Literal:
    if lit.predicate in symmetric and lit.a > lit.b:
        return Literal(lit.predicate, lit.positive, lit.b, lit.a)
    return lit


def _sort_key(lit: Literal):
    return (lit.predicate, lit.positive, lit.a, lit.b)


def canonical_body(body: Iterable[Literal], symmetric: frozenset[str] = frozenset()) -> tuple[Literal, ...]:
    """Minimal sorted literal tuple over all renamings of the body's variables to V1..Vk."""
    body = list(body)
    variables = sorted({v for lit in body for v in (lit.a, lit.b)})
    best = None
    for perm in itertools.permutations(range(1, len(variables) + 1)):
        ren = dict(zip(variables, perm))
        cand = tuple(sorted(
            {_norm(Literal(l.predicate, l.positive, ren[l.a], ren[l.b]), symmetric) for l in body},
            key=_sort_key,
        ))
        key = tuple(_sort_key(l) for l in cand)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1] if best else ()


@dataclass(frozen=True)
class Constraint:
    id: int = field(compare=False)
    body: tuple[Literal, ...]
    cost_default: int = field(compare=False, default=0)
    cost_custom: int = field(compare=False, default=0)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted({v for l in self.body for v in (l.a, l.b)}))

    def cost(self, scheme: str) -> int:
        return self.cost_custom if scheme == "custom" else self.cost_default

    def __str__(self) -> str:
        return ":- " + ", ".join(str(l) for l in self.body) + "."


def custom_literal_cost(lit: Literal, domain_predicates=DOMAIN_PREDICATES) -> int:
    if lit.predicate in domain_predicates:
        return 1
    return 2 if lit.a == lit.b else 3


def score(r: Constraint | Sequence[Literal], scheme: str = "default",
          domain_predicates=DOMAIN_PREDICATES) -> int:
    """Rule cost: number of literals (default) or the per-literal custom costs."""
    body = r.body if isinstance(r, Constraint) else tuple(r)
    if scheme == "default":
        return len(body)
    if scheme == "custom":
        return sum(custom_literal_cost(l, domain_predicates) for l in body)
    raise ValueError(f"unknown scoring scheme {scheme!r}")


def make_constraint(body: Iterable[Literal], symmetric: frozenset[str] = SYMMETRIC_PREDICATES, cid: int = 0,
                    domain_predicates=DOMAIN_PREDICATES) -> Constraint:
    canon = canonical_body(body, symmetric)
    return Constraint(cid, canon, score(canon, "default"), score(canon, "custom", domain_predicates))


_LIT = re.compile(r"(not\s+)?(\w+)\(\s*V(\d+)\s*,\s*V(\d+)\s*\)")


def parse_body(text: str) -> list[Literal]:
    text = text.strip()
    if text.startswith(":-"):
        text = text[2:]
    text = text.strip().rstrip(".")
    lits, pos = [], 0
    for m in _LIT.finditer(text):
        gap = text[pos:m.start()].strip()
        if gap != ("," if lits else ""):
            raise ParseError(f"unexpected text {gap!r} in constraint")
        lits.append(Literal(m.group(2), m.group(1) is None, int(m.group(3)), int(m.group(4))))
        pos = m.end()
    if text[pos:].strip() or not lits:
        raise ParseError(f"malformed constraint {text!r}")
    return lits


def is_safe(body: Iterable[Literal]) -> bool:
    body = list(body)
    pos_vars = {v for l in body if l.positive for v in (l.a, l.b)}
    all_vars = {v for l in body for v in (l.a, l.b)}
    return bool(pos_vars) and all_vars <= pos_vars


# ---------------------------------------------------------------- subsumption

def subsumes(r1: Constraint | Sequence[Literal], r2: Constraint | Sequence[Literal],
             symmetric: frozenset[str] = frozenset()) -> bool:
    """Theta-subsumption: some substitution maps every literal of r1 into r2's body."""
    b1 = r1.body if isinstance(r1, Constraint) else tuple(r1)
    b2 = r2.body if isinstance(r2, Constraint) else tuple(r2)
    target = {_norm(l, symmetric) for l in b2}
    if not {(l.predicate, l.positive) for l in b1} <= {(l.predicate, l.positive) for l in b2}:
        return False
    v1 = sorted({v for l in b1 for v in (l.a, l.b)})
    v2 = sorted({v for l in b2 for v in (l.a, l.b)}) or [1]
    for image in itertools.product(v2, repeat=len(v1)):
        theta = dict(zip(v1, image))
        if all(_norm(Literal(l.predicate, l.positive, theta[l.a], theta[l.b]), symmetric) in target
               for l in b1):
            return True
    return False


class HypothesisSpace:
    """Indexed list of canonical constraints with cached subsumer queries."""

    def __init__(self, constraints: Sequence[Constraint], symmetric: frozenset[str] = frozenset()):
        self.constraints = list(constraints)
        self.symmetric = frozenset(symmetric)
        self.by_id = {c.id: c for c in self.constraints}
        self.by_body = {c.body: c for c in self.constraints}
        self._sig = {c.id: frozenset((l.predicate, l.positive) for l in c.body) for c in self.constraints}
        self._subsumers: dict[int, tuple[Constraint, ...]] = {}

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __getitem__(self, cid: int) -> Constraint:
        return self.by_id[cid]

    def lookup(self, body: Iterable[Literal] | str) -> Constraint:
        if isinstance(body, str):
            body = parse_body(body)
        canon = canonical_body(body, self.symmetric)
        try:
            return self.by_body[canon]
        except KeyError:
            raise KeyError(f"constraint not in space: :- {', '.join(map(str, canon))}.") from None

    def subsumers(self, r: Constraint) -> tuple[Constraint, ...]:
        hit = self._subsumers.get(r.id)
        if hit is None:
            sig = self._sig[r.id]
            hit = tuple(c for c in self.constraints
                        if self._sig[c.id] <= sig and subsumes(c, r, self.symmetric))
            self._subsumers[r.id] = hit
        return hit

    def export(self) -> str:
        return "".join(f"{c.id}: {c}\n" for c in self.constraints)


def subsumers(r: Constraint, space: HypothesisSpace) -> list[Constraint]:
    if r.id not in space.by_id:
        raise ValueError("constraint is not a member of the space")
    return list(space.subsumers(r))


def _literal_candidates(decl: ModeDecl, vmax: int) -> list[Literal]:
    out = []
    for a in range(1, vmax + 1):
        for b in range(1, vmax + 1):
            if decl.anti_reflexive and a == b:
                continue
            if decl.symmetric and a > b:
                continue
            for positive in (True, False):
                out.append(Literal(decl.predicate, positive, a, b))
    return out


def _types_consistent(combo, types_of) -> bool:
    seen: dict[int, str] = {}
    for lit in combo:
        ta, tb = types_of[lit.predicate]
        for v, t in ((lit.a, ta), (lit.b, tb)):
            if seen.setdefault(v, t) != t:
                return False
    return True


def build_space(bias: Sequence[ModeDecl], vmax: int = V_MAX, bmax: int = B_MAX,
                domain_predicates=DOMAIN_PREDICATES) -> HypothesisSpace:
    """All safe, canonical, recall-respecting constraints, one per isomorphism class."""
    symmetric = frozenset(d.predicate for d in bias if d.symmetric)
    recall = {d.predicate: d.recall for d in bias}
    types_of = {d.predicate: d.placeholder_types for d in bias}
    cands = [lit for d in bias for lit in _literal_candidates(d, vmax)]
    bodies = set()
    for size in range(1, bmax + 1):
        for combo in itertools.combinations(cands, size):
            counts: dict[str, int] = {}
            for lit in combo:
                counts[lit.predicate] = counts.get(lit.predicate, 0) + 1
            if any(n > recall[p] for p, n in counts.items()):
                continue
            atoms = {(l.predicate, l.a, l.b) for l in combo}
            if len(atoms) < len(combo):
                continue  # same atom under both signs
            if not is_safe(combo) or not _types_consistent(combo, types_of):
                continue
            bodies.add(canonical_body(combo, symmetric))
    ordered = sorted(bodies, key=lambda b: (len(b), tuple(_sort_key(l) for l in b)))
    constraints = [
        Constraint(i, body, score(body, "default"), score(body, "custom", domain_predicates))
        for i, body in enumerate(ordered, 1)
    ]
    return HypothesisSpace(constraints, symmetric)


def parse_constraints(text: str, space: HypothesisSpace | None = None) -> list[Constraint]:
    """Constraints one per line (``%`` comments and ``id:`` prefixes allowed)."""
    out = []
    for line in text.splitlines():
        line = line.split("%", 1)[0].strip()
        if not line:
            continue
        line = re.sub(r"^\d+\s*:\s*", "", line)
        body = parse_body(line)
        if space is not None:
            out.append(space.lookup(body))
        else:
            out.append(make_constraint(body, cid=len(out) + 1))
    return out


def write_constraints(constraints: Iterable[Constraint]) -> str:
    return "".join(f"{c}\n" for c in constraints)
