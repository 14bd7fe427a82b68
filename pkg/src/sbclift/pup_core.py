"""Partner Unit Problem instances, solutions and the ground-atom vocabulary.

An instance is a bipartite graph of zones and sensors plus a pool of
interchangeable units.  A solution places every zone and every sensor on a
unit such that

* a unit holds at most ``ucap`` zones and at most ``ucap`` sensors, and
* a unit is adjacent to at most ``iucap`` other units, where two units are
  adjacent when some edge joins a zone on one to a sensor on the other.

All ids are 1-based contiguous integers.

Instance families
-----------------
``double``  2 x k grid of rooms (zones), one sensor per door between
            neighbouring rooms.  Zones are numbered row-major; sensors are
            numbered by walking the zones row-major and emitting the door to
            the right, then the door below.  ``double-6`` is the six-room
            building of the classic example (7 sensors, 14 edges).
``triple``  a 2 x k double grid plus a third row of k side rooms, each with a
            single door onto the room above it (zones a multiple of 3).
``doublev`` two corridors of lengths ceil(n/2) and floor(n/2) numbered
            column-major; allows odd zone counts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from .errors import DomainError, InvariantError, ParseError

ASSIGN_PREDICATES = ("unit2zone", "unit2sensor")
GEQ_PREDICATES = ("unit2zoneGEQ", "unit2sensorGEQ")
STATIC_PREDICATES = ("zone2sensor", "closesensors", "closezones")
PREDICATES = (
    "unit2zone",
    "unit2sensor",
    "partnerunits",
    "zone2sensor",
    "unit2zoneGEQ",
    "unit2sensorGEQ",
    "closesensors",
    "closezones",
)

# argument kinds per predicate: "u" unit, "z" zone, "s" sensor
PREDICATE_SIGNATURE = {
    "unit2zone": ("u", "z"),
    "unit2sensor": ("u", "s"),
    "partnerunits": ("u", "u"),
    "zone2sensor": ("z", "s"),
    "unit2zoneGEQ": ("u", "z"),
    "unit2sensorGEQ": ("u", "s"),
    "closesensors": ("s", "s"),
    "closezones": ("z", "z"),
}

FAMILY_MIN_ZONES = {"double": 6, "doublev": 5, "triple": 6}
FAMILY_PREFIX = {"double": "dbl", "doublev": "dblv", "triple": "tri"}


class GroundAtom(NamedTuple):
    predicate: str
    a: int
    b: int

    def __str__(self) -> str:
        return f"{self.predicate}({self.a},{self.b})"


@dataclass(frozen=True)
class PupInstance:
    sensors: tuple[int, ...]
    zones: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    units: tuple[int, ...]
    ucap: int = 2
    iucap: int = 2
    name: str = ""

    def __post_init__(self):
        for label, ids in (("sensors", self.sensors), ("zones", self.zones), ("units", self.units)):
            if list(ids) != sorted(set(ids)):
                raise InvariantError(f"{label} must be sorted and duplicate-free")
            if ids and ids[0] < 1:
                raise InvariantError(f"{label} ids must be positive")
        if self.ucap < 1 or self.iucap < 1:
            raise InvariantError("ucap and iucap must be >= 1")
        zs, ss = set(self.zones), set(self.sensors)
        for z, s in self.edges:
            if z not in zs or s not in ss:
                raise InvariantError(f"edge ({z},{s}) outside zones x sensors")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n_units: int, ucap: int = 2,
                   iucap: int = 2, name: str = "", n_zones: int | None = None,
                   n_sensors: int | None = None) -> "PupInstance":
        edges = frozenset(edges)
        nz = n_zones if n_zones is not None else max((z for z, _ in edges), default=0)
        ns = n_sensors if n_sensors is not None else max((s for _, s in edges), default=0)
        return cls(
            sensors=tuple(range(1, ns + 1)),
            zones=tuple(range(1, nz + 1)),
            edges=edges,
            units=tuple(range(1, n_units + 1)),
            ucap=ucap,
            iucap=iucap,
            name=name,
        )

    def with_units(self, n_units: int, name: str | None = None) -> "PupInstance":
        return PupInstance(self.sensors, self.zones, self.edges, tuple(range(1, n_units + 1)),
                           self.ucap, self.iucap, self.name if name is None else name)

    @cached_property
    def zone_neighbors(self) -> dict[int, tuple[int, ...]]:
        nb: dict[int, list[int]] = {z: [] for z in self.zones}
        for z, s in self.edges:
            nb[z].append(s)
        return {z: tuple(sorted(v)) for z, v in nb.items()}

    @cached_property
    def sensor_neighbors(self) -> dict[int, tuple[int, ...]]:
        nb: dict[int, list[int]] = {s: [] for s in self.sensors}
        for z, s in self.edges:
            nb[s].append(z)
        return {s: tuple(sorted(v)) for s, v in nb.items()}

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def static_atoms(self) -> frozenset[GroundAtom]:
        """zone2sensor facts plus the derived close relations."""
        atoms = {GroundAtom("zone2sensor", z, s) for z, s in self.edges}
        atoms |= derive_close(self)
        return frozenset(atoms)

    def domain(self, kind: str) -> tuple[int, ...]:
        return {"u": self.units, "z": self.zones, "s": self.sensors}[kind]

    @property
    def max_id(self) -> int:
        return max(len(self.units), len(self.zones), len(self.sensors))


@dataclass(frozen=True)
class Solution:
    """Total assignment; ``zone_unit[z - 1]`` is the unit of zone ``z``."""

    zone_unit: tuple[int, ...]
    sensor_unit: tuple[int, ...]

    @classmethod
    def from_maps(cls, zone_unit: Mapping[int, int], sensor_unit: Mapping[int, int]) -> "Solution":
        return cls(tuple(zone_unit[z] for z in sorted(zone_unit)),
                   tuple(sensor_unit[s] for s in sorted(sensor_unit)))

    def zone_map(self) -> dict[int, int]:
        return {z: u for z, u in enumerate(self.zone_unit, 1)}

    def sensor_map(self) -> dict[int, int]:
        return {s: u for s, u in enumerate(self.sensor_unit, 1)}

    def to_facts(self) -> str:
        lines = [f"unit2sensor({u},{s})." for s, u in enumerate(self.sensor_unit, 1)]
        lines += [f"unit2zone({u},{z})." for z, u in enumerate(self.zone_unit, 1)]
        return "\n".join(sorted(lines, key=_fact_key)) + "\n"


def _fact_key(line: str):
    m = re.match(r"(\w+)\((-?\d+),(-?\d+)\)", line)
    return (m.group(1), int(m.group(2)), int(m.group(3))) if m else (line, 0, 0)


def partner_pairs(inst: PupInstance, sol: Solution) -> set[tuple[int, int]]:
    """Ordered pairs (u, v), u != v, of adjacent units (both orientations)."""
    pairs = set()
    for z, s in inst.edges:
        u, v = sol.zone_unit[z - 1], sol.sensor_unit[s - 1]
        if u != v:
            pairs.add((u, v))
            pairs.add((v, u))
    return pairs


def is_valid(inst: PupInstance, sol: Solution) -> bool:
    if len(sol.zone_unit) != len(inst.zones) or len(sol.sensor_unit) != len(inst.sensors):
        return False
    units = set(inst.units)
    if not (set(sol.zone_unit) <= units and set(sol.sensor_unit) <= units):
        return False
    for u in inst.units:
        if sol.zone_unit.count(u) > inst.ucap or sol.sensor_unit.count(u) > inst.ucap:
            return False
    partners: dict[int, set[int]] = {u: set() for u in inst.units}
    for u, v in partner_pairs(inst, sol):
        partners[u].add(v)
    return all(len(p) <= inst.iucap for p in partners.values())


def derive_geq(assign: Iterable[tuple[int, int]], max_unit: int) -> set[tuple[int, int]]:
    """Ordered encoding of an assignment relation ``p(X, Y)``.

    Returns every ``(x, y)`` with ``1 <= x <= max_unit`` such that ``p(x', y)``
    holds for some ``x' >= x``.  Raises InvariantError when an item carries two
    units.
    """
    top: dict[int, int] = {}
    for x, y in assign:
        if y in top and top[y] != x:
            raise InvariantError(f"item {y} assigned to both {top[y]} and {x}")
        top[y] = x
    return {(x, y) for y, xm in top.items() for x in range(1, min(xm, max_unit) + 1)}


def derive_close(inst: PupInstance) -> set[GroundAtom]:
    """closesensors/closezones: distinct nodes of one side sharing a neighbour."""
    atoms = set()
    for nbrs, pred in ((inst.zone_neighbors, "closesensors"), (inst.sensor_neighbors, "closezones")):
        for shared in nbrs.values():
            for a in shared:
                for b in shared:
                    if a != b:
                        atoms.add(GroundAtom(pred, a, b))
    return atoms


def solution_atoms(inst: PupInstance, sol: Solution) -> set[GroundAtom]:
    atoms = set(inst.static_atoms)
    u2z = [(u, z) for z, u in enumerate(sol.zone_unit, 1)]
    u2s = [(u, s) for s, u in enumerate(sol.sensor_unit, 1)]
    atoms.update(GroundAtom("unit2zone", u, z) for u, z in u2z)
    atoms.update(GroundAtom("unit2sensor", u, s) for u, s in u2s)
    atoms.update(GroundAtom("partnerunits", u, v) for u, v in partner_pairs(inst, sol))
    n = len(inst.units)
    atoms.update(GroundAtom("unit2zoneGEQ", x, z) for x, z in derive_geq(u2z, n))
    atoms.update(GroundAtom("unit2sensorGEQ", x, s) for x, s in derive_geq(u2s, n))
    return atoms


def atom_universe(inst: PupInstance, predicate: str) -> list[GroundAtom]:
    da, db = (inst.domain(k) for k in PREDICATE_SIGNATURE[predicate])
    return [GroundAtom(predicate, a, b) for a in da for b in db]


# ---------------------------------------------------------------- generators

FIG1_EDGES = frozenset({
    (1, 1), (1, 2),
    (2, 1), (2, 3), (2, 4),
    (3, 3), (3, 5),
    (4, 2), (4, 6),
    (5, 4), (5, 6), (5, 7),
    (6, 5), (6, 7),
})


def make_fig1_instance() -> PupInstance:
    """The six-zone, seven-sensor double instance with four units."""
    return PupInstance.from_edges(FIG1_EDGES, n_units=4, name="dbl-6")


def _grid_edges(rows: int, cols: int, corridors: int | None = None) -> list[tuple[int, int]]:
    # row-major zones; per zone: door to the right, then door below.
    # only the first ``corridors`` rows have doors to the right.
    corridors = rows if corridors is None else corridors

    def zid(r, c):
        return r * cols + c + 1

    edges, s = [], 0
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols and r < corridors:
                s += 1
                edges += [(zid(r, c), s), (zid(r, c + 1), s)]
            if r + 1 < rows:
                s += 1
                edges += [(zid(r, c), s), (zid(r + 1, c), s)]
    return edges


def _corridor_edges(zones: int) -> list[tuple[int, int]]:
    # two corridors, column-major ids; per column: vertical door, then doors to the next column
    top_len, bottom_len = (zones + 1) // 2, zones // 2
    ids, z = {}, 0
    for c in range(top_len):
        for r, length in ((0, top_len), (1, bottom_len)):
            if c < length:
                z += 1
                ids[r, c] = z
    edges, s = [], 0
    for c in range(top_len):
        if (1, c) in ids:
            s += 1
            edges += [(ids[0, c], s), (ids[1, c], s)]
        for r in (0, 1):
            if (r, c) in ids and (r, c + 1) in ids:
                s += 1
                edges += [(ids[r, c], s), (ids[r, c + 1], s)]
    return edges


def family_edges(family: str, zones: int) -> list[tuple[int, int]]:
    if family not in FAMILY_MIN_ZONES:
        raise DomainError(f"unknown instance family {family!r}")
    if zones < FAMILY_MIN_ZONES[family]:
        raise DomainError(f"{family} needs at least {FAMILY_MIN_ZONES[family]} zones, got {zones}")
    if family == "double":
        if zones % 2:
            raise DomainError("double instances have an even number of zones")
        return _grid_edges(2, zones // 2)
    if family == "triple":
        if zones % 3:
            raise DomainError("triple instances have a multiple of 3 zones")
        return _grid_edges(3, zones // 3, corridors=2)
    return _corridor_edges(zones)


def instance_name(family: str, zones: int, unsat: bool) -> str:
    return f"{'un-' if unsat else ''}{FAMILY_PREFIX[family]}-{zones}"


@lru_cache(maxsize=None)
def required_units(family: str, zones: int, ucap: int = 2, iucap: int = 2) -> int:
    """Smallest unit count for which the solver finds a solution."""
    from .pup_solver import SearchConfig, solve_one

    edges = family_edges(family, zones)
    base = PupInstance.from_edges(edges, 1, ucap, iucap)
    n = max(1, -(-max(len(base.zones), len(base.sensors)) // ucap))
    while n <= len(base.zones) + len(base.sensors):
        # units are interchangeable here, so proofs may fix their first-use order
        if solve_one(base.with_units(n), [], SearchConfig(first_use_units=True)) is not None:
            return n
        n += 1
    raise DomainError(f"no unit count solves {family}-{zones} with ucap={ucap}, iucap={iucap}")


def generate_instance(family: str, zones: int, unsat: bool = False, seed: int = 0,
                      ucap: int = 2, iucap: int = 2) -> PupInstance:
    """Instance of a family; ``unsat`` drops one unit below the required count.

    The families are fixed topologies, so ``seed`` does not change the
    result; it is accepted so that generation calls carry the run seed.
    """
    edges = family_edges(family, zones)
    n_units = required_units(family, zones, ucap, iucap) - (1 if unsat else 0)
    return PupInstance.from_edges(edges, n_units, ucap, iucap, name=instance_name(family, zones, unsat))


def parse_instance_name(name: str) -> tuple[str, int, bool]:
    m = re.fullmatch(r"(un-)?(dbl|dblv|tri|double|doublev|triple)-(\d+)", name.strip())
    if not m:
        raise DomainError(f"cannot parse instance name {name!r}")
    fam = {"dbl": "double", "dblv": "doublev", "tri": "triple"}.get(m.group(2), m.group(2))
    return fam, int(m.group(3)), bool(m.group(1))


def instance_from_name(name: str, seed: int = 0) -> PupInstance:
    fam, zones, unsat = parse_instance_name(name)
    return generate_instance(fam, zones, unsat, seed)


# ---------------------------------------------------------------- text format

_FACT = re.compile(r"([a-zA-Z_]\w*)\(([^)]*)\)")


def write_instance(inst: PupInstance) -> str:
    facts = [(("comUnit", u), f"comUnit({u}).") for u in inst.units]
    facts.append((("iucap", inst.iucap), f"iucap({inst.iucap})."))
    facts.append((("ucap", inst.ucap), f"ucap({inst.ucap})."))
    facts += [(("zone2sensor", z, s), f"zone2sensor({z},{s}).") for z, s in inst.sorted_edges]
    return "".join(text + "\n" for _, text in sorted(facts))


def parse_instance(text: str, name: str = "") -> PupInstance:
    edges, units, ucap, iucap = set(), set(), None, None
    body = "\n".join(line.split("%", 1)[0] for line in text.splitlines())
    for stmt in body.split("."):
        stmt = "".join(stmt.split())
        if not stmt:
            continue
        m = _FACT.fullmatch(stmt)
        if not m:
            raise ParseError(f"malformed fact {stmt!r}")
        pred = m.group(1)
        try:
            args = [int(a) for a in m.group(2).split(",")]
        except ValueError as exc:
            raise ParseError(f"non-integer argument in {stmt!r}") from exc
        if pred == "zone2sensor" and len(args) == 2:
            edges.add((args[0], args[1]))
        elif pred == "comUnit" and len(args) == 1:
            units.add(args[0])
        elif pred == "ucap" and len(args) == 1:
            ucap = args[0]
        elif pred == "iucap" and len(args) == 1:
            iucap = args[0]
        else:
            raise ParseError(f"unexpected fact {stmt!r}")
    if ucap is None or iucap is None:
        raise ParseError("instance lacks ucap/iucap")
    zones = sorted({z for z, _ in edges})
    sensors = sorted({s for _, s in edges})
    return PupInstance(tuple(sensors), tuple(zones), frozenset(edges), tuple(sorted(units)),
                       ucap, iucap, name)


def read_instance(path: str | Path) -> PupInstance:
    path = Path(path)
    return parse_instance(path.read_text(), name=path.stem)


def parse_solution(text: str) -> Solution:
    zu, su = {}, {}
    for pred, a, b in re.findall(r"(unit2zone|unit2sensor)\((\d+),(\d+)\)", text):
        (zu if pred == "unit2zone" else su)[int(b)] = int(a)
    return Solution.from_maps(zu, su)
