"""Solution symmetries: graph automorphisms times unit permutations.

Generators of the automorphism group of the zone/sensor graph are found by
individualization-refinement with orbit pruning on the first path.  Unit
interchangeability contributes the adjacent transpositions ``(i i+1)``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import ParseError
from .pup_core import GroundAtom, PupInstance, Solution, partner_pairs

ORDER_PREDICATES = ("partnerunits", "unit2sensor", "unit2zone")


@dataclass(frozen=True)
class AtomPermutation:
    """``zone_map[z - 1]`` is the image of zone z; likewise sensors and units."""

    zone_map: tuple[int, ...]
    sensor_map: tuple[int, ...]
    unit_map: tuple[int, ...]

    @classmethod
    def identity(cls, inst: PupInstance) -> "AtomPermutation":
        return cls(tuple(inst.zones), tuple(inst.sensors), tuple(inst.units))

    @property
    def vertex_map(self) -> dict[tuple[str, int], tuple[str, int]]:
        m = {("z", z): ("z", w) for z, w in enumerate(self.zone_map, 1)}
        m.update({("s", s): ("s", w) for s, w in enumerate(self.sensor_map, 1)})
        return m

    def is_identity(self) -> bool:
        return all(m == tuple(range(1, len(m) + 1)) for m in (self.zone_map, self.sensor_map, self.unit_map))

    def inverse(self) -> "AtomPermutation":
        def inv(m):
            out = [0] * len(m)
            for i, x in enumerate(m, 1):
                out[x - 1] = i
            return tuple(out)

        return AtomPermutation(inv(self.zone_map), inv(self.sensor_map), inv(self.unit_map))

    def compose(self, other: "AtomPermutation") -> "AtomPermutation":
        """``self`` after ``other``."""
        return AtomPermutation(
            tuple(self.zone_map[x - 1] for x in other.zone_map),
            tuple(self.sensor_map[x - 1] for x in other.sensor_map),
            tuple(self.unit_map[x - 1] for x in other.unit_map),
        )

    def preserves_edges(self, inst: PupInstance) -> bool:
        image = {(self.zone_map[z - 1], self.sensor_map[s - 1]) for z, s in inst.edges}
        return image == set(inst.edges)

    def map_atom(self, atom: GroundAtom) -> GroundAtom:
        p, a, b = atom
        zm, sm, um = self.zone_map, self.sensor_map, self.unit_map
        if p in ("unit2zone", "unit2zoneGEQ"):
            return GroundAtom(p, um[a - 1], zm[b - 1])
        if p in ("unit2sensor", "unit2sensorGEQ"):
            return GroundAtom(p, um[a - 1], sm[b - 1])
        if p == "partnerunits":
            return GroundAtom(p, um[a - 1], um[b - 1])
        if p == "zone2sensor":
            return GroundAtom(p, zm[a - 1], sm[b - 1])
        if p == "closezones":
            return GroundAtom(p, zm[a - 1], zm[b - 1])
        if p == "closesensors":
            return GroundAtom(p, sm[a - 1], sm[b - 1])
        raise ValueError(f"unknown predicate {p!r}")

    def __str__(self) -> str:
        units = _cycles(self.unit_map, "")
        verts = _cycles(self.zone_map, "z") + _cycles(self.sensor_map, "s")
        return f"units: {units or '()'}; vertices: {verts or '()'}"


def _cycles(m: Sequence[int], prefix: str) -> str:
    seen, out = set(), []
    for start in range(1, len(m) + 1):
        if start in seen or m[start - 1] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(f"{prefix}{x}")
            x = m[x - 1]
        out.append("(" + " ".join(cyc) + ")")
    return "".join(out)


def apply(perm: AtomPermutation, sol: Solution) -> Solution:
    um = perm.unit_map
    zu = [0] * len(sol.zone_unit)
    for z, u in enumerate(sol.zone_unit):
        zu[perm.zone_map[z] - 1] = um[u - 1]
    su = [0] * len(sol.sensor_unit)
    for s, u in enumerate(sol.sensor_unit):
        su[perm.sensor_map[s] - 1] = um[u - 1]
    return Solution(tuple(zu), tuple(su))


# ---------------------------------------------------------------- serialization

def write_generators(gens: Iterable[AtomPermutation]) -> str:
    return "".join(f"{g}\n" for g in gens)


def _parse_cycles(text: str, n_by_prefix: dict[str, int]) -> dict[str, list[int]]:
    maps = {p: list(range(1, n + 1)) for p, n in n_by_prefix.items()}
    text = text.strip()
    if text in ("", "()"):
        return maps
    for cyc in re.findall(r"\(([^)]*)\)", text):
        items = cyc.split()
        parsed = []
        for it in items:
            m = re.fullmatch(r"([zs]?)(\d+)", it)
            if not m:
                raise ParseError(f"bad cycle element {it!r}")
            item = (m.group(1), int(m.group(2)))
            if item[0] not in maps or not 1 <= item[1] <= len(maps[item[0]]):
                raise ParseError(f"cycle element {it!r} out of range")
            if item in parsed:
                raise ParseError(f"cycle repeats {it!r}")
            parsed.append(item)
        for (p, x), (q, y) in zip(parsed, parsed[1:] + parsed[:1]):
            if p != q:
                raise ParseError("cycle mixes zones and sensors")
            maps[p][x - 1] = y
    for p, m in maps.items():
        if sorted(m) != list(range(1, len(m) + 1)):
            raise ParseError("cycles overlap")
    return maps


def parse_generators(text: str, inst: PupInstance) -> list[AtomPermutation]:
    gens = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        m = re.fullmatch(r"units:\s*(.*?);\s*vertices:\s*(.*)", line)
        if not m:
            raise ParseError(f"malformed generator line {line!r}")
        um = _parse_cycles(m.group(1), {"": len(inst.units)})[""]
        vm = _parse_cycles(m.group(2), {"z": len(inst.zones), "s": len(inst.sensors)})
        gens.append(AtomPermutation(tuple(vm["z"]), tuple(vm["s"]), tuple(um)))
    return gens


# ---------------------------------------------------------------- automorphisms

def _refine(cells: list[list[int]], adj: list[list[int]]) -> list[list[int]]:
    """Coarsest equitable refinement; cells split in order of their neighbour-count signature."""
    while True:
        cell_of = {}
        for i, cell in enumerate(cells):
            for v in cell:
                cell_of[v] = i
        out, changed = [], False
        for cell in cells:
            if len(cell) == 1:
                out.append(cell)
                continue
            groups: dict[tuple, list[int]] = {}
            for v in cell:
                counts: dict[int, int] = {}
                for w in adj[v]:
                    counts[cell_of[w]] = counts.get(cell_of[w], 0) + 1
                groups.setdefault(tuple(sorted(counts.items())), []).append(v)
            if len(groups) > 1:
                changed = True
            out.extend(groups[k] for k in sorted(groups))
        cells = out
        if not changed:
            return cells


def _individualize(cells: list[list[int]], v: int) -> list[list[int]]:
    out = []
    for cell in cells:
        if v in cell and len(cell) > 1:
            out.append([v])
            out.append([w for w in cell if w != v])
        else:
            out.append(cell)
    return out


def _orbits_of(n: int, perms: Iterable[list[int]]) -> list[int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in perms:
        for x, y in enumerate(p):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry
    return [find(x) for x in range(n)]


def graph_automorphisms(n: int, adj: list[list[int]], colors: list[int]) -> list[list[int]]:
    """Generators of the colour-preserving automorphism group of an undirected graph."""
    edges = {(a, b) for a in range(n) for b in adj[a]}
    gens: list[list[int]] = []
    first: dict = {}

    def leaf(cells):
        lab = [0] * n
        for pos, cell in enumerate(cells):
            lab[cell[0]] = pos
        return lab

    def search(cells, prefix, on_first_path):
        cells = _refine(cells, adj)
        if all(len(c) == 1 for c in cells):
            lab = leaf(cells)
            image = {(lab[a], lab[b]) for a, b in edges}
            if not first:
                first["lab"], first["image"] = lab, image
                first["inv"] = {p: v for v, p in enumerate(lab)}
                return False
            if image == first["image"]:
                gamma = [first["inv"][lab[v]] for v in range(n)]
                if any(g != v for v, g in enumerate(gamma)):
                    gens.append(gamma)
                return True
            return False
        target = max((c for c in cells if len(c) > 1), key=len)
        explored: list[int] = []
        for i, v in enumerate(target):
            if on_first_path and explored:
                stab = [g for g in gens if all(g[x] == x for x in prefix)]
                orb = _orbits_of(n, stab)
                if any(orb[v] == orb[w] for w in explored):
                    continue
            found = search(_individualize(cells, v), prefix + [v], on_first_path and i == 0)
            explored.append(v)
            if found and not on_first_path:
                return True
        return False

    initial: dict[int, list[int]] = {}
    for v in range(n):
        initial.setdefault(colors[v], []).append(v)
    search([initial[c] for c in sorted(initial)], [], True)
    return gens


def detect_generators(inst: PupInstance) -> list[AtomPermutation]:
    nz, ns = len(inst.zones), len(inst.sensors)
    n = nz + ns
    adj: list[list[int]] = [[] for _ in range(n)]
    for z, s in inst.edges:
        adj[z - 1].append(nz + s - 1)
        adj[nz + s - 1].append(z - 1)
    colors = [0] * nz + [1] * ns
    ident_units = tuple(inst.units)
    out = []
    for g in graph_automorphisms(n, adj, colors):
        zm = tuple(g[i] + 1 for i in range(nz))
        sm = tuple(g[nz + i] - nz + 1 for i in range(ns))
        out.append(AtomPermutation(zm, sm, ident_units))
    for i in range(1, len(inst.units)):
        um = list(inst.units)
        um[i - 1], um[i] = um[i], um[i - 1]
        out.append(AtomPermutation(tuple(inst.zones), tuple(inst.sensors), tuple(um)))
    return out


# ---------------------------------------------------------------- lex order

class AtomOrder:
    """Fixed total order on atoms(gens) with a fast solution key.

    ``key(sol)`` is an integer whose natural order is the lex order on the
    membership bit-vectors, with "atom present" before "atom absent".
    """

    def __init__(self, inst: PupInstance, atoms: Iterable[GroundAtom]):
        self.inst = inst
        self.atoms = tuple(sorted(set(atoms)))
        self.index = {a: i for i, a in enumerate(self.atoms)}
        n = len(self.atoms)
        self._full = (1 << n) - 1
        self._bit = {a: 1 << (n - 1 - i) for i, a in enumerate(self.atoms)}
        nu = len(inst.units)
        self._zone_bits = [[self._bit.get(GroundAtom("unit2zone", u, z), 0) for u in range(1, nu + 1)]
                           for z in inst.zones]
        self._sensor_bits = [[self._bit.get(GroundAtom("unit2sensor", u, s), 0) for u in range(1, nu + 1)]
                             for s in inst.sensors]
        self._pair_bits = {(u, v): self._bit.get(GroundAtom("partnerunits", u, v), 0)
                           for u in range(1, nu + 1) for v in range(1, nu + 1)}
        self._edges = inst.sorted_edges

    @classmethod
    def for_generators(cls, inst: PupInstance, gens: Sequence[AtomPermutation]) -> "AtomOrder":
        return cls(inst, moved_atoms(inst, gens))

    def __len__(self) -> int:
        return len(self.atoms)

    def present(self, sol: Solution) -> int:
        bits = 0
        for z, u in enumerate(sol.zone_unit):
            bits |= self._zone_bits[z][u - 1]
        for s, u in enumerate(sol.sensor_unit):
            bits |= self._sensor_bits[s][u - 1]
        zu, su, pb = sol.zone_unit, sol.sensor_unit, self._pair_bits
        for z, s in self._edges:
            u, v = zu[z - 1], su[s - 1]
            if u != v:
                bits |= pb[u, v] | pb[v, u]
        return bits

    def key(self, sol: Solution) -> int:
        return self._full ^ self.present(sol)

    def bitvector(self, sol: Solution) -> tuple[int, ...]:
        p = self.present(sol)
        n = len(self.atoms)
        return tuple((p >> (n - 1 - i)) & 1 for i in range(n))


def moved_atoms(inst: PupInstance, gens: Sequence[AtomPermutation]) -> set[GroundAtom]:
    universe = [GroundAtom("unit2zone", u, z) for u in inst.units for z in inst.zones]
    universe += [GroundAtom("unit2sensor", u, s) for u in inst.units for s in inst.sensors]
    universe += [GroundAtom("partnerunits", u, v) for u in inst.units for v in inst.units if u != v]
    return {a for a in universe if any(g.map_atom(a) != a for g in gens)}


def dominated(sol: Solution, gens: Sequence[AtomPermutation], order: AtomOrder) -> bool:
    """True when a single generator maps ``sol`` to a lex-smaller solution."""
    k = order.key(sol)
    return any(order.key(apply(g, sol)) < k for g in gens)


class Orbit(NamedTuple):
    members: tuple[Solution, ...]  # BFS order, start first
    truncated: bool


def orbit(sol: Solution, gens: Sequence[AtomPermutation], cap: int | None = None) -> Orbit:
    seen = {sol}
    order = [sol]
    queue = deque([sol])
    while queue:
        cur = queue.popleft()
        for g in gens:
            nxt = apply(g, cur)
            if nxt not in seen:
                if cap is not None and len(order) >= cap:
                    return Orbit(tuple(order), True)
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return Orbit(tuple(order), False)


def lex_smallest(members: Iterable[Solution], order: AtomOrder) -> Solution:
    members = list(members)
    if not members:
        raise ValueError("empty orbit")
    return min(members, key=order.key)


def orbit_partition(solutions: Iterable[Solution], gens: Sequence[AtomPermutation]) -> list[Orbit]:
    """Split a solution set into orbits (each solution must lie in the set's closure)."""
    seen: set[Solution] = set()
    out = []
    for s in solutions:
        if s in seen:
            continue
        orb = orbit(s, gens)
        seen.update(orb.members)
        out.append(orb)
    return out
