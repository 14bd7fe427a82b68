"""Pure-Python search and rule-evaluation kernels.

Mirrors ``_kernel.pyx`` line for line; used when the compiled extension is
unavailable or ``SBCLIFT_PURE_PYTHON`` is set.  Both implementations share
the splitmix64 stream, so emission order is identical across backends.
"""

import time

import numpy as np

MASK64 = (1 << 64) - 1

EQ, GEQ, PARTNER = 0, 1, 2


def splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class SearchKernel:
    """Resumable depth-first search over unit assignments.

    Variables are positions ``0..n-1`` in ``pup_solver.search_order``; units are
    0-based indices.  Ground constraints arrive pre-compiled as flat literal
    arrays (see ``pup_solver.compile_problem``).
    """

    def __init__(self, n, nu, is_zone, nbr_ptr, nbr_idx, dom, ucap, iucap,
                 lit_ptr, lit_kind, lit_a, lit_b, lit_sign, cmaxpos,
                 trig_ptr, trig_idx, pair_ptr, pair_idx, leaf_idx,
                 seed, randomize, timeout_s, first_use=False):
        self.n, self.nu = n, nu
        self.is_zone = list(is_zone)
        self.nbrs = [list(nbr_idx[nbr_ptr[i]:nbr_ptr[i + 1]]) for i in range(n)]
        self.dom = [list(dom[i * nu:(i + 1) * nu]) for i in range(n)]
        self.ucap, self.iucap = ucap, iucap
        self.lits = [
            [(lit_kind[k], lit_a[k], lit_b[k], lit_sign[k]) for k in range(lit_ptr[c], lit_ptr[c + 1])]
            for c in range(len(lit_ptr) - 1)
        ]
        self.cmaxpos = list(cmaxpos)
        self.trig = [list(trig_idx[trig_ptr[i]:trig_ptr[i + 1]]) for i in range(n)]
        self.pair = [list(pair_idx[pair_ptr[i]:pair_ptr[i + 1]]) for i in range(nu * nu)]
        self.leaf = list(leaf_idx)
        self.rng = seed & MASK64
        self.randomize = bool(randomize)
        self.deadline = None if timeout_s is None or timeout_s < 0 else time.monotonic() + timeout_s

        self.assign = [-1] * n
        self.zc = [0] * nu
        self.sc = [0] * nu
        self.pc = [[0] * nu for _ in range(nu)]
        self.deg = [0] * nu
        self.order = [[0] * nu for _ in range(n)]
        self.pos = [0] * n
        self.d = 0
        self.started = False
        self.finished = n == 0
        self.nodes = 0
        self.timed_out = False
        self.empty_solution_pending = n == 0
        # first-use unit ordering: position d may open at most one new unit
        self.first_use = bool(first_use)
        self.maxu = [-1] * (n + 1)

    # -- helpers
    def _init_order(self, d):
        order = self.order[d]
        for i in range(self.nu):
            order[i] = i
        if self.randomize:
            for i in range(self.nu - 1, 0, -1):
                self.rng, r = splitmix64(self.rng)
                j = r % (i + 1)
                order[i], order[j] = order[j], order[i]
        self.pos[d] = 0

    def _violated(self, c, at_leaf):
        assign, pc = self.assign, self.pc
        for kind, a, b, sign in self.lits[c]:
            if kind == PARTNER:
                t = pc[a][b] > 0
                if not t:
                    if sign or not at_leaf:
                        return False
                    continue
            else:
                val = assign[a]
                if val < 0:
                    return False
                t = val == b if kind == EQ else val >= b
            if t != bool(sign):
                return False
        return True

    def _undo(self, d):
        u = self.assign[d]
        assign, pc, deg = self.assign, self.pc, self.deg
        for w in self.nbrs[d]:
            v = assign[w]
            if v >= 0 and v != u:
                pc[u][v] -= 1
                pc[v][u] -= 1
                if pc[u][v] == 0:
                    deg[u] -= 1
                    deg[v] -= 1
        if self.is_zone[d]:
            self.zc[u] -= 1
        else:
            self.sc[u] -= 1
        assign[d] = -1

    def _try(self, d, u):
        if not self.dom[d][u]:
            return False
        if self.first_use and u > self.maxu[d] + 1:
            return False
        cap = self.zc if self.is_zone[d] else self.sc
        if cap[u] >= self.ucap:
            return False
        assign, pc, deg = self.assign, self.pc, self.deg
        new = []
        for w in self.nbrs[d]:
            v = assign[w]
            if v >= 0 and v != u:
                if pc[u][v] == 0:
                    deg[u] += 1
                    deg[v] += 1
                    new.append(v)
                pc[u][v] += 1
                pc[v][u] += 1
        cap[u] += 1
        assign[d] = u
        ok = deg[u] <= self.iucap and all(deg[v] <= self.iucap for v in new)
        if ok:
            for c in self.trig[d]:
                if self._violated(c, False):
                    ok = False
                    break
        if ok and new:
            nu = self.nu
            for v in new:
                key = u * nu + v if u < v else v * nu + u
                for c in self.pair[key]:
                    if self.cmaxpos[c] <= d and self._violated(c, False):
                        ok = False
                        break
                if not ok:
                    break
        if ok and d == self.n - 1:
            for c in self.leaf:
                if self._violated(c, True):
                    ok = False
                    break
        if not ok:
            self._undo(d)
        return ok

    def _expired(self):
        return self.deadline is not None and time.monotonic() > self.deadline

    def _advance(self):
        """Move to the next solution; return True when one is in ``assign``."""
        if self.finished:
            return False
        if not self.started:
            self.started = True
            self._init_order(0)
            self.d = 0
        n, nu = self.n, self.nu
        d = self.d
        while d >= 0:
            if self.assign[d] >= 0:
                self._undo(d)
            found = False
            order = self.order[d]
            while self.pos[d] < nu:
                u = order[self.pos[d]]
                self.pos[d] += 1
                self.nodes += 1
                if self._expired():
                    self.timed_out = True
                    self.finished = True
                    self.d = d
                    return False
                if self._try(d, u):
                    found = True
                    break
            if not found:
                d -= 1
                continue
            if d == n - 1:
                self.d = d
                return True
            d += 1
            if self.first_use:
                self.maxu[d] = max(self.maxu[d - 1], u)
            self._init_order(d)
        self.finished = True
        self.d = -1
        return False

    def next_solution(self):
        if self.empty_solution_pending:
            self.empty_solution_pending = False
            self.finished = True
            return []
        if self._advance():
            return [u for u in self.assign]
        return None

    def count_all(self, limit=-1):
        if self.empty_solution_pending:
            self.empty_solution_pending = False
            self.finished = True
            return 1
        found = 0
        while limit < 0 or found < limit:
            if not self._advance():
                break
            found += 1
        return found


def violation_matrix(rel, rule_pred, rule_sign, rule_va, rule_vb, rule_ptr, rule_nvars):
    """``out[r, k]`` is 1 iff some substitution makes every literal of rule r hold in solution k.

    ``rel`` has shape (nsol, P, D, D); variables range over ``1..D-1``.
    """
    rel = np.asarray(rel, dtype=bool)
    nsol, _, D, _ = rel.shape
    nrules = len(rule_ptr) - 1
    out = np.zeros((nrules, nsol), dtype=np.uint8)
    if nsol == 0:
        return out
    axes_letters = "abc"
    for r in range(nrules):
        nv = rule_nvars[r]
        acc = np.ones((nsol,) + (D - 1,) * nv, dtype=bool)
        for k in range(rule_ptr[r], rule_ptr[r + 1]):
            mat = rel[:, rule_pred[k], 1:, 1:]
            va, vb = rule_va[k], rule_vb[k]
            if va == vb:
                lit = np.diagonal(mat, axis1=1, axis2=2)
                spec = "n" + axes_letters[va]
            else:
                lit = mat
                spec = "n" + axes_letters[va] + axes_letters[vb]
            if not rule_sign[k]:
                lit = ~lit
            # broadcast literal onto the nsol x D^nv grid
            target = "n" + axes_letters[:nv]
            shape = [nsol] + [1] * nv
            perm_src = list(spec[1:])
            order = sorted(range(len(perm_src)), key=lambda i: perm_src[i])
            lit = np.transpose(lit, [0] + [i + 1 for i in order])
            for i, ch in enumerate(target[1:]):
                if ch in perm_src:
                    shape[i + 1] = D - 1
            acc &= lit.reshape(shape)
        out[r] = acc.reshape(nsol, -1).any(axis=1)
    return out
