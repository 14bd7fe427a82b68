# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search and rule-evaluation kernels (see _pykernel.py for the reference)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t
from posix.time cimport clock_gettime, timespec, CLOCK_MONOTONIC

cnp.import_array()

cdef enum:
    EQ = 0
    GEQ = 1
    PARTNER = 2


cdef inline double _now() nogil:
    cdef timespec ts
    clock_gettime(CLOCK_MONOTONIC, &ts)
    return ts.tv_sec + ts.tv_nsec * 1e-9


cdef inline uint64_t _splitmix(uint64_t* state) nogil:
    cdef uint64_t z
    state[0] += 0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def _i32(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.int32).reshape(-1))


cdef class SearchKernel:
    cdef int n, nu, ucap, iucap, d, leaf_n
    cdef int32_t[::1] is_zone, nbr_ptr, nbr_idx, dom
    cdef int32_t[::1] lit_ptr, lit_kind, lit_a, lit_b, lit_sign, cmaxpos
    cdef int32_t[::1] trig_ptr, trig_idx, pair_ptr, pair_idx, leaf_idx
    cdef int32_t[::1] assign, zc, sc, pc, deg, order, pos, newbuf, maxu
    cdef uint64_t rng
    cdef bint randomize, started, finished, empty_pending, has_deadline, first_use
    cdef double deadline
    cdef public long long nodes
    cdef public bint timed_out

    def __init__(self, n, nu, is_zone, nbr_ptr, nbr_idx, dom, ucap, iucap,
                 lit_ptr, lit_kind, lit_a, lit_b, lit_sign, cmaxpos,
                 trig_ptr, trig_idx, pair_ptr, pair_idx, leaf_idx,
                 seed, randomize, timeout_s, first_use=False):
        self.n = n
        self.nu = nu
        self.ucap = ucap
        self.iucap = iucap
        self.is_zone = _i32(is_zone)
        self.nbr_ptr = _i32(nbr_ptr)
        self.nbr_idx = _i32(list(nbr_idx) + [0])
        self.dom = _i32(list(dom) + [0])
        self.lit_ptr = _i32(lit_ptr)
        self.lit_kind = _i32(list(lit_kind) + [0])
        self.lit_a = _i32(list(lit_a) + [0])
        self.lit_b = _i32(list(lit_b) + [0])
        self.lit_sign = _i32(list(lit_sign) + [0])
        self.cmaxpos = _i32(list(cmaxpos) + [0])
        self.trig_ptr = _i32(trig_ptr)
        self.trig_idx = _i32(list(trig_idx) + [0])
        self.pair_ptr = _i32(pair_ptr)
        self.pair_idx = _i32(list(pair_idx) + [0])
        self.leaf_idx = _i32(list(leaf_idx) + [0])
        self.leaf_n = len(leaf_idx)
        self.rng = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
        self.randomize = bool(randomize)
        self.has_deadline = timeout_s is not None and timeout_s >= 0
        self.deadline = _now() + timeout_s if self.has_deadline else 0.0
        self.assign = np.full(max(n, 1), -1, dtype=np.int32)
        self.zc = np.zeros(nu + 1, dtype=np.int32)
        self.sc = np.zeros(nu + 1, dtype=np.int32)
        self.pc = np.zeros(nu * nu + 1, dtype=np.int32)
        self.deg = np.zeros(nu + 1, dtype=np.int32)
        self.order = np.zeros(max(n, 1) * nu + 1, dtype=np.int32)
        self.pos = np.zeros(max(n, 1), dtype=np.int32)
        self.newbuf = np.zeros(max(n, 1) + nu + 1, dtype=np.int32)
        self.maxu = np.full(max(n, 1) + 1, -1, dtype=np.int32)
        self.first_use = bool(first_use)
        self.d = 0
        self.started = False
        self.finished = n == 0
        self.empty_pending = n == 0
        self.nodes = 0
        self.timed_out = False


    cdef void _init_order(self, int d):
        cdef int i, j, tmp
        cdef int base = d * self.nu
        for i in range(self.nu):
            self.order[base + i] = i
        if self.randomize:
            for i in range(self.nu - 1, 0, -1):
                j = <int>(_splitmix(&self.rng) % <uint64_t>(i + 1))
                tmp = self.order[base + i]
                self.order[base + i] = self.order[base + j]
                self.order[base + j] = tmp
        self.pos[d] = 0

    cdef bint _violated(self, int c, bint at_leaf):
        cdef int k, kind, a, b, val
        cdef bint t
        for k in range(self.lit_ptr[c], self.lit_ptr[c + 1]):
            kind = self.lit_kind[k]
            a = self.lit_a[k]
            b = self.lit_b[k]
            if kind == PARTNER:
                t = self.pc[a * self.nu + b] > 0
                if not t:
                    if self.lit_sign[k] or not at_leaf:
                        return False
                    continue
            else:
                val = self.assign[a]
                if val < 0:
                    return False
                if kind == EQ:
                    t = val == b
                else:
                    t = val >= b
            if t != (self.lit_sign[k] != 0):
                return False
        return True

    cdef void _undo(self, int d):
        cdef int u = self.assign[d]
        cdef int nu = self.nu
        cdef int k, w, v
        for k in range(self.nbr_ptr[d], self.nbr_ptr[d + 1]):
            w = self.nbr_idx[k]
            v = self.assign[w]
            if v >= 0 and v != u:
                self.pc[u * nu + v] -= 1
                self.pc[v * nu + u] -= 1
                if self.pc[u * nu + v] == 0:
                    self.deg[u] -= 1
                    self.deg[v] -= 1
        if self.is_zone[d]:
            self.zc[u] -= 1
        else:
            self.sc[u] -= 1
        self.assign[d] = -1

    cdef bint _try(self, int d, int u):
        cdef int nu = self.nu
        cdef int k, w, v, i, c, key, nnew = 0
        cdef bint ok
        if not self.dom[d * nu + u]:
            return False
        if self.first_use and u > self.maxu[d] + 1:
            return False
        if self.is_zone[d]:
            if self.zc[u] >= self.ucap:
                return False
        elif self.sc[u] >= self.ucap:
            return False
        for k in range(self.nbr_ptr[d], self.nbr_ptr[d + 1]):
            w = self.nbr_idx[k]
            v = self.assign[w]
            if v >= 0 and v != u:
                if self.pc[u * nu + v] == 0:
                    self.deg[u] += 1
                    self.deg[v] += 1
                    self.newbuf[nnew] = v
                    nnew += 1
                self.pc[u * nu + v] += 1
                self.pc[v * nu + u] += 1
        if self.is_zone[d]:
            self.zc[u] += 1
        else:
            self.sc[u] += 1
        self.assign[d] = u
        ok = self.deg[u] <= self.iucap
        if ok:
            for i in range(nnew):
                if self.deg[self.newbuf[i]] > self.iucap:
                    ok = False
                    break
        if ok:
            for k in range(self.trig_ptr[d], self.trig_ptr[d + 1]):
                if self._violated(self.trig_idx[k], False):
                    ok = False
                    break
        if ok and nnew > 0:
            for i in range(nnew):
                v = self.newbuf[i]
                key = u * nu + v if u < v else v * nu + u
                for k in range(self.pair_ptr[key], self.pair_ptr[key + 1]):
                    c = self.pair_idx[k]
                    if self.cmaxpos[c] <= d and self._violated(c, False):
                        ok = False
                        break
                if not ok:
                    break
        if ok and d == self.n - 1:
            for i in range(self.leaf_n):
                if self._violated(self.leaf_idx[i], True):
                    ok = False
                    break
        if not ok:
            self._undo(d)
        return ok

    cdef bint _advance(self):
        cdef int d, u
        cdef bint found
        if self.finished:
            return False
        if not self.started:
            self.started = True
            self._init_order(0)
            self.d = 0
        d = self.d
        while d >= 0:
            if self.assign[d] >= 0:
                self._undo(d)
            found = False
            while self.pos[d] < self.nu:
                u = self.order[d * self.nu + self.pos[d]]
                self.pos[d] += 1
                self.nodes += 1
                if self.has_deadline and _now() > self.deadline:
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
            if d == self.n - 1:
                self.d = d
                return True
            d += 1
            if self.first_use:
                self.maxu[d] = self.maxu[d - 1] if self.maxu[d - 1] > u else u
            self._init_order(d)
        self.finished = True
        self.d = -1
        return False

    def next_solution(self):
        if self.empty_pending:
            self.empty_pending = False
            self.finished = True
            return []
        if self._advance():
            return [self.assign[i] for i in range(self.n)]
        return None

    def count_all(self, long long limit=-1):
        cdef long long found = 0
        if self.empty_pending:
            self.empty_pending = False
            self.finished = True
            return 1
        while limit < 0 or found < limit:
            if not self._advance():
                break
            found += 1
        return found


def violation_matrix(rel, rule_pred, rule_sign, rule_va, rule_vb, rule_ptr, rule_nvars):
    cdef cnp.uint8_t[:, :, :, ::1] R = np.ascontiguousarray(rel, dtype=np.uint8)
    cdef int32_t[::1] pred = _i32(list(rule_pred) + [0])
    cdef int32_t[::1] sign = _i32(list(rule_sign) + [0])
    cdef int32_t[::1] va = _i32(list(rule_va) + [0])
    cdef int32_t[::1] vb = _i32(list(rule_vb) + [0])
    cdef int32_t[::1] ptr = _i32(rule_ptr)
    cdef int32_t[::1] nvars = _i32(list(rule_nvars) + [0])
    cdef int nsol = R.shape[0]
    cdef int D = R.shape[2]
    cdef int nrules = ptr.shape[0] - 1
    out_arr = np.zeros((nrules, nsol), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef int r, s, k, nv, x0, x1, x2, a, b
    cdef int hi1, hi2
    cdef int vals[3]
    cdef bint ok, hit
    with nogil:
        for r in range(nrules):
            nv = nvars[r]
            hi1 = D if nv > 1 else 2
            hi2 = D if nv > 2 else 2
            for s in range(nsol):
                hit = False
                for x0 in range(1, D):
                    vals[0] = x0
                    for x1 in range(1, hi1):
                        vals[1] = x1
                        for x2 in range(1, hi2):
                            vals[2] = x2
                            ok = True
                            for k in range(ptr[r], ptr[r + 1]):
                                a = vals[va[k]]
                                b = vals[vb[k]]
                                if (R[s, pred[k], a, b] != 0) != (sign[k] != 0):
                                    ok = False
                                    break
                            if ok:
                                hit = True
                                break
                        if hit:
                            break
                    if hit:
                        break
                out[r, s] = hit
    return out_arr
