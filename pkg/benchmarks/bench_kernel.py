"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernel.py [--repeat 3]

Times full enumeration of small instances, one unsat proof, and the rule
violation matrix for the PUP hypothesis space.  Both backends must agree on
every result; the script exits non-zero otherwise.
"""

import argparse
import itertools
import sys
import time

import numpy as np

from sbclift import kernel
from sbclift import _pykernel
from sbclift.hypothesis import build_space, pup_bias
from sbclift.learner import RuleTable
from sbclift.pup_core import generate_instance, make_fig1_instance
from sbclift.pup_solver import SearchConfig, enumerate_solutions, run_count


def best_of(repeat, fn):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if kernel.BACKEND != "cython":
        print("compiled kernel unavailable; only the pure backend can run", file=sys.stderr)
        return 1
    compiled = kernel
    pure = _pykernel

    fig1 = make_fig1_instance()
    cases = [
        ("count fig1 (145368)", fig1),
        ("unsat un-dbl-6", generate_instance("double", 6, unsat=True)),
        ("count dblv-5", generate_instance("doublev", 5)),
    ]
    print(f"{'case':<28}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    ok = True
    for label, inst in cases:
        tc, rc = best_of(args.repeat, lambda: run_count(inst, backend=compiled).count)
        tp, rp = best_of(args.repeat, lambda: run_count(inst, backend=pure).count)
        ok &= rc == rp
        print(f"{label:<28}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}")

    space = build_space(pup_bias())
    table = RuleTable(space)
    sols = list(itertools.islice(enumerate_solutions(fig1, cfg=SearchConfig(seed=1, randomize_values=True)), 20))
    rel = table.relations(fig1, sols)
    tc, mc = best_of(args.repeat, lambda: compiled.violation_matrix(rel, *table.arrays))
    tp, mp = best_of(args.repeat, lambda: pure.violation_matrix(rel, *table.arrays))
    ok &= bool(np.array_equal(mc, mp))
    print(f"{'violations 5226 x 20':<28}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}")
    print("backends agree" if ok else "BACKENDS DISAGREE")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
