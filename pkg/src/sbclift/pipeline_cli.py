"""Command line: instance generation, solving, symmetry detection, example
generation, learning, the full pipeline, benchmarks and statistics."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import statistics
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError, SbcliftError
from .examples import (
    ExampleSet,
    gen_positive,
    parse_examples,
    scalable_enum,
    scalable_fullsbcs,
    write_examples,
)
from .hypothesis import Constraint, build_space, parse_constraints, pup_bias, write_constraints
from .learner import LearnerState, cdilp, enumeration_exceeds
from .pup_core import PupInstance, instance_from_name, make_fig1_instance, read_instance, write_instance
from .pup_solver import SearchConfig, SolutionStream, ground_all, run_count, solve_one, write_solution, SearchTimeout
from .symmetry import AtomOrder, detect_generators, write_generators

log = logging.getLogger("sbclift")

STRATEGIES = ("scalable_enum", "scalable_fullsbcs")
SCHEMES = ("default", "custom")
CSV_FIELDS = ("instance", "condition", "seed", "verdict", "runtime_ms", "nodes", "timeout_ms")


# ---------------------------------------------------------------- files

def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_instance(spec: str, seed: int = 0) -> PupInstance:
    """A fact file path, ``fig1``, or a family name such as ``dbl-8`` / ``un-double-6``."""
    if spec == "fig1":
        return make_fig1_instance()
    if os.path.exists(spec):
        return read_instance(spec)
    return instance_from_name(spec, seed)


# ---------------------------------------------------------------- configuration

def _parse_seeds(text: str) -> list[int]:
    seeds: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return seeds


def _names(text: str) -> list[str]:
    return [t for t in (x.strip() for x in text.split(",")) if t]


@dataclass
class RunConfig:
    training: list[str] = field(default_factory=lambda: ["dbl-6"])
    generalization: list[str] = field(default_factory=lambda: ["dbl-8", "dbl-10", "dbl-12"])
    strategy: str = "scalable_fullsbcs"
    n: int = 50
    cells: int = 20
    max_cell_size: int = 5
    scheme: str = "custom"
    seeds: list[int] = field(default_factory=lambda: list(range(12)))
    learn_timeout_ms: float = 300_000.0
    solve_timeout_ms: float = 60_000.0
    check_timeout_ms: float = 10_000.0
    validation: list[str] = field(default_factory=list)
    workers: int = 1

    def validate(self, learning: bool = True) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.strategy == "scalable_enum" and self.n < 1:
            raise ValueError("n must be positive")
        if self.strategy == "scalable_fullsbcs" and (self.cells < 1 or self.max_cell_size < 0):
            raise ValueError("cells must be positive and max_cell_size non-negative")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if any(not 0 <= s < 2 ** 64 for s in self.seeds):
            raise ValueError("seeds must be unsigned 64-bit integers")
        if learning and (not self.training or not self.generalization):
            raise ValueError("training and generalization sets must be non-empty")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    _LISTS = {"training", "generalization", "validation"}
    _INTS = {"n", "cells", "max_cell_size", "workers"}
    _FLOATS = {"learn_timeout_ms", "solve_timeout_ms", "check_timeout_ms"}

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"config line {lineno}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            try:
                if key in cls._LISTS:
                    setattr(cfg, key, _names(value))
                elif key in cls._INTS:
                    setattr(cfg, key, int(value))
                elif key in cls._FLOATS:
                    setattr(cfg, key, float(value))
                elif key == "seeds":
                    cfg.seeds = _parse_seeds(value)
                elif key in ("strategy", "scheme"):
                    setattr(cfg, key, value)
                elif key in ("seed", "timeout_ms", "out"):
                    continue  # global CLI defaults, read elsewhere
                else:
                    raise ParseError(f"config line {lineno}: unknown key {key!r}")
            except ValueError as exc:
                raise ParseError(f"config line {lineno}: {exc}") from exc
        return cfg

    def to_text(self) -> str:
        out = []
        for k, v in asdict(self).items():
            out.append(f"{k} = {', '.join(map(str, v)) if isinstance(v, list) else v}")
        return "\n".join(out) + "\n"


def read_config_pairs(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    pairs = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if "=" in line:
            k, v = (x.strip() for x in line.split("=", 1))
            pairs[k.replace("-", "_")] = v
    return pairs


# ---------------------------------------------------------------- pipeline

def make_examples(inst: PupInstance, cfg: RunConfig, seed: int) -> ExampleSet:
    gens = detect_generators(inst)
    order = AtomOrder.for_generators(inst, gens)
    if cfg.strategy == "scalable_enum":
        return scalable_enum(inst, gens, order, cfg.n, seed=seed)
    return scalable_fullsbcs(inst, gens, order, cfg.cells, cfg.max_cell_size, seed=seed)


def run_seed(cfg: RunConfig, seed: int, out_dir: Path | None, sbca_ids: set[str] | None = None) -> dict:
    """One learning run; returns its summary record."""
    training = [load_instance(s, seed) for s in cfg.training]
    gen_insts = [load_instance(s, seed) for s in cfg.generalization]
    examples = ExampleSet()
    for inst in training:
        examples.extend(make_examples(inst, cfg, seed))
    record: dict = {"seed": seed, "examples": len(examples),
                    "positives": len(examples.positives), "negatives": len(examples.negatives)}
    if examples.one_sided:
        record["status"] = "skipped"
        record["reason"] = "one-sided example set"
        if out_dir is not None:
            write_atomic(out_dir / f"report_seed{seed}.json", json.dumps(record, indent=2, sort_keys=True))
        return record
    gen_examples = [gen_positive(g) for g in gen_insts]
    if sbca_ids is None:
        sbca_ids = {e.id for e, g in zip(gen_examples, gen_insts) if enumeration_exceeds(g)}
    space = build_space(pup_bias())
    state = LearnerState(space, list(examples) + gen_examples, scheme=cfg.scheme,
                         sbca_example_ids=set(sbca_ids))
    hyp, report = cdilp(state, budget_ms=cfg.learn_timeout_ms, check_timeout_ms=cfg.check_timeout_ms)
    record.update(status="learned", optimal=report.optimal, rules=len(hyp),
                  cost=sum(c.cost(cfg.scheme) for c in hyp), iterations=len(report.iterations),
                  sbca_examples=sorted(sbca_ids))
    if out_dir is not None:
        write_atomic(out_dir / f"constraints_seed{seed}.lp", write_constraints(hyp))
        write_atomic(out_dir / f"report_seed{seed}.json", report.to_json())
        write_atomic(out_dir / f"examples_seed{seed}.las", write_examples(list(examples) + gen_examples))
    record["constraints"] = write_constraints(hyp)
    return record


def cmd_pipeline(cfg: RunConfig, out_dir: Path | None) -> dict:
    cfg.validate(learning=True)
    gen_insts = [load_instance(s) for s in cfg.generalization]
    # the flag depends only on the Gen instance, so measure once for all seeds
    sbca_ids = {gen_positive(g).id for g in gen_insts if enumeration_exceeds(g)}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(run_seed, cfg, s, out_dir, sbca_ids) for s in cfg.seeds]
            records = [f.result() for f in futures]
    else:
        records = [run_seed(cfg, s, out_dir, sbca_ids) for s in cfg.seeds]
    summary: dict = {"config": asdict(cfg), "runs": records}
    learned = [r for r in records if r["status"] == "learned" and r["rules"] > 0]
    validation = cfg.validation or cfg.generalization
    if learned:
        best = select_best([r["constraints"] for r in learned], [load_instance(v) for v in validation],
                           cfg.solve_timeout_ms)
        summary["selection"] = {"validation": validation, **best}
        if out_dir is not None:
            write_atomic(out_dir / "best_constraints.lp", best["constraints"])
    if out_dir is not None:
        write_atomic(out_dir / "pipeline_summary.json", json.dumps(summary, indent=2, sort_keys=True))
    return summary


def select_best(candidates: Sequence[str], validation: Sequence[PupInstance], timeout_ms: float) -> dict:
    """The learned set with the least total first-solution time over ``validation``."""
    scored = []
    for text in sorted(set(candidates)):
        constraints = parse_constraints(text)
        total = 0.0
        for inst in validation:
            row = bench_one(inst, constraints, "with_abk", seed=0, timeout_ms=timeout_ms)
            total += timeout_ms if row.runtime_ms is None else row.runtime_ms
        scored.append((total, text))
    total, text = min(scored)
    return {"constraints": text, "total_ms": round(total, 3), "candidates": len(scored)}


# ---------------------------------------------------------------- benchmark

@dataclass(frozen=True)
class BenchRow:
    instance: str
    condition: str
    seed: int
    verdict: str  # sat / unsat / timeout
    runtime_ms: float | None
    nodes: int
    timeout_ms: float

    def as_csv(self) -> dict:
        return {
            "instance": self.instance, "condition": self.condition, "seed": self.seed,
            "verdict": self.verdict,
            "runtime_ms": "TIMEOUT" if self.runtime_ms is None else f"{self.runtime_ms:.3f}",
            "nodes": self.nodes, "timeout_ms": f"{self.timeout_ms:g}",
        }


def bench_one(inst: PupInstance, constraints: Sequence[Constraint], condition: str, seed: int,
              timeout_ms: float) -> BenchRow:
    """First solution (or proof of unsatisfiability) under a wall-clock limit."""
    t0 = time.perf_counter()
    extra = ground_all(constraints, inst) if constraints else []
    left = max(0.0, timeout_ms - (time.perf_counter() - t0) * 1000)
    stream = SolutionStream(inst, extra, SearchConfig(seed=seed, timeout=left, randomize_values=True))
    sol = next(stream, None)
    elapsed = (time.perf_counter() - t0) * 1000
    if stream.truncated or elapsed > timeout_ms:
        return BenchRow(inst.name, condition, seed, "timeout", None, stream.nodes, timeout_ms)
    return BenchRow(inst.name, condition, seed, "sat" if sol is not None else "unsat",
                    elapsed, stream.nodes, timeout_ms)


def cmd_benchmark(instances: Sequence[PupInstance], abk: Sequence[Constraint] | None, timeout_ms: float,
                  seeds: Sequence[int] = (0,)) -> list[BenchRow]:
    rows = []
    for inst in instances:
        for seed in seeds:
            rows.append(bench_one(inst, (), "plain", seed, timeout_ms))
            if abk is not None:
                rows.append(bench_one(inst, abk, "with_abk", seed, timeout_ms))
    return rows


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_csv())
    return buf.getvalue()


def rows_from_csv(text: str) -> list[BenchRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rt = None if rec["runtime_ms"] == "TIMEOUT" else float(rec["runtime_ms"])
        rows.append(BenchRow(rec["instance"], rec["condition"], int(rec["seed"]), rec["verdict"], rt,
                             int(rec["nodes"]), float(rec["timeout_ms"])))
    return rows


# ---------------------------------------------------------------- statistics

@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n: int
    method: str  # exact / normal / undefined

    @property
    def defined(self) -> bool:
        return self.method != "undefined"


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def wilcoxon_signed_rank(paired: Sequence[tuple[float, float]]) -> WilcoxonResult:
    """Two-sided signed-rank test; exact null distribution up to 25 pairs."""
    diffs = [a - b for a, b in paired if a != b]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(math.nan, math.nan, 0, "undefined")
    ranks = _midranks([abs(d) for d in diffs])
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    t = min(w_plus, w_minus)
    if n <= 25:
        # doubled ranks are integers even with mid-ranks
        doubled = [int(round(2 * r)) for r in ranks]
        total = sum(doubled)
        dist = [0] * (total + 1)
        dist[0] = 1
        for r in doubled:
            for s in range(total, r - 1, -1):
                dist[s] += dist[s - r]
        tail = sum(dist[: int(round(2 * t)) + 1])
        p = min(1.0, 2 * tail / 2 ** n)
        return WilcoxonResult(t, p, n, "exact")
    mean = n * (n + 1) / 4
    ties: dict[float, int] = {}
    for r in ranks:
        ties[r] = ties.get(r, 0) + 1
    var = n * (n + 1) * (2 * n + 1) / 24 - sum(c ** 3 - c for c in ties.values()) / 48
    if var <= 0:
        return WilcoxonResult(t, math.nan, n, "undefined")
    z = (t - mean) / math.sqrt(var)
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2)))
    return WilcoxonResult(t, p, n, "normal")


def benchmark_stats(rows: Sequence[BenchRow]) -> dict:
    """Paired comparison of plain vs with_abk; timeouts count as the limit."""
    def value(r):
        return r.timeout_ms if r.runtime_ms is None else r.runtime_ms

    plain = {(r.instance, r.seed): r for r in rows if r.condition == "plain"}
    abk = {(r.instance, r.seed): r for r in rows if r.condition == "with_abk"}
    keys = sorted(plain.keys() & abk.keys())
    pairs = [(value(plain[k]), value(abk[k])) for k in keys]
    res = wilcoxon_signed_rank(pairs)
    out = {
        "pairs": len(pairs),
        "statistic": None if math.isnan(res.statistic) else res.statistic,
        "p_value": None if math.isnan(res.p_value) else res.p_value,
        "method": res.method,
        "timeouts": {c: sum(1 for r in rows if r.condition == c and r.runtime_ms is None)
                     for c in ("plain", "with_abk")},
    }
    if pairs:
        out["median_ms"] = {"plain": statistics.median(p for p, _ in pairs),
                            "with_abk": statistics.median(a for _, a in pairs)}
        out["median_nodes"] = {"plain": statistics.median(plain[k].nodes for k in keys),
                               "with_abk": statistics.median(abk[k].nodes for k in keys)}
    return out


# ---------------------------------------------------------------- CLI

def _emit(text: str, out: Path | None, filename: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out / filename, text)
        print(json.dumps({"written": str(out / filename)}))


def _load_abk(path: str | None) -> list[Constraint] | None:
    if not path:
        return None
    return parse_constraints(Path(path).read_text())


def _cmd_gen_instance(a) -> int:
    inst = load_instance(a.instance, a.seed)
    _emit(write_instance(inst), a.out, f"{inst.name or 'instance'}.lp")
    return 0


def _cmd_solve(a) -> int:
    inst = load_instance(a.instance, a.seed)
    abk = _load_abk(a.abk) or []
    t0 = time.perf_counter()
    try:
        sol = solve_one(inst, ground_all(abk, inst),
                        SearchConfig(seed=a.seed, timeout=a.timeout_ms, randomize_values=a.randomize))
        status = "sat" if sol is not None else "unsat"
    except SearchTimeout:
        sol, status = None, "timeout"
    record = {"instance": inst.name, "status": status, "runtime_ms": round((time.perf_counter() - t0) * 1000, 3)}
    if sol is not None:
        _emit(write_solution(sol), a.out, f"{inst.name or 'instance'}.sol")
    print(json.dumps(record, sort_keys=True))
    return 0 if status != "timeout" else 2


def _cmd_enumerate(a) -> int:
    inst = load_instance(a.instance, a.seed)
    abk = _load_abk(a.abk) or []
    cfg = SearchConfig(seed=a.seed, timeout=a.timeout_ms, limit=a.limit)
    if a.print_solutions:
        stream = SolutionStream(inst, ground_all(abk, inst), cfg)
        chunks = [write_solution(s) for s in stream]
        _emit("\n".join(chunks), a.out, f"{inst.name or 'instance'}.sols")
        record = {"instance": inst.name, "count": stream.emitted, "truncated": stream.truncated,
                  "nodes": stream.nodes}
    else:
        res = run_count(inst, ground_all(abk, inst), cfg)
        record = {"instance": inst.name, "count": res.count, "truncated": res.timed_out,
                  "nodes": res.nodes, "elapsed_ms": round(res.elapsed_ms, 3)}
    print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_detect_sym(a) -> int:
    inst = load_instance(a.instance, a.seed)
    _emit(write_generators(detect_generators(inst)), a.out, f"{inst.name or 'instance'}.gens")
    return 0


def _cmd_gen_examples(a) -> int:
    inst = load_instance(a.instance, a.seed)
    cfg = RunConfig(strategy=a.strategy, n=a.n, cells=a.cells, max_cell_size=a.max_cell_size)
    cfg.validate(learning=False)
    ex = make_examples(inst, cfg, a.seed)
    if ex.diagnostic:
        log.warning("%s", ex.diagnostic)
    _emit(write_examples(ex), a.out, f"{inst.name or 'instance'}.las")
    return 0


def _cmd_learn(a) -> int:
    examples = []
    for path in a.examples:
        examples.extend(parse_examples(Path(path).read_text()))
    gen_insts = [load_instance(g, a.seed) for g in a.gen]
    gen_ex = [gen_positive(g) for g in gen_insts]
    sbca_ids = {e.id for e, g in zip(gen_ex, gen_insts) if enumeration_exceeds(g)}
    state = LearnerState(build_space(pup_bias()), examples + gen_ex, scheme=a.scheme, sbca_example_ids=sbca_ids)
    hyp, report = cdilp(state, budget_ms=a.timeout_ms)
    _emit(write_constraints(hyp), a.out, "constraints.lp")
    if a.out is not None:
        write_atomic(a.out / "report.json", report.to_json())
    else:
        sys.stderr.write(report.to_json() + "\n")
    return 0


def _config_from_args(a) -> RunConfig:
    cfg = RunConfig.from_text(Path(a.config).read_text()) if a.config else RunConfig()
    if a.seeds:
        cfg.seeds = _parse_seeds(a.seeds)
    if a.workers:
        cfg.workers = a.workers
    return cfg


def _cmd_pipeline(a) -> int:
    cfg = _config_from_args(a)
    summary = cmd_pipeline(cfg, a.out)
    if a.out is None:
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_benchmark(a) -> int:
    insts = [load_instance(s, a.seed) for s in a.instances]
    abk = _load_abk(a.abk)
    seeds = _parse_seeds(a.seeds) if a.seeds else [a.seed]
    timeout = a.timeout_ms if a.timeout_ms is not None else 60_000.0
    rows = cmd_benchmark(insts, abk, timeout, seeds)
    _emit(rows_to_csv(rows), a.out, "benchmark.csv")
    return 0


def _cmd_stats(a) -> int:
    rows = rows_from_csv(Path(a.csv).read_text())
    print(json.dumps(benchmark_stats(rows), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="run seed (default 0)")
    common.add_argument("--timeout-ms", type=float, default=argparse.SUPPRESS, help="wall-clock limit")
    common.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--config", default=argparse.SUPPRESS, help="key=value configuration file")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="sbclift", parents=[common],
                                description="Learn symmetry-breaking constraints for the Partner Unit Problem.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-instance", parents=[common], help="write an instance fact file")
    s.add_argument("instance", help="fig1, or a name like dbl-8, dblv-7, tri-9, un-dbl-6")
    s.set_defaults(func=_cmd_gen_instance)

    s = sub.add_parser("solve", parents=[common], help="find one solution")
    s.add_argument("instance")
    s.add_argument("--abk", help="constraint file added to the encoding")
    s.add_argument("--randomize", action="store_true", help="seeded random value order")
    s.set_defaults(func=_cmd_solve)

    s = sub.add_parser("enumerate", parents=[common], help="count or list solutions")
    s.add_argument("instance")
    s.add_argument("--abk")
    s.add_argument("--limit", type=int)
    s.add_argument("--print-solutions", action="store_true")
    s.set_defaults(func=_cmd_enumerate)

    s = sub.add_parser("detect-sym", parents=[common], help="print symmetry generators")
    s.add_argument("instance")
    s.set_defaults(func=_cmd_detect_sym)

    s = sub.add_parser("gen-examples", parents=[common], help="generate learning examples")
    s.add_argument("instance")
    s.add_argument("--strategy", choices=STRATEGIES, default="scalable_fullsbcs")
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--cells", type=int, default=20)
    s.add_argument("--max-cell-size", type=int, default=5)
    s.set_defaults(func=_cmd_gen_examples)

    s = sub.add_parser("learn", parents=[common], help="learn constraints from example files")
    s.add_argument("examples", nargs="+")
    s.add_argument("--gen", nargs="*", default=[], help="generalization instances")
    s.add_argument("--scheme", choices=SCHEMES, default="custom")
    s.set_defaults(func=_cmd_learn)

    s = sub.add_parser("pipeline", parents=[common], help="examples + learning for every seed")
    s.add_argument("--seeds", help="e.g. 0-11 or 1,5,9")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=_cmd_pipeline)

    s = sub.add_parser("benchmark", parents=[common], help="plain vs constrained solving, CSV")
    s.add_argument("instances", nargs="+")
    s.add_argument("--abk")
    s.add_argument("--seeds")
    s.set_defaults(func=_cmd_benchmark)

    s = sub.add_parser("stats", parents=[common], help="Wilcoxon test over a benchmark CSV")
    s.add_argument("csv")
    s.set_defaults(func=_cmd_stats)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    a.config = getattr(a, "config", None)
    conf = read_config_pairs(a.config)
    a.seed = getattr(a, "seed", int(conf.get("seed", 0)))
    tm = conf.get("timeout_ms")
    a.timeout_ms = getattr(a, "timeout_ms", float(tm) if tm else None)
    out = getattr(a, "out", conf.get("out"))
    a.out = Path(out) if out else None
    logging.basicConfig(level=logging.INFO if getattr(a, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except (SbcliftError, ValueError, OSError) as exc:
        print(f"sbclift: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
