"""Train-and-evaluate across random seeds and summarize the spread of macro F1."""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from offlang.corpus import Dataset
from offlang.metrics import EvalReport
from offlang.nnet.model import ClassifierSpec
from offlang.train import TrainConfig, evaluate, train


@dataclass(frozen=True)
class SeedSweepReport:
    seeds: tuple[int, ...]
    macro_f1: tuple[float, ...]
    mean: float
    stddev: float
    spread: float
    spread_pct: float
    reports: tuple[EvalReport, ...] = ()

    @property
    def min(self) -> float:
        return min(self.macro_f1)

    @property
    def max(self) -> float:
        return max(self.macro_f1)

    def to_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "macro_f1": list(self.macro_f1),
            "mean": self.mean,
            "stddev": self.stddev,
            "spread": self.spread,
            "spread_pct": self.spread_pct,
            "per_seed": [dict(seed=s, **r.to_dict()) for s, r in zip(self.seeds, self.reports)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def format_table(self) -> str:
        lines = [f"{'seed':>8}  macro F1"]
        lines += [f"{s:>8}  {f:.4f}" for s, f in zip(self.seeds, self.macro_f1)]
        lines.append(f"{'mean':>8}  {self.mean:.4f}")
        lines.append(f"{'stddev':>8}  {self.stddev:.4f}")
        lines.append(f"{'spread':>8}  {self.spread:.4f} ({self.spread_pct:.2f}% of mean)")
        return "\n".join(lines)


def summarize(seeds, scores, reports=()) -> SeedSweepReport:
    """Aggregate per-seed scores. Every statistic is independent of the order
    of the inputs: fsum and stdev are exactly rounded."""
    seeds, scores = tuple(seeds), tuple(float(x) for x in scores)
    if len(seeds) != len(scores):
        raise ValueError("one score per seed required")
    if len(scores) < 2:
        raise ValueError("a seed sweep needs at least two seeds")
    mean = math.fsum(scores) / len(scores)
    spread = max(scores) - min(scores)
    return SeedSweepReport(
        seeds=seeds,
        macro_f1=scores,
        mean=mean,
        stddev=statistics.stdev(scores),
        spread=spread,
        spread_pct=100.0 * spread / mean if mean else 0.0,
        reports=tuple(reports),
    )


def _run_one(args) -> EvalReport:
    train_data, test_data, spec, cfg = args
    result = train(train_data, spec, cfg)
    return evaluate(result.params, spec, result.vocab, test_data)


def seed_sweep(
    train_data: Dataset,
    test_data: Dataset,
    spec: ClassifierSpec,
    cfg: TrainConfig,
    seeds,
    workers: int = 1,
) -> SeedSweepReport:
    """Train once per seed on `train_data`, score macro F1 on `test_data`.

    Runs are independent; with ``workers > 1`` they go to a process pool and
    results are still reported in the order `seeds` was given.
    """
    seeds = [int(s) for s in seeds]
    if len(seeds) < 2:
        raise ValueError("a seed sweep needs at least two seeds")
    jobs = [(train_data, test_data, spec, replace(cfg, seed=s)) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    return summarize(seeds, [r.macro_f1 for r in reports], reports)
