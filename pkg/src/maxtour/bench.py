"""Random coverage instances, algorithm comparison, curvature sweep, result files.

Instances place vertices uniformly in a rectangle; every edge gets a rectangle
of some thickness and the reward of an edge set is the area its rectangles
cover. Instance files are JSON documents (``format: maxtour-instance/1``)
holding the vertex count, direction flag, coordinates and objective.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from .graph import Instance, is_independent, is_tour, SystemKind
from .greedy import (
    SolveReport,
    greedy_matching,
    greedy_matching_directed,
    greedy_tour,
    greedy_tour_directed,
    random_tour,
)
from .matching import PRESETS, linear_relaxation_matching, matching_pipeline
from .objectives import (
    CombinedCostOracle,
    CoverageOracle,
    ModularOracle,
    SumOracle,
    ValueOracle,
    curvature,
    edge_lengths,
)

FORMAT = "maxtour-instance/1"
THICKNESS_MODELS = ("bernoulli", "uniform", "fixed")


class ConfigError(ValueError):
    pass


@dataclass
class GeneratorSpec:
    n: int
    seed: int = 0
    width: float = 100.0
    height: float = 100.0
    thickness: str = "bernoulli"
    hi: float = 7.0
    lo: float = 1.0
    uniform_max: float = 7.0
    fixed: float = 1.0
    directed: bool = False
    grid_h: float = 0.5
    length_bonus: bool = False
    cost: str | None = None
    beta: float = 0.0
    mode: str = "raw"

    def validate(self):
        if self.n < 3:
            raise ConfigError("n must be at least 3")
        if self.thickness not in THICKNESS_MODELS:
            raise ConfigError(f"unknown thickness model {self.thickness!r}")
        if min(self.hi, self.lo, self.uniform_max, self.fixed) < 0:
            raise ConfigError("thickness parameters must be non-negative")
        if self.width <= 0 or self.height <= 0 or self.grid_h <= 0:
            raise ConfigError("region and grid sizes must be positive")
        if self.cost not in (None, "euclidean"):
            raise ConfigError(f"unknown cost model {self.cost!r}")
        if not 0 <= self.beta <= 1:
            raise ConfigError("beta must lie in [0, 1]")

    @property
    def high_probability(self) -> float:
        return min(1.0, max(0.0, 2.0 / math.sqrt(self.n)))


def instance_document(spec: GeneratorSpec) -> dict:
    """Draw coordinates and thicknesses, returning the serialisable instance document."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    coords = rng.uniform((0.0, 0.0), (spec.width, spec.height), size=(spec.n, 2))
    m = spec.n * (spec.n - 1) if spec.directed else spec.n * (spec.n - 1) // 2
    if spec.thickness == "bernoulli":
        high = rng.random(m) < spec.high_probability
        thickness = np.where(high, spec.hi, spec.lo)
    elif spec.thickness == "uniform":
        thickness = rng.uniform(0.0, spec.uniform_max, size=m)
    else:
        thickness = np.full(m, spec.fixed)
    objective = {
        "kind": "coverage",
        "thickness": [float(t) for t in thickness],
        "grid_h": spec.grid_h,
        "region": [spec.width, spec.height],
        "length_bonus": spec.length_bonus,
    }
    doc = {
        "format": FORMAT,
        "n": spec.n,
        "directed": spec.directed,
        "coords": [[float(x), float(y)] for x, y in coords],
        "objective": objective,
        "generator": asdict(spec),
    }
    if spec.cost == "euclidean":
        inst = Instance(spec.n, spec.directed, doc["coords"])
        doc["objective"] = {
            "kind": "combined",
            "base": objective,
            "costs": edge_lengths(inst),
            "beta": spec.beta,
            "mode": spec.mode,
        }
    return doc


def build_oracle(inst: Instance, objective: dict) -> ValueOracle:
    kind = objective.get("kind")
    if kind == "modular":
        return ModularOracle(inst, objective["weights"])
    if kind == "coverage":
        region = tuple(objective.get("region", (100.0, 100.0)))
        cov = CoverageOracle(inst, objective["thickness"], objective.get("grid_h", 0.5), region)
        if objective.get("length_bonus"):
            return SumOracle(cov, ModularOracle(inst, edge_lengths(inst)))
        return cov
    if kind == "combined":
        base = build_oracle(inst, objective["base"])
        return CombinedCostOracle(
            base,
            objective["costs"],
            objective["beta"],
            objective.get("mode", "raw"),
            top_k_offset=objective.get("top_k_offset", False),
        )
    raise ConfigError(f"unknown objective kind {kind!r}")


def load_document(doc: dict) -> tuple[Instance, ValueOracle]:
    if doc.get("format") != FORMAT:
        raise ConfigError(f"not a {FORMAT} document")
    inst = Instance(int(doc["n"]), bool(doc.get("directed", False)), doc.get("coords"))
    return inst, build_oracle(inst, doc["objective"])


def generate_instance(spec: GeneratorSpec) -> tuple[Instance, ValueOracle, dict]:
    doc = instance_document(spec)
    inst, oracle = load_document(doc)
    return inst, oracle, doc


def dumps_document(doc: dict) -> str:
    # float repr is the shortest exact round-trip form
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_instance(path: str | os.PathLike, doc: dict) -> None:
    Path(path).write_text(dumps_document(doc))


def read_instance(path: str | os.PathLike) -> tuple[Instance, ValueOracle, dict]:
    doc = json.loads(Path(path).read_text())
    inst, oracle = load_document(doc)
    return inst, oracle, doc


Solver = Callable[..., SolveReport]


def _gt(inst, oracle, seed, kappa):
    return (greedy_tour_directed if inst.directed else greedy_tour)(inst, oracle, kappa=kappa)


def _pipeline(name):
    def run(inst, oracle, seed, kappa):
        return matching_pipeline(inst, oracle, PRESETS[name], kappa=kappa, seed=seed, name=name)

    return run


def _greedy_match(inst, oracle, seed, kappa):
    return (greedy_matching_directed if inst.directed else greedy_matching)(inst, oracle, kappa=kappa)


ALGORITHMS: dict[str, Solver] = {
    "GT": _gt,
    "RT": lambda inst, oracle, seed, kappa: random_tour(inst, oracle, seed),
    **{name: _pipeline(name) for name in PRESETS},
    "GreedyMatching2": _greedy_match,
    "LinearMatching2": lambda inst, oracle, seed, kappa: linear_relaxation_matching(inst, oracle, kappa=kappa),
}
TOUR_ALGORITHMS = ("GT", "RT", *PRESETS)


def solve(name: str, inst: Instance, oracle: ValueOracle, seed: int = 0, kappa: float | None = None) -> SolveReport:
    """Run a named algorithm; ``kappa`` only feeds the certificate."""
    try:
        solver = ALGORITHMS[name]
    except KeyError:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    report = solver(inst, oracle, seed, kappa)
    _check_structure(name, inst, report)
    return report


def _check_structure(name, inst, report):
    if name in TOUR_ALGORITHMS:
        ok = is_tour(inst, report.solution)
    else:
        kind = SystemKind.DEGREE_IN_OUT if inst.directed else SystemKind.TWO_MATCHING
        ok = is_independent(inst, kind, report.solution)
    if not ok:
        raise RuntimeError(f"{name} returned an infeasible edge set")


@dataclass
class ExperimentConfig:
    algorithms: list[str] = field(default_factory=lambda: ["GT", "RT", "GM", "GM2", "GM3"])
    sizes: list[int] = field(default_factory=lambda: [10, 20, 50])
    instances: int = 30
    seed: int = 0
    thickness: str = "bernoulli"
    hi: float = 7.0
    lo: float = 1.0
    uniform_max: float = 7.0
    fixed: float = 1.0
    width: float = 100.0
    height: float = 100.0
    grid_h: float = 0.5
    length_bonus: bool = False
    directed: bool = False
    cost: str | None = None
    beta: float = 0.0
    mode: str = "raw"
    thickness_grid: list[float] = field(default_factory=lambda: [float(t) for t in range(8)])

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def validate(self):
        if not self.algorithms:
            raise ConfigError("algorithm list is empty")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}")
        if not self.sizes or min(self.sizes) < 3:
            raise ConfigError("sizes must be non-empty and at least 3")
        if self.instances < 1:
            raise ConfigError("need at least one instance per size")

    def spec(self, n: int, seed: int, **overrides) -> GeneratorSpec:
        base = {f.name: getattr(self, f.name) for f in fields(GeneratorSpec) if hasattr(self, f.name)}
        base.update(n=n, seed=seed, **overrides)
        return GeneratorSpec(**base)


def instance_seed(base: int, size: int, index: int) -> int:
    return int(np.random.SeedSequence([base, size, index]).generate_state(1)[0])


@dataclass
class Results:
    name: str
    columns: list[str]
    rows: list[dict]
    summary_columns: list[str]
    summary: list[dict]
    timings: list[dict] = field(default_factory=list)
    text: str = ""


def _stats(values):
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), std, float(arr.min()), float(arr.max())


def run_comparison(cfg: ExperimentConfig) -> Results:
    """Run every algorithm on every instance; count wins per size.

    A win is a value equal to the best on that instance (ties count for all
    tied algorithms); a unique win has no tie.
    """
    cfg.validate()
    rows, timings = [], []
    for n in cfg.sizes:
        for i in range(cfg.instances):
            seed = instance_seed(cfg.seed, n, i)
            inst, oracle, _ = generate_instance(cfg.spec(n, seed))
            for algo in cfg.algorithms:
                try:
                    rep = solve(algo, inst, oracle, seed)
                except Exception as exc:
                    raise RuntimeError(f"{algo} failed on n={n} instance {i} (seed {seed})") from exc
                rows.append(
                    {"n": n, "instance": i, "seed": seed, "algorithm": algo,
                     "value": rep.value, "oracle_calls": rep.oracle_calls}
                )
                timings.append({"n": n, "instance": i, "algorithm": algo, "wall_time": rep.wall_time})
    summary = summarize_comparison(rows, cfg.algorithms)
    return Results(
        "comparison",
        ["n", "instance", "seed", "algorithm", "value", "oracle_calls"],
        rows,
        ["n", "algorithm", "mean", "std", "min", "max", "wins", "unique_wins", "mean_oracle_calls"],
        summary,
        timings,
        win_table(summary, cfg.algorithms),
    )


def summarize_comparison(rows: list[dict], algorithms: list[str]) -> list[dict]:
    by_instance: dict[tuple[int, int], dict[str, float]] = {}
    for r in rows:
        by_instance.setdefault((r["n"], r["instance"]), {})[r["algorithm"]] = r["value"]
    wins: dict[tuple[int, str], list[int]] = {}
    for (n, _), vals in sorted(by_instance.items()):
        best = max(vals.values())
        tol = 1e-9 * max(abs(best), 1.0)
        winners = [a for a, v in vals.items() if v >= best - tol]
        for a in vals:
            w = wins.setdefault((n, a), [0, 0])
            if a in winners:
                w[0] += 1
                if len(winners) == 1:
                    w[1] += 1
    summary = []
    for n in sorted({r["n"] for r in rows}):
        for a in algorithms:
            mine = [r for r in rows if r["n"] == n and r["algorithm"] == a]
            mean, std, lo, hi = _stats([r["value"] for r in mine])
            summary.append({
                "n": n, "algorithm": a, "mean": mean, "std": std, "min": lo, "max": hi,
                "wins": wins[(n, a)][0], "unique_wins": wins[(n, a)][1],
                "mean_oracle_calls": float(np.mean([r["oracle_calls"] for r in mine])),
            })
    return summary


def win_table(summary: list[dict], algorithms: list[str]) -> str:
    """Wins per size and algorithm, unique wins in parentheses."""
    sizes = sorted({s["n"] for s in summary})
    cell = {(s["n"], s["algorithm"]): f'{s["wins"]} ({s["unique_wins"]})' for s in summary}
    mean = {(s["n"], s["algorithm"]): f'{s["mean"]:.2f} +- {s["std"]:.2f}' for s in summary}
    width = 2 + max(*(len(a) for a in algorithms), *(len(v) for v in mean.values()), 12)
    head = "n".rjust(5) + "".join(a.rjust(width) for a in algorithms)
    lines = ["wins (unique wins)", head]
    lines += [str(n).rjust(5) + "".join(cell[(n, a)].rjust(width) for a in algorithms) for n in sizes]
    lines += ["", "mean value +- std", head]
    lines += [str(n).rjust(5) + "".join(mean[(n, a)].rjust(width) for a in algorithms) for n in sizes]
    return "\n".join(lines) + "\n"


SWEEP_COLUMNS = ["kappa", "greedy_matching", "linear_matching", "GT", "LGmatching", "Lmatching"]


def run_curvature_sweep(cfg: ExperimentConfig) -> Results:
    """Same vertex sets, uniform thickness ``t`` for every edge, reward = area + length."""
    if not cfg.thickness_grid:
        raise ConfigError("thickness grid is empty")
    if not cfg.sizes or min(cfg.sizes) < 3:
        raise ConfigError("sizes must be non-empty and at least 3")
    n = cfg.sizes[0]
    rows = []
    for t in cfg.thickness_grid:
        for i in range(cfg.instances):
            seed = instance_seed(cfg.seed, n, i)
            spec = cfg.spec(n, seed, thickness="fixed", fixed=float(t), length_bonus=True, cost=None)
            inst, oracle, _ = generate_instance(spec)
            row = {"thickness": float(t), "instance": i, "seed": seed,
                   "kappa": curvature(oracle).kappa}
            row["greedy_matching"] = solve("GreedyMatching2", inst, oracle, seed).value
            row["linear_matching"] = solve("LinearMatching2", inst, oracle, seed).value
            for algo in ("GT", "LGmatching", "Lmatching"):
                row[algo] = solve(algo, inst, oracle, seed).value
            rows.append(row)
    summary = []
    for t in cfg.thickness_grid:
        mine = [r for r in rows if r["thickness"] == float(t)]
        entry = {"thickness": float(t)}
        for c in SWEEP_COLUMNS:
            entry[c] = float(np.mean([r[c] for r in mine]))
        summary.append(entry)
    return Results(
        "curvature_sweep",
        ["thickness", "instance", "seed", *SWEEP_COLUMNS],
        rows,
        ["thickness", *SWEEP_COLUMNS],
        summary,
        text=_sweep_text(summary),
    )


def _sweep_text(summary):
    head = "thickness" + "".join(c.rjust(16) for c in SWEEP_COLUMNS)
    lines = ["batch averages", head]
    for s in summary:
        lines.append(f'{s["thickness"]:9.3f}' + "".join(f"{s[c]:16.4f}" for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: repr(r[c]) if isinstance(r[c], float) else r[c] for c in columns})
    return buf.getvalue()


def emit(results: Results, out_dir: str | os.PathLike, formats=("csv", "text")) -> list[Path]:
    """Write result tables.

    ``csv`` and ``text`` outputs depend only on the results, so reruns are
    byte-identical. Wall times are written to ``*_timings.csv`` only when
    ``timings`` is among the formats.
    """
    if not results.rows:
        raise ConfigError("nothing to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        for suffix, cols, rows in (
            ("", results.columns, results.rows),
            ("_summary", results.summary_columns, results.summary),
        ):
            p = out / f"{results.name}{suffix}.csv"
            p.write_text(_csv_text(cols, rows))
            written.append(p)
        if results.timings and "timings" in formats:
            p = out / f"{results.name}_timings.csv"
            p.write_text(_csv_text(list(results.timings[0]), results.timings))
            written.append(p)
    if "text" in formats:
        p = out / f"{results.name}_summary.txt"
        p.write_text(results.text)
        written.append(p)
    return written
