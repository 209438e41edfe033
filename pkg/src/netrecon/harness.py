"""Experiment orchestration: graph -> cascades -> similarity scores -> evaluation."""

from __future__ import annotations

import csv
import json
import math
import os
import time
import warnings
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import auc, mean_rank, mean_relative_precision, precision_at_e, relative_difference
from .graph import (Graph, GeneratorParams, clustering_coefficient, degree_stats, generate, load_dataset,
                    load_edge_list)
from .similarity import (CLASSES, DENSE_THRESHOLD, KERNELS, PA_INTERPRETATION, MetricSpec,
                         kernel_dominance_violations, parse_metrics, similarity_scores)
from .spreading import SpreadParams, run_cascades

REPORT_HEADER = ["dataset", "metric", "kernel", "repeat", "precision", "auc"]
AGGREGATE_HEADER = ["metric", "mean_rank", "mean_relative_precision"]
RELDIFF_HEADER = ["dataset", "class", "clustering", "dP_T1_vs_S", "dP_T1_vs_T"]
SWEEP_HEADER = ["beta", "metric", "kernel", "precision", "auc"]

# exact AUC above this node count is replaced by sampling unless configured
AUC_EXACT_MAX_NODES = 5000
AUC_DEFAULT_SAMPLES = 100_000

_AUC_STREAM = 1 << 20


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def stage(name: str, timings: dict | None = None):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        if timings is not None:
            timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


def derive_seed(master: int, *path: int) -> int:
    """Counter-based child seed: the 64-bit state of ``SeedSequence(master, spawn_key=path)``."""
    ss = np.random.SeedSequence(master, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def repeat_seed(master: int, repeat: int) -> int:
    return derive_seed(master, repeat)


@dataclass
class NetworkSpec:
    name: str
    path: str | None = None
    dataset: str | None = None
    generator: dict | None = None
    id_mode: str = "remap"

    def load(self) -> Graph:
        sources = [x is not None for x in (self.path, self.dataset, self.generator)]
        if sum(sources) != 1:
            raise ValueError(f"network {self.name!r} needs exactly one of path, dataset, generator")
        if self.path is not None:
            return load_edge_list(Path(self.path), id_mode=self.id_mode)
        if self.dataset is not None:
            return load_dataset(self.dataset)
        return generate(GeneratorParams(**self.generator))


@dataclass
class ExperimentSpec:
    """One benchmark configuration.

    Stored as JSON with the same field names; ``networks`` is a list of
    objects with ``name`` and one of ``path``, ``dataset`` or ``generator``.
    """

    networks: list[NetworkSpec]
    model: str = "sir"
    beta: float | None = None
    beta_mult: float | None = None
    mu: float | None = None
    f: float = 0.5
    theta: float | None = None
    max_steps: int | None = None
    m: int = 50
    repeats: int = 50
    metrics: list[str] = field(default_factory=lambda: ["all"])
    master_seed: int = 0
    output_dir: str | None = None
    auc_samples: int | None = None
    dense_threshold: int = DENSE_THRESHOLD

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        if "spec" in data and "tool" in data:
            data = dict(data["spec"])  # a run manifest
        nets = [n if isinstance(n, NetworkSpec) else NetworkSpec(**n) for n in data.pop("networks", [])]
        known = set(cls.__dataclass_fields__) - {"networks"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(networks=nets, **data)

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def metric_specs(self) -> list[MetricSpec]:
        if self.metrics in (["all"], "all", None):
            return parse_metrics(None)
        return parse_metrics(self.metrics)

    def validate(self) -> None:
        if not self.networks:
            raise ValueError("experiment lists no networks")
        for net in self.networks:
            if net.path is not None and not Path(net.path).is_file():
                raise ValueError(f"edge list not found: {net.path}")
        if self.m < 1 or self.repeats < 1:
            raise ValueError("m and repeats must be positive")
        if self.model in ("sir", "si") and (self.beta is None) == (self.beta_mult is None):
            raise ValueError("give exactly one of beta and beta_mult")
        self.metric_specs()

    def spread_params(self, g: Graph) -> tuple[SpreadParams, dict]:
        beta, info = None, {}
        if self.model in ("sir", "si"):
            beta, info = resolve_beta(g, self.beta, self.beta_mult)
        params = SpreadParams(model=self.model, beta=beta, mu=self.mu, f=self.f,
                              theta=self.theta, max_steps=self.max_steps)
        return params, info


def resolve_beta(g: Graph, beta: float | None = None, beta_mult: float | None = None) -> tuple[float, dict]:
    """Absolute transmission probability, resolving multiples of the epidemic threshold.

    Values above 1 are clamped with a warning.
    """
    if (beta is None) == (beta_mult is None):
        raise ValueError("give exactly one of beta and beta_mult")
    info = {}
    if beta_mult is not None:
        stats = degree_stats(g)
        if stats.beta_c is None:
            raise ValueError("beta_mult needs a graph with <k^2> > <k>")
        beta = beta_mult * stats.beta_c
        info["beta_c"] = stats.beta_c
    info["beta_requested"] = beta
    if beta > 1.0:
        warnings.warn(f"beta={beta:.4g} exceeds 1; clamped to 1", stacklevel=2)
        beta = 1.0
        info["beta_clamped"] = True
    info["beta"] = beta
    return beta, info


@dataclass
class BenchmarkResult:
    report: list[list]
    aggregate: list[list]
    reldiff: list[list]
    manifest: dict
    mean_precision: dict = field(default_factory=dict)  # (dataset, spec) -> float
    mean_auc: dict = field(default_factory=dict)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def evaluate_repeat(g: Graph, params: SpreadParams, specs, m: int, seed: int,
                    auc_samples: int | None, dense_threshold: int, timings: dict | None = None):
    """One end-to-end repeat; returns ``({spec: (precision, auc)}, dominance violations)``."""
    with stage("simulate", timings):
        cs = run_cascades(g, params, m, seed)
    with stage("score", timings):
        scores = similarity_scores(cs, specs, dense_threshold)
        violations = kernel_dominance_violations(scores)
    out = {}
    # AUC is undefined when every pair (or no pair) is an edge; reported as missing
    auc_defined = 0 < g.num_edges < g.n * (g.n - 1) // 2
    with stage("evaluate", timings):
        for spec in specs:
            s = scores[spec]
            a = math.nan
            if auc_defined:
                rng = np.random.default_rng(derive_seed(seed, _AUC_STREAM)) if auc_samples else None
                a = auc(s, g, samples=auc_samples, rng=rng)
            out[spec] = (precision_at_e(s, g), a)
    return out, violations


def run_benchmark(spec: ExperimentSpec, graphs: dict[str, Graph] | None = None) -> BenchmarkResult:
    with stage("validate"):
        spec.validate()
        specs = spec.metric_specs()
    timings: dict[str, float] = {}
    report, net_info = [], []
    mean_p, mean_a = {}, {}
    violations = 0
    seeds = [repeat_seed(spec.master_seed, r) for r in range(spec.repeats)]

    for net in spec.networks:
        with stage("load", timings):
            g = graphs[net.name] if graphs and net.name in graphs else net.load()
            params, info = spec.spread_params(g)
            clustering = clustering_coefficient(g)
        auc_samples = spec.auc_samples
        if auc_samples is None and g.n > AUC_EXACT_MAX_NODES:
            auc_samples = AUC_DEFAULT_SAMPLES
        net_info.append({"name": net.name, "n": g.n, "E": g.num_edges, "clustering": clustering,
                         "auc_samples": auc_samples, **g.meta, **info})
        per_spec = {s: ([], []) for s in specs}
        for r, seed in enumerate(seeds):
            results, v = evaluate_repeat(g, params, specs, spec.m, seed, auc_samples,
                                         spec.dense_threshold, timings)
            violations += v
            for s in specs:
                p, a = results[s]
                per_spec[s][0].append(p)
                per_spec[s][1].append(a)
                report.append([net.name, s.cls, s.kernel, r, _fmt(p), _fmt(a)])
        for s in specs:
            mean_p[(net.name, s)] = float(np.mean(per_spec[s][0]))
            mean_a[(net.name, s)] = float(np.mean(per_spec[s][1]))

    names = [n.name for n in spec.networks]
    with stage("aggregate", timings):
        aggregate = aggregate_rows(names, specs, mean_p)
        reldiff = reldiff_rows(names, specs, mean_p, {i["name"]: i["clustering"] for i in net_info})

    manifest = {
        "tool": "netrecon",
        "version": __version__,
        "spec": spec.to_dict(),
        "pa_interpretation": PA_INTERPRETATION,
        "networks": net_info,
        "seeds": {"master": spec.master_seed, "repeats": seeds,
                  "derivation": "repeat r: SeedSequence(master, spawn_key=(r,)); "
                                "cascade a: SeedSequence(repeat_seed, spawn_key=(a,))"},
        "kernel_dominance_violations": violations,
        "timings_s": {k: round(v, 4) for k, v in timings.items()},
    }
    return BenchmarkResult(report, aggregate, reldiff, manifest, mean_p, mean_a)


def aggregate_rows(names, specs, mean_p) -> list[list]:
    """Mean rank and mean relative precision, ranking within each kernel family."""
    rows = []
    for kernel in KERNELS:
        family = [s for s in specs if s.kernel == kernel]
        if not family:
            continue
        table = np.array([[mean_p[(d, s)] for s in family] for d in names])
        ranks = mean_rank(table)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            try:
                rel = mean_relative_precision(table)
            except ValueError:
                rel = np.full(len(family), np.nan)
        for s, r, q in zip(family, ranks, rel):
            rows.append([s.display_name, _fmt(float(r)), _fmt(float(q))])
    return rows


def reldiff_rows(names, specs, mean_p, clustering) -> list[list]:
    present = set(specs)
    rows = []
    for d in names:
        for cls in CLASSES:
            if not all(MetricSpec(cls, k) in present for k in KERNELS):
                continue
            ps = mean_p[(d, MetricSpec(cls, "static"))]
            pt = mean_p[(d, MetricSpec(cls, "powerlaw"))]
            p1 = mean_p[(d, MetricSpec(cls, "onestep"))]
            rows.append([d, cls, _fmt(clustering[d]), _fmt(relative_difference(p1, ps)),
                         _fmt(relative_difference(p1, pt))])
    return rows


def sweep_beta(spec: ExperimentSpec, betas=None, beta_mults=None) -> tuple[list[list], list[dict]]:
    """One benchmark per grid point with shared seeds; rows hold means over repeats."""
    if len(spec.networks) != 1:
        raise ValueError("sweep-beta runs on exactly one network")
    grid = [("beta", b) for b in (betas or [])] + [("beta_mult", b) for b in (beta_mults or [])]
    if not grid:
        raise ValueError("empty beta grid")
    g = spec.networks[0].load()
    rows, manifests = [], []
    for kind, value in grid:
        point = ExperimentSpec.from_dict({**spec.to_dict(), "beta": None, "beta_mult": None, kind: value})
        res = run_benchmark(point, graphs={spec.networks[0].name: g})
        beta = res.manifest["networks"][0]["beta"]
        for s in point.metric_specs():
            key = (spec.networks[0].name, s)
            rows.append([_fmt(beta), s.cls, s.kernel, _fmt(res.mean_precision[key]), _fmt(res.mean_auc[key])])
        manifests.append(res.manifest)
    return rows, manifests


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_outputs(out_dir, files: dict[str, tuple[list, list]], manifest: dict | None = None) -> list[Path]:
    """Write CSVs (and manifest) atomically; nothing is left behind on failure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, (header, rows) in files.items():
            tmp = out / (name + ".tmp")
            write_csv(tmp, header, rows)
            os.replace(tmp, out / name)
            written.append(out / name)
        if manifest is not None:
            tmp = out / "manifest.json.tmp"
            tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
            os.replace(tmp, out / "manifest.json")
            written.append(out / "manifest.json")
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        for p in out.glob("*.tmp"):
            p.unlink(missing_ok=True)
        raise
    return written


def write_benchmark(res: BenchmarkResult, out_dir) -> list[Path]:
    return write_outputs(out_dir, {
        "report.csv": (REPORT_HEADER, res.report),
        "aggregate.csv": (AGGREGATE_HEADER, res.aggregate),
        "reldiff.csv": (RELDIFF_HEADER, res.reldiff),
    }, res.manifest)
