"""Static and temporal node-pair similarities computed from cascade time-series.

Every metric is a normalization class applied to a kernel-weighted co-adoption
count ``W_ij = sum_a R_ia R_ja w(|t_ia - t_ja|)``. Three time-lag kernels are
supported: ``static`` (w = 1), ``powerlaw`` (w = 1/dt, 0 at dt = 0) and
``onestep`` (w = 1 iff dt = 1).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import condensed_index
from .spreading import CascadeSet

KERNELS = ("static", "powerlaw", "onestep")
CLASSES = ("CN", "JAC", "COS", "LHN", "SSI", "HPI", "HDI", "PA")

# scores for n above this are kept as a sparse pair map
DENSE_THRESHOLD = 3000

# recorded in run manifests: temporal PA is a_i * a_j * W_ij
PA_INTERPRETATION = "degree-product-times-weighted-coadoption"


@dataclass(frozen=True, order=True)
class MetricSpec:
    cls: str
    kernel: str

    def __post_init__(self):
        object.__setattr__(self, "cls", self.cls.upper())
        object.__setattr__(self, "kernel", self.kernel.lower())
        if self.cls not in CLASSES:
            raise ValueError(f"unknown similarity class {self.cls!r}")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")

    @property
    def display_name(self) -> str:
        if self.kernel == "static":
            return self.cls
        return "T" + self.cls + ("1" if self.kernel == "onestep" else "")

    def __str__(self):
        return self.display_name


ALL_METRICS = tuple(MetricSpec(c, k) for c in CLASSES for k in KERNELS)


def parse_metric(name: str) -> MetricSpec:
    """Accept ``TCOS1``, ``TCOS``, ``COS`` or ``COS:onestep`` forms."""
    name = name.strip()
    if ":" in name:
        cls, kernel = name.split(":", 1)
        return MetricSpec(cls, kernel)
    up = name.upper()
    if up in CLASSES:
        return MetricSpec(up, "static")
    if up.startswith("T") and up.endswith("1") and up[1:-1] in CLASSES:
        return MetricSpec(up[1:-1], "onestep")
    if up.startswith("T") and up[1:] in CLASSES:
        return MetricSpec(up[1:], "powerlaw")
    raise ValueError(f"cannot parse metric name {name!r}")


def parse_metrics(text: str | Iterable[str] | None) -> list[MetricSpec]:
    if text is None or text == "all":
        return list(ALL_METRICS)
    names = text.split(",") if isinstance(text, str) else list(text)
    return [parse_metric(s) for s in names if s.strip()]


def kernel_weight(kernel: str, dt):
    """Weight of a co-adoption with time lag ``dt >= 0`` (scalar or array)."""
    dt_arr = np.asarray(dt)
    if (dt_arr < 0).any():
        raise ValueError("time lag must be non-negative")
    if kernel == "static":
        out = np.ones(dt_arr.shape)
    elif kernel == "powerlaw":
        out = np.zeros(dt_arr.shape)
        nz = dt_arr > 0
        out[nz] = 1.0 / dt_arr[nz]
    elif kernel == "onestep":
        out = (dt_arr == 1).astype(np.float64)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return float(out) if np.ndim(dt) == 0 else out


def weighted_coadoption(cs: CascadeSet, i: int, j: int, kernel: str) -> float:
    if i == j:
        raise ValueError("weighted co-adoption needs two distinct nodes")
    ti, tj = cs.times[i], cs.times[j]
    both = (ti >= 0) & (tj >= 0)
    return float(np.sum(kernel_weight(kernel, np.abs(ti[both] - tj[both]))))


def adoption_count(cs: CascadeSet, i: int) -> int:
    return int(np.count_nonzero(cs.times[i] >= 0))


def pairs_from_condensed(n: int, k) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`condensed_index`."""
    k = np.asarray(k, dtype=np.int64)
    i = n - 2 - np.floor(np.sqrt(-8.0 * k + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5).astype(np.int64)
    j = k + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2
    return i, j


class SimilarityScores:
    """Scores for all unordered pairs ``i < j``.

    Dense form: ``values`` is the condensed upper-triangular vector (row-major,
    same layout as ``scipy.spatial.distance.squareform``). Sparse form: ``keys``
    holds sorted condensed indices of the stored pairs and every other pair
    scores 0.
    """

    def __init__(self, n: int, values: np.ndarray, keys: np.ndarray | None = None):
        if n < 2:
            raise ValueError("need at least two nodes")
        self.n = n
        self.values = np.asarray(values, dtype=np.float64)
        self.keys = None if keys is None else np.asarray(keys, dtype=np.int64)
        expected = n * (n - 1) // 2
        if self.keys is None and self.values.size != expected:
            raise ValueError(f"dense scores need {expected} values, got {self.values.size}")
        if self.keys is not None and self.keys.shape != self.values.shape:
            raise ValueError("keys and values differ in length")

    @property
    def is_sparse(self) -> bool:
        return self.keys is not None

    @property
    def num_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    def dense(self) -> np.ndarray:
        if self.keys is None:
            return self.values
        out = np.zeros(self.num_pairs)
        out[self.keys] = self.values
        return out

    def values_at(self, keys) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        if self.keys is None:
            return self.values[keys]
        out = np.zeros(keys.shape)
        if self.keys.size == 0:
            return out
        pos = np.minimum(np.searchsorted(self.keys, keys), self.keys.size - 1)
        hit = self.keys[pos] == keys
        out[hit] = self.values[pos[hit]]
        return out

    def score(self, i: int, j: int) -> float:
        if i == j:
            raise ValueError("no score for self-pairs")
        i, j = min(i, j), max(i, j)
        return float(self.values_at(condensed_index(self.n, i, j)))

    def matrix(self) -> np.ndarray:
        """Full symmetric matrix with zero diagonal (small ``n`` only)."""
        out = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, 1)
        out[iu] = self.dense()
        return out + out.T

    def explicit(self) -> tuple[np.ndarray, np.ndarray]:
        """``(keys, values)`` of the stored entries."""
        if self.keys is None:
            return np.arange(self.num_pairs, dtype=np.int64), self.values
        return self.keys, self.values


class _Numerators:
    """Kernel-weighted co-adoption counts accumulated item by item."""

    def __init__(self, cs: CascadeSet, kernels: Iterable[str], dense_threshold: int = DENSE_THRESHOLD):
        self.n = cs.n
        self.counts = cs.adoption_counts().astype(np.float64)
        kernels = set(kernels) | {"static"}
        self.sparse = self.n > dense_threshold
        if self.sparse:
            self.table = _accumulate_sparse(cs, kernels)
        else:
            self.table = _accumulate_dense(cs, kernels)
            self._iu = np.triu_indices(self.n, 1)

    def pairs(self, kernel: str):
        """Return ``(keys | None, i, j, W)``; keys is None in dense form."""
        if self.sparse:
            keys, w = self.table[kernel]
            i, j = pairs_from_condensed(self.n, keys)
            return keys, i, j, w
        return None, self._iu[0], self._iu[1], self.table[kernel]

    def static_at(self, keys) -> np.ndarray:
        skeys, sw = self.table["static"]
        pos = np.searchsorted(skeys, keys)
        return sw[pos]


def _accumulate_dense(cs: CascadeSet, kernels) -> dict[str, np.ndarray]:
    n = cs.n
    full = {k: np.zeros((n, n)) for k in kernels}
    for a in range(cs.m):
        nodes, t = cs.adopters(a)
        if nodes.size < 2:
            continue
        dt = np.abs(t[:, None] - t[None, :])
        block = np.ix_(nodes, nodes)
        for k in kernels:
            full[k][block] += kernel_weight(k, dt)
    iu = np.triu_indices(n, 1)
    return {k: full[k][iu] for k in kernels}


def _accumulate_sparse(cs: CascadeSet, kernels, chunk: int = 4_000_000) -> dict:
    n = cs.n
    acc = {k: (np.zeros(0, np.int64), np.zeros(0)) for k in kernels}
    buf = {k: ([], []) for k in kernels}
    buffered = 0

    def flush():
        for k in kernels:
            keys_l, w_l = buf[k]
            if not keys_l:
                continue
            prev_keys, prev_w = acc[k]
            keys = np.concatenate([prev_keys] + keys_l)
            w = np.concatenate([prev_w] + w_l)
            # previous totals come first so each pair is summed in item order
            uniq, inv = np.unique(keys, return_inverse=True)
            acc[k] = (uniq, np.bincount(inv, weights=w, minlength=uniq.size))
            buf[k] = ([], [])

    for a in range(cs.m):
        nodes, t = cs.adopters(a)
        if nodes.size < 2:
            continue
        r, c = np.triu_indices(nodes.size, 1)
        keys = condensed_index(n, nodes[r], nodes[c])
        dt = np.abs(t[r] - t[c])
        for k in kernels:
            w = kernel_weight(k, dt)
            nz = w != 0
            buf[k][0].append(keys[nz])
            buf[k][1].append(w[nz])
        buffered += keys.size
        if buffered >= chunk:
            flush()
            buffered = 0
    flush()
    return acc


def _normalize(cls: str, kernel: str, w, c, ai, aj) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        if cls == "CN":
            out = w.copy()
        elif cls == "JAC":
            out = w / (ai + aj - c)
        elif cls == "COS":
            out = w / np.sqrt(ai * aj)
        elif cls == "LHN":
            out = w / (ai * aj)
        elif cls == "SSI":
            out = 2.0 * w / (ai + aj)
        elif cls == "HPI":
            out = w / np.minimum(ai, aj)
        elif cls == "HDI":
            out = w / np.maximum(ai, aj)
        elif cls == "PA":
            out = ai * aj if kernel == "static" else ai * aj * w
        else:
            raise ValueError(cls)
    out = np.asarray(out, dtype=np.float64)
    out[~np.isfinite(out)] = 0.0
    return out


def _scores_for(num: _Numerators, spec: MetricSpec) -> SimilarityScores:
    n = num.n
    if spec.cls == "PA" and spec.kernel == "static":
        i, j = np.triu_indices(n, 1)
        return SimilarityScores(n, num.counts[i] * num.counts[j])
    keys, i, j, w = num.pairs(spec.kernel)
    ai, aj = num.counts[i], num.counts[j]
    if spec.cls == "JAC":
        c = num.pairs("static")[3] if keys is None else num.static_at(keys)
    else:
        c = None
    values = _normalize(spec.cls, spec.kernel, w, c, ai, aj)
    return SimilarityScores(n, values, keys)


def similarity_scores(cs: CascadeSet, specs: Iterable[MetricSpec] | None = None,
                      dense_threshold: int = DENSE_THRESHOLD) -> dict[MetricSpec, SimilarityScores]:
    """Scores for several metrics, sharing one pass over the cascades."""
    specs = list(ALL_METRICS if specs is None else specs)
    if cs.n < 2:
        raise ValueError("need at least two nodes")
    num = _Numerators(cs, {s.kernel for s in specs}, dense_threshold)
    return {s: _scores_for(num, s) for s in specs}


def similarity_matrix(cs: CascadeSet, spec: MetricSpec, dense_threshold: int = DENSE_THRESHOLD) -> SimilarityScores:
    return similarity_scores(cs, [spec], dense_threshold)[spec]


def kernel_dominance_violations(scores: dict[MetricSpec, SimilarityScores]) -> int:
    """Pairs where onestep > powerlaw or powerlaw > static, over non-PA classes."""
    bad = 0
    for cls in CLASSES:
        if cls == "PA":
            continue
        chain = [scores.get(MetricSpec(cls, k)) for k in ("onestep", "powerlaw", "static")]
        for lo, hi in zip(chain, chain[1:]):
            if lo is None or hi is None:
                continue
            keys, vals = lo.explicit()
            bad += int(np.count_nonzero(vals > hi.values_at(keys)))
    return bad


# ---------------------------------------------------------------------------
# score dump CSV (i,j,score)

SCORE_HEADER = ["i", "j", "score"]


def write_scores(scores: SimilarityScores, fh, top_k: int | None = None) -> None:
    """Write nonzero scores; with ``top_k`` only the highest ``top_k`` pairs."""
    keys, vals = scores.explicit()
    nz = vals != 0
    keys, vals = keys[nz], vals[nz]
    if top_k is not None and vals.size > top_k:
        order = np.argsort(-vals, kind="stable")[:top_k]
        order.sort()
        keys, vals = keys[order], vals[order]
    i, j = pairs_from_condensed(scores.n, keys)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SCORE_HEADER)
    for a, b, s in zip(i.tolist(), j.tolist(), vals.tolist()):
        w.writerow([a, b, repr(s)])


def read_scores(fh, n: int) -> SimilarityScores:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != SCORE_HEADER:
        raise ValueError("score file must start with header i,j,score")
    keys, vals = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            i, j, s = int(row[0]), int(row[1]), float(row[2])
        except (ValueError, IndexError):
            raise ValueError(f"line {lineno}: malformed score row {row}") from None
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"line {lineno}: invalid pair ({i}, {j}) for n={n}")
        i, j = min(i, j), max(i, j)
        keys.append(int(condensed_index(n, i, j)))
        vals.append(s)
    keys_arr = np.asarray(keys, dtype=np.int64)
    order = np.argsort(keys_arr, kind="stable")
    keys_arr = keys_arr[order]
    if np.any(np.diff(keys_arr) == 0):
        raise ValueError("duplicate pair in score file")
    return SimilarityScores(n, np.asarray(vals)[order], keys_arr)
