"""Undirected simple graphs: edge-list ingestion, BA/SW generators and statistics."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    """Raised for malformed edge lists and infeasible generator parameters."""


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    ``edges`` holds each edge once as ``(u, v)`` with ``u < v``; ``adjacency``
    holds sorted neighbour arrays. ``labels`` keeps the original node tokens
    when the graph was read from a file.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[np.ndarray, ...] = field(repr=False, compare=False)
    labels: tuple[str, ...] | None = field(default=None, repr=False, compare=False)
    meta: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None, meta=None) -> "Graph":
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                continue
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) outside node range 0..{n - 1}")
            canon.add((u, v) if u < v else (v, u))
        ordered = tuple(sorted(canon))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in ordered:
            nbrs[u].append(v)
            nbrs[v].append(u)
        adjacency = tuple(np.array(sorted(a), dtype=np.int64) for a in nbrs)
        return cls(n=n, edges=ordered, adjacency=adjacency,
                   labels=tuple(labels) if labels is not None else None,
                   meta=dict(meta or {}))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(indptr, indices)`` of the symmetric adjacency."""
        deg = self.degrees
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.concatenate(self.adjacency) if self.n else np.zeros(0, dtype=np.int64)
        return indptr, indices.astype(np.int64)

    def edge_mask(self) -> np.ndarray:
        """Boolean vector over unordered pairs in condensed (i<j, row-major) order."""
        mask = np.zeros(self.n * (self.n - 1) // 2, dtype=bool)
        if self.edges:
            e = np.asarray(self.edges, dtype=np.int64)
            mask[condensed_index(self.n, e[:, 0], e[:, 1])] = True
        return mask

    def has_edge(self, u: int, v: int) -> bool:
        a = self.adjacency[u]
        k = np.searchsorted(a, v)
        return bool(k < len(a) and a[k] == v)


def condensed_index(n: int, i, j):
    """Position of pair ``(i, j)``, ``i < j``, in a condensed upper-triangular vector."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return n * i - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class DegreeStats:
    mean_degree: float
    mean_square_degree: float
    beta_c: float | None


@dataclass(frozen=True)
class GeneratorParams:
    model: str  # "ba" or "sw"
    n: int
    k_avg: int
    m0: int | None = None
    p: float = 0.1
    seed: int = 0


# ---------------------------------------------------------------------------
# ingestion

def load_edge_list(source, id_mode: str = "remap") -> Graph:
    """Parse a whitespace-separated edge list.

    ``source`` may be a path, raw bytes/str, or a file object. Lines starting
    with ``%`` or ``#`` and blank lines are skipped; tokens after the first two
    (weights, timestamps in KONECT files) are ignored. With ``id_mode="remap"``
    nodes are numbered in order of first appearance; ``"dense"`` requires
    non-negative integer ids and uses them directly.
    """
    if id_mode not in ("remap", "dense"):
        raise GraphError(f"unknown id_mode {id_mode!r}")
    text = _read_text(source)

    pairs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "%#":
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise GraphError(f"line {lineno}: expected two node ids, got {line!r}")
        pairs.append((tokens[0], tokens[1]))
    if not pairs:
        raise GraphError("edge list contains no edges")

    if id_mode == "dense":
        ids = []
        for lineno, (a, b) in enumerate(pairs, start=1):
            try:
                u, v = int(a), int(b)
            except ValueError:
                raise GraphError(f"edge {lineno}: non-integer node id in dense mode ({a!r}, {b!r})") from None
            if u < 0 or v < 0:
                raise GraphError(f"edge {lineno}: negative node id")
            ids.append((u, v))
        n = max(max(u, v) for u, v in ids) + 1
        return Graph.from_edges(n, ids)

    index: dict[str, int] = {}
    ids = []
    for a, b in pairs:
        for tok in (a, b):
            if tok not in index:
                index[tok] = len(index)
        ids.append((index[a], index[b]))
    return Graph.from_edges(len(index), ids, labels=list(index))


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, str):
        if "\n" not in source and Path(source).is_file():
            return Path(source).read_text(encoding="utf-8")
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_dataset(name: str) -> Graph:
    """Load a network shipped with the package (currently ``zkc``)."""
    files = {"zkc": "zachary.edges", "zachary": "zachary.edges"}
    try:
        fname = files[name.lower()]
    except KeyError:
        raise GraphError(f"no bundled dataset named {name!r}") from None
    return load_edge_list(resources.files("netrecon.data").joinpath(fname).read_bytes())


def write_edge_list(g: Graph, fh: io.TextIOBase) -> None:
    fh.write(f"% undirected simple graph n={g.n} E={g.num_edges}\n")
    for u, v in g.edges:
        fh.write(f"{u} {v}\n")


# ---------------------------------------------------------------------------
# generators

def circulant_seed(m0: int, k: int) -> list[tuple[int, int]]:
    """Edges of the BA seed graph: densest circulant on ``m0`` nodes with degree <= ``k``.

    Offsets ``1..d//2`` on each side; when ``d`` is odd and ``m0`` even the
    diametric node is added, otherwise an odd ``d`` falls back to ``d - 1``.
    ``d`` is capped at ``m0 - 1`` (complete graph).
    """
    d = min(k, m0 - 1)
    edges = set()
    for i in range(m0):
        for off in range(1, d // 2 + 1):
            j = (i + off) % m0
            edges.add((min(i, j), max(i, j)))
        if d % 2 == 1 and m0 % 2 == 0:
            j = (i + m0 // 2) % m0
            edges.add((min(i, j), max(i, j)))
    return sorted(edges)


def generate_ba(params: GeneratorParams, rng: np.random.Generator | None = None) -> Graph:
    n, k = params.n, params.k_avg
    m0 = params.m0 if params.m0 is not None else k
    if k < 1:
        raise GraphError("BA needs k_avg >= 1")
    if k > m0:
        raise GraphError(f"BA infeasible: k_avg={k} > m0={m0}")
    if n <= m0:
        raise GraphError(f"BA needs n > m0 (n={n}, m0={m0})")
    if rng is None:
        rng = np.random.default_rng(params.seed)

    seed_edges = circulant_seed(m0, k)
    edges = list(seed_edges)
    deg = np.zeros(n, dtype=np.float64)
    for u, v in seed_edges:
        deg[u] += 1
        deg[v] += 1

    for new in range(m0, n):
        weights = deg[:new]
        total = weights.sum()
        cum = np.cumsum(weights)
        targets: set[int] = set()
        while len(targets) < k:
            if total > 0:
                t = int(np.searchsorted(cum, rng.random() * total, side="right"))
                t = min(t, new - 1)
            else:
                t = int(rng.integers(new))
            targets.add(t)
        for t in sorted(targets):
            edges.append((t, new))
            deg[t] += 1
        deg[new] = k

    return Graph.from_edges(n, edges, meta={"model": "ba", "E_seed": len(seed_edges),
                                             "seed_degree": _seed_degree(m0, k)})


def _seed_degree(m0: int, k: int) -> int:
    d = min(k, m0 - 1)
    if d % 2 == 1 and m0 % 2 == 1:
        d -= 1
    return d


def ring_lattice(n: int, k: int) -> list[tuple[int, int]]:
    """Ring with ``k//2`` neighbours per side; odd ``k`` adds an edge at offset
    ``k//2 + 1`` from every even-indexed node."""
    half = k // 2
    edges = set()
    for i in range(n):
        for off in range(1, half + 1):
            j = (i + off) % n
            edges.add((min(i, j), max(i, j)))
    if k % 2 == 1:
        for i in range(0, n - (n % 2), 2):
            j = (i + half + 1) % n
            if i != j:
                edges.add((min(i, j), max(i, j)))
    return sorted(edges)


def generate_sw(params: GeneratorParams, rng: np.random.Generator | None = None) -> Graph:
    n, k, p = params.n, params.k_avg, params.p
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"rewiring probability must lie in [0, 1], got {p}")
    if k < 2 or n <= k:
        raise GraphError(f"SW needs n > k >= 2 (n={n}, k={k})")
    if rng is None:
        rng = np.random.default_rng(params.seed)

    lattice = ring_lattice(n, k)
    adj = [set() for _ in range(n)]
    for u, v in lattice:
        adj[u].add(v)
        adj[v].add(u)

    # the far endpoint of lattice edge (i, i+off) is the one replaced
    for u, v in lattice:
        i, j = (u, v) if (v - u) <= n // 2 else (v, u)
        if rng.random() >= p:
            continue
        if len(adj[i]) >= n - 1:
            continue
        while True:
            m = int(rng.integers(n))
            if m != i and m not in adj[i]:
                break
        adj[i].discard(j)
        adj[j].discard(i)
        adj[i].add(m)
        adj[m].add(i)

    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return Graph.from_edges(n, edges, meta={"model": "sw", "E_lattice": len(lattice)})


def generate(params: GeneratorParams) -> Graph:
    rng = np.random.default_rng(params.seed)
    if params.model == "ba":
        return generate_ba(params, rng)
    if params.model == "sw":
        return generate_sw(params, rng)
    raise GraphError(f"unknown generator {params.model!r}")


# ---------------------------------------------------------------------------
# statistics

def local_clustering(g: Graph) -> np.ndarray:
    """Per-node clustering coefficient; nodes of degree < 2 get 0."""
    nbr_sets = [set(a.tolist()) for a in g.adjacency]
    out = np.zeros(g.n)
    for i, a in enumerate(g.adjacency):
        k = len(a)
        if k < 2:
            continue
        links = 0
        for pos, u in enumerate(a):
            nu = nbr_sets[u]
            for w in a[pos + 1:]:
                if w in nu:
                    links += 1
        out[i] = links / (k * (k - 1) / 2)
    return out


def clustering_coefficient(g: Graph) -> float:
    if g.n == 0:
        return 0.0
    return float(local_clustering(g).mean())


def degree_stats(g: Graph) -> DegreeStats:
    deg = g.degrees.astype(np.float64)
    k1 = float(deg.mean())
    k2 = float((deg ** 2).mean())
    denom = k2 - k1
    return DegreeStats(k1, k2, k1 / denom if denom > 0 else None)


def epidemic_threshold(g: Graph) -> float:
    """Mean-field SIR threshold <k> / (<k^2> - <k>)."""
    stats = degree_stats(g)
    if stats.beta_c is None:
        raise GraphError("epidemic threshold undefined: <k^2> <= <k>")
    return stats.beta_c


STATS_HEADER = ["name", "n", "E", "mean_degree", "clustering", "beta_c"]


def stats_row(name: str, g: Graph) -> list:
    ds = degree_stats(g)
    return [name, g.n, g.num_edges, f"{ds.mean_degree:.6g}", f"{clustering_coefficient(g):.6g}",
            "" if ds.beta_c is None else f"{ds.beta_c:.6g}"]
