"""Discrete-time spreading simulators (SIR, SI, linear threshold) and cascade containers."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Graph

MODELS = ("sir", "si", "ltm")


@dataclass(frozen=True)
class SpreadParams:
    model: str = "sir"
    beta: float | None = None
    mu: float | None = None
    f: float = 0.5
    theta: float | None = None
    max_steps: int | None = None

    def __post_init__(self):
        model = self.model.lower()
        object.__setattr__(self, "model", model)
        if model not in MODELS:
            raise ValueError(f"unknown spreading model {self.model!r}")
        if not 0.0 < self.f <= 1.0:
            raise ValueError(f"initiator probability f must lie in (0, 1], got {self.f}")
        if model in ("sir", "si"):
            if self.beta is None:
                raise ValueError(f"{model.upper()} requires beta")
            if not 0.0 <= self.beta <= 1.0:
                raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
            if self.theta is not None:
                raise ValueError("theta only applies to the LTM")
        else:
            if self.theta is None or not 0.0 < self.theta <= 1.0:
                raise ValueError(f"LTM requires theta in (0, 1], got {self.theta}")
            if self.beta is not None:
                raise ValueError("beta does not apply to the LTM")
        if model == "sir":
            mu = 1.0 if self.mu is None else self.mu
            if not 0.0 <= mu <= 1.0:
                raise ValueError(f"mu must lie in [0, 1], got {mu}")
            object.__setattr__(self, "mu", float(mu))
        elif model == "si":
            if self.mu not in (None, 0, 0.0):
                raise ValueError("SI has no recovery (mu = 0)")
            object.__setattr__(self, "mu", 0.0)
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def step_cap(self, n: int) -> int:
        return self.max_steps if self.max_steps is not None else max(4 * n, 1)


@dataclass(frozen=True)
class Cascade:
    """One realization: infected nodes and their infection times, sorted by (time, node)."""

    item_id: int
    nodes: np.ndarray
    times: np.ndarray

    def __len__(self):
        return len(self.nodes)


class CascadeSet:
    """Infection times of ``m`` items over ``n`` nodes.

    ``times[i, a]`` is node ``i``'s infection time for item ``a``, or -1 when
    the node never adopted it (so the incidence matrix is ``times >= 0``).
    """

    def __init__(self, times: np.ndarray):
        times = np.array(times, dtype=np.int64)
        if times.ndim != 2:
            raise ValueError("times must be an (n, m) matrix")
        if (times < -1).any():
            raise ValueError("infection times must be >= 0 (or -1 for absent)")
        self.times = times
        self.times.setflags(write=False)

    @classmethod
    def from_cascades(cls, n: int, cascades: Iterable[Cascade]) -> "CascadeSet":
        cascades = list(cascades)
        times = np.full((n, len(cascades)), -1, dtype=np.int64)
        for a, c in enumerate(cascades):
            times[c.nodes, a] = c.times
        return cls(times)

    @classmethod
    def from_records(cls, n: int, m: int, records: Iterable[tuple[int, int, int]]) -> "CascadeSet":
        times = np.full((n, m), -1, dtype=np.int64)
        for node, item, t in records:
            if times[node, item] != -1:
                raise ValueError(f"node {node} recorded twice for item {item}")
            if t < 0:
                raise ValueError(f"negative time for node {node}, item {item}")
            times[node, item] = t
        return cls(times)

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def m(self) -> int:
        return self.times.shape[1]

    @property
    def incidence(self) -> np.ndarray:
        return self.times >= 0

    def adoption_counts(self) -> np.ndarray:
        return self.incidence.sum(axis=1)

    def adopters(self, item: int) -> tuple[np.ndarray, np.ndarray]:
        col = self.times[:, item]
        nodes = np.flatnonzero(col >= 0)
        return nodes, col[nodes]

    def cascade(self, item: int) -> Cascade:
        nodes, t = self.adopters(item)
        order = np.lexsort((nodes, t))
        return Cascade(item, nodes[order], t[order])

    def records(self):
        """Yield ``(node, item, time)`` ordered by item, time, node."""
        for a in range(self.m):
            c = self.cascade(a)
            for node, t in zip(c.nodes.tolist(), c.times.tolist()):
                yield node, a, t

    def __eq__(self, other):
        return isinstance(other, CascadeSet) and np.array_equal(self.times, other.times)


# ---------------------------------------------------------------------------
# simulators

def draw_initiators(n: int, f: float, rng: np.random.Generator) -> np.ndarray:
    return np.flatnonzero(rng.random(n) < f)


def _gather_neighbors(indptr, indices, nodes):
    counts = indptr[nodes + 1] - indptr[nodes]
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.repeat(indptr[nodes] - (np.cumsum(counts) - counts), counts)
    return indices[starts + np.arange(total)]


def _epidemic(g: Graph, beta: float, mu: float, initiators: np.ndarray,
              rng: np.random.Generator, max_steps: int) -> np.ndarray:
    indptr, indices = g.csr()
    time = np.full(g.n, -1, dtype=np.int64)
    time[initiators] = 0
    infected = np.asarray(initiators, dtype=np.int64)
    t = 0
    while infected.size and t < max_steps:
        targets = _gather_neighbors(indptr, indices, infected)
        targets = targets[time[targets] < 0]
        if targets.size == 0 and mu == 0.0:
            break
        if beta < 1.0:
            targets = targets[rng.random(targets.size) < beta]
        new = np.unique(targets)
        time[new] = t + 1
        if mu >= 1.0:
            staying = infected[:0]
        elif mu <= 0.0:
            staying = infected
        else:
            staying = infected[rng.random(infected.size) >= mu]
        infected = np.concatenate([staying, new])
        t += 1
    return time


def _to_cascade(time: np.ndarray, item_id: int) -> Cascade:
    nodes = np.flatnonzero(time >= 0)
    t = time[nodes]
    order = np.lexsort((nodes, t))
    return Cascade(item_id, nodes[order], t[order])


def simulate_sir(g: Graph, params: SpreadParams, rng: np.random.Generator, item_id: int = 0) -> Cascade:
    """SIR with synchronous generations.

    Infections attempted from the state at step ``t`` land at ``t + 1``; each
    infectious node then recovers with probability ``mu`` (``mu = 1`` keeps a
    node infectious for exactly one step).
    """
    initiators = draw_initiators(g.n, params.f, rng)
    time = _epidemic(g, params.beta, params.mu, initiators, rng, params.step_cap(g.n))
    return _to_cascade(time, item_id)


def simulate_si(g: Graph, params: SpreadParams, rng: np.random.Generator, item_id: int = 0) -> Cascade:
    """SI: as SIR without recovery; stops once no susceptible node borders an infected one."""
    initiators = draw_initiators(g.n, params.f, rng)
    time = _epidemic(g, params.beta, 0.0, initiators, rng, params.step_cap(g.n))
    return _to_cascade(time, item_id)


def simulate_ltm(g: Graph, params: SpreadParams, rng: np.random.Generator, item_id: int = 0) -> Cascade:
    """Linear threshold model with in-edge weights ``1/deg(i)``.

    An inactive node activates at ``t + 1`` when the active fraction of its
    neighbours at ``t`` reaches ``theta``. Only the initiator draw is random.
    """
    initiators = draw_initiators(g.n, params.f, rng)
    indptr, indices = g.csr()
    deg = np.diff(indptr)
    time = np.full(g.n, -1, dtype=np.int64)
    time[initiators] = 0
    active_nbrs = np.zeros(g.n, dtype=np.int64)
    fresh = initiators
    cap = params.step_cap(g.n)
    t = 0
    while fresh.size and t < cap:
        np.add.at(active_nbrs, _gather_neighbors(indptr, indices, fresh), 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(deg > 0, active_nbrs / np.maximum(deg, 1), 0.0)
        fresh = np.flatnonzero((time < 0) & (deg > 0) & (frac >= params.theta))
        time[fresh] = t + 1
        t += 1
    return _to_cascade(time, item_id)


_SIMULATORS = {"sir": simulate_sir, "si": simulate_si, "ltm": simulate_ltm}


def simulate(g: Graph, params: SpreadParams, rng: np.random.Generator, item_id: int = 0) -> Cascade:
    return _SIMULATORS[params.model](g, params, rng, item_id)


def cascade_rng(seed: int, item: int) -> np.random.Generator:
    """Independent stream for cascade ``item`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(item,)))


def run_cascades(g: Graph, params: SpreadParams, m: int, seed: int) -> CascadeSet:
    if m < 1:
        raise ValueError("need at least one cascade")
    cascades = [simulate(g, params, cascade_rng(seed, a), a) for a in range(m)]
    return CascadeSet.from_cascades(g.n, cascades)


# ---------------------------------------------------------------------------
# cascade log CSV (node,item,time)

CASCADE_HEADER = ["node", "item", "time"]


def write_cascades(cs: CascadeSet, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CASCADE_HEADER)
    w.writerows(cs.records())


def read_cascades(fh, n: int | None = None, m: int | None = None) -> CascadeSet:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != CASCADE_HEADER:
        raise ValueError(f"cascade log must start with header {','.join(CASCADE_HEADER)}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected node,item,time")
        try:
            records.append(tuple(int(x) for x in row))
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer field in {row}") from None
    max_node = max((r[0] for r in records), default=-1)
    max_item = max((r[1] for r in records), default=-1)
    n = max_node + 1 if n is None else n
    m = max_item + 1 if m is None else m
    if max_node >= n or max_item >= m:
        raise ValueError("cascade log references nodes or items beyond the declared size")
    return CascadeSet.from_records(n, m, records)
