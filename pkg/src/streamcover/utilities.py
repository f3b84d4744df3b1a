"""Concrete monotone submodular utilities.

Coverage-style oracles (dominating set, vertex cover, explicit set systems)
keep a boolean covered-vector per solution. The log-det utility keeps a
growing lower-triangular Cholesky factor of ``I + K_SS / sigma**2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Protocol, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .oracle import (
    CoverInstance,
    InputFormatError,
    OracleError,
    UtilityOracle,
    _parse_ints,
    iter_cover_lines,
)


class NeighborSource(Protocol):
    n: int

    def neighbors(self, v: int) -> np.ndarray: ...


# --------------------------------------------------------------------------
# graphs
# --------------------------------------------------------------------------


class Graph:
    """Undirected simple graph in CSR form.

    Directed input is symmetrized, self-loops and repeated edges dropped.
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = n
        self.indptr = indptr
        self.indices = indices

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n: int | None = None) -> "Graph":
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and arr.min() < 0:
            raise ValueError("negative vertex id")
        top = int(arr.max()) + 1 if arr.size else 0
        if n is None:
            n = top
        elif top > n:
            raise ValueError(f"vertex id {top - 1} >= n={n}")
        arr = arr[arr[:, 0] != arr[:, 1]]
        both = np.concatenate([arr, arr[:, ::-1]])
        if both.size:
            both = np.unique(both, axis=0)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, both[:, 0] + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, both[:, 1].copy())

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for v in range(self.n):
            for u in self.neighbors(v):
                if v < u:
                    yield v, int(u)


def read_edge_list(lines: Iterable[str], path: str | None = None) -> Iterator[tuple[int, int]]:
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        nums = _parse_ints(body, path, lineno)
        if len(nums) != 2:
            raise InputFormatError("expected 'u v'", path, lineno)
        yield nums[0], nums[1]


def load_edge_list(path: str | Path, n: int | None = None) -> Graph:
    with open(path) as fh:
        return Graph.from_edges(read_edge_list(fh, str(path)), n)


class AdjacencyStream:
    """One-pass reader for adjacency streams.

    File layout: header ``n m`` (vertex and edge counts), then one line per
    vertex ``v u1 u2 ...``. Only the neighbor list of the item currently being
    streamed is held in memory, so oracles built on this source can evaluate
    gains for the current vertex only. Lists are assumed symmetric already.
    """

    def __init__(self, lines: Iterable[str], path: str | None = None):
        self._lines = iter(enumerate(lines, start=1))
        self.path = path
        self.n, self.num_edges = self._header()
        self._current: int | None = None
        self._nbrs = np.empty(0, dtype=np.int64)

    def _header(self) -> tuple[int, int]:
        for lineno, raw in self._lines:
            body = raw.split("#", 1)[0]
            if body.strip():
                nums = _parse_ints(body, self.path, lineno)
                if len(nums) != 2:
                    raise InputFormatError("header must be 'n m'", self.path, lineno)
                return nums[0], nums[1]
        raise InputFormatError("missing 'n m' header", self.path)

    def __iter__(self) -> Iterator[int]:
        for lineno, raw in self._lines:
            body = raw.split("#", 1)[0]
            if not body.strip():
                continue
            nums = _parse_ints(body, self.path, lineno)
            v, nbrs = nums[0], np.asarray(nums[1:], dtype=np.int64)
            if v >= self.n or (nbrs.size and nbrs.max() >= self.n):
                raise InputFormatError(f"vertex id >= n={self.n}", self.path, lineno)
            nbrs = np.unique(nbrs[nbrs != v])
            self._current, self._nbrs = v, nbrs
            yield v

    def neighbors(self, v: int) -> np.ndarray:
        if v != self._current:
            raise OracleError(f"vertex {v} is not the current stream item")
        return self._nbrs


class SetStream:
    """One-pass reader over the cover-instance text format."""

    def __init__(self, lines: Iterable[str], path: str | None = None):
        self._it = iter_cover_lines(lines, path)
        self.n, self.m = next(self._it)
        self._current: int | None = None
        self._members = np.empty(0, dtype=np.int64)

    def __iter__(self) -> Iterator[int]:
        for i, (_, members, _) in enumerate(self._it):
            self._current = i
            self._members = np.unique(np.asarray(members, dtype=np.int64))
            yield i

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> np.ndarray:
        if i != self._current:
            raise OracleError(f"set {i} is not the current stream item")
        return self._members


# --------------------------------------------------------------------------
# coverage oracles
# --------------------------------------------------------------------------


@dataclass
class CoverageState:
    covered: np.ndarray
    count: int = 0
    selected: list[int] = field(default_factory=list)


class _CoverageOracle(UtilityOracle):
    """f(S) = |union of items(e) for e in S| over a universe of ``universe`` items."""

    def __init__(self, size: int, universe: int):
        super().__init__(size)
        self.universe = universe

    def items(self, e: int) -> np.ndarray:
        raise NotImplementedError

    def _fresh(self) -> CoverageState:
        return CoverageState(np.zeros(self.universe, dtype=bool))

    def _value(self, state: CoverageState) -> float:
        return state.count

    def _gain(self, state: CoverageState, e: int) -> int:
        items = self.items(e)
        return int(items.size - np.count_nonzero(state.covered[items]))

    def _extend(self, state: CoverageState, e: int) -> None:
        items = self.items(e)
        state.count += int(items.size - np.count_nonzero(state.covered[items]))
        state.covered[items] = True
        state.selected.append(e)

    def copy(self, state: CoverageState) -> CoverageState:
        return CoverageState(state.covered.copy(), state.count, list(state.selected))

    def state_bytes(self, state: CoverageState) -> int:
        return (self.universe + 7) // 8

    def evaluate(self, elements: Iterable[int]) -> float:
        covered: set[int] = set()
        for e in elements:
            self.check_element(e)
            covered.update(int(x) for x in self.items(e))
        return len(covered)

    def bitmasks(self) -> list[int]:
        """Covered items of every element as Python int bitmasks."""
        masks = []
        for e in range(self.size):
            m = 0
            for x in self.items(e):
                m |= 1 << int(x)
            masks.append(m)
        return masks


class DominatingSetOracle(_CoverageOracle):
    """Number of vertices in S or adjacent to S."""

    def __init__(self, graph: NeighborSource):
        super().__init__(graph.n, graph.n)
        self.graph = graph

    def items(self, v: int) -> np.ndarray:
        return np.append(self.graph.neighbors(v), v)


class SetCoverOracle(_CoverageOracle):
    """Ground elements are set ids; value is the size of the union."""

    def __init__(self, instance: CoverInstance | SetStream):
        if isinstance(instance, CoverInstance):
            family = [np.unique(np.asarray(s, dtype=np.int64)) for s in instance.sets]
            size = instance.m
        else:
            family, size = instance, instance.m
        super().__init__(size, instance.n)
        self.family = family

    def items(self, i: int) -> np.ndarray:
        return self.family[i]


@dataclass
class VertexCoverState:
    selected_mask: np.ndarray
    count: int = 0
    selected: list[int] = field(default_factory=list)


class VertexCoverOracle(UtilityOracle):
    """Number of edges with at least one endpoint in S."""

    def __init__(self, graph: NeighborSource):
        super().__init__(graph.n)
        self.graph = graph

    def _fresh(self) -> VertexCoverState:
        return VertexCoverState(np.zeros(self.graph.n, dtype=bool))

    def _value(self, state: VertexCoverState) -> float:
        return state.count

    def _gain(self, state: VertexCoverState, v: int) -> int:
        if state.selected_mask[v]:
            return 0
        nbrs = self.graph.neighbors(v)
        # edges towards already-selected vertices are counted
        return int(nbrs.size - np.count_nonzero(state.selected_mask[nbrs]))

    def _extend(self, state: VertexCoverState, v: int) -> None:
        state.count += self._gain(state, v)
        state.selected_mask[v] = True
        state.selected.append(v)

    def copy(self, state: VertexCoverState) -> VertexCoverState:
        return VertexCoverState(state.selected_mask.copy(), state.count, list(state.selected))

    def state_bytes(self, state: VertexCoverState) -> int:
        return (self.graph.n + 7) // 8

    def evaluate(self, elements: Iterable[int]) -> float:
        edges: set[tuple[int, int]] = set()
        for v in elements:
            self.check_element(v)
            for u in self.graph.neighbors(v):
                edges.add((min(v, int(u)), max(v, int(u))))
        return len(edges)

    def bitmasks(self) -> list[int]:
        edge_id: dict[tuple[int, int], int] = {}
        masks = []
        for v in range(self.graph.n):
            m = 0
            for u in self.graph.neighbors(v):
                key = (min(v, int(u)), max(v, int(u)))
                m |= 1 << edge_id.setdefault(key, len(edge_id))
            masks.append(m)
        return masks


def domset_oracle(graph: NeighborSource) -> DominatingSetOracle:
    return DominatingSetOracle(graph)


def vcover_oracle(graph: NeighborSource) -> VertexCoverOracle:
    return VertexCoverOracle(graph)


def setcover_oracle(instance: CoverInstance | SetStream) -> SetCoverOracle:
    return SetCoverOracle(instance)


# --------------------------------------------------------------------------
# log-det active-set utility
# --------------------------------------------------------------------------


def gaussian_kernel(x, y, h: float) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    d = x - y
    return math.exp(-float(d @ d) / (2.0 * h * h))


@dataclass
class KernelConfig:
    points: np.ndarray
    sigma: float = 1.0
    h: float = 1.0

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.sigma <= 0 or self.h <= 0:
            raise ValueError("sigma and h must be positive")
        if not np.all(np.isfinite(self.points)):
            raise OracleError("non-finite point coordinates")

    def kernel_rows(self, rows: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Gaussian kernel between every row of ``rows`` and ``x``."""
        d2 = np.sum((rows - x) ** 2, axis=1)
        return np.exp(-d2 / (2.0 * self.h * self.h))


@dataclass
class CholeskyState:
    selected: list[int] = field(default_factory=list)
    factor: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    coords: np.ndarray | None = None
    log_det_half: float = 0.0

    @property
    def k(self) -> int:
        return len(self.selected)

    def lower(self) -> np.ndarray:
        return self.factor[:self.k, :self.k]


class LogDetOracle(UtilityOracle):
    """f(S) = 1/2 log det(I + K_SS / sigma^2) with natural log.

    Kernel entries are computed on demand from the stored points. The gain of a
    candidate is the log of the pivot that a rank-one extension of the
    Cholesky factor would produce.
    """

    def __init__(self, config: KernelConfig):
        super().__init__(len(config.points))
        self.config = config
        self.inv_s2 = 1.0 / (config.sigma ** 2)

    def _fresh(self) -> CholeskyState:
        d = self.config.points.shape[1]
        return CholeskyState(coords=np.zeros((0, d)))

    def _value(self, state: CholeskyState) -> float:
        return state.log_det_half

    def _column(self, state: CholeskyState, e: int) -> tuple[np.ndarray, float]:
        x = self.config.points[e]
        kvec = self.config.kernel_rows(state.coords[:state.k], x) * self.inv_s2
        if not np.all(np.isfinite(kvec)):
            raise OracleError(f"non-finite kernel entries for element {e}")
        if state.k:
            c = solve_triangular(state.lower(), kvec, lower=True, check_finite=False)
        else:
            c = kvec
        pivot_sq = 1.0 + self.inv_s2 - float(c @ c)
        if not (pivot_sq > 0 and math.isfinite(pivot_sq)):
            raise OracleError(
                f"non-positive Cholesky pivot {pivot_sq!r} adding element {e}; "
                "I + K/sigma^2 should be positive definite, check the kernel")
        return c, pivot_sq

    def _gain(self, state: CholeskyState, e: int) -> float:
        if e in state.selected:
            return 0.0
        _, pivot_sq = self._column(state, e)
        return 0.5 * math.log(pivot_sq)

    def _extend(self, state: CholeskyState, e: int) -> None:
        if e in state.selected:
            return
        c, pivot_sq = self._column(state, e)
        k = state.k
        if k + 1 > state.factor.shape[0]:
            cap = max(4, 2 * state.factor.shape[0])
            grown = np.zeros((cap, cap))
            grown[:k, :k] = state.lower()
            coords = np.zeros((cap, state.coords.shape[1]))
            coords[:k] = state.coords[:k]
            state.factor, state.coords = grown, coords
        pivot = math.sqrt(pivot_sq)
        state.factor[k, :k] = c
        state.factor[k, k] = pivot
        state.coords[k] = self.config.points[e]
        state.selected.append(e)
        state.log_det_half += math.log(pivot)

    def copy(self, state: CholeskyState) -> CholeskyState:
        return CholeskyState(list(state.selected), state.factor.copy(),
                             state.coords.copy(), state.log_det_half)

    def state_bytes(self, state: CholeskyState) -> int:
        k = state.k
        return 8 * (k * (k + 1) // 2 + k * self.config.points.shape[1])

    def evaluate(self, elements: Iterable[int]) -> float:
        return logdet_reference(self.config, list(elements))


def logdet_oracle(config: KernelConfig) -> LogDetOracle:
    return LogDetOracle(config)


def logdet_reference(config: KernelConfig, S: Sequence[int]) -> float:
    """Fresh dense factorization of I + K_SS / sigma^2; returns half its log-det."""
    ids = list(dict.fromkeys(int(e) for e in S))
    if not ids:
        return 0.0
    if len(ids) > 2000:
        raise ValueError("reference factorization limited to 2000 elements")
    n = len(config.points)
    for e in ids:
        if not (0 <= e < n):
            raise OracleError(f"element out of universe: {e} (size {n})")
    X = config.points[ids]
    sq = np.sum(X * X, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    K = np.exp(-d2 / (2.0 * config.h ** 2))
    if not np.all(np.isfinite(K)):
        raise OracleError("non-finite kernel entries")
    A = np.eye(len(ids)) + K / config.sigma ** 2
    L = np.linalg.cholesky(A)
    return float(np.sum(np.log(np.diag(L))))


def load_points(path: str | Path) -> np.ndarray:
    """CSV point set: one row per point, numeric columns, optional header row."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise InputFormatError(f"non-numeric value in {row!r}", str(path), lineno) from None
            if len(rows[-1]) != len(rows[0]):
                raise InputFormatError("inconsistent column count", str(path), lineno)
    if not rows:
        raise InputFormatError("no points", str(path))
    return np.asarray(rows)


def median_pairwise_distance(points: np.ndarray) -> float:
    X = np.asarray(points, dtype=float)
    sq = np.sum(X * X, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * X @ X.T, 0.0)
    iu = np.triu_indices(len(X), k=1)
    return float(np.median(np.sqrt(d2[iu])))
