"""Offline comparators: eager and lazy greedy cover, random selection, exact k*."""

from __future__ import annotations

import heapq
import io
import csv
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .oracle import TOL, CallCounts, UtilityOracle


@dataclass
class GreedyTrace:
    picks: list[int] = field(default_factory=list)
    gains: list[float] = field(default_factory=list)
    utilities: list[float] = field(default_factory=list)
    calls: list[int] = field(default_factory=list)  # cumulative gain calls after each pick
    counts: CallCounts = CallCounts()
    feasible: bool = True

    @property
    def size(self) -> int:
        return len(self.picks)

    @property
    def utility(self) -> float:
        return self.utilities[-1] if self.utilities else 0.0

    def milestone(self, target: float) -> int | None:
        """Number of picks after which the utility first reaches ``target``."""
        if target <= TOL:
            return 0
        for i, u in enumerate(self.utilities):
            if u >= target - TOL:
                return i + 1
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "element", "gain", "utility", "calls"])
        for i, (e, g, u, c) in enumerate(zip(self.picks, self.gains, self.utilities, self.calls), start=1):
            w.writerow([i, e, repr(float(g)), repr(float(u)), c])
        return buf.getvalue()


def _target(Q: float, epsilon: float) -> float:
    if not (0.0 <= epsilon < 1.0):
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    return (1.0 - epsilon) * Q - TOL


def greedy_cover(oracle: UtilityOracle, ground: Sequence[int], Q: float,
                 epsilon: float = 0.0) -> GreedyTrace:
    """Pick the max-gain element (ties: lowest id) until f >= (1 - epsilon) Q.

    If every remaining gain is zero before the target is met, the returned
    trace has ``feasible=False``.
    """
    target = _target(Q, epsilon)
    start = oracle.counter.snapshot()
    trace = GreedyTrace()
    state = oracle.fresh()
    remaining = sorted(set(ground))
    value = 0.0
    while value < target:
        best, best_gain = None, 0.0
        for e in remaining:
            g = oracle.gain(state, e)
            if g > best_gain:
                best, best_gain = e, g
        if best is None:
            trace.feasible = False
            break
        oracle.extend(state, best)
        remaining.remove(best)
        value += best_gain
        trace.picks.append(best)
        trace.gains.append(best_gain)
        trace.utilities.append(value)
        trace.calls.append((oracle.counter.snapshot() - start).gain)
    trace.counts = oracle.counter.snapshot() - start
    return trace


def lazy_greedy_cover(oracle: UtilityOracle, ground: Sequence[int], Q: float,
                      epsilon: float = 0.0) -> GreedyTrace:
    """Greedy with stale upper bounds in a max-heap; same picks as :func:`greedy_cover`."""
    target = _target(Q, epsilon)
    start = oracle.counter.snapshot()
    trace = GreedyTrace()
    if target <= 0:
        return trace
    state = oracle.fresh()
    # heap entries: (-bound, element, round the bound was computed in)
    heap = [(-oracle.gain(state, e), e, 0) for e in sorted(set(ground))]
    heapq.heapify(heap)
    value, rnd = 0.0, 0
    while value < target:
        while heap:
            neg, e, stamp = heap[0]
            if stamp == rnd:
                break
            heapq.heapreplace(heap, (-oracle.gain(state, e), e, rnd))
        if not heap or -heap[0][0] <= 0:
            trace.feasible = False
            break
        neg, best, _ = heapq.heappop(heap)
        oracle.extend(state, best)
        value += -neg
        rnd += 1
        trace.picks.append(best)
        trace.gains.append(-neg)
        trace.utilities.append(value)
        trace.calls.append((oracle.counter.snapshot() - start).gain)
    trace.counts = oracle.counter.snapshot() - start
    return trace


def random_baseline(oracle: UtilityOracle, ground: Sequence[int], target: float,
                    seed: int) -> GreedyTrace:
    """Walk a seeded permutation, keeping every element with positive gain."""
    start = oracle.counter.snapshot()
    trace = GreedyTrace()
    if target <= TOL:
        return trace
    order = np.random.default_rng(seed).permutation(np.asarray(list(ground), dtype=np.int64))
    state = oracle.fresh()
    value = 0.0
    for e in order.tolist():
        g = oracle.gain(state, e)
        if g <= 0:
            continue
        oracle.extend(state, e)
        value += g
        trace.picks.append(e)
        trace.gains.append(g)
        trace.utilities.append(value)
        trace.calls.append((oracle.counter.snapshot() - start).gain)
        if value >= target - TOL:
            break
    else:
        trace.feasible = value >= target - TOL
    trace.counts = oracle.counter.snapshot() - start
    return trace


@dataclass(frozen=True)
class OptResult:
    k_star: int | None
    witness: tuple[int, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.k_star is not None


BRUTE_FORCE_LIMIT = 22


def brute_force_kstar(oracle: UtilityOracle, ground: Sequence[int], Q: float) -> OptResult:
    """Exact minimum cover size by enumerating subsets in order of cardinality.

    Coverage oracles that expose ``bitmasks()`` are searched with integer
    unions; anything else is evaluated through ``oracle.evaluate``.
    """
    ground = sorted(set(ground))
    if len(ground) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} elements, got {len(ground)}")
    target = Q - TOL
    if target <= 0:
        return OptResult(0, ())
    masks = oracle.bitmasks() if hasattr(oracle, "bitmasks") else None
    if masks is not None:
        local = [masks[e] for e in ground]
        full = 0
        for m in local:
            full |= m
        if full.bit_count() < target:
            return OptResult(None)
        for k in range(1, len(ground) + 1):
            for combo in combinations(range(len(ground)), k):
                u = 0
                for i in combo:
                    u |= local[i]
                if u.bit_count() >= target:
                    return OptResult(k, tuple(ground[i] for i in combo))
        return OptResult(None)
    if oracle.evaluate(ground) < target:
        return OptResult(None)
    for k in range(1, len(ground) + 1):
        for combo in combinations(ground, k):
            if oracle.evaluate(combo) >= target:
                return OptResult(k, combo)
    return OptResult(None)
