"""Utility-oracle contract, call accounting and set-system instances.

Every oracle evaluates a normalized monotone submodular function over integer
element ids. Oracles are stateless apart from their call counter; solutions are
represented by explicit per-solution state objects obtained from
:meth:`UtilityOracle.fresh` and grown with :meth:`UtilityOracle.extend`.
"""

from __future__ import annotations

import abc
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

TOL = 1e-9


class OracleError(ValueError):
    pass


class InputFormatError(ValueError):
    """Malformed input file. Carries the offending 1-based line number."""

    def __init__(self, message: str, path: str | None = None, lineno: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class CallCounts:
    gain: int = 0
    value: int = 0
    extend: int = 0

    def __sub__(self, other: "CallCounts") -> "CallCounts":
        return CallCounts(self.gain - other.gain, self.value - other.value,
                          self.extend - other.extend)

    @property
    def total(self) -> int:
        return self.gain + self.value


class CallCounter:
    """Monotone oracle-call counters, safe under concurrent increment."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.gain = 0
        self.value = 0
        self.extend = 0

    def bump(self, kind: str, n: int = 1) -> None:
        with self._lock:
            setattr(self, kind, getattr(self, kind) + n)

    def snapshot(self) -> CallCounts:
        with self._lock:
            return CallCounts(self.gain, self.value, self.extend)

    def __repr__(self) -> str:
        return f"CallCounter(gain={self.gain}, value={self.value}, extend={self.extend})"


class UtilityOracle(abc.ABC):
    """Counted access to a normalized monotone submodular function.

    Subclasses implement the underscore methods; the public methods validate
    element ids and do the accounting. ``size`` is the number of ground
    elements (valid ids are ``0..size-1``).
    """

    def __init__(self, size: int) -> None:
        self.size = size
        self.counter = CallCounter()

    def check_element(self, e: int) -> None:
        if not (0 <= e < self.size):
            raise OracleError(f"element out of universe: {e} (size {self.size})")

    def fresh(self) -> Any:
        return self._fresh()

    def value(self, state: Any) -> float:
        self.counter.bump("value")
        return self._value(state)

    def gain(self, state: Any, e: int) -> float:
        self.check_element(e)
        self.counter.bump("gain")
        return self._gain(state, e)

    def extend(self, state: Any, e: int) -> Any:
        """Add ``e`` to ``state`` in place and return it."""
        self.check_element(e)
        self.counter.bump("extend")
        self._extend(state, e)
        return state

    def state_of(self, elements: Iterable[int]) -> Any:
        """Build a state by extending a fresh one (extend calls are counted)."""
        state = self.fresh()
        for e in elements:
            self.extend(state, e)
        return state

    def state_bytes(self, state: Any) -> int:
        return 0

    @abc.abstractmethod
    def _fresh(self) -> Any: ...

    @abc.abstractmethod
    def _value(self, state: Any) -> float: ...

    @abc.abstractmethod
    def _gain(self, state: Any, e: int) -> float: ...

    @abc.abstractmethod
    def _extend(self, state: Any, e: int) -> None: ...

    @abc.abstractmethod
    def copy(self, state: Any) -> Any: ...

    @abc.abstractmethod
    def evaluate(self, elements: Iterable[int]) -> float:
        """Recompute f(elements) from scratch. Uncounted; used for cross-checks."""


def marginal_gain(oracle: UtilityOracle, state: Any, e: int) -> float:
    return oracle.gain(state, e)


@dataclass
class SubmodularityReport:
    trials: int
    violations: int = 0
    worst_gap: float = 0.0
    examples: list[tuple] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_submodular_monotone(oracle: UtilityOracle, universe: Sequence[int],
                              trials: int, seed: int = 0,
                              tol: float = TOL) -> SubmodularityReport:
    """Sample chains S ⊆ T and e ∉ T and look for broken inequalities.

    A trial is a violation if either gain is negative, if gain at S is smaller
    than gain at T, or if the reported gain disagrees with the value difference
    after extending. ``worst_gap`` is the largest amount by which any of those
    inequalities failed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    universe = list(universe)
    if not universe:
        return SubmodularityReport(trials=0)
    rng = random.Random(seed)
    report = SubmodularityReport(trials=trials)
    for _ in range(trials):
        e = rng.choice(universe)
        rest = [x for x in universe if x != e]
        t_size = rng.randint(0, len(rest))
        T = rng.sample(rest, t_size)
        s_size = rng.randint(0, t_size)
        S, extra = T[:s_size], T[s_size:]

        s_state = oracle.state_of(S)
        t_state = oracle.copy(s_state)
        for x in extra:
            oracle.extend(t_state, x)
        g_s = oracle.gain(s_state, e)
        g_t = oracle.gain(t_state, e)
        before = oracle.value(t_state)
        after = oracle.value(oracle.extend(oracle.copy(t_state), e))

        gap = max(-g_s, -g_t, g_t - g_s, abs((after - before) - g_t))
        if gap > tol:
            report.violations += 1
            if len(report.examples) < 5:
                report.examples.append((tuple(S), tuple(extra), e, g_s, g_t))
        report.worst_gap = max(report.worst_gap, gap)
    return report


@dataclass
class CoverInstance:
    """Explicit set system; the family order is the stream order."""

    n: int
    sets: list[list[int]]
    labels: list[str] | None = None

    def __post_init__(self) -> None:
        for i, s in enumerate(self.sets):
            for x in s:
                if not (0 <= x < self.n):
                    raise ValueError(f"set {i} contains element {x} outside universe of size {self.n}")
        if self.labels is not None and len(self.labels) != len(self.sets):
            raise ValueError("labels must match sets")

    @property
    def m(self) -> int:
        return len(self.sets)

    def union_size(self, ids: Iterable[int]) -> int:
        covered: set[int] = set()
        for i in ids:
            covered.update(self.sets[i])
        return len(covered)

    def dumps(self) -> str:
        lines = [f"{self.n} {self.m}"]
        for i, s in enumerate(self.sets):
            line = " ".join(map(str, s))
            if self.labels is not None and self.labels[i]:
                line = f"{line}  # {self.labels[i]}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())


def _parse_ints(text: str, path: str | None, lineno: int) -> list[int]:
    try:
        values = [int(tok) for tok in text.split()]
    except ValueError:
        raise InputFormatError(f"expected integers, got {text.strip()!r}", path, lineno) from None
    if any(v < 0 for v in values):
        raise InputFormatError("negative id", path, lineno)
    return values


def iter_cover_lines(lines: Iterable[str], path: str | None = None):
    """Yield ``(n, m)`` once, then ``(lineno, members, label)`` per set.

    Lines whose first non-blank character is ``#`` are comments; ``# text``
    after set members is kept as the set label.
    """
    header = None
    count = 0
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if stripped.startswith("#"):
            continue
        body, _, label = raw.partition("#")
        if header is None:
            if not stripped:
                continue
            nums = _parse_ints(body, path, lineno)
            if len(nums) != 2:
                raise InputFormatError("header must be 'n m'", path, lineno)
            header = (nums[0], nums[1])
            yield header
            continue
        if count == header[1]:
            if stripped:
                raise InputFormatError(f"more than m={header[1]} sets", path, lineno)
            continue
        members = _parse_ints(body, path, lineno)
        for x in members:
            if x >= header[0]:
                raise InputFormatError(f"element {x} outside universe of size {header[0]}", path, lineno)
        count += 1
        yield lineno, members, label.strip()
    if header is None:
        raise InputFormatError("missing 'n m' header", path)
    if count < header[1]:
        raise InputFormatError(f"expected {header[1]} sets, found {count}", path)


def parse_cover_instance(text: str, path: str | None = None) -> CoverInstance:
    it = iter_cover_lines(text.splitlines(), path)
    n, _ = next(it)
    sets, labels = [], []
    for _, members, label in it:
        sets.append(members)
        labels.append(label)
    return CoverInstance(n, sets, labels if any(labels) else None)


def load_cover_instance(path: str | Path) -> CoverInstance:
    return parse_cover_instance(Path(path).read_text(), str(path))
