"""One-pass threshold sieve for partial submodular cover.

Level ``j`` admits an element when its marginal gain against the level's
current solution is at least ``Q / alpha**j`` and the level holds fewer than
``ceil(alpha**j)`` elements. After the pass, any number of partial-cover
queries are answered from cached level utilities without touching the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .oracle import TOL, CallCounts, InputFormatError, UtilityOracle


def level_capacity(alpha: float, j: int) -> int:
    # guard against alpha**j landing a hair above an integer
    return math.ceil(alpha ** j - 1e-12)


def level_count(memory: int, alpha: float) -> int:
    """Largest L with sum_{j<L} ceil(alpha**j) <= memory."""
    total, L = 0, 0
    while total + level_capacity(alpha, L) <= memory:
        total += level_capacity(alpha, L)
        L += 1
    return L


@dataclass(frozen=True)
class SieveConfig:
    memory: int
    alpha: float
    Q: float

    def __post_init__(self) -> None:
        if self.memory < 1:
            raise ValueError(f"memory budget M must be >= 1, got {self.memory}")
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not self.Q > 0:
            raise ValueError(f"Q must be positive, got {self.Q}")


@dataclass
class Level:
    index: int
    threshold: float
    capacity: int
    state: Any
    members: list[int] = field(default_factory=list)
    utility: float = 0.0

    @property
    def full(self) -> bool:
        return len(self.members) >= self.capacity


@dataclass(frozen=True)
class QueryResult:
    found: bool
    level: int | None = None
    members: tuple[int, ...] = ()
    utility: float = float("nan")

    @property
    def size(self) -> int | None:
        return len(self.members) if self.found else None

    def __str__(self) -> str:
        if not self.found:
            return "Assumption Violated"
        return f"Found(level={self.level}, size={len(self.members)}, utility={self.utility:.6g})"


ASSUMPTION_VIOLATED = QueryResult(found=False)


@dataclass(frozen=True)
class Footprint:
    stored: int
    capacity_sum: int
    levels: int
    state_bytes: int

    @property
    def estimated_bytes(self) -> int:
        return 8 * self.stored + self.state_bytes


class Sieve:
    """Representative sets ``S_0..S_t`` maintained over a single stream pass."""

    def __init__(self, config: SieveConfig, oracle: UtilityOracle):
        self.config = config
        self.oracle = oracle
        L = level_count(config.memory, config.alpha)
        self.levels = [
            Level(j, config.Q / config.alpha ** j, level_capacity(config.alpha, j), oracle.fresh())
            for j in range(L)
        ]
        self.seen = 0
        self._start = oracle.counter.snapshot()

    @property
    def t(self) -> int:
        return len(self.levels) - 1

    @property
    def calls(self) -> CallCounts:
        """Oracle calls made since this sieve was created."""
        return self.oracle.counter.snapshot() - self._start

    def ingest(self, e: int) -> None:
        # full levels never accept, so they cost no oracle call
        for level in self.levels:
            if level.full:
                continue
            g = self.oracle.gain(level.state, e)
            if g >= level.threshold:
                self.oracle.extend(level.state, e)
                level.members.append(e)
                level.utility += g
        self.seen += 1

    def run(self, stream: Iterable[int]) -> "Sieve":
        for e in stream:
            self.ingest(e)
        return self

    def _hit(self, level: Level, target: float) -> bool:
        return level.utility >= target - TOL

    def query(self, epsilon_tilde: float, search: str = "linear") -> QueryResult:
        """Lowest level whose utility reaches ``(1 - epsilon_tilde) * Q``.

        ``search="binary"`` bisects instead of scanning; it is only correct
        when the predicate is monotone in the level index, which is not
        guaranteed in general.
        """
        if not (0.0 < epsilon_tilde < 1.0):
            raise ValueError(f"epsilon_tilde must lie in (0, 1), got {epsilon_tilde}")
        target = (1.0 - epsilon_tilde) * self.config.Q
        if search == "linear":
            for level in self.levels:
                if self._hit(level, target):
                    return self._found(level)
            return ASSUMPTION_VIOLATED
        if search == "binary":
            lo, hi = 0, len(self.levels)
            while lo < hi:
                mid = (lo + hi) // 2
                if self._hit(self.levels[mid], target):
                    hi = mid
                else:
                    lo = mid + 1
            if lo < len(self.levels):
                return self._found(self.levels[lo])
            return ASSUMPTION_VIOLATED
        raise ValueError(f"unknown search mode {search!r}")

    @staticmethod
    def _found(level: Level) -> QueryResult:
        return QueryResult(True, level.index, tuple(level.members), level.utility)

    def footprint(self) -> Footprint:
        return Footprint(
            stored=sum(len(lv.members) for lv in self.levels),
            capacity_sum=sum(lv.capacity for lv in self.levels),
            levels=len(self.levels),
            state_bytes=sum(self.oracle.state_bytes(lv.state) for lv in self.levels),
        )

    # snapshot format: header "ESC1 M alpha Q L", then one line per level
    # "j threshold capacity size id1 id2 ..."
    def dumps(self) -> str:
        c = self.config
        lines = [f"ESC1 {c.memory} {c.alpha!r} {c.Q!r} {len(self.levels)}"]
        for lv in self.levels:
            ids = " ".join(map(str, lv.members))
            lines.append(f"{lv.index} {lv.threshold!r} {lv.capacity} {len(lv.members)} {ids}".rstrip())
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str, oracle: UtilityOracle, path: str | None = None) -> "Sieve":
        """Rebuild a sieve from a snapshot; cached utilities are re-derived with ``oracle``."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise InputFormatError("empty snapshot", path)
        head = lines[0].split()
        if len(head) != 5 or head[0] != "ESC1":
            raise InputFormatError("snapshot header must be 'ESC1 M alpha Q L'", path, 1)
        try:
            config = SieveConfig(int(head[1]), float(head[2]), float(head[3]))
            L = int(head[4])
        except ValueError as exc:
            raise InputFormatError(str(exc), path, 1) from None
        sieve = cls(config, oracle)
        if L != len(sieve.levels) or len(lines) - 1 != L:
            raise InputFormatError(f"snapshot level count {L} inconsistent with config", path, 1)
        for lineno, (raw, level) in enumerate(zip(lines[1:], sieve.levels), start=2):
            tok = raw.split()
            try:
                j, cap, size = int(tok[0]), int(tok[2]), int(tok[3])
                members = [int(x) for x in tok[4:]]
            except (ValueError, IndexError):
                raise InputFormatError("bad level line", path, lineno) from None
            if j != level.index or cap != level.capacity or size != len(members) or size > cap:
                raise InputFormatError("level line inconsistent with config", path, lineno)
            for e in members:
                oracle.extend(level.state, e)
            level.members = members
            level.utility = oracle.value(level.state)
        sieve._start = oracle.counter.snapshot()
        return sieve


def sieve_init(config: SieveConfig, oracle: UtilityOracle) -> Sieve:
    return Sieve(config, oracle)


def sieve_ingest(sieve: Sieve, e: int) -> Sieve:
    sieve.ingest(e)
    return sieve


def sieve_query(sieve: Sieve, epsilon_tilde: float) -> QueryResult:
    return sieve.query(epsilon_tilde)


def sieve_footprint(sieve: Sieve) -> Footprint:
    return sieve.footprint()


def esc_streaming(oracle: UtilityOracle, stream: Iterable[int], memory: int, Q: float,
                  alpha: float = 2.0) -> Sieve:
    """Run the whole first phase over ``stream`` and return the populated sieve."""
    return Sieve(SieveConfig(memory, alpha, Q), oracle).run(stream)
