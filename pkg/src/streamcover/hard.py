"""Adversarial set systems built from a complete t-ary tree and a pointer input.

Vertices are addressed as ``(layer, position)`` with leaves on layer 1 and the
root on layer ``k``. Children of ``(i, p)`` are ``(i - 1, p * t + c)`` for
``c = 0..t-1``, and leaf ``p`` owns the element block ``[p * ell, (p + 1) * ell)``,
so every base set is a contiguous id range.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import BRUTE_FORCE_LIMIT, brute_force_kstar
from .oracle import CoverInstance
from .utilities import setcover_oracle

Vertex = tuple[int, int]


@dataclass(frozen=True)
class TreeSpec:
    t: int
    k: int
    ell: int

    def __post_init__(self) -> None:
        if self.t < 2:
            raise ValueError(f"arity t must be >= 2, got {self.t}")
        if self.k < 2:
            raise ValueError(f"layer count k must be >= 2, got {self.k}")
        if self.ell < self.t:
            raise ValueError(f"leaf-set size ell must be >= t (ell={self.ell}, t={self.t})")
        if self.universe_size > 2**31:
            raise ValueError("universe too large to index")

    @property
    def universe_size(self) -> int:
        return self.t ** (self.k - 1) * self.ell

    @property
    def Q(self) -> int:
        return self.universe_size

    def layer_width(self, i: int) -> int:
        return self.t ** (self.k - i)

    def vertices(self, i: int) -> list[Vertex]:
        return [(i, p) for p in range(self.layer_width(i))]

    def children(self, v: Vertex) -> list[Vertex]:
        i, p = v
        return [(i - 1, p * self.t + c) for c in range(self.t)]

    def base_range(self, v: Vertex) -> range:
        i, p = v
        width = self.ell * self.t ** (i - 1)
        return range(p * width, (p + 1) * width)

    def max_sets(self) -> float:
        t, k, ell = self.t, self.k, self.ell
        return (t ** k - 1 + ell * t ** (k - 2) * (t - 1)) / (t - 1)


@dataclass(frozen=True)
class PointerInput:
    """``pointers[v]`` is the chosen child index (0..t-1) of internal vertex v."""

    pointers: dict[Vertex, int]
    leaf_bits: tuple[int, ...]

    def validate(self, spec: TreeSpec) -> None:
        for i in range(2, spec.k + 1):
            for v in spec.vertices(i):
                c = self.pointers.get(v)
                if c is None or not (0 <= c < spec.t):
                    raise ValueError(f"vertex {v} needs a pointer in 0..{spec.t - 1}")
        if len(self.leaf_bits) != spec.layer_width(1) or any(b not in (0, 1) for b in self.leaf_bits):
            raise ValueError(f"need {spec.layer_width(1)} leaf bits in {{0, 1}}")

    def path(self, spec: TreeSpec) -> list[Vertex]:
        """Root-to-leaf path v_k, ..., v_1 induced by the pointers."""
        v = (spec.k, 0)
        out = [v]
        while v[0] > 1:
            v = spec.children(v)[self.pointers[v]]
            out.append(v)
        return out

    def path_leaf(self, spec: TreeSpec) -> int:
        return self.path(spec)[-1][1]

    def case(self, spec: TreeSpec) -> int:
        return self.leaf_bits[self.path_leaf(spec)]


def random_pointer_input(spec: TreeSpec, rng: np.random.Generator,
                         case: int | None = None) -> PointerInput:
    """Uniform pointers and leaf bits; if ``case`` is given, b(v_pi) is forced to it."""
    pointers = {v: int(rng.integers(spec.t)) for i in range(2, spec.k + 1) for v in spec.vertices(i)}
    bits = [int(b) for b in rng.integers(0, 2, spec.layer_width(1))]
    pi = PointerInput(pointers, tuple(bits))
    if case is not None:
        bits[pi.path_leaf(spec)] = case
        pi = PointerInput(pointers, tuple(bits))
    return pi


def build_base_sets(spec: TreeSpec) -> dict[Vertex, frozenset[int]]:
    return {v: frozenset(spec.base_range(v))
            for i in range(1, spec.k + 1) for v in spec.vertices(i)}


@dataclass
class HardInstance:
    spec: TreeSpec
    pi: PointerInput
    instance: CoverInstance
    player_ranges: list[range]  # set ids contributed by P_1 .. P_k, in stream order
    set_of: dict[Vertex, int]  # set id of S_v for every vertex that contributes one

    @property
    def Q(self) -> int:
        return self.spec.Q

    @property
    def case(self) -> int:
        return self.pi.case(self.spec)

    @property
    def path_leaf(self) -> int:
        return self.pi.path_leaf(self.spec)

    def metadata(self) -> str:
        s = self.spec
        return f"{s.t} {s.k} {s.ell} {self.case} {self.path_leaf} {self.Q}"

    def shuffled(self, rng: np.random.Generator) -> CoverInstance:
        order = rng.permutation(self.instance.m)
        labels = None if self.instance.labels is None else [self.instance.labels[i] for i in order]
        return CoverInstance(self.instance.n, [self.instance.sets[i] for i in order], labels)

    def write(self, path: str | Path) -> Path:
        """Write the cover instance and a ``.meta`` sidecar; returns the sidecar path."""
        path = Path(path)
        self.instance.write(path)
        meta = path.with_name(path.name + ".meta")
        meta.write_text("# t k ell case path-leaf Q\n" + self.metadata() + "\n")
        return meta


def build_instance(spec: TreeSpec, pi: PointerInput) -> HardInstance:
    pi.validate(spec)
    sets: list[list[int]] = []
    labels: list[str] = []
    set_of: dict[Vertex, int] = {}
    ranges: list[range] = []

    def add(members, label, vertex=None):
        if vertex is not None:
            set_of[vertex] = len(sets)
        sets.append(sorted(members))
        labels.append(label)

    def minus_child(v: Vertex) -> list[int]:
        u = spec.children(v)[pi.pointers[v]]
        a, b = spec.base_range(v), spec.base_range(u)
        return [x for x in a if not (b.start <= x < b.stop)]

    start = 0
    for p in range(spec.layer_width(1)):
        if pi.leaf_bits[p]:
            add(spec.base_range((1, p)), f"P1 leaf {p}", (1, p))
    ranges.append(range(start, len(sets)))
    for i in range(2, spec.k):
        start = len(sets)
        for v in spec.vertices(i):
            add(minus_child(v), f"P{i} vertex {v[1]}", v)
        ranges.append(range(start, len(sets)))
    start = len(sets)
    root = (spec.k, 0)
    add(minus_child(root), f"P{spec.k} root", root)
    for x in spec.base_range(spec.children(root)[pi.pointers[root]]):
        add([x], f"P{spec.k} singleton {x}")
    ranges.append(range(start, len(sets)))

    inst = CoverInstance(spec.universe_size, sets, labels)
    return HardInstance(spec, pi, inst, ranges, set_of)


def path_witness(hard: HardInstance) -> list[int]:
    """Set ids of S_{v_k}, ..., S_{v_2}, S~_{v_1} along the pointer path."""
    if hard.case != 1:
        raise ValueError("no witness exists: b(v_pi) = 0")
    return [hard.set_of[v] for v in hard.pi.path(hard.spec)]


@dataclass(frozen=True)
class GapReport:
    case: int
    min_cover: int
    bound: int
    holds: bool
    refined_holds: bool | None = None


def verify_gap(hard: HardInstance) -> GapReport:
    """Exact minimum cover of the instance, checked against the case dichotomy.

    Case 1 must have a cover of size <= k; case 0 must need >= ell sets. For
    case 0 the sharper ell + k - 1 is also reported.
    """
    m = hard.instance.m
    if m > BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance has {m} sets; brute force limited to {BRUTE_FORCE_LIMIT}")
    opt = brute_force_kstar(setcover_oracle(hard.instance), range(m), hard.Q)
    assert opt.feasible, "P_k's sets always cover the universe"
    spec = hard.spec
    if hard.case == 1:
        return GapReport(1, opt.k_star, spec.k, opt.k_star <= spec.k)
    return GapReport(0, opt.k_star, spec.ell, opt.k_star >= spec.ell,
                     opt.k_star >= spec.ell + spec.k - 1)


def all_pointer_inputs(spec: TreeSpec):
    """Every pointer/leaf-bit assignment (exponential; tiny specs only)."""
    internal = [v for i in range(2, spec.k + 1) for v in spec.vertices(i)]
    for choice in itertools.product(range(spec.t), repeat=len(internal)):
        pointers = dict(zip(internal, choice))
        for bits in itertools.product((0, 1), repeat=spec.layer_width(1)):
            yield PointerInput(pointers, bits)
