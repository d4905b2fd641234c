"""From a finite point set to an incidence problem for flats.

Each ordered pair (a, p) of distinct points gives the flat L_ap of
rotations-plus-translations taking a to p, written in chart coordinates.
Two flats L_ap and L_bq meet exactly when |ab| = |pq| > 0 and
a - b != q - p, so counting intersecting pairs of flats counts
distance-matched quadruples.  After cutting by a generic (2d-1)-flat the
pairwise intersections become points, and the harness histograms how
many flats pass through each.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Callable, Iterable, Sequence

from . import linalg
from .flats import (
    AffineFlat,
    Parametrization,
    affine_hull,
    chart,
    flat_intersect,
    fmt_rational,
    l_ap_flat,
    parse_rational,
    pullback,
)

Point = tuple[Fraction, ...]

SLICE_BOUND = 2**50
DEFAULT_BUDGET = 16
HULL_SAMPLE_CAP = 512


class GenericityError(RuntimeError):
    """A slice failed the genericity checks, or the retry budget ran out."""


def worker_count() -> int:
    raw = os.environ.get("SPUN_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"SPUN_THREADS must be a positive integer, got {raw!r}") from None


def pmap(fn: Callable, items: Sequence) -> list:
    """Ordered map, spread over SPUN_THREADS worker processes when set."""
    n = worker_count()
    if n <= 1 or len(items) < 32:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * n))))


# input


@dataclass(frozen=True)
class PointConfig:
    dimension: int
    points: tuple[Point, ...]

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        if len(self.points) < 2:
            raise ValueError("need at least two points")
        for p in self.points:
            if len(p) != self.dimension:
                raise ValueError(f"point {p} does not have {self.dimension} coordinates")
        if len(set(self.points)) != len(self.points):
            raise ValueError("points must be pairwise distinct")

    @classmethod
    def of(cls, dimension: int, points: Iterable[Sequence]) -> "PointConfig":
        return cls(dimension, tuple(tuple(Fraction(c) for c in p) for p in points))

    @property
    def n(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "points": [[fmt_rational(c) for c in p] for p in self.points],
        }

    @classmethod
    def from_json(cls, obj) -> "PointConfig":
        if not isinstance(obj, dict) or "dimension" not in obj or "points" not in obj:
            raise ValueError('expected an object with "dimension" and "points"')
        d = obj["dimension"]
        if not isinstance(d, int) or isinstance(d, bool):
            raise ValueError('"dimension" must be an integer')
        pts = []
        for i, p in enumerate(obj["points"]):
            if not isinstance(p, list):
                raise ValueError(f"points[{i}] is not a list")
            row = []
            for j, c in enumerate(p):
                if isinstance(c, bool) or not isinstance(c, (str, int)):
                    raise ValueError(f"points[{i}][{j}] must be a rational string, got {c!r}")
                try:
                    row.append(parse_rational(str(c)))
                except (ValueError, ZeroDivisionError) as e:
                    raise ValueError(f"points[{i}][{j}]: {e}") from None
            pts.append(tuple(row))
        return cls(d, tuple(pts))

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def lattice(d: int, side: int) -> PointConfig:
    pts = [()]
    for _ in range(d):
        pts = [p + (Fraction(k),) for p in pts for k in range(side)]
    return PointConfig(d, tuple(pts))


# distance statistics


def sqdist(a: Sequence, b: Sequence) -> Fraction:
    return sum(((x - y) ** 2 for x, y in zip(a, b)), Fraction(0))


@dataclass(frozen=True)
class DistanceStats:
    classes: tuple[tuple[Fraction, int], ...]  # (squared distance, ordered pair count)
    n: int

    @property
    def D(self) -> int:
        return len(self.classes)

    @property
    def Q(self) -> int:
        return sum(c * c for _, c in self.classes)

    @property
    def cauchy_schwarz(self) -> bool:
        return 4 * self.D * self.Q > self.n**4


def distance_stats(P: PointConfig) -> DistanceStats:
    counts = Counter(sqdist(a, b) for a in P.points for b in P.points if a != b)
    return DistanceStats(tuple(sorted(counts.items())), P.n)


def q_prime_count(P: PointConfig, restrict_family: bool = False) -> int:
    """Ordered (a, b, p, q) with |ab| = |pq| > 0 and a - b != q - p.

    With ``restrict_family`` also require a != p and b != q.
    """
    by_dist: dict[Fraction, list[tuple[int, int]]] = defaultdict(list)
    pts = P.points
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            if i != j:
                by_dist[sqdist(a, b)].append((i, j))
    total = 0
    for pairs in by_dist.values():
        for ia, ib in pairs:
            diff = tuple(x - y for x, y in zip(pts[ia], pts[ib]))
            for ip, iq in pairs:
                if restrict_family and (ia == ip or ib == iq):
                    continue
                if tuple(x - y for x, y in zip(pts[iq], pts[ip])) != diff:
                    total += 1
    return total


# flat family


Label = tuple[int, int]


def _flat_for(args) -> AffineFlat:
    a, p = args
    return l_ap_flat(a, p)


def build_flat_family(P: PointConfig) -> list[tuple[Label, AffineFlat]]:
    labels = [(i, j) for i in range(P.n) for j in range(P.n) if i != j]
    flats = pmap(_flat_for, [(P.points[i], P.points[j]) for i, j in labels])
    return list(zip(labels, flats))


def _meet(args) -> AffineFlat:
    return flat_intersect(*args)


def pairwise_meets(flats: Sequence[AffineFlat]) -> dict[tuple[int, int], AffineFlat]:
    """Nonempty intersections of all unordered pairs, keyed by index pair."""
    keys = list(combinations(range(len(flats)), 2))
    meets = pmap(_meet, [(flats[i], flats[j]) for i, j in keys])
    return {k: m for k, m in zip(keys, meets) if not m.is_empty}


# slicing


def random_slice(d: int, rng: random.Random, bound: int = SLICE_BOUND) -> Parametrization:
    n = chart(d).size

    def r() -> Fraction:
        return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))

    base = tuple(r() for _ in range(n))
    dirs = tuple(tuple(r() for _ in range(n)) for _ in range(2 * d - 1))
    return Parametrization(base, dirs)


def slice_violation(
    d: int,
    h: Parametrization,
    flats: Sequence[AffineFlat],
    meets: Iterable[AffineFlat],
) -> str | None:
    """Why ``h`` is not generic for this family, or None if it is."""
    if h.dim != 2 * d - 1 or h.ambient != chart(d).size:
        return f"slice has dimension {h.dim} in Q^{h.ambient}"
    if not h.is_injective():
        return "parametrization is degenerate"
    for i, f in enumerate(flats):
        got = pullback(f, h).dim
        if got != d - 1:
            return f"flat {i} meets the slice in dimension {got}, expected {d - 1}"
    for m in meets:
        got = pullback(m, h).dim
        if got != 0:
            return f"a pairwise intersection meets the slice in dimension {got}, expected 0"
    return None


@dataclass
class SliceResult:
    param: Parametrization
    seed: int | None
    retries: int
    rejections: list[str] = field(default_factory=list)


def sample_generic_slice(
    d: int,
    flats: Sequence[AffineFlat],
    seed: int,
    budget: int = DEFAULT_BUDGET,
    meets: Iterable[AffineFlat] | None = None,
    initial: Parametrization | None = None,
    bound: int = SLICE_BOUND,
) -> SliceResult:
    """Draw a (2d-1)-flat and verify it is generic for ``flats``.

    On failure the seed is incremented and a fresh flat drawn, up to
    ``budget`` attempts.  An ``initial`` candidate, if given, is tried
    first and counts as one attempt.  For d = 2 the chart already has
    dimension 3 and the identity slice is returned.
    """
    if d == 2:
        return SliceResult(Parametrization.identity(3), seed, 0)
    meets = list(pairwise_meets(flats).values()) if meets is None else list(meets)
    rejections = []
    if initial is not None:
        why = slice_violation(d, initial, flats, meets)
        if why is None:
            return SliceResult(initial, None, 0)
        rejections.append(why)
    s = seed
    while len(rejections) < budget:
        h = random_slice(d, random.Random(s), bound)
        why = slice_violation(d, h, flats, meets)
        if why is None:
            return SliceResult(h, s, len(rejections), rejections)
        rejections.append(why)
        s += 1
    raise GenericityError(f"no generic slice after {budget} attempts: {rejections[-1]}")


# rich points


@dataclass(frozen=True)
class RichPointHistogram:
    entries: tuple[tuple[int, int], ...]  # (k, m_k), k ascending, m_k > 0

    def m(self, k: int) -> int:
        return dict(self.entries).get(k, 0)

    def at_least(self, k: int) -> int:
        return sum(c for kk, c in self.entries if kk >= k)

    @property
    def max_k(self) -> int:
        return max((k for k, _ in self.entries), default=0)

    def ordered_pairs(self) -> int:
        return sum(c * 2 * comb(k, 2) for k, c in self.entries)

    def to_json(self) -> dict:
        return {str(k): str(c) for k, c in self.entries}


def rich_points(sliced: Sequence[AffineFlat]) -> tuple[RichPointHistogram, int, dict]:
    """Histogram of how many flats pass through each pairwise meeting point.

    Returns ``(histogram, ordered intersecting pairs, incidences)`` where
    ``incidences`` maps each point to the sorted indices of flats on it.
    """
    incid: dict[Point, set[int]] = defaultdict(set)
    for (i, j), m in pairwise_meets(sliced).items():
        if m.dim > 0:
            raise GenericityError(f"flats {i} and {j} meet in dimension {m.dim}")
        incid[m.base].update((i, j))
    ordered = {p: tuple(sorted(incid[p])) for p in sorted(incid)}
    hist = Counter(len(v) for v in ordered.values())
    h = RichPointHistogram(tuple(sorted(hist.items())))
    return h, h.ordered_pairs(), ordered


# the full pipeline


@dataclass(frozen=True)
class ReductionReport:
    digest: str
    n: int
    dimension: int
    stats: DistanceStats
    q_prime: int
    q_prime_family: int
    flats: int
    slice_seed: int | None
    retries: int
    histogram: RichPointHistogram
    pair_count: int
    hull_pairs: int
    verdicts: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        return {
            "digest": self.digest,
            "dimension": self.dimension,
            "n": str(self.n),
            "D": str(self.stats.D),
            "Q": str(self.stats.Q),
            "Q_prime": str(self.q_prime),
            "Q_prime_family": str(self.q_prime_family),
            "Q_prime_excluded": str(self.q_prime - self.q_prime_family),
            "distance_classes": [[fmt_rational(s), str(c)] for s, c in self.stats.classes],
            "flats": str(self.flats),
            "slice_seed": None if self.slice_seed is None else str(self.slice_seed),
            "retries": str(self.retries),
            "histogram": self.histogram.to_json(),
            "pair_count": str(self.pair_count),
            "hull_pairs": str(self.hull_pairs),
            "verdicts": dict(sorted(self.verdicts.items())),
        }

    def summary(self) -> str:
        lines = [
            f"n={self.n} d={self.dimension} D={self.stats.D} Q={self.stats.Q} "
            f"Q'={self.q_prime} Q'(family)={self.q_prime_family}",
            f"flats={self.flats} slice_seed={self.slice_seed} retries={self.retries}",
            "histogram: "
            + (", ".join(f"m_{k}={c}" for k, c in self.histogram.entries) or "empty"),
            f"intersecting ordered pairs={self.pair_count}",
        ]
        names = {
            "A": "pair count equals family-restricted Q'",
            "B": "Q' >= Q/2",
            "C": "4 D Q > n^4",
            "D": "every rich point lies on at most n flats",
            "E": "same-source flats span the chart",
        }
        for k, v in sorted(self.verdicts.items()):
            lines.append(f"[{'PASS' if v else 'FAIL'}] {k}: {names.get(k, k)}")
        return "\n".join(lines)


def _hull_full(args) -> bool:
    f, g, n = args
    return affine_hull(f, g).dim == n


def same_source_hulls(
    P: PointConfig, family: Sequence[tuple[Label, AffineFlat]], rng: random.Random
) -> tuple[int, bool]:
    """Check hull(L_ap, L_aq) is the whole chart for same-source pairs (p != q)."""
    by_label = dict(family)
    pairs = [
        ((a, p), (a, q))
        for a in range(P.n)
        for p in range(P.n)
        for q in range(P.n)
        if len({a, p, q}) == 3
    ]
    if len(pairs) > HULL_SAMPLE_CAP:
        pairs = sorted(rng.sample(pairs, HULL_SAMPLE_CAP))
    n = chart(P.dimension).size
    res = pmap(_hull_full, [(by_label[x], by_label[y], n) for x, y in pairs])
    return len(pairs), all(res)


def run_reduction(P: PointConfig, seed: int = 0, budget: int = DEFAULT_BUDGET) -> ReductionReport:
    d = P.dimension
    stats = distance_stats(P)
    qp = q_prime_count(P)
    qpf = q_prime_count(P, restrict_family=True)
    family = build_flat_family(P)
    flats = [f for _, f in family]
    meets = pairwise_meets(flats)
    sl = sample_generic_slice(d, flats, seed, budget, meets=meets.values())
    sliced = [pullback(f, sl.param) for f in flats]
    hist, pairs, _ = rich_points(sliced)
    n_hull, hull_ok = same_source_hulls(P, family, random.Random(seed))
    verdicts = {
        "A": pairs == qpf,
        "B": 2 * qp >= stats.Q,
        "C": stats.cauchy_schwarz,
        "D": hist.max_k <= P.n,
        "E": hull_ok,
    }
    return ReductionReport(
        digest=P.digest(),
        n=P.n,
        dimension=d,
        stats=stats,
        q_prime=qp,
        q_prime_family=qpf,
        flats=len(flats),
        slice_seed=sl.seed,
        retries=sl.retries,
        histogram=hist,
        pair_count=pairs,
        hull_pairs=n_hull,
        verdicts=verdicts,
    )
