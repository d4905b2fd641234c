"""Affine flats over Q and the flats L_ap attached to point pairs.

Coordinates on Z_d^0 follow :func:`spun.clifford.z0_basis`.  The chart on
2-terms lists e_j e_k (j < k <= d) lexicographically, followed by
e_j e_{d+1} e_{d+2} for j = 1..d; chart slot ``(j, d+1)`` names the latter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb
from typing import Iterable, Sequence

from . import linalg
from .clifford import Multivector, cl0_basis, embed, in_subspace, pair_mask, z0_basis
from .group import ProjectiveRotor, j_lift, pair

Point = tuple[Fraction, ...]


def _vec(v: Sequence) -> Point:
    return tuple(Fraction(c) for c in v)


def fmt_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def parse_rational(s: str) -> Fraction:
    s = s.strip()
    if not s:
        raise ValueError("empty rational")
    if any(ch in s for ch in ".eE") or "_" in s:
        raise ValueError(f"{s!r} is not an exact rational (use p/q)")
    return Fraction(s)


# flats


@dataclass(frozen=True)
class AffineFlat:
    """Affine subspace of Q^ambient in canonical form.

    ``directions`` is in reduced row-echelon form and ``base`` is zero in
    every pivot column, so two flats are equal as sets exactly when they
    are equal as values.  The empty flat has ``base is None``.
    """

    ambient: int
    base: Point | None
    directions: tuple[Point, ...]

    @classmethod
    def make(cls, ambient: int, base: Sequence | None, directions: Iterable[Sequence] = ()):
        if base is None:
            return cls(ambient, None, ())
        base = list(_vec(base))
        if len(base) != ambient:
            raise ValueError(f"base has length {len(base)}, ambient is {ambient}")
        dirs = [list(_vec(v)) for v in directions]
        if any(len(v) != ambient for v in dirs):
            raise ValueError("direction length differs from ambient dimension")
        rows, pivots = linalg.rref(dirs, ambient) if dirs else ([], [])
        for row, p in zip(rows, pivots):
            f = base[p]
            if f:
                base = [b - f * r for b, r in zip(base, row)]
        return cls(ambient, tuple(base), tuple(tuple(r) for r in rows))

    @classmethod
    def empty(cls, ambient: int) -> "AffineFlat":
        return cls(ambient, None, ())

    @classmethod
    def point(cls, p: Sequence) -> "AffineFlat":
        return cls.make(len(p), p, ())

    @classmethod
    def linear_span(cls, ambient: int, vectors: Iterable[Sequence]) -> "AffineFlat":
        return cls.make(ambient, [0] * ambient, vectors)

    @classmethod
    def whole(cls, ambient: int) -> "AffineFlat":
        return cls.linear_span(ambient, linalg.identity(ambient))

    @property
    def is_empty(self) -> bool:
        return self.base is None

    @property
    def dim(self) -> int:
        return -1 if self.base is None else len(self.directions)

    def equations(self) -> tuple[list[list[Fraction]], list[Fraction]]:
        """Rows ``n`` and right-hand sides ``c`` with the flat = {x : n x = c}."""
        rows, rhs = self._equations
        return [list(r) for r in rows], list(rhs)

    @cached_property
    def _equations(self):
        if self.base is None:
            zero = [Fraction(0)] * self.ambient
            return [zero], [Fraction(1)]
        normals = linalg.nullspace(self.directions, self.ambient)
        return normals, [linalg.dot(n, self.base) for n in normals]

    def contains(self, x: Sequence) -> bool:
        if self.base is None:
            return False
        rows, rhs = self.equations()
        return all(linalg.dot(r, x) == c for r, c in zip(rows, rhs))

    def contains_flat(self, other: "AffineFlat") -> bool:
        return flat_intersect(self, other) == other

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient,
            "base": None if self.base is None else [fmt_rational(c) for c in self.base],
            "directions": [[fmt_rational(c) for c in v] for v in self.directions],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AffineFlat":
        base = obj.get("base")
        return cls.make(
            int(obj["ambient"]),
            None if base is None else [parse_rational(str(c)) for c in base],
            [[parse_rational(str(c)) for c in v] for v in obj.get("directions", [])],
        )


def flat_from_equations(rows: Sequence[Sequence], rhs: Sequence, ambient: int) -> AffineFlat:
    sol = linalg.solve_affine(rows, rhs, ambient)
    if sol is None:
        return AffineFlat.empty(ambient)
    return AffineFlat.make(ambient, sol[0], sol[1])


def _same_ambient(a: AffineFlat, b: AffineFlat) -> None:
    if a.ambient != b.ambient:
        raise ValueError(f"ambient mismatch: {a.ambient} vs {b.ambient}")


def flat_intersect(a: AffineFlat, b: AffineFlat) -> AffineFlat:
    _same_ambient(a, b)
    if a.is_empty or b.is_empty:
        return AffineFlat.empty(a.ambient)
    ra, ca = a.equations()
    rb, cb = b.equations()
    return flat_from_equations(ra + rb, ca + cb, a.ambient)


def affine_hull(a: AffineFlat, b: AffineFlat) -> AffineFlat:
    _same_ambient(a, b)
    if a.is_empty or b.is_empty:
        raise ValueError("hull of an empty flat")
    offset = linalg.sub(b.base, a.base)
    return AffineFlat.make(a.ambient, a.base, list(a.directions) + list(b.directions) + [offset])


# linear systems


@dataclass(frozen=True)
class LinearSystem:
    ambient: int
    rows: tuple[tuple[Point, Fraction], ...]
    names: tuple[str, ...] | None = None

    def solution_flat(self) -> AffineFlat:
        return flat_from_equations([r for r, _ in self.rows], [c for _, c in self.rows], self.ambient)

    def canonical(self) -> tuple[tuple[Point, Fraction], ...]:
        """Reduced row-echelon rows of the augmented matrix (duplicates vanish)."""
        aug = [list(r) + [c] for r, c in self.rows]
        red, _ = linalg.rref(aug, self.ambient + 1)
        return tuple((tuple(r[:-1]), r[-1]) for r in red)

    def _name(self, i: int) -> str:
        return self.names[i] if self.names else f"x_{i + 1}"

    def row_text(self, coeffs: Sequence[Fraction], rhs: Fraction) -> str:
        parts = []
        for i, c in enumerate(coeffs):
            if not c:
                continue
            mag = abs(c)
            body = ("" if mag == 1 else fmt_rational(mag) if mag.denominator == 1 else f"({fmt_rational(mag)})")
            body += self._name(i)
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return f"{' '.join(parts) if parts else '0'} = {fmt_rational(rhs)}"

    def to_text(self) -> str:
        return "; ".join(self.row_text(r, c) for r, c in self.rows)

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient,
            "variables": list(self.names) if self.names else None,
            "rows": [
                {"coefficients": [fmt_rational(c) for c in r], "rhs": fmt_rational(c0)}
                for r, c0 in self.rows
            ],
        }


# chart


@dataclass(frozen=True)
class CoordinateChart:
    dim: int
    slots: tuple[tuple[int, int], ...]
    masks: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.slots)

    def names(self) -> tuple[str, ...]:
        return tuple(f"x_{{{j},{k}}}" for j, k in self.slots)

    def index(self, j: int, k: int) -> int:
        return self.slots.index((j, k))


@lru_cache(maxsize=None)
def chart(d: int) -> CoordinateChart:
    slots, masks = [], []
    for j in range(1, d + 1):
        for k in range(j + 1, d + 1):
            slots.append((j, k))
            masks.append((1 << (j - 1)) | (1 << (k - 1)))
    pm = pair_mask(d)
    for j in range(1, d + 1):
        slots.append((j, d + 1))
        masks.append((1 << (j - 1)) | pm)
    return CoordinateChart(d, tuple(slots), tuple(masks))


@lru_cache(maxsize=None)
def _chart_columns(d: int) -> tuple[int, ...]:
    pos = {m: i for i, m in enumerate(z0_basis(d))}
    return tuple(pos[m] for m in chart(d).masks)


def z0_vector(x: Multivector) -> Point:
    if not in_subspace(x, "Z0"):
        raise ValueError(f"{x} is not in Z_{x.dim}^0")
    return tuple(x.coeff(m) for m in z0_basis(x.dim))


def z0_element(d: int, coords: Sequence) -> Multivector:
    return Multivector(d, dict(zip(z0_basis(d), _vec(coords))))


# the maps tau_ap and eta


def tau_ap(x: Multivector, a: Sequence, p: Sequence) -> Multivector:
    d = x.dim
    half = Fraction(1, 2)
    P = pair(d)
    left = 1 + P * embed(_vec(p), d) * half
    right = 1 - P * embed(_vec(a), d) * half
    return left * x * right


def tau_ap_inverse(x: Multivector, a: Sequence, p: Sequence) -> Multivector:
    d = x.dim
    half = Fraction(1, 2)
    P = pair(d)
    left = 1 - P * embed(_vec(p), d) * half
    right = 1 + P * embed(_vec(a), d) * half
    return left * x * right


def f_ap_subspace(a: Sequence, p: Sequence) -> AffineFlat:
    """The linear subspace tau_ap(Cl_d^0) in Z_d^0 coordinates."""
    d = len(a)
    vecs = [z0_vector(tau_ap(Multivector(d, {m: 1}), a, p)) for m in cl0_basis(d)]
    return AffineFlat.linear_span(2**d, vecs)


def eta_project(x: Multivector) -> Point:
    if not in_subspace(x, "Z0"):
        raise ValueError(f"{x} is not in Z_{x.dim}^0")
    s = x.scalar_part()
    if s == 0:
        raise ValueError("scalar coefficient is zero; the chart is undefined on H_0")
    return tuple(x.coeff(m) / s for m in chart(x.dim).masks)


def eta_inverse_lift(d: int, y: Sequence) -> ProjectiveRotor:
    """The J_d representative with scalar part 1 whose chart point is ``y``."""
    ch = chart(d)
    y = _vec(y)
    if len(y) != ch.size:
        raise ValueError(f"chart point needs {ch.size} coordinates, got {len(y)}")
    return j_lift(d, 1, dict(zip(ch.slots, y)))


def project_subspace(d: int, sub: AffineFlat) -> AffineFlat:
    """Chart image of ``sub`` (a linear subspace of Z_d^0) cut at scalar 1."""
    if sub.is_empty:
        return AffineFlat.empty(chart(d).size)
    cols = _chart_columns(d)
    # canonical rows: the one with pivot 0 has scalar 1, the others scalar 0
    rows = list(sub.directions)
    if not rows or rows[0][0] != 1:
        return AffineFlat.empty(chart(d).size)
    base = [rows[0][c] for c in cols]
    dirs = [[r[c] for c in cols] for r in rows[1:]]
    return AffineFlat.make(len(cols), base, dirs)


def l_ap_flat(a: Sequence, p: Sequence) -> AffineFlat:
    return project_subspace(len(a), f_ap_subspace(a, p))


def l_ap_equations(a: Sequence, p: Sequence) -> LinearSystem:
    a, p = _vec(a), _vec(p)
    d = len(a)
    if len(p) != d:
        raise ValueError("a and p differ in length")
    ch = chart(d)
    rows = []
    for j in range(1, d + 1):
        row = [Fraction(0)] * ch.size
        for k in range(1, d + 1):
            if k > j:
                row[ch.index(j, k)] = a[k - 1] + p[k - 1]
            elif k < j:
                row[ch.index(k, j)] = -(a[k - 1] + p[k - 1])
        row[ch.index(j, d + 1)] = Fraction(2)
        rows.append((tuple(row), a[j - 1] - p[j - 1]))
    return LinearSystem(ch.size, tuple(rows), ch.names())


# slicing


@dataclass(frozen=True)
class Parametrization:
    """The map t -> base + sum t_i directions[i] from Q^k into Q^ambient."""

    base: Point
    directions: tuple[Point, ...]

    @property
    def ambient(self) -> int:
        return len(self.base)

    @property
    def dim(self) -> int:
        return len(self.directions)

    @classmethod
    def identity(cls, n: int) -> "Parametrization":
        return cls((Fraction(0),) * n, tuple(tuple(r) for r in linalg.identity(n)))

    def image(self) -> AffineFlat:
        return AffineFlat.make(self.ambient, self.base, self.directions)

    def is_injective(self) -> bool:
        return linalg.rank(self.directions, self.ambient) == self.dim

    def __call__(self, t: Sequence) -> Point:
        out = list(self.base)
        for c, v in zip(t, self.directions):
            if c:
                out = [o + c * x for o, x in zip(out, v)]
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "base": [fmt_rational(c) for c in self.base],
            "directions": [[fmt_rational(c) for c in v] for v in self.directions],
        }


def pullback(flat: AffineFlat, h: Parametrization) -> AffineFlat:
    """Preimage of ``flat`` under the parametrization ``h``."""
    if flat.ambient != h.ambient:
        raise ValueError("ambient mismatch")
    if flat.is_empty:
        return AffineFlat.empty(h.dim)
    rows, rhs = flat.equations()
    m = linalg.transpose(h.directions)  # ambient x k
    new_rows = linalg.matmul(rows, m) if rows else []
    new_rhs = [c - linalg.dot(r, h.base) for r, c in zip(rows, rhs)]
    return flat_from_equations(new_rows, new_rhs, h.dim)


def slice_flats(flats: Sequence[AffineFlat], h: Parametrization) -> list[AffineFlat]:
    return [pullback(f, h) for f in flats]


def expected_dims(d: int) -> dict[str, int]:
    return {
        "F": 2 ** (d - 1),
        "F_meet": 2 ** (d - 2),
        "L": comb(d, 2),
        "L_meet": comb(d - 1, 2),
        "chart": comb(d + 1, 2),
        "slice": 2 * d - 1,
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
