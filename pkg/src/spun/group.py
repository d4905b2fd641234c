"""Spin(d), Spun(d) and their projective representatives.

Spun(d) sits inside Z_d^0 and double covers the proper rigid motions of
Q^d.  Every element factors uniquely as ``gamma * (1 + P i(v))`` where
``gamma`` is in Spin(d) and ``P = e_{d+1} e_{d+2}``.

Square roots never appear: unit vectors come from inverse stereographic
projection, and operations that would need a normalisation return a
:class:`ProjectiveRotor` (a value together with its scalar norm).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .clifford import (
    Multivector,
    blade_grade,
    conjugate,
    embed,
    in_subspace,
    norm,
    pair_mask,
)

Vec = tuple[Fraction, ...]


def _vec(v: Sequence) -> Vec:
    return tuple(Fraction(c) for c in v)


def pair(d: int) -> Multivector:
    """The element e_{d+1} e_{d+2}."""
    return Multivector(d, {pair_mask(d): 1})


def scalar_norm(x: Multivector) -> Fraction | None:
    """Return c when N(x) = c * 1, else None."""
    n = norm(x)
    if any(m != 0 for m, _ in n.items()):
        return None
    return n.scalar_part()


# random rationals


def random_fraction(rng: random.Random, bound: int = 4) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_vector(rng: random.Random, d: int, bound: int = 4) -> Vec:
    return tuple(random_fraction(rng, bound) for _ in range(d))


def unit_from_stereo(t: Sequence) -> Vec:
    """Inverse stereographic projection of ``t`` in Q^{d-1} onto S^{d-1}."""
    t = _vec(t)
    s = sum(c * c for c in t)
    return tuple(2 * c / (s + 1) for c in t) + ((s - 1) / (s + 1),)


def rational_unit_sample(d: int, seed: int | random.Random, bound: int = 4) -> Vec:
    if d < 2:
        raise ValueError("need d >= 2")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return unit_from_stereo(random_vector(rng, d - 1, bound))


# element types


@dataclass(frozen=True)
class ProjectiveRotor:
    """A nonzero multiple of a group element: N(value) = normsq * 1."""

    value: Multivector
    normsq: Fraction

    def __post_init__(self):
        n = scalar_norm(self.value)
        if n is None or n != self.normsq or n <= 0:
            raise ValueError(f"N({self.value}) is not {self.normsq} * 1")

    @classmethod
    def of(cls, value: Multivector) -> "ProjectiveRotor":
        n = scalar_norm(value)
        if n is None or n <= 0:
            raise ValueError(f"N({value}) is not a positive scalar")
        return cls(value, n)

    def __mul__(self, other: "ProjectiveRotor") -> "ProjectiveRotor":
        return ProjectiveRotor(self.value * other.value, self.normsq * other.normsq)

    def conj_action(self, x: Multivector) -> Multivector:
        """g x conj(g) / N(g)."""
        return (self.value * x * conjugate(self.value)) / self.normsq


@dataclass(frozen=True)
class SpinElement:
    value: Multivector
    witness: tuple[Vec, ...] = field(default=(), compare=False)

    def __post_init__(self):
        x = self.value
        if not in_subspace(x, "Cl0"):
            raise ValueError(f"{x} is not in the even Clifford subalgebra")
        if norm(x) != 1:
            raise ValueError(f"N({x}) != 1")
        xc = conjugate(x)
        for j in range(1, x.dim + 1):
            if not in_subspace(x * Multivector.gen(x.dim, j) * xc, "iRd"):
                raise ValueError(f"conjugation by {x} does not preserve vectors")

    @property
    def dim(self) -> int:
        return self.value.dim

    def __mul__(self, other: "SpinElement") -> "SpinElement":
        return SpinElement(self.value * other.value, self.witness + other.witness)

    def rotate(self, w: Sequence) -> Vec:
        """Vector part of gamma i(w) conj(gamma)."""
        y = self.value * embed(_vec(w), self.dim) * conjugate(self.value)
        return tuple(y.coeff(1 << j) for j in range(self.dim))


def spin_from_unit_vectors(d: int, us: Sequence[Sequence]) -> SpinElement:
    if len(us) % 2:
        raise ValueError(f"need an even number of unit vectors, got {len(us)}")
    out = Multivector.scalar(d)
    witness = []
    for u in us:
        u = _vec(u)
        if len(u) != d:
            raise ValueError(f"vector {u} has length {len(u)}, expected {d}")
        if sum(c * c for c in u) != 1:
            raise ValueError(f"{u} is not a unit vector")
        out = out * embed(u, d)
        witness.append(u)
    return SpinElement(out, tuple(witness))


def rotor_taking(u: Sequence, v: Sequence) -> ProjectiveRotor:
    """A projective rotor whose conjugation action sends i(u) to i(v)."""
    u, v = _vec(u), _vec(v)
    d = len(u)
    if len(v) != d:
        raise ValueError("vectors differ in length")
    for w in (u, v):
        if sum(c * c for c in w) != 1:
            raise ValueError(f"{w} is not a unit vector")
    if all(a == -b for a, b in zip(u, v)):
        # antipodal: route through a basis vector that is not +-u
        k = next(k for k in range(d) if abs(u[k]) != 1)
        w = tuple(Fraction(int(j == k)) for j in range(d))
        return rotor_taking(w, v) * rotor_taking(u, w)
    iv = embed(v, d)
    g = iv * (iv + embed(u, d))
    return ProjectiveRotor(g, 2 + 2 * linalg.dot(u, v))


@dataclass(frozen=True)
class RigidMotion:
    """``w -> rotation @ w + translation``, with rotation in SO(d)."""

    rotation: tuple[tuple[Fraction, ...], ...]
    translation: Vec

    def __post_init__(self):
        r = [list(row) for row in self.rotation]
        d = len(r)
        if linalg.matmul(linalg.transpose(r), r) != linalg.identity(d):
            raise ValueError("rotation is not orthogonal")
        if linalg.det(r) != 1:
            raise ValueError("rotation has determinant -1")

    def apply(self, w: Sequence) -> Vec:
        return tuple(a + b for a, b in zip(linalg.matvec(self.rotation, w), self.translation))


@dataclass(frozen=True)
class SpunElement:
    value: Multivector
    gamma: SpinElement = field(compare=False)
    translation_v: Vec = field(compare=False)

    @property
    def dim(self) -> int:
        return self.value.dim

    @classmethod
    def from_value(cls, x: Multivector) -> "SpunElement":
        gamma, v = spun_decompose(x)
        return cls(x, gamma, v)

    def __mul__(self, other: "SpunElement") -> "SpunElement":
        return SpunElement.from_value(self.value * other.value)

    def __neg__(self) -> "SpunElement":
        return SpunElement(-self.value, SpinElement(-self.gamma.value), self.translation_v)

    def inverse(self) -> "SpunElement":
        return spun_inverse(self)

    def act(self, w: Sequence) -> Vec:
        return spun_action(self, w)


def spun_from_parts(gamma: SpinElement, v: Sequence) -> SpunElement:
    d = gamma.dim
    v = _vec(v)
    x = gamma.value * (1 + pair(d) * embed(v, d))
    return SpunElement(x, gamma, v)


def _action_raw(x: Multivector, w: Sequence) -> Vec | None:
    """w' with x (e_{d+2} i(w) + e_{d+1}) conj(x) = e_{d+2} i(w') + e_{d+1}, else None."""
    d = x.dim
    probe = Multivector.gen(d, d + 2) * embed(_vec(w), d) + Multivector.gen(d, d + 1)
    y = x * probe * conjugate(x)
    hi = 1 << (d + 1)
    out = [Fraction(0)] * d
    seen_top = False
    for m, c in y.items():
        if m == 1 << d:
            if c != 1:
                return None
            seen_top = True
        elif m & hi and (m & ~hi).bit_length() <= d and bin(m & ~hi).count("1") == 1:
            out[(m & ~hi).bit_length() - 1] = c
        else:
            return None
    return tuple(out) if seen_top else None


def is_spun_member(x: Multivector) -> bool:
    if not in_subspace(x, "Z0") or norm(x) != 1:
        return False
    d = x.dim
    probes = [(0,) * d] + [tuple(int(j == k) for j in range(d)) for k in range(d)]
    return all(_action_raw(x, w) is not None for w in probes)


def spun_decompose(x: Multivector) -> tuple[SpinElement, Vec]:
    if not is_spun_member(x):
        raise ValueError(f"{x} is not in Spun({x.dim})")
    d = x.dim
    pm = pair_mask(d)
    gamma = Multivector(d, {m: c for m, c in x.items() if not m & pm})
    rest = conjugate(gamma) * (x - gamma)
    # e_{d+1} e_{d+2} e_j = -e_j e_{d+1} e_{d+2}
    v = tuple(-rest.coeff((1 << j) | pm) for j in range(d))
    if rest != pair(d) * embed(v, d):
        raise ValueError(f"{x} does not factor as gamma (1 + P i(v))")
    return SpinElement(gamma), v


def spun_action(x: SpunElement | Multivector, w: Sequence) -> Vec:
    val = x.value if isinstance(x, SpunElement) else x
    out = _action_raw(val, w)
    if out is None:
        raise ValueError(f"{val} does not act as a rigid motion")
    return out


def spun_inverse(x: SpunElement) -> SpunElement:
    return SpunElement.from_value(conjugate(x.value))


def to_rigid_motion(x: SpunElement | Multivector) -> RigidMotion:
    d = x.dim
    t = spun_action(x, (0,) * d)
    cols = []
    for k in range(d):
        img = spun_action(x, tuple(int(j == k) for j in range(d)))
        cols.append([a - b for a, b in zip(img, t)])
    rot = tuple(tuple(r) for r in linalg.transpose(cols))
    return RigidMotion(rot, t)


# sampling


def random_spin(d: int, rng: random.Random, pairs: int | None = None) -> SpinElement:
    """Product of 0, 2 or 4 random rational unit vectors."""
    k = 2 * (rng.choice((0, 1, 2)) if pairs is None else pairs)
    return spin_from_unit_vectors(d, [rational_unit_sample(d, rng, 3) for _ in range(k)])


def random_spun(d: int, rng: random.Random, pairs: int | None = None) -> SpunElement:
    return spun_from_parts(random_spin(d, rng, pairs), random_vector(rng, d, 3))


def z0_coordinates(x: Multivector) -> list[Fraction]:
    from .clifford import z0_basis

    return [x.coeff(m) for m in z0_basis(x.dim)]


# projective lifting


def gd_peel(g: ProjectiveRotor | Multivector):
    """Split g in G_d as ``h * (e_d i(u) - 1)`` or ``h * e_{d-1} e_d``.

    Returns ``(h, branch)`` where ``h`` is a projective rotor without
    e_d and ``branch`` is either the unit vector ``u`` or the string
    ``"e_{d-1}e_d"``.  The vector u = conj(g) e_d g / N(g) is always
    rational, so the peel never leaves Q.
    """
    if isinstance(g, Multivector):
        g = ProjectiveRotor.of(g)
    x = g.value
    d = x.dim
    if not in_subspace(x, "Cl0"):
        raise ValueError(f"{x} is not in the even Clifford subalgebra")
    ed = Multivector.gen(d, d)
    y = conjugate(x) * ed * x / g.normsq
    if not in_subspace(y, "iRd"):
        raise ValueError(f"{x} is not a multiple of a Spin element")
    u = tuple(y.coeff(1 << j) for j in range(d))
    if u[-1] != -1:
        factor = ed * (ed + embed(u, d))  # = e_d i(u) - 1
        fn = 2 + 2 * u[-1]
        h = x * conjugate(factor) / fn
        branch: Vec | str = u
    else:
        factor = Multivector.gen(d, d - 1) * ed
        h = -(x * factor)
        branch = "e_{d-1}e_d"
    if not in_subspace(h, "Cl", d - 1):
        raise ValueError(f"peeled factor {h} still involves e_{d}")
    if h * factor != x:
        raise ValueError("peel reconstruction failed")
    return ProjectiveRotor.of(h), branch


def _skew_system(r: Fraction, lambdas: Mapping[tuple[int, int], Fraction], k: int):
    """Matrix r I + skew part over indices 1..k."""
    m = [[Fraction(0)] * k for _ in range(k)]
    for j in range(1, k + 1):
        m[j - 1][j - 1] = r
        for l in range(1, k + 1):
            if l > j:
                m[j - 1][l - 1] = -lambdas.get((j, l), Fraction(0))
            elif l < j:
                m[j - 1][l - 1] = lambdas.get((l, j), Fraction(0))
    return m


def j_lift(d: int, r, lambdas: Mapping[tuple[int, int], object]) -> ProjectiveRotor:
    """Element of J_d with scalar part r and prescribed 2-term coefficients.

    ``lambdas[(j, k)]`` for k <= d is the coefficient of e_j e_k and
    ``lambdas[(j, d+1)]`` the coefficient of e_j e_{d+1} e_{d+2}; missing
    keys mean zero.
    """
    r = Fraction(r)
    if r == 0:
        raise ValueError("scalar part must be nonzero")
    lam = {}
    for (j, k), c in lambdas.items():
        if not 1 <= j < k <= d + 1:
            raise ValueError(f"bad coefficient index {(j, k)} for d={d}")
        lam[(j, k)] = Fraction(c)
    h = Multivector.scalar(d, r)
    for k in range(2, d + 1):
        m = _skew_system(r, lam, k - 1)
        u = linalg.solve_square(m, [lam.get((j, k), Fraction(0)) for j in range(1, k)])
        h = h - h * Multivector.gen(d, k) * embed(list(u) + [0] * (d - k + 1), d)
    m = _skew_system(r, lam, d)
    u = linalg.solve_square(m, [lam.get((j, d + 1), Fraction(0)) for j in range(1, d + 1)])
    g = h - h * pair(d) * embed(u, d)
    got = two_term_coefficients(g)
    want = {key: lam.get(key, Fraction(0)) for key in got}
    if g.scalar_part() != r or got != want:
        raise ArithmeticError("lifted element does not reproduce its coefficients")
    return ProjectiveRotor.of(g)


def two_term_coefficients(x: Multivector) -> dict[tuple[int, int], Fraction]:
    """Coefficients of the 2-terms keyed like :func:`j_lift` input."""
    d = x.dim
    pm = pair_mask(d)
    out = {}
    for j in range(1, d + 1):
        for k in range(j + 1, d + 1):
            out[(j, k)] = x.coeff((1 << (j - 1)) | (1 << (k - 1)))
        out[(j, d + 1)] = x.coeff((1 << (j - 1)) | pm)
    return out


def pure_grade(x: Multivector) -> int | None:
    gs = {blade_grade(x.dim, m) for m, _ in x.items()}
    return gs.pop() if len(gs) == 1 else None
