"""Exact sparse multivectors over the algebra X_d.

X_d has generators e_1..e_{d+2}.  Generators e_1..e_{d+1} pairwise
anticommute and square to -1; e_{d+2} commutes with everything and
squares to 0.  The subalgebra on e_1..e_k is the Clifford algebra Cl_k.

A blade is stored as a bitmask: generator j lives in bit j-1.  Coefficients
are :class:`fractions.Fraction`, so every identity is checked exactly.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

MIN_DIM = 2
MAX_DIM = 8

Scalar = Fraction
Number = int | Fraction


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _as_fraction(c: Number | str) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(c, (int, str)):
        return Fraction(c)
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


@lru_cache(maxsize=None)
def blade_product(d: int, a: int, b: int) -> tuple[int, int]:
    """Return ``(sign, mask)`` with ``blade(a) * blade(b) = sign * blade(mask)``.

    ``sign`` is 0 when both blades contain the degenerate generator e_{d+2}.
    """
    degenerate = 1 << (d + 1)
    if a & b & degenerate:
        return 0, 0
    anti = degenerate - 1  # bits of e_1..e_{d+1}
    aa, bb = a & anti, b & anti
    swaps = 0
    x = aa >> 1
    while x:
        swaps += _popcount(x & bb)
        x >>= 1
    swaps += _popcount(aa & bb)  # each repeated e_j contributes e_j^2 = -1
    return (-1 if swaps & 1 else 1), a ^ b


def blade_indices(mask: int) -> tuple[int, ...]:
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for j in indices:
        m |= 1 << (j - 1)
    return m


def pair_mask(d: int) -> int:
    """Mask of the product e_{d+1} e_{d+2}."""
    return (1 << d) | (1 << (d + 1))


def blade_grade(d: int, mask: int) -> int:
    """m-grade of a blade: generators among e_1..e_d, plus one for the pair.

    Blades carrying exactly one of e_{d+1}, e_{d+2} count that generator
    as one (they never occur inside Z_d^0).
    """
    low = _popcount(mask & ((1 << d) - 1))
    high = mask >> d
    return low + (1 if high == 3 else _popcount(high))


def in_z0(d: int, mask: int) -> bool:
    high = mask >> d
    if high not in (0, 3):
        return False
    return blade_grade(d, mask) % 2 == 0


class Multivector:
    """Immutable element of X_d with exact rational coefficients."""

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[int, Number] | None = None):
        if not MIN_DIM <= dim <= MAX_DIM:
            raise ValueError(f"dimension must be in [{MIN_DIM}, {MAX_DIM}], got {dim}")
        full = (1 << (dim + 2)) - 1
        clean: dict[int, Fraction] = {}
        for mask, c in (terms or {}).items():
            if mask & ~full or mask < 0:
                raise ValueError(f"blade mask {mask:#b} outside X_{dim}")
            c = _as_fraction(c)
            if c:
                clean[mask] = c
        self.dim = dim
        self._terms = clean
        self._hash = None

    # construction helpers

    @classmethod
    def scalar(cls, dim: int, c: Number = 1) -> "Multivector":
        return cls(dim, {0: c})

    @classmethod
    def zero(cls, dim: int) -> "Multivector":
        return cls(dim)

    @classmethod
    def gen(cls, dim: int, j: int) -> "Multivector":
        if not 1 <= j <= dim + 2:
            raise ValueError(f"generator e_{j} does not exist in X_{dim}")
        return cls(dim, {1 << (j - 1): 1})

    @classmethod
    def blade(cls, dim: int, *indices: int, coeff: Number = 1) -> "Multivector":
        """Ordered product ``coeff * e_{i1} e_{i2} ...`` (any order, repeats allowed)."""
        out = cls.scalar(dim, coeff)
        for j in indices:
            out = out * cls.gen(dim, j)
        return out

    # mapping access

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, mask: int) -> Fraction:
        return self._terms.get(mask, Fraction(0))

    def scalar_part(self) -> Fraction:
        return self._terms.get(0, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    # ring operations

    def _check(self, other: "Multivector") -> None:
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: X_{self.dim} vs X_{other.dim}")

    def _lift(self, other) -> "Multivector":
        if isinstance(other, Multivector):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Multivector.scalar(self.dim, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return Multivector(self.dim, out)

    __radd__ = __add__

    def __neg__(self) -> "Multivector":
        return Multivector(self.dim, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, c: Number) -> "Multivector":
        c = _as_fraction(c)
        return Multivector(self.dim, {m: c * v for m, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, Multivector):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, c):
        if isinstance(c, (int, Fraction)) and not isinstance(c, bool):
            return self.scale(1 / _as_fraction(c))
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = Multivector.scalar(self.dim, other)
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.dim == other.dim and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Multivector({self.dim}, {format_multivector(self)!r})"

    def __str__(self) -> str:
        return format_multivector(self)

    # involutions, shorthand for the module-level functions

    def alpha(self) -> "Multivector":
        return alpha(self)

    def reverse(self) -> "Multivector":
        return reverse(self)

    def conj(self) -> "Multivector":
        return conjugate(self)

    def norm(self) -> "Multivector":
        return norm(self)


def mul(x: Multivector, y: Multivector) -> Multivector:
    """Product in X_d."""
    x._check(y)
    d = x.dim
    out: dict[int, Fraction] = {}
    for ma, ca in x._terms.items():
        for mb, cb in y._terms.items():
            s, m = blade_product(d, ma, mb)
            if s == 0:
                continue
            v = ca * cb
            out[m] = out.get(m, 0) + (v if s > 0 else -v)
    return Multivector(d, out)


def alpha(x: Multivector) -> Multivector:
    """Grade automorphism: e_j -> -e_j for j <= d+1, e_{d+2} fixed."""
    anti = (1 << (x.dim + 1)) - 1
    return Multivector(
        x.dim, {m: (-c if _popcount(m & anti) & 1 else c) for m, c in x._terms.items()}
    )


def _reverse_sign(d: int, mask: int) -> int:
    k = _popcount(mask & ((1 << (d + 1)) - 1))
    return -1 if (k * (k - 1) // 2) & 1 else 1


def reverse(x: Multivector) -> Multivector:
    """The anti-automorphism t fixing every generator."""
    return Multivector(
        x.dim, {m: (c if _reverse_sign(x.dim, m) > 0 else -c) for m, c in x._terms.items()}
    )


def conjugate(x: Multivector) -> Multivector:
    return alpha(reverse(x))


def norm(x: Multivector) -> Multivector:
    return mul(x, conjugate(x))


def embed(v: Sequence[Number], dim: int | None = None) -> Multivector:
    """i(v) = sum v_j e_j."""
    d = len(v) if dim is None else dim
    if len(v) != d:
        raise ValueError(f"vector of length {len(v)} cannot embed into X_{d}")
    return Multivector(d, {1 << j: c for j, c in enumerate(v)})


def unembed(x: Multivector) -> tuple[Fraction, ...]:
    """Inverse of :func:`embed`; raises if ``x`` is not in i(Q^d)."""
    d = x.dim
    if not in_subspace(x, "iRd"):
        raise ValueError(f"{x} is not in i(Q^{d})")
    return tuple(x.coeff(1 << j) for j in range(d))


def grade_select(x: Multivector, m: int) -> Multivector:
    """Sub-sum of the m-terms of ``x``; ``x`` must lie in Z_d^0."""
    if not in_subspace(x, "Z0"):
        raise ValueError(f"{x} is not in Z_{x.dim}^0")
    d = x.dim
    return Multivector(d, {k: c for k, c in x._terms.items() if blade_grade(d, k) == m})


def grades(x: Multivector) -> set[int]:
    return {blade_grade(x.dim, k) for k in x._terms}


SUBSPACES = ("Z0", "Cl0", "Cl", "iRd")


def in_subspace(x: Multivector, which: str, k: int | None = None) -> bool:
    """Membership in Z_d^0, Cl_d^0, Cl_k (``which="Cl"``) or i(Q^d)."""
    d = x.dim
    if which == "Z0":
        return all(in_z0(d, m) for m in x._terms)
    if which == "Cl0":
        low = (1 << d) - 1
        return all(m & ~low == 0 and _popcount(m) % 2 == 0 for m in x._terms)
    if which == "Cl":
        if k is None or not 0 <= k <= d + 1:
            raise ValueError("Cl membership needs 0 <= k <= d+1")
        low = (1 << k) - 1
        return all(m & ~low == 0 for m in x._terms)
    if which == "iRd":
        return all(_popcount(m) == 1 and m < (1 << d) for m in x._terms)
    raise ValueError(f"unknown subspace {which!r}; expected one of {SUBSPACES}")


def z0_basis(d: int) -> list[int]:
    """Masks spanning Z_d^0, ordered by (grade, has pair, generator indices).

    For d = 3 this is 1, e1e2, e1e3, e2e3, e1e4e5, e2e4e5, e3e4e5, e1e2e3e4e5.
    """
    pm = pair_mask(d)
    masks = []
    for low in range(1 << d):
        for hi in (0, pm):
            m = low | hi
            if in_z0(d, m):
                masks.append(m)
    masks.sort(key=lambda m: (blade_grade(d, m), bool(m & pm), blade_indices(m)))
    return masks


def cl0_basis(d: int, k: int | None = None) -> list[int]:
    """Even blades on e_1..e_k (default k = d)."""
    k = d if k is None else k
    masks = [m for m in range(1 << k) if _popcount(m) % 2 == 0]
    masks.sort(key=lambda m: (_popcount(m), blade_indices(m)))
    return masks


# text format


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_multivector(x: Multivector) -> str:
    """Render as e.g. ``1 + 3/2 e1e2 - e1e4e5``; zero renders as ``0``."""
    d = x.dim
    keys = sorted(x._terms, key=lambda m: (blade_grade(d, m), m))
    parts: list[str] = []
    for i, m in enumerate(keys):
        c = x._terms[m]
        neg = c < 0
        a = -c if neg else c
        name = "".join(f"e{j}" for j in blade_indices(m))
        if not name:
            body = _fmt_coeff(a)
        elif a == 1:
            body = name
        else:
            body = f"{_fmt_coeff(a)} {name}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts) if parts else "0"


_TERM = re.compile(r"^\s*(?P<coeff>\d+(?:/\d+)?)?\s*(?P<blade>(?:e\d+)*)\s*$")


def parse_multivector(text: str, dim: int) -> Multivector:
    """Parse the format produced by :func:`format_multivector`.

    Generators may appear in any order; they are multiplied left to right.
    Both ``-`` and the unicode minus are accepted.
    """
    src = text.replace("−", "-")
    if not src.strip():
        raise ValueError("empty multivector text")
    chunks = re.split(r"([+-])", src)
    out = Multivector.zero(dim)
    sign = 1
    pending = False
    pos = 0
    for chunk in chunks:
        if chunk in ("+", "-"):
            if pending:
                raise ValueError(f"dangling sign at offset {pos} in {text!r}")
            sign = -1 if chunk == "-" else 1
            pending = True
            pos += 1
            continue
        if not chunk.strip():
            pos += len(chunk)
            continue
        mt = _TERM.match(chunk)
        if not mt or (mt.group("coeff") is None and not mt.group("blade")):
            at = pos + len(chunk) - len(chunk.lstrip())
            raise ValueError(f"cannot parse term {chunk.strip()!r} at offset {at} in {text!r}")
        c = Fraction(mt.group("coeff") or 1) * sign
        idx = [int(g) for g in re.findall(r"e(\d+)", mt.group("blade"))]
        out = out + Multivector.blade(dim, *idx, coeff=c)
        sign = 1
        pending = False
        pos += len(chunk)
    if pending:
        raise ValueError(f"trailing sign in {text!r}")
    return out
