"""Randomised exact property suites, shared by ``spun verify`` and the tests."""

from __future__ import annotations

import random
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Iterator

from . import linalg
from .clifford import (
    Multivector,
    alpha,
    blade_grade,
    cl0_basis,
    conjugate,
    embed,
    grade_select,
    grades,
    in_subspace,
    norm,
    parse_multivector,
    reverse,
    z0_basis,
)
from .flats import (
    affine_hull,
    chart,
    eta_inverse_lift,
    eta_project,
    f_ap_subspace,
    flat_intersect,
    l_ap_equations,
    l_ap_flat,
    tau_ap,
    tau_ap_inverse,
)
from .group import (
    SpinElement,
    gd_peel,
    is_spun_member,
    j_lift,
    random_fraction,
    random_spin,
    random_spun,
    random_vector,
    spun_action,
    spun_decompose,
    spun_from_parts,
    to_rigid_motion,
    two_term_coefficients,
    z0_coordinates,
)
from .reduction import sqdist


@dataclass
class Check:
    name: str
    total: int = 0
    failed: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.total > 0

    def record(self, passed: bool, note: str = "") -> None:
        self.total += 1
        if not passed:
            self.failed += 1
            if len(self.notes) < 3:
                self.notes.append(note or "assertion failed")

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"[{status}] {self.name}: {self.total - self.failed}/{self.total}"


class CheckSet:
    def __init__(self) -> None:
        self.checks: dict[str, Check] = {}

    def run(self, name: str, fn: Callable[[], bool], note: Callable[[], str] | None = None):
        c = self.checks.setdefault(name, Check(name))
        try:
            ok = bool(fn())
        except Exception as e:  # a crash inside a check is a failed check
            c.record(False, f"{type(e).__name__}: {e}")
            return
        c.record(ok, note() if (note and not ok) else "")

    def __iter__(self) -> Iterator[Check]:
        return iter(self.checks.values())


# samplers


def random_multivector(d: int, rng: random.Random, max_terms: int = 4) -> Multivector:
    top = 1 << (d + 2)
    return Multivector(
        d, {rng.randrange(top): random_fraction(rng, 3) for _ in range(rng.randint(1, max_terms))}
    )


def random_z0(d: int, rng: random.Random, max_terms: int = 4) -> Multivector:
    basis = z0_basis(d)
    return Multivector(d, {rng.choice(basis): random_fraction(rng, 3) for _ in range(max_terms)})


def random_pure(d: int, m: int, rng: random.Random, masks: list[int]) -> Multivector:
    """Nonzero element built from blades of grade m chosen among ``masks``."""
    pool = [k for k in masks if blade_grade(d, k) == m]
    while True:
        x = Multivector(
            d, {rng.choice(pool): random_fraction(rng, 3) for _ in range(rng.randint(1, 3))}
        )
        if x:
            return x


def random_orthogonal_pair(d: int, rng: random.Random):
    while True:
        u = random_vector(rng, d)
        if any(u):
            break
    v = random_vector(rng, d)
    k = linalg.dot(u, v) / linalg.dot(u, u)
    return u, tuple(b - k * a for a, b in zip(u, v))


def distance_matched(d: int, rng: random.Random):
    """(a, b, p, q) with |ab| = |pq| > 0: q - p is a random rotation of a - b."""
    while True:
        a, b, p = (random_vector(rng, d) for _ in range(3))
        if a != b:
            break
    w = random_spin(d, rng, pairs=2).rotate([x - y for x, y in zip(a, b)])
    return a, b, p, tuple(x + y for x, y in zip(p, w))


# suites


def algebra_suite(d: int, trials: int, rng: random.Random, cs: CheckSet) -> None:
    g = [Multivector.gen(d, j) for j in range(1, d + 3)]
    for j in range(d + 1):
        cs.run("generators square to -1", lambda: g[j] * g[j] == -1)
        for k in range(j + 1, d + 1):
            cs.run("generators anticommute", lambda: g[j] * g[k] == -(g[k] * g[j]))
        cs.run("degenerate generator is central", lambda: g[d + 1] * g[j] == g[j] * g[d + 1])
    cs.run("degenerate generator squares to 0", lambda: (g[d + 1] * g[d + 1]).is_zero())
    for _ in range(trials):
        x, y, z = (random_multivector(d, rng) for _ in range(3))
        cs.run("associativity", lambda: (x * y) * z == x * (y * z), lambda: f"x={x} y={y} z={z}")
        cs.run("distributivity", lambda: x * (y + z) == x * y + x * z)
        cs.run("alpha is an involution", lambda: alpha(alpha(x)) == x)
        cs.run("reverse is an involution", lambda: reverse(reverse(x)) == x)
        cs.run("alpha and reverse commute", lambda: alpha(reverse(x)) == reverse(alpha(x)))
        cs.run("alpha is multiplicative", lambda: alpha(x * y) == alpha(x) * alpha(y))
        cs.run("reverse is anti-multiplicative", lambda: reverse(x * y) == reverse(y) * reverse(x))
        cs.run("conjugate is anti-multiplicative", lambda: conjugate(x * y) == conjugate(y) * conjugate(x))
        u, v = random_orthogonal_pair(d, rng)
        iu, iv = embed(u), embed(v)
        cs.run("orthogonal vectors anticommute", lambda: iu * iv == -(iv * iu))
        cs.run("vector squares to minus its length", lambda: iu * iu == -linalg.dot(u, u))
        cs.run("vector norm is squared length", lambda: norm(iu) == linalg.dot(u, u))
        w = random_z0(d, rng)
        cs.run("m-term decomposition is complete",
               lambda: sum((grade_select(w, m) for m in range(0, d + 2, 2)), Multivector.zero(d)) == w)
    for _ in range(max(1, trials // 4)):
        a, b = random_spun(d, rng), random_spun(d, rng)
        cs.run("norm is multiplicative on the group",
               lambda: norm(a.value * b.value) == norm(a.value) * norm(b.value) == 1)


def worked_examples(cs: CheckSet) -> None:
    x = parse_multivector("e3e4 + e1e5e6 + e2e6", 4)
    cs.run("worked example: alpha", lambda: alpha(x) == parse_multivector("e3e4 + e1e5e6 - e2e6", 4))
    cs.run("worked example: reverse",
           lambda: reverse(x) == parse_multivector("-e3e4 - e1e5e6 + e2e6", 4))
    y = parse_multivector("e1 + e1e2", 2)
    cs.run("worked example: norm", lambda: norm(y) == 2)
    cs.run("worked example: conjugate", lambda: conjugate(y) == parse_multivector("-e1 - e1e2", 2))


def group_suite(d: int, trials: int, rng: random.Random, cs: CheckSet) -> None:
    one = Multivector.scalar(d)
    for _ in range(trials):
        x, y = random_spun(d, rng), random_spun(d, rng)
        X, Y = x.value, y.value
        xc = conjugate(X)
        cs.run("norm is one", lambda: norm(X) == 1)
        cs.run("inverse is the conjugate", lambda: X * xc == one and xc * X == one)
        cs.run("closed under products", lambda: is_spun_member(X * Y))
        cs.run("decomposition round-trips",
               lambda: spun_decompose(X) == (x.gamma, x.translation_v)
               and spun_from_parts(x.gamma, x.translation_v).value == X)
        cs.run("rotation part is multiplicative",
               lambda: spun_decompose(X * Y)[0].value == x.gamma.value * y.gamma.value)
        u, w = random_vector(rng, d), random_vector(rng, d)
        cs.run("action preserves distances",
               lambda: sqdist(spun_action(x, u), spun_action(x, w)) == sqdist(u, w))
        cs.run("action is a homomorphism",
               lambda: spun_action(X * Y, w) == spun_action(x, spun_action(y, w)))
        cs.run("rigid motion agrees with the action",
               lambda: to_rigid_motion(x).apply(w) == spun_action(x, w))
        cs.run("x and -x give the same motion", lambda: to_rigid_motion(X) == to_rigid_motion(-X))
        cs.run("distinct elements give distinct motions",
               lambda: X in (Y, -Y) or to_rigid_motion(X) != to_rigid_motion(Y))
        g = random_spin(d, rng, pairs=rng.choice((1, 2))).value * rng.choice((1, 2, Fraction(1, 3)))
        def peel():
            h, branch = gd_peel(g)
            if branch == "e_{d-1}e_d":
                f = Multivector.gen(d, d - 1) * Multivector.gen(d, d)
            else:
                f = Multivector.gen(d, d) * embed(branch) - 1
            return in_subspace(h.value, "Cl", d - 1) and h.value * f == g
        cs.run("peeling reconstructs the rotor", peel)


def quadric_suite(trials: int, rng: random.Random, cs: CheckSet) -> None:
    for _ in range(trials):
        x = z0_coordinates(random_spun(3, rng).value)
        cs.run("Spun(3) lies on the quadric x1x8 - x2x7 + x3x6 - x4x5 = 0",
               lambda: x[0] * x[7] - x[1] * x[6] + x[2] * x[5] - x[3] * x[4] == 0,
               lambda: f"coords={x}")
        cs.run("Spun(3) has x1^2 + x2^2 + x3^2 + x4^2 = 1",
               lambda: sum(c * c for c in x[:4]) == 1)
        lam = {s: random_fraction(rng, 3) for s in chart(3).slots}
        j = j_lift(3, random_fraction(rng, 3) or 1, lam)
        y = z0_coordinates(j.value)
        cs.run("J_3 lies on the quadric",
               lambda: y[0] * y[7] - y[1] * y[6] + y[2] * y[5] - y[3] * y[4] == 0)
        cs.run("J_3 rotation coordinates carry the norm", lambda: sum(c * c for c in y[:4]) == j.normsq)


def flat_suite(d: int, trials: int, rng: random.Random, cs: CheckSet) -> None:
    full = chart(d).size
    for _ in range(trials):
        a, p = random_vector(rng, d), random_vector(rng, d)
        F = f_ap_subspace(a, p)
        L = l_ap_flat(a, p)
        cs.run("dim F_ap = 2^(d-1)", lambda: F.dim == 2 ** (d - 1))
        cs.run("dim L_ap = C(d,2)", lambda: L.dim == comb(d, 2))
        cs.run("linear system solves to L_ap", lambda: l_ap_equations(a, p).solution_flat() == L)
        x = random_multivector(d, rng)
        cs.run("tau_ap is inverted", lambda: tau_ap_inverse(tau_ap(x, a, p), a, p) == x)
        gamma = random_spin(d, rng)
        t = tau_ap(gamma.value, a, p)
        if t.scalar_part() != 0:
            cs.run("tau_ap(Spin) maps a to p",
                   lambda: spun_action(t, a) == p)
            cs.run("tau_ap(Spin) projects into L_ap", lambda: L.contains(eta_project(t)))

        a, b, p, q = distance_matched(d, rng)
        if rng.random() < 0.25:
            q = tuple(pp + aa - bb for pp, aa, bb in zip(p, a, b))
        Fm = flat_intersect(f_ap_subspace(a, p), f_ap_subspace(b, q))
        Lm = flat_intersect(l_ap_flat(a, p), l_ap_flat(b, q))
        translate = all(x - y == z - w for x, y, z, w in zip(a, b, q, p))
        cs.run("matched pairs: dim F_ap meet F_bq = 2^(d-2)", lambda: Fm.dim == 2 ** (d - 2))
        cs.run("matched pairs: L_ap meet L_bq empty iff a-b = q-p",
               lambda: Lm.is_empty == translate)
        if not translate:
            cs.run("matched pairs: dim L_ap meet L_bq = C(d-1,2)", lambda: Lm.dim == comb(d - 1, 2))

        a, b, p, q = (random_vector(rng, d) for _ in range(4))
        if rng.random() < 0.25:
            b = a  # shared source, distinct targets
        if sqdist(a, b) != sqdist(p, q) and p != q:
            Fx = flat_intersect(f_ap_subspace(a, p), f_ap_subspace(b, q))
            cs.run("mismatched pairs: F_ap meet F_bq = 0", lambda: Fx.dim == 0)
            cs.run("mismatched pairs: hull(L_ap, L_bq) is everything",
                   lambda: affine_hull(l_ap_flat(a, p), l_ap_flat(b, q)).dim == full)


def eta_suite(d: int, trials: int, rng: random.Random, cs: CheckSet) -> None:
    for _ in range(trials):
        x = random_spun(d, rng).value
        if x.scalar_part() == 0:
            continue
        if x.scalar_part() < 0:
            x = -x
        y = eta_project(x)
        lift = eta_inverse_lift(d, y)
        cs.run("eta lift inverts the projection", lambda: lift.value == x / x.scalar_part())
        cs.run("eta projection is scale invariant", lambda: eta_project(x * 3) == y)
        r = random_fraction(rng, 5) or Fraction(1)
        lam = {s: random_fraction(rng, 5) for s in chart(d).slots if rng.random() < 0.7}
        def readback():
            g = j_lift(d, r, lam).value
            want = {s: lam.get(s, Fraction(0)) for s in chart(d).slots}
            return g.scalar_part() == r and two_term_coefficients(g) == want
        cs.run("j_lift reproduces prescribed coefficients", readback)


def mterm_suite(d: int, trials: int, rng: random.Random, cs: CheckSet) -> None:
    cl0 = cl0_basis(d)
    cl0_low = cl0_basis(d, d - 1)
    z0 = z0_basis(d)
    for _ in range(trials):
        m = rng.choice(range(2, d + 1, 2))
        x = random_pure(d, m, rng, cl0)
        gamma = random_spin(d, rng, pairs=rng.choice((1, 2))).value
        cs.run("conjugation by Spin keeps m-terms",
               lambda: grades(gamma * x * conjugate(gamma)) == {m})

        m = rng.choice(range(0, d, 2))
        x = random_pure(d, m, rng, cl0_low)
        a = random_vector(rng, d)
        if rng.random() < 0.2:
            a = a[:-1] + (Fraction(-1),)
        ed = Multivector.gen(d, d)
        y = x * ed * (embed(a) + ed)
        cs.run("x e_d (i(a) + e_d) has only m- and (m+2)-terms", lambda: grades(y) <= {m, m + 2})
        if a[-1] != -1:
            cs.run("x e_d (i(a) + e_d) keeps an m-term", lambda: m in grades(y))

        m = rng.choice(range(0, d + 2, 2))
        z = random_pure(d, m, rng, z0)
        a, p = random_vector(rng, d), random_vector(rng, d)
        t = tau_ap(z, a, p)
        cs.run("tau_ap has only m- and (m+2)-terms", lambda: grades(t) <= {m, m + 2})
        cs.run("tau_ap keeps an m-term", lambda: m in grades(t))


SUITES = ("algebra", "group", "quadric", "flat", "eta", "mterm")


def run_suites(d: int, trials: int, seed: int, only: tuple[str, ...] = SUITES) -> list[Check]:
    cs = CheckSet()
    rng = random.Random(seed)
    try:
        if "algebra" in only:
            worked_examples(cs)
            algebra_suite(d, trials, rng, cs)
        if "group" in only:
            group_suite(d, trials, rng, cs)
        if "quadric" in only and d == 3:
            quadric_suite(trials, rng, cs)
        if "flat" in only:
            flat_suite(d, trials, rng, cs)
        if "eta" in only:
            eta_suite(d, trials, rng, cs)
        if "mterm" in only:
            mterm_suite(d, trials, rng, cs)
    except Exception as e:  # a sampler crashing is itself a failure
        c = Check("suite ran to completion")
        c.record(False, "".join(traceback.format_exception_only(type(e), e)).strip())
        cs.checks[c.name] = c
    return list(cs)
