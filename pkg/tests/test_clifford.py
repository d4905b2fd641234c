from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import poly_mul, to_poly
from spun.clifford import (
    Multivector,
    alpha,
    blade_grade,
    conjugate,
    embed,
    format_multivector,
    grade_select,
    in_subspace,
    norm,
    parse_multivector,
    reverse,
    z0_basis,
)


def mv(text, d):
    return parse_multivector(text, d)


def E(d, *idx):
    return Multivector.blade(d, *idx)


# strategies

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def multivectors(draw, d=None, max_terms=5):
    d = draw(st.integers(2, 6)) if d is None else d
    terms = draw(
        st.dictionaries(st.integers(0, (1 << (d + 2)) - 1), fractions, max_size=max_terms)
    )
    return Multivector(d, terms)


@st.composite
def triples(draw):
    d = draw(st.integers(2, 6))
    return tuple(draw(multivectors(d)) for _ in range(3))


class TestRing:
    def test_additive_inverse(self):
        assert (E(3, 1) + -E(3, 1)).is_zero()

    def test_scalar_identity(self):
        assert Multivector.scalar(3, Fraction(1, 2)) * 2 == Multivector.scalar(3)

    def test_cancellation(self):
        assert (mv("e1 + e1e2", 3) - E(3, 1)) == E(3, 1, 2)

    def test_zero_coefficients_dropped(self):
        assert len(Multivector(2, {1: 0, 2: 3})) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            E(2, 1) + E(3, 1)
        with pytest.raises(ValueError, match="dimension mismatch"):
            E(2, 1) * E(3, 1)

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            Multivector(2, {0: 0.5})

    def test_mask_out_of_range(self):
        with pytest.raises(ValueError):
            Multivector(2, {1 << 4: 1})


class TestProduct:
    def test_generator_squares(self):
        assert E(3, 1) * E(3, 1) == -1
        assert E(4, 5) * E(4, 5) == -1

    def test_degenerate_square(self):
        assert (E(4, 6) * E(4, 6)).is_zero()

    def test_bivector_product(self):
        assert E(3, 1, 2) * E(3, 2, 3) == -E(3, 1, 3)

    def test_degenerate_is_transparent_to_sign(self):
        assert E(2, 3, 4) * E(2, 1) == -E(2, 1, 3, 4)

    def test_blade_constructor_orders_by_product(self):
        assert E(3, 2, 1) == -E(3, 1, 2)

    @given(triples())
    @settings(max_examples=150, deadline=None)
    def test_associative(self, xyz):
        x, y, z = xyz
        assert (x * y) * z == x * (y * z)

    @given(triples())
    @settings(max_examples=150, deadline=None)
    def test_matches_word_rewriting_oracle(self, xyz):
        x, y, _ = xyz
        assert to_poly(x * y) == poly_mul(x.dim, to_poly(x), to_poly(y))

    @pytest.mark.parametrize("d", range(2, 7))
    def test_generator_relations(self, d):
        gens = [Multivector.gen(d, j) for j in range(1, d + 3)]
        for j in range(d + 1):
            for k in range(j + 1, d + 1):
                assert gens[j] * gens[k] == -(gens[k] * gens[j])
            assert gens[d + 1] * gens[j] == gens[j] * gens[d + 1]


class TestInvolutions:
    WORKED = "e3e4 + e1e5e6 + e2e6"

    def test_alpha_worked_example(self):
        assert alpha(mv(self.WORKED, 4)) == mv("e3e4 + e1e5e6 - e2e6", 4)

    def test_reverse_worked_example(self):
        assert reverse(mv(self.WORKED, 4)) == mv("-e3e4 - e1e5e6 + e2e6", 4)

    def test_simple_cases(self):
        assert alpha(Multivector.scalar(2)) == 1
        assert alpha(E(2, 1)) == -E(2, 1)
        assert reverse(Multivector.scalar(2)) == 1
        assert reverse(E(2, 1, 2)) == -E(2, 1, 2)

    def test_norm_and_conjugate_examples(self):
        x = mv("e1 + e1e2", 2)
        assert norm(x) == 2
        assert conjugate(x) == mv("-e1 - e1e2", 2)
        assert norm(Multivector.scalar(2)) == 1

    @given(multivectors())
    @settings(max_examples=100, deadline=None)
    def test_involutive(self, x):
        assert alpha(alpha(x)) == x
        assert reverse(reverse(x)) == x
        assert alpha(reverse(x)) == reverse(alpha(x)) == conjugate(x)

    @given(triples())
    @settings(max_examples=100, deadline=None)
    def test_conjugate_reverses_products(self, xyz):
        x, y, _ = xyz
        assert conjugate(x * y) == conjugate(y) * conjugate(x)
        assert alpha(x * y) == alpha(x) * alpha(y)


class TestEmbedding:
    def test_basis_image(self):
        assert embed((1, 0, 0)) == E(3, 1)

    def test_three_four_five(self):
        v = embed((3, 4))
        assert v * conjugate(v) == 25

    @given(st.lists(fractions, min_size=2, max_size=6))
    def test_square_is_minus_length(self, v):
        iv = embed(v)
        length = sum(c * c for c in v)
        assert iv * iv == -length
        assert norm(iv) == length

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            embed((1, 2), 3)


class TestGrades:
    def test_odd_grade_rejected(self):
        with pytest.raises(ValueError, match="not in Z_2"):
            grade_select(mv("1 + e1e2 + e1e2e3e4", 2), 2)

    def test_scalar_part(self):
        assert grade_select(mv("1 + e1e2", 2), 0) == 1

    def test_pair_counts_once(self):
        x = mv("e1e2 + e1e2e3e4e5", 3)
        assert grade_select(x, 4) == E(3, 1, 2, 3, 4, 5)
        assert blade_grade(3, 0b11111) == 4

    def test_z0_basis_order_d3(self):
        names = [format_multivector(Multivector(3, {m: 1})) for m in z0_basis(3)]
        assert names == ["1", "e1e2", "e1e3", "e2e3", "e1e4e5", "e2e4e5", "e3e4e5", "e1e2e3e4e5"]

    @pytest.mark.parametrize("d", range(2, 7))
    def test_z0_dimension(self, d):
        assert len(z0_basis(d)) == 2**d

    def test_membership(self):
        assert in_subspace(mv("1 + e1e2", 3), "Cl0")
        assert not in_subspace(E(3, 1), "Cl0")
        assert in_subspace(E(3, 1, 4, 5), "Z0")
        assert not in_subspace(E(3, 4), "Z0")
        assert in_subspace(mv("e1 - 2 e3", 3), "iRd")
        assert in_subspace(E(3, 1, 2), "Cl", 2)
        assert not in_subspace(E(3, 1, 3), "Cl", 2)

    @given(st.integers(2, 6).flatmap(lambda d: st.dictionaries(
        st.sampled_from(z0_basis(d)), fractions, max_size=6).map(lambda t: Multivector(d, t))))
    def test_grade_decomposition_complete(self, x):
        total = sum((grade_select(x, m) for m in range(0, x.dim + 2, 2)), Multivector.zero(x.dim))
        assert total == x


class TestText:
    def test_format(self):
        x = Multivector(3, {0: 1, 0b11: Fraction(3, 2), 0b11001: -1})
        assert format_multivector(x) == "1 + 3/2 e1e2 - e1e4e5"
        assert format_multivector(Multivector.zero(2)) == "0"
        assert format_multivector(-E(2, 1)) == "-e1"

    @given(multivectors())
    def test_round_trip(self, x):
        assert parse_multivector(format_multivector(x), x.dim) == x

    def test_unicode_minus(self):
        assert parse_multivector("1 − e1e2", 2) == mv("1 - e1e2", 2)

    @pytest.mark.parametrize("bad", ["", "1 + + e1", "e1 x", "1 +"])
    def test_parse_errors(self, bad):
        with pytest.raises(ValueError):
            parse_multivector(bad, 2)

    def test_error_reports_offset(self):
        with pytest.raises(ValueError, match="offset 4"):
            parse_multivector("1 + q2", 2)
