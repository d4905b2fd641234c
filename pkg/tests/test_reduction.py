import json
import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import quadruples
from spun.flats import AffineFlat, Parametrization, chart, l_ap_flat
from spun.group import random_vector
from spun.reduction import (
    GenericityError,
    PointConfig,
    build_flat_family,
    distance_stats,
    lattice,
    q_prime_count,
    random_slice,
    rich_points,
    run_reduction,
    sample_generic_slice,
)

TWO = PointConfig.of(2, [(0, 0), (1, 0)])
SQUARE = lattice(2, 2)
CUBE = lattice(3, 2)


class TestPointConfig:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="distinct"):
            PointConfig.of(2, [(0, 0), (0, 0)])

    def test_rejects_single_point(self):
        with pytest.raises(ValueError):
            PointConfig.of(2, [(0, 0)])

    def test_rejects_ragged(self):
        with pytest.raises(ValueError):
            PointConfig.of(2, [(0, 0), (1, 0, 0)])

    def test_json_round_trip(self):
        cfg = PointConfig.of(2, [(Fraction(1, 2), 0), (3, -1)])
        obj = cfg.to_json()
        assert obj == {"dimension": 2, "points": [["1/2", "0"], ["3", "-1"]]}
        assert PointConfig.from_json(json.loads(json.dumps(obj))) == cfg

    @pytest.mark.parametrize("bad", [
        {"dimension": 2},
        {"dimension": "2", "points": [["0", "0"], ["1", "0"]]},
        {"dimension": 2, "points": [["0", "0"], ["1", 0.5]]},
        {"dimension": 2, "points": [["0", "0"], ["1", "1/0"]]},
    ])
    def test_from_json_rejects(self, bad):
        with pytest.raises(ValueError):
            PointConfig.from_json(bad)

    def test_lattice_sizes(self):
        assert lattice(3, 2).n == 8
        assert lattice(2, 3).n == 9


class TestDistanceStats:
    def test_unit_square(self):
        s = distance_stats(SQUARE)
        assert s.D == 2
        assert [c for _, c in s.classes] == [8, 4]
        assert s.Q == 80 and s.cauchy_schwarz

    def test_cube(self):
        s = distance_stats(CUBE)
        assert s.D == 3
        assert [c for _, c in s.classes] == [24, 24, 8]
        assert s.Q == 1216
        assert 4 * s.D * s.Q == 14592 > 8**4

    def test_two_points(self):
        s = distance_stats(TWO)
        assert s.D == 1 and s.Q == 4
        # equality case: 4 D Q = n^4, so the strict bound does not hold
        assert 4 * s.D * s.Q == 2**4
        assert not s.cauchy_schwarz


class TestQPrime:
    def test_two_points(self):
        assert q_prime_count(TWO) == 2
        assert q_prime_count(TWO, restrict_family=True) == 0

    @pytest.mark.parametrize("cfg", [TWO, SQUARE, lattice(2, 3), CUBE,
                                     PointConfig.of(2, [(0, 0), (1, 0), (2, 0)])])
    def test_against_brute_force(self, cfg):
        q, qp = quadruples(cfg.points)
        _, qpf = quadruples(cfg.points, restrict=True)
        assert distance_stats(cfg).Q == q
        assert q_prime_count(cfg) == qp
        assert q_prime_count(cfg, restrict_family=True) == qpf
        assert 2 * qp >= q

    @given(st.integers(2, 3), st.integers(0, 2**32))
    @settings(max_examples=25, deadline=None)
    def test_random_sets(self, d, seed):
        rng = random.Random(seed)
        pts = {tuple(Fraction(rng.randint(0, 3)) for _ in range(d)) for _ in range(rng.randint(2, 6))}
        if len(pts) < 2:
            return
        cfg = PointConfig(d, tuple(sorted(pts)))
        q, qp = quadruples(cfg.points)
        assert q_prime_count(cfg) == qp and 2 * qp >= q


class TestFamily:
    def test_sizes(self):
        assert len(build_flat_family(TWO)) == 2
        assert len(build_flat_family(PointConfig.of(2, [(0, 0), (1, 0), (0, 1)]))) == 6

    def test_flat_dimension(self):
        for _, f in build_flat_family(CUBE):
            assert f.dim == comb(3, 2)

    def test_labels_are_distinct_flats(self):
        fam = build_flat_family(SQUARE)
        assert len({f for _, f in fam}) == len(fam)


class TestSlice:
    def test_d2_identity(self):
        res = sample_generic_slice(2, [], seed=5)
        assert res.param == Parametrization.identity(3) and res.retries == 0

    def test_cube_slice_is_generic(self):
        flats = [f for _, f in build_flat_family(CUBE)]
        res = sample_generic_slice(3, flats, seed=0)
        assert res.param.dim == 5 and res.param.ambient == 6

    def test_non_generic_candidate_rejected(self):
        flats = [l_ap_flat((0, 0, 0), (1, 0, 0)), l_ap_flat((1, 0, 0), (0, 0, 0))]
        f = flats[0]
        rng = random.Random(1)
        bad = Parametrization(f.base, f.directions + tuple(random_vector(rng, 6) for _ in range(2)))
        res = sample_generic_slice(3, flats, seed=0, initial=bad)
        assert res.retries >= 1
        assert "dimension 3" in res.rejections[0]

    def test_budget_exhausted(self):
        flats = [l_ap_flat((0, 0, 0), (1, 0, 0))]
        # a 3-flat posing as a pairwise meet: every 5-flat cuts it in a plane
        with pytest.raises(GenericityError, match="2 attempts"):
            sample_generic_slice(3, flats, seed=0, budget=2, meets=flats)

    def test_random_slice_bounds(self):
        h = random_slice(3, random.Random(0), bound=7)
        for v in (h.base,) + h.directions:
            assert all(abs(c.numerator) <= 7 and c.denominator <= 7 for c in v)


class TestRichPoints:
    def test_disjoint(self):
        a = AffineFlat.make(3, (0, 0, 0), [(1, 0, 0)])
        b = AffineFlat.make(3, (0, 0, 1), [(0, 1, 0)])
        hist, pairs, _ = rich_points([a, b])
        assert hist.entries == () and pairs == 0

    def test_three_concurrent_lines(self):
        lines = [AffineFlat.make(3, (0, 0, 0), [v]) for v in ((1, 0, 0), (0, 1, 0), (1, 1, 1))]
        hist, pairs, incid = rich_points(lines)
        assert hist.entries == ((3, 1),) and pairs == 6
        assert incid == {(0, 0, 0): (0, 1, 2)}
        assert hist.at_least(2) == 1 and hist.m(2) == 0

    def test_positive_dimensional_meet_rejected(self):
        a = AffineFlat.make(3, (0, 0, 0), [(1, 0, 0), (0, 1, 0)])
        b = AffineFlat.make(3, (0, 0, 0), [(1, 0, 0), (0, 0, 1)])
        with pytest.raises(GenericityError):
            rich_points([a, b])


class TestRunReduction:
    def test_two_points(self):
        r = run_reduction(TWO, seed=0)
        assert r.stats.Q == 4 and r.q_prime == 2 and r.q_prime_family == 0
        assert r.histogram.entries == () and r.pair_count == 0
        assert r.verdicts["A"] and r.verdicts["B"] and r.verdicts["D"] and r.verdicts["E"]
        assert r.verdicts["C"] is False  # 16 = 16, see TestDistanceStats

    def test_square_histogram_against_oracle(self):
        r = run_reduction(SQUARE, seed=0)
        _, qpf = quadruples(SQUARE.points, restrict=True)
        assert r.pair_count == qpf == 32
        assert r.ok

    def test_report_json_schema(self):
        obj = run_reduction(SQUARE, seed=3).to_json()
        for key in ("n", "D", "Q", "Q_prime", "Q_prime_family", "flats", "slice_seed",
                    "retries", "histogram", "pair_count", "verdicts"):
            assert key in obj
        assert obj["Q"] == "80" and obj["n"] == "4"
        assert set(obj["verdicts"]) == set("ABCDE")
        assert all(isinstance(v, str) for v in obj["histogram"].values())

    def test_deterministic_and_parallel_invariant(self, monkeypatch):
        cfg = lattice(2, 3)
        base = json.dumps(run_reduction(cfg, seed=4).to_json(), sort_keys=True)
        assert json.dumps(run_reduction(cfg, seed=4).to_json(), sort_keys=True) == base
        monkeypatch.setenv("SPUN_THREADS", "2")
        assert json.dumps(run_reduction(cfg, seed=4).to_json(), sort_keys=True) == base

    def test_bad_thread_env(self, monkeypatch):
        monkeypatch.setenv("SPUN_THREADS", "many")
        with pytest.raises(ValueError, match="SPUN_THREADS"):
            run_reduction(TWO)

    def test_three_dimensional_pair(self):
        cfg = PointConfig.of(3, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
        r = run_reduction(cfg, seed=2)
        _, qpf = quadruples(cfg.points, restrict=True)
        assert r.pair_count == qpf and r.ok
        assert chart(3).size == 6
