from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mitlab.errors import DimensionError
from mitlab.model import SeriesConfig, build_cluster_series, model, pullback_blowup, scale_model
from mitlab.thresholds import (
    cluster_report,
    equisingular_gap_witness,
    integrability_threshold,
    jumping_spectrum,
    monomial_membership,
    multiplier_staircase,
    spectrum_to_dict,
    spectrum_to_tsv,
)


def series(M, K):
    return build_cluster_series(SeriesConfig(M=M, K=K))


def scan_threshold(m, a, t_max=64.0, steps=4000):
    """Independent dense-ray-scan oracle for the threshold (float).

    Coarse scan over rays (1, t) plus the second axis, then two refinement
    rounds around the best t (the true minimum may sit at a kink).
    """
    b = (float(a[0]) + 1.0, float(a[1]) + 1.0)

    def ratio(v):
        val = sum(
            float(t.weight) * min(float(mo[0]) * v[0] + float(mo[1]) * v[1] for mo in t.monomials)
            for t in m.terms
        )
        return (b[0] * v[0] + b[1] * v[1]) / val if val > 0 else float("inf")

    lo, hi = 0.0, t_max
    best_t, best = 0.0, ratio((1.0, 0.0))
    for _ in range(3):
        step = (hi - lo) / steps
        for i in range(steps + 1):
            t = lo + i * step
            r = ratio((1.0, t))
            if r < best:
                best, best_t = r, t
        lo, hi = max(0.0, best_t - 2 * step), best_t + 2 * step
    return min(best, ratio((0.0, 1.0)))


class TestIntegrabilityThreshold:
    def test_series_k1_constant_monomial(self):
        res = integrability_threshold(series(2, 1), (0, 0))
        assert res.value == F(5, 6)
        assert res.argmin_ray == (F(1), F(1, 4))
        assert res.attained
        assert abs(scan_threshold(series(2, 1), (0, 0)) - 5 / 6) < 1e-3

    def test_series_k1_z1(self):
        res = integrability_threshold(series(2, 1), (1, 0))
        assert res.value == F(3, 2)
        assert abs(scan_threshold(series(2, 1), (1, 0)) - 1.5) < 1e-4

    def test_bounded_potential_is_infinite(self):
        res = integrability_threshold(model(2, [(1, [(0, 0), (1, 0)])]), (0, 0))
        assert res.is_infinite and res.argmin_ray is None and not res.attained

    def test_axis_breakpoint_only_model(self):
        # both axis rays have zero valuation; the interior breakpoint does not
        m = model(2, [(1, [(1, 0), (0, 1)])])
        res = integrability_threshold(m, (0, 0))
        assert res.value == 2 and res.argmin_ray == (F(1), F(1))

    def test_pure_log_axis_cap(self):
        # the z2 direction is unobstructed, the z1 direction caps at a1 + 1
        m = model(2, [(1, [(1, 0)])])
        for a2 in (0, 1, 5):
            assert integrability_threshold(m, (0, a2)).value == 1
        assert integrability_threshold(m, (1, 0)).value == 2

    def test_dimension_guard(self):
        with pytest.raises(DimensionError):
            integrability_threshold(model(3, [(1, [(1, 0, 0)])]), (0, 0, 0))

    def test_rational_exponent_monomial(self):
        res = integrability_threshold(series(2, 1), (F(1, 2), 0))
        assert res.value == F(7, 6)  # breakpoint ratio (3/2 + 1/4) / (3/2)
        assert abs(scan_threshold(series(2, 1), (F(1, 2), 0)) - 7 / 6) < 1e-4

    @given(st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=30, deadline=None)
    def test_matches_dense_scan(self, a1, a2):
        m = model(2, [("2/3", [(1, 2), (3, 0)]), ("1/5", [(0, 1), (2, 2)])])
        res = integrability_threshold(m, (a1, a2))
        assert not res.is_infinite
        assert abs(float(res.value) - scan_threshold(m, (a1, a2))) < 2e-3
        # the recorded argmin ray actually achieves the value
        v = res.argmin_ray
        from mitlab.model import ray_valuation

        num = v[0] * (a1 + 1) + v[1] * (a2 + 1)
        assert num / ray_valuation(m, v) == res.value


class TestMembership:
    def test_below_and_above(self):
        m = series(2, 1)
        assert monomial_membership(m, (0, 0), F(4, 5))
        assert not monomial_membership(m, (0, 0), F(9, 10))

    def test_strict_at_threshold(self):
        m = series(2, 1)
        assert not monomial_membership(m, (0, 0), F(5, 6))

    def test_zero_scale_always_member(self):
        for m in (series(2, 3), model(2, [(1, [(0, 0), (1, 0)])])):
            assert monomial_membership(m, (0, 0), 0)
            assert monomial_membership(m, (4, 7), 0)


class TestSpectrum:
    def test_series_k1_box(self):
        # brute-force oracle over the box: thresholds are min(1 + a1, (5 + 4a1 + a2)/6)
        table = jumping_spectrum(series(2, 1), 2, F(8, 5))
        brute = {}
        for a1 in range(3):
            for a2 in range(3):
                c = min(F(1 + a1), F(5 + 4 * a1 + a2, 6))
                if c <= F(8, 5):
                    brute.setdefault(c, []).append((a1, a2))
        assert table.values() == tuple(sorted(brute))
        assert table.values() == (F(5, 6), F(1), F(3, 2))
        assert dict(table.entries)[F(1)] == ((0, 1), (0, 2))
        assert dict(table.entries)[F(5, 6)] == ((0, 0),)

    def test_pure_log_line(self):
        table = jumping_spectrum(model(2, [(1, [(1, 0)])]), 1, 3)
        assert table.values() == (F(1), F(2))
        assert dict(table.entries)[F(1)] == ((0, 0), (0, 1))
        assert dict(table.entries)[F(2)] == ((1, 0), (1, 1))

    def test_deeper_truncation_lowers_threshold(self):
        t1 = jumping_spectrum(series(2, 1), 0, 1)
        t2 = jumping_spectrum(series(2, 2), 0, 1)
        assert t2.values()[0] < t1.values()[0] < F(5, 6) + F(1, 100)
        assert t2.values()[0] == F(5, 7)  # breakpoint enumeration at K = 2

    def test_strictly_increasing(self):
        table = jumping_spectrum(series(2, 2), 3, 4)
        vals = table.values()
        assert all(x < y for x, y in zip(vals, vals[1:]))

    def test_serialization(self):
        table = jumping_spectrum(series(2, 1), 1, 2)
        tsv = spectrum_to_tsv(table)
        assert tsv.splitlines()[0] == "threshold_num\tthreshold_den\twitness_a1\twitness_a2"
        assert "5\t6\t0\t0" in tsv
        d = spectrum_to_dict(table)
        assert d["entries"][0]["threshold"] == "5/6"


class TestStaircase:
    def brute(self, m, c, d):
        members = {
            (a1, a2)
            for a1 in range(d + 1)
            for a2 in range(d + 1)
            if monomial_membership(m, (a1, a2), c)
        }
        return {
            p
            for p in members
            if not any(q != p and q[0] <= p[0] and q[1] <= p[1] for q in members)
        }

    def test_series_k1_at_scale_one(self):
        # the z1 = 0 hyperplane carries Lelong number 1, so no pure z2 power
        # is ever integrable at scale 1: the ideal is exactly (z1)
        got = multiplier_staircase(series(2, 1), 1, 6)
        assert set(got) == self.brute(series(2, 1), F(1), 6) == {(1, 0)}

    def test_series_k2_at_scale_one(self):
        got = multiplier_staircase(series(2, 2), 1, 8)
        assert set(got) == self.brute(series(2, 2), F(1), 8) == {(1, 0)}

    def test_zero_scale(self):
        assert multiplier_staircase(series(2, 2), 0, 5) == ((0, 0),)

    def test_two_corner_staircase(self):
        m = model(2, [(1, [(1, 0), (0, 1)])])  # thresholds (a1 + a2 + 2) / min-val
        got = multiplier_staircase(m, F(5, 2), 4)
        assert set(got) == self.brute(m, F(5, 2), 4)
        assert got == ((0, 1), (1, 0))

    def test_interior_ray_generator_grows_geometrically(self):
        # away from the coordinate axes, the least m with every interior
        # breakpoint ratio above 1 grows like M^(K+1) - 2: the z2 obstruction
        # escapes to infinite degree as the truncation deepens, which is how
        # the truncations witness that the full ideal collapses to (z1)
        from mitlab.model import ray_valuation

        for K, expect in [(1, 2), (2, 6), (3, 14), (4, 30)]:
            cfg = SeriesConfig(M=2, K=K)
            mdl = series(2, K)

            def interior_ok(m):
                for j in range(1, K + 1):
                    ray = (F(1), F(1, cfg.degree(j)))
                    num = ray[0] * 1 + ray[1] * (m + 1)
                    if num <= ray_valuation(mdl, ray):
                        return False
                return True

            mstar = next(m for m in range(200) if interior_ok(m))
            assert mstar == expect


class TestClusterReport:
    def test_m0_values(self):
        rep = cluster_report(2, 4, 0)
        assert [x for x in rep.rows[0].xi] == [F(5, 6), F(17, 20), F(65, 72), F(257, 272)]
        xs = rep.rows[0].xi
        assert all(a < b for a, b in zip(xs, xs[1:]))
        assert rep.rows[0].min_gap == F(15, 272)

    def test_boundary_case(self):
        rep = cluster_report(2, 1, 1)
        assert rep.rows[1].xi[0] == 1  # m + 1 = M^k exactly
        assert rep.rows[1].witness_k is None

    def test_m5_needs_k3(self):
        rep = cluster_report(2, 3, 5)
        assert rep.rows[5].witness_k == 3
        assert rep.rows[5].xi[2] == F(70, 72)

    def test_witness_criterion(self):
        # xi(m, k) < 1 exactly when m + 1 < M^k
        rep = cluster_report(3, 3, 10)
        for row in rep.rows:
            for k, x in zip(rep.k_values, row.xi):
                assert (x < 1) == (row.m + 1 < 3**k)

    def test_all_witnessed_flag(self):
        assert cluster_report(2, 4, 14).all_witnessed
        assert not cluster_report(2, 1, 5).all_witnessed


class TestScalingAndMonotonicity:
    def test_weight_scaling_divides_threshold(self):
        m = series(2, 2)
        r = integrability_threshold(m, (1, 1))
        r2 = integrability_threshold(scale_model(m, F(3, 2)), (1, 1))
        assert r2.value == r.value / F(3, 2)

    def test_membership_scaling_correspondence(self):
        m = series(2, 2)
        s = F(2, 3)
        for c in (F(1, 2), F(5, 6), F(2)):
            assert monomial_membership(scale_model(m, s), (0, 1), c) == monomial_membership(
                m, (0, 1), c * s
            )

    def test_adding_term_never_raises_threshold(self):
        m = series(2, 1)
        grown = series(2, 2)
        for a in [(0, 0), (1, 0), (2, 3)]:
            assert (
                integrability_threshold(grown, a).value
                <= integrability_threshold(m, a).value
            )

    def test_pullback_inequality_and_equality_clause(self):
        m = model(2, [("2/3", [(1, 2), (3, 0)]), ("1/5", [(0, 1), (2, 2)])])
        pb = pullback_blowup(m)
        for a in [(0, 0), (1, 0), (0, 2), (2, 1)]:
            r = integrability_threshold(m, a)
            rp = integrability_threshold(pb, (a[0] + a[1] + 1, a[1]))
            assert rp.value >= r.value
            w = r.argmin_ray
            if w[1] >= w[0]:
                assert rp.value == r.value


class TestGapWitness:
    def test_pure_log_candidate(self):
        cfg = SeriesConfig(M=2, K=6)
        w = equisingular_gap_witness(cfg, model(2, [(1, [(1, 0)])]))
        assert w is not None
        assert w.c < 1
        assert monomial_membership(model(2, [(1, [(1, 0)])]), (0, w.m), w.c)
        assert not monomial_membership(series(2, w.k0), (0, w.m), w.c)

    def test_weighted_candidates(self):
        cfg = SeriesConfig(M=2, K=6)
        for q in (F(1, 4), F(1, 2), F(1)):
            cand = model(2, [(1, [(1, 0)]), (q, [(0, 1)])])
            w = equisingular_gap_witness(cfg, cand)
            assert w is not None and w.c < 1
            assert monomial_membership(cand, (0, w.m), w.c)
            assert not monomial_membership(series(2, w.k0), (0, w.m), w.c)
