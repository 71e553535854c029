import math
from fractions import Fraction as F

import numpy as np
import pytest

from mitlab import _kernels
from mitlab.errors import DimensionError
from mitlab.model import SeriesConfig, build_cluster_series, model
from mitlab.oracle import (
    CONVERGES,
    DIVERGES,
    INCONCLUSIVE,
    QuadratureConfig,
    _angular_grid,
    _pack,
    _radial_grid,
    classify_convergence,
    difference_integrability_2d,
    numeric_threshold,
    shell_log_integral,
    shell_log_masses,
)
from mitlab.thresholds import integrability_threshold
from mitlab.verify import ORACLE_BRACKET_CONFIG

LOG1 = model(2, [(1, [(1, 0)])])


def series(M, K):
    return build_cluster_series(SeriesConfig(M=M, K=K))


def logsum(vals):
    m = max(vals)
    if not math.isfinite(m):
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in vals))


class TestShellMasses:
    def test_first_shell_closed_form(self):
        # integral of s*exp(-2s) over [0, 1]: 1/4 - (3/4) e^-2
        got = math.exp(shell_log_integral(LOG1, (0, 0), 0.0, 0, QuadratureConfig()))
        assert got == pytest.approx(0.25 - 0.75 * math.exp(-2.0), abs=1e-12)

    def test_critical_slab_masses_approach_half(self):
        # at c = 1 the integrand reduces to exp(-2 x2) and each unit slab
        # carries mass (1 - e^{-2s}) / 2 -> 1/2
        cfg = QuadratureConfig()
        masses = shell_log_masses(LOG1, (0, 0), 1.0, cfg)
        assert math.exp(masses[-1]) == pytest.approx(0.5, abs=1e-6)

    def test_normalization_quarter(self):
        cfg = QuadratureConfig()
        for m in (LOG1, series(2, 2), model(2, [("1/3", [(2, 5), (0, 1)])])):
            total = math.exp(logsum(list(shell_log_masses(m, (0, 0), 0.0, cfg))))
            assert total == pytest.approx(0.25, abs=1e-6)

    def test_rejects_negative_scale(self):
        from mitlab.errors import FormatError

        with pytest.raises(FormatError):
            shell_log_masses(LOG1, (0, 0), -0.5, QuadratureConfig())

    def test_dim3_normalization(self):
        # int over x >= 0 of exp(-2|x|_1) dx = (1/2)^3
        m3 = model(3, [(1, [(1, 0, 0)])])
        cfg = QuadratureConfig(shell_count=30)
        total = math.exp(logsum(list(shell_log_masses(m3, (0, 0, 0), 0.0, cfg))))
        assert total == pytest.approx(0.125, abs=1e-4)


class TestClassify:
    def test_clear_convergence(self):
        v = classify_convergence(LOG1, (0, 0), 0.5, QuadratureConfig())
        assert v.kind == CONVERGES
        assert v.fitted_rate < -0.5
        assert v.estimate is not None

    def test_clear_divergence(self):
        v = classify_convergence(LOG1, (0, 0), 1.5, QuadratureConfig())
        assert v.kind == DIVERGES
        assert v.fitted_rate > 0.5
        assert v.estimate is None

    def test_borderline_never_converges(self):
        for cfg in (QuadratureConfig(), ORACLE_BRACKET_CONFIG):
            v = classify_convergence(series(2, 1), (0, 0), 5.0 / 6.0, cfg)
            assert v.kind in (DIVERGES, INCONCLUSIVE)

    def test_verdict_monotone_in_scale(self):
        rank = {CONVERGES: 0, INCONCLUSIVE: 1, DIVERGES: 2}
        cfg = ORACLE_BRACKET_CONFIG
        kinds = [
            rank[classify_convergence(series(2, 2), (0, 1), c, cfg).kind]
            for c in (0.2, 0.6, 0.8, 0.82, 0.84, 1.0, 1.5)
        ]
        assert kinds == sorted(kinds)

    def test_rate_tracks_valuation_gap(self):
        # for c away from the threshold the decay rate is -2 * min over unit
        # rays of (<v, a+1> - c * valuation)
        cfg = ORACLE_BRACKET_CONFIG
        v = classify_convergence(LOG1, (0, 0), 0.25, cfg)
        assert v.fitted_rate == pytest.approx(-1.5, abs=0.01)  # min(1 - c, 1) = 0.75
        v = classify_convergence(LOG1, (1, 0), 3.0, cfg)
        assert v.fitted_rate == pytest.approx(2.0, abs=0.01)  # min(2 - 3, 1) = -1


class TestNumericThreshold:
    def test_pure_log_z1_power(self):
        br = numeric_threshold(LOG1, (1, 0), ORACLE_BRACKET_CONFIG)
        assert not br.unbounded
        assert br.lo <= 2.0 <= br.hi
        assert br.width <= 0.02

    def test_series_k1(self):
        br = numeric_threshold(series(2, 1), (0, 0), ORACLE_BRACKET_CONFIG)
        assert br.lo <= 5.0 / 6.0 <= br.hi
        assert br.width <= 0.02

    def test_series_k2_against_exact(self):
        exact = integrability_threshold(series(2, 2), (0, 1))
        assert exact.value == F(9, 11)
        br = numeric_threshold(series(2, 2), (0, 1), ORACLE_BRACKET_CONFIG)
        assert br.lo <= float(exact.value) <= br.hi

    def test_bounded_potential_reports_unbounded(self):
        br = numeric_threshold(model(2, [(1, [(0, 0), (1, 0)])]), (0, 0), QuadratureConfig())
        assert br.unbounded


class TestDifferenceIntegrability:
    def test_identical_models_vanish(self):
        v = difference_integrability_2d(series(2, 2), series(2, 2), 0, QuadratureConfig())
        assert v.kind == CONVERGES
        assert v.estimate == -math.inf

    def test_equivalent_after_scaling(self):
        a = model(2, [("1/2", [(1, 0)])])
        b = model(2, [("1/2", [(1, 0)])])
        v = difference_integrability_2d(a, b, 0, QuadratureConfig())
        assert v.kind == CONVERGES

    def test_series_vs_divisorial_part_diverges(self):
        v = difference_integrability_2d(series(2, 2), LOG1, 0, QuadratureConfig())
        assert v.kind == DIVERGES

    def test_weight_can_restore_integrability(self):
        # |z1|^(2w) tames a difference of pure z1 weights once w is large enough
        a = model(2, [("2", [(1, 0)])])
        b = model(2, [("1/4", [(1, 0)])])
        assert difference_integrability_2d(a, b, 0, QuadratureConfig()).kind == DIVERGES
        assert difference_integrability_2d(a, b, 2, QuadratureConfig()).kind == CONVERGES

    def test_dimension_guard(self):
        m3 = model(3, [(1, [(1, 0, 0)])])
        with pytest.raises(DimensionError):
            difference_integrability_2d(m3, m3, 0, QuadratureConfig())


class TestBackends:
    def _args(self):
        m = series(2, 2)
        w, e, s = _pack(m)
        sx, slw = _radial_grid(24)
        tx, tlw = _angular_grid((m,), 24)
        return (w, e, s, 1.0, 2.0, 0.7, 0, 32, sx, slw, tx, tlw)

    @pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
    def test_backends_agree(self):
        args = self._args()
        nb = _kernels._shell_masses_2d_nb(*args)
        np_ = _kernels.shell_masses_2d_numpy(*args)
        assert np.max(np.abs(nb - np_)) < 1e-10

    @pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")
    def test_diff_backends_agree(self):
        m1, m2 = series(2, 2), LOG1
        w1, e1, s1 = _pack(m1)
        w2, e2, s2 = _pack(m2)
        sx, slw = _radial_grid(24)
        tx, tlw = _angular_grid((m1, m2), 24)
        args = (w1, e1, s1, w2, e2, s2, 0.0, 0, 32, sx, slw, tx, tlw)
        nb = _kernels._diff_shell_masses_2d_nb(*args)
        np_ = _kernels.diff_shell_masses_2d_numpy(*args)
        assert np.max(np.abs(nb - np_)) < 1e-10

    def test_deterministic_within_backend(self):
        cfg = QuadratureConfig(shell_count=16)
        a = shell_log_masses(series(2, 1), (0, 0), 0.8, cfg)
        b = shell_log_masses(series(2, 1), (0, 0), 0.8, cfg)
        assert np.array_equal(a, b)

    def test_nd_path_matches_2d_kernel(self):
        # the stick-breaking parametrization reduces to the paneled one at
        # dim 2 up to quadrature error
        m = series(2, 1)
        w, e, s = _pack(m)
        gx, gw = np.polynomial.legendre.leggauss(24)
        nd = _kernels.shell_masses_nd_numpy(w, e, s, np.array([1.0, 1.0]), 0.5, 0, 8, gx, gw, 2)
        cfg = QuadratureConfig(shell_count=8, nodes_per_shell=24)
        flat = shell_log_masses(m, (0, 0), 0.5, cfg)
        # the nd grid is not paneled, so agreement is limited by its own
        # quadrature error rather than roundoff
        assert np.max(np.abs(nd - flat)) < 1e-3

    def test_active_backend_reported(self):
        assert _kernels.active_backend() in ("numba", "numpy")

    def test_thread_cap_parses_env(self, monkeypatch):
        monkeypatch.setenv("MITLAB_THREADS", "3")
        assert _kernels.thread_cap() == 3
        monkeypatch.setenv("MITLAB_THREADS", "bogus")
        with pytest.raises(RuntimeError):
            _kernels.thread_cap()
