"""Seeded self-verification suites: exact-engine laws, oracle agreement, profile lemmas.

Each suite draws its cases from a `random.Random(seed)` stream, so runs
are reproducible for a fixed seed.  Suites return per-property pass/fail
counts with a few failure descriptions; the CLI prints one line per
property and exits nonzero when anything fails.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random

from . import _kernels
from .model import (
    LogSumTerm,
    Monomial,
    SeriesConfig,
    ToricModel,
    build_cluster_series,
    evaluate_log_coords,
    point_lelong,
    pullback_blowup,
    ray_valuation,
    scale_model,
    siu_split,
)
from .oracle import (
    CONVERGES,
    DIVERGES,
    INCONCLUSIVE,
    QuadratureConfig,
    classify_convergence,
    difference_integrability_2d,
    numeric_threshold,
    shell_log_masses,
)
from .profiles import (
    INTEGRABLE,
    NON_INTEGRABLE,
    ConvexReparam,
    Profile,
    Segment,
    compose_reparam,
    linear_profile,
    profile_difference_integrable,
    weighted_exp_integrable,
)
from .thresholds import integrability_threshold, jumping_spectrum, monomial_membership, multiplier_staircase

__all__ = [
    "PropertyResult",
    "ORACLE_BRACKET_CONFIG",
    "random_model",
    "random_ray",
    "suite_exact",
    "suite_oracle",
    "suite_lemmas",
    "run_suites",
]

# Tuned so threshold brackets stay within 0.02 of width while containing
# the exact value: enough shells to outlive slow transients, paneled
# angular grids (see oracle), and a margin above the rate-estimate error.
ORACLE_BRACKET_CONFIG = QuadratureConfig(
    shell_count=96,
    nodes_per_shell=32,
    tail_window=16,
    decay_margin=0.006,
    bisection_iters=14,
)


@dataclass
class PropertyResult:
    name: str
    passed: int
    total: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def line(self) -> str:
        return f"{self.name}: {self.passed}/{self.total}"


class _Check:
    """Accumulates pass/fail cases for one named property."""

    def __init__(self, name: str, keep: int = 3):
        self.result = PropertyResult(name=name, passed=0, total=0)
        self._keep = keep

    def record(self, ok: bool, describe: str = ""):
        self.result.total += 1
        if ok:
            self.result.passed += 1
        elif len(self.result.failures) < self._keep:
            self.result.failures.append(describe)


# ---------------------------------------------------------------------------
# random generators
# ---------------------------------------------------------------------------

def random_ray(rng: Random, dim: int = 2) -> tuple[Fraction, ...]:
    while True:
        ray = tuple(Fraction(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(dim))
        if any(c > 0 for c in ray):
            return ray


def random_model(
    rng: Random,
    max_terms: int = 3,
    max_monomials: int = 3,
    max_exponent: int = 8,
    dim: int = 2,
    singular: bool = True,
    normalize: Fraction | None = None,
) -> ToricModel:
    """Random integer-exponent model; optionally resampled until singular
    (nonzero valuation at the all-ones ray) and rescaled to a fixed
    valuation there."""
    while True:
        terms = []
        for _ in range(rng.randint(1, max_terms)):
            monos = tuple(
                Monomial(tuple(Fraction(rng.randint(0, max_exponent)) for _ in range(dim)))
                for _ in range(rng.randint(1, max_monomials))
            )
            weight = Fraction(rng.randint(1, 4), rng.randint(1, 4))
            terms.append(LogSumTerm(weight, monos))
        m = ToricModel(dim, tuple(terms))
        v = ray_valuation(m, (1,) * dim)
        if not singular or v > 0:
            if normalize is not None and v > 0:
                m = scale_model(m, normalize / v)
            return m


def random_convex_profile(rng: Random, max_slope: int = 4, log_coeff: Fraction | None = None) -> Profile:
    nsegs = rng.randint(1, 3)
    slopes = sorted(Fraction(rng.randint(0, 3 * max_slope), 3) for _ in range(nsegs))
    tos = [Fraction(0)]
    for _ in range(nsegs - 1):
        tos.append(tos[-1] - Fraction(rng.randint(1, 9), rng.randint(1, 3)))
    tos.reverse()
    segments = tuple(Segment(slopes[i], tos[i]) for i in range(nsegs))
    return Profile(
        segments=segments,
        tail_offset=Fraction(rng.randint(-6, 6), rng.randint(1, 3)),
        log_coeff=Fraction(0) if log_coeff is None else log_coeff,
    )


# ---------------------------------------------------------------------------
# exact suite
# ---------------------------------------------------------------------------

def suite_exact(seed: int, n_models: int = 100, n_rays: int = 100) -> list[PropertyResult]:
    rng = Random(seed)

    hom = _Check("valuation-homogeneity-additivity")
    for _ in range(60):
        m = random_model(rng, singular=False)
        v = random_ray(rng)
        s = Fraction(rng.randint(1, 9), rng.randint(1, 4))
        scaled = tuple(s * c for c in v)
        ok = ray_valuation(m, scaled) == s * ray_valuation(m, v)
        total = sum(
            (ray_valuation(ToricModel(m.dim, (t,)), v) for t in m.terms), Fraction(0)
        )
        ok = ok and total == ray_valuation(m, v)
        hom.record(ok, f"model={m} v={v}")

    recon = _Check("divisorial-split-reconstruction")
    resid0 = _Check("residual-axis-valuation-zero")
    for _ in range(n_models):
        m = random_model(rng, singular=False)
        coeffs, residual = siu_split(m)
        for i in range(m.dim):
            e = tuple(Fraction(int(k == i)) for k in range(m.dim))
            val = ray_valuation(residual, e) if residual.terms else Fraction(0)
            resid0.record(val == 0, f"axis {i} of {m}")
        for _ in range(n_rays):
            v = random_ray(rng)
            lhs = ray_valuation(m, v)
            rhs = sum((c * x for c, x in zip(coeffs, v)), Fraction(0))
            if residual.terms:
                rhs += ray_valuation(residual, v)
            recon.record(lhs == rhs, f"v={v} model={m}")

    scaling = _Check("threshold-scaling")
    mono_mon = _Check("threshold-monomial-monotonicity")
    model_mon = _Check("threshold-model-monotonicity")
    for _ in range(40):
        m = random_model(rng)
        a = (rng.randint(0, 3), rng.randint(0, 3))
        r = integrability_threshold(m, a)
        s = Fraction(rng.randint(1, 6), rng.randint(1, 4))
        rs = integrability_threshold(scale_model(m, s), a)
        ok = (r.is_infinite and rs.is_infinite) or (rs.value == r.value / s)
        scaling.record(ok, f"s={s} a={a} model={m}")

        bump = (a[0] + rng.randint(0, 2), a[1] + rng.randint(0, 2))
        rb = integrability_threshold(m, bump)
        mono_mon.record(
            rb.is_infinite or r.is_infinite or r.value <= rb.value, f"a={a}->{bump}"
        )

        extra = random_model(rng, max_terms=1, singular=False)
        grown = ToricModel(2, m.terms + extra.terms)
        rg = integrability_threshold(grown, a)
        ok = r.is_infinite or (not rg.is_infinite and rg.value <= r.value)
        model_mon.record(ok, f"a={a} extra={extra}")

    pullback = _Check("pullback-threshold-inequality")
    for _ in range(50):
        m = random_model(rng)
        a = (rng.randint(0, 3), rng.randint(0, 3))
        r = integrability_threshold(m, a)
        pb = pullback_blowup(m)
        rp = integrability_threshold(pb, (a[0] + a[1] + 1, a[1]))
        if r.is_infinite:
            pullback.record(rp.is_infinite, f"a={a}")
            continue
        ok = rp.is_infinite or rp.value >= r.value
        w = r.argmin_ray
        if ok and w is not None and w[1] >= w[0]:
            ok = (not rp.is_infinite) and rp.value == r.value
        pullback.record(ok, f"a={a} model={m}")

    stair = _Check("staircase-matches-exhaustive-scan")
    for _ in range(10):
        m = random_model(rng)
        c = Fraction(rng.randint(1, 8), rng.randint(2, 6))
        d = 5
        got = multiplier_staircase(m, c, d)
        members = {
            (a1, a2)
            for a1 in range(d + 1)
            for a2 in range(d + 1)
            if monomial_membership(m, (a1, a2), c)
        }
        minimal = {
            p
            for p in members
            if not any(q != p and q[0] <= p[0] and q[1] <= p[1] for q in members)
        }
        stair.record(set(got) == minimal, f"c={c} model={m}: {got} vs {sorted(minimal)}")

    dcc = _Check("spectrum-strictly-increasing")
    for _ in range(10):
        m = random_model(rng)
        table = jumping_spectrum(m, 3, Fraction(rng.randint(2, 6)))
        vals = table.values()
        dcc.record(all(x < y for x, y in zip(vals, vals[1:])), f"{vals}")

    bound = _Check("log-coords-valuation-bound")
    for _ in range(40):
        m = random_model(rng, singular=False)
        x = [rng.uniform(0.0, 30.0) for _ in range(2)]
        u = evaluate_log_coords(m, x)
        exact_part = sum(
            float(t.weight) * min(sum(float(e) * c for e, c in zip(mo, x)) for mo in t.monomials)
            for t in m.terms
        )
        slack = sum(float(t.weight) * math.log(len(t.monomials)) for t in m.terms)
        bound.record(abs(u - exact_part) <= slack + 1e-9, f"x={x} model={m}")

    lelong = _Check("cluster-series-lelong-values")
    for K in range(1, 7):
        m = build_cluster_series(SeriesConfig(M=2, K=K))
        expect = Fraction(2) - Fraction(1, 2**K)
        lelong.record(point_lelong(m) == expect, f"K={K}")
        lelong.record(point_lelong(m, vanishing_axis=0) == 1, f"axis K={K}")

    return [
        hom.result,
        recon.result,
        resid0.result,
        scaling.result,
        mono_mon.result,
        model_mon.result,
        pullback.result,
        stair.result,
        dcc.result,
        bound.result,
        lelong.result,
    ]


# ---------------------------------------------------------------------------
# oracle suite
# ---------------------------------------------------------------------------

def _bracket_case(args):
    m, a, cfg = args
    exact = integrability_threshold(m, a)
    bracket = numeric_threshold(m, a, cfg)
    if exact.is_infinite:
        return bracket.unbounded, f"expected unbounded, got [{bracket.lo}, {bracket.hi}]"
    ex = float(exact.value)
    ok = (not bracket.unbounded) and bracket.lo <= ex <= bracket.hi and bracket.width <= 0.02
    return ok, (
        f"c*={exact.value}={ex:.5f} bracket=[{bracket.lo:.5f}, {bracket.hi:.5f}] "
        f"width={bracket.width:.5f} unbounded={bracket.unbounded}"
    )


def suite_oracle(
    seed: int, n_models: int = 30, cfg: QuadratureConfig | None = None
) -> list[PropertyResult]:
    rng = Random(seed)
    cfg = cfg or ORACLE_BRACKET_CONFIG

    norm = _Check("shell-normalization-quarter")
    base = QuadratureConfig()
    for m in (
        build_cluster_series(SeriesConfig(M=2, K=2)),
        random_model(rng),
    ):
        masses = shell_log_masses(m, (0, 0), 0.0, base)
        mx = max(masses)
        total = math.exp(mx + math.log(sum(math.exp(v - mx) for v in masses)))
        norm.record(abs(total - 0.25) <= 1e-6, f"sum={total!r}")

    cases = []
    for _ in range(n_models):
        m = random_model(rng, normalize=Fraction(2))
        a = (rng.randint(0, 2), rng.randint(0, 2))
        cases.append((m, a, cfg))
    agree = _Check("bracket-contains-exact-threshold", keep=5)
    with ThreadPoolExecutor(max_workers=_kernels.thread_cap()) as pool:
        for ok, describe in pool.map(_bracket_case, cases):
            agree.record(ok, describe)

    mono = _Check("verdict-monotone-in-scale")
    rank = {CONVERGES: 0, INCONCLUSIVE: 1, DIVERGES: 2}
    for _ in range(6):
        m = random_model(rng, normalize=Fraction(2))
        a = (rng.randint(0, 2), rng.randint(0, 2))
        ex = integrability_threshold(m, a)
        center = float(ex.value)
        grid = [max(0.0, center + d) for d in (-0.5, -0.2, -0.05, 0.05, 0.2, 0.5)]
        kinds = [rank[classify_convergence(m, a, c, cfg).kind] for c in grid]
        mono.record(
            all(x <= y for x, y in zip(kinds, kinds[1:])), f"kinds={kinds} grid={grid}"
        )

    ratevb = _Check("rate-matches-valuation-gap")
    for _ in range(8):
        m = random_model(rng, normalize=Fraction(2))
        a = (rng.randint(0, 2), rng.randint(0, 2))
        ex = integrability_threshold(m, a)
        c = float(ex.value) * (0.5 if rng.random() < 0.5 else 1.5)
        verdict = classify_convergence(m, a, c, cfg)
        # minimize g over candidate rays and a fine angular grid
        best = math.inf
        for t in [i / 400.0 for i in range(401)]:
            v = (t, 1.0 - t)
            num = (float(a[0]) + 1.0) * v[0] + (float(a[1]) + 1.0) * v[1]
            val = sum(
                float(trm.weight)
                * min(float(mo[0]) * v[0] + float(mo[1]) * v[1] for mo in trm.monomials)
                for trm in m.terms
            )
            best = min(best, num - c * val)
        ratevb.record(
            abs(verdict.fitted_rate - (-2.0 * best)) <= 0.08,
            f"rate={verdict.fitted_rate:.4f} expected={-2.0 * best:.4f} c={c:.4f}",
        )

    return [norm.result, agree.result, mono.result, ratevb.result]


# ---------------------------------------------------------------------------
# lemma suites (1-D profile calculus)
# ---------------------------------------------------------------------------

def suite_lemmas(seed: int, n_cases: int = 200) -> list[PropertyResult]:
    rng = Random(seed)

    slope_match = _Check("difference-integrable-forces-equal-slope")
    for _ in range(n_cases):
        p1 = random_convex_profile(rng)
        while p1.tail_slope < 1:
            p1 = random_convex_profile(rng)
        if rng.random() < 0.4:
            # share the tail so some cases are genuinely integrable
            p2 = Profile(
                segments=(Segment(p1.tail_slope, Fraction(0)),),
                tail_offset=p1.tail_offset,
                log_coeff=p1.log_coeff,
            )
        else:
            p2 = random_convex_profile(rng)
        verdict = profile_difference_integrable(p1, p2, 1)
        ok = verdict.kind != INTEGRABLE or p1.tail_slope == p2.tail_slope
        slope_match.record(ok, f"p1={p1.tail_data()} p2={p2.tail_data()} -> {verdict.kind}")

    obstruction = _Check("divergent-offset-forces-nonintegrable")
    for _ in range(n_cases):
        c0 = Fraction(rng.randint(1, 4))
        chi = ConvexReparam(base_slope=c0, log_coeff=Fraction(rng.randint(1, 3)))
        p = random_convex_profile(rng)
        while c0 * p.tail_slope < 1:  # keep the slope-product hypothesis satisfied
            p = random_convex_profile(rng)
        prod = c0 * p.tail_slope
        k = rng.randint(1, math.floor(prod))
        analytic = linear_profile(Fraction(rng.randint(0, 8), rng.randint(1, 3)))
        composed = compose_reparam(chi, p)
        verdict = profile_difference_integrable(composed, analytic, k)
        obstruction.record(
            verdict.kind == NON_INTEGRABLE,
            f"C0={c0} nu={p.tail_slope} k={k} analytic={analytic.tail_data()} -> {verdict.kind}",
        )

    slope_law = _Check("composition-slope-product-law")
    for _ in range(n_cases):
        c0 = Fraction(rng.randint(1, 5), rng.randint(1, 2))
        pieces = [Segment(c0, Fraction(-rng.randint(0, 4)))]
        if rng.random() < 0.5:
            pieces.append(Segment(c0 + rng.randint(1, 3), pieces[0].to + rng.randint(1, 5)))
        chi = ConvexReparam(
            base_slope=c0,
            pieces=tuple(pieces),
            log_coeff=Fraction(rng.randint(0, 2)),
        )
        p = random_convex_profile(rng)
        composed = compose_reparam(chi, p)
        slope_law.record(
            composed.tail_slope == c0 * p.tail_slope,
            f"C0={c0} nu={p.tail_slope} got {composed.tail_slope}",
        )

    boundary = _Check("weighted-integrability-boundary")
    for nu_num in range(0, 13):
        for k in (1, 2, 3):
            nu = Fraction(nu_num, 4)
            p = linear_profile(nu)
            boundary.record(
                weighted_exp_integrable(p, k) == (nu < k), f"nu={nu} k={k}"
            )

    sym_vs_num = _Check("symbolic-agrees-with-quadrature")
    cfg = QuadratureConfig()
    pairs = [
        (Fraction(1, 2), Fraction(2, 3), 0),
        (Fraction(1, 2), Fraction(1, 2), 0),
        (Fraction(3, 2), Fraction(3, 2), 0),
        (Fraction(2), Fraction(1, 4), 0),
        (Fraction(5, 2), Fraction(5, 2), 1),
        (Fraction(3), Fraction(1), 1),
        (Fraction(1, 3), Fraction(3, 4), 0),
        (Fraction(7, 4), Fraction(1, 8), 0),
        (Fraction(3, 4), Fraction(5, 4), 0),
        (Fraction(9, 4), Fraction(9, 4), 1),
        (Fraction(1), Fraction(2), 0),
        (Fraction(0), Fraction(1, 2), 0),
        (Fraction(1), Fraction(0), 0),
        (Fraction(2), Fraction(0), 1),
    ]
    for nu1, nu2, w in pairs:
        p1, p2 = linear_profile(nu1), linear_profile(nu2)
        symbolic = profile_difference_integrable(p1, p2, w + 1)
        def as_model(nu):
            if nu == 0:
                return ToricModel(2, (LogSumTerm(Fraction(1), (Monomial((Fraction(0), Fraction(0))),)),))
            return ToricModel(2, (LogSumTerm(nu, (Monomial((Fraction(1), Fraction(0))),)),))
        numeric = difference_integrability_2d(as_model(nu1), as_model(nu2), w, cfg)
        if nu1 == nu2:
            ok = symbolic.kind == INTEGRABLE and numeric.kind == CONVERGES
        elif max(nu1, nu2) == w + 1:
            # boundary slope: symbolically non-integrable, numerically never convergent
            ok = symbolic.kind == NON_INTEGRABLE and numeric.kind != CONVERGES
        elif symbolic.kind == INTEGRABLE:
            ok = numeric.kind == CONVERGES
        else:
            ok = numeric.kind == DIVERGES
        sym_vs_num.record(ok, f"nu1={nu1} nu2={nu2} w={w}: {symbolic.kind} vs {numeric.kind}")

    return [
        slope_match.result,
        obstruction.result,
        slope_law.result,
        boundary.result,
        sym_vs_num.result,
    ]


SUITES = {
    "exact": suite_exact,
    "oracle": suite_oracle,
    "lemmas": suite_lemmas,
}


def run_suites(names: list[str], seed: int) -> list[PropertyResult]:
    results = []
    for name in names:
        results.extend(SUITES[name](seed))
    return results
