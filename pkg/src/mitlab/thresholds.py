"""Exact jumping-coefficient engine for dimension-2 toric models.

The integrability threshold of a monomial z^a against a model phi is the
value of the piecewise-linear fractional program

    c*(a) = inf_{v >= 0, v != 0}  <v, a + 1> / v(phi)(v),

where v(phi) is the Newton valuation of `mitlab.model`.  In dimension 2
the denominator t -> v(phi)((1, t)) is concave piecewise linear, so the
infimum is attained on the finite candidate set consisting of both basis
rays and the breakpoints where some term changes its active monomial.
Everything here is exact rational arithmetic; no floating point enters
this module.

Membership z^a in I(c*phi) is strict (c < c*(a)): finite candidate sets
attain the infimum, so the threshold itself always fails.

The spectra computed here are monomial spectra: the scan identifies the
jumping values witnessed by monomials inside a degree box, which for toric
models is the natural (and for these models exhaustive-in-the-box) slice
of the full jumping set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DimensionError, FormatError
from .model import (
    Monomial,
    SeriesConfig,
    ToricModel,
    build_cluster_series,
    frac,
    ray_valuation,
    single_term_series,
)

__all__ = [
    "ThresholdResult",
    "SpectrumTable",
    "ClusterRow",
    "ClusterReport",
    "GapWitness",
    "integrability_threshold",
    "monomial_membership",
    "jumping_spectrum",
    "multiplier_staircase",
    "cluster_report",
    "equisingular_gap_witness",
    "spectrum_to_tsv",
    "spectrum_to_dict",
]


@dataclass(frozen=True)
class ThresholdResult:
    """Exact jumping coefficient of one monomial.

    value None encodes +infinity (the model has identically zero
    valuation, i.e. bounded potential).  A finite value always comes with
    the minimizing ray, normalized so its first nonzero coordinate is 1.
    """

    value: Fraction | None
    argmin_ray: tuple[Fraction, ...] | None
    attained: bool

    @property
    def is_infinite(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class SpectrumTable:
    """Distinct thresholds <= cutoff witnessed by monomials in [0, D]^2."""

    entries: tuple[tuple[Fraction, tuple[tuple[int, int], ...]], ...]
    degree_bound: int
    cutoff: Fraction

    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for v, _ in self.entries)


def _candidate_rays(model: ToricModel) -> list[tuple[Fraction, Fraction]]:
    """Basis rays plus all pairwise envelope breakpoints of t -> v(phi)((1, t))."""
    ts: set[Fraction] = set()
    for term in model.terms:
        monos = term.monomials
        for i in range(len(monos)):
            for j in range(i + 1, len(monos)):
                p, q = monos[i], monos[j]
                if p[1] != q[1]:
                    t = (p[0] - q[0]) / (q[1] - p[1])
                    if t > 0:
                        ts.add(t)
    rays = [(Fraction(1), Fraction(0))]
    rays.extend((Fraction(1), t) for t in sorted(ts))
    rays.append((Fraction(0), Fraction(1)))
    return rays


def integrability_threshold(model: ToricModel, a) -> ThresholdResult:
    """Exact c*(a) for a dimension-2 model, by breakpoint enumeration.

    On each linear piece of the valuation the target ratio is a Moebius
    function of the ray parameter, hence monotone, so the minimum over
    the closed orthant of rays is attained at a piece endpoint: one of the
    basis rays or an envelope breakpoint.  Candidates where the valuation
    vanishes contribute +infinity and are skipped; if every candidate is
    skipped the valuation is identically zero and the threshold is
    +infinity.
    """
    if model.dim != 2:
        raise DimensionError(
            "exact thresholds are implemented for dimension 2 only; "
            "use the numeric oracle for higher dimensions"
        )
    mono = a if isinstance(a, Monomial) else Monomial(tuple(frac(e) for e in a))
    if len(mono) != 2:
        raise DimensionError(f"monomial {tuple(mono)} is not 2-dimensional")
    b = (mono[0] + 1, mono[1] + 1)

    best: Fraction | None = None
    best_ray: tuple[Fraction, Fraction] | None = None
    for ray in _candidate_rays(model):
        den = ray_valuation(model, ray)
        if den == 0:
            continue
        num = b[0] * ray[0] + b[1] * ray[1]
        ratio = num / den
        if best is None or ratio < best:
            best = ratio
            best_ray = ray
    if best is None:
        return ThresholdResult(value=None, argmin_ray=None, attained=False)
    return ThresholdResult(value=best, argmin_ray=best_ray, attained=True)


def monomial_membership(model: ToricModel, a, c) -> bool:
    """Whether z^a lies in I(c*phi) at the origin; strict at the threshold."""
    c = frac(c)
    if c < 0:
        raise FormatError(f"multiplier scale must be >= 0, got {c}")
    res = integrability_threshold(model, a)
    if res.is_infinite:
        return True
    return c < res.value


def jumping_spectrum(model: ToricModel, degree_bound: int, cutoff) -> SpectrumTable:
    """Distinct thresholds of integer monomials in [0, D]^2, up to the cutoff.

    Exhaustive for the scanned box only: monomials outside the box may
    witness further (larger or equal) jumping values.
    """
    if degree_bound < 0:
        raise FormatError(f"degree bound must be >= 0, got {degree_bound}")
    cutoff = frac(cutoff)
    if cutoff <= 0:
        raise FormatError(f"cutoff must be positive, got {cutoff}")
    by_value: dict[Fraction, list[tuple[int, int]]] = {}
    for a1 in range(degree_bound + 1):
        for a2 in range(degree_bound + 1):
            res = integrability_threshold(model, (a1, a2))
            if res.is_infinite or res.value > cutoff:
                continue
            by_value.setdefault(res.value, []).append((a1, a2))
    entries = tuple(
        (value, tuple(sorted(by_value[value]))) for value in sorted(by_value)
    )
    return SpectrumTable(entries=entries, degree_bound=degree_bound, cutoff=cutoff)


def multiplier_staircase(model: ToricModel, c, degree_bound: int) -> tuple[tuple[int, int], ...]:
    """Minimal monomial generators of I(c*phi) within the box [0, D]^2.

    c*(a) is componentwise nondecreasing in a, so membership is an upper
    set and its minimal elements form a staircase: walk columns a1 = 0..D,
    record the least member row, and keep the corners where it drops.
    """
    if degree_bound < 0:
        raise FormatError(f"degree bound must be >= 0, got {degree_bound}")
    c = frac(c)
    corners: list[tuple[int, int]] = []
    prev_row: int | None = None  # least member a2 of the previous column
    for a1 in range(degree_bound + 1):
        row = None
        hi = prev_row if prev_row is not None else degree_bound
        for a2 in range(hi + 1):
            if monomial_membership(model, (a1, a2), c):
                row = a2
                break
        if row is None:
            continue  # membership is an upper set, so only leading columns can be empty
        if prev_row is None or row < prev_row:
            corners.append((a1, row))
            prev_row = row
        if row == 0:
            break
    return tuple(corners)


@dataclass(frozen=True)
class ClusterRow:
    """Thresholds of z_2^m against the single-level models, for one m."""

    m: int
    xi: tuple[Fraction, ...]
    min_gap: Fraction
    witness_k: int | None  # least k with xi(m, k) < 1


@dataclass(frozen=True)
class ClusterReport:
    M: int
    k_values: tuple[int, ...]
    rows: tuple[ClusterRow, ...]
    all_witnessed: bool


def cluster_report(M: int, k_max: int, m_max: int) -> ClusterReport:
    """Threshold table xi(m, k) of z_2^m against log|z_1| + M^-k log(|z_1| + |z_2|^{M^2k}).

    xi(m, k) < 1 exactly when m + 1 < M^k, and the gap to 1 shrinks
    geometrically in k for fixed m: the values accumulate at 1 from below,
    which is the cluster phenomenon this table makes visible.  The report
    records, per m, the least witnessing k and the smallest gap.
    """
    if k_max < 1:
        raise FormatError(f"k_max must be >= 1, got {k_max}")
    if m_max < 0:
        raise FormatError(f"m_max must be >= 0, got {m_max}")
    cfg = SeriesConfig(M=M, K=k_max)
    ks = tuple(range(1, k_max + 1))
    models = {k: single_term_series(cfg, k) for k in ks}
    rows = []
    for m in range(m_max + 1):
        xs = []
        witness = None
        for k in ks:
            res = integrability_threshold(models[k], (0, m))
            xs.append(res.value)
            if witness is None and res.value < 1:
                witness = k
        gaps = [1 - x for x in xs]
        rows.append(
            ClusterRow(m=m, xi=tuple(xs), min_gap=min(gaps), witness_k=witness)
        )
    return ClusterReport(
        M=M,
        k_values=ks,
        rows=tuple(rows),
        all_witnessed=all(r.witness_k is not None for r in rows),
    )


@dataclass(frozen=True)
class GapWitness:
    """A monomial separating the ideals of a model family from a candidate model.

    z_2^m lies in I(c * candidate) but not in I(c * phi_k0): the candidate
    cannot be equisingular to the family because its spectrum misses the
    jumping value sitting below c.
    """

    m: int
    c: Fraction
    k0: int
    threshold_series: Fraction
    threshold_candidate: Fraction | None


def equisingular_gap_witness(
    cfg: SeriesConfig, candidate: ToricModel, m_max: int = 32
) -> GapWitness | None:
    """Search for (m, c) with c < 1, z_2^m in I(c*candidate) \\ I(c*phi^(k0)).

    Scans truncations k0 = 1..cfg.K of the cluster series against the
    candidate.  Returns the first witness found (smallest k0, then m), or
    None if the scan box is exhausted.
    """
    for k0 in range(1, cfg.K + 1):
        truncated = build_cluster_series(SeriesConfig(M=cfg.M, K=k0))
        for m in range(m_max + 1):
            t_series = integrability_threshold(truncated, (0, m))
            if t_series.is_infinite or t_series.value >= 1:
                continue
            t_cand = integrability_threshold(candidate, (0, m))
            cap = Fraction(1) if t_cand.is_infinite else min(Fraction(1), t_cand.value)
            if t_series.value < cap:
                c = (t_series.value + cap) / 2
                return GapWitness(
                    m=m,
                    c=c,
                    k0=k0,
                    threshold_series=t_series.value,
                    threshold_candidate=None if t_cand.is_infinite else t_cand.value,
                )
    return None


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def spectrum_to_tsv(table: SpectrumTable) -> str:
    """TSV with one row per (threshold, witness) pair."""
    lines = ["threshold_num\tthreshold_den\twitness_a1\twitness_a2"]
    for value, witnesses in table.entries:
        for a1, a2 in witnesses:
            lines.append(f"{value.numerator}\t{value.denominator}\t{a1}\t{a2}")
    return "\n".join(lines) + "\n"


def spectrum_to_dict(table: SpectrumTable) -> dict:
    return {
        "degree_bound": table.degree_bound,
        "cutoff": str(table.cutoff),
        "entries": [
            {"threshold": str(v), "witnesses": [[a1, a2] for a1, a2 in ws]}
            for v, ws in table.entries
        ],
    }
