"""One-dimensional radial profile calculus and equisingularity verdicts.

A Profile encodes a radial subharmonic germ u(z) = p(log|z|) through a
convex piecewise-linear p on (-infty, 0] plus one optional -a*log(1-t)
tail term.  The class is the smallest one closed under composition with
the convex reparametrizations used here that still distinguishes bounded
from divergent offsets chi(t) - C0*t, which is exactly what the weighted
difference verdicts hinge on.

Integrability of |z|^(2(k-1)) exp(-2 u) near 0 is the line integral

    int_(-infty)^0 exp(2 k t - 2 p(t)) dt,

decided by tail data alone: it converges iff the tail slope nu = p'(-infty)
is strictly below k (at nu = k the integrand is at least a power of |t|
and still diverges, whatever the log coefficient or offset).

Difference verdicts follow a no-cancellation discipline: two
non-individually-integrable tails cancel only when their tail data agree
exactly and both offsets are trusted; offsets that absorbed a bounded but
unknown correction (restrictions to generic lines) never qualify.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import FormatError, PipelineError
from .model import ToricModel, frac, restrict_tail, restriction_offset_is_exact, pullback_blowup

__all__ = [
    "Segment",
    "Profile",
    "ConvexReparam",
    "DifferenceVerdict",
    "INTEGRABLE",
    "NON_INTEGRABLE",
    "compose_reparam",
    "weighted_exp_integrable",
    "profile_difference_integrable",
    "equi_obstruction_pipeline",
    "profile_from_dict",
    "profile_to_dict",
    "reparam_from_dict",
    "reparam_to_dict",
    "load_profile",
    "load_reparam",
]

INTEGRABLE = "Integrable"
NON_INTEGRABLE = "NonIntegrable"


@dataclass(frozen=True)
class Segment:
    """One linear piece: `slope` applies up to t = `to` (from the previous breakpoint)."""

    slope: Fraction
    to: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", frac(self.slope))
        object.__setattr__(self, "to", frac(self.to))


def _check_segments(segments: tuple[Segment, ...], *, end_at_zero: bool, min_slope=None):
    if not segments:
        raise FormatError("profile needs at least one segment")
    slopes = [s.slope for s in segments]
    if any(s < 0 for s in slopes):
        raise FormatError(f"negative slope in {slopes}")
    if any(earlier > later for earlier, later in zip(slopes, slopes[1:])):
        raise FormatError(f"slopes must be nondecreasing (convexity), got {slopes}")
    tos = [s.to for s in segments]
    if any(earlier >= later for earlier, later in zip(tos, tos[1:])):
        raise FormatError(f"breakpoints must increase, got {tos}")
    if end_at_zero and tos[-1] != 0:
        raise FormatError(f"last breakpoint must be 0, got {tos[-1]}")
    if min_slope is not None and slopes[0] != min_slope:
        raise FormatError(f"first slope must equal the base slope {min_slope}, got {slopes[0]}")


@dataclass(frozen=True)
class Profile:
    """Convex piecewise-linear p(t) on (-infty, 0] plus an optional log tail.

    p(t) = tail_offset + nu * t - log_coeff * log(1 - t) on the first
    segment, continued affinely through the breakpoints; nu is the first
    slope and equals the Lelong number of the radial germ.  offset_exact
    records whether tail_offset is trusted for cancellation arguments or
    only known up to a bounded correction.
    """

    segments: tuple[Segment, ...]
    tail_offset: Fraction = Fraction(0)
    log_coeff: Fraction = Fraction(0)
    offset_exact: bool = True

    def __post_init__(self):
        segs = tuple(
            s if isinstance(s, Segment) else Segment(*s) for s in self.segments
        )
        _check_segments(segs, end_at_zero=True)
        a = frac(self.log_coeff)
        if a < 0:
            raise FormatError(f"log coefficient must be >= 0, got {a}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "tail_offset", frac(self.tail_offset))
        object.__setattr__(self, "log_coeff", a)

    @property
    def tail_slope(self) -> Fraction:
        return self.segments[0].slope

    def tail_data(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.tail_slope, self.tail_offset, self.log_coeff)

    def piecewise_value(self, t) -> Fraction:
        """Exact value of the piecewise-linear part at t <= 0 (log tail excluded)."""
        t = frac(t)
        if t > 0:
            raise FormatError(f"profiles live on t <= 0, got {t}")
        # anchor: first segment passes through value tail_offset at t = 0 extrapolated
        value = self.tail_offset + self.segments[0].slope * t
        prev_to = None
        for seg, nxt in zip(self.segments, self.segments[1:]):
            if t <= seg.to:
                break
            # cross the breakpoint seg.to: continue with the next slope
            value = value + (nxt.slope - seg.slope) * (t - seg.to)
        return value

    def value(self, t) -> float:
        """Float value including the log tail, for numeric cross-checks."""
        import math

        t = frac(t)
        return float(self.piecewise_value(t)) - float(self.log_coeff) * math.log(1 - float(t))


def linear_profile(slope, offset=0, log_coeff=0, offset_exact: bool = True) -> Profile:
    """Single-segment profile slope * t + offset (- log_coeff * log(1 - t))."""
    return Profile(
        segments=(Segment(frac(slope), Fraction(0)),),
        tail_offset=frac(offset),
        log_coeff=frac(log_coeff),
        offset_exact=offset_exact,
    )


@dataclass(frozen=True)
class ConvexReparam:
    """chi(t) = offset + convex PL part (first slope = base_slope) - log_coeff*log(1-t).

    The derivative is >= base_slope everywhere and tends to base_slope at
    -infty; chi(t) - base_slope*t stays bounded iff log_coeff = 0.
    """

    base_slope: Fraction
    pieces: tuple[Segment, ...] = field(default_factory=tuple)
    log_coeff: Fraction = Fraction(0)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        c0 = frac(self.base_slope)
        if c0 <= 0:
            raise FormatError(f"base slope must be positive, got {c0}")
        pieces = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.pieces)
        if not pieces:
            pieces = (Segment(c0, Fraction(0)),)
        _check_segments(pieces, end_at_zero=False, min_slope=c0)
        a = frac(self.log_coeff)
        if a < 0:
            raise FormatError(f"log coefficient must be >= 0, got {a}")
        object.__setattr__(self, "base_slope", c0)
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "log_coeff", a)
        object.__setattr__(self, "offset", frac(self.offset))

    def piecewise_value(self, t) -> Fraction:
        """Exact PL part at any t (log term excluded); extends by the last slope."""
        t = frac(t)
        value = self.offset + self.pieces[0].slope * t
        for seg, nxt in zip(self.pieces, self.pieces[1:]):
            if t <= seg.to:
                return value
            value = value + (nxt.slope - seg.slope) * (t - seg.to)
        return value


def identity_reparam() -> ConvexReparam:
    return ConvexReparam(base_slope=Fraction(1))


@dataclass(frozen=True)
class DifferenceVerdict:
    kind: str
    reason: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "reason": self.reason}


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def compose_reparam(chi: ConvexReparam, p: Profile) -> Profile:
    """Exact tail composition chi(p(t)) as a Profile.

    Requires p to carry no log term (a single log level is supported).
    The piecewise-linear parts compose exactly: within each segment of p
    the composite is linear with slope chi'(p) * p', and crossing either a
    breakpoint of p or a preimage of a breakpoint of chi starts a new
    piece.  The chi log term lands on the tail as
    -a * log(1 - p(t)); rewritten on the standard -a*log(1-t) form its
    bounded discrepancy (the constant log(nu) shift and a vanishing
    remainder) is folded into the offset, so the offset stays exact only
    for the neutral substitution nu = 1, b = 0.
    """
    if p.log_coeff != 0:
        raise FormatError("cannot compose onto a profile that already carries a log term")
    nu = p.tail_slope

    # Collect composite breakpoints: p's own, plus solutions of p(t) = chi breakpoint.
    breaks: set[Fraction] = {seg.to for seg in p.segments}
    segs = list(p.segments)
    for piece in chi.pieces[:-1]:
        target = piece.to
        for i in range(len(segs) - 1, -1, -1):
            seg = segs[i]
            t_lo = segs[i - 1].to if i > 0 else None
            if seg.slope == 0:
                continue
            # on this segment p(t) = p(seg.to) + slope * (t - seg.to)
            t_star = seg.to + (target - p.piecewise_value(seg.to)) / seg.slope
            within_hi = t_star <= seg.to
            within_lo = t_lo is None or t_star > t_lo
            if within_hi and within_lo:
                breaks.add(t_star)
    ordered = sorted(b for b in breaks if b <= 0)
    if not ordered or ordered[-1] != 0:
        ordered.append(Fraction(0))

    def chi_slope_at(v: Fraction) -> Fraction:
        slope = chi.pieces[0].slope
        for piece, nxt in zip(chi.pieces, chi.pieces[1:]):
            if v > piece.to:
                slope = nxt.slope
        return slope

    def p_slope_at(t: Fraction) -> Fraction:
        for seg in p.segments:
            if t <= seg.to:
                return seg.slope
        return p.segments[-1].slope

    segments = []
    prev = None
    for to in ordered:
        # both p' and chi'(p) are constant on the open piece, so one interior
        # sample pins the composite slope
        midpoint = to - 1 if prev is None else (prev + to) / 2
        composite_slope = chi_slope_at(p.piecewise_value(midpoint)) * p_slope_at(midpoint)
        segments.append(Segment(composite_slope, to))
        prev = to
    # collapse equal-slope neighbors
    collapsed = [segments[0]]
    for seg in segments[1:]:
        if seg.slope == collapsed[-1].slope:
            collapsed[-1] = Segment(seg.slope, seg.to)
        else:
            collapsed.append(seg)

    has_log = chi.log_coeff > 0 and nu > 0
    b = p.tail_offset
    tail_offset = chi.offset + chi.base_slope * b
    offset_exact = p.offset_exact and (not has_log or (nu == 1 and b == 0))
    return Profile(
        segments=tuple(collapsed),
        tail_offset=tail_offset,
        log_coeff=chi.log_coeff if has_log else Fraction(0),
        offset_exact=offset_exact,
    )


def weighted_exp_integrable(p: Profile, k: int) -> bool:
    """Whether int exp(2 k t - 2 p(t)) dt over (-infty, 0] is finite.

    True iff the tail slope is strictly below k; the boundary slope k is
    non-integrable regardless of offset or log coefficient.
    """
    if k < 1:
        raise FormatError(f"weight index k must be a positive integer, got {k}")
    return p.tail_slope < k


def _dominates(p1: Profile, p2: Profile) -> bool:
    """Whether exp(-2 p1) eventually dominates exp(-2 p2) as t -> -infty."""
    n1, b1, a1 = p1.tail_data()
    n2, b2, a2 = p2.tail_data()
    if n1 != n2:
        return n1 > n2
    if b1 != b2:
        return b1 < b2
    return a1 >= a2


def profile_difference_integrable(p1: Profile, p2: Profile, k: int) -> DifferenceVerdict:
    """Verdict for int |t-domain weight| * |exp(-2 p1) - exp(-2 p2)|, symbolically.

    Rules, in order: both tails individually integrable; exact tail
    cancellation (identical slope, offset and log coefficient, with both
    offsets trusted); otherwise the dominant tail fails and the difference
    diverges.  No quadrature is involved.
    """
    i1 = weighted_exp_integrable(p1, k)
    i2 = weighted_exp_integrable(p2, k)
    if i1 and i2:
        return DifferenceVerdict(
            INTEGRABLE, f"both tails integrable (slopes {p1.tail_slope}, {p2.tail_slope} < {k})"
        )
    if (
        p1.tail_data() == p2.tail_data()
        and p1.offset_exact
        and p2.offset_exact
    ):
        return DifferenceVerdict(
            INTEGRABLE,
            f"identical tails (slope {p1.tail_slope}, offset {p1.tail_offset}, "
            f"log coeff {p1.log_coeff}) cancel exactly",
        )
    dominant = p1 if _dominates(p1, p2) else p2
    if not weighted_exp_integrable(dominant, k):
        trust = "" if dominant.offset_exact and p1.offset_exact and p2.offset_exact else \
            " (offsets known only up to bounded error, no cancellation assumed)"
        return DifferenceVerdict(
            NON_INTEGRABLE,
            f"dominant tail slope {dominant.tail_slope} >= {k} with no exact cancellation{trust}",
        )
    # unreachable for valid inputs: a dominated tail cannot be the only divergent one
    return DifferenceVerdict(INTEGRABLE, "dominant tail integrable")


def equi_obstruction_pipeline(
    model: ToricModel, chi: ConvexReparam, analytic: Profile
) -> DifferenceVerdict:
    """Obstruction check on generic slices through the blow-up.

    Pipeline: pull the model back under z -> (z_1, z_1 z_2), restrict to a
    generic line {z_2 = const}, read off the tail profile, compose with
    the reparametrization, and compare against the candidate analytic
    profile under the dimension weight k = 2.  The hypothesis

        base_slope * restricted tail slope >= 2

    is enforced; under it a reparametrization with divergent offset
    (log_coeff > 0) always yields NonIntegrable.
    """
    if model.dim != 2:
        raise FormatError("obstruction pipeline is implemented for dimension 2")
    if analytic.log_coeff != 0:
        raise FormatError("analytic comparison profile must have log coefficient 0")
    pulled = pullback_blowup(model)
    tail = restrict_tail(pulled, axis=0)
    product = chi.base_slope * tail.slope
    if product < 2:
        raise PipelineError(
            f"slope hypothesis fails: base_slope * restricted slope = "
            f"{chi.base_slope} * {tail.slope} = {product} < 2"
        )
    exact = restriction_offset_is_exact(pulled, axis=0)
    restricted = linear_profile(tail.slope, offset=0, offset_exact=exact)
    composed = compose_reparam(chi, restricted)
    return profile_difference_integrable(composed, analytic, k=2)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def profile_to_dict(p: Profile) -> dict:
    return {
        "segments": [{"slope": str(s.slope), "to": str(s.to)} for s in p.segments],
        "tail_offset": str(p.tail_offset),
        "log_coeff": str(p.log_coeff),
    }


def profile_from_dict(data: dict) -> Profile:
    try:
        segs = tuple(Segment(frac(s["slope"]), frac(s["to"])) for s in data["segments"])
    except (KeyError, TypeError) as exc:
        raise FormatError("profile object needs 'segments' with 'slope'/'to'") from exc
    return Profile(
        segments=segs,
        tail_offset=frac(data.get("tail_offset", 0)),
        log_coeff=frac(data.get("log_coeff", 0)),
    )


def reparam_to_dict(chi: ConvexReparam) -> dict:
    return {
        "base_slope": str(chi.base_slope),
        "pieces": [{"slope": str(s.slope), "to": str(s.to)} for s in chi.pieces],
        "log_coeff": str(chi.log_coeff),
        "offset": str(chi.offset),
    }


def reparam_from_dict(data: dict) -> ConvexReparam:
    try:
        base = frac(data["base_slope"])
    except (KeyError, TypeError) as exc:
        raise FormatError("reparametrization object needs 'base_slope'") from exc
    pieces = tuple(
        Segment(frac(s["slope"]), frac(s["to"])) for s in data.get("pieces", [])
    )
    return ConvexReparam(
        base_slope=base,
        pieces=pieces,
        log_coeff=frac(data.get("log_coeff", 0)),
        offset=frac(data.get("offset", 0)),
    )


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc


def load_profile(path) -> Profile:
    return profile_from_dict(_load_json(path))


def load_reparam(path) -> ConvexReparam:
    return reparam_from_dict(_load_json(path))
