"""Toric plurisubharmonic models and their structural operations.

A model is a germ at the origin of the form

    phi(z) = sum_j  lambda_j * log( sum_i |z^{a_ji}| )

with positive rational weights lambda_j and nonnegative rational exponent
vectors a_ji.  Everything singular about phi is encoded by the piecewise
linear Newton valuation

    v(phi)(v) = sum_j lambda_j * min_i <v, a_ji>,    v >= 0,

which this module computes exactly with `fractions.Fraction`.  Lelong
numbers, divisorial splits, blow-up pullbacks and restrictions to generic
lines all reduce to evaluations of that valuation; only
`evaluate_log_coords` works in floating point (it feeds the numeric
quadrature oracle).

All types are frozen: operations are pure functions and results do not
depend on evaluation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionError, FormatError

__all__ = [
    "Monomial",
    "LogSumTerm",
    "ToricModel",
    "SeriesConfig",
    "TailData",
    "frac",
    "build_cluster_series",
    "single_term_series",
    "ray_valuation",
    "point_lelong",
    "siu_split",
    "pullback_blowup",
    "restrict_tail",
    "restriction_offset_is_exact",
    "evaluate_log_coords",
    "scale_model",
    "model_to_dict",
    "model_from_dict",
    "load_model",
    "dump_model",
]


def frac(x) -> Fraction:
    """Coerce ints, strings like "3" or "5/6", and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"not a rational: {x!r}") from exc
    raise FormatError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class Monomial:
    """Exponent vector of |z^a| = |z_1|^{a_1} ... |z_n|^{a_n}, entries >= 0."""

    exponents: tuple[Fraction, ...]

    def __post_init__(self):
        exps = tuple(frac(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise FormatError(f"negative exponent in monomial {exps}")
        object.__setattr__(self, "exponents", exps)

    def __len__(self) -> int:
        return len(self.exponents)

    def __getitem__(self, i: int) -> Fraction:
        return self.exponents[i]

    def __iter__(self):
        return iter(self.exponents)

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.exponents)


def _as_monomial(m, dim: int | None = None) -> Monomial:
    mono = m if isinstance(m, Monomial) else Monomial(tuple(frac(e) for e in m))
    if dim is not None and len(mono) != dim:
        raise DimensionError(f"monomial {tuple(mono)} has length {len(mono)}, expected {dim}")
    return mono


@dataclass(frozen=True)
class LogSumTerm:
    """One summand lambda * log(|z^{a_1}| + ... + |z^{a_N}|), lambda > 0."""

    weight: Fraction
    monomials: tuple[Monomial, ...]

    def __post_init__(self):
        w = frac(self.weight)
        if w <= 0:
            raise FormatError(f"term weight must be positive, got {w}")
        monos = tuple(_as_monomial(m) for m in self.monomials)
        if not monos:
            raise FormatError("term must contain at least one monomial")
        dims = {len(m) for m in monos}
        if len(dims) != 1:
            raise DimensionError(f"monomials of mixed lengths {sorted(dims)} in one term")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "monomials", monos)

    @property
    def dim(self) -> int:
        return len(self.monomials[0])


@dataclass(frozen=True)
class ToricModel:
    """A toric psh germ: positive combination of log-sums of monomial moduli."""

    dim: int
    terms: tuple[LogSumTerm, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"dimension must be >= 1, got {self.dim}")
        terms = tuple(self.terms)
        for t in terms:
            if t.dim != self.dim:
                raise DimensionError(f"term of dimension {t.dim} in a {self.dim}-dimensional model")
        object.__setattr__(self, "terms", terms)


def term(weight, monomials: Iterable) -> LogSumTerm:
    """Convenience constructor: term("1/2", [(1, 0), (0, 4)])."""
    return LogSumTerm(frac(weight), tuple(_as_monomial(m) for m in monomials))


def model(dim: int, raw_terms: Iterable[tuple]) -> ToricModel:
    """Convenience constructor: model(2, [("1", [(1, 0)]), ("1/2", [(1, 0), (0, 4)])])."""
    return ToricModel(dim, tuple(term(w, ms) for w, ms in raw_terms))


@dataclass(frozen=True)
class SeriesConfig:
    """Parameters of the geometric cluster series.

    Level k of the series carries weight M^-k and degree M^(2k); their
    product M^k is what drives thresholds toward 1 from below.
    """

    M: int
    K: int

    def __post_init__(self):
        if self.M < 2:
            raise FormatError(f"series base M must be >= 2, got {self.M}")
        if self.K < 1:
            raise FormatError(f"truncation level K must be >= 1, got {self.K}")

    def weight(self, k: int) -> Fraction:
        """Level-k weight M^-k."""
        return Fraction(1, self.M ** k)

    def degree(self, k: int) -> int:
        """Level-k degree M^(2k)."""
        return self.M ** (2 * k)


@dataclass(frozen=True)
class TailData:
    """Tail of a model restricted to a generic line: slope plus a bounded remainder."""

    slope: Fraction
    bounded_correction: bool = True

    def __post_init__(self):
        s = frac(self.slope)
        if s < 0:
            raise FormatError(f"tail slope must be >= 0, got {s}")
        object.__setattr__(self, "slope", s)


# ---------------------------------------------------------------------------
# model builders
# ---------------------------------------------------------------------------

def build_cluster_series(cfg: SeriesConfig) -> ToricModel:
    """Truncated cluster series in dimension 2.

    log|z_1| + sum_{k=1..K} M^-k * log(|z_1| + |z_2|^{M^(2k)}).

    The thresholds of z_2-monomials against the level-k summand approach 1
    as k grows, which is the whole point of this model.
    """
    terms = [term(1, [(1, 0)])]
    for k in range(1, cfg.K + 1):
        terms.append(term(cfg.weight(k), [(1, 0), (0, cfg.degree(k))]))
    return ToricModel(2, tuple(terms))


def single_term_series(cfg: SeriesConfig, k: int) -> ToricModel:
    """One level of the series: log|z_1| + M^-k * log(|z_1| + |z_2|^{M^(2k)})."""
    if not 1 <= k:
        raise FormatError(f"series level must be >= 1, got {k}")
    return ToricModel(2, (term(1, [(1, 0)]), term(cfg.weight(k), [(1, 0), (0, cfg.degree(k))])))


# ---------------------------------------------------------------------------
# exact structural operations
# ---------------------------------------------------------------------------

def _check_ray(model: ToricModel, v: Sequence) -> tuple[Fraction, ...]:
    ray = tuple(frac(c) for c in v)
    if len(ray) != model.dim:
        raise DimensionError(f"ray of length {len(ray)} against a {model.dim}-dimensional model")
    if any(c < 0 for c in ray):
        raise FormatError(f"ray must be componentwise nonnegative, got {ray}")
    if all(c == 0 for c in ray):
        raise FormatError("ray must be nonzero")
    return ray


def ray_valuation(model: ToricModel, v: Sequence) -> Fraction:
    """Newton valuation sum_j lambda_j * min_i <v, a_ji>, exact.

    This is the linear growth rate of -phi along the logarithmic ray v:
    positively homogeneous of degree 1 in v and additive over terms.
    """
    ray = _check_ray(model, v)
    total = Fraction(0)
    for t in model.terms:
        total += t.weight * min(sum(c * e for c, e in zip(ray, m)) for m in t.monomials)
    return total


def point_lelong(model: ToricModel, vanishing_axis: int | None = None) -> Fraction:
    """Lelong number at the origin, or at a generic point of one coordinate hyperplane.

    With no axis this is the valuation at the all-ones ray.  With
    vanishing_axis = i it is the valuation at the i-th basis ray, the
    Lelong number at a point of {z_i = 0} whose other coordinates are
    nonzero.  Points with two or more vanishing coordinates reduce to
    lower-dimensional models and are out of scope here.
    """
    if vanishing_axis is None:
        return ray_valuation(model, (1,) * model.dim)
    if not 0 <= vanishing_axis < model.dim:
        raise DimensionError(f"axis {vanishing_axis} out of range for dimension {model.dim}")
    e = tuple(Fraction(int(i == vanishing_axis)) for i in range(model.dim))
    return ray_valuation(model, e)


def siu_split(model: ToricModel) -> tuple[tuple[Fraction, ...], ToricModel]:
    """Divisorial split along the coordinate hyperplanes.

    Returns (coeffs, residual) with coeffs[i] the generic Lelong number of
    the model along {z_i = 0} and residual the model left after factoring
    |z_i|^{coeffs[i]} out of every term.  For every ray v,

        ray_valuation(model, v) = <coeffs, v> + ray_valuation(residual, v),

    and the residual has valuation 0 at every basis ray.  Residual terms
    whose monomials are all zero are constants and are dropped.
    """
    coeffs = [Fraction(0)] * model.dim
    res_terms = []
    for t in model.terms:
        mins = tuple(min(m[i] for m in t.monomials) for i in range(model.dim))
        for i in range(model.dim):
            coeffs[i] += t.weight * mins[i]
        shifted = tuple(
            Monomial(tuple(m[i] - mins[i] for i in range(model.dim))) for m in t.monomials
        )
        if not all(m.is_zero() for m in shifted):
            res_terms.append(LogSumTerm(t.weight, shifted))
    return tuple(coeffs), ToricModel(model.dim, tuple(res_terms))


def pullback_blowup(model: ToricModel) -> ToricModel:
    """Pullback under z -> (z_1, z_1 z_2, ..., z_1 z_n).

    The map is an isomorphism off {z_1 = 0}; on exponent vectors it acts
    linearly by a -> (a_1 + ... + a_n, a_2, ..., a_n), so weights are kept
    and only monomials move.
    """
    if model.dim < 2:
        raise DimensionError("blow-up pullback needs dimension >= 2")
    new_terms = []
    for t in model.terms:
        monos = tuple(
            Monomial((sum(m.exponents, Fraction(0)),) + m.exponents[1:]) for m in t.monomials
        )
        new_terms.append(LogSumTerm(t.weight, monos))
    return ToricModel(model.dim, tuple(new_terms))


def restrict_tail(model: ToricModel, axis: int) -> TailData:
    """Tail of the restriction to a line where all coordinates but z_axis are generic nonzero.

    Freezing the other coordinates turns each term into
    log(sum_i c_i |z|^{a_i,axis}); as z -> 0 that is
    (min_i a_i,axis) * log|z| plus a bounded correction, so the restricted
    germ has Lelong number sum_j lambda_j * min_i (a_ji)_axis.
    """
    if not 0 <= axis < model.dim:
        raise DimensionError(f"axis {axis} out of range for dimension {model.dim}")
    slope = Fraction(0)
    for t in model.terms:
        slope += t.weight * min(m[axis] for m in t.monomials)
    return TailData(slope=slope, bounded_correction=True)


def restriction_offset_is_exact(model: ToricModel, axis: int) -> bool:
    """Whether the bounded correction of restrict_tail vanishes exactly.

    True when in every term the minimal axis exponent is attained by a
    single monomial whose other exponents are all zero: the restricted term
    is then min_exp * log|z| + log(1 + o(1)) with no generic constant left
    over, so tail offsets may be trusted for cancellation arguments.
    """
    if not 0 <= axis < model.dim:
        raise DimensionError(f"axis {axis} out of range for dimension {model.dim}")
    for t in model.terms:
        mn = min(m[axis] for m in t.monomials)
        argmins = [m for m in t.monomials if m[axis] == mn]
        if len(argmins) != 1:
            return False
        if any(e != 0 for i, e in enumerate(argmins[0]) if i != axis):
            return False
    return True


def scale_model(model: ToricModel, s) -> ToricModel:
    """Multiply every weight by s > 0; thresholds divide by s exactly."""
    s = frac(s)
    if s <= 0:
        raise FormatError(f"scale must be positive, got {s}")
    return ToricModel(
        model.dim, tuple(LogSumTerm(t.weight * s, t.monomials) for t in model.terms)
    )


# ---------------------------------------------------------------------------
# floating-point evaluation (feeds the numeric oracle)
# ---------------------------------------------------------------------------

def evaluate_log_coords(model: ToricModel, x: Sequence[float]) -> float:
    """Value of -phi at |z_i| = exp(-x_i), x >= 0, underflow-safe.

    Per term the dominant exponent is factored out before summing, so the
    result differs from the exact valuation sum_j lambda_j min_i <a_ji, x>
    by at most sum_j lambda_j * log(#monomials of term j).
    """
    xs = [float(c) for c in x]
    if len(xs) != model.dim:
        raise DimensionError(f"point of length {len(xs)} against a {model.dim}-dimensional model")
    total = 0.0
    for t in model.terms:
        dots = [sum(float(e) * c for e, c in zip(m, xs)) for m in t.monomials]
        m0 = min(dots)
        acc = sum(math.exp(m0 - d) for d in dots)
        total += float(t.weight) * (m0 - math.log(acc))
    return total


# ---------------------------------------------------------------------------
# model file format (JSON with rationals as "p/q" strings)
# ---------------------------------------------------------------------------

def model_to_dict(model: ToricModel) -> dict:
    return {
        "dim": model.dim,
        "terms": [
            {
                "weight": str(t.weight),
                "monomials": [[str(e) for e in m] for m in t.monomials],
            }
            for t in model.terms
        ],
    }


def model_from_dict(data: dict) -> ToricModel:
    if not isinstance(data, dict):
        raise FormatError("model file must hold a JSON object")
    try:
        dim = data["dim"]
        raw_terms = data["terms"]
    except (KeyError, TypeError) as exc:
        raise FormatError("model object needs 'dim' and 'terms'") from exc
    if not isinstance(dim, int):
        raise FormatError(f"'dim' must be an integer, got {dim!r}")
    terms = []
    for rt in raw_terms:
        try:
            w = rt["weight"]
            monos = rt["monomials"]
        except (KeyError, TypeError) as exc:
            raise FormatError("each term needs 'weight' and 'monomials'") from exc
        terms.append(term(frac(w), [[frac(e) for e in m] for m in monos]))
    return ToricModel(dim, tuple(terms))


def dump_model(model: ToricModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> ToricModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc
    return model_from_dict(data)
