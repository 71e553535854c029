"""Hot quadrature kernels: numba-jitted loops with a pure-numpy fallback.

The numeric oracle spends essentially all of its time evaluating
log-shell-masses

    log S_j = log  int_{j <= |x|_1 < j+1, x >= 0}  exp(-2 g(x)) dx

on Gauss-Legendre grids, where g(x) = <b, x> - c * u(x) and u is the
underflow-safe log-coordinate value of a toric model (see
`mitlab.model.evaluate_log_coords`).  Models reach the kernels in packed
CSR-like form (weight per term, flat exponent rows, term start offsets);
the angular nodes and log-weights are preassembled by the caller, which
panels them at the model's breakpoint directions so that the 1/j-wide
critical ridges near a threshold stay resolved at every shell.

Backend selection: the environment variable MITLAB_BACKEND may be set to
"numba" or "numpy"; unset, numba is used when importable.  Both backends
use the same grids and the same summation structure; they agree to
floating-point roundoff (asserted in the test suite) but are not required
to be bit-identical with each other.  Within one backend results are
deterministic: grids are fixed, reductions run in a fixed order, and no
threading enters the reductions.

MITLAB_THREADS caps process-level parallelism; the kernels themselves are
single-threaded and release the GIL under numba (nogil=True), so callers
may fan out over models or shells with threads and still get
scheduling-independent results.

`benchmarks/bench_kernels.py` compares the two backends on a reference
workload.
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "HAVE_NUMBA",
    "active_backend",
    "thread_cap",
    "shell_masses_2d",
    "diff_shell_masses_2d",
    "shell_masses_2d_numpy",
    "diff_shell_masses_2d_numpy",
    "shell_masses_nd_numpy",
]

_ENV_BACKEND = "MITLAB_BACKEND"
_ENV_THREADS = "MITLAB_THREADS"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def _pick_backend() -> str:
    req = os.environ.get(_ENV_BACKEND, "").strip().lower()
    if req in ("numba", "numpy"):
        if req == "numba" and not HAVE_NUMBA:
            raise RuntimeError("MITLAB_BACKEND=numba but numba is not importable")
        return req
    if req:
        raise RuntimeError(f"unknown {_ENV_BACKEND}={req!r}; expected 'numba' or 'numpy'")
    return "numba" if HAVE_NUMBA else "numpy"


_BACKEND = _pick_backend()


def active_backend() -> str:
    return _BACKEND


def thread_cap() -> int:
    """Parallelism cap from MITLAB_THREADS, defaulting to the CPU count."""
    raw = os.environ.get(_ENV_THREADS, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise RuntimeError(f"{_ENV_THREADS} must be an integer, got {raw!r}") from exc
    return max(1, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _log_u_numpy(weights, exps, starts, X):
    """u(x) = -phi at the column points X (shape (dim, N)), max-factored per term."""
    D = exps @ X  # (rows, N)
    mins = np.minimum.reduceat(D, starts[:-1], axis=0)  # (terms, N)
    row_term = np.repeat(np.arange(len(weights)), np.diff(starts))
    E = np.exp(mins[row_term] - D)
    sums = np.add.reduceat(E, starts[:-1], axis=0)
    return weights @ (mins - np.log(sums))


def _logsumexp_1d(vals):
    m = vals.max()
    if not np.isfinite(m):
        return -np.inf
    return float(m + np.log(np.exp(vals - m).sum()))


def shell_masses_2d_numpy(weights, exps, starts, b1, b2, c, j0, count, sx, slw, tx, tlw):
    """log S_j for shells j0..j0+count-1.

    sx/slw: radial Gauss-Legendre nodes on (0, 1) and log-weights;
    tx/tlw: angular nodes on (0, 1) and log-weights, already paneled.
    x = s * (t, 1 - t) with s = j + sx, Jacobian s.
    """
    out = np.empty(count)
    pair_logw = (slw[:, None] + tlw[None, :]).ravel()
    for idx in range(count):
        s = (j0 + idx) + sx
        x1 = np.outer(s, tx).ravel()
        x2 = np.outer(s, 1.0 - tx).ravel()
        u = _log_u_numpy(weights, exps, starts, np.vstack((x1, x2)))
        g = b1 * x1 + b2 * x2 - c * u
        logvals = -2.0 * g + np.repeat(np.log(s), tx.size) + pair_logw
        out[idx] = _logsumexp_1d(logvals)
    return out


def diff_shell_masses_2d_numpy(
    weights1, exps1, starts1, weights2, exps2, starts2, wexp, j0, count, sx, slw, tx, tlw
):
    out = np.empty(count)
    pair_logw = (slw[:, None] + tlw[None, :]).ravel()
    for idx in range(count):
        s = (j0 + idx) + sx
        x1 = np.outer(s, tx).ravel()
        x2 = np.outer(s, 1.0 - tx).ravel()
        X = np.vstack((x1, x2))
        u1 = _log_u_numpy(weights1, exps1, starts1, X)
        u2 = _log_u_numpy(weights2, exps2, starts2, X)
        delta = 2.0 * np.abs(u1 - u2)
        with np.errstate(divide="ignore"):
            logabs = np.where(
                delta > 0.0,
                2.0 * np.maximum(u1, u2)
                + np.log1p(-np.exp(-np.where(delta > 0.0, delta, 1.0))),
                -np.inf,
            )
        logvals = (
            -2.0 * (x1 + x2) - 2.0 * wexp * x1 + logabs
            + np.repeat(np.log(s), tx.size) + pair_logw
        )
        out[idx] = _logsumexp_1d(logvals)
    return out


def shell_masses_nd_numpy(weights, exps, starts, bvec, c, j0, count, gx, gw, dim):
    """General-dimension shells via stick-breaking simplex coordinates.

    x = s * w(u) with u in [0,1]^(dim-1); the volume element is
    s^(dim-1) * prod r_i.  Plain tensor grid, no paneling: accuracy
    degrades with dimension and near thresholds.
    """
    n = gx.size
    half = 0.5 * (gx + 1.0)
    logw = np.log(gw) + math.log(0.5)
    axes = dim - 1
    grids = np.meshgrid(*([half] * axes), indexing="ij")
    U = np.stack([g.ravel() for g in grids])  # (axes, P)
    wgrids = np.meshgrid(*([logw] * axes), indexing="ij")
    u_logw = np.add.reduce([g.ravel() for g in wgrids])
    P = U.shape[1]
    W = np.empty((dim, P))
    r = np.ones(P)
    log_jac_u = np.zeros(P)
    for i in range(axes):
        W[i] = U[i] * r
        r = r * (1.0 - U[i])
        if i < dim - 2:
            log_jac_u += np.log(r)
    W[dim - 1] = r
    out = np.empty(count)
    for idx in range(count):
        s = (j0 + idx) + half
        # X[:, a*P + p] = s[a] * W[:, p]
        X = (s[None, :, None] * W[:, None, :]).reshape(dim, n * P)
        u = _log_u_numpy(weights, exps, starts, X)
        g = bvec @ X - c * u
        lv = -2.0 * g.reshape(n, P)
        lv += ((dim - 1) * np.log(s) + logw)[:, None]  # radial jacobian + radial GL weight
        lv += (log_jac_u + u_logw)[None, :]  # simplex jacobian + simplex GL weights
        out[idx] = _logsumexp_1d(lv.ravel())
    return out


# ---------------------------------------------------------------------------
# numba backend (dim 2 hot paths)
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _log_u_point_nb(weights, exps, starts, x1, x2):
    total = 0.0
    for ti in range(weights.shape[0]):
        lo = starts[ti]
        hi = starts[ti + 1]
        dmin = 1e300
        for r in range(lo, hi):
            d = exps[r, 0] * x1 + exps[r, 1] * x2
            if d < dmin:
                dmin = d
        acc = 0.0
        for r in range(lo, hi):
            d = exps[r, 0] * x1 + exps[r, 1] * x2
            acc += math.exp(dmin - d)
        total += weights[ti] * (dmin - math.log(acc))
    return total


@njit(cache=True, nogil=True)
def _shell_masses_2d_nb(weights, exps, starts, b1, b2, c, j0, count, sx, slw, tx, tlw):
    ns = sx.shape[0]
    nt = tx.shape[0]
    out = np.empty(count)
    vals = np.empty(ns * nt)
    for idx in range(count):
        j = j0 + idx
        vmax = -np.inf
        p = 0
        for a in range(ns):
            s = j + sx[a]
            base = math.log(s) + slw[a]
            for b in range(nt):
                x1 = s * tx[b]
                x2 = s * (1.0 - tx[b])
                u = _log_u_point_nb(weights, exps, starts, x1, x2)
                g = b1 * x1 + b2 * x2 - c * u
                v = -2.0 * g + base + tlw[b]
                vals[p] = v
                if v > vmax:
                    vmax = v
                p += 1
        if vmax == -np.inf:
            out[idx] = -np.inf
        else:
            acc = 0.0
            for q in range(ns * nt):
                acc += math.exp(vals[q] - vmax)
            out[idx] = vmax + math.log(acc)
    return out


@njit(cache=True, nogil=True)
def _diff_shell_masses_2d_nb(
    weights1, exps1, starts1, weights2, exps2, starts2, wexp, j0, count, sx, slw, tx, tlw
):
    ns = sx.shape[0]
    nt = tx.shape[0]
    out = np.empty(count)
    vals = np.empty(ns * nt)
    for idx in range(count):
        j = j0 + idx
        vmax = -np.inf
        p = 0
        for a in range(ns):
            s = j + sx[a]
            base = math.log(s) + slw[a]
            for b in range(nt):
                x1 = s * tx[b]
                x2 = s * (1.0 - tx[b])
                u1 = _log_u_point_nb(weights1, exps1, starts1, x1, x2)
                u2 = _log_u_point_nb(weights2, exps2, starts2, x1, x2)
                delta = u1 - u2
                if delta < 0.0:
                    delta = -delta
                if delta == 0.0:
                    v = -np.inf
                else:
                    umax = u1 if u1 > u2 else u2
                    logabs = 2.0 * umax + math.log1p(-math.exp(-2.0 * delta))
                    v = -2.0 * (x1 + x2) - 2.0 * wexp * x1 + logabs + base + tlw[b]
                vals[p] = v
                if v > vmax:
                    vmax = v
                p += 1
        if vmax == -np.inf:
            out[idx] = -np.inf
        else:
            acc = 0.0
            for q in range(ns * nt):
                if vals[q] > -np.inf:
                    acc += math.exp(vals[q] - vmax)
            out[idx] = vmax + math.log(acc)
    return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def shell_masses_2d(weights, exps, starts, b1, b2, c, j0, count, sx, slw, tx, tlw):
    if _BACKEND == "numba":
        return _shell_masses_2d_nb(
            weights, exps, starts, b1, b2, c, j0, count, sx, slw, tx, tlw
        )
    return shell_masses_2d_numpy(
        weights, exps, starts, b1, b2, c, j0, count, sx, slw, tx, tlw
    )


def diff_shell_masses_2d(
    weights1, exps1, starts1, weights2, exps2, starts2, wexp, j0, count, sx, slw, tx, tlw
):
    if _BACKEND == "numba":
        return _diff_shell_masses_2d_nb(
            weights1, exps1, starts1, weights2, exps2, starts2, wexp, j0, count, sx, slw, tx, tlw
        )
    return diff_shell_masses_2d_numpy(
        weights1, exps1, starts1, weights2, exps2, starts2, wexp, j0, count, sx, slw, tx, tlw
    )
