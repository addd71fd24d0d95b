"""Cubic Hermite dense output on uniform grids and finite-difference slopes."""
import numpy as np

# node snapping: a query within this many grid spacings of a node returns the node value
_SNAP = 1e-9


def _locate(t0, h, n_intervals, t):
    k = (np.asarray(t, dtype=float) - t0) / h
    r = np.rint(k)
    on_node = np.abs(k - r) < _SNAP
    idx = np.clip(np.floor(k).astype(int), 0, n_intervals - 1)
    s = k - idx
    return k, r.astype(int), on_node, idx, s


def hermite_eval(t0, h, values, slopes, t):
    """Evaluate the C1 piecewise cubic through (values, slopes) on the grid t0 + i h.

    Exact at grid nodes. ``t`` may be a scalar or an array; no range check here.
    """
    values = np.asarray(values)
    slopes = np.asarray(slopes)
    n = values.shape[0] - 1
    _, r, on_node, idx, s = _locate(t0, h, n, t)
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    out = (h00 * values[idx] + h10 * h * slopes[idx]
           + h01 * values[idx + 1] + h11 * h * slopes[idx + 1])
    snapped = values[np.clip(r, 0, n)]
    out = np.where(on_node, snapped, out)
    return out[()] if np.ndim(out) == 0 else out


def hermite_slope(t0, h, values, slopes, t):
    """Derivative of the Hermite interpolant (equals the stored slope at nodes)."""
    values = np.asarray(values)
    slopes = np.asarray(slopes)
    n = values.shape[0] - 1
    _, r, on_node, idx, s = _locate(t0, h, n, t)
    s2 = s * s
    d00 = (6 * s2 - 6 * s) / h
    d10 = 3 * s2 - 4 * s + 1
    d01 = (-6 * s2 + 6 * s) / h
    d11 = 3 * s2 - 2 * s
    out = d00 * values[idx] + d10 * slopes[idx] + d01 * values[idx + 1] + d11 * slopes[idx + 1]
    out = np.where(on_node, slopes[np.clip(r, 0, n)], out)
    return out[()] if np.ndim(out) == 0 else out


def fd_slopes(values, h):
    """Fourth-order finite-difference derivative of uniformly sampled data.

    Central 5-point stencil inside, one-sided 5-point stencils on the two
    outermost nodes at each end. Needs at least 5 samples.
    """
    f = np.asarray(values, dtype=float)
    if f.size < 5:
        raise ValueError("need at least 5 samples for 4th-order slopes")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d
