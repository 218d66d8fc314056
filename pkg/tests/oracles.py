"""Independent reference implementations used to check browkit's numerics.

Nothing here imports browkit. Each oracle takes the slow-but-obvious route:
grid search for the point-to-line distance, adaptive quadrature of the t
density for p-values, direct analytic evaluation for resampling targets.
"""

import math

import numpy as np
from scipy import integrate


def grid_line_distance(p, a, b, iterations=5, half_width=100.0, grid=2001):
    """min_t ||p - (a + t(b - a))|| by repeatedly refined grid search."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    lo, hi = -half_width, half_width
    best_t = 0.0
    for _ in range(iterations):
        ts = np.linspace(lo, hi, grid)
        pts = a[None, :] + ts[:, None] * d[None, :]
        dists = np.linalg.norm(pts - p[None, :], axis=1)
        i = int(np.argmin(dists))
        best_t = ts[i]
        step = ts[1] - ts[0]
        lo, hi = best_t - 2 * step, best_t + 2 * step
    return float(np.linalg.norm(a + best_t * d - p))


def t_density(x, df):
    log_c = (
        math.lgamma((df + 1.0) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
    )
    return math.exp(log_c - (df + 1.0) / 2.0 * math.log1p(x * x / df))


def quadrature_p_two_sided(t, df):
    """2 * P(T > |t|) by adaptive quadrature of the t density."""
    tail, _ = integrate.quad(
        t_density, abs(t), np.inf, args=(df,), epsabs=1e-14, epsrel=1e-12, limit=200
    )
    return 2.0 * tail


def triangle_wave(t, period, lo=0.0, hi=1.0):
    """Sawtooth (triangle) wave: lo at multiples of the period, hi at half-periods."""
    phase = np.mod(np.asarray(t, dtype=float) / period, 1.0)
    return lo + (hi - lo) * (1.0 - np.abs(2.0 * phase - 1.0))
