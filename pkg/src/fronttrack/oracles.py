"""Independent exact solutions for the convergence studies.

Each oracle maps a time to a piecewise description of the exact profile:
a list of (x_lo, x_hi, payload) where payload is either a constant state
vector or a scalar callable on x. These are written from the closed-form
solutions (Rankine-Hugoniot speeds, centered fans, envelope tangency,
characteristic translates), never from the solver under test.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError


def burgers_riemann_oracle(uL, uR, x0=0.0):
    """Exact entropy solution of Burgers with a single initial jump."""

    def pieces(t, lo, hi):
        if t <= 0:
            return [(lo, x0, np.array([uL])), (x0, hi, np.array([uR]))]
        if uL > uR:
            xs = x0 + 0.5 * (uL + uR) * t
            return [(lo, xs, np.array([uL])), (xs, hi, np.array([uR]))]
        xa, xb = x0 + uL * t, x0 + uR * t
        return [(lo, xa, np.array([uL])),
                (xa, xb, lambda x: (x - x0) / t),
                (xb, hi, np.array([uR]))]

    return pieces


def cubic_riemann_oracle(uL=-1.0, uR=1.0, x0=0.0):
    """Exact solution for f = u^3/3 between -1 and 1: shock from -1 to 1/2 at
    speed 1/4 (convex-envelope tangency 2u^3 + 3u^2 - 1 = 0), then the fan
    u = sqrt(x/t) up to speed 1."""
    if not (uL == -1.0 and uR == 1.0):
        raise ConfigError("diagnostics.convergence", "cubic oracle is pinned to uL=-1, uR=1")

    def pieces(t, lo, hi):
        if t <= 0:
            return [(lo, x0, np.array([uL])), (x0, hi, np.array([uR]))]
        xs = x0 + 0.25 * t
        xb = x0 + 1.0 * t
        return [(lo, xs, np.array([-1.0])),
                (xs, xb, lambda x: math.sqrt((x - x0) / t)),
                (xb, hi, np.array([1.0]))]

    return pieces


def linear_system_oracle(model, xs, values):
    """Characteristic translates of piecewise-constant data for f(u) = Mu."""
    sys = model.point_eig(np.zeros(model.N))
    xs = [float(x) for x in xs]
    values = [np.asarray(v, dtype=float) for v in values]

    def state_at(x):
        u = values[0]
        for xj, vj in zip(xs, values[1:]):
            if xj <= x:
                u = vj
            else:
                break
        return u

    def pieces(t, lo, hi):
        cuts = sorted({lo, hi} | {xj + lam * t for xj in xs for lam in sys.lambdas})
        cuts = [c for c in cuts if lo <= c <= hi]
        out = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            xm = 0.5 * (a + b)
            u = np.zeros(model.N)
            for k in range(model.N):
                lam = sys.lambdas[k]
                u = u + (sys.left[k] @ state_at(xm - lam * t)) * sys.right[k]
            out.append((a, b, u))
        return out

    return pieces


def _simpson(fn, a, b, n=32):
    # n even subintervals
    xs = np.linspace(a, b, n + 1)
    ys = np.array([fn(x) for x in xs])
    h = (b - a) / n
    return h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())


def l1_error(field, oracle_pieces, lo, hi):
    """L1 distance between a piecewise-constant field and an oracle profile
    over [lo, hi]; exact on constant pieces, Simpson elsewhere (vector norms
    are the 1-norm)."""
    cuts = {lo, hi}
    cuts.update(f.x for f in field.fronts if lo < f.x < hi)
    for (a, b, payload) in oracle_pieces:
        if lo < a < hi:
            cuts.add(a)
        if lo < b < hi:
            cuts.add(b)
    cuts = sorted(cuts)
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        xm = 0.5 * (a + b)
        u_num = field.state_at(xm)
        payload = None
        for (pa, pb, pl) in oracle_pieces:
            if pa <= xm <= pb:
                payload = pl
                break
        if payload is None:
            raise ConfigError("diagnostics.convergence", "oracle window too small")
        if callable(payload):
            c = float(u_num[0])
            total += _piece_l1_scalar(c, payload, a, b)
        else:
            total += float(np.abs(u_num - payload).sum()) * (b - a)
    return total


def _piece_l1_scalar(c, g, a, b):
    """Integral of |c - g(x)| over [a, b] for monotone-ish smooth g: split at
    the sign change of c - g when present, then Simpson on each part."""
    da, db = c - g(a), c - g(b)
    if da * db < 0:
        lo_, hi_ = a, b
        fa = da
        for _ in range(80):
            mid = 0.5 * (lo_ + hi_)
            fm = c - g(mid)
            if fa * fm <= 0:
                hi_ = mid
            else:
                lo_ = mid
                fa = fm
        xstar = 0.5 * (lo_ + hi_)
        return (abs(_simpson(lambda x: c - g(x), a, xstar))
                + abs(_simpson(lambda x: c - g(x), xstar, b)))
    return _simpson(lambda x: abs(c - g(x)), a, b)
