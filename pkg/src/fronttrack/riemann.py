"""Riemann machinery: elementary curves, scalar envelope fans, and the
accurate / simplified / crude approximate solvers.

Size conventions (see flux_core): every Front.size is the unit-normalized
curve parameter s = l_k(base) . (T_s - base).  elementary_curve additionally
exposes the speed-rescaled parameter on genuinely nonlinear fields, where the
characteristic speed along the rarefaction branch satisfies
lambda_k(T_s) = lambda_k(u) + s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import flux_core as fc
from .errors import CurveError, DomainError, RiemannError, SolverError
from .flux_core import GENERAL, GNL, LD

SIZE_FLOOR = 1e-13  # below this, a wave size is treated as absent
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50


@dataclass
class Front:
    """One moving discontinuity; family N+1 marks nonphysical fronts."""

    family: int
    x: float
    speed: float
    uL: np.ndarray
    uR: np.ndarray
    size: float
    kind: str  # shock | rarefaction | contact | nonphysical
    born_at: float = 0.0
    id: int = -1

    @property
    def is_physical(self):
        return self.kind != "nonphysical"

    def jump(self):
        return self.uR - self.uL

    def strength(self):
        """Euclidean norm of the jump; the bookkeeping size of nonphysical fronts."""
        return float(np.linalg.norm(self.uR - self.uL))


@dataclass
class CurvePoint:
    s: float
    state: np.ndarray
    sigma: float


@dataclass
class WaveFan:
    """Outgoing fronts of one Riemann solve, ordered by speed."""

    fronts: list
    intermediate_states: list
    sizes: np.ndarray  # per-family totals s_1..s_N
    nonphysical_strength: float = 0.0

    def left_state(self):
        return self.intermediate_states[0]

    def right_state(self):
        return self.intermediate_states[-1]


# ---------------------------------------------------------------------------
# robust scalar root solving (Brent)
# ---------------------------------------------------------------------------


def brentq(fn, a, b, xtol=1e-14, maxiter=120):
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise SolverError(f"brentq: no sign change on [{a}, {b}]")
    c, fc_ = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if fb * fc_ > 0:
            c, fc_ = a, fa
            d = e = b - a
        if abs(fc_) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc_ = fb, fc_, fb
        tol1 = 2.0 * np.finfo(float).eps * abs(b) + 0.5 * xtol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc_
                r = fb / fc_
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b = b + (d if abs(d) > tol1 else math.copysign(tol1, xm))
        fb = fn(b)
    raise SolverError("brentq: no convergence")


# ---------------------------------------------------------------------------
# elementary curves (closed forms per catalog model)
# ---------------------------------------------------------------------------


def _scalar_curve(model, u0, s, parametrization):
    eig = model.point_eig(np.array([u0]))
    r = float(eig.right[0, 0])
    rate = float(eig.gnl_rates[0])
    if parametrization == "lambda" and model.field_kind[0] == GNL:
        if s >= 0:
            # rarefaction branch parametrized by speed: f'(w) = f'(u0) + s
            target = model.fprime(u0) + s
            w = u0 + (s / rate) * r  # exact when f' is affine (Burgers)
            if abs(model.fprime(w) - target) > 1e-13 * max(1.0, abs(target)):
                lo, hi = model.domain[0]
                w = brentq(lambda x: model.fprime(x) - target, lo, hi)
        else:
            w = u0 + (s / rate) * r  # Hugoniot side: s = rate * l.(T - u)
    else:
        w = u0 + s * r
    if s >= 0:
        sigma = model.fprime(w)
    else:
        sigma = (model.f_scalar(w) - model.f_scalar(u0)) / (w - u0)
    return np.array([w]), sigma


def _remark_curve(model, k, u0, s, parametrization):
    uu, vv = float(u0[0]), float(u0[1])
    a0 = 1.0 + uu + 2.0 * vv
    if k == 1:  # contact: (1+u+v)v stays constant, lambda_1 = 0
        n0 = math.hypot(a0, vv)
        wu = uu + s * a0 / n0
        inv = (1.0 + uu + vv) * vv
        disc = (1.0 + wu) ** 2 + 4.0 * inv
        if disc <= 0:
            raise CurveError("remark-2x2 family-1 curve left its branch")
        wv = 0.5 * (-(1.0 + wu) + math.sqrt(disc))
        return np.array([wu, wv]), 0.0
    # family 2: the locus is the vertical line u = const for both branches
    dv = s if parametrization == "unit" else 0.5 * s
    wv = vv + dv
    state = np.array([uu, wv])
    if s >= 0:
        sigma = 1.0 + uu + 2.0 * wv
    else:
        sigma = 1.0 + uu + vv + wv  # Rankine-Hugoniot speed, = mean of lambda_2
    return state, sigma


def _psystem_curve(model, k, u0, s, parametrization):
    v0, w0 = float(u0[0]), float(u0[1])
    c0 = model.sound(v0)
    n0 = math.hypot(1.0, c0)
    v_lo, v_hi = model.domain[0]
    F0 = model.sound_antiderivative(v0)
    if k == 2:
        lvec = np.array([-0.5 * n0, 0.5 * n0 / c0])
    else:
        lvec = np.array([0.5 * n0, 0.5 * n0 / c0])
    rate0 = -model.dsound(v0) / n0
    s_unit_target = s if parametrization == "unit" else None

    def rare_state(v):
        du = model.sound_antiderivative(v) - F0
        if k == 2:
            return np.array([v, w0 - du])
        return np.array([v, w0 + du])

    def shock_state(v):
        dp = model.pressure(v) - model.pressure(v0)
        sig = math.sqrt(-dp / (v - v0))
        if k == 1:
            sig = -sig
        return np.array([v, w0 - sig * (v - v0)]), sig

    if s >= 0:  # rarefaction branch
        if parametrization == "lambda":
            c_target = c0 + s if k == 2 else c0 - s
            if c_target <= 0:
                raise CurveError("p-system rarefaction parameter too large")
            v = model.sound_inv(c_target)
        else:
            bracket = (v_lo, v0) if k == 2 else (v0, v_hi)

            def g(v):
                st = rare_state(v)
                return float(lvec @ (st - u0)) - s_unit_target

            if g(bracket[0]) * g(bracket[1]) > 0 and abs(s) > 0:
                raise CurveError("p-system rarefaction curve exits the domain")
            v = v0 if s == 0 else brentq(g, bracket[0], bracket[1])
        state = rare_state(v)
        sigma = model.sound(v) * (1.0 if k == 2 else -1.0)
        return state, sigma

    # shock branch; the lambda-parametrized side uses s = rate * l . (T - u)
    target = s if parametrization == "unit" else s / rate0

    def gsh(v):
        st, _ = shock_state(v)
        return float(lvec @ (st - u0)) - target

    h = max(1e-12, 1e-9 * v0)
    if k == 2:
        lo, hi = v0 + h, v_hi
    else:
        lo, hi = v_lo, v0 - h
    if gsh(lo) * gsh(hi) > 0:
        raise CurveError("p-system Hugoniot parameter outside reachable range")
    v = brentq(gsh, lo, hi)
    state, sigma = shock_state(v)
    return state, sigma


def _linear_curve(model, k, u0, s, parametrization):
    sys = model.point_eig(u0)
    state = u0 + s * sys.right[k - 1]
    return state, float(sys.lambdas[k - 1])


def _curve_state(model, k, u0, s, parametrization="unit"):
    """Internal curve evaluation; no field-kind gate (scalar 'general' allowed)."""
    u0 = np.asarray(u0, dtype=float)
    if model.N == 1:
        state, sigma = _scalar_curve(model, float(u0[0]), s, parametrization)
    elif isinstance(model, fc.Remark2x2):
        state, sigma = _remark_curve(model, k, u0, s, parametrization)
    elif isinstance(model, fc.PSystem):
        state, sigma = _psystem_curve(model, k, u0, s, parametrization)
    elif isinstance(model, fc.Linear):
        state, sigma = _linear_curve(model, k, u0, s, parametrization)
    else:
        raise CurveError(f"no curve implementation for model {model.id!r}")
    if not model.contains(state):
        raise DomainError(f"{model.id}: curve point {state} left the domain")
    return state, sigma


def elementary_curve(model, k, u, s, parametrization="auto"):
    """Point T_s on the k-th elementary curve through u, with its speed.

    parametrization: "auto" picks "lambda" on genuinely nonlinear fields
    (rarefaction branch satisfies lambda_k(T_s) = lambda_k(u) + s) and
    "unit" (s = l_k(u).(T_s - u)) on linearly degenerate ones.
    """
    u = fc.as_state(u, model.N)
    model.require_inside(u)
    if not 1 <= k <= model.N:
        raise CurveError(f"family {k} out of range for N={model.N}")
    kind = model.field_kind[k - 1]
    if kind == GENERAL:
        raise CurveError(
            f"{model.id}: family {k} is neither genuinely nonlinear nor "
            "linearly degenerate; use the scalar envelope solver")
    if abs(s) > model.curve_radius:
        raise CurveError(f"|s|={abs(s)} exceeds curve radius {model.curve_radius}")
    if parametrization == "auto":
        parametrization = "lambda" if kind == GNL else "unit"
    state, sigma = _curve_state(model, k, u, s, parametrization)
    return CurvePoint(s=s, state=state, sigma=sigma)


# ---------------------------------------------------------------------------
# scalar envelope construction
# ---------------------------------------------------------------------------

_ENVELOPE_GRID = 2048


def _lower_hull(xs, ys):
    idx = []
    for kk in range(len(xs)):
        while len(idx) >= 2:
            o, p = idx[-2], idx[-1]
            cross = (xs[p] - xs[o]) * (ys[kk] - ys[o]) - (ys[p] - ys[o]) * (xs[kk] - xs[o])
            if cross <= 0:  # p on or above chord o->kk: not on the lower hull
                idx.pop()
            else:
                break
        idx.append(kk)
    return idx


def _refine_bridge(gval, gp, gpp, lo, hi, p0, q0, left_interior, right_interior):
    """Polish supporting-line contact points by damped Newton on the tangency
    residuals; grid values p0 < q0 are the starting guess."""
    p, q = p0, q0

    def resid(pp, qq):
        dg = gval(qq) - gval(pp)
        r = []
        if left_interior:
            r.append(gp(pp) * (qq - pp) - dg)
        if right_interior:
            r.append(gp(qq) * (qq - pp) - dg)
        return np.array(r)

    if not (left_interior or right_interior):
        return p, q
    scale = max(1.0, abs(gval(q0) - gval(p0)))
    r = resid(p, q)
    for _ in range(60):
        if np.abs(r).max() <= 1e-12 * scale:
            return p, q
        rows = []
        if left_interior:
            rows.append([gpp(p) * (q - p), gp(p) - gp(q)] if right_interior
                        else [gpp(p) * (q - p)])
        if right_interior:
            rows.append([gp(p) - gp(q), gpp(q) * (q - p)] if left_interior
                        else [gpp(q) * (q - p)])
        jac = np.array(rows, dtype=float)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise RiemannError("envelope tangency root-finding failed (singular)")
        lam = 1.0
        for _ in range(40):
            pn, qn = p, q
            si = 0
            if left_interior:
                pn = p + lam * step[si]
                si += 1
            if right_interior:
                qn = q + lam * step[si]
            if lo <= pn < qn <= hi:
                rn = resid(pn, qn)
                if np.abs(rn).max() < np.abs(r).max():
                    p, q, r = pn, qn, rn
                    break
            lam *= 0.5
        else:
            raise RiemannError("envelope tangency root-finding failed (damping)")
    raise RiemannError("envelope tangency root-finding failed (no convergence)")


def _envelope_pieces(model, lo, hi, concave):
    """Pieces of the convex (or concave) envelope of f on [lo, hi] in
    increasing u: list of ("affine", a, b) and ("curved", a, b)."""
    sgn = -1.0 if concave else 1.0
    us = np.linspace(lo, hi, _ENVELOPE_GRID + 1)
    gs = sgn * model.f_scalar(us)

    def gval(u):
        return sgn * model.f_scalar(u)

    def gp(u):
        return sgn * model.fprime(u)

    def gpp(u):
        return sgn * model.fsecond(u)

    hull = _lower_hull(us, gs)
    bridges = []
    for e in range(len(hull) - 1):
        i, j = hull[e], hull[e + 1]
        if j > i + 1:
            bridges.append((i, j))
    refined = []
    for i, j in bridges:
        p, q = _refine_bridge(gval, gp, gpp, lo, hi, us[i], us[j],
                              left_interior=(i != 0), right_interior=(j != _ENVELOPE_GRID))
        refined.append((p, q))
    # rebuild: affine pieces are the refined bridges, curved pieces the gaps
    pieces = []
    cursor = lo
    for p, q in refined:
        p = max(p, cursor)
        if p - cursor > 1e-12 * max(1.0, hi - lo):
            pieces.append(("curved", cursor, p))
        pieces.append(("affine", p, q))
        cursor = q
    if hi - cursor > 1e-12 * max(1.0, hi - lo):
        pieces.append(("curved", cursor, hi))
    return pieces


def _secant(model, a, b):
    return (model.f_scalar(b) - model.f_scalar(a)) / (b - a)


def _classify_scalar(model, a, b, sigma, tol=1e-12):
    if model.field_kind[0] == LD:
        return "contact"
    if model.fprime(a) >= sigma - tol and sigma >= model.fprime(b) - tol:
        return "shock"
    return "rarefaction"


def _split_curved(model, u_from, u_to, eps, fronts):
    """Append rarefaction fronts covering a curved envelope piece, splitting
    uniformly in lambda = f' so that the fan opening never exceeds eps."""
    lam_a, lam_b = model.fprime(u_from), model.fprime(u_to)
    dlam = lam_b - lam_a
    if dlam <= 1e-12:
        sigma = _secant(model, u_from, u_to)
        kind = "contact" if model.field_kind[0] == LD else "rarefaction"
        fronts.append((u_from, u_to, sigma, kind))
        return
    n = max(1, math.ceil(dlam / eps - 1e-12))
    lo, hi = (u_from, u_to) if u_from < u_to else (u_to, u_from)
    prev = u_from
    for m in range(1, n + 1):
        if m == n:
            nxt = u_to
        else:
            target = lam_a + dlam * m / n
            nxt = brentq(lambda x: model.fprime(x) - target, lo, hi)
        fronts.append((prev, nxt, _secant(model, prev, nxt), "rarefaction"))
        prev = nxt


def scalar_envelope_fan(model, uL, uR, eps):
    """Riemann fan for general scalar flux via the convex/concave envelope.

    Affine envelope pieces become single shocks at their secant speed;
    curved pieces become rarefaction fans with opening <= eps.
    """
    if model.N != 1:
        raise RiemannError("scalar_envelope_fan needs a scalar model")
    a = float(np.atleast_1d(uL)[0])
    b = float(np.atleast_1d(uR)[0])
    model.require_inside(np.array([a]), "left state")
    model.require_inside(np.array([b]), "right state")
    if a == b:
        return WaveFan([], [np.array([a])], np.zeros(1))
    raw = []
    if abs(b - a) < 1e-12:
        raw.append((a, b, _secant(model, a, b), _classify_scalar(model, a, b, _secant(model, a, b))))
    elif model.field_kind[0] == GNL:
        # uniformly convex/concave flux: pure fan one way, single shock the other
        rising = model.fsecond(0.5 * (a + b)) > 0
        if (a < b) == rising:
            _split_curved(model, a, b, eps, raw)
        else:
            raw.append((a, b, _secant(model, a, b), "shock"))
    else:
        concave = a > b
        lo, hi = (a, b) if a < b else (b, a)
        pieces = _envelope_pieces(model, lo, hi, concave)
        order = pieces if a < b else reversed(pieces)
        for kind, pa, pb in order:
            u_from, u_to = (pa, pb) if a < b else (pb, pa)
            if kind == "affine":
                raw.append((u_from, u_to, _secant(model, u_from, u_to), "shock"))
            else:
                _split_curved(model, u_from, u_to, eps, raw)
    fronts = []
    states = [np.array([a])]
    for (u_from, u_to, sigma, kind) in raw:
        if abs(u_to - u_from) < 1e-14:
            continue
        left_state = states[-1]
        right_state = np.array([u_to])
        fronts.append(Front(family=1, x=0.0, speed=float(sigma), uL=left_state,
                            uR=right_state, size=float(u_to - u_from), kind=kind))
        states.append(right_state)
    if fronts:
        fronts[-1].uR = np.array([b])
        states[-1] = fronts[-1].uR
    return WaveFan(fronts, states, np.array([b - a]))


# ---------------------------------------------------------------------------
# front speed helper
# ---------------------------------------------------------------------------


def front_speed(model, k, uL, uR):
    """Averaged-matrix speed lambda_tilde_k of the jump; secant for scalar."""
    if model.N == 1:
        return _secant(model, float(uL[0]), float(uR[0]))
    return float(fc.average_eigs(model, uL, uR).lambdas[k - 1])


def _system_front(model, k, uL, s):
    """Single physical front of family k with unit size s starting at uL."""
    state, sigma = _curve_state(model, k, uL, s, "unit")
    kind_tag = model.field_kind[k - 1]
    if model.N == 1:
        speed = _secant(model, float(uL[0]), float(state[0]))
        kind = _classify_scalar(model, float(uL[0]), float(state[0]), speed)
    else:
        speed = front_speed(model, k, uL, state)
        kind = "contact" if kind_tag == LD else ("shock" if s < 0 else "rarefaction")
    return Front(family=k, x=0.0, speed=speed, uL=uL, uR=state, size=s, kind=kind)


def _nonphysical_front(model, uL, uR):
    return Front(family=model.N + 1, x=0.0, speed=model.lambda_hat, uL=uL, uR=uR,
                 size=float(np.linalg.norm(uR - uL)), kind="nonphysical")


# ---------------------------------------------------------------------------
# accurate solver
# ---------------------------------------------------------------------------


def solve_accurate(model, uL, uR, eps):
    """Full approximate Riemann solution between uL and uR.

    Scalar models go through the envelope construction; systems solve the
    composed curve map by damped Newton and emit one shock or a rarefaction
    fan per genuinely nonlinear family and one contact per degenerate family.
    """
    uL = fc.as_state(uL, model.N)
    uR = fc.as_state(uR, model.N)
    if model.N == 1:
        return scalar_envelope_fan(model, uL, uR, eps)
    model.require_inside(uL, "left state")
    model.require_inside(uR, "right state")
    dvec = uR - uL
    if float(np.linalg.norm(dvec)) < 1e-14:
        return WaveFan([], [uL], np.zeros(model.N))
    if float(np.linalg.norm(dvec)) > model.riemann_radius:
        raise RiemannError(
            f"|uR-uL|={np.linalg.norm(dvec):.3g} exceeds Riemann radius")
    sizes = _solve_sizes(model, uL, uR)
    sizes[np.abs(sizes) < SIZE_FLOOR] = 0.0
    fronts = []
    omega = uL
    for k in range(1, model.N + 1):
        sk = float(sizes[k - 1])
        if sk == 0.0:
            continue
        kind_tag = model.field_kind[k - 1]
        if kind_tag == GNL and sk > 0:
            omega = _emit_fan(model, k, omega, sk, eps, fronts)
        else:
            f = _system_front(model, k, omega, sk)
            fronts.append(f)
            omega = f.uR
    defect = float(np.max(np.abs(omega - uR))) if fronts else float(np.max(np.abs(dvec)))
    if defect > 1e-9 * max(1.0, float(np.max(np.abs(uR)))):
        raise RiemannError(f"accurate solver closure defect {defect:.3e}")
    if fronts:
        fronts[-1].uR = uR.copy()
        fronts[-1].speed = front_speed(model, fronts[-1].family, fronts[-1].uL, uR)
    states = [uL] + [f.uR for f in fronts]
    return WaveFan(fronts, states, sizes)


def _solve_sizes(model, uL, uR):
    n = model.N
    left0 = model.point_eig(uL).left

    def chain_end(svec):
        omega = uL
        for k in range(1, n + 1):
            if svec[k - 1] != 0.0:
                omega, _ = _curve_state(model, k, omega, float(svec[k - 1]), "unit")
        return omega

    s = left0 @ (uR - uL)
    scale = max(1.0, float(np.max(np.abs(uR - uL))))
    try:
        res = chain_end(s) - uR
    except (DomainError, CurveError) as exc:
        raise RiemannError(f"accurate solver: initial guess failed ({exc})")
    for _ in range(NEWTON_MAXIT):
        if float(np.max(np.abs(res))) <= NEWTON_TOL * scale:
            return s
        jac = np.empty((n, n))
        base = res + uR
        for k in range(n):
            h = 1e-7 * max(1.0, abs(s[k]))
            sp = s.copy()
            sp[k] += h
            try:
                jac[:, k] = (chain_end(sp) - base) / h
            except (DomainError, CurveError):
                sp[k] = s[k] - h
                jac[:, k] = (base - chain_end(sp)) / h
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            raise RiemannError("accurate solver: singular Newton system")
        lam = 1.0
        for _ in range(30):
            cand = s + lam * step
            try:
                cres = chain_end(cand) - uR
            except (DomainError, CurveError):
                lam *= 0.5
                continue
            if float(np.max(np.abs(cres))) < float(np.max(np.abs(res))) or lam < 1e-6:
                s, res = cand, cres
                break
            lam *= 0.5
        else:
            raise RiemannError("accurate solver: Newton damping failed")
    raise RiemannError("accurate solver: Newton did not converge")


def _emit_fan(model, k, omega0, sk, eps, fronts):
    """Rarefaction fan for family k: partition uniform in the lambda-scaled
    parameter, so consecutive openings are exactly dlam/n <= eps."""
    end, _ = _curve_state(model, k, omega0, sk, "unit")
    lam0 = float(model.point_eig(omega0).lambdas[k - 1])
    lam1 = float(model.point_eig(end).lambdas[k - 1])
    dlam = lam1 - lam0
    if dlam <= 1e-14:
        f = _system_front(model, k, omega0, sk)
        fronts.append(f)
        return f.uR
    n = max(1, math.ceil(dlam / eps - 1e-12))
    prev = omega0
    for m in range(1, n + 1):
        if m == n:
            nxt = end
        else:
            nxt, _ = _curve_state(model, k, omega0, dlam * m / n, "lambda")
        piece_size = float(model.point_eig(prev).left[k - 1] @ (nxt - prev))
        fronts.append(Front(family=k, x=0.0, speed=front_speed(model, k, prev, nxt),
                            uL=prev, uR=nxt, size=piece_size, kind="rarefaction"))
        prev = nxt
    return end


# ---------------------------------------------------------------------------
# simplified and crude solvers
# ---------------------------------------------------------------------------


def solve_simplified(model, left, right):
    """Outgoing waves keep the incoming families and sizes (merged when the
    families agree); the closure residual rides a single nonphysical front."""
    if not (left.is_physical and right.is_physical):
        raise RiemannError("simplified solver needs two physical fronts")
    uL, uR = left.uL, right.uR
    fronts = []
    omega = uL
    if left.family == right.family:
        s = left.size + right.size
        if abs(s) >= SIZE_FLOOR:
            f = _system_front(model, left.family, omega, s)
            fronts.append(f)
            omega = f.uR
    else:
        lo_front, hi_front = (right, left) if left.family > right.family else (left, right)
        f1 = _system_front(model, lo_front.family, omega, lo_front.size)
        fronts.append(f1)
        f2 = _system_front(model, hi_front.family, f1.uR, hi_front.size)
        fronts.append(f2)
        omega = f2.uR
    np_front = _nonphysical_front(model, omega, uR)
    fronts.append(np_front)
    sizes = np.zeros(model.N)
    for f in fronts:
        if f.is_physical:
            sizes[f.family - 1] += f.size
    states = [uL] + [f.uR for f in fronts]
    return WaveFan(fronts, states, sizes, nonphysical_strength=np_front.size)


def solve_crude(model, nonphys, phys):
    """Nonphysical front overtaking a physical one: re-emit the physical wave
    from the shifted left state, push the residual into the nonphysical."""
    if nonphys.is_physical or not phys.is_physical:
        raise RiemannError("crude solver needs (nonphysical, physical) incoming")
    uL, uR = nonphys.uL, phys.uR
    f = _system_front(model, phys.family, uL, phys.size)
    f.kind = phys.kind
    np_front = _nonphysical_front(model, f.uR, uR)
    sizes = np.zeros(model.N)
    sizes[phys.family - 1] = phys.size
    states = [uL, f.uR, uR]
    return WaveFan([f, np_front], states, sizes,
                   nonphysical_strength=np_front.size)
