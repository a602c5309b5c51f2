"""Flux-model catalog: analytic Jacobians, eigensystems and averaged matrices.

Every catalog model carries exact formulas for f, Df, the eigenvalue
gradients and the point eigensystem; the averaged matrix between two states
is always formed by fixed-order Gauss-Legendre quadrature (order 8, exact
for polynomial fluxes up to degree 15) and then eigen-decomposed with the
same per-model closed forms.

Two eigenvector normalizations coexist. Stored systems always carry unit
right eigenvectors with biorthogonal left covectors (l_j . r_i = delta_ij);
genuinely nonlinear fields additionally record the nonlinearity rate
grad_lambda_i . r_i, and the curve layer rescales by that rate where the
speed-parametrized curve is wanted. Orientation: rate > 0 for genuinely
nonlinear fields, first nonzero component positive for linearly degenerate
ones, r = sign(f'') for scalar fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, DomainError, ModelAuditError,
                     NearDegeneracyError, UnknownModelError)

GNL = "genuinely-nonlinear"
LD = "linearly-degenerate"
GENERAL = "general"  # scalar-only: f'' changes sign; served by the envelope solver

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
GL8_NODES = 0.5 * (_GL_X + 1.0)
GL8_WEIGHTS = 0.5 * _GL_W

DEFAULT_GAP_TOL = 1e-8


@dataclass
class EigenSystem:
    """Point eigensystem: ascending speeds, unit right rows, biorthogonal left rows."""

    lambdas: np.ndarray
    right: np.ndarray  # right[i] = r_{i+1}
    left: np.ndarray  # left[i] = l_{i+1}
    gnl_rates: np.ndarray  # grad_lambda_i . r_i under the unit normalization


# Same layout, computed from the averaged matrix A(uL, uR); gnl_rates use the
# segment midpoint gradient so that the degenerate case uL == uR reproduces
# the point system.
AveragedEigenSystem = EigenSystem


class FluxModel:
    """Base class for catalog flux models.

    Attributes:
        id: catalog identifier.
        N: state dimension.
        params: named real parameters.
        domain: (N, 2) array of componentwise box bounds.
        field_kind: per-family tag among GNL / LD / GENERAL.
        lambda_fences: N+1 ascending speed fences bracketing each family.
        gap: declared minimal eigenvalue gap on the domain.
        curve_radius: largest |s| elementary curves are defined for.
        riemann_radius: largest |uR - uL| solve_accurate accepts.
        tv_budget: small-BV budget for initial data.
    """

    id = "abstract"

    def __init__(self):
        self.params = {}
        self.gap_tol = DEFAULT_GAP_TOL

    # -- per-model analytic surface -------------------------------------
    def f(self, u):
        raise NotImplementedError

    def jacobian_matrix(self, u):
        raise NotImplementedError

    def grad_lambda(self, u):
        """Rows are the gradients of lambda_i at u."""
        raise NotImplementedError

    def point_eig(self, u):
        raise NotImplementedError

    def eig_of_average(self, amat, mid):
        """Eigen-decompose an averaged matrix; mid is the segment midpoint."""
        raise NotImplementedError

    @property
    def lambda_hat(self):
        """Speed of nonphysical fronts, strictly above every fence."""
        return self.lambda_fences[-1] + 1.0

    def contains(self, u, slack=1e-12):
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        return bool(np.all(u >= lo - slack) and np.all(u <= hi + slack))

    def require_inside(self, u, what="state"):
        if not self.contains(np.asarray(u, dtype=float)):
            raise DomainError(f"{self.id}: {what} {np.asarray(u)} outside domain box")


def as_state(u, n):
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if arr.shape != (n,):
        raise DomainError(f"state shape {arr.shape} incompatible with N={n}")
    return arr


# ---------------------------------------------------------------------------
# scalar models
# ---------------------------------------------------------------------------


class ScalarModel(FluxModel):
    """Common machinery for N = 1 models: r, l are signs, lambda = f'."""

    N = 1

    def f_scalar(self, u):
        raise NotImplementedError

    def fprime(self, u):
        raise NotImplementedError

    def fsecond(self, u):
        raise NotImplementedError

    def f(self, u):
        return np.array([self.f_scalar(float(u[0]))])

    def jacobian_matrix(self, u):
        return np.array([[self.fprime(float(u[0]))]])

    def grad_lambda(self, u):
        return np.array([[self.fsecond(float(u[0]))]])

    def _orientation(self, u):
        if self.field_kind[0] == GNL:
            return 1.0 if self.fsecond(u) > 0 else -1.0
        return 1.0

    def point_eig(self, u):
        uu = float(u[0])
        r = self._orientation(uu)
        return EigenSystem(
            lambdas=np.array([self.fprime(uu)]),
            right=np.array([[r]]),
            left=np.array([[r]]),
            gnl_rates=np.array([self.fsecond(uu) * r]),
        )

    def eig_of_average(self, amat, mid):
        r = self._orientation(float(mid[0]))
        return EigenSystem(
            lambdas=np.array([amat[0, 0]]),
            right=np.array([[r]]),
            left=np.array([[r]]),
            gnl_rates=np.array([self.fsecond(float(mid[0])) * r]),
        )


class Burgers(ScalarModel):
    id = "burgers"

    def __init__(self, params=None):
        super().__init__()
        params = dict(params or {})
        half = float(params.pop("radius", 2.0))
        if params:
            raise ConfigError("model.params", f"burgers has no parameter {sorted(params)[0]!r}")
        self.params = {"radius": half}
        self.domain = np.array([[-half, half]])
        self.field_kind = (GNL,)
        self.lambda_fences = np.array([-1.1 * half, 1.1 * half])
        self.gap = math.inf
        self.curve_radius = half
        self.riemann_radius = 2.0 * half
        self.tv_budget = 8.0

    def f_scalar(self, u):
        return 0.5 * u * u

    def fprime(self, u):
        return u

    def fsecond(self, u):
        return 1.0


class Cubic(ScalarModel):
    """f = u^3/3; convexity flips at u = 0, so the family is 'general'."""

    id = "cubic"

    def __init__(self, params=None):
        super().__init__()
        params = dict(params or {})
        half = float(params.pop("radius", 2.0))
        if params:
            raise ConfigError("model.params", f"cubic has no parameter {sorted(params)[0]!r}")
        self.params = {"radius": half}
        self.domain = np.array([[-half, half]])
        self.field_kind = (GENERAL,)
        self.lambda_fences = np.array([-0.1, 1.1 * half * half])
        self.gap = math.inf
        self.curve_radius = half
        self.riemann_radius = 2.0 * half
        self.tv_budget = 8.0

    def f_scalar(self, u):
        return u ** 3 / 3.0

    def fprime(self, u):
        return u * u

    def fsecond(self, u):
        return 2.0 * u


# ---------------------------------------------------------------------------
# remark-2x2:  u_t = 0,  v_t + ((1 + u + v) v)_x = 0
# ---------------------------------------------------------------------------


class Remark2x2(FluxModel):
    """2x2 system with one contact family (lambda_1 = 0) and one GNL family.

    lambda_2 = 1 + u + 2v, grad lambda_2 = (1, 2), r_2 = (0, 1), rate 2;
    the family-1 integral curves keep (1 + u + v) v constant.
    """

    id = "remark-2x2"
    N = 2

    def __init__(self, params=None):
        super().__init__()
        params = dict(params or {})
        half = float(params.pop("radius", 0.32))
        if params:
            raise ConfigError("model.params", f"remark-2x2 has no parameter {sorted(params)[0]!r}")
        if not 0 < half < 1.0 / 3.0:
            raise ConfigError("model.params", "remark-2x2 radius must sit in (0, 1/3)")
        self.params = {"radius": half}
        self.domain = np.array([[-half, half], [-half, half]])
        self.field_kind = (LD, GNL)
        lam2_min = 1.0 - 3.0 * half
        lam2_max = 1.0 + 3.0 * half
        self.lambda_fences = np.array([-0.5 * lam2_min, 0.5 * lam2_min, lam2_max + 0.1])
        self.gap = lam2_min
        self.curve_radius = 2.0 * half
        self.riemann_radius = 2.0 * half
        self.tv_budget = 1.0

    def f(self, u):
        return np.array([0.0, (1.0 + u[0] + u[1]) * u[1]])

    def jacobian_matrix(self, u):
        return np.array([[0.0, 0.0], [u[1], 1.0 + u[0] + 2.0 * u[1]]])

    def grad_lambda(self, u):
        return np.array([[0.0, 0.0], [1.0, 2.0]])

    def _eig_at(self, uu, vv):
        a = 1.0 + uu + 2.0 * vv  # lambda_2, positive on the domain
        n = math.hypot(a, vv)
        return EigenSystem(
            lambdas=np.array([0.0, a]),
            right=np.array([[a / n, -vv / n], [0.0, 1.0]]),
            left=np.array([[n / a, 0.0], [vv / a, 1.0]]),
            gnl_rates=np.array([0.0, 2.0]),
        )

    def point_eig(self, u):
        return self._eig_at(u[0], u[1])

    def eig_of_average(self, amat, mid):
        # A is linear in the state, so the averaged matrix is A at the segment
        # mean; recover that state from the matrix entries to keep lambda_1
        # identically zero in floating point.
        vv = amat[1, 0]
        uu = amat[1, 1] - 1.0 - 2.0 * vv
        return self._eig_at(uu, vv)


# ---------------------------------------------------------------------------
# p-system with gamma-law pressure, state (v, u)
# ---------------------------------------------------------------------------


class PSystem(FluxModel):
    """v_t - u_x = 0, u_t + p(v)_x = 0 with p = k v^(-gamma); both fields GNL."""

    id = "p-system"
    N = 2

    def __init__(self, params=None):
        super().__init__()
        params = dict(params or {})
        self.gamma = float(params.pop("gamma", 1.4))
        self.k = float(params.pop("k", 1.0))
        v_lo = float(params.pop("v_min", 0.5))
        v_hi = float(params.pop("v_max", 2.0))
        u_half = float(params.pop("u_max", 1.0))
        if params:
            raise ConfigError("model.params", f"p-system has no parameter {sorted(params)[0]!r}")
        if self.gamma <= 0 or self.k <= 0 or not 0 < v_lo < v_hi:
            raise ConfigError("model.params", "p-system needs gamma, k > 0 and 0 < v_min < v_max")
        self.params = {"gamma": self.gamma, "k": self.k, "v_min": v_lo,
                       "v_max": v_hi, "u_max": u_half}
        self.domain = np.array([[v_lo, v_hi], [-u_half, u_half]])
        self._m = 0.5 * (self.gamma + 1.0)
        self._ccoef = math.sqrt(self.k * self.gamma)
        c_max = self.sound(v_lo)
        c_min = self.sound(v_hi)
        self.field_kind = (GNL, GNL)
        self.lambda_fences = np.array([-1.05 * c_max, 0.0, 1.05 * c_max])
        self.gap = 2.0 * c_min
        self.curve_radius = 0.6 * (v_hi - v_lo)
        self.riemann_radius = 0.8 * (v_hi - v_lo)
        self.tv_budget = 1.2

    # c(v) = sqrt(-p'(v)) = sqrt(k gamma) v^(-(gamma+1)/2)
    def sound(self, v):
        return self._ccoef * v ** (-self._m)

    def sound_inv(self, c):
        return (self._ccoef / c) ** (1.0 / self._m)

    def dsound(self, v):
        return -self._m * self.sound(v) / v

    def pressure(self, v):
        return self.k * v ** (-self.gamma)

    def sound_antiderivative(self, v):
        """Antiderivative of c, used by the rarefaction Riemann invariants."""
        if self.gamma == 1.0:
            return self._ccoef * math.log(v)
        return self._ccoef * v ** (1.0 - self._m) / (1.0 - self._m)

    def f(self, u):
        return np.array([-u[1], self.pressure(u[0])])

    def jacobian_matrix(self, u):
        return np.array([[0.0, -1.0], [-self.sound(u[0]) ** 2, 0.0]])

    def grad_lambda(self, u):
        cp = self.dsound(u[0])
        return np.array([[-cp, 0.0], [cp, 0.0]])

    def _eig_for_sound(self, c, v_for_rate):
        n = math.hypot(1.0, c)
        rate = -self.dsound(v_for_rate) / n  # positive: c decreases in v
        return EigenSystem(
            lambdas=np.array([-c, c]),
            right=np.array([[1.0 / n, c / n], [-1.0 / n, c / n]]),
            left=np.array([[0.5 * n, 0.5 * n / c],
                           [-0.5 * n, 0.5 * n / c]]),
            gnl_rates=np.array([rate, rate]),
        )

    def point_eig(self, u):
        return self._eig_for_sound(self.sound(u[0]), u[0])

    def eig_of_average(self, amat, mid):
        msq = -amat[1, 0]  # averaged -p', positive
        if msq <= 0:
            raise NearDegeneracyError("p-system averaged matrix lost hyperbolicity")
        return self._eig_for_sound(math.sqrt(msq), mid[0])


# ---------------------------------------------------------------------------
# constant-matrix advection systems (numeric eigen path)
# ---------------------------------------------------------------------------


class Linear(FluxModel):
    """f(u) = M u for a constant M with distinct real eigenvalues; all LD."""

    id = "linear"

    def __init__(self, params=None):
        super().__init__()
        params = dict(params or {})
        matrix = params.pop("matrix", [[1.0]])
        half = float(params.pop("radius", 1.0))
        if params:
            raise ConfigError("model.params", f"linear has no parameter {sorted(params)[0]!r}")
        self.M = np.array(matrix, dtype=float)
        if self.M.ndim != 2 or self.M.shape[0] != self.M.shape[1]:
            raise ConfigError("model.params", "linear 'matrix' must be square")
        self.N = self.M.shape[0]
        self.params = {"matrix": self.M.tolist(), "radius": half}
        self.domain = np.array([[-half, half]] * self.N)
        self.field_kind = (LD,) * self.N
        self._system = self._decompose(self.M)
        lam = self._system.lambdas
        gaps = np.diff(lam)
        if self.N > 1 and gaps.min() < self.gap_tol:
            raise NearDegeneracyError("linear model eigenvalues not separated")
        self.gap = float(gaps.min()) if self.N > 1 else math.inf
        fences = [lam[0] - 1.0]
        fences += [0.5 * (lam[i] + lam[i + 1]) for i in range(self.N - 1)]
        fences.append(lam[-1] + 1.0)
        self.lambda_fences = np.array(fences)
        self.curve_radius = 2.0 * half
        self.riemann_radius = 2.0 * half * math.sqrt(self.N)
        self.tv_budget = 8.0

    def _decompose(self, mat):
        w, vr = np.linalg.eig(mat)
        if np.abs(w.imag).max() > 1e-10:
            raise NearDegeneracyError("linear model has complex eigenvalues")
        w = w.real
        vr = vr.real
        order = np.argsort(w)
        w = w[order]
        vr = vr[:, order]
        right = []
        for i in range(self.N):
            r = vr[:, i] / np.linalg.norm(vr[:, i])
            nz = np.nonzero(np.abs(r) > 1e-12)[0][0]
            if r[nz] < 0:
                r = -r
            right.append(r)
        right = np.array(right)
        left = np.linalg.inv(right.T)  # rows biorthogonal to right rows
        return EigenSystem(lambdas=w, right=right, left=left,
                           gnl_rates=np.zeros(self.N))

    def f(self, u):
        return self.M @ u

    def jacobian_matrix(self, u):
        return self.M.copy()

    def grad_lambda(self, u):
        return np.zeros((self.N, self.N))

    def point_eig(self, u):
        return self._system

    def eig_of_average(self, amat, mid):
        return self._system


_CATALOG = {m.id: m for m in (Burgers, Cubic, Remark2x2, PSystem, Linear)}


def catalog_ids():
    return sorted(_CATALOG)


def make_model(model_id, params=None):
    try:
        cls = _CATALOG[model_id]
    except KeyError:
        raise UnknownModelError(model_id) from None
    return cls(params)


# ---------------------------------------------------------------------------
# module operations
# ---------------------------------------------------------------------------


def jacobian(model, u):
    """Df(u); analytic for every catalog model."""
    u = as_state(u, model.N)
    model.require_inside(u)
    return model.jacobian_matrix(u)


def eig_decompose(model, u):
    u = as_state(u, model.N)
    model.require_inside(u)
    sys = model.point_eig(u)
    _check_gap(model, sys.lambdas)
    return sys


def average_matrix(model, uL, uR):
    """Gauss-Legendre order-8 average of Df along the segment [uL, uR]."""
    amat = np.zeros((model.N, model.N))
    for theta, w in zip(GL8_NODES, GL8_WEIGHTS):
        amat += w * model.jacobian_matrix(theta * uL + (1.0 - theta) * uR)
    return amat


def average_eigs(model, uL, uR):
    uL = as_state(uL, model.N)
    uR = as_state(uR, model.N)
    model.require_inside(uL, "left state")
    model.require_inside(uR, "right state")
    if np.array_equal(uL, uR):
        return model.point_eig(uL)
    amat = average_matrix(model, uL, uR)
    sys = model.eig_of_average(amat, 0.5 * (uL + uR))
    _check_gap(model, sys.lambdas)
    return sys


def _check_gap(model, lambdas):
    if model.N > 1 and float(np.diff(lambdas).min()) < model.gap_tol:
        raise NearDegeneracyError(
            f"{model.id}: eigenvalue gap below gap_tol={model.gap_tol}")


def gnl_audit(model, grid_resolution=20):
    """Scan grad_lambda_i . r_i over a domain grid and check field_kind tags.

    Returns a report dict with per-family min/max rates and verdicts; raises
    ModelAuditError when a declared kind is refuted.
    """
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be >= 2 per dimension")
    axes = [np.linspace(lo, hi, grid_resolution) for lo, hi in model.domain]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    rates = np.empty((pts.shape[0], model.N))
    for row, u in enumerate(pts):
        sys = model.point_eig(u)
        grads = model.grad_lambda(u)
        rates[row] = np.einsum("ij,ij->i", grads, sys.right)
    report = {"model": model.id, "families": []}
    for i in range(model.N):
        lo, hi = float(rates[:, i].min()), float(rates[:, i].max())
        kind = model.field_kind[i]
        if kind == GNL:
            ok = lo > 0.0 or hi < 0.0
        elif kind == LD:
            ok = max(abs(lo), abs(hi)) <= 1e-10
        else:
            ok = True
        report["families"].append(
            {"family": i + 1, "declared": kind, "rate_min": lo, "rate_max": hi,
             "verdict": "pass" if ok else "fail"})
        if not ok:
            raise ModelAuditError(
                f"{model.id}: family {i + 1} declared {kind} but rates span "
                f"[{lo:.3e}, {hi:.3e}]")
    return report
