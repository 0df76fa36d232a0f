"""Gordon-Loeb style optimal security investment.

A breach function ``g(z)`` gives the residual breach probability after spending
``z``; the firm minimizes ``z + L*g(z)``. Two classic analytic families are
provided along with tabulated curves::

    GL_I   g(z) = v / (alpha*z + 1) ** beta
    GL_II  g(z) = v ** (alpha*z + 1)

For both, the optimum never exceeds ``v*L/e``. The two-parameter variant adds
a loss multiplier ``h(z)`` and minimizes ``z + L*h(z)*g(z)``; the portfolio
variant minimizes ``sum(z) + l(z)*G(z)`` over a vector of control budgets.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import qmc

from .errors import NumericError, ValidationError

INV_E = 1.0 / math.e
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
MAX_CONTROLS = 8


def _real(x, what):
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a real number, got {x!r}", code="E102") from None
    if not math.isfinite(x):
        raise ValidationError(f"{what} must be finite, got {x}")
    return x


def _check_spend(z):
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z < 0):
        raise ValidationError(f"spend must be finite and >= 0, got {z}")
    return z


def _check_table(z, y, what):
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.ndim != 1 or z.shape != y.shape or len(z) < 2:
        raise ValidationError(f"{what}: need matching 1-D knot arrays with at least two points")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(y))):
        raise ValidationError(f"{what}: knots must be finite")
    if z[0] != 0:
        raise ValidationError(f"{what}: first knot must sit at z = 0")
    if np.any(np.diff(z) <= 0):
        raise ValidationError(f"{what}: z knots must be strictly increasing")
    if np.any(np.diff(y) > 0):
        raise ValidationError(f"{what}: values must be non-increasing")
    return z, y


def _is_convex_pl(z, y):
    slopes = np.diff(y) / np.diff(z)
    return bool(np.all(np.diff(slopes) >= -1e-12 * max(1.0, float(np.max(np.abs(slopes))))))


class Family(enum.Enum):
    GL_I = "gl_i"
    GL_II = "gl_ii"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class BreachFunction:
    """Residual breach probability as a function of spend.

    Build with :meth:`gl_i`, :meth:`gl_ii` or :meth:`tabulated`. Tabulated
    curves interpolate linearly and stay flat beyond the last knot.
    """

    family: Family
    v: float
    alpha: float = 1.0
    beta: float = 1.0
    knots: tuple | None = None

    @classmethod
    def gl_i(cls, v, alpha, beta=1.0):
        v, alpha, beta = _real(v, "v"), _real(alpha, "alpha"), _real(beta, "beta")
        _check_v(v)
        if alpha <= 0:
            raise ValidationError(f"alpha must be > 0, got {alpha}")
        if beta < 1:
            raise ValidationError(f"beta must be >= 1, got {beta}")
        return cls(Family.GL_I, v, alpha, beta)

    @classmethod
    def gl_ii(cls, v, alpha):
        v, alpha = _real(v, "v"), _real(alpha, "alpha")
        _check_v(v)
        if alpha <= 0:
            raise ValidationError(f"alpha must be > 0, got {alpha}")
        return cls(Family.GL_II, v, alpha)

    @classmethod
    def tabulated(cls, z, g):
        z, g = _check_table(z, g, "tabulated breach function")
        _check_v(g[0])
        if np.any(g <= 0):
            raise ValidationError("tabulated breach probabilities must stay > 0")
        return cls(Family.TABULATED, float(g[0]), knots=(z, g))

    @property
    def convex(self):
        if self.family is Family.TABULATED:
            return _is_convex_pl(*self.knots)
        return True

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.family is Family.GL_I:
            out = self.v / (self.alpha * z + 1.0) ** self.beta
        elif self.family is Family.GL_II:
            out = self.v ** (self.alpha * z + 1.0)
        else:
            out = np.interp(z, *self.knots)
        return out if out.ndim else float(out)

    def slope_at_zero(self):
        """Right derivative g'(0+)."""
        if self.family is Family.GL_I:
            return -self.v * self.alpha * self.beta
        if self.family is Family.GL_II:
            return self.alpha * self.v * math.log(self.v)
        z, g = self.knots
        return float((g[1] - g[0]) / (z[1] - z[0]))


def _check_v(v):
    if not 0 < v < 1:
        raise ValidationError(f"baseline vulnerability v must lie in (0, 1), got {v}")


@dataclass(frozen=True, eq=False)
class LossMultiplier:
    """Fraction of the baseline loss still incurred after spending ``z``."""

    kind: str = "constant_one"
    gamma: float = 0.0
    knots: tuple | None = None

    @classmethod
    def constant_one(cls):
        return cls()

    @classmethod
    def rational(cls, gamma):
        gamma = _real(gamma, "gamma")
        if gamma <= 0:
            raise ValidationError(f"gamma must be > 0, got {gamma}")
        return cls("rational", gamma)

    @classmethod
    def tabulated(cls, z, h):
        z, h = _check_table(z, h, "tabulated loss multiplier")
        if np.any(h <= 0) or np.any(h > 1):
            raise ValidationError("loss multiplier values must lie in (0, 1]")
        return cls("tabulated", knots=(z, h))

    @property
    def convex(self):
        return self.kind != "tabulated" or _is_convex_pl(*self.knots)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "constant_one":
            out = np.ones_like(z)
        elif self.kind == "rational":
            out = 1.0 / (self.gamma * z + 1.0)
        else:
            out = np.interp(z, *self.knots)
        return out if out.ndim else float(out)

    def at_zero(self):
        return float(self(0.0))

    def slope_at_zero(self):
        if self.kind == "constant_one":
            return 0.0
        if self.kind == "rational":
            return -self.gamma
        z, h = self.knots
        return float((h[1] - h[0]) / (z[1] - z[0]))


@dataclass(frozen=True)
class Optimum:
    z_star: float | tuple[float, ...]
    objective_value: float
    bound: float
    iterations: int
    tolerance_used: float
    method: str = "golden"
    # True when a non-convex tabulated input forced the grid-scan fallback
    fallback: bool = False


def golden_section(f, a, b, tol, max_iter=500):
    """Minimize a unimodal ``f`` on ``[a, b]`` until the bracket is ``<= tol``.

    Returns ``(x, f(x), iterations)`` with ``x`` the best point evaluated.
    """
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while b - a > tol and it < max_iter:
        it += 1
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    if b - a > tol:
        raise NumericError(f"golden-section search did not converge in {max_iter} iterations")
    mid = 0.5 * (a + b)
    best = min((f(mid), mid), (f1, x1), (f2, x2))
    return best[1], best[0], it


def _scan_and_refine(obj, hi, tol, knots=()):
    """Grid scan (including any knot positions) then golden refinement."""
    grid = np.unique(np.concatenate([np.linspace(0.0, hi, 2001), np.asarray(knots, dtype=float)]))
    grid = grid[(grid >= 0) & (grid <= hi)]
    vals = np.array([obj(z) for z in grid])
    k = int(np.argmin(vals))
    lo_z, hi_z = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    z, fz, it = golden_section(obj, lo_z, hi_z, tol)
    if vals[k] <= fz:
        z, fz = float(grid[k]), float(vals[k])
    return z, fz, it + len(grid)


def _minimize_scalar(obj, slope0, hi, tol, convex, knots=()):
    if not convex:
        z, fz, it = _scan_and_refine(obj, hi, tol, knots)
        method, fallback = "grid+golden", True
    elif slope0 >= 0:
        # marginal benefit of the first dollar does not cover its cost
        z, fz, it = 0.0, obj(0.0), 0
        method, fallback = "corner", False
    else:
        z, fz, it = golden_section(obj, 0.0, hi, tol)
        method, fallback = "golden", False
    f0 = obj(0.0)
    if f0 <= fz:
        z, fz = 0.0, f0
    if not math.isfinite(fz):
        raise ValidationError("objective is not finite at the optimum")
    return z, fz, it, method, fallback


def _check_loss(L):
    L = _real(L, "loss L")
    if L <= 0:
        raise ValidationError(f"loss L must be > 0, got {L}")
    return L


def residual_breach_prob(f: BreachFunction, z) -> float:
    return f(_check_spend(z))


def gl_upper_bound(v: float, L: float) -> float:
    """The 1/e ceiling on optimal single-control spend, ``v*L/e``."""
    v = _real(v, "v")
    _check_v(v)
    L = _real(L, "loss L")
    if L < 0:
        raise ValidationError(f"loss L must be >= 0, got {L}")
    return v * L * INV_E


def optimal_investment_single(f: BreachFunction, L: float, tol: float | None = None) -> Optimum:
    """Minimize ``z + L*g(z)`` over ``[0, v*L]``.

    ``tol`` is the absolute tolerance on ``z`` (default ``1e-6*v*L``).
    """
    L = _check_loss(L)
    hi = f.v * L
    tol = 1e-6 * hi if tol is None else _real(tol, "tol")
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")

    def obj(z):
        return z + L * f(z)

    knots = f.knots[0] if f.family is Family.TABULATED else ()
    z, fz, it, method, fb = _minimize_scalar(obj, 1.0 + L * f.slope_at_zero(), hi, tol, f.convex, knots)
    return Optimum(z, fz, gl_upper_bound(f.v, L), it, tol, method, fb)


def optimal_investment_two_param(
    f: BreachFunction, h: LossMultiplier, L: float, tol: float | None = None
) -> Optimum:
    """Minimize ``z + L*h(z)*g(z)`` over ``[0, v*L]``."""
    L = _check_loss(L)
    hi = f.v * L
    tol = 1e-6 * hi if tol is None else _real(tol, "tol")
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")

    def obj(z):
        return z + L * h(z) * f(z)

    h0 = h.at_zero()
    slope = h.slope_at_zero() * f.v + h0 * f.slope_at_zero()
    knots = [k[0] for k in (f.knots, h.knots) if k is not None]
    knots = np.concatenate(knots) if knots else ()
    # both factors non-increasing, so max h*g sits at z = 0
    bound = INV_E * L * h0 * f.v
    z, fz, it, method, fb = _minimize_scalar(obj, 1.0 + L * slope, hi, tol, f.convex and h.convex, knots)
    return Optimum(z, fz, bound, it, tol, method, fb)


def net_benefit(f: BreachFunction, L: float, z: float) -> float:
    """Expected loss avoided minus spend: ``v*L - g(z)*L - z``."""
    z = float(_check_spend(z))
    L = _real(L, "loss L")
    return f.v * L - f(z) * L - z


# -- portfolio -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Multilinear interpolation over a rectangular grid, clamped at its edges."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        values = np.asarray(self.values, dtype=float)
        if values.shape != tuple(len(a) for a in axes):
            raise ValidationError(f"grid values of shape {values.shape} do not match the axes")
        for a in axes:
            if len(a) < 2 or np.any(np.diff(a) <= 0) or a[0] != 0:
                raise ValidationError("grid axes must start at 0 and be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValidationError("grid values must be finite")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_interp", RegularGridInterpolator(axes, values))

    @property
    def ndim(self):
        return len(self.axes)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        clipped = np.array([np.clip(zi, a[0], a[-1]) for zi, a in zip(z, self.axes)])
        return float(self._interp(clipped)[0])


@dataclass(frozen=True, eq=False)
class PortfolioSpec:
    """Controls competing for one security budget.

    With ``joint=None`` the joint breach probability is the product of the
    controls' own breach functions. Otherwise ``joint`` is a
    :class:`GridFunction` over the spend vector and ``controls`` only fixes the
    dimension. ``residual_loss`` is ``None`` (use ``L``), a constant, or a
    :class:`GridFunction`; ``budget_cap`` bounds total spend.
    """

    controls: tuple
    joint: GridFunction | None = None
    residual_loss: float | GridFunction | None = None
    budget_cap: float | None = None

    def __post_init__(self):
        controls = tuple(self.controls)
        object.__setattr__(self, "controls", controls)
        m = len(controls)
        if m < 1:
            raise ValidationError("a portfolio needs at least one control")
        if m > MAX_CONTROLS:
            raise ValidationError(f"at most {MAX_CONTROLS} controls are supported, got {m}")
        if self.joint is None:
            if not all(isinstance(c, BreachFunction) for c in controls):
                raise ValidationError("separable portfolios need a BreachFunction per control")
        else:
            if self.joint.ndim != m:
                raise ValidationError(f"joint grid has {self.joint.ndim} axes for {m} controls")
            if np.any(self.joint.values <= 0) or np.any(self.joint.values > 1):
                raise ValidationError("joint breach probabilities must lie in (0, 1]")
        if isinstance(self.residual_loss, GridFunction):
            if self.residual_loss.ndim != m:
                raise ValidationError("residual-loss grid dimension does not match the controls")
            if np.any(self.residual_loss.values < 0):
                raise ValidationError("residual loss must be >= 0")
        elif self.residual_loss is not None:
            rl = _real(self.residual_loss, "residual loss")
            if rl < 0:
                raise ValidationError("residual loss must be >= 0")
            object.__setattr__(self, "residual_loss", rl)
        if self.budget_cap is not None:
            cap = _real(self.budget_cap, "budget cap")
            if cap < 0:
                raise ValidationError(f"budget cap must be >= 0, got {cap}")
            object.__setattr__(self, "budget_cap", cap)

    @property
    def m(self):
        return len(self.controls)

    @property
    def joint_kind(self):
        return "separable_product" if self.joint is None else "custom_grid"

    def breach(self, z):
        if self.joint is not None:
            return self.joint(z)
        return math.prod(float(g(zi)) for g, zi in zip(self.controls, z))

    def loss(self, z, L):
        if self.residual_loss is None:
            return L
        if isinstance(self.residual_loss, GridFunction):
            return self.residual_loss(z)
        return self.residual_loss


def _project(x, upper, cap):
    """Euclidean projection onto {0 <= z <= upper, sum(z) <= cap}."""
    z = np.clip(x, 0.0, upper)
    if cap is None or z.sum() <= cap:
        return z
    lo, hi = 0.0, float(np.max(x))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.clip(x - mid, 0.0, upper).sum() > cap:
            lo = mid
        else:
            hi = mid
    return np.clip(x - hi, 0.0, upper)


def _start_points(m, upper, count):
    pts = [np.full(m, 0.5 * upper), np.zeros(m), np.full(m, 0.1 * upper)]
    for i in range(m):
        p = np.zeros(m)
        p[i] = 0.5 * upper
        pts.append(p)
    if count > len(pts):
        halton = qmc.Halton(d=m, scramble=False).random(count - len(pts) + 1)[1:]
        pts.extend(upper * h for h in halton)
    return pts[:count]


def optimize_portfolio(spec: PortfolioSpec, L: float, tol: float | None = None, restarts: int = 4) -> Optimum:
    """Minimize total spend plus residual expected loss over the spend vector.

    Multi-start Nelder-Mead from a fixed set of seeds (box centre, origin,
    per-axis points, then a Halton sequence), each run re-seeded from its own
    result until it stops improving. Candidates outside the feasible box are
    projected back onto it. Deterministic for fixed inputs.
    """
    L = _check_loss(L)
    if isinstance(spec.residual_loss, GridFunction) and np.any(spec.residual_loss.values > L * (1 + 1e-12)):
        raise ValidationError("residual loss must not exceed L")
    if spec.residual_loss is not None and not isinstance(spec.residual_loss, GridFunction):
        if spec.residual_loss > L * (1 + 1e-12):
            raise ValidationError("residual loss must not exceed L")
    if int(restarts) != restarts or restarts < 1:
        raise ValidationError(f"restarts must be a positive integer, got {restarts}")
    m = spec.m
    zero = np.zeros(m)
    f0 = spec.loss(zero, L) * spec.breach(zero)
    if not math.isfinite(f0):
        raise ValidationError("objective is not finite at zero spend")
    # total spend at the optimum cannot exceed the expected loss at zero spend
    upper = max(f0, 0.0)
    cap = spec.budget_cap
    tol = 1e-6 * max(upper, 1e-300) if tol is None else _real(tol, "tol")
    if tol <= 0:
        raise ValidationError(f"tol must be > 0, got {tol}")

    def objective(z):
        val = float(np.sum(z)) + spec.loss(z, L) * spec.breach(z)
        if not math.isfinite(val):
            raise ValidationError(f"objective is not finite at z = {z}")
        return val

    if upper == 0:
        return Optimum(tuple(zero.tolist()), objective(zero), 0.0, 0, tol, "nelder-mead")

    def penalized(x):
        z = _project(x, upper, cap)
        return objective(z) + float(np.sum((x - z) ** 2)) / upper

    total_it = 0
    candidates = []
    for x0 in _start_points(m, upper, int(restarts)):
        x = _project(x0, upper, cap)
        best = objective(x)
        for _ in range(10):
            step = max(0.05 * upper, 10 * tol)
            simplex = np.vstack([x] + [x + step * e for e in np.eye(m)])
            res = optimize.minimize(
                penalized,
                x,
                method="Nelder-Mead",
                options={"initial_simplex": simplex, "xatol": tol, "fatol": 1e-12 * upper, "maxiter": 4000 * m},
            )
            total_it += int(res.nit)
            z = _project(res.x, upper, cap)
            val = objective(z)
            improved = val < best - 1e-12 * upper
            if val <= best:
                x, best = z, val
            if not improved:
                break
        candidates.append((best, tuple(x.tolist())))
    candidates.append((objective(zero), tuple(zero.tolist())))
    best_val, best_z = min(candidates)
    return Optimum(best_z, best_val, upper, total_it, tol, "nelder-mead")


__all__ = [
    "BreachFunction",
    "Family",
    "GridFunction",
    "LossMultiplier",
    "Optimum",
    "PortfolioSpec",
    "golden_section",
    "gl_upper_bound",
    "net_benefit",
    "optimal_investment_single",
    "optimal_investment_two_param",
    "optimize_portfolio",
    "residual_breach_prob",
]
