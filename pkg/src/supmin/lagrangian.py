"""Lagrangian models L(x, eta, p) >= 0 with jets and hypothesis checkers.

Arguments follow the convention (x, eta, p): position in the interval, map
value in R^N, derivative in R^N.  Built-in families:

* ``PowerNormModel``       L = |p - offset|^s
* ``DataAssimilationModel``L = |k(x) - K eta|^2 + |p - (A eta + c(x))|^2
* ``RadialModel``          L = f(|p - (A eta + c(x))|^2 / 2) for an increasing profile f
* ``CustomModel``          user callable, finite-difference jets by default

All built-ins carry exact first and second derivatives; anything else falls
back to central finite differences.  ``check_level_convexity`` and
``check_growth_bounds`` are sampling certifications: a pass is evidence,
never a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NegativeLagrangian, NonFinite, SupminError

_EPS = np.finfo(float).eps
_FD_FIRST = _EPS ** (1.0 / 3.0)
# second differences lose ~eps/h^2; the quarter-power step keeps ~1e-8 accuracy
_FD_SECOND = _EPS**0.25


def _vec(v, name: str) -> np.ndarray:
    a = np.array(v, dtype=float)
    a = np.atleast_1d(a)
    if a.ndim != 1 or not np.all(np.isfinite(a)):
        raise SupminError(f"{name} must be a finite vector")
    a.flags.writeable = False
    return a


def _mat(v, name: str) -> np.ndarray:
    a = np.array(v, dtype=float)
    a = np.atleast_2d(a)
    if a.ndim != 2 or not np.all(np.isfinite(a)):
        raise SupminError(f"{name} must be a finite matrix")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SampledSignal:
    """Piecewise-linear signal from (x, value) samples, constant outside them."""

    xs: np.ndarray | None
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if self.xs is None:
            values = np.atleast_1d(values)
            if values.ndim != 1:
                raise SupminError("constant signal value must be a vector")
        else:
            xs = _vec(self.xs, "signal xs")
            if xs.size < 2 or not np.all(np.diff(xs) > 0):
                raise SupminError("signal xs must be strictly increasing, >= 2 samples")
            if values.ndim == 1:
                values = values[:, None]
            if values.shape[0] != xs.size:
                raise SupminError("signal needs one value row per sample")
            object.__setattr__(self, "xs", xs)
        if not np.all(np.isfinite(values)):
            raise SupminError("signal values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, values) -> "SampledSignal":
        return cls(None, values)

    @classmethod
    def from_rows(cls, rows) -> "SampledSignal":
        """Rows [x, v1, ..., vD], strictly increasing in x."""
        data = np.atleast_2d(np.array(rows, dtype=float))
        if data.shape[1] < 2:
            raise SupminError("signal rows need at least [x, value]")
        return cls(data[:, 0], data[:, 1:])

    @property
    def dim(self) -> int:
        return self.values.shape[0] if self.xs is None else self.values.shape[1]

    def eval(self, x: float) -> np.ndarray:
        if self.xs is None:
            return self.values
        return np.array([np.interp(x, self.xs, col) for col in self.values.T])

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        if self.xs is None:
            return np.broadcast_to(self.values, (len(xs), self.dim))
        return np.column_stack([np.interp(xs, self.xs, col) for col in self.values.T])

    def derivative(self, x: float) -> np.ndarray:
        """Element slope at x (left element at knots); zero outside the samples."""
        if self.xs is None or x < self.xs[0] or x > self.xs[-1]:
            return np.zeros(self.dim)
        idx = int(np.searchsorted(self.xs, x, side="left"))
        e = min(max(idx - 1, 0), self.xs.size - 2)
        return (self.values[e + 1] - self.values[e]) / (self.xs[e + 1] - self.xs[e])


@dataclass(frozen=True)
class GrowthParams:
    """Constants of the two-sided growth bound
    c1*|p|^q - c2 <= L <= h(x,eta)*|p|^r + c3."""

    c1: float
    c2: float
    c3: float
    q: float
    r: float
    h_bound: float | Callable[[float, np.ndarray], float] = 1.0

    def __post_init__(self):
        if min(self.c1, self.c2, self.c3) < 0:
            raise SupminError("growth constants must be nonnegative")
        if not (0 < self.q <= self.r < np.inf):
            raise SupminError("growth exponents need 0 < q <= r")

    def envelope(self, x: float, eta: np.ndarray) -> float:
        if callable(self.h_bound):
            return float(self.h_bound(x, eta))
        return float(self.h_bound)


@dataclass(frozen=True)
class JetDerivatives:
    """Value and partial derivatives of L at one point (x, eta, p).

    ``dp``/``deta`` are gradients in p and eta, ``dx`` the x-derivative;
    ``dpp``, ``dpeta``, ``dpx`` are the second-order blocks taken against p
    first.  ``dpp`` is symmetric (symmetrized explicitly when produced by
    finite differences).
    """

    value: float
    dp: np.ndarray
    deta: np.ndarray
    dx: float
    dpp: np.ndarray
    dpeta: np.ndarray
    dpx: np.ndarray

    def __post_init__(self):
        parts = [self.value, self.dp, self.deta, self.dx, self.dpp, self.dpeta, self.dpx]
        if not all(np.all(np.isfinite(part)) for part in parts):
            raise NonFinite("jet contains non-finite entries")


def finite_difference_jet(f, x: float, eta: np.ndarray, p: np.ndarray) -> JetDerivatives:
    """Central-difference jet of a scalar f(x, eta, p).

    First-order steps are eps^(1/3)*(1+|coord|) per coordinate, second-order
    steps eps^(1/4)*(1+|coord|).
    """
    eta = np.asarray(eta, dtype=float)
    p = np.asarray(p, dtype=float)
    n = p.size
    value = float(f(x, eta, p))

    def shift(vec, i, h):
        out = vec.copy()
        out[i] += h
        return out

    h1x = _FD_FIRST * (1.0 + abs(x))
    h1e = _FD_FIRST * (1.0 + np.abs(eta))
    h1p = _FD_FIRST * (1.0 + np.abs(p))
    h2x = _FD_SECOND * (1.0 + abs(x))
    h2e = _FD_SECOND * (1.0 + np.abs(eta))
    h2p = _FD_SECOND * (1.0 + np.abs(p))

    dp = np.array(
        [(f(x, eta, shift(p, i, h1p[i])) - f(x, eta, shift(p, i, -h1p[i]))) / (2 * h1p[i]) for i in range(n)]
    )
    deta = np.array(
        [(f(x, shift(eta, j, h1e[j]), p) - f(x, shift(eta, j, -h1e[j]), p)) / (2 * h1e[j]) for j in range(eta.size)]
    )
    dx = (f(x + h1x, eta, p) - f(x - h1x, eta, p)) / (2 * h1x)

    dpp = np.empty((n, n))
    for i in range(n):
        dpp[i, i] = (
            f(x, eta, shift(p, i, h2p[i])) - 2 * value + f(x, eta, shift(p, i, -h2p[i]))
        ) / h2p[i] ** 2
        for j in range(i + 1, n):
            pp = shift(shift(p, i, h2p[i]), j, h2p[j])
            pm = shift(shift(p, i, h2p[i]), j, -h2p[j])
            mp = shift(shift(p, i, -h2p[i]), j, h2p[j])
            mm = shift(shift(p, i, -h2p[i]), j, -h2p[j])
            dpp[i, j] = dpp[j, i] = (f(x, eta, pp) - f(x, eta, pm) - f(x, eta, mp) + f(x, eta, mm)) / (
                4 * h2p[i] * h2p[j]
            )
    dpp = 0.5 * (dpp + dpp.T)

    dpeta = np.empty((n, eta.size))
    for i in range(n):
        for j in range(eta.size):
            dpeta[i, j] = (
                f(x, shift(eta, j, h2e[j]), shift(p, i, h2p[i]))
                - f(x, shift(eta, j, -h2e[j]), shift(p, i, h2p[i]))
                - f(x, shift(eta, j, h2e[j]), shift(p, i, -h2p[i]))
                + f(x, shift(eta, j, -h2e[j]), shift(p, i, -h2p[i]))
            ) / (4 * h2p[i] * h2e[j])

    dpx = np.array(
        [
            (
                f(x + h2x, eta, shift(p, i, h2p[i]))
                - f(x - h2x, eta, shift(p, i, h2p[i]))
                - f(x + h2x, eta, shift(p, i, -h2p[i]))
                + f(x - h2x, eta, shift(p, i, -h2p[i]))
            )
            / (4 * h2p[i] * h2x)
            for i in range(n)
        ]
    )
    return JetDerivatives(value, dp, deta, float(dx), dpp, dpeta, dpx)


class LagrangianModel:
    """Base class: nonnegative L(x, eta, p) with jets.

    Models are immutable after construction; all evaluation methods are pure,
    so instances are safe to share between concurrent tasks.
    """

    kind = "custom"

    def __init__(self, dim: int, growth: GrowthParams | None = None,
                 analytic_jets: tuple[bool, bool] = (False, False)):
        self.dim = int(dim)
        self.growth = growth
        self.analytic_jets = (bool(analytic_jets[0]), bool(analytic_jets[1]))

    # -- evaluation ---------------------------------------------------------

    def _eval_raw(self, x: float, eta: np.ndarray, p: np.ndarray) -> float:
        raise NotImplementedError

    def eval(self, x: float, eta, p) -> float:
        val = float(self._eval_raw(float(x), np.asarray(eta, dtype=float), np.asarray(p, dtype=float)))
        if not np.isfinite(val):
            raise NonFinite(f"L({x}, ...) is not finite")
        if val < 0:
            raise NegativeLagrangian(f"L({x}, ...) = {val} < 0")
        return val

    def eval_many(self, xs: np.ndarray, etas: np.ndarray, ps: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over rows; overridden by the built-ins."""
        out = np.array([self._eval_raw(float(x), e, s) for x, e, s in zip(xs, etas, ps)], dtype=float)
        return self._checked(out)

    @staticmethod
    def _checked(values: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(values)):
            raise NonFinite("Lagrangian evaluation is not finite")
        if np.any(values < 0):
            raise NegativeLagrangian("Lagrangian evaluation is negative")
        return values

    # -- jets ----------------------------------------------------------------

    def _jet_analytic(self, x: float, eta: np.ndarray, p: np.ndarray) -> JetDerivatives:
        raise NotImplementedError

    def jet(self, x: float, eta, p) -> JetDerivatives:
        eta = np.asarray(eta, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.analytic_jets == (True, True):
            return self._jet_analytic(float(x), eta, p)
        return finite_difference_jet(self._eval_raw, float(x), eta, p)


class PowerNormModel(LagrangianModel):
    """L = |p - offset|^s, level-convex for every s > 0."""

    kind = "power_norm"

    def __init__(self, exponent: float, offset, growth: GrowthParams | None = None):
        offset = _vec(offset, "offset")
        super().__init__(offset.size, growth, analytic_jets=(True, True))
        if not (exponent > 0 and np.isfinite(exponent)):
            raise SupminError("exponent must be positive and finite")
        self.exponent = float(exponent)
        self.offset = offset

    def _eval_raw(self, x, eta, p):
        with np.errstate(over="ignore"):  # overflow surfaces as NonFinite
            return np.linalg.norm(p - self.offset) ** self.exponent

    def eval_many(self, xs, etas, ps):
        rho = np.linalg.norm(ps - self.offset[None, :], axis=1)
        with np.errstate(over="ignore"):
            return self._checked(rho**self.exponent)

    def _jet_analytic(self, x, eta, p):
        s = self.exponent
        w = p - self.offset
        rho = float(np.linalg.norm(w))
        n = self.dim
        zeros_v = np.zeros(n)
        if rho == 0.0:
            if s < 2:
                # |w|^s has no two-sided jet at w = 0 below quadratic growth
                raise NonFinite("power-norm jet is singular at p = offset for s < 2")
            dpp = 2.0 * np.eye(n) if s == 2 else np.zeros((n, n))
            return JetDerivatives(0.0, zeros_v, zeros_v, 0.0, dpp, np.zeros((n, n)), zeros_v)
        unit = w / rho
        value = rho**s
        dp = s * rho ** (s - 1) * unit
        dpp = s * rho ** (s - 2) * (np.eye(n) + (s - 2) * np.outer(unit, unit))
        return JetDerivatives(value, dp, zeros_v, 0.0, dpp, np.zeros((n, n)), zeros_v)


class DataAssimilationModel(LagrangianModel):
    """Squared observation mismatch plus squared law-of-motion mismatch:
    L = |k(x) - K eta|^2 + |p - V(x, eta)|^2 with V(x, eta) = A eta + c(x)."""

    kind = "data_assimilation"

    def __init__(self, K, k: SampledSignal, A, c: SampledSignal,
                 growth: GrowthParams | None = None):
        K = _mat(K, "K")
        A = _mat(A, "A")
        if A.shape[0] != A.shape[1]:
            raise SupminError("A must be square")
        n = A.shape[0]
        if K.shape[1] != n:
            raise SupminError("K must have N columns")
        if k.dim != K.shape[0]:
            raise SupminError("signal k must match the rows of K")
        if c.dim != n:
            raise SupminError("signal c must have dimension N")
        super().__init__(n, growth, analytic_jets=(True, True))
        self.K = K
        self.k = k
        self.A = A
        self.c = c

    def velocity(self, x: float, eta: np.ndarray) -> np.ndarray:
        return self.A @ eta + self.c.eval(x)

    def _eval_raw(self, x, eta, p):
        r = self.k.eval(x) - self.K @ eta
        w = p - self.velocity(x, eta)
        return float(r @ r + w @ w)

    def eval_many(self, xs, etas, ps):
        r = self.k.eval_many(xs) - etas @ self.K.T
        w = ps - (etas @ self.A.T + self.c.eval_many(xs))
        return self._checked(np.sum(r * r, axis=1) + np.sum(w * w, axis=1))

    def _jet_analytic(self, x, eta, p):
        r = self.k.eval(x) - self.K @ eta
        w = p - self.velocity(x, eta)
        kdx = self.k.derivative(x)
        cdx = self.c.derivative(x)
        value = float(r @ r + w @ w)
        dp = 2.0 * w
        deta = -2.0 * self.K.T @ r - 2.0 * self.A.T @ w
        dx = float(2.0 * r @ kdx - 2.0 * w @ cdx)
        dpp = 2.0 * np.eye(self.dim)
        dpeta = -2.0 * self.A
        dpx = -2.0 * cdx
        return JetDerivatives(value, dp, deta, dx, dpp, dpeta, dpx)


@dataclass(frozen=True)
class RadialProfile:
    """Strictly increasing scalar profile f with derivatives, f(t) >= 0 for t >= 0."""

    name: str
    f: Callable[[float], float]
    df: Callable[[float], float]
    ddf: Callable[[float], float]
    params: dict = field(default_factory=dict)


def radial_profile(name: str, *, beta: float = 0.0, gamma: float = 1.0) -> RadialProfile:
    """Profiles: identity t, shift t+beta (beta >= 0), power (1+t)^gamma - 1 (gamma > 0)."""
    if name == "identity":
        return RadialProfile("identity", lambda t: t, lambda t: 1.0, lambda t: 0.0)
    if name == "shift":
        if beta < 0:
            raise SupminError("shift profile needs beta >= 0")
        return RadialProfile("shift", lambda t: t + beta, lambda t: 1.0, lambda t: 0.0,
                             {"beta": float(beta)})
    if name == "power":
        if gamma <= 0:
            raise SupminError("power profile needs gamma > 0")
        return RadialProfile(
            "power",
            lambda t: (1.0 + t) ** gamma - 1.0,
            lambda t: gamma * (1.0 + t) ** (gamma - 1.0),
            lambda t: gamma * (gamma - 1.0) * (1.0 + t) ** (gamma - 2.0),
            {"gamma": float(gamma)},
        )
    raise SupminError(f"unknown radial profile '{name}'")


class RadialModel(LagrangianModel):
    """L = f(|p - V(x, eta)|^2 / 2), an increasing profile of the squared
    deviation from the velocity field V(x, eta) = A eta + c(x)."""

    kind = "radial"

    def __init__(self, profile: RadialProfile, A, c: SampledSignal,
                 growth: GrowthParams | None = None):
        A = _mat(A, "A")
        if A.shape[0] != A.shape[1]:
            raise SupminError("A must be square")
        if c.dim != A.shape[0]:
            raise SupminError("signal c must have dimension N")
        super().__init__(A.shape[0], growth, analytic_jets=(True, True))
        self.profile = profile
        self.A = A
        self.c = c

    def velocity(self, x: float, eta: np.ndarray) -> np.ndarray:
        return self.A @ eta + self.c.eval(x)

    def _eval_raw(self, x, eta, p):
        w = p - self.velocity(x, eta)
        return float(self.profile.f(0.5 * (w @ w)))

    def eval_many(self, xs, etas, ps):
        w = ps - (etas @ self.A.T + self.c.eval_many(xs))
        t = 0.5 * np.sum(w * w, axis=1)
        return self._checked(np.array([self.profile.f(ti) for ti in t]))

    def _jet_analytic(self, x, eta, p):
        w = p - self.velocity(x, eta)
        cdx = self.c.derivative(x)
        t = 0.5 * float(w @ w)
        f1, f2 = self.profile.df(t), self.profile.ddf(t)
        at_w = self.A.T @ w
        w_cdx = float(w @ cdx)
        value = float(self.profile.f(t))
        dp = f1 * w
        deta = -f1 * at_w
        dx = -f1 * w_cdx
        dpp = f1 * np.eye(self.dim) + f2 * np.outer(w, w)
        dpeta = -f2 * np.outer(w, at_w) - f1 * self.A
        dpx = -f2 * w_cdx * w - f1 * cdx
        return JetDerivatives(value, dp, deta, dx, dpp, dpeta, dpx)


class CustomModel(LagrangianModel):
    """Callable-backed model; jets by finite differences unless jet_fn is given."""

    kind = "custom"

    def __init__(self, fn: Callable, dim: int, jet_fn: Callable | None = None,
                 growth: GrowthParams | None = None):
        super().__init__(dim, growth, analytic_jets=(jet_fn is not None,) * 2)
        self.fn = fn
        self.jet_fn = jet_fn

    def _eval_raw(self, x, eta, p):
        return float(self.fn(x, eta, p))

    def _jet_analytic(self, x, eta, p):
        return self.jet_fn(x, eta, p)


class MinOfNormsModel(LagrangianModel):
    """L = min_k |p - center_k|^s: level-convex only when a single center
    remains; the canonical counterexample with two centers."""

    kind = "custom"

    def __init__(self, centers, exponent: float = 1.0,
                 growth: GrowthParams | None = None):
        centers = _mat(centers, "centers")
        super().__init__(centers.shape[1], growth)
        if exponent <= 0:
            raise SupminError("exponent must be positive")
        self.centers = centers
        self.exponent = float(exponent)

    def _eval_raw(self, x, eta, p):
        d = np.linalg.norm(self.centers - p[None, :], axis=1)
        with np.errstate(over="ignore"):
            return float(np.min(d) ** np.float64(self.exponent))

    def eval_many(self, xs, etas, ps):
        d = np.linalg.norm(ps[:, None, :] - self.centers[None, :, :], axis=2)
        with np.errstate(over="ignore"):
            return self._checked(np.min(d, axis=1) ** self.exponent)


class ScaledModel(LagrangianModel):
    """factor * L for a positive factor; jets scale exactly."""

    def __init__(self, inner: LagrangianModel, factor: float):
        if factor <= 0 or not np.isfinite(factor):
            raise SupminError("scale factor must be positive and finite")
        super().__init__(inner.dim, inner.growth, inner.analytic_jets)
        self.kind = inner.kind
        self.inner = inner
        self.factor = float(factor)

    def _eval_raw(self, x, eta, p):
        return self.factor * self.inner._eval_raw(x, eta, p)

    def eval_many(self, xs, etas, ps):
        return self.factor * self.inner.eval_many(xs, etas, ps)

    def _jet_analytic(self, x, eta, p):
        j = self.inner._jet_analytic(x, eta, p)
        c = self.factor
        return JetDerivatives(c * j.value, c * j.dp, c * j.deta, c * j.dx,
                              c * j.dpp, c * j.dpeta, c * j.dpx)


def scaled(model: LagrangianModel, factor: float) -> ScaledModel:
    return ScaledModel(model, factor)


# -- sampling certifications --------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Coordinate ranges for sampling (x, eta, p); eta/p ranges apply per axis."""

    x: tuple[float, float] = (0.0, 1.0)
    eta: tuple[float, float] = (-5.0, 5.0)
    p: tuple[float, float] = (-5.0, 5.0)

    def __post_init__(self):
        for lo, hi in (self.x, self.eta, self.p):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise SupminError("box ranges must be finite with lo <= hi")


@dataclass(frozen=True)
class SamplePlan:
    num_triples: int = 200
    box: Box = field(default_factory=Box)
    t_levels: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.num_triples < 1 or self.t_levels < 1:
            raise SupminError("sample plan needs num_triples >= 1 and t_levels >= 1")


@dataclass(frozen=True)
class LevelConvexityWitness:
    x: float
    eta: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    lam: float
    mixed_value: float
    end_max: float

    def to_json_dict(self) -> dict:
        return {
            "x": self.x,
            "eta": list(self.eta),
            "p1": list(self.p1),
            "p2": list(self.p2),
            "lambda": self.lam,
            "mixed_value": self.mixed_value,
            "end_max": self.end_max,
        }


@dataclass(frozen=True)
class LevelConvexityResult:
    passed: bool
    witnesses: list

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "witness_count": len(self.witnesses),
            "witnesses": [w.to_json_dict() for w in self.witnesses[:20]],
        }


def level_convexity_tolerance(end_max: float) -> float:
    """Slack absorbing floating-point noise on exact-equality cases."""
    return 1e-9 * (1.0 + end_max)


def check_level_convexity(model: LagrangianModel, plan: SamplePlan | None = None) -> LevelConvexityResult:
    """Sample segments in p-space and flag L(mix) > max(L(p1), L(p2)) + tol.

    Necessary-only evidence: a pass certifies nothing beyond the samples.
    """
    plan = plan or SamplePlan()
    rng = np.random.default_rng(plan.seed)
    lams = np.linspace(0.0, 1.0, plan.t_levels + 2)[1:-1]
    witnesses = []
    for _ in range(plan.num_triples):
        x = float(rng.uniform(*plan.box.x))
        eta = rng.uniform(*plan.box.eta, size=model.dim)
        p1 = rng.uniform(*plan.box.p, size=model.dim)
        p2 = rng.uniform(*plan.box.p, size=model.dim)
        end_max = max(model.eval(x, eta, p1), model.eval(x, eta, p2))
        tol = level_convexity_tolerance(end_max)
        for lam in lams:
            mixed = model.eval(x, eta, lam * p1 + (1.0 - lam) * p2)
            if mixed > end_max + tol:
                witnesses.append(LevelConvexityWitness(x, eta, p1, p2, float(lam), mixed, end_max))
    return LevelConvexityResult(not witnesses, witnesses)


@dataclass(frozen=True)
class GrowthWitness:
    x: float
    eta: np.ndarray
    p: np.ndarray
    value: float
    bound: float
    side: str  # "lower" or "upper"

    def to_json_dict(self) -> dict:
        return {
            "x": self.x,
            "eta": list(self.eta),
            "p": list(self.p),
            "value": self.value,
            "bound": self.bound,
            "side": self.side,
        }


@dataclass(frozen=True)
class GrowthCheckResult:
    passed: bool
    lower_margin: float
    upper_margin: float
    witnesses: list

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "worst_margins": {"lower": self.lower_margin, "upper": self.upper_margin},
            "witness_count": len(self.witnesses),
            "witnesses": [w.to_json_dict() for w in self.witnesses[:20]],
        }


def check_growth_bounds(model: LagrangianModel, growth: GrowthParams,
                        plan: SamplePlan | None = None) -> GrowthCheckResult:
    """Sample (x, eta, p) and check both sides of the growth bound; margins
    report the minimal slack found on each side."""
    plan = plan or SamplePlan()
    rng = np.random.default_rng(plan.seed)
    lower_margin = np.inf
    upper_margin = np.inf
    witnesses = []
    for _ in range(plan.num_triples):
        x = float(rng.uniform(*plan.box.x))
        eta = rng.uniform(*plan.box.eta, size=model.dim)
        p = rng.uniform(*plan.box.p, size=model.dim)
        val = model.eval(x, eta, p)
        pn = float(np.linalg.norm(p))
        lower = growth.c1 * pn**growth.q - growth.c2
        upper = growth.envelope(x, eta) * pn**growth.r + growth.c3
        tol = 1e-9 * (1.0 + abs(val))
        lower_margin = min(lower_margin, val - lower)
        upper_margin = min(upper_margin, upper - val)
        if val - lower < -tol:
            witnesses.append(GrowthWitness(x, eta, p, val, lower, "lower"))
        if upper - val < -tol:
            witnesses.append(GrowthWitness(x, eta, p, val, upper, "upper"))
    return GrowthCheckResult(not witnesses, float(lower_margin), float(upper_margin), witnesses)
