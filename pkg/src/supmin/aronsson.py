"""Pointwise vectorial Aronsson operator and residual profiles along paths.

For a second-order point (x, eta, p, xx) and jet J of the model the operator
assembles, with Q the orthogonal projection onto the hyperplane normal to
J.dp,

    [ dp (x) dp + L * Q * dpp ] xx
    + (deta . p + dx) dp
    + L * Q * (dpeta p + dpx - deta),

the natural second-order system attached to sup-energy minimization.  Its
coefficients are discontinuous across dp = 0, where the projection
degenerates to the identity (sign of the zero vector is zero); this locus is
reported as-is, never smoothed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NonUniformGrid, SupminError
from .lagrangian import LagrangianModel
from .path import Path


def normal_projection(xi, tol_sgn: float | None = None) -> np.ndarray:
    """I - (xi/|xi|) (x) (xi/|xi|) for |xi| above tol_sgn, else the identity.

    The default threshold 1e-12 * (1 + |xi|) guards against projection
    blow-up from floating-point noise near xi = 0.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    n = xi.size
    norm = float(np.linalg.norm(xi))
    if tol_sgn is None:
        tol_sgn = 1e-12 * (1.0 + norm)
    if norm <= tol_sgn:
        return np.eye(n)
    unit = xi / norm
    return np.eye(n) - np.outer(unit, unit)


@dataclass(frozen=True)
class SecondOrderPoint:
    """Arguments of the operator: position, value, slope, curvature."""

    x: float
    value: np.ndarray
    slope: np.ndarray
    curvature: np.ndarray

    def __post_init__(self):
        for name in ("value", "slope", "curvature"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if not np.all(np.isfinite(arr)):
                raise SupminError(f"{name} must be finite")
            object.__setattr__(self, name, arr)


def aronsson_operator(model: LagrangianModel, pt: SecondOrderPoint) -> np.ndarray:
    """Evaluate the operator at one point; needs jets to second order."""
    jet = model.jet(pt.x, pt.value, pt.slope)
    proj = normal_projection(jet.dp)
    lead = np.outer(jet.dp, jet.dp) + jet.value * proj @ jet.dpp
    lower = (float(jet.deta @ pt.slope) + jet.dx) * jet.dp
    drift = jet.value * proj @ (jet.dpeta @ pt.slope + jet.dpx - jet.deta)
    out = lead @ pt.curvature + lower + drift
    if not np.all(np.isfinite(out)):
        raise NonFinite("operator value is not finite")
    return out


@dataclass(frozen=True)
class ResidualProfile:
    """Operator residuals at the interior nodes of a uniform grid."""

    xs: np.ndarray
    residuals: np.ndarray
    norms: np.ndarray

    @property
    def max_norm(self) -> float:
        return float(np.max(self.norms)) if self.norms.size else 0.0

    def to_csv(self, file) -> None:
        """Rows `x,res_1,...,res_N,norm` at 17 significant digits."""
        close = False
        if isinstance(file, (str, bytes)):
            file, close = open(file, "w", newline="\n"), True
        try:
            n = self.residuals.shape[1]
            cols = ",".join(f"res_{k + 1}" for k in range(n))
            file.write(f"x,{cols},norm\n")
            for x, row, nrm in zip(self.xs, self.residuals, self.norms):
                vals = ",".join(format(v, ".17g") for v in row)
                file.write(f"{format(x, '.17g')},{vals},{format(nrm, '.17g')}\n")
        finally:
            if close:
                file.close()


def residual_profile(model: LagrangianModel, path: Path) -> ResidualProfile:
    """Central-difference slope and curvature at each interior node, fed
    through the operator.

    Candidates are in general only Lipschitz, so the profile is a diagnostic,
    not a convergence claim; no smallness is asserted at kinks.
    """
    grid = path.grid
    if grid.num_elements < 4:
        raise SupminError("residual profile needs at least 4 elements")
    if not grid.is_uniform:
        raise NonUniformGrid("residual profile needs a uniform grid")
    h = float(grid.nodes[1] - grid.nodes[0])
    u = path.values
    xs = grid.nodes[1:-1]
    residuals = np.empty((xs.size, path.dim))
    for k in range(xs.size):
        i = k + 1
        slope = (u[i + 1] - u[i - 1]) / (2.0 * h)
        curvature = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h**2
        pt = SecondOrderPoint(float(xs[k]), u[i], slope, curvature)
        residuals[k] = aronsson_operator(model, pt)
    norms = np.linalg.norm(residuals, axis=1)
    return ResidualProfile(xs, residuals, norms)
