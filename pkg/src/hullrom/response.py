"""Polynomial response surfaces over reduced variables, feasibility
filtering, constrained minimization, and the reduced-to-full preimage map.

Monomial ordering (graded lexicographic): constant, then the M linear terms,
then for degree 2 the squares x_1^2 .. x_M^2 followed by the cross terms
x_i x_j with i < j in lexicographic order.
"""

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .errors import ArgumentError, EmptyFeasibleSetError

#: grid resolution per axis used by the fallback scan (M <= 3)
GRID_POINTS = 101


def monomial_exponents(dim, degree):
    """Exponent tuples in the documented order."""
    if degree not in (1, 2):
        raise ArgumentError(f"degree must be 1 or 2, got {degree}")
    exps = [tuple(0 for _ in range(dim))]
    for i in range(dim):
        exps.append(tuple(1 if j == i else 0 for j in range(dim)))
    if degree == 2:
        for i in range(dim):
            exps.append(tuple(2 if j == i else 0 for j in range(dim)))
        for i in range(dim):
            for j in range(i + 1, dim):
                exps.append(tuple(1 if t in (i, j) else 0 for t in range(dim)))
    return exps


def _design_matrix(points, exps):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    cols = [np.prod(points ** np.array(e), axis=1) for e in exps]
    return np.column_stack(cols)


@dataclass
class PolynomialSurface:
    dim: int
    degree: int
    coefficients: np.ndarray
    rmse: float = 0.0

    def __post_init__(self):
        expected = comb(self.dim + self.degree, self.degree)
        self.coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if self.coefficients.size != expected:
            raise ArgumentError(
                f"degree-{self.degree} surface in {self.dim} variables needs "
                f"{expected} coefficients, got {self.coefficients.size}"
            )
        if not np.all(np.isfinite(self.coefficients)):
            raise ArgumentError("non-finite surface coefficients")


@dataclass(frozen=True)
class FeasibleBand:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ArgumentError(f"band lower {self.lower} > upper {self.upper}")


def fit_polynomial(points, values, degree):
    """Least-squares fit; exact on full-rank polynomial data of the degree."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    values = np.asarray(values, dtype=float).reshape(-1)
    n, dim = points.shape
    exps = monomial_exponents(dim, degree)
    if n < len(exps):
        raise ArgumentError(
            f"need at least {len(exps)} samples for degree {degree} in "
            f"{dim} variables, got {n}"
        )
    design = _design_matrix(points, exps)
    coef, _, rank, svals = np.linalg.lstsq(design, values, rcond=None)
    if rank < len(exps):
        warnings.warn(
            "rank-deficient response-surface design; minimal-norm fit used",
            stacklevel=2,
        )
    residual = design @ coef - values
    surface = PolynomialSurface(dim=dim, degree=degree, coefficients=coef)
    surface.rmse = float(np.sqrt(np.mean(residual**2)))
    surface.condition = float(svals[0] / svals[-1]) if svals[-1] > 0 else np.inf
    return surface


def evaluate(surface, point):
    point = np.asarray(point, dtype=float)
    single = point.ndim == 1
    pts = np.atleast_2d(point)
    if pts.shape[1] != surface.dim:
        raise ArgumentError(
            f"point dimension {pts.shape[1]} != surface dimension {surface.dim}"
        )
    exps = monomial_exponents(surface.dim, surface.degree)
    vals = _design_matrix(pts, exps) @ surface.coefficients
    return float(vals[0]) if single else vals


def rmse_against(surface, points, values):
    values = np.asarray(values, dtype=float).reshape(-1)
    residual = evaluate(surface, np.atleast_2d(points)) - values
    return float(np.sqrt(np.mean(residual**2)))


def filter_feasible(values, band):
    """Indices with band.lower <= value <= band.upper (inclusive)."""
    values = np.asarray(values, dtype=float).reshape(-1)
    idx = np.nonzero((values >= band.lower) & (values <= band.upper))[0]
    if idx.size == 0:
        raise EmptyFeasibleSetError(
            f"no value inside the band [{band.lower}, {band.upper}]"
        )
    return idx


def _quadratic_parts(surface):
    """Constant c, gradient g, Hessian H with f(x) = c + g.x + x.H.x / 2."""
    dim = surface.dim
    coef = surface.coefficients
    c = coef[0]
    g = coef[1 : 1 + dim].copy()
    hess = np.zeros((dim, dim))
    if surface.degree == 2:
        pos = 1 + dim
        for i in range(dim):
            hess[i, i] = 2.0 * coef[pos + i]
        pos += dim
        for i in range(dim):
            for j in range(i + 1, dim):
                hess[i, j] = hess[j, i] = coef[pos]
                pos += 1
    return c, g, hess


def minimize_surface(surface, region):
    """Minimize a degree-1/2 surface over an axis-aligned box.

    Positive-definite quadratics with the stationary point inside the region
    are solved linearly; otherwise the best of the projected stationary point,
    a dense grid scan, and bounded local descent is returned.
    """
    region = np.asarray(region, dtype=float).reshape(-1, 2)
    if region.shape[0] != surface.dim:
        raise ArgumentError("region dimension must match the surface")
    if not np.all(np.isfinite(region)) or np.any(region[:, 0] > region[:, 1]):
        raise ArgumentError("region must be a bounded nonempty box")
    lo, hi = region[:, 0], region[:, 1]

    candidates = []
    _, g, hess = _quadratic_parts(surface)
    if surface.degree == 2:
        try:
            np.linalg.cholesky(hess)
            stationary = np.linalg.solve(hess, -g)
            if np.all(stationary >= lo) and np.all(stationary <= hi):
                return stationary, evaluate(surface, stationary)
            candidates.append(np.clip(stationary, lo, hi))
        except np.linalg.LinAlgError:
            pass

    # dense scan (deterministic argmin: first flat index wins)
    if surface.dim <= 3:
        axes = [np.linspace(lo[i], hi[i], GRID_POINTS) for i in range(surface.dim)]
        grid = np.stack(
            [a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1
        )
        vals = evaluate(surface, grid)
        candidates.append(grid[int(np.argmin(vals))])
    else:
        rng = np.random.default_rng(0)
        pts = lo + (hi - lo) * rng.random((4096, surface.dim))
        vals = evaluate(surface, pts)
        candidates.append(pts[int(np.argmin(vals))])
    candidates.append((lo + hi) / 2.0)

    best_x, best_v = None, np.inf
    for start in candidates:
        res = _scipy_minimize(
            lambda x: evaluate(surface, x),
            start,
            jac=lambda x: g + hess @ x,
            bounds=list(zip(lo, hi)),
            method="L-BFGS-B",
            options={"ftol": 1e-16, "gtol": 1e-12},
        )
        x = np.clip(res.x, lo, hi)
        v = evaluate(surface, x)
        if best_x is None or v < best_v:
            best_x, best_v = x, v
    return best_x, float(best_v)


def preimage(reduced, basis, box):
    """Minimal-norm full-space vector with basis^T mu = reduced, clipped to
    the box. Returns (mu, residual) where residual = basis^T mu_clipped -
    reduced."""
    basis = np.asarray(basis, dtype=float)
    reduced = np.asarray(reduced, dtype=float).reshape(-1)
    if basis.shape[1] != reduced.size:
        raise ArgumentError("basis column count must match the reduced dimension")
    if np.linalg.matrix_rank(basis) < basis.shape[1]:
        raise ArgumentError("basis is rank deficient")
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    mu = np.linalg.pinv(basis.T) @ reduced
    clipped = np.clip(mu, box[:, 0], box[:, 1])
    residual = basis.T @ clipped - reduced
    return clipped, residual
