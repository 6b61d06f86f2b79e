"""Active-subspace estimation from gradient samples, and the shared subspace
linking several quantities of interest.

The uncentered gradient covariance C = E[grad f grad f^T] is estimated by the
Monte Carlo average over the sample set (uniform density on the scaled box);
its descending eigendecomposition C = W Lambda W^T is split at the active
dimension M into W1 (active) and W2 (inactive).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    ArgumentError,
    DegenerateFunctionError,
    NoSharedSubspaceError,
    ParseError,
)

SHARED_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class InputScaler:
    """Affine map sending the parameter box [lower, upper] to [-1, 1]^m."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape or np.any(lower >= upper):
            raise ArgumentError("scaler needs lower < upper componentwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_box(cls, box):
        box = np.asarray(box, dtype=float).reshape(-1, 2)
        return cls(box[:, 0], box[:, 1])

    def scale(self, mu):
        mu = np.asarray(mu, dtype=float)
        out = 2.0 * (mu - self.lower) / (self.upper - self.lower) - 1.0
        if np.any(out < -1.0 - 1e-9) or np.any(out > 1.0 + 1e-9):
            warnings.warn("input outside the parameter box; clipping", stacklevel=2)
        return np.clip(out, -1.0, 1.0)

    def unscale(self, scaled):
        scaled = np.asarray(scaled, dtype=float)
        return self.lower + (scaled + 1.0) * (self.upper - self.lower) / 2.0


@dataclass
class GradientSampleSet:
    inputs: np.ndarray  # (N, m) scaled parameters in [-1, 1]^m
    gradients: np.ndarray  # (N, m) gradients in scaled coordinates
    values: np.ndarray  # (N,) function values

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        self.gradients = np.atleast_2d(np.asarray(self.gradients, dtype=float))
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.gradients.shape != self.inputs.shape:
            raise ArgumentError("inputs and gradients must have equal shapes")
        if self.values.size != self.inputs.shape[0]:
            raise ArgumentError("values length must match the sample count")
        for name, arr in (("inputs", self.inputs), ("gradients", self.gradients),
                          ("values", self.values)):
            if not np.all(np.isfinite(arr)):
                raise ArgumentError(f"non-finite entries in {name}")

    def save_csv(self, path):
        m = self.inputs.shape[1]
        header = ",".join(
            [f"mu_{j}" for j in range(m)] + [f"grad_{j}" for j in range(m)] + ["value"]
        )
        table = np.hstack([self.inputs, self.gradients, self.values[:, None]])
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row in table:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def load_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            m = sum(1 for h in header if h.startswith("mu_"))
            if m == 0 or len(header) != 2 * m + 1:
                raise ParseError(f"{path}:1: bad gradient-sample header {header}")
            rows = []
            for ln, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                parts = line.strip().split(",")
                if len(parts) != 2 * m + 1:
                    raise ParseError(f"{path}:{ln}: expected {2 * m + 1} columns")
                try:
                    rows.append([float(p) for p in parts])
                except ValueError:
                    raise ParseError(f"{path}:{ln}: non-numeric entry")
        data = np.array(rows)
        return cls(data[:, :m], data[:, m : 2 * m], data[:, 2 * m])


@dataclass
class ActiveSubspace:
    W: np.ndarray  # (m, m) orthogonal, eigenvalue-descending columns
    lambdas: np.ndarray  # (m,) non-negative, descending
    M: int

    def __post_init__(self):
        m = self.W.shape[0]
        if self.W.shape != (m, m):
            raise ArgumentError("W must be square")
        if not 1 <= self.M <= m:
            raise ArgumentError(f"active dimension {self.M} outside 1..{m}")
        if np.linalg.norm(self.W.T @ self.W - np.eye(m)) > 1e-10:
            raise ArgumentError("W is not orthogonal")

    @property
    def m(self):
        return self.W.shape[0]

    @property
    def W1(self):
        return self.W[:, : self.M]

    @property
    def W2(self):
        return self.W[:, self.M :]


@dataclass
class SharedSubspace:
    Q: np.ndarray  # (m, M)
    sources: list = field(default_factory=list)

    @property
    def M(self):
        return self.Q.shape[1]


# ---------------------------------------------------------------------------
# Gradient estimation


def estimate_gradients(inputs, values, method="local-linear", k=None, grad_fn=None):
    """(N, m) gradient estimates at the sample inputs.

    method 'exact-callback' evaluates grad_fn row by row; 'global-linear'
    fits one affine model to all samples; 'local-linear' fits an affine model
    to the k nearest samples of each point (default k = 2m + 1).
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    values = np.asarray(values, dtype=float).reshape(-1)
    n, m = inputs.shape

    if method == "exact-callback":
        if grad_fn is None:
            raise ArgumentError("exact-callback needs a gradient function")
        return np.array([np.asarray(grad_fn(x), dtype=float) for x in inputs])

    if method == "global-linear":
        slope = _affine_slope(inputs, values)
        return np.tile(slope, (n, 1))

    if method == "local-linear":
        k = int(k) if k is not None else 2 * m + 1
        if k < m + 1:
            raise ArgumentError(f"local-linear needs k >= m + 1 = {m + 1}, got {k}")
        k = min(k, n)
        tree = cKDTree(inputs)
        _, neighbors = tree.query(inputs, k=k)
        neighbors = np.atleast_2d(neighbors)
        grads = np.empty_like(inputs)
        for i in range(n):
            idx = neighbors[i]
            grads[i] = _affine_slope(inputs[idx], values[idx])
        return grads

    raise ArgumentError(f"unknown gradient method {method!r}")


def _affine_slope(x, y):
    design = np.hstack([x, np.ones((len(x), 1))])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        warnings.warn(
            "rank-deficient local design matrix; minimal-norm slope used",
            stacklevel=3,
        )
    return coef[:-1]


# ---------------------------------------------------------------------------
# Active subspace


def estimate_active_subspace(samples, M=None):
    """Eigendecomposition of the Monte Carlo gradient covariance.

    M is the explicit active dimension; None picks the largest eigenvalue
    gap lambda_j / lambda_{j+1}.
    """
    grads = samples.gradients
    n, m = grads.shape
    cov = grads.T @ grads / n

    if np.max(np.abs(cov)) == 0.0:
        raise DegenerateFunctionError("all gradients vanish; C = 0")

    lambdas, vecs = np.linalg.eigh(cov)
    order = np.argsort(lambdas)[::-1]
    lambdas = lambdas[order]
    vecs = vecs[:, order]

    if lambdas[0] > 0 and lambdas[-1] < -1e-12 * lambdas[0]:
        raise ArgumentError("covariance is not positive semidefinite")
    lambdas = np.clip(lambdas, 0.0, None)
    vecs = _fix_signs(vecs)

    if M is None:
        M = _gap_dimension(lambdas)
    else:
        M = int(M)
        if M > m:
            raise ArgumentError(f"active dimension {M} exceeds m = {m}")
    return ActiveSubspace(W=vecs, lambdas=lambdas, M=M)


def _fix_signs(vecs):
    """First component above 1e-12 in magnitude made positive, per column."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def _gap_dimension(lambdas):
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = lambdas[:-1] / lambdas[1:]
    ratios = np.where(np.isfinite(ratios), ratios, np.inf)
    positive = lambdas[:-1] > 0
    if not np.any(positive):
        raise ArgumentError("no strictly positive eigenvalue gap")
    ratios[~positive] = -np.inf
    return int(np.argmax(ratios)) + 1


def project_active(subspace, mu_scaled):
    return subspace.W1.T @ np.asarray(mu_scaled, dtype=float)


def project_inactive(subspace, mu_scaled):
    return subspace.W2.T @ np.asarray(mu_scaled, dtype=float)


def lift_to_full(subspace, mu_active, eta=None):
    mu_active = np.asarray(mu_active, dtype=float)
    full = subspace.W1 @ mu_active
    if eta is not None:
        full = full + subspace.W2 @ np.asarray(eta, dtype=float)
    return full


# ---------------------------------------------------------------------------
# Shared subspace


def compute_shared_subspace(sources, residual_tol=SHARED_RESIDUAL_TOL):
    """Solve for Q with W1_i^T Q = Id_M for every source, Q restricted to the
    span of the stacked active bases.

    residual_tol bounds the acceptable least-squares residual of the stacked
    system. The strict default suits exactly-known subspaces; Monte Carlo
    estimated bases carry O(1/sqrt(N)) rotation noise inside each span, so
    pipeline callers pass a looser bound.
    """
    if not sources:
        raise ArgumentError("at least one source subspace is required")
    m = sources[0].m
    M = sources[0].M
    for s in sources:
        if s.m != m or s.M != M:
            raise ArgumentError("sources must share m and M")

    stacked = np.hstack([s.W1 for s in sources])  # (m, kM)
    rows = np.vstack([s.W1.T @ stacked for s in sources])  # (kM, kM)
    rhs = np.vstack([np.eye(M) for _ in sources])  # (kM, M)

    coeffs, _, rank, svals = np.linalg.lstsq(rows, rhs, rcond=None)
    residual = float(np.linalg.norm(rows @ coeffs - rhs))
    condition = float(svals[0] / svals[-1]) if svals[-1] > 0 else np.inf
    if residual > residual_tol:
        raise NoSharedSubspaceError(
            f"stacked shared-subspace system unsolvable: residual {residual:.3e}, "
            f"condition {condition:.3e}",
            residual=residual,
            condition=condition,
        )

    q = stacked @ coeffs
    check_tol = max(residual_tol, 1e-8)
    for i, s in enumerate(sources):
        err = np.linalg.norm(s.W1.T @ q - np.eye(M))
        if err > check_tol:
            raise NoSharedSubspaceError(
                f"shared subspace violates W1_{i}^T Q = Id (error {err:.3e})",
                residual=err,
                condition=condition,
            )
    return SharedSubspace(Q=q, sources=list(sources))


# ---------------------------------------------------------------------------
# Serialization


def save_subspace(subspace, path):
    """Structured text: m, M, lambdas, then W column-major."""
    m = subspace.m
    out = ["hullrom-active-subspace", f"m {m}", f"M {subspace.M}", "lambdas"]
    out.extend(f"{v:.17g}" for v in subspace.lambdas)
    out.append("W")
    for col in subspace.W.T:
        out.extend(f"{v:.17g}" for v in col)
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def load_subspace(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "hullrom-active-subspace":
        raise ParseError(f"{path}:1: not a hullrom subspace file")
    try:
        m = int(lines[1].split()[1])
        big_m = int(lines[2].split()[1])
        i = lines.index("lambdas") + 1
        lambdas = np.array([float(v) for v in lines[i : i + m]])
        i = lines.index("W", i) + 1
        flat = np.array([float(v) for v in lines[i : i + m * m]])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed subspace file ({exc})") from exc
    return ActiveSubspace(W=flat.reshape((m, m)).T, lambdas=lambdas, M=big_m)
