"""Campaign orchestration: seeded sampling, per-sample evaluation through
FFD + DMD, the reduction chain (active subspaces -> shared subspace ->
response surface -> constrained minimum), and persistence.

All outputs are written with repr-exact float formatting in sample-index
order, so identical (config, seed) pairs produce byte-identical files.
Per-sample wall-clock timings stay on the RunRecord objects and out of the
records CSV for the same reason.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import dmd, response, subspaces
from ..errors import ArgumentError, CampaignError, HullromError, ParseError
from ..geometry import deform_mesh, load_mesh
from ..response import FeasibleBand, PolynomialSurface
from ..subspaces import GradientSampleSet, InputScaler
from .surrogate import default_hull_mesh, make_surrogate


def sample_parameters(n, box, seed):
    """n i.i.d. uniform samples in the (m, 2) box; deterministic per seed."""
    if n < 1:
        raise ArgumentError(f"sample count must be >= 1, got {n}")
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    rng = np.random.default_rng(seed)
    return rng.uniform(box[:, 0], box[:, 1], size=(n, box.shape[0]))


def ittc57_cf(reynolds):
    """ITTC-57 friction line: 0.075 / (log10(Re) - 2)^2, defined for Re > 100."""
    if reynolds <= 100.0:
        raise ArgumentError(
            f"ITTC-57 undefined for Re <= 100 (got {reynolds}): log10(Re) - 2 <= 0"
        )
    return 0.075 / (math.log10(reynolds) - 2.0) ** 2


@dataclass
class RunRecord:
    index: int
    mu_raw: np.ndarray
    mu_scaled: np.ndarray
    resistance: float
    volume: float
    dmd_rank: int
    spectral_radius: float
    elapsed: float = 0.0  # seconds; not persisted (determinism)

    def __post_init__(self):
        if not (np.isfinite(self.resistance) and np.isfinite(self.volume)):
            raise ArgumentError("non-finite quantity of interest")
        if self.volume < 0:
            raise ArgumentError(f"negative volume {self.volume}")


def run_campaign(config, seed=None):
    """Evaluate all samples; returns (records, failures).

    failures is a list of (index, reason); the campaign raises CampaignError
    when more than config.max_failure_fraction of the samples fail.
    """
    seed = config.resolved_seed(seed)
    lattice = config.build_lattice()
    scaler = InputScaler.from_box(config.param_box)
    surrogate = make_surrogate(config)

    mesh = None
    if surrogate.needs_mesh:
        mesh = load_mesh(config.mesh) if config.mesh else default_hull_mesh()

    mu_all = sample_parameters(config.n_samples, config.param_box, seed)
    records, failures = [], []
    for i, mu in enumerate(mu_all):
        t_begin = time.perf_counter()
        try:
            mu_scaled = scaler.scale(mu)
            deformed = deform_mesh(lattice, mu, mesh) if mesh is not None else None
            snapshots = surrogate.snapshots(i, mu_scaled, config)
            model = dmd.fit(snapshots, rank=config.dmd_rank)
            steady, _ = dmd.steady_state(model, tol=config.steady_tol)
            records.append(
                RunRecord(
                    index=i,
                    mu_raw=mu,
                    mu_scaled=mu_scaled,
                    resistance=surrogate.resistance(steady, deformed, config),
                    volume=surrogate.volume(mu_scaled, deformed, config),
                    dmd_rank=model.rank,
                    spectral_radius=model.spectral_radius,
                    elapsed=time.perf_counter() - t_begin,
                )
            )
        except (HullromError, OSError, np.linalg.LinAlgError) as exc:
            failures.append((i, str(exc)))

    if len(failures) > config.max_failure_fraction * config.n_samples:
        raise CampaignError(
            f"{len(failures)}/{config.n_samples} samples failed; first: "
            f"{failures[0][1]}"
        )
    return records, failures


# ---------------------------------------------------------------------------
# Records CSV


def save_records(records, path):
    if not records:
        raise ArgumentError("no records to save")
    m = records[0].mu_raw.size
    header = (
        ["index"]
        + [f"mu_{j}" for j in range(m)]
        + [f"scaled_{j}" for j in range(m)]
        + ["resistance", "volume", "dmd_rank", "spectral_radius"]
    )
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in records:
            row = (
                [str(r.index)]
                + [f"{v:.17g}" for v in r.mu_raw]
                + [f"{v:.17g}" for v in r.mu_scaled]
                + [
                    f"{r.resistance:.17g}",
                    f"{r.volume:.17g}",
                    str(r.dmd_rank),
                    f"{r.spectral_radius:.17g}",
                ]
            )
            fh.write(",".join(row) + "\n")


def load_records(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        m = sum(1 for h in header if h.startswith("mu_"))
        expected = 2 * m + 5
        if m == 0 or len(header) != expected:
            raise ParseError(f"{path}:1: bad records header {header}")
        records = []
        for ln, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != expected:
                raise ParseError(
                    f"{path}:{ln}: expected {expected} columns, got {len(parts)}"
                )
            try:
                records.append(
                    RunRecord(
                        index=int(parts[0]),
                        mu_raw=np.array([float(v) for v in parts[1 : 1 + m]]),
                        mu_scaled=np.array(
                            [float(v) for v in parts[1 + m : 1 + 2 * m]]
                        ),
                        resistance=float(parts[1 + 2 * m]),
                        volume=float(parts[2 + 2 * m]),
                        dmd_rank=int(parts[3 + 2 * m]),
                        spectral_radius=float(parts[4 + 2 * m]),
                    )
                )
            except ValueError as exc:
                raise ParseError(f"{path}:{ln}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Reduction chain


@dataclass
class OptimizationReport:
    minimizer_reduced: np.ndarray
    minimizer_scaled: np.ndarray
    minimizer_raw: np.ndarray
    predicted_resistance: float
    predicted_volume: float
    preimage_residual: np.ndarray
    resistance_surface: PolynomialSurface
    volume_surface: PolynomialSurface
    band: FeasibleBand
    feasible_indices: np.ndarray
    resistance_lambdas: np.ndarray
    volume_lambdas: np.ndarray
    shared_q: np.ndarray
    reduced_samples: np.ndarray  # (N, M) shared-variable coordinates
    resistance_values: np.ndarray
    volume_values: np.ndarray
    region: np.ndarray = field(default=None)


def optimize_reduced(records, config, surrogate=None):
    """AS -> shared subspace -> feasibility filter -> degree-2 surface ->
    constrained minimum -> full-space preimage."""
    if surrogate is None:
        surrogate = make_surrogate(config)

    inputs = np.array([r.mu_scaled for r in records])
    res_values = np.array([r.resistance for r in records])
    vol_values = np.array([r.volume for r in records])
    m = inputs.shape[1]

    res_grads = _gradients(inputs, res_values, config,
                           getattr(surrogate, "resistance_gradient", None))
    vol_grads = _gradients(inputs, vol_values, config,
                           getattr(surrogate, "volume_gradient", None))

    as_res = subspaces.estimate_active_subspace(
        GradientSampleSet(inputs, res_grads, res_values), M=config.as_dim
    )
    as_vol = subspaces.estimate_active_subspace(
        GradientSampleSet(inputs, vol_grads, vol_values), M=config.as_dim
    )
    shared = subspaces.compute_shared_subspace(
        [as_res, as_vol], residual_tol=config.shared_residual_tol
    )

    reduced = inputs @ shared.Q  # (N, M)

    if config.feasible_band is not None:
        band = FeasibleBand(*config.feasible_band)
    else:
        lo, hi = np.percentile(vol_values, config.band_percentiles)
        band = FeasibleBand(float(lo), float(hi))
    feasible = response.filter_feasible(vol_values, band)

    n_coeff = math.comb(config.as_dim + config.rs_degree, config.rs_degree)
    if feasible.size < max(n_coeff, 10):
        raise ArgumentError(
            f"only {feasible.size} feasible records; need at least "
            f"{max(n_coeff, 10)}"
        )

    res_surface = response.fit_polynomial(
        reduced[feasible], res_values[feasible], config.rs_degree
    )
    vol_surface = response.fit_polynomial(
        reduced[feasible], vol_values[feasible], config.rs_degree
    )

    region = np.column_stack(
        [reduced[feasible].min(axis=0), reduced[feasible].max(axis=0)]
    )
    minimizer, predicted = response.minimize_surface(res_surface, region)

    scaled_box = np.tile((-1.0, 1.0), (m, 1))
    full_scaled, residual = response.preimage(minimizer, shared.Q, scaled_box)
    scaler = InputScaler.from_box(config.param_box)

    return OptimizationReport(
        minimizer_reduced=minimizer,
        minimizer_scaled=full_scaled,
        minimizer_raw=scaler.unscale(full_scaled),
        predicted_resistance=float(predicted),
        predicted_volume=float(response.evaluate(vol_surface, minimizer)),
        preimage_residual=residual,
        resistance_surface=res_surface,
        volume_surface=vol_surface,
        band=band,
        feasible_indices=feasible,
        resistance_lambdas=as_res.lambdas,
        volume_lambdas=as_vol.lambdas,
        shared_q=shared.Q,
        reduced_samples=reduced,
        resistance_values=res_values,
        volume_values=vol_values,
        region=region,
    )


def _gradients(inputs, values, config, exact_fn):
    if config.gradient_method == "exact":
        if exact_fn is None:
            raise ArgumentError(
                "gradient_method 'exact' needs a surrogate with analytic "
                "gradients"
            )
        return subspaces.estimate_gradients(
            inputs, values, method="exact-callback", grad_fn=exact_fn
        )
    return subspaces.estimate_gradients(
        inputs, values, method=config.gradient_method, k=config.gradient_neighbors
    )


# ---------------------------------------------------------------------------
# Report persistence


def save_report(report, path):
    """Deterministic structured-text report."""

    def vec(v):
        return " ".join(f"{x:.17g}" for x in np.asarray(v).ravel())

    out = [
        "hullrom-optimization-report",
        f"reduced_dim {report.minimizer_reduced.size}",
        f"full_dim {report.minimizer_scaled.size}",
        f"minimizer_reduced {vec(report.minimizer_reduced)}",
        f"minimizer_scaled {vec(report.minimizer_scaled)}",
        f"minimizer_raw {vec(report.minimizer_raw)}",
        f"predicted_resistance {report.predicted_resistance:.17g}",
        f"predicted_volume {report.predicted_volume:.17g}",
        f"preimage_residual {vec(report.preimage_residual)}",
        f"band {report.band.lower:.17g} {report.band.upper:.17g}",
        f"feasible_count {report.feasible_indices.size}",
        f"feasible_indices {' '.join(str(i) for i in report.feasible_indices)}",
        f"resistance_rmse {report.resistance_surface.rmse:.17g}",
        f"volume_rmse {report.volume_surface.rmse:.17g}",
        f"resistance_coefficients {vec(report.resistance_surface.coefficients)}",
        f"volume_coefficients {vec(report.volume_surface.coefficients)}",
        f"resistance_lambdas {vec(report.resistance_lambdas)}",
        f"volume_lambdas {vec(report.volume_lambdas)}",
        f"shared_q {vec(report.shared_q)}",
        f"region {vec(report.region)}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def save_summary_csv(report, path):
    """The data behind sufficient summary plots: shared coordinates, both
    QoI values, and the feasibility flag, one row per record."""
    n, big_m = report.reduced_samples.shape
    feasible = np.zeros(n, dtype=int)
    feasible[report.feasible_indices] = 1
    header = [f"shared_{j}" for j in range(big_m)] + [
        "resistance",
        "volume",
        "feasible",
    ]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            row = [f"{v:.17g}" for v in report.reduced_samples[i]] + [
                f"{report.resistance_values[i]:.17g}",
                f"{report.volume_values[i]:.17g}",
                str(feasible[i]),
            ]
            fh.write(",".join(row) + "\n")
