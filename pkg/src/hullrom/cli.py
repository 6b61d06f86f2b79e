"""Command-line interface.

Subcommands: ffd apply, dmd fit|forecast|steady, as estimate,
shared compute, rs fit|minimize, campaign run, optimize.

Exit codes: 0 success, 2 argument error, 3 numeric/degeneracy error,
4 I/O or parse error. The campaign seed comes from --seed, then the RH_SEED
environment variable, then the config file.
"""

import argparse
import sys

import numpy as np

from . import dmd, response, subspaces
from .errors import ArgumentError, NumericError, ParseError
from .geometry import deform_mesh, load_mesh, save_mesh
from .pipeline import (
    CampaignConfig,
    load_records,
    optimize_reduced,
    run_campaign,
    save_records,
    save_report,
    save_summary_csv,
)

#: CampaignConfig fields exposed as flags on campaign/optimize commands
_CONFIG_FLAGS = [
    ("n_params", int),
    ("n_samples", int),
    ("seed", int),
    ("mesh", str),
    ("t_start", float),
    ("t_end", float),
    ("dt", float),
    ("dmd_rank", float),
    ("steady_tol", float),
    ("z_cut", float),
    ("froude", float),
    ("as_dim", int),
    ("rs_degree", int),
    ("gradient_method", str),
    ("gradient_neighbors", int),
    ("shared_residual_tol", float),
    ("surrogate", str),
    ("snapshot_template", str),
    ("pressure_template", str),
    ("reynolds", float),
    ("speed", float),
    ("density", float),
    ("wetted_surface", float),
    ("max_failure_fraction", float),
]


def _add_config_flags(parser):
    parser.add_argument("--config", help="campaign config YAML file")
    for name, typ in _CONFIG_FLAGS:
        parser.add_argument(f"--{name.replace('_', '-')}", type=typ, dest=name)
    parser.add_argument(
        "--feasible-band", dest="feasible_band", type=_pair,
        help="lower,upper volume bounds (default: 40th-60th percentile)",
    )
    parser.add_argument(
        "--band-percentiles", dest="band_percentiles", type=_pair
    )
    parser.add_argument(
        "--param-bounds", dest="param_bounds", type=_pair,
        help="lower,upper applied to every parameter slot",
    )


def _pair(text):
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return tuple(parts)


def _vector(text):
    return np.array([float(t) for t in text.split(",")])


def _load_config(args):
    overrides = {name: getattr(args, name, None) for name, _ in _CONFIG_FLAGS}
    for extra in ("feasible_band", "band_percentiles", "param_bounds"):
        overrides[extra] = getattr(args, extra, None)
    if args.config:
        return CampaignConfig.from_file(args.config, overrides)
    return CampaignConfig.from_dict({}, overrides)


def build_parser():
    parser = argparse.ArgumentParser(prog="hullrom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    # ffd apply
    ffd = sub.add_parser("ffd", help="free-form deformation").add_subparsers(
        dest="action", required=True
    )
    p = ffd.add_parser("apply", help="deform a mesh for one parameter vector")
    _add_config_flags(p)
    p.add_argument("--mesh-in", required=True)
    p.add_argument("--mu", required=True, type=_vector, help="comma-separated")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ffd_apply)

    # dmd fit | forecast | steady
    dmd_sub = sub.add_parser("dmd", help="dynamic mode decomposition").add_subparsers(
        dest="action", required=True
    )
    p = dmd_sub.add_parser("fit")
    p.add_argument("--input", required=True, help="snapshot file (text or binary)")
    p.add_argument("--dt", type=float, help="snapshot spacing if not in the file")
    p.add_argument("--t0", type=float)
    p.add_argument("--rank", type=float, default=dmd.DEFAULT_ENERGY,
                   help="integer rank or energy fraction in (0, 1]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dmd_fit)
    p = dmd_sub.add_parser("forecast")
    p.add_argument("--model", required=True)
    p.add_argument("--time", required=True, type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dmd_forecast)
    p = dmd_sub.add_parser("steady")
    p.add_argument("--model", required=True)
    p.add_argument("--tol", type=float, default=dmd.DEFAULT_STEADY_TOL)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dmd_steady)

    # as estimate
    as_sub = sub.add_parser("as", help="active subspaces").add_subparsers(
        dest="action", required=True
    )
    p = as_sub.add_parser("estimate")
    p.add_argument("--samples", required=True, help="gradient-sample CSV")
    p.add_argument("--dim", type=int, help="active dimension (default: gap rule)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_as_estimate)

    # shared compute
    shared = sub.add_parser("shared", help="shared subspaces").add_subparsers(
        dest="action", required=True
    )
    p = shared.add_parser("compute")
    p.add_argument("--sources", required=True, nargs="+",
                   help="active-subspace files")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_shared_compute)

    # rs fit | minimize
    rs = sub.add_parser("rs", help="response surfaces").add_subparsers(
        dest="action", required=True
    )
    p = rs.add_parser("fit")
    p.add_argument("--points", required=True,
                   help="CSV, last column = value, others = reduced coords")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rs_fit)
    p = rs.add_parser("minimize")
    p.add_argument("--surface", required=True)
    p.add_argument("--region", required=True,
                   help="per-axis 'lo:hi' joined by commas, e.g. -1:1,-2:2")
    p.set_defaults(func=cmd_rs_minimize)

    # campaign run
    camp = sub.add_parser("campaign", help="sampling campaigns").add_subparsers(
        dest="action", required=True
    )
    p = camp.add_parser("run")
    _add_config_flags(p)
    p.add_argument("--records-out", required=True)
    p.set_defaults(func=cmd_campaign_run)

    # optimize
    p = sub.add_parser("optimize", help="full reduction + constrained minimum")
    _add_config_flags(p)
    p.add_argument("--records", help="existing records CSV (else run the campaign)")
    p.add_argument("--report-out", required=True)
    p.add_argument("--summary-out", help="sufficient-summary CSV")
    p.set_defaults(func=cmd_optimize)

    return parser


# ---------------------------------------------------------------------------
# command bodies


def cmd_ffd_apply(args):
    config = _load_config(args)
    lattice = config.build_lattice()
    mesh = load_mesh(args.mesh_in)
    save_mesh(deform_mesh(lattice, args.mu, mesh), args.out)
    print(f"deformed mesh written to {args.out}")


def cmd_dmd_fit(args):
    snapshots = dmd.load_snapshots(args.input, dt=args.dt, t0=args.t0)
    rank = int(args.rank) if args.rank >= 1 else args.rank
    model = dmd.fit(snapshots, rank=rank)
    dmd.save_model(model, args.out)
    print(f"rank {model.rank} model written to {args.out}; "
          f"spectral radius {model.spectral_radius:.6g}")


def cmd_dmd_forecast(args):
    model = dmd.load_model(args.model)
    state = dmd.forecast(model, args.time)
    np.savetxt(args.out, state, fmt="%.17g")
    print(f"forecast at t = {args.time} written to {args.out}")


def cmd_dmd_steady(args):
    model = dmd.load_model(args.model)
    state, diag = dmd.steady_state(model, tol=args.tol)
    np.savetxt(args.out, state, fmt="%.17g")
    print(f"steady state written to {args.out}; "
          f"{diag['steady_mode_count']} steady mode(s), "
          f"spectral radius {diag['spectral_radius']:.6g}")


def cmd_as_estimate(args):
    samples = subspaces.GradientSampleSet.load_csv(args.samples)
    subspace = subspaces.estimate_active_subspace(samples, M=args.dim)
    subspaces.save_subspace(subspace, args.out)
    lam = ", ".join(f"{v:.6g}" for v in subspace.lambdas)
    print(f"active dimension {subspace.M}; eigenvalues [{lam}]")


def cmd_shared_compute(args):
    sources = [subspaces.load_subspace(p) for p in args.sources]
    shared = subspaces.compute_shared_subspace(sources)
    np.savetxt(args.out, shared.Q, fmt="%.17g", header="shared subspace Q")
    print(f"shared {shared.Q.shape[0]} x {shared.M} matrix written to {args.out}")


def cmd_rs_fit(args):
    data = np.loadtxt(args.points, delimiter=",", skiprows=1, ndmin=2)
    surface = response.fit_polynomial(data[:, :-1], data[:, -1], args.degree)
    _save_surface(surface, args.out)
    print(f"degree-{surface.degree} surface written to {args.out}; "
          f"rmse {surface.rmse:.6g}")


def cmd_rs_minimize(args):
    surface = _load_surface(args.surface)
    region = np.array(
        [[float(v) for v in axis.split(":")] for axis in args.region.split(",")]
    )
    point, value = response.minimize_surface(surface, region)
    coords = ", ".join(f"{v:.12g}" for v in point)
    print(f"minimum {value:.12g} at ({coords})")


def cmd_campaign_run(args):
    config = _load_config(args)
    records, failures = run_campaign(config)
    save_records(records, args.records_out)
    print(f"{len(records)} records written to {args.records_out} "
          f"({len(failures)} failures)")


def cmd_optimize(args):
    config = _load_config(args)
    if args.records:
        records = load_records(args.records)
    else:
        records, _ = run_campaign(config)
    report = optimize_reduced(records, config)
    save_report(report, args.report_out)
    if args.summary_out:
        save_summary_csv(report, args.summary_out)
    mu = ", ".join(f"{v:.6g}" for v in report.minimizer_raw)
    print(f"constrained minimum {report.predicted_resistance:.6g} "
          f"(volume {report.predicted_volume:.6g} in "
          f"[{report.band.lower:.6g}, {report.band.upper:.6g}])")
    print(f"minimizer mu = [{mu}]")
    print(f"report written to {args.report_out}")


def _save_surface(surface, path):
    out = [
        "hullrom-response-surface",
        f"dim {surface.dim}",
        f"degree {surface.degree}",
        f"rmse {surface.rmse:.17g}",
        "coefficients",
    ]
    out.extend(f"{c:.17g}" for c in surface.coefficients)
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _load_surface(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "hullrom-response-surface":
        raise ParseError(f"{path}:1: not a hullrom surface file")
    try:
        dim = int(lines[1].split()[1])
        degree = int(lines[2].split()[1])
        rmse = float(lines[3].split()[1])
        idx = lines.index("coefficients") + 1
        coef = np.array([float(v) for v in lines[idx:]])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed surface file ({exc})") from exc
    return response.PolynomialSurface(dim=dim, degree=degree,
                                      coefficients=coef, rmse=rmse)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
