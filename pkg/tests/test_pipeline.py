import numpy as np
import pytest

from hullrom import cli, dmd
from hullrom.errors import ArgumentError, CampaignError, ParseError
from hullrom.geometry import save_mesh
from hullrom.geometry.primitives import box_mesh
from hullrom.pipeline import (
    CampaignConfig,
    load_records,
    optimize_reduced,
    run_campaign,
    save_records,
    save_report,
    save_summary_csv,
)
from hullrom.pipeline.campaign import ittc57_cf, sample_parameters
from hullrom.pipeline.surrogate import make_surrogate


def small_config(**overrides):
    base = dict(
        n_samples=60,
        surrogate="analytic-ridge-2qoi",
        gradient_method="exact",
        feasible_band=(0.9, 1.2),
        seed=0,
    )
    base.update(overrides)
    return CampaignConfig(**base)


class TestConfig:
    def test_defaults_valid(self):
        config = CampaignConfig()
        assert config.n_params == 10
        assert config.snapshot_count == 81
        assert config.times[0] == 7.0 and config.times[-1] == 15.0

    def test_yaml_round_trip(self, tmp_path):
        config = small_config(n_samples=33, dt=0.2)
        path = tmp_path / "config.yaml"
        config.save(path)
        back = CampaignConfig.from_file(path)
        assert back.to_dict() == config.to_dict()

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("n_samples: 5\nwarp_factor: 9\n")
        with pytest.raises(ParseError, match="warp_factor"):
            CampaignConfig.from_file(path)

    def test_override_beats_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("n_samples: 5\nseed: 3\n")
        config = CampaignConfig.from_file(path, {"n_samples": 9})
        assert config.n_samples == 9 and config.seed == 3

    def test_window_must_divide(self):
        with pytest.raises(ArgumentError):
            CampaignConfig(t_start=0.0, t_end=1.0, dt=0.3)

    def test_bad_surrogate_name(self):
        with pytest.raises(ArgumentError):
            CampaignConfig(surrogate="oracle")

    def test_seed_precedence(self, monkeypatch):
        config = CampaignConfig(seed=1)
        monkeypatch.delenv("RH_SEED", raising=False)
        assert config.resolved_seed() == 1
        monkeypatch.setenv("RH_SEED", "7")
        assert config.resolved_seed() == 7
        assert config.resolved_seed(11) == 11

    def test_default_lattice_builds(self):
        lattice = CampaignConfig().build_lattice()
        assert lattice.param_box.shape == (10, 2)


class TestSampling:
    def test_deterministic_per_seed(self):
        box = [[-0.6, 0.5]] * 4
        a = sample_parameters(50, box, seed=3)
        b = sample_parameters(50, box, seed=3)
        c = sample_parameters(50, box, seed=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_inside_box(self):
        box = [[-0.6, 0.5], [1.0, 2.0]]
        samples = sample_parameters(200, box, seed=0)
        assert samples.shape == (200, 2)
        assert np.all(samples >= [-0.6, 1.0]) and np.all(samples <= [0.5, 2.0])

    def test_bad_count(self):
        with pytest.raises(ArgumentError):
            sample_parameters(0, [[-1, 1]], seed=0)


class TestFriction:
    def test_reference_value(self):
        assert ittc57_cf(1e7) == 0.003

    def test_decreasing_in_reynolds(self):
        assert ittc57_cf(1e9) < ittc57_cf(1e7) < ittc57_cf(1e5)

    def test_low_reynolds_rejected(self):
        with pytest.raises(ArgumentError):
            ittc57_cf(100.0)
        with pytest.raises(ArgumentError):
            ittc57_cf(-1.0)


class TestCampaign:
    def test_record_fields(self):
        config = small_config(n_samples=5)
        records, failures = run_campaign(config)
        assert len(records) == 5 and not failures
        for i, r in enumerate(records):
            assert r.index == i
            assert r.dmd_rank == 2
            assert r.spectral_radius <= 1.0 + 1e-9
            assert r.resistance >= 40.0  # ridge minimum value

    def test_resistance_matches_analytic_ridge(self):
        config = small_config(n_samples=8)
        records, _ = run_campaign(config)
        surrogate = make_surrogate(config)
        for r in records:
            want = surrogate.resistance_value(r.mu_scaled)
            assert r.resistance == pytest.approx(want, abs=1e-6)
            assert r.volume == pytest.approx(
                surrogate.volume_value(r.mu_scaled), abs=1e-12
            )

    def test_mesh_volume_variant(self):
        config = CampaignConfig(n_samples=3, surrogate="analytic-ridge")
        records, _ = run_campaign(config)
        assert all(r.volume > 0 for r in records)

    def test_records_round_trip(self, tmp_path):
        records, _ = run_campaign(small_config(n_samples=6))
        path = tmp_path / "records.csv"
        save_records(records, path)
        back = load_records(path)
        assert len(back) == len(records)
        for a, b in zip(records, back):
            assert np.array_equal(a.mu_raw, b.mu_raw)
            assert np.array_equal(a.mu_scaled, b.mu_scaled)
            assert a.resistance == b.resistance and a.volume == b.volume

    def test_records_byte_determinism(self, tmp_path):
        config = small_config(n_samples=10)
        for name in ("a.csv", "b.csv"):
            records, _ = run_campaign(config)
            save_records(records, tmp_path / name)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_malformed_records_file(self, tmp_path):
        path = tmp_path / "records.csv"
        path.write_text("index,mu_0,scaled_0,resistance,volume,dmd_rank,"
                        "spectral_radius\n0,1,1,2\n")
        with pytest.raises(ParseError, match=":2"):
            load_records(path)

    def test_file_surrogate(self, tmp_path):
        mesh = box_mesh((0, -0.5, -0.5), (1, 0.5, 0.5), (1, 1, 1))
        mesh_path = tmp_path / "hull.txt"
        save_mesh(mesh, mesh_path)
        config = CampaignConfig(
            n_samples=2,
            surrogate="file",
            mesh=str(mesh_path),
            snapshot_template=str(tmp_path / "run_{index}.txt"),
        )
        # constant steady pressure + decaying transient, one row per face
        n_faces = len(mesh.faces)
        steady = np.full(n_faces, 3.0)
        transient = np.linspace(-1, 1, n_faces)
        for i in range(config.n_samples):
            data = steady[:, None] + np.outer(
                transient, 0.5 ** np.arange(config.snapshot_count)
            )
            dmd.save_snapshots(
                dmd.SnapshotSet(data, dt=config.dt, t0=config.t_start),
                tmp_path / f"run_{i}.txt",
            )
        records, failures = run_campaign(config)
        assert not failures
        # uniform pressure on a closed mesh has zero drag: only the
        # ITTC-57 viscous term remains
        viscous = 0.5 * config.density * config.speed**2 * ittc57_cf(config.reynolds)
        for r in records:
            assert r.resistance == pytest.approx(viscous, abs=1e-9)

    def test_failure_fraction_enforced(self, tmp_path):
        config = CampaignConfig(
            n_samples=4,
            surrogate="file",
            snapshot_template=str(tmp_path / "missing_{index}.txt"),
            max_failure_fraction=0.2,
        )
        with pytest.raises(CampaignError):
            run_campaign(config)


class TestOptimize:
    def test_exact_gradient_reduction(self, tmp_path):
        config = small_config(n_samples=150)
        records, _ = run_campaign(config)
        report = optimize_reduced(records, config)

        # lossless 2-D ridge structure: surfaces interpolate to round-off
        assert report.resistance_surface.rmse < 1e-8
        assert report.volume_surface.rmse < 1e-8
        # ridge minimum sits at the origin of the shared coordinates
        assert report.predicted_resistance == pytest.approx(40.0, abs=0.01)
        # feasibility of the reported minimizer
        rmse = report.volume_surface.rmse
        assert report.band.lower - rmse <= report.predicted_volume
        assert report.predicted_volume <= report.band.upper + rmse
        # raw minimizer stays inside the parameter box
        assert np.all(report.minimizer_raw >= -0.6 - 1e-12)
        assert np.all(report.minimizer_raw <= 0.5 + 1e-12)

    def test_report_byte_determinism(self, tmp_path):
        config = small_config(n_samples=80)
        for name in ("a.txt", "b.txt"):
            records, _ = run_campaign(config)
            report = optimize_reduced(records, config)
            save_report(report, tmp_path / name)
            save_summary_csv(report, tmp_path / name.replace(".txt", ".csv"))
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_estimated_gradient_path_runs(self):
        config = CampaignConfig(
            n_samples=120,
            surrogate="analytic-ridge-2qoi",
            gradient_method="local-linear",
            feasible_band=(0.85, 1.25),
        )
        records, _ = run_campaign(config)
        report = optimize_reduced(records, config)
        assert report.minimizer_reduced.size == 2
        assert np.all(report.minimizer_reduced >= report.region[:, 0] - 1e-9)
        assert np.all(report.minimizer_reduced <= report.region[:, 1] + 1e-9)

    def test_summary_marks_feasible_rows(self, tmp_path):
        config = small_config(n_samples=60)
        records, _ = run_campaign(config)
        report = optimize_reduced(records, config)
        path = tmp_path / "summary.csv"
        save_summary_csv(report, path)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "shared_0,shared_1,resistance,volume,feasible"
        flags = [int(r.rsplit(",", 1)[1]) for r in rows[1:]]
        assert sum(flags) == report.feasible_indices.size

    def test_exact_needs_analytic_gradients(self, tmp_path):
        config = small_config(n_samples=20)
        records, _ = run_campaign(config)
        file_config = small_config(
            n_samples=20,
            surrogate="file",
            snapshot_template=str(tmp_path / "x_{index}.txt"),
        )
        with pytest.raises(ArgumentError, match="exact"):
            optimize_reduced(records, file_config)


class TestCLI:
    def test_rs_fit_minimize_round_trip(self, tmp_path):
        pts = tmp_path / "points.csv"
        rng = np.random.default_rng(0)
        xy = rng.uniform(-1, 1, (30, 2))
        vals = 2.0 + (xy[:, 0] - 0.25) ** 2 + (xy[:, 1] + 0.5) ** 2
        with open(pts, "w") as fh:
            fh.write("x,y,value\n")
            for (x, y), v in zip(xy, vals):
                fh.write(f"{x},{y},{v}\n")
        surf = tmp_path / "surface.txt"
        assert cli.main(["rs", "fit", "--points", str(pts), "--out", str(surf)]) == 0
        code = cli.main(["rs", "minimize", "--surface", str(surf),
                         "--region=-1:1,-1:1"])
        assert code == 0

    def test_campaign_and_optimize(self, tmp_path, capsys):
        records = tmp_path / "records.csv"
        args = [
            "--surrogate", "analytic-ridge-2qoi",
            "--gradient-method", "exact",
            "--feasible-band", "0.9,1.2",
            "--n-samples", "60",
            "--seed", "0",
        ]
        assert cli.main(["campaign", "run", *args,
                         "--records-out", str(records)]) == 0
        report = tmp_path / "report.txt"
        assert cli.main(["optimize", *args, "--records", str(records),
                         "--report-out", str(report)]) == 0
        out = capsys.readouterr().out
        assert "constrained minimum" in out
        assert report.exists()

    def test_seed_env_variable(self, tmp_path, monkeypatch):
        common = ["campaign", "run", "--surrogate", "analytic-ridge-2qoi",
                  "--n-samples", "5"]
        monkeypatch.setenv("RH_SEED", "9")
        assert cli.main([*common, "--records-out", str(tmp_path / "env.csv")]) == 0
        monkeypatch.delenv("RH_SEED")
        assert cli.main([*common, "--seed", "9",
                         "--records-out", str(tmp_path / "flag.csv")]) == 0
        assert cli.main([*common, "--seed", "1",
                         "--records-out", str(tmp_path / "other.csv")]) == 0
        env = (tmp_path / "env.csv").read_bytes()
        assert env == (tmp_path / "flag.csv").read_bytes()
        assert env != (tmp_path / "other.csv").read_bytes()

    def test_exit_code_argument_error(self, tmp_path):
        snaps = tmp_path / "snaps.txt"
        data = np.outer([1.0, 2.0], 0.9 ** np.arange(10))
        dmd.save_snapshots(dmd.SnapshotSet(data, dt=0.1), snaps)
        code = cli.main(["dmd", "fit", "--input", str(snaps), "--rank", "99",
                         "--out", str(tmp_path / "model.txt")])
        assert code == 2

    def test_exit_code_numeric_error(self, tmp_path):
        snaps = tmp_path / "snaps.txt"
        data = np.outer([1.0, 2.0], 1.5 ** np.arange(10))
        dmd.save_snapshots(dmd.SnapshotSet(data, dt=0.1), snaps)
        model = tmp_path / "model.txt"
        assert cli.main(["dmd", "fit", "--input", str(snaps), "--rank", "1",
                         "--out", str(model)]) == 0
        code = cli.main(["dmd", "steady", "--model", str(model),
                         "--out", str(tmp_path / "steady.txt")])
        assert code == 3

    def test_exit_code_io_error(self, tmp_path):
        code = cli.main(["dmd", "fit", "--input", str(tmp_path / "missing.txt"),
                         "--out", str(tmp_path / "model.txt")])
        assert code == 4
        bad = tmp_path / "bad.txt"
        bad.write_text("not a model\n")
        assert cli.main(["dmd", "forecast", "--model", str(bad), "--time", "1",
                         "--out", str(tmp_path / "f.txt")]) == 4

    def test_full_subspace_chain(self, tmp_path):
        # gradient CSV -> as estimate -> shared compute
        rng = np.random.default_rng(1)
        inputs = rng.uniform(-1, 1, (100, 4))
        d = np.array([1.0, 1.0, 0.0, 0.0]) / np.sqrt(2)
        grads = 2.0 * (inputs @ d)[:, None] * d
        from hullrom.subspaces import GradientSampleSet

        csv = tmp_path / "grads.csv"
        GradientSampleSet(inputs, grads, (inputs @ d) ** 2).save_csv(csv)
        sub = tmp_path / "subspace.txt"
        assert cli.main(["as", "estimate", "--samples", str(csv),
                         "--dim", "1", "--out", str(sub)]) == 0
        shared = tmp_path / "shared.txt"
        assert cli.main(["shared", "compute", "--sources", str(sub), str(sub),
                         "--out", str(shared)]) == 0
        q = np.loadtxt(shared)
        assert np.allclose(np.abs(q), d, atol=1e-8)
