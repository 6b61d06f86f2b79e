import numpy as np
import pytest

from hullrom import subspaces
from hullrom.errors import (
    ArgumentError,
    DegenerateFunctionError,
    NoSharedSubspaceError,
    ParseError,
)
from hullrom.subspaces import (
    ActiveSubspace,
    GradientSampleSet,
    InputScaler,
    compute_shared_subspace,
    estimate_active_subspace,
    estimate_gradients,
    lift_to_full,
    project_active,
    project_inactive,
)


def ridge_samples(direction, n=200, seed=0):
    """Exact gradients of f(mu) = (direction . mu)^2 on uniform samples."""
    direction = np.asarray(direction, dtype=float)
    rng = np.random.default_rng(seed)
    inputs = rng.uniform(-1, 1, (n, direction.size))
    t = inputs @ direction
    grads = 2.0 * t[:, None] * direction
    return GradientSampleSet(inputs, grads, t**2)


class TestInputScaler:
    def test_round_trip(self):
        scaler = InputScaler.from_box([[-0.6, 0.5]] * 4)
        rng = np.random.default_rng(2)
        mu = rng.uniform(-0.6, 0.5, (20, 4))
        assert np.allclose(scaler.unscale(scaler.scale(mu)), mu, atol=1e-14)

    def test_box_corners(self):
        scaler = InputScaler(lower=[-0.6, 0.0], upper=[0.5, 2.0])
        assert np.allclose(scaler.scale([-0.6, 0.0]), [-1.0, -1.0])
        assert np.allclose(scaler.scale([0.5, 2.0]), [1.0, 1.0])

    def test_outside_box_clips_with_warning(self):
        scaler = InputScaler(lower=[0.0], upper=[1.0])
        with pytest.warns(UserWarning, match="clipping"):
            out = scaler.scale([2.0])
        assert out[0] == 1.0

    def test_degenerate_box_rejected(self):
        with pytest.raises(ArgumentError):
            InputScaler(lower=[0.0, 1.0], upper=[1.0, 1.0])


class TestGradientSampleSet:
    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            GradientSampleSet(np.ones((3, 2)), np.ones((3, 3)), np.ones(3))
        with pytest.raises(ArgumentError):
            GradientSampleSet(np.ones((3, 2)), np.ones((3, 2)), np.ones(2))

    def test_non_finite_rejected(self):
        grads = np.ones((3, 2))
        grads[1, 0] = np.nan
        with pytest.raises(ArgumentError, match="gradients"):
            GradientSampleSet(np.ones((3, 2)), grads, np.ones(3))

    def test_csv_round_trip(self, tmp_path):
        samples = ridge_samples([1.0, -2.0, 0.5], n=17)
        path = tmp_path / "grads.csv"
        samples.save_csv(path)
        back = GradientSampleSet.load_csv(path)
        assert np.array_equal(back.inputs, samples.inputs)
        assert np.array_equal(back.gradients, samples.gradients)
        assert np.array_equal(back.values, samples.values)

    def test_csv_bad_column_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("mu_0,grad_0,value\n1.0,2.0\n")
        with pytest.raises(ParseError, match=":2"):
            GradientSampleSet.load_csv(path)


class TestEstimateGradients:
    def affine_case(self, n=60, m=4, seed=1):
        rng = np.random.default_rng(seed)
        inputs = rng.uniform(-1, 1, (n, m))
        slope = np.array([2.0, -1.0, 0.5, 3.0])
        return inputs, inputs @ slope + 7.0, slope

    def test_global_linear_exact_on_affine(self):
        inputs, values, slope = self.affine_case()
        grads = estimate_gradients(inputs, values, method="global-linear")
        assert np.allclose(grads, np.tile(slope, (len(inputs), 1)), atol=1e-10)

    def test_local_linear_exact_on_affine(self):
        inputs, values, slope = self.affine_case()
        grads = estimate_gradients(inputs, values, method="local-linear")
        assert np.allclose(grads, np.tile(slope, (len(inputs), 1)), atol=1e-8)

    def test_local_linear_tracks_quadratic(self):
        rng = np.random.default_rng(4)
        inputs = rng.uniform(-1, 1, (400, 2))
        values = np.sum(inputs**2, axis=1)
        grads = estimate_gradients(inputs, values, method="local-linear", k=8)
        # local affine fits recover the slowly varying gradient approximately
        err = np.linalg.norm(grads - 2 * inputs, axis=1)
        assert np.median(err) < 0.3

    def test_exact_callback(self):
        inputs = np.array([[0.5, -0.5], [1.0, 0.0]])
        grads = estimate_gradients(
            inputs, np.zeros(2), method="exact-callback", grad_fn=lambda x: 3 * x
        )
        assert np.allclose(grads, 3 * inputs)

    def test_exact_callback_needs_function(self):
        with pytest.raises(ArgumentError):
            estimate_gradients(np.ones((3, 2)), np.ones(3), method="exact-callback")

    def test_too_few_neighbors_rejected(self):
        with pytest.raises(ArgumentError):
            estimate_gradients(np.ones((9, 4)), np.ones(9), method="local-linear", k=3)

    def test_unknown_method(self):
        with pytest.raises(ArgumentError):
            estimate_gradients(np.ones((3, 2)), np.ones(3), method="spectral")


class TestActiveSubspace:
    def test_ridge_direction_recovered(self):
        a = np.array([3.0, 1.0, -2.0, 0.5, 1.5])
        a /= np.linalg.norm(a)
        sub = estimate_active_subspace(ridge_samples(a), M=1)
        angle = np.arccos(np.clip(abs(sub.W1[:, 0] @ a), -1, 1))
        assert angle < 1e-8

    def test_linear_function_eigenvalue(self):
        b = np.array([1.0, -2.0, 2.0])
        rng = np.random.default_rng(3)
        inputs = rng.uniform(-1, 1, (50, 3))
        samples = GradientSampleSet(
            inputs, np.tile(b, (50, 1)), inputs @ b
        )
        sub = estimate_active_subspace(samples, M=1)
        assert abs(sub.lambdas[0] - b @ b) < 1e-10
        assert np.all(np.abs(sub.lambdas[1:]) < 1e-10)

    def test_descending_nonnegative_eigenvalues(self):
        rng = np.random.default_rng(9)
        samples = GradientSampleSet(
            rng.uniform(-1, 1, (80, 4)), rng.standard_normal((80, 4)), np.zeros(80)
        )
        sub = estimate_active_subspace(samples, M=2)
        assert np.all(np.diff(sub.lambdas) <= 1e-12)
        assert np.all(sub.lambdas >= 0)
        assert np.allclose(sub.W.T @ sub.W, np.eye(4), atol=1e-12)

    def test_sign_convention(self):
        a = np.array([0.6, 0.8])
        sub = estimate_active_subspace(ridge_samples(-a), M=1)
        assert sub.W1[0, 0] > 0  # first nonzero component positive

    def test_gap_rule(self):
        a = np.array([1.0, 0.0, 0.0, 0.0])
        sub = estimate_active_subspace(ridge_samples(a))
        assert sub.M == 1

    def test_dimension_above_m_rejected(self):
        with pytest.raises(ArgumentError):
            estimate_active_subspace(ridge_samples([1.0, 0.0]), M=3)

    def test_zero_gradients_degenerate(self):
        samples = GradientSampleSet(np.ones((5, 2)), np.zeros((5, 2)), np.zeros(5))
        with pytest.raises(DegenerateFunctionError):
            estimate_active_subspace(samples)

    def test_projection_round_trip(self):
        sub = estimate_active_subspace(ridge_samples([1.0, 2.0, -1.0]), M=2)
        mu = np.array([0.3, -0.2, 0.9])
        back = lift_to_full(sub, project_active(sub, mu), project_inactive(sub, mu))
        assert np.allclose(back, mu, atol=1e-12)


class TestSharedSubspace:
    def test_single_source_returns_w1(self):
        sub = estimate_active_subspace(ridge_samples([1.0, 1.0, 0.0]), M=2)
        shared = compute_shared_subspace([sub])
        assert np.allclose(shared.Q, sub.W1, atol=1e-12)

    def test_orthogonal_axes_give_ones_vector(self):
        ex = ActiveSubspace(W=np.eye(2), lambdas=np.array([1.0, 0.0]), M=1)
        ey = ActiveSubspace(
            W=np.eye(2)[:, ::-1], lambdas=np.array([1.0, 0.0]), M=1
        )
        shared = compute_shared_subspace([ex, ey])
        assert np.allclose(shared.Q[:, 0], [1.0, 1.0], atol=1e-10)

    def test_interface_identity_invariant(self):
        # two different planes in R^4 whose bases agree when projected onto
        # the axes they share, so an exact interface solution exists
        e = np.eye(4)
        w_a = e
        w_b = np.column_stack(
            [
                (e[:, 0] + e[:, 2]) / np.sqrt(2),
                (e[:, 1] + e[:, 3]) / np.sqrt(2),
                (e[:, 0] - e[:, 2]) / np.sqrt(2),
                (e[:, 1] - e[:, 3]) / np.sqrt(2),
            ]
        )
        lam = np.array([3.0, 2.0, 0.0, 0.0])
        sources = [
            ActiveSubspace(W=w_a, lambdas=lam, M=2),
            ActiveSubspace(W=w_b, lambdas=lam, M=2),
        ]
        shared = compute_shared_subspace(sources)
        for s in sources:
            assert np.linalg.norm(s.W1.T @ shared.Q - np.eye(2)) < 1e-10

    def test_rotated_noisy_bases_raise(self):
        rng = np.random.default_rng(6)
        # two bases of the same plane rotated within the span: the interface
        # conditions demand Q with basis^T Q = Id and (basis R)^T Q = Id
        # simultaneously, which no Q satisfies for R != Id
        basis = np.linalg.qr(rng.standard_normal((5, 2)))[0]
        theta = 0.7
        rot = np.array(
            [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
        )
        w_a = np.linalg.qr(np.hstack([basis, rng.standard_normal((5, 3))]))[0]
        w_b = np.linalg.qr(np.hstack([basis @ rot, rng.standard_normal((5, 3))]))[0]
        lam = np.array([3.0, 2.0, 0.0, 0.0, 0.0])
        sources = [
            ActiveSubspace(W=w_a, lambdas=lam, M=2),
            ActiveSubspace(W=w_b, lambdas=lam, M=2),
        ]
        with pytest.raises(NoSharedSubspaceError):
            compute_shared_subspace(sources)
        # a looser tolerance accepts the least-squares compromise
        shared = compute_shared_subspace(sources, residual_tol=2.0)
        assert shared.Q.shape == (5, 2)

    def test_incompatible_sources_raise(self):
        def one_d(angle):
            w = np.array(
                [[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]]
            )
            return ActiveSubspace(W=w, lambdas=np.array([1.0, 0.0]), M=1)

        with pytest.raises(NoSharedSubspaceError) as err:
            compute_shared_subspace([one_d(0.0), one_d(0.9), one_d(2.0)])
        assert err.value.residual > 1e-8

    def test_mismatched_shapes_rejected(self):
        a = ActiveSubspace(W=np.eye(2), lambdas=np.array([1.0, 0.0]), M=1)
        b = ActiveSubspace(W=np.eye(3), lambdas=np.array([1.0, 0.0, 0.0]), M=1)
        with pytest.raises(ArgumentError):
            compute_shared_subspace([a, b])
        with pytest.raises(ArgumentError):
            compute_shared_subspace([])


class TestSerialization:
    def test_round_trip(self, tmp_path):
        sub = estimate_active_subspace(ridge_samples([1.0, -1.0, 2.0, 0.5]), M=2)
        path = tmp_path / "subspace.txt"
        subspaces.save_subspace(sub, path)
        back = subspaces.load_subspace(path)
        assert back.M == sub.M
        assert np.array_equal(back.W, sub.W)
        assert np.array_equal(back.lambdas, sub.lambdas)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "subspace.txt"
        path.write_text("nope\n")
        with pytest.raises(ParseError, match=":1"):
            subspaces.load_subspace(path)
