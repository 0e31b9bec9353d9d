import numpy as np
import pytest

from limlab.errors import DegenerateInnerProduct, DimensionMismatch, InvalidConfig
from limlab.genmodels import (
    ConstantLaw,
    DcsbmConfig,
    ExplicitRho,
    UniformLaw,
    sample_dcsbm,
)
from limlab.lim import (
    LimParameters,
    build_design,
    equilibrium_mean,
    generate_outcomes,
    neumann_outcomes,
    rdpg_limit_objects,
    theoretical_design_rank,
)
from limlab.netcore import averaging_operator

from conftest import random_graph


def bernoulli_params(sigma=0.1):
    """Scalar-covariate benchmark coefficients (3, 0.2, 4, 2)."""
    return LimParameters(alpha=3.0, beta=0.2, gamma=4.0, delta=2.0, sigma=sigma)


def four_block_dcsbm(theta_law, rho=0.7):
    B = np.full((4, 4), 0.05)
    np.fill_diagonal(B, 0.5)
    return DcsbmConfig(
        pi=np.full(4, 0.25), B=B, theta_law=theta_law, sparsity=ExplicitRho(rho)
    )


class TestParameters:
    def test_beta_bound(self):
        with pytest.raises(InvalidConfig):
            LimParameters(alpha=0, beta=1.0, gamma=1.0, delta=0.0, sigma=0.1)

    def test_gamma_delta_length_match(self):
        with pytest.raises(InvalidConfig):
            LimParameters(alpha=0, beta=0.1, gamma=[1.0, 2.0], delta=[1.0], sigma=0.1)

    def test_scalars_promote_to_vectors(self):
        params = bernoulli_params()
        assert params.gamma.shape == (1,)
        assert params.p == 1


class TestGenerateOutcomes:
    def test_no_contagion_no_noise_is_exact(self, four_node_op, covariate_abcd):
        params = LimParameters(alpha=1.5, beta=0.0, gamma=2.0, delta=-1.0, sigma=0.0)
        out = generate_outcomes(four_node_op, covariate_abcd, params, seed=0)
        gt = four_node_op.apply(covariate_abcd)
        np.testing.assert_allclose(
            out.Y, 1.5 + 2.0 * covariate_abcd - 1.0 * gt, atol=1e-14
        )

    def test_pure_interference_reproduces_neighbor_averages(
        self, four_node_op, covariate_abcd
    ):
        params = LimParameters(alpha=0.0, beta=0.0, gamma=0.0, delta=1.0, sigma=0.0)
        out = generate_outcomes(four_node_op, covariate_abcd, params, seed=3)
        np.testing.assert_allclose(out.Y, [0.5, 1.0, 2 / 3, 1.0], atol=1e-14)

    def test_matches_truncated_series(self):
        rng = np.random.default_rng(21)
        op = averaging_operator(random_graph(60, 0.2, rng))
        T = rng.standard_normal((60, 1))
        params = bernoulli_params()
        out = generate_outcomes(op, T, params, seed=9)
        series = neumann_outcomes(op, T, params, out.eps, K=200)
        assert np.abs(out.Y - series).max() < 1e-8

    def test_fixed_point_property(self):
        # 100 random instances: Y = alpha 1 + beta GY + T gamma + GT delta + eps
        rng = np.random.default_rng(2)
        for trial in range(100):
            n = int(rng.integers(10, 200))
            op = averaging_operator(random_graph(n, 0.25, rng))
            T = rng.standard_normal((n, 2))
            params = LimParameters(
                alpha=float(rng.normal()),
                beta=float(rng.uniform(-0.8, 0.8)),
                gamma=rng.standard_normal(2),
                delta=rng.standard_normal(2),
                sigma=0.5,
            )
            out = generate_outcomes(op, T, params, seed=trial)
            recon = (
                params.alpha
                + params.beta * op.apply(out.Y)
                + T @ params.gamma
                + op.apply(T) @ params.delta
                + out.eps
            )
            scale = 1.0 + np.abs(recon).max()
            assert np.abs(out.Y - recon).max() < 1e-8 * scale

    def test_equilibrium_iteration_converges(self, four_node_op, covariate_abcd):
        params = bernoulli_params(sigma=0.1)
        out = generate_outcomes(four_node_op, covariate_abcd, params, seed=4)
        base = (
            params.alpha
            + covariate_abcd * params.gamma[0]
            + four_node_op.apply(covariate_abcd) * params.delta[0]
            + out.eps
        )
        steps = int(np.ceil(np.log(1e-7) / np.log(abs(params.beta))))
        y = base.copy()
        for _ in range(steps):
            y = params.beta * four_node_op.apply(y) + base
        assert np.abs(y - out.Y).max() < 1e-6

    def test_homogeneity_in_scale(self, four_node_op, covariate_abcd):
        params = bernoulli_params(sigma=0.3)
        scaled = LimParameters(
            alpha=params.alpha * 2.5,
            beta=params.beta,
            gamma=params.gamma * 2.5,
            delta=params.delta * 2.5,
            sigma=params.sigma * 2.5,
        )
        a = generate_outcomes(four_node_op, covariate_abcd, params, seed=11)
        b = generate_outcomes(four_node_op, covariate_abcd, scaled, seed=11)
        np.testing.assert_allclose(b.Y, 2.5 * a.Y, rtol=1e-12)


class TestNeumannSeries:
    def test_zero_terms_returns_base(self, four_node_op, covariate_abcd):
        params = bernoulli_params(sigma=0.0)
        eps = np.zeros(4)
        base = neumann_outcomes(four_node_op, covariate_abcd, params, eps, K=0)
        expected = (
            params.alpha
            + covariate_abcd * params.gamma[0]
            + four_node_op.apply(covariate_abcd) * params.delta[0]
        )
        np.testing.assert_allclose(base, expected, atol=1e-14)

    def test_beta_zero_truncates_immediately(self, four_node_op, covariate_abcd):
        params = LimParameters(alpha=1.0, beta=0.0, gamma=1.0, delta=1.0, sigma=0.0)
        eps = np.zeros(4)
        k0 = neumann_outcomes(four_node_op, covariate_abcd, params, eps, K=0)
        k9 = neumann_outcomes(four_node_op, covariate_abcd, params, eps, K=9)
        np.testing.assert_array_equal(k0, k9)

    def test_agreement_tracks_truncation_bound(self):
        rng = np.random.default_rng(8)
        op = averaging_operator(random_graph(40, 0.3, rng))
        T = rng.standard_normal((40, 1))
        for beta in (0.2, 0.5):
            params = LimParameters(alpha=1.0, beta=beta, gamma=2.0, delta=1.0, sigma=0.2)
            out = generate_outcomes(op, T, params, seed=5)
            series = neumann_outcomes(op, T, params, out.eps, K=200)
            assert np.abs(series - out.Y).max() < 1e-8


class TestBuildDesign:
    def test_four_node_layout(self, four_node_op, covariate_abcd):
        design = build_design(four_node_op, covariate_abcd, covariate_abcd)
        assert design.labels == ("intercept", "GY", "T1", "GT1")
        np.testing.assert_array_equal(design.matrix[:, 0], np.ones(4))
        gt = four_node_op.apply(covariate_abcd)
        np.testing.assert_allclose(design.matrix[:, 1], gt)
        np.testing.assert_allclose(design.matrix[:, 3], gt)
        np.testing.assert_allclose(design.matrix[:, 1], [0.5, 1.0, 2 / 3, 1.0])

    def test_shape_single_edge(self):
        op = averaging_operator_from_pair()
        design = build_design(op, np.array([1.0, 0.0]), np.array([0.3, 0.7]))
        assert design.matrix.shape == (2, 4)

    def test_gy_column_is_definitional(self):
        rng = np.random.default_rng(31)
        op = averaging_operator(random_graph(25, 0.3, rng))
        T = rng.standard_normal((25, 3))
        Y = rng.standard_normal(25)
        design = build_design(op, T, Y)
        assert design.k == 2 * 3 + 2
        np.testing.assert_array_equal(design.matrix[:, 1], op.apply(Y))

    def test_interference_subset(self):
        rng = np.random.default_rng(32)
        op = averaging_operator(random_graph(20, 0.3, rng))
        T = rng.standard_normal((20, 4))
        Y = rng.standard_normal(20)
        design = build_design(op, T, Y, interference_cols=(2, 3))
        assert design.labels[-2:] == ("GT3", "GT4")
        assert design.k == 8
        np.testing.assert_array_equal(design.matrix[:, 6], op.apply(T)[:, 2])


def averaging_operator_from_pair():
    from conftest import complete_graph

    return averaging_operator(complete_graph(2))


class TestEquilibriumMean:
    def test_benchmark_parameters(self):
        # (3 + (4 + 2) * 0.5) / (1 - 0.2), by hand
        assert equilibrium_mean(bernoulli_params(), [0.5]) == pytest.approx(7.5)

    def test_no_peer_terms(self):
        params = LimParameters(alpha=2.0, beta=0.0, gamma=0.0, delta=0.0, sigma=0.0)
        assert equilibrium_mean(params, [0.9]) == pytest.approx(2.0)

    def test_zero_everything(self):
        params = LimParameters(alpha=0.0, beta=0.5, gamma=1.0, delta=1.0, sigma=0.0)
        assert equilibrium_mean(params, [0.0]) == pytest.approx(0.0)

    def test_split_form_differs_unless_beta_zero(self):
        params = bernoulli_params()
        full = equilibrium_mean(params, [0.5])
        split = equilibrium_mean(params, [0.5], split_form=True)
        assert split == pytest.approx(3.0 / 0.8 + 3.0)
        assert full != split
        flat = LimParameters(alpha=3.0, beta=0.0, gamma=4.0, delta=2.0, sigma=0.1)
        assert equilibrium_mean(flat, [0.5]) == equilibrium_mean(
            flat, [0.5], split_form=True
        )


class TestRdpgLimits:
    def test_beta_zero_collapses_feedback(self):
        rng = np.random.default_rng(12)
        X = rng.uniform(0.5, 1.5, size=(40, 3))
        mu = X.mean(axis=0)
        params = LimParameters(
            alpha=1.0, beta=0.0, gamma=[1.0, 2.0, 3.0], delta=[0.5, 0.5, 0.5], sigma=0.1
        )
        lim = rdpg_limit_objects(X, mu, params)
        np.testing.assert_array_equal(lim.feedback, np.zeros((3, 3)))
        np.testing.assert_allclose(lim.gy_loading, lim.second_moment @ params.gamma)

    def test_feedback_satisfies_defining_equation(self):
        rng = np.random.default_rng(13)
        X = rng.uniform(0.5, 1.5, size=(60, 4))
        mu = X.mean(axis=0)
        params = LimParameters(
            alpha=3.0, beta=0.2, gamma=[1.5, 2.5, 3.5, 4.5], delta=[2.0] * 4, sigma=0.1
        )
        lim = rdpg_limit_objects(X, mu, params)
        scaled = X / (X @ mu)[:, None]
        ratio_moment = X.T @ scaled / X.shape[0]
        lhs = (np.eye(4) + lim.feedback) @ (np.eye(4) - params.beta * ratio_moment)
        np.testing.assert_allclose(lhs, np.eye(4), atol=1e-8)

    def test_scalar_constant_positions_give_constant_gx_limit(self):
        c = 1.7
        X = np.full((25, 1), c)
        params = LimParameters(alpha=0.5, beta=0.3, gamma=1.0, delta=2.0, sigma=0.1)
        lim = rdpg_limit_objects(X, np.array([c]), params)
        # X_i . mu = c^2 and second moment = c^2, so H^{-1} X secmm = c 1_n
        np.testing.assert_allclose(lim.gx_limit[:, 0], np.full(25, c), atol=1e-12)

    def test_block_constant_structure_halves_rank(self):
        config = four_block_dcsbm(ConstantLaw(1.0))
        s = sample_dcsbm(config, 120, seed=3)
        params = LimParameters(
            alpha=3.0, beta=0.2, gamma=[1.5, 2.5, 3.5, 4.5], delta=[2.0] * 4, sigma=0.1
        )
        mu = config.mean_latent()
        lim = rdpg_limit_objects(s.X, mu, params)
        stacked = np.column_stack([s.X.X, lim.gx_limit])
        svals = np.linalg.svd(stacked, compute_uv=False)
        assert int(np.sum(svals > 1e-8 * svals[0])) == 4

    def test_degenerate_inner_product_rejected(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0]])
        mu = np.array([1.0, 0.0])  # second row orthogonal to mu
        params = LimParameters(alpha=0, beta=0.1, gamma=[1, 1], delta=[1, 1], sigma=0)
        with pytest.raises(DegenerateInnerProduct):
            rdpg_limit_objects(X, mu, params)

    def test_knife_edge_loading_warns(self):
        X = np.full((10, 1), 1.0)
        params = LimParameters(alpha=0.0, beta=0.0, gamma=1.0, delta=0.0, sigma=0.0)
        # second moment = 1 and gamma = 1 makes the loading equal mu = 1
        with pytest.warns(UserWarning):
            rdpg_limit_objects(X, np.array([1.0]), params)


class TestDesignRankTest:
    def test_blockmodel_without_degree_correction_collapses(self):
        config = four_block_dcsbm(ConstantLaw(1.0))
        s = sample_dcsbm(config, 200, seed=17)
        res = theoretical_design_rank(s.X, config.mean_latent())
        assert res.rank == 4
        assert not res.schur_ok

    def test_degree_corrected_blockmodel_attains_full_rank(self):
        config = four_block_dcsbm(UniformLaw(1.0, 2.0))
        s = sample_dcsbm(config, 200, seed=18)
        res = theoretical_design_rank(s.X, config.mean_latent())
        assert res.rank == 8
        assert res.schur_ok

    def test_single_atom_scalar_case(self):
        X = np.full((30, 1), 2.0)
        res = theoretical_design_rank(X, np.array([2.0]))
        assert res.rank == 1
        assert not res.schur_ok

    def test_degenerate_inner_product(self):
        X = np.array([[1.0], [-1.0]])
        with pytest.raises(DegenerateInnerProduct):
            theoretical_design_rank(X, np.array([1.0]))


class TestDimensionErrors:
    def test_covariate_rows_must_match(self, four_node_op):
        params = bernoulli_params()
        with pytest.raises(DimensionMismatch):
            generate_outcomes(four_node_op, np.ones((5, 1)), params, seed=0)

    def test_tau_length_checked(self):
        with pytest.raises(DimensionMismatch):
            equilibrium_mean(bernoulli_params(), [0.5, 0.5])
