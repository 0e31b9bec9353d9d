import numpy as np
import pytest

from limlab.errors import DimensionMismatch
from limlab.genmodels import ConstantLaw, DcsbmConfig, ExplicitRho, sample_dcsbm
from limlab.identify import (
    VIF_CAP,
    colinearity_report,
    distinct_eigenvalue_count,
    powers_linearly_independent,
    vif,
)
from limlab.lim import DesignMatrix, LimParameters, build_design, generate_outcomes
from limlab.netcore import averaging_operator

from conftest import complete_graph, path_graph, random_graph


def design_from(matrix):
    matrix = np.asarray(matrix, dtype=float)
    return DesignMatrix(
        matrix=matrix,
        labels=tuple(f"c{j}" for j in range(matrix.shape[1])),
        p=1,
        interference_cols=(0,),
    )


class TestDistinctEigenvalues:
    def test_triangle_has_two(self):
        assert distinct_eigenvalue_count(averaging_operator(complete_graph(3))) == 2

    def test_path_has_three(self):
        assert distinct_eigenvalue_count(averaging_operator(path_graph(3))) == 3

    def test_single_edge_has_two(self):
        assert distinct_eigenvalue_count(averaging_operator(complete_graph(2))) == 2

    def test_tolerance_merges_near_duplicates(self):
        op = averaging_operator(complete_graph(5))
        assert distinct_eigenvalue_count(op, rel_tol=1e-8) == 2
        # absurdly loose tolerance merges everything into one cluster
        assert distinct_eigenvalue_count(op, rel_tol=10.0) == 1


class TestPowersIndependence:
    def test_triangle_is_dependent(self):
        # G^2 = G/2 + I/2 exactly on the triangle
        res = powers_linearly_independent(averaging_operator(complete_graph(3)))
        assert not res.independent
        assert res.rank <= 2

    def test_path_is_independent(self):
        res = powers_linearly_independent(averaging_operator(path_graph(3)))
        assert res.independent
        assert res.rank == 3

    def test_single_edge_squares_to_identity(self):
        res = powers_linearly_independent(averaging_operator(complete_graph(2)))
        assert res.rank == 2

    def test_three_distinct_eigenvalues_imply_independence(self):
        # cross-validate the two tests on 200 random blockmodel draws
        config = DcsbmConfig(
            pi=[0.5, 0.5],
            B=np.array([[0.6, 0.1], [0.1, 0.4]]),
            theta_law=ConstantLaw(),
            sparsity=ExplicitRho(0.5),
        )
        hits = 0
        for seed in range(200):
            op = averaging_operator(sample_dcsbm(config, 40, seed=seed).graph)
            if distinct_eigenvalue_count(op) >= 3:
                hits += 1
                assert powers_linearly_independent(op).independent
        assert hits > 150  # the implication must actually get exercised


class TestVif:
    def test_orthogonal_columns_have_unit_vif(self):
        mat = np.zeros((9, 3))
        mat[0:3, 0] = 1.0
        mat[3:6, 1] = 2.0
        mat[6:9, 2] = -1.0
        res = vif(design_from(mat))
        np.testing.assert_allclose(res.values, np.ones(3))
        assert not res.capped.any()

    def test_duplicated_pair_caps_both(self):
        rng = np.random.default_rng(0)
        base = rng.standard_normal(20)
        mat = np.column_stack([base, base, rng.standard_normal(20)])
        res = vif(design_from(mat))
        assert res.values[0] == VIF_CAP
        assert res.values[1] == VIF_CAP
        assert res.capped[0] and res.capped[1] and not res.capped[2]
        assert res.values[2] < 5

    def test_near_duplicate_of_intercept_inflates(self):
        # col2 = c 1 + noise; with relative noise below 0.1/sqrt(n) the
        # closed-form uncentered R^2 puts the VIF above 100
        rng = np.random.default_rng(1)
        n = 64
        c = 2.0
        rel = 0.05 / np.sqrt(n)
        t = rng.standard_normal(n)
        gt = rng.standard_normal(n)
        col2 = c * (1.0 + rel * rng.standard_normal(n))
        mat = np.column_stack([np.ones(n), col2, t, gt])
        res = vif(design_from(mat))
        assert res.values[1] > 100

    def test_scale_invariance_per_column(self):
        rng = np.random.default_rng(2)
        mat = rng.standard_normal((30, 4))
        base = vif(design_from(mat)).values
        for j in range(4):
            scaled = mat.copy()
            scaled[:, j] *= 37.5
            got = vif(design_from(scaled)).values
            assert abs(got[j] - base[j]) < 1e-8 * max(base[j], 1.0)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(3)
        mat = rng.standard_normal((25, 4))
        perm = [2, 0, 3, 1]
        base = vif(design_from(mat)).values
        shuffled = vif(design_from(mat[:, perm])).values
        np.testing.assert_allclose(shuffled, base[perm], rtol=1e-10)

    def test_needs_more_rows_than_columns(self):
        with pytest.raises(DimensionMismatch):
            vif(design_from(np.ones((3, 3))))


class TestColinearityReport:
    def _instance(self, n=50, seed=0):
        rng = np.random.default_rng(seed)
        op = averaging_operator(random_graph(n, 0.25, rng))
        T = (rng.random(n) < 0.5).astype(float)
        params = LimParameters(alpha=3.0, beta=0.2, gamma=4.0, delta=2.0, sigma=0.1)
        out = generate_outcomes(op, T, params, seed=seed)
        design = build_design(op, T, out.Y)
        return op, design, T, params

    def test_constant_covariate_has_zero_gt_dev(self):
        rng = np.random.default_rng(5)
        op = averaging_operator(random_graph(30, 0.3, rng))
        T = np.full(30, 0.7)
        Y = rng.standard_normal(30)
        design = build_design(op, T, Y)
        report = colinearity_report(op, design, T)
        assert report.gt_dev < 1e-12  # zero up to row-sum rounding in G

    def test_gt_dev_matches_bruteforce_loop(self):
        op, design, T, params = self._instance(seed=9)
        report = colinearity_report(op, design, T, params=params, tau=[0.5])
        gt = op.apply(T)
        worst = max(abs(gt[i] - 0.5) for i in range(op.n))
        assert report.gt_dev == pytest.approx(worst, abs=1e-15)

    def test_eta_from_params_vs_empirical(self):
        op, design, T, params = self._instance(seed=10)
        with_params = colinearity_report(op, design, T, params=params, tau=[0.5])
        assert with_params.eta == pytest.approx(7.5)
        empirical = colinearity_report(op, design, T)
        assert empirical.eta == pytest.approx(float(design.matrix[:, 1].mean()))

    def test_report_fields_are_consistent(self):
        op, design, T, params = self._instance(seed=11)
        report = colinearity_report(
            op, design, T, params=params, tau=[0.5], include_power_rank=True
        )
        assert report.identified == (report.distinct_eigs >= 3)
        assert report.ig2_rank == 3
        assert report.sigma_min >= 0.0
        assert np.all(report.vif >= 1.0 - 1e-9)
        assert report.frob_sq > 0
        assert report.vif.shape == (design.k,)

    def test_power_rank_skipped_by_default(self):
        op, design, T, _ = self._instance(seed=12)
        assert colinearity_report(op, design, T).ig2_rank is None
