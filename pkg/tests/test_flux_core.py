import numpy as np
import pytest

from fronttrack import flux_core as fc
from fronttrack.errors import (ConfigError, DomainError, ModelAuditError,
                               NearDegeneracyError, UnknownModelError)

from conftest import MODEL_IDS, random_state


def dense_average_matrix(model, uL, uR, n=20000):
    """Riemann-sum oracle for the averaged Jacobian."""
    thetas = (np.arange(n) + 0.5) / n
    acc = np.zeros((model.N, model.N))
    for th in thetas:
        acc += model.jacobian_matrix(th * uL + (1 - th) * uR)
    return acc / n


class TestJacobian:
    def test_burgers_point(self):
        m = fc.make_model("burgers")
        assert np.allclose(fc.jacobian(m, [0.7]), [[0.7]])

    def test_remark_origin_hand_derivative(self):
        # d/d(u,v) of (0, (1+u+v)v) at the origin
        m = fc.make_model("remark-2x2")
        assert np.allclose(fc.jacobian(m, [0.0, 0.0]), [[0.0, 0.0], [0.0, 1.0]])

    def test_linear_constant(self):
        mat = [[0.0, 2.0], [0.5, 0.0]]
        m = fc.make_model("linear", {"matrix": mat})
        for u in ([0.0, 0.0], [0.3, -0.1]):
            assert np.allclose(fc.jacobian(m, u), mat)

    def test_out_of_domain_rejected(self):
        m = fc.make_model("burgers")
        with pytest.raises(DomainError):
            fc.jacobian(m, [5.0])


class TestEigDecompose:
    def test_burgers_scalar(self):
        m = fc.make_model("burgers")
        sys = fc.eig_decompose(m, [0.3])
        assert sys.lambdas == pytest.approx([0.3])
        assert np.allclose(sys.right, [[1.0]])
        assert np.allclose(sys.left, [[1.0]])
        assert sys.gnl_rates == pytest.approx([1.0])

    def test_remark_lambda2_and_gradient(self):
        m = fc.make_model("remark-2x2")
        sys = fc.eig_decompose(m, [0.1, 0.2])
        assert sys.lambdas == pytest.approx([0.0, 1.5], abs=1e-14)
        # finite-difference oracle for the lambda_2 gradient (1, 2)
        h = 1e-7
        for k, expect in ((0, 1.0), (1, 2.0)):
            up = np.array([0.1, 0.2])
            um = up.copy()
            up[k] += h
            um[k] -= h
            fd = (fc.eig_decompose(m, up).lambdas[1]
                  - fc.eig_decompose(m, um).lambdas[1]) / (2 * h)
            assert fd == pytest.approx(expect, rel=1e-6)

    def test_remark_origin_eigvectors(self):
        m = fc.make_model("remark-2x2")
        sys = fc.eig_decompose(m, [0.0, 0.0])
        assert sys.right[1] == pytest.approx([0.0, 1.0])
        assert sys.left[1] == pytest.approx([0.0, 1.0])
        assert sys.gnl_rates[1] == pytest.approx(2.0)

    def test_near_degenerate_rejected(self):
        with pytest.raises(NearDegeneracyError):
            fc.make_model("linear", {"matrix": [[1.0, 0.0], [0.0, 1.0]]})

    @pytest.mark.parametrize("mid", MODEL_IDS)
    def test_biorthogonality_and_order_random(self, mid):
        model = fc.make_model(mid)
        rng = np.random.default_rng(hash(mid) % 2 ** 32)
        for _ in range(10000):
            u = random_state(model, rng, margin=0.02)
            sys = model.point_eig(u)
            gram = sys.left @ sys.right.T
            assert np.max(np.abs(gram - np.eye(model.N))) <= 1e-10
            if model.N > 1:
                gaps = np.diff(sys.lambdas)
                assert gaps.min() >= model.gap - 1e-9
            norms = np.linalg.norm(sys.right, axis=1)
            assert np.max(np.abs(norms - 1.0)) <= 1e-12


class TestAverageEigs:
    def test_burgers_secant_half(self):
        # integral of theta*0 + (1-theta)*1 over [0,1] is 1/2
        m = fc.make_model("burgers")
        assert fc.average_eigs(m, [0.0], [1.0]).lambdas[0] == pytest.approx(0.5)

    @pytest.mark.parametrize("mid", MODEL_IDS)
    def test_degenerate_pair_matches_point(self, mid):
        model = fc.make_model(mid)
        rng = np.random.default_rng(3)
        for _ in range(20):
            u = random_state(model, rng)
            a = fc.average_eigs(model, u, u)
            b = fc.eig_decompose(model, u)
            assert np.allclose(a.lambdas, b.lambdas, atol=1e-12)
            assert np.allclose(a.right, b.right, atol=1e-12)

    def test_linear_pair_is_constant_system(self):
        m = fc.make_model("linear", {"matrix": [[0.0, 1.0], [1.0, 0.0]]})
        sys = fc.average_eigs(m, [0.2, -0.1], [-0.4, 0.3])
        assert sys.lambdas == pytest.approx([-1.0, 1.0])

    @pytest.mark.parametrize("mid", ["burgers", "cubic"])
    def test_scalar_secant_property(self, mid):
        model = fc.make_model(mid)
        rng = np.random.default_rng(11)
        for _ in range(50):
            a, b = random_state(model, rng), random_state(model, rng)
            if abs(b[0] - a[0]) < 1e-8:
                continue
            lam = fc.average_eigs(model, a, b).lambdas[0]
            secant = (model.f_scalar(b[0]) - model.f_scalar(a[0])) / (b[0] - a[0])
            assert lam == pytest.approx(secant, abs=1e-12)

    @pytest.mark.parametrize("mid", MODEL_IDS)
    def test_quadrature_against_dense_oracle(self, mid):
        model = fc.make_model(mid)
        rng = np.random.default_rng(5)
        uL, uR = random_state(model, rng), random_state(model, rng)
        amat = fc.average_matrix(model, uL, uR)
        oracle = dense_average_matrix(model, uL, uR)
        assert np.max(np.abs(amat - oracle)) <= 1e-7

    @pytest.mark.parametrize("mid", MODEL_IDS)
    def test_continuity_under_perturbation(self, mid):
        model = fc.make_model(mid)
        rng = np.random.default_rng(9)
        uL, uR = random_state(model, rng), random_state(model, rng)
        base = fc.average_eigs(model, uL, uR)
        delta = 1e-7
        pert = fc.average_eigs(model, uL + delta, uR)
        lip = np.max(np.abs(pert.lambdas - base.lambdas)) / delta
        assert lip < 1e3
        assert np.max(np.abs(pert.right - base.right)) / delta < 1e3


class TestGnlAudit:
    def test_burgers_rate_one(self):
        rep = fc.gnl_audit(fc.make_model("burgers"), 16)
        fam = rep["families"][0]
        assert fam["declared"] == fc.GNL
        assert fam["rate_min"] == pytest.approx(1.0)
        assert fam["rate_max"] == pytest.approx(1.0)

    def test_remark_hand_rates(self):
        # family 1: r1 prop (1+u+2v, -v) with grad lambda_1 = 0; family 2 rate 2
        rep = fc.gnl_audit(fc.make_model("remark-2x2"), 12)
        assert rep["families"][0]["declared"] == fc.LD
        assert abs(rep["families"][0]["rate_max"]) <= 1e-10
        assert rep["families"][1]["rate_min"] == pytest.approx(2.0)

    def test_linear_all_degenerate(self):
        rep = fc.gnl_audit(fc.make_model("linear", {"matrix": [[0.0, 1.0], [1.0, 0.0]]}), 6)
        assert all(f["declared"] == fc.LD and f["verdict"] == "pass"
                   for f in rep["families"])

    def test_mismatch_raises(self):
        model = fc.make_model("remark-2x2")
        model.field_kind = (fc.GNL, fc.GNL)  # family 1 is really degenerate
        with pytest.raises(ModelAuditError):
            fc.gnl_audit(model, 6)

    def test_grid_resolution_validated(self):
        with pytest.raises(ValueError):
            fc.gnl_audit(fc.make_model("burgers"), 1)


class TestCatalog:
    def test_unknown_model(self):
        with pytest.raises(UnknownModelError):
            fc.make_model("kdv")

    def test_bad_params_name_the_key(self):
        with pytest.raises(ConfigError) as err:
            fc.make_model("burgers", {"nope": 1.0})
        assert "model.params" in str(err.value)

    def test_fences_bracket_eigenvalues(self, models):
        rng = np.random.default_rng(2)
        for model in models.values():
            fences = model.lambda_fences
            for _ in range(200):
                lam = model.point_eig(random_state(model, rng, 0.01)).lambdas
                for k in range(model.N):
                    assert fences[k] < lam[k] < fences[k + 1]
            assert model.lambda_hat > fences[-1]
