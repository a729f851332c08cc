import numpy as np
import pytest

import supmin as sm

from conftest import random_builtin_model


def jet_block_errors(a, b):
    """Per-block relative deviation between two jets."""
    out = []
    for name in ("value", "dp", "deta", "dx", "dpp", "dpeta", "dpx"):
        xa, xb = np.atleast_1d(getattr(a, name)), np.atleast_1d(getattr(b, name))
        out.append(np.max(np.abs(xa - xb)) / (1.0 + np.max(np.abs(xb))))
    return max(out)


def make_da(K, k_rows, A, c_rows):
    return sm.DataAssimilationModel(
        np.atleast_2d(K),
        sm.SampledSignal.from_rows(k_rows),
        np.atleast_2d(A),
        sm.SampledSignal.from_rows(c_rows),
    )


class TestEval:
    def test_power_norm_square(self):
        model = sm.PowerNormModel(2.0, [0.0, 0.0])
        assert model.eval(0.3, [5.0, -1.0], [3.0, 4.0]) == 25.0

    def test_data_assimilation_zero_fields(self):
        model = make_da([[0.0]], [[0.0, 0.0], [1.0, 0.0]], [[0.0]],
                        [[0.0, 0.0], [1.0, 0.0]])
        assert model.eval(0.5, [0.7], [1.0]) == 1.0

    def test_data_assimilation_hand_value(self):
        # |k(0.5) - eta|^2 + |p|^2 = (0.5 - 0.2)^2 + 1 = 1.09
        model = make_da([[1.0]], [[0.0, 0.0], [1.0, 1.0]], [[0.0]],
                        [[0.0, 0.0], [1.0, 0.0]])
        assert model.eval(0.5, [0.2], [1.0]) == pytest.approx(1.09, abs=1e-15)

    def test_negative_custom_raises(self):
        bad = sm.CustomModel(lambda x, e, p: -1.0, dim=1)
        with pytest.raises(sm.NegativeLagrangian):
            bad.eval(0.0, [0.0], [0.0])

    def test_nonfinite_raises(self):
        bad = sm.CustomModel(lambda x, e, p: np.inf, dim=1)
        with pytest.raises(sm.NonFinite):
            bad.eval(0.0, [0.0], [0.0])

    def test_eval_many_matches_scalar(self, rng):
        for _ in range(10):
            dim = int(rng.integers(1, 4))
            model = random_builtin_model(rng, dim)
            xs = rng.uniform(0.0, 1.0, size=7)
            etas = rng.normal(size=(7, dim))
            ps = rng.normal(size=(7, dim))
            many = model.eval_many(xs, etas, ps)
            one = [model.eval(x, e, p) for x, e, p in zip(xs, etas, ps)]
            np.testing.assert_allclose(many, one, rtol=1e-13, atol=1e-13)

    def test_nonnegativity_sampling(self, rng):
        for _ in range(10):
            dim = int(rng.integers(1, 4))
            model = random_builtin_model(rng, dim)
            xs = rng.uniform(0.0, 1.0, size=50)
            etas = rng.normal(scale=3.0, size=(50, dim))
            ps = rng.normal(scale=3.0, size=(50, dim))
            assert np.all(model.eval_many(xs, etas, ps) >= 0.0)


class TestJet:
    def test_power_norm_square_jet(self):
        jet = sm.PowerNormModel(2.0, [0.0, 0.0]).jet(0.1, [3.0, 1.0], [1.0, 2.0])
        np.testing.assert_allclose(jet.dp, [2.0, 4.0], atol=1e-14)
        np.testing.assert_allclose(jet.dpp, 2.0 * np.eye(2), atol=1e-14)
        assert np.all(jet.deta == 0.0) and jet.dx == 0.0

    def test_da_minimum_at_velocity(self):
        v = [1.5, -0.5]
        model = make_da(np.zeros((1, 2)), [[0.0, 0.0], [1.0, 0.0]], np.zeros((2, 2)),
                        [[0.0, *v], [1.0, *v]])
        jet = model.jet(0.5, [0.3, 0.4], v)
        assert jet.value == 0.0
        np.testing.assert_allclose(jet.dp, 0.0, atol=1e-15)

    def test_fd_matches_analytic_power_norm(self, rng):
        model = sm.PowerNormModel(2.0, [0.3, -0.7])
        mirror = sm.CustomModel(lambda x, e, p: np.linalg.norm(p - np.array([0.3, -0.7])) ** 2, dim=2)
        worst = 0.0
        for _ in range(100):
            x = rng.uniform(0.0, 1.0)
            eta = rng.normal(size=2)
            p = rng.normal(scale=2.0, size=2)
            worst = max(worst, jet_block_errors(mirror.jet(x, eta, p), model.jet(x, eta, p)))
        assert worst < 1e-6

    def test_fd_consistency_all_builtins(self, rng):
        worst = 0.0
        for _ in range(20):
            dim = int(rng.integers(1, 4))
            model = random_builtin_model(rng, dim)
            x = rng.uniform(0.05, 0.95)
            eta = rng.uniform(-10, 10, size=dim)
            p = rng.uniform(-10, 10, size=dim)
            if np.linalg.norm(p - getattr(model, "offset", np.full(dim, np.inf))) < 0.5:
                continue  # keep clear of the power-norm apex
            fd = sm.finite_difference_jet(model._eval_raw, x, eta, p)
            worst = max(worst, jet_block_errors(fd, model.jet(x, eta, p)))
        assert worst < 1e-5

    def test_fd_dpp_symmetric(self, rng):
        fn = lambda x, e, p: (p[0] ** 2) * (p[1] + 2.0) ** 2 + x * e[0] ** 2
        jet = sm.CustomModel(fn, dim=2).jet(0.4, [1.0, -1.0], [0.7, 0.3])
        assert np.array_equal(jet.dpp, jet.dpp.T)

    def test_scaled_jets_scale_exactly(self, rng):
        base = sm.PowerNormModel(2.0, [0.0])
        doubled = sm.scaled(base, 2.0)
        j1 = base.jet(0.0, [0.0], [3.0])
        j2 = doubled.jet(0.0, [0.0], [3.0])
        assert j2.value == 2.0 * j1.value and np.array_equal(j2.dp, 2.0 * j1.dp)


class TestSampledSignal:
    def test_interpolation_and_extension(self):
        sig = sm.SampledSignal.from_rows([[0.0, 1.0], [1.0, 3.0]])
        assert sig.eval(0.5)[0] == 2.0
        assert sig.eval(-1.0)[0] == 1.0 and sig.eval(2.0)[0] == 3.0

    def test_derivative_left_tie_break(self):
        sig = sm.SampledSignal.from_rows([[0.0, 0.0], [0.5, 0.0], [1.0, 1.0]])
        assert sig.derivative(0.5)[0] == 0.0
        assert sig.derivative(0.75)[0] == 2.0
        assert sig.derivative(1.5)[0] == 0.0

    def test_constant(self):
        sig = sm.SampledSignal.constant([2.0, -1.0])
        assert np.array_equal(sig.eval(0.3), [2.0, -1.0])
        assert np.all(sig.derivative(0.3) == 0.0)

    def test_validation(self):
        with pytest.raises(sm.SupminError):
            sm.SampledSignal.from_rows([[0.0, 1.0], [0.0, 2.0]])


class TestLevelConvexity:
    def test_power_norm_passes(self):
        res = sm.check_level_convexity(sm.PowerNormModel(2.0, [0.0, 0.0]),
                                       sm.SamplePlan(num_triples=300, seed=1))
        assert res.passed and not res.witnesses

    def test_data_assimilation_passes(self, rng):
        model = random_builtin_model(np.random.default_rng(5), 2)
        res = sm.check_level_convexity(model, sm.SamplePlan(num_triples=300, seed=2))
        assert res.passed

    def test_min_norms_witness_found_and_sound(self):
        model = sm.MinOfNormsModel([[2.0], [-2.0]], exponent=1.0)
        res = sm.check_level_convexity(model, sm.SamplePlan(num_triples=500, seed=3))
        assert not res.passed
        for w in res.witnesses:
            mixed = model.eval(w.x, w.eta, w.lam * w.p1 + (1 - w.lam) * w.p2)
            assert mixed > w.end_max + 1e-9 * (1.0 + w.end_max)

    def test_min_norms_brute_force_oracle(self):
        # independent grid scan certifies the midpoint witness at p1=-2, p2=2
        model = sm.MinOfNormsModel([[2.0], [-2.0]], exponent=1.0)
        found = False
        for p1 in np.linspace(-3, 3, 13):
            for p2 in np.linspace(-3, 3, 13):
                for lam in np.linspace(0.0, 1.0, 5):
                    mix = lam * p1 + (1 - lam) * p2
                    lhs = model.eval(0.0, [0.0], [mix])
                    rhs = max(model.eval(0.0, [0.0], [p1]), model.eval(0.0, [0.0], [p2]))
                    if lhs > rhs + 1e-9:
                        found = True
        assert found
        assert model.eval(0.0, [0.0], [0.0]) == 2.0  # the canonical midpoint witness


class TestGrowthBounds:
    def test_exact_equality_case(self):
        growth = sm.GrowthParams(1.0, 0.0, 0.0, 2.0, 2.0, 1.0)
        res = sm.check_growth_bounds(sm.PowerNormModel(2.0, [0.0, 0.0]),
                                     growth, sm.SamplePlan(num_triples=300, seed=4))
        assert res.passed
        assert res.lower_margin == 0.0 and res.upper_margin == 0.0

    def test_false_lower_bound_witnessed(self):
        growth = sm.GrowthParams(2.0, 0.0, 0.0, 2.0, 2.0, 1.0)
        res = sm.check_growth_bounds(sm.PowerNormModel(2.0, [0.0, 0.0]),
                                     growth, sm.SamplePlan(num_triples=300, seed=5))
        assert not res.passed
        assert all(w.side == "lower" for w in res.witnesses)

    def test_shifted_velocity_constants(self, rng):
        # |p - v|^2 >= |p|^2/2 - |v|^2 and <= 2|p|^2 + 2|v|^2
        v = np.array([1.0, -2.0])
        model = make_da(np.zeros((1, 2)), [[0.0, 0.0], [1.0, 0.0]], np.zeros((2, 2)),
                        [[0.0, *v], [1.0, *v]])
        vv = float(v @ v)
        for _ in range(2000):
            p = rng.uniform(-10, 10, size=2)
            val = float((p - v) @ (p - v))
            assert val >= 0.5 * p @ p - vv - 1e-9
            assert val <= 2.0 * p @ p + 2.0 * vv + 1e-9
        growth = sm.GrowthParams(0.5, vv, 2.0 * vv, 2.0, 2.0, 2.0)
        res = sm.check_growth_bounds(model, growth, sm.SamplePlan(num_triples=500, seed=6))
        assert res.passed

    def test_invalid_params(self):
        with pytest.raises(sm.SupminError):
            sm.GrowthParams(1.0, 0.0, 0.0, 3.0, 2.0)
        with pytest.raises(sm.SupminError):
            sm.GrowthParams(-1.0, 0.0, 0.0, 1.0, 2.0)


class TestDecomposition:
    def test_da_is_sum_of_two_squares(self, rng):
        K = rng.normal(size=(2, 3))
        A = rng.normal(size=(3, 3))
        xs = np.linspace(0.0, 1.0, 4)
        ksig = sm.SampledSignal(xs, rng.normal(size=(4, 2)))
        csig = sm.SampledSignal(xs, rng.normal(size=(4, 3)))
        model = sm.DataAssimilationModel(K, ksig, A, csig)
        for _ in range(50):
            x = rng.uniform(0.0, 1.0)
            eta = rng.normal(size=3)
            p = rng.normal(size=3)
            r = ksig.eval(x) - K @ eta
            w = p - (A @ eta + csig.eval(x))
            assert model.eval(x, eta, p) == float(r @ r + w @ w)
