import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balancenet.models import (FhnChemicalParams, FhnElectricalParams,
                               ModelDefinitionError, ScalingRule,
                               build_fhn_chemical, build_fhn_electrical,
                               build_separable_1d, eval_drift,
                               eval_interaction, scaling_gamma,
                               validate_hypotheses)

FIG1 = FhnElectricalParams(f_coeffs=(-1.0, 5.0, -4.0, 4.0), a=0.005, b=6.0,
                           g=1.0, sigma=1.0)
FIG2A = FhnChemicalParams(f_coeffs=(-1.0, 1.3, -0.3, 0.0), a=0.4, b=1.5, c=1.0,
                          tau=1.0, alpha_gain=1.0, alpha_threshold=1.0,
                          alpha_slope=0.2, E_E=3.0, E_I=-1.0,
                          g_EE=0.3, g_EI=2.0, g_IE=1.0, g_II=10.0, sigma=1.0)


def horner_oracle(coeffs, x):
    total = 0.0
    for c in coeffs:
        total = total * x + c
    return total


class TestScaling:
    def test_linear_figure_value(self):
        assert scaling_gamma(ScalingRule("linear"), 300) == 300.0

    def test_sqrt(self):
        assert scaling_gamma(ScalingRule("sqrt"), 300) == pytest.approx(17.32051, abs=1e-5)

    def test_scaled_linear(self):
        assert scaling_gamma(ScalingRule("scaled_linear", 0.1), 600) == pytest.approx(60.0)

    def test_constant(self):
        assert scaling_gamma(ScalingRule("constant", 7.5), 10 ** 6) == 7.5

    @given(st.integers(min_value=1, max_value=10 ** 9))
    @settings(max_examples=50, derandomize=True)
    def test_linear_ratio_exact(self, n):
        assert scaling_gamma(ScalingRule("linear"), n) / n == 1.0

    @pytest.mark.parametrize("rule", [ScalingRule("linear"), ScalingRule("sqrt"),
                                      ScalingRule("scaled_linear", 0.3)])
    def test_strictly_increasing(self, rule):
        vals = [scaling_gamma(rule, n) for n in (1, 2, 10, 100, 10000)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_bad_rules_rejected(self):
        with pytest.raises(ModelDefinitionError):
            ScalingRule("cubic")
        with pytest.raises(ModelDefinitionError):
            ScalingRule("constant", -1.0)
        with pytest.raises(ModelDefinitionError):
            scaling_gamma(ScalingRule("linear"), 0)


class TestElectricalModel:
    def test_drift_at_origin(self):
        model = build_fhn_electrical(FIG1)
        np.testing.assert_allclose(eval_drift(model, 0, [0.0, 0.0]), [4.0, 0.0])

    def test_drift_recovery_slope(self):
        model = build_fhn_electrical(FIG1)
        np.testing.assert_allclose(eval_drift(model, 0, [1.0, 0.0]), [4.0, 0.03])

    def test_drift_matches_horner_oracle(self):
        model = build_fhn_electrical(FIG1)
        for x, y in [(2.0, 1.0), (-1.5, 0.3), (3.7, -2.0)]:
            expect = horner_oracle(FIG1.f_coeffs, x) - y
            got = eval_drift(model, 0, [x, y])
            assert got[0] == pytest.approx(expect, rel=1e-12)
            assert got[1] == pytest.approx(FIG1.a * (FIG1.b * x - y), rel=1e-12)

    def test_structure(self):
        model = build_fhn_electrical(FIG1, n=300)
        assert model.n_populations == 1
        assert model.populations[0].dim == 2
        assert model.coupling[0, 0] == 1.0
        assert model.populations[0].sigma[0, 0] == 1.0

    def test_interaction_voltage_difference(self):
        model = build_fhn_electrical(FIG1)
        np.testing.assert_allclose(
            eval_interaction(model, 0, 0, [1.0, 9.0], [3.0, -4.0]), [2.0, 0.0])

    @given(st.floats(-10, 10), st.floats(-10, 10))
    @settings(max_examples=50, derandomize=True)
    def test_interaction_vanishes_on_diagonal(self, x, y):
        model = build_fhn_electrical(FIG1)
        np.testing.assert_array_equal(
            eval_interaction(model, 0, 0, [x, y], [x, y]), [0.0, 0.0])

    def test_zero_coupling_allowed(self):
        params = FhnElectricalParams((-1.0, 5.0, -4.0, 4.0), 0.005, 6.0, 0.0, 1.0)
        model = build_fhn_electrical(params)
        assert model.coupling[0, 0] == 0.0

    def test_invariants_rejected(self):
        with pytest.raises(ModelDefinitionError):
            FhnElectricalParams((1.0, 0.0, 0.0, 0.0), 0.1, 1.0, 1.0, 1.0)
        with pytest.raises(ModelDefinitionError):
            FhnElectricalParams((-1.0, 0.0, 0.0, 0.0), -0.1, 1.0, 1.0, 1.0)
        with pytest.raises(ModelDefinitionError):
            FhnElectricalParams((-1.0, 0.0, 0.0, 0.0), 0.1, 1.0, -1.0, 1.0)


class TestChemicalModel:
    def test_signed_matrix_figure_values(self):
        model = build_fhn_chemical(FIG2A)
        np.testing.assert_allclose(model.ghat, [[0.3, 2.0], [-1.0, -10.0]])

    def test_coupling_is_target_major_transpose(self):
        model = build_fhn_chemical(FIG2A)
        np.testing.assert_allclose(model.coupling, model.ghat.T)

    @given(st.tuples(*[st.floats(0, 50) for _ in range(4)]))
    @settings(max_examples=50, derandomize=True)
    def test_source_sign_structure(self, mags):
        gee, gei, gie, gii = mags
        params = FhnChemicalParams((-1.0, 1.3, -0.3, 0.0), 0.4, 1.5, 1.0, 1.0,
                                   1.0, 1.0, 0.2, 3.0, -1.0, gee, gei, gie, gii, 1.0)
        model = build_fhn_chemical(params)
        # source-E column of the target-major matrix is nonnegative,
        # source-I column nonpositive
        assert np.all(model.coupling[:, 0] >= 0)
        assert np.all(model.coupling[:, 1] <= 0)

    def test_interaction_term(self):
        model = build_fhn_chemical(FIG2A)
        x = np.array([0.5, 1.0, 0.2])
        y = np.array([-2.0, 0.0, 0.8])
        # source population E: (x0 - E_E) * s_source
        np.testing.assert_allclose(eval_interaction(model, 1, 0, x, y),
                                   [(0.5 - 3.0) * 0.8, 0.0, 0.0])
        # source population I
        np.testing.assert_allclose(eval_interaction(model, 0, 1, x, y),
                                   [(0.5 - (-1.0)) * 0.8, 0.0, 0.0])

    def test_uncoupled_when_zero(self):
        params = FhnChemicalParams((-1.0, 1.3, -0.3, 0.0), 0.4, 1.5, 1.0, 1.0,
                                   1.0, 1.0, 0.2, 3.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
        model = build_fhn_chemical(params)
        assert np.all(model.coupling == 0.0)

    def test_s_equation_decay(self):
        # at s = 1 with alpha(x) ~= 0 the synapse decays at rate 1/tau
        model = build_fhn_chemical(FIG2A)
        d = eval_drift(model, 0, [-50.0, 0.0, 1.0])
        assert d[2] == pytest.approx(-1.0 / FIG2A.tau, abs=1e-9)

    def test_invariants_rejected(self):
        with pytest.raises(ModelDefinitionError):
            FhnChemicalParams((-1.0, 0, 0, 0), 0.4, 1.5, 1.0, 0.0, 1.0, 1.0, 0.2,
                              3.0, -1.0, 1, 1, 1, 1, 1.0)
        with pytest.raises(ModelDefinitionError):
            FhnChemicalParams((-1.0, 0, 0, 0), 0.4, 1.5, 1.0, 1.0, 1.0, 1.0, 0.2,
                              2.0, 2.0, 1, 1, 1, 1, 1.0)
        with pytest.raises(ModelDefinitionError):
            FhnChemicalParams((-1.0, 0, 0, 0), 0.4, 1.5, 1.0, 1.0, 1.0, 1.0, 0.2,
                              3.0, -1.0, -0.1, 1, 1, 1, 1.0)


class TestSeparableModel:
    def test_alpha_zero_at_reference(self):
        m = build_separable_1d(0.1, E=0.0)
        assert m.alpha(0.0) == 0.0

    def test_f_zero_at_one(self):
        m = build_separable_1d(0.1)
        assert m.f(1.0) == 0.0

    def test_beta_bounds_grid_scan(self):
        m = build_separable_1d(0.1, beta0=0.5, beta1=1.0)
        ys = np.linspace(-50, 50, 4001)
        vals = m.beta(ys)
        assert vals.min() >= 0.5
        assert vals.max() <= 1.5

    def test_beta0_nonpositive_rejected(self):
        with pytest.raises(ModelDefinitionError):
            build_separable_1d(0.1, beta0=0.0)

    def test_epsilon_range(self):
        with pytest.raises(ModelDefinitionError):
            build_separable_1d(0.0)
        with pytest.raises(ModelDefinitionError):
            build_separable_1d(1.5)


class TestValidateHypotheses:
    def test_default_drift_bound_fitted_at_one(self):
        m = build_separable_1d(0.1)
        report = validate_hypotheses(m, L=10.0, grid=2001)
        chk = report.check("drift-confinement")
        assert chk.satisfied
        assert dict(chk.constants)["C0"] == pytest.approx(1.0, abs=2e-3)

    def test_default_beta_floor(self):
        m = build_separable_1d(0.1, beta0=0.5, beta1=1.0)
        report = validate_hypotheses(m, L=10.0)
        chk = report.check("interaction-kernel-bounds")
        assert chk.satisfied
        # the scan minimum sits at the domain edge, just above the infimum beta0
        assert 0.5 <= dict(chk.constants)["K_inv"] <= 0.5 + 1e-3
        assert dict(chk.constants)["beta_max"] <= 1.5

    def test_default_slopes(self):
        m = build_separable_1d(0.1)
        chk = validate_hypotheses(m, L=10.0).check("interaction-slope-limits")
        assert chk.satisfied
        consts = dict(chk.constants)
        assert consts["C1"] == pytest.approx(1.0, abs=1e-6)
        assert consts["C2"] == pytest.approx(1.0, abs=1e-6)

    def test_bv_positivity_violated_with_witness(self):
        # bounded beta with sign-changing alpha cannot satisfy the uniform
        # positivity of beta' * alpha; the scan must find a witness
        m = build_separable_1d(0.1)
        chk = validate_hypotheses(m, L=10.0).check("bv-coupling-positivity")
        assert not chk.satisfied
        assert chk.witness is not None
        h = 1e-5
        beta_prime = (m.beta(chk.witness + h) - m.beta(chk.witness - h)) / (2 * h)
        assert beta_prime * m.alpha(chk.witness) <= 0.0

    def test_deterministic(self):
        m = build_separable_1d(0.1)
        r1 = validate_hypotheses(m, L=8.0, grid=512)
        r2 = validate_hypotheses(m, L=8.0, grid=512)
        assert r1 == r2

    def test_rejects_bad_domain(self):
        m = build_separable_1d(0.1)
        with pytest.raises(ModelDefinitionError):
            validate_hypotheses(m, L=-1.0)
        with pytest.raises(ModelDefinitionError):
            validate_hypotheses(m, L=1.0, grid=32)
