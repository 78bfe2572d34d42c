import numpy as np
import pytest

from gclab.conditions import (
    CESARO_THRESHOLD,
    GcipParams,
    LagCovariance,
    assoc_cesaro_cov,
    assoc_cesaro_cov13,
    cesaro_mean,
    gcep_indicator_conditions,
    gcip_c1,
    gcip_c2,
    kronecker_weighted,
    long_run_variance,
    phi_decay_check,
    variance_expansion,
)
from gclab.errors import (
    AssociationViolationError,
    InvalidInputError,
    InvalidParameterError,
)
from gclab.generators import (
    make_constant_uniform,
    make_gaussian_ar1,
    phi_mixing_profile,
)
from gclab.rngs import stream

IID = LagCovariance.from_sequence([1.0])
GEOMETRIC = LagCovariance(fn=lambda j: 0.5 ** np.asarray(j, dtype=float))
PERFECT = LagCovariance.constant(1.0)


def brute_force_variance(gvals, q):
    return sum(gvals[abs(i - j)] for i in range(q) for j in range(q))


# ---------------------------------------------------------------------------
# variance expansion


def test_variance_expansion_iid():
    assert variance_expansion(IID, 5) == 5.0


def test_variance_expansion_two_terms_by_hand():
    assert variance_expansion(GEOMETRIC, 2) == pytest.approx(3.0)


def test_variance_expansion_q_one_any_gamma():
    for gamma in (IID, GEOMETRIC, PERFECT):
        assert variance_expansion(gamma, 1) == gamma(0)


def test_variance_expansion_matches_brute_force_double_sum():
    rng = stream(99)
    for _ in range(20):
        gvals = rng.uniform(-1.0, 1.0, size=60)
        gvals[0] = abs(gvals[0])
        gamma = LagCovariance.from_sequence(gvals)
        for q in (1, 2, 7, 25, 50):
            assert variance_expansion(gamma, q) == pytest.approx(
                brute_force_variance(gvals, q), abs=1e-10
            )


def test_variance_expansion_rejects_bad_q():
    with pytest.raises(InvalidParameterError):
        variance_expansion(IID, 0)


# ---------------------------------------------------------------------------
# the two normalized-variance conditions


def test_params_validation():
    with pytest.raises(InvalidParameterError):
        GcipParams(delta=3.0)
    with pytest.raises(InvalidParameterError):
        GcipParams(delta=0.0)
    assert GcipParams(delta=0.5).nu == pytest.approx(0.25)


def test_c1_iid_is_flat_bounded():
    report = gcip_c1(IID, GcipParams(delta=1.0, q_max=500))
    assert np.allclose(report.statistic, 1.0)
    assert report.verdict == "bounded"
    assert report.running_sup == 1.0


def test_c1_ar1_long_run_variance_limit():
    gamma = LagCovariance.from_model(make_gaussian_ar1(0.6))
    report = gcip_c1(gamma, GcipParams(delta=1.0, q_max=1000))
    assert report.running_sup <= 4.0
    assert report.statistic[-1] == pytest.approx(4.0, abs=0.05)
    assert np.all(np.diff(report.statistic) >= -1e-12)  # converges upward
    assert report.verdict == "bounded"


def test_c1_perfect_dependence_diverges():
    report = gcip_c1(PERFECT, GcipParams(delta=1.0, q_max=500))
    assert np.allclose(report.statistic, report.q_grid)  # q^2 / q
    assert report.verdict == "diverging"


def test_c2_iid_decays():
    report = gcip_c2(IID, GcipParams(delta=1.0, q_max=500))
    q = report.q_grid
    assert np.allclose(report.statistic, (2 * q + 1) / q**2)
    assert report.verdict == "bounded"


def test_c2_perfect_dependence_stays_bounded():
    report = gcip_c2(PERFECT, GcipParams(delta=1.0, q_max=500))
    q = report.q_grid
    assert np.allclose(report.statistic, (2 * q + 1) ** 2 / q**2)
    assert report.verdict == "bounded"
    assert report.statistic[-1] == pytest.approx(4.0, abs=0.02)


def test_c2_smallest_block_by_hand():
    report = gcip_c2(GEOMETRIC, GcipParams(delta=1.0, q_max=4))
    expected_q1 = max(variance_expansion(GEOMETRIC, m) for m in (1, 2, 3))
    assert report.statistic[0] == pytest.approx(expected_q1)


def test_m_dependent_c1_bounded_for_small_delta():
    gamma = LagCovariance.from_sequence([1.0, 0.6, 0.2])  # 2-dependent
    for delta in (0.25, 0.5, 1.0):
        report = gcip_c1(gamma, GcipParams(delta=delta, q_max=400))
        assert report.verdict == "bounded", delta


def test_report_serialization_contract():
    report = gcip_c1(IID, GcipParams(delta=1.0, q_max=10))
    blob = report.to_dict()
    assert set(blob) == {"condition_id", "params", "q_grid", "statistic", "sup", "slope", "verdict"}
    rows = list(report.csv_rows())
    assert rows[0].startswith("gcip-c1(delta=1),1,")


# ---------------------------------------------------------------------------
# indicator conditions across thresholds


def test_gcep_iid_statistic_is_variance_exactly(iid_model):
    scan = gcep_indicator_conditions(iid_model, [0.25, 0.5], GcipParams(delta=1.0, q_max=50))
    for x, report in zip(scan.x_grid, scan.c1_reports):
        fx = float(iid_model.marginal_cdf(x))
        assert np.allclose(report.statistic, fx * (1 - fx), atol=1e-15)
        assert report.verdict == "bounded"


def test_gcep_markov_bounded(two_state_model):
    scan = gcep_indicator_conditions(
        two_state_model, [0.5], GcipParams(delta=1.0, q_max=300)
    )
    assert scan.worst_c1.verdict == "bounded"
    assert scan.worst_c2.verdict == "bounded"


def test_gcep_perfect_dependence_diverges():
    model = make_constant_uniform()
    scan = gcep_indicator_conditions(model, [0.5], GcipParams(delta=1.0, q_max=300))
    assert scan.worst_c1.verdict == "diverging"
    # gamma_x(j) = 1/4 at the median
    assert scan.c1_reports[0].statistic[-1] == pytest.approx(300 * 0.25, rel=1e-12)


# ---------------------------------------------------------------------------
# association Cesaro conditions


def test_cesaro13_iid_identically_zero():
    report = assoc_cesaro_cov13(IID, 100)
    assert np.all(report.a == 0.0)
    assert report.verdict == "to-zero"


def test_cesaro13_geometric_hand_sum():
    gamma = LagCovariance(fn=lambda j: 8.0 ** -np.asarray(j, dtype=float))
    report = assoc_cesaro_cov13(gamma, 1000)
    a4 = report.a[report.q_grid == 4][0]
    assert a4 == pytest.approx((1 / 4) * (1 / 2 + 1 / 4 + 1 / 8), abs=1e-12)
    assert report.verdict == "to-zero"


def test_cesaro13_constant_fails():
    report = assoc_cesaro_cov13(PERFECT, 500)
    assert report.final == pytest.approx(1.0, abs=0.01)
    assert report.verdict == "fails"


def test_cesaro_ar1_geometric_sum():
    gamma = LagCovariance.from_model(make_gaussian_ar1(0.6))
    report = assoc_cesaro_cov(gamma, 1000)
    assert report.final == pytest.approx(0.6 / 0.4 / 1000, rel=0.01)
    assert report.verdict == "to-zero"


def test_cesaro_slow_decay_fails_threshold():
    gamma = LagCovariance(fn=lambda j: 1.0 / np.log(np.asarray(j, dtype=float) + 2.0))
    report = assoc_cesaro_cov(gamma, 10_000)
    assert report.final > CESARO_THRESHOLD
    assert report.verdict == "fails"


def test_cesaro_rejects_negative_covariance():
    gamma = LagCovariance.from_sequence([1.0, 0.5, -0.3])
    with pytest.raises(AssociationViolationError):
        assoc_cesaro_cov13(gamma, 50)


def test_cesaro_depends_only_on_gamma_values():
    seq = [1.0, 0.4, 0.16, 0.064]
    a = assoc_cesaro_cov13(LagCovariance.from_sequence(seq), 200)
    b = assoc_cesaro_cov13(
        LagCovariance(fn=LagCovariance.from_sequence(seq).fn, label="other"), 200
    )
    assert np.array_equal(a.a, b.a)


# ---------------------------------------------------------------------------
# long-run variance


def test_long_run_variance_uniform_transform(iid_model):
    from gclab.generators import transformed_gamma

    out = long_run_variance(LagCovariance(fn=transformed_gamma(iid_model)), 50)
    assert out.value == pytest.approx(1 / 12, abs=1e-14)
    assert not out.tail_flag


def test_long_run_variance_geometric():
    out = long_run_variance(GEOMETRIC, 40)
    assert out.value == pytest.approx(3.0, abs=1e-10)
    assert not out.tail_flag
    assert out.tail_estimate < 1e-6


def test_long_run_variance_constant_flags_tail():
    out = long_run_variance(PERFECT, 100)
    assert out.value == pytest.approx(201.0)
    assert out.tail_flag


# ---------------------------------------------------------------------------
# mixing decay


def test_phi_decay_m_dependent_passes_everywhere():
    profile = np.array([0.5, 0.25, 0.0, 0.0, 0.0, 0.0])
    for delta in (0.1, 0.5, 0.9):
        assert phi_decay_check(profile, delta).passed


def test_phi_decay_geometric_chain_passes(two_state_spec):
    profile = phi_mixing_profile(two_state_spec, 256)
    for delta in np.arange(0.1, 1.0, 0.1):
        result = phi_decay_check(profile, float(delta))
        assert result.passed, delta


def test_phi_decay_passes_for_any_gapped_chain():
    from gclab.generators import MarkovChainSpec

    specs = [
        MarkovChainSpec.make(
            [[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.2, 0.7]], [0.0, 1.0, 2.0]
        ),
        MarkovChainSpec.make([[0.99, 0.01], [0.03, 0.97]], [0.0, 1.0]),
    ]
    for spec in specs:
        gap = 1.0 - np.sort(np.abs(np.linalg.eigvals(spec.transition)))[-2]
        assert gap > 0
        # r_max large enough that the geometric tail dominates the fit window
        r_max = int(60.0 / gap)
        profile = phi_mixing_profile(spec, r_max)
        for delta in np.arange(0.1, 1.0, 0.2):
            assert phi_decay_check(profile, float(delta)).passed, (spec.values, delta)


def test_phi_decay_polynomial_fails_fast_requirement():
    r = np.arange(1, 400, dtype=float)
    profile = np.minimum(1.0, r**-2.0)
    result = phi_decay_check(profile, 0.9)
    assert not result.passed
    assert result.fitted_exponent == pytest.approx(-2.0, abs=0.01)
    assert result.required_exponent == pytest.approx(-40.0)


def test_phi_decay_validates_inputs():
    with pytest.raises(InvalidInputError):
        phi_decay_check(np.array([0.1, 0.5]), 0.5)  # increasing
    with pytest.raises(InvalidParameterError):
        phi_decay_check(np.array([0.5, 0.1]), 1.0)  # delta out of range


# ---------------------------------------------------------------------------
# sequence lemmas


def test_cesaro_mean_constant_and_harmonic():
    assert np.allclose(cesaro_mean(np.full(5, 3.0)), 3.0)
    y = cesaro_mean(1.0 / np.arange(1, 200))
    assert y[3] == pytest.approx(25 / 48)
    assert y[-1] < 0.05


def test_cesaro_mean_alternating():
    y = cesaro_mean(np.array([-1.0, 1.0] * 10))
    assert y[-1] == 0.0


def test_kronecker_alternating_harmonic():
    n = np.arange(1, 101, dtype=float)
    x = (-1.0) ** n / n
    z = kronecker_weighted(n, x)
    assert abs(z[-1]) < 0.02


def test_kronecker_zero_and_identity_cases():
    b = np.ones(10)
    x = 0.5 ** np.arange(1, 11)
    z = kronecker_weighted(b, x)
    assert z[-1] == pytest.approx(x.sum())
    assert np.all(kronecker_weighted(b, np.zeros(10)) == 0.0)


def test_kronecker_rejects_bad_weights():
    with pytest.raises(InvalidInputError):
        kronecker_weighted(np.array([1.0, 0.5]), np.array([1.0, 1.0]))
