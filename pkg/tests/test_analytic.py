import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from auxmean import analytic as A
from auxmean.errors import EtaUndefined, ZeroMse
from auxmean.estimators import EstimatorSpec, Family
from auxmean.sampling import MomentSummary, PopulationFrame, design_params, enumerate_index_matrix, summarize


def pre_vs_mean(mse, m, d):
    return A.pre(A.mse_mean(m, d), mse)


# ---------------------------------------------------------------- published populations


def test_mean_population_1(pop1):
    m, d = pop1
    assert A.mse_mean(m, d) == pytest.approx(843750.0, rel=1e-12)


def test_ratio_population_1(pop1):
    m, d = pop1
    assert A.mse_ratio(m, d) == pytest.approx(656250.0, rel=1e-12)
    assert pre_vs_mean(A.mse_ratio(m, d), m, d) == pytest.approx(128.571, abs=1e-3)


def test_regression_population_1(pop1):
    m, d = pop1
    assert A.mse_regression_family(m, d) == pytest.approx(160312.5, rel=1e-12)


@pytest.mark.parametrize(
    "fn, p1, p2",
    [
        (A.mse_ratio, 128.571, 156.190),
        (A.mse_singh_tailor, 127.404, 162.289),
        (A.mse_bahl_tuteja, 113.065, 197.667),
        (A.mse_regression_family, 526.316, 208.264),
        (A.msemin_proposed, 863.816, 214.473),
    ],
)
def test_published_pre(fn, p1, p2, pop1, pop2):
    for (m, d), expected in ((pop1, p1), (pop2, p2)):
        assert pre_vs_mean(fn(m, d), m, d) == pytest.approx(expected, abs=1e-3)


@pytest.mark.parametrize("index, expected", [(1, 481.283), (2, 487.231), (3, 520.900), (4, 481.415), (5, 514.286)])
def test_kadilar_cingi_population_1(index, expected, pop1):
    m, d = pop1
    assert pre_vs_mean(A.mse_kadilar_cingi("I", index, m, d), m, d) == pytest.approx(expected, abs=1e-3)


def test_theta_family_published(pop1):
    m, d = pop1
    theta = A.theta_of(1.0, m.cx, m.xbar)
    assert pre_vs_mean(A.theta_family_mse("ratio", theta, m, d), m, d) == pytest.approx(126.100, abs=1e-3)
    assert pre_vs_mean(A.theta_family_mse("exponential", theta, m, d), m, d) == pytest.approx(112.019, abs=1e-3)


def test_msemin_population_1(pop1):
    m, d = pop1
    assert A.msemin_proposed(m, d) == pytest.approx(97676.6, abs=0.5)


def test_optimum_weights_published(pop1, pop2):
    w1 = A.optimum_weights(1.0, 1.0, *pop1)
    w2 = A.optimum_weights(1.0, 1.0, *pop2)
    assert w1.q10 == pytest.approx(0.60929, abs=1e-4)
    assert w2.q10 == pytest.approx(0.97105, abs=1e-4)
    assert w2.q20 == pytest.approx(-0.5394, abs=1e-3)
    # printed 70.689; direct evaluation 0.60929 * 10 * 11.5
    assert w1.q20 == pytest.approx(70.068, abs=1e-2)


def test_proposed_at_optimum_equals_closed_form(pop1):
    m, d = pop1
    w = A.optimum_weights(1.0, 1.0, m, d)
    assert A.mse_proposed_general(w.q10, w.q20, 1.0, 1.0, m, d) == pytest.approx(97676.6, abs=0.5)


# ---------------------------------------------------------------- degenerate cases


def test_census_and_constant_y(pop1):
    m, _ = pop1
    census = design_params(10, 10)
    for fn in (A.mse_mean, A.mse_ratio, A.mse_bahl_tuteja, A.mse_regression_family, A.msemin_proposed):
        assert fn(m, census) == 0
    flat = MomentSummary.from_coefficients(10.0, 5.0, 0.0, 0.3, 0.0, 3.0)
    assert A.mse_mean(flat, design_params(100, 10)) == 0


def test_no_auxiliary_signal():
    m = MomentSummary.from_coefficients(10.0, 5.0, 0.4, 0.0, 0.0, 3.0)
    d = design_params(100, 10)
    assert A.mse_ratio(m, d) == A.mse_mean(m, d)
    assert A.mse_bahl_tuteja(m, d) == A.mse_mean(m, d)


def test_singh_tailor_rho_zero_equals_ratio():
    m = MomentSummary.from_coefficients(10.0, 5.0, 0.4, 0.3, 0.0, 3.0)
    d = design_params(100, 10)
    assert A.mse_singh_tailor(m, d) == pytest.approx(A.mse_ratio(m, d), rel=1e-15)


def test_eta_undefined():
    m = MomentSummary.from_coefficients(10.0, 0.5, 0.4, 0.3, -0.5, 3.0)
    with pytest.raises(EtaUndefined):
        A.mse_singh_tailor(m, design_params(100, 10))


def test_perfect_correlation():
    for r in (1.0, -1.0):
        m = MomentSummary.from_coefficients(10.0, 5.0, 0.4, 0.3, r, 3.0)
        d = design_params(100, 10)
        assert A.mse_regression_family(m, d) == 0
        assert A.msemin_proposed(m, d) == 0


def test_kc_zero_multiplier_equals_regression(pop2):
    m, d = pop2
    assert A.kc_mse(0.0, m, d) == pytest.approx(A.mse_regression_family(m, d), rel=1e-15)


def test_theta_zero_is_mean(pop2):
    m, d = pop2
    assert A.theta_family_mse("ratio", 0.0, m, d) == A.mse_mean(m, d)
    assert A.theta_family_mse("exponential", 0.0, m, d) == A.mse_mean(m, d)


def test_starred_constants(pop1):
    m, _ = pop1
    assert A.starred_constant("I", 1, m) == 1.0
    assert A.starred_constant("I", 5, m) == pytest.approx(50.0 / 100.0)
    assert A.starred_constant("II", 1, m) == pytest.approx(25.0 / 25.9)
    tc = A.transform_constants(1.0, 0.0, 3, m)
    assert tc.theta == 1.0 and tc.eta == pytest.approx(25 / 25.9)


def test_pre_rules():
    assert A.pre(5.0, 5.0) == 100.0
    assert A.pre(3.0, 1.5) == 200.0
    with pytest.raises(ZeroMse):
        A.pre(1.0, 0.0)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6), st.floats(1e-3, 1e3))
def test_pre_homogeneous(u, v, c):
    assert A.pre(c * u, c * v) == pytest.approx(A.pre(u, v), rel=1e-12)


# ---------------------------------------------------------------- reductions


def test_proposed_general_reductions(pop2):
    m, d = pop2
    assert A.mse_proposed_general(1, 0, 1, 1, m, d) == pytest.approx(A.mse_ratio(m, d), rel=1e-14)
    assert A.mse_proposed_general(1, 0, 0, 1, m, d) == pytest.approx(A.mse_bahl_tuteja(m, d), rel=1e-14)


def test_kc_is_proposed_with_population_slope(pop2):
    m, d = pop2
    beta = m.syx / m.sx**2
    for lam in (0.0, 0.5, 1.0):
        theta = A.theta_of(1.0, m.beta2x, m.xbar)
        u = A.mse_proposed_general(1.0, beta, lam, theta, m, d)
        v = A.kc_mse(theta * (1 + lam) / 2, m, d)
        assert u == pytest.approx(v, rel=1e-12)


def test_analytic_mse_dispatch(pop2):
    m, d = pop2
    assert A.analytic_mse(EstimatorSpec(Family.RATIO), m, d).mse == A.mse_ratio(m, d)
    kc = A.analytic_mse(EstimatorSpec(Family.KADILAR_CINGI_II, variant_index=2), m, d)
    assert kc.mse == A.mse_kadilar_cingi("II", 2, m, d)
    assert A.minimum_mse("proposed", m, d).is_minimized


# ---------------------------------------------------------------- independent oracle:
# exact SRSWOR moments of the linearized estimators on a small frame


@pytest.fixture(scope="module")
def small_population():
    rng = np.random.default_rng(42)
    x = rng.uniform(5, 15, 9)
    y = 3 + 2 * x + rng.normal(0, 3, 9)
    frame = PopulationFrame(y=y, x=x)
    n = 4
    idx = enumerate_index_matrix(frame.N, n)
    m = summarize(frame)
    e0 = frame.y[idx].mean(axis=1) / m.ybar - 1
    e1 = frame.x[idx].mean(axis=1) / m.xbar - 1
    return m, design_params(frame.N, n), e0, e1


def test_linearized_moments(small_population):
    m, d, e0, e1 = small_population
    assert np.mean(e0**2) == pytest.approx(d.f1 * m.cy**2, rel=1e-10)
    assert np.mean(e1**2) == pytest.approx(d.f1 * m.cx**2, rel=1e-10)
    assert np.mean(e0 * e1) == pytest.approx(d.f1 * m.rho * m.cy * m.cx, rel=1e-10)


def test_first_order_formulas_match_enumerated_linearizations(small_population):
    m, d, e0, e1 = small_population
    Y, X = m.ybar, m.xbar
    eta = A.eta_of(m)
    beta = m.syx / m.sx**2

    def mse(lin):
        return float(np.mean((lin - Y) ** 2))

    assert A.mse_ratio(m, d) == pytest.approx(mse(Y * (1 + e0 - e1)), rel=1e-10)
    assert A.mse_singh_tailor(m, d) == pytest.approx(mse(Y * (1 + e0 - eta * e1)), rel=1e-10)
    assert A.mse_bahl_tuteja(m, d) == pytest.approx(mse(Y * (1 + e0 - e1 / 2)), rel=1e-10)
    assert A.mse_regression_family(m, d) == pytest.approx(mse(Y * (1 + e0) - beta * X * e1), rel=1e-10)
    k = A.starred_constant("I", 3, m)
    kci = Y * (1 + e0) - beta * X * e1 - Y * k * e1
    assert A.mse_kadilar_cingi("I", 3, m, d) == pytest.approx(mse(kci), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2), st.floats(-20, 20), st.floats(0, 1), st.floats(0.2, 5), st.floats(0, 20))
def test_proposed_general_matches_enumerated_linearization(small_population, q1, q2, lam, a, b):
    m, d, e0, e1 = small_population
    Y, X = m.ybar, m.xbar
    theta = A.theta_of(a, b, X)
    lin = Y + (q1 - 1) * Y + q1 * Y * (e0 - theta * (1 + lam) / 2 * e1) - q2 * X * e1
    oracle = float(np.mean((lin - Y) ** 2))
    assert A.mse_proposed_general(q1, q2, lam, theta, m, d) == pytest.approx(oracle, rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------- optimality


def _grad(fun, q1, q2, h1, h2):
    g1 = (fun(q1 + h1, q2) - fun(q1 - h1, q2)) / (2 * h1)
    g2 = (fun(q1, q2 + h2) - fun(q1, q2 - h2)) / (2 * h2)
    return g1, g2


@pytest.mark.parametrize("lam, a_b", [(1.0, (1.0, 0.0)), (0.3, (1.0, "cx")), (0.0, (2.0, "beta2x"))])
def test_gradient_vanishes_at_optimum(lam, a_b, pop1, pop2):
    for m, d in (pop1, pop2):
        b = {"cx": m.cx, "beta2x": m.beta2x}.get(a_b[1], a_b[1])
        theta = A.theta_of(a_b[0], b, m.xbar)
        w = A.optimum_weights(lam, theta, m, d)

        def fun(q1, q2):
            return A.mse_proposed_general(q1, q2, lam, theta, m, d)

        # relative: ∂/∂q1 against Ȳ², ∂/∂q2 as the MSE change per step h2
        h1 = 1e-4
        h2 = 1e-4 * max(1.0, abs(w.q20))
        g1, g2 = _grad(fun, w.q10, w.q20, h1, h2)
        assert abs(g1) / m.ybar**2 < 1e-6
        assert abs(g2) * h2 / fun(w.q10, w.q20) < 1e-6


def test_theta_free_reading_is_not_stationary(pop2):
    m, d = pop2
    theta = A.theta_of(1.0, m.beta2x, m.xbar)
    w = A.optimum_weights(1.0, theta, m, d)

    def fun(q1, q2):
        return A.mse_proposed_general(q1, q2, 1.0, theta, m, d, theta_free_cross_term=True)

    g1, _ = _grad(fun, w.q10, w.q20, 1e-4, 1e-4)
    assert abs(g1) / m.ybar**2 > 1e-4
    # at θ = 1 the readings coincide
    assert A.mse_proposed_general(0.7, 0.2, 0.5, 1.0, m, d) == A.mse_proposed_general(
        0.7, 0.2, 0.5, 1.0, m, d, theta_free_cross_term=True
    )


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
def test_numeric_minimizer_agrees(lam, pop1, pop2):
    for m, d in (pop1, pop2):
        theta = A.theta_of(1.0, m.cx, m.xbar)
        w = A.optimum_weights(lam, theta, m, d)
        res = minimize(
            lambda q: A.mse_proposed_general(q[0], q[1], lam, theta, m, d),
            x0=[1.0, 0.0],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000, "maxfev": 40000},
        )
        assert res.fun == pytest.approx(A.msemin_proposed(m, d), rel=1e-6)
        assert res.x[0] == pytest.approx(w.q10, abs=1e-4)
        assert res.x[1] == pytest.approx(w.q20, rel=1e-3, abs=1e-4)


# ---------------------------------------------------------------- random valid summaries

summaries = st.builds(
    lambda ybar, xbar, cy, cx, rho, b2: MomentSummary.from_coefficients(ybar, xbar, cy, cx, rho, b2),
    st.floats(0.5, 1000),
    st.floats(0.5, 1000),
    st.floats(0.01, 2),
    st.floats(0.01, 2),
    st.floats(-0.99, 0.99),
    st.floats(1, 60),
)
designs = st.tuples(st.integers(2, 400), st.floats(0.01, 0.99)).map(
    lambda t: design_params(max(t[0], 2), max(1, min(t[0] - 1, int(t[0] * t[1]))))
)


@settings(max_examples=200, deadline=None)
@given(summaries, designs)
def test_efficiency_chain(m, d):
    lo = A.msemin_proposed(m, d)
    mid = A.mse_regression_family(m, d)
    hi = A.mse_mean(m, d)
    assert lo <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(summaries, designs, st.integers(1, 5))
def test_margins_positive(m, d, index):
    margins = {mg.comparison: mg for mg in A.efficiency_margins(m, d, index)}
    assert len(margins) == 7
    assert all(mg.holds for mg in margins.values())
    assert margins["vs_gupta_shabbir"].margin == 0.0
    for key in ("vs_kadilar_cingi_1", "vs_kadilar_cingi_2", "vs_regression"):
        assert margins[key].margin > 0


@settings(max_examples=100, deadline=None)
@given(summaries, designs)
def test_margins_agree_in_sign_with_direct_differences(m, d):
    mm = A.msemin_proposed(m, d)
    margins = {mg.comparison: mg.margin for mg in A.efficiency_margins(m, d)}
    assert margins["vs_ratio"] == pytest.approx(A.mse_ratio(m, d) - mm, rel=1e-9, abs=1e-12 * A.mse_mean(m, d))
    assert margins["vs_exponential"] == pytest.approx(
        A.mse_bahl_tuteja(m, d) - mm, rel=1e-9, abs=1e-12 * A.mse_mean(m, d)
    )
    D = d.f1 * m.cy**2 * (1 - m.rho**2)
    direct_kc = A.mse_kadilar_cingi("I", 1, m, d) - mm
    assert margins["vs_kadilar_cingi_1"] == pytest.approx(direct_kc * (1 + D), rel=1e-9)


def test_margin_rho_zero():
    m = MomentSummary.from_coefficients(10.0, 5.0, 0.4, 0.3, 0.0, 3.0)
    d = design_params(100, 10)
    mg = A.efficiency_margins(m, d)[0]
    assert mg.comparison == "vs_mean"
    assert mg.margin == pytest.approx(d.f1 * 0.4**2)


def test_margin_kc_population_2(pop2):
    m, d = pop2
    f1, Y = d.f1, m.ybar
    D = f1 * m.cy**2 * (1 - m.rho**2)
    expect = f1 * Y**2 * 1.0 * m.cx**2 * (1 + D) + (f1 * Y * m.cy**2 * (1 - m.rho**2)) ** 2
    got = {mg.comparison: mg.margin for mg in A.efficiency_margins(m, d)}["vs_kadilar_cingi_1"]
    assert got == pytest.approx(expect, rel=1e-12)
    assert got > 0


@settings(max_examples=50, deadline=None)
@given(summaries, designs)
def test_minimality_random_weights(m, d):
    rng = np.random.default_rng(0)
    w = A.optimum_weights(1.0, 1.0, m, d)
    mm = A.msemin_proposed(m, d)
    q1 = w.q10 + rng.normal(0, 0.5, 200)
    q2 = w.q20 + rng.normal(0, 1 + abs(w.q20), 200)
    vals = A.mse_proposed_general(q1, q2, 1.0, 1.0, m, d)
    assert np.all(vals >= mm - 1e-9 * abs(mm))


def test_optimum_q10_in_unit_interval(pop1, pop2):
    for m, d in (pop1, pop2):
        assert 0 < A.optimum_weights(0.5, 0.9, m, d).q10 <= 1
    assert math.isclose(A.optimum_weights(1, 1, *pop1).theta, 1.0)
