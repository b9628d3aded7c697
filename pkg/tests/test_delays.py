import numpy as np
import pytest

from delaypred import (DEFAULT_RANGES, DEMO_D1, DEMO_D2, AssumptionReport,
                       DelayPair, DelayParams, LinearDelay, ParamRanges,
                       TabulatedDelay, check_assumptions, phi, phi_slope,
                       sample_delay)
from delaypred.errors import RejectionLimitExceeded


def test_demo_values_at_zero():
    # a + b + alpha*sin(varphi), written out by hand
    assert DEMO_D1.value(0.0) == pytest.approx(
        0.4 + 0.31 + (-0.10) * np.sin(0.95), abs=1e-15)
    assert DEMO_D2.value(0.0) == pytest.approx(
        0.28 + 0.15 + (-0.06) * np.sin(0.82), abs=1e-15)
    assert DEMO_D1.value(0.0) == pytest.approx(0.6286584495210625, abs=1e-15)
    assert DEMO_D2.value(0.0) == pytest.approx(0.3861312502163863, abs=1e-15)


def test_value_vectorized_matches_scalar():
    ts = np.linspace(0.0, 12.0, 97)
    vec = np.asarray(DEMO_D1.value(ts))
    assert vec.shape == ts.shape
    for t, v in zip(ts, vec):
        assert v == DEMO_D1.value(float(t))


@pytest.mark.parametrize("seed", range(8))
def test_derivatives_match_finite_differences(seed):
    params, _ = sample_delay(seed)
    ts = np.linspace(0.1, 11.9, 23)
    # slope: small h is fine; curvature: the second difference loses
    # ~eps/h^2 to rounding, so it needs a larger step
    h = 1e-6
    fd1 = (np.asarray(params.value(ts + h))
           - np.asarray(params.value(ts - h))) / (2 * h)
    assert np.abs(fd1 - np.asarray(params.slope(ts))).max() < 1e-7
    h = 1e-4
    fd2 = (np.asarray(params.value(ts + h)) - 2 * np.asarray(params.value(ts))
           + np.asarray(params.value(ts - h))) / h ** 2
    assert np.abs(fd2 - np.asarray(params.curvature(ts))).max() < 1e-4


def test_row_roundtrip():
    row = DEMO_D1.as_row()
    assert row.shape == (5,)
    back = DelayParams.from_row(row)
    assert back == DEMO_D1


def test_check_assumptions_demo_pair():
    r1 = check_assumptions(DEMO_D1)
    r2 = check_assumptions(DEMO_D2)
    assert r1.valid and r2.valid
    assert r1.pi0_star == pytest.approx(0.324702, abs=1e-4)
    assert r1.pi1_star == pytest.approx(1.47431, abs=1e-4)
    assert r1.pi2_star == pytest.approx(0.506873, abs=1e-4)
    assert r1.pi3_star == pytest.approx(0.625808, abs=1e-4)
    assert r2.pi0_star == pytest.approx(0.233146, abs=1e-4)
    # psi bracket properties derive from the pi's
    assert r1.psi_min == pytest.approx(r1.pi0_star)
    assert r1.psi_max == pytest.approx(1.0 / r1.pi1_star)


def test_check_assumptions_report_matches_brute_scan():
    grid = np.arange(0.0, 12.0 + 5e-4, 1e-3)
    d = np.asarray(DEMO_D1.value(grid))
    phip = 1.0 - np.asarray(DEMO_D1.slope(grid))
    r = check_assumptions(DEMO_D1)
    assert r.pi0_star == pytest.approx(d.min(), abs=1e-12)
    assert r.pi1_star == pytest.approx(1.0 / d.max(), abs=1e-12)
    assert r.pi2_star == pytest.approx(phip.min(), abs=1e-12)
    assert r.pi3_star == pytest.approx(1.0 / phip.max(), abs=1e-12)


def test_fast_oscillation_violates_slope_bound():
    # alpha*omega = 1.5 makes D' exceed 1, so phi' crosses zero
    bad = DelayParams(a=0.5, b=0.0, alpha=0.3, omega=5.0, varphi=0.0)
    r = check_assumptions(bad)
    assert not r.valid
    assert r.pi2_star <= 0.0
    assert r.first_violation_time == pytest.approx(0.0, abs=1e-9)


def test_negative_delay_violates_positivity():
    bad = DelayParams(a=0.1, b=0.0, alpha=0.2, omega=1.0, varphi=0.0)
    r = check_assumptions(bad)
    assert not r.valid
    assert r.pi0_star <= 0.0


def test_combine_takes_worst_case():
    r1 = check_assumptions(DEMO_D1)
    r2 = check_assumptions(DEMO_D2)
    c = AssumptionReport.combine(r1, r2)
    assert c.pi0_star == min(r1.pi0_star, r2.pi0_star)
    # pi1* = 1/sup D, so the worst case over a pair is the smaller value
    assert c.pi1_star == min(r1.pi1_star, r2.pi1_star)
    assert c.pi2_star == min(r1.pi2_star, r2.pi2_star)
    assert c.pi3_star == min(r1.pi3_star, r2.pi3_star)
    assert c.valid


def test_sampling_deterministic_and_accepted():
    for seed in range(20):
        p1, k1 = sample_delay(seed)
        p2, k2 = sample_delay(seed)
        assert p1 == p2 and k1 == k2
        r = check_assumptions(p1)
        assert r.valid, f"seed {seed} produced an invalid delay"
        rg = DEFAULT_RANGES
        assert rg.a[0] <= p1.a <= rg.a[1]
        assert rg.b[0] <= p1.b <= rg.b[1]
        assert rg.alpha[0] <= p1.alpha <= rg.alpha[1]
        assert rg.omega[0] <= p1.omega <= rg.omega[1]
        assert rg.varphi[0] <= p1.varphi <= rg.varphi[1]


def test_sampling_rejection_cap():
    # alpha*omega pinned at 2.7 can never pass the slope bound
    hopeless = ParamRanges(a=(0.5, 0.5), b=(0.0, 0.0),
                           alpha=(0.9, 0.9), omega=(3.0, 3.0),
                           varphi=(0.0, 0.0))
    with pytest.raises(RejectionLimitExceeded):
        sample_delay(0, ranges=hopeless, max_attempts=50)


def test_phi_identities():
    ts = np.linspace(0.0, 12.0, 11)
    assert np.allclose(phi(DEMO_D1, ts), ts - np.asarray(DEMO_D1.value(ts)))
    assert np.allclose(phi_slope(DEMO_D1, ts),
                       1.0 - np.asarray(DEMO_D1.slope(ts)))


def test_linear_delay():
    d = LinearDelay(c=0.5, m=0.2)
    assert d.value(0.0) == 0.5
    assert d.value(2.0) == pytest.approx(0.9)
    assert d.slope(7.0) == 0.2
    assert d.curvature(7.0) == 0.0


def test_tabulated_delay_interpolates():
    ts = np.linspace(0.0, 13.0, 1301)
    tab = TabulatedDelay(ts, np.asarray(DEMO_D2.value(ts)))
    qs = np.linspace(0.3, 11.7, 41)
    assert np.abs(np.asarray(tab.value(qs))
                  - np.asarray(DEMO_D2.value(qs))).max() < 1e-4
    # gradient-based slope is first-order accurate on the table step
    assert np.abs(np.asarray(tab.slope(qs))
                  - np.asarray(DEMO_D2.slope(qs))).max() < 1e-2


def test_tabulated_needs_three_samples():
    with pytest.raises(Exception):
        TabulatedDelay(np.array([0.0, 1.0]), np.array([0.5, 0.5]))


def test_delay_pair_reports():
    pair = DelayPair(DEMO_D1, DEMO_D2)
    r1, r2 = pair.reports()
    assert r1.valid and r2.valid
    assert r1.pi0_star != r2.pi0_star
