"""Cumulative returns, rolling/period correlations, and valuation series."""
import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import factorlens as fl
from factorlens.analytics import pearson_matrix, surface_to_payload
from factorlens.errors import EmptyRangeError, InvalidReturnError, MisalignedSeriesError
from factorlens.factors import FactorReturnMatrix

from conftest import make_market


def brute_force_pearson(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    ca, cb = a - a.mean(), b - b.mean()
    return float((ca * cb).sum() / np.sqrt((ca * ca).sum() * (cb * cb).sum()))


def _frm(f, start=dt.date(2016, 1, 4)):
    f = np.asarray(f, float)
    days = []
    d = start
    while len(days) < len(f):
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return FactorReturnMatrix(
        days=tuple(days), f=f, residual=np.zeros((len(f), 1)),
        r_squared=np.ones(len(f)), condition=np.ones(len(f)),
    )


# ---------------------------------------------------------------------------
# Cumulative returns
# ---------------------------------------------------------------------------

def test_cumulative_return_oracles():
    np.testing.assert_allclose(fl.cumulative_return(np.zeros(5)), np.zeros(5))
    out = fl.cumulative_return([0.1, -0.05])
    np.testing.assert_allclose(out, [0.1, 1.1 * 0.95 - 1.0], atol=1e-15)


def test_cumulative_return_rejects_total_loss():
    with pytest.raises(InvalidReturnError) as err:
        fl.cumulative_return([0.0, -1.5, 0.0])
    assert err.value.index == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 60), st.integers(1, 60))
def test_cumulative_concat_identity(seed, n_a, n_b):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-0.2, 0.25, n_a)
    b = rng.uniform(-0.2, 0.25, n_b)
    ra = fl.cumulative_return(a)[-1]
    rb = fl.cumulative_return(b)[-1]
    joint = fl.cumulative_return(np.concatenate([a, b]))[-1]
    assert joint == pytest.approx((1 + ra) * (1 + rb) - 1, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# Rolling correlation
# ---------------------------------------------------------------------------

def test_rolling_identical_series_is_one():
    rng = np.random.default_rng(1)
    r = rng.normal(0, 0.01, 100)
    out = fl.rolling_correlation(r, r.copy())
    defined = out[~np.isnan(out)]
    np.testing.assert_allclose(defined, 1.0, atol=1e-12)


def test_rolling_negative_affine_is_minus_one():
    rng = np.random.default_rng(2)
    r = rng.normal(0, 0.01, 90)
    out = fl.rolling_correlation(r, -2.0 * r)
    defined = out[~np.isnan(out)]
    np.testing.assert_allclose(defined, -1.0, atol=1e-12)


def test_rolling_matches_brute_force_at_center():
    rng = np.random.default_rng(3)
    a = rng.normal(0, 1, 100)
    b = rng.normal(0, 1, 100)
    out = fl.rolling_correlation(a, b, window=20)
    expected = brute_force_pearson(a[30:71], b[30:71])
    assert out[50] == pytest.approx(expected, abs=1e-12)


def test_rolling_defined_count_boundary():
    rng = np.random.default_rng(4)
    for n in (10, 40, 41, 60, 123):
        out = fl.rolling_correlation(rng.normal(0, 1, n), rng.normal(0, 1, n), window=20)
        assert (~np.isnan(out)).sum() == max(0, n - 40)


def test_rolling_rejects_misaligned():
    with pytest.raises(MisalignedSeriesError):
        fl.rolling_correlation(np.zeros(10), np.zeros(11))


def test_rolling_zero_variance_window_is_undefined():
    a = np.zeros(60)
    b = np.random.default_rng(5).normal(0, 1, 60)
    out = fl.rolling_correlation(a, b)
    assert np.isnan(out).all()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_pearson_affine_invariance(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(0, 1, 50)
    b = rng.normal(0, 1, 50)
    scale = float(rng.uniform(0.1, 10.0))
    shift = float(rng.uniform(-5.0, 5.0))
    base = fl.rolling_correlation(a, b, window=10)
    trans = fl.rolling_correlation(scale * a + shift, b, window=10)
    np.testing.assert_allclose(trans, base, atol=1e-12)


# ---------------------------------------------------------------------------
# Period correlation matrix
# ---------------------------------------------------------------------------

def test_period_matrix_identical_columns():
    rng = np.random.default_rng(6)
    f = rng.normal(0, 0.01, (30, 10))
    f[:, 3] = f[:, 5]
    frm = _frm(f)
    rho = fl.period_correlation_matrix(frm, frm.days[0], frm.days[-1])
    assert rho[3, 5] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rho, rho.T)
    np.testing.assert_allclose(np.diag(rho), 1.0)


def test_period_matrix_exact_linear_dependence():
    f = np.zeros((3, 10))
    f[:, 0] = [1.0, 2.0, 3.0]
    f[:, 1] = [2.0, 4.0, 6.0]
    for s in range(2, 10):
        f[:, s] = [0.1 * s, -0.2, 0.3 + s]
    frm = _frm(f)
    rho = fl.period_correlation_matrix(frm, frm.days[0], frm.days[-1])
    assert rho[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_period_matrix_independent_factors_stay_uncorrelated():
    _, (panel, _, truth) = make_market(n_stocks=30, n_days=500, n_portfolios=3,
                                       span=(20, 400), seed=12)
    frm = _frm(truth.factor_returns)
    rho = fl.period_correlation_matrix(frm, frm.days[0], frm.days[-1])
    off = rho[~np.eye(10, dtype=bool)]
    assert np.abs(off).max() < 0.15  # sampling bound ~ 2/sqrt(500)


def test_period_matrix_degenerate_pair_is_nan():
    rng = np.random.default_rng(7)
    f = rng.normal(0, 0.01, (20, 10))
    f[:, 2] = 0.004  # constant factor return
    frm = _frm(f)
    rho = fl.period_correlation_matrix(frm, frm.days[0], frm.days[-1])
    assert np.isnan(rho[2, 4]) and np.isnan(rho[2, 2])
    assert rho[0, 1] == pytest.approx(brute_force_pearson(f[:, 0], f[:, 1]), abs=1e-12)


def test_period_matrix_guards():
    frm = _frm(np.random.default_rng(8).normal(0, 1, (10, 10)))
    with pytest.raises(EmptyRangeError):
        fl.period_correlation_matrix(frm, frm.days[3], frm.days[3])
    with pytest.raises(EmptyRangeError):
        fl.period_correlation_matrix(frm, frm.days[0], frm.days[1])


def test_correlations_stay_in_unit_interval(small_market):
    panel, _, _ = small_market
    frm = fl.estimate_panel_factor_returns(panel)
    surface = fl.build_correlation_surface(frm, frm.days[0], frm.days[-1])
    assert np.nanmax(np.abs(surface.period)) <= 1.0
    assert np.nanmax(np.abs(surface.rolling)) <= 1.0
    payload = surface_to_payload(surface, panel.catalog)
    assert len(payload["period"]) == 10 and payload["window"] == 20


# ---------------------------------------------------------------------------
# Portfolio return series
# ---------------------------------------------------------------------------

def _single_stock_portfolio(panel, shares=100.0, cash=0.0, span=20):
    sid = panel.stocks[0]
    return fl.PortfolioSeries(
        id="t001", days=panel.trading_days[:span], stock_ids=(sid,),
        shares=np.full((span, 1), shares), cash=np.full(span, cash),
    )


def test_portfolio_returns_valuation_oracle():
    # one stock, 100 shares, prices 10 -> 11 -> 9.9: returns (0.10, -0.10)
    prices = np.full((20, 1), 10.0)
    prices[1, 0] = 11.0
    prices[2, 0] = 9.9
    prices[3:, 0] = 9.9
    rng = np.random.default_rng(0)
    days = []
    d = dt.date(2016, 1, 4)
    while len(days) < 20:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    raw = rng.normal(0, 1, (20, 2, 10))
    panel = fl.StockPanel(
        trading_days=days, stocks=("s1", "s2"),
        raw_exposure=raw,
        std_exposure=np.zeros((20, 2, 10)),
        sector=np.array([0, 1]),
        price=np.hstack([prices, np.full((20, 1), 5.0)]),
        market_cap=np.full((20, 2), 100.0),
        stock_return=np.zeros((20, 2)),
    )
    p = _single_stock_portfolio(panel)
    ret_days, daily, cumulative = fl.portfolio_return_series(p, panel)
    assert ret_days == panel.trading_days[1:]
    assert daily[0] == pytest.approx(0.10, abs=1e-12)
    assert daily[1] == pytest.approx(-0.10, abs=1e-12)
    assert cumulative[0] == pytest.approx(0.10, abs=1e-12)
    assert cumulative[1] == pytest.approx(-0.01, abs=1e-12)
    assert np.all(daily[2:] == 0.0)


def test_portfolio_returns_flat_prices_are_zero(small_market):
    panel, _, _ = small_market
    flat = fl.StockPanel(
        trading_days=panel.trading_days, stocks=panel.stocks,
        raw_exposure=panel.raw_exposure, std_exposure=panel.std_exposure,
        sector=panel.sector, price=np.ones_like(panel.price),
        market_cap=panel.market_cap, stock_return=np.zeros_like(panel.stock_return),
    )
    p = _single_stock_portfolio(flat, shares=7.0, cash=3.0)
    _, daily, cumulative = fl.portfolio_return_series(p, flat)
    assert np.all(daily == 0.0) and np.all(cumulative == 0.0)


def test_portfolio_returns_uniform_jump(small_market):
    panel, _, _ = small_market
    price = np.ones_like(panel.price)
    price[5:] *= 1.10  # every stock +10% on day 5
    jump = fl.StockPanel(
        trading_days=panel.trading_days, stocks=panel.stocks,
        raw_exposure=panel.raw_exposure, std_exposure=panel.std_exposure,
        sector=panel.sector, price=price,
        market_cap=panel.market_cap, stock_return=np.zeros_like(panel.stock_return),
    )
    p = _single_stock_portfolio(jump, shares=10.0, cash=0.0)
    _, daily, _ = fl.portfolio_return_series(p, jump)
    assert daily[4] == pytest.approx(0.10, abs=1e-12)
    assert np.all(np.delete(daily, 4) == 0.0)
