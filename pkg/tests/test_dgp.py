import numpy as np
import pytest
import yaml

from stadf import (BubbleSpec, DgpSpec, InvalidSpecError, VolatilitySpec,
                   cumulative_squared_volatility, simulate, simulate_details,
                   volatility_at)


def test_constant_volatility_everywhere():
    vol = VolatilitySpec("constant", sigma0=1.0)
    assert volatility_at(vol, 0.37) == 1.0
    assert volatility_at(vol, 0.0) == 1.0
    assert volatility_at(vol, 1.0) == 1.0


def test_single_shift_boundary_is_strict():
    vol = VolatilitySpec("single_shift", sigma0=1.0, sigma1=3.0, tau_sigma=0.5)
    assert volatility_at(vol, 0.5) == 1.0      # indicator is s > tau
    assert volatility_at(vol, 0.51) == 3.0


def test_logistic_midpoint():
    vol = VolatilitySpec("logistic", sigma0=1.0, sigma1=3.0)
    assert volatility_at(vol, 0.5) == pytest.approx(2.0, abs=1e-12)


def test_double_shift_region():
    vol = VolatilitySpec("double_shift", sigma0=1.0, sigma1=5.0)
    assert volatility_at(vol, 0.4) == 1.0
    assert volatility_at(vol, 0.45) == 5.0
    assert volatility_at(vol, 0.6) == 5.0
    assert volatility_at(vol, 0.61) == 1.0


def test_trending_linear():
    vol = VolatilitySpec("trending", sigma0=1.0, sigma1=3.0)
    assert volatility_at(vol, 0.0) == 1.0
    assert volatility_at(vol, 0.5) == 2.0
    assert volatility_at(vol, 1.0) == 3.0


def test_invalid_volatility_specs():
    with pytest.raises(InvalidSpecError):
        VolatilitySpec("constant", sigma0=0.0)
    with pytest.raises(InvalidSpecError):
        VolatilitySpec("single_shift", sigma0=1.0, sigma1=-2.0)
    with pytest.raises(InvalidSpecError):
        VolatilitySpec("single_shift", sigma0=1.0, sigma1=1.0, tau_sigma=1.5)


def test_cumulative_squared_volatility_matches_quadrature():
    for kind, s0, s1 in (("single_shift", 1.0, 3.0), ("double_shift", 2.0, 0.5),
                         ("logistic", 1.0, 3.0), ("trending", 1.0, 6.0),
                         ("constant", 1.3, 1.3)):
        vol = VolatilitySpec(kind, sigma0=s0, sigma1=s1, tau_sigma=0.3)
        grid = np.linspace(0.0, 1.0, 200001)
        w2 = volatility_at(vol, grid) ** 2
        for s in (0.25, 0.5, 0.77, 1.0):
            n = int(s * (len(grid) - 1))
            riemann = np.trapezoid(w2[: n + 1], grid[: n + 1])
            assert cumulative_squared_volatility(vol, s) == pytest.approx(
                riemann, rel=1e-4)


def test_bubble_spec_validation():
    BubbleSpec()  # null is fine
    BubbleSpec(delta1=0.1, tau1=0.4, tau2=0.6)
    with pytest.raises(InvalidSpecError):
        BubbleSpec(delta1=-0.1)
    with pytest.raises(InvalidSpecError):
        BubbleSpec(delta1=0.1, tau1=0.6, tau2=0.4)
    with pytest.raises(InvalidSpecError):
        BubbleSpec(delta1=0.1, tau1=0.4, tau2=0.6, tau3=0.5)


def _spec(delta1=0.0, kind="constant", s0=1.0, s1=1.0, tau=0.5, T=200, seed=7):
    return DgpSpec(bubble=BubbleSpec(delta1=delta1),
                   vol=VolatilitySpec(kind, sigma0=s0, sigma1=s1, tau_sigma=tau),
                   length=T, seed=seed)


def test_seed_determinism():
    a = simulate(_spec(seed=123)).values
    b = simulate(_spec(seed=123)).values
    c = simulate(_spec(seed=124)).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_regime_correctness_bitwise():
    spec = DgpSpec(bubble=BubbleSpec(delta1=0.1, tau1=0.4, tau2=0.6),
                   vol=VolatilitySpec("constant"), length=100, seed=11)
    path = simulate_details(spec)
    y = path.series.values
    for t in range(1, 101):
        coef = path.coefficients[t - 1]
        expected = 1.1 if 40 < t <= 60 else 1.0
        assert coef == expected
        assert y[t] == coef * y[t - 1] + path.innovations[t - 1]


def test_null_reduction_to_cumulative_sum():
    spec = _spec(T=150, seed=5)
    path = simulate_details(spec)
    acc = path.u0
    for t in range(1, 151):
        acc = acc + path.innovations[t - 1]
        assert path.series.values[t] == acc


def test_mu_shifts_path():
    base = simulate_details(_spec(T=50, seed=3))
    shifted = simulate_details(DgpSpec(bubble=BubbleSpec(mu=5.0),
                                       vol=VolatilitySpec("constant"),
                                       length=50, seed=3))
    assert np.array_equal(shifted.series.values, base.series.values + 5.0)


def test_null_increment_moments():
    diffs = []
    for seed in range(400):
        y = simulate(_spec(T=200, seed=seed)).values
        diffs.append(np.diff(y))
    d = np.concatenate(diffs)
    assert abs(d.mean()) < 0.02
    assert d.var() == pytest.approx(1.0, abs=0.03)


def test_volatility_ratio_in_output():
    ratios = []
    for seed in range(300):
        y = simulate(_spec(kind="single_shift", s0=1.0, s1=6.0, T=400,
                           seed=seed)).values
        d = np.diff(y)
        ratios.append(d[200:].std() / d[:200].std())
    assert 5.5 < np.median(ratios) < 6.5


def test_spec_yaml_roundtrip():
    spec = _spec(delta1=0.05, kind="single_shift", s0=1.0, s1=3.0, T=120, seed=9)
    text = yaml.safe_dump(spec.to_dict())
    back = DgpSpec.from_dict(yaml.safe_load(text))
    assert back == spec
    assert np.array_equal(simulate(back).values, simulate(spec).values)


def test_from_dict_rejects_unknown_keys():
    d = _spec().to_dict()
    d["bubble"]["extra"] = 1
    with pytest.raises(InvalidSpecError):
        DgpSpec.from_dict(d)
