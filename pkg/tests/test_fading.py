# tests/test_fading.py
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import TypeAdapter, ValidationError

from app.core import fading
from app.core.fading import NakagamiPower, NoFading, ShadowedRice
from app.schemas.scenario_schema import FadingModel

from tests.conftest import SEED

# light, average and heavy shadowing parameter sets for land-mobile satellite channels
SHADOWING = [
    ShadowedRice(b=0.158, m_tilde=19.4, omega_tilde=1.29),
    ShadowedRice(b=0.251, m_tilde=5.21, omega_tilde=0.278),
    ShadowedRice(b=0.063, m_tilde=0.739, omega_tilde=8.97e-4),
]


@given(omega=st.floats(0.05, 20.0), x=st.floats(0.0, 50.0))
def test_nakagami_m1_is_exponential(omega, x):
    model = NakagamiPower(m=1.0, omega=omega)
    assert model.ccdf(x) == pytest.approx(np.exp(-omega * x), rel=1e-12, abs=1e-300)


@given(m=st.floats(0.5, 20.0), omega=st.floats(0.1, 10.0), x=st.floats(0.0, 100.0))
def test_nakagami_cdf_and_ccdf_are_complementary(m, omega, x):
    model = NakagamiPower(m=m, omega=omega)
    assert model.cdf(x) + model.ccdf(x) == pytest.approx(1.0, abs=1e-12)


def test_nakagami_mean_is_m_squared_over_omega(rng):
    model = NakagamiPower(m=2.0, omega=0.5)
    draws = model.sample(rng, size=200_000)
    assert draws.mean() == pytest.approx(8.0, rel=0.02)


def test_nakagami_ccdf_matches_its_sampler():
    model = NakagamiPower(m=3.0, omega=2.0)
    draws = np.sort(model.sample(np.random.default_rng(SEED), size=200_000))
    levels = np.linspace(0.25, 12.0, 20)
    empirical = 1.0 - np.searchsorted(draws, levels, side="right") / draws.size
    np.testing.assert_allclose(empirical, model.ccdf(levels), atol=5e-3)


def test_nakagami_from_mean_power():
    model = NakagamiPower.from_mean_power(m=3.0, mean_power=2.0)
    assert model.scale * model.m == pytest.approx(2.0)


def test_nakagami_ccdf_vectorized_and_monotone():
    model = NakagamiPower(m=2.5, omega=1.0)
    x = np.linspace(0.0, 20.0, 101)
    values = model.ccdf(x)
    assert values.shape == x.shape
    assert values[0] == 1.0
    assert np.all(np.diff(values) <= 0)


def test_negative_levels_are_certain():
    assert NakagamiPower().ccdf(-1.0) == 1.0
    assert SHADOWING[1].ccdf(-1.0) == 1.0


@pytest.mark.parametrize("model", SHADOWING)
def test_shadowed_rice_cdf_is_a_distribution(model):
    x = np.concatenate([[0.0], np.logspace(-4, 3, 60)])
    values = model.cdf(x)
    assert values[0] == 0.0
    assert np.all(np.diff(values) >= -1e-14)
    assert values[-1] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("model", SHADOWING)
def test_shadowed_rice_cdf_matches_its_sampler(model):
    draws = model.sample(np.random.default_rng(SEED), size=200_000)
    for q in (0.1, 0.5, 0.9):
        level = float(np.quantile(draws, q))
        # binomial stderr at n=200k is below 1.2e-3
        assert model.cdf(level) == pytest.approx(q, abs=6e-3)


def test_shadowed_rice_at_unit_level_matches_its_sampler():
    model = ShadowedRice(b=0.126, m_tilde=10.1, omega_tilde=0.835)
    draws = model.sample(np.random.default_rng(SEED), size=200_000)
    assert model.cdf(1.0) == pytest.approx(np.mean(draws <= 1.0), abs=5e-3)
    assert 0.05 < model.cdf(1.0) < 0.95


def test_shadowed_rice_without_los_is_exponential():
    model = ShadowedRice(b=0.4, m_tilde=3.0, omega_tilde=0.0)
    x = np.array([0.0, 0.1, 0.8, 4.0])
    np.testing.assert_allclose(model.ccdf(x), np.exp(-x / 0.8), rtol=1e-12)
    assert model.sample(np.random.default_rng(SEED), size=100_000).mean() == pytest.approx(0.8, rel=0.02)


def test_shadowed_rice_scalar_in_scalar_out():
    value = SHADOWING[0].ccdf(0.5)
    assert isinstance(value, float)
    assert 0.0 < value < 1.0


def test_no_fading_step():
    model = NoFading()
    np.testing.assert_array_equal(model.ccdf(np.array([0.0, 0.5, 1.0, 1.0 + 1e-12, 3.0])), [1, 1, 1, 0, 0])
    assert model.cdf(1.0) == 1.0
    assert model.jump_points() == [1.0]
    assert fading.sample(model, np.random.default_rng(SEED), size=4).tolist() == [1.0] * 4


def test_fading_union_parses_on_kind():
    adapter = TypeAdapter(FadingModel)
    parsed = adapter.validate_python({"kind": "shadowed_rice", "b": 0.1, "m_tilde": 2.0, "omega_tilde": 0.5})
    assert isinstance(parsed, ShadowedRice)
    assert isinstance(adapter.validate_python({"kind": "none"}), NoFading)
    with pytest.raises(ValidationError):
        adapter.validate_python({"kind": "nakagami", "m": -1.0})
