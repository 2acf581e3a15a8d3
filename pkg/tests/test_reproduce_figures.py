# tests/test_reproduce_figures.py
import pytest

from app.core import analysis
from scripts.reproduce_figures import DELAY_QUANTILE, DELAY_TARGET_S, delay_scenario


@pytest.mark.slow
def test_delay_plot_quantiles():
    base = delay_scenario()
    assert 3.5 < base.densities.mean_sats_per_orbit < 5.0

    def t70(**changes):
        return analysis.delay_quantile(base.updated(**changes), DELAY_QUANTILE)

    assert t70(platform_enabled=False) == pytest.approx(DELAY_TARGET_S, rel=0.05)
    assert t70(platform_enabled=True, platform_altitude_km=20.0) == pytest.approx(150.0, rel=0.2)
    assert t70(platform_enabled=True, platform_altitude_km=40.0) == pytest.approx(50.0, rel=0.2)
