import pytest

from simulation import scenarios
from simulation.models import PeriodicMAModel
from spectra.core import InvalidArgumentError


def test_presets_registry():
    """Test preset lookup and listing."""
    keys = [d.key for d in scenarios.list_model_presets()]
    assert keys == ["pma1:T=4", "pma1:T=12", "ma2", "white"]
    assert scenarios.get_model_preset("ma2").model == PeriodicMAModel.ma2()
    assert scenarios.get_model_preset("nope") is None


def test_parse_preset_and_pma1():
    """Test parsing preset keys and the pma1 family."""
    assert scenarios.parse_model("pma1:T=4") == PeriodicMAModel.pma1(4)
    m = scenarios.parse_model("pma1:T=6;sd=2")
    assert m.period == 6
    assert m.innovation_sd == 2.0
    assert scenarios.parse_model(" white ").innovation_sd == 1.0
    assert scenarios.parse_model("white:sd=0.5").innovation_sd == 0.5


def test_parse_general_pma():
    """Test the general periodic MA syntax, lag by lag."""
    m = scenarios.parse_model("pma:T=2;q=2;coeffs=1,2,3,4;sd=1.5")
    assert m.period == 2
    assert m.coeffs == {1: (1.0, 2.0), 2: (3.0, 4.0)}
    assert m.innovation_sd == 1.5
    assert m.max_lag == 2


@pytest.mark.parametrize(
    "text",
    [
        "arma:T=2",
        "pma1",
        "pma1:T=0",
        "pma1:T=x",
        "pma:T=2;q=1;coeffs=1",
        "pma:T=2;q=1",
        "pma:T=2;q=1;coeffs=a,b",
        "pma:T=2;q",
    ],
)
def test_parse_model_errors(text):
    """Test rejection of unknown or malformed model specs."""
    with pytest.raises(InvalidArgumentError):
        scenarios.parse_model(text)
