import pytest

from inference import params
from inference.params import SubsamplingParams
from spectra.core import InvalidArgumentError


def test_round_half_away():
    """Test rounding with halves away from zero."""
    assert params.round_half_away(2.5) == 3
    assert params.round_half_away(-2.5) == -3
    assert params.round_half_away(0.5) == 1
    assert params.round_half_away(3.466) == 3


@pytest.mark.parametrize(
    "n, expected",
    [(720, (4, 80, 2)), (500, (3, 67, 2)), (16, (2, 12, 2))],
)
def test_default_params(n, expected):
    """Test the rate rules at the documented sample lengths."""
    p = params.default_params(n)
    assert (p.L_n, p.b, p.L_b) == expected
    assert p.alpha == 0.01
    assert p.key == "default"


def test_default_params_too_short():
    """Test that series shorter than 16 are rejected."""
    with pytest.raises(InvalidArgumentError):
        params.default_params(15)


def test_validate():
    """Test the parameter invariants against a sample length."""
    SubsamplingParams(b=80, L_n=4, L_b=2).validate(720)
    with pytest.raises(InvalidArgumentError):
        SubsamplingParams(b=80, L_n=4, L_b=80).validate(720)
    with pytest.raises(InvalidArgumentError):
        SubsamplingParams(b=800, L_n=4, L_b=2).validate(720)
    with pytest.raises(InvalidArgumentError):
        SubsamplingParams(b=80, L_n=720, L_b=2).validate(720)
    with pytest.raises(InvalidArgumentError):
        # only 5 blocks
        SubsamplingParams(b=716, L_n=4, L_b=2).validate(720)
    with pytest.raises(InvalidArgumentError):
        SubsamplingParams(b=80, L_n=4, L_b=2, alpha=1.5).validate(720)
    assert SubsamplingParams(b=80, L_n=4, L_b=2).n_blocks(720) == 641


def test_build_params_defaults_and_presets():
    """Test resolution from None and from preset keys."""
    assert params.build_params(720).b == 80
    preset = params.build_params(720, "scan-720")
    assert preset.key == "scan-720"
    assert (preset.b, preset.L_n, preset.L_b, preset.alpha) == (80, 4, 2, 0.01)
    ci = params.build_params(500, "ci-500")
    assert ci.alpha == 0.05
    with pytest.raises(InvalidArgumentError):
        params.build_params(720, "no-such-preset")


def test_build_params_overrides():
    """Test dictionary overlays on defaults and presets."""
    p = params.build_params(720, {"L_n": 5, "b": None})
    assert (p.L_n, p.b, p.L_b) == (5, 80, 2)
    assert p.key == "custom"

    p = params.build_params(100, {"b": 40, "L_n": 3, "L_b": 2})
    assert (p.b, p.L_n, p.L_b, p.alpha) == (40, 3, 2, 0.01)

    p = params.build_params(720, {"key": "ci-500", "alpha": 0.1})
    assert (p.b, p.alpha, p.key) == (67, 0.1, "ci-500")

    custom = SubsamplingParams(b=30, L_n=2, L_b=2)
    assert params.build_params(200, custom) is custom

    with pytest.raises(TypeError):
        params.build_params(720, 42)  # type: ignore[arg-type]
    with pytest.raises(InvalidArgumentError):
        params.build_params(720, {"b": 720, "L_n": 4, "L_b": 2})


def test_build_params_short_series():
    """Test that n = 16 defaults leave too few blocks unless overridden."""
    with pytest.raises(InvalidArgumentError):
        params.build_params(16)
    p = params.build_params(16, {"b": 8, "L_n": 2, "L_b": 2})
    assert p.n_blocks(16) == 9


def test_params_dict_roundtrip_ignores_unknown_keys():
    """Test from_dict tolerance of extra keys."""
    data = params.PARAM_PRESETS["scan-720"].to_dict()
    data["unused"] = "value"
    restored = SubsamplingParams.from_dict(data)
    assert restored == params.PARAM_PRESETS["scan-720"]
