import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ebeam_mdp.model import (EblParams, LossWeights, OlParams, Shot, ShotBounds, ShotSet,
                             ValidationError, as_params, check_field, validate_params)


@given(st.floats(0, 1e6))
def test_scatter_weights_sum_to_one(eta):
    ebl = EblParams(eta=eta)
    assert ebl.w_f + ebl.w_b == pytest.approx(1.0, abs=1e-15)


def test_default_configuration_accepted():
    cfg = validate_params(EblParams(3, 30, 0.8), ShotBounds(), 512)
    assert cfg.grid == 512


@pytest.mark.parametrize("ebl, bounds, message", [
    (EblParams(sigma_f=3, sigma_b=2), ShotBounds(), "sigma_b must exceed sigma_f"),
    (EblParams(), ShotBounds(w_min=0), "w_min"),
    (EblParams(), ShotBounds(h_min=5, h_max=4), "h_max"),
    (EblParams(), ShotBounds(d_min=-0.1), "d_min"),
    (EblParams(eta=-1), ShotBounds(), "eta"),
    (EblParams(sigma_f=0), ShotBounds(), "sigma_f"),
])
def test_invalid_configurations_name_the_violation(ebl, bounds, message):
    with pytest.raises(ValidationError, match=message):
        validate_params(ebl, bounds, 64)


def test_grid_must_be_positive():
    with pytest.raises(ValidationError):
        validate_params(EblParams(), ShotBounds(), 0)


def test_ol_and_weights_validation():
    OlParams().validate()
    LossWeights().validate()
    with pytest.raises(ValidationError):
        OlParams(dose_delta=1.0).validate()
    with pytest.raises(ValidationError):
        LossWeights(gamma=-1).validate()
    with pytest.raises(ValidationError):
        LossWeights(alpha=float("nan")).validate()


def test_shotset_array_round_trip():
    s = ShotSet.from_tuples([(1, 2, 3, 4, 1.5, 1), (5, 6, 7, 8, 0.5, 0)], 32)
    assert len(s) == 2
    assert s[1] == Shot(5, 6, 7, 8, 0.5, 0)
    back = ShotSet.from_array(s.as_array(), 32)
    assert back == s
    assert [sh.x for sh in s] == [1, 5]


def test_empty_shotset():
    s = ShotSet.from_tuples([], 16)
    assert len(s) == 0
    assert s.as_array().shape == (0, 6)


def test_as_params_requires_grid_for_arrays():
    with pytest.raises(ValueError):
        as_params(np.zeros((1, 6)))
    p, g = as_params(np.zeros((1, 6)), 8)
    assert g == 8 and p.shape == (1, 6)


def test_check_field_rejects_nonfinite():
    with pytest.raises(ValueError):
        check_field(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        check_field(np.zeros(3))
