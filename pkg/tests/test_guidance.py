import numpy as np
import pytest

from higs import ShapeError, cfg_combine, select_buffer_input


def test_cfg_examples(rng):
    c, u = rng.normal(size=(2, 3, 4))
    np.testing.assert_array_equal(cfg_combine(c, u, 1.0), c)
    np.testing.assert_allclose(cfg_combine(c, c, 4.5), c, rtol=1e-14)
    assert cfg_combine(np.array(2.0), np.array(1.0), 3.0) == 4.0


def test_cfg_shape_mismatch():
    with pytest.raises(ShapeError):
        cfg_combine(np.zeros(3), np.zeros(4), 2.0)


def test_cfg_affine(rng):
    c, u = rng.normal(size=(2, 5))
    np.testing.assert_allclose(cfg_combine(3 * c, 3 * u, 2.5), 3 * cfg_combine(c, u, 2.5))


def test_buffer_input_selection(rng):
    cond, guided = rng.normal(size=(2, 4))
    assert select_buffer_input(cond, guided, "guided") is guided
    assert select_buffer_input(cond, guided, "conditional") is cond
    assert select_buffer_input(cond, guided, "guided", cfg_enabled=False) is cond
