import numpy as np
import pytest

from momentshape.bounds import (
    POLYGON_APPROXIMATION_CONSTANT,
    BoundConfig,
    bound_lsq,
    bound_stability2,
    bound_stability_geometric,
    bound_stability_legendre,
    noise_envelope,
)
from momentshape.geometry import DirectionSet
from momentshape.moments import MomentKind


def test_bound_config_with_non_positive_constants():
    with pytest.raises(ValueError):
        BoundConfig(a0=0.0)

    with pytest.raises(ValueError):
        BoundConfig(a1=-1.0)


def test_bound_config():
    config = BoundConfig(2.0, 0.5)

    assert config.a0 == 2.0
    assert config.a1 == 0.5
    assert config == BoundConfig(2.0, 0.5)
    assert config != BoundConfig()


def test_bounds_with_negative_arguments():
    config = BoundConfig()

    with pytest.raises(ValueError):
        bound_stability_legendre(-0.1, 3, config)

    with pytest.raises(ValueError):
        bound_stability_legendre(0.1, -1, config)

    with pytest.raises(ValueError):
        bound_stability_geometric(-0.1, 3, config)

    with pytest.raises(ValueError):
        bound_stability2(DirectionSet.equidistant(8), -1, config)


def test_bound_stability_legendre():
    config = BoundConfig()

    assert bound_stability_legendre(0.1, 9, config) == pytest.approx(0.11)
    assert bound_stability_legendre(0.0, 9, config) == pytest.approx(0.1)
    assert bound_stability_legendre(
        0.0, 9, BoundConfig(a1=2.0)
    ) == pytest.approx(0.2)


def test_bound_stability_geometric_without_moment_error():
    config = BoundConfig()
    for order in (0, 1, 5, 20):
        assert bound_stability_geometric(0.0, order, config) == pytest.approx(
            1.0 / (order + 1)
        )


def test_bound_stability_geometric():
    epsilon = 1e-6
    expected = min(
        (n + 1) ** 2 * np.exp(7.0 * (n + 1)) * epsilon**2 + 1.0 / (n + 1)
        for n in range(4)
    )

    assert bound_stability_geometric(
        epsilon, 3, BoundConfig()
    ) == pytest.approx(expected)


def test_bound_stability_geometric_is_non_increasing_in_order():
    config = BoundConfig()
    values = [
        bound_stability_geometric(1e-4, order, config) for order in range(30)
    ]

    assert np.all(np.diff(values) <= 0.0)


def test_bound_stability_geometric_with_large_order():
    value = bound_stability_geometric(0.1, 200, BoundConfig())

    assert np.isfinite(value)
    assert value <= 1.0


def test_bound_stability2():
    directions = DirectionSet.equidistant(100)

    assert bound_stability2(directions, 9, BoundConfig()) == pytest.approx(
        0.044444 + 0.1, rel=1e-4
    )


def test_bound_stability2_without_axes():
    with pytest.raises(ValueError):
        bound_stability2(DirectionSet.equidistant(6), 3, BoundConfig())


def test_bound_lsq_with_too_few_vertices():
    with pytest.raises(ValueError):
        bound_lsq(2, 3, BoundConfig(), MomentKind.LEGENDRE)


def test_bound_lsq_legendre():
    assert bound_lsq(
        10, 9, BoundConfig(), MomentKind.LEGENDRE
    ) == pytest.approx((8.0 * np.pi**3 + 16.0 * np.pi) / 100.0 + 0.1)


def test_bound_lsq_geometric():
    config = BoundConfig()
    approximation = POLYGON_APPROXIMATION_CONSTANT / 1e6
    expected = min(
        (n + 1) ** 2
        * np.exp(7.0 * (n + 1))
        * (1.0 + 0.5 * np.log(2.0 * n + 1.0)) ** 2
        * approximation
        + 1.0 / (n + 1)
        for n in range(4)
    )

    assert bound_lsq(
        1000, 3, config, MomentKind.GEOMETRIC
    ) == pytest.approx(expected)


def test_noise_envelope():
    directions = DirectionSet.equidistant(16)
    config = BoundConfig(a1=0.5)

    assert noise_envelope(directions, 0.0, 7, config) == pytest.approx(
        bound_stability2(directions, 7, config)
    )
    assert noise_envelope(directions, 0.01, 7, config) == pytest.approx(
        bound_stability2(directions, 7, config) + 0.06
    )

    with pytest.raises(ValueError):
        noise_envelope(directions, -0.01, 7, config)
