"""
Upper bounds of the Nikodym distance between a convex body in the unit square
and its reconstructions. The bounds hold up to the unspecified constants a0
and a1, which are supplied through a BoundConfig.
"""

import numpy as np

from momentshape.geometry import DirectionSet, polygonization_bound
from momentshape.legendre_basis import hilbert_trace_bound
from momentshape.moments import MomentKind

POLYGON_APPROXIMATION_CONSTANT = 8.0 * np.pi**3 + 16.0 * np.pi


class BoundConfig:
    """
    The constants of the stability bounds.
    """

    def __init__(self, a0: float = 1.0, a1: float = 1.0):
        """
        :param a0: the constant of the geometric moment term
        :param a1: the constant of the truncation term
        """
        if not a0 > 0.0:
            raise ValueError(f"a0 ({a0}) must be positive")
        if not a1 > 0.0:
            raise ValueError(f"a1 ({a1}) must be positive")

        self._a0 = float(a0)
        self._a1 = float(a1)

    @property
    def a0(self) -> float:
        """
        The constant of the geometric moment term.
        """
        return self._a0

    @property
    def a1(self) -> float:
        """
        The constant of the truncation term.
        """
        return self._a1

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BoundConfig)
            and self._a0 == other._a0
            and self._a1 == other._a1
        )


def bound_stability_legendre(
    epsilon: float, order: int, config: BoundConfig
) -> float:
    """
    Returns epsilon^2 + a1 / (N + 1), the bound for bodies whose Legendre
    moments up to order N differ by at most epsilon in the Euclidean norm.

    :param epsilon: the distance of the Legendre moment grids
    :param order: the order N
    :param config: the bound constants
    :return: the bound
    """
    _check_arguments(epsilon, order)
    return epsilon**2 + config.a1 / (order + 1)


def bound_stability_geometric(
    epsilon: float, order: int, config: BoundConfig
) -> float:
    """
    Returns the minimum over n = 0, ..., N of

        a0 (n + 1)^2 e^(7(n + 1)) epsilon^2 + a1 / (n + 1),

    the bound for bodies whose geometric moments up to order N differ by at
    most epsilon in the Euclidean norm.

    :param epsilon: the distance of the geometric moment grids
    :param order: the order N
    :param config: the bound constants
    :return: the bound
    """
    _check_arguments(epsilon, order)
    n = np.arange(order + 1)
    return float(
        np.min(
            _amplified(epsilon**2, n, config.a0)
            + config.a1 / (n + 1.0)
        )
    )


def bound_stability2(
    directions: DirectionSet, order: int, config: BoundConfig
) -> float:
    """
    Returns sqrt(2) max tan(gap / 2) + a1 / (N + 1), the bound for any least
    squares estimator with the provided outer normals from exact Legendre
    moments up to order N.

    :param directions: the outer normal directions including the axes
    :param order: the order N
    :param config: the bound constants
    :return: the bound
    """
    directions.require_axes()
    _check_arguments(0.0, order)
    return polygonization_bound(directions) + config.a1 / (order + 1)


def bound_lsq(
    vertex_count: int, order: int, config: BoundConfig, kind: MomentKind
) -> float:
    """
    Returns the bound for least squares estimators among polygons with at
    most m vertices from exact moments up to order N. For Legendre moments,
    it is (8 pi^3 + 16 pi) / m^2 + a1 / (N + 1); for geometric moments, the
    minimum over n = 0, ..., N of

        a0 (n + 1)^2 e^(7(n + 1)) (1 + ln(2n + 1) / 2)^2 (8 pi^3 + 16 pi) / m^2
            + a1 / (n + 1).

    :param vertex_count: the maximum number m of vertices
    :param order: the order N
    :param config: the bound constants
    :param kind: the kind of the moments
    :return: the bound
    """
    if vertex_count < 3:
        raise ValueError(
            f"number of vertices ({vertex_count}) must be at least 3"
        )
    _check_arguments(0.0, order)

    approximation = POLYGON_APPROXIMATION_CONSTANT / vertex_count**2
    if kind == MomentKind.LEGENDRE:
        return approximation + config.a1 / (order + 1)

    n = np.arange(order + 1)
    trace_bounds = np.array([hilbert_trace_bound(i) for i in n])
    return float(
        np.min(
            _amplified(trace_bounds**2 * approximation, n, config.a0)
            + config.a1 / (n + 1.0)
        )
    )


def noise_envelope(
    directions: DirectionSet,
    sum_of_squares: float,
    order: int,
    config: BoundConfig,
) -> float:
    """
    Returns sqrt(2) max tan(gap / 2) + 6 S + a1 / (N + 1), the envelope of
    the Nikodym distance of a least squares estimator from noisy Legendre
    moments whose noise has the sum of squares S.

    :param directions: the outer normal directions including the axes
    :param sum_of_squares: the sum of squares of the noise
    :param order: the order N
    :param config: the bound constants
    :return: the envelope
    """
    if sum_of_squares < 0.0:
        raise ValueError(
            f"sum of squares ({sum_of_squares}) must be non-negative"
        )
    return bound_stability2(directions, order, config) + 6.0 * sum_of_squares


def _amplified(value, n: np.ndarray, a0: float) -> np.ndarray:
    """
    Returns a0 (n + 1)^2 e^(7(n + 1)) value in log space; zero values stay
    zero instead of producing 0 * inf.
    """
    value = np.broadcast_to(np.asarray(value, dtype=float), n.shape)
    with np.errstate(divide="ignore", over="ignore"):
        amplified = np.exp(
            np.log(a0)
            + 2.0 * np.log(n + 1.0)
            + 7.0 * (n + 1.0)
            + np.log(value)
        )
    return np.where(value > 0.0, amplified, 0.0)


def _check_arguments(epsilon: float, order: int):
    if epsilon < 0.0:
        raise ValueError(f"epsilon ({epsilon}) must be non-negative")
    if order < 0:
        raise ValueError(f"order ({order}) must be non-negative")
