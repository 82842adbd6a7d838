import logging
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import roots_legendre

from momentshape.geometry import ConvexPolygon

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


def gauss_legendre(
    count: int, interval: Tuple[float, float] = (0.0, 1.0)
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns the nodes and weights of the Gauss-Legendre rule with the
    provided number of nodes on an interval. The rule is exact for
    polynomials of degree up to 2 count - 1.

    :param count: the number of nodes
    :param interval: the integration interval
    :return: the nodes and the weights
    """
    if count < 1:
        raise ValueError(f"number of nodes ({count}) must be at least 1")

    nodes, weights = _reference_rule(count)
    lower, upper = interval
    half_length = 0.5 * (upper - lower)
    return lower + half_length * (nodes + 1.0), half_length * weights


def integrate_over_triangle(
    function: Integrand,
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    degree: int,
) -> np.ndarray:
    """
    Integrates a function over the triangle conv{a, b, c} using the collapsed
    (Duffy) Gauss-Legendre product rule, which is exact for polynomials up to
    the provided degree.

    :param function: a function mapping a k x 2 array of points to an array
        whose first axis has length k
    :param a: the first vertex
    :param b: the second vertex
    :param c: the third vertex
    :param degree: the polynomial degree to integrate exactly
    :return: the integral
    """
    a, b, c = (np.asarray(vertex, dtype=float) for vertex in (a, b, c))
    s, s_weights = gauss_legendre(degree // 2 + 2)
    t, t_weights = gauss_legendre(degree // 2 + 1)
    s_grid, t_grid = np.meshgrid(s, t, indexing="ij")
    points = (
        a
        + s_grid.reshape(-1, 1) * (b - a)
        + (s_grid * t_grid).reshape(-1, 1) * (c - b)
    )
    jacobian = abs(
        (b - a)[0] * (c - b)[1] - (b - a)[1] * (c - b)[0]
    ) * s_grid.reshape(-1)
    weights = np.outer(s_weights, t_weights).reshape(-1) * jacobian
    return np.tensordot(weights, function(points), axes=(0, 0))


def integrate_over_polygon(
    function: Integrand, polygon: ConvexPolygon, degree: int
) -> np.ndarray:
    """
    Integrates a function over a convex polygon by summing the collapsed
    Gauss-Legendre rule over a fan of triangles.

    :param function: a function mapping a k x 2 array of points to an array
        whose first axis has length k
    :param polygon: the convex polygon
    :param degree: the polynomial degree to integrate exactly
    :return: the integral
    """
    vertices = polygon.vertices
    if polygon.is_degenerate:
        return 0.0 * function(vertices[:1])[0]

    return sum(
        integrate_over_triangle(
            function, vertices[0], vertices[i], vertices[i + 1], degree
        )
        for i in range(1, vertices.shape[0] - 1)
    )


def integrate_over_ellipse(
    function: Integrand,
    center: np.ndarray,
    transformation: np.ndarray,
    degree: int,
    tol: float = 1e-10,
    max_refinements: int = 6,
) -> np.ndarray:
    """
    Integrates a function over the ellipse center + transformation * disk by
    pulling it back to the unit disk and applying a polar product rule of
    Gauss-Legendre nodes in the radius and equispaced nodes in the angle. The
    rule is refined until two successive estimates agree within the
    tolerance.

    :param function: a function mapping a k x 2 array of points to an array
        whose first axis has length k
    :param center: the center of the ellipse
    :param transformation: the 2 x 2 matrix mapping the unit disk onto the
        centered ellipse
    :param degree: the polynomial degree of the integrand
    :param tol: the absolute tolerance on the change between refinements
    :param max_refinements: the maximum number of refinements
    :return: the integral
    """
    center = np.asarray(center, dtype=float)
    transformation = np.asarray(transformation, dtype=float)
    determinant = abs(np.linalg.det(transformation))

    radial_count = degree // 2 + 2
    angular_count = degree + 2
    estimate = None
    for refinement in range(max_refinements + 1):
        r, r_weights = gauss_legendre(radial_count)
        phi = 2.0 * np.pi * np.arange(angular_count) / angular_count
        r_grid, phi_grid = np.meshgrid(r, phi, indexing="ij")
        disk_points = np.stack(
            [
                (r_grid * np.cos(phi_grid)).reshape(-1),
                (r_grid * np.sin(phi_grid)).reshape(-1),
            ],
            axis=-1,
        )
        points = center + disk_points @ transformation.T
        weights = (
            np.outer(r_weights * r, np.full(angular_count, 2.0 * np.pi))
            .reshape(-1)
            / angular_count
            * determinant
        )
        new_estimate = np.tensordot(weights, function(points), axes=(0, 0))

        if estimate is not None:
            change = np.abs(new_estimate - estimate).max()
            logger.debug(
                "ellipse quadrature refinement %d changed estimate by %g",
                refinement,
                change,
            )
            if change < tol:
                return new_estimate

        estimate = new_estimate
        radial_count *= 2
        angular_count *= 2

    raise RuntimeError(
        f"ellipse quadrature did not converge to tolerance {tol} within "
        f"{max_refinements} refinements"
    )


@lru_cache(maxsize=None)
def _reference_rule(count: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(count)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights
