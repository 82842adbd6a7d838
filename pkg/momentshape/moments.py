import logging
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import beta, comb, gammaln

from momentshape.geometry import ConvexPolygon
from momentshape.legendre_basis import DEFAULT_MAX_ORDER, LegendreBasis
from momentshape.quadrature import (
    gauss_legendre,
    integrate_over_ellipse,
    integrate_over_polygon,
)
from momentshape.shape import EllipseShape, PolygonShape, ShapeModel

logger = logging.getLogger(__name__)

ELLIPSE_QUADRATURE_TOLERANCE = 1e-10


class MomentKind(Enum):
    """
    An enumeration of the kinds of moments of a body.
    """

    GEOMETRIC = "geometric"
    LEGENDRE = "legendre"


class MomentGrid:
    """
    A square grid of the moments with indices 0 <= k, l <= N of a body; entry
    (k, l) is either the geometric moment mu_kl or the Legendre moment
    lambda_kl.
    """

    def __init__(self, kind: MomentKind, values: np.ndarray):
        """
        :param kind: the kind of the moments
        :param values: the (N + 1) x (N + 1) array of moments
        """
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(
                f"moment values must be a square matrix (got shape "
                f"{values.shape})"
            )
        if values.shape[0] == 0:
            raise ValueError("moment values must not be empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("moment values must be finite")

        self._kind = kind
        self._values = values
        self._values.setflags(write=False)

    @property
    def kind(self) -> MomentKind:
        """
        The kind of the moments.
        """
        return self._kind

    @property
    def order(self) -> int:
        """
        The highest moment index N.
        """
        return self._values.shape[0] - 1

    @property
    def values(self) -> np.ndarray:
        """
        The (N + 1) x (N + 1) array of moments.
        """
        return self._values

    @property
    def squared_norm(self) -> float:
        """
        The sum of the squares of the moments.
        """
        return float(np.sum(self._values**2))

    def truncated(self, order: int) -> "MomentGrid":
        """
        Returns the grid of the moments with indices up to the provided
        order.

        :param order: the new order
        :return: the truncated grid
        """
        if not 0 <= order <= self.order:
            raise ValueError(
                f"truncation order ({order}) must be between 0 and "
                f"{self.order}"
            )
        return MomentGrid(
            self._kind, self._values[: order + 1, : order + 1]
        )

    def scaled(self, factor: float) -> "MomentGrid":
        """
        Returns the grid with every moment multiplied by the provided factor.

        :param factor: the scaling factor
        :return: the scaled grid
        """
        return MomentGrid(self._kind, factor * self._values)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, MomentGrid)
            and self._kind == other._kind
            and np.array_equal(self._values, other._values)
        )

    def __repr__(self) -> str:
        return f"MomentGrid(kind={self._kind.value}, order={self.order})"


def polygon_geometric_moments(
    polygon: ConvexPolygon,
    order: int,
    max_order: int = DEFAULT_MAX_ORDER,
) -> MomentGrid:
    """
    Computes the geometric moments of a convex polygon as the signed sum of
    the moments of the fan triangles conv{0, v_i, v_{i+1}}. Degenerate
    polygons have all moments zero.

    :param polygon: the convex polygon
    :param order: the highest moment index N
    :param max_order: the highest order allowed
    :return: the geometric moment grid
    """
    _check_order(order, max_order)

    if polygon.is_degenerate:
        return MomentGrid(
            MomentKind.GEOMETRIC, np.zeros((order + 1, order + 1))
        )

    vertices = polygon.vertices
    return MomentGrid(
        MomentKind.GEOMETRIC,
        fan_moments(vertices, np.roll(vertices, -1, axis=0), order),
    )


def fan_moments(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """
    Returns the sum of the signed geometric moments of the triangles
    conv{0, a_i, b_i}, where the sign of each triangle is that of
    det(a_i, b_i). For the consecutive vertices of a closed counterclockwise
    vertex loop, the sum is the moment grid of the enclosed polygon.

    The moments of a single triangle are

        mu_kl = det(a, b) sum_{p <= k, q <= l} binom(k, p) binom(l, q)
            a_1^p b_1^{k-p} a_2^q b_2^{l-q} r! (k + l - r)! / (k + l + 2)!

    with r = p + q.

    :param a: the first vertices as an m x 2 array
    :param b: the second vertices as an m x 2 array
    :param order: the highest moment index N
    :return: the (N + 1) x (N + 1) array of moments
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    determinants = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]

    binomials = _binomials(order)
    x_terms = binomials * _powers_product(a[:, 0], b[:, 0], order)
    y_terms = binomials * _powers_product(a[:, 1], b[:, 1], order)
    weights = _simplex_weights(order)

    triangle_moments = np.einsum(
        "ikp,ilq,klpq->ikl", x_terms, y_terms, weights
    )
    return np.tensordot(determinants, triangle_moments, axes=(0, 0))


def polygon_legendre_moments(
    polygon: ConvexPolygon,
    basis: LegendreBasis,
    order: Optional[int] = None,
) -> MomentGrid:
    """
    Computes the Legendre moments of a convex polygon through Green's
    theorem as the boundary integral of F_k(x) L_l(y) dy, where F_k is the
    antiderivative of L_k. The integrand is a polynomial along each edge, so
    Gauss-Legendre quadrature with N + 1 nodes per edge is exact.

    :param polygon: the convex polygon
    :param basis: the Legendre basis
    :param order: the highest moment index N; defaults to the basis order
    :return: the Legendre moment grid
    """
    order = _resolve_order(order, basis)
    if polygon.is_degenerate:
        return MomentGrid(
            MomentKind.LEGENDRE, np.zeros((order + 1, order + 1))
        )

    vertices = polygon.vertices
    values = boundary_legendre_moments(
        vertices, np.roll(vertices, -1, axis=0), basis
    )
    return MomentGrid(MomentKind.LEGENDRE, values[: order + 1, : order + 1])


def boundary_legendre_moments(
    starts: np.ndarray, ends: np.ndarray, basis: LegendreBasis
) -> np.ndarray:
    """
    Returns the sum over the segments from starts[i] to ends[i] of the line
    integrals of F_k(x) L_l(y) dy. For a closed counterclockwise loop, the
    sum is the Legendre moment grid of the enclosed region.

    :param starts: the start points as an m x 2 array
    :param ends: the end points as an m x 2 array
    :param basis: the Legendre basis
    :return: the (N + 1) x (N + 1) array of moments
    """
    nodes, weights = gauss_legendre(basis.order + 1)
    differences = ends - starts
    points = (
        starts[:, np.newaxis, :]
        + nodes[np.newaxis, :, np.newaxis] * differences[:, np.newaxis, :]
    )
    antiderivatives = basis.antiderivatives(points[..., 0])
    values = basis.evaluate_all(points[..., 1])
    edge_weights = weights[np.newaxis, :] * differences[:, 1, np.newaxis]
    return np.einsum("eg,egk,egl->kl", edge_weights, antiderivatives, values)


def geometric_to_legendre(
    grid: MomentGrid, basis: LegendreBasis
) -> MomentGrid:
    """
    Transforms geometric moments into Legendre moments by Lambda = C M C^T.

    :param grid: the geometric moment grid
    :param basis: the Legendre basis of at least the order of the grid
    :return: the Legendre moment grid
    """
    if grid.kind != MomentKind.GEOMETRIC:
        raise ValueError(
            f"moment kind ({grid.kind.value}) must be geometric"
        )
    _check_basis_order(grid.order, basis)

    c = basis.coefficients[: grid.order + 1, : grid.order + 1]
    return MomentGrid(MomentKind.LEGENDRE, c @ grid.values @ c.T)


def legendre_to_geometric(
    grid: MomentGrid, basis: LegendreBasis
) -> MomentGrid:
    """
    Transforms Legendre moments into geometric moments by solving
    C M C^T = Lambda with two triangular solves.

    :param grid: the Legendre moment grid
    :param basis: the Legendre basis of at least the order of the grid
    :return: the geometric moment grid
    """
    if grid.kind != MomentKind.LEGENDRE:
        raise ValueError(f"moment kind ({grid.kind.value}) must be legendre")
    _check_basis_order(grid.order, basis)

    c = basis.coefficients[: grid.order + 1, : grid.order + 1]
    half = solve_triangular(c, grid.values, lower=True)
    values = solve_triangular(c, half.T, lower=True).T
    return MomentGrid(MomentKind.GEOMETRIC, values)


def shape_geometric_moments(shape: ShapeModel, order: int) -> MomentGrid:
    """
    Computes the geometric moments of a body in the unit square; exactly for
    polygons and by quadrature for ellipses.

    :param shape: the body
    :param order: the highest moment index N
    :return: the geometric moment grid
    """
    shape.validate_in_unit_square()
    if isinstance(shape, PolygonShape):
        return polygon_geometric_moments(shape.polygon, order)

    exponents = np.arange(order + 1)

    def monomials(points: np.ndarray) -> np.ndarray:
        x_powers = points[:, 0, np.newaxis] ** exponents
        y_powers = points[:, 1, np.newaxis] ** exponents
        return x_powers[:, :, np.newaxis] * y_powers[:, np.newaxis, :]

    return MomentGrid(
        MomentKind.GEOMETRIC, _integrate_shape(monomials, shape, 2 * order)
    )


def shape_legendre_moments(
    shape: ShapeModel, basis: LegendreBasis, order: Optional[int] = None
) -> MomentGrid:
    """
    Computes the Legendre moments of a body in the unit square; exactly for
    polygons and by quadrature for ellipses.

    :param shape: the body
    :param basis: the Legendre basis
    :param order: the highest moment index N; defaults to the basis order
    :return: the Legendre moment grid
    """
    order = _resolve_order(order, basis)
    shape.validate_in_unit_square()
    if isinstance(shape, PolygonShape):
        return polygon_legendre_moments(shape.polygon, basis, order)

    def products(points: np.ndarray) -> np.ndarray:
        x_values = basis.evaluate_all(points[:, 0])[:, : order + 1]
        y_values = basis.evaluate_all(points[:, 1])[:, : order + 1]
        return x_values[:, :, np.newaxis] * y_values[:, np.newaxis, :]

    return MomentGrid(
        MomentKind.LEGENDRE, _integrate_shape(products, shape, 2 * order)
    )


def moment_distance(a: MomentGrid, b: MomentGrid) -> float:
    """
    Returns the Euclidean distance of two moment grids of the same kind and
    order.

    :param a: the first grid
    :param b: the second grid
    :return: the square root of the sum of squared differences
    """
    if a.kind != b.kind:
        raise ValueError(
            f"moment kinds ({a.kind.value}, {b.kind.value}) must match"
        )
    if a.order != b.order:
        raise ValueError(f"moment orders ({a.order}, {b.order}) must match")

    return float(np.linalg.norm(a.values - b.values))


def circumradius_bound(grid: MomentGrid) -> float:
    """
    Returns an upper bound of the circumradius of a planar convex body from
    its geometric moments up to order 2,

        (2e Gamma(n + 3) / (Gamma(3) Gamma(n)))^(1/2) V^(1/n) I_2

    with n = 2, where V is the area and I_2 the normalized radius of gyration
    mu_00^(-3/2) (sum_j mu_00 mu_{2e_j} - mu_{e_j}^2)^(1/2).

    :param grid: the geometric moment grid of order at least 2
    :return: the upper bound
    """
    if grid.kind != MomentKind.GEOMETRIC:
        raise ValueError(
            f"moment kind ({grid.kind.value}) must be geometric"
        )
    if grid.order < 2:
        raise ValueError(f"moment order ({grid.order}) must be at least 2")

    mu = grid.values
    area = mu[0, 0]
    if area <= 0.0:
        raise ValueError(f"mu_00 ({area}) must be positive")

    dimension = 2
    log_factor = 0.5 * (
        np.log(2.0 * np.e)
        + gammaln(dimension + 3)
        - gammaln(3)
        - gammaln(dimension)
    )
    spread = max(
        area * mu[2, 0] - mu[1, 0] ** 2 + area * mu[0, 2] - mu[0, 1] ** 2,
        0.0,
    )
    gyration = area**-1.5 * np.sqrt(spread)
    return float(np.exp(log_factor) * area ** (1.0 / dimension) * gyration)


def _integrate_shape(function, shape: ShapeModel, degree: int) -> np.ndarray:
    if isinstance(shape, EllipseShape):
        return integrate_over_ellipse(
            function,
            shape.center,
            shape.transformation,
            degree,
            tol=ELLIPSE_QUADRATURE_TOLERANCE,
        )
    logger.debug(
        "integrating %s over its polygonal approximation",
        type(shape).__name__,
    )
    return integrate_over_polygon(function, shape.to_polygon(), degree)


def _check_order(order: int, max_order: int):
    if order < 0:
        raise ValueError(f"order ({order}) must be non-negative")
    if order > max_order:
        raise ValueError(
            f"order ({order}) must not exceed max order ({max_order})"
        )


def _check_basis_order(order: int, basis: LegendreBasis):
    if order > basis.order:
        raise ValueError(
            f"moment order ({order}) must not exceed basis order "
            f"({basis.order})"
        )


def _resolve_order(order: Optional[int], basis: LegendreBasis) -> int:
    if order is None:
        return basis.order
    if order < 0:
        raise ValueError(f"order ({order}) must be non-negative")
    _check_basis_order(order, basis)
    return order


def _powers_product(
    first: np.ndarray, second: np.ndarray, order: int
) -> np.ndarray:
    """
    Returns the m x (N + 1) x (N + 1) array with entries
    first^p second^(k - p) for p <= k and zero otherwise.
    """
    k = np.arange(order + 1)[:, np.newaxis]
    p = np.arange(order + 1)[np.newaxis, :]
    exponents = np.clip(k - p, 0, None)
    products = (
        first[:, np.newaxis, np.newaxis] ** p[np.newaxis]
        * second[:, np.newaxis, np.newaxis] ** exponents[np.newaxis]
    )
    return np.where((p <= k)[np.newaxis], products, 0.0)


@lru_cache(maxsize=None)
def _binomials(order: int) -> np.ndarray:
    k = np.arange(order + 1)[:, np.newaxis]
    p = np.arange(order + 1)[np.newaxis, :]
    binomials = comb(k, p)
    binomials.setflags(write=False)
    return binomials


@lru_cache(maxsize=None)
def _simplex_weights(order: int) -> np.ndarray:
    """
    Returns the (N + 1)^4 array of r! (k + l - r)! / (k + l + 2)! indexed by
    (k, l, p, q) with r = p + q, zero wherever p > k or q > l.
    """
    k, l, p, q = np.meshgrid(*[np.arange(order + 1)] * 4, indexing="ij")
    r = p + q
    m = k + l
    weights = np.where(
        (p <= k) & (q <= l),
        beta(r + 1, np.clip(m - r, 0, None) + 1) / (m + 2),
        0.0,
    )
    weights.setflags(write=False)
    return weights
