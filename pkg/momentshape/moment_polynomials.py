import logging
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from momentshape.geometry import DirectionSet, SupportVector, vertex_map
from momentshape.legendre_basis import LegendreBasis
from momentshape.moments import (
    MomentGrid,
    MomentKind,
    boundary_legendre_moments,
    fan_moments,
)
from momentshape.quadrature import gauss_legendre

logger = logging.getLogger(__name__)

TENSOR_PRECISION = 60


class MomentPolynomials:
    """
    The moments of the polygons P(h) with a fixed set of outer normals as
    polynomials in the support values h.

    The vertices of P(h) are linear in h, so every moment is a polynomial of
    degree k + l + 2 in h. The polynomials are evaluated in factored form
    (fan triangles for the geometric moments, boundary quadrature for the
    Legendre moments) together with their exact Jacobians. The fully expanded
    coefficient tensors are built on first access in high precision.
    """

    def __init__(
        self,
        directions: DirectionSet,
        basis: LegendreBasis,
        order: Optional[int] = None,
    ):
        """
        :param directions: the outer normal directions
        :param basis: the Legendre basis
        :param order: the highest moment index N; defaults to the basis order
        """
        if order is None:
            order = basis.order
        if not 0 <= order <= basis.order:
            raise ValueError(
                f"order ({order}) must be between 0 and the basis order "
                f"({basis.order})"
            )

        self._directions = directions
        self._basis = basis
        self._order = order

        self._vertex_map = vertex_map(directions)
        self._vertex_map.setflags(write=False)
        normals = directions.normals
        self._tangents = np.stack([-normals[:, 1], normals[:, 0]], axis=-1)
        self._nodes, self._weights = gauss_legendre(order + 1)

        self._tensors: Optional[ExpandedMomentTensors] = None

    @property
    def directions(self) -> DirectionSet:
        """
        The outer normal directions.
        """
        return self._directions

    @property
    def basis(self) -> LegendreBasis:
        """
        The Legendre basis.
        """
        return self._basis

    @property
    def order(self) -> int:
        """
        The highest moment index N.
        """
        return self._order

    @property
    def vertex_map(self) -> np.ndarray:
        """
        The n x 2 x n array mapping support vectors to the vertices of P(h).
        """
        return self._vertex_map

    @property
    def tensors(self) -> "ExpandedMomentTensors":
        """
        The expanded coefficient tensors of the moment polynomials.
        """
        if self._tensors is None:
            logger.info(
                "expanding moment polynomials for %d directions up to order "
                "%d",
                len(self._directions),
                self._order,
            )
            self._tensors = ExpandedMomentTensors(
                self._directions, self._basis, self._order
            )
        return self._tensors

    def vertices(self, h: Sequence[float]) -> np.ndarray:
        """
        Returns the n vertices of P(h) without merging duplicates. For
        inconsistent h, the vertices form a self-overlapping loop.

        :param h: the support values
        :return: an n x 2 array of vertices
        """
        return self._vertex_map @ self._check_support(h)

    def geometric_moments(self, h: Sequence[float]) -> np.ndarray:
        """
        Evaluates the geometric moment polynomials at h.

        :param h: the support values
        :return: the (N + 1) x (N + 1) array of geometric moments
        """
        vertices = self.vertices(h)
        return fan_moments(
            vertices, np.roll(vertices, -1, axis=0), self._order
        )

    def legendre_moments(self, h: Sequence[float]) -> np.ndarray:
        """
        Evaluates the Legendre moment polynomials at h.

        :param h: the support values
        :return: the (N + 1) x (N + 1) array of Legendre moments
        """
        vertices = self.vertices(h)
        values = boundary_legendre_moments(
            vertices, np.roll(vertices, -1, axis=0), self._basis
        )
        return values[: self._order + 1, : self._order + 1]

    def legendre_jacobian(self, h: Sequence[float]) -> np.ndarray:
        """
        Evaluates the derivatives of the Legendre moment polynomials with
        respect to the support values. The derivative of lambda_kl with
        respect to h_j is the integral of L_k(x) L_l(y) over the edge of P(h)
        with outer normal u_j, taken with the signed edge length.

        :param h: the support values
        :return: an (N + 1) x (N + 1) x n array of partial derivatives
        """
        vertices = self.vertices(h)
        starts = np.roll(vertices, 1, axis=0)
        differences = vertices - starts
        lengths = np.sum(differences * self._tangents, axis=1)

        points = (
            starts[:, np.newaxis, :]
            + self._nodes[np.newaxis, :, np.newaxis]
            * differences[:, np.newaxis, :]
        )
        x_values = self._basis.evaluate_all(points[..., 0])
        y_values = self._basis.evaluate_all(points[..., 1])
        edge_weights = self._weights[np.newaxis, :] * lengths[:, np.newaxis]
        jacobian = np.einsum(
            "jg,jgk,jgl->klj", edge_weights, x_values, y_values
        )
        return jacobian[: self._order + 1, : self._order + 1]

    def geometric_tensor(self, k: int, l: int) -> np.ndarray:
        """
        Returns the coefficients M_kl(i, q1, q2) of

            mu_kl(P(h)) = sum_i sum_{q1 + q2 <= k + l + 2} M_kl(i, q1, q2)
                h_i^q1 h_{i+1}^q2 h_{i+2}^(k + l + 2 - q1 - q2).

        :param k: the moment index in x
        :param l: the moment index in y
        :return: an n x (k + l + 3) x (k + l + 3) array
        """
        return self.tensors.geometric_tensor(k, l).astype(float)

    def legendre_tensor(self, k: int, l: int) -> np.ndarray:
        """
        Returns the coefficients L_kl(i, s, q1, q2) of

            lambda_kl(P(h)) = sum_i sum_s sum_{q1 + q2 <= s + 2}
                L_kl(i, s, q1, q2) h_i^q1 h_{i+1}^q2 h_{i+2}^(s + 2 - q1 - q2).

        :param k: the moment index in x
        :param l: the moment index in y
        :return: an n x (k + l + 1) x (k + l + 3) x (k + l + 3) array
        """
        return self.tensors.legendre_tensor(k, l).astype(float)

    def evaluate_tensors(
        self, h: Sequence[float], kind: MomentKind
    ) -> MomentGrid:
        """
        Evaluates the expanded moment polynomials at h in high precision.

        :param h: the support values
        :param kind: the kind of moments to evaluate
        :return: the moment grid
        """
        h = self._check_support(h)
        if kind == MomentKind.GEOMETRIC:
            return MomentGrid(kind, self.tensors.evaluate_geometric(h))
        return MomentGrid(kind, self.tensors.evaluate_legendre(h))

    def _check_support(self, h: Sequence[float]) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if h.shape != (len(self._directions),):
            raise ValueError(
                f"shape of support values {h.shape} must match number of "
                f"directions ({len(self._directions)})"
            )
        return h


class ExpandedMomentTensors:
    """
    The coefficient tensors of the moment polynomials obtained by expanding
    the fan-triangle formula in h_i, h_{i+1} and h_{i+2}. The expansion
    cancels heavily, so coefficients and evaluations use mpmath with
    TENSOR_PRECISION significant digits.
    """

    def __init__(
        self, directions: DirectionSet, basis: LegendreBasis, order: int
    ):
        """
        :param directions: the outer normal directions
        :param basis: the Legendre basis
        :param order: the highest moment index N
        """
        self._n = len(directions)
        self._order = order
        self._geometric: Dict[Tuple[int, int], np.ndarray] = {}
        self._legendre: Dict[Tuple[int, int], np.ndarray] = {}

        with mpmath.workdps(TENSOR_PRECISION):
            self._coefficients = [
                [
                    mpmath.sqrt(2 * i + 1) * c
                    for c in basis.integer_coefficients[i]
                ]
                for i in range(order + 1)
            ]
            self._build_linear_forms(directions)
            self._build_powers()

    def geometric_tensor(self, k: int, l: int) -> np.ndarray:
        """
        Returns the coefficients M_kl as an n x (k + l + 3) x (k + l + 3)
        object array of mpmath numbers.
        """
        self._check_indices(k, l)
        if (k, l) not in self._geometric:
            with mpmath.workdps(TENSOR_PRECISION):
                self._geometric[k, l] = self._expand_geometric(k, l)
        return self._geometric[k, l]

    def legendre_tensor(self, k: int, l: int) -> np.ndarray:
        """
        Returns the coefficients L_kl as an
        n x (k + l + 1) x (k + l + 3) x (k + l + 3) object array of mpmath
        numbers.
        """
        self._check_indices(k, l)
        if (k, l) not in self._legendre:
            with mpmath.workdps(TENSOR_PRECISION):
                self._legendre[k, l] = self._expand_legendre(k, l)
        return self._legendre[k, l]

    def evaluate_geometric(self, h: np.ndarray) -> np.ndarray:
        """
        Evaluates all geometric moment polynomials at h.
        """
        values = np.empty((self._order + 1, self._order + 1))
        with mpmath.workdps(TENSOR_PRECISION):
            monomials = self._monomials(h)
            for k in range(self._order + 1):
                for l in range(self._order + 1):
                    values[k, l] = float(
                        np.sum(
                            self.geometric_tensor(k, l) * monomials[k + l + 2]
                        )
                    )
        return values

    def evaluate_legendre(self, h: np.ndarray) -> np.ndarray:
        """
        Evaluates all Legendre moment polynomials at h.
        """
        values = np.empty((self._order + 1, self._order + 1))
        with mpmath.workdps(TENSOR_PRECISION):
            monomials = self._monomials(h)
            for k in range(self._order + 1):
                for l in range(self._order + 1):
                    tensor = self.legendre_tensor(k, l)
                    total = mpmath.mpf(0)
                    for s in range(k + l + 1):
                        degree = s + 2
                        total += np.sum(
                            tensor[:, s, : degree + 1, : degree + 1]
                            * monomials[degree]
                        )
                    values[k, l] = float(total)
        return values

    def _check_indices(self, k: int, l: int):
        if not (0 <= k <= self._order and 0 <= l <= self._order):
            raise ValueError(
                f"moment indices ({k}, {l}) must be between 0 and order "
                f"({self._order})"
            )

    def _build_linear_forms(self, directions: DirectionSet):
        """
        Writes v_i = (x1 h_i + y1 h_{i+1}, x2 h_i + y2 h_{i+1}) and stores
        the coefficient arrays of the fan triangle conv{0, v_i, v_{i+1}} in
        the variables x = h_i, y = h_{i+1} and z = h_{i+2}.
        """
        c = [mpmath.mpf(float(value)) for value in directions.normals[:, 0]]
        s = [mpmath.mpf(float(value)) for value in directions.normals[:, 1]]
        n = self._n

        x1, y1, x2, y2 = (_objects(n) for _ in range(4))
        for i in range(n):
            j = (i + 1) % n
            denominator = c[i] * s[j] - s[i] * c[j]
            x1[i] = s[j] / denominator
            y1[i] = -s[i] / denominator
            x2[i] = -c[j] / denominator
            y2[i] = c[i] / denominator

        following = np.roll(np.arange(n), -1)
        self._a = (x1, y1, x2, y2)
        self._b = (x1[following], y1[following], x2[following], y2[following])

        by1, bz1, by2, bz2 = self._b
        self._determinant = (
            x1 * by2 - x2 * by1,
            x1 * bz2 - x2 * bz1,
            y1 * by2 - y2 * by1,
            y1 * bz2 - y2 * bz1,
        )

    def _build_powers(self):
        """
        Tabulates a_1^p a_2^q as homogeneous forms in (x, y) indexed by the
        power of x, and b_1^p b_2^q as forms in (y, z) indexed by the power
        of z, for all p, q <= N.
        """
        x1, y1, x2, y2 = self._a
        by1, bz1, by2, bz2 = self._b
        self._a_powers = _power_table(
            self._n, self._order, (y1, x1), (y2, x2)
        )
        self._b_powers = _power_table(
            self._n, self._order, (by1, bz1), (by2, bz2)
        )

    def _expand_geometric(self, k: int, l: int) -> np.ndarray:
        m = k + l
        products = np.full((self._n, m + 1, m + 1), mpmath.mpf(0))
        for p in range(k + 1):
            for q in range(l + 1):
                r = p + q
                weight = mpmath.mpf(
                    comb(k, p) * comb(l, q) * factorial(r) * factorial(m - r)
                ) / factorial(m + 2)
                a = self._a_powers[p][q]
                b = self._b_powers[k - p][l - q]
                products[:, : r + 1, : m - r + 1] += (
                    weight * a[:, :, np.newaxis] * b[:, np.newaxis, :]
                )

        xy, xz, yy, yz = (
            d[:, np.newaxis, np.newaxis] for d in self._determinant
        )
        expanded = np.full((self._n, m + 3, m + 3), mpmath.mpf(0))
        expanded[:, 1 : m + 2, : m + 1] += xy * products
        expanded[:, 1 : m + 2, 1 : m + 2] += xz * products
        expanded[:, : m + 1, : m + 1] += yy * products
        expanded[:, : m + 1, 1 : m + 2] += yz * products

        degree = m + 2
        tensor = np.full((self._n, degree + 1, degree + 1), mpmath.mpf(0))
        for q1 in range(degree + 1):
            for q3 in range(degree + 1 - q1):
                tensor[:, q1, degree - q1 - q3] = expanded[:, q1, q3]
        return tensor

    def _expand_legendre(self, k: int, l: int) -> np.ndarray:
        size = k + l + 3
        tensor = np.full((self._n, k + l + 1, size, size), mpmath.mpf(0))
        for s in range(k + l + 1):
            for q in range(max(s - k, 0), min(s, l) + 1):
                weight = (
                    self._coefficients[k][s - q] * self._coefficients[l][q]
                )
                if weight == 0:
                    continue
                tensor[:, s, : s + 3, : s + 3] += (
                    weight * self.geometric_tensor(s - q, q)
                )
        return tensor

    def _monomials(self, h: np.ndarray) -> List[Optional[np.ndarray]]:
        """
        Returns, for every degree d up to 2N + 2, the n x (d + 1) x (d + 1)
        array of h_i^q1 h_{i+1}^q2 h_{i+2}^(d - q1 - q2), zero where
        q1 + q2 > d.
        """
        n = self._n
        max_degree = 2 * self._order + 2
        values = [mpmath.mpf(float(value)) for value in h]
        powers = np.empty((n, max_degree + 1), dtype=object)
        for i in range(n):
            power = mpmath.mpf(1)
            for e in range(max_degree + 1):
                powers[i, e] = power
                power *= values[i]

        x_powers = powers
        y_powers = powers[np.roll(np.arange(n), -1)]
        z_powers = powers[np.roll(np.arange(n), -2)]

        monomials: List[Optional[np.ndarray]] = [None, None]
        for degree in range(2, max_degree + 1):
            table = np.full((n, degree + 1, degree + 1), mpmath.mpf(0))
            for q1 in range(degree + 1):
                for q2 in range(degree + 1 - q1):
                    table[:, q1, q2] = (
                        x_powers[:, q1]
                        * y_powers[:, q2]
                        * z_powers[:, degree - q1 - q2]
                    )
            monomials.append(table)
        return monomials


def moments_from_support(
    mp: MomentPolynomials, h: Sequence[float], check: bool = True
) -> MomentGrid:
    """
    Evaluates the geometric moments of P(h).

    :param mp: the moment polynomials of the directions of h
    :param h: the support values
    :param check: whether to reject inconsistent support values
    :return: the geometric moment grid
    """
    if check:
        _check_consistent(mp, h)
    return MomentGrid(MomentKind.GEOMETRIC, mp.geometric_moments(h))


def legendre_moments_from_support(
    mp: MomentPolynomials, h: Sequence[float], check: bool = True
) -> MomentGrid:
    """
    Evaluates the Legendre moments of P(h).

    :param mp: the moment polynomials of the directions of h
    :param h: the support values
    :param check: whether to reject inconsistent support values
    :return: the Legendre moment grid
    """
    if check:
        _check_consistent(mp, h)
    return MomentGrid(MomentKind.LEGENDRE, mp.legendre_moments(h))


def _check_consistent(mp: MomentPolynomials, h: Sequence[float]):
    sv = SupportVector(mp.directions, h)
    if not sv.is_consistent():
        residuals = sv.consistency_residuals()
        index = int(np.argmin(residuals))
        raise ValueError(
            f"support vector must be consistent (inequality {index} violated "
            f"by {-residuals[index]})"
        )


def _objects(size: int) -> np.ndarray:
    return np.empty(size, dtype=object)


def _power_table(
    n: int,
    order: int,
    first: Tuple[np.ndarray, np.ndarray],
    second: Tuple[np.ndarray, np.ndarray],
) -> List[List[np.ndarray]]:
    """
    Tabulates f^p g^q for the linear forms f = f0 u + f1 w and
    g = g0 u + g1 w as arrays of coefficients indexed by the power of w.
    """
    one = np.full((n, 1), mpmath.mpf(1))
    table: List[List[np.ndarray]] = []
    for p in range(order + 1):
        row = [one if p == 0 else _multiply_linear(table[p - 1][0], first)]
        for q in range(1, order + 1):
            row.append(_multiply_linear(row[q - 1], second))
        table.append(row)
    return table


def _multiply_linear(
    form: np.ndarray, linear: Tuple[np.ndarray, np.ndarray]
) -> np.ndarray:
    constant, variable = (
        coefficient[:, np.newaxis] for coefficient in linear
    )
    product = np.full(
        (form.shape[0], form.shape[1] + 1), mpmath.mpf(0)
    )
    product[:, :-1] += form * constant
    product[:, 1:] += form * variable
    return product
