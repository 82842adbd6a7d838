from functools import lru_cache
from typing import Tuple, Union

import numpy as np
import sympy as sp

DEFAULT_MAX_ORDER = 20

IntegerCoefficients = Tuple[Tuple[int, ...], ...]


class LegendreBasis:
    """
    The shifted Legendre polynomials on [0, 1] normalized to unit L2 norm,

        L_i(x) = sum_j C_ij x^j,   i = 0, ..., N,

    with positive leading coefficients. The coefficients are derived in exact
    rational arithmetic and only converted to floating point at the end.
    """

    def __init__(self, order: int, max_order: int = DEFAULT_MAX_ORDER):
        """
        :param order: the highest polynomial degree N of the basis
        :param max_order: the highest order the basis may be built for
        """
        if order < 0:
            raise ValueError(f"order ({order}) must be non-negative")
        if max_order < 0:
            raise ValueError(f"max order ({max_order}) must be non-negative")
        if order > max_order:
            raise ValueError(
                f"order ({order}) must not exceed max order ({max_order})"
            )

        self._order = order
        self._max_order = max_order
        self._integer_coefficients = _shifted_legendre_coefficients(order)

        coefficients = np.zeros((order + 1, order + 1))
        for i, row in enumerate(self._integer_coefficients):
            norm = sp.sqrt(2 * i + 1)
            for j, coefficient in enumerate(row):
                coefficients[i, j] = float(norm * coefficient)

        self._coefficients = coefficients
        self._coefficients.setflags(write=False)

    @property
    def order(self) -> int:
        """
        The highest polynomial degree N of the basis.
        """
        return self._order

    @property
    def max_order(self) -> int:
        """
        The highest order the basis may be built for.
        """
        return self._max_order

    @property
    def coefficients(self) -> np.ndarray:
        """
        The lower-triangular coefficient matrix C whose i-th row holds the
        monomial coefficients of L_i.
        """
        return self._coefficients

    @property
    def integer_coefficients(self) -> IntegerCoefficients:
        """
        The exact integer coefficients of the unnormalized shifted Legendre
        polynomials; row i multiplied by sqrt(2i + 1) gives row i of C.
        """
        return self._integer_coefficients

    def evaluate(
        self, i: int, x: Union[float, np.ndarray]
    ) -> Union[float, np.ndarray]:
        """
        Evaluates L_i at the provided points.

        :param i: the index of the polynomial
        :param x: the point or points in [0, 1]
        :return: the value or values of L_i
        """
        self._check_index(i)
        values = self.evaluate_all(x)[..., i]
        return float(values) if np.ndim(values) == 0 else values

    def evaluate_all(self, x: Union[float, np.ndarray]) -> np.ndarray:
        """
        Evaluates all polynomials of the basis at the provided points using
        the three-term recurrence.

        :param x: the point or points in [0, 1]
        :return: an array of shape x.shape + (N + 1,)
        """
        return _normalized_values(np.asarray(x, dtype=float), self._order)

    def evaluate_monomial(
        self, i: int, x: Union[float, np.ndarray]
    ) -> Union[float, np.ndarray]:
        """
        Evaluates L_i from its row of the coefficient matrix by Horner's
        scheme.

        :param i: the index of the polynomial
        :param x: the point or points in [0, 1]
        :return: the value or values of L_i
        """
        self._check_index(i)
        x = np.asarray(x, dtype=float)
        value = np.zeros_like(x)
        for coefficient in self._coefficients[i, i::-1]:
            value = value * x + coefficient
        return float(value) if value.ndim == 0 else value

    def antiderivatives(self, x: Union[float, np.ndarray]) -> np.ndarray:
        """
        Evaluates the integrals of all polynomials of the basis from 0 to the
        provided points.

        :param x: the point or points in [0, 1]
        :return: an array of shape x.shape + (N + 1,)
        """
        x = np.asarray(x, dtype=float)
        shifted = _shifted_values(x, self._order + 1)
        integrals = np.empty(x.shape + (self._order + 1,))
        integrals[..., 0] = x
        for i in range(1, self._order + 1):
            integrals[..., i] = (
                shifted[..., i + 1] - shifted[..., i - 1]
            ) / (2.0 * np.sqrt(2 * i + 1))
        return integrals

    def inverse_hilbert_residual(self) -> float:
        """
        Returns the max-norm of C^T C H_N - I computed in floating point. In
        exact arithmetic C^T C is the inverse of the Hilbert matrix.
        """
        product = self._coefficients.T @ self._coefficients
        residual = product @ hilbert_matrix(self._order) - np.eye(
            self._order + 1
        )
        return float(np.abs(residual).max())

    def _check_index(self, i: int):
        if not 0 <= i <= self._order:
            raise ValueError(
                f"polynomial index ({i}) must be between 0 and order "
                f"({self._order})"
            )


def build_basis(
    order: int, max_order: int = DEFAULT_MAX_ORDER
) -> LegendreBasis:
    """
    Builds the shifted, normalized Legendre basis up to the provided order.

    :param order: the highest polynomial degree N
    :param max_order: the highest order allowed
    :return: the Legendre basis
    """
    return LegendreBasis(order, max_order)


def hilbert_matrix(order: int) -> np.ndarray:
    """
    Returns the Hilbert matrix H_N with entries 1 / (i + j + 1) for
    i, j = 0, ..., N.

    :param order: the order N
    :return: the (N + 1) x (N + 1) Hilbert matrix
    """
    if order < 0:
        raise ValueError(f"order ({order}) must be non-negative")

    indices = np.arange(order + 1)
    return 1.0 / (indices[:, np.newaxis] + indices[np.newaxis, :] + 1.0)


def exact_hilbert_matrix(order: int) -> sp.Matrix:
    """
    Returns the Hilbert matrix H_N with rational entries.

    :param order: the order N
    :return: the (N + 1) x (N + 1) Hilbert matrix
    """
    if order < 0:
        raise ValueError(f"order ({order}) must be non-negative")

    return sp.Matrix(
        order + 1, order + 1, lambda i, j: sp.Rational(1, i + j + 1)
    )


def hilbert_trace_bound(order: int) -> float:
    """
    Returns the upper bound 1 + ln(2N + 1) / 2 of the trace of H_N.

    :param order: the order N
    :return: the trace bound
    """
    if order < 0:
        raise ValueError(f"order ({order}) must be non-negative")

    return 1.0 + 0.5 * np.log(2.0 * order + 1.0)


def hilbert_residual_tolerance(basis: LegendreBasis) -> float:
    """
    Returns a tolerance for the floating point residual of C^T C H_N = I that
    accounts for the magnitude of the entries of C^T C.

    :param basis: the Legendre basis
    :return: the tolerance
    """
    product = basis.coefficients.T @ basis.coefficients
    return (
        64.0 * (basis.order + 1) * np.finfo(float).eps * np.abs(product).max()
    )


@lru_cache(maxsize=None)
def _shifted_legendre_coefficients(order: int) -> IntegerCoefficients:
    """
    Computes the integer coefficients of the shifted Legendre polynomials
    P_i(2x - 1) via (i + 1) P_{i+1} = (2i + 1)(2x - 1) P_i - i P_{i-1}.

    :param order: the highest degree
    :return: the coefficients in ascending powers, one row per degree
    """
    x = sp.Symbol("x")
    polynomials = [sp.Poly(1, x, domain=sp.QQ)]
    if order >= 1:
        polynomials.append(sp.Poly(2 * x - 1, x, domain=sp.QQ))
    for i in range(1, order):
        next_polynomial = (
            sp.Poly((2 * i + 1) * (2 * x - 1), x, domain=sp.QQ)
            * polynomials[i]
            - polynomials[i - 1].mul_ground(i)
        ).quo_ground(i + 1)
        polynomials.append(next_polynomial)

    rows = []
    for polynomial in polynomials[: order + 1]:
        coefficients = polynomial.all_coeffs()[::-1]
        if any(not c.is_integer for c in coefficients):
            raise RuntimeError(
                "shifted Legendre coefficients must be integers"
            )
        rows.append(tuple(int(c) for c in coefficients))
    return tuple(rows)


def _shifted_values(x: np.ndarray, order: int) -> np.ndarray:
    values = np.empty(x.shape + (order + 1,))
    values[..., 0] = 1.0
    if order >= 1:
        values[..., 1] = 2.0 * x - 1.0
    for i in range(1, order):
        values[..., i + 1] = (
            (2 * i + 1) * (2.0 * x - 1.0) * values[..., i]
            - i * values[..., i - 1]
        ) / (i + 1)
    return values


def _normalized_values(x: np.ndarray, order: int) -> np.ndarray:
    return _shifted_values(x, order) * np.sqrt(2.0 * np.arange(order + 1) + 1)
