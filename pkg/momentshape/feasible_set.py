import logging
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.optimize import nnls

from momentshape.geometry import DirectionSet, consistency_matrix, vertex_map

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-9
DYKSTRA_MAX_SWEEPS = 20000
DYKSTRA_TOLERANCE = 1e-13
NNLS_EMPTY_TOLERANCE = 1e-12
INTERIOR_RADIUS = 0.25


class ProjectionMethod(Enum):
    """
    An enumeration of the methods of projecting onto the feasible set.
    """

    NNLS = "nnls"
    DYKSTRA = "dykstra"


class FeasibleSet:
    """
    The polyhedron A_n of support vectors h whose polygons P(h) have
    prescribed outer normals and lie in the unit square, given by the linear
    inequalities A h <= b consisting of

    * the n consistency inequalities, and
    * the 4n inequalities 0 <= v_i <= 1 on both coordinates of every vertex.

    The rows of A are normalized to unit length. The support values of the
    disk of radius 1/4 centered in the unit square satisfy all inequalities
    strictly.
    """

    def __init__(self, directions: DirectionSet):
        """
        :param directions: the outer normal directions
        """
        n = len(directions)
        vertex_rows = vertex_map(directions).reshape(2 * n, n)
        matrix = np.vstack(
            [-consistency_matrix(directions), vertex_rows, -vertex_rows]
        )
        offsets = np.concatenate(
            [np.zeros(n), np.ones(2 * n), np.zeros(2 * n)]
        )

        norms = np.linalg.norm(matrix, axis=1)
        self._directions = directions
        self._matrix = matrix / norms[:, np.newaxis]
        self._offsets = offsets / norms

        self._interior_point = (
            directions.normals @ np.array([0.5, 0.5]) + INTERIOR_RADIUS
        )
        self._slacks = self._offsets - self._matrix @ self._interior_point

        self._matrix.setflags(write=False)
        self._offsets.setflags(write=False)
        self._interior_point.setflags(write=False)

    @property
    def directions(self) -> DirectionSet:
        """
        The outer normal directions.
        """
        return self._directions

    @property
    def matrix(self) -> np.ndarray:
        """
        The 5n x n constraint matrix A with unit rows.
        """
        return self._matrix

    @property
    def offsets(self) -> np.ndarray:
        """
        The right-hand side b of the constraints.
        """
        return self._offsets

    @property
    def interior_point(self) -> np.ndarray:
        """
        A strictly feasible point, the support values of the disk of radius
        1/4 centered in the unit square.
        """
        return self._interior_point

    def violation(self, h: Sequence[float]) -> float:
        """
        Returns the largest violation max(A h - b) of the constraints, or zero
        if h is feasible.

        :param h: the support values
        :return: the non-negative constraint violation
        """
        excess = self._matrix @ self._check(h) - self._offsets
        return float(max(excess.max(), 0.0))

    def contains(
        self, h: Sequence[float], tol: float = FEASIBILITY_TOLERANCE
    ) -> bool:
        """
        Returns whether h satisfies the constraints up to the tolerance.

        :param h: the support values
        :param tol: the tolerance of the constraints
        :return: whether h is feasible
        """
        return self.violation(h) <= tol

    def project(
        self,
        h: Sequence[float],
        method: Union[ProjectionMethod, str] = ProjectionMethod.NNLS,
    ) -> np.ndarray:
        """
        Returns the point of the feasible set closest to h in the Euclidean
        norm.

        Both methods work on the problem shifted to the interior point and
        scaled by the distance of h from it, so the projection of far away
        points stays well conditioned.

        :param h: the support values
        :param method: the projection method; if the non-negative least
            squares projection fails, Dykstra's method is used instead
        :return: the projected support values
        """
        h = self._check(h)
        method = ProjectionMethod(method)
        if not np.all(np.isfinite(h)):
            raise ValueError("support values must be finite")
        if self.violation(h) == 0.0:
            return h.copy()

        scale = max(1.0, float(np.linalg.norm(h - self._interior_point)))
        point = (h - self._interior_point) / scale
        slacks = self._slacks / scale

        if method == ProjectionMethod.NNLS:
            try:
                projected = self._project_nnls(point, slacks)
                return self._interior_point + scale * projected
            except RuntimeError as error:
                logger.warning(
                    "least distance projection failed (%s); falling back to "
                    "Dykstra's method",
                    error,
                )

        projected = self._project_dykstra(point, slacks)
        return self._interior_point + scale * projected

    def _project_nnls(
        self, point: np.ndarray, slacks: np.ndarray
    ) -> np.ndarray:
        """
        Solves the least distance problem min |z| subject to
        A (point + z) <= slacks through its dual non-negative least squares
        problem.
        """
        g = self._matrix @ point - slacks
        e = np.vstack([-self._matrix.T, g[np.newaxis, :]])
        f = np.zeros(e.shape[0])
        f[-1] = 1.0

        u, _ = nnls(e, f, maxiter=50 * e.shape[1])
        residual = e @ u - f
        if np.linalg.norm(residual) < NNLS_EMPTY_TOLERANCE or (
            residual[-1] >= 0.0
        ):
            raise RuntimeError("least distance problem reported no solution")

        projected = point - residual[:-1] / residual[-1]
        excess = float((self._matrix @ projected - slacks).max())
        if excess > FEASIBILITY_TOLERANCE:
            raise RuntimeError(
                f"projection violates the constraints by {excess}"
            )
        return projected

    def _project_dykstra(
        self, point: np.ndarray, slacks: np.ndarray
    ) -> np.ndarray:
        """
        Projects onto the intersection of the halfspaces A z <= slacks by
        Dykstra's alternating projection with correction terms.
        """
        projected = point.copy()
        corrections = np.zeros_like(self._matrix)
        for sweep in range(DYKSTRA_MAX_SWEEPS):
            previous = projected.copy()
            for row, (normal, offset) in enumerate(zip(self._matrix, slacks)):
                corrected = projected + corrections[row]
                excess = max(normal @ corrected - offset, 0.0)
                projected = corrected - excess * normal
                corrections[row] = corrected - projected

            if (
                np.linalg.norm(projected - previous) < DYKSTRA_TOLERANCE
                and (self._matrix @ projected - slacks).max()
                <= FEASIBILITY_TOLERANCE
            ):
                logger.debug("Dykstra's method converged in %d sweeps", sweep)
                return projected

        raise RuntimeError(
            f"Dykstra's method did not converge in {DYKSTRA_MAX_SWEEPS} sweeps"
        )

    def _check(self, h: Sequence[float]) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if h.shape != (len(self._directions),):
            raise ValueError(
                f"shape of support values {h.shape} must match number of "
                f"directions ({len(self._directions)})"
            )
        return h
