from abc import ABC, abstractmethod
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.special import ellipe

from momentshape.geometry import (
    AXIS_ANGLES,
    ConvexPolygon,
    DirectionSet,
    SupportVector,
)

UNIT_SQUARE_TOLERANCE = 1e-12
ENCLOSING_TOLERANCE = 1e-12


class ShapeModel(ABC):
    """
    A base class for convex bodies used as ground truths.
    """

    @abstractmethod
    def support_value(
        self, theta: Union[float, np.ndarray]
    ) -> Union[float, np.ndarray]:
        """
        Returns the support function of the body in the direction or
        directions theta.

        :param theta: the direction angle or angles in radians
        :return: the support value or values
        """

    @abstractmethod
    def to_polygon(self, resolution: int = 1024) -> ConvexPolygon:
        """
        Returns a polygonal approximation of the body whose vertices lie on
        its boundary. Polygons return themselves.

        :param resolution: the number of boundary points
        :return: the inscribed polygon
        """

    @property
    @abstractmethod
    def area(self) -> float:
        """
        The area of the body.
        """

    @property
    @abstractmethod
    def perimeter(self) -> float:
        """
        The perimeter of the body.
        """

    @abstractmethod
    def circumradius(self) -> float:
        """
        Returns the radius of the smallest disk containing the body.
        """

    def bounding_box(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        """
        Returns the axis-aligned bounding box ((x_min, x_max), (y_min,
        y_max)) from the support values in the four axis directions.
        """
        right, top, left, bottom = (
            float(self.support_value(angle)) for angle in AXIS_ANGLES
        )
        return (-left, right), (-bottom, top)

    def validate_in_unit_square(self, tol: float = UNIT_SQUARE_TOLERANCE):
        """
        Raises a ValueError naming the violated support direction if the body
        is not contained in the unit square.

        :param tol: the tolerance of the containment check
        """
        for angle, limit in zip(AXIS_ANGLES, (1.0, 1.0, 0.0, 0.0)):
            value = float(self.support_value(angle))
            if value > limit + tol:
                raise ValueError(
                    "shape must lie in the unit square (support value "
                    f"{value} in direction theta={angle} exceeds {limit})"
                )


class PolygonShape(ShapeModel):
    """
    A convex polygon as a ground truth body.
    """

    def __init__(self, polygon: ConvexPolygon):
        """
        :param polygon: the convex polygon
        """
        self._polygon = polygon

    @property
    def polygon(self) -> ConvexPolygon:
        """
        The polygon.
        """
        return self._polygon

    @property
    def area(self) -> float:
        return self._polygon.area

    @property
    def perimeter(self) -> float:
        return self._polygon.perimeter

    def support_value(
        self, theta: Union[float, np.ndarray]
    ) -> Union[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        normals = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        values = (normals @ self._polygon.vertices.T).max(axis=-1)
        return float(values) if values.ndim == 0 else values

    def to_polygon(self, resolution: int = 1024) -> ConvexPolygon:
        return self._polygon

    def circumradius(self) -> float:
        return _minimum_enclosing_radius(self._polygon.vertices)


class EllipseShape(ShapeModel):
    """
    An ellipse with center c, semi-axes a and b, and a rotation of the a-axis
    by the provided angle.
    """

    def __init__(
        self,
        center: Sequence[float],
        semi_axes: Sequence[float],
        rotation: float = 0.0,
    ):
        """
        :param center: the center of the ellipse
        :param semi_axes: the semi-axes a and b
        :param rotation: the angle of the a-axis in radians
        """
        center = np.array(center, dtype=float)
        semi_axes = np.array(semi_axes, dtype=float)
        if center.shape != (2,):
            raise ValueError(f"center shape {center.shape} must be (2,)")
        if semi_axes.shape != (2,):
            raise ValueError(
                f"semi-axes shape {semi_axes.shape} must be (2,)"
            )
        if np.any(semi_axes <= 0.0):
            raise ValueError(f"semi-axes ({semi_axes}) must be positive")

        self._center = center
        self._semi_axes = semi_axes
        self._rotation = float(rotation)

        self._center.setflags(write=False)
        self._semi_axes.setflags(write=False)

    @classmethod
    def disk(cls, center: Sequence[float], radius: float) -> "EllipseShape":
        """
        Creates a disk.

        :param center: the center of the disk
        :param radius: the radius of the disk
        :return: the disk as an ellipse with equal semi-axes
        """
        return cls(center, (radius, radius))

    @property
    def center(self) -> np.ndarray:
        """
        The center of the ellipse.
        """
        return self._center

    @property
    def semi_axes(self) -> np.ndarray:
        """
        The semi-axes a and b.
        """
        return self._semi_axes

    @property
    def rotation(self) -> float:
        """
        The angle of the a-axis in radians.
        """
        return self._rotation

    @property
    def transformation(self) -> np.ndarray:
        """
        The matrix mapping the unit disk onto the centered ellipse.
        """
        cos, sin = np.cos(self._rotation), np.sin(self._rotation)
        rotation = np.array([[cos, -sin], [sin, cos]])
        return rotation * self._semi_axes[np.newaxis, :]

    @property
    def area(self) -> float:
        return float(np.pi * self._semi_axes.prod())

    @property
    def perimeter(self) -> float:
        a, b = np.sort(self._semi_axes)[::-1]
        return float(4.0 * a * ellipe(1.0 - (b / a) ** 2))

    def support_value(
        self, theta: Union[float, np.ndarray]
    ) -> Union[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        a, b = self._semi_axes
        along_a = np.cos(theta - self._rotation)
        along_b = np.sin(theta - self._rotation)
        values = (
            self._center[0] * np.cos(theta)
            + self._center[1] * np.sin(theta)
            + np.sqrt((a * along_a) ** 2 + (b * along_b) ** 2)
        )
        return float(values) if values.ndim == 0 else values

    def to_polygon(self, resolution: int = 1024) -> ConvexPolygon:
        if resolution < 3:
            raise ValueError(f"resolution ({resolution}) must be at least 3")

        t = 2.0 * np.pi * np.arange(resolution) / resolution
        unit_circle = np.stack([np.cos(t), np.sin(t)], axis=-1)
        return ConvexPolygon(
            self._center + unit_circle @ self.transformation.T
        )

    def circumradius(self) -> float:
        return float(self._semi_axes.max())


def support_value(shape: ShapeModel, theta: float) -> float:
    """
    Returns the support function of the shape in direction theta.

    :param shape: the convex body
    :param theta: the direction angle in radians
    :return: the maximum of <x, (cos theta, sin theta)> over the shape
    """
    return float(shape.support_value(theta))


def polygonize(shape: ShapeModel, directions: DirectionSet) -> SupportVector:
    """
    Returns the support vector of the shape in the provided directions. The
    corresponding polygon P(h) circumscribes the shape and lies in the unit
    square if the shape does and the directions include the axes.

    :param shape: the convex body
    :param directions: the outer normal directions
    :return: the support vector of the shape
    """
    return SupportVector(
        directions, np.asarray(shape.support_value(directions.angles))
    )


def _minimum_enclosing_radius(points: np.ndarray) -> float:
    order = np.random.default_rng(0).permutation(points.shape[0])
    points = points[order]
    center, radius = points[0], 0.0
    for i in range(1, points.shape[0]):
        if _encloses(points[i], center, radius):
            continue
        center, radius = points[i], 0.0
        for j in range(i):
            if _encloses(points[j], center, radius):
                continue
            center = 0.5 * (points[i] + points[j])
            radius = 0.5 * np.linalg.norm(points[i] - points[j])
            for k in range(j):
                if _encloses(points[k], center, radius):
                    continue
                center, radius = _circumcircle(points[i], points[j], points[k])

    return float(radius)


def _encloses(point: np.ndarray, center: np.ndarray, radius: float) -> bool:
    return bool(
        np.linalg.norm(point - center) <= radius + ENCLOSING_TOLERANCE
    )


def _circumcircle(
    a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> Tuple[np.ndarray, float]:
    d = 2.0 * (
        a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1])
    )
    if abs(d) < 1e-15:
        # collinear: the circle on the farthest pair
        pairs = [(a, b), (a, c), (b, c)]
        p, q = max(pairs, key=lambda pair: np.linalg.norm(pair[0] - pair[1]))
        return 0.5 * (p + q), 0.5 * float(np.linalg.norm(p - q))

    a2, b2, c2 = a @ a, b @ b, c @ c
    center = np.array(
        [
            (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
            (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
        ]
    )
    return center, float(np.linalg.norm(a - center))
