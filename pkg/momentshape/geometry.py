from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull

CONSISTENCY_TOLERANCE = 1e-10
VERTEX_MERGE_TOLERANCE = 1e-12
CONVEXITY_TOLERANCE = 1e-12

AXIS_ANGLES = (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi)


class DirectionSet:
    """
    A sorted set of outer normal angles 0 <= theta_1 < ... < theta_n < 2 pi
    whose normals positively span the plane, i.e. every angular gap between
    consecutive normals, including the wrap-around gap, is less than pi.
    """

    def __init__(self, angles: Sequence[float]):
        """
        :param angles: the strictly increasing normal angles in radians
        """
        angles = np.array(angles, dtype=float)
        if angles.ndim != 1:
            raise ValueError(
                f"angles must be one-dimensional (got {angles.ndim} "
                "dimensions)"
            )
        if angles.size < 3:
            raise ValueError(
                f"number of directions ({angles.size}) must be at least 3"
            )
        if not np.all(np.isfinite(angles)):
            raise ValueError("angles must be finite")
        if angles[0] < 0.0 or angles[-1] >= 2.0 * np.pi:
            raise ValueError(
                f"angles must lie in [0, 2pi) (got [{angles[0]}, "
                f"{angles[-1]}])"
            )
        if np.any(np.diff(angles) <= 0.0):
            raise ValueError("angles must be strictly increasing")

        gaps = np.diff(np.append(angles, angles[0] + 2.0 * np.pi))
        if gaps.max() >= np.pi:
            raise ValueError(
                f"largest angular gap ({gaps.max()}) must be less than pi"
            )

        normals = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        normals[np.abs(normals) < 1e-15] = 0.0

        self._angles = angles
        self._gaps = gaps
        self._normals = normals

        self._angles.setflags(write=False)
        self._gaps.setflags(write=False)
        self._normals.setflags(write=False)

    @classmethod
    def equidistant(cls, n: int) -> "DirectionSet":
        """
        Creates n equidistant directions theta_i = 2 pi (i - 1) / n. If n is
        a multiple of 4, the set contains the four axis directions.

        :param n: the number of directions
        :return: the direction set
        """
        if n < 3:
            raise ValueError(f"number of directions ({n}) must be at least 3")

        return cls(2.0 * np.pi * np.arange(n) / n)

    @classmethod
    def dense_sequence(cls, n: int) -> "DirectionSet":
        """
        Creates the direction set formed by the first n terms of the dense
        sequence 0, pi/2, pi, 3pi/2, pi/4, 3pi/4, 5pi/4, 7pi/4, pi/8, ...
        that refines the circle dyadically.

        :param n: the number of directions (at least 4)
        :return: the direction set
        """
        if n < 4:
            raise ValueError(f"number of directions ({n}) must be at least 4")

        angles = list(AXIS_ANGLES)
        level = 3
        while len(angles) < n:
            step = 2.0 * np.pi / 2**level
            for j in range(1, 2 ** (level - 1) + 1):
                angles.append((2 * j - 1) * step)
                if len(angles) == n:
                    break
            level += 1
        return cls(np.sort(angles))

    @property
    def angles(self) -> np.ndarray:
        """
        The normal angles in radians.
        """
        return self._angles

    @property
    def normals(self) -> np.ndarray:
        """
        The unit outer normals u_i = (cos theta_i, sin theta_i) as an n x 2
        array.
        """
        return self._normals

    @property
    def gaps(self) -> np.ndarray:
        """
        The angular gaps theta_{i+1} - theta_i with theta_{n+1} = theta_1 +
        2 pi.
        """
        return self._gaps

    @property
    def max_gap(self) -> float:
        """
        The largest angular gap.
        """
        return float(self._gaps.max())

    @property
    def includes_axes(self) -> bool:
        """
        Whether the set contains the directions 0, pi/2, pi and 3pi/2.
        """
        return not self._missing_axes()

    def require_axes(self):
        """
        Raises a ValueError if any of the four axis directions is missing. A
        polygon with prescribed outer normals stays in the unit square only if
        these directions are among its normals.
        """
        missing = self._missing_axes()
        if missing:
            raise ValueError(
                "directions must include 0, pi/2, pi and 3pi/2 for "
                "polygons with prescribed normals to be confined to the unit "
                f"square (missing {missing})"
            )

    def __len__(self) -> int:
        return self._angles.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DirectionSet) and np.array_equal(
            self._angles, other._angles
        )

    def __hash__(self) -> int:
        return hash(self._angles.tobytes())

    def _missing_axes(self):
        return [
            axis_angle
            for axis_angle in AXIS_ANGLES
            if not np.any(np.isclose(self._angles, axis_angle, atol=1e-12))
        ]


class SupportVector:
    """
    The support values h_1, ..., h_n of the polygon P(h) obtained by
    intersecting the halfplanes <x, u_i> <= h_i.
    """

    def __init__(self, directions: DirectionSet, h: Sequence[float]):
        """
        :param directions: the outer normal directions
        :param h: the support values, one per direction
        """
        h = np.array(h, dtype=float)
        if h.shape != (len(directions),):
            raise ValueError(
                f"shape of support values {h.shape} must match number of "
                f"directions ({len(directions)})"
            )

        self._directions = directions
        self._h = h
        self._h.setflags(write=False)

    @property
    def directions(self) -> DirectionSet:
        """
        The outer normal directions.
        """
        return self._directions

    @property
    def h(self) -> np.ndarray:
        """
        The support values.
        """
        return self._h

    def consistency_residuals(self) -> np.ndarray:
        """
        Returns the left-hand sides of the consistency inequalities; the
        support vector is consistent if and only if all of them are
        non-negative.
        """
        return consistency_matrix(self._directions) @ self._h

    def edge_lengths(self) -> np.ndarray:
        """
        Returns the signed lengths of the edges of P(h); edge i carries the
        outer normal u_i. All lengths are non-negative if and only if the
        support vector is consistent.
        """
        gaps = self._directions.gaps
        return self.consistency_residuals() / (
            np.sin(gaps) * np.sin(np.roll(gaps, 1))
        )

    def is_consistent(self, tol: float = CONSISTENCY_TOLERANCE) -> bool:
        """
        Returns whether the support values are exactly the support values of
        P(h) up to the provided tolerance.

        :param tol: the tolerance of the consistency inequalities
        :return: whether the support vector is consistent
        """
        return bool(np.all(self.consistency_residuals() >= -tol))

    def polygon(self) -> "ConvexPolygon":
        """
        Returns P(h).
        """
        return vertices_from_support(self)


class ConvexPolygon:
    """
    A convex polygon given by its vertices in counterclockwise order. The
    polygon may be degenerate, i.e. a segment or a single point.
    """

    def __init__(
        self,
        vertices: np.ndarray,
        merge_tolerance: float = VERTEX_MERGE_TOLERANCE,
    ):
        """
        :param vertices: the vertices as an m x 2 array in counterclockwise
            order
        :param merge_tolerance: the distance below which consecutive vertices
            are merged
        """
        vertices = np.array(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError(
                f"vertices must be an m x 2 array (got shape "
                f"{vertices.shape})"
            )
        if vertices.shape[0] == 0:
            raise ValueError("number of vertices must be at least 1")
        if not np.all(np.isfinite(vertices)):
            raise ValueError("vertices must be finite")

        vertices = _merge_consecutive_vertices(vertices, merge_tolerance)
        if vertices.shape[0] >= 3:
            crosses = _turn_crosses(vertices)
            scale = max(1.0, np.abs(vertices).max()) ** 2
            if np.any(crosses < -CONVEXITY_TOLERANCE * scale):
                raise ValueError(
                    "vertices must describe a convex polygon in "
                    "counterclockwise order"
                )

        self._vertices = vertices
        self._vertices.setflags(write=False)

    @property
    def vertices(self) -> np.ndarray:
        """
        The vertices in counterclockwise order.
        """
        return self._vertices

    @property
    def area(self) -> float:
        """
        The area of the polygon.
        """
        if self._vertices.shape[0] < 3:
            return 0.0
        x, y = self._vertices[:, 0], self._vertices[:, 1]
        signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        return max(float(signed_area), 0.0)

    @property
    def perimeter(self) -> float:
        """
        The perimeter of the polygon (twice the length of a segment).
        """
        if self._vertices.shape[0] < 2:
            return 0.0
        edges = np.roll(self._vertices, -1, axis=0) - self._vertices
        return float(np.linalg.norm(edges, axis=1).sum())

    @property
    def centroid(self) -> np.ndarray:
        """
        The center of mass of the polygon; for degenerate polygons, the mean
        of the vertices.
        """
        area = self.area
        if area <= 0.0:
            return self._vertices.mean(axis=0)
        x, y = self._vertices[:, 0], self._vertices[:, 1]
        x_next, y_next = np.roll(x, -1), np.roll(y, -1)
        cross = x * y_next - x_next * y
        return np.array(
            [
                np.sum((x + x_next) * cross) / (6.0 * area),
                np.sum((y + y_next) * cross) / (6.0 * area),
            ]
        )

    @property
    def is_degenerate(self) -> bool:
        """
        Whether the polygon has zero area.
        """
        return self.area <= 0.0

    def edges(self) -> np.ndarray:
        """
        Returns the edges as an m x 2 x 2 array of start and end points.
        """
        return np.stack(
            [self._vertices, np.roll(self._vertices, -1, axis=0)], axis=1
        )

    def support_value(self, theta: float) -> float:
        """
        Returns the support function of the polygon in direction theta.

        :param theta: the direction angle in radians
        :return: the maximum of <x, (cos theta, sin theta)> over the polygon
        """
        u = np.array([np.cos(theta), np.sin(theta)])
        return float((self._vertices @ u).max())

    def contains(self, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """
        Returns whether the provided points lie in the polygon.

        :param points: a k x 2 array of points
        :param tol: the tolerance of the halfplane tests
        :return: a Boolean array of length k
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_degenerate:
            distances = _distances_to_boundary(points, self.edges())
            return distances <= tol

        edges = self.edges()
        directions = edges[:, 1] - edges[:, 0]
        offsets = points[:, np.newaxis, :] - edges[np.newaxis, :, 0]
        crosses = (
            directions[np.newaxis, :, 0] * offsets[..., 1]
            - directions[np.newaxis, :, 1] * offsets[..., 0]
        )
        lengths = np.linalg.norm(directions, axis=1)
        return np.all(crosses >= -tol * lengths[np.newaxis], axis=1)


def consistency_matrix(directions: DirectionSet) -> np.ndarray:
    """
    Returns the n x n matrix whose product with a support vector yields the
    left-hand sides of the consistency inequalities

        h_{i-1} sin(theta_{i+1} - theta_i) - h_i sin(theta_{i+1} -
        theta_{i-1}) + h_{i+1} sin(theta_i - theta_{i-1}) >= 0.

    :param directions: the outer normal directions
    :return: the consistency matrix
    """
    n = len(directions)
    c, s = directions.normals[:, 0], directions.normals[:, 1]
    previous = np.roll(np.arange(n), 1)
    following = np.roll(np.arange(n), -1)

    matrix = np.zeros((n, n))
    rows = np.arange(n)
    matrix[rows, previous] += s[following] * c - c[following] * s
    matrix[rows, rows] -= s[following] * c[previous] - c[following] * s[
        previous
    ]
    matrix[rows, following] += s * c[previous] - c * s[previous]
    return matrix


def vertex_map(directions: DirectionSet) -> np.ndarray:
    """
    Returns the linear map from support vectors to the vertices of P(h). The
    vertex v_i is the intersection of the lines with normals u_i and u_{i+1}.

    :param directions: the outer normal directions
    :return: an n x 2 x n array V such that the vertices are V @ h
    """
    n = len(directions)
    c, s = directions.normals[:, 0], directions.normals[:, 1]
    rows = np.arange(n)
    following = np.roll(rows, -1)
    denominators = c * s[following] - s * c[following]

    mapping = np.zeros((n, 2, n))
    mapping[rows, 0, rows] = s[following] / denominators
    mapping[rows, 0, following] = -s / denominators
    mapping[rows, 1, rows] = -c[following] / denominators
    mapping[rows, 1, following] = c / denominators
    return mapping


def support_vertices(directions: DirectionSet, h: np.ndarray) -> np.ndarray:
    """
    Returns the n vertices v_1, ..., v_n of P(h) without merging duplicates
    or checking consistency.

    :param directions: the outer normal directions
    :param h: the support values
    :return: an n x 2 array of vertices
    """
    return vertex_map(directions) @ np.asarray(h, dtype=float)


def is_consistent(
    sv: SupportVector, tol: float = CONSISTENCY_TOLERANCE
) -> bool:
    """
    Returns whether the support vector is consistent.

    :param sv: the support vector
    :param tol: the tolerance of the consistency inequalities
    :return: whether all consistency inequalities hold
    """
    return sv.is_consistent(tol)


def vertices_from_support(sv: SupportVector) -> ConvexPolygon:
    """
    Returns the polygon P(h) of a consistent support vector with duplicate
    consecutive vertices merged.

    :param sv: the consistent support vector
    :return: the polygon P(h)
    """
    if not sv.is_consistent():
        residuals = sv.consistency_residuals()
        index = int(np.argmin(residuals))
        raise ValueError(
            f"support vector must be consistent (inequality {index} violated "
            f"by {-residuals[index]})"
        )

    return ConvexPolygon(support_vertices(sv.directions, sv.h))


def intersect_polygons(
    p: ConvexPolygon, q: ConvexPolygon
) -> Optional[ConvexPolygon]:
    """
    Intersects two convex polygons by clipping the first against each edge of
    the second in turn.

    :param p: the polygon to clip
    :param q: the clipping polygon
    :return: the intersection or None if it has no interior
    """
    if p.is_degenerate or q.is_degenerate:
        return None

    output = [vertex for vertex in p.vertices]
    for start, end in q.edges():
        if not output:
            return None
        direction = end - start
        candidates = output
        output = []
        sides = [
            direction[0] * (point[1] - start[1])
            - direction[1] * (point[0] - start[0])
            for point in candidates
        ]
        previous, previous_side = candidates[-1], sides[-1]
        for point, side in zip(candidates, sides):
            if side >= 0.0:
                if previous_side < 0.0:
                    output.append(
                        _crossing(previous, point, previous_side, side)
                    )
                output.append(point)
            elif previous_side >= 0.0:
                output.append(_crossing(previous, point, previous_side, side))
            previous, previous_side = point, side

    if len(output) < 3:
        return None
    intersection = ConvexPolygon(np.array(output))
    return None if intersection.is_degenerate else intersection


def nikodym_distance(p: ConvexPolygon, q: ConvexPolygon) -> float:
    """
    Returns the area of the symmetric difference of two convex polygons.
    Degenerate polygons have zero area.

    :param p: the first polygon
    :param q: the second polygon
    :return: A(P) + A(Q) - 2 A(P n Q)
    """
    intersection = intersect_polygons(p, q)
    intersection_area = 0.0 if intersection is None else intersection.area
    return max(p.area + q.area - 2.0 * intersection_area, 0.0)


def hausdorff_distance(p: ConvexPolygon, q: ConvexPolygon) -> float:
    """
    Returns the Hausdorff distance of two non-degenerate convex polygons. For
    convex polygons, the largest distance from one polygon to the other is
    attained at a vertex.

    :param p: the first polygon
    :param q: the second polygon
    :return: the Hausdorff distance
    """
    if p.is_degenerate or q.is_degenerate:
        raise ValueError("polygons must not be degenerate")

    return max(_directed_distance(p, q), _directed_distance(q, p))


def polygonization_bound(
    directions: DirectionSet, perimeter: Optional[float] = None
) -> float:
    """
    Returns the upper bound of the Nikodym distance between a convex body in
    the unit square and the polygon with the prescribed normals circumscribing
    it, sqrt(2) max tan(gap / 2), or the sharper (perimeter / (2 sqrt(2)))
    max tan(gap / 2) if the perimeter of the body is known.

    :param directions: the outer normal directions
    :param perimeter: the perimeter of the body
    :return: the upper bound
    """
    max_tan = float(np.tan(directions.gaps / 2.0).max())
    if perimeter is None:
        return np.sqrt(2.0) * max_tan
    if perimeter < 0.0:
        raise ValueError(f"perimeter ({perimeter}) must be non-negative")
    return perimeter / (2.0 * np.sqrt(2.0)) * max_tan


def random_convex_polygon(
    rng: np.random.Generator, point_count: int = 12
) -> ConvexPolygon:
    """
    Samples a random convex polygon in the unit square as the convex hull of
    uniformly distributed points in a random axis-aligned box.

    :param rng: the random number generator
    :param point_count: the number of points to take the hull of
    :return: the random polygon
    """
    if point_count < 3:
        raise ValueError(f"point count ({point_count}) must be at least 3")

    corners = np.sort(rng.uniform(0.0, 1.0, size=(2, 2)), axis=0)
    while np.any(corners[1] - corners[0] < 0.1):
        corners = np.sort(rng.uniform(0.0, 1.0, size=(2, 2)), axis=0)
    points = rng.uniform(corners[0], corners[1], size=(point_count, 2))
    hull = ConvexHull(points)
    return ConvexPolygon(points[hull.vertices])


def _merge_consecutive_vertices(
    vertices: np.ndarray, tolerance: float
) -> np.ndarray:
    merged = [vertices[0]]
    for vertex in vertices[1:]:
        if np.linalg.norm(vertex - merged[-1]) > tolerance:
            merged.append(vertex)
    while (
        len(merged) > 1 and np.linalg.norm(merged[-1] - merged[0]) <= tolerance
    ):
        merged.pop()
    return np.array(merged)


def _turn_crosses(vertices: np.ndarray) -> np.ndarray:
    incoming = vertices - np.roll(vertices, 1, axis=0)
    outgoing = np.roll(vertices, -1, axis=0) - vertices
    return incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0]


def _crossing(
    start: np.ndarray, end: np.ndarray, start_side: float, end_side: float
) -> np.ndarray:
    t = start_side / (start_side - end_side)
    return start + t * (end - start)


def _distances_to_boundary(
    points: np.ndarray, edges: np.ndarray
) -> np.ndarray:
    starts = edges[np.newaxis, :, 0]
    directions = edges[np.newaxis, :, 1] - starts
    offsets = points[:, np.newaxis, :] - starts
    squared_lengths = np.sum(directions**2, axis=-1)
    t = np.where(
        squared_lengths > 0.0,
        np.sum(offsets * directions, axis=-1)
        / np.where(squared_lengths > 0.0, squared_lengths, 1.0),
        0.0,
    )
    t = np.clip(t, 0.0, 1.0)
    nearest = starts + t[..., np.newaxis] * directions
    return np.linalg.norm(points[:, np.newaxis, :] - nearest, axis=-1).min(
        axis=1
    )


def _directed_distance(p: ConvexPolygon, q: ConvexPolygon) -> float:
    distances = _distances_to_boundary(p.vertices, q.edges())
    distances[q.contains(p.vertices)] = 0.0
    return float(distances.max())
