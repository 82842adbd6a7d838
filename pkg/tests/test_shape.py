import numpy as np
import pytest

from momentshape.geometry import (
    ConvexPolygon,
    DirectionSet,
    random_convex_polygon,
)
from momentshape.shape import (
    EllipseShape,
    PolygonShape,
    polygonize,
    support_value,
)


def create_unit_square() -> PolygonShape:
    return PolygonShape(
        ConvexPolygon(
            np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        )
    )


def test_ellipse_with_non_positive_semi_axis():
    with pytest.raises(ValueError):
        EllipseShape((0.5, 0.5), (0.3, 0.0))


def test_ellipse_with_bad_center():
    with pytest.raises(ValueError):
        EllipseShape((0.5, 0.5, 0.5), (0.3, 0.2))


def test_support_value_of_unit_square():
    assert support_value(create_unit_square(), 0.0) == pytest.approx(1.0)
    assert support_value(create_unit_square(), np.pi) == pytest.approx(
        0.0, abs=1e-15
    )


def test_support_value_of_disk():
    disk = EllipseShape.disk((0.5, 0.5), 0.3)
    for theta in np.linspace(0.0, 2.0 * np.pi, 7):
        assert support_value(disk, theta) == pytest.approx(
            0.5 * (np.cos(theta) + np.sin(theta)) + 0.3
        )


def test_support_value_of_ellipse():
    ellipse = EllipseShape((0.5, 0.5), (0.3, 0.2))

    assert support_value(ellipse, 0.25 * np.pi) == pytest.approx(
        0.7071067811865476 + 0.2549509756796392
    )


def test_support_value_of_rotated_ellipse_matches_boundary_points():
    ellipse = EllipseShape((0.5, 0.4), (0.3, 0.1), 0.6)
    boundary = ellipse.to_polygon(20000).vertices
    thetas = np.linspace(0.0, 2.0 * np.pi, 13)
    normals = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)

    assert np.allclose(
        ellipse.support_value(thetas),
        (normals @ boundary.T).max(axis=1),
        atol=1e-7,
    )


def test_bounding_box():
    ellipse = EllipseShape((0.5, 0.4), (0.3, 0.2))
    (x_min, x_max), (y_min, y_max) = ellipse.bounding_box()

    assert x_min == pytest.approx(0.2)
    assert x_max == pytest.approx(0.8)
    assert y_min == pytest.approx(0.2)
    assert y_max == pytest.approx(0.6)


def test_validate_in_unit_square():
    create_unit_square().validate_in_unit_square()
    EllipseShape.disk((0.5, 0.5), 0.5).validate_in_unit_square()

    with pytest.raises(ValueError):
        EllipseShape.disk((0.9, 0.5), 0.2).validate_in_unit_square()

    with pytest.raises(ValueError):
        EllipseShape.disk((0.5, 0.1), 0.2).validate_in_unit_square()


def test_area_and_perimeter():
    disk = EllipseShape.disk((0.5, 0.5), 0.4)
    ellipse = EllipseShape((0.5, 0.5), (0.3, 0.2))

    assert disk.area == pytest.approx(0.16 * np.pi)
    assert disk.perimeter == pytest.approx(0.8 * np.pi)
    assert ellipse.area == pytest.approx(0.06 * np.pi)
    assert ellipse.perimeter == pytest.approx(1.586543, rel=1e-6)
    assert create_unit_square().area == pytest.approx(1.0)
    assert create_unit_square().perimeter == pytest.approx(4.0)


def test_to_polygon():
    ellipse = EllipseShape((0.5, 0.5), (0.3, 0.2), 0.3)
    polygon = ellipse.to_polygon(2048)

    assert polygon.vertices.shape == (2048, 2)
    assert polygon.area == pytest.approx(ellipse.area, rel=1e-5)
    assert polygon.area < ellipse.area

    with pytest.raises(ValueError):
        ellipse.to_polygon(2)


def test_circumradius():
    triangle = PolygonShape(
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    )
    obtuse = PolygonShape(
        ConvexPolygon(np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.1]]))
    )

    assert create_unit_square().circumradius() == pytest.approx(
        np.sqrt(0.5)
    )
    assert triangle.circumradius() == pytest.approx(np.sqrt(0.5))
    assert obtuse.circumradius() == pytest.approx(0.5)
    assert EllipseShape((0.5, 0.5), (0.3, 0.2)).circumradius() == 0.3


def test_circumradius_encloses_vertices():
    rng = np.random.default_rng(0)
    for _ in range(10):
        polygon = random_convex_polygon(rng)
        radius = PolygonShape(polygon).circumradius()
        diameter = np.max(
            np.linalg.norm(
                polygon.vertices[:, np.newaxis] - polygon.vertices, axis=-1
            )
        )

        assert 0.5 * diameter <= radius + 1e-12
        assert radius <= diameter / np.sqrt(3.0) + 1e-12


def test_polygonize_unit_square():
    sv = polygonize(create_unit_square(), DirectionSet.equidistant(4))

    assert np.allclose(sv.h, [1.0, 1.0, 0.0, 0.0], atol=1e-15)


def test_polygonize_disk():
    directions = DirectionSet.equidistant(16)
    sv = polygonize(EllipseShape.disk((0.5, 0.5), 0.4), directions)

    assert np.allclose(sv.h, directions.normals @ [0.5, 0.5] + 0.4)
    assert sv.is_consistent()


def test_ellipse_perimeter_ignores_axis_order():
    wide = EllipseShape((0.5, 0.5), (0.3, 0.1))
    tall = EllipseShape((0.5, 0.5), (0.1, 0.3), np.pi / 2.0)

    assert tall.perimeter == pytest.approx(wide.perimeter)
    assert wide.perimeter == pytest.approx(
        wide.to_polygon(8192).perimeter, rel=1e-6
    )


def test_circumradius_of_dense_polygons():
    disk = EllipseShape.disk((0.5, 0.5), 0.4)
    ellipse = EllipseShape((0.4, 0.6), (0.3, 0.2), 0.7)

    assert PolygonShape(disk.to_polygon(4096)).circumradius() == (
        pytest.approx(0.4)
    )
    assert PolygonShape(ellipse.to_polygon(4096)).circumradius() == (
        pytest.approx(0.3)
    )
