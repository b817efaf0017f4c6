import math

import numpy as np
import pytest

from ahc.perimeter import (InterfaceError, OrientedBox, Points1D, Polyline2D, SurfaceTensionTable, TriSurface,
                           flat_interface, perimeter)


def square(side=1.0):
    r = side / 2
    return Polyline2D(np.array([[-r, -r], [r, -r], [r, r], [-r, r]]), closed=True)


def test_flat_interface_equals_tension_times_area():
    iso = SurfaceTensionTable.isotropic(1.7, 2)
    assert perimeter(iso, flat_interface([0.6, 0.8], [0.3, 0.1], 2.0)) == pytest.approx(1.7 * 2.0)
    iso3 = SurfaceTensionTable.isotropic(1.7, 3)
    e = np.array([1.0, 2.0, 2.0]) / 3
    assert perimeter(iso3, flat_interface(e, [0.0, 0.0, 0.0], 2.0)) == pytest.approx(1.7 * 4.0)
    iso1 = SurfaceTensionTable.isotropic(1.7, 1)
    assert perimeter(iso1, flat_interface([1.0], [0.2], 1.0)) == pytest.approx(1.7)


def test_square_isotropic():
    assert perimeter(SurfaceTensionTable.isotropic(2.0, 2), square()) == pytest.approx(8.0)


def test_anisotropic_square_and_rotation():
    dirs = np.array([[1.0, 0.0], [1 / math.sqrt(2), 1 / math.sqrt(2)], [0.0, 1.0], [-1 / math.sqrt(2), 1 / math.sqrt(2)]])
    table = SurfaceTensionTable(dirs, np.array([1.0, 1.5, 2.0, 1.5]))
    # two sides with normal e1 (phi = 1) and two with normal e2 (phi = 2)
    assert perimeter(table, square()) == pytest.approx(6.0)
    c = 1 / math.sqrt(2)
    rot = Polyline2D(np.array([[0, -c], [c, 0], [0, c], [-c, 0]]), closed=True)
    assert perimeter(table, rot) == pytest.approx(4 * 1.5)


def test_table_interpolation_and_homogeneity():
    dirs = np.array([[1.0, 0.0], [0.0, 1.0]])
    table = SurfaceTensionTable(dirs, np.array([1.0, 3.0]), np.array([0.1, 0.3]))
    val, se = table.interpolate(np.array([math.cos(math.pi / 4), math.sin(math.pi / 4)]))
    assert val == pytest.approx(2.0) and se == pytest.approx(0.2)
    # wraps through pi and is even
    assert table.interpolate(np.array([-1.0, 0.0]))[0] == pytest.approx(1.0)
    val, _ = table.interpolate(np.array([math.cos(3 * math.pi / 4), math.sin(3 * math.pi / 4)]))
    assert val == pytest.approx(2.0)
    p = np.array([0.3, -1.2])
    assert table(2.5 * p) == pytest.approx(2.5 * table(p))
    assert table(np.zeros(2)) == 0.0
    assert table.scaled(2.0).values.tolist() == [2.0, 6.0]


def test_table_validation():
    with pytest.raises(ValueError):
        SurfaceTensionTable(np.eye(2), np.array([1.0]))
    with pytest.raises(ValueError):
        SurfaceTensionTable(np.eye(2), np.array([1.0, -1.0]))


def test_clipping_segment_and_triangle():
    iso = SurfaceTensionTable.isotropic(1.0, 2)
    A = OrientedBox.cube([0.0, 1.0], [0.0, 0.0], 1.0)
    line = Polyline2D(np.array([[-3.0, 0.0], [3.0, 0.0]]))
    assert perimeter(iso, line, A) == pytest.approx(1.0)
    outside = Polyline2D(np.array([[-3.0, 2.0], [3.0, 2.0]]))
    assert perimeter(iso, outside, A) == 0.0
    iso3 = SurfaceTensionTable.isotropic(1.0, 3)
    big = TriSurface(np.array([[-5.0, -5.0, 0.0], [5.0, -5.0, 0.0], [0.0, 5.0, 0.0]]), np.array([[0, 1, 2]]))
    A3 = OrientedBox.cube([0.0, 0.0, 1.0], [0.0, 0.0, 0.0], 1.0)
    assert perimeter(iso3, big, A3) == pytest.approx(1.0)
    pts = Points1D(np.array([0.2, 3.0]), np.array([1.0, -1.0]))
    assert perimeter(SurfaceTensionTable.isotropic(1.0, 1), pts, OrientedBox.cube([1.0], [0.0], 1.0)) == 1.0


def test_rejects_bad_interfaces():
    with pytest.raises(InterfaceError):
        Polyline2D(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(InterfaceError):
        TriSurface(np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]]), np.array([[0, 1, 2]]))
    v = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]])
    with pytest.raises(InterfaceError):
        TriSurface(v, np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]]))
    with pytest.raises(InterfaceError):
        perimeter(SurfaceTensionTable.isotropic(1.0, 3), square())
