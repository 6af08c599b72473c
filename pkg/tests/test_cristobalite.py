import csv
import io

import numpy as np
import pytest

from flexcrystal import cristobalite as cb
from flexcrystal import framework as fw
from flexcrystal.geom3 import OrientationError, Orthogonal3, exp_so3, rotation_from_axis_angle
from flexcrystal.oracle import fd_jacobian, svd_rank

from conftest import random_unit


def random_rotation(rng, max_angle=np.pi):
    return rotation_from_axis_angle(random_unit(rng), rng.uniform(0, max_angle))


def test_aristotype():
    cfg = cb.realize(Orthogonal3.identity())
    for s, t, g in zip(cfg.s, cfg.t, cfg.gamma):
        assert np.array_equal(t, -s)
        assert np.array_equal(g, -2 * s)
    assert cb.is_admissible(cfg)


def test_orbit_counts():
    assert (cb.VERTEX_ORBITS, cb.EDGE_ORBITS) == (4, 12)
    frag = cb.realize(Orthogonal3.identity()).fragment
    assert len(frag.edges) == 12


def test_unit_edges_and_closed_form(rng):
    for _ in range(100):
        R = random_rotation(rng)
        cfg = cb.realize(R)
        assert np.max(np.abs(cfg.fragment.edge_lengths() - 1.0)) < 1e-12
        closed = -(R.matrix + np.eye(3)) @ np.column_stack(cfg.s)
        assert np.allclose(cfg.fragment.generator_matrix(), closed, atol=1e-12)


def test_rejects_reflections():
    with pytest.raises(OrientationError):
        cb.realize(Orthogonal3(np.diag([1.0, 1.0, -1.0])))


def test_half_turns_are_inadmissible(rng):
    for _ in range(100):
        R = rotation_from_axis_angle(random_unit(rng), np.pi)
        assert abs(np.trace(R.matrix) + 1.0) < 1e-12
        cfg = cb.realize(R)
        assert abs(cfg.det_gamma()) < 1e-9
        assert not cb.is_admissible(cfg)


def test_half_turn_about_z():
    cfg = cb.realize(rotation_from_axis_angle([0, 0, 1], np.pi))
    assert abs(cfg.det_gamma()) < 1e-9


def test_det_shrinks_towards_half_turn(rng):
    axis = random_unit(rng)
    dets = [abs(cb.realize(rotation_from_axis_angle(axis, a)).det_gamma())
            for a in (2.8, 2.9, 3.0, 3.1)]
    assert all(x > y for x, y in zip(dets, dets[1:]))
    assert cb.is_admissible(cb.realize(rotation_from_axis_angle(axis, 3.0)))
    assert dets[2] < 0.05


def test_det_against_trace(rng):
    # det[gamma] = -det(R + I) det[s] and det(R + I) = 2 (1 + trace R)
    det_s = np.linalg.det(np.column_stack(cb.fixed_corners()))
    for _ in range(200):
        R = random_rotation(rng)
        expected = -2.0 * (1.0 + np.trace(R.matrix)) * det_s
        assert cb.realize(R).det_gamma() == pytest.approx(expected, abs=1e-12)


def test_dimension_witness(rng):
    def gammas(w):
        return cb.realize(exp_so3(w)).gamma_matrix.ravel()

    checked = 0
    while checked < 100:
        w = random_unit(rng) * rng.uniform(0.05, 2.8)
        if not cb.is_admissible(cb.realize(exp_so3(w))):
            continue
        assert svd_rank(fd_jacobian(gammas, w, 1e-6), 1e-6).rank == 3
        checked += 1


class TestScan:
    def test_row_count(self):
        rows = cb.admissibility_scan(16, 16)
        assert len(rows) == 256

    def test_header_and_order(self):
        out = io.StringIO()
        cb.admissibility_scan(3, 4, out)
        rows = list(csv.DictReader(io.StringIO(out.getvalue())))
        assert list(rows[0]) == ["axis_x", "axis_y", "axis_z", "angle", "det_gamma"]
        assert [float(r["angle"]) for r in rows[:4]] == pytest.approx(np.linspace(0, np.pi, 4))

    def test_admissible_away_from_half_turns(self):
        rows = cb.admissibility_scan(64, 64)
        away = [abs(r[4]) for r in rows if r[3] < np.pi - 0.1]
        near = [abs(r[4]) for r in rows if abs(r[3] - np.pi) < 1e-6]
        assert min(away) > 0
        assert near and max(near) < 1e-4

    def test_fibonacci_axes_unit(self):
        axes = cb.fibonacci_sphere(50)
        assert np.allclose(np.linalg.norm(axes, axis=1), 1.0)
        assert abs(axes[:, 2].mean()) < 1e-12

    def test_deterministic(self):
        a, b = io.StringIO(), io.StringIO()
        cb.admissibility_scan(5, 5, a)
        cb.admissibility_scan(5, 5, b)
        assert a.getvalue() == b.getvalue()


def test_validate_tracks_admissibility():
    ok = fw.validate(cb.realize(rotation_from_axis_angle([1, 0, 0], 1.0)).fragment)
    bad = fw.validate(cb.realize(rotation_from_axis_angle([1, 0, 0], np.pi)).fragment)
    assert ok.passed and not bad.passed
    assert bad.lattice_rank == 1
