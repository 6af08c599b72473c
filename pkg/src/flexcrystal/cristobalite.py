"""
Deformations of ideal high cristobalite.

The tetrahedron O s1 s2 s3 is fixed; the second tetrahedron at O is
``t_i = -R s_i`` for a rotation R, so R = I gives the point-reflected
aristotype. The periods are ``gamma_i = t_i - s_i = -(R + I) s_i`` and a
configuration is admissible while they stay linearly independent. Because
``det(R + I) = 2 (1 + trace R)`` this fails exactly on the half-turns.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import framework as fw
from .framework import PeriodicRealization, tetrahedron_edges
from .geom3 import OrientationError, Orthogonal3, rotation_from_axis_angle
from .quartz import base_tetrahedron

VERTEX_ORBITS = 4
EDGE_ORBITS = 12
SCAN_COLUMNS = ("axis_x", "axis_y", "axis_z", "angle", "det_gamma")


@dataclass(frozen=True)
class CristobaliteConfig:
    R: Orthogonal3
    s: tuple[np.ndarray, np.ndarray, np.ndarray]
    t: tuple[np.ndarray, np.ndarray, np.ndarray]
    gamma: tuple[np.ndarray, np.ndarray, np.ndarray]
    fragment: PeriodicRealization

    @property
    def gamma_matrix(self) -> np.ndarray:
        return np.column_stack(self.gamma)

    def det_gamma(self) -> float:
        return float(np.linalg.det(self.gamma_matrix))


def fixed_corners() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return base_tetrahedron().e


def realize(R: Orthogonal3) -> CristobaliteConfig:
    if R.det_sign != 1:
        raise OrientationError("cristobalite deformations are parametrized by proper rotations")
    s = fixed_corners()
    t = tuple(-(R @ si) for si in s)
    gamma = tuple(ti - si for si, ti in zip(s, t))
    O = np.zeros(3)
    labels = ["O", "s1", "s2", "s3", "t1", "t2", "t3"]
    frag = PeriodicRealization(
        list(zip(labels, [O, *s, *t])),
        tetrahedron_edges([0, 1, 2, 3]) + tetrahedron_edges([0, 4, 5, 6]),
        [(f"gamma{i + 1}", g) for i, g in enumerate(gamma)],
        [],
    )
    return CristobaliteConfig(R, s, t, gamma, frag)


def is_admissible(config: CristobaliteConfig, tol: float = fw.DEFAULT_RANK_TOL) -> bool:
    return abs(config.det_gamma()) > tol


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors, shape (n, 3)."""
    if n < 1:
        raise ValueError("need at least one axis")
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def scan_angles(n: int) -> np.ndarray:
    """``n`` rotation angles spread over [0, pi], both ends included when n > 1."""
    if n < 1:
        raise ValueError("need at least one angle")
    return np.linspace(0.0, np.pi, n) if n > 1 else np.zeros(1)


def scan_rows(axis_samples: int, angle_samples: int):
    axes = fibonacci_sphere(axis_samples)
    for axis, angle in product(axes, scan_angles(angle_samples)):
        cfg = realize(rotation_from_axis_angle(axis, float(angle)))
        yield (float(axis[0]), float(axis[1]), float(axis[2]), float(angle), cfg.det_gamma())


def admissibility_scan(axis_samples: int, angle_samples: int, sink=None):
    """CSV rows over Fibonacci-sphere axes times angles in [0, pi]; returns the rows."""
    out = sink if sink is not None else io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    rows = []
    for row in scan_rows(axis_samples, angle_samples):
        writer.writerow([fw.format_float(x) for x in row])
        rows.append(row)
    return rows
