"""
3D vectors, orthogonal maps and the spherical constructions used by the solvers.

Vectors are plain ``numpy`` arrays of shape ``(3,)``. Orthogonal maps are
wrapped in :class:`Orthogonal3`, which keeps the determinant sign next to the
matrix so rotations and reflections share one type.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

Vec3 = np.ndarray

GEOM_TOL = 1e-9
ALG_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid geometric input (non-unit axis, zero vector, ...)."""


class AntipodalError(GeometryError):
    """Rotation between antipodal directions has no distinguished axis."""


class DegenerateCircleError(GeometryError):
    """Chord midpoint vanishes, so the midpoint circle is a great circle."""


class UndefinedGeodesicError(GeometryError):
    """Two directions are collinear (or zero) and span no plane."""


class OrientationError(ValueError):
    """An orthogonal map has the wrong determinant sign for its role."""


def vec3(x, y=None, z=None) -> Vec3:
    if y is None:
        out = np.asarray(x, dtype=float).reshape(3)
    else:
        out = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(out)):
        raise GeometryError("vector components must be finite")
    return out


def normalize(v) -> Vec3:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < GEOM_TOL:
        raise GeometryError("cannot normalize a zero vector")
    return v / n


def is_unit(v, tol: float = GEOM_TOL) -> bool:
    return abs(np.linalg.norm(v) - 1.0) < tol


def _require_unit(v, name: str, tol: float = GEOM_TOL) -> Vec3:
    v = vec3(v)
    if not is_unit(v, tol):
        raise GeometryError(f"{name} must be a unit vector (norm {np.linalg.norm(v):.3g})")
    return v


def hat(w) -> np.ndarray:
    """Skew-symmetric matrix ``K`` with ``K @ x == cross(w, x)``."""
    return np.array([[0.0, -w[2], w[1]],
                     [w[2], 0.0, -w[0]],
                     [-w[1], w[0], 0.0]])


@dataclass(frozen=True, eq=False)
class Orthogonal3:
    """A 3x3 orthogonal matrix with its cached determinant sign.

    Parameters
    ----------
    matrix : array_like
        3x3 real matrix. Orthogonality is checked at ``GEOM_TOL``.
    det_sign : int, optional
        +1 or -1. Computed from the matrix when omitted; when given it must
        agree with the determinant.

    ``A @ B`` composes two maps, ``A @ v`` applies ``A`` to a vector (or to
    the columns of a 3xN array), ``-A`` negates the matrix.
    """

    matrix: np.ndarray
    det_sign: int = 0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise GeometryError("orthogonal map needs a finite 3x3 matrix")
        if np.max(np.abs(m.T @ m - np.eye(3))) > GEOM_TOL:
            raise GeometryError("matrix is not orthogonal")
        d = np.linalg.det(m)
        sign = 1 if d > 0 else -1
        if self.det_sign not in (0, sign):
            raise OrientationError(f"declared det_sign {self.det_sign} but det is {d:+.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "det_sign", sign)

    @classmethod
    def identity(cls) -> "Orthogonal3":
        return cls(np.eye(3), 1)

    @property
    def T(self) -> "Orthogonal3":
        return Orthogonal3(self.matrix.T, self.det_sign)

    inverse = T

    def __matmul__(self, other):
        if isinstance(other, Orthogonal3):
            return Orthogonal3(self.matrix @ other.matrix, self.det_sign * other.det_sign)
        return self.matrix @ np.asarray(other, dtype=float)

    def __neg__(self) -> "Orthogonal3":
        return Orthogonal3(-self.matrix, -self.det_sign)

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def orthogonality_error(self) -> float:
        return float(np.max(np.abs(self.matrix.T @ self.matrix - np.eye(3))))

    def distance(self, other: "Orthogonal3") -> float:
        return float(np.max(np.abs(self.matrix - other.matrix)))

    def allclose(self, other: "Orthogonal3", atol: float = ALG_TOL) -> bool:
        return self.det_sign == other.det_sign and self.distance(other) <= atol

    def tolist(self) -> list:
        return self.matrix.tolist()


def rotation_from_axis_angle(axis, angle: float) -> Orthogonal3:
    """Rodrigues rotation by ``angle`` radians about the unit vector ``axis``."""
    k = _require_unit(axis, "axis")
    K = hat(k)
    m = np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
    return Orthogonal3(m, 1)


def exp_so3(w) -> Orthogonal3:
    """Matrix exponential of ``hat(w)``; ``w`` is a rotation vector."""
    w = vec3(w)
    theta = np.linalg.norm(w)
    if theta == 0.0:
        return Orthogonal3.identity()
    return rotation_from_axis_angle(w / theta, theta)


def rotation_angle(R: Orthogonal3) -> float:
    """Angle in [0, pi] of a proper rotation."""
    if R.det_sign != 1:
        raise OrientationError("rotation angle is defined for det +1 maps only")
    c = (np.trace(R.matrix) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def minimal_rotation(a, b) -> Orthogonal3:
    """Rotation taking unit ``a`` to unit ``b`` about the axis ``a x b``.

    Raises
    ------
    AntipodalError
        If ``a`` and ``b`` are (numerically) antipodal.
    """
    a = _require_unit(a, "a")
    b = _require_unit(b, "b")
    c = float(np.dot(a, b))
    if c < -1.0 + GEOM_TOL:
        raise AntipodalError("minimal rotation between antipodal vectors is ambiguous")
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    if s < ALG_TOL:
        return Orthogonal3.identity()
    return rotation_from_axis_angle(axis / s, float(np.arctan2(s, c)))


def reflection_across_plane(normal) -> Orthogonal3:
    n = _require_unit(normal, "normal")
    return Orthogonal3(np.eye(3) - 2.0 * np.outer(n, n), -1)


def rotation_circle(v, w, phi: float) -> Orthogonal3:
    """The rotation sending ``v`` to ``w``, indexed by ``phi`` on [0, 2pi).

    The result is the minimal rotation from ``v`` to ``w`` followed by a turn
    of ``phi`` about ``w``. Every rotation with ``R v = w`` arises for exactly
    one ``phi`` in [0, 2pi).
    """
    v = vec3(v)
    w = vec3(w)
    nv, nw = np.linalg.norm(v), np.linalg.norm(w)
    if nv < GEOM_TOL or nw < GEOM_TOL:
        raise GeometryError("rotation_circle needs nonzero vectors")
    if abs(nv - nw) > GEOM_TOL * max(nv, 1.0):
        raise GeometryError("rotation_circle needs vectors of equal length")
    wh = w / nw
    return rotation_from_axis_angle(wh, phi) @ minimal_rotation(v / nv, wh)


@dataclass(frozen=True, eq=False)
class SphericalCircle:
    """Points ``p`` of the unit sphere with ``p . m == |m|^2``.

    For a chord ``[e, Qe]`` with midpoint ``m`` these are exactly the unit
    vectors whose chord complement ``2m - p`` is also a unit vector. The
    circle is centred at ``m`` in the plane normal to ``m``.
    """

    m: Vec3
    radius_chord: float
    witness: Vec3
    degenerate: bool

    @property
    def spherical_midpoint(self) -> Vec3:
        return self.m / np.linalg.norm(self.m)

    def complement(self, p):
        """``2m - p``; ``p`` may carry trailing grid axes after the first."""
        p = np.asarray(p, dtype=float)
        return 2.0 * self.m.reshape((3,) + (1,) * (p.ndim - 1)) - p

    def contains(self, p, tol: float = GEOM_TOL) -> bool:
        p = np.asarray(p, dtype=float)
        mm = float(np.dot(self.m, self.m))
        return abs(np.linalg.norm(p) - 1.0) < tol and abs(float(np.dot(p, self.m)) - mm) < tol

    @cached_property
    def _basis(self) -> tuple[Vec3, Vec3]:
        a = (self.witness - self.m) / self.radius_chord
        return a, np.cross(self.spherical_midpoint, a)

    def basis(self) -> tuple[Vec3, Vec3]:
        """Orthonormal pair spanning the circle's plane; the first points at the witness."""
        if self.degenerate:
            raise DegenerateCircleError("a degenerate circle has no tangent plane basis")
        return self._basis

    def point(self, alpha):
        """Point at angle ``alpha`` from the witness; vectorised over ``alpha``.

        Returns an array of shape ``(3,) + shape(alpha)``.
        """
        alpha = np.asarray(alpha, dtype=float)
        if self.degenerate:
            return np.broadcast_to(self.m.reshape((3,) + (1,) * alpha.ndim),
                                   (3,) + alpha.shape).copy()
        a, b = self.basis()
        ca, sa = np.cos(alpha), np.sin(alpha)
        ext = (3,) + (1,) * alpha.ndim
        return (self.m.reshape(ext)
                + self.radius_chord * (a.reshape(ext) * ca + b.reshape(ext) * sa))


def chord_midpoint_circle(e, Qe, tol: float = GEOM_TOL) -> SphericalCircle:
    e = _require_unit(e, "e")
    Qe = _require_unit(Qe, "Qe")
    m = 0.5 * (e + Qe)
    if np.linalg.norm(m) < tol:
        raise DegenerateCircleError("e and Qe are antipodal; the chord midpoint is the origin")
    radius = float(np.linalg.norm(e - m))
    return SphericalCircle(m=m, radius_chord=radius, witness=e, degenerate=radius < tol)


def geodesic_reflection(M1, M2, tol: float = GEOM_TOL) -> Orthogonal3:
    """Reflection in the plane through the origin containing ``M1`` and ``M2``."""
    M1 = vec3(M1)
    M2 = vec3(M2)
    n1, n2 = np.linalg.norm(M1), np.linalg.norm(M2)
    if n1 < tol or n2 < tol:
        raise UndefinedGeodesicError("geodesic endpoints must be nonzero")
    n = np.cross(M1, M2)
    nn = np.linalg.norm(n)
    if nn < tol * n1 * n2:
        raise UndefinedGeodesicError("geodesic endpoints are collinear")
    return reflection_across_plane(n / nn)
