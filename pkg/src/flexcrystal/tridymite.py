"""
Deformations of the tridymite framework near its aristotype.

The tetrahedron O D1 E1 O1 is fixed (O at the origin, O1 = f0, D1 = f1,
E1 = f2). Three orientation-reversing maps place the rest: R0 about O, R1
about O1 and R2 about O2 = R0 f0. Periodicity reduces to

    (I - R0 - R1 + R2 R0) f_i = 0,   i = 1, 2.

Writing Q = -R0, Q1 = R1, Q2 = -R2 R0 turns this into

    e_i + Q e_i = Q1 e_i + Q2 e_i,   i = 1, 2,

for an orthonormal pair e1, e2 spanning span(f1, f2). For a rotation Q the
images ``Q1 e_i`` and ``Q2 e_i`` are opposite ends of a diameter of the
circle through e_i and Q e_i centred on their chord midpoint m_i, and each
pair ``(Qk e1, Qk e2)`` must stay orthonormal. That is a spherical four-bar
problem with four solutions: the quadrilateral e1, Qe1, Qe2, e2 and its
mirror image in the plane of m1 and m2, each read with either labelling of
Q1 and Q2. The four branches coalesce at Q = I.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framework import PeriodicRealization, tetrahedron_edges
from .geom3 import (GEOM_TOL, GeometryError, OrientationError, Orthogonal3, SphericalCircle,
                    UndefinedGeodesicError, chord_midpoint_circle, exp_so3,
                    geodesic_reflection, reflection_across_plane)
from .oracle import (NewtonError, ScalarSystem2, cell_center, fd_jacobian, grid_sign_scan,
                     newton2, svd_rank)

VERTEX_LABELS = ("O", "O1", "D1", "E1", "O2", "D2", "E2",
                 "A1", "B1", "C1", "A2", "B2", "C2")
GENERATOR_LABELS = ("A2-A1", "B2-B1", "C2-C1", "D2-D1", "E2-E1", "O2-O")
# (C2-C1) + (D2-D1) = (A2-A1) and (C2-C1) + (E2-E1) = (B2-B1)
RELATIONS = ((-1, 0, 1, 1, 0, 0), (0, -1, 1, 0, 1, 0))
VERTEX_ORBITS = 8
EDGE_ORBITS = 24
TANGENT_REL_THRESHOLD = 1e-6


class OutsideNeighborhoodError(GeometryError):
    """Q is too far from the identity for the midpoint reflection to exist."""


@dataclass(frozen=True)
class TridymiteBase:
    f0: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    S: Orthogonal3

    @property
    def frame(self) -> np.ndarray:
        return np.column_stack([self.e1, self.e2, self.e3])


def base() -> TridymiteBase:
    f0 = np.array([0.5, np.sqrt(3.0) / 6.0, np.sqrt(6.0) / 3.0])
    f1 = np.array([1.0, 0.0, 0.0])
    f2 = np.array([0.5, np.sqrt(3.0) / 2.0, 0.0])
    e1, e2, e3 = np.eye(3)
    return TridymiteBase(f0, f1, f2, e1, e2, e3, reflection_across_plane(e3))


_BASE = base()


@dataclass(frozen=True)
class BranchLabel:
    swap: int = 0
    reflect: int = 0

    def __mul__(self, other: "BranchLabel") -> "BranchLabel":
        return BranchLabel(self.swap ^ other.swap, self.reflect ^ other.reflect)

    def as_dict(self) -> dict:
        return {"swap": self.swap, "reflect": self.reflect}


BRANCH_LABELS = (BranchLabel(0, 0), BranchLabel(1, 0), BranchLabel(0, 1), BranchLabel(1, 1))
SWAP = BranchLabel(1, 0)
REFLECT = BranchLabel(0, 1)


@dataclass(frozen=True)
class TridymiteSolution:
    label: BranchLabel
    Q: Orthogonal3
    Q1: Orthogonal3
    Q2: Orthogonal3
    R0: Orthogonal3
    R1: Orthogonal3
    R2: Orthogonal3
    config: PeriodicRealization

    def closure_residual(self, tb: TridymiteBase = _BASE) -> float:
        """max_i |e_i + Q e_i - Q1 e_i - Q2 e_i| over the plane frame."""
        return max(float(np.linalg.norm(e + self.Q @ e - self.Q1 @ e - self.Q2 @ e))
                   for e in (tb.e1, tb.e2))

    def period_residual(self, tb: TridymiteBase = _BASE) -> float:
        """max_i |(I - R0 - R1 + R2 R0) f_i| from the matrices."""
        return periodicity_residual(self.R0, self.R1, self.R2, tb)

    def images(self, tb: TridymiteBase = _BASE) -> np.ndarray:
        """Rows Q1 e1, Q1 e2, Q2 e1, Q2 e2."""
        return np.array([self.Q1 @ tb.e1, self.Q1 @ tb.e2, self.Q2 @ tb.e1, self.Q2 @ tb.e2])


def periodicity_residual(R0, R1, R2, tb: TridymiteBase = _BASE) -> float:
    M = np.eye(3) - R0.matrix - R1.matrix + (R2 @ R0).matrix
    return max(float(np.linalg.norm(M @ f)) for f in (tb.f1, tb.f2))


def extend_reversing(a1, a2, tb: TridymiteBase = _BASE) -> Orthogonal3:
    """The det -1 orthogonal map with e1 -> a1, e2 -> a2 (so e3 -> -(a1 x a2))."""
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    image = np.column_stack([a1, a2, -np.cross(a1, a2)])
    return Orthogonal3(image @ tb.frame.T, -1)


def midpoint_reflection(Q: Orthogonal3, tb: TridymiteBase = _BASE) -> Orthogonal3:
    """Reflection in the plane through the chord midpoints of [e1, Q e1] and [e2, Q e2]."""
    m1 = tb.e1 + Q @ tb.e1
    m2 = tb.e2 + Q @ tb.e2
    try:
        return geodesic_reflection(m1, m2)
    except UndefinedGeodesicError as exc:
        if min(np.linalg.norm(m1), np.linalg.norm(m2)) < GEOM_TOL:
            reason = "a chord midpoint vanishes (Q sends e_i to -e_i)"
        else:
            reason = "the chord midpoints are collinear"
        raise OutsideNeighborhoodError(reason) from exc


def branch_maps(Q: Orthogonal3, label: BranchLabel, r: Orthogonal3 | None = None,
                tb: TridymiteBase = _BASE) -> tuple[Orthogonal3, Orthogonal3]:
    """(Q1, Q2) on the branch ``label``, built from their action on e1, e2."""
    if r is None:
        r = midpoint_reflection(Q, tb)
    A = (tb.e1, tb.e2)
    B = (Q @ tb.e1, Q @ tb.e2)
    if label.reflect:
        A = tuple(r @ a for a in A)
        B = tuple(r @ b for b in B)
    if label.swap:
        A, B = B, A
    return extend_reversing(*A, tb), extend_reversing(*B, tb)


def recover(Q: Orthogonal3, Q1: Orthogonal3, Q2: Orthogonal3) -> tuple[Orthogonal3, Orthogonal3, Orthogonal3]:
    """(R0, R1, R2) from Q = -R0, Q1 = R1, Q2 = -R2 R0."""
    if Q.det_sign != 1:
        raise OrientationError("Q must be a proper rotation")
    if Q1.det_sign != -1 or Q2.det_sign != -1:
        raise OrientationError("Q1 and Q2 must be orientation reversing")
    return -Q, Q1, Q2 @ Q.T


def realize(R0: Orthogonal3, R1: Orthogonal3, R2: Orthogonal3,
            tb: TridymiteBase = _BASE) -> PeriodicRealization:
    """The four tetrahedra at O (two), O1 and O2 with the six periods."""
    f0, f1, f2 = tb.f0, tb.f1, tb.f2
    O = np.zeros(3)
    O2, D2, E2 = R0 @ f0, R0 @ f1, R0 @ f2
    A1 = f0 + R1 @ (f1 - f0)
    B1 = f0 + R1 @ (f2 - f0)
    C1 = f0 - R1 @ f0
    R2R0 = R2 @ R0
    A2 = O2 + R2R0 @ (f1 - f0)
    B2 = O2 + R2R0 @ (f2 - f0)
    C2 = O2 - R2R0 @ f0
    pos = [O, f0, f1, f2, O2, D2, E2, A1, B1, C1, A2, B2, C2]
    edges = (tetrahedron_edges([0, 1, 2, 3]) + tetrahedron_edges([0, 4, 5, 6])
             + tetrahedron_edges([1, 7, 8, 9]) + tetrahedron_edges([4, 10, 11, 12]))
    gens = [A2 - A1, B2 - B1, C2 - C1, D2 - f1, E2 - f2, O2 - O]
    return PeriodicRealization(list(zip(VERTEX_LABELS, pos)), edges,
                               list(zip(GENERATOR_LABELS, gens)), RELATIONS)


def _solution(Q, label, Q1, Q2, tb) -> TridymiteSolution:
    R0, R1, R2 = recover(Q, Q1, Q2)
    return TridymiteSolution(label, Q, Q1, Q2, R0, R1, R2, realize(R0, R1, R2, tb))


def solve(Q: Orthogonal3, tb: TridymiteBase = _BASE) -> list[TridymiteSolution]:
    """All four branches over ``Q``, in the order of ``BRANCH_LABELS``.

    Coinciding branches are kept; see :func:`ramification_defect`.

    Raises
    ------
    OutsideNeighborhoodError
        The midpoint reflection is undefined for this ``Q``.
    """
    if Q.det_sign != 1:
        raise OrientationError("Q must be a proper rotation")
    r = midpoint_reflection(Q, tb)
    out = []
    for label in BRANCH_LABELS:
        Q1, Q2 = branch_maps(Q, label, r, tb)
        out.append(_solution(Q, label, Q1, Q2, tb))
    return out


def act(g: BranchLabel, sol: TridymiteSolution, tb: TridymiteBase = _BASE) -> TridymiteSolution:
    """Apply an element of Z2 x Z2 to a branch by acting on its matrices.

    ``reflect`` mirrors every image in the midpoint plane (Qk -> r Qk S, the
    trailing S restoring det -1); ``swap`` exchanges Q1 and Q2.
    """
    Q1, Q2 = sol.Q1, sol.Q2
    if g.reflect:
        r = midpoint_reflection(sol.Q, tb)
        Q1, Q2 = r @ Q1 @ tb.S, r @ Q2 @ tb.S
    if g.swap:
        Q1, Q2 = Q2, Q1
    return _solution(sol.Q, sol.label * g, Q1, Q2, tb)


def branch_distance(a: TridymiteSolution, b: TridymiteSolution, tb: TridymiteBase = _BASE) -> float:
    return float(np.max(np.linalg.norm(a.images(tb) - b.images(tb), axis=1)))


def count_distinct(distances: np.ndarray, tol: float) -> int:
    reps: list[int] = []
    for k in range(distances.shape[0]):
        if all(distances[k, j] > tol for j in reps):
            reps.append(k)
    return len(reps)


@dataclass(frozen=True)
class RamificationReport:
    distances: np.ndarray
    distinct: int
    tol: float


def ramification_defect(solutions: list[TridymiteSolution], tol: float = GEOM_TOL,
                        tb: TridymiteBase = _BASE) -> RamificationReport:
    n = len(solutions)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = branch_distance(solutions[i], solutions[j], tb)
    return RamificationReport(D, count_distinct(D, tol), tol)


# --- independent four-bar oracle -----------------------------------------

def four_bar_system(Q: Orthogonal3, tb: TridymiteBase = _BASE
                    ) -> tuple[ScalarSystem2, SphericalCircle, SphericalCircle]:
    """Orthogonality of (p1, p2) and of their chord complements, over circle angles."""
    c1 = chord_midpoint_circle(tb.e1, Q @ tb.e1)
    c2 = chord_midpoint_circle(tb.e2, Q @ tb.e2)

    def F(x):
        p1 = c1.point(x[0])
        p2 = c2.point(x[1])
        q1 = c1.complement(p1)
        q2 = c2.complement(p2)
        return np.stack([np.sum(p1 * p2, axis=0), np.sum(q1 * q2, axis=0)])

    return ScalarSystem2(F), c1, c2


@dataclass(frozen=True)
class OracleReport:
    count: int
    roots: list[np.ndarray]
    match_distances: list[float]
    degenerate: bool


def oracle_solutions(Q: Orthogonal3, grid_n: int = 256, tol: float = 1e-7,
                     tb: TridymiteBase = _BASE) -> OracleReport:
    """Solve the four-bar closure by grid scan and Newton, independently of ``solve``.

    Each root is stored as the stacked images ``(Q1 e1, Q1 e2, Q2 e1, Q2 e2)``
    and compared against the closed-form branches. Roots closer than ``tol``
    count once. When a circle degenerates to a point the grid has nothing to
    scan; the count then falls back to the distinct closed-form branches and
    the report is flagged.

    The count is meant for generic ``Q``. Where branches coincide the roots
    are double, Newton resolves them only to about ``sqrt(|F|)``, and nearby
    copies of one root may be counted separately.
    """
    system, c1, c2 = four_bar_system(Q, tb)
    branches = solve(Q, tb)
    branch_images = [b.images(tb) for b in branches]
    if c1.degenerate or c2.degenerate:
        rep = ramification_defect(branches, tol, tb)
        return OracleReport(rep.distinct, [], [], True)
    roots: list[np.ndarray] = []
    for cell in grid_sign_scan(system, grid_n, require="all"):
        try:
            res = newton2(system, cell_center(system, grid_n, cell))
        except NewtonError:
            continue
        p1 = c1.point(res.x[0])
        p2 = c2.point(res.x[1])
        img = np.array([p1, p2, c1.complement(p1), c2.complement(p2)])
        if all(np.max(np.linalg.norm(img - r, axis=1)) > tol for r in roots):
            roots.append(img)
    matches = [min(float(np.max(np.linalg.norm(img - b, axis=1))) for b in branch_images)
               for img in roots]
    return OracleReport(len(roots), roots, matches, False)


def oracle_count(Q: Orthogonal3, grid_n: int = 256, tol: float = 1e-7,
                 tb: TridymiteBase = _BASE) -> int:
    return oracle_solutions(Q, grid_n, tol, tb).count


# --- tangent space at the aristotype ---------------------------------------

def linearized_constraint(x: np.ndarray, tb: TridymiteBase = _BASE) -> np.ndarray:
    """F(X, Y1, Y2) = ((I + Q - Q1 - Q2) e_i)_{i=1,2} with Q = exp X, Qk = S exp Yk."""
    x = np.asarray(x, dtype=float)
    Q = exp_so3(x[0:3])
    Q1 = tb.S @ exp_so3(x[3:6])
    Q2 = tb.S @ exp_so3(x[6:9])
    M = np.eye(3) + Q.matrix - Q1.matrix - Q2.matrix
    return np.concatenate([M @ tb.e1, M @ tb.e2])


@dataclass(frozen=True)
class TangentReport:
    nullity: int
    rank: int
    singular_values: np.ndarray
    jacobian: np.ndarray


def tangent_analysis(h: float = 1e-5, tb: TridymiteBase = _BASE) -> TangentReport:
    if not (1e-8 <= h <= 1e-3):
        raise ValueError("finite-difference step must lie in [1e-8, 1e-3]")
    J = fd_jacobian(lambda x: linearized_constraint(x, tb), np.zeros(9), h)
    rep = svd_rank(J, TANGENT_REL_THRESHOLD)
    return TangentReport(J.shape[1] - rep.rank, rep.rank, rep.singular_values, J)


def tangent_dimension_at_aristotype(h: float = 1e-5) -> int:
    return tangent_analysis(h).nullity


def aristotype() -> TridymiteSolution:
    return solve(Orthogonal3.identity())[0]

