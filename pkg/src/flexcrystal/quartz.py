"""
Deformations of the ideal quartz framework.

The tetrahedron A0 A1 A2 A3 is held fixed. The neighbour sharing A0 is its
image under an orientation-reversing orthogonal map R0 fixing A0, and the
neighbour sharing A1 is its image under R1 fixing A1. With

    v = e1 - e2 - e3,    u = e1 + e2 - e3,    e_i = A_i - A0,

the four period generators sum to ``R1 v - R0 v - u``, so periodicity is the
single vector equation ``R1 v - R0 v = u``. Since |u| = |v| and u is
perpendicular to v, ``R0 v`` is confined to a circle (angle ``theta``); R0 is
then fixed up to a turn about ``R0 v`` (angle ``phi0``) and R1 up to a turn
about ``R1 v = R0 v + u`` (angle ``phi1``). The three angles chart the
deformation space as a 3-torus, which still contains configurations whose
generators fail to span space.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import framework as fw
from .geom3 import (GEOM_TOL, Orthogonal3, normalize, reflection_across_plane,
                    rotation_circle)
from .framework import PeriodicRealization, tetrahedron_edges

TWO_PI = 2.0 * np.pi
SWEEP_COLUMNS = ("theta", "phi0", "phi1", "rank", "sigma_min", "cell_det")
GENERATOR_LABELS = ("B3-C2", "A3-C3", "B2-A2", "C0-B1")
VERTEX_LABELS = ("A0", "A1", "A2", "A3", "B1", "B2", "B3", "C0", "C2", "C3")


@dataclass(frozen=True)
class QuartzChart:
    theta: float = 0.0
    phi0: float = 0.0
    phi1: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi0", "phi1"):
            object.__setattr__(self, name, float(np.mod(getattr(self, name), TWO_PI)))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.phi0, self.phi1])


@dataclass(frozen=True)
class QuartzBase:
    """The fixed tetrahedron and the derived vectors every chart point needs."""

    A: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @property
    def e(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        A0 = self.A[0]
        return tuple(a - A0 for a in self.A[1:])

    @property
    def v(self) -> np.ndarray:
        e1, e2, e3 = self.e
        return e1 - e2 - e3

    @property
    def u(self) -> np.ndarray:
        e1, e2, e3 = self.e
        return e1 + e2 - e3

    def circle_frame(self) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
        """Centre, radius and in-plane basis (p, q) of the circle carrying ``R0 v``."""
        u = self.u
        uh = normalize(u)
        e3 = self.e[2]
        p = normalize(e3 - np.dot(e3, uh) * uh)
        q = np.cross(uh, p)
        c = -0.5 * u
        rho = float(np.sqrt(np.dot(self.v, self.v) - np.dot(c, c)))
        return c, rho, p, q

    def section_reflection(self) -> Orthogonal3:
        """Fixed reflection through a plane containing v (normal along v x u)."""
        return reflection_across_plane(normalize(np.cross(self.v, self.u)))

    def rotated(self, G: Orthogonal3) -> "QuartzBase":
        return QuartzBase(tuple(G @ a for a in self.A))


@dataclass(frozen=True)
class QuartzConfig:
    chart: QuartzChart
    R0: Orthogonal3
    R1: Orthogonal3
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    fragment: PeriodicRealization

    @property
    def generators(self) -> np.ndarray:
        return self.fragment.generator_matrix()

    def periodicity_residual(self) -> float:
        """``|R1 v - R0 v - u|`` from the rotation matrices."""
        v = self.e1 - self.e2 - self.e3
        u = self.e1 + self.e2 - self.e3
        return float(np.linalg.norm(self.R1 @ v - self.R0 @ v - u))


def base_tetrahedron() -> QuartzBase:
    """Regular unit tetrahedron with A0 at the origin and A1 A2 A3 listed counter-clockwise."""
    return QuartzBase((
        np.zeros(3),
        np.array([1.0, 0.0, 0.0]),
        np.array([0.5, np.sqrt(3.0) / 2.0, 0.0]),
        np.array([0.5, np.sqrt(3.0) / 6.0, np.sqrt(6.0) / 3.0]),
    ))


_BASE = base_tetrahedron()


def image_of_v(theta: float, base: QuartzBase = _BASE) -> np.ndarray:
    """The admissible position of ``R0 v`` at circle angle ``theta``."""
    c, rho, p, q = base.circle_frame()
    return c + rho * (np.cos(theta) * p + np.sin(theta) * q)


def chart_to_rotations(chart: QuartzChart, base: QuartzBase = _BASE) -> tuple[Orthogonal3, Orthogonal3]:
    v, u = base.v, base.u
    w0 = image_of_v(chart.theta, base)
    w1 = w0 + u
    nv = np.linalg.norm(v)
    # w0 . v = 0 and w1 . v = 0 on this circle, so neither is antipodal to v
    assert np.dot(w0, v) > (-1.0 + GEOM_TOL) * nv * nv
    assert np.dot(w1, v) > (-1.0 + GEOM_TOL) * nv * nv
    S = base.section_reflection()
    R0 = rotation_circle(v, w0, chart.phi0) @ S
    R1 = rotation_circle(v, w1, chart.phi1) @ S
    return R0, R1


def assemble(R0: Orthogonal3, R1: Orthogonal3, base: QuartzBase = _BASE,
             chart: QuartzChart | None = None) -> QuartzConfig:
    """Place the three tetrahedra for arbitrary (R0, R1) and read off the generators.

    Nothing here enforces periodicity; ``realize`` feeds in maps that satisfy
    it, tests feed in maps that do not.
    """
    A0, A1, A2, A3 = base.A
    e1, e2, e3 = base.e
    B = [A0 + R0 @ e for e in (e1, e2, e3)]
    C0 = A1 + R1 @ (A0 - A1)
    C2 = A1 + R1 @ (A2 - A1)
    C3 = A1 + R1 @ (A3 - A1)
    pos = [A0, A1, A2, A3, B[0], B[1], B[2], C0, C2, C3]
    gens = [B[2] - C2, A3 - C3, B[1] - A2, C0 - B[0]]
    edges = (tetrahedron_edges([0, 1, 2, 3]) + tetrahedron_edges([0, 4, 5, 6])
             + tetrahedron_edges([1, 7, 8, 9]))
    frag = PeriodicRealization(list(zip(VERTEX_LABELS, pos)), edges,
                               list(zip(GENERATOR_LABELS, gens)), [(1, 1, 1, 1)])
    return QuartzConfig(chart if chart is not None else QuartzChart(), R0, R1,
                        e1, e2, e3, frag)


def realize(chart: QuartzChart, base: QuartzBase = _BASE) -> QuartzConfig:
    R0, R1 = chart_to_rotations(chart, base)
    return assemble(R0, R1, base, chart)


def generator_determinant(config: QuartzConfig) -> float:
    """det[g1 g2 g3]; with the zero-sum relation every generator triple gives +- this."""
    return float(np.linalg.det(config.generators[:, :3]))


def is_degenerate(config: QuartzConfig, tol: float = fw.DEFAULT_RANK_TOL) -> bool:
    return fw.lattice_rank(config.generators, tol) < 3


def first_independent_determinant(G: np.ndarray, tol: float = fw.DEFAULT_RANK_TOL) -> float:
    triples = fw.determinant_triples(G)
    for _, d in triples:
        if abs(d) > tol:
            return d
    return triples[0][1]


def _angles(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("sample counts must be at least 1")
    return TWO_PI * np.arange(n) / n


def sweep_rows(grid: tuple[int, int, int], base: QuartzBase = _BASE,
               tol: float = fw.DEFAULT_RANK_TOL):
    """Yield one row per grid point, theta outermost and phi1 innermost."""
    nt, n0, n1 = grid
    for th, p0, p1 in product(_angles(nt), _angles(n0), _angles(n1)):
        cfg = realize(QuartzChart(th, p0, p1), base)
        G = cfg.generators
        sv = fw.lattice_singular_values(G)
        yield (float(th), float(p0), float(p1), int(np.sum(sv > tol)), float(sv[-1]),
               first_independent_determinant(G, tol))


def sweep(grid: tuple[int, int, int], sink=None, base: QuartzBase = _BASE,
          tol: float = fw.DEFAULT_RANK_TOL):
    """Write the sweep as CSV to ``sink`` (a text stream); returns the rows.

    With ``sink=None`` the CSV text is built in memory and discarded.
    """
    out = sink if sink is not None else io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    rows = []
    for row in sweep_rows(grid, base, tol):
        th, p0, p1, rank, smin, det = row
        writer.writerow([fw.format_float(th), fw.format_float(p0), fw.format_float(p1), rank,
                         fw.format_float(smin), fw.format_float(det)])
        rows.append(row)
    return rows


def locate_degenerate(grid_n: int = 12, base: QuartzBase = _BASE,
                      max_bisections: int = 200) -> QuartzChart:
    """Find a chart point where the generators span only a plane.

    Scans ``det[g1 g2 g3]`` on a ``grid_n^3`` torus grid, takes the first
    pair of neighbours along phi1 with opposite signs, and bisects that
    segment until the determinant stops shrinking.
    """
    a = _angles(grid_n)

    def det_at(th, p0, p1):
        return generator_determinant(realize(QuartzChart(th, p0, p1), base))

    for th, p0 in product(a, a):
        vals = [det_at(th, p0, p1) for p1 in a]
        for k in range(grid_n):
            lo_v, hi_v = vals[k], vals[(k + 1) % grid_n]
            if lo_v == 0.0:
                return QuartzChart(th, p0, a[k])
            if lo_v * hi_v < 0:
                lo = a[k]
                hi = lo + TWO_PI / grid_n
                for _ in range(max_bisections):
                    mid = 0.5 * (lo + hi)
                    if mid in (lo, hi):
                        break
                    mv = det_at(th, p0, mid)
                    if mv == 0.0:
                        lo = hi = mid
                        break
                    if mv * lo_v < 0:
                        hi = mid
                    else:
                        lo, lo_v = mid, mv
                return QuartzChart(th, p0, lo)
    raise RuntimeError("no sign change of the generator determinant on the scan grid")
