"""
Independent numerical checks: 2D Newton refinement, sign-change grid scans,
central-difference Jacobians and singular-value rank.

Nothing here knows about crystal frameworks. The solvers are checked against
these routines, so they deliberately avoid any hand-derived derivative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi


class NewtonError(RuntimeError):
    pass


class NewtonDivergence(NewtonError):
    """Iteration limit or line-search limit reached."""


class SingularJacobian(NewtonError):
    pass


class DomainEscape(NewtonError):
    pass


@dataclass(frozen=True)
class ScalarSystem2:
    """A map R^2 -> R^2 on a box.

    ``func`` takes an array of shape ``(2, ...)`` and returns the same shape,
    so grids can be evaluated in one call. With ``periodic=True`` the box is
    a torus and iterates are wrapped instead of rejected.
    """

    func: Callable[[np.ndarray], np.ndarray]
    lower: tuple[float, float] = (0.0, 0.0)
    upper: tuple[float, float] = (TWO_PI, TWO_PI)
    periodic: bool = True

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def wrap(self, x: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lower)
        span = np.asarray(self.upper) - lo
        return lo + np.mod(x - lo, span)

    def inside(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    iterations: int
    residuals: list[float] = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.residuals[-1]


def newton2(system: ScalarSystem2, x0, max_iter: int = 50, tol: float = 1e-12,
            h: float = 1e-7, max_halvings: int = 30) -> NewtonResult:
    """Damped Newton iteration for a 2x2 system with a finite-difference Jacobian.

    A full step is tried first; if it does not lower ``|F|`` (or leaves a
    non-periodic box) the step is halved, up to ``max_halvings`` times.

    Raises
    ------
    SingularJacobian
        ``|det J| < 1e-14`` at an iterate.
    NewtonDivergence
        No convergence in ``max_iter`` steps or the line search gave up.
    DomainEscape
        The start point is outside the box, or the line search could not
        keep a decreasing step inside it.
    """
    x = np.array(x0, dtype=float).reshape(2)
    if not system.periodic and not system.inside(x):
        raise DomainEscape(f"start point {x} outside the domain")
    fx = system(x)
    res = [float(np.linalg.norm(fx))]
    for it in range(max_iter + 1):
        if res[-1] < tol:
            return NewtonResult(x, it, res)
        if it == max_iter:
            break
        J = fd_jacobian(system, x, h)
        if abs(np.linalg.det(J)) < 1e-14:
            raise SingularJacobian(f"singular Jacobian at {x}")
        step = np.linalg.solve(J, -fx)
        t = 1.0
        blocked = False
        for _ in range(max_halvings + 1):
            xn = x + t * step
            if system.periodic:
                xn = system.wrap(xn)
            elif not system.inside(xn):
                blocked = True
                t *= 0.5
                continue
            fn = system(xn)
            rn = float(np.linalg.norm(fn))
            if rn < res[-1]:
                break
            blocked = False
            t *= 0.5
        else:
            if blocked:
                raise DomainEscape(f"every damped step from {x} leaves the domain")
            raise NewtonDivergence(f"line search failed at {x} (|F| = {res[-1]:.3e})")
        x, fx = xn, fn
        res.append(rn)
    raise NewtonDivergence(f"no convergence after {max_iter} iterations (|F| = {res[-1]:.3e})")


def grid_sign_scan(system: ScalarSystem2, grid_n: int, require: str = "any") -> list[tuple[int, int]]:
    """Cells of a ``grid_n x grid_n`` lattice where the components change sign.

    ``require="any"`` keeps cells where at least one component changes sign
    among the four corners, ``"all"`` keeps those where both do (the usual
    bracket for a simple root). On periodic systems the last row and column
    of cells wrap across the seam. Cells are returned in row-major order.
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    if require not in ("any", "all"):
        raise ValueError("require must be 'any' or 'all'")
    lo = np.asarray(system.lower, dtype=float)
    hi = np.asarray(system.upper, dtype=float)
    if system.periodic:
        ax = [lo[k] + (hi[k] - lo[k]) * np.arange(grid_n) / grid_n for k in range(2)]
    else:
        ax = [np.linspace(lo[k], hi[k], grid_n + 1) for k in range(2)]
    A, B = np.meshgrid(ax[0], ax[1], indexing="ij")
    F = system(np.stack([A, B]))
    if system.periodic:
        F = np.concatenate([F, F[:, :1, :]], axis=1)
        F = np.concatenate([F, F[:, :, :1]], axis=2)
    S = np.sign(F)
    corners = np.stack([S[:, :-1, :-1], S[:, 1:, :-1], S[:, :-1, 1:], S[:, 1:, 1:]])
    changes = (corners.max(axis=0) > 0) & (corners.min(axis=0) < 0)
    # an exact zero at a corner also brackets
    changes |= (corners == 0).any(axis=0)
    mask = changes.any(axis=0) if require == "any" else changes.all(axis=0)
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(mask))]


def cell_center(system: ScalarSystem2, grid_n: int, cell: tuple[int, int]) -> np.ndarray:
    lo = np.asarray(system.lower, dtype=float)
    hi = np.asarray(system.upper, dtype=float)
    return lo + (hi - lo) * (np.asarray(cell, dtype=float) + 0.5) / grid_n


def fd_jacobian(f: Callable, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian, column k = (f(x + h u_k) - f(x - h u_k)) / 2h."""
    if h <= 0:
        raise ValueError("step h must be positive")
    x = np.asarray(x, dtype=float).ravel()
    cols = []
    for k in range(x.size):
        dx = np.zeros_like(x)
        dx[k] = h
        fp = np.asarray(f(x + dx), dtype=float).ravel()
        fm = np.asarray(f(x - dx), dtype=float).ravel()
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise FloatingPointError(f"non-finite evaluation along coordinate {k}")
        cols.append((fp - fm) / (2.0 * h))
    return np.column_stack(cols)


@dataclass(frozen=True)
class RankReport:
    singular_values: np.ndarray
    rank: int
    threshold: float


def svd_rank(matrix, rel_threshold: float = 1e-9) -> RankReport:
    """Numerical rank: singular values above ``rel_threshold * sigma_max``."""
    M = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(M)):
        raise FloatingPointError("matrix has non-finite entries")
    s = np.linalg.svd(M, compute_uv=False) if M.size else np.zeros(0)
    smax = float(s[0]) if s.size else 0.0
    thr = rel_threshold * smax
    rank = int(np.sum(s > thr)) if smax > 0 else 0
    return RankReport(s, rank, thr)
