"""Uniform 1D mesh, limiter masks and the discrete (N, Gamma) state."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Two-sided cutoff profile: alpha is 0 for |x| < INNER, 1 for |x| >= OUTER.
CUTOFF_INNER = 0.015
CUTOFF_OUTER = 0.075
CUTOFF_STIFFNESS = 0.060


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if self.n_cells < 4:
            raise ValueError(f"need at least 4 cells, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    def cell_center(self, i):
        return self.x_min + (np.asarray(i) + 0.5) * self.dx

    @property
    def centers(self) -> np.ndarray:
        return self.cell_center(np.arange(self.n_cells))

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    def ghost_centers(self, depth: int = 2) -> tuple[np.ndarray, np.ndarray]:
        """Centers of the ``depth`` ghost cells on each side, ordered left to right."""
        left = self.cell_center(np.arange(-depth, 0))
        right = self.cell_center(np.arange(self.n_cells, self.n_cells + depth))
        return left, right


@dataclass(frozen=True)
class RegionMask:
    """Per-cell limiter indicator ``chi``, flux cutoff ``alpha`` and penalty side sign."""

    chi: np.ndarray
    alpha: np.ndarray
    side_sign: np.ndarray
    limiter: tuple[float, float] | None = None
    two_sided: bool = False

    @property
    def plasma(self) -> np.ndarray:
        return self.chi == 0

    @property
    def in_limiter(self) -> np.ndarray:
        return self.chi == 1

    @classmethod
    def empty(cls, n_cells: int) -> "RegionMask":
        return cls(
            chi=np.zeros(n_cells, dtype=np.int8),
            alpha=np.ones(n_cells),
            side_sign=np.ones(n_cells),
        )


@dataclass
class FieldState:
    t: float
    N: np.ndarray
    Gamma: np.ndarray

    def __post_init__(self):
        self.N = np.asarray(self.N, dtype=float)
        self.Gamma = np.asarray(self.Gamma, dtype=float)
        if self.N.shape != self.Gamma.shape:
            raise ValueError("N and Gamma must have the same shape")

    @property
    def M(self) -> np.ndarray:
        return self.Gamma / self.N

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.N.copy(), self.Gamma.copy())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.N)) and np.all(np.isfinite(self.Gamma)))


def alpha_cutoff(x):
    """Smooth even flux cutoff: 1 for |x| >= 0.075, 0 for |x| <= 0.015.

    In between, ``0.5 * tanh(0.06 * (-1/(|x|-0.015) - 1/(|x|-0.075))) + 0.5``,
    which rises monotonically from 0 to 1 and is C-infinity at both ends.
    """
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    out = np.where(r >= CUTOFF_OUTER, 1.0, 0.0)
    mid = (r > CUTOFF_INNER) & (r < CUTOFF_OUTER)
    if np.any(mid):
        rm = r[mid]
        arg = CUTOFF_STIFFNESS * (-1.0 / (rm - CUTOFF_INNER) - 1.0 / (rm - CUTOFF_OUTER))
        out[mid] = 0.5 * np.tanh(arg) + 0.5
    return out if out.ndim else float(out)


def build_grid(x_min, x_max, n_cells, limiter=None, two_sided=None):
    """Build the mesh and the limiter mask.

    ``limiter`` is an interval ``(a, b)`` inside ``[x_min, x_max]`` or None.
    Cells are assigned to the limiter by their center. A limiter touching
    neither end of the domain is two-sided: it gets the smooth ``alpha``
    cutoff around its midpoint and a side sign of +1 on its left half, -1
    on its right half.
    """
    grid = Grid1D(float(x_min), float(x_max), int(n_cells))
    if limiter is None:
        return grid, RegionMask.empty(grid.n_cells)

    a, b = (float(v) for v in limiter)
    if not b > a:
        raise ValueError(f"empty limiter interval [{a}, {b}]")
    if a < grid.x_min or b > grid.x_max:
        raise ValueError(
            f"limiter [{a}, {b}] is not inside the domain [{grid.x_min}, {grid.x_max}]"
        )
    x = grid.centers
    chi = ((x > a) & (x < b)).astype(np.int8)
    if not chi.any():
        raise ValueError(f"limiter [{a}, {b}] contains no cell center")
    if chi.all():
        raise ValueError("limiter covers the whole domain")

    if two_sided is None:
        two_sided = a > grid.x_min and b < grid.x_max
    mid = 0.5 * (a + b)
    if two_sided:
        alpha = alpha_cutoff(x - mid)
        side_sign = np.where(x < mid, 1.0, -1.0)
    else:
        alpha = np.ones(grid.n_cells)
        # limiter at the right end faces plasma on its left, and vice versa
        side = 1.0 if b >= grid.x_max else -1.0
        side_sign = np.full(grid.n_cells, side)
    return grid, RegionMask(chi, alpha, side_sign, limiter=(a, b), two_sided=bool(two_sided))


@dataclass(frozen=True)
class Geometry:
    """Named domain/limiter layouts used by the experiments."""

    x_min: float
    x_max: float
    limiter: tuple[float, float] | None
    interface: tuple[float, ...] = field(default=())

    def build(self, n_cells: int):
        return build_grid(self.x_min, self.x_max, n_cells, self.limiter)


ONE_SIDED = Geometry(0.0, 0.5, (0.4, 0.5), interface=(0.4,))
TWO_SIDED = Geometry(-0.5, 0.5, (-0.1, 0.1), interface=(-0.1, 0.1))
PLASMA_ONLY = Geometry(0.0, 0.4, None)
