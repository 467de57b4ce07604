"""Ghost-cell boundary conditions."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

GHOST_DEPTH = 2
# Position of the plasma/limiter interface assumed by the order-0 outflow data.
OUTFLOW_INTERFACE = 0.4


class BCKind(str, Enum):
    SYMMETRY = "symmetry"
    PERIODIC = "periodic"
    EXACT_DIRICHLET = "exact_dirichlet"
    ASYMPTOTIC_OUTFLOW = "asymptotic_outflow"
    EXTRAPOLATE = "extrapolate"


@dataclass(frozen=True)
class BoundaryCondition:
    left: BCKind
    right: BCKind
    case: object = None  # ManufacturedCase, needed for EXACT_DIRICHLET
    M0: float | None = None  # needed for ASYMPTOTIC_OUTFLOW
    ghost_depth: int = GHOST_DEPTH

    def __post_init__(self):
        object.__setattr__(self, "left", BCKind(self.left))
        object.__setattr__(self, "right", BCKind(self.right))
        periodic = (self.left is BCKind.PERIODIC, self.right is BCKind.PERIODIC)
        if any(periodic) and not all(periodic):
            raise ValueError("periodic boundary must be set on both sides")
        kinds = (self.left, self.right)
        if BCKind.EXACT_DIRICHLET in kinds and self.case is None:
            raise ValueError("exact_dirichlet boundary needs a case")
        if BCKind.ASYMPTOTIC_OUTFLOW in kinds and self.M0 is None:
            raise ValueError("asymptotic_outflow boundary needs M0")
        if self.ghost_depth < 2:
            raise ValueError("MUSCL needs ghost_depth >= 2")


def asymptotic_bc(t, x, M0):
    """Order-0 limit of the density behind the outer limiter edge.

    Returns ``(N_BC, M_BC)``; ``M_BC`` is always ``M0``. For points not yet
    reached by the characteristic leaving the interface at t=0 the initial
    Gaussian is transported at speed ``M0``; afterwards the interface trace
    ``exp(-1/(t+1))`` is.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    delay = (x - OUTFLOW_INTERFACE) / M0
    before = t < delay
    with np.errstate(divide="ignore", invalid="ignore"):
        N_before = np.exp(-6.25 * (x - t * M0) ** 2)
        N_after = np.exp(-1.0 / (t - delay + 1.0))
    N = np.where(before, N_before, N_after)
    M = np.full_like(N, M0)
    if N.ndim == 0:
        return float(N), float(M)
    return N, M


def _mirror(N, G, side, depth):
    if side == "left":
        idx = np.arange(depth)[::-1]
    else:
        idx = len(N) - 1 - np.arange(depth)
    return N[idx], -G[idx]


def _side_values(kind, N, G, bc, t, x_ghost, side, depth):
    if kind is BCKind.SYMMETRY:
        return _mirror(N, G, side, depth)
    if kind is BCKind.PERIODIC:
        sl = slice(len(N) - depth, None) if side == "left" else slice(0, depth)
        return N[sl], G[sl]
    if kind is BCKind.EXACT_DIRICHLET:
        return bc.case.N_exact(t, x_ghost), bc.case.Gamma_exact(t, x_ghost)
    if kind is BCKind.ASYMPTOTIC_OUTFLOW:
        Nb, Mb = asymptotic_bc(t, x_ghost, bc.M0)
        return Nb, Mb * Nb
    if kind is BCKind.EXTRAPOLATE:
        k = 0 if side == "left" else -1
        return np.full(depth, N[k]), np.full(depth, G[k])
    raise ValueError(f"unknown boundary kind {kind!r}")


def fill_ghosts(N, Gamma, bc: BoundaryCondition, t, grid):
    """Return ``(N, Gamma)`` padded with ``bc.ghost_depth`` ghost cells per side."""
    depth = bc.ghost_depth
    N = np.asarray(N, dtype=float)
    Gamma = np.asarray(Gamma, dtype=float)
    xl, xr = grid.ghost_centers(depth)
    Nl, Gl = _side_values(bc.left, N, Gamma, bc, t, xl, "left", depth)
    Nr, Gr = _side_values(bc.right, N, Gamma, bc, t, xr, "right", depth)
    return np.concatenate([Nl, N, Nr]), np.concatenate([Gl, Gamma, Gr])
