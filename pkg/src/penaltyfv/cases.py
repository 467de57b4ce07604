"""Manufactured and stationary test scenarios.

Each case carries the analytic fields on the plasma region, compatible
source terms, and the limit (epsilon -> 0) fields of the optimal penalty
problem inside the limiter, which serve as the analytic reference there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .boundary import asymptotic_bc

WIDTH = 0.16  # Gaussian width parameter in exp(-x^2 / (0.16 (t+1)))
WAVENUMBER = np.pi / 0.8
INTERFACE = 0.4  # plasma/limiter interface in the one-sided layout
TWO_SIDED_INTERFACE = 0.1
TWO_SIDED_SHIFT = 0.5

Field = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    N_exact: Field
    Gamma_exact: Field
    S_N: Field
    S_Gamma: Field
    in_limiter: Callable[[np.ndarray], np.ndarray]
    limit_N: Field
    limit_Gamma: Field
    M0: float
    reference_kind: str = "analytic"

    def valid_region(self, x):
        return ~self.in_limiter(np.asarray(x, dtype=float))

    def initial_state(self, grid):
        from .grid import FieldState

        x = grid.centers
        return FieldState(0.0, self.N_exact(0.0, x), self.Gamma_exact(0.0, x))


def _check_M0(M0):
    if not 0.0 < M0 <= 1.0:
        raise ValueError(f"M0 must lie in (0, 1], got {M0}")


def gaussian_sine_fields(t, x, m):
    """N, Gamma and the sources making them an exact solution.

    N = exp(-x^2 / (a (t+1))), Gamma = m sin(k x) N, with a = 0.16 and
    k = pi/0.8. Closed forms obtained by symbolic differentiation.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    tau = WIDTH * (t + 1.0)
    N = np.exp(-x * x / tau)
    s = np.sin(WAVENUMBER * x)
    c = np.cos(WAVENUMBER * x)
    dN_dt = N * x * x / (WIDTH * (t + 1.0) ** 2)
    dN_dx = -2.0 * x / tau * N
    G = m * s * N
    dG_dx = m * (WAVENUMBER * c * N + s * dN_dx)
    S_N = dN_dt + dG_dx
    # d/dx (G^2/N + N) = d/dx ((m^2 s^2 + 1) N)
    S_G = m * s * dN_dt + 2.0 * m * m * s * c * WAVENUMBER * N + (m * m * s * s + 1.0) * dN_dx
    return N, G, S_N, S_G


def _one_sided_limiter(x):
    return np.asarray(x) > INTERFACE


def _two_sided_limiter(x):
    return np.abs(np.asarray(x)) < TWO_SIDED_INTERFACE


def _two_sided_coordinate(x):
    # plasma on ]0.1, 0.5] maps to ]-0.4, 0], on [-0.5, -0.1[ to [0, 0.4[
    x = np.asarray(x, dtype=float)
    return x - TWO_SIDED_SHIFT * np.where(x < 0.0, -1.0, 1.0)


def case_regular(M0=0.9, two_sided=False) -> ManufacturedCase:
    """Non-stationary Gaussian test solution with Mach M0 at the interface.

    ``two_sided=True`` maps the solution onto [-0.5, 0.5] with the limiter in
    [-0.1, 0.1]; the plasma centre sits at the periodic point x = +-0.5.
    """
    _check_M0(M0)
    if two_sided:
        coord = _two_sided_coordinate
        in_lim = _two_sided_limiter

        def depth(x):
            return TWO_SIDED_INTERFACE - np.abs(x)

        def side(x):
            return np.where(np.asarray(x) < 0.0, 1.0, -1.0)
    else:
        coord = np.asarray
        in_lim = _one_sided_limiter

        def depth(x):
            return np.asarray(x) - INTERFACE

        def side(x):
            return np.ones_like(np.asarray(x, dtype=float))

    def field(k):
        return lambda t, x: gaussian_sine_fields(t, coord(x), M0)[k]

    def limit_N(t, x):
        x = np.asarray(x, dtype=float)
        lim = in_lim(x)
        inner = asymptotic_bc(t, INTERFACE + np.maximum(depth(x), 0.0), M0)[0]
        return np.where(lim, inner, field(0)(t, x))

    def limit_Gamma(t, x):
        x = np.asarray(x, dtype=float)
        lim = in_lim(x)
        return np.where(lim, side(x) * M0 * limit_N(t, x), field(1)(t, x))

    return ManufacturedCase(
        name="regular_two_sided" if two_sided else "regular",
        N_exact=field(0),
        Gamma_exact=field(1),
        S_N=field(2),
        S_Gamma=field(3),
        in_limiter=in_lim,
        limit_N=limit_N,
        limit_Gamma=limit_Gamma,
        M0=M0,
    )


def case_isoardi() -> ManufacturedCase:
    """Same Gaussian with Gamma = sin(kx) N, i.e. Mach exactly 1 at x = 0.4."""

    def field(k):
        return lambda t, x: gaussian_sine_fields(t, x, 1.0)[k]

    def zero(t, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    lim = _one_sided_limiter

    return ManufacturedCase(
        name="isoardi",
        N_exact=field(0),
        Gamma_exact=field(1),
        S_N=field(2),
        S_Gamma=field(3),
        in_limiter=lim,
        limit_N=lambda t, x: np.where(lim(x), 0.0, field(0)(t, x)),
        limit_Gamma=lambda t, x: np.where(lim(x), 0.0, field(1)(t, x)),
        M0=1.0,
    )


def stationary_profile(x, S, M0):
    """Stationary plasma fields: Gamma = S x, Gamma^2/N + N constant."""
    x = np.asarray(x, dtype=float)
    a = 1.0 / M0 + M0
    disc = (0.4 * a) ** 2 - 4.0 * x * x
    if np.any(disc < -1e-14):
        raise ValueError(f"stationary profile undefined for |x| > {0.2 * a:.6g}")
    N = 0.2 * S * a + 0.5 * S * np.sqrt(np.maximum(disc, 0.0))
    return N, S * x


def case_stationary(S=1.0, M0=0.99) -> ManufacturedCase:
    """Stationary solution driven by S_N = S in the plasma, S_Gamma = 0.

    Past the interface the fields are continued by their interface values
    (N = 0.4 S / M0, Gamma = 0.4 S), which is an exact stationary solution
    of the optimal penalty problem in the limiter for any epsilon.
    """
    _check_M0(M0)
    if S <= 0:
        raise ValueError("source amplitude S must be positive")
    N_wall = 0.4 * S / M0
    G_wall = 0.4 * S

    def N_exact(t, x):
        x = np.asarray(x, dtype=float)
        inside = _one_sided_limiter(x)
        N, _ = stationary_profile(np.where(inside, 0.0, x), S, M0)
        return np.where(inside, N_wall, N)

    def Gamma_exact(t, x):
        x = np.asarray(x, dtype=float)
        return np.where(_one_sided_limiter(x), G_wall, S * x)

    def S_N(t, x):
        return np.full_like(np.asarray(x, dtype=float), S)

    def S_Gamma(t, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return ManufacturedCase(
        name="stationary",
        N_exact=N_exact,
        Gamma_exact=Gamma_exact,
        S_N=S_N,
        S_Gamma=S_Gamma,
        in_limiter=_one_sided_limiter,
        limit_N=N_exact,
        limit_Gamma=Gamma_exact,
        M0=M0,
    )


CASES = {
    "regular": case_regular,
    "isoardi": case_isoardi,
    "stationary": case_stationary,
}


class AnalyticReference:
    """Reference fields from a case's epsilon -> 0 limit."""

    def __init__(self, case: ManufacturedCase):
        self.case = case

    def fields(self, grid, t):
        x = grid.centers
        return self.case.limit_N(t, x), self.case.limit_Gamma(t, x)


class NumericalReference:
    """Per-cell reference produced by a run at a tiny epsilon on a given mesh."""

    def __init__(self, grid, N, Gamma, t, eps_ref=1e-20):
        self.grid = grid
        self.N = np.asarray(N, dtype=float)
        self.Gamma = np.asarray(Gamma, dtype=float)
        self.t = t
        self.eps_ref = eps_ref

    def fields(self, grid, t=None):
        if grid.n_cells != self.grid.n_cells or not np.isclose(grid.dx, self.grid.dx):
            raise ValueError(
                f"reference mesh has {self.grid.n_cells} cells, requested {grid.n_cells}"
            )
        if t is not None and not np.isclose(t, self.t):
            raise ValueError(f"reference stored at t={self.t}, requested t={t}")
        return self.N, self.Gamma


def reference_two_fields(config, eps_ref=1e-20) -> NumericalReference:
    """Run the two-fields scheme at ``eps_ref`` and keep the final fields."""
    from .experiments import run_config

    result = run_config(config.replace(eps=eps_ref))
    return NumericalReference(result.grid, result.state.N, result.state.Gamma, result.state.t, eps_ref)
