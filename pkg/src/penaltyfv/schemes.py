"""Penalized right-hand sides and the semi-implicit Heun integrator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .boundary import BCKind, BoundaryCondition, fill_ghosts
from .errors import BlowUpError, PositivityError
from .flux import interface_flux, muscl_reconstruct
from .grid import FieldState, Grid1D, RegionMask


DENSITY_FLOOR = 1e-150


class SchemeKind(str, Enum):
    NONE = "none"
    ISOARDI = "isoardi"
    TWO_FIELDS = "two_fields"
    OPTIMAL = "optimal"
    OPTIMAL_TWO_SIDED = "optimal_two_sided"


class Stepping(str, Enum):
    # second stage U^n - dt/2 (L^n + L^1) + dt/2 (S^n + S^1), then the penalty
    HEUN = "heun"
    # second stage starts from (U^n + U^1)/2 before adding the same
    # increment; this counts the first-stage increment twice, so fluxes get weight 2 and sources 3/2
    # and the scheme is not consistent with the PDE
    PRINTED = "printed"
    # (U^n + P(U^1)) / 2 with P the penalized forward-Euler stage
    SSP = "ssp"


class TwoFieldsForm(str, Enum):
    # Gamma relaxed with rate 1/(eps N) toward M0 N, forcing dt chi M0 / eps
    UPDATE_BLOCK = "update_block"
    # same block with the forcing scaled by the stage density; its fixed
    # point is Gamma = M0 N^2
    UPDATE_BLOCK_N_SCALED = "update_block_n_scaled"
    # penalty (chi/eps)(Gamma/M0 - N), as in the continuous two-fields system
    SYSTEM_10 = "system_10"


@dataclass(frozen=True)
class PenaltyScheme:
    kind: SchemeKind
    mask: RegionMask
    eps: float = 1.0
    M0: float = 0.9
    paper_literal_rusanov: bool = False
    two_fields_form: TwoFieldsForm = TwoFieldsForm.UPDATE_BLOCK
    stepping: Stepping = Stepping.HEUN

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        object.__setattr__(self, "two_fields_form", TwoFieldsForm(self.two_fields_form))
        object.__setattr__(self, "stepping", Stepping(self.stepping))
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not 0.0 < self.M0 <= 1.0:
            raise ValueError(f"M0 must lie in (0, 1], got {self.M0}")
        if self.kind is SchemeKind.OPTIMAL_TWO_SIDED and not self.mask.two_sided:
            raise ValueError("optimal_two_sided needs a two-sided limiter mask")

    def replace(self, **kw) -> "PenaltyScheme":
        return replace(self, **kw)


@dataclass
class StepReport:
    dt_used: float
    max_abs_M: float
    entropy_fix_count: int = 0
    positivity_fallback_count: int = 0


@dataclass
class RunLog:
    n_steps: int = 0
    entropy_fix_count: int = 0
    positivity_fallback_count: int = 0
    max_abs_M: float = 0.0
    blow_up: object = None
    dts: list = field(default_factory=list)

    def record(self, report: StepReport):
        self.n_steps += 1
        self.entropy_fix_count += report.entropy_fix_count
        self.positivity_fallback_count += report.positivity_fallback_count
        self.max_abs_M = max(self.max_abs_M, report.max_abs_M)
        self.dts.append(report.dt_used)


def _blow_up(state, threshold=np.inf):
    from .analysis import BlowUpEvent

    M = np.abs(state.Gamma / state.N)
    bad = ~np.isfinite(M) | ~np.isfinite(state.N)
    k = int(np.flatnonzero(bad)[0]) if bad.any() else int(np.argmax(M))
    return BlowUpEvent(time=state.t, cell_index=k, max_abs_M=float(np.inf if bad.any() else M[k]))


def compute_dt(state: FieldState, grid: Grid1D, cfl=0.8) -> float:
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    with np.errstate(divide="ignore", invalid="ignore"):
        speed = np.abs(state.Gamma / state.N) + 1.0
    if not np.all(np.isfinite(speed)):
        raise BlowUpError(_blow_up(state), state)
    return cfl * grid.dx / float(np.max(speed))


def _padded_alpha(alpha, bc: BoundaryCondition, depth):
    if bc.left is BCKind.PERIODIC:
        return np.concatenate([alpha[-depth:], alpha, alpha[:depth]])
    return np.concatenate([np.full(depth, alpha[0]), alpha, np.full(depth, alpha[-1])])


def flux_divergence(N, Gamma, t, grid, scheme: PenaltyScheme, bc: BoundaryCondition):
    """Return ``(dF_N, dF_Gamma, n_entropy_fix, n_fallback)`` with
    ``dF = (F_{i+1/2} - F_{i-1/2}) / dx`` for every interior cell."""
    depth = bc.ghost_depth
    Ne, Ge = fill_ghosts(N, Gamma, bc, t, grid)
    states = muscl_reconstruct(Ne, Ge, grid.dx)
    # keep the n+1 interfaces bounding interior cells
    lo, hi = depth - 1, depth + grid.n_cells
    for name in ("N_l", "Gamma_l", "N_r", "Gamma_r"):
        setattr(states, name, getattr(states, name)[lo:hi])
    flux = interface_flux(states, paper_literal_rusanov=scheme.paper_literal_rusanov)
    fN, fG = flux.f_N, flux.f_Gamma
    if scheme.kind is SchemeKind.OPTIMAL_TWO_SIDED:
        a = _padded_alpha(scheme.mask.alpha, bc, depth)
        a_face = 0.5 * (a[:-1] + a[1:])[lo:hi]
        fN = a_face * fN
        fG = a_face * fG
    dFN = np.diff(fN) / grid.dx
    dFG = np.diff(fG) / grid.dx
    if scheme.kind is SchemeKind.ISOARDI:
        dFG = (1.0 - scheme.mask.chi) * dFG
    return dFN, dFG, int(flux.used_entropy_fix.sum()), int(flux.fallback.sum())


def _sources(case, t, grid, mask):
    if case is None:
        z = np.zeros(grid.n_cells)
        return z, z
    x = grid.centers
    keep = 1.0 - mask.chi
    return keep * case.S_N(t, x), keep * case.S_Gamma(t, x)


def _implicit_penalty(XN, XG, dt, scheme: PenaltyScheme):
    """Solve the diagonal penalty terms implicitly for one stage."""
    kind = scheme.kind
    if kind is SchemeKind.NONE:
        return XN, XG
    chi = scheme.mask.chi.astype(float)
    eps, M0 = scheme.eps, scheme.M0
    r = dt * chi / eps
    if kind is SchemeKind.ISOARDI:
        N = XN / (1.0 + r)
        return N, (XG + r * M0 * N) / (1.0 + r)
    if kind is SchemeKind.TWO_FIELDS:
        N = XN / (1.0 + r)
        # at tiny eps the limiter density underflows within a few cells;
        # a representable floor keeps M = Gamma / N defined there
        N = np.where(XN > 0, np.maximum(N, DENSITY_FLOOR), N)
        if scheme.two_fields_form is TwoFieldsForm.UPDATE_BLOCK:
            return N, (XG + r * M0) / (1.0 + r / N)
        if scheme.two_fields_form is TwoFieldsForm.UPDATE_BLOCK_N_SCALED:
            return N, (XG + r * M0 * N) / (1.0 + r / N)
        return N, (XG + r * N) / (1.0 + r / M0)
    if kind is SchemeKind.OPTIMAL:
        return XN, (XG + r * XN) / (1.0 + r / M0)
    if kind is SchemeKind.OPTIMAL_TWO_SIDED:
        s = scheme.mask.side_sign
        return XN, (XG + r * s * XN) / (1.0 + r / M0)
    raise ValueError(f"unknown scheme kind {kind!r}")


def _check(N, G, t, stage):
    if not (np.all(np.isfinite(N)) and np.all(np.isfinite(G))):
        raise BlowUpError(_blow_up(FieldState(t, N, G)), FieldState(t, N, G))
    if np.any(N <= 0):
        k = int(np.flatnonzero(N <= 0)[0])
        raise PositivityError(f"N <= 0 in cell {k} after {stage} at t={t:.6g}", index=k, t=t)


def step_heun(state: FieldState, grid: Grid1D, scheme: PenaltyScheme, case, bc, dt):
    """Advance one step of the Heun scheme with implicit penalty terms.

    Both stages apply the penalty implicitly with the full ``dt``; the
    variant of the second stage is chosen by ``scheme.stepping``.
    """
    t0 = state.t
    t1 = t0 + dt
    N0, G0 = state.N, state.Gamma
    SN0, SG0 = _sources(case, t0, grid, scheme.mask)
    SN1, SG1 = _sources(case, t1, grid, scheme.mask)

    dN0, dG0, fix0, fb0 = flux_divergence(N0, G0, t0, grid, scheme, bc)
    N1, G1 = _implicit_penalty(N0 - dt * dN0 + dt * SN0, G0 - dt * dG0 + dt * SG0, dt, scheme)
    _check(N1, G1, t1, "stage 1")

    dN1, dG1, fix1, fb1 = flux_divergence(N1, G1, t1, grid, scheme, bc)
    if scheme.stepping is Stepping.SSP:
        Ns, Gs = _implicit_penalty(N1 - dt * dN1 + dt * SN1, G1 - dt * dG1 + dt * SG1, dt, scheme)
        N2, G2 = 0.5 * (N0 + Ns), 0.5 * (G0 + Gs)
    else:
        if scheme.stepping is Stepping.PRINTED:
            BN, BG = 0.5 * (N0 + N1), 0.5 * (G0 + G1)
        else:
            BN, BG = N0, G0
        XN = BN - 0.5 * dt * (dN1 + dN0) + 0.5 * dt * (SN0 + SN1)
        XG = BG - 0.5 * dt * (dG1 + dG0) + 0.5 * dt * (SG0 + SG1)
        N2, G2 = _implicit_penalty(XN, XG, dt, scheme)
    _check(N2, G2, t1, "stage 2")

    new = FieldState(t1, N2, G2)
    report = StepReport(
        dt_used=dt,
        max_abs_M=float(np.max(np.abs(G2 / N2))),
        entropy_fix_count=fix0 + fix1,
        positivity_fallback_count=fb0 + fb1,
    )
    return new, report


class BlowUpHook:
    """Stops a run once max |M| exceeds ``threshold`` (default 10)."""

    def __init__(self, threshold=10.0):
        self.threshold = threshold

    def __call__(self, state, report):
        from .analysis import blow_up_detector

        event = blow_up_detector(state, self.threshold)
        if event is not None:
            raise BlowUpError(event, state)


def run_until(initial: FieldState, t_end, grid, scheme, case, bc, cfl=0.8, hooks=(), dt=None, max_steps=None):
    """March ``initial`` to ``t_end`` with adaptive (or fixed ``dt``) steps.

    Hooks are called as ``hook(state, report)`` after every step; a hook may
    raise to stop the run. Blow-ups propagate as ``BlowUpError`` carrying the
    stop state; ``log.blow_up`` is filled in before re-raising.
    """
    if t_end < initial.t:
        raise ValueError(f"t_end={t_end} precedes the initial time {initial.t}")
    state = initial.copy()
    log = RunLog()
    while state.t < t_end:
        step = dt if dt is not None else compute_dt(state, grid, cfl)
        last = state.t + step >= t_end - 1e-14 * max(1.0, abs(t_end))
        if last:
            step = t_end - state.t
        try:
            state, report = step_heun(state, grid, scheme, case, bc, step)
            if last:
                state.t = t_end
            log.record(report)
            for hook in hooks:
                hook(state, report)
        except BlowUpError as exc:
            log.blow_up = exc.event
            exc.log = log
            raise
        if max_steps is not None and log.n_steps >= max_steps:
            break
    return state, log
