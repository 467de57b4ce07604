"""Error norms, boundary-layer thickness, blow-up detection and rate fits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

VARIABLES = ("N", "Gamma", "dN", "dGamma")
NORMS = ("L1", "L2")


@dataclass
class ErrorReport:
    errors: dict = field(default_factory=dict)  # (variable, region, norm) -> value
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.errors[key]

    def get(self, variable, region, norm):
        return self.errors[(variable, region, norm)]

    def rows(self):
        for (var, region, norm), value in sorted(self.errors.items()):
            yield var, region, norm, value


class RateFit(NamedTuple):
    slope: float
    intercept: float
    eps: tuple
    residual: float


@dataclass(frozen=True)
class BlowUpEvent:
    time: float
    cell_index: int
    max_abs_M: float


class BoundaryLayer(NamedTuple):
    thickness: float
    saturated: bool
    index: int | None


def _runs(sel):
    """Contiguous index runs where ``sel`` is true."""
    idx = np.flatnonzero(sel)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1) + 1
    return np.split(idx, breaks)


def region_derivative(u, sel, dx):
    """Derivative of ``u`` on the cells of ``sel`` without crossing its edges.

    Centered inside each contiguous run, one-sided at the run ends.
    """
    d = np.zeros_like(u, dtype=float)
    for run in _runs(sel):
        if run.size >= 2:
            d[run] = np.gradient(u[run], dx)
    return d


def _region_cells(grid, mask, region, exclude):
    sel = mask.chi == (1 if region == "limiter" else 0)
    if region not in ("plasma", "limiter"):
        raise ValueError(f"unknown region {region!r}")
    x = grid.centers
    for a, b in exclude:
        sel &= ~((x > a) & (x < b))
    return sel


def error_norms(state, reference, grid, mask, regions=None, exclude=(), meta=None) -> ErrorReport:
    """Discrete L1/L2 errors of N, Gamma and their x-derivatives per region.

    ``reference`` is a provider with ``fields(grid, t)`` or an ``(N, Gamma)``
    pair. ``exclude`` lists open intervals removed from every region.
    """
    if hasattr(reference, "fields"):
        N_ref, G_ref = reference.fields(grid, state.t)
    else:
        N_ref, G_ref = reference
    if regions is None:
        regions = ("plasma", "limiter") if mask.chi.any() else ("plasma",)
    dx = grid.dx
    report = ErrorReport(meta=dict(meta or {}, dx=dx, t=state.t))
    eN = state.N - N_ref
    eG = state.Gamma - G_ref
    for region in regions:
        sel = _region_cells(grid, mask, region, exclude)
        if not sel.any():
            raise ValueError(f"region {region!r} contains no cell")
        fields = {
            "N": eN,
            "Gamma": eG,
            "dN": region_derivative(eN, sel, dx),
            "dGamma": region_derivative(eG, sel, dx),
        }
        for var, e in fields.items():
            e = e[sel]
            report.errors[(var, region, "L1")] = float(np.sum(np.abs(e)) * dx)
            report.errors[(var, region, "L2")] = float(np.sqrt(np.sum(e * e) * dx))
    return report


def boundary_layer_thickness(state, grid, mask, target=0.0) -> BoundaryLayer:
    """Distance from the first plasma/limiter interface to the first limiter
    cell where ``|N - target|`` drops below 1% of its value in the last plasma cell.

    When the criterion is never met the limiter width is returned with
    ``saturated=True``.
    """
    chi = mask.chi
    starts = np.flatnonzero((chi[1:] == 1) & (chi[:-1] == 0)) + 1
    if starts.size == 0:
        raise ValueError("no plasma-to-limiter interface (scanning left to right)")
    j0 = int(starts[0])
    x_if = grid.faces[j0]
    ref = abs(state.N[j0 - 1] - target)
    j = j0
    while j < grid.n_cells and chi[j] == 1:
        if abs(state.N[j] - target) < 0.01 * ref:
            return BoundaryLayer(float(grid.centers[j] - x_if), False, j)
        j += 1
    return BoundaryLayer(float(grid.faces[j] - x_if), True, None)


def blow_up_detector(state, threshold=10.0):
    if threshold <= 1:
        raise ValueError("blow-up threshold must exceed 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        M = np.abs(state.Gamma / state.N)
    bad = ~np.isfinite(M)
    if bad.any():
        return BlowUpEvent(state.t, int(np.flatnonzero(bad)[0]), float("inf"))
    k = int(np.argmax(M))
    if M[k] > threshold:
        return BlowUpEvent(state.t, k, float(M[k]))
    return None


def fit_rate(eps, errors) -> RateFit:
    """Least-squares slope of log(error) against log(eps)."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = (errors > 0) & (eps > 0) & np.isfinite(errors)
    if not keep.all():
        warnings.warn(f"fit_rate: dropping {int((~keep).sum())} non-positive point(s)")
    eps, errors = eps[keep], errors[keep]
    if eps.size < 3:
        raise ValueError("fit_rate needs at least 3 positive points")
    lx, ly = np.log(eps), np.log(errors)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return RateFit(float(slope), float(intercept), tuple(eps.tolist()), float(np.sqrt(np.mean(resid**2))))


def observed_orders(h, errors):
    """Pairwise orders log(e_k/e_{k+1}) / log(h_k/h_{k+1})."""
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    return np.log(errors[:-1] / errors[1:]) / np.log(h[:-1] / h[1:])
