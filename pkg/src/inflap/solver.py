"""Midpoint iteration for the discrete equation ``S+ u = S- u``.

The equation is solved in its fixed-point form ``u = (u^eps + u_eps) / 2``
on the inner region, with ``u`` pinned to the boundary data on the band.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coneops import ScalarField, ball_max, ball_min, residual

logger = logging.getLogger(__name__)

SCHEMES = ("jacobi", "gauss_seidel")
INITS = ("band_min_constant", "band_max_constant")
STOPS = ("estimate", "update")

# Updates this far below the field scale are rounding noise, not progress.
_NOISE = 64 * np.finfo(float).eps


class NotConverged(UserWarning):
    """Emitted when ``max_iter`` sweeps did not bring the update below ``tol``."""


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Dirichlet values on the band. Entries off the band are ignored."""

    domain: object
    values: np.ndarray
    band: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        band = np.array(self.band, dtype=bool)
        if values.shape != self.domain.shape or band.shape != self.domain.shape:
            raise ValueError("boundary data and band mask must match the domain shape")
        if not np.all(np.isfinite(values[band])):
            raise ValueError("boundary data must be finite on every band node")
        values = np.where(band, values, 0.0)
        values.setflags(write=False)
        band.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "band", band)

    @classmethod
    def from_function(cls, domain, regions, g):
        """Materialize ``g(points)`` (points of shape ``(..., d)``) on the band."""
        band = regions.band
        vals = np.zeros(domain.shape)
        vals[band] = np.asarray(g(domain.points()[band]), dtype=float)
        return cls(domain, vals, band)

    @classmethod
    def from_field(cls, field, regions):
        return cls(field.domain, field.values, regions.band)

    @property
    def band_values(self):
        return self.values[self.band]


@dataclass(frozen=True)
class SolveConfig:
    scheme: str = "gauss_seidel"
    tol: float = 1e-10
    max_iter: int = 100_000
    init: object = "band_min_constant"
    stop: str = "estimate"

    def __post_init__(self):
        if self.stop not in STOPS:
            raise ValueError(f"stop must be one of {STOPS}, got {self.stop!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if isinstance(self.init, str) and self.init not in INITS:
            raise ValueError(f"init must be one of {INITS} or a field, got {self.init!r}")


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    update_sup: float
    residual_sup: float
    converged: bool
    wall_time: float


def lower_upper_bracket(dom, st, regions, g):
    """Constant fields at the extreme boundary values.

    The discrete solution lies between them, and midpoint iterates started
    from either one never leave ``[min g, max g]``.
    """
    vals = g.band_values
    return (ScalarField(dom, np.full(dom.shape, vals.min())),
            ScalarField(dom, np.full(dom.shape, vals.max())))


def _as_2d(values):
    return values.reshape(values.shape[0], -1)


def _offsets_2d(st):
    off = np.zeros((len(st.offsets), 2), dtype=np.int64)
    off[:, :st.d] = st.offsets
    return off


def midpoint_sweep(u, st, regions, g, scheme="gauss_seidel"):
    """One sweep of ``u(x) <- (u^eps(x) + u_eps(x)) / 2`` over the inner region.

    Gauss-Seidel visits nodes in row-major order and reads values already
    updated in the same sweep; Jacobi reads the previous field only.
    Returns the new field and the sup-norm of the change.
    """
    inner = regions.inner
    if scheme == "jacobi":
        mid = 0.5 * (ball_max(u, st).values + ball_min(u, st).values)
        new = np.where(inner, mid, g.values)
        change = float(np.max(np.abs(new - u.values)[inner]))
    elif scheme == "gauss_seidel":
        new = np.where(inner, u.values, g.values)
        change = float(_kernels.gauss_seidel_sweep(_as_2d(new), _as_2d(inner), _offsets_2d(st)))
    else:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    return ScalarField(u.domain, new), change


def _initial(dom, st, regions, g, init):
    if isinstance(init, str):
        low, high = lower_upper_bracket(dom, st, regions, g)
        start = (low if init == "band_min_constant" else high).values
    else:
        start = init.values if isinstance(init, ScalarField) else np.asarray(init, dtype=float)
    return np.where(regions.band, g.values, start)


def residual_sup(u, st, regions):
    return float(np.max(np.abs(residual(u, st).values[regions.inner])))


class _Stopper:
    """Decides when to stop from the sequence of update sup-norms.

    ``update`` stops as soon as the update is at most ``tol``.  ``estimate``
    also requires the geometric tail bound ``update * q / (1 - q)`` to be at
    most ``tol``, where ``q`` is the ratio of the last two updates; this
    bounds the distance to the fixed point rather than the last step.
    """

    def __init__(self, cfg, scale):
        self.tol = cfg.tol
        self.rule = cfg.stop
        self.floor = _NOISE * max(scale, 1.0)
        self.prev = None

    def __call__(self, update):
        prev, self.prev = self.prev, update
        if update > self.tol:
            return False
        if self.rule == "update" or update <= self.floor:
            return True
        if prev is None or prev <= 0:
            return False
        q = update / prev
        return q < 1 and update * q / (1 - q) <= self.tol


def solve(dom, st, regions, g, cfg=SolveConfig(), callback=None):
    """Iterate midpoint sweeps until the stopping rule of ``cfg.stop`` holds.

    Either rule guarantees a final update sup-norm of at most ``cfg.tol``.

    ``callback(k, field, update)`` is called after sweep ``k`` (1-based).
    When ``max_iter`` is exhausted the partial field is returned with
    ``converged=False`` and a :class:`NotConverged` warning is issued.
    """
    t0 = time.perf_counter()
    inner = regions.inner
    u = _initial(dom, st, regions, g, cfg.init)
    update = np.inf
    k = 0
    stopped = False
    done = _Stopper(cfg, float(np.max(np.abs(g.band_values))))
    if cfg.scheme == "gauss_seidel":
        u2, in2, off2 = _as_2d(u), _as_2d(inner), _offsets_2d(st)
        while k < cfg.max_iter:
            update = float(_kernels.gauss_seidel_sweep(u2, in2, off2))
            k += 1
            if callback is not None:
                callback(k, ScalarField(dom, u), update)
            if done(update):
                stopped = True
                break
        field = ScalarField(dom, u)
    else:
        field = ScalarField(dom, u)
        while k < cfg.max_iter:
            field, update = midpoint_sweep(field, st, regions, g, "jacobi")
            k += 1
            if callback is not None:
                callback(k, field, update)
            if done(update):
                stopped = True
                break
    converged = stopped
    report = SolveReport(k, update, residual_sup(field, st, regions), converged,
                         time.perf_counter() - t0)
    if not converged:
        warnings.warn(f"midpoint iteration stopped after {k} sweeps with update {update:.3e}",
                      NotConverged, stacklevel=2)
    logger.debug("solve: %s", report)
    return field, report
