"""Executable checks of the discrete comparison machinery.

* :func:`lemma1_check`: sub/supersolution pair -> band controls the maximum of ``u - v``.
* :func:`lemma2_check`: the dilation of a subharmonic sample is a discrete subsolution
  on the inner region of radius ``2 eps``.
* :func:`envelope_chain_check`: ``(u^eps)^eps <= u^2eps`` and ``(u^eps)_eps >= u``, exactly.
* :func:`jensen_gap`: interior-minus-band maximum of ``u - v``.
* :func:`convergence_study`: solve against exact solutions on a ladder of lattices.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .coneops import analytic_eval, analytic_function, ball_max, ball_min, residual
from .errors import HypothesisFailed
from .lattice import build_domain, classify_regions, make_stencil
from .results import CheckResult
from .solver import BoundaryData, NotConverged, SolveConfig, solve

logger = logging.getLogger(__name__)

__all__ = [
    "CheckResult",
    "ConvergenceRow",
    "convergence_study",
    "envelope_chain_check",
    "jensen_gap",
    "lemma1_check",
    "lemma2_check",
]


def _argmax_node(values, mask):
    masked = np.where(mask, values, -np.inf)
    at = np.unravel_index(np.argmax(masked), values.shape)
    return tuple(int(i) for i in at), float(masked[at])


def lemma1_check(u, v, st, regions, hyp_tol, concl_tol):
    """Discrete comparison for a subsolution ``u`` and supersolution ``v``.

    The hypothesis ``residual(u) <= hyp_tol`` and ``residual(v) >= -hyp_tol``
    on the inner region is checked first; if it fails,
    :class:`HypothesisFailed` is raised with that check attached.  The
    conclusion slack is ``max_all (u - v) - max_band (u - v)``.
    """
    inner = regions.inner
    ru = residual(u, st).values
    rv = residual(v, st).values
    at_u, worst_u = _argmax_node(ru, inner)
    at_v, worst_v = _argmax_node(-rv, inner)
    if worst_u >= worst_v:
        hyp = CheckResult.from_slack("lemma1_hypothesis", worst_u, hyp_tol,
                                     {"node": at_u, "field": "u"})
    else:
        hyp = CheckResult.from_slack("lemma1_hypothesis", worst_v, hyp_tol,
                                     {"node": at_v, "field": "v"})
    if not hyp.passed:
        raise HypothesisFailed(
            f"{hyp.witness['field']} violates its residual sign by {hyp.slack:.3e} "
            f"at node {hyp.witness['node']}", hyp)
    diff = u.values - v.values
    band_max = float(diff[regions.band].max())
    at, inner_max = _argmax_node(diff, inner)
    gap = max(inner_max, band_max) - band_max
    return CheckResult.from_slack(
        "lemma1", gap, concl_tol, {"node": at} if gap > 0 else None,
        hypothesis_slack=hyp.slack, hypothesis_tolerance=float(hyp_tol), band_max=band_max)


def lemma2_check(u, st, regions, delta, form="sub"):
    """Residual of the dilation (``form='sub'``) or erosion (``'super'``) on the 2-eps region.

    The subsolution form reports ``max residual(u^eps)``; the supersolution
    form runs the subsolution form on ``-u``, i.e. reports
    ``max -residual(u_eps)``.
    """
    if form == "super":
        res = lemma2_check(-u, st, regions, delta, "sub")
        return CheckResult("lemma2_super", res.passed, res.slack, res.tolerance,
                           res.witness, res.details)
    if form != "sub":
        raise ValueError(f"form must be 'sub' or 'super', got {form!r}")
    r = residual(ball_max(u, st), st).values
    at, worst = _argmax_node(r, regions.inner2)
    return CheckResult.from_slack("lemma2_sub", worst, delta, {"node": at})


def envelope_chain_check(u, st_eps, st_2eps, regions):
    """Zero-tolerance check of the two envelope inequalities on the 2-eps region."""
    up = ball_max(u, st_eps)
    upper = ball_max(up, st_eps).values - ball_max(u, st_2eps).values
    lower = u.values - ball_min(up, st_eps).values
    mask = regions.inner2
    at_a, worst_a = _argmax_node(upper, mask)
    at_b, worst_b = _argmax_node(lower, mask)
    if worst_a >= worst_b:
        witness, worst = {"node": at_a, "inequality": "dilate_twice_le_double_radius"}, worst_a
    else:
        witness, worst = {"node": at_b, "inequality": "erode_dilation_ge_field"}, worst_b
    return CheckResult.from_slack("envelope_chain", worst, 0.0, witness,
                                  dilate_twice=worst_a, erode_dilation=worst_b)


def jensen_gap(u, v, regions):
    """``max_inner (u - v) - max_band (u - v)`` and the inner argmax."""
    diff = u.values - v.values
    at, inner_max = _argmax_node(diff, regions.inner)
    return inner_max - float(diff[regions.band].max()), at


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    eps: float
    nodes: int
    iterations: int
    sup_error: float
    residual_sup: float
    converged: bool


def coupled_eps(h, coupling):
    """``c * h**alpha`` rounded to the nearest positive multiple of ``h``."""
    c, alpha = coupling
    return max(1, round(c * h ** alpha / h)) * h


def convergence_study(exact, levels, coupling=(2.0, 2 / 3), cfg=SolveConfig(),
                      bounds=(-1.0, 1.0, -1.0, 1.0), norm="euclidean", params=None):
    """Solve with the exact solution as band data on each lattice and record the error.

    ``exact`` is an analytic name (``linear``, ``cone``, ``aronsson``) with
    ``params`` passed through.  Rows come back in order of decreasing h.
    Non-converged levels are kept and flagged.
    """
    params = params or {}
    f = analytic_function(exact, **params)
    rows = []
    for h in sorted(levels, reverse=True):
        dom = build_domain(bounds, h)
        eps = coupled_eps(h, coupling)
        st = make_stencil(h, eps, norm, dom.d)
        regions = classify_regions(dom, st, make_stencil(h, 2 * eps, norm, dom.d))
        if not regions.inner2.any():
            raise ValueError(f"h={h}, eps={eps}: no node has its 2 eps ball inside the domain")
        g = BoundaryData.from_function(dom, regions, f)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConverged)
            u, rep = solve(dom, st, regions, g, cfg)
        ref = analytic_eval(exact, dom, **params).values
        err = float(np.max(np.abs(u.values - ref)[regions.inner]))
        rows.append(ConvergenceRow(float(h), float(eps), dom.size, rep.iterations, err,
                                   rep.residual_sup, rep.converged))
        logger.info("level h=%g eps=%g error=%.3e", h, eps, err)
    return rows
