"""Ball envelopes, slope operators, cone functions and cone-based checks.

For a field ``u`` and a stencil of radius ``eps``::

    u^eps(x) = max over the ball of u      (ball_max)
    u_eps(x) = min over the ball of u      (ball_min)
    S+ u(x)  = (u^eps(x) - u(x)) / eps
    S- u(x)  = (u(x) - u_eps(x)) / eps
    residual = S- u - S+ u = (2 u - u^eps - u_eps) / eps

Envelopes are returned on the whole lattice.  At band nodes the ball is
clipped to the node set, so those values are only meaningful as such; on
the inner region they are the full-ball extrema.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BadFamily, BadRadii, DimensionMismatch, OutsideInnerRegion
from .lattice import NORMS, contained_mask, lattice_multiple, make_stencil, norm_of
from .results import CheckResult


@dataclass(frozen=True, eq=False)
class ScalarField:
    domain: object
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.domain.shape:
            raise DimensionMismatch(
                f"field shape {values.shape} does not match domain shape {self.domain.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def _other(self, other):
        if isinstance(other, ScalarField):
            if other.domain.shape != self.domain.shape:
                raise DimensionMismatch("fields live on different lattices")
            return other.values
        return other

    def __neg__(self):
        return ScalarField(self.domain, -self.values)

    def __add__(self, other):
        return ScalarField(self.domain, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.domain, self.values - self._other(other))

    def __rsub__(self, other):
        return ScalarField(self.domain, self._other(other) - self.values)

    def __mul__(self, c):
        return ScalarField(self.domain, self.values * c)

    __rmul__ = __mul__

    def __getitem__(self, index):
        return float(self.values[index])

    def lipschitz(self):
        """Largest difference quotient between axis neighbours."""
        slopes = [np.max(np.abs(np.diff(self.values, axis=k)), initial=0.0)
                  for k in range(self.values.ndim)]
        return float(max(slopes)) / self.domain.h


def _shifted(padded, pad, offset, shape):
    return padded[tuple(slice(p + o, p + o + n) for p, o, n in zip(pad, offset, shape))]


def _envelope(values, offsets, take_max):
    fill = -np.inf if take_max else np.inf
    pad = tuple(int(r) for r in np.max(np.abs(offsets), axis=0))
    padded = np.pad(values, [(p, p) for p in pad], constant_values=fill)
    best = np.full(values.shape, fill)
    arg = np.zeros(values.shape, dtype=np.int64)
    for k, o in enumerate(offsets):
        cand = _shifted(padded, pad, o, values.shape)
        better = cand > best if take_max else cand < best
        best = np.where(better, cand, best)
        arg[better] = k
    return best, arg


def ball_max(u, st, *, return_argmax=False):
    """Dilation ``u^eps``. Ties resolve to the first offset in lexicographic order.

    With ``return_argmax`` the winning offsets come back as an integer array
    of shape ``domain.shape + (d,)``.
    """
    best, arg = _envelope(u.values, st.offsets, True)
    out = ScalarField(u.domain, best)
    if return_argmax:
        return out, st.offsets[arg]
    return out


def ball_min(u, st, *, return_argmin=False):
    best, arg = _envelope(u.values, st.offsets, False)
    out = ScalarField(u.domain, best)
    if return_argmin:
        return out, st.offsets[arg]
    return out


def _ball_values(u, st, x):
    x = tuple(int(i) for i in x)
    pts = np.asarray(x) + st.offsets
    if not all(np.all((pts[:, k] >= 0) & (pts[:, k] < n)) for k, n in enumerate(u.domain.shape)):
        raise OutsideInnerRegion(f"ball of radius {st.eps} at node {x} leaves the domain")
    return u.values[tuple(pts.T)], float(u.values[x])


def s_plus(u, st, x):
    vals, ux = _ball_values(u, st, x)
    return (float(vals.max()) - ux) / st.eps


def s_minus(u, st, x):
    vals, ux = _ball_values(u, st, x)
    return (ux - float(vals.min())) / st.eps


def residual(u, st):
    """``S- u - S+ u`` at every node; restrict with the region masks."""
    up = ball_max(u, st).values
    lo = ball_min(u, st).values
    return ScalarField(u.domain, (2 * u.values - up - lo) / st.eps)


@dataclass(frozen=True)
class ConeParams:
    a: float
    b: float
    x0: tuple
    norm: str = "euclidean"

    def __post_init__(self):
        x0 = tuple(float(c) for c in np.atleast_1d(self.x0))
        object.__setattr__(self, "x0", x0)
        if not all(np.isfinite([self.a, self.b, *x0])):
            raise ValueError("cone parameters must be finite")
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}")


def cone_eval(c, dom):
    if len(c.x0) != dom.d:
        raise DimensionMismatch(f"vertex has {len(c.x0)} coordinates, domain is {dom.d}-D")
    dist = norm_of(dom.points() - np.asarray(c.x0), c.norm)
    return ScalarField(dom, c.a + c.b * dist)


# Exact infinity harmonic samples.  Each maker returns f(points) with points
# of shape (..., d).


def _linear(p, c=0.0):
    p = np.atleast_1d(np.asarray(p, dtype=float))

    def f(points):
        if points.shape[-1] != p.size:
            raise DimensionMismatch(f"gradient has {p.size} entries, points are {points.shape[-1]}-D")
        return points @ p + c

    return f


def _cone(a=0.0, b=1.0, x0=(0.0,), norm="euclidean"):
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))

    def f(points):
        if points.shape[-1] != x0.size:
            raise DimensionMismatch(f"vertex has {x0.size} coordinates, points are {points.shape[-1]}-D")
        return a + b * norm_of(points - x0, norm)

    return f


def _aronsson():
    def f(points):
        if points.shape[-1] != 2:
            raise DimensionMismatch("the Aronsson function is defined in two dimensions only")
        return np.abs(points[..., 0]) ** (4 / 3) - np.abs(points[..., 1]) ** (4 / 3)

    return f


ANALYTIC = {"linear": _linear, "cone": _cone, "aronsson": _aronsson}


def analytic_function(name, **params):
    try:
        maker = ANALYTIC[name]
    except KeyError:
        raise ValueError(f"unknown analytic solution {name!r}; expected one of {sorted(ANALYTIC)}")
    return maker(**params)


def analytic_eval(name, dom, **params):
    """Sample ``linear(p, c)``, ``cone(a, b, x0, norm)`` or ``aronsson`` on the lattice."""
    f = analytic_function(name, **params)
    return ScalarField(dom, f(dom.points()))


def parse_analytic(text, d):
    """Parse ``name[:v1,v2,...]`` into ``(name, params)``.

    ``linear:p1[,p2],c``, ``cone:a,b,x0[,y0]`` and ``aronsson``.
    """
    name, _, rest = text.partition(":")
    vals = [float(t) for t in rest.split(",")] if rest else []
    if name == "linear":
        if len(vals) != d + 1:
            raise ValueError(f"linear needs {d + 1} numbers (gradient then constant), got {len(vals)}")
        return name, {"p": tuple(vals[:d]), "c": vals[d]}
    if name == "cone":
        if len(vals) != d + 2:
            raise ValueError(f"cone needs {d + 2} numbers (a, b, vertex), got {len(vals)}")
        return name, {"a": vals[0], "b": vals[1], "x0": tuple(vals[2:])}
    if name == "aronsson":
        if vals:
            raise ValueError("aronsson takes no parameters")
        if d != 2:
            raise DimensionMismatch("the Aronsson function is defined in two dimensions only")
        return name, {}
    raise ValueError(f"unknown analytic solution {name!r}; expected one of {sorted(ANALYTIC)}")


@dataclass(frozen=True)
class ConeCheckConfig:
    """Finite battery standing in for "all subdomains and all cones".

    Boxes are closed index boxes ``(lo, hi)`` (inclusive corners); their
    boundary nodes are the fitting shell and the strictly interior nodes are
    tested.  By default every box with side ``sides`` (in nodes) that fits in
    the lattice is used, vertices are all lattice points (the lattice is
    extended past the domain) outside the open box within ``reach`` nodes in
    max-norm, and the slopes are ``n_slopes`` values evenly spanning
    ``[-L, L]`` with ``L`` the field's lattice Lipschitz estimate.
    """

    direction: str = "above"
    norm: str = "euclidean"
    sides: tuple = (4, 8)
    reach: int = 8
    n_slopes: int = 33
    boxes: tuple | None = None
    vertices: tuple | None = None
    slopes: tuple | None = None
    tol: float | None = None

    def __post_init__(self):
        if self.direction not in ("above", "below"):
            raise ValueError(f"direction must be 'above' or 'below', got {self.direction!r}")
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}")


def _default_boxes(shape, sides):
    for side in sides:
        if any(side > n - 1 for n in shape):
            continue
        for lo in np.ndindex(*(n - side for n in shape)):
            yield tuple(lo), tuple(i + side for i in lo)


def _box_nodes(lo, hi):
    idx = np.array(list(np.ndindex(*(h - l + 1 for l, h in zip(lo, hi))))) + np.asarray(lo)
    on_shell = np.any((idx == np.asarray(lo)) | (idx == np.asarray(hi)), axis=1)
    return idx[on_shell], idx[~on_shell]


def _index_to_coords(dom, idx):
    lo = np.array([b[0] for b in dom.bounds])
    return lo + idx * dom.h


def _strictly_inside(points, lo_c, hi_c):
    return np.all((points > lo_c) & (points < hi_c), axis=-1)


def cone_comparison_check(u, cfg=ConeCheckConfig()):
    """Search for a cone that dominates ``u`` on a box boundary but not inside it.

    A reported violation is a genuine failure of comparison with cones (up
    to ``tol``); passing only certifies the configured battery.  The default
    tolerance is ``2 h L``.
    """
    dom = u.domain
    values = u.values if cfg.direction == "above" else -u.values
    lip = u.lipschitz()
    tol = 2 * dom.h * lip if cfg.tol is None else float(cfg.tol)
    slopes = (np.linspace(-lip, lip, cfg.n_slopes) if cfg.slopes is None
              else np.asarray(cfg.slopes, dtype=float))
    boxes = _default_boxes(dom.shape, cfg.sides) if cfg.boxes is None else cfg.boxes
    explicit_vertices = None if cfg.vertices is None else np.atleast_2d(
        np.asarray(cfg.vertices, dtype=float))

    worst, witness, n_boxes = -np.inf, None, 0
    # Distances only depend on positions relative to the box corner.
    geometry = {}
    for lo, hi in boxes:
        lo, hi = tuple(lo), tuple(hi)
        if any(l < 0 or h >= n or h - l < 2 for l, h, n in zip(lo, hi, dom.shape)):
            raise BadFamily(f"box {lo}-{hi} must lie in the lattice with a nonempty interior")
        lo_a = np.asarray(lo)
        rel = tuple(h - l for l, h in zip(lo, hi))
        if explicit_vertices is not None:
            lo_c = _index_to_coords(dom, lo_a)
            bad = _strictly_inside(explicit_vertices, lo_c, _index_to_coords(dom, np.asarray(hi)))
            if bad.any():
                raise BadFamily(f"vertex {tuple(explicit_vertices[bad][0])} lies inside box {lo}-{hi}")
            geometry.pop(rel, None)
        if rel not in geometry:
            shell, interior = _box_nodes((0,) * dom.d, rel)
            if explicit_vertices is None:
                r = cfg.reach
                cand = np.array(list(np.ndindex(*(k + 1 + 2 * r for k in rel)))) - r
                inside = np.all((cand > 0) & (cand < np.asarray(rel)), axis=1)
                verts = cand[~inside] * dom.h
            else:
                verts = explicit_vertices - _index_to_coords(dom, lo_a)
            d_shell = norm_of(verts[:, None, :] - shell[None] * dom.h, cfg.norm)
            d_int = norm_of(verts[:, None, :] - interior[None] * dom.h, cfg.norm)
            geometry[rel] = (shell, interior, verts, d_shell, d_int)
        shell, interior, verts, d_shell, d_int = geometry[rel]
        got, v, k, i = _kernels.cone_battery(
            values[tuple((shell + lo_a).T)], d_shell, values[tuple((interior + lo_a).T)],
            d_int, slopes)
        n_boxes += 1
        if got > worst:
            worst = got
            origin = _index_to_coords(dom, lo_a)
            witness = {
                "box_lo": lo,
                "box_hi": hi,
                "vertex": tuple(float(c) for c in verts[v] + origin),
                "slope": float(slopes[k]),
                "node": tuple(int(c) for c in interior[i] + lo_a),
            }
    if n_boxes == 0:
        raise BadFamily("the battery contains no box that fits in the lattice")
    return CheckResult.from_slack(
        f"cones_{cfg.direction}", worst, tol, witness,
        boxes=n_boxes, slopes=len(slopes), direction=cfg.direction)


def punctured_ball_check(u, radii, norm="euclidean", tol=None, centers=None):
    """Necessary condition for comparison with cones from above.

    At each node ``x0`` whose ``r``-ball is inside the lattice, with ``M`` the
    maximum of ``u`` on the outermost lattice shell of the ball, checks
    ``u(w) <= u(x0) + (M - u(x0)) |w - x0| / r`` for every ball node ``w``.
    Weaker than :func:`cone_comparison_check`.  ``centers`` restricts the
    ball centres to the given node indices.
    """
    dom = u.domain
    h = dom.h
    tol = 2 * h * u.lipschitz() if tol is None else float(tol)
    worst, witness = -np.inf, None
    for r in radii:
        if lattice_multiple(r, h) is None:
            raise BadRadii(f"radius {r} is not a multiple of h={h}")
        st = make_stencil(h, r, norm, dom.d)
        dist = norm_of(st.offsets * h, norm)
        sphere = st.offsets[dist > r - h * (1 - 1e-12)]
        mask = contained_mask(dom, st)
        if centers is not None:
            chosen = np.zeros(dom.shape, dtype=bool)
            for c in centers:
                chosen[tuple(c)] = True
            mask &= chosen
        if not mask.any():
            continue
        pad = st.reach
        padded = np.pad(u.values, [(p, p) for p in pad], constant_values=np.nan)
        top = np.full(dom.shape, -np.inf)
        for o in sphere:
            top = np.maximum(top, _shifted(padded, pad, o, dom.shape))
        rise = top - u.values
        for o, dw in zip(st.offsets, dist):
            if dw == 0:
                continue
            excess = _shifted(padded, pad, o, dom.shape) - u.values - rise * dw / r
            excess = np.where(mask, excess, -np.inf)
            at = np.unravel_index(np.argmax(excess), dom.shape)
            if excess[at] > worst:
                worst = float(excess[at])
                witness = {"radius": float(r), "node": tuple(int(i) for i in at),
                           "offset": tuple(int(c) for c in o)}
    if witness is None:
        raise BadRadii("no node admits any of the requested radii")
    return CheckResult.from_slack("punctured_ball", worst, tol, witness)


def epsilon_convexity_check(u, x, eps_list, norm="euclidean", tol=None):
    """Midpoint convexity of ``eps -> u^eps(x)`` over equally spaced radii."""
    dom = u.domain
    h = dom.h
    radii = np.asarray(eps_list, dtype=float)
    if radii.size < 3:
        raise BadRadii("need at least three radii")
    steps = np.diff(radii)
    if np.any(steps <= 0) or np.any(np.abs(steps - steps[0]) > 1e-12 * radii[-1]):
        raise BadRadii(f"radii must be increasing and equally spaced, got {list(radii)}")
    if any(lattice_multiple(r, h) is None for r in radii):
        raise BadRadii(f"radii must be multiples of h={h}")
    tol = 2 * h * u.lipschitz() if tol is None else float(tol)
    env = [_ball_values(u, make_stencil(h, r, norm, dom.d), x)[0].max() for r in radii]
    gaps = [env[k + 1] - 0.5 * (env[k] + env[k + 2]) for k in range(len(env) - 2)]
    k = int(np.argmax(gaps))
    witness = {"node": tuple(int(i) for i in x), "radii": tuple(float(r) for r in radii[k:k + 3])}
    return CheckResult.from_slack("epsilon_convexity", gaps[k], tol, witness,
                                  envelope=tuple(float(e) for e in env))
