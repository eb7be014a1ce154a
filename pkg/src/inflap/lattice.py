"""Box lattices, closed-ball stencils and the band / inner-region split.

A :class:`LatticeDomain` is an axis-aligned box sampled with spacing ``h``.
A :class:`Stencil` lists the integer offsets ``o`` with ``|o h| <= eps`` in a
chosen norm, i.e. the lattice version of the closed ball.  A node belongs to
the inner region of radius ``eps`` when every stencil offset applied to it
stays inside the node set; the remaining nodes form the band that carries
the Dirichlet data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSpacing, EmptyInterior, EmptyStencil, LatticeError, NonCommensurate

NORMS = ("euclidean", "l1", "linf")

BAND = 0
INNER_EPS = 1
INNER_2EPS = 2

_COMMENSURATE_RTOL = 1e-12
_TIE_RTOL = 1e-12


def norm_of(vectors, norm="euclidean"):
    """Norm of the rows of ``vectors`` (last axis holds the components)."""
    v = np.asarray(vectors, dtype=float)
    if norm == "euclidean":
        return np.sqrt(np.sum(v * v, axis=-1))
    if norm == "l1":
        return np.sum(np.abs(v), axis=-1)
    if norm == "linf":
        return np.max(np.abs(v), axis=-1)
    raise ValueError(f"unknown norm {norm!r}; expected one of {', '.join(NORMS)}")


def lattice_multiple(value, h):
    """Return ``n`` if ``value == n*h`` up to relative tolerance 1e-12, else None."""
    n = round(value / h)
    if n < 1 or abs(value - n * h) > _COMMENSURATE_RTOL * abs(value):
        return None
    return int(n)


@dataclass(frozen=True, eq=False)
class LatticeDomain:
    bounds: tuple
    h: float
    shape: tuple = field(init=False)

    def __post_init__(self):
        if not self.h > 0:
            raise BadSpacing(f"spacing must be positive, got h={self.h}")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        shape = []
        for axis, (lo, hi) in enumerate(bounds):
            n = lattice_multiple(hi - lo, self.h)
            if n is None:
                raise NonCommensurate(
                    f"axis {axis} length {hi - lo} is not a positive integer multiple of h={self.h}"
                )
            shape.append(n + 1)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "shape", tuple(shape))

    @property
    def d(self):
        return len(self.shape)

    @property
    def size(self):
        return int(np.prod(self.shape))

    def axis_coords(self, axis):
        lo, hi = self.bounds[axis]
        return np.linspace(lo, hi, self.shape[axis])

    def grid(self):
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return np.meshgrid(*(self.axis_coords(k) for k in range(self.d)), indexing="ij")

    def points(self):
        """Coordinates as an array of shape ``shape + (d,)``."""
        return np.stack(self.grid(), axis=-1)

    def coords(self, index):
        return tuple(float(self.axis_coords(k)[i]) for k, i in enumerate(index))

    def indices(self):
        """Node indices in row-major order."""
        return np.ndindex(*self.shape)

    def contains_index(self, index):
        return all(0 <= i < n for i, n in zip(index, self.shape))

    def __repr__(self):
        return f"LatticeDomain(bounds={self.bounds}, h={self.h}, shape={self.shape})"


def build_domain(bounds, h, d=None):
    """Build a box lattice.

    ``bounds`` is either a sequence of ``(lo, hi)`` pairs or a flat
    sequence ``lo0, hi0[, lo1, hi1]``.
    """
    flat = np.asarray(bounds, dtype=float).ravel()
    if flat.size % 2:
        raise LatticeError(f"bounds need an even number of entries, got {flat.size}")
    pairs = tuple(zip(flat[0::2], flat[1::2]))
    if d is not None and len(pairs) != d:
        raise LatticeError(f"{len(pairs)} axis intervals given for dimension {d}")
    if len(pairs) not in (1, 2):
        raise LatticeError(f"only dimensions 1 and 2 are supported, got {len(pairs)}")
    return LatticeDomain(pairs, float(h))


@dataclass(frozen=True, eq=False)
class Stencil:
    h: float
    eps: float
    norm: str
    offsets: np.ndarray

    @property
    def d(self):
        return self.offsets.shape[1]

    @property
    def reach(self):
        """Largest absolute offset along each axis."""
        return tuple(int(r) for r in np.max(np.abs(self.offsets), axis=0))

    def __len__(self):
        return len(self.offsets)

    def as_set(self):
        return {tuple(int(c) for c in o) for o in self.offsets}


def make_stencil(h, eps, norm="euclidean", d=2):
    """Offsets of the closed lattice ball of radius ``eps``, in lexicographic order.

    Offsets on the sphere are kept; the comparison ``|o h| <= eps`` carries an
    absolute slack of ``1e-12 * eps``.
    """
    if not h > 0:
        raise BadSpacing(f"spacing must be positive, got h={h}")
    if not eps > 0:
        raise EmptyStencil(f"radius must be positive, got eps={eps}")
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}; expected one of {', '.join(NORMS)}")
    m = int(np.floor(eps / h * (1 + _TIE_RTOL)))
    if m < 1:
        raise EmptyStencil(f"no nonzero lattice offset within eps={eps} at h={h}")
    cand = np.array(list(itertools.product(range(-m, m + 1), repeat=d)), dtype=np.int64)
    keep = norm_of(cand * h, norm) <= eps + _TIE_RTOL * eps
    offsets = cand[keep]
    offsets.setflags(write=False)
    return Stencil(float(h), float(eps), norm, offsets)


@dataclass(frozen=True, eq=False)
class RegionLabels:
    labels: np.ndarray
    eps: float

    @property
    def band(self):
        return self.labels == BAND

    @property
    def inner(self):
        """Mask of the inner region of radius eps (both inner labels)."""
        return self.labels >= INNER_EPS

    @property
    def inner2(self):
        return self.labels == INNER_2EPS

    def counts(self):
        return {
            "band": int(np.count_nonzero(self.labels == BAND)),
            "inner_eps": int(np.count_nonzero(self.labels == INNER_EPS)),
            "inner_2eps": int(np.count_nonzero(self.labels == INNER_2EPS)),
        }


def contained_mask(domain, stencil):
    """Nodes whose every stencil translate lies in the node set."""
    if stencil.d != domain.d:
        raise LatticeError(f"stencil dimension {stencil.d} != domain dimension {domain.d}")
    idx = np.indices(domain.shape)
    mask = np.ones(domain.shape, dtype=bool)
    for o in stencil.offsets:
        for axis, n in enumerate(domain.shape):
            shifted = idx[axis] + o[axis]
            mask &= (shifted >= 0) & (shifted < n)
    return mask


def classify_regions(domain, stencil_eps, stencil_2eps):
    if stencil_2eps.norm != stencil_eps.norm or stencil_2eps.h != stencil_eps.h:
        raise LatticeError("stencils must share norm and spacing")
    if abs(stencil_2eps.eps - 2 * stencil_eps.eps) > _TIE_RTOL * stencil_2eps.eps:
        raise LatticeError(
            f"second stencil radius {stencil_2eps.eps} is not twice {stencil_eps.eps}"
        )
    inner = contained_mask(domain, stencil_eps)
    if not inner.any():
        raise EmptyInterior(
            f"no node has its eps={stencil_eps.eps} ball inside the domain {domain.bounds}"
        )
    inner2 = contained_mask(domain, stencil_2eps)
    labels = np.full(domain.shape, BAND, dtype=np.int8)
    labels[inner] = INNER_EPS
    labels[inner2] = INNER_2EPS
    labels.setflags(write=False)
    return RegionLabels(labels, float(stencil_eps.eps))


def setup(domain, eps, norm="euclidean"):
    """Convenience: the eps and 2 eps stencils plus the region labels."""
    st = make_stencil(domain.h, eps, norm, domain.d)
    st2 = make_stencil(domain.h, 2 * eps, norm, domain.d)
    return st, st2, classify_regions(domain, st, st2)
