"""Nonemptiness and cardinality of metric-sphere intersections.

Inside the convexity radius, ``S^{x1}_{r1} and S^{x2}_{r2}`` meet exactly when
``|r1 - r2| <= d(x1, x2) <= r1 + r2``, and they meet in a single point exactly
at the two tangency configurations. :func:`intersect_predicate` is that
inequality test; :func:`intersect_witness` actually produces a common point by
an intermediate-value argument along a path on one of the spheres.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .manifolds import ManifoldModel, Point, SpherePath, SphereSpec
from .scalars import INF

DIST_TOL = 1e-9
WITNESS_TOL = 1e-7
MAX_BISECTIONS = 200

_SEARCH_START = 256
_SEARCH_MAX_POINTS = 400_000

EMPTY = "empty"
SINGLETON = "singleton"
CONTINUUM = "continuum"


@dataclass(frozen=True)
class IntersectionClass:
    tag: str
    witness: Point | None = None

    def __post_init__(self):
        if self.tag not in (EMPTY, SINGLETON, CONTINUUM):
            raise ValueError(f"unknown intersection class {self.tag!r}")
        if (self.tag == EMPTY) != (self.witness is None):
            raise ValueError("empty carries no witness; the other classes need one")

    def to_json(self) -> dict:
        out = {"class": self.tag}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def inequalities_hold(d: float, r1: float, r2: float, tol: float = DIST_TOL) -> bool:
    return abs(r1 - r2) - tol <= d <= r1 + r2 + tol


def _below(value: float, radius) -> bool:
    return radius is INF or value < float(radius)


def require_below_conv(M: ManifoldModel, *radii: float) -> None:
    for r in radii:
        if not r > 0:
            raise PreconditionError(f"radius must be positive, got {r!r}")
        if not _below(r, M.conv):
            raise PreconditionError(
                f"radius {r!r} is not below conv({M.id}) = {M.conv}: beyond the convexity "
                "radius the inequalities no longer decide nonemptiness (antipodal centres "
                "on the round 2-sphere with r1 in (pi/2, pi) give empty intersections that "
                "satisfy them; see counterexamples.example4_demo)"
            )


def intersect_predicate(M: ManifoldModel, x1: Point, r1: float, x2: Point, r2: float) -> bool:
    """True iff ``|r1 - r2| <= d(x1, x2) <= r1 + r2``; radii must lie in (0, conv)."""
    require_below_conv(M, r1, r2)
    return inequalities_hold(M.distance(x1, x2), r1, r2)


def intersect_witness(M: ManifoldModel, x1: Point, r1: float, x2: Point, r2: float,
                      tol: float = WITNESS_TOL) -> Point | None:
    """A point z with ``d(x1, z) = r1`` and ``d(x2, z) = r2`` (to ``tol``), or None.

    Returns None immediately when the inequalities fail (a common point
    would violate the triangle inequality). Otherwise, if the radii are below
    conv, or satisfy ``0 < r2 <= min(r1, inj)`` and ``r1 + 2 r2 <= inj``, the
    witness is built constructively. Outside both regimes the smaller sphere
    is searched on a grid with a Lipschitz bound, which can also certify
    emptiness.
    """
    M.check(x1, x2)
    if not (r1 > 0 and r2 > 0):
        raise PreconditionError("radii must be positive")
    d = M.distance(x1, x2)
    if not inequalities_hold(d, r1, r2):
        return None
    if r2 > r1:
        x1, r1, x2, r2 = x2, r2, x1, r1
    inj = M.inj
    below_conv = _below(r1, M.conv) and _below(r2, M.conv)
    short = inj is INF or (r2 <= float(inj) and r1 + 2 * r2 <= float(inj))
    if below_conv or short:
        try:
            return _construct(M, x1, r1, x2, r2, d, tol)
        except ConvergenceError:
            if below_conv:
                raise
    return _search(M, x1, r1, x2, r2, tol)


def _bisect_on_path(M, x1c, r1, path, s0, s1, tol):
    f0 = float(M._dist(x1c, path.coords(s0))) - r1
    f1 = float(M._dist(x1c, path.coords(s1))) - r1
    if not (f0 < 0 < f1 or f1 < 0 < f0):
        raise ConvergenceError("invalid bracket on sphere path", (s0, s1))
    lo, hi = (s0, s1) if f0 < 0 else (s1, s0)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        fm = float(M._dist(x1c, path.coords(mid))) - r1
        if abs(fm) <= tol * 1e-3 or mid in (lo, hi):
            if abs(fm) <= tol:
                return path(mid)
            break
        if fm < 0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    fm = float(M._dist(x1c, path.coords(mid))) - r1
    if abs(fm) <= tol:
        return path(mid)
    raise ConvergenceError(f"bisection residual {fm:.3g} above tolerance", (lo, hi))


def _construct(M, x1, r1, x2, r2, d, tol):
    """Intermediate-value construction on the sphere about x2 (assumes r2 <= r1)."""
    spec = SphereSpec(x2, r2)
    if d <= DIST_TOL:
        # concentric; inequalities force r1 == r2 and the spheres coincide
        return M.sphere_point(spec, M.tangent(x2, M.tangent_basis(x2)[0]))
    M.log_map(x2, x1)  # raises CutLocusError beyond inj
    # half great circle of directions at x2, from towards x1 to away from it;
    # both ends are built from x2, so they sit on the sphere to rounding
    c = x2.coords
    toward = M._log(c, x1.coords)
    path = SpherePath(M, spec, toward, M._tangent_basis(c, first=toward)[1], math.pi)
    a, b = path(0.0), path(1.0)
    fa = M.distance(x1, a) - r1
    fb = M.distance(x1, b) - r1
    if abs(fa) <= tol:
        return a
    if abs(fb) <= tol:
        return b
    if not (fa < 0 < fb):
        raise ConvergenceError(
            f"geodesic endpoints do not bracket r1 (f(a)={fa:.3g}, f(b)={fb:.3g})", (0.0, 1.0))
    return _bisect_on_path(M, x1.coords, r1, path, 0.0, 1.0, tol)


def _direction_grid(dim: int, m: int) -> tuple[np.ndarray, float]:
    """Unit vectors in R^dim on a hyperspherical-angle grid, plus the covering radius.

    Every unit vector is within the returned distance of some grid vector.
    """
    if dim == 2:
        phi = 2 * math.pi * (np.arange(m) + 0.5) / m
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), math.pi / m
    polar_m = max(2, m // 2)
    polar = math.pi * (np.arange(polar_m) + 0.5) / polar_m
    az = 2 * math.pi * (np.arange(m) + 0.5) / m
    axes = [polar] * (dim - 2) + [az]
    dirs = []
    for angles in itertools.product(*axes):
        v = np.empty(dim)
        s = 1.0
        for k, ang in enumerate(angles):
            v[k] = s * math.cos(ang)
            s *= math.sin(ang)
        v[-1] = s
        dirs.append(v)
    cover = (dim - 2) * math.pi / (2 * polar_m) + math.pi / m
    return np.array(dirs), cover


def _search(M, x1, r1, x2, r2, tol):
    """Grid search of S^{x2}_{r2} for a zero of d(x1, .) - r1 with a Lipschitz certificate."""
    inj = M.inj
    if inj is not INF and r2 >= float(inj):
        raise PreconditionError("the searched sphere must have radius below inj")
    spec = SphereSpec(x2, r2)
    basis = M.tangent_basis(x2)
    speed = M.jacobi_speed(r2)
    m = _SEARCH_START
    while True:
        dirs, cover = _direction_grid(M.dim, m)
        if len(dirs) > _SEARCH_MAX_POINTS:
            break
        pts = M._exp(x2.coords, dirs @ basis, r2)
        f = M._dist(x1.coords, pts) - r1
        k = int(np.argmin(np.abs(f)))
        if abs(f[k]) <= tol:
            return Point(M.id, pts[k])
        neg, pos = np.flatnonzero(f < 0), np.flatnonzero(f > 0)
        if len(neg) and len(pos):
            a, b = Point(M.id, pts[neg[0]]), Point(M.id, pts[pos[0]])
            path = M.sphere_path(spec, a, b)
            return _bisect_on_path(M, x1.coords, r1, path, 0.0, 1.0, tol)
        if np.min(np.abs(f)) > speed * cover:
            # d(x1, .) is 1-Lipschitz and the grid covers the sphere to speed*cover
            return None
        m *= 4
    raise ConvergenceError("sphere search exhausted its grid budget without a decision")


def classify_intersection(M: ManifoldModel, x1: Point, r1: float, x2: Point,
                          r2: float) -> IntersectionClass:
    """Empty, a single tangency point, or a continuum, for radii below conv.

    Equality cases are tested first, so inputs within :data:`DIST_TOL` of a
    tangency classify as singletons.
    """
    require_below_conv(M, r1, r2)
    d = M.distance(x1, x2)
    if not inequalities_hold(d, r1, r2):
        return IntersectionClass(EMPTY)
    if abs(d - (r1 + r2)) <= DIST_TOL:
        # external tangency: the point at distance r1 along the segment x1 -> x2
        p = M.exp_map(x1, M.log_map(x1, x2), r1)
        return IntersectionClass(SINGLETON, p)
    if d > DIST_TOL and abs(d - abs(r1 - r2)) <= DIST_TOL:
        # internal tangency: extend the geodesic from the larger sphere's centre
        (xb, rb), (xs, _) = sorted([(x1, r1), (x2, r2)], key=lambda c: -c[1])
        p = M.exp_map(xb, M.log_map(xb, xs), rb)
        return IntersectionClass(SINGLETON, p)
    z = intersect_witness(M, x1, r1, x2, r2)
    if z is None:
        raise ConvergenceError("inequalities hold below conv but no witness was found")
    return IntersectionClass(CONTINUUM, z)
