"""Diameter of the lens ``D^x_r and D^y_r`` and the critical distance r-bar.

The lens diameter ``g(t)`` for centres at distance ``t`` is estimated in two
stages:

1. rejection sampling: random points of ``D^x_r`` that also lie in
   ``D^y_r``, reduced by a pairwise maximum (a lower bound);
2. local maximisation over the lens boundary by Lipschitz branch and bound.

Stage 2 is what gives the error bound. For ``t < 2r < inj`` no distance
function has an interior maximum in the lens, so the diameter is attained on
the boundary, which lies in the two spherical caps ``S^x_r and D^y_r`` and
``S^y_r and D^x_r``. In the 2-plane through the axis, each cap is an arc
``theta -> exp(x, cos(theta) u + sin(theta) w, r)``, and the arc moves at
speed ``jacobi_speed(r)``. The pair distance is therefore Lipschitz in the
two arc angles, and every branch-and-bound box gets an upper bound.
The models are symmetric under rotation about the axis, so a meridian
section carries the full diameter in every dimension.

:func:`rbar` bisects on ``t`` using only certified comparisons of ``g``
against ``r`` (``g`` is decreasing), so the returned interval encloses r-bar.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DiagnosticsError, PreconditionError
from .manifolds import FlatTorus, ManifoldModel, Point
from .scalars import INF, Interval

DEFAULT_BUDGET = 400
DEFAULT_MAX_EVALS = 2_000_000
DEFAULT_TARGET = 1e-10
CERT_MARGIN = 1e-12
_PAIRWISE_CAP = 400


@dataclass(frozen=True)
class LensEstimate:
    """``estimate`` is attained by a pair of lens points; ``estimate + error`` bounds the diameter."""

    estimate: float
    error: float
    sampled: float = 0.0
    evaluations: int = 0

    @property
    def upper(self) -> float:
        return self.estimate + self.error

    def __iter__(self):
        # unpacks as (estimate, error bound)
        return iter((self.estimate, self.error))


def _check_radius(M: ManifoldModel, r: float) -> None:
    if not r > 0:
        raise PreconditionError("lens radius must be positive")
    if M.conv is not INF and r >= float(M.conv):
        raise PreconditionError(f"lens radius {r!r} must be below conv = {M.conv}")


def _sample_stage(M, xc, yc, r, budget, rng, basis):
    if budget <= 0:
        return 0.0
    c = rng.standard_normal((budget, M.dim))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    radii = r * rng.uniform(0.0, 1.0, budget) ** (1.0 / M.dim)
    pts = M._exp(xc, c @ basis, radii)
    inside = pts[M._dist(yc, pts) <= r]
    if len(inside) < 2:
        return 0.0
    inside = inside[:_PAIRWISE_CAP]
    return float(np.max(M._dist(inside[:, None, :], inside[None, :, :])))


class _Arc:
    """The boundary cap of the ball about ``c`` that lies inside the other ball."""

    def __init__(self, M, c, other, r, first):
        self.M, self.c, self.r = M, c, r
        self.u = M._log(c, other)
        basis = M._tangent_basis(c, first=self.u)
        w = M._project(c, first if first is not None else basis[1])
        w = w - M._inner(c, w, self.u) * self.u
        self.w = w / math.sqrt(M._inner(c, w, w))
        lo, hi = 0.0, math.pi
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            if float(M._dist(other, self(np.array(mid)))) <= r:
                lo = mid
            else:
                hi = mid
        self.alpha, self.alpha_hi = lo, hi

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)[..., None]
        return self.M._exp(self.c, np.cos(theta) * self.u + np.sin(theta) * self.w, self.r)


def _arc_max(M, arc, q):
    """Exact max over theta in [-alpha, alpha] of d(arc(theta), q), for q in the arc's plane.

    In a constant-curvature plane the distance from q to a point of the circle
    about ``arc.c`` increases with the folded angle between them, so the
    maximum sits at an arc end or at the angle opposite q.
    """
    v = M._log(arc.c, q)
    phi = np.arctan2(M._inner(arc.c, v, arc.w), M._inner(arc.c, v, arc.u))
    opposite = np.where(np.isfinite(phi), np.angle(-np.exp(1j * np.nan_to_num(phi))), 0.0)
    opposite = np.clip(opposite, -arc.alpha, arc.alpha)
    cands = np.stack([np.full_like(opposite, -arc.alpha), np.full_like(opposite, arc.alpha),
                      opposite])
    return np.max(M._dist(arc(cands), q[None]), axis=0)


def _branch_and_bound(M, arcs, r, target, max_evals):
    """Level-synchronous Lipschitz search over one arc of each boundary pair.

    Returns ``(best, upper)``: a distance attained by two lens points and a
    bound that no pair exceeds. Boxes are pruned only when their bound is at
    most ``best + target``, and the largest pruned bound is kept in ``upper``.
    """
    speed = M.jacobi_speed(r)
    best, upper, evals = 0.0, 0.0, 0
    for i, j in ((0, 0), (0, 1), (1, 1)):
        inner, outer = arcs[i], arcs[j]
        k = 64
        h = outer.alpha / k
        centers = -outer.alpha + h * (2 * np.arange(k) + 1)
        while True:
            vals = _arc_max(M, inner, outer(centers))
            evals += 3 * len(centers)
            best = max(best, float(np.max(vals)))
            bounds = vals + speed * h
            keep = bounds > best + target
            if not keep.all():
                upper = max(upper, float(np.max(bounds[~keep])))
            if not keep.any():
                break
            if evals + 6 * int(keep.sum()) > max_evals or h < 1e-15:
                upper = max(upper, float(np.max(bounds[keep])))
                break
            h /= 2
            centers = np.concatenate([centers[keep] - h, centers[keep] + h])
    slack = speed * max(arc.alpha_hi - arc.alpha for arc in arcs) * 2
    return best, max(upper, best) + slack, evals


def lens_diameter(M: ManifoldModel, x: Point, y: Point, r: float,
                  budget: int = DEFAULT_BUDGET, seed: int = 0,
                  target: float = DEFAULT_TARGET,
                  max_evals: int = DEFAULT_MAX_EVALS) -> LensEstimate:
    """Estimate Diam(D^x_r and D^y_r) with a rigorous-in-exact-arithmetic error bound.

    ``budget`` is the number of rejection samples; ``target`` and
    ``max_evals`` control the boundary refinement. Deterministic given ``seed``.
    """
    M.check(x, y)
    _check_radius(M, r)
    xc, yc = x.coords, y.coords
    t = float(M._dist(xc, yc))
    if t > 2 * r + 1e-12:
        raise PreconditionError(f"centres at distance {t!r} exceed 2r = {2 * r!r}: empty lens")
    rng = np.random.default_rng(seed)
    basis = M._tangent_basis(xc)
    sampled = _sample_stage(M, xc, yc, r, budget, rng, basis)
    if t >= 2 * r:
        # the closed balls touch in a single point
        return LensEstimate(0.0, 0.0, sampled, 0)
    if t < 1e-12:
        p = M._exp(xc, basis[0], r)
        q = M._exp(xc, -basis[0], r)
        est = float(M._dist(p, q))
        # 2r < inj, so the ball's diameter is exactly 2r
        return LensEstimate(est, max(0.0, 2 * r - est), sampled, 2)
    arc_x = _Arc(M, xc, yc, r, None)
    arc_y = _Arc(M, yc, xc, r, arc_x.w)
    best, upper, evals = _branch_and_bound(M, (arc_x, arc_y), r, target, max_evals)
    if sampled > upper + 1e-9:
        raise DiagnosticsError(
            f"sampled lens pair at distance {sampled!r} exceeds the boundary bound {upper!r}")
    if 2 * r - t <= 1e-12 * max(1.0, r):
        # tangent up to rounding of t: report the tangent value 0, with the
        # bound still covering the sliver of the computed configuration
        return LensEstimate(0.0, upper, sampled, evals)
    est = max(best, sampled)
    return LensEstimate(est, upper - est, sampled, evals)


@dataclass(frozen=True)
class LensProfile:
    r: float
    samples: list = field(default_factory=list)  # (t, estimate, error) triples
    model: str = ""

    @property
    def tolerance(self) -> float:
        return max((e for _, _, e in self.samples), default=0.0)

    def violations(self, slack: float = 1e-12) -> list[str]:
        """Breaches of the endpoint values, monotone decrease and ``g(t) > 2r - t``."""
        out = []
        r = self.r
        t0, g0, e0 = self.samples[0]
        tn, gn, en = self.samples[-1]
        if t0 == 0.0 and abs(g0 - 2 * r) > e0 + slack:
            out.append(f"g(0) = {g0!r} differs from 2r = {2 * r!r}")
        if tn == 2 * r and abs(gn) > en + slack:
            out.append(f"g(2r) = {gn!r} is not 0")
        for (t1, g1, e1), (t2, g2, e2) in zip(self.samples, self.samples[1:]):
            if g2 > g1 + e1 + slack:
                out.append(f"g increases between t={t1!r} and t={t2!r}: {g1!r} -> {g2!r}")
        for t, g, e in self.samples:
            if 0 < t < 2 * r and g + e <= 2 * r - t - slack:
                out.append(f"g({t!r}) = {g!r} is not above 2r - t = {2 * r - t!r}")
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "g_estimate", "error_bound"])
        for t, g, e in self.samples:
            writer.writerow([repr(float(t)), repr(float(g)), repr(float(e))])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"model": self.model, "r": self.r, "tolerance": self.tolerance,
                "samples": [{"t": t, "g_estimate": g, "error_bound": e}
                            for t, g, e in self.samples]}

    def to_svg(self, width: int = 480, height: int = 320) -> str:
        """Static plot of g(t) with the 2r - t line underneath."""
        r = self.r
        pad = 40

        def sx(t):
            return pad + (width - 2 * pad) * t / (2 * r)

        def sy(g):
            return height - pad - (height - 2 * pad) * g / (2 * r)

        curve = " ".join(f"{sx(t):.2f},{sy(g):.2f}" for t, g, _ in self.samples)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
            f'<line x1="{sx(0):.2f}" y1="{sy(2 * r):.2f}" x2="{sx(2 * r):.2f}" y2="{sy(0):.2f}" '
            'stroke="gray" stroke-dasharray="4 3"/>\n'
            f'<polyline points="{curve}" fill="none" stroke="steelblue" stroke-width="2"/>\n'
            f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">t</text>\n'
            f'<text x="{pad}" y="{pad - 10}" font-size="12">g(t), r = {r:.6g} ({self.model}); '
            'dashed: 2r - t</text>\n'
            "</svg>\n"
        )


def _base_pair(M: ManifoldModel):
    x = M.origin()
    u = M.tangent_basis(x)[0]
    return x, u


def lens_profile(M: ManifoldModel, r: float, samples: int = 50, budget: int = DEFAULT_BUDGET,
                 seed: int = 0, target: float = DEFAULT_TARGET) -> LensProfile:
    """g(t) on ``samples`` interior points of (0, 2r) plus both endpoints."""
    _check_radius(M, r)
    x, u = _base_pair(M)
    rows = []
    for k, t in enumerate(np.linspace(0.0, 2 * r, samples + 2)):
        y = Point(M.id, M._exp(x.coords, u, float(t)))
        est = lens_diameter(M, x, y, r, budget=budget, seed=seed + k, target=target)
        rows.append((float(t), est.estimate, est.error))
    return LensProfile(r, rows, M.id)


@dataclass(frozen=True)
class RBarResult:
    """Certified enclosure ``[lo, hi]`` of r-bar for every radius in ``[r, r_hi]``."""

    r: float
    lo: float
    hi: float
    iterations: int
    r_hi: float | None = None
    model: str = ""

    @property
    def interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_json(self) -> dict:
        out = {"model": self.model, "r": self.r, "rbar": [self.lo, self.hi],
               "width": self.width, "iterations": self.iterations}
        if self.r_hi is not None:
            out["r_hi"] = self.r_hi
        return out


class _LensOracle:
    """Lens bounds along a fixed geodesic, with a running monotonicity audit."""

    def __init__(self, M, budget, seed, target):
        self.M = M
        self.x, self.u = _base_pair(M)
        self.budget, self.seed, self.target = budget, seed, target
        self.seen: dict[float, list] = {}
        self.calls = 0

    def __call__(self, r: float, t: float) -> tuple[float, float]:
        M = self.M
        y = Point(M.id, M._exp(self.x.coords, self.u, t))
        est = lens_diameter(M, self.x, y, r, budget=self.budget, seed=self.seed + self.calls,
                            target=self.target)
        self.calls += 1
        lo, hi = est.estimate, est.upper
        for t2, lo2, hi2 in self.seen.setdefault(r, []):
            if (t2 < t and lo > hi2 + 1e-9) or (t2 > t and lo2 > hi + 1e-9):
                raise DiagnosticsError(
                    f"lens samples not monotone beyond error bound at t={t!r} and t={t2!r}; "
                    "raise the lens budget")
        self.seen[r].append((t, lo, hi))
        return lo, hi


def rbar_supported(M: ManifoldModel) -> bool:
    return M.two_point_homogeneous or isinstance(M, FlatTorus)


def rbar(M: ManifoldModel, r: float, tol: float = 1e-6, budget: int = 64, seed: int = 0,
         r_hi: float | None = None, target: float | None = None,
         strict: bool = True) -> RBarResult:
    """Enclose the centre distance at which the radius-r lens has diameter r.

    With ``r_hi`` given, the enclosure is valid simultaneously for every
    radius in ``[r, r_hi]``. The argument uses only that lenses grow with
    the radius: ``g_{r_lo}(L) > r_hi`` forces ``L < r-bar``, and
    ``g_{r_hi}(U) < r_lo`` forces ``U > r-bar``.

    With ``strict=False`` an enclosure wider than ``tol`` (possible when
    ``r_hi - r`` is large) is returned instead of raising.
    """
    if not rbar_supported(M):
        raise PreconditionError(f"{M.id} is not two-point homogeneous")
    r_lo = float(r)
    r_up = r_lo if r_hi is None else float(r_hi)
    if r_up < r_lo:
        raise PreconditionError("r_hi must not be below r")
    _check_radius(M, r_lo)
    _check_radius(M, r_up)
    if target is None:
        target = min(DEFAULT_TARGET, 0.02 * tol)
    g = _LensOracle(M, budget, seed, target)
    margin = CERT_MARGIN * max(1.0, r_up)

    def left_ok(t):
        return g(r_lo, t)[0] > r_up + margin

    def right_ok(t):
        return g(r_up, t)[1] < r_lo - margin

    lo, hi = r_up, 2 * r_lo
    if not left_ok(lo):
        raise DiagnosticsError(f"cannot certify g({lo!r}) > {r_up!r}; radius interval too wide?")
    if not right_ok(hi):
        raise DiagnosticsError(f"cannot certify g({hi!r}) < {r_lo!r}; radius interval too wide?")
    steps = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        steps += 1
        if left_ok(mid):
            lo = mid
        elif right_ok(mid):
            hi = mid
        else:
            # mid sits inside the uncertainty band: close each side separately
            a, b = lo, mid
            while b - a > tol / 4:
                m2 = 0.5 * (a + b)
                steps += 1
                a, b = (m2, b) if left_ok(m2) else (a, m2)
            c, d = mid, hi
            while d - c > tol / 4:
                m2 = 0.5 * (c + d)
                steps += 1
                c, d = (c, m2) if right_ok(m2) else (m2, d)
            lo, hi = a, d
            break
    if strict and hi - lo > tol:
        raise DiagnosticsError(
            f"r-bar enclosure [{lo!r}, {hi!r}] is wider than tol={tol!r}; "
            "lens bounds too loose (raise max_evals or tighten target)")
    return RBarResult(r_lo, lo, hi, steps, None if r_hi is None else r_up, M.id)
