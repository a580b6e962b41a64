"""Executable counterexamples and empirical preserved-distance audits.

* ``ex1``: the bijection of the real line that adds one to rationals and fixes
  irrationals. Rationality is decidable only for exact inputs, so the map
  acts on :class:`~rigidity_lab.scalars.Exact` values.
* ``ex2``: the bijection of the round sphere that is the antipodal map on an
  antipodally symmetric union of caps and the identity elsewhere.
* ``ex3``: a 7-colouring of the plane by hexagons of diameter in
  ``(2/sqrt7, 1)``, composed with the vertices of a unit regular simplex in E^6.
  Unit distance pairs always get different colours and so map to distance 1.
* ``ex4``: antipodal centres on the unit 2-sphere with radii beyond conv.
  The sphere inequalities hold there, yet the intersection is empty.

Audits are evidence, never proofs: the verdict is either
``consistent-with-membership`` or ``refuted`` with replayable witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ParameterError, PreconditionError
from .intersections import inequalities_hold, intersect_witness
from .manifolds import Point, Sphere
from .scalars import Exact, parse_scalar

CONSISTENT = "consistent-with-membership"
REFUTED = "refuted"
NOT_APPLICABLE = "not-applicable"
EXAMPLE_IDS = ("ex1", "ex2", "ex3", "ex4")

HEX_DIAMETER_MIN = 2 / math.sqrt(7)
HEX_DIAMETER_MAX = 1.0
DEFAULT_HEX_DIAMETER = 0.9
DEFAULT_CAP_RADIUS = math.pi / 8
_FLOAT_TOL = 1e-9
_MAX_RECORDED = 20


@dataclass(frozen=True)
class CandidateMap:
    """A self-map (or configuration, for ``ex4``) with its domain and codomain."""

    id: str
    domain: str
    codomain: str
    evaluate: Callable | None
    inverse: Callable | None = None
    params: dict = field(default_factory=dict)

    @property
    def bijective(self) -> bool:
        return self.inverse is not None

    def __call__(self, p):
        if self.evaluate is None:
            raise ParameterError(f"{self.id} is a configuration, not a map")
        return self.evaluate(p)


# -- Example 1 ---------------------------------------------------------------
def _ex1(x):
    x = _exact(x)
    return x + 1 if x.is_rational else x


def _ex1_inverse(x):
    x = _exact(x)
    return x - 1 if x.is_rational else x


def _exact(x) -> Exact:
    if isinstance(x, Exact):
        return x
    if isinstance(x, (int, Fraction)):
        return Exact(Fraction(x))
    if isinstance(x, str):
        return parse_scalar(x)
    raise ParameterError(
        f"ex1 decides rationality only for exact values (fractions, q*sqrt d), got {x!r}")


# -- Example 2 ---------------------------------------------------------------
def _caps_symmetric(caps) -> bool:
    for c, rho in caps:
        if not any(np.allclose(-c, c2, atol=1e-12) and abs(rho - rho2) <= 1e-12
                   for c2, rho2 in caps):
            return False
    return True


def _build_ex2(params):
    dim = int(params.get("dim", 2))
    S = Sphere(dim)
    caps_in = params.get("caps")
    if caps_in is None:
        rho = float(params.get("cap_radius", DEFAULT_CAP_RADIUS))
        north = S.origin().coords
        caps_in = [(north, rho), (-north, rho)]
    caps = []
    for c, rho in caps_in:
        c = np.asarray(c, dtype=float)
        if c.shape != (S.ambient_dim,):
            raise ParameterError(f"cap centre needs {S.ambient_dim} coordinates")
        if not 0 < float(rho) < math.pi:
            raise ParameterError("cap angular radius must lie in (0, pi)")
        caps.append((c / np.linalg.norm(c), float(rho)))
    if not _caps_symmetric(caps):
        raise ParameterError("region A must be antipodally symmetric (A = -A)")
    centers = np.array([c for c, _ in caps])
    cos_rho = np.cos([rho for _, rho in caps])

    def in_a(x):
        x = np.asarray(x, dtype=float)
        return np.any(x @ centers.T >= cos_rho - 1e-15, axis=-1)

    def f(p):
        coords = p.coords if isinstance(p, Point) else np.asarray(p, dtype=float)
        out = np.where(in_a(coords)[..., None], -coords, coords)
        return Point(S.id, out) if isinstance(p, Point) else out

    stored = {"dim": dim, "caps": [[c.tolist(), rho] for c, rho in caps]}
    return CandidateMap("ex2", S.id, S.id, f, f, stored), S, in_a


# -- Example 3 ---------------------------------------------------------------
def _simplex_vertices() -> np.ndarray:
    """Seven points of E^6 at pairwise distance exactly 1 (up to rounding)."""
    basis, _ = np.linalg.qr(np.eye(7) - 1.0 / 7.0)
    basis = basis[:, :6]
    return (np.eye(7) / math.sqrt(2)) @ basis


_SIMPLEX = _simplex_vertices()
_NEIGHBOURS = np.array([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)])


def _hex_cells(p, diameter):
    """Axial coordinates of the hexagon owning each point (nearest centre).

    Ties between equidistant centres go to the lexicographically smallest
    axial pair, which makes every cell half-open and the colouring total.
    """
    p = np.asarray(p, dtype=float)
    R = diameter / 2.0
    x, y = p[..., 0] / R, p[..., 1] / R
    qf = math.sqrt(3) / 3 * x - y / 3
    rf = 2.0 / 3.0 * y
    q0, r0 = np.rint(qf), np.rint(rf)
    cq = q0[..., None] + _NEIGHBOURS[:, 0]
    cr = r0[..., None] + _NEIGHBOURS[:, 1]
    cx = math.sqrt(3) * (cq + cr / 2.0)
    cy = 1.5 * cr
    d2 = (cx - x[..., None]) ** 2 + (cy - y[..., None]) ** 2
    tied = d2 <= d2.min(axis=-1, keepdims=True) + 1e-12
    key = np.where(tied, cq * 2.0**24 + cr, np.inf)
    k = np.argmin(key, axis=-1)
    q = np.take_along_axis(cq, k[..., None], -1)[..., 0]
    r = np.take_along_axis(cr, k[..., None], -1)[..., 0]
    return q.astype(np.int64), r.astype(np.int64)


def _hex_color_unchecked(p, diameter):
    q, r = _hex_cells(p, diameter)
    return (q + 3 * r) % 7 + 1


def hex_color(p, hex_diameter: float = DEFAULT_HEX_DIAMETER):
    """Colour in 1..7 of point(s) ``p`` of the plane (array of shape (..., 2)).

    Hexagons of the given diameter tile the plane; cell (q, r) in axial
    coordinates gets colour ``(q + 3r) mod 7 + 1``, so a cell and its six
    neighbours use all seven colours.
    """
    if not HEX_DIAMETER_MIN < hex_diameter < HEX_DIAMETER_MAX:
        raise ParameterError(
            f"hex diameter must lie in (2/sqrt7, 1) = ({HEX_DIAMETER_MIN:.6f}, 1), got {hex_diameter!r}")
    coords = p.coords if isinstance(p, Point) else p
    out = _hex_color_unchecked(coords, hex_diameter)
    return int(out) if np.ndim(out) == 0 else out


def _build_ex3(params):
    D = float(params.get("hex_diameter", DEFAULT_HEX_DIAMETER))
    hex_color(np.zeros(2), D)  # validates D

    def f(p):
        coords = p.coords if isinstance(p, Point) else np.asarray(p, dtype=float)
        out = _SIMPLEX[hex_color(coords, D) - 1]
        return Point("e6", out) if isinstance(p, Point) else out

    return CandidateMap("ex3", "e2", "e6", f, None, {"hex_diameter": D})


def build_example(example_id: str, params: dict | None = None, seed: int = 0) -> CandidateMap:
    """Construct one of ``ex1`` .. ``ex4``; the seed is recorded, the maps are deterministic."""
    params = dict(params or {})
    if example_id == "ex1":
        return CandidateMap("ex1", "exact reals (Q(sqrt d))", "exact reals (Q(sqrt d))",
                            _ex1, _ex1_inverse, {"seed": seed})
    if example_id == "ex2":
        return _build_ex2(params)[0]
    if example_id == "ex3":
        return _build_ex3(params)
    if example_id == "ex4":
        S = Sphere(2)
        north = S.origin()
        cfg = {"x1": north.coords.tolist(), "x2": (-north.coords).tolist(),
               "r1_range": [math.pi / 2, math.pi], "r2_range": ["pi - r1", "r1"]}
        return CandidateMap("ex4", S.id, S.id, None, None, cfg)
    raise ParameterError(f"unknown example id {example_id!r}; expected one of {EXAMPLE_IDS}")


# -- audits --------------------------------------------------------------------
@dataclass(frozen=True)
class Violation:
    direction: str  # "forward" (P side) or "backward" (converse, SP side)
    x: object
    y: object
    image_distance: object

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, np.ndarray):
                return [float(c) for c in v]
            if isinstance(v, Exact):
                return str(v)
            return float(v) if isinstance(v, (float, np.floating)) else v
        return {"direction": self.direction, "x": enc(self.x), "y": enc(self.y),
                "image_distance": enc(self.image_distance)}


@dataclass
class AuditReport:
    map_id: str
    r: str
    pairs_tested: int
    preserved_forward: int
    preserved_backward: int | None
    violations: list
    violation_count: int
    verdict_forward: str
    verdict_backward: str
    image_size: int | None = None
    seed: int = 0

    @property
    def verdict(self) -> str:
        sides = [self.verdict_forward] + (
            [] if self.verdict_backward == NOT_APPLICABLE else [self.verdict_backward])
        return REFUTED if REFUTED in sides else CONSISTENT

    def to_json(self) -> dict:
        out = {"map": self.map_id, "r": self.r, "seed": self.seed,
               "pairs_tested": self.pairs_tested,
               "preserved_forward": self.preserved_forward,
               "preserved_backward": self.preserved_backward,
               "verdict_forward": self.verdict_forward,
               "verdict_backward": self.verdict_backward, "verdict": self.verdict,
               "violation_count": self.violation_count,
               "violations": [v.to_json() for v in self.violations]}
        if self.image_size is not None:
            out["image_size"] = self.image_size
        return out


def _verdict(preserved, tested):
    return CONSISTENT if preserved == tested else REFUTED


def _random_exact(rng, d: int) -> Exact:
    a = Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 60)))
    if rng.random() < 0.5 or d == 1:
        return Exact(a)
    return Exact(a, Fraction(int(rng.integers(-30, 31)) or 1, int(rng.integers(1, 30))), d)


def _audit_ex1(cmap, r, n, rng):
    r = _exact(r)
    if r.sign() <= 0:
        raise PreconditionError("audited distance must be positive")
    d = r.d if r.d != 1 else 2
    counts = {"forward": 0, "backward": 0}
    violations, total = [], 0
    for direction, f in (("forward", cmap.evaluate), ("backward", cmap.inverse)):
        for _ in range(n):
            x = _random_exact(rng, d)
            y = x + r
            image = f(y) - f(x)
            if image.sign() < 0:
                image = -image
            if image == r:
                counts[direction] += 1
            else:
                total += 1
                if len(violations) < _MAX_RECORDED:
                    violations.append(Violation(direction, x, y, image))
    return counts["forward"], counts["backward"], violations, total, None


def _sphere_pairs(S, r, n, rng):
    xs = np.stack([S.random_point(rng).coords for _ in range(n)])
    c = rng.standard_normal((n, S.ambient_dim))
    v = S._project(xs, c)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    ys = S._exp(xs, v, r)
    return xs, ys


def _audit_ex2(cmap, r, n, rng):
    S = Sphere(cmap.params["dim"])
    rf = float(r)
    if not 0 < rf <= math.pi:
        raise PreconditionError("ex2 audits need 0 < r <= pi")
    counts, violations, total = {}, [], 0
    for direction, f in (("forward", cmap.evaluate), ("backward", cmap.inverse)):
        xs, ys = _sphere_pairs(S, rf, n, rng)
        image = S._dist(f(xs), f(ys))
        ok = np.abs(image - rf) <= _FLOAT_TOL
        counts[direction] = int(ok.sum())
        bad = np.flatnonzero(~ok)
        total += len(bad)
        violations += [Violation(direction, xs[k], ys[k], float(image[k]))
                       for k in bad[:_MAX_RECORDED - len(violations)]]
    return counts["forward"], counts["backward"], violations, total, None


def _audit_ex3(cmap, r, n, rng):
    rf = float(r)
    if rf <= 0:
        raise PreconditionError("audited distance must be positive")
    xs = rng.uniform(-50.0, 50.0, (n, 2))
    theta = rng.uniform(0.0, 2 * math.pi, n)
    ys = xs + rf * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    fx, fy = cmap.evaluate(xs), cmap.evaluate(ys)
    image = np.linalg.norm(fx - fy, axis=-1)
    ok = np.abs(image - rf) <= _FLOAT_TOL
    bad = np.flatnonzero(~ok)
    violations = [Violation("forward", xs[k], ys[k], float(image[k])) for k in bad[:_MAX_RECORDED]]
    D = cmap.params["hex_diameter"]
    colours = np.unique(np.concatenate([hex_color(xs, D), hex_color(ys, D)]))
    return int(ok.sum()), None, violations, len(bad), len(colours)


def audit_distance(cmap: CandidateMap, r, n: int = 10_000, seed: int = 0) -> AuditReport:
    """Sample ``n`` pairs at distance exactly ``r`` and check the images.

    Pairs are built by moving distance ``r`` along a geodesic, never by
    rejection. For bijective maps the converse direction is sampled too
    (pairs at distance ``r`` in the codomain, pulled back by the inverse).
    """
    rng = np.random.default_rng(seed)
    runner = {"ex1": _audit_ex1, "ex2": _audit_ex2, "ex3": _audit_ex3}.get(cmap.id)
    if runner is None:
        raise ParameterError(f"{cmap.id} has no distance audit")
    fwd, bwd, violations, total, image_size = runner(cmap, r, n, rng)
    return AuditReport(cmap.id, str(r), n, fwd, bwd, violations, total, _verdict(fwd, n),
                       NOT_APPLICABLE if bwd is None else _verdict(bwd, n), image_size, seed)


def recheck_violation(cmap: CandidateMap, v: Violation, r) -> bool:
    """Re-evaluate a recorded violation; True when it still violates preservation of ``r``."""
    f = cmap.evaluate if v.direction == "forward" else cmap.inverse
    if cmap.id == "ex1":
        image, r = f(v.y) - f(v.x), _exact(r)
        return image != r and -image != r
    if cmap.id == "ex2":
        S = Sphere(cmap.params["dim"])
        return abs(float(S._dist(f(v.x), f(v.y))) - float(r)) > _FLOAT_TOL
    return abs(float(np.linalg.norm(f(v.x) - f(v.y))) - float(r)) > _FLOAT_TOL


# -- Example 4 -----------------------------------------------------------------
def example4_demo(grid: int = 10) -> dict:
    """Inequalities hold yet the spheres miss each other, for radii beyond conv.

    Cells of a ``grid x grid`` partition of ``r1 in (pi/2, pi)``,
    ``r2 in (pi - r1, r1)`` are sampled at their centres.
    """
    S = Sphere(2)
    x1 = S.origin()
    x2 = S.point(-x1.coords)
    d = S.distance(x1, x2)
    cells = []
    for i in range(grid):
        r1 = math.pi / 2 + (i + 0.5) * (math.pi / 2) / grid
        lo = math.pi - r1
        for j in range(grid):
            r2 = lo + (j + 0.5) * (r1 - lo) / grid
            z = intersect_witness(S, x1, r1, x2, r2)
            cells.append({"r1": r1, "r2": r2,
                          "inequalities_hold": inequalities_hold(d, r1, r2),
                          "empty": z is None})
    tangent = intersect_witness(S, x1, 2.0, x2, math.pi - 2.0)
    inside = intersect_witness(S, x1, 1.0, x2, math.pi - 1.0)
    return {
        "model": S.id,
        "d_x1_x2": d,
        "two_conv": 2 * float(S.conv),
        "d_equals_two_conv": abs(d - 2 * float(S.conv)) <= 1e-12,
        "cells": cells,
        "all_cells_confirm": all(c["inequalities_hold"] and c["empty"] for c in cells),
        "example": {"r1": 2.0, "r2": 1.5,
                    "inequalities_hold": inequalities_hold(d, 2.0, 1.5),
                    "empty": intersect_witness(S, x1, 2.0, x2, 1.5) is None},
        "boundary_r2_pi_minus_r1": {"r1": 2.0, "r2": math.pi - 2.0, "empty": tangent is None},
        "r1_below_conv": {"r1": 1.0, "r2": math.pi - 1.0, "empty": inside is None,
                          "note": "r1 < pi/2 leaves the example's range"},
        "note": "intersect_predicate requires radii below conv(S^2) = pi/2",
    }


def ex1_symbol(text: str) -> Exact:
    """Parse an ex1 input such as ``1/2`` or ``sqrt2``."""
    return _exact(text)


__all__ = ["CandidateMap", "AuditReport", "Violation", "build_example", "hex_color",
           "audit_distance", "recheck_violation", "example4_demo", "CONSISTENT", "REFUTED",
           "NOT_APPLICABLE"]
