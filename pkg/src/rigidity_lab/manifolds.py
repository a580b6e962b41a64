"""Closed-form model spaces: Euclidean, round sphere, hyperbolic space, flat torus.

Points live in ambient coordinates:

* ``Euclidean(n)``: ``R^n``.
* ``Sphere(n, R)``: vectors of norm ``R`` in ``R^(n+1)``.
* ``Hyperbolic(n, kappa)``: the upper sheet of the hyperboloid
  ``<x, x>_L = -1/|kappa|`` in Minkowski space (time coordinate first).
* ``FlatTorus(n)``: representatives in ``[0, 1)^n`` of ``R^n / Z^n``.

Tangent vectors use the same ambient coordinates, so the tangency constraint
is an inner-product identity rather than a chart choice. The array kernels
(``_dist``, ``_exp``, ...) broadcast over leading axes and are what the
sampling code in :mod:`rigidity_lab.lens` calls; the public methods wrap them
with model checks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import CutLocusError, ModelMismatchError, PreconditionError
from .scalars import INF, PI_HI, PI_LO, Exact, Interval

COORD_TOL = 1e-12


@dataclass(frozen=True)
class Radius:
    """A closed-form length ``coef * pi**pi_power`` (``pi_power`` is 0 or 1)."""

    coef: Fraction
    pi_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coef", Fraction(self.coef))

    def __float__(self):
        return float(self.coef) * (math.pi if self.pi_power else 1.0)

    def half(self) -> "Radius":
        return Radius(self.coef / 2, self.pi_power)

    def scaled(self, k) -> "Radius":
        return Radius(self.coef * Fraction(k), self.pi_power)

    def to_scalar(self) -> Exact | Interval:
        if self.pi_power == 0:
            return Exact(self.coef)
        return Interval(self.coef * PI_LO, self.coef * PI_HI)

    def _cmp(self, other) -> int:
        if other is INF:
            return -1
        if isinstance(other, Radius) and other.pi_power == self.pi_power:
            return (self.coef > other.coef) - (self.coef < other.coef)
        a = self.to_scalar().enclose()
        b = other.to_scalar().enclose() if isinstance(other, Radius) else Interval(
            Fraction(other), Fraction(other))
        if a.hi < b.lo:
            return -1
        if a.lo > b.hi:
            return 1
        raise ValueError("radius comparison undecidable at 40 digits")

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __str__(self):
        q = self.coef
        body = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return f"{body}*pi" if self.pi_power else body


def half_radius(value):
    return INF if value is INF else value.half()


@dataclass(frozen=True, eq=False)
class Point:
    """A point of a model, tagged with the model's id."""

    model: str
    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    def to_json(self) -> dict:
        return {"model": self.model, "coords": [float(c) for c in self.coords]}

    def __repr__(self):
        return f"Point({self.model}, {np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: Point
    components: np.ndarray
    norm: float = field(default=float("nan"))

    def __post_init__(self):
        arr = np.array(self.components, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "components", arr)


@dataclass(frozen=True, eq=False)
class SphereSpec:
    """The metric sphere S^center_radius (and, by extension, its balls)."""

    center: Point
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise PreconditionError(f"sphere radius must be positive, got {self.radius}")


class SpherePath:
    """Continuous path ``[0, 1] -> S^center_radius`` pushed through the exponential map."""

    def __init__(self, model: "ManifoldModel", spec: SphereSpec,
                 start: np.ndarray, normal: np.ndarray, angle: float):
        self.model = model
        self.spec = spec
        self._u = start
        self._w = normal
        self.angle = angle

    def direction(self, s):
        s = np.asarray(s, dtype=float)[..., None]
        return np.cos(s * self.angle) * self._u + np.sin(s * self.angle) * self._w

    def coords(self, s) -> np.ndarray:
        c = self.spec.center.coords
        return self.model._exp(c, self.direction(s), self.spec.radius)

    def __call__(self, s: float) -> Point:
        return Point(self.model.id, self.coords(s))

    def sample(self, k: int) -> list[Point]:
        return [self(s) for s in np.linspace(0.0, 1.0, k)]


class ManifoldModel:
    """Base class; subclasses supply the array kernels and the closed-form radii."""

    kind: str = ""
    tag: str = ""

    def __init__(self, dim: int):
        if int(dim) != dim or dim < 2:
            raise PreconditionError(f"model dimension must be an integer >= 2, got {dim}")
        self.dim = int(dim)

    # -- identity -----------------------------------------------------------
    @property
    def id(self) -> str:
        return f"{self.tag}{self.dim}"

    @property
    def ambient_dim(self) -> int:
        return self.dim

    def __repr__(self):
        return f"{type(self).__name__}({self.id})"

    def __eq__(self, other):
        return isinstance(other, ManifoldModel) and other.id == self.id

    def __hash__(self):
        return hash(self.id)

    # -- closed-form radii --------------------------------------------------
    @property
    def conv(self):
        raise NotImplementedError

    @property
    def inj(self):
        raise NotImplementedError

    def inj_at(self, x: Point):
        # every model here is homogeneous
        return self.inj

    @property
    def compact(self) -> bool:
        return self.inj is not INF

    @property
    def two_point_homogeneous(self) -> bool:
        return True

    def jacobi_speed(self, r: float) -> float:
        """Speed of ``theta -> exp(x, cos(theta) u + sin(theta) w, r)`` for orthonormal u, w."""
        return abs(r)

    # -- array kernels (overridden) -------------------------------------------
    def _normalize(self, x: np.ndarray) -> np.ndarray:
        return x

    def _inner(self, x, u, v):
        return np.sum(u * v, axis=-1)

    def _project(self, x, w):
        return w

    def _dist(self, a, b):
        raise NotImplementedError

    def _exp(self, x, v, t):
        raise NotImplementedError

    def _log(self, x, y):
        """Unit initial velocity of the minimizing geodesic from x to y (no checks)."""
        raise NotImplementedError

    def _on_manifold_residual(self, x) -> float:
        return 0.0

    # -- points and vectors -------------------------------------------------
    def point(self, coords) -> Point:
        arr = np.asarray(coords, dtype=float)
        if arr.shape != (self.ambient_dim,):
            raise PreconditionError(
                f"{self.id} points need {self.ambient_dim} coordinates, got shape {arr.shape}")
        return Point(self.id, self._normalize(arr))

    def origin(self) -> Point:
        raise NotImplementedError

    def check(self, *items) -> None:
        for item in items:
            pt = item.base if isinstance(item, TangentVector) else item
            if not isinstance(pt, Point) or pt.model != self.id:
                tag = getattr(pt, "model", type(pt).__name__)
                raise ModelMismatchError(f"object from {tag!r} used with model {self.id!r}")

    def tangent(self, x: Point, components) -> TangentVector:
        """Project ``components`` onto T_x and wrap it."""
        self.check(x)
        comp = self._project(x.coords, np.asarray(components, dtype=float))
        return TangentVector(x, comp, float(math.sqrt(max(self._inner(x.coords, comp, comp), 0.0))))

    def tangent_basis(self, x: Point) -> np.ndarray:
        """Orthonormal basis of T_x as an ``(n, ambient_dim)`` array."""
        self.check(x)
        return self._tangent_basis(x.coords)

    def _tangent_basis(self, xc: np.ndarray, first: np.ndarray | None = None) -> np.ndarray:
        found: list[np.ndarray] = []
        candidates = [] if first is None else [first]
        candidates += list(np.eye(self.ambient_dim))
        for cand in candidates:
            w = self._project(xc, cand)
            for e in found:
                w = w - self._inner(xc, w, e) * e
            nrm2 = self._inner(xc, w, w)
            if nrm2 > 1e-16:
                # second pass, projection included, for numerical orthogonality
                w = self._project(xc, w / math.sqrt(nrm2))
                for e in found:
                    w = w - self._inner(xc, w, e) * e
                w = w / math.sqrt(self._inner(xc, w, w))
                found.append(w)
            if len(found) == self.dim:
                break
        return np.array(found)

    def random_point(self, rng: np.random.Generator, scale: float = 2.0) -> Point:
        raise NotImplementedError

    def random_unit_tangent(self, x: Point, rng: np.random.Generator) -> TangentVector:
        basis = self.tangent_basis(x)
        c = rng.standard_normal(self.dim)
        c /= np.linalg.norm(c)
        return TangentVector(x, c @ basis, 1.0)

    # -- public operations ----------------------------------------------------
    def distance(self, x: Point, y: Point) -> float:
        self.check(x, y)
        return float(self._dist(x.coords, y.coords))

    def exp_map(self, x: Point, v: TangentVector, t: float, strict: bool = False) -> Point:
        """gamma(t) for the arclength geodesic with gamma(0)=x and initial velocity v."""
        self.check(x, v)
        if self._dist(v.base.coords, x.coords) > 1e-9:
            raise PreconditionError("tangent vector is not based at x")
        comp = v.components
        nrm = math.sqrt(max(float(self._inner(x.coords, comp, comp)), 0.0))
        if nrm == 0.0:
            raise PreconditionError("zero tangent vector has no geodesic direction")
        if abs(nrm - 1.0) > COORD_TOL:
            if strict:
                raise PreconditionError(f"tangent vector has norm {nrm!r}, expected 1")
            comp = comp / nrm
        return Point(self.id, self._exp(x.coords, comp, float(t)))

    def log_map(self, x: Point, y: Point) -> TangentVector:
        """Unit initial velocity of the unique minimizing geodesic from x to y."""
        self.check(x, y)
        d = float(self._dist(x.coords, y.coords))
        inj = self.inj_at(x)
        if inj is not INF and d >= float(inj) - COORD_TOL:
            raise CutLocusError(f"d(x, y) = {d!r} is not below inj(x) = {inj}")
        if d == 0.0:
            raise PreconditionError("log_map is undefined for coincident points")
        v = self._log(x.coords, y.coords)
        return TangentVector(x, v, 1.0)

    def sphere_point(self, spec: SphereSpec, direction: TangentVector) -> Point:
        self.check(spec.center, direction)
        self._require_below_inj(spec)
        return self.exp_map(spec.center, direction, spec.radius)

    def sphere_path(self, spec: SphereSpec, a: Point, b: Point, tol: float = 1e-9) -> SpherePath:
        """A path on S^center_radius from a to b: a great-circle arc of unit tangent
        directions at the center, pushed through the exponential map."""
        self.check(spec.center, a, b)
        self._require_below_inj(spec)
        c = spec.center.coords
        for name, p in (("a", a), ("b", b)):
            off = abs(float(self._dist(c, p.coords)) - spec.radius)
            if off > tol:
                raise PreconditionError(f"{name} is {off:.3g} off the sphere")
        ua = self._log(c, a.coords)
        ub = self._log(c, b.coords)
        cos = float(np.clip(self._inner(c, ua, ub), -1.0, 1.0))
        w = self._project(c, ub - cos * ua)
        w = w - self._inner(c, w, ua) * ua
        wn = math.sqrt(max(float(self._inner(c, w, w)), 0.0))
        if wn < 1e-7:
            # a == b, or a and b are opposite on the tangent sphere: turn through
            # a fixed orthogonal direction
            w = self._tangent_basis(c, first=ua)[1]
            angle = 0.0 if cos > 0 else math.pi
        else:
            w = w / wn
            angle = math.atan2(wn, cos)
        return SpherePath(self, spec, ua, w, angle)

    def _require_below_inj(self, spec: SphereSpec) -> None:
        inj = self.inj_at(spec.center)
        if inj is not INF and spec.radius >= float(inj):
            raise CutLocusError(f"radius {spec.radius!r} is not below inj = {inj}")

    def to_json(self) -> dict:
        return {"id": self.id}


class Euclidean(ManifoldModel):
    kind = "Euclidean"
    tag = "e"

    @property
    def conv(self):
        return INF

    @property
    def inj(self):
        return INF

    def _dist(self, a, b):
        return np.linalg.norm(np.asarray(b) - np.asarray(a), axis=-1)

    def _exp(self, x, v, t):
        t = np.asarray(t, dtype=float)[..., None]
        return x + t * v

    def _log(self, x, y):
        diff = y - x
        return diff / np.linalg.norm(diff, axis=-1, keepdims=True)

    def origin(self):
        return self.point(np.zeros(self.dim))

    def random_point(self, rng, scale=2.0):
        return self.point(rng.uniform(-scale, scale, self.dim))


class Sphere(ManifoldModel):
    kind = "Sphere"
    tag = "s"

    def __init__(self, dim: int, radius: float = 1.0):
        super().__init__(dim)
        if not radius > 0:
            raise PreconditionError("sphere radius must be positive")
        self.R = float(radius)

    @property
    def id(self):
        return f"s{self.dim}" if self.R == 1.0 else f"s{self.dim}:{self.R!r}"

    @property
    def ambient_dim(self):
        return self.dim + 1

    @property
    def inj(self):
        return Radius(Fraction(self.R), 1)

    @property
    def conv(self):
        return Radius(Fraction(self.R) / 2, 1)

    def jacobi_speed(self, r):
        return self.R * abs(math.sin(r / self.R))

    def _normalize(self, x):
        n = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(n == 0):
            raise PreconditionError("the zero vector is not a sphere point")
        return self.R * x / n

    def _project(self, x, w):
        return w - (np.sum(x * w, axis=-1, keepdims=True) / self.R**2) * x

    def _dist(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        return 2.0 * self.R * np.arctan2(np.linalg.norm(a - b, axis=-1),
                                         np.linalg.norm(a + b, axis=-1))

    def _exp(self, x, v, t):
        t = np.asarray(t, dtype=float)[..., None]
        s = t / self.R
        return self._normalize(np.cos(s) * x + self.R * np.sin(s) * v)

    def _log(self, x, y):
        v = y - (np.sum(x * y, axis=-1, keepdims=True) / self.R**2) * x
        return v / np.linalg.norm(v, axis=-1, keepdims=True)

    def _on_manifold_residual(self, x):
        return abs(float(np.linalg.norm(x)) - self.R)

    def origin(self):
        # north pole
        e = np.zeros(self.ambient_dim)
        e[-1] = self.R
        return self.point(e)

    def random_point(self, rng, scale=None):
        return self.point(rng.standard_normal(self.ambient_dim))


class Hyperbolic(ManifoldModel):
    kind = "Hyperbolic"
    tag = "h"

    def __init__(self, dim: int, curvature: float = -1.0):
        super().__init__(dim)
        if not curvature < 0:
            raise PreconditionError("hyperbolic curvature must be negative")
        self.kappa = float(curvature)
        self.R = 1.0 / math.sqrt(-self.kappa)

    @property
    def id(self):
        return f"h{self.dim}" if self.kappa == -1.0 else f"h{self.dim}:{self.kappa!r}"

    @property
    def ambient_dim(self):
        return self.dim + 1

    @property
    def conv(self):
        return INF

    @property
    def inj(self):
        return INF

    def jacobi_speed(self, r):
        return self.R * math.sinh(abs(r) / self.R)

    @staticmethod
    def _minkowski(u, v):
        return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)

    def _inner(self, x, u, v):
        return self._minkowski(u, v)

    def _normalize(self, x):
        x = np.array(x, dtype=float)
        spatial = x[..., 1:]
        x[..., 0] = np.sqrt(self.R**2 + np.sum(spatial * spatial, axis=-1))
        return x

    def point(self, coords):
        arr = np.asarray(coords, dtype=float)
        if arr.shape == (self.dim,):
            # spatial coordinates only: lift to the upper sheet
            arr = np.concatenate([[0.0], arr])
        return super().point(arr)

    def _project(self, x, w):
        return w + (self._minkowski(x, w)[..., None] / self.R**2) * x

    def _dist(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        diff = a - b
        q = np.maximum(self._minkowski(diff, diff), 0.0)
        return 2.0 * self.R * np.arcsinh(np.sqrt(q) / (2.0 * self.R))

    def _exp(self, x, v, t):
        t = np.asarray(t, dtype=float)[..., None]
        s = t / self.R
        return self._normalize(np.cosh(s) * x + self.R * np.sinh(s) * v)

    def _log(self, x, y):
        v = y + (self._minkowski(x, y)[..., None] / self.R**2) * x
        n = np.sqrt(np.maximum(self._minkowski(v, v), 0.0))[..., None]
        return v / n

    def _on_manifold_residual(self, x):
        return abs(float(self._minkowski(x, x)) + self.R**2)

    def origin(self):
        return self.point(np.zeros(self.dim))

    def random_point(self, rng, scale=1.5):
        return self.point(rng.uniform(-scale, scale, self.dim))


class FlatTorus(ManifoldModel):
    """R^n / Z^n with the flat metric; every geodesic of rational slope closes up."""

    kind = "FlatTorus"
    tag = "t"

    @property
    def conv(self):
        return Radius(Fraction(1, 4))

    @property
    def inj(self):
        return Radius(Fraction(1, 2))

    @property
    def two_point_homogeneous(self):
        # homogeneous but not isotropic; balls below conv are Euclidean balls
        return False

    def _normalize(self, x):
        y = np.mod(x, 1.0)
        # np.mod maps tiny negatives to exactly 1.0
        return np.where(y >= 1.0, 0.0, y)

    @staticmethod
    def _wrap(diff):
        return diff - np.round(diff)

    def _dist(self, a, b):
        return np.linalg.norm(self._wrap(np.asarray(b) - np.asarray(a)), axis=-1)

    def _exp(self, x, v, t):
        t = np.asarray(t, dtype=float)[..., None]
        return self._normalize(x + t * v)

    def _log(self, x, y):
        diff = self._wrap(y - x)
        return diff / np.linalg.norm(diff, axis=-1, keepdims=True)

    def origin(self):
        return self.point(np.zeros(self.dim))

    def random_point(self, rng, scale=None):
        return self.point(rng.uniform(0.0, 1.0, self.dim))


_MODEL_ID = re.compile(r"^(?P<tag>[esht])(?P<dim>\d+)(?::(?P<param>[-+0-9.eE]+))?$")

_FACTORIES: dict[str, Callable[..., ManifoldModel]] = {
    "e": Euclidean,
    "s": Sphere,
    "h": Hyperbolic,
    "t": FlatTorus,
}


def model_from_id(model_id: str) -> ManifoldModel:
    """Parse ``e2``, ``s3``, ``s2:2.5`` (radius), ``h2:-0.25`` (curvature), ``t2``."""
    m = _MODEL_ID.match(model_id.strip().lower())
    if not m:
        raise PreconditionError(f"unknown model id {model_id!r}")
    tag, dim, param = m.group("tag"), int(m.group("dim")), m.group("param")
    if param is None:
        return _FACTORIES[tag](dim)
    if tag not in "sh":
        raise PreconditionError(f"model {tag!r} takes no parameter")
    return _FACTORIES[tag](dim, float(param))


def point_from_json(obj: dict) -> Point:
    model = model_from_id(obj["model"])
    return model.point(obj["coords"])
