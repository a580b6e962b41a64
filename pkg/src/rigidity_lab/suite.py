"""Desk-scale invariant suites, run per model by ``verify-suite``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError
from .intersections import intersect_predicate, intersect_witness
from .lens import lens_profile, rbar, rbar_supported
from .manifolds import ManifoldModel, Point, Sphere
from .scalars import INF

DEFAULT_SMALL_FACTOR = Fraction(2, 3)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def to_json(self) -> dict:
        # wall time is left out so that reruns are byte-identical
        return {"suite": self.name, "passed": self.passed, "detail": self.detail}


def _pairs_below(M, rng, n, limit):
    """Random pairs (x, y) with d(x, y) < limit."""
    xs, ys = [], []
    for _ in range(n):
        x = M.random_point(rng)
        t = rng.uniform(0, limit)
        ys.append(Point(M.id, M._exp(x.coords, M.random_unit_tangent(x, rng).components, t)))
        xs.append(x)
    return xs, ys


def _radius_scale(M) -> float:
    return 1.0 if M.conv is INF else float(M.conv)


def triangle_inequality(M, rng, n=1000):
    pts = np.stack([M.random_point(rng).coords for _ in range(3 * n)]).reshape(n, 3, -1)
    a, b, c = pts[:, 0], pts[:, 1], pts[:, 2]
    slack = M._dist(a, b) + M._dist(b, c) - M._dist(a, c)
    worst = float(slack.min())
    return worst >= -1e-10, f"min slack {worst:.3g} over {n} triples"


def exp_log_round_trip(M, rng, n=500):
    limit = 0.9 * (3.0 if M.inj is INF else float(M.inj))
    xs, ys = _pairs_below(M, rng, n, limit)
    worst = 0.0
    for x, y in zip(xs, ys):
        d = M.distance(x, y)
        if d < 1e-9:
            continue
        z = M.exp_map(x, M.log_map(x, y), d)
        worst = max(worst, M.distance(z, y))
    return worst <= 1e-9, f"max round-trip error {worst:.3g}"


def radius_constants(M, rng):
    ok = M.conv <= M.inj.half() if M.inj is not INF else True
    return bool(ok), f"conv = {M.conv}, inj = {M.inj}"


def geodesic_arclength(M, rng, n=300):
    limit = 3.0 if M.inj is INF else float(M.inj)
    worst = 0.0
    for _ in range(n):
        x = M.random_point(rng)
        v = M.random_unit_tangent(x, rng).components
        s, t = sorted(rng.uniform(-limit, limit, 2))
        if t - s > limit:
            s = t - limit
        p, q = M._exp(x.coords, v, s), M._exp(x.coords, v, t)
        worst = max(worst, abs(float(M._dist(p, q)) - (t - s)))
    return worst <= 1e-10, f"max arclength defect {worst:.3g}"


def _radii(M, rng):
    scale = _radius_scale(M)
    return rng.uniform(0.02, 0.98) * scale, rng.uniform(0.02, 0.98) * scale


def predicate_witness_agreement(M, rng, n=200):
    bad, worst = 0, 0.0
    scale = _radius_scale(M)
    for _ in range(n):
        r1, r2 = _radii(M, rng)
        x1 = M.random_point(rng)
        x2 = Point(M.id, M._exp(x1.coords, M.random_unit_tangent(x1, rng).components,
                                rng.uniform(0, 2 * scale)))
        pred = intersect_predicate(M, x1, r1, x2, r2)
        z = intersect_witness(M, x1, r1, x2, r2)
        if pred != (z is not None):
            bad += 1
        elif z is not None:
            worst = max(worst, abs(M.distance(x1, z) - r1), abs(M.distance(x2, z) - r2))
    return bad == 0 and worst <= 1e-7, f"{bad} disagreements, max residual {worst:.3g}"


def small_lemma_check(M: ManifoldModel, rng, n=200, factor=DEFAULT_SMALL_FACTOR):
    """``d(a,b) < r`` iff the r-spheres meet and the (2r, r) spheres do not, for r < factor*conv.

    The r-sphere test uses :func:`intersect_predicate`. The 2r sphere can
    exceed conv, so its test asks :func:`intersect_witness` for an actual common
    point.
    """
    scale = _radius_scale(M)
    bad = 0
    for _ in range(n):
        r = rng.uniform(0.05, 0.999) * float(factor) * scale
        a = M.random_point(rng)
        t = rng.uniform(0, min(4 * r, 0.99 * (3 * scale if M.inj is INF else float(M.inj))))
        b = Point(M.id, M._exp(a.coords, M.random_unit_tangent(a, rng).components, t))
        d = M.distance(a, b)
        if abs(d - r) < 1e-7 or abs(d - 3 * r) < 1e-7:
            continue
        meet = intersect_predicate(M, a, r, b, r)
        far_meet = intersect_witness(M, a, 2 * r, b, r) is not None
        if (d < r) != (meet and not far_meet):
            bad += 1
    return bad == 0, f"{bad} mismatches over {n} pairs (factor {factor})"


def lens_profile_law(M, rng, samples=12):
    scale = _radius_scale(M)
    out = []
    for frac in (0.3, 0.6):
        r = frac * scale
        prof = lens_profile(M, r, samples=samples, budget=64, seed=int(rng.integers(1 << 30)))
        out += prof.violations()
    return not out, "; ".join(out[:3]) or f"{samples} samples at r in {{0.3, 0.6}} x scale"


def rbar_bracket(M, rng):
    if not rbar_supported(M):
        return True, "skipped: not two-point homogeneous"
    r = 0.4 * _radius_scale(M)
    res = rbar(M, r, tol=1e-6)
    ok = r < res.lo and res.hi < 2 * r and res.width <= 1e-6
    return ok, f"r-bar({r:.6g}) in [{res.lo:.9f}, {res.hi:.9f}]"


def example4(M, rng):
    if not (isinstance(M, Sphere) and M.dim == 2 and M.R == 1.0):
        return True, "skipped: only on s2"
    from .counterexamples import example4_demo
    rep = example4_demo()
    return rep["all_cells_confirm"], f"{len(rep['cells'])} cells, all empty with inequalities valid"


SUITES = [
    ("triangle-inequality", triangle_inequality),
    ("exp-log-round-trip", exp_log_round_trip),
    ("conv-inj-constants", radius_constants),
    ("geodesic-arclength", geodesic_arclength),
    ("predicate-witness-agreement", predicate_witness_agreement),
    ("small-distance-lemma", small_lemma_check),
    ("lens-profile-law", lens_profile_law),
    ("rbar-bracket", rbar_bracket),
    ("example4-regression", example4),
]


def run_suite(M: ManifoldModel, seed: int = 0, only: list | None = None) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in SUITES:
        if only and name not in only:
            continue
        start = time.perf_counter()
        try:
            passed, detail = fn(M, rng)
        except PreconditionError as exc:
            passed, detail = False, f"precondition error: {exc}"
        results.append(SuiteResult(name, bool(passed), detail, time.perf_counter() - start))
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'suite'.ljust(width)}  result  detail"]
    for r in results:
        lines.append(f"{r.name.ljust(width)}  {'PASS' if r.passed else 'FAIL'}    {r.detail}")
    return "\n".join(lines)

