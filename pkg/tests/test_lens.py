import math

import numpy as np
import pytest

from rigidity_lab.errors import DiagnosticsError, PreconditionError
from rigidity_lab.lens import lens_diameter, lens_profile, rbar
from rigidity_lab.manifolds import Euclidean, FlatTorus, Hyperbolic, Point, Sphere, model_from_id


def _centres(M, t):
    x = M.origin()
    u = M.tangent_basis(x)[0]
    return x, Point(M.id, M._exp(x.coords, u, t))


def _closed_form(M, r, t):
    """Lens diameter for constant curvature: the two corner points of the lens."""
    if isinstance(M, (Euclidean, FlatTorus)):
        return math.sqrt(4 * r * r - t * t)
    if isinstance(M, Sphere):
        R = M.R
        return 2 * R * math.acos(math.cos(r / R) / math.cos(t / (2 * R)))
    R = M.R
    return 2 * R * math.acosh(math.cosh(r / R) / math.cosh(t / (2 * R)))


@pytest.mark.parametrize("t, expected", [(2.0, 0.0), (0.0, 2.0), (math.sqrt(3), 1.0)])
def test_euclidean_examples(t, expected):
    E = Euclidean(2)
    est = lens_diameter(E, *_centres(E, t), 1.0)
    assert abs(est.estimate - expected) <= est.error + 1e-12
    assert est.error <= 1e-9


@pytest.mark.parametrize("model_id, r", [
    ("e2", 1.0), ("e3", 0.7), ("s2", 0.9), ("s3", 0.5), ("s2:2.5", 1.5),
    ("h2", 0.8), ("h3:-0.25", 1.2), ("t2", 0.2), ("t3", 0.15),
])
def test_closed_form_oracle(model_id, r):
    M = model_from_id(model_id)
    for frac in (0.1, 0.5, 0.9, 0.99):
        t = frac * 2 * r
        est = lens_diameter(M, *_centres(M, t), r, budget=64)
        exact = _closed_form(M, r, t)
        assert est.estimate - 1e-12 <= exact <= est.upper + 1e-12
        assert est.error <= 1e-9


def test_estimate_is_attained_lower_bound():
    S = Sphere(2)
    est = lens_diameter(S, *_centres(S, 0.6), 0.5, budget=400)
    assert est.sampled <= est.estimate <= est.upper
    value, error = est
    assert (value, error) == (est.estimate, est.error)


def test_scaling_in_the_plane():
    E = Euclidean(2)
    res = rbar(E, 2.0, tol=1e-6)
    assert res.lo <= 2 * math.sqrt(3) <= res.hi


def _dense_rbar(r, n=200_001):
    """Grid solution of g(t) = r on the unit sphere, from the corner-point formula."""
    t = np.linspace(r, 2 * r, n)
    g = 2 * np.arccos(np.cos(r) / np.cos(t / 2))
    k = int(np.argmin(np.abs(g - r)))
    return t[k], t[1] - t[0]


def test_sphere_rbar_against_grid():
    res = rbar(Sphere(2), 0.5, tol=1e-6)
    assert 0.5 < res.lo < res.hi < 1.0
    grid, step = _dense_rbar(0.5)
    assert res.lo - step <= grid <= res.hi + step


@pytest.mark.parametrize("model_id, r", [("s2", 0.5), ("h2", 0.7), ("t2", 0.2), ("s3", 0.4)])
def test_rbar_encloses_closed_form_root(model_id, r):
    M = model_from_id(model_id)
    res = rbar(M, r, tol=1e-8)
    if isinstance(M, FlatTorus):
        root = math.sqrt(3) * r
    elif isinstance(M, Sphere):
        root = 2 * math.acos(math.cos(r) / math.cos(r / 2))
    else:
        root = 2 * math.acosh(math.cosh(r) / math.cosh(r / 2))
    assert res.lo <= root <= res.hi
    assert res.width <= 1e-8
    assert r < res.lo and res.hi < 2 * r


def test_rbar_radius_interval_mode():
    E = Euclidean(2)
    res = rbar(E, 1.0, tol=1e-4, r_hi=1.00001, strict=False)
    for r in (1.0, 1.000005, 1.00001):
        assert res.lo <= math.sqrt(3) * r <= res.hi
    assert res.to_json()["r_hi"] == 1.00001


def test_rbar_strict_refuses_wide_enclosure():
    with pytest.raises(DiagnosticsError):
        rbar(Euclidean(2), 1.0, tol=1e-8, r_hi=1.001)


def test_rbar_json():
    doc = rbar(Euclidean(2), 1.0).to_json()
    lo, hi = doc["rbar"]
    assert lo <= math.sqrt(3) <= hi and doc["model"] == "e2"


def test_rbar_needs_homogeneous_model_and_valid_radius():
    with pytest.raises(PreconditionError):
        rbar(Sphere(2), 2.0)
    with pytest.raises(PreconditionError):
        rbar(Euclidean(2), 1.0, r_hi=0.5)


@pytest.mark.parametrize("model_id, frac", [(m, f) for m in ("s2", "s3", "t2")
                                            for f in (0.3, 0.6)])
def test_profile_invariants(model_id, frac):
    M = model_from_id(model_id)
    r = frac * float(M.conv)
    prof = lens_profile(M, r, samples=50, budget=64)
    assert prof.violations() == []
    assert len(prof.samples) == 52
    assert prof.samples[0][0] == 0.0 and prof.samples[-1][0] == 2 * r
    assert prof.tolerance <= 1e-9


def test_profile_detects_a_broken_law():
    prof = lens_profile(Euclidean(2), 1.0, samples=4, budget=16)
    rows = list(prof.samples)
    t, g, e = rows[2]
    rows[2] = (t, 2 * rows[1][1], e)
    broken = type(prof)(prof.r, rows, prof.model)
    assert any("increases" in v for v in broken.violations())


def test_profile_outputs():
    prof = lens_profile(Euclidean(2), 1.0, samples=3, budget=16)
    lines = prof.to_csv().splitlines()
    assert lines[0] == "t,g_estimate,error_bound"
    assert len(lines) == 6
    assert float(lines[1].split(",")[1]) == pytest.approx(2.0)
    svg = prof.to_svg()
    assert svg.startswith("<svg") and "polyline" in svg and "stroke-dasharray" in svg
    doc = prof.to_json()
    assert doc["samples"][0] == {"t": 0.0, "g_estimate": prof.samples[0][1],
                                 "error_bound": prof.samples[0][2]}


def test_separated_centres_rejected():
    E = Euclidean(2)
    with pytest.raises(PreconditionError):
        lens_diameter(E, *_centres(E, 2.5), 1.0)


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_nonpositive_radius_rejected(r):
    E = Euclidean(2)
    with pytest.raises(PreconditionError):
        lens_diameter(E, *_centres(E, 0.5), r)


def test_radius_at_conv_rejected():
    S = Sphere(2)
    with pytest.raises(PreconditionError):
        lens_diameter(S, *_centres(S, 0.5), math.pi / 2)


def test_deterministic_given_seed():
    H = Hyperbolic(2)
    a = lens_diameter(H, *_centres(H, 1.0), 0.9, seed=5)
    b = lens_diameter(H, *_centres(H, 1.0), 0.9, seed=5)
    assert a == b
