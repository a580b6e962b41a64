import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigidity_lab.errors import CutLocusError, ModelMismatchError, PreconditionError
from rigidity_lab.manifolds import (Euclidean, FlatTorus, Hyperbolic, Point, Sphere, SphereSpec,
                                    model_from_id, point_from_json)
from rigidity_lab.scalars import INF


def _limit(M):
    return 3.0 if M.inj is INF else float(M.inj)


@pytest.mark.parametrize("model_id, a, b, expected", [
    ("e2", [0, 0], [3, 4], 5.0),
    ("s2", [0, 0, 1], [0, 0, -1], math.pi),
    ("s2", [1, 0, 0], [0, 1, 0], math.pi / 2),
    ("t2", [0.1, 0.0], [0.9, 0.0], 0.2),
    ("t2", [0.0, 0.0], [0.5, 0.5], math.sqrt(0.5)),
    ("s2:2.5", [0, 0, 2.5], [0, 0, -2.5], 2.5 * math.pi),
])
def test_distance_examples(model_id, a, b, expected):
    M = model_from_id(model_id)
    assert M.distance(M.point(a), M.point(b)) == pytest.approx(expected, abs=1e-12)


def test_hyperbolic_distance_closed_form():
    H = Hyperbolic(2)
    x = H.origin()
    y = H.point([math.sinh(1.3), 0.0])
    assert H.distance(x, y) == pytest.approx(1.3, abs=1e-12)


def test_torus_log_takes_the_short_way():
    T = FlatTorus(2)
    v = T.log_map(T.point([0.0, 0.0]), T.point([0.6, 0.0]))
    assert np.allclose(v.components, [-1.0, 0.0])


def test_torus_exp_wraps():
    T = FlatTorus(2)
    x = T.point([0.9, 0.5])
    y = T.exp_map(x, T.tangent(x, [1.0, 0.0]), 0.3)
    assert np.allclose(y.coords, [0.2, 0.5])


def test_sphere_exp_quarter_turn():
    S = Sphere(2)
    x = S.origin()
    y = S.exp_map(x, S.tangent(x, [1.0, 0.0, 0.0]), math.pi / 2)
    assert np.allclose(y.coords, [1.0, 0.0, 0.0])


@pytest.mark.parametrize("model_id, conv, inj", [
    ("e2", INF, INF), ("h3:-0.25", INF, INF),
    ("s2", math.pi / 2, math.pi), ("s2:2.5", 2.5 * math.pi / 2, 2.5 * math.pi),
    ("t2", 0.25, 0.5), ("t3", 0.25, 0.5),
])
def test_radius_constants(model_id, conv, inj):
    M = model_from_id(model_id)
    if conv is INF:
        assert M.conv is INF and M.inj is INF
    else:
        assert float(M.conv) == pytest.approx(conv, rel=1e-15)
        assert float(M.inj) == pytest.approx(inj, rel=1e-15)
        assert M.conv == M.inj.half()


def test_triangle_inequality(model):
    rng = np.random.default_rng(11)
    n = 10_000
    pts = np.stack([model.random_point(rng).coords for _ in range(3 * n)]).reshape(n, 3, -1)
    a, b, c = pts[:, 0], pts[:, 1], pts[:, 2]
    assert np.all(model._dist(a, b) + model._dist(b, c) >= model._dist(a, c) - 1e-10)


def test_distance_symmetric_and_zero(model):
    rng = np.random.default_rng(12)
    for _ in range(50):
        x, y = model.random_point(rng), model.random_point(rng)
        assert model.distance(x, y) == pytest.approx(model.distance(y, x), abs=1e-12)
        assert model.distance(x, x) == pytest.approx(0.0, abs=1e-7)


def test_exp_log_round_trip(model):
    rng = np.random.default_rng(13)
    limit = 0.95 * _limit(model)
    for _ in range(200):
        x = model.random_point(rng)
        t = rng.uniform(1e-3, limit)
        y = model.exp_map(x, model.random_unit_tangent(x, rng), t)
        assert model.distance(x, y) == pytest.approx(t, abs=1e-9)
        z = model.exp_map(x, model.log_map(x, y), t)
        assert model.distance(y, z) <= 1e-9


def test_geodesics_are_unit_speed(model):
    rng = np.random.default_rng(14)
    limit = _limit(model)
    x = model.random_point(rng)
    v = model.random_unit_tangent(x, rng).components
    ts = np.linspace(0.0, 0.99 * limit, 40)
    pts = model._exp(x.coords, v, ts)
    steps = model._dist(pts[:-1], pts[1:])
    assert np.allclose(steps, np.diff(ts), atol=1e-10)


def test_tangent_basis_orthonormal(model):
    rng = np.random.default_rng(15)
    for _ in range(20):
        x = model.random_point(rng)
        B = model.tangent_basis(x)
        gram = np.array([[model._inner(x.coords, u, w) for w in B] for u in B])
        assert np.allclose(gram, np.eye(model.dim), atol=1e-12)
        if not isinstance(model, (Euclidean, FlatTorus)):
            # ambient models: tangent vectors are orthogonal to the position vector
            assert np.allclose([model._inner(x.coords, x.coords, u) for u in B], 0.0, atol=1e-9)


def test_hyperbolic_basis_stays_tangent_far_out():
    H = Hyperbolic(2)
    x = H.point([67.7, 2.2])
    B = H.tangent_basis(x)
    assert np.allclose(H._minkowski(x.coords[None], B), 0.0, atol=1e-12)


def test_torus_period_one():
    T = FlatTorus(2)
    x = T.point([0.3, 0.7])
    for v in ([1.0, 0.0], [0.0, 1.0]):
        y = T.exp_map(x, T.tangent(x, v), 1.0)
        assert T.distance(x, y) == pytest.approx(0.0, abs=1e-12)


def test_sphere_great_circle_closes():
    S = Sphere(2, 2.5)
    x = S.origin()
    y = S.exp_map(x, S.random_unit_tangent(x, np.random.default_rng(1)), 2 * math.pi * 2.5)
    assert S.distance(x, y) == pytest.approx(0.0, abs=1e-7)


def test_log_at_cut_locus_raises():
    S = Sphere(2)
    with pytest.raises(CutLocusError):
        S.log_map(S.point([0, 0, 1]), S.point([0, 0, -1]))
    T = FlatTorus(2)
    with pytest.raises(CutLocusError):
        T.log_map(T.point([0.0, 0.0]), T.point([0.5, 0.0]))


def test_log_of_coincident_points_raises():
    E = Euclidean(2)
    with pytest.raises(PreconditionError):
        E.log_map(E.origin(), E.origin())


def test_strict_exp_requires_unit_vector():
    E = Euclidean(2)
    x = E.origin()
    with pytest.raises(PreconditionError):
        E.exp_map(x, E.tangent(x, [2.0, 0.0]), 1.0, strict=True)
    y = E.exp_map(x, E.tangent(x, [2.0, 0.0]), 1.0)
    assert np.allclose(y.coords, [1.0, 0.0])


def test_zero_tangent_rejected():
    E = Euclidean(2)
    x = E.origin()
    with pytest.raises(PreconditionError):
        E.exp_map(x, E.tangent(x, [0.0, 0.0]), 1.0)


def test_models_do_not_mix():
    E, S = Euclidean(3), Sphere(2)
    with pytest.raises(ModelMismatchError):
        S.distance(S.origin(), E.origin())


def test_point_validation():
    with pytest.raises(PreconditionError):
        Euclidean(2).point([1.0, 2.0, 3.0])
    with pytest.raises(PreconditionError):
        Sphere(2).point([0.0, 0.0, 0.0])


@pytest.mark.parametrize("bad", ["x2", "s1", "h2:1", "e2:3", "q"])
def test_model_ids_validated(bad):
    with pytest.raises(PreconditionError):
        model_from_id(bad)


@pytest.mark.parametrize("model_id", ["e2", "e3", "s2", "s3", "s2:2.5", "h2", "h3:-0.25", "t2"])
def test_model_id_round_trip(model_id):
    assert model_from_id(model_id).id == model_id


def test_point_json_round_trip():
    S = Sphere(2)
    p = S.point([1.0, 2.0, 2.0])
    q = point_from_json(p.to_json())
    assert q.model == p.model and np.allclose(q.coords, p.coords)


def test_sphere_path_stays_on_sphere(model):
    rng = np.random.default_rng(16)
    c = model.random_point(rng)
    r = 0.4 * _limit(model)
    spec = SphereSpec(c, r)
    a = model.sphere_point(spec, model.random_unit_tangent(c, rng))
    b = model.sphere_point(spec, model.random_unit_tangent(c, rng))
    path = model.sphere_path(spec, a, b)
    assert model.distance(path(0.0), a) <= 1e-9
    assert model.distance(path(1.0), b) <= 1e-9
    for p in path.sample(25):
        assert model.distance(c, p) == pytest.approx(r, abs=1e-9)


def test_sphere_path_rejects_off_sphere_points():
    E = Euclidean(2)
    spec = SphereSpec(E.origin(), 1.0)
    with pytest.raises(PreconditionError):
        E.sphere_path(spec, E.point([1.0, 0.0]), E.point([0.0, 1.1]))


def test_sphere_beyond_inj_rejected():
    S = Sphere(2)
    with pytest.raises(CutLocusError):
        S.sphere_point(SphereSpec(S.origin(), 4.0), S.random_unit_tangent(S.origin(),
                                                                          np.random.default_rng(0)))


def test_nonpositive_sphere_radius_rejected():
    with pytest.raises(PreconditionError):
        SphereSpec(Euclidean(2).origin(), 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(0.0, 2 * math.pi))
def test_sphere_exp_matches_rotation(t, angle):
    S = Sphere(2)
    x = S.origin()
    v = S.tangent(x, [math.cos(angle), math.sin(angle), 0.0])
    y = S.exp_map(x, v, t)
    expected = [math.sin(t) * math.cos(angle), math.sin(t) * math.sin(angle), math.cos(t)]
    assert np.allclose(y.coords, expected, atol=1e-12)


def test_point_model_tag():
    assert Point("e2", np.zeros(2)).model == "e2"
