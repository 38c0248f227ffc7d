import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mm_lab import core
from mm_lab.errors import (
    HostMismatch,
    NegativeWeight,
    NotNormalized,
    TooLarge,
    TriangleViolation,
)


def test_validate_minimal_two_point():
    s = core.validate_space({"labels": ["a", "b"], "dist": [[0, 1], [1, 0]],
                             "weight": [0.5, 0.5]})
    assert s.n == 2 and s.diam == 1.0


def test_validate_triangle_violation():
    with pytest.raises(TriangleViolation):
        core.validate_space({"labels": list("abc"),
                             "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
                             "weight": [1 / 3] * 3})


def test_validate_drops_zero_weight_points():
    s = core.validate_space({"labels": list("abc"),
                             "dist": [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
                             "weight": [0.5, 0.5, 0.0]})
    assert s.n == 2 and s.labels == ("a", "b")


def test_validate_weight_errors():
    with pytest.raises(NegativeWeight):
        core.validate_space({"labels": ["a", "b"], "dist": [[0, 1], [1, 0]],
                             "weight": [1.5, -0.5]})
    with pytest.raises(NotNormalized):
        core.validate_space({"labels": ["a", "b"], "dist": [[0, 1], [1, 0]],
                             "weight": [0.6, 0.6]})


@given(st.integers(2, 7), st.integers(0, 10_000))
def test_validate_idempotent(n, seed):
    s = core.random_metric_space(n, seed=seed)
    again = core.validate_space(s)
    assert np.array_equal(again.dist, s.dist)
    assert np.array_equal(again.weight, s.weight)
    assert again.labels == s.labels


@given(st.integers(2, 7), st.integers(0, 10_000))
def test_pushforward_preserves_mass(n, seed):
    s = core.random_metric_space(n, seed=seed)
    f = core.as_lip(s, s.dist[0], lip_const=1.0)
    push = core.pushforward(s, f)
    assert push.total_mass == pytest.approx(1.0, abs=1e-12)


def test_pushforward_examples():
    s = core.validate_space({"labels": ["a", "b"], "dist": [[0, 2], [2, 0]],
                             "weight": [0.5, 0.5]})
    push = core.pushforward(s, core.as_lip(s, [0.0, 2.0]))
    assert list(push.positions) == [0.0, 2.0]

    const = core.pushforward(s, core.as_lip(s, [1.0, 1.0]))
    assert const.n == 1 and const.masses[0] == pytest.approx(1.0)

    u4 = core.validate_space({"labels": list("abcd"),
                              "dist": (np.ones((4, 4)) - np.eye(4)).tolist(),
                              "weight": [0.25] * 4})
    merged = core.pushforward(u4, core.as_lip(u4, [0.0, 0.0, 1.0, 1.0]))
    assert merged.n == 2
    assert list(merged.masses) == [0.5, 0.5]

    with pytest.raises(HostMismatch):
        core.pushforward(s, core.LipFunction(values=np.zeros(3), lip_const=1.0))


def test_mm_isomorphic_relabel():
    s = core.random_metric_space(5, seed=3)
    perm = [4, 2, 0, 1, 3]
    relabeled = core.validate_space({
        "labels": [s.labels[i] for i in perm],
        "dist": s.dist[np.ix_(perm, perm)],
        "weight": s.weight[perm],
    })
    ok, wit = core.mm_isomorphic(s, relabeled)
    assert ok
    inv = np.argsort(perm)
    assert np.allclose(s.dist, relabeled.dist[np.ix_(wit, wit)])


def test_mm_isomorphic_rejects():
    a = core.validate_space({"labels": ["a", "b"], "dist": [[0, 1], [1, 0]],
                             "weight": [0.5, 0.5]})
    b = core.validate_space({"labels": ["a", "b"], "dist": [[0, 2], [2, 0]],
                             "weight": [0.5, 0.5]})
    c = core.validate_space({"labels": ["a", "b"], "dist": [[0, 1], [1, 0]],
                             "weight": [0.25, 0.75]})
    assert core.mm_isomorphic(a, b)[0] is False
    assert core.mm_isomorphic(a, c)[0] is False


def test_mm_isomorphic_equivalence_properties():
    rng = np.random.default_rng(0)
    for trial in range(6):
        x = core.random_metric_space(4, seed=100 + trial)
        assert core.mm_isomorphic(x, x)[0]
        perm = rng.permutation(4)
        y = core.validate_space({"labels": [f"p{i}" for i in range(4)],
                                 "dist": x.dist[np.ix_(perm, perm)],
                                 "weight": x.weight[perm]})
        ok_xy, _ = core.mm_isomorphic(x, y, tol=1e-9)
        ok_yx, _ = core.mm_isomorphic(y, x, tol=1e-9)
        assert ok_xy and ok_yx
        z = core.random_metric_space(4, seed=500 + trial)
        # transitivity with accumulated tolerance
        if core.mm_isomorphic(x, y, tol=1e-9)[0] and core.mm_isomorphic(y, z, tol=1e-9)[0]:
            assert core.mm_isomorphic(x, z, tol=2e-9)[0]


def test_mm_isomorphic_too_large():
    big = core.random_metric_space(11, seed=0)
    with pytest.raises(TooLarge):
        core.mm_isomorphic(big, big)


def test_json_round_trip_bit_exact():
    s = core.random_metric_space(6, seed=9)
    blob = json.dumps(core.space_to_json(s))
    back = core.space_from_json(json.loads(blob))
    assert np.array_equal(back.dist, s.dist)
    assert np.array_equal(back.weight, s.weight)
    assert back.labels == s.labels


def test_json_coords_derivation():
    pts = [[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]
    s = core.space_from_json({"labels": list("abc"), "coords": pts,
                              "weight": [1 / 3] * 3, "metric": "euclidean"})
    assert s.dist[1, 2] == pytest.approx(5.0)

    sph = core.space_from_json({
        "labels": ["n", "s"],
        "coords": [[0.0, 1.0], [0.0, -1.0]],
        "weight": [0.5, 0.5],
        "metric": "geodesic_sphere",
        "radius": 1.0,
    })
    assert sph.dist[0, 1] == pytest.approx(np.pi)


def test_lip_constant_and_projection():
    s = core.validate_space({"labels": ["a", "b"], "dist": [[0, 2], [2, 0]],
                             "weight": [0.5, 0.5]})
    assert core.lip_constant(s, [0.0, 4.0]) == pytest.approx(2.0)
    v = core.project_to_lip1(s, [0.0, 4.0])
    assert core.lip_constant(s, v) <= 1.0 + 1e-12


def test_mcshane_extend_agrees_on_domain():
    s = core.random_metric_space(6, seed=2)
    dom = [0, 2, 4]
    vals = core.project_to_lip1(s, np.sin(np.arange(6.0)))[dom]
    ext = core.mcshane_extend(s, dom, vals)
    assert core.lip_constant(s, ext) <= 1.0 + 1e-9
    assert np.allclose(ext[dom], vals)
