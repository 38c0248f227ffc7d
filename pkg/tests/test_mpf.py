import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mm_lab import mpf
from mm_lab.errors import ArityMismatch, MMLabError, NotIncreasing


def test_eval_spot_values():
    assert mpf.builtin("fp:2")(3.0, 4.0) == pytest.approx(5.0)
    assert mpf.builtin("fexp")(0.0, 0.7) == pytest.approx(0.7)
    h1 = mpf.builtin("h1")
    assert h1(2.5) == pytest.approx(1.5)
    assert h1(5.0) == pytest.approx(1.0)
    assert mpf.builtin("falpha:0.5")(4.0, 9.0) == pytest.approx(5.0)
    assert mpf.builtin("fpq:2,4")(1.0, 1.0) == pytest.approx(2.0 ** 0.25)
    assert mpf.builtin("fcyc")(1.0, 2.0, 3.0) == pytest.approx(5.0)
    assert mpf.builtin("petrik")(1.0, 1.0) == pytest.approx(12.0 / 7.0, abs=1e-9)
    g53 = mpf.builtin("gn3:5")
    assert g53(2.0, 0.0) == pytest.approx(2.0)


def test_eval_arity_and_domain():
    with pytest.raises(ArityMismatch):
        mpf.eval_mpf(mpf.builtin("fp:2"), [np.array(1.0)])
    with pytest.raises(MMLabError):
        mpf.eval_mpf(mpf.builtin("fp:2"), [np.array(-1.0), np.array(0.0)])


def test_mulholland_matches_closed_forms():
    grid = np.linspace(0.0, 5.0, 20)
    S, T = np.meshgrid(grid, grid)
    m2 = mpf.make_mulholland(mpf.PhiSpec("power", {"p": 2.0}))
    gap = np.abs(mpf.eval_mpf(m2, [S, T]) - mpf.eval_mpf(mpf.builtin("fp:2"), [S, T]))
    assert gap.max() < 1e-9

    mexp = mpf.make_mulholland(mpf.PhiSpec("expm1"))
    gap = np.abs(mpf.eval_mpf(mexp, [S, T]) - mpf.eval_mpf(mpf.builtin("fexp"), [S, T]))
    assert gap.max() < 1e-9

    mq = mpf.builtin("mul:quad")
    assert mq(1.0, 1.0) == pytest.approx(math.sqrt(7.0) - 1.0, abs=1e-9)


def test_mulholland_rejects_nonincreasing_generator():
    bad = mpf.PhiSpec("piecewise", {
        "breaks": (1.0,),
        "segments": (mpf.linear(1.0), mpf.linear(-0.5, 1.5)),
    })
    with pytest.raises(NotIncreasing):
        mpf.make_mulholland(bad)


def test_combine_reconstructs_gallery_members():
    grid = np.linspace(0.0, 6.0, 25)
    S, T = np.meshgrid(grid, grid)

    alpha = mpf.combine("add_f", [mpf.power_sum(0.5, arity=1)] * 2)
    want = mpf.eval_mpf(mpf.builtin("falpha:0.5"), [S, T])
    assert np.abs(mpf.eval_mpf(alpha, [S, T]) - want).max() < 1e-12
    assert alpha(4.0, 9.0) == pytest.approx(5.0)

    fpq = mpf.combine("compose", [mpf.power_sum(0.5, arity=1), mpf.lp(2.0), None, None])
    want = mpf.eval_mpf(mpf.builtin("fpq:2,4"), [S, T])
    assert np.abs(mpf.eval_mpf(fpq, [S, T]) - want).max() < 1e-12

    fn3 = mpf.builtin("fn1:3")
    gn = mpf.combine("add_f", [fn3, fn3])
    want = mpf.eval_mpf(mpf.builtin("gn1:3"), [S, T])
    assert np.abs(mpf.eval_mpf(gn, [S, T]) - want).max() < 1e-12

    both = mpf.combine("add_F", [mpf.lp(1.0), mpf.lp(2.0)])
    assert both(3.0, 4.0) == pytest.approx(12.0)

    with pytest.raises(ArityMismatch):
        mpf.combine("add_F", [mpf.lp(2.0), mpf.lp(2.0, arity=3)])


def test_triplet_falsifier_rejects_squaring():
    v = mpf.check_triangle_triplets(mpf.builtin("sq"), samples=2000, seed=0)
    assert not v.passed
    (a, b, c), = [v.counterexample["triplets"][k] for k in range(1)]
    fa, fb, fc = v.counterexample["values"]
    assert fa > fb + fc + 1e-9 or fb > fa + fc + 1e-9 or fc > fa + fb + 1e-9
    assert fa == pytest.approx(a * a)


def test_triplet_falsifier_accepts_minkowski_family():
    for token in ("fp:1", "fp:2", "fp:inf", "h1"):
        v = mpf.check_triangle_triplets(mpf.builtin(token), samples=10_000, seed=1)
        assert v.passed, (token, v.counterexample)


def test_dip_is_metric_preserving_but_not_isotone():
    dip = mpf.builtin("dip")
    assert mpf.check_triangle_triplets(dip, samples=20_000, seed=2).passed
    # not isotone: grows to 2 then drops to 1
    assert dip(1.0, 1.0) > dip(3.0, 3.0)
    # but both axis sections are nondecreasing
    grid = np.linspace(0.0, 5.0, 201)
    vals_s = mpf.eval_mpf(dip, [grid, np.zeros_like(grid)])
    vals_t = mpf.eval_mpf(dip, [np.zeros_like(grid), grid])
    assert (np.diff(vals_s) >= -1e-12).all()
    assert (np.diff(vals_t) >= -1e-12).all()


def test_defect_tables():
    rep = mpf.defect_table(mpf.builtin("fp:2"), D=4.0, h=1 / 32, probe=8.0)
    assert rep.sup_defect == pytest.approx(0.0, abs=1e-12)

    rep = mpf.defect_table(mpf.builtin("gn3:5"), D=4.0, h=1 / 32, probe=16.0)
    i2 = int(round(2.0 * 32))
    assert rep.table[i2, 0] == pytest.approx(1.0, abs=1e-9)
    assert rep.table.min() >= -1e-9

    rep = mpf.defect_table(mpf.builtin("fn1:4"), D=4.0, h=1 / 64, probe=8.0)
    assert rep.table[int(round(2.0 * 64))] == pytest.approx(0.25, abs=1e-9)

    # off-grid breakpoints are caught by the golden refinement
    rep = mpf.defect_table(mpf.builtin("fn1:3"), D=4.0, h=1 / 64, probe=8.0)
    assert rep.table[int(round(2.0 * 64))] == pytest.approx(1.0 / 3.0, abs=1e-6)


def test_classifier_reproduces_separations():
    n_list = (1, 2, 4, 8)
    D_list = (4.0,)
    expected = {
        "const:fp:2": (True, True, True, True, True),
        "gn1": (False, True, True, True, True),
        "gn2": (False, False, True, True, True),
        "gn3": (False, False, False, False, True),
    }
    for token, want in expected.items():
        v = mpf.classify_sequence(mpf.family(token), mpf.family_limit(token),
                                  D_list=D_list, n_list=n_list)
        got = tuple(v.conditions[k] for k in (1, 2, 3, 4, 5))
        assert got == want, (token, got, v.evidence)
        chain = [v.conditions[k] for k in (1, 2, 3, 4, 5)]
        assert all(chain[i] <= chain[i + 1] for i in range(4))
        assert v.converges_uniformly


_GALLERY_SAMPLED = ["fp:1", "fp:2", "fp:inf", "fexp", "falpha:0.5", "fpq:2,4",
                    "mul:sinh", "mul:quad", "petrik", "h1", "h2"]


@given(st.sampled_from(_GALLERY_SAMPLED), st.integers(0, 400))
def test_lipschitz_like_bound_on_samples(token, seed):
    # |F(s) - F(s')| <= F(|s - s'|) coordinatewise, on random pairs
    F = mpf.builtin(token)
    rng = np.random.default_rng(seed)
    a = rng.random((64, F.arity)) * 6.0
    b = rng.random((64, F.arity)) * 6.0
    fa = mpf.eval_mpf(F, list(a.T))
    fb = mpf.eval_mpf(F, list(b.T))
    fd = mpf.eval_mpf(F, list(np.abs(a - b).T))
    assert (np.abs(fa - fb) <= fd + 1e-9).all()


@given(st.sampled_from(_GALLERY_SAMPLED), st.integers(0, 400))
def test_doubling_bound_on_samples(token, seed):
    # s_i <= 2 s'_i pointwise forces F(s) <= 2 F(s')
    F = mpf.builtin(token)
    rng = np.random.default_rng(seed)
    b = rng.random((64, F.arity)) * 4.0
    a = b * (2.0 * rng.random((64, F.arity)))
    fa = mpf.eval_mpf(F, list(a.T))
    fb = mpf.eval_mpf(F, list(b.T))
    assert (fa <= 2.0 * fb + 1e-9).all()


@given(st.sampled_from(_GALLERY_SAMPLED + ["fcyc"]), st.integers(0, 400))
def test_subadditivity_on_samples(token, seed):
    F = mpf.builtin(token)
    rng = np.random.default_rng(seed)
    a = rng.random((64, F.arity)) * 5.0
    b = rng.random((64, F.arity)) * 5.0
    lhs = mpf.eval_mpf(F, list((a + b).T))
    rhs = mpf.eval_mpf(F, list(a.T)) + mpf.eval_mpf(F, list(b.T))
    assert (lhs <= rhs + 1e-9).all()


def test_petrik_generator_breaks_log_exp_convexity():
    # the generator passes the falsifier even though log-phi-exp convexity
    # fails at sampled points, which separates it from the convexity route
    phi = mpf.petrik_phi()
    x = np.linspace(-1.0, 1.5, 101)
    g = np.log(phi(np.exp(x)))
    second = g[:-2] - 2 * g[1:-1] + g[2:]
    assert second.min() < -1e-6
    v = mpf.check_triangle_triplets(mpf.builtin("petrik"), samples=20_000, seed=3)
    assert v.passed


def test_descriptor_json_round_trip():
    for token in ("fp:2", "h1", "gn3:5", "mul:quad", "petrik", "fcyc", "dip"):
        F = mpf.builtin(token)
        back = mpf.mpf_from_json(mpf.mpf_to_json(F))
        rng = np.random.default_rng(0)
        args = [rng.random(32) * 5.0 for _ in range(F.arity)]
        assert np.array_equal(mpf.eval_mpf(F, args), mpf.eval_mpf(back, args))


def test_verdict_zero_locus_check():
    v = mpf.check_triangle_triplets(mpf.builtin("fp:2"), samples=100, seed=0)
    assert v.zero_ok
    # a clamp with positive floor everywhere fails the vanishing check
    shifted = mpf.linear(0.0, 1.0)
    v2 = mpf.check_triangle_triplets(shifted, samples=100, seed=0)
    assert not v2.zero_ok
