import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padic_feller.operators import uniform_ball_density
from padic_feller.padic import PAdicVector
from padic_feller.radial import ORIGIN, RadialFunction, radial_fourier
from padic_feller.symbols import (Const, ExpTower, OneMinusJHat, PowerNorm, PowerSeriesNorm, Sum,
                                  Symbol, check_shape, classify_type, eval_symbol,
                                  heat_multiplier_function, negative_definite_test,
                                  normalize_condition_psi, positive_definite_test, random_points,
                                  taibleson)


def tower(p, n=1, height=1):
    return Symbol(ExpTower(PowerSeriesNorm((1.0, 1.0), (1, 2)), height), p, n)


def constructors(p, n):
    J = uniform_ball_density(1, p, n)
    out = [taibleson(a, p, n) for a in (0.5, 1.0, 2.5, 4.0)]
    out.append(Symbol(OneMinusJHat(J), p, n))
    out.append(Symbol(Sum((1.0, 0.5, 2.0), (PowerNorm(1.0, 0.5), PowerNorm(1.0, 2.0),
                                             OneMinusJHat(J))), p, n))
    out += [tower(p, n, 1), tower(p, n, 2)]
    return out


def test_eval_cases():
    assert eval_symbol(Symbol(PowerNorm(2.0, 3.0), 2), 2) == 128
    for psi in constructors(3, 1)[:-2]:
        assert psi(ORIGIN) == 0
    assert tower(3, 1, 1)(ORIGIN) == 1            # exp of a symbol vanishing at 0
    assert tower(3, 1, 2)(ORIGIN) == pytest.approx(math.e, rel=1e-15)
    s = Symbol(Sum((1.0, 1.0), (PowerNorm(0.5, 1.0), PowerNorm(3.0, 2.0))), 5)
    assert s(0) == pytest.approx(3.5, abs=1e-15)


def test_one_minus_jhat_values():
    # J = uniform density on B_1 has transform 1 on B_-1 and 0 outside
    psi = Symbol(OneMinusJHat(uniform_ball_density(1, 2, 1)), 2)
    assert [psi(m) for m in range(-3, 3)] == pytest.approx([0, 0, 0, 1, 1, 1], abs=1e-15)


def test_one_minus_jhat_rejects_bad_kernels():
    with pytest.raises(ValueError):
        OneMinusJHat(RadialFunction(2, 1, 0, [2.0], inner=2.0)).validate(2, 1)
    with pytest.raises(ValueError):
        OneMinusJHat(RadialFunction(2, 1, 0, [-1.0, 1.0], inner=3.0)).validate(2, 1)


def test_tower_saturates():
    psi = tower(2, 1, 2)
    assert psi(30) == math.inf
    assert math.exp(-psi(30)) == 0
    assert heat_multiplier_function(psi, 1.0)(30) == 0


def test_negative_definite_single_point(rng):
    for psi in constructors(2, 1):
        assert negative_definite_test(psi, random_points(2, 1, 1, rng)).certified


def test_negative_definite_power_four(rng):
    rep = negative_definite_test(taibleson(4.0, 3), random_points(3, 1, 50, rng, -2, 2))
    assert rep.certified


def test_negated_norm_refuted():
    psi = Symbol(PowerNorm(-1.0, 1.0), 2, strict=False)
    pts = [PAdicVector.from_rationals([q], 2) for q in (0, 1, 0.5)]
    rep = negative_definite_test(psi, pts)
    assert rep.verdict == "refuted"
    # the test matrix is [[0,0,0],[0,-2,-1],[0,-1,-4]]
    assert rep.min_eigenvalue == pytest.approx(-3 - math.sqrt(2), rel=1e-12)
    assert rep.witness["quadratic_form"] < 0
    assert len(rep.witness["coefficients_re"]) == 3


def test_negated_norm_needs_lenient_loading():
    with pytest.raises(ValueError):
        Symbol(PowerNorm(-1.0, 1.0), 2)


def test_positive_definite_cases(rng):
    for p, n in ((2, 1), (3, 2)):
        Jhat = radial_fourier(uniform_ball_density(0, p, n))
        assert positive_definite_test(Jhat, random_points(p, n, 12, rng)).certified
        phi = heat_multiplier_function(taibleson(1.5, p, n), 1.0)
        assert positive_definite_test(phi, random_points(p, n, 12, rng)).certified
    one = positive_definite_test(lambda m: 0.3, random_points(2, 1, 1, rng))
    assert one.certified and one.min_eigenvalue == pytest.approx(0.3)


def test_type_classification():
    rep = classify_type(Symbol(OneMinusJHat(uniform_ball_density(0, 3, 1)), 3))
    assert rep.ok and rep.tag == 0 and rep.constants["C"] == 2
    for beta in (0.5, 1.0, 3.0):
        rep = classify_type(taibleson(beta, 2, 2))
        assert rep.ok and rep.tag == 1
        assert rep.constants == {"C0": 1.0, "C1": 1.0, "beta0": beta, "beta1": beta}
    rep = classify_type(tower(2), window=(-20, 20))
    assert rep.ok and rep.tag == 2


def test_false_type_declaration_caught():
    psi = Symbol(PowerNorm(1.0, 1.0), 2,
                 declared_type={"tag": 1, "constants": {"C0": 1, "C1": 1, "beta0": 2, "beta1": 2}})
    rep = classify_type(psi)
    assert not rep.ok and rep.offending_shell == 1
    psi = Symbol(PowerNorm(1.0, 3.0), 2, declared_type={"tag": 2, "constants": {"1": 1, "2": 1, "4": 1}})
    assert not classify_type(psi).ok


def test_normalization():
    psi = normalize_condition_psi(Symbol(PowerNorm(5.0, 2.0), 3))
    assert psi.normalization == pytest.approx(1 / 5, rel=1e-15)
    assert psi(0) == pytest.approx(1.0, rel=1e-15)
    t = taibleson(1.0, 3)
    assert normalize_condition_psi(t) is t
    s = Symbol(Sum((1.0, 1.0), (PowerNorm(1.0, 1.0), PowerNorm(1.0, 2.0))), 3)
    assert normalize_condition_psi(s).normalization == pytest.approx(0.5, rel=1e-15)
    with pytest.raises(ValueError):
        normalize_condition_psi(Symbol(Const(0.0), 3))


def test_shape_check_flags_negated():
    psi = Symbol(PowerNorm(-1.0, 1.0), 2, strict=False)
    assert check_shape(psi)
    assert check_shape(taibleson(1.0, 2)) == []


def test_json_round_trip():
    for psi in constructors(3, 2):
        back = Symbol.from_json(psi.to_json())
        ms = np.arange(-10, 11)
        assert np.array_equal(back.values(ms), psi.values(ms))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 2), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_constructors_negative_definite(p, n, size, seed):
    rng = np.random.default_rng(seed)
    pts = random_points(p, n, size, rng, -2, 2)
    for psi in constructors(p, n):
        rep = negative_definite_test(psi, pts)
        assert rep.verdict in ("certified-on-samples", "inconclusive"), psi
        if rep.verdict == "inconclusive":
            assert psi.type_tag == 2            # only towers can overflow


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(2, 8), st.integers(0, 2**32 - 1),
       st.sampled_from([0.1, 1.0, 10.0]))
def test_schoenberg(p, size, seed, t):
    pts = random_points(p, 1, size, np.random.default_rng(seed), -2, 2)
    for psi in constructors(p, 1)[:5]:
        assert positive_definite_test(heat_multiplier_function(psi, t), pts).certified


@given(st.sampled_from([2, 3, 5]), st.integers(1, 2))
def test_monotone_constructors(p, n):
    ms = np.arange(-30, 31)
    for psi in constructors(p, n):
        if psi.monotone:
            v = psi.values(ms)
            assert np.all(v[1:] >= v[:-1])         # inf >= inf for saturated towers
