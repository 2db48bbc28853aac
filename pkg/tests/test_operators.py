import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_step
from padic_feller.operators import (PseudoDiffOperator, apply_multiplier, apply_P,
                                    dissipativity_check, function_battery, jkernel_apply,
                                    jkernel_operator, mixed_operator, pmp_check,
                                    resolvent_residual, resolvent_solve, taibleson_constant,
                                    taibleson_integral_apply, taibleson_operator,
                                    uniform_ball_density)
from padic_feller.radial import RadialFunction, radial_fourier
from padic_feller.spaces import SobolevWeight, besov_norm
from padic_feller.symbols import Const, OneMinusJHat, PowerNorm, Symbol, taibleson


def single_shell_spectrum(m, p, n):
    """Function whose transform is the indicator of the sphere ``p**m``."""
    return radial_fourier(RadialFunction.indicator_sphere(m, p, n))


def test_taibleson_constant():
    assert taibleson_constant(1.0, 2, 1) == pytest.approx(-4 / 3, rel=1e-15)


def test_multiplier_on_single_shell():
    p, n, m = 3, 1, 2
    f = single_shell_spectrum(m, p, n)
    psi = Symbol(PowerNorm(0.7, 1.5), p, n)
    assert (apply_multiplier(psi, f) - psi(m) * f).sup_norm() <= 1e-12 * psi(m)


def test_constant_multiplier(rng):
    f = random_step(rng, 2, 2)
    assert (apply_multiplier(Symbol(Const(2.5), 2, 2), f) - 2.5 * f).sup_norm() <= 1e-14


def test_taibleson_forms_on_unit_ball():
    f = RadialFunction.indicator_ball(0, 2, 1)
    a = apply_multiplier(taibleson(1.0, 2), f)
    b = taibleson_integral_apply(1.0, f)
    assert (a - b).sup_norm() <= 1e-10
    # on Z_2: int_{Z_2} ||xi|| dxi = sum_{k<=0} 2**k 2**k / 2 = 2/3, and the
    # kernel form gives (-4/3) * (-int_{||y||>1} ||y||**-2 dy) = (-4/3)(-1/2)
    assert a.at(0) == pytest.approx(2 / 3, rel=1e-15)
    assert b.at(0) == pytest.approx(2 / 3, rel=1e-15)


def test_taibleson_integral_of_constant_is_zero():
    f = RadialFunction(3, 1, -2, np.full(5, 0.75), inner=0.75)
    p, beta = 3, 1.5
    g = taibleson_integral_apply(beta, f)
    # f = 0.75 on B_2: inside, only y-shells past the boundary contribute,
    # each with f(x - y) - f(x) = -0.75
    tail = (1 - 1 / p) * p ** (-3 * beta) / (1 - p ** -beta)
    want = taibleson_constant(beta, p, 1) * (-0.75) * tail
    for k in range(-6, 3):
        assert g.at(k) == pytest.approx(want, rel=1e-13)


def test_jkernel_cases(rng):
    J = uniform_ball_density(1, 3, 1)
    c = RadialFunction.indicator_ball(6, 3, 1, scale=2.0)
    assert abs(jkernel_apply(J, c).at(0)) <= 1e-14
    for _ in range(20):
        f = random_step(rng, 3, 1)
        g = jkernel_apply(J, f)
        assert g.sup_norm() <= 2 * f.sup_norm() * (1 + 1e-12)
        assert (g - apply_multiplier(Symbol(OneMinusJHat(J), 3, 1), f)).sup_norm() <= 1e-10


def test_apply_P_linearity(rng):
    p = 2
    one = PseudoDiffOperator([(2.0, taibleson(1.5, p))])
    two = PseudoDiffOperator([(1.0, taibleson(1.5, p)), (1.0, taibleson(1.5, p))])
    f = random_step(rng, p, 1)
    assert (apply_P(one, f) - apply_P(two, f)).sup_norm() <= 1e-13
    single = taibleson_operator(1.5, p)
    assert (apply_P(single, f) + apply_multiplier(taibleson(1.5, p), f)).sup_norm() == 0


def test_apply_P_is_real(rng):
    op = mixed_operator([0.5, 2.0], 3, 1, [uniform_ball_density(0, 3, 1)])
    out = apply_P(op, random_step(rng, 3, 1))
    assert not out.is_complex or out.max_imag() <= 1e-12


def test_P_bounded_between_sobolev_levels(rng):
    p = 2
    op = taibleson_operator(1.0, p)
    w, C = op.space_weight()
    ratios = []
    for _ in range(20):
        f = random_step(rng, p, 1)
        lhs = besov_norm(apply_P(op, f), SobolevWeight.normalized(w, 1)).value
        rhs = besov_norm(f, SobolevWeight.normalized(w, 3)).value
        ratios.append(lhs / rhs)
    # p(xi) <= C w(xi) on every shell bounds the ratio by C
    assert max(ratios) <= C * (1 + 1e-12)


def test_resolvent_cases(rng):
    op = taibleson_operator(2.0, 3)
    zero = RadialFunction(3, 1, 0, [0.0])
    assert resolvent_solve(op, 1.0, zero).sup_norm() == 0
    f = single_shell_spectrum(1, 3, 1)
    u = resolvent_solve(op, 0.5, f)
    assert (u - (1 / (0.5 + 9.0)) * f).sup_norm() <= 1e-14
    with pytest.raises(ValueError):
        resolvent_solve(op, 0.0, f)
    with pytest.raises(ValueError):
        resolvent_solve(op.flipped(), 1.0, f)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(1, 2), st.sampled_from([0.1, 1.0, 10.0]),
       st.integers(0, 2**32 - 1))
def test_resolvent_identity(p, n, lam, seed):
    rng = np.random.default_rng(seed)
    op = mixed_operator([1.0], p, n, [uniform_ball_density(1, p, n)])
    f = random_step(rng, p, n)
    u = resolvent_solve(op, lam, f)
    assert resolvent_residual(op, lam, u, f) <= 1e-9
    fh, uh = radial_fourier(f), radial_fourier(u)
    for m in range(min(fh.k_min, uh.k_min) - 1, max(fh.k_max, uh.k_max) + 2):
        assert lam * abs(uh.at(m)) <= abs(fh.at(m)) * (1 + 1e-9) + 1e-14


def test_pmp_cases():
    op = taibleson_operator(1.0, 2)
    rep = pmp_check(op, [RadialFunction.indicator_ball(0, 2, 1)])
    assert rep.passed and rep.entries[0]["operator_value"] <= 0
    neg = pmp_check(op, [-1.0 * RadialFunction.indicator_ball(0, 2, 1) - 0.5 * RadialFunction.indicator_ball(3, 2, 1)])
    assert neg.passed
    bad = pmp_check(op.flipped(), [RadialFunction.indicator_ball(0, 2, 1)])
    assert not bad.passed
    w = bad.witnesses[0]["witness"]
    assert w["f_x0"] == 1 and w["Pf_x0"] > 0


def test_dissipativity_cases(rng):
    op = taibleson_operator(1.0, 3)
    assert dissipativity_check(op, 1.0, [RadialFunction(3, 1, 0, [0.0])]).passed
    battery = function_battery(3, 1, rng)
    for lam in (0.1, 1.0, 10.0):
        assert dissipativity_check(op, lam, battery).passed
    rep = dissipativity_check(op.flipped(), 1.0, battery)
    assert not rep.passed and "witness" in rep.violations[0]


def test_operator_json_round_trip():
    op = mixed_operator([0.5, 2.0], 2, 2, [uniform_ball_density(0, 2, 2)], b_beta=[1.0, 0.25])
    obj = op.to_json()
    assert obj["space_weight"]["C"] >= 1
    back = PseudoDiffOperator.from_json(obj)
    ms = np.arange(-8, 9)
    assert np.array_equal(back.values(ms), op.values(ms))
    bare = PseudoDiffOperator.from_json(taibleson(1.0, 2).to_json())
    assert bare.sign == -1 and len(bare.terms) == 1


def test_operator_needs_a_growing_term_for_space():
    op = jkernel_operator(uniform_ball_density(0, 2, 1))
    with pytest.raises(ValueError):
        op.space_weight()
    assert pmp_check(op, function_battery(2, 1)).passed


def test_steep_symbol_against_high_precision_values():
    # p=3, n=2, beta=2.5: the spectrum on high shells is small while its
    # deviation from the origin value is large, so a careless product cancels
    f = RadialFunction(3, 2, -2, np.array([-0.5, 0.25, 0.75, 1.0, -1.0]), inner=-0.5)
    ref = [-170.25356910611716, -170.25356910611716, 11.996430893882842, 0.8396976336194475,
           0.14414947735241723, -0.016886075248426986, 0.00033688712280001778]
    spectral = apply_multiplier(taibleson(2.5, 3, 2), f)
    integral = taibleson_integral_apply(2.5, f)
    for j, r in zip(range(-3, 4), ref):
        assert abs(spectral.at(j) - r) <= 1e-12 * 200
        assert abs(integral.at(j) - r) <= 1e-12 * 200
