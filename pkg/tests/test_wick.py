import random

import numpy as np
import pytest

from ntforge.precategory import ColoredProductSystem
from ntforge.semigroups import (
    AbsorptionMonoid,
    DirectSumN,
    UnitExtension,
    cyclic_group,
    free_monoid,
)
from ntforge.wick import (
    GradingMap,
    NTElement,
    abelianization_grading,
    core_norm,
    diagonal_expectation,
    grade_project,
    grades_of,
    nt_adjoint,
    nt_identity,
    nt_monomial,
    nt_mul,
)

N = DirectSumN(1)
N2 = DirectSumN(2)
FM = free_monoid("ab")

ps_N = ColoredProductSystem(N, gen_dims=[(1,)])
ps_N2 = ColoredProductSystem(N2, gen_dims=[(1,), (1,)])
ps_FM = ColoredProductSystem(FM, gen_dims=[(1,), (1,)])
ps_AB = ColoredProductSystem(AbsorptionMonoid(), gen_dims=[(1,), (1,)])


def scalar(ps, p, q, value=1.0):
    sg = ps.sg
    blocks = [np.full((1, 1), value, dtype=complex) for _ in range(ps.slot_count)]
    return nt_monomial(ps, sg.parse(p), sg.parse(q), blocks)


def test_isometry_relations_over_N():
    u = scalar(ps_N, "1", "0")
    uu = nt_mul(nt_adjoint(u), u)
    assert uu.keys() == [(N.parse("0"), N.parse("0"))]
    assert np.allclose(uu.coeff(N.parse("0"), N.parse("0")).blocks[0], 1.0)
    proj = nt_mul(u, nt_adjoint(u))
    assert proj.keys() == [(N.parse("1"), N.parse("1"))]


def test_distinct_letters_annihilate():
    ua = scalar(ps_FM, "a", "e")
    ub = scalar(ps_FM, "b", "e")
    assert nt_mul(nt_adjoint(ua), ub).is_zero()


def test_adjoint_is_involutive_and_antimultiplicative():
    rng = random.Random(11)
    x = NTElement(ps_FM)
    y = NTElement(ps_FM)
    for el, _ in zip([x, y, x, y], range(4)):
        p, q = rng.choice(FM.elements(2)), rng.choice(FM.elements(2))
        el.add_term(p, q, ps_FM.random_arrow(p, q, rng))
    assert _close(nt_adjoint(nt_adjoint(x)), x)
    assert _close(nt_adjoint(nt_mul(x, y)), nt_mul(nt_adjoint(y), nt_adjoint(x)), tol=1e-10)


def _close(x, y, tol=1e-12):
    if set(x.terms) != set(y.terms):
        return False
    return all(
        np.allclose(a.blocks[c], y.terms[k].blocks[c], atol=tol)
        for k, a in x.terms.items()
        for c in range(len(a.blocks))
    )


def test_mul_is_associative_termwise():
    rng = random.Random(5)
    pool = FM.elements(2)
    for _ in range(20):
        xs = []
        for _ in range(3):
            el = NTElement(ps_FM)
            for _ in range(2):
                p, q = rng.choice(pool), rng.choice(pool)
                el.add_term(p, q, ps_FM.random_arrow(p, q, rng))
            xs.append(el)
        x, y, z = xs
        assert _close(nt_mul(nt_mul(x, y), z), nt_mul(x, nt_mul(y, z)), tol=1e-10)


def test_unit_orbit_keys_collapse():
    ext = UnitExtension(DirectSumN(1), cyclic_group(2))
    ps = ColoredProductSystem(ext, gen_dims=[(2,)])
    p, q = ext.parse("(2,0)"), ext.parse("(1,0)")
    x_unit = ext.parse("(0,1)")
    rng = random.Random(6)
    a = ps.random_arrow(p, q, rng)
    el = NTElement(ps)
    el.add_term(p, q, a)
    el.add_term(p * x_unit, q * x_unit, a.rtensor(x_unit))
    assert len(el.terms) == 1
    ((kp, kq),) = el.terms
    assert np.allclose(el.terms[(kp, kq)].blocks[0], 2 * a.blocks[0])


def test_diagonal_expectation():
    x = scalar(ps_N, "1", "1") + scalar(ps_N, "2", "0") + scalar(ps_N, "0", "0")
    ex = diagonal_expectation(x)
    assert set(ex.terms) == {(N.parse("1"), N.parse("1")), (N.parse("0"), N.parse("0"))}
    assert _close(diagonal_expectation(ex), ex)
    with pytest.raises(ValueError, match="transcendental"):
        diagonal_expectation(scalar(ps_AB, "(0,1)", "(0,2)"))


def test_grading_examples():
    theta = abelianization_grading(N2).validate(3)
    key_grade = theta.grade_of_key(N2.parse("(1,0)"), N2.parse("(0,1)"))
    assert key_grade == (1, -1)
    x = scalar(ps_N2, "(1,0)", "(0,1)") + scalar(ps_N2, "(1,1)", "(1,1)")
    assert grades_of(x, theta) == [(0, 0), (1, -1)]
    efib = grade_project(x, theta, (0, 0))
    assert set(efib.terms) == {(N2.parse("(1,1)"), N2.parse("(1,1)"))}

    th_fm = abelianization_grading(FM).validate(2)
    y = scalar(ps_FM, "ab", "e") + scalar(ps_FM, "ba", "e")
    assert grades_of(y, th_fm) == [(1, 1)]
    assert len(grade_project(y, th_fm, (1, 1)).terms) == 2


def test_grading_on_group_and_absorption():
    g = cyclic_group(3)
    th = abelianization_grading(g).validate(1)
    assert th.grade_of_key(g.parse("1"), g.parse("2")) == g.parse("2")
    ab = abelianization_grading(AbsorptionMonoid()).validate(3)
    assert ab.grade_of_key(AbsorptionMonoid().parse("(2,5)"), AbsorptionMonoid().parse("(1,0)")) == (1,)


def test_bad_grading_rejected():
    with pytest.raises(ValueError, match="homomorphism"):
        GradingMap(N2, lambda p: (p.data[0] ** 2,), rank=1).validate(3)


def test_grade_multiplicativity():
    theta = abelianization_grading(FM)
    rng = random.Random(9)
    pool = FM.elements(2)
    for _ in range(15):
        x, y = NTElement(ps_FM), NTElement(ps_FM)
        px, qx = rng.choice(pool), rng.choice(pool)
        py, qy = rng.choice(pool), rng.choice(pool)
        x.add_term(px, qx, ps_FM.random_arrow(px, qx, rng))
        y.add_term(py, qy, ps_FM.random_arrow(py, qy, rng))
        prod = nt_mul(x, y)
        if prod.is_zero():
            continue
        gx = theta.grade_of_key(px, qx)
        gy = theta.grade_of_key(py, qy)
        expected = tuple(a + b for a, b in zip(gx, gy))
        assert grades_of(prod, theta) == [expected]


def test_core_norm_worked_examples():
    x = scalar(ps_N, "0", "0", 1.0) + scalar(ps_N, "1", "1", -1.0)
    res = core_norm(x)
    assert res.exact and res.value == 1.0
    y = scalar(ps_N, "0", "0", 1.0) + scalar(ps_N, "1", "1", 1.0)
    assert core_norm(y) == (2.0, True)
    single = scalar(ps_FM, "ab", "ab", 3.0)
    assert core_norm(single) == (3.0, True)
    zero = NTElement(ps_N)
    assert core_norm(zero) == (0.0, True)


def test_core_norm_identity_element():
    assert core_norm(nt_identity(ps_FM)) == (1.0, True)


def test_core_norm_mixed_key_absorption():
    x = scalar(ps_AB, "(0,1)", "(0,2)")
    res = core_norm(x, wdepth=3)
    assert not res.exact
    assert res.value >= 0.99  # the off-diagonal key has diagonal Fock blocks


def test_core_norm_rejects_non_core_key():
    with pytest.raises(ValueError, match="outside the core"):
        core_norm(scalar(ps_N, "1", "0"))


def test_mul_bilinear():
    rng = random.Random(13)
    pool = N2.elements(2)
    p, q = rng.choice(pool), rng.choice(pool)
    a = ps_N2.random_arrow(p, q, rng)
    x = NTElement(ps_N2).add_term(p, q, a)
    y = scalar(ps_N2, "(1,0)", "(0,0)")
    lhs = nt_mul(2.0 * x, y)
    rhs = 2.0 * nt_mul(x, y)
    assert _close(lhs, rhs, tol=1e-12)
