import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heegnerspec.eisenstein import eisenstein_direct_sum, in_fundamental_domain
from heegnerspec.errors import DomainError
from heegnerspec.heegner import (
    HeegnerSet,
    ReducedForm,
    ThetaCombination,
    class_number,
    heegner_set,
    reduced_forms,
    theta_coefficient,
    theta_one,
)
from heegnerspec.specialfns import dirichlet_l, is_fundamental_discriminant, riemann_zeta, scattering_c

FUNDAMENTAL = [d for d in range(-500, 0) if is_fundamental_discriminant(d)]


def _brute_reduced(d):
    # every (A, B, C) with B^2 - 4AC = d, |B| <= A <= C, scanned without the sqrt bound
    out = []
    for A in range(1, -d + 1):
        for B in range(-A, A + 1):
            num = B * B - d
            if num % (4 * A):
                continue
            C = num // (4 * A)
            if C < A or (B < 0 and (-B == A or A == C)):
                continue
            out.append((A, B, C))
    return out


def test_reduced_forms_examples():
    assert reduced_forms(-3) == (ReducedForm(1, -1, 1),)
    assert reduced_forms(-4) == (ReducedForm(1, 0, 1),)
    assert [(f.A, f.B, f.C) for f in reduced_forms(-20)] == [(1, 0, 5), (2, 2, 3)]


@pytest.mark.parametrize("d", [-7, -15, -20, -23, -84, -191, -260, -420])
def test_reduced_forms_match_brute_force(d):
    assert [(f.A, f.B, f.C) for f in reduced_forms(d)] == sorted(_brute_reduced(d))


def test_reduced_forms_reject_bad_discriminants():
    for d in (-12, 5, 0, -1):
        with pytest.raises(DomainError):
            reduced_forms(d)


def test_reduced_form_bound_and_discriminant():
    for d in FUNDAMENTAL:
        for f in reduced_forms(d):
            assert f.discriminant == d
            assert abs(f.B) <= f.A <= f.C
            assert f.A <= math.sqrt(-d / 3) + 1e-12


def test_heegner_set_examples():
    h4 = heegner_set(-4)
    assert h4.h == 1 and h4.points == ((0.0, 1.0),)
    h3 = heegner_set(-3)
    assert h3.h == 1
    assert h3.points[0] == pytest.approx((0.5, math.sqrt(3) / 2))
    assert heegner_set(-23).h == 3


def test_heegner_points_in_fundamental_domain_and_distinct():
    for d in FUNDAMENTAL:
        hs = heegner_set(d)
        assert len(hs.forms) == len(hs.points) == hs.h
        assert len(set(hs.points)) == hs.h
        for f, (x, y) in zip(hs.forms, hs.points):
            assert y == pytest.approx(math.sqrt(-d) / (2 * f.A))
            assert x == pytest.approx(-f.B / (2 * f.A))
            assert in_fundamental_domain(complex(x, y))


def test_heegner_set_json_roundtrip():
    hs = heegner_set(-84)
    back = HeegnerSet.from_json(hs.to_json())
    assert back == hs


@pytest.mark.parametrize("d", [-3, -4, -7, -8, -15, -20, -23, -47, -163, -420])
def test_analytic_class_number_formula(d):
    units = {-3: 6, -4: 4}.get(d, 2)
    analytic = units * math.sqrt(-d) * complex(dirichlet_l(1.0, d)).real / (2 * math.pi)
    assert abs(analytic - class_number(d)) < 1e-6


def test_theta_coefficient_matches_lattice_sums():
    th = ThetaCombination.single(-7)
    direct = sum(eisenstein_direct_sum(complex(x, y), 2.5, 400)[0] for x, y in heegner_set(-7).points)
    assert abs(theta_coefficient(th, 2.5) - direct) < 1e-7


def test_unit_factor_direction_from_lattice_sums():
    # the lattice sum at i is twice the bare Dirichlet-series expression, and at
    # rho it is three times: the factors multiply
    s = 2.5
    bare4 = riemann_zeta(s) * dirichlet_l(s, -4) / riemann_zeta(2 * s)
    bare3 = (math.sqrt(3) / 2) ** s * riemann_zeta(s) * dirichlet_l(s, -3) / riemann_zeta(2 * s)
    e_i = eisenstein_direct_sum(1j, s, 400)[0]
    e_rho = eisenstein_direct_sum(complex(0.5, math.sqrt(3) / 2), s, 400)[0]
    assert abs(e_i / bare4 - 2) < 1e-6
    assert abs(e_rho / bare3 - 3) < 1e-6
    th = ThetaCombination(((-3, 1.0), (-4, 1.0)), unit_correction=True)
    assert abs(theta_coefficient(th, s) - (e_i + e_rho)) < 1e-6


def test_small_discriminants_need_unit_correction():
    with pytest.raises(DomainError):
        ThetaCombination.single(-4)
    with pytest.raises(DomainError):
        ThetaCombination(((-7, 1.0), (-7, 2.0)))


def test_theta_coefficient_empty_and_cancelling():
    assert theta_coefficient(ThetaCombination(()), 0.5 + 3j) == 0
    th = ThetaCombination(((-7, 1.0), (-23, 0.0)))
    assert theta_coefficient(th, 2.0) == theta_coefficient(ThetaCombination.single(-7), 2.0)


@given(st.sampled_from([-7, -8, -15, -20, -23, -24]), st.floats(-3, 3), st.floats(1.05, 6))
def test_theta_coefficient_real_for_real_s(d, nu, s):
    th = ThetaCombination(((d, nu), (-31, 1.0)))
    assert abs(complex(theta_coefficient(th, s)).imag) < 1e-10


@given(st.floats(0.5, 60))
def test_theta_functional_equation_on_line(t):
    th = ThetaCombination(((-7, 1.0), (-23, -0.4)))
    s = complex(0.5, t)
    lhs = theta_coefficient(th, s)
    rhs = scattering_c(s) * theta_coefficient(th, 1 - s)
    assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(lhs))


def test_theta_one():
    assert theta_one(ThetaCombination.single(-23)) == 3
    assert theta_one(ThetaCombination.single(-7, 2.0)) == 2
    th = ThetaCombination(((-7, 1.0), (-8, -1.0)))
    assert theta_one(th) == 0


def test_parse_and_heights():
    th = ThetaCombination.parse(["-7", "-23:2.5"])
    assert th.terms == ((-7, 1.0), (-23, 2.5))
    assert th.max_height() == pytest.approx(math.sqrt(23) / 2)
    assert np.isclose(sum(w for _, _, w in th.heegner_points()), 1 + 3 * 2.5)
