import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinmur.families import (
    FamilyParam,
    ParameterError,
    covariance_generators,
    d2_family,
    d4_family,
    o_family,
    so3_density,
    so3_marginal,
    target_pair,
)
from spinmur.qubit import Effect, marginal, povm_validate, rotation, spin_observable
from spinmur.verify import covariance_residual, family_grid

from conftest import SQ2, SQ3


def test_d4_examples():
    M = d4_family(1 / SQ2)
    assert M[(1, -1)].isclose(Effect(0.25, (1 / (4 * SQ2), -1 / (4 * SQ2), 0)), atol=1e-16)
    trivial = d4_family(0.0)
    assert all(e.isclose(Effect(0.25, (0, 0, 0))) for e in trivial.effects)
    with pytest.raises(ParameterError):
        d4_family(0.8)


def test_o_examples(xyz):
    M = o_family(1 / SQ3)
    assert M.arity == 3 and len(M) == 8
    assert M[(1, 1, -1)].isclose(Effect(0.125, np.array([1, 1, -1]) / (8 * SQ3)), atol=1e-16)
    assert all(e.isclose(Effect(0.125, (0, 0, 0))) for e in o_family(0).effects)
    w = 1 / SQ3
    for k in range(3):
        for x in (1, -1):
            lab = (x,)
            expected = xyz[k][lab].scaled(w) + Effect((1 - w) / 2, (0, 0, 0))
            assert marginal(M, k)[lab].isclose(expected, atol=1e-15)
    with pytest.raises(ParameterError):
        o_family(0.6)


def test_d2_examples():
    M0 = d4_family(1 / SQ2)
    G0 = d2_family(0.0)
    for o in M0.outcomes:
        assert np.array_equal(G0[o].v, M0[o].v) and G0[o].t == M0[o].t
    G1 = d2_family(1.0)
    for (x, y), e in G1.items():
        if x * y == -1:
            assert e.t == 0.0 and np.all(e.v == 0.0)
    assert povm_validate(G1) and povm_validate(d2_family(-1.0))
    with pytest.raises(ParameterError):
        d2_family(1.2)


def test_param_slack_and_kinds():
    # values within rounding of the endpoint are accepted and clamped
    p = FamilyParam.c2(0.70710678118654757)
    assert p.value <= 1 / SQ2
    with pytest.raises(ParameterError):
        FamilyParam(0.1, "bogus")
    assert FamilyParam.epsilon(0.25).shrink == pytest.approx(0.25)


def test_so3_marginal_examples():
    a = np.array([0.0, 0.6, 0.8])
    m0 = so3_marginal(0.0, a)
    A = spin_observable(a)
    for x in (1, -1):
        assert m0[(x,)].isclose(Effect(0.5, x * a / 4), atol=1e-16)
        assert m0[(x,)].isclose(A[(x,)].scaled(0.5) + Effect(0.25, (0, 0, 0)), atol=1e-16)
        assert so3_marginal(0.5, a)[(x,)].isclose(Effect(0.5, (0, 0, 0)))
        assert so3_marginal(1.0, a)[(x,)].isclose(Effect(0.5, -x * a / 4), atol=1e-16)


def test_so3_density_pole_and_normalization():
    t, v = so3_density(0.0, 0.0, 0.0)
    assert t == 1.0 and np.allclose(v, (0, 0, 1))
    # Gauss-Legendre in cos(theta) x trapezoid in phi over sin dtheta dphi / 4pi
    x, w = np.polynomial.legendre.leggauss(40)
    phis = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    tot_t, tot_v = 0.0, np.zeros(3)
    for ci, wi in zip(x, w):
        for ph in phis:
            t, v = so3_density(0.3, math.acos(ci), ph)
            tot_t += wi * t / (2 * 64)
            tot_v += wi * v / (2 * 64)
    assert tot_t == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(tot_v, 0.0, atol=1e-12)


def _hemisphere_effect(eps, a, sign, n=64):
    """Integrate the density over {xi . a > 0} (sign=+1) in a frame whose pole is a."""
    a = np.asarray(a, float)
    e1 = np.cross(a, (1, 0, 0) if abs(a[0]) < 0.9 else (0, 1, 0))
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    x, w = np.polynomial.legendre.leggauss(n)
    cs = 0.5 * (x + 1) * sign  # cos of angle to a, over the half range
    ws = 0.5 * w
    phis = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    t, v = 0.0, np.zeros(3)
    for c, wc in zip(cs, ws):
        sn = math.sqrt(1 - c * c)
        for ph in phis:
            xi = c * a + sn * (math.cos(ph) * e1 + math.sin(ph) * e2)
            th, fi = math.acos(np.clip(xi[2], -1, 1)), math.atan2(xi[1], xi[0])
            dt, dv = so3_density(eps, th, fi)
            t += wc * dt / (2 * len(phis))
            v += wc * dv / (2 * len(phis))
    return Effect(t, v)


@pytest.mark.parametrize("eps", [0.0, 0.25, 0.5, 0.9])
def test_so3_hemisphere_postprocessing_matches_marginal(eps, rng):
    a = rng.normal(size=3)
    a /= np.linalg.norm(a)
    m = so3_marginal(eps, a)
    for x in (1, -1):
        assert _hemisphere_effect(eps, a, x).isclose(m[(x,)], atol=1e-10)


def test_so3_density_rotation_covariant(rng):
    for _ in range(20):
        R = rotation(rng.normal(size=3), rng.uniform(0, 2 * math.pi))
        th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        xi = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
        rx = R @ xi
        t1, v1 = so3_density(0.2, th, ph)
        t2, v2 = so3_density(0.2, math.acos(np.clip(rx[2], -1, 1)), math.atan2(rx[1], rx[0]))
        assert t1 == pytest.approx(t2) and np.allclose(R.T @ v2, v1, atol=1e-12)


def test_target_pair_examples():
    p = target_pair(math.pi / 2)
    assert np.allclose(p.a.a, (1, 0, 0), atol=1e-15) and np.allclose(p.b.a, (0, 1, 0), atol=1e-15)
    q = target_pair(0.0)
    assert np.allclose(q.a.a, q.b.a) and np.allclose(q.a.a, np.array([1, 1, 0]) / SQ2)
    assert np.dot(target_pair(math.pi / 3).a.a, target_pair(math.pi / 3).b.a) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        target_pair(4.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, math.pi))
def test_target_pair_angle(alpha):
    p = target_pair(alpha)
    assert math.acos(np.clip(np.dot(p.a.a, p.b.a), -1, 1)) == pytest.approx(alpha, abs=1e-7)


def test_all_family_members_valid():
    for _, _, p in family_grid():
        assert povm_validate(p)
    for eps in np.linspace(0, 1, 21):
        assert povm_validate(so3_marginal(eps, (1.0, 0.0, 0.0)))


@pytest.mark.parametrize("name", ["d4", "o", "d2"])
def test_covariance_generators(name):
    for fam, _, p in family_grid():
        if fam == name:
            assert covariance_residual(name, p) <= 1e-15


def test_d4_generators_have_stated_action():
    gens = covariance_generators("d4")
    assert gens[0][1]((1, 1)) == (1, -1)
    assert gens[1][1]((1, -1)) == (-1, 1)
