"""Invariant suites behind ``spinmur verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import closed_forms as cf
from .entropy import mean_error_quadrature, tensor_identity_check
from .families import (
    FamilyParam,
    coordinate_axes,
    covariance_generators,
    d2_family,
    d4_family,
    o_family,
    so3_marginal,
    target_pair,
)
from .minimax import (
    DEFAULT_RESTARTS,
    GeneralBiObservable,
    divergence,
    global_minimax,
    incompatibility_degree,
    mean_divergence,
)
from .qubit import BlochState, marginal, marginals, povm_validate, rotate_effect, spin_observable
from .sampler import empirical_error_function, sample_outcomes

SUITES = ("core", "closed-forms", "minimax", "sampler")


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.residual <= self.tolerance)

    def as_dict(self):
        return {"name": self.name, "residual": self.residual, "tolerance": self.tolerance, "passed": self.passed}


def random_states(rng, n, pure=False):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if not pure:
        v *= rng.random((n, 1)) ** (1 / 3)
    return [BlochState(x) for x in v]


def random_biobservable(rng):
    return GeneralBiObservable.from_params(GeneralBiObservable.random_params(rng)).povm()


def family_grid():
    povms = []
    for c in np.linspace(-1 / math.sqrt(2), 1 / math.sqrt(2), 21):
        povms.append(("d4", c, d4_family(c)))
    for c in np.linspace(-1 / math.sqrt(3), 1 / math.sqrt(3), 21):
        povms.append(("o", c, o_family(c)))
    for g in np.linspace(-1.0, 1.0, 21):
        povms.append(("d2", g, d2_family(g)))
    return povms


def covariance_residual(name, povm):
    worst = 0.0
    for R, relabel in covariance_generators(name):
        for o, e in povm.items():
            r = rotate_effect(e, R)
            f = povm[relabel(o)]
            worst = max(worst, abs(r.t - f.t), float(np.max(np.abs(r.v - f.v))))
    return worst


def suite_core(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    worst = 0.0
    for _, _, p in family_grid():
        rep = povm_validate(p)
        worst = max(worst, 0.0 if rep else rep.first[2])
        for k in range(p.arity):
            mrep = povm_validate(marginal(p, k))
            worst = max(worst, 0.0 if mrep else mrep.first[2])
    for eps in np.linspace(0, 1, 11):
        rep = povm_validate(so3_marginal(FamilyParam.epsilon(eps), (0.0, 0.6, 0.8)))
        worst = max(worst, 0.0 if rep else rep.first[2])
    checks.append(Check("family POVM validity over parameter grids", worst, 1e-12))

    worst = max(covariance_residual(n, p) for n, _, p in family_grid())
    checks.append(Check("covariance generator identities (D4, O, D2)", worst, 1e-12))

    worst = 0.0
    states = random_states(rng, 100)
    for s in states:
        M = random_biobservable(rng)
        worst = max(worst, abs(M.probabilities(s).sum() - 1.0))
    checks.append(Check("outcome probabilities sum to one", worst, 1e-12))

    worst = 0.0
    for s in states:
        M = random_biobservable(rng)
        pair = target_pair(rng.uniform(0, math.pi))
        tg = [spin_observable(pair.a), spin_observable(pair.b)]
        res = tensor_identity_check(tg, marginals(M), s)
        worst = max(worst, res)
    checks.append(Check("tensor identity on 100 random instances", worst, 1e-12))
    return checks


def suite_closed_forms(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    c = cf.constants()
    checks = [
        Check("c_orth2 vs 0.228446", abs(c["c_orth2"] - 0.228446), 1e-5),
        Check("c_orth3 vs 0.342498", abs(c["c_orth3"] - 0.342498), 1e-5),
        Check("c_inf vs 0.0899306040", abs(c["c_inf"] - 0.0899306040), 1e-9),
        Check("ordering c_inf < mean_c_orth3 < mean_c_orth2", 0.0, 0.0,
              bool(c["c_inf"] < c["mean_c_orth3"] < c["mean_c_orth2"])),
    ]
    worst = 0.0
    for r in np.round(np.arange(1, 11) / 10, 10):
        for eps in np.round(np.arange(0, 11) / 10, 10):
            q = mean_error_quadrature(eps, BlochState((0.0, 0.0, r)), 1e-10)
            worst = max(worst, abs(q - cf.mean_error_closed(r, eps)))
    checks.append(Check("quadrature vs closed mean error, max residual", worst, 1e-8))

    worst = 0.0
    for r in np.linspace(0.05, 1, 20):
        worst = max(worst, abs(cf.sd_inf_bound(r) - cf.mean_error_closed(r, 0.0)))
    checks.append(Check("sd_inf_bound vs mean_error_closed(r, 0)", worst, 1e-12))

    # optimal covariant parameter sits at the interval end
    worst = 0.0
    for s in random_states(rng, 200):
        for k, cmax in ((2, 1 / math.sqrt(2)), (3, 1 / math.sqrt(3))):
            comps = s.r[:k]
            grid = np.linspace(-cmax, cmax, 101)
            vals = np.array([cf.sd_general_c(comps, x) for x in grid])
            worst = max(worst, float(vals[-1] - vals.min()))
    checks.append(Check("covariant error minimized at c = 1/sqrt2, 1/sqrt3", worst, 1e-12))
    return checks


def suite_minimax(seed: int, restarts: int = DEFAULT_RESTARTS, threads: int = 1) -> list[Check]:
    c = cf.constants()
    X, Y, Z = (spin_observable(d) for d in coordinate_axes(3))
    d2 = divergence([X, Y], d4_family(1 / math.sqrt(2)), 1e-8)
    d3 = divergence([X, Y, Z], o_family(1 / math.sqrt(3)), 1e-8)
    i0 = incompatibility_degree(0.0, 1e-4)
    i90 = incompatibility_degree(math.pi / 2, 1e-4)
    ia = incompatibility_degree(math.pi / 3, 1e-4)
    ib = incompatibility_degree(2 * math.pi / 3, 1e-4)
    gm = global_minimax(math.pi / 2, restarts=restarts, tol=1e-4, seed=seed, threads=threads)
    lowest = float(np.min(gm.extras["restart_values"]))
    md = mean_divergence(0.0)
    return [
        Check("divergence(X,Y || M0) = c_orth2", abs(d2.value - c["c_orth2"]), 1e-8),
        Check("divergence(X,Y,Z || M0) = c_orth3", abs(d3.value - c["c_orth3"]), 1e-8),
        Check("I(0) = 0", i0.value, 1e-4),
        Check("I(pi/2) = c_orth2", abs(i90.value - c["c_orth2"]), 2e-4),
        Check("I(pi/3) = I(2pi/3)", abs(ia.value - ib.value), 2e-4),
        Check(f"global_minimax(pi/2), {restarts} restarts: no restart below c_orth2 - 1e-3",
              max(0.0, c["c_orth2"] - lowest), 1e-3),
        Check("mean_divergence(0) = c_inf", abs(md.value - c["c_inf"]), 1e-9),
    ]


def suite_sampler(seed: int) -> list[Check]:
    c = cf.constants()
    X, Y = (spin_observable(d) for d in coordinate_axes(2))
    M0 = d4_family(1 / math.sqrt(2))
    s = BlochState((1.0, 0.0, 0.0))
    n = 10**6
    est = empirical_error_function([X, Y], M0, s, n, seed)
    again = empirical_error_function([X, Y], M0, s, n, seed)
    run = sample_outcomes(M0, s, n, seed)
    p = 0.5 + 1 / (2 * math.sqrt(2))
    freq = sum(cnt for o, cnt in zip(run.outcomes, run.counts) if o[0] == 1) / n
    sigma = math.sqrt(p * (1 - p) / n)
    return [
        Check("empirical error function (n=1e6) vs c_orth2", abs(est - c["c_orth2"]), 0.01),
        Check("seed determinism", abs(est - again), 0.0),
        Check("marginal frequency within 5 sigma", abs(freq - p), 5 * sigma),
    ]


def run_suite(name: str, seed: int = 0, restarts: int = DEFAULT_RESTARTS, threads: int = 1) -> dict:
    names = SUITES if name == "all" else (name,)
    if any(n not in SUITES for n in names):
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    results = {}
    for n in names:
        if n == "core":
            checks = suite_core(seed)
        elif n == "closed-forms":
            checks = suite_closed_forms(seed)
        elif n == "minimax":
            checks = suite_minimax(seed, restarts, threads)
        else:
            checks = suite_sampler(seed)
        results[n] = {
            "passed": all(c.passed for c in checks),
            "checks": [c.as_dict() for c in checks],
        }
    return {"suite": name, "seed": seed, "passed": all(r["passed"] for r in results.values()), "suites": results}
