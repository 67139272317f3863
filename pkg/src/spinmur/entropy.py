"""Relative entropy and the error functions built from it (all in bits)."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import integrate

from .qubit import BlochState, Povm, Direction, spin_observable

LOG2E = 1.0 / math.log(2.0)
PROB_FLOOR = 1e-15


class EntropyValue(float):
    """Non-negative number of bits; ``+inf`` is allowed and flagged."""

    def __new__(cls, bits):
        bits = float(bits)
        if bits < 0.0:
            # rounding can push a vanishing KL slightly negative
            bits = 0.0
        return super().__new__(cls, bits)

    @property
    def infinite(self) -> bool:
        return math.isinf(self)

    @property
    def bits(self) -> float:
        return float(self)

    def __repr__(self):
        return "EntropyValue(+inf)" if self.infinite else f"EntropyValue({float(self)!r})"


def clean_probs(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    return np.where(p < PROB_FLOOR, 0.0, p)


def rel_entropy(p, q) -> EntropyValue:
    """``S(p||q) = sum p log2(p/q)`` with ``0 log 0/0 = 0``; +inf if supp p is not in supp q."""
    p = clean_probs(p)
    q = clean_probs(q)
    if p.shape != q.shape:
        raise ValueError(f"distributions have different lengths: {p.shape} vs {q.shape}")
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        return EntropyValue(math.inf)
    pm, qm = p[mask], q[mask]
    return EntropyValue(LOG2E * float(np.sum(pm * (np.log(pm) - np.log(qm)))))


def _aligned_probs(target: Povm, approx: Povm, s: BlochState) -> tuple[np.ndarray, np.ndarray]:
    if len(target) != 2 or len(approx) != 2:
        raise ValueError("error functions are defined for binary POVMs")
    p = target.probabilities(s)
    q = np.array([approx[o].t + approx[o].v @ s.r for o in target.outcomes])
    return p, q


def error_function(targets: Sequence[Povm], approx_marginals: Sequence[Povm], s: BlochState) -> EntropyValue:
    """Sum over targets of ``S(target^rho || marginal^rho)``."""
    if len(targets) != len(approx_marginals):
        raise ValueError("need one approximating marginal per target")
    total = 0.0
    for tgt, apx in zip(targets, approx_marginals):
        total += rel_entropy(*_aligned_probs(tgt, apx, s))
        if math.isinf(total):
            break
    return EntropyValue(total)


def tensor_identity_check(targets: Sequence[Povm], approx_marginals: Sequence[Povm], s: BlochState) -> float:
    """``|S(A)+S(B) - S(A x B || M1 x M2)|`` for two targets."""
    if len(targets) != 2 or len(approx_marginals) != 2:
        raise ValueError("tensor identity is checked for two targets")
    (pa, qa), (pb, qb) = (_aligned_probs(t, m, s) for t, m in zip(targets, approx_marginals))
    lhs = rel_entropy(pa, qa) + rel_entropy(pb, qb)
    rhs = rel_entropy(np.outer(pa, pb).ravel(), np.outer(qa, qb).ravel())
    if math.isinf(lhs) or math.isinf(rhs):
        return 0.0 if lhs == rhs else math.inf
    return abs(lhs - rhs)


def binary_kl_bits(p, q) -> np.ndarray:
    """Elementwise ``S((p,1-p) || (q,1-q))`` in bits for arrays of probabilities."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.zeros(np.broadcast(p, q).shape)
    for a, b in ((p, q), (1.0 - p, 1.0 - q)):
        a, b = np.broadcast_arrays(clean_probs(a), clean_probs(b))
        pos = a > 0.0
        with np.errstate(divide="ignore"):
            out[pos] += a[pos] * (np.log(a[pos]) - np.log(b[pos]))
    return np.maximum(out * LOG2E, 0.0)


def mean_error_quadrature(epsilon: float, s: BlochState, tol: float = 1e-10) -> EntropyValue:
    """Sphere average of ``S(A_a^rho || M_eps[a]^rho)`` by adaptive quadrature.

    The integrand only depends on ``z = a.r``, which is uniform on ``[-|r|, |r|]``
    under the uniform measure on the sphere, so the average is
    ``(1/2|r|) * int_{-|r|}^{|r|} S(z) dz``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    r = s.norm
    if r == 0.0:
        return EntropyValue(0.0)
    shrink = (1.0 - 2.0 * epsilon) / 2.0

    def integrand(z):
        out = 0.0
        for x in (1.0, -1.0):
            p = (1.0 + x * z) / 2.0
            if p >= PROB_FLOOR:
                out += p * (math.log(p) - math.log((1.0 + x * shrink * z) / 2.0))
        return out * LOG2E

    # error on the average is err / (2r); aim for tol/2 overall
    val, _ = integrate.quad(integrand, -r, r, points=[0.0], epsabs=tol * r, epsrel=1e-14, limit=500)
    return EntropyValue(val / (2.0 * r))


def mean_error_sphere(epsilon: float, s: BlochState, n_polar: int = 400, n_azimuth: int = 800) -> EntropyValue:
    """Same sphere average, computed in lab coordinates with a product rule.

    Gauss-Legendre in ``cos(theta)`` times the periodic trapezoid rule in ``phi``;
    nothing is aligned with ``r``, so this checks rotation invariance directly.
    """
    shrink = (1.0 - 2.0 * epsilon) / 2.0
    u, w = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    sin_t = np.sqrt(1.0 - u**2)
    a = np.stack(
        [np.outer(sin_t, np.cos(phi)), np.outer(sin_t, np.sin(phi)), np.broadcast_to(u[:, None], (n_polar, n_azimuth))],
        axis=-1,
    )
    z = a @ s.r
    vals = binary_kl_bits((1.0 + z) / 2.0, (1.0 + shrink * z) / 2.0)
    return EntropyValue(0.5 * float(w @ vals.mean(axis=1)))


def spin_error(a, epsilon: float, s: BlochState) -> EntropyValue:
    """``S(A_a^rho || M_eps[a]^rho)`` for a single direction via generic POVMs."""
    from .families import FamilyParam, so3_marginal

    a = a if isinstance(a, Direction) else Direction(a)
    return error_function([spin_observable(a)], [so3_marginal(FamilyParam.epsilon(epsilon), a)], s)
