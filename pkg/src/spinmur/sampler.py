"""Seeded measurement simulation and plug-in error-function estimates.

Random numbers come from numpy's PCG64 bit generator. Draws are made in
shards of ``SHARD`` shots; shard ``j`` of stream ``k`` uses
``SeedSequence(seed, spawn_key=(k, j))`` so counts do not depend on how shards
are scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entropy import EntropyValue, rel_entropy
from .qubit import BlochState, Povm, InvalidPovm, marginal, povm_validate

RNG_ALGORITHM = "PCG64"
SHARD = 1 << 20


@dataclass(frozen=True)
class SampleRun:
    outcomes: tuple
    counts: np.ndarray
    n: int
    seed: int
    stream: int = 0

    def __post_init__(self):
        if int(self.counts.sum()) != self.n:
            raise ValueError("counts do not sum to n")

    def frequencies(self) -> np.ndarray:
        return self.counts / self.n


def _draw(probs: np.ndarray, n: int, seed: int, stream: int) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    counts = np.zeros(len(probs), dtype=np.int64)
    for j, start in enumerate(range(0, n, SHARD)):
        size = min(SHARD, n - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream, j))))
        idx = np.searchsorted(cdf, rng.random(size), side="right")
        counts += np.bincount(idx, minlength=len(probs))
    return counts


def sample_outcomes(p: Povm, s: BlochState, n: int, seed: int, stream: int = 0) -> SampleRun:
    """``n`` i.i.d. outcomes of ``p`` in state ``s`` by inverse-CDF sampling."""
    report = povm_validate(p)
    if not report:
        raise InvalidPovm(f"cannot sample an invalid POVM: {report.first}")
    if n < 1:
        raise ValueError("n must be >= 1")
    probs = np.clip(p.probabilities(s), 0.0, 1.0)
    probs /= probs.sum()
    return SampleRun(p.outcomes, _draw(probs, n, seed, stream), n, seed, stream)


def _marginal_counts(run: SampleRun, axis: int) -> np.ndarray:
    out = np.zeros(2, dtype=np.int64)
    for o, c in zip(run.outcomes, run.counts):
        out[0 if o[axis] == 1 else 1] += c
    return out


def empirical_error_function(targets: Sequence[Povm], M: Povm, s: BlochState, n: int, seed: int) -> EntropyValue:
    """Plug-in estimate of the error function.

    Each target is measured on its own ``n`` shots (stream ``k + 1``); ``M`` is
    measured once on ``n`` shots (stream 0) and its marginal frequencies are
    compared to the target frequencies.
    """
    if M.arity != len(targets):
        raise ValueError("need one target per outcome coordinate of M")
    joint = sample_outcomes(M, s, n, seed, stream=0)
    total = 0.0
    for k, tgt in enumerate(targets):
        run = sample_outcomes(tgt, s, n, seed, stream=k + 1)
        p = np.array([run.counts[run.outcomes.index((x,))] for x in (1, -1)]) / n
        q = _marginal_counts(joint, k) / n
        total += rel_entropy(p, q)
        if math.isinf(total):
            break
    return EntropyValue(total)


def analytic_marginal_prob(M: Povm, s: BlochState, axis: int) -> float:
    m = marginal(M, axis)
    return float(m[(1,)].t + m[(1,)].v @ s.r)
