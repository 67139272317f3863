"""Qubit states, effects and POVMs in real Pauli coordinates.

An operator ``t*I + v.sigma`` is stored as the pair ``(t, v)``; its eigenvalues
are ``t +- |v|`` and its trace against ``rho = (I + r.sigma)/2`` is ``t + v.r``.
No complex matrices are kept here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-12

Outcome = tuple


class InvalidDirection(ValueError):
    pass


class InvalidState(ValueError):
    pass


class InvalidPovm(ValueError):
    pass


def _vec3(v) -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BlochState:
    r: np.ndarray

    def __post_init__(self):
        r = _vec3(self.r)
        if not np.all(np.isfinite(r)) or np.linalg.norm(r) > 1.0 + ATOL:
            raise InvalidState(f"Bloch vector must satisfy |r| <= 1, got |r| = {np.linalg.norm(r)!r}")
        object.__setattr__(self, "r", r)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.r))

    def density_matrix(self) -> np.ndarray:
        return 0.5 * (np.eye(2) + pauli_dot(self.r))


@dataclass(frozen=True)
class Direction:
    a: np.ndarray

    def __post_init__(self):
        a = _vec3(self.a)
        if not np.all(np.isfinite(a)) or abs(np.linalg.norm(a) - 1.0) > ATOL:
            raise InvalidDirection(f"direction must be a unit vector, got |a| = {np.linalg.norm(a)!r}")
        object.__setattr__(self, "a", a)

    @classmethod
    def normalized(cls, a) -> "Direction":
        a = np.asarray(a, dtype=float)
        return cls(a / np.linalg.norm(a))


@dataclass(frozen=True)
class Effect:
    """Operator ``t*I + v.sigma``.

    Construction does not enforce ``0 <= E <= I``; use :meth:`violations` or
    :func:`povm_validate`, so that boundary candidates produced by optimizers
    can be inspected rather than rejected outright.
    """

    t: float
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "v", _vec3(self.v))

    @property
    def eigenvalues(self) -> tuple[float, float]:
        n = float(np.linalg.norm(self.v))
        return self.t - n, self.t + n

    def violations(self, atol: float = ATOL) -> list[tuple[str, float]]:
        """Signed residuals of violated constraints (empty when valid)."""
        lo, hi = self.eigenvalues
        out = []
        if lo < -atol:
            out.append(("positivity", -lo))
        if hi > 1.0 + atol:
            out.append(("boundedness", hi - 1.0))
        return out

    def matrix(self) -> np.ndarray:
        return self.t * np.eye(2) + pauli_dot(self.v)

    def __add__(self, other: "Effect") -> "Effect":
        return Effect(self.t + other.t, self.v + other.v)

    def scaled(self, s: float) -> "Effect":
        return Effect(s * self.t, s * self.v)

    def isclose(self, other: "Effect", atol: float = 1e-12) -> bool:
        return abs(self.t - other.t) <= atol and bool(np.all(np.abs(self.v - other.v) <= atol))


@dataclass(frozen=True)
class Povm:
    outcomes: tuple
    effects: tuple

    def __post_init__(self):
        outcomes = tuple(tuple(o) if isinstance(o, (tuple, list)) else (o,) for o in self.outcomes)
        effects = tuple(self.effects)
        if len(outcomes) != len(effects):
            raise InvalidPovm("outcomes and effects differ in length")
        if len(set(outcomes)) != len(outcomes):
            raise InvalidPovm("duplicate outcome labels")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "effects", effects)

    def __len__(self):
        return len(self.effects)

    def __getitem__(self, outcome) -> Effect:
        if not isinstance(outcome, tuple):
            outcome = (outcome,)
        return self.effects[self.outcomes.index(outcome)]

    def items(self):
        return zip(self.outcomes, self.effects)

    @property
    def arity(self) -> int:
        return len(self.outcomes[0])

    def ts(self) -> np.ndarray:
        return np.array([e.t for e in self.effects])

    def vs(self) -> np.ndarray:
        return np.array([e.v for e in self.effects])

    def probabilities(self, state: BlochState) -> np.ndarray:
        return self.ts() + self.vs() @ state.r


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    @property
    def first(self):
        return self.violations[0] if self.violations else None


_SIGMA = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


def pauli_dot(v) -> np.ndarray:
    return np.tensordot(np.asarray(v, dtype=float), _SIGMA, axes=1)


def spin_observable(a) -> Povm:
    """Sharp spin component along ``a`` with outcomes +1 and -1."""
    if not isinstance(a, Direction):
        a = Direction(a)
    return Povm(((1,), (-1,)), (Effect(0.5, 0.5 * a.a), Effect(0.5, -0.5 * a.a)))


def binary_povm(t: float, v) -> Povm:
    """Two-outcome POVM whose +1 effect is ``(t, v)``."""
    v = np.asarray(v, dtype=float)
    return Povm(((1,), (-1,)), (Effect(t, v), Effect(1.0 - t, -v)))


def outcome_prob(e: Effect, s: BlochState) -> float:
    return float(e.t + e.v @ s.r)


def povm_validate(p: Povm, atol: float = ATOL) -> ValidationReport:
    found = []
    for outcome, e in p.items():
        for kind, residual in e.violations(atol):
            found.append((kind, outcome, residual))
    t_res = float(sum(e.t for e in p.effects) - 1.0)
    v_res = np.sum([e.v for e in p.effects], axis=0)
    if abs(t_res) > atol:
        found.append(("normalization", None, t_res))
    if np.max(np.abs(v_res)) > atol:
        found.append(("normalization", None, float(np.max(np.abs(v_res)))))
    return ValidationReport(not found, found)


def marginal(p: Povm, axis: int) -> Povm:
    """Binary marginal of a POVM on a product of {-1,+1} labels."""
    if not 0 <= axis < p.arity:
        raise IndexError(f"axis {axis} out of range for arity {p.arity}")
    effects = []
    for x in (1, -1):
        members = [e for o, e in p.items() if o[axis] == x]
        if not members:
            raise InvalidPovm(f"no outcome with coordinate {axis} equal to {x}")
        effects.append(Effect(sum(e.t for e in members), np.sum([e.v for e in members], axis=0)))
    return Povm(((1,), (-1,)), effects)


def marginals(p: Povm) -> list[Povm]:
    return [marginal(p, k) for k in range(p.arity)]


def is_rotation(R, atol: float = 1e-10) -> bool:
    R = np.asarray(R, dtype=float)
    return (
        R.shape == (3, 3)
        and np.allclose(R @ R.T, np.eye(3), atol=atol)
        and abs(np.linalg.det(R) - 1.0) <= atol
    )


def rotate_effect(e: Effect, R) -> Effect:
    R = np.asarray(R, dtype=float)
    if not is_rotation(R):
        raise ValueError("R must be a proper rotation matrix")
    return Effect(e.t, R @ e.v)


def rotation(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about ``axis`` by ``angle`` radians."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


def product_outcomes(k: int) -> list[Outcome]:
    """Labels of {-1,+1}^k with +1 first in each coordinate."""
    labels: list[Outcome] = [()]
    for _ in range(k):
        labels = [o + (x,) for o in labels for x in (1, -1)]
    return labels


def effects_from_arrays(outcomes: Sequence[Outcome], ts: Iterable[float], vs) -> Povm:
    return Povm(tuple(outcomes), tuple(Effect(t, v) for t, v in zip(ts, np.asarray(vs, dtype=float))))
