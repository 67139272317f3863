"""Covariant approximate joint measurements and target geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qubit import Direction, Effect, Povm, binary_povm, product_outcomes

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

_INTERVALS = {
    "c2": (-1.0 / SQRT2, 1.0 / SQRT2),
    "c3": (-1.0 / SQRT3, 1.0 / SQRT3),
    "gamma": (-1.0, 1.0),
    "epsilon": (0.0, 1.0),
}
# admit parameters typed with ~8 significant digits, e.g. 0.70710678
_SLACK = 1e-8


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class FamilyParam:
    value: float
    kind: str

    def __post_init__(self):
        if self.kind not in _INTERVALS:
            raise ParameterError(f"unknown family parameter kind {self.kind!r}")
        lo, hi = _INTERVALS[self.kind]
        v = float(self.value)
        if not (lo - _SLACK <= v <= hi + _SLACK):
            raise ParameterError(f"{self.kind} = {v} outside [{lo:.12g}, {hi:.12g}]")
        object.__setattr__(self, "value", min(max(v, lo), hi))

    @property
    def interval(self) -> tuple[float, float]:
        return _INTERVALS[self.kind]

    @classmethod
    def c2(cls, v):
        return cls(v, "c2")

    @classmethod
    def c3(cls, v):
        return cls(v, "c3")

    @classmethod
    def gamma(cls, v):
        return cls(v, "gamma")

    @classmethod
    def epsilon(cls, v):
        return cls(v, "epsilon")

    @property
    def shrink(self) -> float:
        """``lambda = (1 - 2 eps)/2`` for the SO(3) family."""
        return (1.0 - 2.0 * self.value) / 2.0


def _param(p, kind: str) -> FamilyParam:
    if isinstance(p, FamilyParam):
        if p.kind != kind:
            raise ParameterError(f"expected a {kind} parameter, got {p.kind}")
        return p
    return FamilyParam(p, kind)


def d4_family(c) -> Povm:
    """``M(x,y) = [I + c(x s1 + y s2)]/4``, ``|c| <= 1/sqrt2``."""
    c = _param(c, "c2").value
    outcomes = product_outcomes(2)
    return Povm(tuple(outcomes), tuple(Effect(0.25, (c * x / 4, c * y / 4, 0.0)) for x, y in outcomes))


def o_family(c) -> Povm:
    """``M(x,y,z) = [I + c(x s1 + y s2 + z s3)]/8``, ``|c| <= 1/sqrt3``."""
    c = _param(c, "c3").value
    outcomes = product_outcomes(3)
    return Povm(tuple(outcomes), tuple(Effect(0.125, (c * x / 8, c * y / 8, c * z / 8)) for x, y, z in outcomes))


def d2_family(gamma) -> Povm:
    g = _param(gamma, "gamma").value
    outcomes = product_outcomes(2)
    effects = []
    for x, y in outcomes:
        t = (1.0 + g * x * y) / 4
        v = ((x + g * y) / (4 * SQRT2), (y + g * x) / (4 * SQRT2), 0.0)
        effects.append(Effect(t, v))
    return Povm(tuple(outcomes), tuple(effects))


def so3_marginal(epsilon, a) -> Povm:
    """Sign-of-``xi.a`` coarse graining of the SO(3)-covariant ``F_eps``."""
    lam = _param(epsilon, "epsilon").shrink
    a = a if isinstance(a, Direction) else Direction(a)
    return binary_povm(0.5, 0.5 * lam * a.a)


def so3_density(epsilon, theta: float, phi: float) -> tuple[float, np.ndarray]:
    """Pauli coordinates of ``F_eps`` per unit ``sin(theta) dtheta dphi / 4pi``."""
    eps = _param(epsilon, "epsilon").value
    if not (0.0 <= theta <= math.pi):
        raise ValueError("theta must lie in [0, pi]")
    xi = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    return 1.0, (1.0 - 2.0 * eps) * xi


@dataclass(frozen=True)
class TargetPair:
    alpha: float
    a: Direction
    b: Direction

    def directions(self) -> list[Direction]:
        return [self.a, self.b]


def target_pair(alpha: float) -> TargetPair:
    """Unit vectors at angle ``alpha`` placed symmetrically about (1,1,0)/sqrt2."""
    if not (0.0 <= alpha <= math.pi):
        raise ValueError(f"alpha = {alpha} outside [0, pi]")
    h = alpha / 2
    a = (math.cos(math.pi / 4 - h), math.sin(math.pi / 4 - h), 0.0)
    b = (math.cos(math.pi / 4 + h), math.sin(math.pi / 4 + h), 0.0)
    return TargetPair(float(alpha), Direction(a), Direction(b))


def coordinate_axes(k: int) -> list[Direction]:
    return [Direction(np.eye(3)[i]) for i in range(k)]


def covariance_generators(family: str) -> list[tuple[np.ndarray, object]]:
    """Group generators as (Bloch rotation, outcome relabelling) pairs.

    A covariant POVM satisfies ``rotate(M(o), R) == M(relabel(o))`` for each pair.
    """
    from .qubit import rotation

    diag = (1.0, 1.0, 0.0)
    anti = (1.0, -1.0, 0.0)
    if family == "d4":
        return [
            (rotation((1, 0, 0), math.pi), lambda o: (o[0], -o[1])),
            (rotation(diag, math.pi), lambda o: (o[1], o[0])),
        ]
    if family == "o":
        return [
            (rotation((1, 0, 0), math.pi / 2), lambda o: (o[0], -o[2], o[1])),
            (rotation((0, 1, 0), math.pi / 2), lambda o: (o[2], o[1], -o[0])),
            (rotation((0, 0, 1), math.pi / 2), lambda o: (-o[1], o[0], o[2])),
        ]
    if family == "d2":
        return [
            (rotation(diag, math.pi), lambda o: (o[1], o[0])),
            (rotation(anti, math.pi), lambda o: (-o[1], -o[0])),
        ]
    raise ValueError(f"no generators for family {family!r}")
