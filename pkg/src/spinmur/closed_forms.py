"""Closed-form error functions, bounds and constants (bits)."""
from __future__ import annotations

import math
from typing import Sequence

from .qubit import BlochState

LOG2E = 1.0 / math.log(2.0)

# |1 - 2 eps| and r below these use the explicit limits of the mean error function
SHRINK_SWITCH = 1e-6
RADIUS_SWITCH = 1e-8

FORMULAS = {
    "sd_general_c": "sum_k (1+r_k)/2 log((1+r_k)/(1+c r_k)) + (1-r_k)/2 log((1-r_k)/(1-c r_k))",
    "sd2": "sd_general_c((r1, r2), 1/sqrt(2))",
    "sd3": "sd_general_c((r1, r2, r3), 1/sqrt(3))",
    "mean_error": "sphere-averaged error of the SO(3)-covariant family at (|r|, eps)",
    "sd_inf": "(1+r)^2/4r log 2(1+r)/(2+r) + (1-r)^2/4r log (2-r)/2(1-r) + 1/4r log (2+r)/(2-r) - log(e)/2",
    "c_orth2": "log2[2(2 - sqrt(2))]",
    "c_orth3": "log2(3 - sqrt(3))",
    "c_inf": "3/4 log2(4/3) - (log2(e) - 1)/2",
}


class BoundValue(float):
    def __new__(cls, bits, formula: str):
        obj = super().__new__(cls, max(float(bits), 0.0))
        obj.formula = formula
        return obj

    @property
    def infinite(self) -> bool:
        return math.isinf(self)

    def __repr__(self):
        return f"BoundValue({float(self)!r}, formula={self.formula!r})"


def _xlog_ratio(w: float, num: float, den: float) -> float:
    """``w * ln(num/den)`` with ``0 * ln(0/.) = 0``."""
    if w == 0.0:
        return 0.0
    if den <= 0.0:
        return math.inf
    return w * (math.log(num) - math.log(den))


def _component_term(r: float, c: float) -> float:
    # log1p keeps relative accuracy for small r
    out = 0.0
    for x in (1.0, -1.0):
        w = (1.0 + x * r) / 2.0
        if w == 0.0:
            continue
        if 1.0 + x * c * r <= 0.0:
            return math.inf
        out += w * (math.log1p(x * r) - math.log1p(x * c * r))
    return out


def sd_general_c(components: Sequence[float], c: float) -> BoundValue:
    """Error function of the D4 (two components) or O (three) covariant family."""
    comps = [float(x) for x in components]
    if len(comps) not in (2, 3):
        raise ValueError("need two or three Bloch components")
    if any(abs(x) > 1.0 for x in comps) or abs(c) > 1.0:
        raise ValueError("components and c must lie in [-1, 1]")
    total = sum(_component_term(x, c) for x in comps)
    return BoundValue(total * LOG2E, "sd_general_c")


def sd2_bound(r1: float, r2: float) -> BoundValue:
    if r1 * r1 + r2 * r2 > 1.0 + 1e-12:
        raise ValueError("r1^2 + r2^2 must not exceed 1")
    return BoundValue(sd_general_c((r1, r2), 1.0 / math.sqrt(2.0)), "sd2")


def sd3_bound(r) -> BoundValue:
    s = r if isinstance(r, BlochState) else BlochState(r)
    return BoundValue(sd_general_c(tuple(s.r), 1.0 / math.sqrt(3.0)), "sd3")


def _mean_error_no_shrink(r: float) -> float:
    # (log2 e / 2r) * int_{-r}^{r} (1+z) ln(1+z) dz
    def G(z):
        u = 1.0 + z
        return 0.0 if u == 0.0 else 0.5 * u * u * math.log(u) - 0.25 * u * u

    return LOG2E * (G(r) - G(-r)) / (2.0 * r)


def mean_error_closed(r: float, epsilon: float) -> BoundValue:
    """Sphere-averaged error of the SO(3)-covariant family at Bloch radius ``r``."""
    if not (0.0 <= r <= 1.0 + 1e-12) or not (0.0 <= epsilon <= 1.0):
        raise ValueError("need 0 <= r <= 1 and 0 <= epsilon <= 1")
    r = min(r, 1.0)
    k = 1.0 - 2.0 * epsilon
    if r < RADIUS_SWITCH:
        return BoundValue(0.0, "mean_error")
    if abs(k) < SHRINK_SWITCH:
        return BoundValue(_mean_error_no_shrink(r), "mean_error")
    h = 0.5 * k * r
    term1 = (1.0 + r) ** 2 / (4.0 * r) * (math.log1p(r) - math.log1p(h))
    term2 = 0.0
    if r < 1.0:
        term2 = -((1.0 - r) ** 2) / (4.0 * r) * (math.log1p(-r) - math.log1p(-h))
    p = 1.0 + 2.0 * epsilon
    term3 = p * p / (4.0 * k * k * r) * (math.log1p(h) - math.log1p(-h))
    term4 = -p / (2.0 * k)
    return BoundValue(LOG2E * (term1 + term2 + term3 + term4), "mean_error")


def sd_inf_bound(r: float) -> BoundValue:
    """Optimal SO(3)-covariant mean error, written out for ``eps = 0``."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    if r < RADIUS_SWITCH:
        return BoundValue(0.0, "sd_inf")
    out = (1.0 + r) ** 2 / (4.0 * r) * math.log(2.0 * (1.0 + r) / (2.0 + r))
    if r < 1.0:
        out += (1.0 - r) ** 2 / (4.0 * r) * math.log((2.0 - r) / (2.0 * (1.0 - r)))
    out += math.log((2.0 + r) / (2.0 - r)) / (4.0 * r) - 0.5
    return BoundValue(out * LOG2E, "sd_inf")


def constants() -> dict[str, BoundValue]:
    c2 = math.log2(2.0 * (2.0 - math.sqrt(2.0)))
    c3 = math.log2(3.0 - math.sqrt(3.0))
    cinf = 0.75 * math.log2(4.0 / 3.0) - (LOG2E - 1.0) / 2.0
    return {
        "c_orth2": BoundValue(c2, "c_orth2"),
        "c_orth3": BoundValue(c3, "c_orth3"),
        "c_inf": BoundValue(cinf, "c_inf"),
        "mean_c_orth2": BoundValue(c2 / 2.0, "c_orth2 / 2"),
        "mean_c_orth3": BoundValue(c3 / 3.0, "c_orth3 / 3"),
        "mean_c_inf": BoundValue(cinf, "c_inf"),
    }
