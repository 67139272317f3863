"""Sup over states, inf over measurements.

The error function is a sum of relative entropies between distributions that
are affine in the Bloch vector, hence jointly convex in ``r``; its supremum over
the Bloch ball is therefore attained on the unit sphere and every search here
is restricted to the sphere.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from . import kernels
from ._loops import pick_starts
from .closed_forms import mean_error_closed, sd_general_c
from .entropy import PROB_FLOOR
from .families import FamilyParam, d2_family, target_pair
from .qubit import Povm, InvalidPovm, marginals, povm_validate, product_outcomes, spin_observable

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
INNER_RATIO = 10.0
GAMMA_GRID = 41
DEFAULT_SEED = 0
DEFAULT_RESTARTS = 64
# objective value used for candidates with infinite divergence
REJECT = 1e3


@dataclass
class OptResult:
    value: float
    witness: dict
    iterations: int
    tolerance: float
    converged: bool = True
    extras: dict = field(default_factory=dict)

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def golden_section(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-7, max_iter: int = 200):
    """Golden-section minimization on ``[lo, hi]``; also compares the endpoints.

    Returns ``(xmin, fmin, evaluations)``.
    """
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    n = 2
    while hi - lo > xtol and n < max_iter:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        n += 1
    best = (x1, f1) if f1 <= f2 else (x2, f2)
    for x in (lo, hi):
        fx = f(x)
        n += 1
        if fx < best[1]:
            best = (x, fx)
    return best[0], best[1], n


def grid_then_golden(f, lo, hi, n_grid, xtol=1e-7):
    """Global grid scan, then golden section inside the best bracket (no unimodality assumed)."""
    xs = np.linspace(lo, hi, n_grid)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmin(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n_grid - 1)]
    x, fx, n = golden_section(f, a, b, xtol)
    if vals[i] < fx:
        x, fx = xs[i], vals[i]
    return x, fx, n + n_grid, xs, vals


# --- state suprema -----------------------------------------------------------


def _tangent_basis(x):
    e1 = np.cross(x, [1.0, 0.0, 0.0] if abs(x[0]) < 0.9 else [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(x, e1)


def sup_over_states(objective: Callable[[np.ndarray], float], tol: float = 1e-6, n_theta: int = 32, n_phi: int = 64, starts: int = 6) -> OptResult:
    """Maximize ``objective(r)`` over unit Bloch vectors.

    Generic (slow) path for arbitrary callables: grid scan, then Nelder-Mead in
    tangent-plane coordinates around the best separated grid points.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    pts = kernels.sphere_grid_numpy(n_theta, n_phi)
    vals = np.array([objective(p) for p in pts], dtype=float)
    if not np.isfinite(vals).any() and not np.isinf(vals).any():
        raise ValueError("objective is not finite anywhere on the sphere")
    if np.isposinf(vals).any():
        i = int(np.argmax(vals))
        return OptResult(math.inf, {"state": pts[i]}, len(pts), 0.0)
    idx = pick_starts(pts, np.nan_to_num(vals, nan=-np.inf), starts, 2.0 * math.pi / max(n_theta, n_phi / 2))
    best_f, best_x, evals, gap = -math.inf, None, len(pts), math.inf
    for i in idx:
        x0 = pts[i]
        e1, e2 = _tangent_basis(x0)

        def neg(u, x0=x0, e1=e1, e2=e2):
            y = x0 + u[0] * e1 + u[1] * e2
            return -objective(y / np.linalg.norm(y))

        res = optimize.minimize(neg, np.zeros(2), method="Nelder-Mead",
                                options={"xatol": 1e-9, "fatol": tol / 10, "initial_simplex": [[0, 0], [0.05, 0], [0, 0.05]]})
        evals += res.nfev
        y = x0 + res.x[0] * e1 + res.x[1] * e2
        if -res.fun > best_f:
            best_f, best_x = -res.fun, y / np.linalg.norm(y)
            gap = abs(res.final_simplex[1][-1] - res.final_simplex[1][0])
    return OptResult(float(best_f), {"state": best_x}, evals, gap, gap <= tol)


def _as_target(t) -> Povm:
    if isinstance(t, Povm):
        return t
    return spin_observable(t)


def binary_arrays(targets: Sequence[Povm], margs: Sequence[Povm]):
    tt = np.array([t[(1,)].t for t in targets])
    tv = np.array([t[(1,)].v for t in targets])
    mt = np.array([m[(1,)].t for m in margs])
    mv = np.array([m[(1,)].v for m in margs])
    return tt, tv, mt, mv


def _support_failure(tt, tv, mt, mv):
    """A state where some marginal outcome has zero probability but its target does not."""
    for k in range(len(tt)):
        for s in (1.0, -1.0):
            t = mt[k] if s > 0 else 1.0 - mt[k]
            v = s * mv[k]
            nv = float(np.linalg.norm(v))
            if t - nv >= PROB_FLOOR:
                continue
            r0 = -v / nv if nv > 0 else np.array([0.0, 0.0, 1.0])
            candidates = [r0] if nv > 0 else [r0, -r0, np.array([1.0, 0.0, 0.0])]
            for r in candidates:
                p = (tt[k] + tv[k] @ r) if s > 0 else (1.0 - tt[k] - tv[k] @ r)
                if p >= PROB_FLOOR:
                    return r
    return None


def _seeds(tv, mv):
    dirs = []
    for v in np.vstack([tv, mv]):
        n = np.linalg.norm(v)
        if n > 1e-12:
            dirs += [v / n, -v / n]
    return np.array(dirs).reshape(-1, 3)


def sphere_sup_arrays(tt, tv, mt, mv, tol: float, n_theta: int = 32, n_phi: int = 64) -> OptResult:
    bad = _support_failure(tt, tv, mt, mv)
    if bad is not None:
        return OptResult(math.inf, {"state": bad}, 0, 0.0)
    f, x, it, gain = kernels.sphere_sup(tt, tv, mt, mv, n_theta, n_phi, seeds=_seeds(tv, mv))
    if math.isinf(f):
        return OptResult(math.inf, {"state": x}, it, 0.0)
    return OptResult(f, {"state": x}, it, gain, gain <= tol)


def divergence(targets, M: Povm, tol: float = 1e-6, n_theta: int = 32, n_phi: int = 64) -> OptResult:
    """Worst-case error function of ``M`` against the targets (sup over states)."""
    targets = [_as_target(t) for t in targets]
    report = povm_validate(M)
    if not report:
        raise InvalidPovm(f"approximating POVM is invalid: {report.first}")
    if M.arity != len(targets):
        raise ValueError(f"POVM has {M.arity} outcome coordinates for {len(targets)} targets")
    return sphere_sup_arrays(*binary_arrays(targets, marginals(M)), tol, n_theta, n_phi)


def incompatibility_degree(alpha: float, tol: float = 1e-4, n_grid: int = GAMMA_GRID) -> OptResult:
    """Least divergence over the D2-covariant family for targets at angle ``alpha``."""
    pair = target_pair(alpha)
    targets = [spin_observable(pair.a), spin_observable(pair.b)]
    inner = tol / INNER_RATIO
    cache = {}

    def f(g):
        g = float(g)
        if g not in cache:
            cache[g] = divergence(targets, d2_family(FamilyParam.gamma(g)), inner)
        r = cache[g]
        return REJECT if r.infinite else r.value

    g_opt, val, n, _, _ = grid_then_golden(f, -1.0, 1.0, n_grid)
    best = cache[float(g_opt)]
    return OptResult(
        float(val),
        {"gamma": float(g_opt), "state": best.witness["state"]},
        n,
        max(best.tolerance, 0.0),
        best.converged,
        {"alpha": float(alpha)},
    )


def minimize_family(kind: str, state, n_grid: int = 201) -> OptResult:
    """Optimal covariant parameter ``c`` for the state-dependent error function."""
    from .qubit import BlochState

    s = state if isinstance(state, BlochState) else BlochState(state)
    if kind not in ("c2", "c3"):
        raise ValueError("kind must be 'c2' or 'c3'")
    comps = s.r[:2] if kind == "c2" else s.r[:3]
    lo, hi = FamilyParam(0.0, kind).interval

    def f(c):
        return float(sd_general_c(comps, c))

    c_opt, val, n, xs, vals = grid_then_golden(f, lo, hi, n_grid, xtol=1e-10)
    degenerate = float(np.max(vals)) <= 1e-12
    witness = {"c": float(hi if degenerate else c_opt)}
    if degenerate:
        witness["interval"] = (lo, hi)
    return OptResult(float(val), witness, n, 1e-10, True, {"all_optimal": degenerate})


# --- unrestricted bi-observables -------------------------------------------


class GeneralBiObservable:
    """Any POVM on {-1,+1}^2.

    Random starts come from 12 unconstrained reals: three logits set the
    weights ``t`` (softmax with the first logit fixed at 0), nine numbers give
    ``v`` for three outcomes and the fourth closes the sum. Any point (t, v) is
    made feasible by clipping and renormalizing ``t`` and shrinking all ``v`` by
    one common factor, which keeps the sum zero; the total positivity excess
    before shrinking is kept as ``penalty``.
    """

    OUTCOMES = tuple(product_outcomes(2))
    N_PARAMS = 12

    def __init__(self, t: np.ndarray, v: np.ndarray, penalty: float = 0.0):
        self.t = t
        self.v = v
        self.penalty = penalty

    @classmethod
    def from_arrays(cls, t, v3) -> "GeneralBiObservable":
        """Project weights ``t`` (4,) and the first three vectors ``v3`` (3, 3)."""
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        t = t / t.sum()
        v = np.empty((4, 3))
        v[:3] = np.asarray(v3, dtype=float).reshape(3, 3)
        v[3] = -v[:3].sum(axis=0)
        norms = np.linalg.norm(v, axis=1)
        excess = np.maximum(norms - t, 0.0)
        with np.errstate(divide="ignore"):
            ratio = np.where(norms > 0, t / np.maximum(norms, 1e-300), np.inf)
        scale = min(1.0, float(ratio.min()))
        return cls(t, v * scale, float(excess.sum()))

    @classmethod
    def from_params(cls, params) -> "GeneralBiObservable":
        params = np.asarray(params, dtype=float)
        logits = np.concatenate([[0.0], params[:3]])
        w = np.exp(logits - logits.max())
        return cls.from_arrays(w / w.sum(), params[3:])

    @classmethod
    def random_params(cls, rng: np.random.Generator) -> np.ndarray:
        return np.concatenate([rng.normal(0.0, 0.3, 3), rng.normal(0.0, 0.2, 9)])

    def flat(self) -> np.ndarray:
        return np.concatenate([self.t, self.v[:3].ravel()])

    def marginal_arrays(self):
        # outcome order (1,1), (1,-1), (-1,1), (-1,-1)
        mt = np.array([self.t[0] + self.t[1], self.t[0] + self.t[2]])
        mv = np.array([self.v[0] + self.v[1], self.v[0] + self.v[2]])
        return mt, mv

    def povm(self) -> Povm:
        from .qubit import effects_from_arrays

        return effects_from_arrays(self.OUTCOMES, self.t, self.v)


# The local search works on x = (t0..t3, v0, v1, v2, s): minimize s subject to
# s >= E(M, r_j) over a working set of states, sum t = 1 and t_i >= |v_i|.
# Each round adds the current worst state on the sphere (exchange method).

N_VARS = 14
Q_CLIP = 1e-12
SMOOTH = 1e-9  # t_i - sqrt(|v_i|^2 + SMOOTH^2) keeps a nonzero gradient at v_i = 0
LN2 = math.log(2.0)


def _marginals_flat(x):
    t = x[:4]
    v0, v1, v2 = x[4:7], x[7:10], x[10:13]
    return np.array([t[0] + t[1], t[0] + t[2]]), np.array([v0 + v1, v0 + v2])


def _epigraph(x, tt, tv, R):
    """E(M, r_j) for every row of ``R`` and its Jacobian in x."""
    mt, mv = _marginals_flat(x)
    p = np.clip(tt[None, :] + R @ tv.T, 0.0, 1.0)
    q = np.clip(mt[None, :] + R @ mv.T, Q_CLIP, 1.0 - Q_CLIP)
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(p > PROB_FLOOR, p * (np.log(np.maximum(p, 1e-300)) - np.log(q)), 0.0)
        dn = np.where(1 - p > PROB_FLOOR, (1 - p) * (np.log(np.maximum(1 - p, 1e-300)) - np.log(1 - q)), 0.0)
    E = (up + dn).sum(axis=1) / LN2
    dq = (-p / q + (1 - p) / (1 - q)) / LN2
    J = np.zeros((len(R), N_VARS))
    J[:, 0] = dq[:, 0] + dq[:, 1]
    J[:, 1] = dq[:, 0]
    J[:, 2] = dq[:, 1]
    J[:, 4:7] = (dq[:, 0] + dq[:, 1])[:, None] * R
    J[:, 7:10] = dq[:, 0][:, None] * R
    J[:, 10:13] = dq[:, 1][:, None] * R
    return E, J


def _vectors(x):
    v = np.empty((4, 3))
    v[:3] = x[4:13].reshape(3, 3)
    v[3] = -v[:3].sum(axis=0)
    return v


def _positivity(x):
    v = _vectors(x)
    return x[:4] - np.sqrt((v * v).sum(axis=1) + SMOOTH**2)


def _positivity_jac(x):
    v = _vectors(x)
    n = np.sqrt((v * v).sum(axis=1) + SMOOTH**2)
    J = np.zeros((4, N_VARS))
    J[np.arange(4), np.arange(4)] = 1.0
    for i in range(3):
        J[i, 4 + 3 * i:7 + 3 * i] = -v[i] / n[i]
        J[3, 4 + 3 * i:7 + 3 * i] = v[3] / n[3]
    return J


_SUM_JAC = np.zeros((1, N_VARS))
_SUM_JAC[0, :4] = 1.0
_T_JAC = np.eye(4, N_VARS)
_OBJ_JAC = np.zeros(N_VARS)
_OBJ_JAC[-1] = 1.0


def _one_restart(k, seed, tt, tv, tol, max_rounds):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
    M = GeneralBiObservable.from_params(GeneralBiObservable.random_params(rng))
    inner = tol / INNER_RATIO
    work = [r for r in np.vstack([2.0 * tv, -2.0 * tv])]
    cons = [
        {"type": "eq", "fun": lambda x: x[:4].sum() - 1.0, "jac": lambda x: _SUM_JAC},
        {"type": "ineq", "fun": lambda x: x[:4], "jac": lambda x: _T_JAC},
        {"type": "ineq", "fun": _positivity, "jac": _positivity_jac},
        {"type": "ineq", "fun": lambda x: x[-1] - _epigraph(x, tt, tv, np.array(work))[0],
         "jac": lambda x: _OBJ_JAC - _epigraph(x, tt, tv, np.array(work))[1]},
    ]
    best_val, best_M, best_state = math.inf, M, None
    model, rounds, solver_steps = None, 0, 0
    for rounds in range(1, max_rounds + 1):
        mt, mv = M.marginal_arrays()
        sup = sphere_sup_arrays(tt, tv, mt, mv, inner)
        val = math.inf if sup.infinite else sup.value
        if val < best_val:
            best_val, best_M, best_state = val, M, sup.witness["state"]
        if model is not None and val <= model + inner:
            break
        work.append(np.asarray(sup.witness["state"], dtype=float))
        z = M.flat()
        s0 = float(np.max(_epigraph(np.append(z, 0.0), tt, tv, np.array(work))[0]))
        res = optimize.minimize(lambda x: x[-1], np.append(z, s0), jac=lambda x: _OBJ_JAC, method="SLSQP",
                                constraints=cons, options={"maxiter": 200, "ftol": 1e-12})
        solver_steps += res.nit
        M = GeneralBiObservable.from_arrays(res.x[:4], res.x[4:13])
        model = float(np.max(_epigraph(np.append(M.flat(), 0.0), tt, tv, np.array(work))[0]))
    mt, mv = best_M.marginal_arrays()
    return {"restart": k, "value": best_val, "t": best_M.t, "v": best_M.v, "marginals": (mt, mv),
            "state": best_state, "evals": solver_steps, "rounds": rounds,
            "converged": model is not None and val <= model + inner}


def global_minimax(alpha: float, restarts: int = DEFAULT_RESTARTS, tol: float = 1e-4, seed: int = DEFAULT_SEED,
                   threads: int = 1, max_rounds: int = 60, near: float = 5e-3) -> OptResult:
    """Multi-start local search for the least divergence over all bi-observables.

    Each restart runs an exchange method from a random POVM: SLSQP on the
    epigraph over a finite set of states, then the true worst state on the
    sphere joins the set, until the sphere adds less than ``tol / 10``.
    Deterministic for a given seed: restart ``k`` draws its start from
    ``SeedSequence(seed, spawn_key=(k,))`` and results are reduced in index order.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    pair = target_pair(alpha)
    tt = np.array([0.5, 0.5])
    tv = 0.5 * np.array([pair.a.a, pair.b.a])
    args = [(k, seed, tt, tv, tol, max_rounds) for k in range(restarts)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            runs = list(ex.map(lambda a: _one_restart(*a), args))
    else:
        runs = [_one_restart(*a) for a in args]
    values = np.array([r["value"] for r in runs])
    best = runs[int(np.argmin(values))]
    distinct = []
    for r in sorted(runs, key=lambda r: (r["value"], r["restart"])):
        if r["value"] > best["value"] + near:
            break
        sig = np.concatenate([r["marginals"][0], r["marginals"][1].ravel()])
        if all(np.max(np.abs(sig - d[1])) > 1e-2 for d in distinct):
            distinct.append((r, sig))
    return OptResult(
        float(best["value"]),
        {"t": best["t"], "v": best["v"], "state": best["state"], "restart": best["restart"]},
        int(sum(r["evals"] for r in runs)),
        tol,
        bool(best["converged"]),
        {
            "alpha": float(alpha),
            "seed": seed,
            "restart_values": values,
            "restart_converged": np.array([r["converged"] for r in runs]),
            "near_optimal": [{"restart": d[0]["restart"], "value": d[0]["value"], "t": d[0]["t"], "v": d[0]["v"]} for d in distinct],
        },
    )


def mean_divergence(epsilon: float, tol: float = 1e-10, n_radii: int = 21) -> OptResult:
    """Worst-case sphere-averaged error of the SO(3)-covariant family.

    The averaged error grows with the Bloch radius, so the supremum is the
    pure-state value; a scan over radii confirms it.
    """
    eps = FamilyParam.epsilon(epsilon).value
    value = float(mean_error_closed(1.0, eps))
    radii = np.linspace(0.0, 1.0, n_radii)
    scan = np.array([float(mean_error_closed(r, eps)) for r in radii])
    ok = bool(scan.max() <= value + tol)
    return OptResult(value, {"state": np.array([0.0, 0.0, 1.0]), "radius": 1.0}, n_radii + 1, 0.0, ok,
                     {"epsilon": eps, "ball_scan_ok": ok})
