import math
import os
import subprocess
import sys

import numpy as np
import pytest

from spinmur import kernels
from spinmur.entropy import error_function
from spinmur.minimax import binary_arrays
from spinmur.qubit import BlochState, marginals
from spinmur.verify import random_biobservable
from spinmur.families import target_pair
from spinmur.qubit import spin_observable

numba = pytest.importorskip("numba")


def _instance(rng):
    p = target_pair(rng.uniform(0, math.pi))
    targets = [spin_observable(p.a), spin_observable(p.b)]
    M = random_biobservable(rng)
    return targets, M, binary_arrays(targets, marginals(M))


def test_backends_agree_on_grid(rng):
    nb = kernels.get_backend("numba")
    npb = kernels.get_backend("numpy")
    pts = npb.sphere_grid(16, 32)
    assert np.array_equal(pts, nb.sphere_grid(16, 32))
    for _ in range(20):
        targets, M, arrs = _instance(rng)
        a = npb.error_batch(*arrs, pts)
        b = nb.error_batch(*arrs, pts)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-14)
        # and both agree with the object-level pipeline
        mg = marginals(M)
        for i in (0, 7, 100):
            assert a[i] == pytest.approx(float(error_function(targets, mg, BlochState(pts[i]))), abs=1e-12)


def test_backends_agree_on_sup(rng):
    nb = kernels.get_backend("numba")
    npb = kernels.get_backend("numpy")
    for _ in range(10):
        _, _, arrs = _instance(rng)
        f1, x1, _, _ = kernels.sphere_sup(*arrs, be=npb)
        f2, x2, _, _ = kernels.sphere_sup(*arrs, be=nb)
        assert f1 == pytest.approx(f2, abs=1e-10)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_flag_selects_numpy():
    code = "from spinmur import kernels; print(kernels.backend.name)"
    env = dict(os.environ, SPINMUR_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env = dict(os.environ)
    env.pop("SPINMUR_BACKEND", None)
    env["SPINMUR_NO_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
