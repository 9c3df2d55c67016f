import math
import os
import subprocess
import sys

import numpy as np
import pytest

from phasestab import _pykernels, kernels
from phasestab.frames import FiniteFrame
from phasestab.stability import _lifts_real

try:
    from phasestab import _ckernels
except ImportError:
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def lifts(rng, N, d, cplx=False):
    V = rng.standard_normal((N, d))
    if cplx:
        V = V + 1j * rng.standard_normal((N, d))
    return _lifts_real(FiniteFrame(V, "complex" if cplx else "real"))


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "numpy")


def test_pure_env_selects_numpy():
    env = dict(os.environ, PHASESTAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from phasestab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_split_scan_known():
    P = _lifts_real(FiniteFrame([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    sigma, mask, cands, over = _pykernels.split_scan(P, 1e-8, 10)
    assert abs(sigma - (3 - math.sqrt(5)) / 2) <= 1e-12
    assert cands == [] and not over


def test_split_scan_brute_force(rng):
    for d in (1, 2, 3, 4):
        P = lifts(rng, 7, d)
        best = math.inf
        for mask in range(1 << 6):
            S = sum((P[n] for n in range(6) if mask >> n & 1), np.zeros((d, d)))
            C = P.sum(axis=0) - S
            ls = np.linalg.eigvalsh(S)[0] if mask else 0.0
            best = min(best, max(ls, np.linalg.eigvalsh(C)[0]))
        assert _pykernels.split_scan(P, 0, 1)[0] == pytest.approx(best, rel=1e-10, abs=1e-14)


def test_split_scan_candidates_and_cap():
    # {e1, e1, e2, e2}: S = {e1, e1} spans nothing beyond e1, and neither does its complement
    P = _lifts_real(FiniteFrame([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]))
    sigma, mask, cands, over = _pykernels.split_scan(P, 1e-9, 10)
    assert sigma == 0.0 and 3 in cands
    P = _lifts_real(FiniteFrame([[1.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]))  # every split fails
    _, _, cands, over = _pykernels.split_scan(P, 1e-9, 2)
    assert len(cands) == 2 and over


@needs_ext
@pytest.mark.parametrize("d,N,cplx", [(1, 9, False), (2, 11, False), (3, 12, False), (4, 10, False), (4, 9, True)])
def test_split_scan_parity(rng, d, N, cplx):
    dim = d // 2 if cplx else d
    P = lifts(rng, N, dim, cplx)
    a = _ckernels.split_scan(P, 1e-8, 100)
    b = _pykernels.split_scan(P, 1e-8, 100)
    assert a[0] == pytest.approx(b[0], rel=1e-8, abs=1e-13)
    assert a[1] == b[1]
    assert a[2] == b[2] and a[3] == b[3]


@needs_ext
def test_split_scan_parity_degenerate():
    P = _lifts_real(FiniteFrame(np.vstack([np.eye(3)] * 2 + [[1.0, 1.0, 0.0]])))
    a = _ckernels.split_scan(P, 1e-8, 1000)
    b = _pykernels.split_scan(P, 1e-8, 1000)
    assert a[2] == b[2] and a[3] == b[3] and a[0] == pytest.approx(b[0], abs=1e-14)


@needs_ext
@pytest.mark.parametrize("m,w", [(1, 50), (3, 1000), (8, 400)])
def test_sinc_gap_parity(m, w):
    assert _ckernels.sinc_gap_sq(m, w) == pytest.approx(_pykernels.sinc_gap_sq(m, w), rel=1e-12)


@needs_ext
def test_far_gap_parity():
    args = (3, 4003, 0.01, math.sqrt(1 - 1e-4), -200000, 210000)
    assert _ckernels.far_gap_sum(*args) == pytest.approx(_pykernels.far_gap_sum(*args), rel=1e-11)


def test_far_gap_direct():
    ja, jb, lo, hi = 1, 203, -3000, 3200
    t = float(np.sinc((jb - ja) / 4))
    nu = math.sqrt(1 - t * t)
    n = np.arange(lo, hi + 1)
    z1 = np.sinc((n - ja) / 4)
    z2 = (np.sinc((n - jb) / 4) - t * z1) / nu
    want = math.fsum((np.abs(z1 + z2) - np.abs(z1 - z2)) ** 2)
    assert kernels.far_gap_sum(ja, jb, t, nu, lo, hi) == pytest.approx(want, rel=1e-10)
