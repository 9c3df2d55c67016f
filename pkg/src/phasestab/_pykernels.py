"""NumPy implementations of the hot loops (used when the extension is absent)."""
from __future__ import annotations

import math

import numpy as np

_CHUNK = 1 << 15


def split_scan(P: np.ndarray, threshold: float, cap: int):
    """See ``_ckernels.split_scan``."""
    N, d, _ = P.shape
    total = 1 << (N - 1)
    T = P.sum(axis=0)
    flat = P.reshape(N, d * d)
    best = math.inf
    best_mask = 0
    cands: list[int] = []
    overflow = False
    bits = np.arange(N - 1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        sel = ((masks[:, None] >> bits) & 1).astype(np.float64)
        S = (sel @ flat[: N - 1]).reshape(-1, d, d)
        ls = np.linalg.eigvalsh(S)[:, 0]
        ls[masks == 0] = 0.0
        lc = np.linalg.eigvalsh(T - S)[:, 0]
        val = np.maximum(ls, lc)
        i = int(np.argmin(val))
        if val[i] < best:
            best = float(val[i])
            best_mask = int(masks[i])
        hit = masks[val <= threshold]
        room = cap - len(cands)
        if hit.size > room:
            overflow = True
        cands.extend(int(h) for h in hit[: max(room, 0)])
    return best, best_mask, sorted(cands), overflow


def sinc_gap_sq(m: int, window: int) -> float:
    """See ``_ckernels.sinc_gap_sq``."""
    lg = math.lgamma(m + 1.0)
    total = 0.0
    s = np.arange(m, 2 * m + 1, dtype=np.float64)
    for off in (0.25, 0.5, -0.25):
        for start in range(-window, window + 1, _CHUNK):
            k = np.arange(start, min(window + 1, start + _CHUNK), dtype=np.float64)
            x = k + off
            logp = np.log(np.abs(x)[:, None] + s[None, :]).sum(axis=1)
            sx = np.sin(np.pi * x)
            total += float(np.sum(4.0 * sx * sx / np.pi**2 * np.exp(2.0 * (lg - logp))))
    return total


_SIN8 = np.array([math.sin(math.pi * r / 4) for r in range(8)])


def _sinc_q(d: np.ndarray) -> np.ndarray:
    out = np.empty(d.shape)
    nz = d != 0
    out[~nz] = 1.0
    dn = d[nz]
    out[nz] = _SIN8[dn % 8] / (np.pi * dn / 4.0)
    return out


def far_gap_sum(ja: int, jb: int, t: float, nu: float, lo: int, hi: int) -> float:
    """See ``_ckernels.far_gap_sum``."""
    total = 0.0
    step = _CHUNK * 32
    for start in range(lo, hi + 1, step):
        n = np.arange(start, min(hi + 1, start + step), dtype=np.int64)
        z1 = _sinc_q(n - ja)
        z2 = (_sinc_q(n - jb) - t * z1) / nu
        term = (np.abs(z1 + z2) - np.abs(z1 - z2)) ** 2
        total += math.fsum(term)
    return total
