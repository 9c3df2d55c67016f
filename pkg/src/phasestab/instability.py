"""Instability in infinite dimensions.

Witness pairs for countable frames (a far-away frame vector plus a
component orthogonal to a finite block), and the exact binomial pair for
the quarter-shift sinc frame together with certified gap sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from .frames import GeneratedFrame, SincFrame, _label, _sinc_quarter, _sum_inv_sq_from
from .hilbert import ScalarField
from .stability import null_basis

# largest block handled by the exact complement construction
EXACT_BLOCK_LIMIT = 3000


# -- lemma search ---------------------------------------------------------------


@dataclass
class LemmaResult:
    k: int
    m: int
    eps: float
    proj_sq: float  # ||P_V phi_k||^2 (search criterion)
    head_sum: float  # sum_{n <= N} |<phi_k, phi_n>|^2, evaluated directly
    tail_bound: float  # certified bound on sum_{n > m} |<phi_k, phi_n>|^2

    @property
    def certified_sum(self) -> float:
        return self.head_sum + self.tail_bound


def _projection_sq(gen: GeneratedFrame, N: int, ks: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    b, err = gen.gram_block(ks, np.arange(1, N + 1))
    c = b @ ginv.T
    val = np.einsum("kn,kn->k", c, b.conj()).real
    return val, b, err


def _gram_pinv(gen: GeneratedFrame, N: int) -> np.ndarray:
    G, _ = gen.gram_block(np.arange(1, N + 1), np.arange(1, N + 1))
    w, U = np.linalg.eigh(G.conj())
    keep = w > N * np.finfo(float).eps * max(w[-1], 0.0)
    return (U[:, keep] / w[keep]) @ U[:, keep].conj().T


def lemma_search(gen: GeneratedFrame, eps: float, N: int, budget: int = 10**9, chunk: int = 1 << 14) -> LemmaResult:
    """Find k > N and m > k with sum over n outside N+1..m of |<phi_k, phi_n>|^2 < eps.

    k is the first index with ||P_V phi_k||^2 < eps / (2B), V the span of
    phi_1..phi_N; m is the smallest index (found by galloping and
    bisection) whose certified tail is below eps / 2.  The head sum is
    re-evaluated directly and the pair is only accepted when head plus
    tail is certified below eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if N < 1:
        raise ValueError("N must be at least 1")
    ginv = _gram_pinv(gen, N)
    start = N + 1
    while start <= budget:
        ks = np.arange(start, min(budget, start + chunk - 1) + 1)
        proj, b, err = _projection_sq(gen, N, ks, ginv)
        for i in np.flatnonzero(proj < eps / (2.0 * gen.B)):
            k = int(ks[i])
            head = float(np.sum((np.abs(b[i]) + err[i]) ** 2))
            m = _smallest_m(gen, k, eps / 2.0, budget)
            if m is None:
                continue
            tail = float(gen.gram_tail_sq(k, m))
            if head + tail < eps:
                return LemmaResult(k, m, eps, float(proj[i]), head, tail)
        start = int(ks[-1]) + 1
    raise RuntimeError(f"no admissible k found below index {budget}")


def _smallest_m(gen, k, target, budget) -> Optional[int]:
    lo = k  # largest m known to fail (or the start)
    step = 1
    hi = None
    while k + step <= budget:
        m = k + step
        if gen.gram_tail_sq(k, m) < target:
            hi = m
            break
        lo = m
        step *= 2
    if hi is None:
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gen.gram_tail_sq(k, mid) < target:
            hi = mid
        else:
            lo = mid
    return hi


# -- witness pairs ------------------------------------------------------------


@dataclass
class WitnessPair:
    """f = u + psi, g = u - psi with u = phi_k / ||phi_k|| and psi a unit vector.

    ``f``/``g`` hold reference coordinates over ``window`` (None when the
    pair is only described symbolically); ``gap_value`` is the measured
    gap over the evaluated indices and ``gap_tail_bound`` bounds the rest,
    so the full gap is at most their sum.
    """

    k: int
    m: int
    N: int
    eps: float
    delta: float
    gap_value: float
    gap_tail_bound: float
    distance: float
    norm_f: float
    norm_g: float
    mode: str
    window: Optional[tuple[int, int]] = None
    f: Optional[np.ndarray] = field(default=None, repr=False)
    g: Optional[np.ndarray] = field(default=None, repr=False)
    psi_ref: Optional[int] = None
    lemma: Optional[LemmaResult] = field(default=None, repr=False)

    @property
    def gap_bound(self) -> float:
        return self.gap_value + self.gap_tail_bound

    @property
    def certified(self) -> bool:
        return self.gap_bound <= self.delta


def _closed_distance(nu2, npsi2, ip_u_psi, field):
    """Norms of u +- psi and their quotient distance from Gram data."""
    nf2 = nu2 + npsi2 + 2.0 * ip_u_psi.real
    ng2 = nu2 + npsi2 - 2.0 * ip_u_psi.real
    ip = nu2 - npsi2 - ip_u_psi + np.conj(ip_u_psi)  # <u+psi, u-psi>
    ov = abs(ip.real) if field is ScalarField.REAL else abs(ip)
    d = math.sqrt(max(0.0, nf2 + ng2 - 2.0 * ov))
    return math.sqrt(nf2), math.sqrt(ng2), d


def build_witness(gen: GeneratedFrame, delta: float, N: int, budget: int = 10**9,
                  exact_block_limit: int = EXACT_BLOCK_LIMIT) -> WitnessPair:
    """Pair with quotient distance 2 and measurement gap at most ``delta``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    c = gen.min_norm
    eps = c * c * delta * delta / 4.0
    lem = lemma_search(gen, eps, N, budget)
    if isinstance(gen, SincFrame):
        # sinc vectors have no finite support, so the exact complement is unavailable
        return _far_field_witness(gen, lem, N, delta)
    if lem.m - N <= exact_block_limit:
        return _complement_witness(gen, lem, N, delta)
    raise RuntimeError(f"block of {lem.m - N} vectors is too large for an exact complement")


def _complement_witness(gen, lem: LemmaResult, N: int, delta: float) -> WitnessPair:
    k, m = lem.k, lem.m
    block = np.arange(N + 1, m + 1)
    wins = [gen.support_window(int(n)) for n in block]
    pad = len(block) + 8
    lo = min(w[0] for w in wins) - pad
    hi = max(w[1] for w in wins) + pad
    if gen.name in ("onb", "riesz"):
        lo = 1
    rows = np.array([gen.coords(int(n), lo, hi) for n in block])
    # psi is supported in the window, so <psi, phi_n> = sum_l psi_l conj(<phi_n, e_l>) exactly
    Q = null_basis(rows, hi - lo + 1)
    ls = np.arange(lo, hi + 1)
    order = sorted(range(ls.size), key=lambda i: (abs(int(ls[i])), int(ls[i]) < 0))
    psi = None
    for i in order:
        p = Q @ Q[i].conj()
        if np.linalg.norm(p) >= 0.5:
            psi = p / np.linalg.norm(p)
            psi_ref = int(ls[i])
            break
    if psi is None:
        raise RuntimeError("no complement direction in the window")
    nk = math.sqrt(gen.norm_sq(k))
    u = gen.coords(k, lo, hi) / nk
    dtype = gen.field.dtype
    psi = psi.astype(dtype) if gen.field is ScalarField.COMPLEX else psi.real
    ip_u_psi = complex(np.vdot(psi, u))
    nu2 = float(np.vdot(u, u).real) + gen.tail_norm_sq(k, lo, hi) / nk**2
    nf, ng, d = _closed_distance(nu2, float(np.vdot(psi, psi).real), ip_u_psi, gen.field)

    n_win = max(m, hi, k)
    while True:
        ns = np.arange(1, n_win + 1)
        z1, _ = gen.gram_block([k], ns)
        z1 = z1[0] / nk
        C = np.array([gen.coords(int(n), lo, hi) for n in ns])
        z2 = C.conj() @ psi
        term = (np.abs(z1 + z2) - np.abs(z1 - z2)) ** 2
        value = math.sqrt(math.fsum(term))
        tail = 2.0 * math.sqrt(gen.gram_tail_sq(k, n_win)) / nk
        if value + tail <= delta or n_win > 1 << 20:
            break
        n_win *= 2
    return WitnessPair(k, m, N, lem.eps, delta, value, tail, d, nf, ng, "complement",
                       (lo, hi), u + psi, u - psi, psi_ref, lem)


def _far_field_witness(gen: SincFrame, lem: LemmaResult, N: int, delta: float) -> WitnessPair:
    """psi proportional to e_l0 - <e_l0, u> u for a Shannon vector far from u.

    The gap is summed directly over a wide label window; labels outside it
    contribute at most 4 |<u, phi_n>|^2 each.
    """
    k = lem.k
    jk = int(_label(k))
    D = max(64, int(math.ceil(24.0 / delta**2)))
    for _ in range(24):
        l0 = int(math.ceil((jk + D) / 4.0))
        jb = 4 * l0
        t = float(_sinc_quarter(jb - jk))
        nu = math.sqrt(1.0 - t * t)
        # window half-width so the analytic tail uses at most a quarter of the budget
        w = int(math.ceil(16.0 * 128.0 / (math.pi**2 * delta**2))) + 16
        lo, hi = jk - w, jb + w
        s = kernels.far_gap_sum(jk, jb, t, nu, lo, hi)
        value = math.sqrt(s)
        tail_sq = 4.0 * 16.0 / math.pi**2 * (_sum_inv_sq_from(float(jk - lo + 1)) + _sum_inv_sq_from(float(hi + 1 - jk)))
        tail = math.sqrt(tail_sq * (1.0 + 1e-6))
        if value + tail <= delta:
            break
        D *= 2
    # <u, psi> = (t - t) / nu = 0; ||psi|| = 1 by construction
    nf, ng, d = _closed_distance(1.0, 1.0, 0.0 + 0j, gen.field)
    return WitnessPair(k, lem.m, N, lem.eps, delta, value, tail, d, nf, ng, "far_field",
                       None, None, None, l0, lem)


# -- the binomial sinc pair ---------------------------------------------------


def s_k_eval(k: int, x: float) -> float:
    """s_k(x) = k! sin(pi x) / (pi x (x+1) ... (x+k)).

    At the removable poles x = -n (0 <= n <= k) the value is binom(k, n);
    close to them the sum over binomially weighted sinc values is used.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    n = round(-x)
    if float(n) == -x and 0 <= n <= k:
        return float(math.comb(k, n))
    if 0 <= n <= k and abs(x + n) < 1e-8:
        # Pascal recursion s_j(y) = s_{j-1}(y) + s_{j-1}(y+1) from s_0 = sinc
        vals = [float(np.sinc(x + i)) for i in range(k + 1)]
        for j in range(1, k + 1):
            vals = [vals[i] + vals[i + 1] for i in range(k + 1 - j)]
        return vals[0]
    logp = sum(math.log(abs(x + s)) for s in range(k + 1))
    sign = 1.0
    for s in range(k + 1):
        if x + s < 0:
            sign = -sign
    return sign * math.sin(math.pi * x) * math.exp(math.lgamma(k + 1) - logp) / math.pi


@dataclass
class SincPairExact:
    """f_m = sum_l binom(m,l)(e_{-2m+l} + e_{2m-l}), g_m with a minus on the second half.

    Coefficients are keyed by sinc-frame label (Shannon index times 4).
    """

    m: int
    f: dict
    g: dict
    dist_sq: int

    @property
    def dist(self) -> float:
        return math.sqrt(self.dist_sq)


def sinc_pair(m: int) -> SincPairExact:
    if m < 1:
        raise ValueError("m must be at least 1")
    f, g = {}, {}
    for l in range(m + 1):
        b = math.comb(m, l)
        f[4 * (-2 * m + l)] = b
        g[4 * (-2 * m + l)] = b
        f[4 * (2 * m - l)] = b
        g[4 * (2 * m - l)] = -b
    keys = sorted(f)
    plus = sum((f[j] + g[j]) ** 2 for j in keys)
    minus = sum((f[j] - g[j]) ** 2 for j in keys)
    dist_sq = min(plus, minus)
    if dist_sq != 4 * math.comb(2 * m, m):
        raise ArithmeticError(f"distance identity failed for m={m}")
    return SincPairExact(m, f, g, dist_sq)


def gap_term_closed(m: int, x) -> np.ndarray:
    """(|f_m(x)| - |g_m(x)|)^2 = 4 (m!)^2 sin^2(pi x) / (pi^2 prod_{s=m}^{2m} (|x|+s)^2)."""
    x = np.asarray(x, dtype=np.float64)
    s = np.arange(m, 2 * m + 1, dtype=np.float64)
    logp = np.log(np.abs(x)[..., None] + s).sum(axis=-1)
    return 4.0 * np.sin(np.pi * x) ** 2 / np.pi**2 * np.exp(2.0 * (math.lgamma(m + 1) - logp))


def sinc_eval(coeffs: dict, x) -> np.ndarray:
    """Direct evaluation of sum_j c_j sinc(x - j) from label-keyed coefficients."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for lab, c in coeffs.items():
        out += c * np.sinc(x - lab / 4)
    return out


def direct_gap_term(m: int, n: int) -> float:
    """(|f_m(n/4)| - |g_m(n/4)|)^2 straight from the binomial coefficients.

    With sin(pi (x - j)) = (-1)^j sin(pi x) both functions are sin(pi x)/pi
    times an exact rational sum, so only the final scaling is rounded.
    """
    pair = sinc_pair(m)
    x = Fraction(n, 4)
    if x.denominator == 1:
        return 0.0
    sf = sum(Fraction(c * (-1) ** (lab // 4)) / (x - lab // 4) for lab, c in pair.f.items())
    sg = sum(Fraction(c * (-1) ** (lab // 4)) / (x - lab // 4) for lab, c in pair.g.items())
    diff = abs(sf) - abs(sg)
    return float(diff * diff) * math.sin(math.pi * n / 4) ** 2 / math.pi**2


def gap_tail_bound(m: int, window: int) -> float:
    """Bound on the closed-form gap terms over |k| > window (all three offsets)."""
    p = 2 * m + 2
    base = window - 0.25 + m
    # each term <= 4 (m!)^2 / (pi^2 (|x| + m)^p) with |x| >= k - 1/4; integral comparison
    log_int = (1 - p) * math.log(base) - math.log(p - 1)
    return 2 * 3 * 4.0 / math.pi**2 * math.exp(2 * math.lgamma(m + 1) + log_int)


def sinc_gap(m: int, window: Optional[int] = None, rel_tail: float = 1e-12, cross_check: int = 0) -> tuple[float, float]:
    """(gap, tail) with gap^2 the sum over |k| <= window and tail bounding the rest of gap^2.

    The integer points contribute nothing since |f_m| and |g_m| agree on
    them coefficient by coefficient.  ``window=None`` doubles from 4m until
    the tail is certified.  ``cross_check`` > 0 compares the closed-form
    terms with exact binomial sums at labels |n| <= cross_check.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    pair = sinc_pair(m)
    if any(abs(pair.f[j]) != abs(pair.g[j]) for j in pair.f):
        raise ArithmeticError("integer-point terms do not vanish")
    for n in range(-cross_check, cross_check + 1):
        want = direct_gap_term(m, n)
        got = float(gap_term_closed(m, n / 4.0))
        if abs(got - want) > 1e-10 * max(abs(want), 1e-300) and not (n % 4 == 0 and got < 1e-30):
            raise ArithmeticError(f"closed-form gap term disagrees at n={n}: {got!r} vs {want!r}")
    auto = window is None
    window = 4 * m if auto else int(window)
    if window < 4 * m:
        raise ValueError(f"window must be at least 4m = {4 * m}")
    while True:
        gap_sq = kernels.sinc_gap_sq(m, window)
        tail = gap_tail_bound(m, window)
        if tail <= rel_tail * gap_sq:
            break
        if not auto:
            raise ValueError(f"window {window} leaves tail {tail:.3e} above {rel_tail:g} of the gap")
        window *= 2
    return math.sqrt(gap_sq), tail


@dataclass
class GrowthRow:
    m: int
    dist: float
    gap: float
    gap_tail: float
    ratio: float
    log2_incr: Optional[float] = None

    @property
    def gap_certified(self) -> float:
        return math.sqrt(self.gap**2 + self.gap_tail)


def growth_table(m_max: int, window: Optional[int] = None) -> list[GrowthRow]:
    """Rows m = 1..m_max; ratio = dist / certified gap, a lower bound on the true ratio."""
    if m_max < 2:
        raise ValueError("m_max must be at least 2 to form increments")
    rows = []
    for m in range(1, m_max + 1):
        pair = sinc_pair(m)
        w = None if window is None else max(int(window), 4 * m)
        gap, tail = sinc_gap(m, w)
        cert = math.sqrt(gap * gap + tail)
        rows.append(GrowthRow(m, pair.dist, gap, tail, pair.dist / cert))
    for a, b in zip(rows, rows[1:]):
        a.log2_incr = math.log2(b.ratio / a.ratio)
    return rows


def ratio_lower_bound(m: int) -> float:
    """(pi / sqrt 8) binom(2m, m)^{3/2}."""
    return math.pi / math.sqrt(8.0) * math.comb(2 * m, m) ** 1.5


def gap_upper_bound_sq(m: int) -> float:
    """(32 / pi^2) binom(2m, m)^{-2}."""
    return 32.0 / math.pi**2 / math.comb(2 * m, m) ** 2
