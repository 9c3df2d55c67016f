"""Finite-dimensional stability certification.

Complement property (exhaustive split scan), the sigma-strong complement
constant, phase-retrieval verdicts for both fields, the lifted-map gain c
and the resulting Lipschitz constant, subset selection on a subspace, and
the Hoelder-type machinery for signals well approximated by a subspace
chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .frames import FiniteFrame, analysis, frame_bounds, numerical_rank
from .hilbert import HermitianOperator, ScalarField, as_field, quotient_distance

EXHAUSTIVE_LIMIT = 24
# splits whose eigenvalue screen falls below this (relative to the whole
# frame operator) are re-examined with SVD ranks
SCREEN_REL = 1e-8
CANDIDATE_CAP = 4096


def _rng(seed):
    return np.random.default_rng(seed)


def _normalize_phase(v: np.ndarray) -> np.ndarray:
    """Unit vector with its largest-magnitude entry real positive."""
    v = v / np.linalg.norm(v)
    i = int(np.argmax(np.abs(v) - 1e-12 * np.arange(v.size)))
    ph = v[i] / abs(v[i])
    v = v / ph
    if not np.iscomplexobj(v) or not np.any(np.abs(v.imag) > 0):
        v = v.real if np.iscomplexobj(v) else v
    return v


def null_basis(rows: np.ndarray, M: int) -> np.ndarray:
    """Orthonormal basis (columns) of the vectors orthogonal to all rows."""
    if rows.shape[0] == 0:
        return np.eye(M)
    # <x, phi_n> = 0  <=>  conj(phi_n) . x = 0
    a = rows.conj()
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    r = numerical_rank(a)
    return vh[r:].conj().T


def _lifts_real(frame: FiniteFrame) -> np.ndarray:
    """Per-vector real symmetric lift; complex vectors use the 2M embedding."""
    v = frame.vectors
    if frame.field is ScalarField.REAL:
        return np.einsum("ni,nj->nij", v, v)
    H = np.einsum("ni,nj->nij", v, v.conj())
    re, im = H.real, H.imag
    top = np.concatenate([re, -im], axis=2)
    bot = np.concatenate([im, re], axis=2)
    return np.ascontiguousarray(np.concatenate([top, bot], axis=1))


def _mask_to_subset(mask: int, N: int) -> tuple[int, ...]:
    return tuple(n for n in range(N) if (mask >> n) & 1)


# -- complement property ---------------------------------------------------


@dataclass
class CPReport:
    holds: Optional[bool]
    witness_subset: Optional[tuple[int, ...]] = None  # 1-based indices
    counterexample: Optional[tuple[np.ndarray, np.ndarray]] = None
    mode: str = "exhaustive"
    sigma_star: Optional[float] = None
    splits_checked: int = 0

    def to_dict(self, field: ScalarField) -> dict:
        from .frames import encode_vector

        out = {
            "holds": self.holds,
            "mode": self.mode,
            "splits_checked": self.splits_checked,
            "sigma_star": self.sigma_star,
        }
        if self.witness_subset is not None:
            out["witness_subset"] = list(self.witness_subset)
        if self.counterexample is not None:
            f, g = self.counterexample
            out["counterexample"] = {"f": encode_vector(f, field), "g": encode_vector(g, field)}
        return out


def _split_fails(frame: FiniteFrame, subset: tuple[int, ...]) -> bool:
    inside = list(subset)
    outside = [n for n in range(frame.N) if n not in set(subset)]
    return frame.rank(inside) < frame.M and frame.rank(outside) < frame.M


def cp_counterexample(frame: FiniteFrame, subset) -> tuple[np.ndarray, np.ndarray]:
    """Pair (u + v, u - v) with u orthogonal to S and v orthogonal to S^c."""
    inside = set(subset)
    S = frame.vectors[[n for n in range(frame.N) if n in inside]]
    Sc = frame.vectors[[n for n in range(frame.N) if n not in inside]]
    U = null_basis(S, frame.M)
    V = null_basis(Sc, frame.M)
    if U.shape[1] == 0 or V.shape[1] == 0:
        raise ValueError("split does not violate the complement property")
    best = None
    for i in range(U.shape[1]):
        for j in range(V.shape[1]):
            u = _normalize_phase(U[:, i])
            v = _normalize_phase(V[:, j])
            score = abs(np.vdot(u, v))
            if best is None or score < best[0] - 1e-12:
                best = (score, u, v)
    _, u, v = best
    return u + v, u - v


def complement_property(frame: FiniteFrame, mode: str = "auto", trials: int = 20000, seed=0) -> CPReport:
    """Decide the complement property of a finite frame.

    Exhaustive mode scans all 2^(N-1) splits (the last vector is pinned to
    the complement side).  Each split is screened by the smaller eigenvalue
    of the two sub-frame operators; near-singular splits are confirmed with
    SVD ranks.  Randomized mode (N > 24) can only refute.
    """
    N = frame.N
    if mode == "auto":
        mode = "exhaustive" if N <= EXHAUSTIVE_LIMIT else "randomized"
    if mode == "exhaustive":
        if N > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive mode supports N <= {EXHAUSTIVE_LIMIT}, got {N}")
        return _cp_exhaustive(frame)
    if mode == "randomized":
        return _cp_randomized(frame, trials, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _cp_exhaustive(frame: FiniteFrame) -> CPReport:
    N = frame.N
    P = _lifts_real(frame)
    scale = max(frame.bounds[1], np.finfo(float).tiny)
    sigma, best_mask, cands, overflow = kernels.split_scan(P, SCREEN_REL * scale, CANDIDATE_CAP)
    checked = 1 << (N - 1)
    for mask in cands:
        subset = _mask_to_subset(mask, N)
        if _split_fails(frame, subset):
            f, g = cp_counterexample(frame, subset)
            return CPReport(False, tuple(n + 1 for n in subset), (f, g), "exhaustive", 0.0, checked)
    if overflow:
        # too many near-singular splits to list: confirm them by brute force
        for mask in range(checked):
            subset = _mask_to_subset(mask, N)
            if _split_fails(frame, subset):
                f, g = cp_counterexample(frame, subset)
                return CPReport(False, tuple(n + 1 for n in subset), (f, g), "exhaustive", 0.0, checked)
    if sigma <= 0:
        subset = _mask_to_subset(best_mask, N)
        sigma = max(_split_value(frame, subset), np.finfo(float).tiny)
    return CPReport(True, None, None, "exhaustive", float(sigma), checked)


def _split_value(frame: FiniteFrame, subset) -> float:
    inside = set(subset)
    vals = []
    for rows in ([n for n in range(frame.N) if n in inside], [n for n in range(frame.N) if n not in inside]):
        if not rows:
            vals.append(0.0)
            continue
        vals.append(float(np.linalg.eigvalsh(frame.subframe(rows).frame_operator)[0]))
    return max(vals)


def _cp_randomized(frame: FiniteFrame, trials: int, seed) -> CPReport:
    rng = _rng(seed)
    N = frame.N
    for t in range(trials):
        mask = rng.integers(0, 2, size=N).astype(bool)
        subset = tuple(int(n) for n in np.flatnonzero(mask))
        if _split_fails(frame, subset):
            f, g = cp_counterexample(frame, subset)
            return CPReport(False, tuple(n + 1 for n in subset), (f, g), "randomized", 0.0, t + 1)
    return CPReport(None, None, None, "randomized", None, trials)


def strong_cp_sigma(frame: FiniteFrame) -> float:
    """min over splits of max(lmin(S), lmin(S^c)); 0 when the CP fails."""
    if frame.N > EXHAUSTIVE_LIMIT:
        raise ValueError(f"strong_cp_sigma supports N <= {EXHAUSTIVE_LIMIT}, got {frame.N}")
    rep = _cp_exhaustive(frame)
    return 0.0 if not rep.holds else float(rep.sigma_star)


# -- lifted map ----------------------------------------------------------------


def hermitian_basis(M: int, field) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of the real space of Hermitian matrices."""
    field = as_field(field)
    basis = []
    r2 = math.sqrt(0.5)
    for i in range(M):
        E = np.zeros((M, M))
        E[i, i] = 1.0
        basis.append(E)
    for i in range(M):
        for j in range(i + 1, M):
            E = np.zeros((M, M))
            E[i, j] = E[j, i] = r2
            basis.append(E)
            if field is ScalarField.COMPLEX:
                F = np.zeros((M, M), dtype=complex)
                F[i, j] = -1j * r2
                F[j, i] = 1j * r2
                basis.append(F)
    return basis


def lifted_matrix(frame: FiniteFrame) -> np.ndarray:
    """Matrix of the lifted map in the Hermitian basis: rows are the lifts phi_n phi_n^*."""
    v = frame.vectors
    basis = hermitian_basis(frame.M, frame.field)
    return np.stack([np.einsum("ni,ij,nj->n", v.conj(), B, v).real for B in basis], axis=1)


def _from_basis(y: np.ndarray, basis) -> np.ndarray:
    return sum(c * B for c, B in zip(y, basis))


def _gain_uv(V: np.ndarray, u: np.ndarray, v: Optional[np.ndarray]):
    """Minimum over weights with max(|l1|, |l2|) = 1 of ||l1 a + l2 b||.

    a_n = |<phi_n, u>|^2 and b_n = |<phi_n, v>|^2; with one weight pinned at
    +-1 the other is a clamped 1-D least-squares solution.
    """
    a = np.abs(V.conj() @ u) ** 2
    if v is None:
        return float(np.linalg.norm(a)), (1.0, 0.0)
    b = np.abs(V.conj() @ v) ** 2
    ab = float(a @ b)
    aa = float(a @ a)
    bb = float(b @ b)
    l2 = float(np.clip(-ab / bb, -1.0, 1.0)) if bb > 0 else 0.0
    l1 = float(np.clip(-ab / aa, -1.0, 1.0)) if aa > 0 else 0.0
    v1 = float(np.linalg.norm(a + l2 * b))
    v2 = float(np.linalg.norm(l1 * a + b))
    if v1 <= v2:
        return v1, (1.0, l2)
    return v2, (l1, 1.0)


def _orthonormal_pair(x: np.ndarray, M: int, cplx: bool):
    if cplx:
        a = x[:M] + 1j * x[M : 2 * M]
        b = x[2 * M : 3 * M] + 1j * x[3 * M :]
    else:
        a, b = x[:M], x[M:]
    na = np.linalg.norm(a)
    if na == 0:
        a = np.zeros(M, dtype=a.dtype)
        a[0] = 1
        na = 1.0
    u = a / na
    if M == 1:
        return u, None
    b = b - np.vdot(u, b) * u
    nb = np.linalg.norm(b)
    if nb < 1e-12:
        b = np.zeros(M, dtype=u.dtype)
        b[int(np.argmin(np.abs(u)))] = 1
        b = b - np.vdot(u, b) * u
        nb = np.linalg.norm(b)
    return u, b / nb


@dataclass
class LiftedGain:
    c: float
    minimizer: HermitianOperator
    restarts: int
    grid_c: Optional[float] = None

    @property
    def grid_agrees(self) -> Optional[bool]:
        if self.grid_c is None:
            return None
        return abs(self.c - self.grid_c) <= 0.05 * max(self.grid_c, 1e-300) or self.c <= self.grid_c


def min_lifted_gain(frame: FiniteFrame, restarts: int = 16, seed=0, grid: bool | None = None) -> LiftedGain:
    """Minimum of ||A^2(X)|| over Hermitian X of rank <= 2 and unit operator norm.

    X = l1 uu^* + l2 vv^* with (u, v) orthonormal; the weights are solved
    exactly for each pair and the pair is found by multi-start local
    descent.  The result bounds the true minimum from above.  For small
    dimensions a dense grid value is attached as a cross-check.
    """
    M = frame.M
    V = frame.vectors
    cplx = frame.field is ScalarField.COMPLEX
    npar = (4 if cplx else 2) * M
    rng = _rng(seed)

    def obj(x):
        u, v = _orthonormal_pair(x, M, cplx)
        return _gain_uv(V, u, v)[0]

    best = None
    starts = rng.standard_normal((restarts, npar))
    for r in range(restarts):
        res = minimize(obj, starts[r], method="L-BFGS-B")
        # fatol is relative: an absolute one sits below the ulp for large frames
        fatol = 1e-15 * max(1.0, abs(float(res.fun)))
        res = minimize(obj, res.x, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": fatol, "maxiter": 4000 * npar})
        val = float(res.fun)
        if best is None or val < best[0]:
            best = (val, res.x)
    val, x = best
    u, v = _orthonormal_pair(x, M, cplx)
    val, (l1, l2) = _gain_uv(V, u, v)
    X = l1 * np.outer(u, u.conj())
    if v is not None:
        X = X + l2 * np.outer(v, v.conj())
    # X and -X are equally good; fix the sign by the trace, then by the largest entry
    tr = float(np.trace(X).real)
    if abs(tr) <= 1e-12:
        flat = X.ravel()
        tr = float(flat[int(np.argmax(np.abs(flat) - 1e-12 * np.arange(flat.size)))].real)
    if tr < 0:
        X = -X
    out = LiftedGain(val, HermitianOperator.from_lower(X), restarts)
    if grid is None:
        grid = (not cplx and M <= 3) or (cplx and M <= 2)
    if grid:
        out.grid_c = grid_lifted_gain(frame)
    return out


def _grid_pairs(theta: np.ndarray, M: int, cplx: bool):
    """Orthonormal pairs (u, v) from angle rows (1, 2 or 3 angles)."""
    if not cplx and M == 2:
        t = theta[:, 0]
        return np.stack([np.cos(t), np.sin(t)], axis=1), np.stack([-np.sin(t), np.cos(t)], axis=1)
    if cplx and M == 2:
        th, ph = theta[:, 0], theta[:, 1]
        U = np.stack([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)], axis=1)
        W = np.stack([-np.exp(-1j * ph) * np.sin(th / 2), np.cos(th / 2) + 0j], axis=1)
        return U, W
    th, ph, ps = theta[:, 0], theta[:, 1], theta[:, 2]
    U = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)
    e1 = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=1)
    e2 = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=1)
    return U, np.cos(ps)[:, None] * e1 + np.sin(ps)[:, None] * e2


def _grid_values(V: np.ndarray, theta: np.ndarray, M: int, cplx: bool) -> np.ndarray:
    out = np.empty(theta.shape[0])
    for s in range(0, theta.shape[0], 1 << 16):
        U, W = _grid_pairs(theta[s : s + (1 << 16)], M, cplx)
        a = np.abs(U.conj() @ V.T) ** 2
        b = np.abs(W.conj() @ V.T) ** 2
        ab = np.einsum("kn,kn->k", a, b)
        aa = np.einsum("kn,kn->k", a, a)
        bb = np.einsum("kn,kn->k", b, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            l2 = np.clip(np.where(bb > 0, -ab / bb, 0.0), -1, 1)
            l1 = np.clip(np.where(aa > 0, -ab / aa, 0.0), -1, 1)
        v1 = np.linalg.norm(a + l2[:, None] * b, axis=1)
        v2 = np.linalg.norm(l1[:, None] * a + b, axis=1)
        out[s : s + (1 << 16)] = np.minimum(v1, v2)
    return out


def grid_lifted_gain(frame: FiniteFrame, resolution: int | None = None, keep: int = 64, levels: int = 12) -> float:
    """Grid minimum over orthonormal pairs (real M <= 3, complex M <= 2).

    A uniform angle grid is followed by local zoom grids (5 points per
    angle, spacing shrinking by half per level) around the ``keep`` best
    coarse points.  Every evaluated point is a feasible pair, so the value
    bounds the true minimum from above independently of the optimizer.
    """
    M = frame.M
    V = frame.vectors
    cplx = frame.field is ScalarField.COMPLEX
    if M == 1:
        return float(np.linalg.norm(np.abs(V[:, 0]) ** 2))
    if not cplx and M == 2:
        n = resolution or 20000
        axes = [np.linspace(0, np.pi, n, endpoint=False)]
    elif cplx and M == 2:
        n = resolution or 400
        axes = [np.linspace(0, np.pi, n), np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)]
    elif not cplx and M == 3:
        n = resolution or 120
        axes = [
            np.linspace(0, np.pi / 2, n // 2 + 1),
            np.linspace(0, 2 * np.pi, 2 * n, endpoint=False),
            np.linspace(0, np.pi, n, endpoint=False),
        ]
    else:
        raise ValueError("grid cross-check only for real M <= 3 or complex M <= 2")
    mesh = np.meshgrid(*axes, indexing="ij")
    theta = np.stack([m.ravel() for m in mesh], axis=1)
    vals = _grid_values(V, theta, M, cplx)
    best = float(np.min(vals))
    steps = np.array([ax[1] - ax[0] for ax in axes])
    offs = np.stack([m.ravel() for m in np.meshgrid(*[np.linspace(-1, 1, 5)] * len(axes), indexing="ij")], axis=1)
    for i in np.argsort(vals, kind="stable")[:keep]:
        centre, h, cur = theta[i], steps.copy(), vals[i]
        for _ in range(levels):
            pts = centre + offs * h
            v = _grid_values(V, pts, M, cplx)
            j = int(np.argmin(v))
            if v[j] < cur:
                centre, cur = pts[j], float(v[j])
            h = h / 2
        best = min(best, cur)
    return best


def lipschitz_constant(frame: FiniteFrame, c: float) -> float:
    """C = 4 max_n ||phi_n|| / c, valid for ||f|| = 1, ||g|| <= 1."""
    if not c > 0:
        raise ValueError(f"c must be positive, got {c!r}")
    return 4.0 * float(np.max(frame.norms)) / c


# -- phase retrieval verdicts -------------------------------------------------


@dataclass
class Verdict:
    kind: str  # "yes" | "no" | "heuristic_yes"
    witness: Optional[tuple[np.ndarray, np.ndarray]] = None
    confidence: Optional[float] = None
    method: str = ""
    cp: Optional[CPReport] = None
    null_dim: Optional[int] = None

    def to_dict(self, field: ScalarField) -> dict:
        from .frames import encode_vector

        out = {"verdict": self.kind, "method": self.method}
        if self.confidence is not None:
            out["confidence"] = self.confidence
        if self.null_dim is not None:
            out["lifted_null_dim"] = self.null_dim
        if self.witness is not None:
            f, g = self.witness
            out["witness"] = {"f": encode_vector(f, field), "g": encode_vector(g, field)}
        if self.cp is not None:
            out["complement_property"] = self.cp.to_dict(field)
        return out


def does_phase_retrieval(frame: FiniteFrame, method: str = "auto", restarts: int = 16, seed=0) -> Verdict:
    """Phase-retrieval verdict.

    Real field: the complement property decides exactly.  Complex field: if
    the lifted map is injective on Hermitian matrices the answer is yes;
    otherwise its kernel is searched for a rank <= 2 element, and failure to
    find one is reported as ``heuristic_yes`` with the achieved residual.
    """
    if method == "auto":
        method = "complement" if frame.field is ScalarField.REAL else "lifted"
    if method == "complement":
        if frame.field is ScalarField.COMPLEX:
            raise ValueError("the complement property only decides phase retrieval over the reals")
        rep = complement_property(frame)
        if rep.holds:
            return Verdict("yes", method="complement", cp=rep)
        if rep.holds is None:
            return Verdict("heuristic_yes", method="complement", cp=rep, confidence=None)
        return Verdict("no", witness=rep.counterexample, method="complement", cp=rep)
    if method == "lifted":
        return _lifted_verdict(frame, restarts, seed)
    raise ValueError(f"unknown method {method!r}")


def _lifted_verdict(frame: FiniteFrame, restarts: int, seed) -> Verdict:
    M = frame.M
    L = lifted_matrix(frame)
    D = L.shape[1]
    r = numerical_rank(L)
    if r == D:
        return Verdict("yes", method="lifted", null_dim=0)
    _, _, vh = np.linalg.svd(L, full_matrices=True)
    K = vh[r:]  # rows: orthonormal kernel basis in Hermitian coordinates
    basis = hermitian_basis(M, frame.field)
    rng = _rng(seed)

    def excess(y):
        X = _from_basis(y @ K, basis)
        w = np.linalg.eigvalsh(X)
        w = w[np.argsort(-np.abs(w))]
        top = abs(w[0])
        if top == 0:
            return 1.0
        return float(np.sqrt(np.sum(w[2:] ** 2)) / top)

    best = None
    for _ in range(restarts):
        y0 = rng.standard_normal(K.shape[0])
        if K.shape[0] == 1:
            val, y = excess(y0), y0
        else:
            res = minimize(excess, y0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
            val, y = float(res.fun), res.x
        if best is None or val < best[0]:
            best = (val, y)
    val, y = best
    if val <= 1e-9:
        X = _from_basis(y @ K, basis)
        w, Q = np.linalg.eigh(X)
        order = np.argsort(-np.abs(w))
        pos = [i for i in order[:2] if w[i] > 0]
        neg = [i for i in order[:2] if w[i] < 0]
        if pos and neg:
            f = math.sqrt(w[pos[0]]) * Q[:, pos[0]]
            g = math.sqrt(-w[neg[0]]) * Q[:, neg[0]]
        else:
            # semidefinite kernel element: its range is orthogonal to every frame vector
            i = order[0]
            f, g = Q[:, i], np.zeros(M, dtype=Q.dtype)
        return Verdict("no", witness=(f, g), confidence=val, method="lifted", null_dim=K.shape[0])
    return Verdict("heuristic_yes", confidence=val, method="lifted", null_dim=K.shape[0])


# -- subset selection ----------------------------------------------------------


def select_pr_subset(vectors, field=ScalarField.REAL) -> list[int]:
    """Greedy subset whose lifts span the same space as all lifts.

    Index n is kept iff its lift phi_n phi_n^* raises the dimension of the
    span of the lifts kept so far.  Returns 0-based indices.
    """
    frame = FiniteFrame(vectors, field)
    L = lifted_matrix(frame)
    full = numerical_rank(L)
    kept: list[int] = []
    rank = 0
    for n in range(L.shape[0]):
        r = numerical_rank(L[kept + [n]])
        if r > rank:
            kept.append(n)
            rank = r
            if rank == full:
                break
    return kept


# -- empirical Lipschitz ratios -----------------------------------------------


def _ratio(V, f, g, field):
    d = quotient_distance(f, g, field)
    if d == 0:
        return math.inf
    gap = np.linalg.norm(np.abs(V.conj() @ f) - np.abs(V.conj() @ g))
    return float(gap / d)


def _batch_ratios(V, F, G, cplx):
    af = np.abs(F @ V.T.conj())
    ag = np.abs(G @ V.T.conj())
    gap = np.linalg.norm(af - ag, axis=1)
    ip = np.einsum("ki,ki->k", F, G.conj())
    if cplx:
        mag = np.abs(ip)
        alpha = np.where(mag > 0, ip / np.where(mag > 0, mag, 1.0), 1.0)
    else:
        alpha = np.where(ip.real < 0, -1.0, 1.0)
    d = np.linalg.norm(F - alpha[:, None] * G, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > 1e-12, gap / d, np.inf)


def _sample_pairs(rng, n, M, cplx):
    def draw():
        x = rng.standard_normal((n, M))
        if cplx:
            x = x + 1j * rng.standard_normal((n, M))
        return x

    F = draw()
    F /= np.linalg.norm(F, axis=1, keepdims=True)
    G = draw()
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    G *= rng.uniform(0, 1, size=(n, 1))
    return F, G


def _sign_pattern_polish(V, f, g, rounds=8):
    """Real field: alternate between a sign split and its extremal directions."""
    best = (_ratio(V, f, g, ScalarField.REAL), f, g)
    for _ in range(rounds):
        x, y = best[1] - best[2], best[1] + best[2]
        S = np.abs(V @ x) <= np.abs(V @ y)
        cand = []
        for rows in (S, ~S):
            sub = V[rows]
            if sub.shape[0] == 0:
                w, Q = np.zeros(1), np.eye(V.shape[1])
            else:
                w, Q = np.linalg.eigh(sub.T @ sub)
            cand.append(Q[:, 0])
        x, y = cand
        f2, g2 = (x + y) / 2, (y - x) / 2
        if np.linalg.norm(f2) < 1e-12 or np.linalg.norm(g2) < 1e-12:
            break
        r = _ratio(V, f2, g2, ScalarField.REAL)
        if r < best[0]:
            best = (r, f2, g2)
        else:
            break
    return best


def empirical_lower_lipschitz(frame: FiniteFrame, trials: int = 2000, seed=0, refine: int = 8, return_pair=False):
    """Smallest observed ||A(f) - A(g)|| / d(f, g) over sampled pairs.

    Sampled pairs are normalized (||f|| = 1, ||g|| <= 1); the ``refine``
    best are polished by local descent (and, for real frames, by a sign
    split iteration).  This is an upper bound on the true lower Lipschitz
    constant.
    """
    rng = _rng(seed)
    V = frame.vectors
    M = frame.M
    cplx = frame.field is ScalarField.COMPLEX
    F, G = _sample_pairs(rng, trials, M, cplx)
    r = _batch_ratios(V, F, G, cplx)
    order = np.argsort(r, kind="stable")[:refine]
    best = (math.inf, None, None)

    def unpack(x):
        if cplx:
            f = x[:M] + 1j * x[M : 2 * M]
            g = x[2 * M : 3 * M] + 1j * x[3 * M :]
        else:
            f, g = x[:M], x[M:]
        return f, g

    def pack(f, g):
        if cplx:
            return np.concatenate([f.real, f.imag, g.real, g.imag])
        return np.concatenate([f, g])

    def obj(x):
        f, g = unpack(x)
        return _ratio(V, f, g, frame.field)

    for i in order:
        f, g = F[i], G[i]
        if not cplx:
            val, f, g = _sign_pattern_polish(V, f, g)
        x0 = pack(f, g)
        fatol = 1e-16 * max(1.0, obj(x0))
        res = minimize(obj, x0, method="Nelder-Mead", options={"xatol": 1e-13, "fatol": fatol, "maxiter": 2000 * M})
        f, g = unpack(res.x)
        if not cplx:
            _, f, g = _sign_pattern_polish(V, f, g)
        val = obj(pack(f, g))
        if val < best[0]:
            best = (val, f, g)
    if return_pair:
        return best
    return best[0]


# -- Hoelder machinery -------------------------------------------------------


@dataclass(frozen=True)
class HolderConstants:
    C1: float
    C2: float
    Cprime: float
    C: float


def holder_constants(B: float, R: float, gamma: float, G1: float) -> HolderConstants:
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma!r}")
    if not (B > 0 and R > 0 and G1 > 0):
        raise ValueError("B, R and G1 must be positive")
    e = (gamma - 1.0) / gamma
    C1 = (G1**gamma / (R * math.sqrt(B))) ** e
    C2 = R ** (1.0 / gamma) * B ** (1.0 / (2.0 * gamma)) * (1.0 / (math.sqrt(B) * G1) + 1.0)
    Cp = max(C1, C2)
    C = Cp * gamma * (gamma - 1.0) ** ((1.0 - gamma) / gamma)
    return HolderConstants(C1, C2, Cp, C)


@dataclass
class SubspaceChain:
    """Nested subspaces V_1 < V_2 < ... with local stability constants G(m).

    ``bases[m-1]`` holds an orthonormal basis of V_m as columns.
    """

    bases: list
    G: np.ndarray
    gamma: float
    R: float

    def __post_init__(self):
        dims = [b.shape[1] for b in self.bases]
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise ValueError("subspace dimensions must increase strictly")
        self.G = np.maximum.accumulate(np.asarray(self.G, dtype=float))
        if np.any(self.G <= 0):
            raise ValueError("G must be positive")

    @property
    def m_max(self) -> int:
        return len(self.bases)

    def project(self, f, m: int) -> np.ndarray:
        Q = self.bases[m - 1]
        return Q @ (Q.conj().T @ f)

    def residual(self, f, m: int) -> float:
        return float(np.linalg.norm(f - self.project(f, m)))


def coordinate_chain(ambient: int, m_max: int, G, gamma: float, R: float) -> SubspaceChain:
    """V_m = span{e_1..e_m} inside an ``ambient``-dimensional coordinate space."""
    eye = np.eye(ambient)
    return SubspaceChain([eye[:, :m] for m in range(1, m_max + 1)], G, gamma, R)


def ball_membership(f, chain: SubspaceChain, m_max: Optional[int] = None, tol: float = 1e-12) -> bool:
    """Is ||f - P_m f|| <= G(m+1)^{-gamma} R ||f|| for every m < m_max?"""
    m_max = chain.m_max if m_max is None else m_max
    f = np.asarray(f)
    nf = float(np.linalg.norm(f))
    if chain.residual(f, m_max) > tol * max(1.0, nf):
        raise ValueError(f"vector is not in V_{m_max}")
    for m in range(1, m_max):
        bound = chain.G[m] ** (-chain.gamma) * chain.R * nf
        if chain.residual(f, m) > bound * (1 + 1e-12) + tol * nf:
            return False
    return True


def sample_ball(chain: SubspaceChain, rng, field=ScalarField.REAL, scale=None) -> np.ndarray:
    """Random element of the ball that lies in V_{m_max}."""
    field = as_field(field)
    Q = chain.bases[-1]
    k = Q.shape[1]
    x = rng.standard_normal(k)
    if field is ScalarField.COMPLEX:
        x = x + 1j * rng.standard_normal(k)
    x = x * rng.uniform(0.05, 1.0) ** np.arange(k)
    f = Q @ x
    for _ in range(200):
        if ball_membership(f, chain, tol=0.0):
            break
        nf = np.linalg.norm(f)
        for m in range(1, chain.m_max):
            bound = chain.G[m] ** (-chain.gamma) * chain.R * nf
            p = chain.project(f, m)
            res = np.linalg.norm(f - p)
            if res > bound:
                f = p + (f - p) * (0.5 * bound / res)
    else:
        f = chain.project(f, 1)
    t = rng.uniform(0.1, 10.0) if scale is None else scale
    return f * t


@dataclass
class HolderReport:
    lhs: float
    rhs: float
    violation: bool


def holder_check(f, g, frame: FiniteFrame, chain: SubspaceChain, constants: HolderConstants) -> HolderReport:
    if not (ball_membership(f, chain) and ball_membership(g, chain)):
        raise ValueError("f and g must lie in the ball")
    lhs = quotient_distance(f, g, frame.field)
    gap = float(np.linalg.norm(np.abs(analysis(frame, f)) - np.abs(analysis(frame, g))))
    e = (chain.gamma - 1.0) / chain.gamma
    rhs = constants.C * (np.linalg.norm(f) + np.linalg.norm(g)) ** (1.0 / chain.gamma) * gap**e
    return HolderReport(lhs, float(rhs), bool(lhs > rhs * (1 + 1e-9)))


def upper_lipschitz_check(frame: FiniteFrame, f, g) -> tuple[float, float]:
    """(||A(f) - A(g)||, sqrt(B) d(f, g))."""
    lhs = float(np.linalg.norm(np.abs(analysis(frame, f)) - np.abs(analysis(frame, g))))
    B = frame_bounds(frame)[1]
    return lhs, math.sqrt(B) * quotient_distance(f, g, frame.field)


# -- chains built from a Riesz construction ------------------------------------


@dataclass
class RieszChainSetup:
    frame: FiniteFrame
    chain: SubspaceChain
    raw_G: np.ndarray
    generator: object = field(repr=False, default=None)


def riesz_chain(gen, gamma: float, R: float, trials: int = 2000, seed=0) -> RieszChainSetup:
    """Truncated Riesz frame with V_m = span{e_1..e_m} and estimated G(m)."""
    m_max = gen.m_max
    n_max = gen.width
    frame = gen.truncate(n_max, 1, n_max)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    raw = []
    for m, child in zip(range(1, m_max + 1), ss.spawn(m_max)):
        sub = FiniteFrame(frame.vectors[:, :m], frame.field)
        ratio = empirical_lower_lipschitz(sub, trials=trials, seed=child)
        raw.append(1.0 / ratio if ratio > 0 else math.inf)
    raw = np.array(raw)
    chain = coordinate_chain(n_max, m_max, raw, gamma, R)
    return RieszChainSetup(frame, chain, raw, gen)


def certify_block(frame: FiniteFrame) -> bool:
    """Exact for real blocks (complement property); complex blocks need an injective lifted map."""
    if frame.field is ScalarField.REAL:
        return bool(complement_property(frame).holds)
    return numerical_rank(lifted_matrix(frame)) == frame.M * frame.M


def default_riesz(eps: float, m_max: int, seed=0, field=ScalarField.REAL):
    """Riesz construction with Gaussian blocks (2m real or 4m complex vectors in dimension m)."""
    from .frames import riesz_frame

    field = as_field(field)
    r = 2 if field is ScalarField.REAL else 4
    rng = _rng(seed)
    blocks = []
    for m in range(1, m_max + 1):
        for _ in range(100):
            v = rng.standard_normal((r * m, m))
            if field is ScalarField.COMPLEX:
                v = v + 1j * rng.standard_normal((r * m, m))
            blk = FiniteFrame(v, field)
            if certify_block(blk):
                break
        else:
            raise RuntimeError(f"could not draw a phase-retrieval block for m={m}")
        blocks.append(blk)
    return riesz_frame(eps, blocks, certify=None, field=field)
