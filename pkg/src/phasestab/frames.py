"""Finite frames, lazily generated countable frames and frame constructions.

A :class:`FiniteFrame` stores its N vectors as the rows of an ``(N, M)``
array.  A :class:`GeneratedFrame` describes a countable frame
``phi_1, phi_2, ...`` through its coordinates against a fixed orthonormal
reference basis ``{e_l}`` (``l`` ranges over the integers) together with
certified bounds on whatever a finite window leaves out.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .hilbert import HermitianOperator, ScalarField, as_field

__all__ = [
    "FiniteFrame",
    "MeasurementSeq",
    "GeneratedFrame",
    "OrthonormalBasisFrame",
    "SincFrame",
    "PerturbedBasisFrame",
    "analysis",
    "measure",
    "frame_bounds",
    "lifted_analysis",
    "sinc_frame",
    "onb_frame",
    "riesz_frame",
    "perturb_destroy_pr",
    "PerturbationResult",
    "load_frame",
    "dump_frame",
    "save_frame",
    "FrameFileError",
]


class FrameFileError(ValueError):
    """Malformed frame file."""


@dataclass(frozen=True)
class MeasurementSeq:
    values: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("measurements must be non-negative")
        if self.tail_bound < 0:
            raise ValueError("tail bound must be non-negative")


class FiniteFrame:
    """N vectors in an M-dimensional real or complex coordinate space."""

    def __init__(self, vectors, field=ScalarField.REAL):
        self.field = as_field(field)
        v = np.atleast_2d(np.asarray(vectors))
        if v.size == 0:
            raise ValueError("empty frame")
        if self.field is ScalarField.REAL:
            if np.iscomplexobj(v) and np.any(v.imag != 0):
                raise ValueError("complex entries in a real frame")
            v = v.real.astype(np.float64)
        else:
            v = v.astype(np.complex128)
        v.setflags(write=False)
        self.vectors = v

    def __repr__(self):
        return f"FiniteFrame(N={self.N}, M={self.M}, field={self.field.value})"

    def __len__(self):
        return self.N

    @property
    def N(self) -> int:
        return self.vectors.shape[0]

    @property
    def M(self) -> int:
        return self.vectors.shape[1]

    @cached_property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    @cached_property
    def frame_operator(self) -> np.ndarray:
        """sum_n phi_n phi_n^*."""
        v = self.vectors
        return v.T @ v.conj()

    @cached_property
    def bounds(self) -> tuple[float, float]:
        w = np.linalg.eigvalsh(self.frame_operator)
        lo = max(0.0, float(w[0]))
        return lo, float(w[-1])

    @property
    def is_frame(self) -> bool:
        return self.rank() == self.M

    def rank(self, rows=None) -> int:
        v = self.vectors if rows is None else self.vectors[rows]
        return numerical_rank(v)

    def subframe(self, rows) -> "FiniteFrame":
        return FiniteFrame(self.vectors[list(rows)], self.field)

    def scaled(self, t: float) -> "FiniteFrame":
        return FiniteFrame(self.vectors * t, self.field)

    def check_vector(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != (self.M,):
            raise ValueError(f"dimension mismatch: frame has M={self.M}, vector has shape {f.shape}")
        return f


def numerical_rank(a) -> int:
    """Rank with singular-value threshold max(rows, cols) * eps * s_max."""
    a = np.atleast_2d(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    tol = max(a.shape) * np.finfo(np.float64).eps * s[0]
    return int(np.sum(s > tol))


def analysis(frame: FiniteFrame, f) -> np.ndarray:
    """(<f, phi_n>)_n."""
    f = frame.check_vector(f)
    return frame.vectors.conj() @ f


def measure(frame: FiniteFrame, f) -> MeasurementSeq:
    """(|<f, phi_n>|)_n."""
    return MeasurementSeq(np.abs(analysis(frame, f)))


def frame_bounds(frame: FiniteFrame) -> tuple[float, float]:
    """Extreme eigenvalues (A, B) of the frame operator; A = 0 if not spanning."""
    if not frame.is_frame:
        return 0.0, frame.bounds[1]
    return frame.bounds


def lifted_analysis(frame: FiniteFrame, X) -> np.ndarray:
    """(<X phi_n, phi_n>)_n for a Hermitian X; real valued."""
    mat = X.matrix if isinstance(X, HermitianOperator) else np.asarray(X)
    if mat.shape != (frame.M, frame.M):
        raise ValueError(f"dimension mismatch: operator {mat.shape} on frame with M={frame.M}")
    v = frame.vectors
    return np.einsum("ni,ij,nj->n", v.conj(), mat, v).real


# -- countable frames ---------------------------------------------------------


class GeneratedFrame:
    """A countable frame presented by coordinates in a reference basis.

    Frame indices are natural numbers ``n >= 1``; reference indices ``l``
    are integers.  Subclasses provide :meth:`coords` and the certified
    bounds :meth:`tail_norm_sq` and :meth:`gram_tail_sq`; :meth:`gram_block`
    may be overridden when inner products are known in closed form.
    """

    name = "generated"
    field = ScalarField.REAL
    A: float = 1.0
    B: float = 1.0
    min_norm: float = 1.0

    def coords(self, n: int, lo: int, hi: int) -> np.ndarray:
        """<phi_n, e_l> for l = lo..hi."""
        raise NotImplementedError

    def coord(self, n: int, l: int):
        return self.coords(n, l, l)[0]

    def support_window(self, n: int) -> tuple[int, int]:
        """Reference window holding the bulk of phi_n."""
        raise NotImplementedError

    def tail_norm_sq(self, n: int, lo: int, hi: int) -> float:
        """Upper bound on sum over l outside [lo, hi] of |<phi_n, e_l>|^2."""
        raise NotImplementedError

    def norm_sq(self, n: int) -> float:
        lo, hi = self.support_window(n)
        c = self.coords(n, lo, hi)
        return float(np.vdot(c, c).real)

    def gram_block(self, rows, cols, pad: int = 0):
        """Gram entries <phi_a, phi_b> with an entrywise error bound.

        The default evaluates the coordinate sums over a common window and
        bounds the omitted part by Cauchy-Schwarz on the two tails.
        """
        rows = np.atleast_1d(np.asarray(rows, dtype=np.int64))
        cols = np.atleast_1d(np.asarray(cols, dtype=np.int64))
        wins = [self.support_window(int(n)) for n in np.concatenate([rows, cols])]
        lo = min(w[0] for w in wins) - pad
        hi = max(w[1] for w in wins) + pad
        R = np.array([self.coords(int(n), lo, hi) for n in rows])
        C = np.array([self.coords(int(n), lo, hi) for n in cols])
        val = R @ C.conj().T
        tr = np.sqrt([self.tail_norm_sq(int(n), lo, hi) for n in rows])
        tc = np.sqrt([self.tail_norm_sq(int(n), lo, hi) for n in cols])
        return val, np.outer(tr, tc)

    def gram_tail_sq(self, k: int, m: int) -> float:
        """Upper bound on sum_{n > m} |<phi_k, phi_n>|^2."""
        raise NotImplementedError

    def truncate(self, n_max: int, lo: int, hi: int) -> FiniteFrame:
        """phi_1..phi_{n_max} as coordinate rows over [lo, hi]."""
        rows = [self.coords(n, lo, hi) for n in range(1, n_max + 1)]
        return FiniteFrame(np.array(rows), self.field)


class OrthonormalBasisFrame(GeneratedFrame):
    """phi_n = e_n."""

    name = "onb"

    def coords(self, n, lo, hi):
        ls = np.arange(lo, hi + 1)
        return (ls == n).astype(np.float64)

    def support_window(self, n):
        return n, n

    def tail_norm_sq(self, n, lo, hi):
        return 0.0 if lo <= n <= hi else 1.0

    def norm_sq(self, n):
        return 1.0

    def gram_block(self, rows, cols, pad=0):
        rows = np.atleast_1d(rows)[:, None]
        cols = np.atleast_1d(cols)[None, :]
        val = (rows == cols).astype(np.float64)
        return val, np.zeros_like(val)

    def gram_tail_sq(self, k, m):
        return 1.0 if k > m else 0.0


def onb_frame() -> OrthonormalBasisFrame:
    return OrthonormalBasisFrame()


def _label(n):
    """Natural index n >= 1 -> integer label 0, 1, -1, 2, -2, ..."""
    n = np.asarray(n, dtype=np.int64)
    half = n // 2
    return np.where(n % 2 == 0, half, -half)


def _index(label):
    label = np.asarray(label, dtype=np.int64)
    return np.where(label > 0, 2 * label, 1 - 2 * label)


def _sum_inv_sq_from(d: float) -> float:
    """Upper bound on sum_{j >= 0} 1/(d + j)^2 for d > 0."""
    return 1.0 / (d * d) + 1.0 / d


_SIN_QUARTER_SQ = np.array([math.sin(math.pi * r / 4) ** 2 for r in range(8)])
_H = math.sqrt(0.5)
_SIN_QUARTER = np.array([0.0, _H, 1.0, _H, 0.0, -_H, -1.0, -_H])  # sin(pi r / 4), exact zeros


def _sinc_quarter(d) -> np.ndarray:
    """sinc(pi d / 4) for integer d, with exact zeros and ones."""
    d = np.asarray(d, dtype=np.int64)
    out = np.ones(d.shape)
    nz = d != 0
    dn = d[nz]
    out[nz] = _SIN_QUARTER[dn % 8] / (math.pi * dn / 4.0)
    return out


class SincFrame(GeneratedFrame):
    """Quarter-shift sinc frame phi_j(x) = sinc(pi (x - j/4)), j in Z.

    Natural indices enumerate the labels as 0, 1, -1, 2, -2, ...; the
    reference basis is the Shannon basis e_l = phi_{4l}.  Inner products
    are point evaluations, <phi_a, phi_b> = sinc(pi (a - b) / 4) in labels.
    """

    name = "sinc"
    A = 4.0
    B = 4.0
    min_norm = 1.0

    label = staticmethod(_label)
    index = staticmethod(_index)

    def coords(self, n, lo, hi):
        ls = np.arange(lo, hi + 1, dtype=np.int64)
        return _sinc_quarter(4 * ls - int(_label(n)))

    def support_window(self, n):
        c = int(_label(n))
        return math.floor(c / 4), math.ceil(c / 4)

    def tail_norm_sq(self, n, lo, hi):
        j = int(_label(n))
        x = j / 4.0
        if not lo <= x <= hi:
            return 1.0
        if j % 4 == 0:
            return 0.0
        # |sinc(pi t)| <= 1/(pi |t|); integral comparison on each side
        right = _sum_inv_sq_from(hi + 1 - x)
        left = _sum_inv_sq_from(x - (lo - 1))
        return (left + right) / math.pi**2

    def norm_sq(self, n):
        return 1.0

    def gram_block(self, rows, cols, pad=0):
        a = _label(np.atleast_1d(rows))[:, None]
        b = _label(np.atleast_1d(cols))[None, :]
        val = _sinc_quarter(a - b)
        return val, np.zeros_like(val)

    def covered_labels(self, m: int) -> tuple[int, int]:
        """Labels of indices 1..m form the integer interval [lo, hi]."""
        if m <= 0:
            return 0, -1
        return -((m - 1) // 2), m // 2

    def gram_tail_sq(self, k, m, exact_terms: int = 4096):
        """sum over labels outside the covered range of sinc^2(pi (j - j_k)/4)."""
        jk = int(_label(k))
        lo, hi = self.covered_labels(m)
        total = 0.0
        for side, edge in ((1, hi), (-1, lo)):
            start = edge + side
            d0 = side * (start - jk)  # distance in labels to the first omitted one
            if d0 <= 0:
                # phi_k is not inside the block: fall back on Bessel, B ||phi_k||^2
                return self.B
            ds = d0 + np.arange(exact_terms)
            total += float(np.sum(_SIN_QUARTER_SQ[ds % 8] * 16.0 / (math.pi**2 * ds.astype(np.float64) ** 2)))
            total += 16.0 / math.pi**2 * _sum_inv_sq_from(float(d0 + exact_terms))
        return total


def sinc_frame() -> SincFrame:
    return SincFrame()


class PerturbedBasisFrame(GeneratedFrame):
    """phi_1 = e_1, phi_n = e_n + psi_n, with psi_n = 0 beyond the blocks.

    ``blocks[m-1]`` is the (rescaled) finite frame Psi_m for V_m =
    span{e_1..e_m}; its vectors are numbered consecutively from n = 2.
    """

    name = "riesz"

    def __init__(self, blocks, eps, field=ScalarField.REAL):
        self.field = as_field(field)
        self.eps = float(eps)
        self.blocks = list(blocks)
        psi = {}
        n = 2
        self.block_ranges = []
        for m, blk in enumerate(self.blocks, start=1):
            start = n
            for v in blk.vectors:
                psi[n] = np.asarray(v)
                n += 1
            self.block_ranges.append((start, n - 1))
        self.psi = psi
        self.n_perturbed = n - 1
        self.m_max = len(self.blocks)
        dtype = self.field.dtype
        # every perturbed vector lives in [1, n_perturbed]
        self.width = max(self.n_perturbed, self.m_max, 1)
        rows = np.zeros((self.width, self.width), dtype=dtype)
        for i in range(1, self.width + 1):
            rows[i - 1, i - 1] = 1.0
            if i in psi:
                p = psi[i]
                rows[i - 1, : p.size] += p
        self._rows = rows
        mass = sum(float(np.vdot(p, p).real) for p in psi.values())
        self.perturbation_mass = mass
        r = math.sqrt(mass)
        self.A = (1.0 - r) ** 2
        self.B = (1.0 + r) ** 2
        self.min_norm = float(min(1.0, np.min(np.linalg.norm(rows, axis=1))))

    def _row(self, n, lo, hi):
        out = np.zeros(hi - lo + 1, dtype=self.field.dtype)
        if n <= self.width:
            src = self._rows[n - 1]
            a, b = max(lo, 1), min(hi, self.width)
            if a <= b:
                out[a - lo : b - lo + 1] = src[a - 1 : b]
        elif lo <= n <= hi:
            out[n - lo] = 1.0
        return out

    def coords(self, n, lo, hi):
        return self._row(n, lo, hi)

    def support_window(self, n):
        return 1, max(n, self.width)

    def tail_norm_sq(self, n, lo, hi):
        a, b = self.support_window(n)
        if lo <= a and hi >= b:
            return 0.0
        full = self._row(n, a, b)
        ls = np.arange(a, b + 1)
        out = (ls < lo) | (ls > hi)
        return float(np.sum(np.abs(full[out]) ** 2))

    def gram_block(self, rows, cols, pad=0):
        val, _ = super().gram_block(rows, cols, pad)
        return val, np.zeros(val.shape)

    def gram_tail_sq(self, k, m):
        hi = max(k, self.width)
        if m >= hi:
            return 0.0
        ns = np.arange(m + 1, hi + 1)
        g, _ = self.gram_block([k], ns)
        return float(np.sum(np.abs(g) ** 2))

    def synthesis_window(self, n_max: int) -> np.ndarray:
        """Columns phi_1..phi_{n_max} on coordinates 1..max(n_max, width)."""
        w = max(n_max, self.width)
        return np.array([self._row(n, 1, w) for n in range(1, n_max + 1)]).T


def riesz_frame(eps: float, block_frames, certify=None, field=ScalarField.REAL) -> PerturbedBasisFrame:
    """Riesz basis phi_n = e_n + psi_n built from phase-retrieval blocks.

    ``block_frames[m-1]`` must do phase retrieval for V_m = span{e_1..e_m}
    (M = m) and hold at least r*m vectors (r = 2 real, 4 complex).  Block m
    is rescaled to squared mass eps * 2^{-m-1}.  ``certify`` (a callable
    frame -> bool) is applied to every block when given.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    field = as_field(field)
    r = 2 if field is ScalarField.REAL else 4
    scaled = []
    for m, blk in enumerate(block_frames, start=1):
        if blk.M != m:
            raise ValueError(f"block {m} lives in dimension {blk.M}, expected {m}")
        if blk.N < r * m:
            raise ValueError(f"block {m} has {blk.N} vectors, need at least {r * m}")
        if certify is not None and not certify(blk):
            raise ValueError(f"block {m} fails its phase-retrieval certificate")
        mass = float(np.sum(blk.norms**2))
        target = eps * 2.0 ** (-m - 1)
        scaled.append(blk.scaled(math.sqrt(target / mass)))
    return PerturbedBasisFrame(scaled, eps, field)


# -- perturbation destroying phase retrieval ----------------------------------


@dataclass
class PerturbationResult:
    frame: FiniteFrame
    k: int
    eps: float
    difference_sq: float
    lower_bound: float
    degraded: bool
    # witnesses of the failed complement property for the split S = {1..k}
    # inside the ambient space R^M (+) span{e_{M+1}}: u is orthogonal to the
    # vectors in S, v to every vector outside S
    u: np.ndarray = dc_field(repr=False, default=None)
    v: np.ndarray = dc_field(repr=False, default=None)
    rank_inside: int = 0
    rank_outside: int = 0
    certified: bool = False


def perturb_destroy_pr(frame: FiniteFrame, eps: float, ref=None, degrade_tol: float = 1e-12) -> PerturbationResult:
    """Remove the component along ``ref`` from every vector past index k.

    The finite frame is read as the leading part of a countable frame in an
    infinite-dimensional space whose remaining vectors are reference basis
    vectors orthogonal to the first M coordinates.  The complement property
    then fails for S = {1..k}: S lies in the first M coordinates (so the
    next reference direction is orthogonal to it) and every vector outside S
    is orthogonal to ``ref``.  Both facts are checked numerically.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    M = frame.M
    ref = np.zeros(M) if ref is None else np.asarray(ref, dtype=frame.vectors.dtype)
    if not np.any(ref):
        ref = np.zeros(M, dtype=frame.vectors.dtype)
        ref[0] = 1.0
    ref = ref / np.linalg.norm(ref)
    mass = np.abs(frame.vectors @ ref.conj()) ** 2
    # tails[k] = sum_{n > k} mass_n for k = 0..N
    tails = np.concatenate([np.cumsum(mass[::-1])[::-1], [0.0]])
    k = int(np.argmax(tails < eps))
    vecs = frame.vectors.copy()
    tail = vecs[k:]
    coef = tail @ ref.conj()  # <phi_n, ref>
    vecs[k:] = tail - np.outer(coef, ref)
    new = FiniteFrame(vecs, frame.field)
    diff = float(np.sum(np.abs(frame.vectors - vecs) ** 2))
    lo = frame_bounds(new)[0]
    # ambient coordinates: the M frame coordinates and one more reference direction
    amb = np.zeros((new.N, M + 1), dtype=vecs.dtype)
    amb[:, :M] = vecs
    u = np.zeros(M + 1)
    u[M] = 1.0
    v = np.concatenate([ref, [0.0]])
    inside = amb[:k]
    outside = amb[k:]
    rank_in = numerical_rank(inside) if k else 0
    rank_out = numerical_rank(outside[:, :M]) if k < new.N else 0
    ok_u = bool(np.all(inside @ u.conj() == 0)) if k else True
    ok_v = bool(np.max(np.abs(outside @ v.conj()), initial=0.0) <= 1e-14 * max(1.0, float(np.max(np.abs(outside), initial=0.0))))
    certified = ok_u and ok_v and rank_in < M + 1 and rank_out < M
    return PerturbationResult(
        frame=new,
        k=k,
        eps=float(eps),
        difference_sq=diff,
        lower_bound=lo,
        degraded=lo <= degrade_tol,
        u=u,
        v=v,
        rank_inside=rank_in,
        rank_outside=rank_out,
        certified=certified,
    )


# -- frame files -----------------------------------------------------------


def _encode_entry(x, complex_field: bool):
    if complex_field:
        return [float(np.real(x)), float(np.imag(x))]
    return float(x)


def dump_frame(frame: FiniteFrame) -> dict:
    cplx = frame.field is ScalarField.COMPLEX
    return {
        "field": frame.field.value,
        "dim": frame.M,
        "vectors": [[_encode_entry(x, cplx) for x in row] for row in frame.vectors],
    }


def encode_vector(v, field) -> list:
    cplx = as_field(field) is ScalarField.COMPLEX
    return [_encode_entry(x, cplx) for x in np.asarray(v)]


def parse_frame(doc) -> FiniteFrame:
    if not isinstance(doc, dict):
        raise FrameFileError("frame document must be an object")
    try:
        field = ScalarField(doc["field"])
        dim = doc["dim"]
        rows = doc["vectors"]
    except (KeyError, ValueError) as exc:
        raise FrameFileError(f"missing or invalid key: {exc}") from None
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FrameFileError("dim must be a positive integer")
    if not isinstance(rows, list) or not rows:
        raise FrameFileError("vectors must be a non-empty list")
    cplx = field is ScalarField.COMPLEX
    out = np.zeros((len(rows), dim), dtype=field.dtype)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise FrameFileError(f"row {i} does not have {dim} entries")
        for j, x in enumerate(row):
            if cplx:
                if not (isinstance(x, list) and len(x) == 2 and all(_is_num(t) for t in x)):
                    raise FrameFileError(f"entry ({i},{j}) must be a [re, im] pair")
                out[i, j] = complex(x[0], x[1])
            else:
                if not _is_num(x):
                    raise FrameFileError(f"entry ({i},{j}) must be a number")
                out[i, j] = x
    if not np.all(np.isfinite(out)):
        raise FrameFileError("non-finite entries")
    return FiniteFrame(out, field)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def load_frame(path) -> FiniteFrame:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FrameFileError(f"not valid JSON: {exc}") from None
    return parse_frame(doc)


def dumps(doc) -> str:
    """Canonical JSON text: sorted keys, shortest round-trip floats."""
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=True) + "\n"


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_frame(frame: FiniteFrame, path) -> None:
    atomic_write(path, dumps(dump_frame(frame)))
