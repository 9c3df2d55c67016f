"""Vectors, Hermitian operators and the quotient metric on H/~.

Vectors are plain 1-D numpy arrays; the scalar field is carried alongside
as a :class:`ScalarField` tag because a real array may legitimately live in
a complex space (the unimodular group then differs).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ScalarField(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self):
        return np.float64 if self is ScalarField.REAL else np.complex128

    def lifted_dim(self, m: int) -> int:
        """Real dimension of the space of m x m Hermitian operators."""
        return m * (m + 1) // 2 if self is ScalarField.REAL else m * m

    def unimodular(self, theta):
        """Unimodular scalar(s); for the real field theta is snapped to {0, pi}."""
        if self is ScalarField.REAL:
            return np.where(np.cos(theta) >= 0, 1.0, -1.0)
        return np.exp(1j * np.asarray(theta))


def as_field(field) -> ScalarField:
    return field if isinstance(field, ScalarField) else ScalarField(field)


def as_vector(f, field=None) -> np.ndarray:
    field = as_field(field) if field is not None else None
    v = np.asarray(f)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if field is ScalarField.REAL:
        if np.iscomplexobj(v) and np.any(v.imag != 0):
            raise ValueError("complex entries in a real-field vector")
        return v.real.astype(np.float64)
    return v.astype(np.complex128 if np.iscomplexobj(v) else np.float64)


def _check_same_length(f: np.ndarray, g: np.ndarray) -> None:
    if f.shape != g.shape:
        raise ValueError(f"dimension mismatch: {f.shape[0]} vs {g.shape[0]}")


def inner(f, g) -> complex | float:
    """<f, g>, linear in the first slot."""
    f, g = np.asarray(f), np.asarray(g)
    _check_same_length(f, g)
    return np.vdot(g, f)


def quotient_distance(f, g, field=ScalarField.COMPLEX) -> float:
    """inf over unimodular alpha of ||f - alpha g||.

    Equals sqrt(||f||^2 + ||g||^2 - 2|<f,g>|), but is evaluated as
    ||f - alpha* g|| with the optimal phase alpha* = <f,g>/|<f,g>| so that
    nearby vectors do not lose digits to cancellation. For the real field
    the infimum only ranges over {+1, -1}, so alpha* = sign Re <f,g>.
    """
    field = as_field(field)
    f, g = np.asarray(f), np.asarray(g)
    _check_same_length(f, g)
    ip = np.vdot(g, f)
    if field is ScalarField.REAL:
        alpha = -1.0 if ip.real < 0 else 1.0
    else:
        alpha = ip / abs(ip) if ip != 0 else 1.0
    return float(np.linalg.norm(f - alpha * g))


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian (real symmetric for real data) matrix.

    Built only through :meth:`from_lower`, which mirrors the lower triangle,
    so ``matrix`` equals its conjugate transpose bit for bit.
    """

    matrix: np.ndarray

    @classmethod
    def from_lower(cls, a) -> "HermitianOperator":
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        low = np.tril(a, -1)
        diag = np.diag(np.diag(a).real)
        m = low + low.conj().T + diag
        if not np.iscomplexobj(m) or not np.any(m.imag):
            m = m.real.astype(np.float64)
        m.setflags(write=False)
        return cls(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator.from_lower(self.matrix - other.matrix)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator.from_lower(self.matrix + other.matrix)

    def __mul__(self, t: float) -> "HermitianOperator":
        return HermitianOperator.from_lower(self.matrix * float(t))

    __rmul__ = __mul__

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def opnorm(self) -> float:
        w = self.eigvalsh()
        return float(np.max(np.abs(w))) if w.size else 0.0

    def hs_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def lift(f) -> HermitianOperator:
    """The rank-one operator ff^*: h -> <h, f> f."""
    f = np.asarray(f)
    return HermitianOperator.from_lower(np.outer(f, f.conj()))


def lifted_pair_opnorm(f, g) -> float:
    """Operator norm of ff^* - gg^* in closed form.

    With ||f|| >= ||g|| the largest-magnitude eigenvalue is
    (||f||^2 - ||g||^2 + sqrt((||f||^2 + ||g||^2)^2 - 4|<f,g>|^2)) / 2.
    """
    f, g = np.asarray(f), np.asarray(g)
    _check_same_length(f, g)
    nf = np.vdot(f, f).real
    ng = np.vdot(g, g).real
    if nf < ng:
        nf, ng = ng, nf
    ip2 = abs(np.vdot(g, f)) ** 2
    disc = max(0.0, (nf + ng) ** 2 - 4.0 * ip2)
    return float(0.5 * (nf - ng + np.sqrt(disc)))


def quotient_vs_lift_bound(f, g, field=ScalarField.COMPLEX, tol: float = 1e-12):
    """Both sides of d(f, g) <= 2 ||ff^* - gg^*|| for ||f|| = 1, ||g|| <= 1."""
    f, g = np.asarray(f), np.asarray(g)
    _check_same_length(f, g)
    nf = np.linalg.norm(f)
    ng = np.linalg.norm(g)
    if abs(nf - 1.0) > 1e-9 or ng > 1.0 + 1e-9:
        raise ValueError(f"need ||f|| = 1 and ||g|| <= 1, got {nf!r}, {ng!r}")
    lhs = quotient_distance(f, g, field)
    rhs = 2.0 * lifted_pair_opnorm(f, g)
    return lhs, rhs
