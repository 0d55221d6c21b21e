"""Matrix symbols ``P(s) = P0 + sum_nu s_nu P_nu`` and their characteristic roots."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special_functions import FractionalOrder

HERMITIAN_TOL = 1e-12


class EigenSolverError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class MatrixPencil:
    """Degree-one matrix symbol of an ``m x m`` system in ``n`` space dimensions."""

    P0: np.ndarray
    Pnu: tuple

    def __post_init__(self):
        P0 = np.array(self.P0, dtype=complex)
        if P0.ndim != 2 or P0.shape[0] != P0.shape[1]:
            raise ValueError(f"P0 must be square, got shape {P0.shape}")
        Pnu = tuple(np.array(P, dtype=complex) for P in self.Pnu)
        if len(Pnu) < 1:
            raise ValueError("need at least one spatial coefficient matrix")
        for nu, P in enumerate(Pnu):
            if P.shape != P0.shape:
                raise ValueError(f"Pnu[{nu}] has shape {P.shape}, expected {P0.shape}")
        P0.setflags(write=False)
        for P in Pnu:
            P.setflags(write=False)
        object.__setattr__(self, "P0", P0)
        object.__setattr__(self, "Pnu", Pnu)

    @property
    def m(self) -> int:
        return self.P0.shape[0]

    @property
    def n(self) -> int:
        return len(self.Pnu)

    @property
    def coefficients(self) -> np.ndarray:
        """Stacked ``(n, m, m)`` array of the first-order coefficients."""
        return np.stack(self.Pnu)

    def __call__(self, s) -> np.ndarray:
        return eval_pencil(self, s)


@dataclass(frozen=True, eq=False)
class ComplexFrequency:
    """``s = sigma + i tau`` with real vectors ``sigma``, ``tau`` of length ``n``."""

    sigma: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        sigma = np.atleast_1d(np.array(self.sigma, dtype=float))
        tau = np.atleast_1d(np.array(self.tau, dtype=float))
        if tau.shape != sigma.shape or sigma.ndim != 1:
            raise ValueError("sigma and tau must be vectors of equal length")
        if not (np.all(np.isfinite(sigma)) and np.all(np.isfinite(tau))):
            raise ValueError("frequency components must be finite")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def from_complex(cls, s) -> ComplexFrequency:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return cls(s.real, s.imag)

    @classmethod
    def real(cls, sigma) -> ComplexFrequency:
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        return cls(sigma, np.zeros_like(sigma))

    @property
    def s(self) -> np.ndarray:
        return self.sigma + 1j * self.tau

    @property
    def n(self) -> int:
        return len(self.sigma)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.sigma**2 + self.tau**2)))


@dataclass(frozen=True, eq=False)
class CharRoots:
    """Roots of ``det(P(s) - lambda I) = 0`` with multiplicity, unordered."""

    roots: np.ndarray

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def residual(self, P: np.ndarray, probes) -> float:
        """Largest relative mismatch between ``prod(lambda - roots)`` and ``det(lambda I - P)``."""
        P = np.asarray(P, dtype=complex)
        m = P.shape[0]
        worst = 0.0
        for lam in np.atleast_1d(probes):
            lhs = np.prod(lam - self.roots)
            rhs = np.linalg.det(lam * np.eye(m) - P)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        return worst


def _frequency(s) -> ComplexFrequency:
    if isinstance(s, ComplexFrequency):
        return s
    return ComplexFrequency.from_complex(s)


def pencil_from_symmetric(A, B) -> MatrixPencil:
    """Symbol of ``D U + sum_nu A_nu dU/dx_nu + B U = 0`` with Hermitian ``A_nu``.

    ``P(s) = i (sum_nu s_nu A_nu + i B)``, so ``P0 = -B`` and ``P_nu = i A_nu``.
    """
    A = [np.array(a, dtype=complex) for a in A]
    B = np.array(B, dtype=complex)
    for nu, a in enumerate(A):
        if a.shape != B.shape:
            raise ValueError(f"A[{nu}] has shape {a.shape}, expected {B.shape}")
        if not np.allclose(a, a.conj().T, rtol=0, atol=HERMITIAN_TOL):
            raise ValueError(f"A[{nu}] is not Hermitian")
    return MatrixPencil(-B, tuple(1j * a for a in A))


def eval_pencil(p: MatrixPencil, s) -> np.ndarray:
    """``P0 + sum_nu s_nu P_nu`` at one frequency."""
    freq = _frequency(s)
    if freq.n != p.n:
        raise ValueError(f"frequency has {freq.n} components, pencil expects {p.n}")
    return p.P0 + np.tensordot(freq.s, p.coefficients, axes=(0, 0))


def eval_pencil_batch(p: MatrixPencil, s) -> np.ndarray:
    """Symbol on a stack of complex frequencies of shape ``(..., n)``."""
    s = np.asarray(s, dtype=complex)
    if s.shape[-1] != p.n:
        raise ValueError(f"frequencies have {s.shape[-1]} components, pencil expects {p.n}")
    return p.P0 + np.tensordot(s, p.coefficients, axes=(-1, 0))


def char_roots(p: MatrixPencil, s) -> CharRoots:
    P = eval_pencil(p, s)
    try:
        roots = np.linalg.eigvals(P)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue computation failed at s={_frequency(s).s}: {exc}") from None
    return CharRoots(roots)


def _lambda_from_roots(roots, alpha: float):
    """Lambda_alpha for an array of roots along the last axis."""
    roots = np.asarray(roots, dtype=complex)
    mag = np.abs(roots)
    arg = np.angle(roots)
    inside = (np.abs(arg) <= alpha * math.pi / 2) & (mag > 0)
    # Re lambda^(1/alpha) on the principal branch; a zero root contributes 0
    vals = np.where(inside, mag ** (1 / alpha) * np.cos(arg / alpha), 0.0)
    return np.maximum(np.max(vals, axis=-1), 0.0)


def lambda_alpha(p: MatrixPencil, alpha, s) -> float:
    """``max Re lambda_k(s)^(1/alpha)`` over roots with ``|arg lambda_k| <= alpha pi / 2``, or 0."""
    a = float(alpha.alpha) if isinstance(alpha, FractionalOrder) else float(alpha)
    return float(_lambda_from_roots(char_roots(p, s).roots, a))


def lambda_alpha_batch(p: MatrixPencil, alpha, s) -> np.ndarray:
    """:func:`lambda_alpha` on a stack of complex frequencies of shape ``(..., n)``."""
    a = float(alpha.alpha) if isinstance(alpha, FractionalOrder) else float(alpha)
    P = eval_pencil_batch(p, s)
    try:
        roots = np.linalg.eigvals(P)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from None
    return _lambda_from_roots(roots, a)
