"""The resolvent matrix function ``E_alpha(t^alpha P(s))`` and its norm bound.

Two independent evaluation routes are provided:

* eigendecomposition ``V diag(E_alpha(w)) V^-1``, used when ``V`` is well
  conditioned;
* Newton interpolation of ``mu -> E_alpha(t^alpha mu)`` at the eigenvalues,
  evaluated on the Schur form.  Repeated eigenvalues become confluent nodes
  whose divided differences are derivatives of ``E_alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .special_functions import FractionalOrder, eval_E_alpha, eval_E_alpha_deriv
from .symbol_algebra import (
    ComplexFrequency,
    MatrixPencil,
    _frequency,
    eval_pencil,
    eval_pencil_batch,
    lambda_alpha,
    lambda_alpha_batch,
)

COND_LIMIT = 1e6
CROSS_CHECK_TOL = 1e-7
CLUSTER_TOL = 1e-6
DEFAULT_HORIZON = 1.0


class MatrixFunctionError(ArithmeticError):
    pass


class MatrixFunctionMismatch(MatrixFunctionError):
    """The eigendecomposition and Newton routes disagree."""


def _alpha(alpha) -> float:
    return float(alpha.alpha) if isinstance(alpha, FractionalOrder) else float(alpha)


# {{{ Newton interpolation

def leja_order(nodes) -> np.ndarray:
    """Indices putting ``nodes`` in Leja order (largest modulus first)."""
    nodes = np.asarray(nodes, dtype=complex)
    if len(nodes) == 0:
        return np.array([], dtype=int)
    remaining = list(range(len(nodes)))
    first = int(np.argmax(np.abs(nodes)))
    order = [first]
    remaining.remove(first)
    logprod = np.zeros(len(nodes))
    while remaining:
        last = nodes[order[-1]]
        with np.errstate(divide="ignore"):
            logprod += np.log(np.abs(nodes - last))
        nxt = max(remaining, key=lambda i: logprod[i])
        order.append(nxt)
        remaining.remove(nxt)
    return np.array(order)


def _cluster(nodes, tol=CLUSTER_TOL):
    """Group nearly equal nodes; returns (cluster values, label per node)."""
    nodes = np.asarray(nodes, dtype=complex)
    labels = -np.ones(len(nodes), dtype=int)
    values = []
    for i, x in enumerate(nodes):
        if labels[i] >= 0:
            continue
        scale = tol * max(1.0, abs(x))
        members = [j for j in range(len(nodes)) if labels[j] < 0 and abs(nodes[j] - x) <= scale]
        for j in members:
            labels[j] = len(values)
        values.append(complex(np.mean(nodes[members])))
    return np.array(values), labels


class _DividedDifferences:
    """Divided differences of ``f(mu) = E_alpha(t^alpha mu)`` over multisets of cluster values."""

    def __init__(self, alpha, t, values):
        self.alpha = alpha
        self.scale = t**alpha
        self.values = values
        self.memo: dict = {}

    def derivative(self, c, r):
        x = self.scale * self.values[c]
        if r == 0:
            return complex(eval_E_alpha(self.alpha, x))
        d = eval_E_alpha_deriv(self.alpha, r, x)
        return complex(self.scale**r * d / math.factorial(r))

    def __call__(self, counts: tuple) -> complex:
        if counts in self.memo:
            return self.memo[counts]
        present = [c for c, k in enumerate(counts) if k > 0]
        if len(present) == 1:
            c = present[0]
            out = self.derivative(c, counts[c] - 1)
        else:
            # f[S] = (f[S - {a}] - f[S - {b}]) / (b - a), a and b far apart
            best = None
            for i in present:
                for j in present:
                    if i < j:
                        d = abs(self.values[i] - self.values[j])
                        if best is None or d > best[0]:
                            best = (d, i, j)
            _, a, b = best
            without_a = list(counts)
            without_a[a] -= 1
            without_b = list(counts)
            without_b[b] -= 1
            out = (self(tuple(without_a)) - self(tuple(without_b))) / (self.values[b] - self.values[a])
        self.memo[counts] = out
        return out


def newton_coeffs(alpha, t: float, mu, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Newton coefficients ``b_k = f[mu_1, ..., mu_k]`` of ``f(mu) = E_alpha(t^alpha mu)``.

    Nodes closer than ``cluster_tol`` (relative) are treated as one repeated
    node, and the corresponding divided differences come from derivatives of
    ``E_alpha``.  Coefficients follow the order of ``mu``.
    """
    a = _alpha(alpha)
    if t < 0:
        raise ValueError("t must be non-negative")
    mu = np.atleast_1d(np.asarray(mu, dtype=complex))
    values, labels = _cluster(mu, cluster_tol)
    dd = _DividedDifferences(a, t, values)
    counts = [0] * len(values)
    out = np.empty(len(mu), dtype=complex)
    for k, lab in enumerate(labels):
        counts[lab] += 1
        out[k] = dd(tuple(counts))
    return out


def newton_matrix(coeffs, nodes, M) -> np.ndarray:
    """``sum_k b_k prod_{j<k} (M - mu_j I)`` by nested multiplication."""
    M = np.asarray(M, dtype=complex)
    eye = np.eye(M.shape[0])
    F = coeffs[-1] * eye
    for k in range(len(coeffs) - 2, -1, -1):
        F = coeffs[k] * eye + (M - nodes[k] * eye) @ F
    return F


def _matrix_ml_newton(alpha, A):
    T, Q = sla.schur(A, output="complex")
    diag = np.diag(T)
    values, labels = _cluster(diag)
    # Leja order over distinct values, repeated nodes kept adjacent
    nodes = []
    for c in leja_order(values):
        nodes.extend([values[c]] * int(np.sum(labels == c)))
    nodes = np.array(nodes)
    coeffs = newton_coeffs(alpha, 1.0, nodes)
    F = newton_matrix(coeffs, nodes, T)
    return Q @ F @ Q.conj().T


def _matrix_ml_eig(alpha, A, cond_limit=COND_LIMIT):
    w, V = np.linalg.eig(A)
    if np.linalg.cond(V) >= cond_limit:
        return None
    vals = eval_E_alpha(alpha, w)
    return (V * vals) @ np.linalg.inv(V)

# }}}


def matrix_ml(alpha, t: float, P, method: str = "auto", cross_check: bool = False,
              cond_limit: float = COND_LIMIT, tol: float = CROSS_CHECK_TOL) -> np.ndarray:
    """``E_alpha(t^alpha P)`` for a square matrix ``P``.

    ``method`` is ``"auto"`` (eigendecomposition when the eigenvector matrix
    has condition number below ``cond_limit``, Newton/Schur otherwise),
    ``"eig"`` or ``"newton"``.  With ``cross_check`` both routes are run and a
    :class:`MatrixFunctionMismatch` is raised if they differ by more than
    ``tol`` relative to the result.
    """
    a = _alpha(alpha)
    if t < 0:
        raise ValueError("t must be non-negative")
    P = np.atleast_2d(np.asarray(P, dtype=complex))
    m = P.shape[0]
    if t == 0 or not np.any(P):
        return np.eye(m, dtype=complex)
    A = t**a * P

    eig = newton = None
    if method in ("auto", "eig"):
        eig = _matrix_ml_eig(a, A, cond_limit)
        if eig is None and method == "eig":
            raise MatrixFunctionError("eigenvector matrix is too ill-conditioned")
    if method == "newton" or eig is None or cross_check:
        newton = _matrix_ml_newton(a, A)
    if method not in ("auto", "eig", "newton"):
        raise ValueError(f"unknown method {method!r}")

    if cross_check and eig is not None:
        scale = max(np.linalg.norm(eig), np.finfo(float).tiny)
        diff = np.linalg.norm(eig - newton) / scale
        if diff > tol:
            raise MatrixFunctionMismatch(
                f"eigendecomposition and Newton routes differ by {diff:.3e} (tolerance {tol:.1e})"
            )
    result = eig if eig is not None else newton
    if not np.all(np.isfinite(result)):
        raise MatrixFunctionError("matrix Mittag-Leffler value is not finite")
    return result


@dataclass(frozen=True, eq=False)
class ResolventSample:
    t: float
    s: ComplexFrequency
    value: np.ndarray = field(repr=False)
    norm: float


def resolvent(p: MatrixPencil, alpha, t: float, s, horizon: float = DEFAULT_HORIZON,
              **kwargs) -> ResolventSample:
    """``E_alpha(t^alpha P(s))`` with its spectral norm."""
    if not (0 <= t <= horizon):
        raise ValueError(f"t={t} outside [0, {horizon}]")
    freq = _frequency(s)
    value = matrix_ml(alpha, t, eval_pencil(p, freq), **kwargs)
    return ResolventSample(t, freq, value, float(np.linalg.norm(value, 2)))


def resolvent_batch(p: MatrixPencil, alpha, t: float, s, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Resolvent on a stack of frequencies ``s`` of shape ``(F, n)``; returns ``(F, m, m)``.

    Uses one batched eigendecomposition and falls back to :func:`matrix_ml`
    for frequencies with an ill-conditioned eigenvector matrix.
    """
    a = _alpha(alpha)
    s = np.asarray(s, dtype=complex)
    P = eval_pencil_batch(p, s)
    F, m = P.shape[0], p.m
    if t == 0:
        return np.broadcast_to(np.eye(m, dtype=complex), (F, m, m)).copy()
    A = t**a * P
    w, V = np.linalg.eig(A)
    cond = np.linalg.cond(V)
    good = np.isfinite(cond) & (cond < cond_limit)
    out = np.empty((F, m, m), dtype=complex)
    if np.any(good):
        vals = eval_E_alpha(a, w[good])
        Vg = V[good]
        out[good] = np.einsum("fij,fj,fjk->fik", Vg, vals, np.linalg.inv(Vg))
    for f in np.flatnonzero(~good):
        try:
            out[f] = matrix_ml(a, t, P[f], method="newton")
        except ArithmeticError as exc:
            raise MatrixFunctionError(f"resolvent failed at s={s[f]}: {exc}") from None
    return out


def norm_bound_rhs(p: MatrixPencil, alpha, t: float, s, C: float) -> float:
    """``C (1 + t^alpha |s|)^(m-1) exp(t Lambda_alpha(s))``."""
    if C <= 0:
        raise ValueError("C must be positive")
    a = _alpha(alpha)
    freq = _frequency(s)
    lam = lambda_alpha(p, a, freq)
    return C * (1 + t**a * freq.norm()) ** (p.m - 1) * math.exp(t * lam)


class NormBoundSamples(NamedTuple):
    samples: list
    calibration: np.ndarray


def norm_bound_samples(p: MatrixPencil, alpha, rng, times=(0.1, 0.5, 1.0), rays: int = 2,
                       radii=(0.1, 100.0), per_ray: int = 257, max_exponent: float = 300.0
                       ) -> NormBoundSamples:
    """``(t, s)`` pairs for :func:`verify_norm_bound`, laid out along rays.

    For every ``t``, ``rays`` random directions ``d`` (with a random share in
    ``tau``) are drawn and ``s = r d`` is sampled at ``per_ray`` log-spaced
    radii.  The ratio bounded by ``C`` has narrow peaks where eigenvalues
    nearly collide, hence the dense default.  Samples alternate between calibration and test along each ray,
    starting and ending with calibration, so every held-out point lies
    between two calibration points.  A ray stops before the growth factor
    ``|t^alpha lambda|^(1/alpha)`` exceeds ``max_exponent``, keeping every
    resolvent representable.
    """
    if per_ray < 3:
        raise ValueError("per_ray must be at least 3")
    a = _alpha(alpha)
    r = np.geomspace(radii[0], radii[1], per_ray)
    samples, calibration = [], []
    for t in times:
        for _ in range(rays):
            d = rng.standard_normal(p.n) + 1j * rng.standard_normal(p.n) * rng.uniform(0, 1)
            d /= np.linalg.norm(d)
            s = r[:, None] * d[None, :]
            growth = np.max(np.abs(t**a * np.linalg.eigvals(eval_pencil_batch(p, s))), axis=-1) ** (1 / a)
            over = np.flatnonzero(growth > max_exponent)
            keep = over[0] if len(over) else per_ray
            keep -= 1 - keep % 2
            ray = [(float(t), si) for si in s[:max(keep, 0)]]
            samples.extend(ray)
            calibration.extend(k % 2 == 0 for k in range(len(ray)))
    return NormBoundSamples(samples, np.array(calibration, dtype=bool))


@dataclass
class NormBoundReport:
    C: float
    holds: bool
    worst_test_ratio: float
    ratios: np.ndarray = field(repr=False)
    calibration: np.ndarray = field(repr=False)


def verify_norm_bound(p: MatrixPencil, alpha, samples, slack: float = 0.05,
                      cross_check: bool = False, calibration=None) -> NormBoundReport:
    """Fit ``C`` in the resolvent norm bound and test it on held-out samples.

    ``samples`` is a sequence of ``(t, s)`` pairs or a :class:`NormBoundSamples`.
    ``calibration`` marks the calibration samples (default: even indices);
    the rest are held out.  ``C`` is the largest calibration ratio
    ``||E_alpha(t^alpha P(s))|| / rhs(C=1)``.
    """
    if isinstance(samples, NormBoundSamples):
        samples, calibration = samples.samples, samples.calibration if calibration is None else calibration
    a = _alpha(alpha)
    ratios = np.empty(len(samples))
    times = np.array([t for t, _ in samples], dtype=float)
    freqs = np.array([_frequency(s).s for _, s in samples]).reshape(len(samples), p.n)
    for t in np.unique(times):
        idx = np.flatnonzero(times == t)
        if cross_check:
            values = np.array([matrix_ml(a, t, eval_pencil(p, freqs[i]), cross_check=True) for i in idx])
        else:
            values = resolvent_batch(p, a, t, freqs[idx])
        norms = np.linalg.norm(values, ord=2, axis=(1, 2))
        lam = lambda_alpha_batch(p, a, freqs[idx])
        rhs = (1 + t**a * np.linalg.norm(freqs[idx], axis=1)) ** (p.m - 1) * np.exp(t * lam)
        ratios[idx] = norms / rhs
    if calibration is None:
        calibration = np.arange(len(samples)) % 2 == 0
    calibration = np.asarray(calibration, dtype=bool)
    if calibration.shape != (len(samples),) or not calibration.any():
        raise ValueError("calibration mask must select at least one of the samples")
    C = float(np.max(ratios[calibration]))
    test = ratios[~calibration]
    worst = float(np.max(test) / C) if len(test) else 0.0
    return NormBoundReport(C, bool(worst <= 1 + slack), worst, ratios, calibration)
