"""Mittag-Leffler functions and their derivatives.

The three-parameter function

    E^rho_{alpha,gamma}(z) = sum_l (rho)_l z^l / (Gamma(alpha l + gamma) l!)

contains the classical ``E_alpha`` (``gamma = rho = 1``) and the two-parameter
``E_{alpha,gamma}`` (``rho = 1``).  Evaluation is double precision and picks
one of three routes per point:

* the power series with compensated summation, whenever its terms do not
  cancel badly (always the case for small ``|z|``);
* Laplace-transform inversion on a parabolic contour (:mod:`._contour`) for
  ``rho = 1``, and for integer ``rho`` through derivatives of two-parameter
  functions;
* an extended-precision power series as a last resort (non-integer ``rho``
  with large ``|z|``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special as sc

from ._contour import ml2_contour

DEFAULT_RTOL = 1e-10
TRANSITION_EPS = 0.05

# largest acceptable ratio between the biggest series term and the sum
_SERIES_CANCELLATION = 1e3
_SERIES_TARGET = 1e-12
_EPS = float(np.finfo(float).eps)
_MAX_SERIES_TERMS = 4000
_LOG_HUGE = 700.0


class MittagLefflerError(ArithmeticError):
    """Base class for evaluation failures."""


class MLOverflowError(MittagLefflerError, OverflowError):
    """The value is not representable in double precision."""


class MLConvergenceError(MittagLefflerError):
    """No evaluation route reached the requested accuracy."""


@dataclass(frozen=True)
class FractionalOrder:
    """Time-derivative order ``alpha`` in the open interval (0, 1)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a < 1.0):
            raise ValueError(f"fractional order must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def from_beta(cls, beta: float) -> FractionalOrder:
        """Order ``beta / 2`` of the first-order system for a diffusion-wave order ``beta``."""
        if not (1.0 < beta < 2.0):
            raise ValueError(f"diffusion-wave order must lie in (1, 2), got {beta!r}")
        return cls(beta / 2.0)

    @property
    def beta(self) -> float:
        return 2.0 * self.alpha

    def __float__(self) -> float:
        return self.alpha


@dataclass(frozen=True)
class MLParams:
    alpha: float
    gamma: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be positive, got {self.rho!r}")
        if not math.isfinite(self.gamma):
            raise ValueError(f"gamma must be finite, got {self.gamma!r}")


def _as_alpha(alpha) -> float:
    return float(alpha.alpha) if isinstance(alpha, FractionalOrder) else float(alpha)


# {{{ power series

@lru_cache(maxsize=512)
def _coefficient_table(alpha, gamma, rho):
    """log|c_l| and sign of c_l = (rho)_l / (l! Gamma(alpha l + gamma)), l < _MAX_SERIES_TERMS."""
    ell = np.arange(_MAX_SERIES_TERMS, dtype=float)
    arg = alpha * ell + gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        log_rgamma = -sc.gammaln(arg)
        sign = sc.gammasgn(arg)
    # 1/Gamma vanishes at the poles
    poles = (arg <= 0) & (arg == np.round(arg))
    sign = np.where(poles, 0.0, sign)
    log_rgamma = np.where(poles, -np.inf, log_rgamma)
    if rho == 1.0:
        log_poch = np.zeros(_MAX_SERIES_TERMS)
    else:
        log_poch = sc.gammaln(rho + ell) - sc.gammaln(rho) - sc.gammaln(ell + 1)
    logc = log_poch + log_rgamma
    logc.setflags(write=False)
    sign.setflags(write=False)
    return logc, sign


_ELL = np.arange(_MAX_SERIES_TERMS, dtype=float)


def _series_extent(alpha, gamma, rho, r):
    """(number of terms, log of the largest term) or (None, peak) if the table is too short."""
    logc, sign = _coefficient_table(alpha, gamma, rho)
    if r == 0.0:
        return 1, logc[0]
    logr = math.log(r)
    n = 64
    while True:
        logt = logc[:n] + _ELL[:n] * logr
        logt[sign[:n] == 0] = -np.inf
        ipk = int(np.argmax(logt))
        peak = float(logt[ipk])
        # past the peak the terms decrease; stop 40 e-folds below it
        small = np.flatnonzero(logt[ipk:] < peak - 40.0)
        if len(small):
            return ipk + int(small[0]) + 1, peak
        if n >= _MAX_SERIES_TERMS:
            return None, peak
        n = min(4 * n, _MAX_SERIES_TERMS)


def _series_batch(alpha, gamma, rho, z):
    """Power series in double precision on a 1-d array.

    Returns ``(values, accepted)``; a point is accepted when its largest term
    exceeds the compensated sum by at most ``_SERIES_CANCELLATION``.
    """
    logc, sign = _coefficient_table(alpha, gamma, rho)
    vals = np.zeros(z.shape, dtype=complex)
    ok = np.zeros(z.shape, dtype=bool)
    r = np.abs(z)
    zero = r == 0
    vals[zero] = sign[0] * math.exp(logc[0])
    ok[zero] = True
    idx = np.flatnonzero(~zero)
    if len(idx) == 0:
        return vals, ok
    # quarter-octave bins in |z| share one truncation length
    key = np.floor(4 * np.log2(r[idx])).astype(int)
    for b in np.unique(key):
        sel = idx[key == b]
        n, _ = _series_extent(alpha, gamma, rho, float(r[sel].max()))
        if n is None:
            continue
        lc, sg, ell = logc[:n], sign[:n], _ELL[:n]
        step = max(1, 2_000_000 // n)
        for s0 in range(0, len(sel), step):
            rows = sel[s0:s0 + step]
            peak = np.max(lc + ell * np.log(r[rows])[:, None], axis=1)
            rows, peak = rows[peak <= _LOG_HUGE], peak[peak <= _LOG_HUGE]
            if len(rows) == 0:
                continue
            with np.errstate(invalid="ignore", over="ignore"):
                terms = sg * np.exp(lc + ell * np.log(z[rows])[:, None])
            peak_abs = np.exp(peak)
            # cheap pairwise sums screen out badly cancelling rows before compensation
            rough = np.abs(terms.sum(axis=1))
            # each term carries a relative rounding error of about eps * l |log z|
            limit = np.minimum(_SERIES_CANCELLATION,
                               _SERIES_TARGET / (_EPS * (1 + n * np.abs(np.log(z[rows])))))
            for i in np.flatnonzero(rough * (2 * limit) >= peak_abs):
                total = complex(math.fsum(terms[i].real), math.fsum(terms[i].imag))
                if total != 0 and peak_abs[i] <= limit[i] * abs(total):
                    vals[rows[i]] = total
                    ok[rows[i]] = True
    return vals, ok


def _series_mp(alpha, gamma, rho, z, rtol):
    """Extended-precision power series for inputs the double routes cannot handle."""
    import mpmath as mp

    r = abs(z)
    # the largest term sits near l = r^(1/alpha) / alpha, possibly beyond the cached table
    ell = np.arange(int(2 * (r ** (1 / alpha) + 10) / alpha) + 64, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = (sc.gammaln(rho + ell) - sc.gammaln(rho) - sc.gammaln(ell + 1)
                - sc.gammaln(alpha * ell + gamma) + ell * math.log(max(r, 1e-300)))
    peak_log10 = float(np.nanmax(logt)) / math.log(10)
    digits = int(max(peak_log10, 0)) + int(-math.log10(rtol)) + 25
    if digits > 6000:
        raise MLConvergenceError("extended-precision series exceeds the precision budget")
    frac = Fraction(alpha).limit_denominator(100)
    rational = abs(float(frac) - alpha) <= 1e-15 * alpha
    with mp.workdps(digits):
        zz = mp.mpc(z)
        g, p = mp.mpf(gamma), mp.mpf(rho)
        a = mp.mpf(frac.numerator) / frac.denominator if rational else mp.mpf(alpha)
        q, shift = frac.denominator, frac.numerator
        rgam: list = []
        total = mp.mpc(0)
        poch = mp.mpf(1)
        zl = mp.mpc(1)
        tiny = mp.mpf(10) ** (-digits + 5)
        small_run = 0
        for ell in range(200000):
            x = a * ell + g
            if rational and ell >= q and x - shift > 0:
                # 1/Gamma(x) from 1/Gamma(x - shift) for alpha = shift / q
                den = x - shift
                for j in range(1, shift):
                    den *= x - shift + j
                rg = rgam[ell - q] / den
            else:
                rg = mp.rgamma(x)
            rgam.append(rg)
            term = poch * zl * rg
            total += term
            if abs(term) <= tiny * abs(total) and a * ell > r ** (1 / alpha) + 2:
                small_run += 1
                if small_run > 3:
                    break
            else:
                small_run = 0
            poch *= (p + ell) / (ell + 1)
            zl *= zz
        else:
            raise MLConvergenceError("extended-precision series did not converge")
        try:
            return complex(total)
        except OverflowError as exc:
            raise MLOverflowError(str(exc)) from None

# }}}


# {{{ two-parameter functions and derivatives

def _ml2_fallback(alpha, beta, z):
    if alpha < 2.0:
        try:
            return ml2_contour(alpha, beta, z)
        except ArithmeticError as exc:
            raise MLConvergenceError(str(exc)) from None
    return _series_mp(alpha, beta, 1.0, z, 1e-15)


def _ml2(alpha, beta, z):
    """E_{alpha,beta} in double precision on a 1-d array."""
    if alpha == 1.0 and beta == 1.0:
        return np.exp(z)
    vals, ok = _series_batch(alpha, beta, 1.0, z)
    for i in np.flatnonzero(~ok):
        vals[i] = _ml2_fallback(alpha, beta, complex(z[i]))
    return vals


def _derivative_weights(alpha: float, beta: float, k: int) -> list[float]:
    """Weights c_j with (alpha z)^k E^{(k)}_{alpha,beta} = sum_j c_j E_{alpha,beta-j}."""
    c = [1.0]
    for kk in range(k):
        nxt = [0.0] * (kk + 2)
        for j, cj in enumerate(c):
            nxt[j + 1] += cj
            nxt[j] -= (beta - j - 1 + alpha * kk) * cj
        c = nxt
    return c


def _ml3(alpha, gamma, rho, z, rtol=DEFAULT_RTOL):
    """E^rho_{alpha,gamma} on a 1-d array."""
    if rho == 1.0:
        return _ml2(alpha, gamma, z)
    vals, ok = _series_batch(alpha, gamma, rho, z)
    bad = np.flatnonzero(~ok)
    if len(bad) == 0:
        return vals
    zb = z[bad]
    if rho == round(rho) and alpha < 2.0:
        # k! E^{k+1}_{alpha, beta + alpha k} is the k-th derivative of E_{alpha, beta}
        k = int(round(rho)) - 1
        beta = gamma - alpha * k
        weights = _derivative_weights(alpha, beta, k)
        total = sum(c * _ml2(alpha, beta - j, zb) for j, c in enumerate(weights) if c != 0.0)
        vals[bad] = total / (alpha * zb) ** k / math.factorial(k)
    else:
        vals[bad] = [_series_mp(alpha, gamma, rho, complex(zi), rtol) for zi in zb]
    return vals


def _evaluate(fn: Callable[[np.ndarray], np.ndarray], z):
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(zz)):
        raise ValueError("argument must be finite")
    flat = zz.ravel()
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.asarray(fn(flat), dtype=complex)
    if not np.all(np.isfinite(out)):
        raise MLOverflowError("Mittag-Leffler value overflows double precision")
    # real coefficients: the function is real on the real axis
    out = np.where(flat.imag == 0, out.real + 0j, out)
    return complex(out[0]) if scalar else out.reshape(zz.shape)

# }}}


# {{{ public API

def eval_E_alpha(alpha, z, rtol: float = DEFAULT_RTOL):
    """Classical Mittag-Leffler function ``E_alpha(z)``.

    ``z`` may be a scalar or an array; arrays are evaluated pointwise.
    """
    a = _as_alpha(alpha)
    if not a > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    return _evaluate(lambda zz: _ml2(a, 1.0, zz), z)


def eval_E_gen(params: MLParams, z, rtol: float = DEFAULT_RTOL):
    """Three-parameter Mittag-Leffler function ``E^rho_{alpha,gamma}(z)``."""
    a, g, p = float(params.alpha), float(params.gamma), float(params.rho)
    return _evaluate(lambda zz: _ml3(a, g, p, zz, rtol), z)


def eval_E_alpha_deriv(alpha, k: int, z, rtol: float = DEFAULT_RTOL):
    """k-th derivative of ``E_alpha``, i.e. ``k! E^{k+1}_{alpha, 1 + alpha k}(z)``."""
    a = _as_alpha(alpha)
    k = int(k)
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if not a > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    if k == 0:
        return _evaluate(lambda zz: _ml2(a, 1.0, zz), z)
    if a == 1.0:
        return _evaluate(np.exp, z)
    return _evaluate(lambda zz: math.factorial(k) * _ml3(a, 1.0 + a * k, k + 1.0, zz, rtol), z)


def wright_psi11(rho: float, gamma: float, alpha: float, z, rtol: float = DEFAULT_RTOL):
    """Wright function ``1Psi1[(rho, 1); (gamma, alpha) | z] = Gamma(rho) E^rho_{alpha,gamma}(z)``."""
    return math.gamma(rho) * eval_E_gen(MLParams(alpha, gamma, rho), z, rtol)


def principal_root(z: complex, alpha: float) -> complex:
    """``z^(1/alpha)`` on the principal branch, ``arg z`` in (-pi, pi]."""
    z = complex(z)
    if z == 0:
        return 0j
    return cmath.exp(cmath.log(z) / alpha)


def sector(alpha: float, z: complex, eps: float = TRANSITION_EPS) -> str:
    """Classify ``z`` as ``"growth"``, ``"transition"`` or ``"decay"``.

    The growth sector is ``|arg z| <= alpha pi / 2``; the decay sector is
    ``|arg z| > alpha pi / 2 + eps``.
    """
    phi = abs(cmath.phase(complex(z)))
    edge = alpha * math.pi / 2
    if phi <= edge:
        return "growth"
    if phi <= edge + eps:
        return "transition"
    return "decay"


def deriv_envelope(alpha: float, k: int, z, eps: float = TRANSITION_EPS,
                   C: float = 1.0, C_eps: float = 1.0) -> float:
    """Upper envelope for ``|d^k/dz^k E_alpha(z)|`` outside the transition band.

    Returns ``C exp(Re z^(1/alpha))`` in the growth sector and
    ``C_eps (1 + |z|)^(-k-1)`` in the decay sector.  The constants are not
    known in closed form; callers fit them on calibration samples.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    z = complex(z)
    where = sector(alpha, z, eps)
    if where == "transition":
        raise ValueError(
            f"arg z = {cmath.phase(z):.6g} lies in the transition band "
            f"({alpha * math.pi / 2:.6g}, {alpha * math.pi / 2 + eps:.6g}]"
        )
    if where == "growth":
        return C * math.exp(principal_root(z, alpha).real)
    return C_eps * (1.0 + abs(z)) ** (-k - 1)

# }}}
