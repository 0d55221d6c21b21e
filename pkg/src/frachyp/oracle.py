"""Brute-force references used to check the fast code paths.

Nothing here shares code with :mod:`frachyp.special_functions` or
:mod:`frachyp.resolvent`: the series are summed in multiprecision arithmetic
and the time stepper discretises the Caputo derivative directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath as mp
import numpy as np
from scipy.special import gamma as gamma_fn

from .special_functions import MLParams


class OracleError(ArithmeticError):
    pass


# {{{ extended-precision series

def _rational(x: float, max_den: int = 1000) -> Fraction | None:
    f = Fraction(x).limit_denominator(max_den)
    if abs(float(f) - x) <= 4 * np.finfo(float).eps * abs(x):
        return f
    return None


def _peak_log10(alpha, gamma, rho, r):
    """log10 of the largest series term (double estimate)."""
    if r == 0:
        return 0.0
    best = -math.inf
    ell, prev = 0, -math.inf
    while True:
        arg = alpha * ell + gamma
        if arg > 0 or arg != round(arg):
            lg = math.lgamma(arg) if arg > 0 or arg != round(arg) else math.inf
            val = ell * math.log(r) - lg + math.lgamma(rho + ell) - math.lgamma(rho) - math.lgamma(ell + 1)
            best = max(best, val)
            if val < prev and val < best - 50 and alpha * ell > r ** (1 / alpha) + 5:
                break
            prev = val
        ell += 1
    return best / math.log(10)


def _sum_series(alpha, gamma, rho, z, dps, rel_tol):
    """Sum the series with ``dps`` decimal digits of working precision.

    Returns ``(total, largest |term|, number of terms)`` as ``gmpy2`` numbers.
    """
    bits = int(dps * 3.33) + 16
    with gmpy2.context(precision=bits):
        zz = gmpy2.mpc(z.real, z.imag)
        g = gmpy2.mpfr(gamma)
        p = gmpy2.mpfr(rho)
        frac = _rational(alpha)
        if frac is not None and frac.denominator <= 200:
            a = gmpy2.mpfr(frac.numerator) / frac.denominator
            step, shift = frac.denominator, frac.numerator
        else:
            a = gmpy2.mpfr(alpha)
            step = shift = 0
        r = abs(z)
        ell_min = (r ** (1.0 / alpha) + 10.0) / alpha if r > 0 else 0.0
        unit_rho = rho == 1.0
        tail_tol2 = gmpy2.mpfr(rel_tol * 1e-3) ** 2

        # term_l = (rho)_l / l! * u_l with u_l = z^l / Gamma(a l + g); for a = shift/step
        # the Gamma factor obeys Gamma(a (l + step) + g) = Gamma(a l + g) prod_j (a l + g + j)
        ring: list = []
        zpow_step = zz**step if step else None
        total = gmpy2.mpc(0)
        peak2 = gmpy2.mpfr(0)
        poch = gmpy2.mpfr(1)
        zl = gmpy2.mpc(1)
        prev2 = None
        integer_rho = float(rho).is_integer()
        for ell in range(10**7):
            base = a * (ell - step) + g if step and ell >= step else None
            if base is not None and base > 0:
                den = base
                for j in range(1, shift):
                    den *= base + j
                u = ring[ell - step] * zpow_step * (1 / den)
            else:
                arg = a * ell + g
                if arg <= 0 and gmpy2.is_integer(arg):
                    u = gmpy2.mpc(0)
                else:
                    u = zl / gmpy2.gamma(arg)
            if step:
                ring.append(u)
            if unit_rho:
                term = u
            elif integer_rho:
                term = u * math.comb(ell + int(rho) - 1, int(rho) - 1)
            else:
                term = u * poch
            total += term
            mag2 = gmpy2.norm(term)
            if mag2 > peak2:
                peak2 = mag2
            if ell > ell_min and prev2 is not None and prev2 > 0:
                ratio = math.sqrt(float(mag2 / prev2))
                # geometric bound on the remaining tail
                if ratio < 0.5 and mag2 * (ratio / (1 - ratio)) ** 2 <= tail_tol2 * gmpy2.norm(total):
                    break
            if ell > ell_min and mag2 == 0 and total == 0:
                break
            prev2 = mag2
            if not (unit_rho or integer_rho):
                poch *= (p + ell) / (ell + 1)
            if base is None or base <= 0:
                # powers are only needed until the recurrence takes over
                zl *= zz
        else:
            raise OracleError("series did not terminate")
        return total, gmpy2.sqrt(peak2), ell + 1


def _to_mpmath(x, dps):
    with mp.workdps(dps):
        return mp.mpc(mp.mpf(str(x.real)), mp.mpf(str(x.imag)))


def ml_series_highprec(params: MLParams, z, rel_tol: float = 1e-16,
                       extra_dps: int = 0, max_dps: int = 20000):
    """Sum the three-parameter Mittag-Leffler series in multiprecision.

    The working precision starts from the size of the largest term and is
    raised until the accumulated rounding error, bounded by
    ``nterms**2 * max|term| * 10**-dps``, is below ``rel_tol`` relative to
    the sum.  Returns an ``mpmath.mpc``.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    alpha, gamma, rho = float(params.alpha), float(params.gamma), float(params.rho)
    z = complex(z)
    if abs(z) > 0 and math.log10(abs(z)) / alpha - math.log10(alpha) > 6:
        raise OracleError(f"the series at |z|={abs(z):.3g} needs more than 1e6 terms")
    digits = -math.log10(rel_tol)
    dps = int(max(_peak_log10(alpha, gamma, rho, abs(z)), 0) + digits + 15) + extra_dps
    while dps <= max_dps:
        total, peak, nterms = _sum_series(alpha, gamma, rho, z, dps, rel_tol)
        with gmpy2.context(precision=int(dps * 3.33) + 16):
            bound = gmpy2.mpfr(nterms) ** 2 * peak * gmpy2.exp10(-dps)
            if bound <= rel_tol * abs(total) or peak == 0:
                return _to_mpmath(total, dps)
        dps = int(dps * 1.5) + 10
    raise OracleError(f"could not certify the series at z={z} within {max_dps} digits")


def ml_series(params: MLParams, z, rel_tol: float = 1e-16) -> complex:
    """Double-precision rounding of :func:`ml_series_highprec`."""
    return complex(ml_series_highprec(params, z, rel_tol))


def matrix_ml_taylor(alpha: float, t: float, P, nterms: int = 200, dps: int = 50):
    """Truncated matrix power series for ``E_alpha(t^alpha P)`` in multiprecision.

    Raises :class:`OracleError` if the last retained term is not negligible.
    """
    P = np.asarray(P, dtype=complex)
    m = P.shape[0]
    with mp.workdps(dps):
        scale = mp.mpf(t) ** mp.mpf(alpha)
        A = mp.matrix([[mp.mpc(P[i, j]) * scale for j in range(m)] for i in range(m)])
        power = mp.eye(m)
        total = mp.eye(m)
        last = None
        for ell in range(1, nterms):
            power = power * A
            term = power * mp.rgamma(mp.mpf(alpha) * ell + 1)
            total += term
            last = mp.mnorm(term, 1)
        if last is not None and last > mp.mpf(10) ** (-dps + 10) * max(mp.mnorm(total, 1), 1):
            raise OracleError("Taylor oracle truncated before convergence")
        return np.array([[complex(total[i, j]) for j in range(m)] for i in range(m)])

# }}}


# {{{ finite differences

def central_difference_weights(k: int, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of a central stencil for the k-th derivative.

    The stencil is exact for polynomials of degree ``< 2 * half + 1`` where
    ``half`` is chosen so that the truncation error is ``O(h^order)``.
    """
    half = (k + order - 1) // 2
    offsets = np.arange(-half, half + 1)
    V = np.vander(offsets.astype(float), increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[k] = math.factorial(k)
    weights = np.linalg.solve(V, rhs)
    return offsets, weights


def central_difference(f, z: complex, k: int, h: float, order: int = 8) -> complex:
    """Central finite difference of order ``order`` for ``f^{(k)}(z)`` along the real direction."""
    offsets, weights = central_difference_weights(k, order)
    vals = np.array([f(z + o * h) for o in offsets], dtype=complex)
    return complex(np.dot(weights, vals) / h**k)


def adaptive_central_difference(f, z, k: int, steps=None, order: int = 8) -> np.ndarray:
    """Central differences over a ladder of steps, keeping the most stable estimate.

    ``f`` must accept arrays.  For each point the step ``h_j`` minimising
    ``|D(h_j) - D(h_{j+1})|`` is selected, which balances truncation error
    against amplified rounding in ``f``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    steps = np.geomspace(2.5e-3, 0.32, 15) if steps is None else np.asarray(steps, dtype=float)
    offsets, weights = central_difference_weights(k, order)
    est = np.empty((len(steps),) + z.shape, dtype=complex)
    for j, h in enumerate(steps):
        vals = np.asarray(f(z[None, :] + offsets[:, None] * h), dtype=complex)
        est[j] = np.tensordot(weights, vals, axes=(0, 0)) / h**k
    jump = np.abs(np.diff(est, axis=0))
    best = np.argmin(jump, axis=0)
    return est[best, np.arange(z.size)]

# }}}


# {{{ L1 time stepping

@dataclass(frozen=True)
class L1Scheme:
    """Uniform-step L1 discretisation of the Caputo derivative."""

    alpha: float
    steps: int
    T: float
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (0 < self.alpha < 1):
            raise ValueError("alpha must lie in (0, 1)")
        if self.steps < 2 or self.T <= 0:
            raise ValueError("need steps >= 2 and T > 0")
        j = np.arange(self.steps, dtype=float)
        w = (j + 1) ** (1 - self.alpha) - j ** (1 - self.alpha)
        object.__setattr__(self, "weights", w)

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def scale(self) -> float:
        """Factor ``dt^-alpha / Gamma(2 - alpha)`` in front of the weighted differences."""
        return self.dt ** (-self.alpha) / gamma_fn(2 - self.alpha)

    def derivative(self, samples) -> np.ndarray:
        """Apply the discrete Caputo derivative to samples ``y_0..y_K`` (first axis).

        Returns the approximations at ``t_1..t_K``.
        """
        y = np.asarray(samples)
        dy = np.diff(y, axis=0)
        K = dy.shape[0]
        out = np.empty_like(dy)
        w = self.weights
        for k in range(K):
            # sum_j w_j (y_{k+1-j} - y_{k-j})
            out[k] = np.tensordot(w[: k + 1], dy[k::-1], axes=(0, 0))
        return self.scale * out


def l1_evolve(lam, alpha: float, T: float, K: int, y0):
    """Implicit L1 stepping for ``D^alpha y = Lam y``, ``y(0) = y0``.

    ``lam`` is a scalar or an ``(..., m, m)`` stack of matrices; ``y0`` has
    shape ``(..., m)`` (or is a scalar for scalar ``lam``).  Returns the
    trajectory with the time index first, shape ``(K + 1, ...)``.
    """
    scheme = L1Scheme(alpha, K, T)
    scalar = np.ndim(lam) == 0
    lam = np.asarray(lam, dtype=complex)
    y0 = np.asarray(y0, dtype=complex)
    if scalar:
        lam = lam.reshape(1, 1)
        y0 = y0.reshape(1)
    m = lam.shape[-1]
    c = 1.0 / scheme.scale
    system = np.eye(m) - c * lam
    try:
        inv = np.linalg.inv(system)
    except np.linalg.LinAlgError:
        raise OracleError("singular L1 system at step 1") from None
    if not np.all(np.isfinite(inv)):
        raise OracleError("singular L1 system at step 1")

    w = scheme.weights
    traj = np.empty((K + 1,) + y0.shape, dtype=complex)
    incr = np.empty((K,) + y0.shape, dtype=complex)
    traj[0] = y0
    for k in range(1, K + 1):
        # w_0 (y_k - y_{k-1}) + sum_{j>=1} w_j (y_{k-j} - y_{k-j-1}) = c Lam y_k
        if k > 1:
            hist = np.tensordot(w[1:k], incr[k - 2::-1], axes=(0, 0))
        else:
            hist = 0.0
        rhs = traj[k - 1] - hist
        traj[k] = np.einsum("...ij,...j->...i", inv, rhs)
        incr[k - 1] = traj[k] - traj[k - 1]
    if scalar:
        return traj[:, 0]
    return traj

# }}}
