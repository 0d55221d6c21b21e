"""Laplace-transform inversion on optimal parabolic contours.

Double-precision evaluation of the two-parameter Mittag-Leffler function
``E_{a,b}(z)`` for large ``|z|``, where the power series suffers from
catastrophic cancellation.  The function is written as

    E_{a,b}(z) = sum of residues + (1 / 2 pi i) int_C e^s s^(a-b) / (s^a - z) ds

with ``C`` a parabola ``s(u) = mu (1 + i u)^2`` and the integral discretised by
the trapezoidal rule.  Contour parameters are chosen following R. Garrappa,
SIAM J. Numer. Anal. 53 (2015) 1350-1369, which balances discretisation,
truncation and round-off errors given the location of the singularities.
"""

from __future__ import annotations

import math

import numpy as np

_LOG_EPS = math.log(np.finfo(float).eps)


def _param_bounded(phi_j, phi_j1, p, q, log_tol):
    """Contour parameters for a region between two singularities."""
    fac = 1.01
    f_max = math.exp(log_tol - _LOG_EPS)

    sq_j = math.sqrt(phi_j)
    threshold = 2.0 * math.sqrt((log_tol - _LOG_EPS))
    sq_j1 = min(math.sqrt(phi_j1), threshold - sq_j)

    if p < 1e-14 and q < 1e-14:
        sqb_j, sqb_j1 = sq_j, sq_j1
        f_bar = 1.0
    elif p < 1e-14:
        sqb_j = sq_j
        f_min = fac * (sq_j / (sq_j1 - sq_j)) ** q if sq_j > 0 else fac
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fq = f_bar ** (-1.0 / q)
        sqb_j1 = (2 * sq_j1 - fq * sq_j) / (2 + fq)
    elif q < 1e-14:
        sqb_j1 = sq_j1
        f_min = fac * (sq_j1 / (sq_j1 - sq_j)) ** p
        if f_min >= f_max:
            return None
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1.0 / p)
        sqb_j = (2 * sq_j + fp * sq_j1) / (2 - fp)
    else:
        f_min = fac * ((sq_j + sq_j1) / (sq_j1 - sq_j)) ** max(p, q)
        if f_min >= f_max:
            return None
        f_min = max(f_min, 1.5)
        f_bar = f_min + f_min / f_max * (f_max - f_min)
        fp = f_bar ** (-1.0 / p)
        fq = f_bar ** (-1.0 / q)
        w = -phi_j1 / log_tol
        den = 2 + w - (1 + w) * fp + fq
        sqb_j = ((2 + w + fq) * sq_j + fp * sq_j1) / den
        sqb_j1 = (-(1 + w) * fq * sq_j + (2 + w - (1 + w) * fp) * sq_j1) / den

    log_tol = log_tol - math.log(f_bar)
    w = -sqb_j1**2 / log_tol
    mu = (((1 + w) * sqb_j + sqb_j1) / (2 + w)) ** 2
    h = -2 * math.pi / log_tol * (sqb_j1 - sqb_j) / ((1 + w) * sqb_j + sqb_j1)
    if not (mu > 0 and h > 0):
        return None
    n = math.ceil(math.sqrt(1 - log_tol / mu) / h)
    return mu, h, n


def _param_unbounded(phi_j, p, log_tol):
    """Contour parameters for the region right of the last singularity."""
    sq_phi = math.sqrt(phi_j)
    phib = phi_j * 1.01 if phi_j > 0 else 0.01
    sqb = math.sqrt(phib)

    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    for _ in range(100):
        log_eps_phi = log_tol / phib
        n = math.ceil(phib / math.pi * (1 - 1.5 * log_eps_phi + math.sqrt(1 - 2 * log_eps_phi)))
        a = math.pi * n / phib
        sq_mu = sqb * abs(4 - a) / abs(7 - math.sqrt(1 + 12 * a))
        if p < 1e-14:
            break
        fbar = ((sqb - sq_phi) / sq_mu) ** (-p)
        if f_min < fbar < f_max:
            break
        sqb = f_tar ** (-1.0 / p) * sq_mu + sq_phi
        phib = sqb**2
    mu = sq_mu**2
    h = (-3 * a - 2 + 2 * math.sqrt(1 + 12 * a)) / (4 - a) / n

    # keep round-off under control when the contour drifts too far right
    threshold = log_tol - _LOG_EPS
    if mu > threshold:
        q_shift = 0.0 if abs(p) < 1e-14 else f_tar ** (-1.0 / p) * math.sqrt(mu)
        phib = (q_shift + sq_phi) ** 2
        if phib >= threshold:
            return None
        w = math.sqrt(_LOG_EPS / (_LOG_EPS - log_tol))
        u = math.sqrt(-phib / _LOG_EPS)
        mu = threshold
        n = math.ceil(w * log_tol / 2 / math.pi / (u * w - 1))
        h = w / n
    return mu, h, n


def ml2_contour(alpha: float, beta: float, z: complex, tol: float = 1e-15) -> complex:
    """Two-parameter Mittag-Leffler function by contour integration.

    Valid for ``0 < alpha < 2`` and any real ``beta``; ``z`` should not be
    tiny (use the power series there).
    """
    z = complex(z)
    log_tol = math.log(tol)
    theta = math.atan2(z.imag, z.real)
    kmin = math.ceil(-alpha / 2 - theta / (2 * math.pi))
    kmax = math.floor(alpha / 2 - theta / (2 * math.pi))
    ks = np.arange(kmin, kmax + 1)
    poles = abs(z) ** (1 / alpha) * np.exp(1j * (theta + 2 * np.pi * ks) / alpha)
    phi = (poles.real + np.abs(poles)) / 2
    order = np.argsort(phi, kind="stable")
    poles, phi = poles[order], phi[order]
    keep = phi > 1e-15
    poles, phi = poles[keep], phi[keep]

    sing = np.concatenate(([0.0], poles))
    phis = np.concatenate(([0.0], phi, [np.inf]))
    n_poles = len(poles)
    p = [max(0.0, -2 * (alpha - beta + 1))] + [1.0] * n_poles
    q = [1.0] * n_poles + [np.inf]

    while True:
        admissible = [
            j for j in range(n_poles + 1)
            if phis[j] < (log_tol - _LOG_EPS) and phis[j] < phis[j + 1]
        ]
        best = None
        for j in admissible:
            if j < n_poles:
                par = _param_bounded(phis[j], phis[j + 1], p[j], q[j], log_tol)
            else:
                par = _param_unbounded(phis[j], p[j], log_tol)
            if par is not None and (best is None or par[2] < best[1][2]):
                best = (j, par)
        if best is not None and best[1][2] <= 200:
            break
        log_tol += math.log(10.0)
        if log_tol > math.log(1e-6):
            raise ArithmeticError("no admissible integration contour")

    j, (mu, h, n) = best
    if beta < 0:
        # the integrand decays like |s|^(-beta) e^(Re s); extend the truncation
        # so the polynomial factor does not lift the tail above the tolerance
        u2 = (n * h) ** 2
        for _ in range(20):
            u2 = 1 + (-math.log(tol) - beta * math.log(mu * (1 + u2))) / mu
        n = max(n, math.ceil(math.sqrt(u2) / h))
    u = h * np.arange(-n, n + 1)
    s = mu * (1j * u + 1) ** 2
    ds = 2 * mu * (1j - u)
    with np.errstate(over="ignore", invalid="ignore"):
        f = np.exp(s) * s ** (alpha - beta) / (s**alpha - z) * ds
    integral = h * np.sum(f) / (2j * np.pi)

    right = sing[j + 1:]
    residues = np.sum(right ** (1 - beta) * np.exp(right)) / alpha if len(right) else 0.0
    out = complex(integral + residues)
    if z.imag == 0.0:
        out = complex(out.real, 0.0)
    return out
