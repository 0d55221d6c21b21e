"""Sample-based certificates for fractional hyperbolicity of a matrix symbol.

A system is accepted when ``Lambda_alpha(s) <= C (|tau|^(1/alpha) + log(|sigma| + 1))``
with ``C`` fitted on one half of a deterministic sample set and confirmed on
the other half.  It is rejected when the ratio of the two sides keeps growing
along some sampled ray.  These are numerical verdicts, not proofs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .special_functions import FractionalOrder
from .symbol_algebra import (
    HERMITIAN_TOL,
    ComplexFrequency,
    MatrixPencil,
    eval_pencil_batch,
    lambda_alpha_batch,
)

SLACK = 0.05
SLOPE_THRESHOLD = 0.1


class DegenerateSampleError(ValueError):
    """Samples do not explore both the real and imaginary frequency directions."""


class Verdict(str, enum.Enum):
    FRACTIONAL_HYPERBOLIC = "fractional_hyperbolic"
    REJECTED = "rejected"
    INCONCLUSIVE = "inconclusive"


def _alpha(alpha) -> float:
    a = float(alpha.alpha) if isinstance(alpha, FractionalOrder) else float(alpha)
    if not (0 < a <= 1):
        raise ValueError(f"alpha must lie in (0, 1], got {a}")
    return a


def _unit_directions(n: int, count: int, rng) -> np.ndarray:
    """Signed coordinate axes first, then seeded random unit vectors."""
    dirs = []
    for nu in range(n):
        for sign in (1.0, -1.0):
            e = np.zeros(n)
            e[nu] = sign
            dirs.append(e)
    while len(dirs) < count:
        v = rng.standard_normal(n)
        dirs.append(v / np.linalg.norm(v))
    return np.array(dirs[:count])


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic frequency sampling.

    The grid combines every ``sigma`` radius with every ``tau`` radius along
    ``directions`` paired unit vectors.  Rays ``r (cos(theta) d_sigma + i sin(theta) d_tau)``
    with ``theta`` in ``ray_angles`` are used for growth detection and for
    exponent estimation.
    """

    sigma_radii: tuple = tuple(np.logspace(0, 3, 13))
    tau_radii: tuple = (0.0,) + tuple(np.logspace(0, 2, 10))
    directions: int = 16
    ray_angles: tuple = (0.0, math.pi / 4, math.pi / 2)
    ray_radii: tuple = tuple(np.logspace(0, 3, 25))
    seed: int = 0

    def direction_pairs(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        d_sigma = _unit_directions(n, self.directions, rng)
        d_tau = _unit_directions(n, self.directions, rng)
        # pair axis directions with shuffled partners so that sigma and tau differ
        return d_sigma, d_tau[rng.permutation(self.directions)]

    def grid(self, n: int) -> np.ndarray:
        """Complex frequencies of shape ``(count, n)``.

        The ``tau`` radius varies fastest, then the ``sigma`` radius, then
        the direction pair.  With an odd number of ``tau`` radii the
        alternating calibration/test split gives both halves every
        direction and every radius.
        """
        d_sigma, d_tau = self.direction_pairs(n)
        rs = np.asarray(self.sigma_radii, dtype=float)[:, None, None]
        rt = np.asarray(self.tau_radii, dtype=float)[None, :, None]
        out = [(rs * ds + 1j * rt * dt).reshape(-1, n) for ds, dt in zip(d_sigma, d_tau)]
        return np.concatenate(out)

    def rays(self, n: int) -> np.ndarray:
        """Array ``(rays, radii, n)`` of frequencies along each sampled ray."""
        d_sigma, d_tau = self.direction_pairs(n)
        r = np.asarray(self.ray_radii)
        rays = []
        for theta in self.ray_angles:
            for ds, dt in zip(d_sigma, d_tau):
                unit = math.cos(theta) * ds + 1j * math.sin(theta) * dt
                rays.append(r[:, None] * unit[None, :])
        return np.array(rays)


@dataclass
class HyperbolicityReport:
    verdict: Verdict
    fitted_C: float
    fitted_a: float | None
    fitted_b: float | None
    exponent_q: int | None
    samples: list = field(repr=False)
    diagnostics: dict = field(default_factory=dict)


class LinearBound(NamedTuple):
    a: float
    b: float
    holds: bool


def _max_real_root(p: MatrixPencil, s) -> np.ndarray:
    return np.max(np.linalg.eigvals(eval_pencil_batch(p, s)).real, axis=-1)


def _as_array(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray) and samples.dtype.kind == "c":
        return np.atleast_2d(samples)
    rows = [s.s if isinstance(s, ComplexFrequency) else np.atleast_1d(np.asarray(s, dtype=complex))
            for s in samples]
    if not rows:
        raise DegenerateSampleError("empty sample list")
    return np.array(rows)


def check_linear_bound(p: MatrixPencil, samples, slack: float = SLACK,
                       dilation: float = 10.0) -> LinearBound:
    """Fit ``Re lambda_k(s) <= a |tau| + b`` and test it on held-out samples.

    ``(a, b) >= 0`` minimise the total slack over the calibration half (even
    indices) subject to the bound holding there.  The held-out half (odd
    indices) and copies of it with ``sigma`` scaled by ``dilation`` must
    satisfy the bound with a multiplicative ``slack``; the dilated copies
    probe uniformity in ``sigma``, which the bound asserts.
    """
    s = _as_array(samples)
    tau = np.linalg.norm(s.imag, axis=1)
    if np.all(tau == 0):
        raise DegenerateSampleError("all samples have tau = 0; the coefficient a is undetermined")
    if np.all(s.real == 0):
        raise DegenerateSampleError("all samples have sigma = 0")
    y = _max_real_root(p, s)
    cal = np.arange(len(s)) % 2 == 0
    if not np.any(~cal):
        raise DegenerateSampleError("need at least two samples for a held-out check")

    # minimise sum(a tau_i + b - y_i) subject to a tau_i + b >= y_i
    tc, yc = tau[cal], y[cal]
    res = linprog(
        c=[tc.sum(), len(tc)],
        A_ub=np.column_stack([-tc, -np.ones_like(tc)]),
        b_ub=-yc,
        bounds=[(0, None), (0, None)],
        method="highs",
    )
    if not res.success:
        raise ArithmeticError(f"linear-bound fit failed: {res.message}")
    a, b = (float(v) for v in res.x)

    held = s[~cal]
    probe = np.concatenate([held, dilation * held.real + 1j * held.imag])
    y_probe = _max_real_root(p, probe)
    tau_probe = np.linalg.norm(probe.imag, axis=1)
    bound = a * tau_probe + b
    atol = 1e-9 * (1 + np.abs(probe).max())
    holds = bool(np.all(y_probe <= (1 + slack) * bound + atol))
    return LinearBound(a, b, holds)


def cosine_inequality_check(alpha, phi: float) -> bool:
    """Whether ``cos(phi / alpha) <= cos(phi)^(1/alpha)`` at ``|phi| <= alpha pi / 2``.

    Rounding is tolerated at the level of a few ulps of the right side.
    """
    a = _alpha(alpha)
    half = a * math.pi / 2
    if not math.isfinite(phi) or abs(phi) > half * (1 + 1e-15):
        raise ValueError(f"|phi| = {abs(phi)} exceeds alpha pi / 2 = {half}")
    lhs = math.cos(phi / a)
    rhs = max(math.cos(phi), 0.0) ** (1 / a)
    return lhs <= rhs + 8 * np.finfo(float).eps * max(rhs, 1e-300)


def hirsch_bound(A, B, s) -> float:
    """``m * max |entries of (L - L^*)/(2i)|`` with ``L(s) = sum s_nu A_nu + i B``.

    Bounds ``|Im mu|`` for every eigenvalue ``mu`` of ``L(s)``.
    """
    A = [np.asarray(a, dtype=complex) for a in A]
    B = np.asarray(B, dtype=complex)
    for nu, a in enumerate(A):
        if a.shape != B.shape:
            raise ValueError(f"A[{nu}] has shape {a.shape}, expected {B.shape}")
        if not np.allclose(a, a.conj().T, rtol=0, atol=HERMITIAN_TOL):
            raise ValueError(f"A[{nu}] is not Hermitian")
    sv = s.s if isinstance(s, ComplexFrequency) else np.atleast_1d(np.asarray(s, dtype=complex))
    if len(sv) != len(A):
        raise ValueError(f"frequency has {len(sv)} components, expected {len(A)}")
    L = sum(sn * a for sn, a in zip(sv, A)) + 1j * B
    skew = (L - L.conj().T) / 2j
    return float(B.shape[0] * np.max(np.abs(skew)))


def _denominator(s: np.ndarray, alpha: float) -> np.ndarray:
    tau = np.linalg.norm(s.imag, axis=-1)
    sigma = np.linalg.norm(s.real, axis=-1)
    return tau ** (1 / alpha) + np.log1p(sigma)


def _outer_decade_slopes(r: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Consecutive log-log slopes of ``values`` over ``r`` in the top decade of ``r``."""
    outer = r >= r.max() / 10
    lr = np.log(r[outer])
    with np.errstate(divide="ignore", invalid="ignore"):
        lv = np.log(values[..., outer])
        return np.diff(lv, axis=-1) / np.diff(lr)


def verify_fractional_hyperbolic(p: MatrixPencil, alpha, sampling: SamplePlan | None = None,
                                 exponent_t: float | None = 1.0) -> HyperbolicityReport:
    """Classify ``p`` at order ``alpha`` from samples of ``Lambda_alpha``.

    When the verdict is positive and ``exponent_t`` is given, the exponent
    ``q`` is estimated at that time.
    """
    a = _alpha(alpha)
    plan = sampling or SamplePlan()
    s = plan.grid(p.n)
    lam = lambda_alpha_batch(p, a, s)
    ratio = lam / _denominator(s, a)
    cal = np.arange(len(s)) % 2 == 0
    C = float(np.max(ratio[cal]))
    worst = float(np.max(ratio[~cal]))
    certified = worst <= (1 + SLACK) * C + 1e-12

    rays = plan.rays(p.n)
    r = np.asarray(plan.ray_radii)
    ray_ratio = lambda_alpha_batch(p, a, rays) / _denominator(rays, a)
    slopes = _outer_decade_slopes(r, np.maximum(ray_ratio, 0.0))
    finite = np.where(np.isfinite(slopes), slopes, -np.inf)
    growing = np.all(finite > SLOPE_THRESHOLD, axis=-1)
    max_slope = float(np.max(np.min(finite, axis=-1)))

    if np.any(growing):
        verdict = Verdict.REJECTED
    elif certified:
        verdict = Verdict.FRACTIONAL_HYPERBOLIC
    else:
        verdict = Verdict.INCONCLUSIVE

    try:
        lb = check_linear_bound(p, s)
        fa, fb, lin_holds = (lb.a, lb.b, lb.holds) if lb.holds else (None, None, False)
    except DegenerateSampleError:
        fa = fb = None
        lin_holds = False

    q = None
    if verdict is Verdict.FRACTIONAL_HYPERBOLIC and exponent_t is not None:
        q = estimate_exponent(p, a, exponent_t, plan)

    samples = [(ComplexFrequency.from_complex(si), float(li)) for si, li in zip(s, lam)]
    diagnostics = {
        "calibration_max_ratio": C,
        "heldout_max_ratio": worst,
        "heldout_excess": worst / C - 1 if C > 0 else 0.0,
        "max_ray_slope": max_slope if np.isfinite(max_slope) else None,
        "rejecting_rays": int(np.sum(growing)),
        "linear_bound_holds": lin_holds,
        "sample_count": len(s),
    }
    return HyperbolicityReport(verdict, C, fa, fb, q, samples, diagnostics)


def estimate_exponent(p: MatrixPencil, alpha, t: float, sampling: SamplePlan | None = None) -> int:
    """Smallest integer ``q >= 0`` with ``||E_alpha(t^alpha P(sigma))|| / (1 + |sigma|)^q`` bounded.

    Norms are sampled along the real rays of ``sampling``; ``q`` is the ceiling
    of the largest log-log growth rate in the outer decade, less the slope
    tolerance used for rejection.
    """
    from .resolvent import resolvent_batch

    a = _alpha(alpha)
    plan = sampling or SamplePlan()
    d_sigma, _ = plan.direction_pairs(p.n)
    r = np.asarray(plan.ray_radii)
    rate = 0.0
    for d in d_sigma:
        s = r[:, None] * d[None, :] + 0j
        norms = np.linalg.norm(resolvent_batch(p, a, t, s), ord=2, axis=(1, 2))
        outer = r >= r.max() / 10
        x = np.log1p(r[outer])
        y = np.log(norms[outer])
        slope = np.polyfit(x, y, 1)[0]
        rate = max(rate, float(slope))
    return max(0, math.ceil(rate - SLOPE_THRESHOLD))
