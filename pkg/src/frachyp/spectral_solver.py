"""Fourier solution of the Cauchy problem on a periodic box.

The whole space is replaced by the torus ``[-L, L)^n`` sampled at ``N``
points per axis.  A numpy mode ``exp(i xi x)`` satisfies ``i d/dx = -xi``, so
the symbol is evaluated at the real frequency ``s = -xi`` and the solution is
``U^(t, xi) = E_alpha(t^alpha P(-xi)) U0^(xi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .resolvent import DEFAULT_HORIZON, resolvent_batch
from .special_functions import FractionalOrder, MittagLefflerError, eval_E_alpha
from .symbol_algebra import MatrixPencil

SLACK = 0.05
MIN_FIT_POINTS = 8
MIN_DYNAMIC_RANGE = 1e4


class GridError(ValueError):
    pass


class DecayFitError(ArithmeticError):
    """The sampled field does not support a decay fit."""


class SpectralSolveError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L, L)^n``; ``mollifier_width=None`` means two grid spacings."""

    n: int
    half_width: float
    points: int
    mollifier_width: float | None = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise GridError(f"only n = 1 or 2 is supported, got {self.n}")
        N = self.points
        if N < 16 or N & (N - 1):
            raise GridError(f"points must be a power of two >= 16, got {N}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise GridError(f"half_width must be positive, got {self.half_width}")
        if self.mollifier_width is not None and not (self.mollifier_width >= 0):
            raise GridError(f"mollifier_width must be non-negative, got {self.mollifier_width}")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / self.points

    @property
    def epsilon(self) -> float:
        return 2 * self.spacing if self.mollifier_width is None else float(self.mollifier_width)

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.n

    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    def coords(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.axis()] * self.n), indexing="ij")

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords()))

    def wavenumber_axis(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.points, self.spacing)

    def wavenumbers(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.wavenumber_axis()] * self.n), indexing="ij")

    def symbol_frequencies(self) -> np.ndarray:
        """Real frequencies ``s = -xi`` flattened to shape ``(N^n, n)``."""
        return -np.stack([k.ravel() for k in self.wavenumbers()], axis=-1)

    def with_(self, **changes) -> GridSpec:
        kw = dict(n=self.n, half_width=self.half_width, points=self.points,
                  mollifier_width=self.mollifier_width)
        kw.update(changes)
        return GridSpec(**kw)


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples on a :class:`GridSpec`; leading axes index components."""

    spec: GridSpec
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.components)
        if c.shape[c.ndim - self.spec.n:] != self.spec.shape or c.ndim == self.spec.n:
            raise GridError(f"component array of shape {c.shape} does not match grid {self.spec.shape}")
        object.__setattr__(self, "components", c)

    @classmethod
    def from_function(cls, spec: GridSpec, fn) -> GridField:
        """Evaluate ``fn(*coords)`` returning an array of shape ``(m, N, ...)`` or a scalar field."""
        vals = np.asarray(fn(*spec.coords()))
        if vals.shape == spec.shape:
            vals = vals[None]
        return cls(spec, vals)

    @property
    def component_shape(self) -> tuple:
        return self.components.shape[: self.components.ndim - self.spec.n]

    @property
    def spatial_axes(self) -> tuple:
        nd = self.components.ndim
        return tuple(range(nd - self.spec.n, nd))

    def forward(self) -> np.ndarray:
        return np.fft.fftn(self.components, axes=self.spatial_axes)

    @classmethod
    def from_spectrum(cls, spec: GridSpec, spectrum) -> GridField:
        spectrum = np.asarray(spectrum)
        axes = tuple(range(spectrum.ndim - spec.n, spectrum.ndim))
        return cls(spec, np.fft.ifftn(spectrum, axes=axes))

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.components) ** 2) * self.spec.spacing**self.spec.n))

    def integral(self) -> np.ndarray:
        return np.sum(self.components, axis=self.spatial_axes) * self.spec.spacing**self.spec.n


def _alpha(alpha, allow_one=True) -> float:
    a = float(alpha.alpha) if isinstance(alpha, FractionalOrder) else float(alpha)
    hi_ok = a <= 1 if allow_one else a < 1
    if not (0 < a and hi_ok):
        raise ValueError(f"alpha must lie in (0, 1], got {a}")
    return a


def spectral_derivative(values, spec: GridSpec, axis: int) -> np.ndarray:
    """Spectral ``d/dx_axis`` of samples whose trailing axes are the grid; the Nyquist mode is dropped."""
    values = np.asarray(values)
    xi = spec.wavenumber_axis().copy()
    xi[spec.points // 2] = 0.0
    shape = [1] * values.ndim
    shape[values.ndim - spec.n + axis] = spec.points
    spatial = tuple(range(values.ndim - spec.n, values.ndim))
    return np.fft.ifftn(1j * xi.reshape(shape) * np.fft.fftn(values, axes=spatial), axes=spatial)


def _propagators(p: MatrixPencil, alpha: float, t: float, spec: GridSpec) -> np.ndarray:
    try:
        return resolvent_batch(p, alpha, t, spec.symbol_frequencies())
    except ArithmeticError as exc:
        raise SpectralSolveError(str(exc)) from None


def solve_cauchy(p: MatrixPencil, alpha, t: float, U0: GridField,
                 horizon: float = DEFAULT_HORIZON) -> GridField:
    """``U(t)`` with ``U^(t, xi) = E_alpha(t^alpha P(-xi)) U0^(xi)`` on the grid of ``U0``.

    ``alpha = 1`` is accepted as the classical limit.
    """
    a = _alpha(alpha)
    if not (0 <= t <= horizon):
        raise ValueError(f"t={t} outside [0, {horizon}]")
    spec = U0.spec
    if U0.component_shape != (p.m,):
        raise GridError(f"initial data has components {U0.component_shape}, pencil needs ({p.m},)")
    if p.n != spec.n:
        raise GridError(f"pencil has n={p.n}, grid has n={spec.n}")
    if t == 0:
        return GridField(spec, U0.components.astype(complex))
    R = _propagators(p, a, t, spec)
    U0hat = U0.forward().reshape(p.m, -1)
    Uhat = np.einsum("fij,jf->if", R, U0hat).reshape((p.m,) + spec.shape)
    return GridField.from_spectrum(spec, Uhat)


def green_kernel(p: MatrixPencil, alpha, t: float, spec: GridSpec,
                 horizon: float = DEFAULT_HORIZON) -> GridField:
    """Mollified fundamental solution, inverse transform of ``E_alpha(t^alpha P(-xi)) exp(-eps^2 |xi|^2 / 2)``.

    Components have shape ``(m, m)``; ``x = 0`` sits at grid index ``N/2``.
    """
    a = _alpha(alpha)
    eps = spec.epsilon
    if eps <= 0:
        raise GridError("mollifier_width must be positive: the fundamental solution is a "
                        "distribution and only its mollified version is a sampled function")
    if p.n != spec.n:
        raise GridError(f"pencil has n={p.n}, grid has n={spec.n}")
    if not (0 <= t <= horizon):
        raise ValueError(f"t={t} outside [0, {horizon}]")
    R = _propagators(p, a, t, spec)
    xi2 = sum(k**2 for k in spec.wavenumbers()).ravel()
    Ghat = np.moveaxis(R * np.exp(-0.5 * eps**2 * xi2)[:, None, None], 0, -1)
    Ghat = Ghat.reshape((p.m, p.m) + spec.shape)
    axes = tuple(range(2, 2 + spec.n))
    G = np.fft.fftshift(np.fft.ifftn(Ghat, axes=axes), axes=axes) / spec.spacing**spec.n
    return GridField(spec, G)


def exterior_mass_ratio(U: GridField, fraction: float = 0.1) -> float:
    """Share of ``sum |U|^2`` in the outer ``fraction`` of the box along any axis."""
    spec = U.spec
    outer = np.zeros(spec.shape, dtype=bool)
    for c in spec.coords():
        outer |= np.abs(c) > (1 - fraction) * spec.half_width
    energy = np.sum(np.abs(U.components) ** 2, axis=tuple(range(len(U.component_shape))))
    total = energy.sum()
    return float(energy[outer].sum() / total) if total > 0 else 0.0


# {{{ decay fits

@dataclass(frozen=True)
class DecayFit:
    gamma1: float
    C: float
    r_squared: float
    cone_mass_ratio: float
    z_max: float = float("nan")
    points: int = 0


def _amplitude(G: GridField) -> np.ndarray:
    comp = np.abs(G.components).reshape((-1,) + G.spec.shape)
    return comp.max(axis=0)


def _noise_floor(amp: np.ndarray, spec: GridSpec, factor: float = 10.0) -> float:
    outer = np.zeros(spec.shape, dtype=bool)
    for c in spec.coords():
        outer |= np.abs(c) > 0.9 * spec.half_width
    eps_floor = 10 * np.finfo(float).eps * amp.max()
    return max(factor * float(np.median(amp[outer])), eps_floor)


def _fit_region(amp, z, floor, z_min):
    """Mask of ``z > z_min`` points inside the largest radius where ``amp`` stays above ``floor``."""
    outside = z > z_min
    below = outside & (amp <= floor)
    z_max = float(z[below].min()) if np.any(below) else float(z.max())
    region = outside & (z < z_max)
    return region, z_max


def decay_fit(G: GridField, alpha, t: float, z_min: float = 1.0) -> DecayFit:
    """Fit ``log max|G| = log C - gamma1 |t^-alpha x|^(1/(1-alpha))`` outside the cone ``|t^-alpha x| <= z_min``.

    The region ends where the amplitude first reaches the noise floor, taken
    as the larger of ten times the median amplitude near the box edge and ten
    machine epsilons of the peak.
    """
    a = _alpha(alpha, allow_one=False)
    if t <= 0:
        raise ValueError("t must be positive")
    spec = G.spec
    amp = _amplitude(G)
    if not np.any(amp > 0):
        raise DecayFitError("field vanishes identically")
    z = spec.radius() * t ** (-a)
    floor = _noise_floor(amp, spec)
    region, z_max = _fit_region(amp, z, floor, z_min)
    count = int(region.sum())
    if count < MIN_FIT_POINTS:
        raise DecayFitError(
            f"only {count} samples between the cone and the noise floor (z_max={z_max:.3g}); "
            "enlarge the box, refine the grid or reduce the mollifier"
        )
    vals = amp[region]
    if vals.max() / vals.min() < MIN_DYNAMIC_RANGE:
        raise DecayFitError(
            f"dynamic range {vals.max() / vals.min():.3g} over the fit region is below {MIN_DYNAMIC_RANGE:g}"
        )
    w = z[region] ** (1 / (1 - a))
    y = np.log(vals)
    slope, intercept = np.polyfit(w, y, 1)
    resid = y - (slope * w + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    mass = float(amp[z > z_min].sum() / amp.sum())
    return DecayFit(float(-slope), float(math.exp(intercept)), r2, mass, z_max, count)

# }}}


# {{{ diffusion-wave scalar kernel

def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (1 < beta < 2):
        raise ValueError(f"beta must lie in (1, 2), got {beta}")
    return beta


def dw_multiplier(beta: float, t: float, spec: GridSpec) -> np.ndarray:
    """``E_beta(-t^beta |xi|^2)`` on the wavenumber grid."""
    beta = _check_beta(beta)
    xi2 = sum(k**2 for k in spec.wavenumbers())
    if t == 0:
        return np.ones(spec.shape)
    # the multiplier depends on |xi| only, so evaluate once per distinct value
    uniq, inv = np.unique(xi2.ravel(), return_inverse=True)
    try:
        vals = np.real(eval_E_alpha(beta, -(t**beta) * uniq))
    except MittagLefflerError as exc:
        raise SpectralSolveError(f"Mittag-Leffler evaluation failed: {exc}") from None
    return vals[inv].reshape(spec.shape)


def dw_scalar_spectral(beta: float, t: float, u0: GridField) -> GridField:
    """Diffusion-wave solution with ``u(0) = u0``, ``u_t(0) = 0`` via ``u^ = E_beta(-t^beta |xi|^2) u0^``."""
    beta = _check_beta(beta)
    if t < 0:
        raise ValueError("t must be non-negative")
    if u0.component_shape != (1,):
        raise GridError("expected a scalar field")
    if t == 0:
        return GridField(u0.spec, u0.components.astype(complex))
    mult = dw_multiplier(beta, t, u0.spec)
    return GridField.from_spectrum(u0.spec, u0.forward() * mult[None])


def dw_kernel(beta: float, t: float, spec: GridSpec) -> GridField:
    """Mollified scalar diffusion-wave kernel, centred at grid index ``N/2``."""
    eps = spec.epsilon
    if eps <= 0:
        raise GridError("mollifier_width must be positive for a sampled kernel")
    if t <= 0:
        raise ValueError("t must be positive")
    xi2 = sum(k**2 for k in spec.wavenumbers())
    ghat = dw_multiplier(beta, t, spec) * np.exp(-0.5 * eps**2 * xi2)
    axes = tuple(range(spec.n))
    g = np.fft.fftshift(np.fft.ifftn(ghat, axes=axes), axes=axes) / spec.spacing**spec.n
    return GridField(spec, g[None])


def envelope_exponent(beta) -> Fraction:
    """``2 / (2 - beta)``, checked to equal ``1 / (1 - beta/2)`` in exact arithmetic."""
    b = Fraction(beta)
    lhs = Fraction(2) / (2 - b)
    rhs = 1 / (1 - b / 2)
    assert lhs == rhs, "exponent identity failed"
    return lhs


@dataclass
class EnvelopeReport:
    beta: float
    t: float
    C: float
    a: float
    exponent: float
    holds: bool
    worst_heldout_ratio: float
    z_max: float
    points: int


def dw_green_check(beta: float, t: float, spec: GridSpec, slack: float = SLACK) -> EnvelopeReport:
    """Fit ``|G| <= C t^(-beta/2) exp(-a z^(2/(2-beta)))``, ``z = |x| t^(-beta/2)``, and test it held-out.

    ``(log C, a >= 0)`` minimise the total log-gap on the even-indexed points
    of the region above the noise floor, subject to the envelope holding
    there.  The odd-indexed points must satisfy it within ``slack``.
    """
    beta = _check_beta(beta)
    if spec.n != 1:
        raise GridError("the envelope check is implemented for n = 1")
    if t <= 0:
        raise ValueError("t must be positive")
    q = float(envelope_exponent(beta))
    G = dw_kernel(beta, t, spec)
    amp = np.abs(G.components[0])
    z = np.abs(spec.axis()) * t ** (-beta / 2)
    floor = _noise_floor(amp, spec)
    region, z_max = _fit_region(amp, z, floor, -1.0)
    idx = np.flatnonzero(region)
    if len(idx) < 2 * MIN_FIT_POINTS:
        raise DecayFitError(f"only {len(idx)} samples above the noise floor")
    w = z[idx] ** q
    y = np.log(amp[idx] * t ** (beta / 2))
    cal = np.arange(len(idx)) % 2 == 0
    wc, yc = w[cal], y[cal]
    # variables (log C, a): minimise sum(log C - a w - y) s.t. log C - a w >= y
    res = linprog(
        c=[len(wc), -wc.sum()],
        A_ub=np.column_stack([-np.ones_like(wc), wc]),
        b_ub=-yc,
        bounds=[(None, None), (0, None)],
        method="highs",
    )
    if not res.success:
        raise DecayFitError(f"envelope fit failed: {res.message}")
    logC, a = (float(v) for v in res.x)
    env = np.exp(logC - a * w[~cal])
    ratio = np.exp(y[~cal]) / env
    worst = float(ratio.max())
    holds = bool(worst <= 1 + slack and a > 0)
    return EnvelopeReport(beta, t, math.exp(logC), a, q, holds, worst, z_max, len(idx))

# }}}
