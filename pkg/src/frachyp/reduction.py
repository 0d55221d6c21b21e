"""First-order system equivalent to the diffusion-wave equation with zero initial velocity.

With ``v0 = D^(beta/2) u`` and ``vj = du/dx_j`` the equation
``D^(beta) u = Laplacian u`` becomes ``D^(beta/2) V + sum_j A_j dV/dx_j = 0``
where ``A_j`` holds ``-1`` at positions ``(0, j)`` and ``(j, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_solver import GridError, GridField, GridSpec, spectral_derivative
from .symbol_algebra import MatrixPencil, pencil_from_symmetric


@dataclass(frozen=True, eq=False)
class DWReduction:
    beta: float
    n: int
    A: tuple
    pencil: MatrixPencil

    @property
    def alpha(self) -> float:
        return self.beta / 2


def reduce_diffusion_wave(beta: float, n: int) -> DWReduction:
    beta = float(beta)
    if not (1 < beta < 2):
        raise ValueError(f"beta must lie in (1, 2), got {beta}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    A = []
    for j in range(1, n + 1):
        a = np.zeros((n + 1, n + 1))
        a[0, j] = a[j, 0] = -1.0
        A.append(a)
    pencil = pencil_from_symmetric(A, np.zeros((n + 1, n + 1)))
    return DWReduction(beta, n, tuple(A), pencil)


def dw_initial_state(u0: GridField, spec: GridSpec | None = None) -> GridField:
    """``V(0) = (0, du0/dx_1, ..., du0/dx_n)`` by spectral differentiation."""
    spec = spec or u0.spec
    if spec != u0.spec:
        raise GridError("u0 is sampled on a different grid")
    if u0.component_shape != (1,):
        raise GridError("expected a scalar field")
    u = u0.components[0]
    comps = [np.zeros(spec.shape, dtype=complex)]
    for j in range(spec.n):
        comps.append(spectral_derivative(u, spec, j))
    out = np.array(comps)
    if np.isrealobj(u):
        out = out.real
    return GridField(spec, out)
