from __future__ import annotations

import numpy as np
import pytest

from frachyp.hyperbolicity import SamplePlan, Verdict, verify_fractional_hyperbolic
from frachyp.reduction import dw_initial_state, reduce_diffusion_wave
from frachyp.spectral_solver import GridError, GridField, GridSpec


def test_structure_n1():
    red = reduce_diffusion_wave(1.5, 1)
    assert red.alpha == 0.75
    assert np.array_equal(red.A[0], [[0, -1], [-1, 0]])
    assert np.array_equal(red.pencil.P0, np.zeros((2, 2)))
    assert np.array_equal(red.pencil.Pnu[0], 1j * red.A[0])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_structure_general(n):
    red = reduce_diffusion_wave(1.3, n)
    assert len(red.A) == n and red.pencil.m == n + 1
    for j, A in enumerate(red.A, start=1):
        expected = np.zeros((n + 1, n + 1))
        expected[0, j] = expected[j, 0] = -1
        assert np.array_equal(A, expected)
        assert np.array_equal(A, A.T)


def test_domain():
    for beta in (1.0, 2.0, 0.5):
        with pytest.raises(ValueError):
            reduce_diffusion_wave(beta, 1)
    with pytest.raises(ValueError):
        reduce_diffusion_wave(1.5, 0)


@pytest.mark.parametrize("beta", [1.1, 1.5, 1.9])
def test_reduced_pencil_is_hyperbolic(beta):
    red = reduce_diffusion_wave(beta, 1)
    rep = verify_fractional_hyperbolic(red.pencil, red.alpha, SamplePlan(directions=8))
    assert rep.verdict is Verdict.FRACTIONAL_HYPERBOLIC


def test_initial_state_constant():
    spec = GridSpec(1, 4.0, 32)
    V = dw_initial_state(GridField(spec, np.full((1, 32), 3.0)))
    assert V.component_shape == (2,)
    assert np.max(np.abs(V.components)) < 1e-14


def test_initial_state_lattice_sine():
    spec = GridSpec(1, 4.0, 64)
    x = spec.axis()
    V = dw_initial_state(GridField(spec, np.sin(np.pi * x / 4)[None]))
    assert np.all(V.components[0] == 0)
    assert np.max(np.abs(V.components[1] - np.pi / 4 * np.cos(np.pi * x / 4))) < 1e-10


def test_initial_state_gaussian_2d():
    spec = GridSpec(2, 8.0, 64)
    u0 = GridField.from_function(spec, lambda x, y: np.exp(-x**2 - 2 * y**2))
    V = dw_initial_state(u0)
    x, y = spec.coords()
    g = np.exp(-x**2 - 2 * y**2)
    assert np.max(np.abs(V.components[1] + 2 * x * g)) < 1e-8
    assert np.max(np.abs(V.components[2] + 4 * y * g)) < 1e-8


def test_initial_state_rejects_vector_field():
    spec = GridSpec(1, 4.0, 32)
    with pytest.raises(GridError):
        dw_initial_state(GridField(spec, np.zeros((2, 32))))
