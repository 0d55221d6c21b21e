from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frachyp.reduction import reduce_diffusion_wave
from frachyp.symbol_algebra import (
    ComplexFrequency,
    MatrixPencil,
    char_roots,
    eval_pencil,
    lambda_alpha,
    lambda_alpha_batch,
    pencil_from_symmetric,
)

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def scalar_pencil(c0=0.0, c1=1.0):
    return MatrixPencil(np.array([[c0]]), (np.array([[c1]]),))


def test_pencil_validation():
    with pytest.raises(ValueError):
        MatrixPencil(np.zeros((2, 3)), (np.zeros((2, 3)),))
    with pytest.raises(ValueError):
        MatrixPencil(np.zeros((2, 2)), ())
    with pytest.raises(ValueError):
        MatrixPencil(np.zeros((2, 2)), (np.zeros((3, 3)),))
    with pytest.raises(ValueError):
        ComplexFrequency([1.0, np.inf], [0.0, 0.0])
    with pytest.raises(ValueError):
        ComplexFrequency([1.0, 2.0], [0.0])


def test_pencil_from_symmetric_examples():
    p = pencil_from_symmetric([SWAP], np.zeros((2, 2)))
    assert np.array_equal(p.P0, np.zeros((2, 2)))
    assert np.array_equal(p.Pnu[0], 1j * SWAP)
    q = pencil_from_symmetric([np.zeros((2, 2))], np.eye(2))
    for s in (0.0, 3 + 2j, -7j):
        assert np.array_equal(eval_pencil(q, s), -np.eye(2))
    with pytest.raises(ValueError):
        pencil_from_symmetric([np.array([[0, 1], [0, 0]])], np.zeros((2, 2)))


def test_reduction_pencil_roots():
    p = reduce_diffusion_wave(1.5, 1).pencil
    for sigma in (0.5, 1.0, 7.0):
        roots = sorted(char_roots(p, sigma).roots, key=lambda r: r.imag)
        assert np.allclose(roots, [-1j * sigma, 1j * sigma], atol=1e-14)


def test_eval_pencil_examples():
    p = pencil_from_symmetric([SWAP], np.diag([1.0, 2.0]))
    assert np.array_equal(eval_pencil(p, 0.0), p.P0)
    scalar = MatrixPencil(np.zeros((2, 2)), (np.eye(2),))
    assert np.allclose(eval_pencil(scalar, 2 + 3j), (2 + 3j) * np.eye(2))
    sym = pencil_from_symmetric([SWAP], np.zeros((2, 2)))
    assert np.allclose(eval_pencil(sym, ComplexFrequency.real(1.0)), [[0, 1j], [1j, 0]])
    with pytest.raises(ValueError):
        eval_pencil(sym, [1.0, 2.0])


def test_char_roots_examples():
    const = MatrixPencil(2.5 * np.eye(3), (np.zeros((3, 3)),))
    assert np.allclose(char_roots(const, 1.0).roots, [2.5] * 3)
    sym = pencil_from_symmetric([SWAP], np.zeros((2, 2)))
    assert np.allclose(sorted(char_roots(sym, 1.0).roots, key=lambda r: r.imag), [-1j, 1j])
    diag = MatrixPencil(np.zeros((2, 2)), (np.diag([1.0, 2.0]),))
    assert np.allclose(np.sort(char_roots(diag, 3.0).roots.real), [3, 6])
    assert len(char_roots(diag, 3.0)) == 2


def test_lambda_alpha_examples():
    one = MatrixPencil(np.array([[1.0]]), (np.zeros((1, 1)),))
    assert lambda_alpha(one, 0.5, 7 - 2j) == pytest.approx(1.0)
    sym = pencil_from_symmetric([SWAP], np.zeros((2, 2)))
    for alpha in (0.2, 0.5, 0.99):
        assert lambda_alpha(sym, alpha, ComplexFrequency.real(4.0)) == 0.0
    assert lambda_alpha(scalar_pencil(), 0.5, ComplexFrequency.real(4.0)) == pytest.approx(16.0)
    zero = MatrixPencil(np.zeros((3, 3)), (np.zeros((3, 3)),))
    assert lambda_alpha(zero, 0.4, 1 + 1j) == 0.0


def test_sector_boundary_included():
    alpha = 0.5
    lam = np.exp(1j * alpha * np.pi / 2)
    p = MatrixPencil(np.array([[lam]]), (np.zeros((1, 1)),))
    # on the boundary Re lambda^(1/alpha) = cos(pi/2) ~ 0, but the root is admitted
    assert lambda_alpha(p, alpha, 0.0) == pytest.approx(0.0, abs=1e-15)
    inside = MatrixPencil(np.array([[2 * np.exp(0.3j)]]), (np.zeros((1, 1)),))
    assert lambda_alpha(inside, alpha, 0.0) == pytest.approx(4 * np.cos(0.6))


def test_scalar_monotone():
    cs = np.linspace(0.1, 5, 30)
    vals = [lambda_alpha(MatrixPencil(np.array([[c]]), (np.zeros((1, 1)),)), 0.7, 0.0) for c in cs]
    assert np.allclose(vals, cs ** (1 / 0.7))
    assert np.all(np.diff(vals) > 0)


def test_batch_matches_scalar(rng):
    P0 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Pnu = tuple(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2))
    p = MatrixPencil(P0, Pnu)
    s = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
    batch = lambda_alpha_batch(p, 0.6, s)
    assert np.allclose(batch, [lambda_alpha(p, 0.6, si) for si in s])


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 5), st.integers(1, 2), st.integers(0, 2**32 - 1), st.floats(0.05, 0.99))
def test_roots_consistency_and_nonnegativity(m, n, seed, alpha):
    rng = np.random.default_rng(seed)
    P0 = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    Pnu = tuple(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)) for _ in range(n))
    p = MatrixPencil(P0, Pnu)
    s = rng.normal(size=n) * 3 + 1j * rng.normal(size=n)
    P = eval_pencil(p, s)
    roots = char_roots(p, s)
    assert len(roots) == m
    scale = np.linalg.norm(P, 2)
    assert abs(roots.roots.sum() - np.trace(P)) <= 1e-8 * max(scale * m, 1e-300)
    det = np.linalg.det(P)
    assert abs(np.prod(roots.roots) - det) <= 1e-8 * max(scale**m, 1e-300)
    probes = rng.normal(size=4) + 1j * rng.normal(size=4) + 2 * scale
    assert roots.residual(P, probes) < 1e-8
    assert lambda_alpha(p, alpha, s) >= 0
