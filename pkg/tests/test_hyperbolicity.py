from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import random_symmetric_system
from frachyp.hyperbolicity import (
    DegenerateSampleError,
    SamplePlan,
    Verdict,
    check_linear_bound,
    cosine_inequality_check,
    estimate_exponent,
    hirsch_bound,
    verify_fractional_hyperbolic,
)
from frachyp.symbol_algebra import ComplexFrequency, MatrixPencil, pencil_from_symmetric

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
SMALL_PLAN = SamplePlan(directions=8, ray_radii=tuple(np.logspace(0, 3, 13)))


def symmetric_swap():
    return pencil_from_symmetric([SWAP], np.zeros((2, 2)))


def scalar_s1():
    return MatrixPencil(np.zeros((1, 1)), (np.ones((1, 1)),))


def constant(c, m=1):
    return MatrixPencil(c * np.eye(m), (np.zeros((m, m)),))


def test_linear_bound_examples():
    samples = SamplePlan().grid(1)
    lb = check_linear_bound(symmetric_swap(), samples)
    assert lb.holds and lb.a <= 1 + 1e-9 and lb.b == pytest.approx(0, abs=1e-9)
    lb = check_linear_bound(constant(-0.5 + 2j), samples)
    assert lb.holds and lb.a == pytest.approx(0, abs=1e-12) and lb.b == pytest.approx(0, abs=1e-12)
    assert not check_linear_bound(scalar_s1(), samples).holds


def test_linear_bound_degenerate():
    with pytest.raises(DegenerateSampleError):
        check_linear_bound(symmetric_swap(), [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateSampleError):
        check_linear_bound(symmetric_swap(), [])


def test_cosine_examples():
    assert cosine_inequality_check(0.5, 0.0)
    assert cosine_inequality_check(0.5, math.pi / 4)
    assert cosine_inequality_check(0.3, 0.3)
    with pytest.raises(ValueError):
        cosine_inequality_check(0.5, 1.0)


def test_cosine_grid():
    bad = 0
    for alpha in np.linspace(0.005, 0.995, 200):
        half = alpha * math.pi / 2
        for phi in np.linspace(-half, half, 200):
            bad += not cosine_inequality_check(alpha, phi)
    assert bad == 0


def test_hirsch_examples():
    assert hirsch_bound([SWAP], np.zeros((2, 2)), ComplexFrequency.real(5.0)) == 0.0
    s = ComplexFrequency([0.0], [2.0])
    bound = hirsch_bound([SWAP], np.zeros((2, 2)), s)
    assert bound == pytest.approx(4.0)
    mu = np.linalg.eigvals(2j * SWAP)
    assert np.max(np.abs(mu.imag)) == pytest.approx(2.0)
    B = 1j * np.eye(3)
    for sv in (0.0, 1 + 2j, -3j):
        L = sv * np.zeros((3, 3)) + 1j * B
        assert np.max(np.abs(np.linalg.eigvals(L).imag)) <= hirsch_bound([np.zeros((3, 3))], B, sv) + 1e-12
    with pytest.raises(ValueError):
        hirsch_bound([np.array([[0, 1], [2, 0]])], np.zeros((2, 2)), 1.0)


def test_hirsch_random(rng):
    for _ in range(200):
        m, n = rng.integers(1, 5), rng.integers(1, 3)
        A, B = random_symmetric_system(rng, m, n)
        s = rng.normal(size=n) * 5 + 1j * rng.normal(size=n) * 5
        L = sum(sv * a for sv, a in zip(s, A)) + 1j * B
        mu = np.linalg.eigvals(L)
        bound = hirsch_bound(A, B, s)
        assert np.max(np.abs(mu.imag)) <= bound * (1 + 1e-12) + 1e-12
        # Re lambda and Im mu agree as sets up to sign, since lambda = i mu
        lam = np.linalg.eigvals(1j * L)
        assert np.allclose(np.sort(np.abs(lam.real)), np.sort(np.abs(mu.imag)), atol=1e-9)


def test_classifier_examples():
    rep = verify_fractional_hyperbolic(symmetric_swap(), 0.5, SMALL_PLAN)
    assert rep.verdict is Verdict.FRACTIONAL_HYPERBOLIC
    assert rep.exponent_q is not None and rep.exponent_q <= 1
    rep = verify_fractional_hyperbolic(scalar_s1(), 0.5, SMALL_PLAN)
    assert rep.verdict is Verdict.REJECTED
    assert rep.diagnostics["rejecting_rays"] > 0
    rep = verify_fractional_hyperbolic(constant(0.5), 0.5, SMALL_PLAN, exponent_t=None)
    assert rep.verdict is Verdict.FRACTIONAL_HYPERBOLIC
    assert rep.fitted_C <= 0.25 / math.log(2) + 1e-12


def test_report_invariant_holds_on_all_samples(rng):
    A, B = random_symmetric_system(rng, 3, 2)
    rep = verify_fractional_hyperbolic(pencil_from_symmetric(A, B), 0.7, SMALL_PLAN, exponent_t=None)
    assert rep.verdict is Verdict.FRACTIONAL_HYPERBOLIC
    for s, lam in rep.samples:
        den = np.linalg.norm(s.tau) ** (1 / 0.7) + math.log1p(np.linalg.norm(s.sigma))
        assert lam <= (1 + 0.05) * rep.fitted_C * den + 1e-12


def test_linear_bound_implies_hyperbolic(rng):
    plan = SMALL_PLAN
    pencils = [symmetric_swap(), constant(-1.0, 2), constant(0.3 + 0.1j)]
    for _ in range(3):
        A, B = random_symmetric_system(rng, int(rng.integers(1, 4)), 1)
        pencils.append(pencil_from_symmetric(A, B))
    for p in pencils:
        if check_linear_bound(p, plan.grid(p.n)).holds:
            rep = verify_fractional_hyperbolic(p, 0.6, plan, exponent_t=None)
            assert rep.verdict is Verdict.FRACTIONAL_HYPERBOLIC


def test_reproducible():
    p = pencil_from_symmetric([SWAP], np.diag([0.2, -0.1]))
    r1 = verify_fractional_hyperbolic(p, 0.5, SMALL_PLAN)
    r2 = verify_fractional_hyperbolic(p, 0.5, SMALL_PLAN)
    assert r1.verdict == r2.verdict and r1.fitted_C == r2.fitted_C
    assert r1.diagnostics == r2.diagnostics
    assert [x[1] for x in r1.samples] == [x[1] for x in r2.samples]


def test_exponent_examples():
    assert estimate_exponent(constant(2.0), 0.5, 1.0, SMALL_PLAN) == 0
    diag = MatrixPencil(np.zeros((2, 2)), (np.diag([1j, -1j]),))
    assert estimate_exponent(diag, 0.5, 1.0, SMALL_PLAN) == 0
    assert estimate_exponent(symmetric_swap(), 0.5, 1.0, SMALL_PLAN) <= 1


def test_jordan_growth_exponent():
    # P(s) = [[0, s], [0, 0]] is nilpotent, E_alpha(P) = I + P / Gamma(1 + alpha): q = 1
    p = MatrixPencil(np.zeros((2, 2)), (np.array([[0.0, 1.0], [0.0, 0.0]]),))
    assert estimate_exponent(p, 0.5, 1.0, SMALL_PLAN) == 1
