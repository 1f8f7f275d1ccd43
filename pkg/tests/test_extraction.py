import numpy as np
import pytest

from gkslkit.channels import identity_super, mix_kraus, super_from_kraus, super_trace
from gkslkit.ensembles import haar_unitary, random_generator, random_unital_kraus
from gkslkit.errors import InsufficientGrid, NotUnital, StepTooLarge
from gkslkit.extraction import (
    candidate_generator,
    decompose,
    extract_generator,
    finite_difference_generator,
    kraus_at,
    order_diagnostics,
    reconstruct,
)
from gkslkit.gksl import SIGMA_MINUS, amplitude_damping, build_super, generator_distance, zero_generator
from gkslkit.kraus_align import kraus_map_distance
from gkslkit.operator_core import dag
from gkslkit.semigroup import channel_at

from conftest import rand_op, rel


def source_of(g):
    return lambda t: channel_at(g, t)


def identity_residual(inter, rng, n=20):
    d = inter.kraus.shape[1]
    worst = 0.0
    for _ in range(n):
        a = rand_op(rng, d)
        lhs = np.einsum("jba,bc,jcd->ad", inter.kraus.conj(), a, inter.kraus)
        worst = max(worst, np.linalg.norm(lhs - reconstruct(inter, a)) / np.linalg.norm(a))
    return worst


def test_decompose_identity_channel():
    inter = decompose([np.eye(2)], 1e-3)
    np.testing.assert_allclose(inter.alphas, [1.0])
    np.testing.assert_allclose(inter.tracelessM, 0)
    np.testing.assert_allclose(inter.Y, 0)
    assert inter.beta == pytest.approx(1.0)


def test_decompose_rejects_non_unital():
    with pytest.raises(NotUnital):
        decompose([SIGMA_MINUS], 1e-3)


def test_decompose_amplitude_damping_small_dt(rng):
    inter = decompose(kraus_at(source_of(amplitude_damping()), 1e-3), 1e-3)
    assert identity_residual(inter, rng) < 1e-11


@pytest.mark.parametrize("d", [2, 3, 4])
def test_decompose_exact_for_any_unital_set(rng, d):
    for _ in range(10):
        k = random_unital_kraus(rng, d, int(rng.integers(1, d * d + 1)))
        inter = decompose(k, 0.37)
        assert identity_residual(inter, rng) < 1e-11
        # Structural invariants of the intermediate bundle.
        assert np.max(np.abs(np.trace(inter.tracelessM, axis1=1, axis2=2))) < 1e-12
        assert inter.beta == pytest.approx(np.sum(np.abs(inter.alphas) ** 2))
        assert np.linalg.norm(inter.Y - dag(inter.Y)) < 1e-14
        assert abs(np.trace(inter.Y)) < 1e-12
        msum = np.einsum("jba,jbc->ac", inter.tracelessM.conj(), inter.tracelessM)
        x_r_expected = 0.5 * ((1 - inter.beta) * np.eye(d) - msum)
        assert np.linalg.norm(inter.X_R - x_r_expected) < 1e-12
        np.testing.assert_allclose(inter.X, inter.X_R + 1j * inter.X_I, atol=1e-14)


def test_y_is_independent_of_x_convention(rng):
    # X_I is unchanged if X sums conj(alpha_j) L_j instead of conj(alpha_j) M_j.
    k = random_unital_kraus(rng, 3, 5)
    inter = decompose(k, 1.0)
    x_l = np.einsum("j,jab->ab", inter.alphas.conj(), k)
    x_i_l = (x_l - dag(x_l)) / 2j
    np.testing.assert_allclose(x_i_l, inter.X_I, atol=1e-14)


def test_decompose_mixing_invariance(rng):
    k = random_unital_kraus(rng, 3, 4)
    u = haar_unitary(rng, 9)
    np.testing.assert_allclose(decompose(mix_kraus(k, u), 1.0).Y, decompose(k, 1.0).Y, atol=1e-13)


def test_finite_difference_examples():
    fd = finite_difference_generator(source_of(zero_generator(2)), 1e-3)
    np.testing.assert_array_equal(fd, np.zeros((4, 4)))
    g = amplitude_damping()
    lsup = build_super(g)
    dt = 1e-3
    fd = finite_difference_generator(source_of(g), dt)
    # Leading Taylor remainder of (exp(dt L) - 1)/dt - L is dt L^2 / 2.
    predicted = dt * np.linalg.norm(lsup @ lsup) / 2 / np.linalg.norm(lsup)
    assert rel(fd, lsup) == pytest.approx(predicted, rel=0.01)
    assert 3e-4 < rel(fd, lsup) < 3e-3


@pytest.mark.parametrize("d", [2, 3])
def test_finite_difference_equals_candidate_generator(rng, d):
    for _ in range(5):
        k = random_unital_kraus(rng, d, int(rng.integers(1, d * d + 1)))
        s = super_from_kraus(k)
        dt = float(rng.uniform(0.01, 2.0))
        fd = finite_difference_generator(lambda t: s, dt)
        cand = build_super(candidate_generator(decompose(k, dt)))
        assert rel(cand, fd) < 1e-10


def test_trace_route(rng):
    for d in (2, 3):
        g = random_generator(rng, d)
        dt = 1e-3
        s = channel_at(g, dt)
        inter = decompose(kraus_at(source_of(g), dt), dt)
        lhs = super_trace(s - identity_super(d))
        rhs = -d * sum(np.linalg.norm(m) ** 2 for m in inter.tracelessM)
        assert abs(lhs - rhs) <= 1e-10 * (1 + abs(rhs))


def test_order_diagnostics_zero_generator():
    diag = order_diagnostics(source_of(zero_generator(2)))
    assert max(diag.m_norms) < 1e-13 and max(diag.y_norms) < 1e-13
    assert diag.degenerate_m and diag.degenerate_y
    assert all(diag.in_bands().values())


def test_order_diagnostics_amplitude_damping():
    diag = order_diagnostics(source_of(amplitude_damping()))
    assert diag.slope_m == pytest.approx(0.5, abs=0.05)
    # Real Kraus operators and H = 0 force Y = 0 exactly: no slope to fit.
    assert max(diag.y_norms) < 1e-13 and diag.degenerate_y


def test_order_diagnostics_random_d3(rng):
    for _ in range(3):
        diag = order_diagnostics(source_of(random_generator(rng, 3, 3)))
        assert 0.45 <= diag.slope_m <= 0.55
        assert 0.85 <= diag.slope_y <= 1.15
        assert diag.to_dict()["in_bands"] == {"slope_m": True, "slope_y": True}


def test_order_diagnostics_grid_checks():
    src = source_of(amplitude_damping())
    with pytest.raises(InsufficientGrid):
        order_diagnostics(src, [1e-2, 1e-3, 1e-4])
    with pytest.raises(InsufficientGrid):
        order_diagnostics(src, [1e-4, 3e-4, 1e-3, 1e-2])
    with pytest.raises(InsufficientGrid):
        order_diagnostics(src, [1e-2, 8e-3, 6e-3, 4e-3])


def test_extract_amplitude_damping():
    g = amplitude_damping()
    result = extract_generator(source_of(g), (1e-3, 5e-4))
    assert generator_distance(result.generator, g) / np.linalg.norm(build_super(g)) < 1e-5
    assert result.extrapolation_record == {"dt": [1e-3, 5e-4], "weights": [-1.0, 2.0], "order": 1}


def test_extract_zero_generator():
    result = extract_generator(source_of(zero_generator(3)))
    # Only rounding survives, amplified by 1/dt.
    assert np.linalg.norm(result.generator.H) < 1e-12 and result.generator.n_jumps == 0
    assert max(result.residuals) < 1e-12


def test_extract_random_d3(rng):
    g = random_generator(rng, 3, 3)
    result = extract_generator(source_of(g))
    scale = np.linalg.norm(build_super(g))
    assert generator_distance(result.generator, g) / scale < 1e-4
    assert result.generator.n_jumps <= 8
    assert max(result.residuals) < 1e-10 * scale


def test_extract_gauge_robust(rng):
    g = random_generator(rng, 3, 3)
    reference = extract_generator(source_of(g), dt_grid=None).generator

    def gauge(dt, kraus):
        d = kraus.shape[1]
        mixed = mix_kraus(kraus, haar_unitary(rng, d * d))
        assert kraus_map_distance(mixed, kraus) < 1e-11
        return mixed

    gauged = extract_generator(source_of(g), dt_grid=None, gauge=gauge).generator
    assert generator_distance(gauged, reference) < 1e-9


def test_extract_rejects_large_step(rng):
    g = random_generator(rng, 3, 3)
    with pytest.raises(StepTooLarge):
        extract_generator(source_of(g), (0.5, 0.25))
