import numpy as np
import pytest

from gkslkit.channels import (
    choi_from_super,
    choi_min_eig,
    identity_super,
    is_unital,
    super_apply,
    super_from_kraus,
)
from gkslkit.ensembles import random_generator
from gkslkit.errors import InsufficientGrid, StepTooLarge
from gkslkit.fitting import loglog_slope
from gkslkit.gksl import SIGMA_MINUS, GkslGenerator, amplitude_damping, zero_generator
from gkslkit.semigroup import channel_at, psi_step, t0_max, trotter_channel, trotter_convergence

from conftest import SX, SZ, basis_op, rand_op, rel


def amplitude_damping_closed_form(t, a):
    # Heisenberg picture: P1 -> e^{-t} P1, |0><1| -> e^{-t/2} |0><1|, I -> I.
    p1 = basis_op(2, 1, 1)
    out = np.zeros((2, 2), dtype=complex)
    out += a[0, 0] * (np.eye(2) - np.exp(-t) * p1)
    out += a[1, 1] * np.exp(-t) * p1
    out += a[0, 1] * np.exp(-t / 2) * basis_op(2, 0, 1)
    out += a[1, 0] * np.exp(-t / 2) * basis_op(2, 1, 0)
    return out


def test_channel_at_zero_time(rng):
    np.testing.assert_array_equal(channel_at(random_generator(rng, 3), 0.0), identity_super(3))
    with pytest.raises(ValueError):
        channel_at(amplitude_damping(), -0.1)


@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_amplitude_damping_closed_form(rng, t):
    s = channel_at(amplitude_damping(), t)
    p1 = basis_op(2, 1, 1)
    assert abs(super_apply(s, p1)[1, 1] - np.exp(-t)) < 1e-10
    a = rand_op(rng, 2)
    assert rel(super_apply(s, a), amplitude_damping_closed_form(t, a)) < 1e-12


def test_pure_hamiltonian_phase():
    g = GkslGenerator(SZ / 2)
    t = 0.8
    out = super_apply(channel_at(g, t), basis_op(2, 0, 1))
    np.testing.assert_allclose(out, np.exp(1j * t) * basis_op(2, 0, 1), atol=1e-14)


def test_semigroup_law(rng):
    for _ in range(10):
        g = random_generator(rng, int(rng.integers(2, 4)))
        s, t = rng.uniform(0, 2, size=2)
        lhs = channel_at(g, s + t)
        assert rel(channel_at(g, s) @ channel_at(g, t), lhs) < 1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_channels_are_unital_and_cp(rng, d):
    for _ in range(3):
        g = random_generator(rng, d)
        for t in np.arange(0, 2.01, 0.1):
            s = channel_at(g, t)
            assert np.linalg.norm(super_apply(s, np.eye(d)) - np.eye(d)) < 1e-10
            j = choi_from_super(s)
            assert choi_min_eig(j) >= -1e-9 * np.linalg.norm(j, 2)


def test_t0_examples():
    assert t0_max(GkslGenerator(np.zeros((2, 2)), [SX])) == pytest.approx(1.0)
    assert t0_max(zero_generator(2)) == float("inf")
    assert t0_max(GkslGenerator(np.zeros((2, 2)), [np.sqrt(2) * SIGMA_MINUS])) == pytest.approx(0.5)


def test_psi_step_examples(rng):
    g = amplitude_damping()
    r = psi_step(g, 0.0)
    np.testing.assert_allclose(r[0], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(r[1:], 0)
    r = psi_step(g, 0.1)
    np.testing.assert_allclose(r[0], np.diag([1.0, np.sqrt(0.9)]), atol=1e-15)
    np.testing.assert_allclose(r[1], np.sqrt(0.1) * SIGMA_MINUS, atol=1e-15)
    with pytest.raises(StepTooLarge):
        psi_step(g, 1.01)


def test_psi_step_unital(rng):
    for _ in range(20):
        g = random_generator(rng, int(rng.integers(2, 5)))
        t = rng.uniform(0, 1) * t0_max(g)
        ok, res = is_unital(psi_step(g, t), 1e-11)
        assert ok, res
    # Exactly at t0 the square-root argument is singular.
    g = random_generator(rng, 3)
    assert is_unital(psi_step(g, t0_max(g)), 1e-11)[0]


def test_psi_step_is_first_order(rng):
    g = random_generator(rng, 3, 3)
    ts = np.logspace(-3, -1, 7)
    errs = [np.linalg.norm(super_from_kraus(psi_step(g, t)) - channel_at(g, t)) for t in ts]
    assert 1.85 <= loglog_slope(ts, errs) <= 2.15


def test_trotter_channel_examples(rng):
    g = random_generator(rng, 3, 2)
    np.testing.assert_allclose(trotter_channel(g, 0.0, 5), identity_super(3), atol=1e-15)
    exact = channel_at(g, 1.0)
    errors = [np.linalg.norm(trotter_channel(g, 1.0, n) - exact) for n in (8, 32, 128, 512)]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    with pytest.raises(StepTooLarge):
        trotter_channel(GkslGenerator(np.zeros((2, 2)), [3 * SX]), 1.0, 2)


def test_trotter_amplitude_damping_rate():
    g = amplitude_damping()
    exact = channel_at(g, 1.0)
    e16 = np.linalg.norm(trotter_channel(g, 1.0, 16) - exact)
    e1024 = np.linalg.norm(trotter_channel(g, 1.0, 1024) - exact)
    # First order: the ratio is 16/1024 = 1/64 up to higher-order terms.
    assert e1024 / e16 == pytest.approx(1 / 64, rel=0.05)


def test_trotter_convergence_reports():
    grid = [16, 64, 256, 1024, 4096]
    zero = trotter_convergence(zero_generator(2), 1.0, grid)
    assert zero.degenerate and zero.fitted_slope is None and max(zero.errors) < 1e-13
    ad = trotter_convergence(amplitude_damping(), 1.0, grid)
    assert -1.15 <= ad.fitted_slope <= -0.85 and ad.monotone and ad.in_band
    assert ad.to_dict()["in_band"] is True


def test_trotter_convergence_random_d3(rng):
    g = random_generator(rng, 3, 3)
    report = trotter_convergence(g, 0.5, [16, 64, 256, 1024, 4096])
    assert -1.15 <= report.fitted_slope <= -0.85
    assert report.monotone


def test_trotter_convergence_grid_checks():
    g = amplitude_damping()
    with pytest.raises(InsufficientGrid):
        trotter_convergence(g, 1.0, [16, 32, 64])
    with pytest.raises(InsufficientGrid):
        trotter_convergence(g, 1.0, [16, 20, 24, 30])
    with pytest.raises(InsufficientGrid):
        trotter_convergence(g, 1.0, [16, 4096, 64, 256])
