import numpy as np
import pytest

from paulialg.dynamics import (
    EvolveConfig,
    evolve_autocorrelation,
    evolve_two_point,
    profile_variance,
    rk4_step,
)
from paulialg.models import xx_chain, xxz_nnn
from paulialg.operator import Operator, allclose
from paulialg.oracle import (
    dense_autocorrelation,
    dense_noisy_evolution,
    dense_trace_normalized,
    to_dense,
)


def Z(n, j):
    return Operator(n) + ("Z", j)


def test_config_validation():
    with pytest.raises(ValueError):
        EvolveConfig(dt=0, t_max=1)
    with pytest.raises(ValueError):
        EvolveConfig(dt=0.1, t_max=1, epsilon=-1)
    assert len(EvolveConfig(dt=0.1, t_max=1).times) == 11


def test_commuting_pair_is_static():
    H = Z(3, 1) + Z(3, 2)
    tr = evolve_autocorrelation(H, Z(3, 1), EvolveConfig(dt=0.1, t_max=2))
    assert np.array_equal(tr.S, np.ones_like(tr.S))


def test_single_spin_rotation():
    # exp(iZt) X exp(-iZt) has autocorrelation cos(2t)
    H, O = Z(1, 1), Operator(1) + ("X", 1)
    tr = evolve_autocorrelation(H, O, EvolveConfig(dt=0.01, t_max=2))
    assert np.allclose(tr.S, np.cos(2 * tr.times), atol=1e-8)
    assert np.allclose(tr.S, dense_autocorrelation(H, O, tr.times), atol=1e-8)


def test_one_step_rotation():
    dt = 0.01
    O = rk4_step(Z(1, 1), Operator(1) + ("X", 1), dt)
    exact = Operator.from_pauli_dict({"X": np.cos(2 * dt), "Y": -np.sin(2 * dt)})
    # local error (2 dt)^5 / 5! ~ 3e-10
    assert allclose(O, exact, atol=1e-9)


def test_xx_n6_hundred_steps():
    H, O = xx_chain(6), Operator(6) + ("X", 1)
    tr = evolve_autocorrelation(H, O, EvolveConfig(dt=0.01, t_max=1))
    assert len(tr.times) == 101
    assert np.max(np.abs(tr.S - dense_autocorrelation(H, O, tr.times))) < 1e-8


def test_strong_noise_without_hamiltonian():
    # S is normalised by tr(O0 O0), so with H = 0 it follows the norm: exp(-eps t)
    eps = 10.0
    O0 = Operator(3) + ("X", 1)
    norms = []
    tr = evolve_autocorrelation(Operator(3), O0, EvolveConfig(dt=0.01, t_max=0.5, epsilon=eps),
                                on_step=lambda k, O: norms.append(O.norm_lanczos()))
    assert np.allclose(tr.S, np.exp(-eps * tr.times), rtol=1e-12)
    assert np.allclose(norms, np.exp(-eps * tr.times[1:]), rtol=1e-12)


def test_matches_dense_xx():
    H = xx_chain(6)
    tr = evolve_autocorrelation(H, Z(6, 3), EvolveConfig(dt=0.01, t_max=2))
    assert np.max(np.abs(tr.S - dense_autocorrelation(H, Z(6, 3), tr.times))) < 1e-6


def test_fourth_order():
    H, O = xx_chain(6), Operator(6) + ("X", 2)
    errs = []
    for dt in (0.02, 0.01):
        tr = evolve_autocorrelation(H, O, EvolveConfig(dt=dt, t_max=1))
        errs.append(np.max(np.abs(tr.S - dense_autocorrelation(H, O, tr.times))))
    assert 12 < errs[0] / errs[1] < 20


def test_energy_conserved():
    H = xxz_nnn(8)
    tr = evolve_autocorrelation(H, H, EvolveConfig(dt=0.05, t_max=2))
    assert np.allclose(tr.S, 1, atol=1e-10)


def test_hermiticity_preserved_under_trim():
    H = xxz_nnn(8)
    O = Z(8, 1)
    for _ in range(20):
        O = rk4_step(H, O, 0.05, M=200, keep=Z(8, 1)).add_noise(0.0025).trim(200, keep=Z(8, 1))
    assert allclose(O.dagger(), O, atol=1e-10)
    assert O.coefficient([("Z", 1)]) != 0


def test_pure_noise_decay():
    H = Operator(4)
    O = Operator.from_pauli_dict({"X111": 1.0, "XZ11": 1.0})
    eps = 0.3
    norms = []
    tr = evolve_autocorrelation(H, O, EvolveConfig(dt=0.1, t_max=1, epsilon=eps),
                                on_step=lambda k, X: norms.append(X.norm_lanczos()))
    assert np.all(np.diff(norms) <= 0)
    expected = (np.exp(-eps * tr.times) + np.exp(-2 * eps * tr.times)) / 2
    assert np.allclose(tr.S, expected, rtol=1e-12)


def test_two_point_initial_delta():
    H = xxz_nnn(8)
    tr = evolve_two_point(H, 3, EvolveConfig(dt=0.05, t_max=0.5), range(1, 9))
    assert np.array_equal(tr.profile[0], np.eye(8)[2])
    assert np.allclose(tr.S, tr.profile[:, 2])


def test_sum_rule_and_dense_noisy():
    n, eps, dt, steps = 6, 0.1, 0.01, 100
    H = xxz_nnn(n)
    cfg = EvolveConfig(dt=dt, t_max=dt * steps, epsilon=eps)
    tr = evolve_two_point(H, 1, cfg, range(1, n + 1))
    # total magnetisation is conserved by H and loses exp(-eps dt) per step to noise
    assert np.allclose(tr.profile.sum(axis=1), tr.n_t, atol=1e-10)
    mats = dense_noisy_evolution(H, Z(n, 1), dt, steps, eps * dt)
    dense_profile = [dense_trace_normalized(mats[-1] @ to_dense(Z(n, i))) for i in range(1, n + 1)]
    assert np.allclose(tr.profile[-1], dense_profile, atol=1e-6)


def test_abort_flag():
    H = xx_chain(4)
    tr = evolve_autocorrelation(H, Z(4, 1), EvolveConfig(dt=0.1, t_max=1),
                                on_step=lambda k, O: k < 3)
    assert not tr.completed and len(tr.S) == 3


def test_profile_variance_minimum_image():
    tr = evolve_two_point(Operator(6), 1, EvolveConfig(dt=0.1, t_max=0.1), range(1, 7))
    tr.profile = np.array([[0, 0.5, 0, 0, 0, 0.5]] * 2, dtype=complex)
    assert np.allclose(profile_variance(tr, 1, 6), 1.0)


@pytest.mark.slow
def test_xxz_nnn_trim_convergence():
    H = xxz_nnn(12)
    cfg = dict(dt=0.05, t_max=4, epsilon=0.05)
    small = evolve_autocorrelation(H, Z(12, 1), EvolveConfig(M=2 ** 12, **cfg))
    large = evolve_autocorrelation(H, Z(12, 1), EvolveConfig(M=2 ** 14, **cfg))
    S_small, S_large = small.S.real, large.S.real
    assert np.all(np.abs(S_small - S_large) <= 0.1 * np.abs(S_large))
    after = S_small[small.times >= 1]
    assert np.all(np.diff(after) <= 0)
