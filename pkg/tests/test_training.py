from fractions import Fraction

import numpy as np
import pytest

from dpdlab.errors import DivergenceError, InvalidConfigError
from dpdlab.gmp import GmpConfig, basis_matrix
from dpdlab.pa import SalehParams, make_bank
from dpdlab.structures import build_scheme, ff_predistort
from dpdlab.training import (
    RpemBranchState,
    RpemHyper,
    TrainRun,
    _record_iteration,
    bypass_coeffs,
    convergence_check,
    postdistort,
    predistorted_pass,
    rpem_step,
    train,
    train_full,
    train_grouped_avg,
    train_grouped_block,
    train_grouped_sweep,
    train_single,
)
from dpdlab.waveform import generate_multitone, set_drive_level

HYPER = RpemHyper(rho=0.95, lambda0=0.99, mu=0.2)


def _state(Q=1, mu=0.2, lam=0.99):
    return RpemBranchState(
        P=mu * np.eye(Q, dtype=complex), xi=lam, coeffs=np.zeros(Q, dtype=complex)
    )


def test_rpem_step_scalar_hand_recursion():
    # independent hand evaluation of the scalar recursion
    mu, lam, rho = 0.2, 0.99, 0.95
    xi1 = rho * lam + 1.0 - rho
    Z = 1.0 * mu * 1.0 + xi1
    P1 = (mu - mu * (1.0 / Z) * mu) / xi1
    e = 0.3 - 0.4j
    out = rpem_step(_state(), np.array([1.0 + 0j]), e, HYPER)
    assert abs(out.xi - xi1) < 1e-15
    assert abs(out.xi - 0.9905) < 1e-12
    assert abs(Z - 1.1905) < 1e-12
    assert abs(out.P[0, 0] - P1) < 1e-15
    assert round(float(np.real(out.P[0, 0])), 5) == 0.16800
    assert abs(out.coeffs[0] - P1 * e) < 1e-15


def test_rpem_step_zero_error():
    state = RpemBranchState(
        P=0.2 * np.eye(3, dtype=complex), xi=0.99,
        coeffs=np.array([1.0, -2j, 0.5 + 0.5j]),
    )
    psi = np.array([0.3, 1.0 - 1j, -0.2j])
    out = rpem_step(state, psi, 0.0, HYPER)
    assert np.array_equal(out.coeffs, state.coeffs)
    assert out.xi != state.xi
    assert not np.array_equal(out.P, state.P)


def test_rpem_step_xi_fixed_point():
    state = RpemBranchState(P=0.2 * np.eye(1, dtype=complex), xi=1.0,
                            coeffs=np.zeros(1, complex))
    out = rpem_step(state, np.array([1.0 + 0j]), 0.1, HYPER)
    assert out.xi == 1.0


def test_rpem_step_rejects_nonfinite():
    with pytest.raises(FloatingPointError):
        rpem_step(_state(), np.array([np.nan + 0j]), 0.0, HYPER)
    with pytest.raises(FloatingPointError):
        rpem_step(_state(), np.array([1.0 + 0j]), complex(np.inf, 0), HYPER)


def test_branch_state_validation():
    with pytest.raises(InvalidConfigError):
        RpemBranchState(P=np.array([[0.1, 1.0], [0.0, 0.1]], dtype=complex),
                        xi=0.99, coeffs=np.zeros(2, complex))
    with pytest.raises(InvalidConfigError):
        RpemBranchState(P=-np.eye(2, dtype=complex), xi=0.99, coeffs=np.zeros(2, complex))
    with pytest.raises(InvalidConfigError):
        RpemBranchState(P=np.eye(2, dtype=complex), xi=1.5, coeffs=np.zeros(2, complex))


def test_postdistort():
    cfg = GmpConfig(3, 2, (1, 2, 4))
    y = np.array([0.5 - 0.2j, 1.2 + 0.1j, -0.3 + 0.9j])
    assert postdistort(np.zeros(3, complex), y, cfg) == 0.0
    scalar_cfg = GmpConfig(1, 1, (1,))
    assert postdistort(np.array([2.0 + 0j]), np.array([1.5 + 0j]), scalar_cfg) == 3.0
    # equals the forward predistortion evaluated on the feedback signal
    rng = np.random.default_rng(0)
    coeffs = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    psi = basis_matrix(y, cfg)[-1]
    assert abs(postdistort(coeffs, y, cfg) - ff_predistort(coeffs, psi, 1)[0]) < 1e-14


def test_convergence_check():
    assert convergence_check([0.0] * 5, tol=1e-9, window=5)
    assert not convergence_check([1.0, 2.0, 3.0, 4.0, 5.0], tol=1e-9, window=5)
    assert convergence_check([1.0] * 5, tol=np.inf, window=5)
    assert not convergence_check([0.0] * 4, tol=np.inf, window=5)


def test_divergence_guard():
    run = TrainRun(algorithm="full", block_len=2048, max_iters=4)
    after = np.ones(2, dtype=complex)
    _record_iteration(run, np.array([2048.0]), 2048, after, after)  # level 1.0
    with pytest.raises(DivergenceError) as err:
        _record_iteration(run, np.array([2048.0 * 20]), 2048, after, after)
    assert len(err.value.history) == 2


def test_bypass_picks_most_linear_term():
    cfg = GmpConfig(5, 5, (4, 5, 9, 10, 14, 15, 19, 20, 24, 25),
                    dominance=(4, 5, 14, 15, 19, 20, 24, 25, 9, 10))
    start = bypass_coeffs(cfg)
    assert start[0] == 1.0 and np.count_nonzero(start) == 1  # index 4 = (p0, m3)
    full = GmpConfig(3, 2, tuple(range(1, 7)))
    start = bypass_coeffs(full)
    assert start[0] == 1.0  # index 1 = (p0, m0)


def _tiny_setup(S=2, P=3, M=2, pa_seed=0, sig_seed=0, n=512, linear=False):
    cfg = GmpConfig(P, M, tuple(range(1, P * M + 1)))
    sig = generate_multitone(n, 8, 2.0, 16.0, seed=sig_seed)
    if linear:
        # nearly ideal device; keep the drive at unit scale, a vanishing
        # beta_a would push the saturation point (and the drive) to 1/sqrt(beta_a)
        params = [SalehParams(alpha_a=1.0, beta_a=1e-9, alpha_phi=0.0, beta_phi=9.0)] * S
    else:
        from dpdlab.pa import sample_pa_params

        params = sample_pa_params(S, seed=pa_seed)
        sig = set_drive_level(sig, 7.0, max(params, key=lambda p: p.beta_a))
    bank = make_bank(params)
    return sig, bank, cfg


def test_linear_pa_converges_to_identity():
    sig, bank, cfg = _tiny_setup(S=2, linear=True, n=2048)
    run = TrainRun(algorithm="full", block_len=256, max_iters=8)
    res = train_full(sig, bank, cfg, HYPER, run)
    coeffs = res.coeffs.matrix()
    for l in range(2):
        assert abs(coeffs[l, 0] - 1.0) < 1e-3
        assert np.max(np.abs(coeffs[l, 1:])) < 1e-3


def test_identical_pas_give_identical_branches():
    sig, bank, cfg = _tiny_setup(S=3, linear=True, n=1024)
    run = TrainRun(algorithm="full", block_len=128, max_iters=6)
    res = train_full(sig, bank, cfg, HYPER, run)
    coeffs = res.coeffs.matrix()
    assert np.max(np.abs(coeffs[0] - coeffs[1])) < 1e-9
    assert np.max(np.abs(coeffs[0] - coeffs[2])) < 1e-9


def test_single_with_one_pa_equals_full():
    sig, bank, cfg = _tiny_setup(S=1, pa_seed=3, n=1024)
    run_a = TrainRun(algorithm="full", block_len=128, max_iters=6)
    run_b = TrainRun(algorithm="single", block_len=128, max_iters=6)
    full = train_full(sig, bank, cfg, HYPER, run_a)
    single = train_single(sig, bank, cfg, HYPER, run_b)
    assert np.max(np.abs(full.coeffs.data - single.coeffs.data)) < 1e-12


def test_no_sharing_scheme_matches_full_trajectory():
    sig, bank, cfg = _tiny_setup(S=2, pa_seed=5, n=1024)
    scheme = build_scheme(S=2, nu=0, r=Fraction(1, 2), n_list=(cfg.num_terms,))
    assert scheme.num_shared == cfg.num_terms * 2
    run_a = TrainRun(algorithm="full", block_len=128, max_iters=6)
    run_b = TrainRun(algorithm="grouped-avg", scheme=scheme, block_len=128, max_iters=6)
    full = train_full(sig, bank, cfg, HYPER, run_a)
    avg = train_grouped_avg(sig, bank, cfg, HYPER, run_b)
    expanded = avg.coeffs.data[scheme.expand_map()]
    assert np.max(np.abs(expanded - full.coeffs.matrix())) < 1e-12
    for e_full, e_avg in zip(run_a.error_history, run_b.error_history):
        assert np.max(np.abs(e_full - e_avg)) < 1e-12


def test_single_group_sweep_matches_block_trajectory():
    sig, bank, cfg = _tiny_setup(S=4, pa_seed=6, n=1024)
    scheme = build_scheme(S=4, nu=1, r=Fraction(1, 2), n_list=(cfg.num_terms,))
    assert scheme.g == 1 and scheme.num_ops == 1
    run_a = TrainRun(algorithm="grouped-block", scheme=scheme, block_len=128, max_iters=6)
    run_b = TrainRun(algorithm="grouped-sweep", scheme=scheme, block_len=128, max_iters=6)
    block = train_grouped_block(sig, bank, cfg, HYPER, run_a)
    sweep = train_grouped_sweep(sig, bank, cfg, HYPER, run_b)
    assert np.max(np.abs(block.coeffs.data - sweep.coeffs.data)) < 1e-12


def test_grouped_avg_enforces_sharing():
    sig, bank, cfg = _tiny_setup(S=4, pa_seed=7, n=1024)
    scheme = build_scheme(S=4, nu=1, r=Fraction(1, 2), n_list=(3, 3))
    run = TrainRun(algorithm="grouped-avg", scheme=scheme, block_len=128, max_iters=6)
    res = train_grouped_avg(sig, bank, cfg, HYPER, run)
    assert res.coeffs.shape == "grouped"
    assert res.coeffs.data.shape == (scheme.num_shared,)


def test_sweep_cycle_touches_every_slot():
    scheme = build_scheme(S=8, nu=1, r=Fraction(1, 2), n_list=(4, 6))
    gathered = set(scheme.sweep_gather().ravel().tolist())
    assert gathered == set(range(scheme.num_shared))


def test_train_dispatch_and_validation():
    sig, bank, cfg = _tiny_setup(S=2, pa_seed=8, n=512)
    with pytest.raises(InvalidConfigError):
        TrainRun(algorithm="nope")
    with pytest.raises(InvalidConfigError):
        TrainRun(algorithm="grouped-avg")  # missing scheme
    run = TrainRun(algorithm="full", block_len=128, max_iters=2)
    res = train(sig, bank, cfg, HYPER, run)
    assert res.iterations == 2
    assert len(run.error_history) == 2


def test_predistorted_pass_shapes():
    sig, bank, cfg = _tiny_setup(S=2, pa_seed=9, n=512)
    run = TrainRun(algorithm="full", block_len=128, max_iters=2)
    res = train_full(sig, bank, cfg, HYPER, run)
    X, Yp = predistorted_pass(sig, bank, cfg, res.coeffs)
    assert X.shape == Yp.shape == (512, 2)


def test_error_decays_during_training():
    sig, bank, cfg = _tiny_setup(S=2, pa_seed=10, n=4096)
    run = TrainRun(algorithm="full", block_len=256, max_iters=16)
    train_full(sig, bank, cfg, HYPER, run)
    first = np.mean([e.mean() for e in run.error_history[:2]])
    last = np.mean([e.mean() for e in run.error_history[-2:]])
    assert last < first


def test_feedback_noise_hook():
    sig, bank, cfg = _tiny_setup(S=2, pa_seed=11, n=2048)
    clean = TrainRun(algorithm="full", block_len=256, max_iters=6)
    noisy = TrainRun(algorithm="full", block_len=256, max_iters=6,
                     feedback_noise_db=-30.0, noise_seed=3)
    noisy_again = TrainRun(algorithm="full", block_len=256, max_iters=6,
                           feedback_noise_db=-30.0, noise_seed=3)
    a = train_full(sig, bank, cfg, HYPER, clean)
    b = train_full(sig, bank, cfg, HYPER, noisy)
    c = train_full(sig, bank, cfg, HYPER, noisy_again)
    assert not np.array_equal(a.coeffs.data, b.coeffs.data)
    assert np.array_equal(b.coeffs.data, c.coeffs.data)
