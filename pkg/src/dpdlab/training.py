"""Indirect-learning training of the predistorter coefficients.

The loop: predistort the excitation with the current coefficients, run the
amplifier bank, scale each output by its inverse small-signal gain, fit a
postdistorter on the scaled outputs with a recursive prediction-error
estimator, and copy the fit back into the predistorter. Copies happen once
per block of `block_len` samples; `block_len=1` reproduces a strictly
sample-by-sample loop.

Five trainers share this skeleton:

- full:           one independent recursion branch per amplifier.
- single:         one branch fed by the average of all scaled outputs; the
                  one predistorted signal drives every amplifier.
- grouped-avg:    the full recursion plus, every sample, an average-and-
                  replicate projection onto the shared-coefficient structure.
- grouped-block:  one branch per amplifier subgroup, sized by the regrouped
                  layout, updating the shared vector directly.
- grouped-sweep:  branches of full length that alternate between the
                  gathered coefficient sets, one sweep operator at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from dpdlab import kernels
from dpdlab.errors import DivergenceError, InvalidConfigError
from dpdlab.gmp import GmpConfig, basis_matrix, build_basis_vector
from dpdlab.pa import PaBank, apply_bank, bank_feedback
from dpdlab.structures import FULL, GROUPED, CoeffVec, GroupingScheme
from dpdlab.waveform import ComplexSignal

ALGORITHMS = ("full", "single", "grouped-avg", "grouped-block", "grouped-sweep")
DIVERGENCE_FACTOR = 10.0


@dataclass(frozen=True)
class RpemHyper:
    """Estimator constants: forgetting growth, initial forgetting, P scale."""

    rho: float = 0.95
    lambda0: float = 0.99
    mu: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise InvalidConfigError("rho must lie in (0, 1)")
        if not 0.0 < self.lambda0 <= 1.0:
            raise InvalidConfigError("lambda0 must lie in (0, 1]")
        if self.mu <= 0.0:
            raise InvalidConfigError("mu must be positive")


@dataclass
class RpemBranchState:
    """One branch of the recursion: covariance, forgetting factor, estimate."""

    P: np.ndarray
    xi: float
    coeffs: np.ndarray

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=complex)
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        n = self.coeffs.size
        if self.P.shape != (n, n):
            raise InvalidConfigError("covariance must be square and match the branch")
        if np.max(np.abs(self.P - self.P.conj().T)) > 1e-10:
            raise InvalidConfigError("covariance must be Hermitian")
        if np.any(np.real(np.diag(self.P)) <= 0):
            raise InvalidConfigError("covariance diagonal must be positive")
        if not 0.0 < self.xi <= 1.0:
            raise InvalidConfigError("forgetting factor must lie in (0, 1]")


def rpem_step(
    state: RpemBranchState, psi_prime, e: complex, hyper: RpemHyper
) -> RpemBranchState:
    """One literal recursion update for a single branch.

    The caller supplies the prediction error e = x - x_tilde. The innovation
    power Z is a real scalar, so nothing here inverts a matrix.
    """
    psi = np.asarray(psi_prime, dtype=complex)
    if not (np.all(np.isfinite(psi.view(float))) and np.isfinite(complex(e))):
        raise FloatingPointError("non-finite recursion inputs")
    xi = hyper.rho * state.xi + 1.0 - hyper.rho
    P = state.P
    Z = float(np.real(psi @ P @ np.conj(psi))) + xi
    if Z <= 0.0:
        raise FloatingPointError("nonpositive innovation power; recursion broke down")
    P_new = (P - np.outer(P @ np.conj(psi), psi @ P) / Z) / xi
    P_new = (P_new + P_new.conj().T) / 2.0
    coeffs = state.coeffs + P_new @ np.conj(psi) * e
    return RpemBranchState(P=P_new, xi=xi, coeffs=coeffs)


def postdistort(coeffs, y_prime, config: GmpConfig, n: int = None) -> complex:
    """Postdistorter output at sample n of a scaled-output window."""
    y_prime = np.asarray(y_prime, dtype=complex)
    if n is None:
        n = y_prime.size - 1
    psi = build_basis_vector(y_prime, n, config)
    return complex(np.asarray(coeffs, dtype=complex) @ psi)


def bypass_coeffs(config: GmpConfig) -> np.ndarray:
    """Start the estimate as a pass-through on the most linear active term.

    A zero start would make the first predistorted signal identically zero
    and stall the loop; instead the active term with the lowest (order,
    delay) gets coefficient one.
    """
    pm = [config.index_to_pm(idx) for idx in config.dominance]
    best = min(range(len(pm)), key=lambda i: pm[i])
    out = np.zeros(config.num_terms, dtype=complex)
    out[best] = 1.0
    return out


def shared_bypass_coeffs(config: GmpConfig, scheme: GroupingScheme) -> np.ndarray:
    """Grouped-layout bypass start: every slot of the bypass term gets one."""
    per_term = bypass_coeffs(config)
    term, _, _ = scheme.shared_slots()
    return per_term[term].astype(complex)


def convergence_check(history, tol: float, window: int) -> bool:
    """True once the last `window` coefficient deltas all sit below tol."""
    if len(history) < window:
        return False
    return bool(np.max(history[-window:]) < tol)


@dataclass
class TrainRun:
    """Training loop configuration plus the recorded trajectory."""

    algorithm: str
    hyper: RpemHyper = field(default_factory=RpemHyper)
    scheme: GroupingScheme = None
    block_len: int = 4096
    max_iters: int = 64
    convergence_tol: float = 1e-5
    window: int = 5
    update_period: int = 1
    feedback_noise_db: float = None
    noise_seed: int = 0
    error_history: list = field(default_factory=list)  # per-iter per-branch mean |e|
    delta_history: list = field(default_factory=list)  # per-iter relative coeff delta

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm.startswith("grouped") and self.scheme is None:
            raise InvalidConfigError(f"{self.algorithm} needs a grouping scheme")
        if self.block_len < 1 or self.max_iters < 1:
            raise InvalidConfigError("block_len and max_iters must be positive")
        if self.update_period < 1:
            raise InvalidConfigError("update_period must be >= 1")
        if self.convergence_tol <= 0:
            raise InvalidConfigError("convergence_tol must be positive")


@dataclass
class TrainResult:
    coeffs: CoeffVec
    run: TrainRun
    iterations: int
    converged: bool


class _Stream:
    """Blockwise pass over the excitation with continuous feedback history.

    The forward basis depends only on the excitation, so it is computed once;
    after the first pass its startup rows (zero history) are replaced by
    wrapped-history rows, matching a continuously running system on the
    periodic record.
    """

    def __init__(self, signal: ComplexSignal, config: GmpConfig, branches: int,
                 noise_db=None, noise_seed=0):
        self.samples = signal.samples
        self.config = config
        self.depth = config.memory - 1
        self.fwd = basis_matrix(self.samples, config)
        self.pos = 0
        self.global_n = 0
        self.fb_hist = np.zeros((branches, self.depth), dtype=complex)
        self.noise_db = noise_db
        self.noise_rng = np.random.default_rng(noise_seed)

    def next_forward(self, block_len: int):
        n = self.samples.size
        if self.pos >= n:
            self.pos = 0
            if self.depth:
                head = basis_matrix(
                    self.samples[: self.depth],
                    self.config,
                    history=self.samples[-self.depth :],
                )
                self.fwd[: self.depth] = head
        take = min(block_len, n - self.pos)
        blk = self.fwd[self.pos : self.pos + take]
        self.pos += take
        n0 = self.global_n
        self.global_n += take
        return blk, n0

    def feedback_basis(self, Yp: np.ndarray) -> np.ndarray:
        """Per-branch basis matrices of the scaled outputs, (nb, B, Q)."""
        if self.noise_db is not None:
            power = np.mean(np.abs(Yp) ** 2)
            sigma = np.sqrt(power * 10.0 ** (self.noise_db / 10.0) / 2.0)
            Yp = Yp + sigma * (
                self.noise_rng.standard_normal(Yp.shape)
                + 1j * self.noise_rng.standard_normal(Yp.shape)
            )
        nb = Yp.shape[1]
        out = np.empty((nb, Yp.shape[0], self.config.num_terms), dtype=complex)
        for b in range(nb):
            out[b] = basis_matrix(Yp[:, b], self.config, history=self.fb_hist[b])
            if self.depth:
                self.fb_hist[b] = Yp[-self.depth :, b]
        return out


BASELINE_SAMPLES = 2048


def _record_iteration(run: TrainRun, err_sums, block_len, before, after) -> bool:
    """Append telemetry; check divergence and convergence. Returns converged."""
    mean_err = np.asarray(err_sums) / block_len
    scale = max(float(np.max(np.abs(after))), 1e-300)
    delta = float(np.max(np.abs(after - before))) / scale
    run.error_history.append(mean_err)
    run.delta_history.append(delta)
    # The divergence baseline is the mean error over a warmup stretch, so
    # tiny blocks (down to single samples) still give a meaningful plateau.
    warmup_iters = max(1, -(-BASELINE_SAMPLES // block_len))
    if len(run.error_history) > warmup_iters:
        baseline = float(np.mean(run.error_history[:warmup_iters]))
        level = float(np.mean(mean_err))
        if baseline > 0.0 and level > DIVERGENCE_FACTOR * baseline:
            raise DivergenceError(
                f"training error {level:.3e} exceeds {DIVERGENCE_FACTOR}x the "
                f"initial level {baseline:.3e}",
                history=run.error_history,
            )
    return convergence_check(run.delta_history, run.convergence_tol, run.window)


def _init_state(hyper: RpemHyper, branches: int, size: int):
    P = np.tile(hyper.mu * np.eye(size, dtype=complex), (branches, 1, 1))
    xi = np.full(branches, hyper.lambda0)
    return P, xi


def train_full(signal, bank: PaBank, config: GmpConfig, hyper: RpemHyper,
               run: TrainRun) -> TrainResult:
    """Independent per-amplifier coefficients (best, most expensive)."""
    S, Q = bank.size, config.num_terms
    coeffs = np.tile(bypass_coeffs(config), (S, 1))
    trained = coeffs.copy()
    P, xi = _init_state(hyper, S, Q)
    stream = _Stream(signal, config, S, run.feedback_noise_db, run.noise_seed)

    converged = False
    it = 0
    for it in range(1, run.max_iters + 1):
        fwd, _ = stream.next_forward(run.block_len)
        X = fwd @ coeffs.T
        Yp = bank_feedback(apply_bank(X, bank), bank)
        basis = stream.feedback_basis(Yp)
        err = np.zeros(S)
        before = trained.copy()
        kernels.rpem_branches(X, basis, trained, P, xi, hyper.rho, err)
        coeffs = trained.copy()
        if _record_iteration(run, err, len(fwd), before, trained):
            converged = True
            break
    vec = CoeffVec(shape=FULL, data=coeffs.ravel().copy(), S=S, Q=Q)
    return TrainResult(coeffs=vec, run=run, iterations=it, converged=converged)


def train_single(signal, bank: PaBank, config: GmpConfig, hyper: RpemHyper,
                 run: TrainRun) -> TrainResult:
    """One shared coefficient set fed back from the averaged scaled output."""
    S, Q = bank.size, config.num_terms
    coeffs = bypass_coeffs(config)[None, :].copy()
    trained = coeffs.copy()
    P, xi = _init_state(hyper, 1, Q)
    stream = _Stream(signal, config, 1, run.feedback_noise_db, run.noise_seed)

    converged = False
    it = 0
    for it in range(1, run.max_iters + 1):
        fwd, _ = stream.next_forward(run.block_len)
        x = fwd @ coeffs[0]
        X = np.tile(x[:, None], (1, S))
        Yp = bank_feedback(apply_bank(X, bank), bank)
        basis = stream.feedback_basis(Yp.mean(axis=1, keepdims=True))
        err = np.zeros(1)
        before = trained.copy()
        kernels.rpem_branches(x[:, None], basis, trained, P, xi, hyper.rho, err)
        coeffs = trained.copy()
        if _record_iteration(run, err, len(fwd), before, trained):
            converged = True
            break
    vec = CoeffVec(shape=FULL, data=coeffs.ravel().copy(), S=1, Q=Q)
    return TrainResult(coeffs=vec, run=run, iterations=it, converged=converged)


def train_grouped_avg(signal, bank: PaBank, config: GmpConfig, hyper: RpemHyper,
                      run: TrainRun) -> TrainResult:
    """Full-structure recursion projected onto the shared layout each sample."""
    scheme = run.scheme
    S, Q = bank.size, config.num_terms
    _check_scheme(scheme, bank, config)
    coeffs = shared_bypass_coeffs(config, scheme)[scheme.expand_map()].copy()
    trained = coeffs.copy()
    P, xi = _init_state(hyper, S, Q)
    stream = _Stream(signal, config, S, run.feedback_noise_db, run.noise_seed)
    term, l0, cnt = scheme.shared_slots()
    ff_col = scheme.expand_map()

    converged = False
    it = 0
    for it in range(1, run.max_iters + 1):
        fwd, _ = stream.next_forward(run.block_len)
        X = fwd @ coeffs.T
        Yp = bank_feedback(apply_bank(X, bank), bank)
        basis = stream.feedback_basis(Yp)
        err = np.zeros(S)
        before = trained.copy()
        kernels.rpem_branches_projected(
            X, basis, trained, P, xi, hyper.rho, term, l0, cnt, ff_col, err
        )
        coeffs = trained.copy()
        if _record_iteration(run, err, len(fwd), before, trained):
            converged = True
            break
    shared = trained[l0, term].copy()  # replicas are exactly equal after projection
    vec = CoeffVec(shape=GROUPED, data=shared, S=S, Q=Q, scheme=scheme)
    return TrainResult(coeffs=vec, run=run, iterations=it, converged=converged)


def train_grouped_block(signal, bank: PaBank, config: GmpConfig, hyper: RpemHyper,
                        run: TrainRun) -> TrainResult:
    """Per-subgroup branches over the regrouped shared vector."""
    scheme = run.scheme
    S, Q = bank.size, config.num_terms
    _check_scheme(scheme, bank, config)
    prime_src = scheme.regroup_order()
    br_off = scheme.regroup_offsets()
    sizes = np.diff(br_off)
    p_off = np.concatenate([[0], np.cumsum(sizes**2)]).astype(np.intp)
    P_flat = np.zeros(int(p_off[-1]), dtype=complex)
    for b, J in enumerate(sizes):
        P_flat[p_off[b] : p_off[b + 1]] = (hyper.mu * np.eye(int(J))).ravel()
    xi = np.full(scheme.subgroups, hyper.lambda0)

    term, l0, cnt = scheme.shared_slots()
    prime_q = term[prime_src]
    prime_l0 = l0[prime_src]
    prime_cnt = cnt[prime_src]
    bar_to_prime = np.empty(scheme.num_shared, dtype=np.intp)
    bar_to_prime[prime_src] = np.arange(scheme.num_shared)
    ff_prime = bar_to_prime[scheme.expand_map()].copy()

    cp = shared_bypass_coeffs(config, scheme)[prime_src].copy()
    stream = _Stream(signal, config, S, run.feedback_noise_db, run.noise_seed)

    converged = False
    it = 0
    for it in range(1, run.max_iters + 1):
        fwd, _ = stream.next_forward(run.block_len)
        X = fwd @ cp[ff_prime].T
        Yp = bank_feedback(apply_bank(X, bank), bank)
        basis = stream.feedback_basis(Yp)
        err = np.zeros(S)
        before = cp.copy()
        kernels.rpem_subgroups(
            X, basis, cp, P_flat, p_off, br_off, xi, hyper.rho,
            prime_q, prime_l0, prime_cnt, ff_prime, err,
        )
        if _record_iteration(run, err, len(fwd), before, cp):
            converged = True
            break
    shared = np.empty(scheme.num_shared, dtype=complex)
    shared[prime_src] = cp
    vec = CoeffVec(shape=GROUPED, data=shared, S=S, Q=Q, scheme=scheme)
    return TrainResult(coeffs=vec, run=run, iterations=it, converged=converged)


def train_grouped_sweep(signal, bank: PaBank, config: GmpConfig, hyper: RpemHyper,
                        run: TrainRun) -> TrainResult:
    """Alternating sweeps tying the shared tail to every distinct set in turn."""
    scheme = run.scheme
    S, Q = bank.size, config.num_terms
    _check_scheme(scheme, bank, config)
    gather = scheme.sweep_gather()
    n_ops, T1 = gather.shape[0], gather.shape[1]
    P4 = np.tile(hyper.mu * np.eye(Q, dtype=complex), (n_ops, T1, 1, 1))
    xi4 = np.full((n_ops, T1), hyper.lambda0)
    term, l0, cnt = scheme.shared_slots()
    ff_col = scheme.expand_map()
    cbar = shared_bypass_coeffs(config, scheme).copy()
    stream = _Stream(signal, config, S, run.feedback_noise_db, run.noise_seed)

    converged = False
    it = 0
    for it in range(1, run.max_iters + 1):
        fwd, n0 = stream.next_forward(run.block_len)
        X = fwd @ cbar[ff_col].T
        Yp = bank_feedback(apply_bank(X, bank), bank)
        basis = stream.feedback_basis(Yp)
        err = np.zeros(S)
        before = cbar.copy()
        kernels.rpem_sweep(
            X, basis, cbar, P4, xi4, hyper.rho, term, l0, cnt,
            gather, ff_col, n0, run.update_period, err,
        )
        if _record_iteration(run, err, len(fwd), before, cbar):
            converged = True
            break
    vec = CoeffVec(shape=GROUPED, data=cbar.copy(), S=S, Q=Q, scheme=scheme)
    return TrainResult(coeffs=vec, run=run, iterations=it, converged=converged)


_TRAINERS = {
    "full": train_full,
    "single": train_single,
    "grouped-avg": train_grouped_avg,
    "grouped-block": train_grouped_block,
    "grouped-sweep": train_grouped_sweep,
}


def train(signal, bank, config, hyper, run: TrainRun) -> TrainResult:
    return _TRAINERS[run.algorithm](signal, bank, config, hyper, run)


def _check_scheme(scheme: GroupingScheme, bank: PaBank, config: GmpConfig):
    if scheme.S != bank.size:
        raise InvalidConfigError("scheme amplifier count does not match the bank")
    if scheme.num_terms != config.num_terms:
        raise InvalidConfigError("scheme term count does not match the basis config")


def predistorted_pass(signal, bank: PaBank, config: GmpConfig, vec: CoeffVec):
    """Clean evaluation pass: (X, Yp) for trained coefficients, no adaptation."""
    fwd = basis_matrix(signal.samples, config)
    if vec.shape == FULL and vec.S == bank.size:
        X = fwd @ vec.matrix().T
    elif vec.shape == FULL and vec.S == 1:
        X = np.tile((fwd @ vec.data)[:, None], (1, bank.size))
    elif vec.shape == GROUPED:
        X = fwd @ vec.data[vec.scheme.expand_map()].T
    else:
        raise InvalidConfigError(f"cannot evaluate a {vec.shape} vector directly")
    Yp = bank_feedback(apply_bank(X, bank), bank)
    return X, Yp
