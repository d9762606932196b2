"""Interference-aware alignment design via MMSE block-coordinate descent.

When perfect nulling is impossible or wasteful, the precoders are chosen to
maximize the achievable rate of the aligned channel with residual
inter-path interference treated as colored noise. Within one Doppler
coherence block the residual rotations are constant, so the received
signal collapses to

    y[n] = W^H Hbar Fbar s[n - m_max] + sum_i W^H Gbar[i] Fbar s[n - m_max + i] + noise

with Hbar = [H_1, ..., H_L] and Gbar[i] collecting, per transmit branch,
the path whose delay differs by exactly i taps (phase-rotated by the
branch/path Doppler difference over the block). The rate of that channel
is maximized by alternating closed-form updates of the receive filter, a
weighting matrix and the stacked precoder (a weighted-MMSE scheme); each
step is a coordinate ascent so the rate trace never decreases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, Timebase
from .errors import ContractViolationError, FeasibilityError, NumericalError
from .linalg import eig_hermitian
from .zf import FeasibilityVerdict, zf_feasibility, zf_spatial_design

POWER_BISECT_REL_TOL = 1e-8
RATE_EIGENVALUE_FLOOR = 1e-30


@dataclass
class GroupedChannels:
    """Aligned desired channel plus ISI channels grouped by delay difference."""

    stacked_channel: np.ndarray        # Hbar, shape (M_r, L * M_t)
    isi_channels: dict[int, np.ndarray]  # delay offset -> Gbar[i], same shape
    block_index: int
    num_paths: int
    num_tx: int

    def __post_init__(self) -> None:
        self.stacked_channel = np.asarray(self.stacked_channel, dtype=np.complex128)
        if self.stacked_channel.shape[1] != self.num_paths * self.num_tx:
            raise ContractViolationError("stacked channel width must be L * M_t")
        if 0 in self.isi_channels:
            raise ContractViolationError("delay offset 0 belongs to the desired channel")

    @property
    def num_rx(self) -> int:
        return int(self.stacked_channel.shape[0])


@dataclass
class BcdState:
    """Converged (or truncated) state of the alternating optimization."""

    precoder: np.ndarray       # Fbar, shape (L * M_t, N_s)
    combiner: np.ndarray       # W, shape (M_r, N_s)
    auxiliary: np.ndarray      # weighting matrix Q, shape (N_s, N_s)
    rate_trace: list[float]
    converged: bool
    n_iterations: int


def group_delay_differences(
    realization: ChannelRealization, timebase: Timebase, block_index: int
) -> GroupedChannels:
    """Regroup the per-path channels by delay difference for one block.

    Branch l' of Gbar[i] holds H_l rotated by the Doppler difference
    nu_l - nu_l' accumulated over block_index coherence blocks, where l is
    the (unique, delays being distinct) path whose delay differs from path
    l' by i taps. Offsets that no path pair produces are simply absent
    from the map; with one path the map is empty.
    """
    if block_index < 0:
        raise ContractViolationError("block_index must be non-negative")
    paths = realization.path_set
    num_paths = paths.num_paths
    num_rx, num_tx = realization.num_rx, realization.num_tx
    stacked = np.concatenate([realization.matrices[l] for l in range(num_paths)], axis=1)
    isi: dict[int, np.ndarray] = {}
    ts = timebase.symbol_duration_s
    block_s = block_index * timebase.samples_per_coherence * ts
    delays = paths.delay_taps
    for lp in range(num_paths):
        for l in range(num_paths):
            if l == lp:
                continue
            offset = int(delays[lp] - delays[l])
            dnu = paths.doppler_hz[l] - paths.doppler_hz[lp]
            phase = np.exp(2j * np.pi * dnu * block_s)
            block = isi.setdefault(
                offset, np.zeros((num_rx, num_paths * num_tx), dtype=np.complex128)
            )
            block[:, lp * num_tx : (lp + 1) * num_tx] = realization.matrices[l] * phase
    return GroupedChannels(
        stacked_channel=stacked,
        isi_channels=isi,
        block_index=block_index,
        num_paths=num_paths,
        num_tx=num_tx,
    )


def interference_covariance(
    grouped: GroupedChannels, precoder: np.ndarray, noise_var: float
) -> np.ndarray:
    """C = sum_i Gbar[i] Fbar Fbar^H Gbar[i]^H + noise_var * I."""
    num_rx = grouped.num_rx
    cov = noise_var * np.eye(num_rx, dtype=np.complex128)
    for block in grouped.isi_channels.values():
        gf = block @ precoder
        cov += gf @ gf.conj().T
    return cov


def ddam_rate(
    grouped: GroupedChannels,
    precoder: np.ndarray,
    combiner: np.ndarray,
    noise_var: float,
) -> float:
    """Achievable rate with residual ISI treated as colored Gaussian noise.

    log2 det(I + W^H Hbar Fbar Fbar^H Hbar^H W (W^H C W)^{-1}), evaluated
    stably as a difference of two log-determinants.
    """
    f_bar = np.asarray(precoder, dtype=np.complex128)
    w = np.asarray(combiner, dtype=np.complex128)
    if f_bar.shape[0] != grouped.stacked_channel.shape[1]:
        raise ContractViolationError("precoder rows must equal L * M_t")
    if w.shape[0] != grouped.num_rx:
        raise ContractViolationError("combiner rows must equal M_r")
    signal = w.conj().T @ (grouped.stacked_channel @ f_bar)
    cov_w = w.conj().T @ interference_covariance(grouped, f_bar, noise_var) @ w
    sign, logdet_cov = np.linalg.slogdet(cov_w)
    if sign.real <= 0 or not np.isfinite(logdet_cov):
        raise NumericalError("combined noise covariance is singular")
    sign2, logdet_full = np.linalg.slogdet(cov_w + signal @ signal.conj().T)
    if sign2.real <= 0:
        raise NumericalError("rate determinant is not positive")
    return float((logdet_full - logdet_cov) / math.log(2.0))


def mmse_receiver(
    grouped: GroupedChannels, precoder: np.ndarray, noise_var: float
) -> np.ndarray:
    """W = (Hbar Fbar Fbar^H Hbar^H + C)^{-1} Hbar Fbar."""
    f_bar = np.asarray(precoder, dtype=np.complex128)
    a = grouped.stacked_channel @ f_bar
    total = a @ a.conj().T + interference_covariance(grouped, f_bar, noise_var)
    try:
        return np.linalg.solve(total, a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"MMSE receive filter solve failed: {exc}") from exc


def precoder_update(
    grouped: GroupedChannels,
    combiner: np.ndarray,
    auxiliary: np.ndarray,
    total_power: float,
) -> np.ndarray:
    """Power-constrained closed-form precoder for fixed receiver and weights.

    Fbar(beta) = (Hbar^H W Q W^H Hbar + sum_i Gbar[i]^H W Q W^H Gbar[i]
    + beta I)^{-1} Hbar^H W Q, with beta = 0 if the unconstrained solution
    already fits the budget and otherwise bisected so the power constraint
    is met within POWER_BISECT_REL_TOL (complementary slackness).
    """
    if total_power <= 0:
        raise ContractViolationError("total_power must be positive")
    w = np.asarray(combiner, dtype=np.complex128)
    q = np.asarray(auxiliary, dtype=np.complex128)
    q = 0.5 * (q + q.conj().T)
    wqw = w @ q @ w.conj().T
    h_bar = grouped.stacked_channel
    quad = h_bar.conj().T @ wqw @ h_bar
    for block in grouped.isi_channels.values():
        quad += block.conj().T @ wqw @ block
    rhs = h_bar.conj().T @ (w @ q)
    if not np.any(np.abs(rhs) > 0):
        return np.zeros((h_bar.shape[1], w.shape[1]), dtype=np.complex128)
    vals, vecs = eig_hermitian(quad, herm_tol=1e-8)
    vals = np.maximum(vals.real, 0.0)
    proj = vecs.conj().T @ rhs
    row_power = np.sum(np.abs(proj) ** 2, axis=1)

    def power_at(beta: float) -> float:
        denom = vals + beta
        if beta == 0.0:
            # pseudo-inverse behavior on the zero eigenspace
            active = vals > vals.max() * 1e-13 if vals.size else np.zeros(0, bool)
            out = np.zeros_like(row_power)
            out[active] = row_power[active] / (vals[active] ** 2)
            return float(out.sum())
        return float(np.sum(row_power / (denom**2)))

    def precoder_at(beta: float) -> np.ndarray:
        denom = vals + beta
        if beta == 0.0:
            active = vals > vals.max() * 1e-13 if vals.size else np.zeros(0, bool)
            scaled = np.zeros_like(proj)
            scaled[active] = proj[active] / vals[active, None]
            return vecs @ scaled
        return vecs @ (proj / denom[:, None])

    if power_at(0.0) <= total_power:
        return precoder_at(0.0)
    lo, hi = 0.0, float(np.trace(quad).real) / total_power + 1.0
    guard = 0
    while power_at(hi) > total_power:
        hi *= 2.0
        guard += 1
        if guard > 200:
            raise NumericalError("power bisection failed to bracket the budget")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        p = power_at(mid)
        if abs(p - total_power) <= POWER_BISECT_REL_TOL * total_power:
            return precoder_at(mid)
        if p > total_power:
            lo = mid
        else:
            hi = mid
    raise NumericalError("power bisection did not converge")


def _weighted_rate(
    grouped: GroupedChannels, precoder: np.ndarray, noise_var: float
) -> tuple[float, np.ndarray]:
    """Rate at the MMSE receiver plus the matching weight matrix Q.

    Q = I + Fbar^H Hbar^H C^{-1} Hbar Fbar is the inverse MMSE matrix; its
    log-determinant equals the achievable rate, which is what the
    alternating scheme monotonically increases.
    """
    a = grouped.stacked_channel @ precoder
    cov = interference_covariance(grouped, precoder, noise_var)
    try:
        cinv_a = np.linalg.solve(cov, a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"interference covariance solve failed: {exc}") from exc
    q = np.eye(precoder.shape[1], dtype=np.complex128) + a.conj().T @ cinv_a
    q = 0.5 * (q + q.conj().T)
    sign, logdet = np.linalg.slogdet(q)
    if sign.real <= 0:
        raise NumericalError("weight matrix lost positive definiteness")
    return float(logdet / math.log(2.0)), q


def bcd_solve(
    grouped: GroupedChannels,
    total_power: float,
    noise_var: float,
    num_streams: int,
    tol: float = 1e-4,
    max_iters: int = 200,
    init_precoder: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> BcdState:
    """Alternate receiver / weights / precoder until the rate stalls.

    Initialization uses the zero-forcing design when it is feasible for
    the block's dimensions (padding with zero columns if it carries fewer
    active streams), otherwise a random precoder scaled to the power
    budget. Convergence is declared when the fractional rate increase
    drops below tol; the trace of per-iteration rates is returned and is
    non-decreasing up to numerical slack.
    """
    if num_streams < 1:
        raise ContractViolationError("num_streams must be >= 1")
    if max_iters < 1:
        raise ContractViolationError("max_iters must be >= 1")
    dim = grouped.stacked_channel.shape[1]
    if init_precoder is not None:
        f_bar = np.asarray(init_precoder, dtype=np.complex128).copy()
        if f_bar.shape != (dim, num_streams):
            raise ContractViolationError("init_precoder has the wrong shape")
    else:
        f_bar = _default_init(grouped, total_power, noise_var, num_streams, rng)
    power = float(np.sum(np.abs(f_bar) ** 2))
    if power > total_power * (1 + 1e-9):
        f_bar = f_bar * math.sqrt(total_power / power)

    trace: list[float] = []
    converged = False
    combiner = mmse_receiver(grouped, f_bar, noise_var)
    for iteration in range(max_iters):
        rate, q = _weighted_rate(grouped, f_bar, noise_var)
        trace.append(rate)
        if len(trace) >= 2:
            prev = trace[-2]
            if rate - prev <= tol * max(abs(prev), 1e-12):
                converged = True
                break
        f_bar = precoder_update(grouped, combiner, q, total_power)
        combiner = mmse_receiver(grouped, f_bar, noise_var)
    return BcdState(
        precoder=f_bar,
        combiner=combiner,
        auxiliary=q,
        rate_trace=trace,
        converged=converged,
        n_iterations=len(trace),
    )


def _default_init(
    grouped: GroupedChannels,
    total_power: float,
    noise_var: float,
    num_streams: int,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Zero-forcing warm start when feasible, else a scaled random matrix."""
    num_paths, num_tx = grouped.num_paths, grouped.num_tx
    num_rx = grouped.num_rx
    streams = min(num_streams, num_rx)
    verdict = zf_feasibility(num_tx, num_rx, streams, num_paths).verdict
    if verdict == FeasibilityVerdict.FEASIBLE:
        mats = np.stack(
            [
                grouped.stacked_channel[:, l * num_tx : (l + 1) * num_tx]
                for l in range(num_paths)
            ]
        )
        try:
            per_path, result = zf_spatial_design(mats, total_power, noise_var, streams)
        except FeasibilityError:
            per_path, result = None, None
        if per_path is not None and result.n_active_streams > 0:
            f_bar = np.zeros((num_paths * num_tx, num_streams), dtype=np.complex128)
            active = per_path[0].shape[1]
            for l in range(num_paths):
                f_bar[l * num_tx : (l + 1) * num_tx, :active] = per_path[l]
            return f_bar
    gen = rng if rng is not None else np.random.default_rng(0)
    raw = gen.standard_normal((num_paths * num_tx, num_streams)) + 1j * gen.standard_normal(
        (num_paths * num_tx, num_streams)
    )
    return raw * math.sqrt(total_power) / np.linalg.norm(raw)
