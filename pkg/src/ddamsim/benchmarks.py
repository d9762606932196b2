"""Benchmark transceivers: OFDM with inter-carrier interference, OTFS, and
strongest-path beamforming.

These are the schemes the alignment designs are compared against. OFDM is
modeled with the ICI that per-path Doppler causes (no self-cancellation or
windowing tricks), OTFS with integer delay/Doppler taps and one spatial
beam pair refined by alternating top-eigenvector updates, and the
strongest-path scheme beamforms toward the dominant path only, leaving the
remaining multipath as interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .channel import ChannelRealization, PathSet, Timebase, apply_channel, array_response
from .errors import ContractViolationError, NumericalError
from .linalg import DEFAULT_RANK_TOL, eig_hermitian, svd_reduced

# ratio this close to 1 switches the geometric series to its limit value
ICI_GEOMETRIC_GUARD = 1e-12
BEAM_NORM_TOL = 1e-9


# --- OFDM with inter-carrier interference -----------------------------------


@dataclass
class OfdmDesign:
    """Per-subcarrier SVD precoders and combiners.

    precoders[k] is M_t x r_k with squared Frobenius norm equal to the
    power budget (all of it is spent on every subcarrier); combiners[k] is
    M_r x r_k with orthonormal columns. r_k is the numerical rank of the
    subcarrier's desired-channel matrix, optionally capped.
    """

    num_subcarriers: int
    cp_length: int
    total_power: float
    precoders: list[np.ndarray]
    combiners: list[np.ndarray]
    singular_values: list[np.ndarray]

    def __post_init__(self) -> None:
        if self.num_subcarriers < 1 or self.cp_length < 0:
            raise ContractViolationError("need num_subcarriers >= 1 and cp_length >= 0")
        if (
            len(self.precoders) != self.num_subcarriers
            or len(self.combiners) != self.num_subcarriers
        ):
            raise ContractViolationError("one precoder/combiner per subcarrier required")
        for u in self.precoders:
            if u.shape[1] == 0:
                continue
            power = float(np.sum(np.abs(u) ** 2))
            if not math.isclose(power, self.total_power, rel_tol=1e-9):
                raise ContractViolationError("subcarrier precoder violates the power budget")


@dataclass
class OfdmResult:
    """Per-subcarrier SINRs and the effective spectral efficiency."""

    sinr: list[np.ndarray]     # length num_subcarriers, entry k has r_k values
    rate_bps_hz: float
    design: OfdmDesign

    def first_stream_sinr(self) -> np.ndarray:
        """SINR of the strongest stream per subcarrier (0 where rank is 0)."""
        return np.array([float(s[0]) if s.size else 0.0 for s in self.sinr])


def ici_coefficient(
    doppler_hz, symbol_duration_s: float, num_subcarriers: int, delta
) -> np.ndarray:
    """Doppler-induced coupling from subcarrier k onto k + delta.

    Averages exp(j*2*pi*(nu*T_s + delta/K)*n) over one K-sample block; the
    geometric closed form is used except when the ratio is within
    ICI_GEOMETRIC_GUARD of 1, where the sum degenerates to 1. Broadcasts
    over doppler_hz and delta.
    """
    if num_subcarriers < 1:
        raise ContractViolationError("num_subcarriers must be >= 1")
    nu = np.asarray(doppler_hz, dtype=np.float64)
    d = np.asarray(delta, dtype=np.float64)
    shape = np.broadcast_shapes(nu.shape, d.shape)
    ratio = np.atleast_1d(
        np.exp(2j * np.pi * (nu * symbol_duration_s + d / num_subcarriers))
    )
    out = np.ones(ratio.shape, dtype=np.complex128)
    far = np.abs(ratio - 1.0) >= ICI_GEOMETRIC_GUARD
    out[far] = (ratio[far] ** num_subcarriers - 1.0) / (
        num_subcarriers * (ratio[far] - 1.0)
    )
    return out.reshape(shape)


def ofdm_ici_channel(
    realization: ChannelRealization, num_subcarriers: int, delta: int
) -> np.ndarray:
    """Per-path frequency-domain coupling matrices H_l[delta], stacked (L, M_r, M_t).

    H_l[delta] is H_l scaled by the block-averaged Doppler phase; with zero
    Doppler it equals H_l at delta = 0 and vanishes at delta != 0.
    """
    paths = realization.path_set
    coeff = ici_coefficient(
        paths.doppler_hz, realization.symbol_duration_s, num_subcarriers, delta
    )
    return realization.matrices * coeff[:, None, None]


def _rank_one_components(realization: ChannelRealization, rank_tol: float):
    """Split each path matrix into rank-one pieces (a no-op split for ray channels).

    Returns (left, right, parent): H_l = sum over components c with
    parent[c] = l of outer(left[c], right[c].conj()).
    """
    left, right, parent = [], [], []
    for l in range(realization.path_set.num_paths):
        u, s, v = svd_reduced(realization.matrices[l], rank_tol=rank_tol)
        for m in range(s.size):
            left.append(s[m] * u[:, m])
            right.append(v[:, m])
            parent.append(l)
    if not left:
        # an all-zero channel still needs well-formed arrays
        m_r, m_t = realization.num_rx, realization.num_tx
        return (
            np.zeros((0, m_r), dtype=np.complex128),
            np.zeros((0, m_t), dtype=np.complex128),
            np.zeros(0, dtype=np.int64),
        )
    return np.array(left), np.array(right), np.array(parent, dtype=np.int64)


def ofdm_design_and_rate(
    realization: ChannelRealization,
    num_subcarriers: int,
    cp_length: int,
    total_power: float,
    noise_var: float,
    num_streams: int | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> OfdmResult:
    """SVD transceiver per subcarrier plus the resulting SINRs and rate.

    The desired matrix of subcarrier k sums the paths' self-coupled
    channels with their delay phase ramps; its SVD gives the combiner
    (left vectors) and the precoder (right vectors scaled to spend the
    whole budget). ICI from every other subcarrier is treated as noise.
    The rate carries the cyclic-prefix penalty K / (K + N_CP); frames are
    assumed to hold a whole number of OFDM symbols, fractional leftovers
    at the frame edge are not modeled.

    The quadratic ICI sums run over the rank-one components of the path
    matrices, which keeps the cost at K^2 L^2 scalar terms instead of
    K^2 matrix products.
    """
    k_sub = int(num_subcarriers)
    if k_sub < 1:
        raise ContractViolationError("num_subcarriers must be >= 1")
    if cp_length < 0:
        raise ContractViolationError("cp_length must be >= 0")
    if total_power <= 0 or noise_var <= 0:
        raise ContractViolationError("total_power and noise_var must be positive")
    paths = realization.path_set
    ts = realization.symbol_duration_s
    left, right, parent = _rank_one_components(realization, rank_tol)
    n_comp = left.shape[0]
    comp_doppler = paths.doppler_hz[parent]
    comp_delay = paths.delay_taps[parent]

    # coupling coefficients for every offset (periodic in delta with period K)
    offsets = np.arange(k_sub)
    coeff = ici_coefficient(comp_doppler[:, None], ts, k_sub, offsets[None, :])
    k_grid = np.arange(k_sub)
    # e^{-j 2 pi k m_c / K} ramps, one column per component
    ramp = np.exp(-2j * np.pi * np.outer(k_grid, comp_delay) / k_sub)
    desired_weight = ramp * coeff[:, 0][None, :]          # (K, C)

    desired = np.einsum(
        "kc,ca,cb->kab", desired_weight, left, right.conj(), optimize=True
    )

    precoders: list[np.ndarray] = []
    combiners: list[np.ndarray] = []
    sing_values: list[np.ndarray] = []
    ranks = np.zeros(k_sub, dtype=np.int64)
    for k in range(k_sub):
        u, s, v = svd_reduced(desired[k], rank_tol=rank_tol)
        r_k = s.size if num_streams is None else min(s.size, num_streams)
        ranks[k] = r_k
        combiners.append(u[:, :r_k])
        sing_values.append(s[:r_k])
        if r_k:
            precoders.append(v[:, :r_k] * math.sqrt(total_power / r_k))
        else:
            precoders.append(np.zeros((realization.num_tx, 0), dtype=np.complex128))
    r_max = int(ranks.max()) if k_sub else 0

    design = OfdmDesign(
        num_subcarriers=k_sub,
        cp_length=int(cp_length),
        total_power=total_power,
        precoders=precoders,
        combiners=combiners,
        singular_values=sing_values,
    )

    if n_comp == 0 or r_max == 0:
        empty = [np.zeros(0) for _ in range(k_sub)]
        return OfdmResult(sinr=empty, rate_bps_hz=0.0, design=design)

    # receive- and transmit-side projections of every rank-one component
    u_proj = np.zeros((k_sub, r_max, n_comp), dtype=np.complex128)
    w_proj = np.zeros((k_sub, n_comp, r_max), dtype=np.complex128)
    for k in range(k_sub):
        r_k = ranks[k]
        if r_k == 0:
            continue
        u_proj[k, :r_k] = combiners[k].conj().T @ left.T
        w_proj[k, :, :r_k] = right.conj() @ precoders[k]
    gram = np.einsum("qci,qdi->qcd", w_proj, w_proj.conj())

    # phase tensor over (target k, source q, component): coupling times ramp
    idx = (k_grid[None, :] - k_grid[:, None]) % k_sub
    tphase = coeff[:, idx].transpose(1, 2, 0) * ramp[None, :, :]
    cross = np.einsum("kqc,kqd,qcd->kcd", tphase, tphase.conj(), gram, optimize=True)
    self_term = np.einsum(
        "kc,kd,kcd->kcd", desired_weight, desired_weight.conj(), gram
    )
    cross -= self_term
    ici_power = np.einsum(
        "kic,kid,kcd->ki", u_proj, u_proj.conj(), cross, optimize=True
    ).real
    ici_power = np.maximum(ici_power, 0.0)

    sinr: list[np.ndarray] = []
    rate_sum = 0.0
    for k in range(k_sub):
        r_k = ranks[k]
        if r_k == 0:
            sinr.append(np.zeros(0))
            continue
        signal = total_power * sing_values[k] ** 2 / r_k
        values = signal / (ici_power[k, :r_k] + noise_var)
        sinr.append(values)
        rate_sum += float(np.sum(np.log2(1.0 + values)))
    overhead = k_sub / (k_sub + cp_length)
    rate = overhead * rate_sum / k_sub
    return OfdmResult(sinr=sinr, rate_bps_hz=rate, design=design)


def cfo_compensate(paths: PathSet) -> PathSet:
    """Shift every Doppler by the strongest path's, as a receive-side CFO fix.

    A single common rotation can only cancel one path's Doppler; the
    strongest path is the natural anchor. The returned PathSet keeps all
    other fields and widens the Doppler bound to cover the shifted values.
    """
    anchor = int(np.argmax(np.abs(paths.gains) ** 2))
    shifted = paths.doppler_hz - paths.doppler_hz[anchor]
    bound = max(paths.doppler_bound_hz, float(np.max(np.abs(shifted))))
    return PathSet(
        gains=paths.gains.copy(),
        aoa_rad=paths.aoa_rad.copy(),
        aod_rad=paths.aod_rad.copy(),
        delay_taps=paths.delay_taps.copy(),
        doppler_hz=shifted,
        doppler_bound_hz=bound,
        delay_tap_bound=paths.delay_tap_bound,
    )


# --- OTFS -------------------------------------------------------------------


@dataclass
class OtfsConfig:
    """Delay-Doppler grid, beams, and integer taps of the OTFS benchmark."""

    num_delay_bins: int        # M, also the number of subcarriers
    num_doppler_bins: int      # N symbols per frame
    cp_length: int
    tx_beam: np.ndarray        # unit-norm M_t vector
    rx_beam: np.ndarray        # unit-norm M_r vector
    delay_taps: np.ndarray     # integers in [0, M)
    doppler_taps: np.ndarray   # integers in (-N, N)
    doppler_residual_hz: np.ndarray  # off-grid Doppler lost to tap rounding

    def __post_init__(self) -> None:
        if self.num_delay_bins < 1 or self.num_doppler_bins < 1:
            raise ContractViolationError("grid dimensions must be >= 1")
        if self.cp_length < 0:
            raise ContractViolationError("cp_length must be >= 0")
        self.tx_beam = np.asarray(self.tx_beam, dtype=np.complex128).reshape(-1)
        self.rx_beam = np.asarray(self.rx_beam, dtype=np.complex128).reshape(-1)
        for name in ("tx_beam", "rx_beam"):
            norm = float(np.linalg.norm(getattr(self, name)))
            if abs(norm - 1.0) > BEAM_NORM_TOL:
                raise ContractViolationError(f"{name} must have unit norm, got {norm}")
        self.delay_taps = np.asarray(self.delay_taps, dtype=np.int64)
        self.doppler_taps = np.asarray(self.doppler_taps, dtype=np.int64)
        self.doppler_residual_hz = np.asarray(self.doppler_residual_hz, dtype=np.float64)
        n = self.delay_taps.shape[0]
        if self.doppler_taps.shape != (n,) or self.doppler_residual_hz.shape != (n,):
            raise ContractViolationError("per-path tap arrays must share one length")
        if n and (self.delay_taps.min() < 0 or self.delay_taps.max() >= self.num_delay_bins):
            raise ContractViolationError("delay taps must lie in [0, num_delay_bins)")
        if n and np.any(np.abs(self.doppler_taps) >= self.num_doppler_bins):
            raise ContractViolationError("|doppler taps| must be < num_doppler_bins")

    @property
    def grid_size(self) -> int:
        return self.num_delay_bins * self.num_doppler_bins


def make_otfs_config(
    realization: ChannelRealization,
    num_delay_bins: int,
    num_doppler_bins: int,
    cp_length: int,
    tx_beam: np.ndarray | None = None,
    rx_beam: np.ndarray | None = None,
) -> OtfsConfig:
    """Quantize the realization onto the delay-Doppler grid.

    Delay taps carry over directly (both live on the T_s grid); Doppler
    taps are the nearest multiples of the frame's Doppler resolution
    1 / (N * M * T_s), with the rounding loss kept as a diagnostic.
    Default beams point along the dominant path's steering vectors.
    """
    paths = realization.path_set
    frame_s = num_doppler_bins * num_delay_bins * realization.symbol_duration_s
    doppler_taps = np.rint(paths.doppler_hz * frame_s).astype(np.int64)
    residual = paths.doppler_hz - doppler_taps / frame_s
    if tx_beam is None or rx_beam is None:
        dominant = int(np.argmax(np.abs(paths.gains) ** 2))
        if tx_beam is None:
            a_tx = array_response(realization.num_tx, paths.aod_rad[dominant])
            tx_beam = a_tx / np.linalg.norm(a_tx)
        if rx_beam is None:
            a_rx = array_response(realization.num_rx, paths.aoa_rad[dominant])
            rx_beam = a_rx / np.linalg.norm(a_rx)
    return OtfsConfig(
        num_delay_bins=num_delay_bins,
        num_doppler_bins=num_doppler_bins,
        cp_length=cp_length,
        tx_beam=tx_beam,
        rx_beam=rx_beam,
        delay_taps=paths.delay_taps.copy(),
        doppler_taps=doppler_taps,
        doppler_residual_hz=residual,
    )


def otfs_effective_gains(
    realization: ChannelRealization, config: OtfsConfig
) -> np.ndarray:
    """Scalar per-path gains rx_beam^H H_l tx_beam after beamforming."""
    return np.einsum(
        "r,lrt,t->l", config.rx_beam.conj(), realization.matrices, config.tx_beam
    )


def _shift_phase_operator(
    gains: np.ndarray, delay_taps: np.ndarray, doppler_taps: np.ndarray, grid_size: int
) -> np.ndarray:
    """Dense sum over paths of gain * (cyclic shift by i) * (phase ramp j)."""
    h = np.zeros((grid_size, grid_size), dtype=np.complex128)
    n_idx = np.arange(grid_size)
    for gain, i_tap, j_tap in zip(gains, delay_taps, doppler_taps):
        rows = (n_idx + int(i_tap)) % grid_size
        h[rows, n_idx] += gain * np.exp(2j * np.pi * int(j_tap) * n_idx / grid_size)
    return h


def otfs_time_channel(
    realization: ChannelRealization, config: OtfsConfig
) -> np.ndarray:
    """Scalarized time-domain channel after beamforming, size MN x MN.

    Each path contributes its effective gain on a cyclic delay shift
    composed with a Doppler phase ramp, so the operator is a sum of
    permutation-times-diagonal factors.
    """
    gains = otfs_effective_gains(realization, config)
    return _shift_phase_operator(
        gains, config.delay_taps, config.doppler_taps, config.grid_size
    )


def otfs_delay_doppler_channel(
    realization: ChannelRealization, config: OtfsConfig
) -> np.ndarray:
    """Time channel conjugated into the delay-Doppler domain.

    Applies (F_N kron I_M) on the left and its inverse on the right, with
    the unitary N-point DFT and rectangular (identity) pulse shaping. The
    transform is unitary, so Frobenius norm and singular values carry over
    from the time-domain operator.
    """
    h = otfs_time_channel(realization, config)
    m, n = config.num_delay_bins, config.num_doppler_bins
    f_n = scipy.linalg.dft(n) / math.sqrt(n)
    # contract the kron factors through reshapes instead of forming MN x MN krons
    t = h.reshape(n, m, n, m)
    t = np.einsum("ab,bmcr->amcr", f_n, t)
    t = np.einsum("amcr,dc->amdr", t, f_n.conj())
    return t.reshape(m * n, m * n)


def otfs_beam_opt(
    realization: ChannelRealization,
    config: OtfsConfig,
    max_iters: int = 50,
    tol: float = 1e-9,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Alternating top-eigenvector updates of the beam pair.

    Maximizes the squared Frobenius norm of the scalarized channel. Both
    subproblems are Rayleigh quotients whose optimum is the dominant
    eigenvector, so the gain trace is non-decreasing. The pairwise overlap
    trace of the shift-phase operators is MN when two paths share both
    taps and zero otherwise, which collapses the quadratic forms to
    cheap L x L sums.
    """
    if max_iters < 1:
        raise ContractViolationError("max_iters must be >= 1")
    mats = realization.matrices
    mn = config.grid_size
    i_taps, j_taps = config.delay_taps, config.doppler_taps
    overlap = mn * (
        (i_taps[:, None] == i_taps[None, :]) & (j_taps[:, None] == j_taps[None, :])
    ).astype(np.float64)
    f = config.tx_beam.copy()
    v = config.rx_beam.copy()

    def gain(f_vec: np.ndarray, v_vec: np.ndarray) -> float:
        h = np.einsum("r,lrt,t->l", v_vec.conj(), mats, f_vec)
        return float((h.conj() @ overlap @ h).real)

    trace = [gain(f, v)]
    for _ in range(max_iters):
        b_rows = np.einsum("r,lrt->lt", v.conj(), mats)        # row l = v^H H_l
        lam = b_rows.conj().T @ overlap @ b_rows
        vals, vecs = eig_hermitian(lam, herm_tol=1e-8)
        if vals[0] <= 0:
            break
        f = vecs[:, 0]
        c_cols = np.einsum("lrt,t->lr", mats, f)               # row l = H_l f
        gam = c_cols.T @ overlap @ c_cols.conj()
        vals, vecs = eig_hermitian(gam, herm_tol=1e-8)
        if vals[0] <= 0:
            break
        v = vecs[:, 0]
        current = gain(f, v)
        trace.append(current)
        previous = trace[-2]
        if current - previous <= tol * max(abs(previous), 1e-30):
            break
    return f, v, trace


def otfs_rate(
    h_dd: np.ndarray,
    power_over_noise: float,
    cp_length: int,
    num_delay_bins: int,
    num_doppler_bins: int,
) -> float:
    """Spectral efficiency of the delay-Doppler channel with CP overhead.

    log2 det(I + pbar * H H^H) normalized by the frame length plus its
    cyclic prefix.
    """
    h = np.asarray(h_dd, dtype=np.complex128)
    mn = num_delay_bins * num_doppler_bins
    if h.shape != (mn, mn):
        raise ContractViolationError(f"h_dd must be {mn} x {mn}, got {h.shape}")
    if power_over_noise < 0 or cp_length < 0:
        raise ContractViolationError("power_over_noise and cp_length must be >= 0")
    gram = np.eye(mn, dtype=np.complex128) + power_over_noise * (h @ h.conj().T)
    sign, logdet = np.linalg.slogdet(gram)
    if sign.real <= 0 or not np.isfinite(logdet):
        raise NumericalError("delay-Doppler Gram determinant is not positive")
    return float(logdet / math.log(2.0) / (mn + cp_length))


def otfs_rate_from_taps(
    effective_gains: np.ndarray,
    delay_taps: np.ndarray,
    doppler_taps: np.ndarray,
    num_delay_bins: int,
    num_doppler_bins: int,
    power_over_noise: float,
    cp_length: int,
) -> float:
    """Same rate as otfs_rate without building any dense MN x MN matrix.

    The delay-Doppler transform is unitary, so the log-determinant can be
    taken over the sparse time-domain operator directly; a sparse LU
    factorization supplies it as the sum of log|U_ii|, valid here because
    the Gram matrix is Hermitian positive definite.
    """
    mn = num_delay_bins * num_doppler_bins
    if power_over_noise < 0 or cp_length < 0:
        raise ContractViolationError("power_over_noise and cp_length must be >= 0")
    gains = np.asarray(effective_gains, dtype=np.complex128)
    n_idx = np.arange(mn)
    rows = []
    cols = []
    vals = []
    for gain, i_tap, j_tap in zip(gains, delay_taps, doppler_taps):
        rows.append((n_idx + int(i_tap)) % mn)
        cols.append(n_idx)
        vals.append(gain * np.exp(2j * np.pi * int(j_tap) * n_idx / mn))
    h = scipy.sparse.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mn, mn),
    )
    gram = (
        scipy.sparse.identity(mn, dtype=np.complex128, format="csc")
        + power_over_noise * (h @ h.conj().T)
    ).tocsc()
    lu = scipy.sparse.linalg.splu(gram)
    diag = np.abs(lu.U.diagonal())
    if np.any(diag <= 0):
        raise NumericalError("sparse factorization hit a zero pivot")
    logdet = float(np.sum(np.log2(diag)))
    if not np.isfinite(logdet):
        raise NumericalError("sparse log-determinant overflowed")
    return logdet / (mn + cp_length)


# --- strongest-path beamforming ---------------------------------------------


@dataclass
class StrongestPathDesign:
    """Single-beam design locked to the dominant path."""

    precoder: np.ndarray       # M_t vector carrying the full power budget
    combiner: np.ndarray       # unit-norm M_r vector
    dominant_path: int
    snr_dominant: float        # dominant path alone over noise
    sinr_multipath: float      # with the other paths left in as interference


def strongest_path_design(
    realization: ChannelRealization, total_power: float, noise_var: float
) -> StrongestPathDesign:
    """Beamform along the dominant path's steering vectors.

    The receiver is assumed to synchronize to the dominant path's delay
    and Doppler, so that path contributes a constant coefficient while
    every other path lands at a different lag and acts as interference;
    sinr_multipath accounts for it, snr_dominant ignores it.
    """
    if total_power <= 0 or noise_var <= 0:
        raise ContractViolationError("total_power and noise_var must be positive")
    paths = realization.path_set
    dominant = int(np.argmax(np.abs(paths.gains) ** 2))
    a_tx = array_response(realization.num_tx, paths.aod_rad[dominant])
    a_rx = array_response(realization.num_rx, paths.aoa_rad[dominant])
    f = math.sqrt(total_power) * a_tx / np.linalg.norm(a_tx)
    w = a_rx / np.linalg.norm(a_rx)
    coupling = np.einsum("r,lrt,t->l", w.conj(), realization.matrices, f)
    powers = np.abs(coupling) ** 2
    interference = float(powers.sum() - powers[dominant])
    return StrongestPathDesign(
        precoder=f,
        combiner=w,
        dominant_path=dominant,
        snr_dominant=float(powers[dominant] / noise_var),
        sinr_multipath=float(powers[dominant] / (interference + noise_var)),
    )


def measure_beam_sinr(
    realization: ChannelRealization,
    design: StrongestPathDesign,
    timebase: Timebase,
    num_symbols: int = 4096,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Time-domain check of the strongest-path link: (desired, interference).

    Sends one Gaussian stream through the beamformer and the exact channel,
    derotates the dominant path's Doppler, and least-squares fits the
    combined output against the symbol stream at the dominant delay. The
    explained power is the desired part, the residual is multipath
    interference; both are noiseless, so the caller adds the noise floor.
    """
    gen = rng if rng is not None else np.random.default_rng(0)
    paths = realization.path_set
    m_dom = int(paths.delay_taps[design.dominant_path])
    margin = paths.max_delay_tap + 1
    if num_symbols <= 4 * margin:
        raise ContractViolationError("num_symbols too small for the sync margins")
    s = (
        gen.standard_normal(num_symbols) + 1j * gen.standard_normal(num_symbols)
    ) / math.sqrt(2.0)
    x = np.outer(s, design.precoder)
    r = apply_channel(realization, x, noise_std=0.0)
    n_idx = np.arange(num_symbols)
    derot = np.exp(
        -2j
        * np.pi
        * paths.doppler_hz[design.dominant_path]
        * n_idx
        * timebase.symbol_duration_s
    )
    y = (r @ design.combiner.conj()) * derot
    lo, hi = margin, num_symbols - margin
    ref = s[lo - m_dom : hi - m_dom]
    obs = y[lo:hi]
    coef = np.vdot(ref, obs) / np.vdot(ref, ref)
    desired = float(np.abs(coef) ** 2 * np.mean(np.abs(ref) ** 2))
    interference = float(np.mean(np.abs(obs - coef * ref) ** 2))
    return desired, interference
