"""Link-quality metrics: QAM BER curves, PAPR statistics, guard overheads,
and the imperfect-CSI perturbation model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .channel import PathSet
from .errors import ContractViolationError


def qfunc(x) -> np.ndarray:
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def _check_order(order: int) -> int:
    bits = int(order).bit_length() - 1
    if order < 4 or (1 << bits) != order:
        raise ContractViolationError(f"modulation order must be a power of two >= 4, got {order}")
    return bits


def qam_awgn_ber(snr_linear, order: int) -> np.ndarray:
    """Gray-coded QAM bit error rate over AWGN.

    Nearest-neighbor approximation
    (4 / log2(Q)) * (1 - 1/sqrt(Q)) * Q(sqrt(3*snr/(Q-1))), strictly
    decreasing in the SNR. Exact in the Gray-coded nearest-neighbor sense
    for square constellations and a standard approximation for the cross
    ones (Q = 32, 128, ...).
    """
    bits = _check_order(order)
    snr = np.asarray(snr_linear, dtype=np.float64)
    if np.any(snr < 0):
        raise ContractViolationError("snr_linear must be non-negative")
    scale = (4.0 / bits) * (1.0 - 1.0 / math.sqrt(order))
    return scale * qfunc(np.sqrt(3.0 * snr / (order - 1)))


def ofdm_ber(per_subcarrier_snr, num_subcarriers: int, max_delay_tap: int, order: int) -> float:
    """OFDM bit error rate averaged over subcarriers.

    Each subcarrier SNR is first derated by K / (K + m_max) for the cyclic
    prefix, then pushed through the AWGN QAM curve; the ICI folded into the
    SNRs is treated as Gaussian.
    """
    snr = np.asarray(per_subcarrier_snr, dtype=np.float64)
    if snr.shape != (num_subcarriers,):
        raise ContractViolationError(
            f"need one SNR per subcarrier, got shape {snr.shape} for K = {num_subcarriers}"
        )
    if max_delay_tap < 0:
        raise ContractViolationError("max_delay_tap must be >= 0")
    derated = num_subcarriers * snr / (num_subcarriers + max_delay_tap)
    return float(np.mean(qam_awgn_ber(derated, order)))


def qam_constellation(order: int) -> np.ndarray:
    """Unit-average-energy QAM points.

    Even bit counts give the square grid; odd bit counts of 32 and above
    give the cross constellation (the square one size up with its corners
    cut). 8-QAM has no standard cross shape and is rejected.
    """
    bits = _check_order(order)
    if bits % 2 == 0:
        side = 1 << (bits // 2)
        axis = np.arange(-side + 1, side, 2, dtype=np.float64)
        points = (axis[:, None] + 1j * axis[None, :]).ravel()
    else:
        if order < 32:
            raise ContractViolationError("cross QAM needs order >= 32")
        side = 3 << ((bits - 3) // 2)
        corner = 1 << ((bits - 5) // 2)
        axis = np.arange(-side + 1, side, 2, dtype=np.float64)
        grid = axis[:, None] + 1j * axis[None, :]
        keep = ~(
            (np.abs(grid.real) > side - 2 * corner)
            & (np.abs(grid.imag) > side - 2 * corner)
        )
        points = grid[keep].ravel()
    if points.size != order:
        raise ContractViolationError(f"constellation construction failed for order {order}")
    return points / math.sqrt(float(np.mean(np.abs(points) ** 2)))


def qam_symbols(order: int, size, rng: np.random.Generator) -> np.ndarray:
    """Uniform i.i.d. draws from the unit-energy constellation."""
    points = qam_constellation(order)
    return points[rng.integers(0, order, size=size)]


@dataclass
class PaprCcdf:
    """Complementary CDF of per-antenna PAPR over a batch of frames."""

    thresholds_db: np.ndarray
    ccdf: np.ndarray           # fraction of (antenna, frame) values above each threshold
    num_values: int
    num_excluded: int          # antennas skipped for carrying no power

    def exceedance_db(self, level: float) -> float:
        """Smallest threshold whose CCDF drops to the given level or below."""
        hit = np.nonzero(self.ccdf <= level)[0]
        if hit.size == 0:
            return float("inf")
        return float(self.thresholds_db[hit[0]])


def papr_db(frame: np.ndarray) -> tuple[np.ndarray, int]:
    """Per-antenna PAPR of one frame, in dB.

    frame has one time sample per row and one antenna per column. Antennas
    with zero average power carry no signal and are excluded; the count of
    exclusions is returned alongside.
    """
    x = np.asarray(frame, dtype=np.complex128)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ContractViolationError("frame must be a non-empty 2-D array (samples x antennas)")
    power = np.abs(x) ** 2
    mean = power.mean(axis=0)
    peak = power.max(axis=0)
    active = mean > 0
    ratios = peak[active] / mean[active]
    return 10.0 * np.log10(ratios), int(np.sum(~active))


def papr_ccdf(frames, thresholds_db) -> PaprCcdf:
    """CCDF of PAPR over every (antenna, frame) pair.

    frames may be a single 2-D frame, a 3-D stack of frames, or any
    iterable of 2-D frames. The CCDF is non-increasing in the threshold by
    construction.
    """
    thresholds = np.asarray(thresholds_db, dtype=np.float64)
    if thresholds.ndim != 1 or thresholds.size == 0:
        raise ContractViolationError("thresholds_db must be a non-empty 1-D array")
    if isinstance(frames, np.ndarray) and frames.ndim == 2:
        frames = [frames]
    values = []
    excluded = 0
    for frame in frames:
        v, skipped = papr_db(frame)
        values.append(v)
        excluded += skipped
    if not values:
        raise ContractViolationError("papr_ccdf needs at least one frame")
    flat = np.concatenate(values)
    if flat.size == 0:
        raise ContractViolationError("every antenna was excluded for zero power")
    ccdf = np.mean(flat[None, :] > thresholds[:, None], axis=1)
    return PaprCcdf(
        thresholds_db=thresholds,
        ccdf=ccdf,
        num_values=int(flat.size),
        num_excluded=excluded,
    )


def guard_overhead(scheme: str, **params) -> float:
    """Fraction of airtime spent on guard intervals.

    ddam needs 2 * max_delay_tap guard samples once per path-invariant
    window of frame_samples; ofdm pays a cyclic prefix of max_delay_tap per
    num_subcarriers; otfs pays it once per num_delay_bins*num_doppler_bins
    frame.
    """

    def need(*names) -> list:
        missing = [n for n in names if n not in params]
        if missing:
            raise ContractViolationError(f"guard_overhead({scheme!r}) missing {missing}")
        extra = set(params) - set(names)
        if extra:
            raise ContractViolationError(f"guard_overhead({scheme!r}) got unexpected {sorted(extra)}")
        return [params[n] for n in names]

    if scheme == "ddam":
        m, n_bar = need("max_delay_tap", "frame_samples")
        if n_bar < 1:
            raise ContractViolationError("frame_samples must be >= 1")
        return 2.0 * m / n_bar
    if scheme == "ofdm":
        m, k = need("max_delay_tap", "num_subcarriers")
        return m / (m + k)
    if scheme == "otfs":
        m, mm, nn = need("max_delay_tap", "num_delay_bins", "num_doppler_bins")
        return m / (mm * nn + m)
    raise ContractViolationError(f"unknown scheme {scheme!r}")


# --- imperfect delay/Doppler knowledge ---------------------------------------


@dataclass
class CsiError:
    """Delay/Doppler estimation error model.

    delay_accuracy is the expected fraction of paths whose integer delay is
    estimated correctly; doppler_error_coeff scales the Doppler error
    standard deviation relative to the Doppler bound. After perturb_csi has
    run, indicator holds the per-path delay-correct flags that were
    actually realized.
    """

    delay_accuracy: float
    doppler_error_coeff: float
    indicator: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.delay_accuracy <= 1.0:
            raise ContractViolationError("delay_accuracy must lie in [0, 1]")
        if self.doppler_error_coeff < 0:
            raise ContractViolationError("doppler_error_coeff must be >= 0")
        if self.indicator is not None:
            self.indicator = np.asarray(self.indicator, dtype=np.int64)
            if np.any((self.indicator != 0) & (self.indicator != 1)):
                raise ContractViolationError("indicator entries must be 0 or 1")

    @property
    def realized_accuracy(self) -> float:
        if self.indicator is None:
            raise ContractViolationError("no realization recorded yet")
        return float(np.mean(self.indicator))


def perturb_csi(
    paths: PathSet, err: CsiError, rng: np.random.Generator
) -> tuple[PathSet, CsiError]:
    """Corrupt the estimated delays and Dopplers of a path set.

    floor((1 - delay_accuracy) * L) paths, chosen uniformly, get their
    delay tap moved by +-1 (resampled outward to +-2, ... when the first
    choice would collide with another tap or leave the valid range; in the
    degenerate case of a fully occupied tap grid the path keeps its delay
    and is reported as correct). Every path's Doppler gains an additive
    error: the real part of a circular Gaussian whose variance is
    (doppler_error_coeff * doppler_bound)^2, i.e. a real standard deviation
    of doppler_error_coeff * doppler_bound / sqrt(2).

    Returns the perturbed paths plus a copy of the error model carrying the
    realized per-path indicator flags.
    """
    num_paths = paths.num_paths
    num_wrong = int(math.floor((1.0 - err.delay_accuracy) * num_paths))
    indicator = np.ones(num_paths, dtype=np.int64)
    delays = paths.delay_taps.copy()
    if num_wrong > 0:
        chosen = rng.choice(num_paths, size=num_wrong, replace=False)
        for idx in chosen:
            sign = 1 if rng.integers(0, 2) else -1
            moved = False
            for magnitude in range(1, paths.delay_tap_bound + 2):
                for offset in (sign * magnitude, -sign * magnitude):
                    cand = int(delays[idx]) + offset
                    if 0 <= cand <= paths.delay_tap_bound and cand not in delays:
                        delays[idx] = cand
                        moved = True
                        break
                if moved:
                    break
            if moved:
                indicator[idx] = 0

    bound = paths.doppler_bound_hz
    doppler = paths.doppler_hz.copy()
    if err.doppler_error_coeff > 0 and bound > 0:
        std = err.doppler_error_coeff * bound / math.sqrt(2.0)
        doppler = doppler + std * rng.standard_normal(num_paths)
    new_bound = max(bound, float(np.max(np.abs(doppler))))
    perturbed = PathSet(
        gains=paths.gains.copy(),
        aoa_rad=paths.aoa_rad.copy(),
        aod_rad=paths.aod_rad.copy(),
        delay_taps=delays,
        doppler_hz=doppler,
        doppler_bound_hz=new_bound,
        delay_tap_bound=paths.delay_tap_bound,
    )
    realized = CsiError(
        delay_accuracy=err.delay_accuracy,
        doppler_error_coeff=err.doppler_error_coeff,
        indicator=indicator,
    )
    return perturbed, realized
