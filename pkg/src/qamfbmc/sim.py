"""Monte-Carlo link simulation, PSD runs and filter reports.

One trial draws its own bits, channels, noise and phase noise from streams
addressed by ``(seed, trial, purpose)``.  The same trial is replayed at every
sweep point, so points differ only in the swept parameter (common random
numbers), and counters merge in trial order so the result does not depend on
how trials are spread over worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import (
    PowerDelayProfile,
    add_awgn,
    apply_channel,
    apply_phase_noise,
    default_sample_rate,
    pdp_preset,
    perturb_channel_estimate,
    phase_noise_preset,
    phase_noise_trajectory,
    realize_channel,
)
from .coding import ConvCode, conv_encode, viterbi_decode
from .config import ExperimentConfig
from .equalizer import CsiState, equalizer_gains, interference_noise_variance
from .filterbank import FilterBank, FilterBankConfig, SirReport, interference_profile, load_filter_bank, make_filter_bank
from .metrics import BerCounter, ber_report, ber_update, oob_emission, psd_welch
from .numerics import RngStream, dft
from .txrx import (
    OfdmConfig,
    bits_per_symbol,
    fbmc_demodulate,
    fbmc_frame,
    harden,
    ofdm_demodulate,
    ofdm_frame,
    qam_llr,
    qam_map,
    slice_windows,
    subcarrier_average,
)

__all__ = [
    "SimResult",
    "build_filter_bank",
    "run_trial",
    "run_ber_sweep",
    "PsdResult",
    "run_psd",
    "run_filter_report",
]

# stream purposes under (seed, trial)
BITS, CHANNEL, NOISE, PHASE, ESTIMATE = range(5)
CODE = ConvCode()


@dataclass(frozen=True)
class SimResult:
    sweep_value: object
    ber: float
    wilson_lo: float
    wilson_hi: float
    errors: int
    bits: int
    seed: int
    config_hash: str
    wall_time: float = 0.0


@lru_cache(maxsize=8)
def _bank_cached(M: int, B: int, L: int, filt: str) -> FilterBank:
    cfg = FilterBankConfig(M, B, L)
    if filt in ("type1", "type2", "cyclic-shift", "phydyas", "rect"):
        return make_filter_bank(cfg, filt)
    return load_filter_bank(filt, expected=cfg)


def build_filter_bank(cfg: ExperimentConfig) -> FilterBank:
    return _bank_cached(cfg.M, cfg.B, cfg.L, cfg.filter)


@lru_cache(maxsize=8)
def _sir_cached(M: int, B: int, L: int, filt: str) -> SirReport:
    return interference_profile(_bank_cached(M, B, L, filt))


def _pdp(cfg: ExperimentConfig) -> PowerDelayProfile:
    if cfg.channel == "custom":
        return PowerDelayProfile(tuple(d * 1e-9 for d in cfg.channel_delays_ns), cfg.channel_powers_db)
    return pdp_preset(cfg.channel)


def _point_config(cfg: ExperimentConfig, value) -> ExperimentConfig:
    if cfg.axis == "ebn0_db":
        return cfg.replace(ebn0_db=float(value))
    if cfg.axis == "sigma_er2":
        return cfg.replace(sigma_er2=float(value))
    return cfg.replace(phase_noise=str(value))


def _frame_layout(cfg: ExperimentConfig):
    """Bits carried and information bits per frame."""
    bps = bits_per_symbol(cfg.modulation)
    carried = cfg.symbols_per_frame * cfg.M * bps
    if cfg.coding == "conv_r12":
        info = carried // 2 - (CODE.K - 1)
        if info < 1:
            raise ValueError("frame too small for the terminated code")
        return carried, info
    return carried, carried


def frames_per_trial(cfg: ExperimentConfig) -> int:
    _, info = _frame_layout(cfg)
    per_trial = math.ceil(cfg.bits_per_point / cfg.trials)
    return max(1, math.ceil(per_trial / info))


def _cpe(phi: np.ndarray, starts, weights: np.ndarray) -> np.ndarray:
    """Energy-weighted common phase rotation seen by each receive window."""
    win = slice_windows(np.exp(1j * phi), starts, weights.size)
    c = win @ weights
    return c / np.maximum(np.abs(c), 1e-300)


class _Link:
    """Per-configuration constants shared by all frames of a trial."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.bps = bits_per_symbol(cfg.modulation)
        carried, info = _frame_layout(cfg)
        # the zero tail makes the code rate slightly below 1/2
        self.rate = info / carried
        self.fs = cfg.sample_rate or default_sample_rate(cfg.M)
        self.pdp = _pdp(cfg)
        self.F = cfg.symbols_per_frame
        if cfg.waveform == "qam_fbmc":
            self.bank = build_filter_bank(cfg)
            self.sir = _sir_cached(cfg.M, cfg.B, cfg.L, cfg.filter)
            self.win_len = cfg.L * cfg.M
            self.cpe_weights = np.mean(np.abs(self.bank.windows) ** 2, axis=0)
        else:
            self.ofdm = OfdmConfig(cfg.M, cfg.cp_len)
            self.sir = None
            self.win_len = self.ofdm.symbol_len
            self.cpe_weights = np.r_[np.zeros(self.ofdm.cp_len), np.full(cfg.M, 1.0 / cfg.M)]

    # transmit ---------------------------------------------------------------

    def transmit(self, coded: np.ndarray):
        cfg = self.cfg
        grid = qam_map(coded, cfg.modulation).reshape(self.F, cfg.M)
        if cfg.waveform == "qam_fbmc":
            frame = fbmc_frame(grid, self.bank).samples
            M, L = cfg.M, cfg.L
            starts = (np.arange(self.F) + L - 1) * M
            steady = slice((2 * L - 2) * M, (self.F + L - 1) * M)
        else:
            frame = ofdm_frame(grid, self.ofdm).samples
            starts = np.arange(self.F) * self.ofdm.symbol_len
            steady = slice(0, self.F * self.ofdm.symbol_len)
        return frame, starts, steady

    # receive ----------------------------------------------------------------

    def receive(self, rx, starts, h_est, N0, rot):
        """Equalized, amplitude-normalized symbols and their noise variances per frame."""
        cfg = self.cfg
        windows = slice_windows(rx, starts, self.win_len)
        sigma_IN2 = 0.0
        if cfg.equalizer == "mmse":
            bin_power = cfg.M / self.win_len if cfg.waveform == "qam_fbmc" else 1.0
            sigma_IN2 = interference_noise_variance(self.sir, N0, bin_power)
        csi = CsiState(h_est, sigma_IN2)
        g = equalizer_gains(csi, cfg.equalizer).gains
        if cfg.waveform == "qam_fbmc":
            X = dft(windows)
            y = fbmc_demodulate(X, g, self.bank)
            gain = subcarrier_average(g * h_est, self.bank)
            noise = N0 * subcarrier_average(np.abs(g) ** 2, self.bank).real
            si = self.sir.mean_interference
        else:
            y = ofdm_demodulate(windows, g, self.ofdm)
            gain = g * h_est
            noise = N0 * np.abs(g) ** 2
            si = 0.0
        if rot is not None:
            y = y * np.conj(rot)[:, None]
        gain = np.where(np.abs(gain) > 1e-300, gain, 1e-300)
        sym = y / gain
        var = noise / np.abs(gain) ** 2 + si
        return sym, np.broadcast_to(var, sym.shape)


def run_trial(cfg: ExperimentConfig, trial: int, points) -> list[BerCounter]:
    """Counters of one trial at every sweep point."""
    base = RngStream(cfg.seed, trial)
    carried, info = _frame_layout(cfg)
    n_frames = frames_per_trial(cfg)
    counters = [BerCounter() for _ in points]
    links = [_Link(_point_config(cfg, v)) for v in points]
    link0 = links[0]

    bits_rng = base.child(BITS)
    chan_rng = base.child(CHANNEL)
    noise_rng = base.child(NOISE)
    pn_rng = base.child(PHASE)
    est_rng = base.child(ESTIMATE)

    for f in range(n_frames):
        info_bits = bits_rng.child(f).bits(info)
        coded = conv_encode(info_bits, CODE) if cfg.coding == "conv_r12" else info_bits
        tx, starts, steady = link0.transmit(coded)
        channel = realize_channel(link0.pdp, link0.fs, chan_rng.child(f))
        if len(channel) > cfg.M:
            raise ValueError(f"channel spans {len(channel)} samples, more than M={cfg.M}")
        rx_clean = apply_channel(tx, channel)
        h_true = channel.frequency_response(link0.win_len if cfg.waveform == "qam_fbmc" else cfg.M)

        for i, link in enumerate(links):
            pcfg = link.cfg
            rx = rx_clean
            rot = None
            pn = phase_noise_preset(pcfg.phase_noise, pcfg.phase_noise_sigma2)
            if pn is not None:
                phi = phase_noise_trajectory(rx.size, pn, pn_rng.child(f))
                rx = apply_phase_noise(rx, phi, pcfg.phase_noise_mode)
                if pcfg.cpe_correction == "genie":
                    rot = _cpe(phi, starts, link.cpe_weights)
            rx, N0 = add_awgn(rx, pcfg.ebn0_db, link.bps, link.rate, noise_rng.child(f),
                              region=steady, symbol_energy_scale=1.0)
            h_est = h_true
            if pcfg.sigma_er2 > 0:
                h_est = perturb_channel_estimate(h_true, pcfg.sigma_er2, est_rng.child(f))
            sym, var = link.receive(rx, starts, h_est, N0, rot)
            if pcfg.coding == "conv_r12":
                llr = qam_llr(sym.reshape(-1), var.reshape(-1), pcfg.modulation)
                decided = viterbi_decode(llr, CODE)
            elif pcfg.modulation == 4:
                decided = harden(qam_llr(sym.reshape(-1), 1.0, 4))
            else:
                decided = harden(qam_llr(sym.reshape(-1), var.reshape(-1), pcfg.modulation))
            counters[i] = ber_update(counters[i], info_bits, decided)
    return counters


def _trial_job(args):
    cfg, trial, points = args
    t0 = time.perf_counter()
    return run_trial(cfg, trial, points), time.perf_counter() - t0


def _sorted_points(cfg: ExperimentConfig) -> list:
    if cfg.axis == "phase_noise":
        return list(cfg.points)
    return sorted(cfg.points, key=float)


def run_ber_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[SimResult]:
    points = _sorted_points(cfg)
    tasks = [(cfg, t, tuple(points)) for t in range(cfg.trials)]
    if jobs <= 1:
        outcomes = [_trial_job(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_trial_job, tasks))
    totals = [BerCounter() for _ in points]
    wall = [0.0 for _ in points]
    for counters, dt in outcomes:
        for i, c in enumerate(counters):
            totals[i] = totals[i].merge(c)
            wall[i] += dt / len(points)
    h = cfg.config_hash()
    results = []
    for value, total, dt in zip(points, totals, wall):
        rep = ber_report(total)
        results.append(SimResult(value, rep.ber, rep.lo, rep.hi, rep.errors, rep.bits, cfg.seed, h, dt))
    return results


# --------------------------------------------------------------------------
# Spectra
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PsdResult:
    freqs: np.ndarray
    density_db: np.ndarray
    density_db_pn: np.ndarray | None
    band: tuple[float, float]
    offsets: tuple[float, ...]
    oob_db: np.ndarray
    oob_db_pn: np.ndarray | None


def active_subcarriers(M: int, n_active: int) -> np.ndarray:
    """``n_active`` contiguous subcarriers centred on DC, as indices mod M."""
    return np.arange(-(n_active // 2), n_active - n_active // 2) % M


def psd_stream(cfg: ExperimentConfig, rng: RngStream) -> np.ndarray:
    """Transmit samples with ``psd_active`` loaded subcarriers."""
    M = cfg.M
    K = cfg.psd_symbols
    grid = np.zeros((K, M), dtype=complex)
    active = active_subcarriers(M, cfg.psd_active)
    bps = bits_per_symbol(cfg.modulation)
    grid[:, active] = qam_map(rng.bits(K * active.size * bps), cfg.modulation).reshape(K, active.size)
    if cfg.waveform == "qam_fbmc":
        x = fbmc_frame(grid, build_filter_bank(cfg)).samples
        # drop the ramp-up and ramp-down symbols
        return x[(2 * cfg.L - 2) * M : (K + cfg.L - 1) * M]
    return ofdm_frame(grid, OfdmConfig(M, cfg.cp_len)).samples


def run_psd(cfg: ExperimentConfig) -> PsdResult:
    """Spectrum of the configured waveform without and with the phase-noise preset."""
    base = RngStream(cfg.seed, 0)
    x = psd_stream(cfg, base.child(BITS))
    n_lo = -(cfg.psd_active // 2)
    n_hi = cfg.psd_active - cfg.psd_active // 2 - 1
    band = ((n_lo - 0.5) / cfg.M, (n_hi + 0.5) / cfg.M)
    offsets = tuple(o / cfg.M for o in cfg.psd_offsets)

    psd = psd_welch(x, cfg.psd_nperseg, cfg.psd_overlap, cfg.psd_window)
    oob = oob_emission(psd, band, offsets)
    pn = phase_noise_preset(cfg.phase_noise, cfg.phase_noise_sigma2)
    pn_db = pn_oob = None
    if pn is not None:
        phi = phase_noise_trajectory(x.size, pn, base.child(PHASE))
        psd_pn = psd_welch(apply_phase_noise(x, phi, cfg.phase_noise_mode),
                           cfg.psd_nperseg, cfg.psd_overlap, cfg.psd_window)
        pn_db = psd_pn.density_db
        pn_oob = oob_emission(psd_pn, band, offsets)
    return PsdResult(psd.freqs, psd.density_db, pn_db, band, cfg.psd_offsets, oob, pn_oob)


def run_filter_report(cfg: ExperimentConfig) -> SirReport:
    return _sir_cached(cfg.M, cfg.B, cfg.L, cfg.filter)
