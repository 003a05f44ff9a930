"""Seeded Monte Carlo estimators for the FAMA IDET quantities and an MRC-MIMO baseline.

Trial ``t`` draws its normals from a fixed slice of the counter-based
stream (see ``rng``), per-trial outcomes are stored in trial order and
reduced with ``math.fsum``, so estimates do not depend on the batch size or
the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import (
    SystemParams,
    gain_parts,
    harvest_from_powers,
    normals_per_trial,
    port_correlation,
    sir_from_powers,
)
from .closedform import RATE_LOG_BASE, rate
from .errors import DomainError
from .rng import KIND_FAMA, KIND_MIMO, standard_normals

MIN_TRIALS = 100

# Upper bound on normals generated per chunk (about 16 MB of float64).
_CHUNK_WORDS = 1 << 21


@dataclass(frozen=True)
class MCConfig:
    """Trial count, 64-bit seed, trials per work unit and worker threads."""

    trials: int = 100_000
    seed: int = 0
    batch: int = 10_000
    workers: int = 1

    def __post_init__(self):
        for name, low in (("trials", MIN_TRIALS), ("batch", 1), ("workers", 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < low:
                raise DomainError(f"{name} must be an integer >= {low}, got {v!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    trials: int
    seed: int

    def within(self, value: float, n_se: float = 3.0) -> bool:
        """True if ``value`` lies within ``n_se`` standard errors of the mean."""
        return abs(value - self.mean) <= n_se * self.std_error

    def interval(self, n_se: float = 3.0) -> tuple[float, float]:
        return self.mean - n_se * self.std_error, self.mean + n_se * self.std_error


@dataclass(frozen=True)
class BaselineResult:
    """MRC-MIMO baseline estimates for one operating point."""

    antennas: int
    wdt_outage: EstimateWithCI
    wet_outage: EstimateWithCI
    avg_energy: EstimateWithCI
    throughput: EstimateWithCI


def _summarize(values: np.ndarray, seed: int) -> EstimateWithCI:
    n = values.size
    mean = math.fsum(values.tolist()) / n
    dev = (values - mean)
    var = math.fsum((dev * dev).tolist()) / (n - 1)
    return EstimateWithCI(mean, math.sqrt(var / n), n, seed)


def _work_units(trials: int, batch: int, per_trial: int):
    step = max(1, min(batch, _CHUNK_WORDS // max(per_trial, 1)))
    return [(s, min(step, trials - s)) for s in range(0, trials, step)]


def _run_units(fn, mc: MCConfig, per_trial: int, n_out: int) -> np.ndarray:
    """Evaluate ``fn(start, count) -> (count, n_out)`` over all trials, in trial order."""
    units = _work_units(mc.trials, mc.batch, per_trial)
    if mc.workers == 1 or len(units) == 1:
        parts = [fn(s, c) for s, c in units]
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            parts = list(pool.map(lambda u: fn(*u), units))
    out = np.concatenate(parts, axis=0)
    assert out.shape == (mc.trials, n_out)
    return out


def _resolve_mu(params: SystemParams, mu) -> float:
    return port_correlation(params.antenna_size).mu if mu is None else float(mu)


def _fama_outcomes(params: SystemParams, mu: float, seed: int, start: int, count: int,
                   ue: int, desired_ap: int, need_sir: bool) -> np.ndarray:
    """Per-trial [max SIR, max harvest power] for one UE."""
    k, n = params.n_ports, params.n_pairs
    normals = standard_normals(seed, ue, start, count, normals_per_trial(k, n), KIND_FAMA)
    re, im, _, _ = gain_parts(normals, k, n, mu)
    power = re * re + im * im
    out = np.empty((count, 2))
    out[:, 1] = harvest_from_powers(power, params.tx_power).max(axis=1)
    if need_sir:
        out[:, 0] = sir_from_powers(power, desired_ap, params.noise_power,
                                    params.tx_power).max(axis=1)
    else:
        out[:, 0] = np.nan
    return out


def _check_wdt(params: SystemParams):
    if params.n_pairs < 2 and not params.noise_power:
        raise DomainError("N = 1 has no interferers; set noise_power for an SINR model")


def simulate_fama(params: SystemParams, mc: MCConfig, mu=None, *, need_sir: bool = True,
                  ue: int = 0, desired_ap: int = 0) -> np.ndarray:
    """Raw per-trial outcomes ``(trials, 2)``: max SIR over ports, max harvest power."""
    mu = _resolve_mu(params, mu)

    def unit(start, count):
        return _fama_outcomes(params, mu, mc.seed, start, count, ue, desired_ap, need_sir)

    per_trial = normals_per_trial(params.n_ports, params.n_pairs)
    return _run_units(unit, mc, per_trial, 2)


def estimate_wdt_outage(params: SystemParams, mc: MCConfig, mu=None) -> EstimateWithCI:
    """Fraction of trials where the best port's SIR is below gamma (UE 0, AP 0)."""
    _check_wdt(params)
    raw = simulate_fama(params, mc, mu)
    return _summarize((raw[:, 0] < params.sinr_threshold).astype(float), mc.seed)


def estimate_wet_outage(params: SystemParams, mc: MCConfig, mu=None) -> EstimateWithCI:
    """Fraction of trials where the best port's harvest power is below Q_th."""
    raw = simulate_fama(params, mc, mu, need_sir=False)
    return _summarize((raw[:, 1] < params.harvest_threshold).astype(float), mc.seed)


def estimate_avg_energy(params: SystemParams, mc: MCConfig, mu=None) -> EstimateWithCI:
    """Mean of (1 - alpha) T max_k P sum_m |g_k^(m)|^2 in joules."""
    raw = simulate_fama(params, mc, mu, need_sir=False)
    scale = (1.0 - params.ts_ratio) * params.period
    return _summarize(scale * raw[:, 1], mc.seed)


def estimate_all(params: SystemParams, mc: MCConfig, mu=None) -> dict:
    """WDT outage, WET outage and average energy from one shared set of draws."""
    need_sir = params.n_pairs >= 2 or bool(params.noise_power)
    raw = simulate_fama(params, mc, mu, need_sir=need_sir)
    out = {
        "wet_outage": _summarize((raw[:, 1] < params.harvest_threshold).astype(float), mc.seed),
        "avg_energy": _summarize((1.0 - params.ts_ratio) * params.period * raw[:, 1], mc.seed),
    }
    if need_sir:
        out["wdt_outage"] = _summarize((raw[:, 0] < params.sinr_threshold).astype(float), mc.seed)
    return out


def compose_throughput(per_ue: EstimateWithCI, n_pairs: int, gamma: float, alpha: float,
                       log_base: float = RATE_LOG_BASE) -> EstimateWithCI:
    """N R alpha (1 - p)^N from a per-UE outage estimate p, delta-method error."""
    r = rate(gamma, log_base)
    success = 1.0 - per_ue.mean
    mean = n_pairs * r * alpha * success ** n_pairs
    slope = n_pairs * r * alpha * n_pairs * success ** (n_pairs - 1)
    return EstimateWithCI(mean, abs(slope) * per_ue.std_error, per_ue.trials, per_ue.seed)


def estimate_system_throughput(params: SystemParams, mc: MCConfig, mu=None, *,
                               joint: bool = False,
                               log_base: float = RATE_LOG_BASE) -> EstimateWithCI:
    """Aggregate reliable throughput N R alpha (1 - system outage).

    By default one UE is simulated and the system outage composed as
    1 - (1 - p)^N.  With ``joint=True`` every UE i is simulated on its own
    stream with AP i as the desired source and the per-trial throughput is
    averaged directly.
    """
    _check_wdt(params)
    if not 0.0 <= params.ts_ratio <= 1.0:
        raise DomainError("alpha must lie in [0, 1]")
    if not joint:
        return compose_throughput(estimate_wdt_outage(params, mc, mu), params.n_pairs,
                                  params.sinr_threshold, params.ts_ratio, log_base)
    mu = _resolve_mu(params, mu)
    n = params.n_pairs
    any_outage = np.zeros(mc.trials, dtype=bool)
    for i in range(n):
        raw = simulate_fama(params, mc, mu, ue=i, desired_ap=i)
        any_outage |= raw[:, 0] < params.sinr_threshold
    tau = n * rate(params.sinr_threshold, log_base) * params.ts_ratio
    return _summarize(np.where(any_outage, 0.0, tau), mc.seed)


# ---------------------------------------------------------------------------
# MRC-MIMO baseline
# ---------------------------------------------------------------------------

def _mimo_outcomes(params: SystemParams, antennas: int, seed: int, start: int,
                   count: int) -> np.ndarray:
    """Per-trial [MRC SIR of UE 0, total harvest power over antennas and APs]."""
    n = params.n_pairs
    normals = standard_normals(seed, 0, start, count, 2 * antennas * n, KIND_MIMO)
    z = normals.reshape(count, 2, antennas, n)
    re, im = z[:, 0], z[:, 1]
    norms = np.zeros((count, n))
    for a in range(antennas):
        norms = norms + (re[:, a, :] ** 2 + im[:, a, :] ** 2)
    desired = norms[:, 0]
    interference = np.zeros(count)
    for m in range(1, n):
        # h_0^H h_m accumulated antenna by antenna.
        cr = np.zeros(count)
        ci = np.zeros(count)
        for a in range(antennas):
            cr = cr + re[:, a, 0] * re[:, a, m] + im[:, a, 0] * im[:, a, m]
            ci = ci + re[:, a, 0] * im[:, a, m] - im[:, a, 0] * re[:, a, m]
        interference = interference + (cr * cr + ci * ci)
    p = params.tx_power
    num = p * desired * desired
    den = p * interference
    if params.noise_power:
        den = den + params.noise_power * desired
    out = np.empty((count, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, 0] = np.where(den == 0.0, np.inf, num / den)
    total = np.zeros(count)
    for m in range(n):
        total = total + norms[:, m]
    out[:, 1] = p * total
    return out


def mimo_mrc_baseline(params: SystemParams, antennas: int, mc: MCConfig,
                      log_base: float = RATE_LOG_BASE) -> BaselineResult:
    """Simplified M-antenna MRC receiver with i.i.d. Rayleigh antennas.

    SIR = P |h_i|^4 / sum_{m != i} P |h_i^H h_m|^2 (plus noise_power |h_i|^2
    when set); harvest power is P sum_m ||h_m||^2 over all antennas.
    """
    if isinstance(antennas, bool) or not isinstance(antennas, (int, np.integer)) or antennas < 1:
        raise DomainError(f"antennas must be a positive integer, got {antennas!r}")
    _check_wdt(params)

    def unit(start, count):
        return _mimo_outcomes(params, antennas, mc.seed, start, count)

    raw = _run_units(unit, mc, 2 * antennas * params.n_pairs, 2)
    wdt = _summarize((raw[:, 0] < params.sinr_threshold).astype(float), mc.seed)
    wet = _summarize((raw[:, 1] < params.harvest_threshold).astype(float), mc.seed)
    energy = _summarize((1.0 - params.ts_ratio) * params.period * raw[:, 1], mc.seed)
    thr = compose_throughput(wdt, params.n_pairs, params.sinr_threshold, params.ts_ratio, log_base)
    return BaselineResult(antennas, wdt, wet, energy, thr)
