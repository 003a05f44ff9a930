"""FAMA system model: port correlation, correlated port gains, SIR, harvest power.

Port indices are 0-based throughout.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .rng import KIND_FAMA, Substream, standard_normals
from .specfun import bessel_j1, hyp1f2

MAX_ANTENNA_SIZE = 6.0


@dataclass(frozen=True)
class SystemParams:
    """Scenario scalars.

    ``sinr_threshold`` is linear; ``noise_power`` of None means the
    interference-limited SIR model (noise neglected).
    """

    n_pairs: int = 4
    n_ports: int = 100
    antenna_size: float = 1.0
    tx_power: float = 1.0
    period: float = 1e-3
    ts_ratio: float = 0.5
    sinr_threshold: float = 10 ** 0.36
    harvest_threshold: float = 25.0
    noise_power: Optional[float] = None

    def __post_init__(self):
        for name in ("n_pairs", "n_ports"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
        for name in ("antenna_size", "tx_power", "period", "sinr_threshold",
                     "harvest_threshold"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")
        if not (isinstance(self.ts_ratio, (int, float)) and 0.0 <= self.ts_ratio <= 1.0):
            raise DomainError(f"ts_ratio must lie in [0, 1], got {self.ts_ratio!r}")
        if self.noise_power is not None and not (
            math.isfinite(self.noise_power) and self.noise_power >= 0
        ):
            raise DomainError(f"noise_power must be >= 0, got {self.noise_power!r}")

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    @property
    def gamma_db(self) -> float:
        return 10.0 * math.log10(self.sinr_threshold)


@dataclass(frozen=True)
class PortCorrelation:
    mu: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise DomainError(f"port correlation must lie in [0, 1], got {self.mu}")

    def __float__(self):
        return self.mu


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One UE's port gains.

    ``gains[k, m]`` is the complex gain from AP m to port k; ``anchors[m]``
    holds the shared (x0, y0) pair of AP m.
    """

    gains: np.ndarray
    anchors: np.ndarray

    @property
    def n_ports(self) -> int:
        return self.gains.shape[0]

    @property
    def n_aps(self) -> int:
        return self.gains.shape[1]


def port_correlation(antenna_size: float) -> PortCorrelation:
    """Correlation parameter between ports of a linear fluid antenna of size W wavelengths.

    mu = sqrt(2) * sqrt(1F2(1/2; 1, 3/2; -pi^2 W^2) - J1(2 pi W) / (2 pi W))
    """
    w = antenna_size
    if not (isinstance(w, (int, float)) and math.isfinite(w)) or not 0.0 < w <= MAX_ANTENNA_SIZE:
        raise DomainError(f"antenna size must lie in (0, {MAX_ANTENNA_SIZE}], got {w!r}")
    x = 2.0 * math.pi * w
    inner = hyp1f2(0.5, 1.0, 1.5, -(math.pi * w) ** 2) - bessel_j1(x) / x
    mu_sq = 2.0 * inner
    if mu_sq < 0.0 or mu_sq > 1.0:
        unclamped = math.sqrt(max(mu_sq, 0.0))
        if mu_sq < -1e-9 or unclamped > 1.0 + 1e-9:
            warnings.warn(f"port correlation {unclamped} outside [0, 1]; clamped", RuntimeWarning)
        mu_sq = min(max(mu_sq, 0.0), 1.0)
    return PortCorrelation(math.sqrt(mu_sq))


def _mu_value(mu) -> float:
    return mu.mu if isinstance(mu, PortCorrelation) else float(mu)


def gain_parts(normals: np.ndarray, n_ports: int, n_aps: int, mu: float):
    """Split raw normals into real and imaginary gain parts.

    ``normals`` has shape ``(count, 2 * (K + 1) * N)`` laid out as
    [re/im, port 0..K (0 = anchor), AP].  Returns ``(re, im, x0, y0)`` with
    ``re``/``im`` of shape ``(count, K, N)`` and anchors ``(count, N)``.
    """
    z = normals.reshape(-1, 2, n_ports + 1, n_aps)
    s = math.sqrt(1.0 - mu * mu)
    x0 = z[:, 0, 0, :]
    y0 = z[:, 1, 0, :]
    re = s * z[:, 0, 1:, :] + mu * x0[:, None, :]
    im = s * z[:, 1, 1:, :] + mu * y0[:, None, :]
    return re, im, x0, y0


def normals_per_trial(n_ports: int, n_aps: int) -> int:
    return 2 * (n_ports + 1) * n_aps


def sample_channels(params: SystemParams, mu, seed: int, start: int, count: int,
                    ue: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Gains ``(count, K, N)`` and anchors ``(count, N, 2)`` for a run of trials."""
    k, n = params.n_ports, params.n_pairs
    normals = standard_normals(seed, ue, start, count, normals_per_trial(k, n), KIND_FAMA)
    re, im, x0, y0 = gain_parts(normals, k, n, _mu_value(mu))
    return re + 1j * im, np.stack([x0, y0], axis=-1)


def sample_channel(params: SystemParams, mu, stream: Substream) -> ChannelRealization:
    """Draw one UE's correlated port gains from a counter-based substream.

    g_k^(m) = (sqrt(1-mu^2) x_k + mu x_0) + j (sqrt(1-mu^2) y_k + mu y_0);
    the same substream always yields the same realization.
    """
    gains, anchors = sample_channels(params, mu, stream.seed, stream.trial, 1, stream.ue)
    return ChannelRealization(gains=gains[0], anchors=anchors[0])


def _sum_over_aps(power: np.ndarray, skip: Optional[int] = None) -> np.ndarray:
    # Fixed left-to-right order keeps results independent of array shape.
    total = np.zeros(power.shape[:-1])
    for m in range(power.shape[-1]):
        if m != skip:
            total = total + power[..., m]
    return total


def sir_from_powers(power: np.ndarray, desired_ap: int, noise_power: Optional[float] = None,
                    tx_power: float = 1.0) -> np.ndarray:
    """SIR (or SINR) per port from |g|^2 arrays shaped ``(..., K, N)``."""
    num = tx_power * power[..., desired_ap]
    den = tx_power * _sum_over_aps(power, skip=desired_ap)
    if noise_power:
        den = den + noise_power
    with np.errstate(divide="ignore", invalid="ignore"):
        sir = num / den
    return np.where(den == 0.0, np.inf, sir)


def harvest_from_powers(power: np.ndarray, tx_power: float) -> np.ndarray:
    return tx_power * _sum_over_aps(power)


def sir_per_port(real: ChannelRealization, desired_ap: int, noise_power: Optional[float] = None,
                 tx_power: float = 1.0) -> np.ndarray:
    """P|g_k^(i)|^2 / (sum_{m != i} P|g_k^(m)|^2 + noise) for every port k.

    With ``noise_power`` None or 0 this is the SIR and ``tx_power`` cancels.
    A zero denominator yields +inf for that port.
    """
    if not 0 <= desired_ap < real.n_aps:
        raise DomainError(f"desired_ap must lie in [0, {real.n_aps}), got {desired_ap}")
    return sir_from_powers(np.abs(real.gains) ** 2, desired_ap, noise_power, tx_power)


def harvest_power_per_port(real: ChannelRealization, tx_power: float) -> np.ndarray:
    """P * sum_m |g_k^(m)|^2 for every port k."""
    return harvest_from_powers(np.abs(real.gains) ** 2, tx_power)


def _argmax_first(values) -> int:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("port selection needs a non-empty 1-D vector")
    return int(np.argmax(v))


def select_wdt_port(sir) -> int:
    """Port with the largest SIR; ties go to the lowest index."""
    return _argmax_first(sir)


def select_wet_port(qvec) -> int:
    """Port with the largest harvest power; ties go to the lowest index."""
    return _argmax_first(qvec)
