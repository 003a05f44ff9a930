"""Analytical evaluators for WDT outage, throughput, WET outage and harvested energy.

Notation: N AP-UE pairs, K ports, mu port correlation, and
``Y_k = sum_m |g_k^(m)|^2 / (1 - mu^2)``.  Conditioned on the anchor energy
``r0`` (chi-square, 2N dof) every Y_k is independent noncentral chi-square
with 2N dof and noncentrality ``mu^2 r0 / (1 - mu^2)``, so

    P(max_k Y_k < t) = E_r0[(1 - Q_N(sqrt(c r0), sqrt(t)))^K],  c = mu^2/(1-mu^2).

The ``*_quadrature`` functions integrate these expressions adaptively and
serve as the reference; the ``*_gl`` functions are the Gauss-Laguerre sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import SystemParams, port_correlation
from .errors import DomainError
from .integrate import adaptive_integrate
from .specfun import (
    chi2_pdf_even,
    gauss_laguerre_rule,
    marcum_q,
    marcum_q_diff,
    regularized_gamma_q,
)

MU_MAX = 1.0 - 1e-9

# Base of the logarithm in R = log(1 + gamma); 2 gives bits/s/Hz.
RATE_LOG_BASE = 2.0

DEFAULT_QUAD_ORDER = 150


def _check_pairs(n_pairs, minimum):
    if isinstance(n_pairs, bool) or not isinstance(n_pairs, (int, np.integer)) or n_pairs < minimum:
        raise DomainError(f"N must be an integer >= {minimum}, got {n_pairs!r}")


def _check_ports(n_ports):
    if isinstance(n_ports, bool) or not isinstance(n_ports, (int, np.integer)) or n_ports < 1:
        raise DomainError(f"K must be a positive integer, got {n_ports!r}")


def _check_mu(mu, upper=1.0):
    if not (math.isfinite(mu) and 0.0 <= mu < upper):
        raise DomainError(f"mu must lie in [0, {upper}), got {mu!r}")


# ---------------------------------------------------------------------------
# WDT
# ---------------------------------------------------------------------------

def _wdt_success_terms(n_ports, mu, gamma, n_pairs):
    _check_ports(n_ports)
    _check_pairs(n_pairs, 2)
    _check_mu(mu)
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    e = n_pairs - 1
    return n_ports * (mu * mu / (gamma + 1.0)) ** e + n_ports * ((1.0 - mu * mu) / gamma) ** e


def wdt_outage(n_ports: int, mu: float, gamma: float, n_pairs: int) -> float:
    """Per-UE WDT outage, [1 - K (mu^2/(gamma+1))^(N-1) - K ((1-mu^2)/gamma)^(N-1)]^+."""
    s = _wdt_success_terms(n_ports, mu, gamma, n_pairs)
    return min(1.0, max(0.0, 1.0 - s))


def system_wdt_outage(n_ports: int, mu: float, gamma: float, n_pairs: int) -> float:
    """Probability that at least one of the N UEs is in WDT outage."""
    s = min(1.0, _wdt_success_terms(n_ports, mu, gamma, n_pairs))
    return 1.0 - s ** n_pairs


def rate(gamma: float, log_base: float = RATE_LOG_BASE) -> float:
    return math.log1p(gamma) / math.log(log_base)


def reliable_throughput(n_ports: int, mu: float, gamma: float, n_pairs: int, alpha: float,
                        log_base: float = RATE_LOG_BASE) -> float:
    """N R alpha (1 - system outage), with R = log(1 + gamma)."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    s = min(1.0, _wdt_success_terms(n_ports, mu, gamma, n_pairs))
    return n_pairs * rate(gamma, log_base) * alpha * s ** n_pairs


# ---------------------------------------------------------------------------
# WET outage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WetOutageInputs:
    """Inputs to the WET outage; ``normalized_threshold`` is Q_th / (P (1 - mu^2))."""

    n_pairs: int
    n_ports: int
    mu: float
    normalized_threshold: float

    def __post_init__(self):
        _check_pairs(self.n_pairs, 1)
        _check_ports(self.n_ports)
        if not (0.0 <= self.mu <= MU_MAX):
            raise DomainError(f"mu must lie in [0, {MU_MAX}] for WET formulas, got {self.mu}")
        if not (math.isfinite(self.normalized_threshold) and self.normalized_threshold >= 0):
            raise DomainError(f"normalized threshold must be >= 0, got {self.normalized_threshold}")

    @classmethod
    def from_params(cls, params: SystemParams, mu=None) -> "WetOutageInputs":
        mu = port_correlation(params.antenna_size).mu if mu is None else float(mu)
        if mu > MU_MAX:
            raise DomainError(f"mu = {mu} too close to 1 for WET formulas")
        return cls(params.n_pairs, params.n_ports, mu,
                   params.harvest_threshold / (params.tx_power * (1.0 - mu * mu)))


def _noncentrality_scale(mu):
    return mu * mu / (1.0 - mu * mu)


def _cdf_power(q, k):
    """(1 - q)^k, with 0^0 = 1."""
    if k == 0:
        return np.ones_like(q)
    with np.errstate(divide="ignore"):
        return np.exp(k * np.log1p(-q))


def chi2_tail_point(n_pairs: int, tail: float) -> float:
    """Smallest R (to bisection precision) with P(chi2_{2N} > R) <= tail."""
    hi = 2.0 * n_pairs + 10.0
    while regularized_gamma_q(n_pairs, hi / 2.0) > tail:
        hi *= 1.5
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if regularized_gamma_q(n_pairs, mid / 2.0) > tail:
            lo = mid
        else:
            hi = mid
    return hi


def _wet_integrand(inputs: WetOutageInputs):
    n, k = inputs.n_pairs, inputs.n_ports
    c = _noncentrality_scale(inputs.mu)
    b = math.sqrt(inputs.normalized_threshold)

    def g(r):
        r = np.asarray(r, dtype=float)
        q = marcum_q(n, np.sqrt(c * r), b)
        return chi2_pdf_even(r, n) * _cdf_power(q, k)

    return g


def wet_outage_quadrature(inputs: WetOutageInputs, *, epsabs: float = 1e-9) -> float:
    """WET outage by adaptive integration over the anchor energy r0 (reference)."""
    if inputs.normalized_threshold == 0.0:
        return 0.0
    r_max = chi2_tail_point(inputs.n_pairs, 1e-12)
    value, _ = adaptive_integrate(_wet_integrand(inputs), 0.0, r_max, epsabs=epsabs)
    return min(1.0, max(0.0, value))


def wet_outage_gl(inputs: WetOutageInputs, n: int = DEFAULT_QUAD_ORDER) -> float:
    """WET outage as the Gauss-Laguerre sum

        sum_l w_l beta_l^(N-1) e^(beta_l/2) / (2^N Gamma(N)) [1 - Q_N(sqrt(c beta_l), sqrt(t))]^K
    """
    if inputs.normalized_threshold == 0.0:
        return 0.0
    rule = gauss_laguerre_rule(n)
    nn, k = inputs.n_pairs, inputs.n_ports
    beta = rule.nodes
    c = _noncentrality_scale(inputs.mu)
    # w_l * beta^(N-1) * e^(beta/2) / (2^N Gamma(N)), assembled in logs.
    log_coef = (rule.log_weights + (nn - 1) * np.log(beta) + 0.5 * beta
                - nn * math.log(2.0) - math.lgamma(nn))
    q = marcum_q(nn, np.sqrt(c * beta), math.sqrt(inputs.normalized_threshold))
    total = float(np.sum(np.exp(log_coef) * _cdf_power(q, k)))
    return min(1.0, max(0.0, total))


def max_harvest_cdf(z, n_pairs: int, n_ports: int, mu: float, *, epsabs: float = 1e-10):
    """P(max_k Y_k <= z), vectorised over z."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.array([
        wet_outage_quadrature(WetOutageInputs(n_pairs, n_ports, mu, float(t)), epsabs=epsabs)
        for t in z
    ])
    return out


# ---------------------------------------------------------------------------
# Density of Z = max_k Y_k and the average harvested energy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyInputs:
    """``psi`` = (1 - alpha)(1 - mu^2) T P in joules."""

    psi: float
    n_pairs: int
    n_ports: int
    mu: float

    def __post_init__(self):
        _check_pairs(self.n_pairs, 1)
        _check_ports(self.n_ports)
        if not (0.0 <= self.mu <= MU_MAX):
            raise DomainError(f"mu must lie in [0, {MU_MAX}] for WET formulas, got {self.mu}")
        if not (math.isfinite(self.psi) and self.psi >= 0):
            raise DomainError(f"psi must be >= 0, got {self.psi}")

    @classmethod
    def from_params(cls, params: SystemParams, mu=None) -> "EnergyInputs":
        mu = port_correlation(params.antenna_size).mu if mu is None else float(mu)
        if mu > MU_MAX:
            raise DomainError(f"mu = {mu} too close to 1 for WET formulas")
        psi = (1.0 - params.ts_ratio) * (1.0 - mu * mu) * params.period * params.tx_power
        return cls(psi, params.n_pairs, params.n_ports, mu)


def _pdf_integrand(n_pairs, n_ports, mu, z):
    """Vector integrand over r for f_Z at each entry of z; returns (len(r), len(z))."""
    c = _noncentrality_scale(mu)
    b = np.sqrt(np.asarray(z, dtype=float))

    def g(r):
        r = np.asarray(r, dtype=float)
        a = np.sqrt(c * r)[:, None]
        q = marcum_q(n_pairs, a, b[None, :])
        dq = marcum_q_diff(n_pairs, a, b[None, :])
        weight = 0.5 * n_ports * chi2_pdf_even(r, n_pairs)
        return weight[:, None] * _cdf_power(q, n_ports - 1) * dq

    return g


def max_harvest_pdf(z, n_pairs: int, n_ports: int, mu: float, *, epsabs: float = 1e-11):
    """Density f_Z(z) of Z = max_k Y_k, by adaptive integration over r0.

    f_Z(z) = K int f_r0(r) / 2 [1 - Q_N(a, sqrt z)]^(K-1) [Q_N(a, sqrt z) - Q_{N-1}(a, sqrt z)] dr
    with a = sqrt(mu^2 r / (1 - mu^2)).  Accepts a scalar or an array of z.
    """
    _check_pairs(n_pairs, 1)
    _check_ports(n_ports)
    _check_mu(mu, MU_MAX + 1e-15)
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if (z_arr < 0).any():
        raise DomainError("z must be >= 0")
    r_max = chi2_tail_point(n_pairs, 1e-13)
    value, _ = adaptive_integrate(_pdf_integrand(n_pairs, n_ports, mu, z_arr), 0.0, r_max,
                                  epsabs=epsabs)
    value = np.maximum(np.atleast_1d(value), 0.0)
    return value if np.ndim(z) else float(value[0])


def max_harvest_tail_point(n_pairs: int, n_ports: int, mu: float, rel_tail: float) -> float:
    """A z_max with int_{z_max}^inf z f_Z(z) dz <= rel_tail * E[Y_1].

    Uses P(Z > z) <= K P(Y_1 > z) with Y_1 ~ chi2_{2N} / (1 - mu^2), giving
    int_{z_max}^inf z f_Z <= K E[Y_1] Q(N + 1, z_max (1 - mu^2) / 2).
    """
    s = 1.0 - mu * mu
    hi = (2.0 * n_pairs + 10.0) / s
    while n_ports * regularized_gamma_q(n_pairs + 1, hi * s / 2.0) > rel_tail:
        hi *= 1.5
    return hi


@lru_cache(maxsize=256)
def expected_max_harvest(n_pairs: int, n_ports: int, mu: float, rtol: float = 1e-7) -> float:
    """E[max_k Y_k] = int z f_Z(z) dz by nested adaptive quadrature."""
    _check_pairs(n_pairs, 1)
    _check_ports(n_ports)
    _check_mu(mu, MU_MAX + 1e-15)
    mean_y = 2.0 * n_pairs / (1.0 - mu * mu)
    z_max = max_harvest_tail_point(n_pairs, n_ports, mu, 1e-3 * rtol)
    inner_tol = 1e-3 * rtol * mean_y / z_max
    r_max = chi2_tail_point(n_pairs, 1e-3 * rtol)

    def outer(z):
        fz, _ = adaptive_integrate(_pdf_integrand(n_pairs, n_ports, mu, z), 0.0, r_max,
                                   epsabs=inner_tol)
        return np.asarray(z) * np.atleast_1d(fz)

    value, _ = adaptive_integrate(outer, 0.0, z_max, epsabs=0.5 * rtol * mean_y,
                                  initial_panels=16)
    return float(value)


def avg_energy_quadrature(inputs: EnergyInputs, *, rtol: float = 1e-7) -> float:
    """Average harvested energy psi * E[max_k Y_k] in joules (reference)."""
    if inputs.psi == 0.0:
        return 0.0
    return inputs.psi * expected_max_harvest(inputs.n_pairs, inputs.n_ports, float(inputs.mu), rtol)


def avg_energy_gl(inputs: EnergyInputs, n_outer: int = DEFAULT_QUAD_ORDER,
                  n_inner: int = DEFAULT_QUAD_ORDER, *, verbatim: bool = False) -> float:
    """Average harvested energy by a double Gauss-Laguerre sum.

    With ``verbatim=True`` the outer sum carries exp(beta_u) w_u only, which
    integrates f_Z itself and so returns about psi.  The default includes the
    factor beta_u that the z in z f_Z(z) contributes at each outer node.
    """
    if inputs.psi == 0.0:
        return 0.0
    n, k = inputs.n_pairs, inputs.n_ports
    outer = gauss_laguerre_rule(n_outer)
    inner = gauss_laguerre_rule(n_inner)
    c = _noncentrality_scale(inputs.mu)
    beta_l = inner.nodes
    beta_u = outer.nodes
    log_inner = (inner.log_weights + (n - 1) * np.log(beta_l) + 0.5 * beta_l
                 - (n + 1) * math.log(2.0) - math.lgamma(n))
    a = np.sqrt(c * beta_l)[None, :]
    b = np.sqrt(beta_u)[:, None]
    q = marcum_q(n, a, b)
    dq = marcum_q_diff(n, a, b)
    inner_sum = (np.exp(log_inner)[None, :] * _cdf_power(q, k - 1) * dq).sum(axis=1)
    outer_w = outer.scaled_weights if verbatim else outer.scaled_weights * beta_u
    return float(k * inputs.psi * np.sum(outer_w * inner_sum))


def energy_discrepancy_report(inputs: EnergyInputs, n_outer: int = DEFAULT_QUAD_ORDER,
                              n_inner: int = DEFAULT_QUAD_ORDER, *, tolerance: float = 5e-3) -> dict:
    """Compare both double-sum variants against the reference quadrature."""
    reference = avg_energy_quadrature(inputs)
    corrected = avg_energy_gl(inputs, n_outer, n_inner)
    verbatim = avg_energy_gl(inputs, n_outer, n_inner, verbatim=True)

    def rel(v):
        return abs(v - reference) / reference if reference else abs(v)

    report = {
        "reference": reference,
        "corrected": corrected,
        "verbatim": verbatim,
        "corrected_rel_error": rel(corrected),
        "verbatim_rel_error": rel(verbatim),
    }
    matching = [name for name in ("corrected", "verbatim") if report[f"{name}_rel_error"] < tolerance]
    report["matching"] = matching
    return report
