"""Special functions for the FAMA-IDET analysis.

Scalar routines (Bessel J1, 1F2, I_nu, incomplete gamma, Laguerre) work on
plain floats.  The Marcum Q routines broadcast over numpy arrays because they
sit in the inner loops of every quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericError, RangeError

MAX_TERMS = 10_000
SERIES_RTOL = 1e-16

# e**-42 ~ 5.7e-19: Poisson weights below this (past the mode) end the Marcum sum.
_POISSON_LOG_CUTOFF = -42.0


def _require_finite(name, x):
    if isinstance(x, bool) or not isinstance(x, (int, float, np.integer, np.floating)):
        raise DomainError(f"{name} must be a real number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    return x


def _require_int(name, n, minimum):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        else:
            raise DomainError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {n}")
    return n


# ---------------------------------------------------------------------------
# Bessel functions of the first kind
# ---------------------------------------------------------------------------

def _bessel_j_miller(x, nmax):
    """J_0(x) .. J_nmax(x) for x > 0 by Miller's backward recurrence.

    Normalised with J_0 + 2 * sum J_2k = 1.  Stable for every order because
    the recurrence runs in the direction where J_n is dominant.
    """
    start = int(max(x, nmax) + 30 + 6 * x ** (1.0 / 3.0))
    vals = [0.0] * (nmax + 1)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    for k in range(start, 0, -1):
        if k <= nmax:
            vals[k] = j_cur
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_next, j_cur = j_cur, (2.0 * k / x) * j_cur - j_next
        if abs(j_cur) > 1e250:
            j_next *= 1e-250
            j_cur *= 1e-250
            norm *= 1e-250
            vals = [v * 1e-250 for v in vals]
    vals[0] = j_cur
    norm += j_cur
    return [v / norm for v in vals]


def _hankel_j(nu, x):
    """Large-argument Hankel expansion of J_nu(x), x > 0."""
    mu = 4.0 * nu * nu
    chi = x - (0.5 * nu + 0.25) * math.pi
    p = 1.0
    q = 0.0
    term = 1.0
    prev = math.inf
    for k in range(1, 200):
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) > prev:
            break
        prev = abs(term)
        # k odd feeds Q with sign (-1)^((k-1)/2); k even feeds P with (-1)^(k/2)
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += -term if (k // 2) % 2 else term
        if abs(term) < 1e-17:
            break
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j1(x: float) -> float:
    """Bessel function of the first kind, order one."""
    x = _require_finite("x", x)
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    if ax < 1.0:
        # Alternating series, no cancellation below |x| = 1.
        half = 0.5 * ax
        term = half
        total = term
        k = 0
        while abs(term) > SERIES_RTOL * abs(total) * 1e-2:
            k += 1
            term *= -half * half / (k * (k + 1))
            total += term
        val = total
    elif ax <= 30.0:
        val = _bessel_j_miller(ax, 1)[1]
    else:
        val = _hankel_j(1, ax)
    return -val if x < 0 else val


def bessel_j0_integral(x: float) -> float:
    """Integral of J_0 from 0 to x, via the Neumann series 2 * sum J_{2k+1}(x).

    Equal to ``x * hyp1f2(0.5, 1, 1.5, -x**2 / 4)``; used as an independent
    route in the self-test.
    """
    x = _require_finite("x", x)
    if x == 0.0:
        return 0.0
    ax = abs(x)
    vals = _bessel_j_miller(ax, int(ax) + 60)
    total = 2.0 * math.fsum(vals[1::2])
    return -total if x < 0 else total


# ---------------------------------------------------------------------------
# Generalised hypergeometric 1F2
# ---------------------------------------------------------------------------

def _hyp1f2_log_peak(a, b1, b2, z):
    """log10 of the largest |term| of the 1F2 series, by a cheap float pass."""
    if z == 0.0:
        return 0.0
    log_term = 0.0
    peak = 0.0
    lz = math.log10(abs(z))
    for k in range(MAX_TERMS):
        num = abs(a + k)
        den = abs(b1 + k) * abs(b2 + k) * (k + 1)
        if num == 0.0:
            break
        log_term += math.log10(num) + lz - math.log10(den)
        peak = max(peak, log_term)
        if log_term < peak - 20 and k > abs(z):
            break
    return peak


def hyp1f2(a: float, b1: float, b2: float, z: float) -> float:
    """Generalised hypergeometric function 1F2(a; b1, b2; z).

    Sums the defining power series.  For negative z the terms alternate and
    grow to roughly exp(2 * sqrt(|z|)) before decaying, so the sum is carried
    in decimal arithmetic with enough digits to absorb that cancellation; the
    result is correctly rounded to double for |z| up to several hundred.
    """
    a = _require_finite("a", a)
    b1 = _require_finite("b1", b1)
    b2 = _require_finite("b2", b2)
    z = _require_finite("z", z)
    for name, b in (("b1", b1), ("b2", b2)):
        if b <= 0 and b.is_integer():
            raise DomainError(f"{name} must not be a non-positive integer, got {b}")
    if z == 0.0:
        return 1.0

    peak = _hyp1f2_log_peak(a, b1, b2, z)
    digits = 25 + int(math.ceil(max(peak, 0.0)))
    while True:
        value = _hyp1f2_decimal(a, b1, b2, z, digits)
        if value == 0:
            return 0.0
        lost = peak - math.log10(abs(float(value))) if float(value) != 0.0 else math.inf
        if lost + 20 <= digits or digits > 400:
            return float(value)
        digits = int(lost) + 25


def _hyp1f2_decimal(a, b1, b2, z, digits):
    with localcontext() as ctx:
        ctx.prec = digits
        da, db1, db2, dz = Decimal(a), Decimal(b1), Decimal(b2), Decimal(z)
        term = Decimal(1)
        total = Decimal(1)
        # Stop at 1e-16 of the running sum, once past the peak term.
        rtol = Decimal(SERIES_RTOL)
        for k in range(MAX_TERMS):
            term = term * (da + k) * dz / ((db1 + k) * (db2 + k) * (k + 1))
            total += term
            if term == 0 or (abs(term) <= rtol * abs(total) and k + 1 > abs(z) ** 0.5):
                return total
        raise NumericError(
            f"1F2 series did not converge in {MAX_TERMS} terms", partial=float(total)
        )


# ---------------------------------------------------------------------------
# Modified Bessel I_nu
# ---------------------------------------------------------------------------

def _besseli_series(nu, x):
    half = 0.5 * x
    log_first = nu * math.log(half) - math.lgamma(nu + 1)
    term = math.exp(log_first)
    total = term
    q = half * half
    k = 0
    while True:
        ratio = q / ((k + 1) * (k + nu + 1))
        term *= ratio
        total += term
        k += 1
        if term <= SERIES_RTOL * total and ratio < 0.5:
            return total
        if k > MAX_TERMS:
            raise NumericError("I_nu series did not converge", partial=total)


def modified_bessel_i(nu: int, x: float) -> float:
    """Modified Bessel function of the first kind I_nu(x), integer nu, 0 <= x <= 700."""
    nu = _require_int("nu", nu, 0)
    x = _require_finite("x", x)
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x > 700.0:
        raise RangeError("I_nu(x) overflows for x > 700; use modified_bessel_i_scaled")
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    return _besseli_series(nu, x)


def modified_bessel_i_scaled(nu: int, x: float) -> float:
    """exp(-x) * I_nu(x), finite for every x >= 0."""
    nu = _require_int("nu", nu, 0)
    x = _require_finite("x", x)
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    if x <= 700.0:
        return math.exp(-x) * _besseli_series(nu, x)
    if x > 20.0 * (nu + 1) ** 2:
        mu = 4.0 * nu * nu
        term = 1.0
        total = 1.0
        for k in range(1, 200):
            nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
            if abs(nxt) >= abs(term):
                break
            term = nxt
            total += term
            if abs(term) < 1e-17 * abs(total):
                break
        return total / math.sqrt(2.0 * math.pi * x)
    # Log-domain series around the peak term.
    half = 0.5 * x
    lh = math.log(half)
    logs = []
    k = 0
    peak = -math.inf
    while True:
        lt = (2 * k + nu) * lh - math.lgamma(k + 1) - math.lgamma(k + nu + 1) - x
        logs.append(lt)
        peak = max(peak, lt)
        k += 1
        if lt < peak - 40 and half * half / (k * (k + nu)) < 1:
            break
        if k > 50 * MAX_TERMS:
            raise NumericError("scaled I_nu series did not converge")
    return math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)


# ---------------------------------------------------------------------------
# Incomplete gamma and Marcum Q
# ---------------------------------------------------------------------------

def regularized_gamma_q(m: int, x: float) -> float:
    """Upper regularised incomplete gamma Q(m, x) for integer m >= 1.

    Q(m, x) = exp(-x) * sum_{j<m} x**j / j!, i.e. P(Poisson(x) < m).
    """
    m = _require_int("m", m, 1)
    x = _require_finite("x", x)
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    lx = math.log(x)
    terms = []
    peak = 0.0
    if m - 1 > x:
        # Q is close to one: sum the small upper tail sum_{j>=m} and complement.
        j = m
        while True:
            t = math.exp(-x + j * lx - math.lgamma(j + 1))
            terms.append(t)
            peak = max(peak, t)
            if t <= 1e-18 * peak:
                break
            j += 1
        return max(0.0, 1.0 - math.fsum(terms))
    # Walk down from the largest index; below x the terms shrink geometrically.
    for j in range(m - 1, -1, -1):
        t = math.exp(-x + j * lx - math.lgamma(j + 1))
        terms.append(t)
        peak = max(peak, t)
        if j < x and t <= 1e-18 * peak:
            break
    return min(1.0, math.fsum(terms))


def _marcum_core(order, a, b, diff):
    """Poisson-mixture evaluation shared by marcum_q and marcum_q_diff.

    With lam = a**2/2 and x = b**2/2,
        Q_N(a, b)           = sum_k Pois(k; lam) * Q(N + k, x)
        Q_N(a,b)-Q_{N-1}    = sum_k Pois(k; lam) * Pois(N - 1 + k; x)
    Everything is carried in logs so neither weights nor terms underflow
    for large arguments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.isnan(a).any() or np.isnan(b).any():
        raise DomainError("Marcum Q arguments must not be NaN")
    if (a < 0).any() or (b < 0).any():
        raise DomainError("Marcum Q arguments must be >= 0")
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape
    lam = 0.5 * a.ravel() ** 2
    x = 0.5 * b.ravel() ** 2
    if not (np.isfinite(lam).all() and np.isfinite(x).all()):
        raise DomainError("Marcum Q arguments must be finite")

    with np.errstate(divide="ignore", invalid="ignore"):
        log_lam = np.log(lam)
        log_x = np.log(x)

        if diff:
            # log Pois(N-1; x); 0 * log(0) is taken as 0.
            n1 = order - 1
            log_t = -x + (n1 * log_x if n1 else 0.0) - math.lgamma(order)
            m = n1
        else:
            # Q(N, x) from its finite sum, then log Pois(N; x) as next increment.
            q_cur = np.zeros_like(x)
            log_t = -x.copy()
            for j in range(order):
                q_cur += np.exp(log_t)
                log_t = log_t + log_x - math.log(j + 1)
            m = order

        total = np.zeros_like(x)
        # Rounding in the log weights is systematic; dividing by their sum
        # (which is 1 up to a truncated tail < 1e-17) removes it.
        weight_sum = np.zeros_like(x)
        lam_max = float(lam.max()) if lam.size else 0.0
        k = 0
        while True:
            log_p = -lam + (k * log_lam if k else 0.0) - math.lgamma(k + 1)
            p_k = np.exp(log_p)
            weight_sum += p_k
            if diff:
                total += np.exp(log_p + log_t)
            else:
                total += p_k * q_cur
                q_cur = q_cur + np.exp(log_t)
            m += 1
            log_t = -x + m * log_x - math.lgamma(m + 1)
            k += 1
            if k > lam_max and not (log_p > _POISSON_LOG_CUTOFF).any():
                break
            if k > 50 * MAX_TERMS:
                raise NumericError("Marcum Q Poisson sum did not terminate")
    out = np.clip(total / weight_sum, 0.0, 1.0).reshape(shape)
    return out if shape else float(out)


def marcum_q(order: int, a, b):
    """Generalised Marcum Q-function Q_N(a, b) for integer N >= 1.

    Survival function of sqrt(X) with X noncentral chi-square, 2N degrees of
    freedom, noncentrality a**2, evaluated at b.  Broadcasts over arrays.
    """
    order = _require_int("order", order, 1)
    return _marcum_core(order, a, b, diff=False)


def marcum_q_diff(order: int, a, b):
    """Q_N(a, b) - Q_{N-1}(a, b) for N >= 1, summed directly (no cancellation).

    Equals 2 * (density of the noncentral chi-square at b**2), so it is the
    derivative -2 dQ_N/d(b**2).  For N = 1 this uses the series value of Q_0.
    """
    order = _require_int("order", order, 1)
    return _marcum_core(order, a, b, diff=True)


def chi2_pdf_even(r, dof_half: int):
    """Density of a chi-square with 2 * dof_half degrees of freedom."""
    r = np.asarray(r, dtype=float)
    n = dof_half
    with np.errstate(divide="ignore"):
        log_r = np.log(r)
    lead = (n - 1) * log_r if n > 1 else 0.0
    out = np.exp(lead - 0.5 * r - n * math.log(2.0) - math.lgamma(n))
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# Laguerre polynomials and Gauss-Laguerre rules
# ---------------------------------------------------------------------------

def laguerre_eval(n: int, x: float) -> float:
    """Laguerre polynomial L_n(x) by the three-term recurrence."""
    n = _require_int("n", n, 0)
    x = _require_finite("x", x)
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def _laguerre_pair_scaled(n, x):
    """(L_n(x), L_{n-1}(x), log_scale) with the pair rescaled to avoid overflow."""
    prev, cur = 1.0, 1.0 - x
    log_scale = 0.0
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
        if abs(cur) > 1e200:
            prev *= 1e-200
            cur *= 1e-200
            log_scale += 200.0 * math.log(10.0)
    return cur, prev, log_scale


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Laguerre nodes and weights of order n.

    ``weights`` follow the textbook definition (they carry e**-node and
    underflow to zero past n ~ 180).  ``scaled_weights`` = weights * exp(nodes)
    and ``log_weights`` stay representable for every supported order; the
    integrators use those.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray

    @property
    def scaled_weights(self) -> np.ndarray:
        return np.exp(self.log_weights + self.nodes)

    def integrate(self, f) -> float:
        """Approximate the integral of f over [0, inf); f is vectorised."""
        return float(np.sum(self.scaled_weights * f(self.nodes)))


def _readonly(arr):
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


NEWTON_RTOL = 1e-14


def _newton_floor(n):
    """Accepted relative Newton step: 1e-13, relaxed for large n where the
    recurrence's own rounding error (about n * eps near the smallest root)
    exceeds it."""
    return max(1e-13, 2e-14 * n)


@lru_cache(maxsize=64)
def gauss_laguerre_rule(n: int) -> QuadratureRule:
    """Nodes = roots of L_n by Newton iteration, weights w = x / ((n+1) L_{n+1}(x))**2."""
    n = _require_int("n", n, 1)
    if n > 512:
        raise DomainError(f"quadrature order must be <= 512, got {n}")
    nodes = []
    log_w = []
    z = 0.0
    for i in range(n):
        # Initial guesses after Stroud & Secrest / Numerical Recipes gaulag.
        if i == 0:
            z = 3.0 / (1.0 + 2.4 * n)
        elif i == 1:
            z += 15.0 / (1.0 + 2.5 * n)
        else:
            ai = i - 1
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
        best = math.inf
        for _ in range(100):
            ln, lnm1, _scale = _laguerre_pair_scaled(n, z)
            step = ln / (n * (ln - lnm1) / z)
            z -= step
            rel = abs(step) / z
            # Stop at the target, or once steps stop shrinking (rounding floor).
            if rel <= NEWTON_RTOL or rel >= best:
                break
            best = rel
        if not min(rel, best) <= _newton_floor(n):
            raise NumericError(
                f"Newton iteration for Laguerre node {i + 1} of {n} did not converge"
            )
        # L_{n+1}(z) = -n L_{n-1}(z) / (n+1) at a root of L_n.
        _ln, lnm1, scale = _laguerre_pair_scaled(n, z)
        lnp1 = -n * lnm1 / (n + 1)
        log_w.append(
            math.log(z) - 2.0 * math.log(n + 1) - 2.0 * (math.log(abs(lnp1)) + scale)
        )
        nodes.append(z)
    nodes_arr = np.array(nodes)
    if not (np.all(np.diff(nodes_arr) > 0) and nodes_arr[0] > 0):
        raise NumericError(f"Laguerre roots for n={n} are not distinct and ascending")
    log_w_arr = np.array(log_w)
    return QuadratureRule(
        order=n,
        nodes=_readonly(nodes_arr),
        weights=_readonly(np.exp(log_w_arr)),
        log_weights=_readonly(log_w_arr),
    )
