"""Cross-checks of the special functions against independent evaluation routes.

Each check compares a production routine with a route that shares none of
its code path: a Neumann series, an integral representation evaluated by
adaptive quadrature, or exact factorial moments.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import port_correlation
from .integrate import adaptive_integrate
from .specfun import (
    bessel_j0_integral,
    bessel_j1,
    chi2_pdf_even,
    gauss_laguerre_rule,
    hyp1f2,
    marcum_q,
    regularized_gamma_q,
)


def _check_hyp1f2():
    worst = 0.0
    for w in (0.1, 0.5, 1.0, 2.0, 3.0, 6.0):
        x = 2.0 * math.pi * w
        via_series = hyp1f2(0.5, 1.0, 1.5, -(x * x) / 4.0)
        via_bessel = bessel_j0_integral(x) / x
        worst = max(worst, abs(via_series - via_bessel))
    return "1F2(1/2; 1, 3/2; -x^2/4) vs Neumann series of J0 integral", worst, 1e-12


def _check_bessel_j1():
    worst = 0.0
    for x in (0.3, 2.0, 7.5, 19.0, 37.7):
        def f(t, x=x):
            return np.cos(t - x * np.sin(t)) / math.pi
        ref, _ = adaptive_integrate(f, 0.0, math.pi, epsabs=1e-14)
        worst = max(worst, abs(bessel_j1(x) - ref))
    return "J1(x) vs Bessel integral representation", worst, 1e-12


def _check_gamma_q():
    worst = 0.0
    for m, x in ((1, 0.5), (3, 2.0), (6, 9.0), (12, 4.0)):
        def f(t, m=m):
            return np.exp((m - 1) * np.log(t) - t - math.lgamma(m))
        ref, _ = adaptive_integrate(f, 0.0, x, epsabs=1e-14)
        worst = max(worst, abs(regularized_gamma_q(m, x) - (1.0 - ref)))
    return "regularized Q(m, x) vs integrated gamma density", worst, 1e-12


def _check_marcum():
    worst = 0.0
    for n in (1, 2, 4):
        for a, b in ((0.5, 1.0), (2.0, 2.5), (3.0, 1.0), (1.0, 4.0)):
            lam = a * a

            def density(y, n=n, lam=lam):
                # Noncentral chi-square (2n dof) density as a Poisson mixture of
                # central densities, truncated well past the mixing mass.
                total = np.zeros_like(y)
                for j in range(80):
                    logw = -lam / 2 + j * math.log(lam / 2) - math.lgamma(j + 1)
                    total += math.exp(logw) * chi2_pdf_even(y, n + j)
                return total

            ref, _ = adaptive_integrate(density, 0.0, b * b, epsabs=1e-13)
            worst = max(worst, abs(marcum_q(n, a, b) - (1.0 - ref)))
    return "Marcum Q_N(a, b) vs integrated noncentral chi-square density", worst, 1e-10


def _check_laguerre():
    worst = 0.0
    for n in (1, 2, 4, 8, 16, 32):
        rule = gauss_laguerre_rule(n)
        for j in range(2 * n):
            approx = float(np.sum(np.exp(rule.log_weights + j * np.log(rule.nodes))))
            worst = max(worst, abs(approx / math.factorial(j) - 1.0))
    return "Gauss-Laguerre moments int x^j e^-x = j!", worst, 1e-10


def _check_mu():
    mu = port_correlation(1e-6).mu
    return "port correlation at W -> 0 tends to 1", abs(mu - 1.0), 1e-6


CHECKS = (_check_hyp1f2, _check_bessel_j1, _check_gamma_q, _check_marcum, _check_laguerre,
          _check_mu)


def run_selftest(out=print) -> bool:
    ok = True
    for check in CHECKS:
        name, err, tol = check()
        passed = err <= tol
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}: max error {err:.2e} (tolerance {tol:.0e})")
    return ok
