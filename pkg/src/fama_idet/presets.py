"""Figure presets and the trend checks each preset's CSV is expected to satisfy."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from .channel import SystemParams
from .config import BaselineSpec, Curve, SweepSpec
from .montecarlo import MCConfig

PRESETS = ("fig2", "fig3", "fig4", "fig5")

# Common operating point: P = 1 W, T = 1 ms.
_COMMON = SystemParams(tx_power=1.0, period=1e-3)

# Trials used when MC is switched back on for the K = 5000 throughput preset.
FIG4_MC_TRIALS = 1000


def _curves(**axes) -> tuple:
    """Cartesian product of override values, labelled like ``K=50 W=1``."""
    items = [[]]
    for key, vals in axes.items():
        items = [prev + [(key, v)] for prev in items for v in vals]
    return tuple(Curve(" ".join(f"{k}={v:g}" for k, v in combo), tuple(combo)) for combo in items)


def figure_preset(name: str, *, mc: Optional[bool] = None) -> SweepSpec:
    """Sweep spec for one of the four figures.

    ``mc`` forces simulation columns on or off; by default they are on for
    every preset except fig4, whose K = 5000 points are closed form only.
    """
    if name == "fig2":
        spec = SweepSpec(
            axis="N", values=tuple(range(2, 11)),
            base=_COMMON.replace(sinr_threshold=10 ** 0.36, harvest_threshold=25.0),
            outputs=("wdt_outage", "wet_outage", "wet_outage_gl"),
            mc=MCConfig(trials=20_000, seed=2, batch=20_000),
            curves=_curves(K=(50, 100), W=(1, 2)),
        )
    elif name == "fig3":
        spec = SweepSpec(
            axis="K", values=(10, 20, 50, 100, 200, 500, 1000),
            base=_COMMON.replace(sinr_threshold=10 ** 0.61, harvest_threshold=18.0),
            outputs=("wdt_outage", "wet_outage", "wet_outage_gl"),
            mc=MCConfig(trials=10_000, seed=3, batch=10_000),
            curves=_curves(N=(3, 5), W=(1, 2)),
        )
    elif name == "fig4":
        spec = SweepSpec(
            axis="gamma_db", values=tuple(float(v) for v in range(0, 21)),
            base=_COMMON.replace(n_pairs=4, n_ports=5000, antenna_size=2.0),
            outputs=("reliable_throughput", "system_wdt_outage", "wdt_outage",
                     "mimo_throughput", "mimo_wdt_outage"),
            mc=None,
            curves=_curves(alpha=(0.3, 0.6, 0.9)),
            baseline=BaselineSpec(antennas=3, trials=100_000, seed=4),
        )
        if mc:
            spec = replace(spec, mc=MCConfig(trials=FIG4_MC_TRIALS, seed=4, batch=FIG4_MC_TRIALS))
        return spec
    elif name == "fig5":
        spec = SweepSpec(
            axis="K", values=(1, 10, 50, 100, 200, 400, 800, 1000),
            base=_COMMON.replace(n_pairs=4, antenna_size=1.0),
            outputs=("avg_energy", "avg_energy_gl", "mimo_avg_energy"),
            mc=MCConfig(trials=10_000, seed=5, batch=10_000),
            curves=_curves(alpha=(0.3, 0.5, 0.7)),
            baseline=BaselineSpec(antennas=3, trials=100_000, seed=5),
        )
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    if mc is False:
        spec = replace(spec, mc=None)
    return spec


# ---------------------------------------------------------------------------
# Trend checks on CSV rows (see sweep.read_csv)
# ---------------------------------------------------------------------------

def _by_curve(rows, **match):
    """Rows of the curve whose inputs match ``match``, in file order."""
    out = [r for r in rows if all(abs(r[k] - v) < 1e-12 for k, v in match.items())]
    if not out:
        raise ValueError(f"no rows match {match}")
    return out


def _col(rows, name):
    return [r[name] for r in rows]


def _nondecreasing(xs, strict_somewhere=True):
    ok = all(b >= a for a, b in zip(xs, xs[1:]))
    return ok and (not strict_somewhere or xs[-1] > xs[0])


def _nonincreasing(xs, strict_somewhere=True):
    return _nondecreasing([-x for x in xs], strict_somewhere)


def _pairwise_le(a, b, strict_somewhere=True):
    ok = all(x <= y for x, y in zip(a, b))
    return ok and (not strict_somewhere or any(x < y for x, y in zip(a, b)))


def _mc_nonincreasing(rows, col):
    """Monotone within noise: each step up is at most 3 combined standard errors."""
    m, s = _col(rows, f"{col}_mc"), _col(rows, f"{col}_mc_se")
    steps = all(m[i + 1] - m[i] <= 3 * (s[i] ** 2 + s[i + 1] ** 2) ** 0.5 for i in range(len(m) - 1))
    return steps and m[-1] < m[0]


def check_fig2(rows) -> list:
    res = []
    for k in (50, 100):
        for w in (1, 2):
            c = _by_curve(rows, K=k, W=w)
            res.append((f"K={k} W={w}: WET outage decreasing in N",
                        _nonincreasing(_col(c, "wet_outage"))))
            res.append((f"K={k} W={w}: WDT outage increasing in N",
                        _nondecreasing(_col(c, "wdt_outage"))))
            if "wet_outage_mc" in c[0]:
                res.append((f"K={k} W={w}: simulated WET outage decreasing in N",
                            _mc_nonincreasing(c, "wet_outage")))
    for metric in ("wdt_outage", "wet_outage"):
        for w in (1, 2):
            res.append((f"W={w}: {metric} improved by K=50 -> 100",
                        _pairwise_le(_col(_by_curve(rows, K=100, W=w), metric),
                                     _col(_by_curve(rows, K=50, W=w), metric))))
        for k in (50, 100):
            res.append((f"K={k}: {metric} improved by W=1 -> 2",
                        _pairwise_le(_col(_by_curve(rows, K=k, W=2), metric),
                                     _col(_by_curve(rows, K=k, W=1), metric))))
    return res


def check_fig3(rows) -> list:
    res = []
    for n in (3, 5):
        for w in (1, 2):
            c = _by_curve(rows, N=n, W=w)
            for metric in ("wdt_outage", "wet_outage"):
                res.append((f"N={n} W={w}: {metric} decreasing in K",
                            _nonincreasing(_col(c, metric))))
        for metric in ("wdt_outage", "wet_outage"):
            res.append((f"N={n}: {metric} improved by W=1 -> 2",
                        _pairwise_le(_col(_by_curve(rows, N=n, W=2), metric),
                                     _col(_by_curve(rows, N=n, W=1), metric))))
    return res


def _interior_max(xs) -> bool:
    i = max(range(len(xs)), key=xs.__getitem__)
    return 0 < i < len(xs) - 1


def check_fig4(rows) -> list:
    res = []
    alphas = sorted({r["alpha"] for r in rows})
    curves = {a: _by_curve(rows, alpha=a) for a in alphas}
    for a, c in curves.items():
        thr = _col(c, "reliable_throughput")
        res.append((f"alpha={a:g}: throughput has an interior maximum in gamma",
                    _interior_max(thr)))
        i = max(range(len(thr)), key=thr.__getitem__)
        res.append((f"alpha={a:g}: throughput rises to the peak and falls after it",
                    _nondecreasing(thr[: i + 1]) and _nonincreasing(thr[i:])))
        res.append((f"alpha={a:g}: FAMA throughput above the MIMO baseline at every gamma",
                    all(f > m for f, m in zip(thr, _col(c, "mimo_throughput")))))
    for lo, hi in zip(alphas, alphas[1:]):
        res.append((f"throughput increasing in alpha ({lo:g} -> {hi:g})",
                    _pairwise_le(_col(curves[lo], "reliable_throughput"),
                                 _col(curves[hi], "reliable_throughput"))))
    return res


def check_fig5(rows) -> list:
    res = []
    alphas = sorted({r["alpha"] for r in rows})
    curves = {a: _by_curve(rows, alpha=a) for a in alphas}
    for a, c in curves.items():
        res.append((f"alpha={a:g}: average energy increasing in K",
                    _nondecreasing(_col(c, "avg_energy"))))
        at800 = [r for r in c if r["K"] == 800][0]
        res.append((f"alpha={a:g}: FAMA above the MIMO baseline at K=800",
                    at800["avg_energy"] > at800["mimo_avg_energy"] + 3 * at800["mimo_avg_energy_se"]))
    for lo, hi in zip(alphas, alphas[1:]):
        res.append((f"average energy decreasing in alpha ({lo:g} -> {hi:g})",
                    _pairwise_le(_col(curves[hi], "avg_energy"), _col(curves[lo], "avg_energy"))))
    return res


TREND_CHECKS = {"fig2": check_fig2, "fig3": check_fig3, "fig4": check_fig4, "fig5": check_fig5}


def check_trends(name: str, rows) -> list:
    """List of (description, passed) for the preset's qualitative claims."""
    return TREND_CHECKS[name](rows)
