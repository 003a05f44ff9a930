"""Parameter sweeps over the metric registry, CSV emission and optional SVG plots."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from . import closedform as cf
from .channel import SystemParams, port_correlation
from .config import SweepSpec
from .errors import DomainError, NumericError, RangeError, UsageError
from .montecarlo import (
    EstimateWithCI,
    MCConfig,
    compose_throughput,
    estimate_all,
    mimo_mrc_baseline,
)


@dataclass
class _Point:
    params: SystemParams
    quad_order: int
    mc: Optional[MCConfig]
    baseline: object
    _mu: Optional[float] = None
    _mc: Optional[dict] = None
    _base: object = None

    @property
    def mu(self) -> float:
        if self._mu is None:
            self._mu = port_correlation(self.params.antenna_size).mu
        return self._mu

    def gamma(self) -> float:
        return self.params.sinr_threshold

    def wet_inputs(self):
        return cf.WetOutageInputs.from_params(self.params, self.mu)

    def energy_inputs(self):
        return cf.EnergyInputs.from_params(self.params, self.mu)

    def mc_results(self) -> dict:
        if self._mc is None:
            self._mc = estimate_all(self.params, self.mc, self.mu)
        return self._mc

    def baseline_result(self):
        if self._base is None:
            b = self.baseline
            mc = MCConfig(trials=b.trials, seed=b.seed, batch=max(b.trials, 1))
            self._base = mimo_mrc_baseline(self.params, b.antennas, mc)
        return self._base


@dataclass(frozen=True)
class Metric:
    name: str
    compute: Callable[[_Point], float]
    description: str
    mc: Optional[Callable[[_Point], EstimateWithCI]] = None
    needs_baseline: bool = False


def _wdt_args(p: _Point):
    q = p.params
    return q.n_ports, p.mu, q.sinr_threshold, q.n_pairs


def _mc_wdt(p: _Point) -> EstimateWithCI:
    res = p.mc_results()
    if "wdt_outage" not in res:
        raise DomainError("N = 1 has no interferers; set noise_power for an SINR model")
    return res["wdt_outage"]


def _mc_system_wdt(p: _Point) -> EstimateWithCI:
    e = _mc_wdt(p)
    n = p.params.n_pairs
    s = 1.0 - e.mean
    return EstimateWithCI(1.0 - s ** n, n * s ** (n - 1) * e.std_error, e.trials, e.seed)


def _mc_throughput(p: _Point) -> EstimateWithCI:
    q = p.params
    return compose_throughput(_mc_wdt(p), q.n_pairs, q.sinr_threshold, q.ts_ratio)


def _baseline_metric(attr: str) -> Callable[[_Point], EstimateWithCI]:
    return lambda p: getattr(p.baseline_result(), attr)


_REGISTRY = [
    Metric("mu", lambda p: p.mu, "port correlation parameter"),
    Metric("wdt_outage", lambda p: cf.wdt_outage(*_wdt_args(p)),
           "per-UE WDT outage (closed form)", mc=_mc_wdt),
    Metric("system_wdt_outage", lambda p: cf.system_wdt_outage(*_wdt_args(p)),
           "probability that some UE is in WDT outage", mc=_mc_system_wdt),
    Metric("reliable_throughput",
           lambda p: cf.reliable_throughput(*_wdt_args(p), p.params.ts_ratio),
           "aggregate reliable throughput, bits/s/Hz", mc=_mc_throughput),
    Metric("wet_outage", lambda p: cf.wet_outage_quadrature(p.wet_inputs()),
           "WET outage (adaptive quadrature)", mc=lambda p: p.mc_results()["wet_outage"]),
    Metric("wet_outage_gl", lambda p: cf.wet_outage_gl(p.wet_inputs(), p.quad_order),
           "WET outage (Gauss-Laguerre)"),
    Metric("avg_energy", lambda p: cf.avg_energy_quadrature(p.energy_inputs()),
           "average harvested energy, J (nested quadrature)",
           mc=lambda p: p.mc_results()["avg_energy"]),
    Metric("avg_energy_gl",
           lambda p: cf.avg_energy_gl(p.energy_inputs(), p.quad_order, p.quad_order),
           "average harvested energy, J (double Gauss-Laguerre)"),
    Metric("avg_energy_gl_verbatim",
           lambda p: cf.avg_energy_gl(p.energy_inputs(), p.quad_order, p.quad_order,
                                      verbatim=True),
           "double Gauss-Laguerre sum without the outer node factor"),
    Metric("mimo_wdt_outage", _baseline_metric("wdt_outage"), "MRC-MIMO per-UE WDT outage",
           needs_baseline=True),
    Metric("mimo_wet_outage", _baseline_metric("wet_outage"), "MRC-MIMO WET outage",
           needs_baseline=True),
    Metric("mimo_avg_energy", _baseline_metric("avg_energy"), "MRC-MIMO average energy, J",
           needs_baseline=True),
    Metric("mimo_throughput", _baseline_metric("throughput"),
           "MRC-MIMO aggregate reliable throughput", needs_baseline=True),
]

METRICS = {m.name: m for m in _REGISTRY}

INPUT_COLUMNS = ("curve", "N", "K", "W", "gamma_db", "Qth", "alpha", "P", "T", "noise_power")

_NUMERIC_ERRORS = (DomainError, NumericError, RangeError, ZeroDivisionError, OverflowError)


@dataclass
class SweepRecord:
    curve: str
    axis: str
    axis_value: object
    params: SystemParams
    values: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def inputs(self) -> dict:
        q = self.params
        return {
            "curve": self.curve,
            "N": q.n_pairs,
            "K": q.n_ports,
            "W": q.antenna_size,
            "gamma_db": q.gamma_db,
            "Qth": q.harvest_threshold,
            "alpha": q.ts_ratio,
            "P": q.tx_power,
            "T": q.period,
            "noise_power": q.noise_power or 0.0,
        }

    def row(self) -> dict:
        out = self.inputs()
        out.update(self.values)
        return out


def metric_columns(spec: SweepSpec) -> list:
    cols = []
    for name in spec.outputs:
        m = METRICS[name]
        cols.append(name)
        if m.needs_baseline:
            cols.append(f"{name}_se")
    if spec.mc is not None:
        for name in spec.outputs:
            if METRICS[name].mc is not None:
                cols += [f"{name}_mc", f"{name}_mc_se"]
    return cols


def columns(spec: SweepSpec) -> list:
    return list(INPUT_COLUMNS) + metric_columns(spec)


def _evaluate(spec: SweepSpec, curve, value, mc: Optional[MCConfig]) -> SweepRecord:
    params = spec.point_params(curve, value)
    rec = SweepRecord(curve.label, spec.axis, value, params)
    point = _Point(params, spec.quadrature_order, mc, spec.baseline)

    def run(col, fn):
        try:
            rec.values[col] = float(fn())
        except _NUMERIC_ERRORS as exc:
            rec.values[col] = math.nan
            rec.errors[col] = f"{type(exc).__name__}: {exc}"

    for name in spec.outputs:
        m = METRICS[name]
        if m.needs_baseline:
            run(name, lambda: m.compute(point).mean)
            run(f"{name}_se", lambda: m.compute(point).std_error)
        else:
            run(name, lambda: m.compute(point))
    if mc is not None:
        for name in spec.outputs:
            m = METRICS[name]
            if m.mc is not None:
                run(f"{name}_mc", lambda: m.mc(point).mean)
                run(f"{name}_mc_se", lambda: m.mc(point).std_error)
    return rec


def run_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """Evaluate every (curve, axis value) point; records follow curve then axis order.

    Numeric failures are stored per cell (value NaN, message in ``errors``)
    rather than aborting the sweep; see ``failure_report``.
    """
    if workers < 1:
        raise UsageError("workers must be >= 1")
    mc = spec.mc
    if mc is not None and workers > 1:
        # Points already run concurrently; keep each simulation single-threaded.
        mc = replace(mc, workers=1)
    tasks = [(c, v) for c in spec.curve_list() for v in spec.values]
    if workers == 1:
        return [_evaluate(spec, c, v, mc) for c, v in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: _evaluate(spec, t[0], t[1], mc), tasks))


def failure_report(records) -> list:
    """One line per failed cell."""
    lines = []
    for r in records:
        for col, msg in r.errors.items():
            lines.append(f"curve {r.curve!r}, {r.axis} = {r.axis_value}: {col}: {msg}")
    return lines


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def format_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


def render_csv(records, spec_columns: Optional[list] = None) -> str:
    records = list(records)
    if not records:
        raise UsageError("no records to write")
    cols = spec_columns or list(INPUT_COLUMNS) + [c for c in records[0].values]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        row = r.row()
        w.writerow([format_cell(row[c]) for c in cols])
    return buf.getvalue()


def emit_csv(records, path, spec_columns: Optional[list] = None) -> None:
    """Write records as CSV (12 significant digits, ``\\n`` line endings)."""
    text = render_csv(records, spec_columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_csv(text: str) -> list:
    """Parse CSV text back into rows; numeric cells become floats."""
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        out = {}
        for k, v in row.items():
            try:
                out[k] = float(v) if k != "curve" else v
            except ValueError:
                out[k] = v
        rows.append(out)
    return rows


def emit_plot(records, path) -> None:
    """One panel per metric, one line per curve, axis value on x (SVG)."""
    records = list(records)
    if not records:
        raise UsageError("no records to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    axis = records[0].axis
    metrics = [c for c in records[0].values
               if not c.endswith("_se") and not c.endswith("_mc")]
    curves = list(dict.fromkeys(r.curve for r in records))
    fig, axes = plt.subplots(len(metrics), 1, figsize=(6, 3 * len(metrics)), squeeze=False)
    for ax, metric in zip(axes[:, 0], metrics):
        for label in curves:
            rs = [r for r in records if r.curve == label]
            x = [r.axis_value for r in rs]
            line, = ax.plot(x, [r.values[metric] for r in rs], label=label)
            if f"{metric}_mc" in rs[0].values:
                ax.errorbar(x, [r.values[f"{metric}_mc"] for r in rs],
                            yerr=[3 * r.values[f"{metric}_mc_se"] for r in rs],
                            fmt="o", ms=3, color=line.get_color())
        ax.set_xlabel(axis)
        ax.set_ylabel(metric)
        ax.grid(True, alpha=0.3)
        if len(curves) > 1:
            ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
