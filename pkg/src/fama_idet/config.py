"""Line-oriented sweep configuration: ``[section]`` headers, ``key = value`` lines, ``#`` comments.

Example::

    [sweep]
    axis = K                      # one of N, K, W, gamma_db, Qth, alpha
    values = 10, 20, 50           # or [10, 20, 50], or an integer range 2..10
    outputs = wet_outage, wdt_outage
    quad_order = 150

    [system]                      # any subset; missing keys take the defaults
    N = 4
    W = 1
    gamma_db = 3.6                # or: gamma = 2.29 (linear)
    Qth = 25

    [mc]                          # optional: adds <metric>_mc and _mc_se columns
    trials = 10000
    seed = 1

    [baseline]                    # optional: needed by the mimo_* metrics
    antennas = 3

    [curve K=50]                  # optional, repeatable: per-curve [system] overrides
    K = 50
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .channel import MAX_ANTENNA_SIZE, SystemParams
from .errors import ConfigError
from .montecarlo import MCConfig

AXES = ("N", "K", "W", "gamma_db", "Qth", "alpha")

DEFAULT_QUAD_ORDER = 150

# Config key -> SystemParams field.
SYSTEM_FIELDS = {
    "N": "n_pairs",
    "K": "n_ports",
    "W": "antenna_size",
    "P": "tx_power",
    "T": "period",
    "alpha": "ts_ratio",
    "gamma": "sinr_threshold",
    "Qth": "harvest_threshold",
    "noise_power": "noise_power",
}
_SYSTEM_KEYS = tuple(SYSTEM_FIELDS) + ("gamma_db",)


def _positive(v):
    return v > 0


def _system_checks():
    return {
        "N": (int, lambda v: v >= 1, "a positive integer"),
        "K": (int, lambda v: v >= 1, "a positive integer"),
        "W": (float, lambda v: 0 < v <= MAX_ANTENNA_SIZE, f"in (0, {MAX_ANTENNA_SIZE}]"),
        "P": (float, _positive, "positive"),
        "T": (float, _positive, "positive"),
        "alpha": (float, lambda v: 0 <= v <= 1, "in [0, 1]"),
        "gamma": (float, _positive, "positive"),
        "gamma_db": (float, lambda v: -200 <= v <= 200, "in [-200, 200] dB"),
        "Qth": (float, _positive, "positive"),
        "noise_power": (float, lambda v: v >= 0, ">= 0"),
    }


@dataclass(frozen=True)
class BaselineSpec:
    antennas: int = 3
    trials: int = 100_000
    seed: int = 0


@dataclass(frozen=True)
class Curve:
    """A labelled set of overrides applied on top of the base parameters."""

    label: str
    overrides: tuple = ()

    def apply(self, base: SystemParams) -> SystemParams:
        return base.replace(**{SYSTEM_FIELDS[k]: v for k, v in self.overrides}) if self.overrides else base


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    base: SystemParams = field(default_factory=SystemParams)
    outputs: tuple = ("wdt_outage", "wet_outage", "avg_energy")
    mc: Optional[MCConfig] = None
    quadrature_order: int = DEFAULT_QUAD_ORDER
    curves: tuple = ()
    baseline: Optional[BaselineSpec] = None

    def __post_init__(self):
        validate_spec(self)

    def curve_list(self) -> tuple:
        return self.curves or (Curve("base"),)

    def point_params(self, curve: Curve, value) -> SystemParams:
        return apply_axis(curve.apply(self.base), self.axis, value)


def apply_axis(params: SystemParams, axis: str, value) -> SystemParams:
    if axis == "gamma_db":
        return params.replace(sinr_threshold=10.0 ** (value / 10.0))
    return params.replace(**{SYSTEM_FIELDS[axis]: value})


def validate_spec(spec: SweepSpec) -> None:
    from .sweep import METRICS

    if spec.axis not in AXES:
        raise ConfigError(f"axis must be one of {', '.join(AXES)}", key="axis")
    if not spec.values:
        raise ConfigError("values must be non-empty", key="values")
    diffs = [b - a for a, b in zip(spec.values, spec.values[1:])]
    if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        raise ConfigError("values must be strictly monotone", key="values")
    if not spec.outputs:
        raise ConfigError("outputs must name at least one metric", key="outputs")
    for name in spec.outputs:
        if name not in METRICS:
            raise ConfigError(f"unknown metric {name!r}", key="outputs")
        if METRICS[name].needs_baseline and spec.baseline is None:
            raise ConfigError(f"metric {name!r} needs a [baseline] section", key="outputs")
    if len(set(spec.outputs)) != len(spec.outputs):
        raise ConfigError("outputs lists a metric twice", key="outputs")
    if not 1 <= spec.quadrature_order <= 512:
        raise ConfigError("quad_order must lie in [1, 512]", key="quad_order")
    labels = [c.label for c in spec.curves]
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate curve label", key="curve")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)(?:\s+(.*?))?\s*\]$")


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def _parse_scalar(text: str, kind, lineno: int, key: str):
    text = text.strip()
    try:
        if kind is int:
            # Exact first: seeds go up to 2^64 and must not round through float.
            if re.fullmatch(r"[+-]?\d+", text):
                return int(text)
            v = float(text)
            if not v.is_integer():
                raise ValueError
            return int(v)
        v = float(text)
        if not math.isfinite(v):
            raise ValueError
        return v
    except ValueError:
        kind_name = "an integer" if kind is int else "a finite number"
        raise ConfigError(f"expected {kind_name}, got {text!r}", line=lineno, key=key) from None


def _parse_values(text: str, kind, lineno: int) -> tuple:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        step = 1 if hi >= lo else -1
        vals = list(range(lo, hi + step, step))
    else:
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if not parts:
            raise ConfigError("values must be non-empty", line=lineno, key="values")
        vals = [_parse_scalar(p, kind, lineno, "values") for p in parts]
    return tuple(kind(v) for v in vals)


def _parse_list(text: str) -> tuple:
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _axis_kind(axis: str):
    return int if axis in ("N", "K") else float


def _split_sections(text: str):
    """Yield (section, label, [(lineno, key, value)]) preserving order."""
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = (m.group(1), (m.group(2) or "").strip(), lineno, [])
            sections.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        if current is None:
            raise ConfigError("key outside of any [section]", line=lineno, key=key)
        if not value.strip():
            raise ConfigError("empty value", line=lineno, key=key)
        current[3].append((lineno, key, value.strip()))
    return sections


def _unique(entries, section, allowed):
    seen = {}
    for lineno, key, value in entries:
        if key not in allowed:
            raise ConfigError(f"unknown key in [{section}]", line=lineno, key=key)
        if key in seen:
            raise ConfigError("duplicate key", line=lineno, key=key)
        seen[key] = (lineno, value)
    return seen


def _system_overrides(entries, section) -> dict:
    checks = _system_checks()
    seen = _unique(entries, section, _SYSTEM_KEYS)
    if "gamma" in seen and "gamma_db" in seen:
        lineno = max(seen["gamma"][0], seen["gamma_db"][0])
        raise ConfigError("give either gamma or gamma_db, not both", line=lineno, key="gamma_db")
    out = {}
    for key, (lineno, value) in seen.items():
        kind, ok, what = checks[key]
        v = _parse_scalar(value, kind, lineno, key)
        if not ok(v):
            raise ConfigError(f"value {v!r} out of range, must be {what}", line=lineno, key=key)
        if key == "gamma_db":
            key, v = "gamma", 10.0 ** (v / 10.0)
        out[key] = (lineno, v)
    return out


def _build_params(base: SystemParams, overrides: dict) -> SystemParams:
    from .errors import DomainError

    try:
        return base.replace(**{SYSTEM_FIELDS[k]: v for k, (_, v) in overrides.items()})
    except DomainError as exc:
        lineno = min((ln for ln, _ in overrides.values()), default=None)
        raise ConfigError(str(exc), line=lineno) from None


def _int_section(entries, section, defaults: dict, lows: dict) -> dict:
    seen = _unique(entries, section, tuple(defaults))
    out = dict(defaults)
    for key, (lineno, value) in seen.items():
        v = _parse_scalar(value, int, lineno, key)
        if v < lows[key] or (key == "seed" and v >= 2**64):
            bound = "[0, 2^64)" if key == "seed" else f">= {lows[key]}"
            raise ConfigError(f"value {v} out of range, must be {bound}", line=lineno, key=key)
        out[key] = v
    return out


def parse_config(text: str) -> SweepSpec:
    """Parse and validate a sweep configuration; errors name the line and key."""
    sections = _split_sections(text)
    by_name: dict = {}
    curves = []
    for name, label, lineno, entries in sections:
        if name == "curve":
            if not label:
                raise ConfigError("[curve] needs a label, e.g. [curve K=50]", line=lineno)
            curves.append((label, lineno, entries))
            continue
        if name not in ("sweep", "system", "mc", "baseline"):
            raise ConfigError(f"unknown section [{name}]", line=lineno)
        if label:
            raise ConfigError(f"[{name}] takes no label", line=lineno)
        if name in by_name:
            raise ConfigError(f"duplicate section [{name}]", line=lineno)
        by_name[name] = (lineno, entries)

    if "sweep" not in by_name:
        raise ConfigError("missing [sweep] section", key="axis")
    sweep_line, sweep_entries = by_name["sweep"]
    sweep = _unique(sweep_entries, "sweep", ("axis", "values", "outputs", "quad_order"))
    for required in ("axis", "values"):
        if required not in sweep:
            raise ConfigError("missing required key", line=sweep_line, key=required)
    axis_line, axis = sweep["axis"]
    if axis not in AXES:
        raise ConfigError(f"axis must be one of {', '.join(AXES)}", line=axis_line, key="axis")
    values_line, values_text = sweep["values"]
    values = _parse_values(values_text, _axis_kind(axis), values_line)

    base = SystemParams()
    if "system" in by_name:
        base = _build_params(base, _system_overrides(by_name["system"][1], "system"))

    mc = None
    if "mc" in by_name:
        d = _int_section(by_name["mc"][1], "mc",
                         {"trials": 10_000, "seed": 0, "batch": 10_000, "workers": 1},
                         {"trials": 100, "seed": 0, "batch": 1, "workers": 1})
        mc = MCConfig(**d)

    baseline = None
    if "baseline" in by_name:
        d = _int_section(by_name["baseline"][1], "baseline",
                         {"antennas": 3, "trials": 100_000, "seed": 0},
                         {"antennas": 1, "trials": 100, "seed": 0})
        baseline = BaselineSpec(**d)

    curve_objs = []
    for label, lineno, entries in curves:
        ov = _system_overrides(entries, f"curve {label}")
        _build_params(base, ov)
        curve_objs.append(Curve(label, _canonical_overrides({k: v for k, (_, v) in ov.items()})))

    kwargs = {}
    if "outputs" in sweep:
        kwargs["outputs"] = _parse_list(sweep["outputs"][1])
    if "quad_order" in sweep:
        ln, v = sweep["quad_order"]
        kwargs["quadrature_order"] = _parse_scalar(v, int, ln, "quad_order")

    try:
        return SweepSpec(axis=axis, values=values, base=base, mc=mc, curves=tuple(curve_objs),
                         baseline=baseline, **kwargs)
    except ConfigError as exc:
        lines = {"axis": axis_line, "values": values_line}
        for k in ("outputs", "quad_order"):
            if k in sweep:
                lines[k] = sweep[k][0]
        if exc.line is None and exc.key in lines:
            raise ConfigError(exc.detail, line=lines[exc.key], key=exc.key) from None
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), line=values_line) from None


def _canonical_overrides(d: dict) -> tuple:
    order = list(SYSTEM_FIELDS)
    return tuple(sorted(d.items(), key=lambda kv: order.index(kv[0])))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def _system_lines(params: SystemParams, only_changed_from: Optional[SystemParams] = None):
    lines = []
    for key, fname in SYSTEM_FIELDS.items():
        v = getattr(params, fname)
        if only_changed_from is not None and v == getattr(only_changed_from, fname):
            continue
        if v is None:
            continue
        lines.append(f"{key} = {_fmt(v)}")
    return lines


def render_config(spec: SweepSpec) -> str:
    """Inverse of ``parse_config``: parse_config(render_config(s)) == s."""
    out = ["[sweep]", f"axis = {spec.axis}",
           "values = " + ", ".join(_fmt(v) for v in spec.values),
           "outputs = " + ", ".join(spec.outputs),
           f"quad_order = {spec.quadrature_order}", "", "[system]"]
    out += _system_lines(spec.base)
    if spec.mc is not None:
        m = spec.mc
        out += ["", "[mc]", f"trials = {m.trials}", f"seed = {m.seed}", f"batch = {m.batch}",
                f"workers = {m.workers}"]
    if spec.baseline is not None:
        b = spec.baseline
        out += ["", "[baseline]", f"antennas = {b.antennas}", f"trials = {b.trials}",
                f"seed = {b.seed}"]
    for c in spec.curves:
        out += ["", f"[curve {c.label}]"] + [f"{k} = {_fmt(v)}" for k, v in c.overrides]
    return "\n".join(out) + "\n"
