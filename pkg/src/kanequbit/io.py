"""Run configuration, CSV emission/validation and static SVG plots."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dynamics import DEFAULT_DTAU, METHODS, ModelParams
from .experiments import (
    CALIBRATED_GAMMA_D,
    FIGURE_IDS,
    SWEEP_COLUMNS,
    SweepResult,
    default_tau_max,
    resolve_initial_state,
)
from .observables import LN2, ObservableSeries, entropy_from_norm
from .qubit import BlochVector, UnphysicalStateError

CSV_COLUMNS = ("tau", "sx", "sy", "sz", "purity", "entropy", "bloch_norm", "fidelity")
CSV_HEADER = ",".join(CSV_COLUMNS)


class ConfigError(ValueError):
    """Malformed or contradictory run configuration."""


# ---------------------------------------------------------------- config

_SCENARIO_KEYS = {"scenario"}
_EXPLICIT_KEYS = {"init", "theta", "kappa", "omega", "epsilon", "gamma_d", "tau_max", "dtau", "stride"}
_COMMON_KEYS = {"method", "output", "emit_plot"}
KNOWN_KEYS = _SCENARIO_KEYS | _EXPLICIT_KEYS | _COMMON_KEYS

_PI_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<coef>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_angle(text: str) -> float:
    """A float, or a multiple of pi such as ``pi/4``, ``2pi/3`` or ``0.5*pi``."""
    m = _PI_RE.match(text)
    if m:
        value = float(m["coef"] or 1.0) * math.pi / float(m["den"] or 1.0)
        return -value if m["sign"] == "-" else value
    return float(text)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """Either a figure ``scenario`` or an explicit parameter block."""

    scenario: Optional[str] = None
    init: Optional[BlochVector] = None
    init_label: Optional[str] = None
    params: Optional[ModelParams] = None
    tau_max: Optional[float] = None
    dtau: float = DEFAULT_DTAU
    stride: int = 1
    method: str = "rk4"
    output: Optional[str] = None
    emit_plot: bool = False

    @property
    def is_scenario(self) -> bool:
        return self.scenario is not None


def build_config(values: dict) -> RunConfig:
    """Turn raw string values (from a config file or CLI flags) into a RunConfig.

    Raises ConfigError for unknown keys, bad numbers and conflicting entries.
    """
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")

    def number(key, parse=float):
        try:
            value = parse(values[key])
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r}: malformed number {values[key]!r}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"key {key!r}: value must be finite")
        return value

    method = values.get("method", "rk4")
    if method not in METHODS:
        raise ConfigError(f"key 'method': expected one of {', '.join(METHODS)}, got {method!r}")
    output = values.get("output")
    try:
        emit_plot = _parse_bool(values["emit_plot"]) if "emit_plot" in values else False
    except ValueError as exc:
        raise ConfigError(f"key 'emit_plot': {exc}") from None

    explicit = sorted(set(values) & _EXPLICIT_KEYS)
    if "scenario" in values:
        if explicit:
            raise ConfigError(
                f"'scenario' conflicts with explicit parameter key(s): {', '.join(explicit)}"
            )
        if values["scenario"] not in FIGURE_IDS:
            raise ConfigError(f"key 'scenario': unknown figure id {values['scenario']!r}")
        return RunConfig(scenario=values["scenario"], method=method, output=output, emit_plot=emit_plot)

    if not explicit:
        raise ConfigError("need either 'scenario' or an explicit parameter block")
    for required in ("init", "theta"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")
    if ("kappa" in values) == ("omega" in values):
        raise ConfigError("give exactly one of 'kappa' and 'omega'")
    if "epsilon" in values and "gamma_d" in values:
        raise ConfigError("give at most one of 'epsilon' and 'gamma_d'")

    init_text = values["init"].strip()
    try:
        if "," in init_text:
            init = resolve_initial_state([float(v) for v in init_text.split(",")])
            label = init_text.replace(" ", "")
        else:
            init = resolve_initial_state(init_text)
            label = init_text.lower()
    except UnphysicalStateError:
        raise
    except ValueError as exc:
        raise ConfigError(f"key 'init': {exc}") from None

    theta = number("theta", parse_angle)
    if "epsilon" in values:
        epsilon, gamma_d = number("epsilon"), None
    else:
        epsilon = None
        gamma_d = number("gamma_d") if "gamma_d" in values else CALIBRATED_GAMMA_D
    try:
        if "kappa" in values:
            params = ModelParams.from_raw(theta, number("kappa"), epsilon=epsilon, gamma_d=gamma_d)
        else:
            if epsilon is not None:
                gamma_d = 2.0 * epsilon
            params = ModelParams(theta, number("omega"), gamma_d, epsilon=epsilon)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None

    dtau = number("dtau") if "dtau" in values else DEFAULT_DTAU
    if "tau_max" in values:
        tau_max = number("tau_max")
    elif params.gamma_d > 0:
        tau_max = default_tau_max(params.gamma_d)
    else:
        raise ConfigError("'tau_max' is required when gamma_d = 0")
    stride = number("stride", int) if "stride" in values else 1
    return RunConfig(
        init=init,
        init_label=label,
        params=params,
        tau_max=tau_max,
        dtau=dtau,
        stride=stride,
        method=method,
        output=output,
        emit_plot=emit_plot,
    )


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
        try:
            _check_value(key, value)
        except ValueError:
            raise ConfigError(f"line {lineno}: key {key!r}: malformed value {value!r}") from None
    return build_config(values)


def _check_value(key: str, value: str) -> None:
    if key == "theta":
        parse_angle(value)
    elif key == "stride":
        int(value)
    elif key in _EXPLICIT_KEYS - {"init", "theta", "stride"}:
        float(value)


# ---------------------------------------------------------------- CSV


def format_number(x: float) -> str:
    """15 significant digits, no negative zero."""
    if x == 0:
        return "0"
    return f"{x:.15g}"


def write_csv(obs: ObservableSeries, path: Union[str, Path]) -> None:
    cols = np.column_stack(
        [obs.tau, obs.states, obs.purity, obs.entropy, obs.bloch_norm, obs.fidelity]
    ) if len(obs) else np.empty((0, len(CSV_COLUMNS)))
    lines = [CSV_HEADER]
    lines.extend(",".join(format_number(v) for v in row) for row in cols.tolist())
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path: Union[str, Path]) -> dict:
    """Columns of an observable CSV as float arrays keyed by header name."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    for i, row in enumerate(rows, start=2):
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(f"{path}: line {i} has {len(row)} fields")
    data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    return {name: data[:, j] for j, name in enumerate(CSV_COLUMNS)}


def validate_csv(path: Union[str, Path], slack: float = 1e-9) -> list[str]:
    """Problems found in an observable CSV; an empty list means it is valid."""
    try:
        cols = read_csv(path)
    except (OSError, ValueError) as exc:
        return [str(exc)]
    problems = []
    tau = cols["tau"]
    if not len(tau):
        return problems
    if tau[0] != 0:
        problems.append(f"tau starts at {tau[0]!r}, not 0")
    if np.any(np.diff(tau) <= 0):
        problems.append("tau is not strictly increasing")
    bounds = {
        "purity": (0.5, 1.0),
        "entropy": (0.0, LN2),
        "bloch_norm": (0.0, 1.0),
        "fidelity": (0.0, 1.0),
    }
    for name, (lo, hi) in bounds.items():
        v = cols[name]
        if v.min() < lo - slack or v.max() > hi + slack:
            problems.append(f"{name} outside [{lo:.6g}, {hi:.6g}]")
    norm = np.sqrt(cols["sx"] ** 2 + cols["sy"] ** 2 + cols["sz"] ** 2)
    # 15-digit rendering limits consistency checks to ~1e-14
    if np.max(np.abs(norm - cols["bloch_norm"])) > 1e-12:
        problems.append("bloch_norm inconsistent with sx, sy, sz")
    if np.max(np.abs(cols["purity"] - 0.5 * (1 + cols["bloch_norm"] ** 2))) > 1e-12:
        problems.append("purity inconsistent with bloch_norm")
    if np.max(np.abs(cols["entropy"] - entropy_from_norm(cols["bloch_norm"]))) > 1e-10:
        problems.append("entropy inconsistent with bloch_norm")
    if np.any(np.diff(cols["bloch_norm"]) > slack):
        problems.append("bloch_norm increases")
    return problems


def write_sweep_csv(result: SweepResult, path: Union[str, Path]) -> None:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in result.rows:
        fields = []
        for name in SWEEP_COLUMNS:
            v = getattr(row, name)
            if v is None:
                fields.append("")
            elif isinstance(v, float):
                fields.append(format_number(v))
            else:
                fields.append(str(v))
        lines.append(",".join(fields))
    _write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------- SVG

_WIDTH, _HEIGHT = 640, 400
_LEFT, _RIGHT, _TOP, _BOTTOM = 60, 170, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
_MAX_POINTS = 2000


def _curves(data, observable: str):
    if isinstance(data, ObservableSeries):
        names = ("purity", "entropy", "bloch_norm", "fidelity")
        return [(name, data.tau, getattr(data, name)) for name in names]
    if isinstance(data, SweepResult):
        return [
            (f"kappa={row.kappa:g}, theta={row.theta:.4g}", obs.tau, getattr(obs, observable))
            for row, obs in zip(data.rows, data.series)
        ]
    return [(label, obs.tau, getattr(obs, observable)) for label, obs in data]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(data, observable: str = "purity", title: str = "") -> str:
    """SVG text for a series (all four observables) or for labelled families of
    series (one observable). Output depends only on the input values."""
    curves = _curves(data, observable)
    if not curves or not any(len(t) for _, t, _ in curves):
        raise ValueError("nothing to plot")
    t_max = max(float(t[-1]) for _, t, _ in curves if len(t))
    t_max = t_max if t_max > 0 else 1.0
    y_lo, y_hi = 0.0, 1.0
    pw, ph = _WIDTH - _LEFT - _RIGHT, _HEIGHT - _TOP - _BOTTOM

    def px(t):
        return _LEFT + pw * (t / t_max)

    def py(y):
        return _TOP + ph * (1.0 - (y - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{_WIDTH / 2:.2f}" y="18" text-anchor="middle" font-size="13">{_escape(title)}</text>')
    x0, x1, y0, y1 = _LEFT, _LEFT + pw, _TOP + ph, _TOP
    out.append(f'<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>'
               f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>')
    for k in range(6):
        t = t_max * k / 5
        x = px(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{y0}" x2="{_fmt(x)}" y2="{y0 + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{y0 + 16}" text-anchor="middle">{t:.4g}</text>')
    for k in range(5):
        y = y_lo + (y_hi - y_lo) * k / 4
        yy = py(y)
        out.append(f'<line x1="{x0 - 4}" y1="{_fmt(yy)}" x2="{x0}" y2="{_fmt(yy)}" stroke="black"/>')
        out.append(f'<text x="{x0 - 6}" y="{_fmt(yy + 4)}" text-anchor="end">{y:.2f}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{_HEIGHT - 12}" text-anchor="middle">tau</text>')

    for i, (label, t, y) in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        t, y = np.asarray(t, dtype=float), np.asarray(y, dtype=float)
        step = max(1, int(math.ceil(len(t) / _MAX_POINTS)))
        idx = np.arange(0, len(t), step)
        if len(t) and idx[-1] != len(t) - 1:
            idx = np.append(idx, len(t) - 1)
        pts = " ".join(f"{_fmt(px(t[j]))},{_fmt(py(y[j]))}" for j in idx)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = _TOP + 14 + 18 * i
        lx = _WIDTH - _RIGHT + 12
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{_escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(data, path: Union[str, Path], observable: str = "purity", title: str = "") -> None:
    _write_text(path, render_svg(data, observable, title))


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def parse_list(text: str, parse=float) -> list:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ValueError("empty list")
    return [parse(item) for item in items]
