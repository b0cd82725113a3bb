import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kanequbit.dynamics import ModelParams, integrate
from kanequbit.experiments import CALIBRATED_GAMMA_D, sweep
from kanequbit.io import (
    CSV_HEADER,
    ConfigError,
    build_config,
    emit_svg,
    format_number,
    parse_angle,
    parse_config,
    parse_list,
    read_csv,
    render_svg,
    validate_csv,
    write_csv,
    write_sweep_csv,
)
from kanequbit.observables import ObservableSeries, series
from kanequbit.qubit import UnphysicalStateError


# ---------------------------------------------------------------- config


def test_scenario_config():
    cfg = parse_config("scenario = 1a\n")
    assert cfg.is_scenario and cfg.scenario == "1a"
    assert cfg.method == "rk4" and not cfg.emit_plot


def test_explicit_config_maps_kappa_to_omega():
    cfg = parse_config("init = y\ntheta = 0\nkappa = 0.05\ngamma_d = 0.5\ntau_max = 20")
    assert cfg.params.omega == pytest.approx(0.025)
    assert cfg.params.gamma_d == 0.5
    assert cfg.tau_max == 20.0
    np.testing.assert_array_equal(cfg.init.as_array(), [0, 1, 0])


def test_config_defaults_and_comments():
    cfg = parse_config("# explicit run\ninit = 0.6, 0, 0.8\ntheta = pi/4  # polarization\nomega = 0.1\n")
    assert cfg.params.theta == pytest.approx(math.pi / 4)
    assert cfg.params.gamma_d == CALIBRATED_GAMMA_D
    assert cfg.tau_max == pytest.approx(10 / CALIBRATED_GAMMA_D)
    assert cfg.init_label == "0.6,0,0.8"


def test_epsilon_sets_gamma_d():
    cfg = parse_config("init = z\ntheta = 1\nkappa = 0.1\nepsilon = 0.2\n")
    assert cfg.params.gamma_d == pytest.approx(0.4)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("init = y\ntheta = abc\nkappa = 0.05", "line 2: key 'theta'"),
        ("scenario = 1a\nscenario = 1b", "line 2: duplicate key 'scenario'"),
        ("scenario = 1a\ncolour = red", "line 2: unknown key 'colour'"),
        ("scenario = 1a\nkappa = 0.05", "conflicts"),
        ("init = y\ntheta = 0\nkappa = 0.05\nomega = 0.1", "exactly one of 'kappa' and 'omega'"),
        ("init = y\ntheta = 0\nkappa = 0.05\nepsilon = 0.1\ngamma_d = 0.2", "at most one"),
        ("init = y\nkappa = 0.05", "missing required key 'theta'"),
        ("init = w\ntheta = 0\nkappa = 0.05", "key 'init'"),
        ("init = y\ntheta = 0\nkappa = -1", "non-negative"),
        ("init = y\ntheta = 0\nkappa = 0.1\ngamma_d = 0\n", "tau_max"),
        ("scenario = 9z", "unknown figure id"),
        ("just words", "line 1"),
        ("", "need either"),
        ("scenario = 1a\nmethod = euler", "method"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment.replace("(", r"\(")):
        parse_config(text)


def test_unphysical_init_is_a_domain_error():
    with pytest.raises(UnphysicalStateError):
        parse_config("init = 1,1,0\ntheta = 0\nkappa = 0.05")


def test_build_config_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown"):
        build_config({"scenario": "1a", "speed": "3"})


@pytest.mark.parametrize(
    "text, value",
    [("pi/4", math.pi / 4), ("2pi/3", 2 * math.pi / 3), ("0.5*pi", math.pi / 2), ("-pi", -math.pi), ("1.25", 1.25)],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, abs=1e-15)


def test_parse_list():
    assert parse_list("0.05, 0.07,0.09") == [0.05, 0.07, 0.09]
    assert parse_list("0,pi/2", parse_angle) == [0.0, math.pi / 2]
    with pytest.raises(ValueError):
        parse_list(" , ")


# ---------------------------------------------------------------- CSV


def test_header_only_csv(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(ObservableSeries.from_states(np.empty(0), np.empty((0, 3))), path)
    assert path.read_bytes() == (CSV_HEADER + "\n").encode()
    assert validate_csv(path) == []


def test_fixed_point_rows(tmp_path):
    path = tmp_path / "origin.csv"
    write_csv(series(integrate(ModelParams(0.3, 0.1, 0.2), (0, 0, 0), 1.0, 0.5)), path)
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "0,0,0,0,0.5,0.693147180559945,0,1"
    for line in lines[1:]:
        assert line.endswith(",0.5,0.693147180559945,0,1")


@given(st.floats(-1e300, 1e300))
def test_format_number_round_trips_its_rendering(x):
    text = format_number(x)
    assert format_number(float(text)) == text
    assert text != "-0"
    assert float(text) == pytest.approx(x, rel=1e-14)


def test_format_number_examples():
    assert format_number(-0.0) == "0"
    assert format_number(0.5) == "0.5"
    assert format_number(math.log(2)) == "0.693147180559945"


def test_csv_round_trip(tmp_path):
    obs = series(integrate(ModelParams(0.7, 0.3, 0.1), (0.6, 0.0, 0.8), 10.0, 1e-2, stride=10))
    first = tmp_path / "a.csv"
    write_csv(obs, first)
    cols = read_csv(first)
    assert len(cols["tau"]) == len(obs)
    for name, want in [("tau", obs.tau), ("sx", obs.states[:, 0]), ("purity", obs.purity), ("fidelity", obs.fidelity)]:
        np.testing.assert_allclose(cols[name], want, rtol=1e-14, atol=1e-15)
    # re-rendering parsed values reproduces the file exactly
    again = tmp_path / "b.csv"
    rebuilt = np.column_stack([cols[k] for k in cols])
    again.write_text(CSV_HEADER + "\n" + "".join(",".join(map(format_number, r)) + "\n" for r in rebuilt.tolist()))
    assert again.read_bytes() == first.read_bytes()
    assert validate_csv(first) == []


def test_validate_csv_flags_problems(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(CSV_HEADER + "\n0,0,0,1,1,0,1,1\n0.1,0,0,1.2,1.22,0,1.2,1\n")
    problems = validate_csv(path)
    assert any("purity" in p for p in problems)
    assert any("bloch_norm increases" in p for p in problems)
    path.write_text("a,b\n1,2\n")
    assert "unexpected header" in validate_csv(path)[0]
    assert validate_csv(tmp_path / "missing.csv")


def test_validate_csv_rejects_inconsistent_entropy(tmp_path):
    path = tmp_path / "entropy.csv"
    path.write_text(CSV_HEADER + "\n0,0,1,0,1,0.1,1,1\n")
    assert validate_csv(path) == ["entropy inconsistent with bloch_norm"]


def test_write_csv_reports_path(tmp_path):
    obs = series(integrate(ModelParams(0.0, 0.1, 0.1), (0, 1, 0), 1.0, 0.5))
    with pytest.raises(OSError, match="missing"):
        write_csv(obs, tmp_path / "missing" / "out.csv")


def test_sweep_csv(tmp_path):
    result = sweep("y", [0.0], [0.05, 0.09], tau_max=5.0, dtau=0.01)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(result, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("kappa,theta,initial_state")
    assert len(lines) == 3


# ---------------------------------------------------------------- SVG


def test_constant_series_draws_horizontal_lines():
    obs = series(integrate(ModelParams(0.3, 0.1, 0.2), (0, 0, 0), 2.0, 0.1))
    svg = render_svg(obs)
    polylines = [line for line in svg.splitlines() if line.startswith("<polyline")]
    assert len(polylines) == 4
    for line in polylines:
        points = line.split('points="')[1].rstrip('"/>').split()
        assert len({p.split(",")[1] for p in points}) == 1


def test_sweep_plot_has_one_legend_entry_per_kappa(tmp_path):
    result = sweep("y", [0.0], [0.05, 0.09], tau_max=5.0, dtau=0.01)
    svg = render_svg(result)
    assert svg.count("<polyline") == 2
    assert "kappa=0.05" in svg and "kappa=0.09" in svg
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_svg_bytes_are_deterministic(tmp_path):
    obs = series(integrate(ModelParams(0.7, 0.3, 0.1), (0, 1, 0), 20.0, 1e-2))
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    emit_svg(obs, a, title="x < y & z")
    emit_svg(obs, b, title="x < y & z")
    assert a.read_bytes() == b.read_bytes()
    assert "x &lt; y &amp; z" in a.read_text()


def test_svg_decimates_long_series():
    obs = series(integrate(ModelParams(0.7, 0.3, 0.1), (0, 1, 0), 50.0, 1e-3))
    line = next(l for l in render_svg(obs).splitlines() if l.startswith("<polyline"))
    assert len(line.split('points="')[1].split()) <= 2001


def test_empty_plot_rejected():
    with pytest.raises(ValueError):
        render_svg([])
