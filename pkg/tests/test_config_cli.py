import csv
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcpostselect import acceptance, sweep
from jcpostselect.cli import main
from jcpostselect.config import (
    FIG4_R,
    SweepConfig,
    apply_preset,
    config_from_mapping,
    parse_config,
    serialize_config,
)
from jcpostselect.errors import ConfigError
from jcpostselect.fock import FieldState
from jcpostselect.wigner import GridSpec

SQRT10 = math.sqrt(10)
SMALL_GRID = "grid_re_min = -1\ngrid_re_max = 6\ngrid_im_min = -2\ngrid_im_max = 2\ngrid_points = 15\n"

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def test_defaults_reproduce_reference_setting():
    cfg = SweepConfig()
    assert cfg.alpha == SQRT10
    assert cfg.atoms == (1, 2, 5)
    assert (cfg.r_min, cfg.r_max, cfg.r_step, cfg.phi) == (0.0, 3.0, 0.005, 0.0)
    assert cfg.cutoff is None
    assert cfg.wigner_r == FIG4_R
    grid = cfg.r_grid()
    assert grid.size == 601 and grid[-1] == pytest.approx(3.0)


@settings(max_examples=60, deadline=None)
@given(
    re=finite,
    im=finite,
    atoms=st.lists(st.integers(1, 64), min_size=1, max_size=5).map(tuple),
    r_min=st.floats(0, 5),
    span=st.floats(0, 5),
    r_step=st.floats(1e-4, 1.0),
    phi=finite,
    cutoff=st.none() | st.integers(1, 500),
    jobs=st.integers(1, 16),
    wigner_r=st.lists(st.floats(0, 4), max_size=6).map(tuple),
    points=st.integers(2, 400),
)
def test_config_round_trip(re, im, atoms, r_min, span, r_step, phi, cutoff, jobs, wigner_r, points):
    cfg = SweepConfig(
        alpha=complex(re, im),
        atoms=atoms,
        r_min=r_min,
        r_max=r_min + span,
        r_step=r_step,
        phi=phi,
        cutoff=cutoff,
        out="results/run 1",
        jobs=jobs,
        wigner_r=wigner_r,
        grid=GridSpec(-re - 1, abs(re) + 1, -2.0, 3.5, points),
    )
    text = serialize_config(cfg)
    again = parse_config(text)
    assert again == cfg
    assert serialize_config(again) == text


def test_parse_config_comments_and_partial():
    cfg = parse_config("# reference run\nalpha = 1.5, -0.5   # complex\n\natoms = 2,3\ncutoff = none\n")
    assert cfg.alpha == complex(1.5, -0.5)
    assert cfg.atoms == (2, 3)
    assert cfg.r_step == 0.005


@pytest.mark.parametrize(
    "text, field",
    [
        ("r_step = 0", "r_step"),
        ("r_step = -0.1", "r_step"),
        ("r_min = 2\nr_max = 1", "r_min"),
        ("atoms = 0,1", "atoms"),
        ("atoms = 65", "atoms"),
        ("alpha = 1,2,3", "alpha"),
        ("alpha = abc", "alpha"),
        ("cutoff = 0", "cutoff"),
        ("cutoff = ten", "cutoff"),
        ("jobs = 0", "jobs"),
        ("phi = nan", "phi"),
        ("colour = red", "colour"),
        ("grid_points = 1", "grid"),
        ("just text", "line 1"),
    ],
)
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert field in str(info.value)


def test_presets():
    base = config_from_mapping({"r_step": "0.1", "out": "x"})
    fig4 = apply_preset(base, "fig4")
    assert fig4.wigner_r == FIG4_R and fig4.atoms == (1, 2, 5)
    assert fig4.r_step == 0.005 and fig4.out == "x"
    with pytest.raises(ConfigError):
        apply_preset(base, "fig9")


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_csv_layout(tmp_path):
    cfg = config_from_mapping({"r_max": "1.2", "r_step": "0.1", "out": str(tmp_path)})
    rows = _read(sweep.run_sweep(cfg))
    assert list(rows[0]) == list(sweep.SWEEP_COLUMNS)
    assert len(rows) == 13 * 3
    assert [(r["r"], r["N"]) for r in rows[:4]] == [("0", "1"), ("0", "2"), ("0", "5"), ("0.1", "1")]
    first = rows[0]
    assert float(first["P_N"]) == 1.0 and float(first["variance"]) == pytest.approx(1.0, abs=1e-10)
    assert float(first["mandel_q"]) == pytest.approx(0.0, abs=1e-10)
    # 12 significant digits
    assert all(len(r["P_N"].replace(".", "").replace("-", "").split("e")[0].lstrip("0")) <= 12 for r in rows)


def test_sweep_deterministic_across_runs_and_workers(tmp_path):
    text = None
    for jobs, sub in [(1, "a"), (1, "b"), (3, "c")]:
        cfg = config_from_mapping({"r_max": "1.5", "r_step": "0.05", "jobs": str(jobs), "out": str(tmp_path / sub)})
        data = sweep.run_sweep(cfg).read_bytes()
        assert text is None or data == text
        text = data


def test_sweep_vacuum_blank_mandel_with_note(tmp_path):
    cfg = config_from_mapping({"alpha": "0", "r_max": "1", "r_step": "0.25", "out": str(tmp_path)})
    rows = _read(sweep.run_sweep(cfg))
    assert all(float(r["P_N"]) == 1.0 for r in rows)
    assert all(r["mandel_q"] == "" and "undefined" in r["note"] for r in rows)


def test_sweep_default_config_shape():
    rows = sweep.sweep_rows(SweepConfig())
    p1 = [(row["r"], row["P_N"]) for row in rows if row["N"] == 1 and row["r"] < 1.0]
    assert min(p1, key=lambda rp: rp[1])[0] == pytest.approx(0.5, abs=0.02)
    sq5 = [row["squeezing_db"] for row in rows if row["N"] == 5 and 0.7 < row["r"] < 1.3]
    assert -4.5 <= min(sq5) <= -3.5


def test_prob_csv(tmp_path):
    cfg = config_from_mapping({"r_step": "0.5", "atoms": "2,1", "out": str(tmp_path)})
    rows = _read(sweep.run_prob(cfg))
    assert list(rows[0]) == ["r", "N", "P_N"]
    assert [(r["r"], r["N"]) for r in rows[:3]] == [("0", "1"), ("0", "2"), ("0.5", "1")]
    assert float(rows[0]["P_N"]) == 1.0


def test_cli_prob_and_sweep_exit_zero(tmp_path):
    assert main(["prob", "--r-step", "0.25", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "prob.csv").exists()
    assert main(["sweep", "--r-max", "0.5", "--r-step", "0.25", "--atoms", "1", "--out", str(tmp_path)]) == 0
    assert len(_read(tmp_path / "sweep.csv")) == 3


def test_cli_config_error_exit_one(tmp_path, capsys):
    assert main(["sweep", "--r-step", "-1", "--out", str(tmp_path)]) == 1
    assert "r_step" in capsys.readouterr().err
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_cli_unwritable_output_exit_one(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["prob", "--r-step", "1", "--out", str(blocker / "sub")]) == 1


def test_cli_truncation_exit_two(tmp_path, capsys):
    assert main(["sweep", "--cutoff", "20", "--r-step", "1", "--out", str(tmp_path)]) == 2
    assert "tail mass" in capsys.readouterr().err


def test_cli_state_json(tmp_path):
    assert main(["state", "--r", "0.51", "--atoms", "1", "--out", str(tmp_path)]) == 0
    path = tmp_path / "state_r0.51_N1.json"
    data = json.loads(path.read_text())
    assert data["success_probability"] == pytest.approx(0.0638, abs=5e-5)
    state = FieldState.from_dict(data)
    assert state.trace() == pytest.approx(1.0, abs=1e-12)
    assert data["alpha"] == [SQRT10, 0.0]


def test_cli_wigner_fig4_preset_small_grid(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL_GRID)
    out = tmp_path / "fig4"
    assert main(["wigner", "--config", str(cfg), "--preset", "fig4", "--out", str(out)]) == 0
    csvs = sorted(out.glob("wigner_*.csv"))
    assert len(csvs) == 18
    assert len(list(out.glob("wigner_*.json"))) == 18
    assert (out / "wigner_r0.51_N5.csv").exists()
    rows = _read(out / "wigner_r0.2_N1.csv")
    assert list(rows[0]) == ["x", "y", "W"] and len(rows) == 15 * 15
    ys = [float(r["y"]) for r in rows]
    assert ys == sorted(ys)
    summary = json.loads((out / "wigner_r0.51_N5.json").read_text())
    assert {"min_value", "negative_volume", "negative_region_count", "total_integral"} <= set(summary)


def test_wigner_job_summaries(tmp_path):
    cfg = config_from_mapping({"out": str(tmp_path)})
    _, _, json0 = sweep.run_wigner_job(cfg, 0.0, 1)
    assert json.loads(json0.read_text())["negative_region_count"] == 0
    _, _, json5 = sweep.run_wigner_job(cfg, 0.51, 5)
    assert json.loads(json5.read_text())["min_value"] < -0.05


def test_wigner_csv_deterministic_across_workers(tmp_path):
    text = SMALL_GRID + "wigner_r = 0.51\natoms = 2\n"
    results = []
    for jobs in (1, 2):
        cfg = parse_config(text + f"jobs = {jobs}\nout = {tmp_path / str(jobs)}\n")
        results.append(sweep.run_wigner_batch(cfg)[0][1].read_bytes())
    assert results[0] == results[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "jcpostselect", "prob", "--r-step", "1", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "prob.csv").exists()


def test_acceptance_forced_truncation_failure():
    cfg = config_from_mapping({"cutoff": "20"})
    result = acceptance.run_check("success_probabilities", cfg)
    assert result.verdict == acceptance.FAIL
    assert "tail mass" in result.detail


def test_acceptance_coarse_step_is_under_resolved():
    cfg = config_from_mapping({"r_step": "0.5"})
    result = acceptance.run_check("fig2_squeezing", cfg)
    assert result.verdict == acceptance.UNDER_RESOLVED
    assert result.verdict != acceptance.FAIL
    assert "0.5" in result.detail


def test_acceptance_report_json():
    results = [acceptance.run_check("success_probabilities"), acceptance.run_check("fig3_mandel")]
    report = json.loads(acceptance.report_json(results))
    assert report["all_passed"] is True
    assert {"name", "target", "measured", "tolerance", "verdict"} <= set(report["checks"][0])


def test_cli_acceptance_failure_exit_two(tmp_path, monkeypatch, capsys):
    # only the cheap check, forced to fail by truncation
    monkeypatch.setattr(acceptance, "CHECKS", acceptance.CHECKS[:1])
    assert main(["acceptance", "--cutoff", "20", "--out", str(tmp_path)]) == 2
    assert "FAIL" in capsys.readouterr().out
    report = json.loads((tmp_path / "acceptance.json").read_text())
    assert report["all_passed"] is False
    assert len(report["checks"]) == 1
