import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from uwb_rtls.cli import main
from uwb_rtls.io import (
    read_fixes_csv,
    read_measurements_csv,
    read_truth_csv,
    write_fixes_csv,
    write_truth_csv,
)
from uwb_rtls.evaluation import GroundTruthTrack
from uwb_rtls.localization import PositionFix

STATIONARY = [[0.0, 0.6096, 0.3048], [30.0, 0.6096, 0.3048]]


def _write_config(tmp_path, name="run.json", **overrides):
    doc = {
        "arena": {},
        "noise": {},
        "trajectory": {"waypoints": STATIONARY},
        "superframe": {},
        "channel": {},
        "clock": {},
        "seed": 99,
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def _read_output_files(out_dir):
    return {
        "measurements": (out_dir / "measurements.csv").read_bytes(),
        "fixes": (out_dir / "fixes.csv").read_bytes(),
        "truth": (out_dir / "truth.csv").read_bytes(),
        "stats": (out_dir / "stats.json").read_bytes(),
    }


def test_simulate_writes_all_outputs(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out)]) == 0
    captured = capsys.readouterr()
    assert "seed 99: 300 measurements, 298 fixes" in captured.out
    measurements = read_measurements_csv(out / "measurements.csv")
    fixes = read_fixes_csv(out / "fixes.csv")
    truth = read_truth_csv(out / "truth.csv")
    assert len(measurements) == 300
    assert len(fixes) == 298
    assert len(truth.points) == 298
    stats = json.loads((out / "stats.json").read_text(encoding="utf-8"))
    assert stats["n"] == 298
    assert 0.0 < stats["mean_m"] < 0.5


def test_simulate_same_seed_is_byte_identical(tmp_path):
    cfg = _write_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out2)]) == 0
    assert _read_output_files(out1) == _read_output_files(out2)


def test_simulate_seed_range_writes_subdirectories(tmp_path):
    cfg = _write_config(tmp_path)
    out = tmp_path / "sweep"
    code = main(
        ["simulate", "--config", str(cfg), "--out-dir", str(out), "--seeds", "5..7"]
    )
    assert code == 0
    dirs = sorted(p.name for p in out.iterdir())
    assert dirs == ["seed_5", "seed_6", "seed_7"]
    fixes5 = (out / "seed_5" / "fixes.csv").read_bytes()
    fixes6 = (out / "seed_6" / "fixes.csv").read_bytes()
    assert fixes5 != fixes6


def test_simulate_rejects_bad_seed_ranges(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    assert main(["simulate", "--config", str(cfg), "--seeds", "7"]) == 1
    assert "A..B" in capsys.readouterr().err
    assert main(["simulate", "--config", str(cfg), "--seeds", "9..3"]) == 1
    assert "empty" in capsys.readouterr().err
    assert main(["simulate", "--config", str(cfg), "--seeds", "a..b"]) == 1
    assert "integers" in capsys.readouterr().err


def test_simulate_missing_config_is_io_error(tmp_path, capsys):
    missing = tmp_path / "nope" / "run.json"
    assert main(["simulate", "--config", str(missing)]) == 2
    assert "i/o error" in capsys.readouterr().err


def test_simulate_unknown_preset_is_validation_error(capsys):
    assert main(["simulate", "--config", "warehouse"]) == 1
    err = capsys.readouterr().err
    assert "unknown preset" in err
    assert "los_baseline" in err


def test_simulate_config_errors_name_the_key(tmp_path, capsys):
    cfg = _write_config(tmp_path, arena={"wat": 1})
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert "arena.wat" in capsys.readouterr().err

    cfg = _write_config(
        tmp_path,
        name="outside.json",
        trajectory={"waypoints": [[0.0, 0.5, 0.3], [30.0, 2.0, 0.3]]},
    )
    out = tmp_path / "x"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out)]) == 1
    err = capsys.readouterr().err
    assert "trajectory waypoint" in err
    assert not out.exists()


def test_localize_recovers_positions_from_clean_ranges(tmp_path, capsys):
    quiet = {
        "mode": "range_noise",
        "los_mean_m": 0.0,
        "los_sigma_m": 0.0,
        "nlos_mean_m": 0.0,
        "nlos_sigma_m": 0.0,
    }
    cfg = _write_config(tmp_path, noise=quiet)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out)]) == 0
    capsys.readouterr()

    redo = tmp_path / "redo"
    code = main(
        [
            "localize",
            "--config", str(cfg),
            "--measurements", str(out / "measurements.csv"),
            "--out-dir", str(redo),
        ]
    )
    assert code == 0
    assert "298 fixes from 300 measurements" in capsys.readouterr().out
    fixes = read_fixes_csv(redo / "fixes.csv")
    assert len(fixes) == 298
    for f in fixes:
        assert np.hypot(f.x_m - 0.6096, f.y_m - 0.3048) < 1e-7
        assert f.method == "least_squares"


def test_localize_closed_form_and_alternative_y(tmp_path, capsys):
    quiet = {
        "mode": "range_noise",
        "los_mean_m": 0.0,
        "los_sigma_m": 0.0,
        "nlos_mean_m": 0.0,
        "nlos_sigma_m": 0.0,
    }
    cfg = _write_config(tmp_path, noise=quiet)
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out)]) == 0

    cf = tmp_path / "cf"
    code = main(
        [
            "localize",
            "--config", str(cfg),
            "--measurements", str(out / "measurements.csv"),
            "--out-dir", str(cf),
            "--solver", "closed-form",
        ]
    )
    assert code == 0
    cf_fixes = read_fixes_csv(cf / "fixes.csv")
    assert all(f.method == "closed_form" for f in cf_fixes)
    assert all(f.n_ranges_used == 3 for f in cf_fixes)
    for f in cf_fixes:
        assert np.hypot(f.x_m - 0.6096, f.y_m - 0.3048) < 1e-7

    alt = tmp_path / "alt"
    code = main(
        [
            "localize",
            "--config", str(cfg),
            "--measurements", str(out / "measurements.csv"),
            "--out-dir", str(alt),
            "--solver", "closed-form",
            "--y-form", "subtract-x2",
        ]
    )
    assert code == 0
    alt_fixes = read_fixes_csv(alt / "fixes.csv")
    # The alternative y expression lands visibly off the true point for
    # general anchor triples.
    worst = max(
        np.hypot(f.x_m - 0.6096, f.y_m - 0.3048) for f in alt_fixes
    )
    assert worst > 0.01


def test_evaluate_perfect_fixes(tmp_path, capsys):
    times = [0.1 * k for k in range(50)]
    points = tuple((t, (0.01 * k, 0.2)) for k, t in enumerate(times))
    truth = GroundTruthTrack(points=points)
    fixes = [
        PositionFix(position=(0.01 * k, 0.2), t=t) for k, t in enumerate(times)
    ]
    write_truth_csv(tmp_path / "truth.csv", truth)
    write_fixes_csv(tmp_path / "fixes.csv", fixes)
    out = tmp_path / "eval"
    code = main(
        [
            "evaluate",
            "--fixes", str(tmp_path / "fixes.csv"),
            "--truth", str(tmp_path / "truth.csv"),
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["n", "50"]
    assert lines[1].split() == ["mean_m", "0"]
    assert lines[2].split() == ["sigma_m", "0"]
    assert lines[3].split() == ["max_m", "0"]
    stats = json.loads((out / "stats.json").read_text(encoding="utf-8"))
    assert stats["n"] == 50
    assert stats["n_dropped"] == 0
    assert "mean_pct" not in stats
    assert (out / "histogram.csv").exists()


def test_evaluate_reports_percentage_and_drops(tmp_path, capsys):
    truth = GroundTruthTrack(
        points=tuple((float(k), (0.1 * k, 0.0)) for k in range(11))
    )
    fixes = [
        PositionFix(position=(0.1 * k, 0.05), t=float(k)) for k in range(11)
    ]
    fixes.append(PositionFix(position=(0.0, 0.0), t=99.0))
    write_truth_csv(tmp_path / "truth.csv", truth)
    write_fixes_csv(tmp_path / "fixes.csv", fixes)
    out = tmp_path / "eval"
    code = main(
        [
            "evaluate",
            "--fixes", str(tmp_path / "fixes.csv"),
            "--truth", str(tmp_path / "truth.csv"),
            "--out-dir", str(out),
            "--pct-norm", "path_scale",
        ]
    )
    assert code == 0
    stdout = capsys.readouterr().out
    assert "mean_pct" in stdout
    stats = json.loads((out / "stats.json").read_text(encoding="utf-8"))
    assert stats["n"] == 11
    assert stats["n_dropped"] == 1
    # 0.05 m constant error against a mean truth step of 1.0/11 m.
    assert stats["mean_pct"] == pytest.approx(100.0 * 0.05 / (1.0 / 11), rel=1e-6)
    assert stats["sigma_pct"] == pytest.approx(0.0, abs=1e-9)


def test_evaluate_disjoint_times_fail_cleanly(tmp_path, capsys):
    truth = GroundTruthTrack(points=((0.0, (0.0, 0.0)), (1.0, (0.1, 0.0))))
    fixes = [PositionFix(position=(0.0, 0.0), t=50.0)]
    write_truth_csv(tmp_path / "truth.csv", truth)
    write_fixes_csv(tmp_path / "fixes.csv", fixes)
    code = main(
        [
            "evaluate",
            "--fixes", str(tmp_path / "fixes.csv"),
            "--truth", str(tmp_path / "truth.csv"),
            "--out-dir", str(tmp_path),
        ]
    )
    assert code == 1
    assert "no fix timestamp overlaps" in capsys.readouterr().err


def test_evaluate_rejects_non_positive_gap(tmp_path, capsys):
    truth = GroundTruthTrack(points=((0.0, (0.0, 0.0)), (1.0, (0.1, 0.0))))
    fixes = [PositionFix(position=(0.0, 0.0), t=0.5)]
    write_truth_csv(tmp_path / "truth.csv", truth)
    write_fixes_csv(tmp_path / "fixes.csv", fixes)
    code = main(
        [
            "evaluate",
            "--fixes", str(tmp_path / "fixes.csv"),
            "--truth", str(tmp_path / "truth.csv"),
            "--max-gap-s", "0",
        ]
    )
    assert code == 1


def test_schedule_prints_rows_and_summary(capsys):
    assert main(["schedule", "--tags", "4", "--rate", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "slot,phase,tag,anchor"
    assert lines[1:5] == ["0,0,0,0", "1,0,1,1", "2,0,2,2", "3,0,3,3"]
    assert lines[5] == "# period_superframes=1 demand_slots=4 capacity_slots=15"


def test_schedule_capacity_failure(capsys):
    assert main(["schedule", "--tags", "16", "--rate", "10"]) == 1
    err = capsys.readouterr().err
    assert "error:" in err
    assert "16" in err and "15" in err


def test_linkbudget_default_rows(capsys):
    assert main(["linkbudget"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[0].split() == ["range_resolution_m", "0.299792458"]
    assert lines[1].split() == ["penetration_depth_m", "0.299792458"]


def test_linkbudget_full_table(capsys):
    assert main(["linkbudget", "--distance", "1.0", "--obstacles", "0"]) == 0
    lines = capsys.readouterr().out.splitlines()
    table = dict(line.split() for line in lines)
    assert table["attenuation_db"] == "48.7060504"
    assert "snr_db" in table
    assert "capacity_bps" in table
    assert table["range_resolution_m"] == "0.299792458"


def test_linkbudget_snr_override(capsys):
    assert main(["linkbudget", "--snr-linear", "1"]) == 0
    table = dict(
        line.split() for line in capsys.readouterr().out.splitlines()
    )
    assert table["capacity_bps"] == "500000000"


def test_linkbudget_rejects_bad_values(capsys):
    assert main(["linkbudget", "--distance", "-1"]) == 1
    assert "error:" in capsys.readouterr().err


def test_usage_errors_exit_one(capsys):
    assert main([]) == 1
    capsys.readouterr()
    assert main(["teleport"]) == 1
    capsys.readouterr()
    assert main(["simulate"]) == 1
    assert "--config" in capsys.readouterr().err


def test_help_exits_zero():
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0


def test_module_and_console_entry_points(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "uwb_rtls", "schedule", "--tags", "1", "--rate", "10"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert result.stdout.startswith("slot,phase,tag,anchor")

    exe = shutil.which("uwb-rtls")
    assert exe is not None
    result = subprocess.run(
        [exe, "linkbudget"], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert "range_resolution_m" in result.stdout
