import json
import math

import numpy as np
import pytest

from uwb_rtls import ConfigError, SchemaError
from uwb_rtls.config import (
    PRESET_NAMES,
    RunConfig,
    preset_path,
    resolve_config_path,
)
from uwb_rtls.evaluation import GroundTruthTrack, error_stats
from uwb_rtls.io import (
    FIX_COLUMNS,
    MEASUREMENT_COLUMNS,
    fmt_float,
    read_fixes_csv,
    read_measurements_csv,
    read_truth_csv,
    stats_to_jsonable,
    truth_from_trajectory,
    write_fixes_csv,
    write_histogram_csv,
    write_measurements_csv,
    write_schedule_csv,
    write_stats_json,
    write_truth_csv,
)
from uwb_rtls.localization import PositionFix
from uwb_rtls.sim import Measurement, Trajectory
from uwb_rtls.tdma import build_schedule


def _minimal_doc(**overrides):
    doc = {
        "arena": {},
        "noise": {},
        "trajectory": {"waypoints": [[0.0, 0.5, 0.3], [10.0, 0.7, 0.3]]},
        "superframe": {},
        "channel": {},
        "clock": {},
        "seed": 42,
    }
    doc.update(overrides)
    return doc


def test_minimal_document_uses_defaults():
    cfg = RunConfig.from_dict(_minimal_doc())
    assert cfg.arena.width_m == 1.2192
    assert cfg.noise.mode == "position_noise"
    assert cfg.superframe.slots_per_superframe == 15
    assert cfg.update_rate_hz == 10.0
    assert cfg.n_tags == 1
    assert cfg.channel.carrier_frequency_hz == 6.5e9
    assert cfg.clock.drift_ppm == 0.0
    assert cfg.seed == 42
    schedule = cfg.build_schedule()
    assert schedule.period_superframes == 1
    assert schedule.n_anchors == 8


def test_full_document_round_trip():
    doc = _minimal_doc(
        arena={
            "width_m": 2.0,
            "height_m": 1.0,
            "obstacles": [
                {"x_min": 0.5, "y_min": 0.2, "x_max": 0.7, "y_max": 0.8}
            ],
        },
        noise={"mode": "range_noise", "los_mean_m": 0.1, "los_sigma_m": 0.02},
        superframe={"update_rate_hz": 5.0, "n_tags": 2},
        clock={"drift_ppm": 10.0, "sigma_tof_s": 1e-10},
    )
    cfg = RunConfig.from_dict(doc)
    assert cfg.arena.obstacles[0].x_max == 0.7
    assert cfg.noise.los_mean_m == 0.1
    assert cfg.update_rate_hz == 5.0
    assert cfg.n_tags == 2
    assert cfg.clock.sigma_tof_s == 1e-10
    assert len(cfg.build_schedule().assignments) == 2


def test_missing_section_is_named():
    doc = _minimal_doc()
    del doc["clock"]
    with pytest.raises(ConfigError, match="clock"):
        RunConfig.from_dict(doc)


def test_unknown_section_and_keys_are_named():
    with pytest.raises(ConfigError, match="extra"):
        RunConfig.from_dict(_minimal_doc(extra={}))
    with pytest.raises(ConfigError, match=r"arena\.wat"):
        RunConfig.from_dict(_minimal_doc(arena={"wat": 1}))
    with pytest.raises(ConfigError, match=r"noise\.sigma"):
        RunConfig.from_dict(_minimal_doc(noise={"sigma": 0.1}))
    with pytest.raises(ConfigError, match=r"arena\.obstacles\[0\]\.depth"):
        RunConfig.from_dict(
            _minimal_doc(
                arena={
                    "obstacles": [
                        {"x_min": 0, "y_min": 0, "x_max": 0.1, "y_max": 0.1,
                         "depth": 1}
                    ]
                }
            )
        )


def test_type_errors_are_rejected():
    with pytest.raises(ConfigError, match="seed"):
        RunConfig.from_dict(_minimal_doc(seed=1.5))
    with pytest.raises(ConfigError, match="seed"):
        RunConfig.from_dict(_minimal_doc(seed=True))
    with pytest.raises(ConfigError, match="seed"):
        RunConfig.from_dict(_minimal_doc(seed=2**64))
    with pytest.raises(ConfigError, match="seed"):
        RunConfig.from_dict(_minimal_doc(seed=-1))
    with pytest.raises(ConfigError, match=r"arena\.width_m"):
        RunConfig.from_dict(_minimal_doc(arena={"width_m": "wide"}))
    with pytest.raises(ConfigError, match=r"arena\.width_m"):
        RunConfig.from_dict(_minimal_doc(arena={"width_m": True}))
    with pytest.raises(ConfigError, match=r"superframe\.n_tags"):
        RunConfig.from_dict(_minimal_doc(superframe={"n_tags": 0}))
    with pytest.raises(ConfigError, match=r"trajectory\.waypoints"):
        RunConfig.from_dict(_minimal_doc(trajectory={"waypoints": [[0.0, 0.5]]}))
    with pytest.raises(ConfigError, match="trajectory"):
        RunConfig.from_dict(_minimal_doc(trajectory={}))


def test_semantic_errors_keep_section_context():
    # Trajectory leaving the arena passes parsing and fails in simulate;
    # a waypoint time collision fails right here with section context.
    with pytest.raises(ConfigError, match="trajectory"):
        RunConfig.from_dict(
            _minimal_doc(
                trajectory={"waypoints": [[0.0, 0.5, 0.3], [0.0, 0.7, 0.3]]}
            )
        )
    with pytest.raises(ConfigError, match="noise"):
        RunConfig.from_dict(_minimal_doc(noise={"mode": "nope"}))


def test_invalid_json_file_is_a_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid JSON"):
        RunConfig.from_json_file(bad)


def test_bundled_presets_parse_and_stay_defaultable():
    assert PRESET_NAMES == ("los_baseline", "los_reference", "nlos_wall")
    for name in PRESET_NAMES:
        path = preset_path(name)
        assert path.exists()
        cfg = RunConfig.from_json_file(path)
        schedule = cfg.build_schedule()
        assert schedule.period_superframes == 1
        assert cfg.trajectory.t_end_s >= 1000.0
    assert preset_path("nlos_wall.json") == preset_path("nlos_wall")
    with pytest.raises(ConfigError, match="unknown preset"):
        preset_path("warehouse")


def test_resolve_config_path(tmp_path):
    real = tmp_path / "run.json"
    real.write_text("{}", encoding="utf-8")
    assert resolve_config_path(str(real)) == real
    assert resolve_config_path("los_baseline") == preset_path("los_baseline")
    with pytest.raises(FileNotFoundError):
        resolve_config_path(str(tmp_path / "missing" / "run.json"))


def test_fmt_float_is_nine_significant_digits():
    assert fmt_float(0.1234567894) == "0.123456789"
    assert fmt_float(1.0) == "1"
    assert fmt_float(-0.5) == "-0.5"
    assert fmt_float(123456789012.0) == "1.23456789e+11"


def test_measurements_round_trip(tmp_path):
    path = tmp_path / "m.csv"
    rows = [
        Measurement(t=0.1, tag_id=0, anchor_id=3, slot_index=2, distance_m=0.77,
                    snr_db=41.5, los=True, valid=True),
        Measurement(t=0.2, tag_id=0, anchor_id=4, slot_index=2, distance_m=-0.02,
                    snr_db=38.0, los=False, valid=False),
    ]
    write_measurements_csv(path, rows)
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0] == ",".join(MEASUREMENT_COLUMNS)
    assert "\r" not in text
    assert text.endswith("\n")
    back = read_measurements_csv(path)
    assert len(back) == 2
    assert back[0].anchor_id == 3
    assert back[0].los is True
    assert back[1].valid is False
    assert back[1].distance_m == pytest.approx(-0.02)


def test_fixes_round_trip(tmp_path):
    path = tmp_path / "f.csv"
    fixes = [
        PositionFix(position=(0.61, 0.3), sigma_pos_m=0.01, residual_rms_m=0.002,
                    n_ranges_used=8, method="least_squares", t=1.5),
    ]
    write_fixes_csv(path, fixes)
    assert path.read_text(encoding="utf-8").splitlines()[0] == ",".join(FIX_COLUMNS)
    back = read_fixes_csv(path)
    assert back[0].position == pytest.approx((0.61, 0.3))
    assert back[0].n_ranges_used == 8
    assert back[0].method == "least_squares"
    assert back[0].t == 1.5


def test_truth_round_trip_with_and_without_labels(tmp_path):
    plain = GroundTruthTrack(points=((0.0, (0.1, 0.2)), (1.0, (0.3, 0.4))))
    path = tmp_path / "truth.csv"
    write_truth_csv(path, plain)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "t,x_m,y_m"
    back = read_truth_csv(path)
    assert back.points == plain.points

    labelled = GroundTruthTrack(
        points=((0.0, (0.1, 0.2), "start"), (1.0, (0.3, 0.4)), (2.0, (0.5, 0.6), "turn"))
    )
    path2 = tmp_path / "truth_labels.csv"
    write_truth_csv(path2, labelled)
    assert path2.read_text(encoding="utf-8").splitlines()[0] == "t,x_m,y_m,label"
    back2 = read_truth_csv(path2)
    assert back2.points[0][2] == "start"
    assert back2.points[1][2] is None
    assert back2.points[2][2] == "turn"


def test_schema_errors_name_the_problem(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("t,tag,anchor\n1,0,0\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="expected column 4 to be 'slot'"):
        read_measurements_csv(path)

    path.write_text(
        "t,tag,anchor,slot,distance_m,snr_db,los,valid\n", encoding="utf-8"
    )
    with pytest.raises(SchemaError, match="no data rows"):
        read_measurements_csv(path)

    path.write_text(
        "t,tag,anchor,slot,distance_m,snr_db,los,valid\n"
        "0.1,0,zero,0,0.5,40,1,1\n",
        encoding="utf-8",
    )
    with pytest.raises(SchemaError, match="line 2.*'anchor' is not an integer"):
        read_measurements_csv(path)

    path.write_text("", encoding="utf-8")
    with pytest.raises(SchemaError, match="empty"):
        read_measurements_csv(path)

    truth = tmp_path / "truth.csv"
    truth.write_text("t,x_m,y_m\n0,0.1,0.2\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="at least 2"):
        read_truth_csv(truth)
    truth.write_text("t,x_m,y_m,speed\n0,0.1,0.2,1\n1,0.2,0.2,1\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="unexpected column 'speed'"):
        read_truth_csv(truth)


def test_stats_json_layout(tmp_path):
    pairs = [
        (PositionFix(position=(x, 0.0), t=float(i)), np.array([0.0, 0.0]))
        for i, x in enumerate((0.1, 0.2, 0.30000000012345))
    ]
    stats = error_stats(pairs)
    path = tmp_path / "stats.json"
    write_stats_json(path, stats, extra={"n_dropped": 2, "mean_pct": 12.3456789012})
    text = path.read_text(encoding="utf-8")
    assert text.endswith("}\n")
    doc = json.loads(text)
    assert doc["n"] == 3
    assert doc["n_dropped"] == 2
    # Every float lands rounded to 9 significant digits.
    assert doc["mean_pct"] == 12.3456789
    assert doc["max_m"] == 0.3
    assert sorted(doc.keys()) == list(doc.keys())


def test_stats_jsonable_histogram_rows_are_plain_lists():
    pairs = [
        (PositionFix(position=(0.1 * (i % 7 + 1), 0.0), t=float(i)), np.array([0.0, 0.0]))
        for i in range(50)
    ]
    doc = stats_to_jsonable(error_stats(pairs))
    assert isinstance(doc["histogram"], list)
    assert all(len(row) == 3 for row in doc["histogram"])
    json.dumps(doc)


def test_histogram_csv(tmp_path):
    rng = np.random.default_rng(3)
    pairs = [
        (PositionFix(position=(abs(float(e)), 0.0), t=float(i)), np.array([0.0, 0.0]))
        for i, e in enumerate(rng.normal(0.2, 0.05, size=500))
    ]
    stats = error_stats(pairs)
    path = tmp_path / "hist.csv"
    write_histogram_csv(path, stats)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "bin_lo,bin_hi,count,pdf_fit"
    assert len(lines) == len(stats.histogram) + 1
    total = sum(int(line.split(",")[2]) for line in lines[1:])
    assert total == 500


def test_schedule_csv_to_handle_and_path(tmp_path):
    import io as _io

    schedule = build_schedule(4, 10.0)
    buf = _io.StringIO()
    write_schedule_csv(buf, schedule)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "slot,phase,tag,anchor"
    assert lines[1] == "0,0,0,0"
    assert len(lines) == 5

    path = tmp_path / "sched.csv"
    write_schedule_csv(path, schedule)
    assert path.read_text(encoding="utf-8").splitlines() == lines


def test_truth_from_trajectory_samples_positions():
    traj = Trajectory(waypoints=((0.0, (0.0, 0.0)), (10.0, (1.0, 0.0))))
    track = truth_from_trajectory(traj, [0.0, 5.0, 10.0])
    assert track.position_at(5.0) == pytest.approx([0.5, 0.0])
    assert [t for t, _, _ in track.points] == [0.0, 5.0, 10.0]
