"""CSV and JSON serialization with byte-stable formatting.

Columns are fixed per file kind; floats are written with 9 significant
digits, lines end with a bare newline, and encoding is UTF-8, so two
runs with equal seeds produce byte-identical files. Boolean columns are
serialized as 1/0.
"""

from __future__ import annotations

import csv
import json
from typing import Sequence

from .errors import SchemaError
from .evaluation import ErrorStats, GroundTruthTrack, histogram_rows
from .localization import PositionFix
from .sim import Measurement
from .tdma import Schedule

MEASUREMENT_COLUMNS = ("t", "tag", "anchor", "slot", "distance_m", "snr_db", "los", "valid")
FIX_COLUMNS = ("t", "x_m", "y_m", "sigma_pos_m", "residual_rms_m", "n_ranges", "method")
TRUTH_COLUMNS = ("t", "x_m", "y_m")
HISTOGRAM_COLUMNS = ("bin_lo", "bin_hi", "count", "pdf_fit")
SCHEDULE_COLUMNS = ("slot", "phase", "tag", "anchor")


def fmt_float(value: float) -> str:
    """9-significant-digit decimal form used in every output file."""
    return f"{float(value):.9g}"


def _round9(value: float) -> float:
    return float(fmt_float(value))


def _open_write(path):
    return open(path, "w", encoding="utf-8", newline="")


def _writer(handle):
    return csv.writer(handle, lineterminator="\n")


def _check_header(row, expected, kind: str, optional=()):
    if row is None:
        raise SchemaError(f"{kind} file is empty (no header row)")
    row = tuple(h.strip() for h in row)
    for i, name in enumerate(expected):
        if i >= len(row) or row[i] != name:
            got = row[i] if i < len(row) else "<missing>"
            raise SchemaError(
                f"{kind} file: expected column {i + 1} to be '{name}', got '{got}'"
            )
    extras = row[len(expected):]
    for name in extras:
        if name not in optional:
            raise SchemaError(f"{kind} file: unexpected column '{name}'")
    return row


def _parse_float(value: str, column: str, kind: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise SchemaError(
            f"{kind} file line {line}: column '{column}' is not a number: {value!r}"
        ) from None


def _parse_int(value: str, column: str, kind: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise SchemaError(
            f"{kind} file line {line}: column '{column}' is not an integer: {value!r}"
        ) from None


def write_measurements_csv(path, measurements: Sequence) -> None:
    with _open_write(path) as handle:
        out = _writer(handle)
        out.writerow(MEASUREMENT_COLUMNS)
        for m in measurements:
            out.writerow(
                (
                    fmt_float(m.t),
                    m.tag_id,
                    m.anchor_id,
                    m.slot_index,
                    fmt_float(m.distance_m),
                    fmt_float(m.snr_db),
                    int(m.los),
                    int(m.valid),
                )
            )


def read_measurements_csv(path) -> list:
    with open(path, encoding="utf-8", newline="") as handle:
        rows = csv.reader(handle)
        header = next(rows, None)
        _check_header(header, MEASUREMENT_COLUMNS, "measurements")
        out = []
        for line, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != len(MEASUREMENT_COLUMNS):
                raise SchemaError(
                    f"measurements file line {line}: expected "
                    f"{len(MEASUREMENT_COLUMNS)} columns, got {len(row)}"
                )
            out.append(
                Measurement(
                    t=_parse_float(row[0], "t", "measurements", line),
                    tag_id=_parse_int(row[1], "tag", "measurements", line),
                    anchor_id=_parse_int(row[2], "anchor", "measurements", line),
                    slot_index=_parse_int(row[3], "slot", "measurements", line),
                    distance_m=_parse_float(row[4], "distance_m", "measurements", line),
                    snr_db=_parse_float(row[5], "snr_db", "measurements", line),
                    los=bool(_parse_int(row[6], "los", "measurements", line)),
                    valid=bool(_parse_int(row[7], "valid", "measurements", line)),
                )
            )
    if not out:
        raise SchemaError("measurements file has no data rows")
    return out


def write_fixes_csv(path, fixes: Sequence) -> None:
    with _open_write(path) as handle:
        out = _writer(handle)
        out.writerow(FIX_COLUMNS)
        for f in fixes:
            out.writerow(
                (
                    fmt_float(f.t),
                    fmt_float(f.position[0]),
                    fmt_float(f.position[1]),
                    fmt_float(f.sigma_pos_m),
                    fmt_float(f.residual_rms_m),
                    f.n_ranges_used,
                    f.method,
                )
            )


def read_fixes_csv(path) -> list:
    with open(path, encoding="utf-8", newline="") as handle:
        rows = csv.reader(handle)
        header = next(rows, None)
        _check_header(header, FIX_COLUMNS, "fixes")
        out = []
        for line, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != len(FIX_COLUMNS):
                raise SchemaError(
                    f"fixes file line {line}: expected {len(FIX_COLUMNS)} "
                    f"columns, got {len(row)}"
                )
            out.append(
                PositionFix(
                    t=_parse_float(row[0], "t", "fixes", line),
                    position=(
                        _parse_float(row[1], "x_m", "fixes", line),
                        _parse_float(row[2], "y_m", "fixes", line),
                    ),
                    sigma_pos_m=_parse_float(row[3], "sigma_pos_m", "fixes", line),
                    residual_rms_m=_parse_float(
                        row[4], "residual_rms_m", "fixes", line
                    ),
                    n_ranges_used=_parse_int(row[5], "n_ranges", "fixes", line),
                    method=row[6],
                )
            )
    if not out:
        raise SchemaError("fixes file has no data rows")
    return out


def write_truth_csv(path, truth: GroundTruthTrack) -> None:
    has_labels = any(label is not None for _, _, label in truth.points)
    with _open_write(path) as handle:
        out = _writer(handle)
        out.writerow((TRUTH_COLUMNS + ("label",)) if has_labels else TRUTH_COLUMNS)
        for t, (x, y), label in truth.points:
            row = [fmt_float(t), fmt_float(x), fmt_float(y)]
            if has_labels:
                row.append("" if label is None else str(label))
            out.writerow(row)


def read_truth_csv(path) -> GroundTruthTrack:
    with open(path, encoding="utf-8", newline="") as handle:
        rows = csv.reader(handle)
        header = next(rows, None)
        header = _check_header(header, TRUTH_COLUMNS, "truth", optional=("label",))
        has_labels = len(header) > len(TRUTH_COLUMNS)
        points = []
        for line, row in enumerate(rows, start=2):
            if not row:
                continue
            expected = len(TRUTH_COLUMNS) + (1 if has_labels else 0)
            if len(row) != expected:
                raise SchemaError(
                    f"truth file line {line}: expected {expected} columns, "
                    f"got {len(row)}"
                )
            t = _parse_float(row[0], "t", "truth", line)
            x = _parse_float(row[1], "x_m", "truth", line)
            y = _parse_float(row[2], "y_m", "truth", line)
            label = row[3] if has_labels and row[3] != "" else None
            points.append((t, (x, y), label))
    if len(points) < 2:
        raise SchemaError("truth file needs at least 2 data rows")
    return GroundTruthTrack(points=tuple(points))


def write_histogram_csv(path, stats: ErrorStats) -> None:
    with _open_write(path) as handle:
        out = _writer(handle)
        out.writerow(HISTOGRAM_COLUMNS)
        for lo, hi, count, fit in histogram_rows(stats):
            out.writerow((fmt_float(lo), fmt_float(hi), count, fmt_float(fit)))


def stats_to_jsonable(stats: ErrorStats, extra: dict = None) -> dict:
    doc = stats.to_dict()
    doc["mean_m"] = _round9(doc["mean_m"])
    doc["sigma_m"] = _round9(doc["sigma_m"])
    doc["max_m"] = _round9(doc["max_m"])
    doc["fitted_mu_m"] = _round9(doc["fitted_mu_m"])
    doc["fitted_sigma_m"] = _round9(doc["fitted_sigma_m"])
    doc["histogram"] = [
        [_round9(lo), _round9(hi), int(count)] for lo, hi, count in doc["histogram"]
    ]
    if extra:
        for key, value in extra.items():
            doc[key] = _round9(value) if isinstance(value, float) else value
    return doc


def write_stats_json(path, stats: ErrorStats, extra: dict = None) -> None:
    doc = stats_to_jsonable(stats, extra)
    with _open_write(path) as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_schedule_csv(handle_or_path, schedule: Schedule) -> None:
    """Dump assignments as slot,phase,tag,anchor rows (sorted)."""
    rows = sorted(
        (a.slot_index, a.superframe_phase, a.tag_id, a.anchor_id)
        for a in schedule.assignments
    )

    def _write(handle):
        out = _writer(handle)
        out.writerow(SCHEDULE_COLUMNS)
        out.writerows(rows)

    if hasattr(handle_or_path, "write"):
        _write(handle_or_path)
    else:
        with _open_write(handle_or_path) as handle:
            _write(handle)


def truth_from_trajectory(traj, times: Sequence) -> GroundTruthTrack:
    """Sample a trajectory at the given (strictly increasing) times."""
    points = []
    for t in times:
        pos = traj.position_at(t)
        points.append((float(t), (float(pos[0]), float(pos[1])), None))
    return GroundTruthTrack(points=tuple(points))
