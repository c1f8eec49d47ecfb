# Define here the writers that turn records into files.
#
# CSV: one header line, floats in shortest round-trip form (repr), so output
# is byte-identical across runs and locales. JSON: indent=4, non-finite floats
# become null. A path of "-" means standard output.

import contextlib
import csv
import json
import math
import os
import sys

import numpy as np

from .physics.meanfield import current_series

TRAJECTORY_COLUMNS = ["s_tilde", "Z", "Theta", "H", "H_drift"]
PORTRAIT_COLUMNS = ["Theta_over_pi", "Z", "curve_id", "topology"]
POTENTIAL_COLUMNS = ["curve_id", "Z", "U", "E", "f"]
LANDSCAPE_COLUMNS = ["theta_a", "theta_b", "U"]


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (list, tuple)):
        return json.dumps(to_jsonable(value))
    return str(value)


def to_jsonable(obj):
    """Plain Python view of ``obj`` with NaN/inf mapped to None."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


@contextlib.contextmanager
def open_output(filepath):
    if filepath == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    directory = os.path.dirname(filepath)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(filepath, "w", encoding="utf-8", newline="") as f:
        yield f


def save_data(data, filepath):
    """Saves data to a JSON file."""
    with open_output(filepath) as f:
        json.dump(to_jsonable(data), f, indent=4, ensure_ascii=False)
        f.write("\n")


def load_data(filepath):
    with open(filepath, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv(columns, rows, filepath):
    """Write dict rows (missing keys left empty) under a single header line."""
    with open_output(filepath) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])


def trajectory_rows(traj, with_current=False):
    drift = traj.H_drift
    current = current_series(traj) if with_current else None
    for i in range(len(traj)):
        row = {"s_tilde": traj.s_tilde[i], "Z": traj.Z[i], "Theta": traj.Theta[i], "H": traj.H[i], "H_drift": drift[i]}
        if with_current:
            row["I_over_I0"] = current[i]
        yield row


def write_trajectory(traj, filepath, with_current=False):
    columns = TRAJECTORY_COLUMNS + (["I_over_I0"] if with_current else [])
    write_csv(columns, trajectory_rows(traj, with_current), filepath)


def write_portrait(curves, filepath):
    def rows():
        for curve_id, curve in enumerate(curves):
            for theta_over_pi, z in curve.points:
                yield {"Theta_over_pi": theta_over_pi, "Z": z, "curve_id": curve_id, "topology": curve.topology.value}

    write_csv(PORTRAIT_COLUMNS, rows(), filepath)


def write_potential(tables, filepath):
    def rows():
        for curve_id, table in enumerate(tables):
            for i in range(len(table["Z"])):
                yield {"curve_id": curve_id, **{key: table[key][i] for key in ("Z", "U", "E", "f")}}

    write_csv(POTENTIAL_COLUMNS, rows(), filepath)


def write_landscape_grid(landscape, filepath):
    def rows():
        for a, b, u in zip(landscape.theta_a.ravel(), landscape.theta_b.ravel(), landscape.U.ravel()):
            yield {"theta_a": a, "theta_b": b, "U": u}

    write_csv(LANDSCAPE_COLUMNS, rows(), filepath)
