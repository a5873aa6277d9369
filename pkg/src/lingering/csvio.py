"""CSV emission with locale-free, shortest round-trip number formatting."""

from __future__ import annotations

import csv
import math

PROFILE_HEADER = ("t", "x", "u", "m", "sbar", "s")
REPORT_HEADER = ("alpha", "mu", "max_u", "argmax_x", "total_u", "total_s", "K", "residual", "status")
STEADY_META_HEADER = ("solver", "alpha", "mu", "K", "M", "residual", "iterations")
DMU_HEADER = ("x", "u_inf", "m_inf", "dudmu", "Fu", "Fmu")


class CSVWriteError(OSError):
    pass


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool,)):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    x = float(v)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_table(path, header, rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
    except OSError as exc:
        raise CSVWriteError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def _parse(cell: str):
    try:
        return float(cell)
    except ValueError:
        return cell


def read_table(path):
    """Return (header, rows) with numeric cells parsed to float."""
    with open(path, encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[_parse(c) for c in row] for row in r]
    return tuple(header), rows


def emit_profile_csv(path, snapshots, x, sbar, s) -> None:
    """One row per (snapshot, cell), ordered by t then x."""
    def rows():
        for snap in snapshots:
            for i in range(len(x)):
                yield (snap.t, x[i], snap.u[i], snap.m[i], sbar[i], s[i])
    write_table(path, PROFILE_HEADER, rows())


def emit_report_csv(path, points) -> None:
    write_table(path, REPORT_HEADER,
                ((p.alpha, p.mu, p.max_u, p.argmax_x, p.total_u, p.total_s, p.K, p.residual,
                  p.status) for p in points))
