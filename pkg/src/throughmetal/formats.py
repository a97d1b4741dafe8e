"""Plain-text file formats: waveforms, ADC captures, calibration points, BER rows.

Waveform CSV::

    # sample_rate_hz=50000
    0.0000000000000000e+00
    1.5000000000000000e+01
    ...

Capture CSV::

    # sample_rate_hz=50000
    # v_ref=5.0
    # bits=10
    # gap_at=2495
    512
    ...
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .frontend import Capture
from .modem import Waveform


def _header(lines, key):
    for line in lines:
        body = line[1:].strip()
        if body.startswith(key + "="):
            return body[len(key) + 1:]
    return None


def _split(text):
    comments, data = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        (comments if line.startswith("#") else data).append(line)
    return comments, data


def _rate(value):
    rate = float(value)
    return int(rate) if rate == int(rate) else rate


def waveform_to_text(w: Waveform) -> str:
    lines = [f"# sample_rate_hz={_rate(w.sample_rate)}"]
    lines += [f"{v:.16e}" for v in w.samples]  # 17 digits: exact round trip
    return "\n".join(lines) + "\n"


def waveform_from_text(text: str) -> Waveform:
    comments, data = _split(text)
    rate = _header(comments, "sample_rate_hz")
    if rate is None:
        raise ConfigError("waveform CSV lacks a '# sample_rate_hz=' line")
    try:
        samples = np.array([float(v) for v in data])
    except ValueError as exc:
        raise ConfigError(f"bad waveform sample: {exc}") from exc
    return Waveform(samples, _rate(rate))


def capture_to_text(c: Capture) -> str:
    lines = [f"# sample_rate_hz={_rate(c.sample_rate)}", f"# v_ref={c.v_ref!r}",
             f"# bits={c.bits}"]
    lines += [f"# gap_at={g}" for g in c.gaps]
    lines += [str(int(v)) for v in c.codes]
    return "\n".join(lines) + "\n"


def capture_from_text(text: str) -> Capture:
    comments, data = _split(text)
    fields = {k: _header(comments, k) for k in ("sample_rate_hz", "v_ref", "bits")}
    missing = [k for k, v in fields.items() if v is None]
    if missing:
        raise ConfigError(f"capture CSV lacks header lines: {', '.join(missing)}")
    gaps = [int(line.split("=", 1)[1]) for line in comments
            if line[1:].strip().startswith("gap_at=")]
    try:
        codes = np.array([int(v) for v in data], dtype=np.int64)
    except ValueError as exc:
        raise ConfigError(f"bad capture code: {exc}") from exc
    return Capture(codes, _rate(fields["sample_rate_hz"]), float(fields["v_ref"]),
                   int(fields["bits"]), gaps)


def read_points(path) -> np.ndarray:
    """Two-column ``frequency_hz,vpp_volts`` CSV; a header row is optional."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if rows:
                    raise ConfigError(f"bad calibration row {row!r} in {path}") from None
    return np.array(rows, dtype=float).reshape(-1, 2)


def rows_to_csv(rows, columns, comment=None) -> str:
    """CSV text with an optional leading ``# comment`` line and a header row.

    Floats are written with ``repr`` so that equal results give equal bytes.
    """
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else
                         repr(row[c]) if isinstance(row[c], float) else row[c]
                         for c in columns])
    return buf.getvalue()


def write_text(path, text: str):
    Path(path).write_text(text)
