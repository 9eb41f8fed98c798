"""Reading and writing the on-disk artifacts: configs, records, summaries, data files."""

import csv
import json
import math
import re

import numpy as np

from .discrepancy import DpConfig
from .experiments import CSV_FIELDS, ExperimentConfig, RunRecord
from .sequence_model import solution_spec_from_dict
from .spectrum import Table, spectrum_from_dict

__all__ = [
    "ConfigError",
    "parse_config",
    "load_config",
    "write_records",
    "read_records",
    "write_summary",
    "read_spectral_data",
    "write_coefficients",
]


class ConfigError(ValueError):
    """Invalid experiment configuration, addressed by file line when known."""

    def __init__(self, message, line=None, source="<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _fmt(x):
    return format(x, ".17g")


def _line_of(text, key):
    if key is None:
        return None
    pat = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pat.search(line):
            return lineno
    return None


def _fail(text, source, section, exc):
    msg = str(exc)
    first = msg.split()[0] if msg.split() else None
    line = _line_of(text, first) or _line_of(text, section)
    raise ConfigError(msg, line, source) from exc


def parse_config(text, source="<config>"):
    """Validate a JSON config document and build an :class:`ExperimentConfig`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, source) from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object", 1, source)

    unknown = sorted(set(doc) - set(ExperimentConfig.__dataclass_fields__))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", _line_of(text, unknown[0]), source)
    for key in ("spectrum", "solution", "deltas"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}", None, source)

    built = dict(doc)
    for key, build in (("spectrum", spectrum_from_dict),
                       ("solution", solution_spec_from_dict),
                       ("dp", DpConfig.from_dict)):
        try:
            if key in doc:
                built[key] = build(doc[key])
        except (TypeError, ValueError, KeyError, IndexError) as exc:
            _fail(text, source, key, exc)
    try:
        if not isinstance(doc["deltas"], list):
            raise ValueError("deltas must be a list")
        built["deltas"] = tuple(doc["deltas"])
        return ExperimentConfig(**built)
    except (TypeError, ValueError) as exc:
        _fail(text, source, None, exc)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, str(path))


def write_records(records, path):
    """CSV with ``CSV_FIELDS`` columns, 17 significant digits, LF endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in records:
            w.writerow([
                _fmt(r.delta), r.rep, r.k_dp, _fmt(r.err_dp), _fmt(r.err_oracle),
                _fmt(r.err_apriori), _fmt(r.bound), "true" if r.within_bound else "false",
            ])


def read_records(path):
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(RunRecord(
                delta=float(row["delta"]),
                rep=int(row["rep"]),
                k_dp=int(row["k_dp"]),
                err_dp=float(row["err_dp"]),
                err_oracle=float(row["err_oracle"]),
                err_apriori=float(row["err_apriori"]),
                bound=float(row["bound"]),
                within_bound=row["within_bound"] == "true",
            ))
    return out


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_summary(summary, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(summary), fh, indent=2)
        fh.write("\n")


def read_spectral_data(path):
    """Parse ``j sigma_j y_j`` rows; returns ``(Table, y)``.

    A non-numeric first line is a header. Indices must run 1, 2, ... and
    the singular values must be positive and strictly decreasing.
    """
    sigma, y = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.replace(",", " ").split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if len(parts) != 3:
                    raise ValueError
                j, s, v = int(parts[0]), float(parts[1]), float(parts[2])
            except ValueError:
                if lineno == 1:
                    continue
                raise ValueError(f"{path}:{lineno}: expected 'j sigma_j y_j'") from None
            if j != len(y) + 1:
                raise ValueError(f"{path}:{lineno}: expected index {len(y) + 1}, got {j}")
            if not (s > 0 and math.isfinite(s)) or not math.isfinite(v):
                raise ValueError(f"{path}:{lineno}: sigma must be positive, values finite")
            if sigma and s >= sigma[-1]:
                raise ValueError(f"{path}:{lineno}: singular values must strictly decrease")
            sigma.append(s)
            y.append(v)
    if not y:
        raise ValueError(f"{path}: no data rows")
    return Table(np.array(sigma)), np.array(y)


def write_coefficients(values, path, header="index value"):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for j, v in enumerate(values, start=1):
            fh.write(f"{j} {_fmt(float(v))}\n")
