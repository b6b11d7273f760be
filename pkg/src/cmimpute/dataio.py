"""Dataset CSV reading/writing and run-configuration parsing."""

from __future__ import annotations

import csv
import os
import re

import yaml

from .errors import ConfigError, InvalidInputError
from .imputation import Formula, ImputationSpec, Indicator
from .records import SubjectRecord
from .simulate import ScenarioConfig, scenario_grid

_Z_COL = re.compile(r"^z_(\d+)$")


def default_threads() -> int:
    """Thread count when the config is silent: env override, else CPU count."""
    env = os.environ.get("CMIMPUTE_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CMIMPUTE_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def read_dataset(path, allow_extra_cols: bool = False) -> list[SubjectRecord]:
    """Read SubjectRecords from a CSV with columns t, delta, optional y, z_*.

    Covariate columns are taken in their numeric order (z_1, z_2, ...).
    Unknown columns raise unless ``allow_extra_cols`` is set.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InvalidInputError(f"{path}: empty file, no header row")
        cols = list(reader.fieldnames)
        for required in ("t", "delta"):
            if required not in cols:
                raise InvalidInputError(f"{path}: missing required column '{required}'")
        z_cols = sorted((c for c in cols if _Z_COL.match(c)),
                        key=lambda c: int(_Z_COL.match(c).group(1)))
        known = {"t", "delta", "y", *z_cols}
        extra = [c for c in cols if c not in known]
        if extra and not allow_extra_cols:
            raise InvalidInputError(
                f"{path}: unknown columns {extra}; pass --allow-extra-cols to ignore"
            )
        has_y = "y" in cols

        records = []
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(SubjectRecord(
                    t=float(row["t"]),
                    delta=int(row["delta"]),
                    z=tuple(float(row[c]) for c in z_cols),
                    y=float(row["y"]) if has_y and row["y"] not in ("", None) else None,
                ))
            except (TypeError, ValueError, InvalidInputError) as exc:
                raise InvalidInputError(f"{path}: row {lineno}: {exc}") from exc
    if not records:
        raise InvalidInputError(f"{path}: no data rows")
    return records


def write_dataset(path, records) -> None:
    """Write SubjectRecords to CSV; inverse of read_dataset."""
    records = list(records)
    p = len(records[0].z) if records else 0
    has_y = all(r.y is not None for r in records)
    header = ["t", "delta"] + [f"z_{j + 1}" for j in range(p)] + (["y"] if has_y else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in records:
            row = [repr(r.t), r.delta] + [repr(v) for v in r.z]
            if has_y:
                row.append(repr(r.y))
            writer.writerow(row)


def write_rows(path, header, rows) -> None:
    """Write tidy rows (floats rendered with full precision)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _require(mapping, key, types, where):
    if key not in mapping:
        raise ConfigError(f"config: missing '{where}{key}'")
    value = mapping[key]
    if not isinstance(value, types):
        raise ConfigError(f"config: '{where}{key}' has wrong type {type(value).__name__}")
    return value


def load_run_config(path) -> dict:
    """Parse and validate the YAML run configuration for `simulate`.

    Returns a dict with keys: configs (one ScenarioConfig per log_hr value),
    log_hrs, pooled_path, audit_path, plots_dir.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a mapping")

    scen = _require(doc, "scenario", dict, "")
    n = _require(scen, "n", int, "scenario.")
    replications = _require(scen, "replications", int, "scenario.")
    B = _require(scen, "B", int, "scenario.")
    seed = _require(scen, "seed", int, "scenario.")
    p_z = float(scen.get("p_z", 0.25))
    censor_rate = float(scen.get("censor_rate", 4.0))
    baseline_rate = float(scen.get("baseline_rate", 5.0))
    log_hrs = scen.get("log_hr", [-2, -1, 0, 1, 2])
    if isinstance(log_hrs, (int, float)):
        log_hrs = [log_hrs]
    if not isinstance(log_hrs, list) or not all(isinstance(v, (int, float)) for v in log_hrs):
        raise ConfigError("config: 'scenario.log_hr' must be a number or list of numbers")
    outcome = scen.get("outcome", {})
    if not isinstance(outcome, dict):
        raise ConfigError("config: 'scenario.outcome' must be a mapping")

    formulas = doc.get("formulas", ["correct"])
    indicators = doc.get("indicators", ["inclusive"])
    if not isinstance(formulas, list) or not isinstance(indicators, list):
        raise ConfigError("config: 'formulas' and 'indicators' must be lists")
    try:
        specs = tuple(
            ImputationSpec(Formula(str(f).lower()), Indicator(str(ind).lower()))
            for f in formulas for ind in indicators
        )
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from exc

    output = _require(doc, "output", dict, "")
    pooled_path = _require(output, "pooled", str, "output.")
    audit_path = _require(output, "audit", str, "output.")
    plots_dir = output.get("plots")
    if plots_dir is not None and not isinstance(plots_dir, str):
        raise ConfigError("config: 'output.plots' must be a path or omitted")

    threads = doc.get("threads", default_threads())
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError("config: 'threads' must be a positive integer")
    reuse = bool(doc.get("reuse_survival_fit", False))

    try:
        base = ScenarioConfig(
            n=n, p_z=p_z, censor_rate=censor_rate, baseline_rate=baseline_rate,
            alpha=float(outcome.get("alpha", 1.0)),
            beta=float(outcome.get("beta", 1.0)),
            gamma=float(outcome.get("gamma", 0.25)),
            replications=replications, B=B, seed=seed, specs=specs,
            threads=threads, reuse_survival_fit=reuse,
        )
    except InvalidInputError as exc:
        raise ConfigError(f"config: {exc}") from exc

    return {
        "configs": scenario_grid(base, log_hrs),
        "log_hrs": [float(v) for v in log_hrs],
        "pooled_path": pooled_path,
        "audit_path": audit_path,
        "plots_dir": plots_dir,
    }
