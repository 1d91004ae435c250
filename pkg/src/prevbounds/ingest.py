"""Reading county data and run configuration from text.

County files are CSV with a header row. Two layouts are accepted:

* ``PERCENT``: ``name, positive_pct, participation_pct`` as printed in
  the published tables (percent units, e.g. ``0.90`` for 0.9%).
* ``COUNTS``: ``name, n_positive, n_tested, population``.

Columns are matched by header name; extra columns are ignored, so a CSV
report written by :mod:`prevbounds.report` can be read back as a county file.

The config file is JSON::

    {
      "accuracy": {"sigma": [0.5358, 0.8765], "pi": [0.9953, 1.0]},
      "scenarios": [{"name": "No Assumption", "kappa": null},
                    {"name": "Negative Selection", "kappa": [1, "inf"]}],
      "oracle": {"grid_steps": 501, "tolerance": 0.002}
    }
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import IO, Iterable

from .core import (
    NO_ASSUMPTION,
    STANDARD_SCENARIOS,
    UNBOUNDED,
    AccuracyBand,
    ObservedCounty,
    Scenario,
    ScenarioSet,
    SelectionBand,
)
from .errors import ParseError, ValidationError
from .oracle import OracleConfig

# Plain decimal literal: no thousands separators, no locale commas, no inf/nan.
_DECIMAL = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_INTEGER = re.compile(r"[+-]?\d+")

_HUNDRED = Decimal(100)


class CountyFormat(enum.Enum):
    PERCENT = "percent"
    COUNTS = "counts"


_COLUMNS = {
    CountyFormat.PERCENT: ("name", "positive_pct", "participation_pct"),
    CountyFormat.COUNTS: ("name", "n_positive", "n_tested", "population"),
}


@dataclass(frozen=True)
class Dataset:
    counties: tuple
    source: str = field(default="<memory>", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "counties", tuple(self.counties))
        seen = set()
        for county in self.counties:
            if county.name in seen:
                raise ValidationError(f"duplicate county name {county.name!r}")
            seen.add(county.name)

    def __len__(self):
        return len(self.counties)

    def __iter__(self):
        return iter(self.counties)


def _decimal(text, row, column):
    text = text.strip()
    if not _DECIMAL.fullmatch(text):
        raise ParseError(f"not a decimal number: {text!r}", row, column)
    return Decimal(text)


def _integer(text, row, column):
    text = text.strip()
    if not _INTEGER.fullmatch(text):
        raise ParseError(f"not an integer: {text!r}", row, column)
    return int(text)


def _percent_row(cells, row):
    positive = _decimal(cells["positive_pct"], row, "positive_pct")
    participation = _decimal(cells["participation_pct"], row, "participation_pct")
    for value, column in ((positive, "positive_pct"), (participation, "participation_pct")):
        if not 0 <= value <= 100:
            raise ValidationError(f"row {row}: {column} must lie in [0, 100], got {value}")
    # Decimal division keeps "0.90" -> 0.009 correctly rounded.
    return float(positive / _HUNDRED), float(participation / _HUNDRED)


def _counts_row(cells, row):
    n_pos = _integer(cells["n_positive"], row, "n_positive")
    n_tested = _integer(cells["n_tested"], row, "n_tested")
    population = _integer(cells["population"], row, "population")
    if min(n_pos, n_tested, population) < 0:
        raise ValidationError(f"row {row}: counts must be nonnegative")
    if n_tested == 0:
        raise ValidationError(f"row {row}: n_tested is 0, test yield undefined")
    if n_pos > n_tested:
        raise ValidationError(f"row {row}: n_positive {n_pos} exceeds n_tested {n_tested}")
    if n_tested > population:
        raise ValidationError(f"row {row}: n_tested {n_tested} exceeds population {population}")
    return n_pos / n_tested, n_tested / population


def parse_counties(stream: IO[str], format: CountyFormat = CountyFormat.PERCENT, source: str | None = None) -> Dataset:
    """Parse a county CSV into a validated :class:`Dataset`."""
    format = CountyFormat(format)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("missing header row", row=1) from None
    header = [h.lstrip("\ufeff").strip() for h in header]
    wanted = _COLUMNS[format]
    missing = [c for c in wanted if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)} for {format.value} format", row=1)
    index = {c: header.index(c) for c in wanted}
    convert = _percent_row if format is CountyFormat.PERCENT else _counts_row

    counties = []
    seen = {}
    for raw in reader:
        row = reader.line_num
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(raw)}", row)
        cells = {c: raw[i] for c, i in index.items()}
        name = cells["name"]
        gamma, tau = convert(cells, row)
        try:
            county = ObservedCounty(name, gamma, tau)
        except ValidationError as exc:
            raise ValidationError(f"row {row}: {exc}") from exc
        if name in seen:
            raise ValidationError(f"row {row}: duplicate county name {name!r} (first on row {seen[name]})")
        seen[name] = row
        counties.append(county)
    return Dataset(counties, source or getattr(stream, "name", "<stream>"))


def read_counties(path, format: CountyFormat = CountyFormat.PERCENT) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_counties(fh, format, source=str(path))


def percent_text(p: float) -> str:
    """Shortest percent literal that parses back to exactly ``p``."""
    return format((Decimal(repr(p)) * _HUNDRED).normalize(), "f")


def serialize_counties(dataset: Iterable[ObservedCounty]) -> str:
    """Write counties in PERCENT layout; :func:`parse_counties` inverts it."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_COLUMNS[CountyFormat.PERCENT])
    for county in dataset:
        writer.writerow([county.name, percent_text(county.gamma), percent_text(county.tau)])
    return buf.getvalue()


# -- config -----------------------------------------------------------------


def _number(value, path, *, allow_inf=False):
    if allow_inf and isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return UNBOUNDED
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ValidationError(f"{path}: expected a finite number, got {value!r}")
    return value


def _pair(value, path, *, allow_inf=False):
    if not isinstance(value, list) or len(value) != 2:
        raise ValidationError(f"{path}: expected a [lo, hi] pair, got {value!r}")
    return (
        _number(value[0], f"{path}[0]", allow_inf=allow_inf),
        _number(value[1], f"{path}[1]", allow_inf=allow_inf),
    )


def _object(value, path):
    if not isinstance(value, dict):
        raise ValidationError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def parse_accuracy(doc, path="accuracy") -> AccuracyBand:
    doc = _object(doc, path)
    for key in ("sigma", "pi"):
        if key not in doc:
            raise ValidationError(f"{path}.{key}: missing")
    s_lo, s_hi = _pair(doc["sigma"], f"{path}.sigma")
    p_lo, p_hi = _pair(doc["pi"], f"{path}.pi")
    try:
        band = AccuracyBand(s_lo, s_hi, p_lo, p_hi)
        band.require_informative()
    except ValidationError as exc:
        raise type(exc)(f"{path}: {exc}") from exc
    return band


def parse_scenarios(doc, path="scenarios") -> ScenarioSet:
    if not isinstance(doc, list) or not doc:
        raise ValidationError(f"{path}: expected a non-empty list")
    entries = []
    for i, item in enumerate(doc):
        here = f"{path}[{i}]"
        item = _object(item, here)
        name = item.get("name")
        if not isinstance(name, str) or not name.strip():
            raise ValidationError(f"{here}.name: expected non-empty text")
        kappa = item.get("kappa")
        try:
            if kappa is None:
                selection = NO_ASSUMPTION
            else:
                selection = SelectionBand(*_pair(kappa, f"{here}.kappa", allow_inf=True))
        except ValidationError as exc:
            msg = str(exc)
            raise ValidationError(msg if msg.startswith(here) else f"{here}.kappa: {msg}") from exc
        entries.append(Scenario(name, selection))
    try:
        return ScenarioSet(entries)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def parse_oracle(doc, path="oracle") -> OracleConfig:
    doc = _object(doc, path)
    unknown = set(doc) - {"grid_steps", "tolerance"}
    if unknown:
        raise ValidationError(f"{path}: unknown key(s) {', '.join(sorted(unknown))}")
    kwargs = {}
    if "grid_steps" in doc:
        steps = doc["grid_steps"]
        if isinstance(steps, bool) or not isinstance(steps, int):
            raise ValidationError(f"{path}.grid_steps: expected an integer, got {steps!r}")
        kwargs["grid_steps"] = steps
    if "tolerance" in doc and doc["tolerance"] is not None:
        kwargs["tolerance"] = _number(doc["tolerance"], f"{path}.tolerance")
    try:
        return OracleConfig(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def parse_config(stream: IO[str]) -> tuple[AccuracyBand, ScenarioSet, OracleConfig]:
    """Parse a JSON run configuration.

    Missing ``scenarios`` gives the five published presets, missing
    ``oracle`` gives :class:`OracleConfig` defaults. ``accuracy`` is required.
    """
    try:
        doc = json.load(stream)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", row=exc.lineno, column=f"char {exc.colno}") from exc
    doc = _object(doc, "config")
    if "accuracy" not in doc:
        raise ValidationError("accuracy: missing")
    acc = parse_accuracy(doc["accuracy"])
    scenarios = parse_scenarios(doc["scenarios"]) if "scenarios" in doc else STANDARD_SCENARIOS
    oracle = parse_oracle(doc["oracle"]) if "oracle" in doc else OracleConfig()
    return acc, scenarios, oracle


def read_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh)


def scenario_to_json(scenario: Scenario) -> dict:
    if scenario.selection is NO_ASSUMPTION:
        return {"name": scenario.name, "kappa": None}
    sel = scenario.selection
    hi = "inf" if sel.unbounded else sel.kappa_hi
    return {"name": scenario.name, "kappa": [sel.kappa_lo, hi]}


def config_to_json(acc: AccuracyBand, scenarios: ScenarioSet | None = None, oracle: OracleConfig | None = None) -> dict:
    doc = {"accuracy": {"sigma": [acc.sigma_lo, acc.sigma_hi], "pi": [acc.pi_lo, acc.pi_hi]}}
    if scenarios is not None:
        doc["scenarios"] = [scenario_to_json(s) for s in scenarios]
    if oracle is not None:
        doc["oracle"] = {"grid_steps": oracle.grid_steps, "tolerance": oracle.tolerance}
    return doc
