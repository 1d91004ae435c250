"""Formatting of bound tables and certification reports."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext

from .core import AccuracyBand, ObservedCounty, PrevalenceInterval, ScenarioSet, run_scenarios

_INTERVAL = re.compile(r"\[\s*([0-9.]+)%\s*,\s*([0-9.]+)%\s*\]")


def percent(x: float, places: int = 2) -> str:
    """``x`` as a percentage, rounded half away from zero, without the sign.

    Ties are judged on the shortest repr of ``x``: 0.00125 gives "0.13".
    """
    with localcontext() as ctx:
        ctx.prec = 80
        value = Decimal(repr(float(x))) * 100
        return str(value.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


def format_interval(iv: PrevalenceInterval, places: int = 2) -> str:
    return f"[{percent(iv.lo, places)}%, {percent(iv.hi, places)}%]"


def parse_interval(text: str) -> tuple[float, float]:
    """Inverse of :func:`format_interval`, in probability units."""
    m = _INTERVAL.fullmatch(text.strip())
    if not m:
        raise ValueError(f"not an interval: {text!r}")
    return float(Decimal(m.group(1)) / 100), float(Decimal(m.group(2)) / 100)


@dataclass(frozen=True)
class ReportRow:
    county: ObservedCounty
    intervals: tuple  # ((scenario name, PrevalenceInterval), ...)

    @property
    def formatted(self) -> list[str]:
        return [format_interval(iv) for _, iv in self.intervals]


def build_report(counties, acc: AccuracyBand, scenarios: ScenarioSet) -> list[ReportRow]:
    return [ReportRow(c, tuple(run_scenarios(c, acc, scenarios))) for c in counties]


def _md_cell(text: str) -> str:
    return text.replace("|", "\\|")


def render_markdown(rows, scenarios: ScenarioSet) -> str:
    header = ["County", "Positive Tests", "Participation", *scenarios.names]
    lines = [
        "| " + " | ".join(_md_cell(h) for h in header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for row in rows:
        cells = [
            _md_cell(row.county.name),
            percent(row.county.gamma) + "%",
            percent(row.county.tau) + "%",
            *row.formatted,
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_csv(rows, scenarios: ScenarioSet) -> str:
    """CSV with the county inputs first, so the file reads back as county data."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["name", "positive_pct", "participation_pct"]
    for name in scenarios.names:
        header += [f"{name} lo", f"{name} hi"]
    writer.writerow(header)
    for row in rows:
        out = [row.county.name, percent(row.county.gamma), percent(row.county.tau)]
        for _, iv in row.intervals:
            out += [percent(iv.lo), percent(iv.hi)]
        writer.writerow(out)
    return buf.getvalue()


def _interval_json(iv: PrevalenceInterval) -> dict:
    return {"lo": iv.lo, "hi": iv.hi, "lo_pct": percent(iv.lo), "hi_pct": percent(iv.hi)}


def render_json(rows, scenarios: ScenarioSet, acc: AccuracyBand | None = None) -> str:
    doc = {"scenarios": scenarios.names}
    if acc is not None:
        doc["accuracy"] = {"sigma": [acc.sigma_lo, acc.sigma_hi], "pi": [acc.pi_lo, acc.pi_hi]}
    doc["rows"] = [
        {
            "name": row.county.name,
            "gamma": row.county.gamma,
            "tau": row.county.tau,
            "intervals": {name: _interval_json(iv) for name, iv in row.intervals},
        }
        for row in rows
    ]
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_table(rows, scenarios: ScenarioSet, fmt: str = "md", acc: AccuracyBand | None = None) -> str:
    if fmt == "md":
        return render_markdown(rows, scenarios)
    if fmt == "csv":
        return render_csv(rows, scenarios)
    if fmt == "json":
        return render_json(rows, scenarios, acc)
    raise ValueError(f"unknown format {fmt!r}")


def render_certification(report, fmt: str = "md") -> str:
    status = "PASS" if report.passed else "FAIL"
    summary = (
        f"{status}: {len(report.cells) - report.n_failed}/{len(report.cells)} cells within "
        f"tolerance {report.tolerance:g} (grid_steps={report.grid_steps}, max gap {report.max_gap:.3e})"
    )
    if fmt == "json":
        doc = {
            "passed": report.passed,
            "grid_steps": report.grid_steps,
            "tolerance": report.tolerance,
            "max_gap": report.max_gap,
            "cells": [
                {
                    "county": c.county,
                    "scenario": c.scenario,
                    "analytic": [c.analytic.lo, c.analytic.hi],
                    "oracle": [c.oracle.lo, c.oracle.hi],
                    "gap": c.gap,
                    "contained": c.contained,
                    "passed": c.passed,
                }
                for c in report.cells
            ],
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["county", "scenario", "analytic_lo", "analytic_hi", "oracle_lo", "oracle_hi", "gap", "status"])
        for c in report.cells:
            writer.writerow([
                c.county, c.scenario, repr(c.analytic.lo), repr(c.analytic.hi),
                repr(c.oracle.lo), repr(c.oracle.hi), f"{c.gap:.3e}", "PASS" if c.passed else "FAIL",
            ])
        return buf.getvalue()
    lines = ["| County | Scenario | Analytic | Oracle | Gap | Status |", "|---|---|---|---|---|---|"]
    for c in report.cells:
        lines.append(
            f"| {_md_cell(c.county)} | {_md_cell(c.scenario)} | "
            f"[{c.analytic.lo:.6f}, {c.analytic.hi:.6f}] | [{c.oracle.lo:.6f}, {c.oracle.hi:.6f}] | "
            f"{c.gap:.3e} | {'PASS' if c.passed else 'FAIL'} |"
        )
    lines.append("")
    lines.append(summary)
    return "\n".join(lines) + "\n"
