"""Run reports and table output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{float(x):.12g}"


@dataclass(frozen=True)
class Table:
    """Column-ordered numeric table; None cells render blank."""

    name: str
    columns: tuple
    rows: list

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(x) for x in row))
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "rows": [[None if x is None else float(x) for x in row]
                     for row in self.rows],
        }


def trajectory_table(name, times, p1, p2=None, purity=None, p1_free=None) -> Table:
    """Standard time-series table: time_s, p1, p2, purity, p1_free."""
    n = len(times)

    def col(x):
        return [None] * n if x is None else list(np.asarray(x, dtype=float))

    rows = list(zip(list(np.asarray(times, dtype=float)), col(p1), col(p2),
                    col(purity), col(p1_free)))
    return Table(name=name, columns=("time_s", "p1", "p2", "purity", "p1_free"),
                 rows=rows)


@dataclass
class RunReport:
    """Resolved inputs, derived couplings, summary metrics and table paths.

    Every summary metric names the operation that produced it.
    """

    scenario: str
    resolved: dict
    derived: dict
    summary: dict = field(default_factory=dict)
    tables: list = field(default_factory=list)
    wall_clock_s: float = 0.0

    def add_metric(self, name: str, value, produced_by: str):
        self.summary[name] = {"value": float(value), "produced_by": produced_by}

    def to_json(self) -> str:
        return json.dumps(
            {
                "scenario": self.scenario,
                "resolved": self.resolved,
                "derived": self.derived,
                "summary": self.summary,
                "tables": self.tables,
                "wall_clock_s": self.wall_clock_s,
            },
            indent=2,
            sort_keys=True,
        )


def derived_summary(c) -> dict:
    """JSON-friendly view of the derived couplings."""
    return {
        "xi_real": [[float(x) for x in row] for row in c.xi.real],
        "xi_imag": [[float(x) for x in row] for row in c.xi.imag],
        "exchange_J": [[float(x) for x in row] for row in c.J],
        "s_coeff": [float(x) for x in c.s_coeff],
        "eta": float(c.eta),
        "omega_bar": float(c.omega_bar),
        "omega_ref": float(c.omega_ref),
    }
