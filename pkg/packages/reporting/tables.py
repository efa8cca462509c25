"""
Report tables in the estimate, impact and diagnostics layouts.

A ReportTable is format-neutral; render_text lays it out fixed-width and
render_delimited writes comma-separated rows (footer lines become `#`
comments so the table still parses with `pandas.read_csv(comment="#")`).
"""

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Literal, Optional, Sequence, Tuple, Union

import pandas as pd

from packages.comparison.selection import SelectionResult
from packages.core.models import CoefficientRow, DiagnosticsRow, EffectKind, FitStatistics
from packages.effects.inference import ImpactSummary

ReportFormat = Literal["text", "delimited"]

FLOAT_FORMAT = "{:.4f}"
PANEL_TITLES = {
    EffectKind.DIRECT: "Panel A: Direct effects",
    EffectKind.INDIRECT: "Panel B: Indirect effects",
    EffectKind.TOTAL: "Panel C: Total effects",
}


@dataclass
class ReportTable:
    title: str
    columns: List[str]
    panels: List[Tuple[Optional[str], List[List[Any]]]]
    footer: List[str] = field(default_factory=list)

    @property
    def rows(self) -> List[List[Any]]:
        return [row for _, rows in self.panels for row in rows]


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return FLOAT_FORMAT.format(value)
    return str(value)


def estimate_table(
    rows: Sequence[CoefficientRow], stats: FitStatistics, notes: Sequence[str] = ()
) -> ReportTable:
    body = [[r.name, r.mean, r.t_stat, r.z_prob] for r in rows]
    footer = [
        f"R-square = {stats.r_squared:.4f} ({stats.r_squared_definition})",
        f"sigma^2 = {stats.sigma2:.4f}",
    ]
    if stats.log_marginal is not None:
        footer.append(f"log-marginal = {stats.log_marginal:.4f} (homoscedastic, v = 1)")
    footer.append(
        f"ndraw = {stats.ndraw}, nburn = {stats.nburn}, rho acceptance = {stats.rho_acceptance:.3f}"
    )
    footer.extend(notes)
    return ReportTable(
        title="Posterior parameter estimates",
        columns=["Variable", "Coefficient", "Asymptot t-stat", "z-probability"],
        panels=[(None, body)],
        footer=footer,
    )


def impact_table(
    summary: ImpactSummary, cross_check: Sequence[CoefficientRow] = ()
) -> ReportTable:
    panels = []
    for kind in (EffectKind.DIRECT, EffectKind.INDIRECT, EffectKind.TOTAL):
        body = [
            [r.variable, r.mean, r.t_stat, r.t_prob, r.lower_05, r.upper_95]
            for r in summary.rows(kind)
        ]
        panels.append((PANEL_TITLES[kind], body))
    footer = [
        f"{summary.ndraws} simulated draws, mode = {summary.mode}, "
        f"rho = {summary.rho_source}, method = {summary.method}",
        "quantiles: linear interpolation of order statistics",
    ]
    for r in cross_check:
        footer.append(f"{r.name}: mean {r.mean:.4f}, t-stat {r.t_stat:.4f}")
    footer.extend(summary.notes)
    return ReportTable(
        title="Direct, indirect and total impact estimates",
        columns=["Variable", "Posterior Mean", "t-stat", "t-prob", "Lower 0.05", "Upper 0.95"],
        panels=panels,
        footer=footer,
    )


def diagnostics_table(
    rows: Sequence[DiagnosticsRow], frac_first: float = 0.1, frac_last: float = 0.9
) -> ReportTable:
    body = [
        [
            r.parameter,
            r.mean,
            r.sd,
            r.mc_error,
            r.tau,
            r.ess,
            r.geweke_z,
            r.geweke_p,
            r.geweke_p_two_sided,
        ]
        for r in rows
    ]
    return ReportTable(
        title="MCMC convergence diagnostics",
        columns=[
            "Parameter",
            "Mean",
            "StdDev",
            "MC Error",
            "Tau",
            "ESS",
            "Geweke Z",
            "Geweke p",
            "Geweke p (two-sided)",
        ],
        panels=[(None, body)],
        footer=[
            f"Geweke: first {frac_first:.0%} vs last {frac_last:.0%} of retained draws",
            "Geweke p = 2*Phi(|Z|) - 1; two-sided p = 2*(1 - Phi(|Z|))",
            "ESS = n / max(tau, 1), tau from the initial monotone positive sequence",
        ],
    )


def selection_table(result: SelectionResult) -> ReportTable:
    body = [[s.k, s.log_marginal, s.posterior_prob] for s in result.scores]
    return ReportTable(
        title="k-nearest-neighbor model comparison",
        columns=["k", "log_marginal", "posterior_prob"],
        panels=[(None, body)],
        footer=[
            f"selected k = {result.best_k}",
            "log-marginal likelihoods are homoscedastic (v = 1)",
        ],
    )


def render_text(table: ReportTable) -> str:
    cells = [[_fmt(v) for v in row] for row in table.rows]
    widths = [len(c) for c in table.columns]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]

    def line(values: Sequence[str]) -> str:
        first = values[0].ljust(widths[0])
        rest = [v.rjust(w) for v, w in zip(values[1:], widths[1:])]
        return "  ".join([first] + rest).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    out = [table.title, rule, line(table.columns), rule]
    for title, rows in table.panels:
        if title:
            out.append(title)
        out.extend(line([_fmt(v) for v in row]) for row in rows)
        if title:
            out.append(rule)
    if not table.panels or not table.panels[-1][0]:
        out.append(rule)
    out.extend(table.footer)
    return "\n".join(out) + "\n"


def to_frame(table: ReportTable) -> pd.DataFrame:
    has_panels = any(title for title, _ in table.panels)
    records = []
    for title, rows in table.panels:
        for row in rows:
            record = dict(zip(table.columns, row))
            if has_panels:
                record = {"Panel": title, **record}
            records.append(record)
    columns = (["Panel"] if has_panels else []) + table.columns
    return pd.DataFrame.from_records(records, columns=columns)


def render_delimited(table: ReportTable) -> str:
    buffer = io.StringIO()
    to_frame(table).to_csv(buffer, index=False, float_format="%.4f", lineterminator="\n")
    footer = "".join(f"# {line}\n" for line in table.footer)
    return buffer.getvalue() + footer


def render(table: ReportTable, fmt: ReportFormat = "text") -> str:
    if fmt == "text":
        return render_text(table)
    if fmt == "delimited":
        return render_delimited(table)
    raise ValueError(f"Unknown report format: {fmt}")


def write_report(
    table: ReportTable, path: Union[str, Path], fmt: ReportFormat = "text"
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(table, fmt))
    return path


def report_suffix(fmt: ReportFormat) -> str:
    return ".txt" if fmt == "text" else ".csv"
