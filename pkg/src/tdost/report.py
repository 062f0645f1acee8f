"""Render experiment reports: aligned text, CSV, and bar figures."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import DataError


def load_report(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"report is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("runs"), list):
        raise DataError("report must be an object with a runs array")
    for run in doc["runs"]:
        missing = {"source", "target", "classifier", "variant", "folds"} - run.keys()
        if missing:
            raise DataError(f"report run missing keys: {sorted(missing)}")
    return doc


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def render_table(doc: dict) -> str:
    headers = ("run", "variant", "classifier", "accuracy", "weighted F1", "n train", "n test")
    rows = []
    for run in doc["runs"]:
        rows.append(
            (
                f"{run['source']} -> {run['target']}",
                run["variant"],
                run["classifier"],
                f"{_fmt(run['acc_mean'])} ± {_fmt(run['acc_std'])}",
                f"{_fmt(run['wf1_mean'])} ± {_fmt(run['wf1_std'])}",
                str(run.get("n_train", "")),
                str(run.get("n_test", "")),
            )
        )
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    def line(cells):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    out = [line(headers), line(tuple("-" * w for w in widths))]
    out.extend(line(r) for r in rows)
    return "\n".join(out) + "\n"


def write_csv(doc: dict, path: Path) -> None:
    """Per-run summary rows plus per-fold rows, one flat delimited file."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(
        [
            "source", "target", "variant", "classifier", "fold",
            "acc", "wf1", "acc_std", "wf1_std", "n_train", "n_test",
        ]
    )
    for run in doc["runs"]:
        writer.writerow(
            [
                run["source"], run["target"], run["variant"], run["classifier"],
                "mean", _fmt(run["acc_mean"]), _fmt(run["wf1_mean"]),
                _fmt(run["acc_std"]), _fmt(run["wf1_std"]),
                run.get("n_train", ""), run.get("n_test", ""),
            ]
        )
        for i, fold in enumerate(run["folds"]):
            writer.writerow(
                [
                    run["source"], run["target"], run["variant"], run["classifier"],
                    i, _fmt(fold["acc"]), _fmt(fold["wf1"]), "", "",
                    run.get("n_train", ""), run.get("n_test", ""),
                ]
            )
    path.write_text(buffer.getvalue(), encoding="utf-8")


def _run_label(run: dict) -> str:
    return f"{run['target']}\n{run['variant']}/{run['classifier']}"


def write_figures(doc: dict, out_dir: Path) -> list[Path]:
    """One bar figure per metric with per-fold scatter over the bars."""
    out_paths = []
    runs = doc["runs"]
    for metric, mean_key, std_key, title in (
        ("acc", "acc_mean", "acc_std", "Accuracy"),
        ("wf1", "wf1_mean", "wf1_std", "Weighted F1"),
    ):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.8 * len(runs) + 1.5), 3.6))
        xs = range(len(runs))
        means = [run[mean_key] for run in runs]
        stds = [run[std_key] for run in runs]
        ax.bar(xs, means, yerr=stds, capsize=4, color="#4878a8", alpha=0.85)
        for x, run in zip(xs, runs):
            folds = [f[metric] for f in run["folds"]]
            ax.plot([x] * len(folds), folds, "k.", markersize=4)
        ax.set_xticks(list(xs))
        ax.set_xticklabels([_run_label(r) for r in runs], fontsize=8)
        ax.set_ylim(0.0, 1.0)
        ax.set_ylabel(title)
        ax.set_title(f"{title} by transfer run (mean ± std over folds)")
        ax.grid(axis="y", alpha=0.3)
        fig.tight_layout()
        path = out_dir / f"report_{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        out_paths.append(path)
    return out_paths


def render_all(report_text: str, out_dir: Path) -> dict:
    """Write table, CSV and figures; returns the paths written."""
    doc = load_report(report_text)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = render_table(doc)
    table_path = out_dir / "report.txt"
    table_path.write_text(table, encoding="utf-8")
    csv_path = out_dir / "report.csv"
    write_csv(doc, csv_path)
    figure_paths = write_figures(doc, out_dir)
    return {
        "table": table,
        "table_path": table_path,
        "csv_path": csv_path,
        "figure_paths": figure_paths,
    }
