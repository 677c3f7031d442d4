"""Report rendering: matplotlib figures plus CSV tables from run outputs.

Consumes the training log (JSONL of step/lr/loss) and evaluation outputs
(summary JSON, per-example records JSONL) and renders PNG figures next to
delimited CSV files, so results can be eyeballed and post-processed without
re-running anything.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalRecord, EvalSummary

__all__ = ["render_eval_report", "render_training_report"]


def render_training_report(log_entries: list[dict], out_dir: str | Path, stem: str = "training_curve") -> list[Path]:
    """Write ``<stem>.csv`` and ``<stem>.png`` (loss curve with LR overlay)."""
    if not log_entries:
        raise ValueError("training log is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    png_path = out_dir / f"{stem}.png"

    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=["step", "lr", "loss"])
        writer.writeheader()
        for entry in log_entries:
            writer.writerow({"step": entry["step"], "lr": entry["lr"], "loss": entry["loss"]})

    steps = [e["step"] for e in log_entries]
    losses = [e["loss"] for e in log_entries]
    lrs = [e["lr"] for e in log_entries]

    fig, ax_loss = plt.subplots(figsize=(8, 4.5))
    ax_loss.plot(steps, losses, color="tab:blue", linewidth=1.0, label="loss")
    ax_loss.set_xlabel("step")
    ax_loss.set_ylabel("training loss", color="tab:blue")
    ax_loss.tick_params(axis="y", labelcolor="tab:blue")
    ax_lr = ax_loss.twinx()
    ax_lr.plot(steps, lrs, color="tab:orange", linewidth=1.0, linestyle="--", label="lr")
    ax_lr.set_ylabel("learning rate", color="tab:orange")
    ax_lr.tick_params(axis="y", labelcolor="tab:orange")
    ax_loss.set_title("Reranker training")
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def render_eval_report(
    summary: EvalSummary,
    records: list[EvalRecord],
    out_dir: str | Path,
    stem: str = "metrics",
) -> list[Path]:
    """Write metric bars, a partial-score histogram, and their CSV tables."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", "value"])
        writer.writerow(["n", summary.n])
        writer.writerow(["n_ok", summary.n_ok])
        writer.writerow(["n_errored", summary.n_errored])
        writer.writerow(["exact_pct", summary.exact_pct])
        writer.writerow(["top5_pct", summary.top5_pct])
        writer.writerow(["partial_mean", summary.partial_mean])
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(6, 4))
    labels = ["Exact", "Top-5", "Partial"]
    values = [summary.exact_pct, summary.top5_pct, summary.partial_mean]
    bars = ax.bar(labels, values, color=["tab:blue", "tab:green", "tab:orange"])
    ax.set_ylim(0, 100)
    ax.set_ylabel("score")
    ax.set_title(f"Validation metrics (n_ok={summary.n_ok})")
    ax.bar_label(bars, fmt="%.1f")
    fig.tight_layout()
    png_path = out_dir / f"{stem}.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    written.append(png_path)

    partials = [r.partial for r in records if r.partial is not None]
    if partials:
        hist_csv = out_dir / f"{stem}_partial.csv"
        with open(hist_csv, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["id", "gold", "top1", "partial", "exact"])
            for r in records:
                if r.partial is None:
                    continue
                writer.writerow([r.example_id, r.gold, r.top5[0][0], r.partial, r.exact])
        written.append(hist_csv)

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(partials, bins=20, range=(0, 100), color="tab:purple", edgecolor="white")
        ax.set_xlabel("partial-match score")
        ax.set_ylabel("examples")
        ax.set_title("Partial-credit distribution")
        fig.tight_layout()
        hist_png = out_dir / f"{stem}_partial.png"
        fig.savefig(hist_png, dpi=120)
        plt.close(fig)
        written.append(hist_png)

    return written


def load_training_log(path: str | Path) -> list[dict]:
    """Read a training-log JSONL file of {step, lr, loss} entries."""
    entries = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                entries.append(json.loads(line))
    return entries
