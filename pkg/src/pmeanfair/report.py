"""CSV emission and optional figure rendering for experiment reports.

The CSV schema is: experiment, claim, measured, bound, tolerance,
verdict.  Figure rendering is a separate, opt-in output path: the
experiment runner itself only produces rows; this module turns a batch
of reports into one delimited file and (if asked) one PNG per
experiment, written alongside the CSV.
"""

from __future__ import annotations

import csv
from pathlib import Path

CSV_FIELDS = ("experiment", "claim", "measured", "bound", "tolerance", "verdict")


def write_csv(reports, path) -> None:
    """One row per claim, in experiment order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for report in reports:
            for r in report.rows:
                writer.writerow(
                    [r.experiment, r.claim, repr(r.measured), repr(r.bound),
                     repr(r.tolerance), r.verdict]
                )


def render_figures(reports, directory) -> list:
    """One bar chart per experiment: measured value vs stated bound.

    Returns the list of files written.  Uses the non-interactive Agg
    backend so this works headless.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for report in reports:
        rows = report.rows
        fig, ax = plt.subplots(figsize=(8, 2 + 0.6 * len(rows)))
        y = range(len(rows))
        colors = ["tab:green" if r.passed else "tab:red" for r in rows]
        ax.barh(list(y), [r.measured for r in rows], color=colors, alpha=0.7,
                label="measured")
        for k, r in enumerate(rows):
            ax.plot([r.bound, r.bound], [k - 0.4, k + 0.4], "k--", lw=1)
        ax.set_yticks(list(y))
        ax.set_yticklabels([r.claim for r in rows], fontsize=7)
        ax.invert_yaxis()
        ax.set_xlabel("measured (bars) vs bound (dashed)")
        ax.set_title(report.experiment)
        fig.tight_layout()
        out = directory / f"{report.experiment}.png"
        fig.savefig(out, dpi=120)
        plt.close(fig)
        written.append(out)
    return written
