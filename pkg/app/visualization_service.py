"""Visualization service for campaign results.

Emits gnuplot scripts with their data files, Plotly-compatible chart data for
the HTTP API, and PNG renderings through matplotlib.
"""

import shutil
import subprocess
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from app.campaign import PointStats, percentile_column  # noqa: E402

logger = logging.getLogger(__name__)

MARK_EVERY = 5
# floor for log-scale time axes; a 0.0 ms percentile is plotted here
MIN_TIME_MS = 1e-3


class PlotKind(str, Enum):
    TIMES = "times"
    FRACTIONS = "fractions"
    TRIVIAL = "trivial"


@dataclass
class PlotScript:
    """A gnuplot script and the data file it reads."""
    script: str
    data: str
    data_filename: str


def _series(points: Sequence[PointStats], kind: PlotKind) -> List[Tuple[str, List[float]]]:
    """(label, values) pairs plotted against L/N for one plot kind."""
    if kind is PlotKind.FRACTIONS:
        return [
            ("satisfiable", [pt.frac_sat for pt in points]),
            ("unsatisfiable", [pt.frac_unsat for pt in points]),
        ]
    if kind is PlotKind.TRIVIAL:
        return [
            ("trivially satisfiable", [pt.frac_trivial_sat for pt in points]),
            ("trivially unsatisfiable", [pt.frac_trivial_unsat for pt in points]),
        ]
    qs = sorted(points[0].percentile_ms)
    return [
        (percentile_column(q)[:-3] + " time (ms)", [max(pt.percentile_ms[q], MIN_TIME_MS) for pt in points])
        for q in qs
    ]


class VisualizationService:
    """Service for generating plot data from campaign points."""

    def emit_plot_script(
        self,
        points: Sequence[PointStats],
        kind: Union[PlotKind, str],
        data_filename: str = "campaign.dat",
        output: str = "campaign.png",
    ) -> PlotScript:
        """
        Build a gnuplot script plotting one kind of series against L/N.

        Times use a log-scale y axis. Every fifth point carries a symbol on top
        of the line.

        Args:
            points: Campaign points in L order
            kind: times, fractions or trivial
            data_filename: Name the script uses for its data file
            output: PNG file the script writes

        Returns:
            PlotScript with script text and tab-separated data
        """
        if not points:
            raise ValueError("cannot plot an empty campaign")
        kind = PlotKind(kind)
        series = _series(points, kind)

        header = ["L_over_N"] + [label.replace(" ", "_") for label, _ in series]
        rows = ["# " + "\t".join(header)]
        for index, pt in enumerate(points):
            rows.append("\t".join([repr(pt.L_over_N)] + [repr(values[index]) for _, values in series]))
        data = "\n".join(rows) + "\n"

        lines = [
            "set terminal pngcairo size 800,600",
            f"set output '{output}'",
            "set xlabel 'L/N'",
            "set key outside right",
        ]
        if kind is PlotKind.TIMES:
            lines += ["set logscale y", "set ylabel 'time (ms)'"]
        else:
            lines += ["set yrange [0:1]", "set ylabel 'fraction of formulas'"]
        plots = []
        for column, (label, _) in enumerate(series, start=2):
            plots.append(f"'{data_filename}' using 1:{column} with lines lt {column - 1} title '{label}'")
            plots.append(f"'{data_filename}' using 1:{column} every {MARK_EVERY} with points lt {column - 1} notitle")
        lines.append("plot " + ", \\\n     ".join(plots))
        return PlotScript(script="\n".join(lines) + "\n", data=data, data_filename=data_filename)

    def write_plot(self, plot: PlotScript, directory: Union[str, Path], name: str = "campaign") -> Tuple[Path, Path]:
        """Write script and data side by side; returns (script_path, data_path)."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        data_path = directory / plot.data_filename
        script_path = directory / f"{name}.gp"
        data_path.write_text(plot.data, encoding="utf-8")
        script_path.write_text(plot.script, encoding="utf-8")
        logger.info(f"Wrote plot script {script_path}")
        return script_path, data_path

    def run_gnuplot(self, script_path: Union[str, Path]) -> None:
        """Execute a script with gnuplot from its own directory."""
        executable = shutil.which("gnuplot")
        if executable is None:
            raise RuntimeError("gnuplot is not installed")
        script_path = Path(script_path)
        proc = subprocess.run(
            [executable, script_path.name], cwd=script_path.parent, capture_output=True, text=True
        )
        if proc.returncode != 0:
            raise RuntimeError(f"gnuplot failed ({proc.returncode}): {proc.stderr.strip()}")

    def create_chart(self, points: Sequence[PointStats], kind: Union[PlotKind, str]) -> Dict[str, Any]:
        """
        Create Plotly-compatible chart data.

        Args:
            points: Campaign points
            kind: times, fractions or trivial

        Returns:
            Dict with 'data' traces and 'layout'
        """
        if not points:
            return {'data': [], 'layout': {}}
        kind = PlotKind(kind)
        x = [pt.L_over_N for pt in points]
        traces = [
            {
                'x': x,
                'y': values,
                'type': 'scatter',
                'mode': 'lines+markers',
                'name': label,
                'marker': {'size': 6, 'maxdisplayed': max(1, len(points) // MARK_EVERY)},
            }
            for label, values in _series(points, kind)
        ]
        titles = {
            PlotKind.TIMES: 'Decision Time Percentiles',
            PlotKind.FRACTIONS: 'Satisfiable and Unsatisfiable Fractions',
            PlotKind.TRIVIAL: 'Trivially Decided Fractions',
        }
        yaxis = {'title': 'time (ms)', 'type': 'log'} if kind is PlotKind.TIMES else \
            {'title': 'fraction of formulas', 'range': [0, 1]}
        layout = {
            'title': titles[kind],
            'xaxis': {'title': 'L/N'},
            'yaxis': yaxis,
            'hovermode': 'closest',
        }
        return {'data': traces, 'layout': layout}

    def create_all_charts(self, points: Sequence[PointStats]) -> Dict[str, Dict[str, Any]]:
        return {kind.value: self.create_chart(points, kind) for kind in PlotKind}

    def render_png(self, points: Sequence[PointStats], kind: Union[PlotKind, str], path: Union[str, Path]) -> Path:
        """Render one plot kind to a PNG file with matplotlib."""
        if not points:
            raise ValueError("cannot plot an empty campaign")
        kind = PlotKind(kind)
        x = [pt.L_over_N for pt in points]
        fig, ax = plt.subplots(figsize=(8, 6))
        try:
            for label, values in _series(points, kind):
                ax.plot(x, values, marker="o", markevery=MARK_EVERY, label=label)
            ax.set_xlabel("L/N")
            if kind is PlotKind.TIMES:
                ax.set_yscale("log")
                ax.set_ylabel("time (ms)")
            else:
                ax.set_ylim(0, 1)
                ax.set_ylabel("fraction of formulas")
            ax.legend()
            path = Path(path)
            fig.savefig(path, dpi=100, bbox_inches="tight")
        finally:
            plt.close(fig)
        logger.info(f"Rendered {kind.value} plot to {path}")
        return path
