"""Deterministic SVG plots of report tables."""

from pathlib import Path
from typing import Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .writers import report_table  # noqa: E402
from ..utils.config import get_config  # noqa: E402
from ..utils.error_handlers import ReportParseError  # noqa: E402
from ..utils.logger import get_logger  # noqa: E402
from ..utils.validators import validate_choice, validate_output_path  # noqa: E402

PLOT_KINDS = ("scatter", "line")

# preferred (x, y, log-log) per report layout
DEFAULT_AXES = [
    (("inv_eps", "constant"), True),
    (("n", "log_ratio"), False),
    (("N", "lambda_min"), False),
    (("k", "constant"), False),
]


class PlotGenerator:
    """Render an (x, y) pair of report columns as a self-contained SVG."""

    def __init__(self):
        self.logger = get_logger()
        self.config = get_config()
        plotting = self.config.get("plotting", {}) or {}
        self.size = (plotting.get("width_inches", 6.0), plotting.get("height_inches", 4.0))
        self.hash_salt = str(plotting.get("hash_salt", "torusobs"))

    def _columns(
        self, frame: pd.DataFrame, x: Optional[str], y: Optional[str]
    ) -> Tuple[str, str, bool]:
        if x and y:
            return x, y, False
        for (dx, dy), loglog in DEFAULT_AXES:
            if dx in frame.columns and dy in frame.columns:
                return dx, dy, loglog
        numeric = [c for c in frame.columns if pd.api.types.is_numeric_dtype(frame[c])]
        if len(numeric) < 2:
            raise ReportParseError("report needs two numeric columns to plot")
        return numeric[0], numeric[1], False

    def generate(
        self,
        report_path: Union[str, Path],
        kind: str = "line",
        output_path: Optional[Union[str, Path]] = None,
        x: Optional[str] = None,
        y: Optional[str] = None,
        loglog: Optional[bool] = None,
    ) -> Path:
        """
        Plot a report table.

        Args:
            report_path: CSV or JSON report
            kind: "scatter" or "line"
            output_path: SVG path (defaults to the report path with .svg)
            x, y: Column names (inferred from the report layout if omitted)
            loglog: Logarithmic axes (inferred if omitted)

        Returns:
            Path of the SVG file

        Raises:
            ReportParseError: If the report is malformed, empty or lacks the columns
        """
        kind = validate_choice(kind, "kind", PLOT_KINDS)
        frame = report_table(report_path)
        if frame.empty:
            raise ReportParseError(f"{report_path} contains no rows")

        x_col, y_col, inferred_loglog = self._columns(frame, x, y)
        for column in (x_col, y_col):
            if column not in frame.columns:
                raise ReportParseError(f"column '{column}' not in report ({list(frame.columns)})")
        loglog = inferred_loglog if loglog is None else loglog

        data = frame[[x_col, y_col]].apply(pd.to_numeric, errors="coerce")
        data = data[np.isfinite(data[x_col]) & np.isfinite(data[y_col])]
        if data.empty:
            raise ReportParseError(f"no finite ({x_col}, {y_col}) pairs in {report_path}")
        data = data.sort_values(x_col, kind="stable")

        if output_path is None:
            output_path = Path(report_path).with_suffix(".svg")
        output_path = validate_output_path(str(output_path))

        with plt.rc_context({"svg.hashsalt": self.hash_salt, "svg.fonttype": "none"}):
            fig, ax = plt.subplots(figsize=self.size)
            if kind == "line" and len(data) > 1:
                ax.plot(data[x_col], data[y_col], marker="o", linewidth=1.2)
            else:
                ax.plot(data[x_col], data[y_col], linestyle="none", marker="o")
            if loglog:
                ax.set_xscale("log")
                ax.set_yscale("log")
            ax.set_xlabel(x_col)
            ax.set_ylabel(y_col)
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            fig.savefig(output_path, format="svg", metadata={"Date": None})
            plt.close(fig)

        self.logger.info(f"Plot written: {output_path}")
        return output_path
