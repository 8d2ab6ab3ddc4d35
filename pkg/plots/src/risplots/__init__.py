"""Figure rendering for NMSE sweep reports."""

from .figures import line_count, plot_epoch_curves, plot_rate_curves, save_figure
from .report import ReportError, ReportRow, final_nmse_by_value, load_report, load_sidecar

__version__ = "0.1.0"
