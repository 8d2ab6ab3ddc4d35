"""Figure rendering from sweep reports.

Two views: NMSE-vs-epoch convergence curves (one line per swept value)
and final-NMSE-vs-antenna-rate curves (one line per group value, the
group being SNR or the time-domain rate).  Outputs are vector (SVG) by
default and byte-stable across runs: the SVG hash salt is pinned and no
timestamps are embedded.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .report import ReportError, ReportRow, final_nmse_by_value, load_report, load_sidecar

matplotlib.rcParams["svg.hashsalt"] = "risplot"

GROUP_KEYS = ("snr", "r_t")

_AXIS_LABELS = {
    "r_a": "antenna-domain sampling rate",
    "r_t": "time-domain sampling rate",
    "snr": "SNR (dB)",
    "epoch": "training epochs",
}


def save_figure(fig, out_path) -> Path:
    out = Path(out_path)
    if out.suffix == "":
        out = out.with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Date": None} if out.suffix == ".svg" else None)
    plt.close(fig)
    return out


def _axis_legend(axis: str, value: float) -> str:
    if axis == "snr":
        return f"SNR = {value:g} dB"
    return f"{axis} = {value:g}"


def plot_epoch_curves(csv_path, out_path=None):
    """Log-scale NMSE versus epoch, one line per swept value."""
    rows = load_report(csv_path)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    by_value: dict[tuple[str, float], list[ReportRow]] = {}
    for row in rows:
        by_value.setdefault((row.axis, row.value), []).append(row)
    for (axis, value), series in sorted(by_value.items(), reverse=True):
        series = sorted(series, key=lambda r: r.epoch)
        ax.semilogy([r.epoch for r in series], [r.nmse for r in series],
                    label=_axis_legend(axis, value))
    ax.set_xlabel("training epoch")
    ax.set_ylabel("NMSE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    if out_path is not None:
        save_figure(fig, out_path)
    return fig


def _rate_and_group(row: ReportRow, group_key: str, sidecar: dict | None, path) -> tuple[float, float | None]:
    """(antenna rate, group value) for one row; falls back to the sidecar
    for whichever of the two the sweep held fixed."""

    def fixed(quantity: str):
        if sidecar is None:
            raise ReportError(
                f"{path}: need {quantity} but no config sidecar was found "
                f"({path}.config.json)")
        if quantity == "r_a":
            return float(sidecar["frame"]["antenna_rate"])
        if quantity == "r_t":
            return float(sidecar["frame"]["time_rate"])
        snr = sidecar["snr_db"]
        return None if snr is None else float(snr)

    if row.axis == "r_a":
        return row.value, (row.value if group_key == "r_a" else fixed(group_key))
    if row.axis == group_key:
        return fixed("r_a"), row.value
    raise ReportError(
        f"{path}: rows swept over {row.axis!r} cannot be grouped by "
        f"{group_key!r}; expected an r_a or {group_key!r} sweep")


def _group_legend(group_key: str, value: float | None) -> str:
    if group_key == "snr":
        return "no noise" if value is None else f"SNR = {value:g} dB"
    return f"r_t = {value:g}"


def plot_rate_curves(csv_paths, group_key: str, out_path=None):
    """Final NMSE versus antenna-domain rate, one line per group value.

    Accepts one or more sweep CSVs; each contributes its final (last
    epoch) NMSE per swept value.
    """
    if group_key not in GROUP_KEYS:
        raise ReportError(f"unknown group key {group_key!r}; expected one of {GROUP_KEYS}")
    if isinstance(csv_paths, (str, Path)):
        csv_paths = [csv_paths]
    points: dict[float | None, dict[float, float]] = {}
    for path in csv_paths:
        rows = load_report(path)
        sidecar = load_sidecar(path)
        finals = final_nmse_by_value(rows)
        probe = {r.value: r for r in rows}
        for value, nm in finals.items():
            rate, group = _rate_and_group(probe[value], group_key, sidecar, path)
            points.setdefault(group, {})[rate] = nm
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ordered = sorted(points.items(), key=lambda kv: (kv[0] is None, kv[0]))
    for group, series in ordered:
        rates = sorted(series)
        ax.semilogy(rates, [series[r] for r in rates], marker="o",
                    label=_group_legend(group_key, group))
    ax.set_xlabel(_AXIS_LABELS["r_a"])
    ax.set_ylabel("final NMSE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    if out_path is not None:
        save_figure(fig, out_path)
    return fig


def line_count(fig) -> int:
    return len(fig.axes[0].lines)
