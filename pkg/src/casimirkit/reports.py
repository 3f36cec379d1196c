"""Delimited outputs and the figures rendered alongside them.

Every CSV written here re-parses through the readers below without loss.
Figures are rendered to files with the Agg backend; matplotlib is imported
lazily so the numerical core never depends on it.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DataError

__all__ = [
    "write_force_curve",
    "read_force_curve",
    "write_experiment_curve",
    "read_experiment_curve",
    "write_comparison",
    "read_calibration_report",
    "write_calibration_report",
    "plot_force_curves",
    "plot_permittivity",
    "plot_experiment",
    "plot_comparison",
]

_FORCE_HEADER = "a_nm,f_lower_pn,f_upper_pn"
_EXPERIMENT_HEADER = "a_nm,f_mean_pn,f_random_pn,f_systematic_pn,f_total_pn"


def _write_table(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.10g}" for v in row) + "\n")


def _read_table(path, header):
    names = header.split(",")
    from .kramers_kronig import _read_csv_columns

    return np.column_stack(_read_csv_columns(path, names))


def write_force_curve(path, table) -> None:
    """Force band table rows (a_nm, f_lower_pn, f_upper_pn)."""
    _write_table(path, _FORCE_HEADER, np.asarray(table, dtype=float))


def read_force_curve(path) -> np.ndarray:
    return _read_table(path, _FORCE_HEADER)


def write_experiment_curve(path, budgeted) -> None:
    """Extraction mean with the 95% error budget per separation."""
    _write_table(path, _EXPERIMENT_HEADER, np.asarray(budgeted, dtype=float))


def read_experiment_curve(path) -> np.ndarray:
    return _read_table(path, _EXPERIMENT_HEADER)


def write_comparison(path, report) -> None:
    header = "a_nm,f_exp_pn,f_err_pn,theory_lower_pn,theory_upper_pn,agree"
    rows = np.column_stack(
        [report.a_nm, report.f_exp_pn, report.f_err_pn, report.theory_lower_pn,
         report.theory_upper_pn, report.agree.astype(float)]
    )
    if report.reduction_lower is not None:
        header += ",reduction_lower,reduction_upper"
        rows = np.column_stack([rows, report.reduction_lower, report.reduction_upper])
    _write_table(path, header, rows)


def read_calibration_report(csv_path):
    """Rebuild CalibrationParams from a calibration CSV."""
    import csv as _csv

    from .electrostatics import CalibrationParams

    values = {}
    with open(csv_path, "r", encoding="utf-8") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        if header != ["parameter", "value", "half_width_95"]:
            raise DataError(f"{csv_path}: unexpected calibration header")
        for name, value, err in reader:
            values[name] = (float(value), float(err))
    try:
        return CalibrationParams(
            v0_mv=values["v0_mv"][0],
            m_nm_per_v=values["m_nm_per_v"][0],
            z0_nm=values["z0_nm"][0],
            k_tilde_nn_per_v=values["k_tilde_nn_per_v"][0],
            v0_err_mv=values["v0_mv"][1],
            m_err_nm_per_v=values["m_nm_per_v"][1],
            z0_err_nm=values["z0_nm"][1],
            k_tilde_err_nn_per_v=values["k_tilde_nn_per_v"][1],
        )
    except KeyError as exc:
        raise DataError(f"{csv_path}: missing calibration row {exc}") from exc


def write_calibration_report(csv_path, text_path, calib) -> None:
    rows = [
        ("v0_mv", calib.v0_mv, calib.v0_err_mv),
        ("m_nm_per_v", calib.m_nm_per_v, calib.m_err_nm_per_v),
        ("z0_nm", calib.z0_nm, calib.z0_err_nm),
        ("k_tilde_nn_per_v", calib.k_tilde_nn_per_v, calib.k_tilde_err_nn_per_v),
    ]
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("parameter,value,half_width_95\n")
        for name, value, err in rows:
            fh.write(f"{name},{value:.10g},{err:.10g}\n")
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write("Electrostatic calibration (95% confidence)\n")
        fh.write("-" * 43 + "\n")
        fh.write(f"residual potential V0 : {calib.v0_mv:10.2f} +- {calib.v0_err_mv:.3g} mV\n")
        fh.write(f"deflection coeff.  m  : {calib.m_nm_per_v:10.2f} +- {calib.m_err_nm_per_v:.3g} nm/V\n")
        fh.write(f"contact separation z0 : {calib.z0_nm:10.2f} +- {calib.z0_err_nm:.3g} nm\n")
        fh.write(
            f"force constant     k~ : {calib.k_tilde_nn_per_v:10.3f} +- {calib.k_tilde_err_nn_per_v:.3g} nN/V\n"
        )


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_force_curves(path, curves, title="Sphere-plate force") -> None:
    """curves: mapping label -> (n, 3) force table."""
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for label, table in curves.items():
        ax.plot(table[:, 0], -table[:, 1], label=f"{label} (lower band)")
        ax.plot(table[:, 0], -table[:, 2], "--", label=f"{label} (upper band)")
    ax.set_xlabel("separation a (nm)")
    ax.set_ylabel("|F| (pN)")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def plot_permittivity(path, curves, title="Permittivity on the imaginary axis") -> None:
    """curves: iterable of PermittivityCurve."""
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for curve in curves:
        ax.loglog(curve.xi_ev, curve.eps, label=curve.label or None)
    ax.set_xlabel(r"$\xi$ (eV)")
    ax.set_ylabel(r"$\varepsilon(i\xi)$")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def plot_experiment(path, budgeted, title="Extracted force with 95% errors") -> None:
    plt = _figure()
    a, mean, total = budgeted[:, 0], budgeted[:, 1], budgeted[:, 4]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    step = max(len(a) // 60, 1)
    ax.errorbar(a[::step], mean[::step], yerr=total[::step], fmt="+", ms=4, lw=0.8)
    ax.set_xlabel("separation a (nm)")
    ax.set_ylabel("F (pN)")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def plot_comparison(path, report, title="Experiment vs theory band") -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    step = max(len(report.a_nm) // 45, 1)
    ax.errorbar(
        report.a_nm[::step],
        report.f_exp_pn[::step],
        yerr=report.f_err_pn[::step],
        fmt="+",
        ms=5,
        lw=0.8,
        label="experiment",
    )
    ax.plot(report.a_nm, report.theory_lower_pn, "-", lw=1.0, label="theory band")
    ax.plot(report.a_nm, report.theory_upper_pn, "-", lw=1.0)
    ax.set_xlabel("separation a (nm)")
    ax.set_ylabel("F (pN)")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
