"""Force-distance curve processing: calibration, extraction, error budget.

A measurement run is a set of approach curves (z_piezo, S_def) taken at
several applied voltages. Calibration proceeds in two stages:

1. at every piezo position the deflection signal is a parabola in the
   applied voltage; the vertices give the residual potential V0, which must
   be separation-independent (a detected trend aborts with a diagnostic);
2. the deflection coefficient m, separation on contact z0 and the force
   constant k_tilde follow from the consistency of the parabola curvatures
   with the known electrostatic shape function across all separations. The
   unknown voltage-independent (Casimir) background is profiled out as a
   piecewise-linear nuisance term on a log-spaced separation grid.

The Casimir force is then extracted per curve as k_tilde * S_def minus the
electrostatic force, resampled to a 1 nm grid and averaged over
repetitions; the error budget combines random and systematic parts in
quadrature at 95% confidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, stats

from .electrostatics import CalibrationParams, PolynomialX, electrostatic_force, reconstruct_separation
from .exceptions import DataError

__all__ = [
    "ForceDistanceCurve",
    "ExtractionResult",
    "ErrorBudget",
    "GaussianStats",
    "load_curves",
    "synthesize_curves",
    "fit_calibration",
    "extract_casimir",
    "error_budget",
    "gaussian_stats",
]


@dataclass(frozen=True)
class ForceDistanceCurve:
    """One approach curve at a fixed applied voltage."""

    voltage_mv: float
    z_piezo_nm: np.ndarray
    s_def_v: np.ndarray
    repetition: int = 0
    time_index: int = 0

    def __post_init__(self):
        z = np.asarray(self.z_piezo_nm, dtype=float)
        s = np.asarray(self.s_def_v, dtype=float)
        object.__setattr__(self, "z_piezo_nm", z)
        object.__setattr__(self, "s_def_v", s)
        if z.ndim != 1 or z.shape != s.shape or z.size < 2:
            raise DataError("curve needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(z) <= 0.0):
            raise DataError("z_piezo must ascend strictly")
        if not np.all(np.isfinite(s)):
            raise DataError("deflection signal contains non-finite values")

    def resampled(self, step_nm: float = 1.0) -> "ForceDistanceCurve":
        """Linear interpolation onto a regular z grid (raw data arrive at
        0.2 nm; analysis runs on the 1 nm grid)."""
        z0 = math.ceil(self.z_piezo_nm[0] / step_nm) * step_nm
        z1 = math.floor(self.z_piezo_nm[-1] / step_nm) * step_nm
        grid = np.arange(z0, z1 + 0.5 * step_nm, step_nm)
        s = np.interp(grid, self.z_piezo_nm, self.s_def_v)
        return ForceDistanceCurve(self.voltage_mv, grid, s, self.repetition, self.time_index)

    @classmethod
    def from_csv(cls, path) -> "ForceDistanceCurve":
        voltage = None
        repetition = 0
        time_index = 0
        header = None
        z, s = [], []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line.lstrip("#").strip()
                    if "=" in body:
                        key, _, value = body.partition("=")
                        key = key.strip()
                        if key == "voltage_mv":
                            voltage = float(value)
                        elif key == "repetition":
                            repetition = int(value)
                        elif key == "time_index":
                            time_index = int(value)
                    continue
                parts = [p.strip() for p in line.split(",")]
                if header is None:
                    if parts != ["z_piezo_nm", "s_def_v"]:
                        raise DataError(f"{path}: expected header z_piezo_nm,s_def_v")
                    header = parts
                    continue
                if len(parts) != 2:
                    raise DataError(f"{path}:{lineno}: expected 2 columns")
                try:
                    z.append(float(parts[0]))
                    s.append(float(parts[1]))
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
        if voltage is None:
            raise DataError(f"{path}: missing '# voltage_mv=' metadata line")
        if not z:
            raise DataError(f"{path}: no data rows")
        return cls(voltage, np.asarray(z), np.asarray(s), repetition, time_index)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# voltage_mv={self.voltage_mv:g}\n")
            fh.write(f"# repetition={self.repetition}\n")
            fh.write(f"# time_index={self.time_index}\n")
            fh.write("z_piezo_nm,s_def_v\n")
            for z, s in zip(self.z_piezo_nm, self.s_def_v):
                fh.write(f"{z:.10g},{s:.10g}\n")


def load_curves(directory) -> list[ForceDistanceCurve]:
    """Load every *.csv force-distance curve in a directory.

    Files that fail to parse are reported together; an empty directory is a
    data error (no partial results)."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        raise DataError(f"no force-distance curves (*.csv) found in {directory}")
    curves, problems = [], []
    for path in paths:
        try:
            curves.append(ForceDistanceCurve.from_csv(path))
        except DataError as exc:
            problems.append(str(exc))
    if problems:
        raise DataError("unreadable curve files:\n" + "\n".join(problems))
    return curves


def synthesize_curves(
    truth: CalibrationParams,
    force_law,
    x: PolynomialX,
    voltages_mv,
    z_grid_nm,
    repetitions: int = 1,
    noise_v: float = 0.0,
    rng=None,
    z0_drift_nm_per_curve: float = 0.0,
    v0_gradient_mv_per_um: float = 0.0,
    a_floor_nm: float = 45.0,
) -> list[ForceDistanceCurve]:
    """Generate curves obeying the measurement equations exactly.

    The deflection at each piezo position solves the self-consistency
    S = [F_cas(a) + X(a) (V - V0)^2] / k_tilde with a = z0 + z + m S, by
    damped Newton iteration over the whole grid at once. Piezo positions
    whose solution falls below a_floor_nm or reaches the jump-to-contact
    instability (cantilever stiffness no longer dominating the force
    gradient) are dropped, so large applied voltages yield curves starting
    at larger separations. Optional imperfections: Gaussian signal noise, a
    linear drift of z0 with curve acquisition order, and a
    residual-potential gradient with separation (the patch-type anomaly the
    fit must flag).
    """
    rng = np.random.default_rng(rng)
    z_grid = np.sort(np.asarray(z_grid_nm, dtype=float))
    k_pn_per_v = truth.k_tilde_nn_per_v * 1e3
    a_lo = max(a_floor_nm * 0.9, x.a_min_nm)

    def total_pn(a, v_mv):
        v0_local = truth.v0_mv + v0_gradient_mv_per_um * (a * 1e-3)
        dv = (v_mv - v0_local) * 1e-3
        return force_law(a) + x(np.clip(a, x.a_min_nm, x.a_max_nm)) * dv**2 * 1e12

    curves = []
    time_index = 0
    for rep in range(repetitions):
        for v_mv in voltages_mv:
            z0_eff = truth.z0_nm + z0_drift_nm_per_curve * time_index
            s = np.zeros_like(z_grid)
            slope = np.ones_like(z_grid)
            for _ in range(120):
                a = np.maximum(z0_eff + z_grid + truth.m_nm_per_v * s, a_lo)
                g = s - total_pn(a, v_mv) / k_pn_per_v
                da = 1e-3
                dfda = (total_pn(a + da, v_mv) - total_pn(a - da, v_mv)) / (2 * da)
                slope = 1.0 - truth.m_nm_per_v * dfda / k_pn_per_v
                step = g / np.maximum(slope, 0.3)
                s = s - step
                # unstable points near jump-to-contact are dropped below, so
                # convergence is judged on the stable subset only
                well_behaved = slope > 0.35
                if not np.any(well_behaved) or np.max(np.abs(step[well_behaved])) < 1e-13:
                    break
            a = z0_eff + z_grid + truth.m_nm_per_v * s
            stable = (a > a_floor_nm) & (slope > 0.3)
            bad = np.where(~stable)[0]
            start = bad[-1] + 1 if bad.size else 0
            z_kept, s_kept = z_grid[start:], s[start:]
            if z_kept.size < 10:
                raise ValueError(
                    "synthesis kept too few stable points; widen the z grid or "
                    "reduce the applied voltage"
                )
            if noise_v > 0.0:
                s_kept = s_kept + rng.normal(0.0, noise_v, s_kept.size)
            curves.append(
                ForceDistanceCurve(v_mv, z_kept, s_kept, repetition=rep, time_index=time_index)
            )
            time_index += 1
    return curves


def _common_z_grid(curves, step_nm=1.0, stride=1):
    lo = max(c.z_piezo_nm[0] for c in curves)
    hi = min(c.z_piezo_nm[-1] for c in curves)
    if hi - lo < 10 * step_nm:
        raise DataError("curves do not overlap on a usable z range")
    grid = np.arange(math.ceil(lo / step_nm) * step_nm, hi + 0.5 * step_nm, step_nm)
    return grid[::stride]


def _vertex_stage(signal, voltages, times, use_time, trend_z):
    """Per-position parabola fits; returns V0 statistics and a trend test.

    signal: (n_curves, n_z); the vertex of S(V) at fixed z is V0 whatever
    the voltage-independent background does, because the electrostatic term
    is even in V - V0.
    """
    n_curves, n_z = signal.shape
    cols = [np.ones_like(voltages), voltages, voltages**2]
    if use_time:
        cols.append(times)
    design = np.column_stack(cols)
    n_par = design.shape[1]
    if n_curves <= n_par:
        raise DataError("need more distinct voltages than fit parameters")
    coef, *_ = np.linalg.lstsq(design, signal, rcond=None)
    resid = signal - design @ coef
    dof = n_curves - n_par
    sigma2 = (resid**2).sum(axis=0) / dof
    cov_base = np.linalg.inv(design.T @ design)

    c1, c2 = coef[1], coef[2]
    keep = np.abs(c2) > 5.0 * np.sqrt(np.maximum(sigma2 * cov_base[2, 2], 0.0))
    keep &= np.abs(c2) > 0.0
    if keep.sum() < 3:
        raise DataError("electrostatic curvature unresolved; cannot calibrate V0")
    vertices = -0.5 * c1[keep] / c2[keep]
    # delta-method variance of -c1/(2 c2)
    g1 = -0.5 / c2[keep]
    g2 = 0.5 * c1[keep] / c2[keep] ** 2
    var_v = sigma2[keep] * (
        g1**2 * cov_base[1, 1] + g2**2 * cov_base[2, 2] + 2 * g1 * g2 * cov_base[1, 2]
    )
    weights = 1.0 / np.maximum(var_v, 1e-30)
    if np.all(var_v < 1e-24):
        weights = np.ones_like(var_v)
    v0 = float(np.average(vertices, weights=weights))
    n_used = int(keep.sum())
    scatter = float(
        np.sqrt(np.average((vertices - v0) ** 2, weights=weights) / max(n_used - 1, 1))
    )
    v0_err = stats.t.ppf(0.975, max(n_used - 1, 1)) * scatter

    # weighted trend of the vertices against position
    z = trend_z[keep]
    zc = z - np.average(z, weights=weights)
    denom = float(np.sum(weights * zc**2))
    slope = float(np.sum(weights * zc * vertices) / denom)
    fit_resid = vertices - v0 - slope * zc
    s2 = float(np.sum(weights * fit_resid**2) / max(n_used - 2, 1))
    slope_se = math.sqrt(s2 / denom) if denom > 0 else math.inf
    if slope_se < 1e-12:
        trend_t = 0.0
    else:
        trend_t = abs(slope) / slope_se
    trend_crit = stats.t.ppf(0.975, max(n_used - 2, 1))
    return v0, float(v0_err), n_used, trend_t, float(trend_crit), slope


class _ProfileFit:
    """Inner linear solve: cubic B-spline background in ln(a) plus 1/k_tilde.

    The voltage-independent background (the Casimir part in units of signal
    volts) is profiled out at every outer step; its smooth basis keeps the
    deflection coefficient identifiable against the nuisance term.
    """

    def __init__(self, s_flat, z_flat, t_flat, v_flat, x, lna_knots):
        from scipy.interpolate import BSpline

        self._bspline = BSpline
        self.s = s_flat
        self.z = z_flat
        self.t = t_flat
        self.v = v_flat
        self.x = x
        self.knots = np.asarray(lna_knots, dtype=float)
        self.degree = 3
        self.n_bases = self.knots.size - self.degree - 1
        self._lo = math.exp(self.knots[0]) * (1 + 1e-12)
        self._hi = math.exp(self.knots[-1]) * (1 - 1e-12)

    def _assemble(self, theta):
        m, z0, drift, v0 = theta
        a = np.clip(z0 + self.z + m * self.s + drift * self.t, self._lo, self._hi)
        basis = self._bspline.design_matrix(np.log(a), self.knots, self.degree).toarray()
        g = self.x(np.clip(a, self.x.a_min_nm, self.x.a_max_nm)) * ((self.v - v0) * 1e-3) ** 2
        return a, basis, g

    def solve(self, theta):
        a, basis, g = self._assemble(theta)
        scale_g = max(math.sqrt(float(np.mean(g**2))), 1e-300)
        design = np.column_stack([basis, g / scale_g])
        coef, *_ = np.linalg.lstsq(design, self.s, rcond=None)
        resid = self.s - design @ coef
        phi_coef = coef[:-1]
        beta = coef[-1] / scale_g
        return phi_coef, beta, resid, (a, basis, g)

    def residuals(self, theta):
        return self.solve(theta)[2]

    def background_derivative(self, phi_coef, a):
        """d(background)/da from the fitted spline coefficients."""
        spline = self._bspline(self.knots, phi_coef, self.degree)
        return spline.derivative()(np.log(np.clip(a, self._lo, self._hi))) / a


def _default_lna_knots(a_values, n_bases=40, degree=3):
    lo = math.log(max(a_values.min() - 40.0, 5.0))
    hi = math.log(a_values.max() + 80.0)
    interior = np.linspace(lo, hi, n_bases - degree + 1)
    return np.concatenate([[lo] * degree, interior, [hi] * degree])


def fit_calibration(
    curves,
    x: PolynomialX,
    drift_correction: bool = False,
    lna_knots=None,
    n_background: int = 40,
    stage2_stride: int = 1,
    init_m_nm_per_v: float = 100.0,
    init_z0_nm: float = 30.0,
    trend_min_mv: float = 1.0,
) -> CalibrationParams:
    """Recover (V0, m, z0, k_tilde) with 95% half-widths from raw curves.

    Requires at least 3 distinct voltages and overlapping z coverage. Stage
    one fits the per-position parabolas of S_def against V: the vertices
    give V0, certified separation-independent; a trend that is both
    significant at 95% and larger than trend_min_mv across the covered
    range aborts (patch-potential-type anomaly). Stage two fits m, z0 and
    1/k_tilde (with V0 refined) to all rows of all curves, profiling out
    the voltage-independent background on a spline basis; confidence
    intervals come from the joint Jacobian. With drift_correction=True a
    linear dependence on acquisition order is regressed out of stage one
    and a matching drift rate is fitted in stage two.
    """
    if len(curves) < 3:
        raise DataError("calibration needs at least 3 curves")
    voltages = np.array([c.voltage_mv for c in curves], dtype=float)
    if np.unique(voltages).size < 3:
        raise DataError("calibration needs at least 3 distinct voltages")
    times = np.array([c.time_index for c in curves], dtype=float)

    grid = _common_z_grid(curves)
    signal = np.vstack([np.interp(grid, c.z_piezo_nm, c.s_def_v) for c in curves])

    v0, v0_err, n_used, trend_t, trend_crit, slope = _vertex_stage(
        signal, voltages, times, drift_correction, grid
    )
    trend_span_mv = abs(slope) * (grid[-1] - grid[0])
    if trend_t > trend_crit and trend_span_mv > trend_min_mv:
        raise DataError(
            "residual potential V0 shows a separation trend at 95% confidence "
            f"(|t| = {trend_t:.2f} > {trend_crit:.2f}, {trend_span_mv:.2f} mV across "
            "the covered range); check for patch potentials or uncorrected drift"
        )

    s_flat = np.concatenate([c.s_def_v[::stage2_stride] for c in curves])
    z_flat = np.concatenate([c.z_piezo_nm[::stage2_stride] for c in curves])
    t_flat = np.concatenate(
        [np.full(c.z_piezo_nm[::stage2_stride].size, t) for c, t in zip(curves, times)]
    )
    v_flat = np.concatenate(
        [np.full(c.z_piezo_nm[::stage2_stride].size, v) for c, v in zip(curves, voltages)]
    )

    if lna_knots is None:
        a_guess = init_z0_nm + z_flat + init_m_nm_per_v * s_flat
        lna_knots = _default_lna_knots(a_guess, n_background)
    profile = _ProfileFit(s_flat, z_flat, t_flat, v_flat, x, lna_knots)

    # theta = (m, z0, drift, v0); the stage-1 vertex value seeds v0, which
    # stage 2 refines against the full measurement equations
    theta0 = np.array([init_m_nm_per_v, init_z0_nm, 0.0, v0])
    free = [0, 1, 2, 3] if drift_correction else [0, 1, 3]

    def fun(p):
        theta = theta0.copy()
        theta[free] = p
        return profile.residuals(theta)

    result = optimize.least_squares(
        fun,
        theta0[free],
        method="trf",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        diff_step=1e-7,
    )
    theta = theta0.copy()
    theta[free] = result.x
    m_fit, z0_fit, _drift_fit, v0_fit = theta
    phi_coef, beta, resid, (a, basis, g) = profile.solve(theta)
    if beta <= 0.0:
        raise DataError("calibration fit produced a non-positive force constant")
    k_tilde_si = 1.0 / beta

    # joint Jacobian of (theta_free, background coefficients, beta)
    dv2 = ((v_flat - v0_fit) * 1e-3) ** 2
    dmodel_da = profile.background_derivative(phi_coef, a) + beta * x.derivative(a) * dv2
    dv0_col = beta * np.asarray(x(np.clip(a, x.a_min_nm, x.a_max_nm))) * (-2e-6) * (
        v_flat - v0_fit
    )
    factors = {0: dmodel_da * s_flat, 1: dmodel_da, 2: dmodel_da * t_flat, 3: dv0_col}
    n_free = len(free)
    jac = np.empty((s_flat.size, n_free + basis.shape[1] + 1))
    for col, f in enumerate(free):
        jac[:, col] = factors[f]
    jac[:, n_free : n_free + basis.shape[1]] = basis
    jac[:, -1] = g
    dof = max(s_flat.size - jac.shape[1], 1)
    sigma2 = float(resid @ resid) / dof
    # normalize columns before inverting: the 1/k_tilde column lives on a
    # ~1e-10 scale and would otherwise fall into the pseudo-inverse cutoff
    col_scale = np.sqrt(np.mean(jac**2, axis=0))
    col_scale[col_scale == 0.0] = 1.0
    jac_n = jac / col_scale
    cov_n = np.linalg.pinv(jac_n.T @ jac_n) * sigma2
    tcrit = stats.t.ppf(0.975, dof)
    err = np.sqrt(np.maximum(np.diag(cov_n), 0.0)) / col_scale
    m_err = tcrit * err[0]
    z0_err = tcrit * err[1]
    beta_err = tcrit * err[-1]
    k_err_si = beta_err / beta**2

    return CalibrationParams(
        v0_mv=v0_fit,
        m_nm_per_v=m_fit,
        z0_nm=z0_fit,
        k_tilde_nn_per_v=k_tilde_si * 1e9,
        v0_err_mv=max(v0_err, tcrit * err[free.index(3)]),
        m_err_nm_per_v=m_err,
        z0_err_nm=z0_err,
        k_tilde_err_nn_per_v=k_err_si * 1e9,
    )


@dataclass(frozen=True)
class ExtractionResult:
    """Casimir force samples on a common 1 nm separation grid.

    samples_pn holds one row per curve with NaN where the curve does not
    reach (large applied voltages pull back to larger separations); counts
    gives the number of contributing curves per grid point.
    """

    a_nm: np.ndarray
    samples_pn: np.ndarray  # (n_curves, n_grid), NaN outside a curve's range
    mean_pn: np.ndarray
    counts: np.ndarray
    voltages_mv: np.ndarray
    total_force_mean_pn: np.ndarray  # mean |k~ S| per grid point

    @property
    def n_samples(self) -> int:
        return self.samples_pn.shape[0]


def extract_casimir(
    curves, calib: CalibrationParams, x: PolynomialX, grid_step_nm: float = 1.0, min_count: int = 2
) -> ExtractionResult:
    """Per-curve Casimir forces F = k~ S - X(a)(V - V0)^2 on a 1 nm grid.

    Grid points are kept where at least min_count curves contribute; the
    mean ignores curves that do not reach a point.
    """
    if not curves:
        raise DataError("no curves to extract from")
    per_curve = []
    for c in curves:
        a = reconstruct_separation(c.z_piezo_nm, c.s_def_v, calib)
        order = np.argsort(a)
        a = a[order]
        f_tot = calib.k_tilde_nn_per_v * c.s_def_v[order] * 1e3
        f_cas = f_tot - electrostatic_force(a, c.voltage_mv, calib, x)
        per_curve.append((a, f_cas, np.abs(f_tot)))
    lo = math.ceil(min(a[0] for a, _, _ in per_curve) / grid_step_nm) * grid_step_nm
    hi = math.floor(max(a[-1] for a, _, _ in per_curve) / grid_step_nm) * grid_step_nm
    if hi <= lo:
        raise DataError("curves cover no usable separation range")
    grid = np.arange(lo, hi + 0.5 * grid_step_nm, grid_step_nm)
    samples = np.full((len(per_curve), grid.size), np.nan)
    totals = np.full_like(samples, np.nan)
    for i, (a, f, ft) in enumerate(per_curve):
        inside = (grid >= a[0]) & (grid <= a[-1])
        samples[i, inside] = np.interp(grid[inside], a, f)
        totals[i, inside] = np.interp(grid[inside], a, ft)
    counts = np.sum(~np.isnan(samples), axis=0)
    keep = counts >= min_count
    if not np.any(keep):
        raise DataError(
            f"fewer than {min_count} curves overlap at every separation; "
            "cannot form a mean curve"
        )
    grid, samples, totals, counts = grid[keep], samples[:, keep], totals[:, keep], counts[keep]
    with np.errstate(invalid="ignore"):
        mean = np.nanmean(samples, axis=0)
        total_mean = np.nanmean(totals, axis=0)
    return ExtractionResult(
        a_nm=grid,
        samples_pn=samples,
        mean_pn=mean,
        counts=counts,
        voltages_mv=np.array([c.voltage_mv for c in curves], dtype=float),
        total_force_mean_pn=total_mean,
    )


@dataclass(frozen=True)
class ErrorBudget:
    """95%-confidence force errors per separation, in pN."""

    a_nm: np.ndarray
    random_pn: np.ndarray
    systematic_pn: np.ndarray
    total_pn: np.ndarray
    separation_err_nm: float
    n_samples: int


def error_budget(
    result: ExtractionResult,
    calib: CalibrationParams,
    x: PolynomialX,
    noise_floor_pn: float = 1.0,
) -> ErrorBudget:
    """Random (Student-t) and systematic errors combined in quadrature.

    The systematic part collects the instrumental noise floor, the
    calibration error propagated through k_tilde, and the electrostatic
    subtraction error averaged over the applied voltages (dominated by the
    separation uncertainty, itself set by z0).
    """
    n_per_point = result.counts
    if np.any(n_per_point < 2):
        raise DataError("error budget needs at least 2 samples per separation")
    tcrit = stats.t.ppf(0.975, n_per_point - 1)
    with np.errstate(invalid="ignore"):
        spread = np.nanstd(result.samples_pn, axis=0, ddof=1)
    random = tcrit * spread / np.sqrt(n_per_point)

    da = calib.z0_err_nm
    k_rel = calib.k_tilde_err_nn_per_v / calib.k_tilde_nn_per_v
    cal_term = k_rel * result.total_force_mean_pn

    xa = np.asarray(x(result.a_nm))
    dxa = np.asarray(x.derivative(result.a_nm))
    el_terms = []
    for v in np.unique(result.voltages_mv):
        dv = (v - calib.v0_mv) * 1e-3
        dv0 = calib.v0_err_mv * 1e-3
        err_v0 = np.abs(2.0 * xa * dv * dv0) * 1e12
        err_a = np.abs(dxa * dv**2 * da) * 1e12
        el_terms.append(np.sqrt(err_v0**2 + err_a**2))
    el_sub = np.mean(el_terms, axis=0)

    systematic = np.sqrt(noise_floor_pn**2 + cal_term**2 + el_sub**2)
    total = np.sqrt(random**2 + systematic**2)
    return ErrorBudget(
        a_nm=result.a_nm,
        random_pn=random,
        systematic_pn=systematic,
        total_pn=total,
        separation_err_nm=da,
        n_samples=result.n_samples,
    )


@dataclass(frozen=True)
class GaussianStats:
    """Sample statistics and normalized histogram of force values."""

    mean: float
    sigma: float
    bin_edges: np.ndarray
    fractions: np.ndarray
    non_overlap_95: bool | None = None


def gaussian_stats(samples, bin_width, other=None) -> GaussianStats:
    """Mean, spread and histogram fractions; the optional second sample set
    yields a 95% non-overlap verdict of the two mean +- 1.96 sigma bands."""
    values = np.asarray(samples, dtype=float)
    if values.size < 30:
        raise ValueError("need at least 30 samples for distribution statistics")
    if bin_width <= 0.0:
        raise ValueError("bin width must be positive")
    mean = float(values.mean())
    sigma = float(values.std(ddof=1))
    lo = math.floor(values.min() / bin_width) * bin_width
    hi = math.ceil(values.max() / bin_width) * bin_width
    edges = np.arange(lo, hi + 0.5 * bin_width, bin_width)
    if edges.size < 2:
        edges = np.array([lo, lo + bin_width])
    counts, edges = np.histogram(values, bins=edges)
    fractions = counts / values.size
    verdict = None
    if other is not None:
        o = gaussian_stats(other, bin_width)
        z = 1.96
        lo1, hi1 = mean - z * sigma, mean + z * sigma
        lo2, hi2 = o.mean - z * o.sigma, o.mean + z * o.sigma
        verdict = bool(hi1 < lo2 or hi2 < lo1)
    return GaussianStats(mean, sigma, edges, fractions, verdict)
