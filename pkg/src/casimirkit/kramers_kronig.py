"""eps(i*xi) from tabulated Im eps(omega) with model extrapolations.

The dispersion integral

    eps(i xi) = 1 + (2/pi) * int_0^inf  w Im eps(w) / (w^2 + xi^2) dw

is split at the table boundaries: a model tail below omega_min (Drude for
conductive samples), log-linear interpolation of the data in between, and a
model tail above omega_max integrated after the substitution u = 1/w.

Free-carrier handling is additive: the carrier-free ("off") value excludes
the low-frequency extrapolation and subtracts the Drude imaginary part from
the table integrand; the "on" value adds the closed-form Drude
imaginary-axis term to the "off" value. The difference of the two curves is
therefore exactly omega_p^2/(xi (xi + gamma)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .constants import KB_EV
from .exceptions import ConvergenceError, DataError
from .materials import DrudeParams, PlasmaParams, ZeroFrequencyResponse, drude_im_eps

__all__ = [
    "OpticalDataTable",
    "ExtrapolationSpec",
    "PermittivityCurve",
    "KKPermittivity",
    "kk_transform",
    "build_curve",
    "first_matsubara_ratio",
]

_MAX_REFINE_LEVELS = 20


@dataclass(frozen=True)
class OpticalDataTable:
    """Tabulated Im eps(omega) rows, strictly increasing in omega [eV]."""

    omega_ev: np.ndarray
    im_eps: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega_ev, dtype=float)
        im = np.asarray(self.im_eps, dtype=float)
        object.__setattr__(self, "omega_ev", omega)
        object.__setattr__(self, "im_eps", im)
        if omega.ndim != 1 or omega.shape != im.shape:
            raise DataError("optical data must be two equal-length 1-D columns")
        if omega.size < 2:
            raise DataError("optical data needs at least 2 rows")
        if np.any(omega <= 0.0):
            raise DataError("optical data frequencies must be positive")
        if np.any(np.diff(omega) <= 0.0):
            raise DataError("optical data frequencies must be strictly increasing")
        if np.any(im < 0.0) or not np.all(np.isfinite(im)):
            raise DataError("Im eps values must be finite and non-negative")

    @property
    def omega_min(self) -> float:
        return float(self.omega_ev[0])

    @property
    def omega_max(self) -> float:
        return float(self.omega_ev[-1])

    @classmethod
    def from_model(cls, model, omega_grid) -> "OpticalDataTable":
        """Sample a model's im_eps on a frequency grid."""
        omega = np.asarray(omega_grid, dtype=float)
        return cls(omega, np.asarray(model.im_eps(omega), dtype=float))

    @classmethod
    def from_csv(cls, path) -> "OpticalDataTable":
        """Load `omega_ev,im_eps` rows; header required, `#` lines ignored."""
        rows = _read_csv_columns(path, ("omega_ev", "im_eps"))
        return cls(rows[0], rows[1])

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("omega_ev,im_eps\n")
            for w, e in zip(self.omega_ev, self.im_eps):
                fh.write(f"{w:.10g},{e:.10g}\n")


@dataclass(frozen=True)
class ExtrapolationSpec:
    """Models supplying Im eps below and above the tabulated range.

    Any object with an ``im_eps(omega)`` method is accepted; the usual pair
    is a Drude model below and a Lorentz oscillator above.
    """

    low: object
    high: object


@dataclass(frozen=True)
class PermittivityCurve:
    """eps(i*xi) sampled on an ascending xi grid [eV]."""

    xi_ev: np.ndarray
    eps: np.ndarray
    label: str = ""

    def __post_init__(self):
        xi = np.asarray(self.xi_ev, dtype=float)
        eps = np.asarray(self.eps, dtype=float)
        object.__setattr__(self, "xi_ev", xi)
        object.__setattr__(self, "eps", eps)
        if xi.ndim != 1 or xi.shape != eps.shape or xi.size < 2:
            raise DataError("permittivity curve needs two equal-length columns, >= 2 rows")
        if np.any(np.diff(xi) <= 0.0):
            raise DataError("xi grid must be strictly increasing")
        if np.any(eps < 1.0 - 1e-9):
            raise DataError("eps(i xi) must be >= 1 everywhere")

    def __call__(self, xi):
        """Interpolate log-log within the grid; outside is an error."""
        xi_arr = np.asarray(xi, dtype=float)
        if np.any(xi_arr < self.xi_ev[0]) or np.any(xi_arr > self.xi_ev[-1]):
            raise ValueError(
                f"xi outside curve grid [{self.xi_ev[0]:g}, {self.xi_ev[-1]:g}] eV"
            )
        contrast = np.maximum(self.eps - 1.0, 1e-300)
        out = 1.0 + np.exp(
            np.interp(np.log(xi_arr), np.log(self.xi_ev), np.log(contrast))
        )
        return float(out) if np.ndim(xi) == 0 else out

    @classmethod
    def from_csv(cls, path) -> "PermittivityCurve":
        label = ""
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#") and "label=" in line:
                    label = line.split("label=", 1)[1].strip()
                    break
        rows = _read_csv_columns(path, ("xi_ev", "eps"))
        return cls(rows[0], rows[1], label=label)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if self.label:
                fh.write(f"# label={self.label}\n")
            fh.write("xi_ev,eps\n")
            for x, e in zip(self.xi_ev, self.eps):
                fh.write(f"{x:.10g},{e:.10g}\n")


def _read_csv_columns(path, names):
    """Parse a simple comma CSV with a mandatory header and `#` comments."""
    header = None
    data = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if header is None:
                header = parts
                if header != list(names):
                    raise DataError(
                        f"{path}: expected header {','.join(names)!r}, got {raw.strip()!r}"
                    )
                continue
            if len(parts) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} columns")
            try:
                data.append([float(p) for p in parts])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    if header is None or not data:
        raise DataError(f"{path}: no data rows")
    arr = np.asarray(data, dtype=float)
    return [arr[:, i] for i in range(len(names))]


class _TableInterp:
    """Piecewise interpolant of the table: log-log where possible, linear
    across segments touching a zero value."""

    def __init__(self, table: OpticalDataTable):
        self._w = table.omega_ev
        self._e = table.im_eps
        self._loglog = (self._e[:-1] > 0.0) & (self._e[1:] > 0.0)
        with np.errstate(divide="ignore"):
            self._logw = np.log(self._w)
            self._loge = np.where(self._e > 0.0, np.log(self._e), 0.0)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        idx = np.clip(np.searchsorted(self._w, w, side="right") - 1, 0, self._w.size - 2)
        w0, w1 = self._w[idx], self._w[idx + 1]
        e0, e1 = self._e[idx], self._e[idx + 1]
        t_lin = (w - w0) / (w1 - w0)
        lin = e0 + t_lin * (e1 - e0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_log = (np.log(w) - self._logw[idx]) / (self._logw[idx + 1] - self._logw[idx])
            log = np.exp(self._loge[idx] + t_log * (self._loge[idx + 1] - self._loge[idx]))
        return np.where(self._loglog[idx], log, lin)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _segmented_integral(f, edges, rel_tol):
    """Integrate f over consecutive [edges] segments with an adaptive
    Gauss-Legendre pair (orders 8/16), bisecting offenders up to
    _MAX_REFINE_LEVELS times."""
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    x8, w8 = _gauss(8)
    x16, w16 = _gauss(16)

    def eval_segments(a, b):
        mid = 0.5 * (a + b)[:, None]
        half = 0.5 * (b - a)[:, None]
        f16 = f((mid + half * x16).ravel()).reshape(len(a), -1)
        f8 = f((mid + half * x8).ravel()).reshape(len(a), -1)
        i16 = (f16 * w16).sum(axis=1) * half[:, 0]
        i8 = (f8 * w8).sum(axis=1) * half[:, 0]
        return i16, np.abs(i16 - i8)

    vals, errs = eval_segments(lo, hi)
    for _ in range(_MAX_REFINE_LEVELS):
        total = vals.sum()
        budget = rel_tol * max(abs(total), 1e-300)
        if errs.sum() <= budget:
            return float(total)
        bad = errs > budget / max(len(vals), 1)
        if not np.any(bad):
            return float(total)
        a, b = lo[bad], hi[bad]
        m = 0.5 * (a + b)
        new_lo = np.concatenate([a, m])
        new_hi = np.concatenate([m, b])
        new_vals, new_errs = eval_segments(new_lo, new_hi)
        lo = np.concatenate([lo[~bad], new_lo])
        hi = np.concatenate([hi[~bad], new_hi])
        vals = np.concatenate([vals[~bad], new_vals])
        errs = np.concatenate([errs[~bad], new_errs])
    raise ConvergenceError(
        f"table quadrature did not converge within {_MAX_REFINE_LEVELS} refinement levels"
    )


def _quad_checked(fun, a, b, rel_tol, what):
    val, abserr = quad(fun, a, b, epsabs=0.0, epsrel=rel_tol, limit=300)
    if abserr > 10.0 * rel_tol * max(abs(val), 1e-300) and abserr > 1e-200:
        raise ConvergenceError(f"{what} integral did not reach tolerance {rel_tol:g}")
    return val


def _low_integral(im_model, omega_min, xi, rel_tol):
    def f(w):
        w = max(w, 1e-300)
        return w * float(im_model.im_eps(w)) / (w * w + xi * xi)

    return _quad_checked(f, 0.0, omega_min, rel_tol, "low-frequency")


def _tail_integral(im_model, omega_max, xi, rel_tol):
    # u = 1/w maps [omega_max, inf) to (0, 1/omega_max]; the integrand goes
    # to zero like u^2 for any Im eps decaying as 1/w^3.
    def g(u):
        if u <= 0.0:
            return 0.0
        w = 1.0 / u
        return float(im_model.im_eps(w)) / (u * (1.0 + (xi * u) ** 2))

    return _quad_checked(g, 0.0, 1.0 / omega_max, rel_tol, "high-frequency tail")


def _table_integral(table, xi, rel_tol, subtract=None):
    interp = _TableInterp(table)

    if subtract is None:

        def f(w):
            return w * interp(w) / (w * w + xi * xi)

    else:

        def f(w):
            return w * (interp(w) - drude_im_eps(subtract, w)) / (w * w + xi * xi)

    return _segmented_integral(f, table.omega_ev, rel_tol)


def kk_transform(table: OpticalDataTable, ext: ExtrapolationSpec, xi, rel_tol=1e-5):
    """Full dispersion transform of table + extrapolations at xi > 0 [eV]."""
    xi = float(xi)
    if xi <= 0.0:
        raise ValueError("kk_transform requires xi > 0")
    total = (
        _low_integral(ext.low, table.omega_min, xi, rel_tol)
        + _table_integral(table, xi, rel_tol)
        + _tail_integral(ext.high, table.omega_max, xi, rel_tol)
    )
    return 1.0 + 2.0 / math.pi * total


def _kk_core(table, high_model, drude: DrudeParams, xi, rel_tol):
    """Carrier-free transform: Drude part removed from the table integrand,
    no low-frequency extrapolation. Valid down to xi = 0."""
    total = _table_integral(table, xi, rel_tol, subtract=drude) + _tail_integral(
        high_model, table.omega_max, xi, rel_tol
    )
    return 1.0 + 2.0 / math.pi * total


def build_curve(
    table: OpticalDataTable,
    ext_lower: ExtrapolationSpec,
    ext_upper: ExtrapolationSpec,
    xi_grid,
    carriers: str = "on",
    rel_tol: float = 1e-5,
):
    """Lower/upper-band permittivity curves on xi_grid [eV].

    The two bands differ in the high-frequency extrapolation only; both
    specs must carry the same Drude low end. Returns a (lower, upper)
    PermittivityCurve pair labelled with the carriers setting.
    """
    if carriers not in ("on", "off"):
        raise ValueError("carriers must be 'on' or 'off'")
    if not isinstance(ext_lower.low, DrudeParams) or ext_lower.low != ext_upper.low:
        raise ValueError("band specs must share one Drude low-frequency extrapolation")
    drude = ext_lower.low
    xi_grid = np.asarray(xi_grid, dtype=float)
    if np.any(xi_grid <= 0.0) or np.any(np.diff(xi_grid) <= 0.0):
        raise ValueError("xi grid must be positive and strictly increasing")

    curves = []
    for name, spec in (("lower", ext_lower), ("upper", ext_upper)):
        eps = np.array(
            [_kk_core(table, spec.high, drude, x, rel_tol) for x in xi_grid]
        )
        if carriers == "on":
            eps = eps + drude.omega_p**2 / (xi_grid * (xi_grid + drude.gamma))
        curves.append(
            PermittivityCurve(xi_grid, eps, label=f"carriers-{carriers} {name} band")
        )
    return curves[0], curves[1]


def first_matsubara_ratio(curve_on: PermittivityCurve, curve_off: PermittivityCurve, temperature_k: float) -> float:
    """eps_on / eps_off at the first Matsubara frequency of the given T."""
    xi1 = 2.0 * math.pi * KB_EV * temperature_k
    return curve_on(xi1) / curve_off(xi1)


class KKPermittivity:
    """Imaginary-axis permittivity of a tabulated material, usable in stacks.

    carriers:
        'on'     -- core plus the Drude term of the low extrapolation;
        'off'    -- core only (finite static limit);
        'plasma' -- core plus omega_p^2/xi^2 with plasma_omega_p.

    Evaluations are cached per xi, so Matsubara sweeps reuse results across
    separations.
    """

    def __init__(
        self,
        table: OpticalDataTable,
        ext: ExtrapolationSpec,
        carriers: str = "on",
        plasma_omega_p: float | None = None,
        rel_tol: float = 1e-5,
        label: str = "",
    ):
        if carriers not in ("on", "off", "plasma"):
            raise ValueError("carriers must be 'on', 'off' or 'plasma'")
        if not isinstance(ext.low, DrudeParams):
            raise ValueError("the low-frequency extrapolation must be a Drude model")
        if carriers == "plasma":
            if plasma_omega_p is None:
                raise ValueError("carriers='plasma' requires plasma_omega_p")
            self._plasma = PlasmaParams(plasma_omega_p)
        else:
            self._plasma = None
        self.table = table
        self.ext = ext
        self.carriers = carriers
        self.rel_tol = rel_tol
        self.label = label
        self._cache: dict[float, float] = {}

    def with_carriers(self, carriers: str, plasma_omega_p: float | None = None) -> "KKPermittivity":
        """Variant with a different carrier setting sharing the core cache.

        The carrier-free dispersion integral does not depend on the setting,
        so Matsubara sweeps over several variants reuse each other's work.
        """
        twin = KKPermittivity(
            self.table, self.ext, carriers, plasma_omega_p, self.rel_tol, self.label
        )
        twin._cache = self._cache
        return twin

    def _core(self, xi: float) -> float:
        key = float(xi)
        if key not in self._cache:
            self._cache[key] = _kk_core(
                self.table, self.ext.high, self.ext.low, key, self.rel_tol
            )
        return self._cache[key]

    def eps_imag_axis(self, xi):
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
        if np.any(xi_arr <= 0.0):
            raise ValueError("eps_imag_axis requires xi > 0; xi = 0 uses zero_response()")
        out = np.array([self._core(x) for x in xi_arr])
        if self.carriers == "on":
            d = self.ext.low
            out = out + d.omega_p**2 / (xi_arr * (xi_arr + d.gamma))
        elif self.carriers == "plasma":
            out = out + (self._plasma.omega_p / xi_arr) ** 2
        return float(out[0]) if np.ndim(xi) == 0 else out

    def zero_response(self) -> ZeroFrequencyResponse:
        if self.carriers == "on":
            return ZeroFrequencyResponse("drude")
        if self.carriers == "plasma":
            return ZeroFrequencyResponse("plasma", omega_p=self._plasma.omega_p)
        return ZeroFrequencyResponse("dielectric", eps0=self._core(0.0))
