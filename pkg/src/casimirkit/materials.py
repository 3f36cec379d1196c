"""Dielectric permittivity models on the real and imaginary frequency axis.

All frequencies are in eV. Real-axis evaluation returns the imaginary part
Im eps(omega) used as Kramers-Kronig input; imaginary-axis evaluation
returns the real-valued eps(i*xi) >= 1 entering the Lifshitz formula.

Composite models add their eps(i*xi) - 1 contributions, which makes the
free-carrier term a removable list entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DrudeParams",
    "PlasmaParams",
    "OscillatorParams",
    "NinhamParsegianParams",
    "Composite",
    "IdealMetal",
    "ZeroFrequencyResponse",
    "drude_im_eps",
    "drude_eps_imag_axis",
    "plasma_eps_imag_axis",
    "oscillator_im_eps",
    "oscillator_eps_imag_axis",
    "ninham_parsegian_eps",
]


def _require_positive(**fields):
    for name, value in fields.items():
        if not value > 0.0:
            raise ValueError(f"{name} must be > 0, got {value!r}")


def _match_input(x, out):
    """Return a float for scalar input, ndarray otherwise."""
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class ZeroFrequencyResponse:
    """Static (xi -> 0) behaviour consumed by the reflection kernel.

    kind:
        'dielectric' -- finite static permittivity eps0;
        'drude'      -- eps diverges as 1/xi, eps*xi^2 -> 0;
        'plasma'     -- eps*xi^2 -> omega_p^2;
        'ideal'      -- perfect reflector.
    """

    kind: str
    eps0: float | None = None
    omega_p: float | None = None


@dataclass(frozen=True)
class DrudeParams:
    """Free-carrier model: plasma frequency and relaxation parameter, eV."""

    omega_p: float
    gamma: float

    def __post_init__(self):
        _require_positive(omega_p=self.omega_p, gamma=self.gamma)

    def im_eps(self, omega):
        return drude_im_eps(self, omega)

    def eps_imag_axis(self, xi):
        return drude_eps_imag_axis(self, xi)

    def zero_response(self) -> ZeroFrequencyResponse:
        return ZeroFrequencyResponse("drude")


@dataclass(frozen=True)
class PlasmaParams:
    """Dissipationless free-carrier model: plasma frequency, eV."""

    omega_p: float

    def __post_init__(self):
        _require_positive(omega_p=self.omega_p)

    def eps_imag_axis(self, xi):
        return plasma_eps_imag_axis(self, xi)

    def zero_response(self) -> ZeroFrequencyResponse:
        return ZeroFrequencyResponse("plasma", omega_p=self.omega_p)


@dataclass(frozen=True)
class OscillatorParams:
    """Lorentz oscillator: strength g0 [eV^2], width gamma0 [eV], resonance omega0 [eV]."""

    g0: float
    gamma0: float
    omega0: float

    def __post_init__(self):
        _require_positive(g0=self.g0, gamma0=self.gamma0, omega0=self.omega0)

    def im_eps(self, omega):
        return oscillator_im_eps(self, omega)

    def eps_imag_axis(self, xi):
        return oscillator_eps_imag_axis(self, xi)

    def zero_response(self) -> ZeroFrequencyResponse:
        return ZeroFrequencyResponse("dielectric", eps0=1.0 + self.g0 / self.omega0**2)


@dataclass(frozen=True)
class NinhamParsegianParams:
    """Two-band (IR + UV) dielectric representation.

    c_ir, c_uv are dimensionless absorption strengths; omega_ir, omega_uv
    the characteristic frequencies in eV.
    """

    c_ir: float
    c_uv: float
    omega_ir: float
    omega_uv: float

    def __post_init__(self):
        _require_positive(
            c_ir=self.c_ir, c_uv=self.c_uv, omega_ir=self.omega_ir, omega_uv=self.omega_uv
        )

    def eps_imag_axis(self, xi):
        return ninham_parsegian_eps(self, xi)

    def zero_response(self) -> ZeroFrequencyResponse:
        return ZeroFrequencyResponse("dielectric", eps0=1.0 + self.c_ir + self.c_uv)


@dataclass(frozen=True)
class Composite:
    """Sum of permittivity models; the eps(i*xi) - 1 terms add.

    The static classification follows the strongest member: any Drude term
    makes the composite Drude-like at xi = 0, otherwise a plasma term makes
    it plasma-like, otherwise it stays dielectric.
    """

    terms: tuple

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("Composite requires at least one term")
        n_drude = sum(isinstance(t, DrudeParams) for t in self.terms)
        n_plasma = sum(isinstance(t, PlasmaParams) for t in self.terms)
        if n_drude + n_plasma > 1:
            raise ValueError("Composite supports at most one free-carrier term")

    def eps_imag_axis(self, xi):
        xi_arr = np.asarray(xi, dtype=float)
        out = np.ones_like(xi_arr)
        for t in self.terms:
            out = out + (np.asarray(t.eps_imag_axis(xi_arr)) - 1.0)
        return _match_input(xi, out)

    def im_eps(self, omega):
        omega_arr = np.asarray(omega, dtype=float)
        out = np.zeros_like(omega_arr)
        for t in self.terms:
            out = out + np.asarray(t.im_eps(omega_arr))
        return _match_input(omega, out)

    def zero_response(self) -> ZeroFrequencyResponse:
        for t in self.terms:
            if isinstance(t, DrudeParams):
                return ZeroFrequencyResponse("drude")
        for t in self.terms:
            if isinstance(t, PlasmaParams):
                return ZeroFrequencyResponse("plasma", omega_p=t.omega_p)
        eps0 = 1.0 + sum(t.zero_response().eps0 - 1.0 for t in self.terms)
        return ZeroFrequencyResponse("dielectric", eps0=eps0)


@dataclass(frozen=True)
class IdealMetal:
    """Perfect reflector: r_TM = 1, r_TE = -1 at every frequency."""

    def eps_imag_axis(self, xi):
        return _match_input(xi, np.full_like(np.asarray(xi, dtype=float), math.inf))

    def zero_response(self) -> ZeroFrequencyResponse:
        return ZeroFrequencyResponse("ideal")


def drude_im_eps(p: DrudeParams, omega):
    """Im eps of the Drude model at real frequency omega > 0 [eV].

    Diverges at omega -> 0, so non-positive frequencies are rejected.
    """
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr <= 0.0):
        raise ValueError("drude_im_eps requires omega > 0")
    out = p.omega_p**2 * p.gamma / (omega_arr * (omega_arr**2 + p.gamma**2))
    return _match_input(omega, out)


def drude_eps_imag_axis(p: DrudeParams, xi):
    """eps(i*xi) = 1 + omega_p^2 / (xi (xi + gamma)) for xi > 0 [eV].

    The xi = 0 Matsubara term is handled by limit forms in the reflection
    kernel, so zero is a hard error here.
    """
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0.0):
        raise ValueError("drude_eps_imag_axis requires xi > 0")
    out = 1.0 + p.omega_p**2 / (xi_arr * (xi_arr + p.gamma))
    return _match_input(xi, out)


def plasma_eps_imag_axis(p: PlasmaParams, xi):
    """eps(i*xi) = 1 + omega_p^2 / xi^2 for xi > 0 [eV]."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0.0):
        raise ValueError("plasma_eps_imag_axis requires xi > 0")
    out = 1.0 + (p.omega_p / xi_arr) ** 2
    return _match_input(xi, out)


def oscillator_im_eps(p: OscillatorParams, omega):
    """Im eps of a Lorentz oscillator, finite for all omega >= 0."""
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr < 0.0):
        raise ValueError("oscillator_im_eps requires omega >= 0")
    out = (
        p.g0
        * p.gamma0
        * omega_arr
        / ((omega_arr**2 - p.omega0**2) ** 2 + (p.gamma0 * omega_arr) ** 2)
    )
    return _match_input(omega, out)


def oscillator_eps_imag_axis(p: OscillatorParams, xi):
    """eps(i*xi) = 1 + g0 / (omega0^2 + xi^2 + gamma0*xi), xi >= 0."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0.0):
        raise ValueError("oscillator_eps_imag_axis requires xi >= 0")
    out = 1.0 + p.g0 / (p.omega0**2 + xi_arr**2 + p.gamma0 * xi_arr)
    return _match_input(xi, out)


def ninham_parsegian_eps(p: NinhamParsegianParams, xi):
    """eps(i*xi) = 1 + C_IR/(1 + xi^2/w_IR^2) + C_UV/(1 + xi^2/w_UV^2), xi >= 0."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0.0):
        raise ValueError("ninham_parsegian_eps requires xi >= 0")
    out = (
        1.0
        + p.c_ir / (1.0 + (xi_arr / p.omega_ir) ** 2)
        + p.c_uv / (1.0 + (xi_arr / p.omega_uv) ** 2)
    )
    return _match_input(xi, out)
