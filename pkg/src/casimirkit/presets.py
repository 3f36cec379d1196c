"""Bundled reference inputs: Au sphere vs ITO film on quartz.

Material parameters follow the characterization of the sputtered 74.6 nm
ITO sample (untreated and UV-treated): a Drude free-carrier term, two
bounding high-frequency oscillator extrapolations of the ellipsometry data,
a two-band quartz substrate and a Drude-plus-core-oscillators gold coating.
The mid-range Im eps table and the AFM roughness histograms are not
available numerically; the packaged CSVs are analytic reconstructions
matching the documented summary values (film thickness, zero roughness
levels, band endpoints) and should be treated as approximate stand-ins, not
measured data.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib.resources import files

import numpy as np
from scipy.optimize import brentq

from .electrostatics import CalibrationParams
from .kramers_kronig import ExtrapolationSpec, KKPermittivity, OpticalDataTable
from .lifshitz import Layer, LayerStack
from .materials import Composite, DrudeParams, NinhamParsegianParams, OscillatorParams
from .roughness import RoughnessProfile

__all__ = [
    "SPHERE_RADIUS_UM",
    "LAB_TEMPERATURE_K",
    "ITO_THICKNESS_NM",
    "AU_DRUDE",
    "AU_OSCILLATORS",
    "AU_PLASMA_OMEGA_P_EV",
    "ITO_PLASMA_OMEGA_P_EV",
    "QUARTZ",
    "SAMPLES",
    "CALIBRATION_TRUTH",
    "au_material",
    "ito_table",
    "build_ito_table",
    "ito_extrapolation",
    "ito_material_variants",
    "build_stack",
    "roughness_profile",
    "build_roughness_profile",
    "data_path",
]

SPHERE_RADIUS_UM = 101.2
LAB_TEMPERATURE_K = 275.15  # 2 C laboratory temperature
ITO_THICKNESS_NM = 74.6

AU_DRUDE = DrudeParams(omega_p=9.0, gamma=0.035)
AU_PLASMA_OMEGA_P_EV = 9.0
# core (interband) oscillators of the gold coating: (g0 [eV^2], gamma0, omega0)
AU_OSCILLATORS = (
    OscillatorParams(7.091, 0.75, 3.05),
    OscillatorParams(41.46, 1.85, 4.15),
    OscillatorParams(2.70, 1.00, 5.40),
    OscillatorParams(154.7, 7.00, 8.50),
    OscillatorParams(44.55, 6.00, 13.50),
    OscillatorParams(309.6, 9.00, 21.50),
)

ITO_PLASMA_OMEGA_P_EV = 1.3  # longitudinal plasma frequency of the film

QUARTZ = NinhamParsegianParams(c_ir=1.93, c_uv=1.359, omega_ir=0.1378, omega_uv=13.38)


@dataclass(frozen=True)
class SampleParams:
    """Free-carrier term and the two bounding UV extrapolations."""

    drude: DrudeParams
    osc_lower: OscillatorParams
    osc_upper: OscillatorParams
    omega_min_ev: float = 0.04
    omega_max_ev: float = 8.27


SAMPLES = {
    "untreated": SampleParams(
        drude=DrudeParams(1.5, 0.128),
        osc_lower=OscillatorParams(111.52, 4.0, 8.0),
        osc_upper=OscillatorParams(240.54, 8.5, 9.0),
    ),
    "uv_treated": SampleParams(
        drude=DrudeParams(1.5, 0.132),
        osc_lower=OscillatorParams(128.28, 4.5, 8.8),
        osc_upper=OscillatorParams(280.28, 9.2, 9.8),
    ),
}

# calibration constants of the two measurement sets with 95% half-widths
CALIBRATION_TRUTH = {
    "untreated": CalibrationParams(-196.8, 104.4, 29.6, 1.51, 1.5, 0.5, 0.5, 0.02),
    "uv_treated": CalibrationParams(64.8, 104.2, 29.0, 1.51, 2.0, 0.6, 0.6, 0.02),
}

_DATA_FILES = {
    ("table", "untreated"): "ito_untreated_im_eps.csv",
    ("table", "uv_treated"): "ito_uv_treated_im_eps.csv",
    ("profile", "ito"): "roughness_ito.csv",
    ("profile", "au"): "roughness_au.csv",
}

# reconstruction constants of the roughness histograms: a Gaussian texture
# plus a sparse taller-asperity shoulder, centered so the zero-roughness
# level comes out exactly at the documented value
_PROFILE_SHAPES = {
    "ito": dict(n_bins=18, h_max_nm=26.0, zero_level_nm=9.54, sigma_core=1.5,
                tail_weight=0.016, tail_offset_nm=13.0, sigma_tail=2.0),
    "au": dict(n_bins=25, h_max_nm=30.0, zero_level_nm=11.51, sigma_core=1.8,
               tail_weight=0.016, tail_offset_nm=14.0, sigma_tail=2.0),
}


def data_path(name: str):
    """Path-like handle of a packaged data file."""
    return files("casimirkit") / "data" / name


def au_material(prescription: str = "drude") -> Composite:
    """Gold coating: core oscillators plus Drude or plasma carriers."""
    if prescription == "drude":
        carrier = AU_DRUDE
    elif prescription == "plasma":
        from .materials import PlasmaParams

        carrier = PlasmaParams(AU_PLASMA_OMEGA_P_EV)
    else:
        raise ValueError("prescription must be 'drude' or 'plasma'")
    return Composite((carrier,) + AU_OSCILLATORS)


def build_ito_table(sample: str = "untreated", n_points: int = 500) -> OpticalDataTable:
    """Analytic reconstruction of the measured Im eps over the ellipsometry
    range: Drude carriers plus the mean of the two band oscillators (both
    bands meet the measured endpoint near 3.3 at 8.27 eV)."""
    p = _sample(sample)
    omega = np.logspace(np.log10(p.omega_min_ev), np.log10(p.omega_max_ev), n_points)
    im = p.drude.im_eps(omega) + 0.5 * (p.osc_lower.im_eps(omega) + p.osc_upper.im_eps(omega))
    return OpticalDataTable(omega, im)


def ito_table(sample: str = "untreated") -> OpticalDataTable:
    """Packaged reconstructed Im eps table (see build_ito_table)."""
    return OpticalDataTable.from_csv(data_path(_DATA_FILES[("table", _key(sample))]))


def ito_extrapolation(sample: str = "untreated", band: str = "lower") -> ExtrapolationSpec:
    p = _sample(sample)
    if band == "lower":
        return ExtrapolationSpec(low=p.drude, high=p.osc_lower)
    if band == "upper":
        return ExtrapolationSpec(low=p.drude, high=p.osc_upper)
    raise ValueError("band must be 'lower' or 'upper'")


def ito_material_variants(
    sample: str = "untreated",
    band: str = "lower",
    table: OpticalDataTable | None = None,
    rel_tol: float = 1e-5,
    prescription: str = "drude",
) -> dict[str, KKPermittivity]:
    """Carriers-on and carriers-off film permittivities sharing one cache.

    With prescription='plasma' the 'on' member uses the longitudinal plasma
    frequency instead of the Drude term.
    """
    if table is None:
        table = ito_table(sample)
    ext = ito_extrapolation(sample, band)
    base = KKPermittivity(table, ext, carriers="off", rel_tol=rel_tol,
                          label=f"{_key(sample)} {band} band")
    if prescription == "drude":
        on = base.with_carriers("on")
    elif prescription == "plasma":
        on = base.with_carriers("plasma", plasma_omega_p=ITO_PLASMA_OMEGA_P_EV)
    else:
        raise ValueError("prescription must be 'drude' or 'plasma'")
    return {"off": base, "on": on}


def build_stack(film_material, gap_nm: float = 100.0, prescription: str = "drude") -> LayerStack:
    """Au half-space / vacuum gap / ITO film / quartz half-space."""
    return LayerStack(
        upper=Layer(au_material(prescription)),
        gap_nm=gap_nm,
        lower=(Layer(film_material, ITO_THICKNESS_NM), Layer(QUARTZ)),
    )


def build_roughness_profile(surface: str) -> RoughnessProfile:
    """Reconstruct the height histogram of 'ito' or 'au' from the shape
    constants; the core center is solved so the zero level is exact."""
    shape = _PROFILE_SHAPES[_surface(surface)]
    h = np.linspace(0.0, shape["h_max_nm"], shape["n_bins"])

    def weights(mu):
        v = (1.0 - shape["tail_weight"]) * np.exp(
            -0.5 * ((h - mu) / shape["sigma_core"]) ** 2
        ) + shape["tail_weight"] * np.exp(
            -0.5 * ((h - mu - shape["tail_offset_nm"]) / shape["sigma_tail"]) ** 2
        )
        return v / v.sum()

    mu = brentq(
        lambda m: float(np.dot(weights(m), h)) - shape["zero_level_nm"],
        -shape["h_max_nm"],
        shape["h_max_nm"],
        xtol=1e-13,
    )
    return RoughnessProfile(weights(mu), h)


def roughness_profile(surface: str) -> RoughnessProfile:
    """Packaged reconstructed roughness histogram of 'ito' or 'au'."""
    return RoughnessProfile.from_csv(data_path(_DATA_FILES[("profile", _surface(surface))]))


def _key(sample: str) -> str:
    key = sample.lower().replace("-", "_")
    if key not in SAMPLES:
        raise ValueError(f"unknown sample {sample!r}; expected one of {sorted(SAMPLES)}")
    return key


def _sample(sample: str) -> SampleParams:
    return SAMPLES[_key(sample)]


def _surface(surface: str) -> str:
    key = surface.lower()
    if key not in ("ito", "au"):
        raise ValueError("surface must be 'ito' or 'au'")
    return key
