"""Finite-temperature Lifshitz free energy and PFA sphere-plate force.

Planar geometry: a semi-infinite upper body, a vacuum gap of width a, and a
lower stack of films terminated by a semi-infinite substrate. The free
energy per unit area is

    E(a,T) = (kT/2pi) * sum'_l  int k dk  sum_pol ln[1 - r_up r_dn e^(-2 q0 a)]

with Matsubara frequencies xi_l = 2 pi kT l / hbar, the l = 0 term at half
weight, and q0^2 = k^2 + xi_l^2/c^2. The transverse integral is evaluated
in y = 2 q0 a / (hbar c) on Gauss-Legendre panels; the first panel is
integrated in sqrt(y - y_l) to absorb the soft logarithmic behaviour of the
metallic integrand near y = 0. Spectral quantities are in eV, lengths in
nm; energies leave in J/m^2 and forces in pN.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import EV_PER_NM2_TO_J_PER_M2, HBARC_EV_NM, KB_EV, KB_J
from .exceptions import ConvergenceError
from .materials import IdealMetal, ZeroFrequencyResponse

__all__ = [
    "Layer",
    "LayerStack",
    "MatsubaraSpec",
    "QuadratureSpec",
    "matsubara_frequency",
    "fresnel_r",
    "stack_reflection",
    "free_energy_per_area",
    "pfa_sphere_plate_force",
    "force_curve",
    "tabulated_force",
]

_IDEAL = object()  # marker for perfect reflectors in the media chain


def matsubara_frequency(l: int, temperature_k: float) -> float:
    """xi_l = 2 pi k_B T l / hbar, returned in eV."""
    if l < 0:
        raise ValueError("Matsubara index must be >= 0")
    if temperature_k <= 0.0:
        raise ValueError("temperature must be > 0")
    return 2.0 * math.pi * KB_EV * temperature_k * l


@dataclass(frozen=True)
class Layer:
    """A medium with an imaginary-axis permittivity; thickness None means
    semi-infinite."""

    material: object
    thickness_nm: float | None = None

    def __post_init__(self):
        if self.thickness_nm is not None and not self.thickness_nm > 0.0:
            raise ValueError("finite layer thickness must be > 0")


@dataclass(frozen=True)
class LayerStack:
    """Upper half-space, vacuum gap, and the lower film stack.

    The lower tuple is ordered from the gap downwards and must end in a
    semi-infinite layer; all preceding layers need finite thicknesses.
    """

    upper: Layer
    gap_nm: float
    lower: tuple[Layer, ...]

    def __post_init__(self):
        if self.gap_nm <= 0.0:
            raise ValueError("gap must be > 0")
        if self.upper.thickness_nm is not None:
            raise ValueError("upper body must be semi-infinite")
        if len(self.lower) == 0:
            raise ValueError("lower stack must contain at least one layer")
        if self.lower[-1].thickness_nm is not None:
            raise ValueError("lower stack must terminate in a semi-infinite layer")
        if any(L.thickness_nm is None for L in self.lower[:-1]):
            raise ValueError("only the terminating lower layer may be semi-infinite")

    def with_gap(self, gap_nm: float) -> "LayerStack":
        return LayerStack(self.upper, gap_nm, self.lower)


@dataclass(frozen=True)
class MatsubaraSpec:
    """Temperature and truncation of the frequency sum.

    With l_max unset, the sum stops once the running term stays below
    tail_rel_tol of the accumulated sum for three consecutive orders.
    """

    temperature_k: float = 275.15
    l_max: int | None = None
    tail_rel_tol: float = 1e-7

    def __post_init__(self):
        if self.temperature_k <= 0.0:
            raise ValueError("temperature must be > 0")
        if not 0.0 < self.tail_rel_tol <= 1e-2:
            raise ValueError("tail_rel_tol must be in (0, 1e-2]")


@dataclass(frozen=True)
class QuadratureSpec:
    """Relative tolerance of the transverse-momentum integral.

    The node count per panel scales with -log10(rel_tol); panels extend to
    y - y_l = 64, beyond which the integrand is below 1e-27 of its peak.
    """

    rel_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1e-1:
            raise ValueError("rel_tol must be in (0, 0.1)")


@lru_cache(maxsize=16)
def _panel_nodes(rel_tol: float):
    n = max(16, 8 * math.ceil(-math.log10(rel_tol)))
    half = max(12, n // 2)
    nodes, weights = [], []
    # first panel [0, 4] in v = sqrt(s)
    x, w = np.polynomial.legendre.leggauss(n)
    v = 0.5 * (x + 1.0) * 2.0
    nodes.append(v**2)
    weights.append(w * 2.0 * v)  # ds = 2 v dv, dv = (2/2) dx
    for lo, hi, order in ((4.0, 8.0, n), (8.0, 16.0, n), (16.0, 32.0, half), (32.0, 64.0, half)):
        x, w = np.polynomial.legendre.leggauss(order)
        mid, span = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes.append(mid + span * x)
        weights.append(w * span)
    return np.concatenate(nodes), np.concatenate(weights)


def _eval_eps(material, xi_arr):
    """Permittivity of a medium at an array of xi > 0, or the ideal marker."""
    if isinstance(material, IdealMetal):
        return _IDEAL
    return np.asarray(material.eps_imag_axis(xi_arr), dtype=float)


def _zero_weights(material):
    """(tm_weight, q_shift) static descriptors; inf weight marks a conductor."""
    resp = material.zero_response() if not isinstance(material, ZeroFrequencyResponse) else material
    if resp.kind == "dielectric":
        return resp.eps0, 0.0
    if resp.kind == "drude":
        return math.inf, 0.0
    if resp.kind == "plasma":
        return math.inf, resp.omega_p**2
    if resp.kind == "ideal":
        return _IDEAL, _IDEAL
    raise ValueError(f"unknown zero-frequency kind {resp.kind!r}")


def _is_inf_weight(w):
    return isinstance(w, float) and math.isinf(w)


def _interface_tm(w_a, q_a, w_b, q_b):
    # w is eps(i xi) for xi > 0 and the static TM weight (eps0 or inf) at
    # xi = 0; the conductor limit corresponds to an infinite weight.
    if w_b is _IDEAL:
        return 1.0
    if _is_inf_weight(w_a) and _is_inf_weight(w_b):
        raise ValueError(
            "static TM limit of an interface between two free-carrier media "
            "is undefined here; insert a dielectric or the gap between them"
        )
    if _is_inf_weight(w_b):
        return 1.0
    if _is_inf_weight(w_a):
        return -1.0
    num = w_b * q_a - w_a * q_b
    den = w_b * q_a + w_a * q_b
    return num / den


def _interface_te(q_a, q_b):
    if q_b is _IDEAL:
        return -1.0
    return (q_a - q_b) / (q_a + q_b)


def _r_at(pol, w_a, q_a, w_b, q_b):
    if pol == "tm":
        return _interface_tm(w_a, q_a, w_b, q_b)
    return _interface_te(q_a, q_b)


def _chain_reflection(pol, media, thicknesses):
    """Combine interface coefficients from the substrate upwards.

    media: list of (tm_weight, q) starting with the gap; thicknesses aligns
    with media[1:]; the terminating entry is semi-infinite.
    """
    n = len(media)
    w_b, q_b = media[n - 1]
    w_a, q_a = media[n - 2]
    r = _r_at(pol, w_a, q_a, w_b, q_b)
    for j in range(n - 2, 0, -1):
        w_a, q_a = media[j - 1]
        w_b, q_b = media[j]
        r_j = _r_at(pol, w_a, q_a, w_b, q_b)
        decay = np.exp(-2.0 * q_b * thicknesses[j - 1] / HBARC_EV_NM)
        r = (r_j + r * decay) / (1.0 + r_j * r * decay)
    return r


def _media_dynamic(materials, xi_arr, kp2):
    """(eps, q) chain at xi > 0; the gap medium comes first."""
    xi2 = (xi_arr**2)[:, None]
    media = [(1.0, np.sqrt(kp2 + xi2))]
    for mat in materials:
        eps = _eval_eps(mat, xi_arr)
        if eps is _IDEAL:
            media.append((_IDEAL, _IDEAL))
            break
        media.append((eps[:, None], np.sqrt(kp2 + eps[:, None] * xi2)))
    return media


def _media_static(materials, kp2):
    media = [(1.0, np.sqrt(kp2))]
    for mat in materials:
        w, shift = _zero_weights(mat)
        if w is _IDEAL:
            media.append((_IDEAL, _IDEAL))
            break
        media.append((w, np.sqrt(kp2 + shift)))
    return media


def _side_reflections(layers, xi_arr, kp2, static):
    materials = [L.material for L in layers]
    thicknesses = [L.thickness_nm for L in layers[:-1]]
    media = _media_static(materials, kp2) if static else _media_dynamic(materials, xi_arr, kp2)
    thicknesses = thicknesses[: max(len(media) - 2, 0)]
    r_tm = _chain_reflection("tm", media, thicknesses)
    r_te = _chain_reflection("te", media, thicknesses)
    return r_tm, r_te


def fresnel_r(pol, xi, k_perp, eps_a, eps_b):
    """Single-interface reflection coefficient on the imaginary axis.

    pol is 'tm' or 'te'; xi and k_perp are in eV (hbar = c = 1). For xi > 0
    the permittivities are numbers >= 1; at xi = 0 either finite static
    permittivities or ZeroFrequencyResponse descriptors select the limit
    form (Drude: TM 1 / TE 0; plasma: TE from sqrt(k^2 + omega_p^2)).
    """
    if pol not in ("tm", "te"):
        raise ValueError("pol must be 'tm' or 'te'")
    kp = np.asarray(k_perp, dtype=float)
    kp2 = kp**2
    if xi > 0.0:
        ea = float(eps_a.eps_imag_axis(xi)) if hasattr(eps_a, "eps_imag_axis") else eps_a
        eb = float(eps_b.eps_imag_axis(xi)) if hasattr(eps_b, "eps_imag_axis") else eps_b
        if math.isinf(eb):
            out = np.full_like(kp2, 1.0 if pol == "tm" else -1.0)
            return float(out) if np.ndim(k_perp) == 0 else out
        q_a = np.sqrt(kp2 + ea * xi * xi)
        q_b = np.sqrt(kp2 + eb * xi * xi)
        out = _interface_tm(ea, q_a, eb, q_b) if pol == "tm" else _interface_te(q_a, q_b)
    else:
        w_a, s_a = _zero_weights(_as_static(eps_a))
        w_b, s_b = _zero_weights(_as_static(eps_b))
        if w_b is _IDEAL:
            out = np.full_like(kp2, 1.0 if pol == "tm" else -1.0)
            return float(out) if np.ndim(k_perp) == 0 else out
        q_a = np.sqrt(kp2 + s_a)
        q_b = np.sqrt(kp2 + s_b)
        if pol == "tm":
            out = np.broadcast_to(np.asarray(_interface_tm(w_a, q_a, w_b, q_b)), kp2.shape).copy()
        else:
            out = _interface_te(q_a, q_b)
    return float(out) if np.ndim(k_perp) == 0 else out


def _as_static(obj):
    if isinstance(obj, ZeroFrequencyResponse):
        return obj
    if hasattr(obj, "zero_response"):
        return obj.zero_response()
    return ZeroFrequencyResponse("dielectric", eps0=float(obj))


def stack_reflection(pol, xi, k_perp, layers):
    """Reflection coefficient of a layered side, seen from the vacuum gap.

    layers run from the gap outwards and must end in a semi-infinite layer;
    the interior two-interface recursion is applied from the bottom up.
    """
    if pol not in ("tm", "te"):
        raise ValueError("pol must be 'tm' or 'te'")
    layers = tuple(layers)
    if layers[-1].thickness_nm is not None:
        raise ValueError("layer list must terminate in a semi-infinite layer")
    kp = np.atleast_1d(np.asarray(k_perp, dtype=float))
    kp2 = kp[None, :] ** 2
    if xi > 0.0:
        xi_arr = np.array([float(xi)])
        r_tm, r_te = _side_reflections(layers, xi_arr, kp2, static=False)
    else:
        r_tm, r_te = _side_reflections(layers, None, kp2, static=True)
    out = r_tm if pol == "tm" else r_te
    out = np.broadcast_to(np.asarray(out), kp2.shape)[0]
    return float(out[0]) if np.ndim(k_perp) == 0 else out.copy()


def _gap_integrand_sum(stack, xi_arr, quad, static=False):
    """Panel-quadrature values of the y-integral for each xi (array)."""
    a = stack.gap_nm
    s, w = _panel_nodes(quad.rel_tol)
    if static:
        y = s[None, :]
    else:
        y0 = 2.0 * a * xi_arr / HBARC_EV_NM
        y = y0[:, None] + s[None, :]
    kappa = y * (HBARC_EV_NM / (2.0 * a))
    if static:
        kp2 = kappa**2
        xi_for_media = None
    else:
        kp2 = np.maximum(kappa**2 - (xi_arr**2)[:, None], 0.0)
        xi_for_media = xi_arr
    up_tm, up_te = _side_reflections((stack.upper,), xi_for_media, kp2, static)
    dn_tm, dn_te = _side_reflections(stack.lower, xi_for_media, kp2, static)
    damp = np.exp(-y)
    integrand = np.log1p(-up_tm * dn_tm * damp) + np.log1p(-up_te * dn_te * damp)
    return np.sum(w * y * integrand, axis=-1)


def free_energy_per_area(
    stack: LayerStack,
    spec: MatsubaraSpec = MatsubaraSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Lifshitz free energy per unit area of the gap, in J/m^2 (negative).

    Raises ConvergenceError when the tail rule has not fired at the
    truncation cap.
    """
    temperature = spec.temperature_k
    xi1 = matsubara_frequency(1, temperature)
    total = 0.5 * float(_gap_integrand_sum(stack, None, quad, static=True)[0])

    y1 = 2.0 * stack.gap_nm * xi1 / HBARC_EV_NM
    if spec.l_max is not None:
        cap, enforce_tail = spec.l_max, False
    else:
        cap, enforce_tail = max(1000, int(80.0 / y1) + 10), True

    consecutive = 0
    l = 1
    chunk = 32
    converged = not enforce_tail
    while l <= cap:
        ls = np.arange(l, min(l + chunk, cap + 1))
        terms = _gap_integrand_sum(stack, ls * xi1, quad, static=False)
        for t in terms:
            total += t
            if enforce_tail:
                if abs(t) < spec.tail_rel_tol * abs(total):
                    consecutive += 1
                    if consecutive >= 3:
                        converged = True
                        break
                else:
                    consecutive = 0
        if converged and enforce_tail:
            break
        l = ls[-1] + 1
        chunk = min(chunk * 2, 1024)
    if not converged:
        raise ConvergenceError(
            f"Matsubara sum not converged to {spec.tail_rel_tol:g} within {cap} terms"
        )

    prefactor = KB_J * temperature / (8.0 * math.pi * stack.gap_nm**2) * 1e18
    return prefactor * total


def pfa_sphere_plate_force(
    stack: LayerStack,
    radius_um: float,
    spec: MatsubaraSpec = MatsubaraSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Sphere-plate force F = 2 pi R E_pp(a), in pN (negative = attractive)."""
    if radius_um <= 0.0:
        raise ValueError("radius must be > 0")
    aspect = stack.gap_nm / (radius_um * 1000.0)
    if aspect > 0.01:
        warnings.warn(
            f"a/R = {aspect:.3g} exceeds 0.01; the proximity-force "
            "approximation error grows like a/R",
            stacklevel=2,
        )
    energy = free_energy_per_area(stack, spec, quad)
    return 2.0 * math.pi * (radius_um * 1e-6) * energy * 1e12


def force_curve(
    stack_lower_band: LayerStack,
    stack_upper_band: LayerStack,
    separations_nm,
    radius_um: float,
    spec: MatsubaraSpec = MatsubaraSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
    workers: int = 1,
) -> np.ndarray:
    """Force table (a_nm, F_lower_band, F_upper_band) in pN.

    Separations must be ascending and lie in [60, 2000] nm; band members
    come from the two permittivity extrapolations. Rows are independent, so
    they may be computed by several workers.
    """
    seps = np.asarray(separations_nm, dtype=float)
    if seps.ndim != 1 or seps.size == 0:
        raise ValueError("separations must be a non-empty 1-D sequence")
    if np.any(np.diff(seps) <= 0.0):
        raise ValueError("separations must be strictly ascending")
    if seps[0] < 60.0 or seps[-1] > 2000.0:
        raise ValueError("separations must lie within [60, 2000] nm")

    def row(a):
        return (
            a,
            pfa_sphere_plate_force(stack_lower_band.with_gap(a), radius_um, spec, quad),
            pfa_sphere_plate_force(stack_upper_band.with_gap(a), radius_um, spec, quad),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, seps))
    else:
        rows = [row(a) for a in seps]
    return np.asarray(rows, dtype=float)


def tabulated_force(
    stack: LayerStack,
    radius_um: float,
    a_min_nm: float,
    a_max_nm: float,
    spec: MatsubaraSpec = MatsubaraSpec(),
    quad: QuadratureSpec = QuadratureSpec(),
    points_per_decade: int = 60,
):
    """Smooth force interpolator F(a) built from a dense log grid.

    Cubic interpolation of log|F| against log a keeps the interpolation
    error far below the quadrature tolerance; used by roughness averaging
    to avoid re-running the kernel per histogram bin pair.
    """
    from scipy.interpolate import CubicSpline

    if not 0.0 < a_min_nm < a_max_nm:
        raise ValueError("need 0 < a_min < a_max")
    n = max(8, int(math.log10(a_max_nm / a_min_nm) * points_per_decade) + 1)
    grid = np.logspace(math.log10(a_min_nm), math.log10(a_max_nm), n)
    values = np.array(
        [pfa_sphere_plate_force(stack.with_gap(a), radius_um, spec, quad) for a in grid]
    )
    if np.any(values >= 0.0):
        raise ConvergenceError("expected attractive (negative) forces on the whole grid")
    spline = CubicSpline(np.log(grid), np.log(-values))

    def force(a):
        a_arr = np.asarray(a, dtype=float)
        if np.any(a_arr < grid[0] * (1 - 1e-12)) or np.any(a_arr > grid[-1] * (1 + 1e-12)):
            raise ValueError("separation outside tabulated range")
        out = -np.exp(spline(np.log(a_arr)))
        return float(out) if np.ndim(a) == 0 else out

    return force
