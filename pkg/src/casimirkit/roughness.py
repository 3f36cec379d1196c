"""Geometrical averaging of the smooth force over measured height maps.

Each surface is described by a discrete histogram {(v_i, h_i)} of area
fractions at heights above the local minimum; the zero-roughness level
H0 = sum(v_i h_i) is the plane relative to which the mean height vanishes.
The rough-surface force is the double sum of the smooth force over all
height pairs of the two bodies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError

__all__ = [
    "RoughnessProfile",
    "zero_roughness_level",
    "rough_force",
    "roughness_correction",
]


@dataclass(frozen=True)
class RoughnessProfile:
    """Height histogram: area fractions v (summing to 1) at heights h [nm].

    Heights are measured from the absolute minimum of the surface, ascend
    strictly, and start at h[0] = 0.
    """

    fractions: np.ndarray
    heights_nm: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.fractions, dtype=float)
        h = np.asarray(self.heights_nm, dtype=float)
        object.__setattr__(self, "fractions", v)
        object.__setattr__(self, "heights_nm", h)
        if v.ndim != 1 or v.shape != h.shape or v.size == 0:
            raise DataError("profile needs equal-length fraction/height columns")
        if np.any(v < 0.0):
            raise DataError("area fractions must be non-negative")
        if abs(v.sum() - 1.0) > 1e-6:
            raise DataError(f"area fractions must sum to 1 within 1e-6, got {v.sum():.8f}")
        if abs(h[0]) > 1e-12:
            raise DataError("heights must start at 0")
        if h.size > 1 and np.any(np.diff(h) <= 0.0):
            raise DataError("heights must ascend strictly")

    @property
    def zero_level_nm(self) -> float:
        return float(np.dot(self.fractions, self.heights_nm))

    @property
    def max_height_nm(self) -> float:
        return float(self.heights_nm[-1])

    @classmethod
    def from_csv(cls, path) -> "RoughnessProfile":
        """Load `v,h_nm` rows; header required, `#` lines ignored."""
        from .kramers_kronig import _read_csv_columns

        v, h = _read_csv_columns(path, ("v", "h_nm"))
        return cls(v, h)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("v,h_nm\n")
            for v, h in zip(self.fractions, self.heights_nm):
                fh.write(f"{v:.10g},{h:.10g}\n")


def zero_roughness_level(profile: RoughnessProfile) -> float:
    """H0 = sum(v_i h_i); the mean roughness vanishes relative to it."""
    return profile.zero_level_nm


def rough_force(f_smooth, profile_plate: RoughnessProfile, profile_sphere: RoughnessProfile, a_nm: float) -> float:
    """Force between rough surfaces at mean separation a [nm].

    Evaluates sum_ik v_i v_k F(a + H0_plate + H0_sphere - h_i - h_k); the
    smooth force must accept every shifted separation, so the smallest one
    must stay positive.
    """
    h_p = profile_plate.heights_nm
    h_s = profile_sphere.heights_nm
    offset = a_nm + profile_plate.zero_level_nm + profile_sphere.zero_level_nm
    a_min = offset - h_p[-1] - h_s[-1]
    if a_min <= 0.0:
        raise ValueError(
            f"effective separation {a_min:.3g} nm is non-positive for the tallest bin pair"
        )
    a_eff = offset - h_p[:, None] - h_s[None, :]
    values = np.asarray(f_smooth(a_eff.ravel()), dtype=float).reshape(a_eff.shape)
    total = 0.0
    for i in range(h_p.size):
        vi = profile_plate.fractions[i]
        for k in range(h_s.size):
            total += vi * profile_sphere.fractions[k] * values[i, k]
    return total


def roughness_correction(f_smooth, profile_plate, profile_sphere, a_nm: float) -> float:
    """Relative correction (F_rough - F_smooth) / |F_smooth| at a [nm]."""
    smooth = float(f_smooth(a_nm))
    rough = rough_force(f_smooth, profile_plate, profile_sphere, a_nm)
    return (rough - smooth) / abs(smooth)
