"""Physical constants and unit conversions.

Internal conventions: spectral quantities (frequencies, wave numbers) in eV
with hbar = c = 1, lengths in nm, temperatures in K. Forces leave the
package in pN and energies per area in J/m^2.
"""

from scipy.constants import Boltzmann, c, elementary_charge, epsilon_0, hbar

EV = elementary_charge                # J per eV
KB_EV = Boltzmann / EV                # Boltzmann constant, eV/K
KB_J = Boltzmann                      # Boltzmann constant, J/K
HBARC_EV_NM = hbar * c / EV * 1e9     # hbar*c, eV nm (197.327)
HBARC_J_M = hbar * c                  # hbar*c, J m
EPS0 = epsilon_0                      # vacuum permittivity, F/m

# (eV / nm^2) -> (J / m^2)
EV_PER_NM2_TO_J_PER_M2 = EV * 1e18
