"""Closed forms for the received power of the three network families.

For a transmitter-surface-receiver cascade with channel vectors h_ri and
h_it, the best diagonal (single connected) reflection matrix has a closed
form; the group and fully connected families admit Cauchy-Schwarz upper
bounds. Over i.i.d. Rayleigh channels the expectations of these quantities
reduce to gamma-function expressions, giving the power gain of the richer
families and the element-count reduction they buy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .architectures import wrap_phase

# Gamma(1.5)^4 and the limiting fully-connected power gain 1 / Gamma(1.5)^4.
GAMMA_15_POW4 = np.pi ** 2 / 16.0
FULLY_GAIN_LIMIT = 16.0 / np.pi ** 2


def _gamma_ratio_half(n):
    """Gamma(n + 1/2) / Gamma(n), via log-gamma so large n does not overflow."""
    return float(np.exp(gammaln(n + 0.5) - gammaln(n)))


def _cascade_pair(h_ri, h_it):
    h_ri = np.asarray(h_ri, dtype=complex).reshape(-1)
    h_it = np.asarray(h_it, dtype=complex).reshape(-1)
    if h_ri.shape != h_it.shape:
        raise ValueError("h_ri and h_it must have the same length")
    return h_ri, h_it


def single_connected_optimum(h_ri, h_it):
    """Best per-port phase shifts and the power they collect.

    The n-th phase cancels arg(h_ri[n] h_it[n]), so the cascade terms add
    coherently; the power is the squared sum of per-element channel
    magnitudes. Zero entries use the convention arg(0) = 0.
    """
    h_ri, h_it = _cascade_pair(h_ri, h_it)
    prod = h_ri * h_it
    phases = wrap_phase(-np.angle(prod))
    power = float(np.sum(np.abs(prod)) ** 2)
    return phases, power


def fully_connected_bound(h_ri, h_it):
    """Upper bound ||h_ri||^2 ||h_it||^2 on the fully connected cascade power.

    Never below the single connected optimum, with equality exactly when the
    two channel magnitude profiles are proportional.
    """
    h_ri, h_it = _cascade_pair(h_ri, h_it)
    return float(np.sum(np.abs(h_ri) ** 2) * np.sum(np.abs(h_it) ** 2))


def group_connected_bound(h_ri, h_it, n_g):
    """Upper bound (sum_g ||h_ri,g|| ||h_it,g||)^2 for group size n_g.

    Sandwiched between the single connected optimum (n_g = 1) and the fully
    connected bound (n_g = n).
    """
    h_ri, h_it = _cascade_pair(h_ri, h_it)
    n = h_ri.shape[0]
    n_g = int(n_g)
    if n_g < 1 or n % n_g != 0:
        raise ValueError(f"group size {n_g} does not divide element count {n}")
    a = np.linalg.norm(h_ri.reshape(-1, n_g), axis=1)
    b = np.linalg.norm(h_it.reshape(-1, n_g), axis=1)
    return float(np.sum(a * b) ** 2)


def expected_power_rayleigh(n_i, n_g=1):
    """Expected best power over i.i.d. CN(0, 1) channels, unit transmit power.

    For group size n_g (the group bound; tight per the optimizer):

        n_i n_g + (n_i/n_g) (n_i/n_g - 1) (Gamma(n_g + 1/2) / Gamma(n_g))^4

    n_g = 1 gives the single connected closed form
    n_i + n_i (n_i - 1) Gamma(1.5)^4 and n_g = n_i gives n_i^2.
    """
    n_i, n_g = int(n_i), int(n_g)
    if n_i < 1 or n_g < 1 or n_i % n_g != 0:
        raise ValueError(f"group size {n_g} does not divide element count {n_i}")
    groups = n_i // n_g
    return float(n_i * n_g + groups * (groups - 1) * _gamma_ratio_half(n_g) ** 4)


@dataclass(frozen=True)
class GainReport:
    """Expected-power gains over the single connected baseline, plus the
    element-count reduction the group gain buys."""

    gain_group: float
    gain_fully: float
    delta_elements: float


def power_gain(n_i, n_g):
    """Rayleigh power gains of the group (size n_g) and fully connected
    families over single connected, at element count n_i:

        gain_group = (n_g + (n_i - n_g)/n_g^2 (Gamma(n_g + 1/2)/Gamma(n_g))^4)
                     / (1 + (n_i - 1) Gamma(1.5)^4)
        gain_fully = n_i / (1 + (n_i - 1) Gamma(1.5)^4)

    Equals the ratio of expected powers whenever n_g divides n_i; the
    expression itself extends smoothly to group sizes that do not.
    """
    n_i, n_g = int(n_i), int(n_g)
    if n_i < 1 or not 1 <= n_g <= n_i:
        raise ValueError(f"need 1 <= n_g <= n_i, got n_g={n_g}, n_i={n_i}")
    denom = 1.0 + (n_i - 1) * GAMMA_15_POW4
    gain_group = (n_g + (n_i - n_g) / n_g**2 * _gamma_ratio_half(n_g) ** 4) / denom
    gain_fully = n_i / denom
    return GainReport(gain_group, gain_fully, element_reduction(gain_group))


def group_gain_limit(n_g):
    """Large-array limit of the group connected power gain:

    (1/n_g^2) (Gamma(n_g + 1/2) / (Gamma(n_g) Gamma(1.5)))^4,
    approaching 16 / pi^2 as the group size grows.
    """
    n_g = int(n_g)
    if n_g < 1:
        raise ValueError(f"group size must be positive, got {n_g}")
    log_ratio = gammaln(n_g + 0.5) - gammaln(n_g) - gammaln(1.5)
    return float(np.exp(4.0 * log_ratio) / n_g ** 2)


def element_reduction(gain):
    """Fractional element-count saving 1 - 1/sqrt(gain) at equal power."""
    gain = float(gain)
    if gain < 1.0 - 1e-12:
        raise ValueError(f"power gain must be at least 1, got {gain}")
    return max(0.0, 1.0 - 1.0 / np.sqrt(gain))
