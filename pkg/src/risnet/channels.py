"""Channel generation and end-to-end channel assembly.

Covers distance-dependent pathloss, line-of-sight, Rayleigh, and Rician
small-scale fading, and the assembly of the end-to-end channel of a link
aided by a reflecting surface, both the first-order form and the full
mismatch/coupling-aware form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import (
    COND_LIMIT,
    IllConditionedError,
    _as_square,
    _transfer_matrix,
    matrix_from_json,
    matrix_to_json,
    split_ports,
)

LINKS = ("rt", "it", "ri")


def trial_rng(seed, *subkeys):
    """Deterministic, independent random stream for (seed, subkeys...).

    Counter-based (Philox), so per-trial streams derived from the same base
    seed never overlap and results do not depend on execution order.
    """
    entropy = (int(seed),) + tuple(int(k) for k in subkeys)
    if any(k < 0 for k in entropy):
        raise ValueError("seed and subkeys must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class PathlossParams:
    """Distance-dependent pathloss c0 (d / d0)^-alpha with per-link exponents.

    ``c0_db`` is the loss at the reference distance ``d0`` in dB.
    """

    c0_db: float = -30.0
    d0: float = 1.0
    alpha_rt: float = 3.5
    alpha_it: float = 2.0
    alpha_ri: float = 2.8

    def __post_init__(self):
        if self.d0 <= 0:
            raise ValueError(f"reference distance must be positive, got {self.d0}")
        for link in LINKS:
            if self.exponent(link) < 0:
                raise ValueError(f"pathloss exponent for {link} must be non-negative")

    def exponent(self, link):
        try:
            return getattr(self, f"alpha_{link}")
        except AttributeError:
            raise ValueError(f"unknown link {link!r}, expected one of {LINKS}") from None


def pathloss(d, params, link):
    """Linear power pathloss 10^(c0_db/10) (d/d0)^-alpha for the given link.

    Accepts scalar or per-element distance arrays.
    """
    alpha = params.exponent(link)
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    out = 10.0 ** (params.c0_db / 10.0) * (d / params.d0) ** (-alpha)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Geometry2D:
    """Planar deployment: transmitter, receiver, and a uniform linear array
    of reflecting elements parallel to the x-axis, centered at ``ris_center``.

    Element spacing is given in wavelengths (default half-wavelength).
    """

    tx: tuple = (0.0, 0.0)
    rx: tuple = (52.0, 0.0)
    ris_center: tuple = (50.0, 2.0)
    spacing_wavelengths: float = 0.5
    wavelength: float = 0.1
    n_i: int | None = None

    def __post_init__(self):
        if self.wavelength <= 0 or self.spacing_wavelengths <= 0:
            raise ValueError("wavelength and spacing must be positive")
        pts = [np.asarray(self.tx, float), np.asarray(self.rx, float),
               np.asarray(self.ris_center, float)]
        for a in range(3):
            for b in range(a + 1, 3):
                if np.linalg.norm(pts[a] - pts[b]) <= 0:
                    raise ValueError("transmitter, receiver, and array center must be distinct")

    def _count(self, n_i):
        n = self.n_i if n_i is None else n_i
        if n is None or n < 1:
            raise ValueError("element count n_i is not set")
        return int(n)

    def element_positions(self, n_i=None):
        """(n, 2) element coordinates along the x-axis, centered on the array center."""
        n = self._count(n_i)
        step = self.spacing_wavelengths * self.wavelength
        offsets = (np.arange(n) - (n - 1) / 2.0) * step
        pos = np.empty((n, 2))
        pos[:, 0] = self.ris_center[0] + offsets
        pos[:, 1] = self.ris_center[1]
        return pos

    def distances(self, n_i=None):
        """Link distances: scalar 'rt' plus per-element 'it' and 'ri' arrays."""
        pos = self.element_positions(n_i)
        tx = np.asarray(self.tx, float)
        rx = np.asarray(self.rx, float)
        return {
            "rt": float(np.linalg.norm(rx - tx)),
            "it": np.linalg.norm(pos - tx, axis=1),
            "ri": np.linalg.norm(pos - rx, axis=1),
        }


@dataclass(frozen=True)
class RicianSpec:
    """Rician factors (linear) per link: 0 is Rayleigh, infinity is pure LoS."""

    k_rt: float = 0.0
    k_it: float = 0.0
    k_ri: float = 0.0

    def __post_init__(self):
        for link in LINKS:
            if self.factor(link) < 0:
                raise ValueError(f"Rician factor for {link} must be non-negative")

    def factor(self, link):
        try:
            return getattr(self, f"k_{link}")
        except AttributeError:
            raise ValueError(f"unknown link {link!r}, expected one of {LINKS}") from None


def rician_k_from_db(k_db):
    """Convert a Rician factor from dB to linear scale."""
    return 10.0 ** (np.asarray(k_db, dtype=float) / 10.0)


def draw_los_vector(n, rng):
    """Unit-modulus entries with i.i.d. uniform phases."""
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, int(n)))


def geometric_los_vector(distances, wavelength):
    """Unit-modulus entries with propagation phases exp(-j 2 pi d / lambda)."""
    d = np.asarray(distances, dtype=float)
    return np.exp(-2j * np.pi * d / float(wavelength))


def draw_rayleigh_vector(n, rng):
    """i.i.d. circularly symmetric complex Gaussian entries with unit variance."""
    n = int(n)
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


def draw_rician_matrix(rows, cols, k, los, rng):
    """Rician draw sqrt(k/(1+k)) los + sqrt(1/(1+k)) W with W i.i.d. CN(0, 1).

    ``los`` must be (rows, cols); pathloss is applied by the caller as a
    sqrt-power scale.
    """
    k = float(k)
    if k < 0:
        raise ValueError(f"Rician factor must be non-negative, got {k}")
    los = np.asarray(los, dtype=complex)
    if los.shape != (rows, cols):
        raise ValueError(f"los has shape {los.shape}, expected {(rows, cols)}")
    if math.isinf(k):
        return los.copy()
    w = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))
    w /= np.sqrt(2.0)
    return np.sqrt(k / (1.0 + k)) * los + np.sqrt(1.0 / (1.0 + k)) * w


def draw_rician_vector(n, k, los, rng):
    """Vector-shaped convenience wrapper around draw_rician_matrix."""
    los = np.asarray(los, dtype=complex).reshape(-1)
    return draw_rician_matrix(los.shape[0], 1, k, los[:, None], rng)[:, 0]


@dataclass(eq=False)
class ChannelRealization:
    """One draw of the three channel legs around the reflecting surface.

    ``h_rt`` is the direct transmitter-receiver channel, ``h_it`` the
    transmitter-to-surface vector, and ``h_ri`` the surface-to-receiver
    vector. Pathloss is folded into the entries; ``meta`` records how the
    draw was made (Rician factors, distances, and the like).
    """

    h_rt: complex
    h_it: np.ndarray
    h_ri: np.ndarray
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.h_rt = complex(self.h_rt)
        self.h_it = np.asarray(self.h_it, dtype=complex).reshape(-1)
        self.h_ri = np.asarray(self.h_ri, dtype=complex).reshape(-1)
        if self.h_it.shape != self.h_ri.shape:
            raise ValueError("h_it and h_ri must have the same length")
        if not (np.isfinite(self.h_rt) and np.all(np.isfinite(self.h_it))
                and np.all(np.isfinite(self.h_ri))):
            raise ValueError("channel entries must be finite")

    @property
    def n_i(self):
        return self.h_it.shape[0]

    def to_json(self):
        return {
            "h_rt": matrix_to_json(np.array([[self.h_rt]])),
            "h_it": matrix_to_json(self.h_it[:, None]),
            "h_ri": matrix_to_json(self.h_ri[None, :]),
            "seed": self.seed,
            "meta": dict(self.meta),
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            matrix_from_json(data["h_rt"])[0, 0],
            matrix_from_json(data["h_it"])[:, 0],
            matrix_from_json(data["h_ri"])[0, :],
            seed=data.get("seed"),
            meta=dict(data.get("meta", {})),
        )


def draw_geometry_realization(geometry, pathloss_params, rician, rng, n_i=None, seed=None):
    """Channel draw for a planar deployment with distance-dependent pathloss.

    Line-of-sight components carry the geometric propagation phases of the
    element positions; each link mixes them with Rayleigh scatter according
    to its Rician factor. Draw order is fixed (rt, it, ri) so a given stream
    always produces the same realization.
    """
    d = geometry.distances(n_i)
    lam = geometry.wavelength
    l_rt = pathloss(d["rt"], pathloss_params, "rt")
    l_it = pathloss(d["it"], pathloss_params, "it")
    l_ri = pathloss(d["ri"], pathloss_params, "ri")
    h_rt = np.sqrt(l_rt) * draw_rician_vector(
        1, rician.k_rt, geometric_los_vector([d["rt"]], lam), rng)[0]
    h_it = np.sqrt(l_it) * draw_rician_vector(
        len(l_it), rician.k_it, geometric_los_vector(d["it"], lam), rng)
    h_ri = np.sqrt(l_ri) * draw_rician_vector(
        len(l_ri), rician.k_ri, geometric_los_vector(d["ri"], lam), rng)
    meta = {"k_rt": rician.k_rt, "k_it": rician.k_it, "k_ri": rician.k_ri,
            "d_rt": d["rt"]}
    return ChannelRealization(h_rt, h_it, h_ri, seed=seed, meta=meta)


def assemble_simplified_channel(realization, theta):
    """First-order end-to-end channel: direct leg plus the reflected cascade.

    Exact linear assembly h_rt + h_ri @ theta @ h_it; the only modeling
    approximation is the omission of second-order reflections.
    """
    theta = _as_square(theta, "theta")
    if theta.shape[0] != realization.n_i:
        raise ValueError(
            f"theta has {theta.shape[0]} ports, expected {realization.n_i}"
        )
    return realization.h_rt + realization.h_ri @ theta @ realization.h_it


def assemble_general_channel(s, term, theta):
    """End-to-end channel including impedance mismatch and mutual coupling.

    H = (Gamma_R + I) T_rt (I + Gamma_T T_tt + T_tt)^-1 where T is the
    transfer matrix of the terminated network. With matched terminations,
    no coupling, and a zero transmitter-to-reflector reverse block this
    reduces exactly to the first-order assembly.
    """
    t = _transfer_matrix(s, term, theta)
    blocks = split_ports(t, s.n_t, s.n_i, s.n_r)
    t_tt, t_rt = blocks["tt"], blocks["rt"]
    eye_t = np.eye(s.n_t)
    inner = eye_t + np.diag(term.gamma_t) @ t_tt + t_tt
    cond = np.linalg.cond(inner)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(
            "transmitter-side system is numerically singular", cond=float(cond)
        )
    h = (np.diag(term.gamma_r) + np.eye(s.n_r)) @ t_rt
    return np.linalg.solve(inner.T, h.T).T
