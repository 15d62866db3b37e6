"""Linear scattering-parameter analysis of multiport networks.

Incident and reflected waves at an N-port junction are related by b = S a.
All conversions between impedance and scattering descriptions use a real
reference impedance, 50 ohm unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

Z0_DEFAULT = 50.0

# Library-wide numerical policy: absolute Frobenius tolerance for structural
# checks, relative tolerance for conversion round trips, and the condition
# number beyond which a linear solve is rejected instead of trusted.
STRUCTURAL_ATOL = 1e-10
ROUNDTRIP_RTOL = 1e-9
COND_LIMIT = 1e12


class IllConditionedError(ArithmeticError):
    """A linear solve was rejected because the system is numerically singular."""

    def __init__(self, message, cond=None):
        if cond is not None:
            message = f"{message} (condition number {cond:.3e})"
        super().__init__(message)
        self.cond = cond


class ResonanceError(IllConditionedError):
    """The terminated network has no unique steady state: (I - Gamma S) is singular."""

    def __init__(self, message, smallest_singular_value):
        super().__init__(f"{message} (smallest singular value {smallest_singular_value:.3e})")
        self.smallest_singular_value = smallest_singular_value


def _as_matrix(a, name="matrix"):
    m = np.atleast_2d(np.asarray(a, dtype=complex))
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def _as_square(a, name="matrix"):
    m = _as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def _check_z0(z0):
    z0 = float(z0)
    if not z0 > 0:
        raise ValueError(f"reference impedance must be positive, got {z0}")
    return z0


def solve_checked(a, b, context="linear solve"):
    """LU solve of a @ x = b that refuses to return garbage.

    Raises IllConditionedError when the condition number of ``a`` exceeds
    COND_LIMIT.
    """
    a = np.asarray(a, dtype=complex)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(f"{context}: matrix is numerically singular", cond=float(cond))
    return np.linalg.solve(a, b)


def reflection_coefficient(z, z0=Z0_DEFAULT):
    """Reflection coefficient (z - z0) / (z + z0) of a one-port load.

    Passive loads (Re{z} >= 0) map inside the closed unit disk; purely
    reactive loads land exactly on the unit circle.
    """
    z0 = _check_z0(z0)
    z = complex(z)
    if abs(z + z0) <= 1e-12 * max(abs(z), z0):
        raise ValueError(f"degenerate load z = {z}: z + z0 vanishes")
    return (z - z0) / (z + z0)


def z_to_s(z_matrix, z0=Z0_DEFAULT):
    """Convert an impedance matrix to the scattering matrix (Z + z0 I)^-1 (Z - z0 I).

    Symmetric (reciprocal) Z yields symmetric S, and passive Z yields
    singular values at most 1.
    """
    z0 = _check_z0(z0)
    z = _as_square(z_matrix, "impedance matrix")
    eye = z0 * np.eye(z.shape[0])
    return solve_checked(z + eye, z - eye, context="impedance-to-scattering conversion")


def s_to_z(s_matrix, z0=Z0_DEFAULT):
    """Convert a scattering matrix back to the impedance matrix z0 (I + S)(I - S)^-1."""
    z0 = _check_z0(z0)
    s = _as_square(s_matrix, "scattering matrix")
    eye = np.eye(s.shape[0])
    m = eye - s
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ValueError(
            "scattering matrix has a unit eigenvalue (ideal open circuit): "
            "no finite impedance matrix exists"
        )
    # (I + S)(I - S)^-1, solved from the right; the two factors commute.
    return z0 * np.linalg.solve(m.T, (eye + s).T).T


@dataclass(eq=False)
class PartitionedScattering:
    """Scattering matrix of the transmitter / reflector / receiver network,
    split into its nine port-group blocks.

    Blocks are named by (destination, source) port group: ``s_ri`` maps waves
    incident on the reflector ports to waves leaving the receiver ports.
    Reciprocity (S symmetric) is enforced on construction unless
    ``check_reciprocity=False`` is passed, which synthetic fixtures may use.
    """

    s_tt: np.ndarray
    s_ti: np.ndarray
    s_tr: np.ndarray
    s_it: np.ndarray
    s_ii: np.ndarray
    s_ir: np.ndarray
    s_rt: np.ndarray
    s_ri: np.ndarray
    s_rr: np.ndarray
    check_reciprocity: InitVar[bool] = True

    def __post_init__(self, check_reciprocity):
        names = ("s_tt", "s_ti", "s_tr", "s_it", "s_ii", "s_ir", "s_rt", "s_ri", "s_rr")
        for name in names:
            setattr(self, name, _as_matrix(getattr(self, name), name))
        n_t, n_i, n_r = self.s_tt.shape[0], self.s_ii.shape[0], self.s_rr.shape[0]
        expected = {
            "s_tt": (n_t, n_t), "s_ti": (n_t, n_i), "s_tr": (n_t, n_r),
            "s_it": (n_i, n_t), "s_ii": (n_i, n_i), "s_ir": (n_i, n_r),
            "s_rt": (n_r, n_t), "s_ri": (n_r, n_i), "s_rr": (n_r, n_r),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")
        if check_reciprocity:
            s = self.full()
            defect = np.linalg.norm(s - s.T)
            if defect > STRUCTURAL_ATOL:
                raise ValueError(
                    f"scattering matrix is not reciprocal: ||S - S^T|| = {defect:.3e}"
                )

    @property
    def n_t(self):
        return self.s_tt.shape[0]

    @property
    def n_i(self):
        return self.s_ii.shape[0]

    @property
    def n_r(self):
        return self.s_rr.shape[0]

    @classmethod
    def from_full(cls, s, n_t, n_i, n_r, check_reciprocity=True):
        """Split a full (n_t + n_i + n_r)-port scattering matrix into blocks."""
        s = _as_square(s, "scattering matrix")
        if s.shape[0] != n_t + n_i + n_r:
            raise ValueError(
                f"scattering matrix has {s.shape[0]} ports, expected {n_t + n_i + n_r}"
            )
        blocks = split_ports(s, n_t, n_i, n_r)
        return cls(
            blocks["tt"], blocks["ti"], blocks["tr"],
            blocks["it"], blocks["ii"], blocks["ir"],
            blocks["rt"], blocks["ri"], blocks["rr"],
            check_reciprocity=check_reciprocity,
        )

    @classmethod
    def from_channels(cls, s_rt, s_it, s_ri, s_tt=None, s_ii=None, s_rr=None):
        """Build a reciprocal network from the three transmission blocks.

        1-D inputs are interpreted the link way round: ``s_it`` as a column
        (transmitter to reflector), ``s_ri`` as a row (reflector to receiver),
        scalars as 1x1. The transposed blocks are mirrored automatically and
        the reflection blocks default to perfectly matched (zero).
        """
        s_rt = _as_matrix(s_rt, "s_rt")
        s_it = np.asarray(s_it, dtype=complex)
        if s_it.ndim == 1:
            s_it = s_it[:, None]
        s_it = _as_matrix(s_it, "s_it")
        s_ri = _as_matrix(s_ri, "s_ri")
        n_t, n_i, n_r = s_rt.shape[1], s_it.shape[0], s_rt.shape[0]
        s_tt = np.zeros((n_t, n_t)) if s_tt is None else s_tt
        s_ii = np.zeros((n_i, n_i)) if s_ii is None else s_ii
        s_rr = np.zeros((n_r, n_r)) if s_rr is None else s_rr
        return cls(
            s_tt, s_it.T, s_rt.T,
            s_it, s_ii, s_ri.T,
            s_rt, s_ri, s_rr,
        )

    def full(self):
        """Reassemble the full scattering matrix."""
        return np.block([
            [self.s_tt, self.s_ti, self.s_tr],
            [self.s_it, self.s_ii, self.s_ir],
            [self.s_rt, self.s_ri, self.s_rr],
        ])


def split_ports(matrix, n_t, n_i, n_r):
    """Partition a square matrix into the nine (t, i, r) blocks.

    Works for any matrix sharing the port layout, e.g. the transfer matrix
    returned by solve_network_waves, which is generally not symmetric.
    """
    m = _as_square(matrix, "matrix")
    if m.shape[0] != n_t + n_i + n_r:
        raise ValueError(f"matrix has {m.shape[0]} ports, expected {n_t + n_i + n_r}")
    sl = {
        "t": slice(0, n_t),
        "i": slice(n_t, n_t + n_i),
        "r": slice(n_t + n_i, n_t + n_i + n_r),
    }
    return {a + b: m[sl[a], sl[b]] for a in "tir" for b in "tir"}


def _as_gamma_vector(g, name):
    g = np.asarray(g, dtype=complex)
    if g.ndim == 2:
        if np.any(g - np.diag(np.diag(g)) != 0):
            raise ValueError(f"{name} must be strictly diagonal")
        g = np.diag(g)
    if g.ndim != 1:
        raise ValueError(f"{name} must be a vector or diagonal matrix")
    if not np.all(np.isfinite(g)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(np.abs(g) > 1 + 1e-12):
        raise ValueError(f"{name} has |reflection coefficient| > 1 (active termination)")
    return g


@dataclass(eq=False)
class TerminationSet:
    """Source and load terminations plus the wave source at the transmitter.

    ``gamma_t`` and ``gamma_r`` hold the diagonal entries of the source and
    load reflection-coefficient matrices; ``b_s_t`` is the wave source vector
    in volts (half the open-circuit source voltages).
    """

    gamma_t: np.ndarray
    gamma_r: np.ndarray
    b_s_t: np.ndarray

    def __post_init__(self):
        self.gamma_t = _as_gamma_vector(self.gamma_t, "gamma_t")
        self.gamma_r = _as_gamma_vector(self.gamma_r, "gamma_r")
        b = np.asarray(self.b_s_t, dtype=complex).reshape(-1)
        if b.shape[0] != self.gamma_t.shape[0]:
            raise ValueError("b_s_t length must match gamma_t")
        if not np.all(np.isfinite(b)):
            raise ValueError("b_s_t contains non-finite entries")
        self.b_s_t = b

    @classmethod
    def matched(cls, n_t, n_r, v_s=1.0):
        """All sources and loads at the reference impedance (zero reflection)."""
        v = np.broadcast_to(np.asarray(v_s, dtype=complex), (n_t,))
        return cls(np.zeros(n_t), np.zeros(n_r), v / 2.0)

    @classmethod
    def from_impedances(cls, source_z, load_z, v_s, z0=Z0_DEFAULT):
        """Terminations from source/load impedances and source voltages v_s."""
        gt = [reflection_coefficient(z, z0) for z in np.atleast_1d(source_z)]
        gr = [reflection_coefficient(z, z0) for z in np.atleast_1d(load_z)]
        v = np.broadcast_to(np.asarray(v_s, dtype=complex), (len(gt),))
        return cls(np.array(gt), np.array(gr), v / 2.0)


def _transfer_matrix(s, term, theta):
    """T = S (I - Gamma S)^-1 for the block-diagonal Gamma built from the
    terminations and the reflector's scattering matrix."""
    theta = _as_square(theta, "theta")
    n_t, n_i, n_r = s.n_t, s.n_i, s.n_r
    if theta.shape[0] != n_i:
        raise ValueError(f"theta has {theta.shape[0]} ports, expected {n_i}")
    if term.gamma_t.shape[0] != n_t or term.gamma_r.shape[0] != n_r:
        raise ValueError("termination dimensions do not match the network")
    full = s.full()
    n = n_t + n_i + n_r
    gamma = np.zeros((n, n), dtype=complex)
    gamma[:n_t, :n_t] = np.diag(term.gamma_t)
    gamma[n_t:n_t + n_i, n_t:n_t + n_i] = theta
    gamma[n_t + n_i:, n_t + n_i:] = np.diag(term.gamma_r)
    m = np.eye(n) - gamma @ full
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] <= 0 or sv[0] / sv[-1] > COND_LIMIT:
        raise ResonanceError("terminated network is resonant", float(sv[-1]))
    return np.linalg.solve(m.T, full.T).T


def solve_network_waves(s, term, theta):
    """Steady-state reflected waves of the terminated network.

    Solves a = b_s + Gamma b together with b = S a, i.e.
    b = S (I - Gamma S)^-1 b_s. Returns (b, t_matrix) where
    t_matrix = S (I - Gamma S)^-1 can be split with split_ports.
    """
    t = _transfer_matrix(s, term, theta)
    b_s = np.zeros(t.shape[0], dtype=complex)
    b_s[:s.n_t] = term.b_s_t
    return t @ b_s, t


def matrix_to_json(matrix):
    """Encode a complex matrix as {rows, cols, re, im} with row-major entries."""
    m = _as_matrix(matrix, "matrix")
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "re": m.real.ravel().tolist(),
        "im": m.imag.ravel().tolist(),
    }


def matrix_from_json(data):
    """Inverse of matrix_to_json."""
    rows, cols = int(data["rows"]), int(data["cols"])
    re = np.asarray(data["re"], dtype=float).reshape(rows, cols)
    im = np.asarray(data["im"], dtype=float).reshape(rows, cols)
    return re + 1j * im
