"""Reconfigurable impedance networks behind a reflecting surface.

Three connectivity families are supported: one grounded reactance per port
(single connected), independent fully connected sub-networks over groups of
ports (group connected), and one network joining every port pair (fully
connected). Each family fixes the structure of the surface's scattering
matrix: diagonal with unit-modulus entries, block diagonal with symmetric
unitary blocks, or a full symmetric unitary matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import COND_LIMIT, IllConditionedError, Z0_DEFAULT, _as_square

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Topology:
    """Connectivity pattern: ``n_i`` ports partitioned into groups of ``n_g``."""

    n_i: int
    n_g: int = 1

    def __post_init__(self):
        if self.n_i < 1:
            raise ValueError(f"port count must be positive, got {self.n_i}")
        if self.n_g < 1 or self.n_i % self.n_g != 0:
            raise ValueError(f"group size {self.n_g} does not divide port count {self.n_i}")

    @property
    def kind(self):
        if self.n_g == 1:
            return "single"
        if self.n_g == self.n_i:
            return "fully"
        return "group"

    @property
    def n_groups(self):
        return self.n_i // self.n_g

    @classmethod
    def single(cls, n_i):
        return cls(n_i, 1)

    @classmethod
    def group(cls, n_i, n_g):
        return cls(n_i, n_g)

    @classmethod
    def fully(cls, n_i):
        return cls(n_i, n_i)


def component_budget(topology):
    """Number of reconfigurable impedance components: n_i (n_g + 1) / 2.

    One grounded component per port plus one branch per port pair inside
    each group.
    """
    return topology.n_i * (topology.n_g + 1) // 2


def wrap_phase(angles):
    """Wrap angles into [0, 2*pi)."""
    a = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    # mod can round up to exactly 2*pi for tiny negative inputs
    return np.where(a >= TWO_PI, 0.0, a)


@dataclass(eq=False)
class ReactanceParams:
    """Reactance settings of a reconfigurable impedance network, in ohms.

    Only the packed upper triangle of each group's reactance matrix is
    stored (row-major, shape ``(n_groups, n_g (n_g + 1) / 2)``), so the
    mirrored full matrices are symmetric by construction.
    """

    topology: Topology
    packed: np.ndarray

    def __post_init__(self):
        p = self.topology.n_g * (self.topology.n_g + 1) // 2
        packed = np.asarray(self.packed, dtype=float).reshape(self.topology.n_groups, p)
        if not np.all(np.isfinite(packed)):
            raise ValueError("reactance entries must be finite")
        self.packed = packed

    @property
    def n_free(self):
        """Number of independently tunable reactances."""
        return self.packed.size

    def matrices(self):
        """Full symmetric reactance matrices, one per group: shape (G, n_g, n_g)."""
        n_g = self.topology.n_g
        iu = np.triu_indices(n_g)
        x = np.zeros((self.topology.n_groups, n_g, n_g))
        x[:, iu[0], iu[1]] = self.packed
        x = x + np.triu(x, 1).transpose(0, 2, 1)
        return x

    def as_vector(self):
        """All free entries as one flat vector, group-major."""
        return self.packed.ravel().copy()

    @classmethod
    def zeros(cls, topology):
        p = topology.n_g * (topology.n_g + 1) // 2
        return cls(topology, np.zeros((topology.n_groups, p)))

    @classmethod
    def from_vector(cls, topology, vector):
        return cls(topology, np.asarray(vector, dtype=float))

    @classmethod
    def from_matrices(cls, topology, matrices):
        """Pack full symmetric reactance matrices (asymmetry above 1e-10 is rejected)."""
        mats = np.asarray(matrices, dtype=float)
        if mats.ndim == 2:
            mats = mats[None]
        n_g = topology.n_g
        if mats.shape != (topology.n_groups, n_g, n_g):
            raise ValueError(
                f"expected {topology.n_groups} blocks of shape {(n_g, n_g)}, got {mats.shape}"
            )
        if np.max(np.abs(mats - mats.transpose(0, 2, 1)), initial=0.0) > 1e-10:
            raise ValueError("reactance matrices must be symmetric")
        iu = np.triu_indices(n_g)
        return cls(topology, mats[:, iu[0], iu[1]])

    def to_json(self):
        """Config-style encoding: topology counts plus packed rows in ohms."""
        return {
            "n_i": self.topology.n_i,
            "n_g": self.topology.n_g,
            "packed": self.packed.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        return cls(Topology(int(data["n_i"]), int(data["n_g"])),
                   np.asarray(data["packed"], dtype=float))


def scattering_from_phases(phases):
    """Diagonal scattering matrix diag(exp(j theta)) of per-port phase shifts."""
    theta = np.exp(1j * wrap_phase(phases))
    return np.diag(theta)


def _cayley_blocks(x_blocks, z0):
    """(j X + z0 I)^-1 (j X - z0 I) for a stack of real symmetric blocks.

    Always well defined for real X and z0 > 0: the eigenvalues of
    (j X + z0 I) are z0 + j lambda with lambda real.
    """
    n = x_blocks.shape[-1]
    a = 1j * x_blocks + z0 * np.eye(n)
    return np.eye(n) - 2.0 * z0 * np.linalg.inv(a)


def scattering_from_reactance(params, z0=Z0_DEFAULT):
    """Block-diagonal scattering matrix of a purely reactive network.

    Each group's block is the image of its reactance matrix under the map
    X -> (j X + z0 I)^-1 (j X - z0 I), a complex symmetric unitary matrix.
    """
    z0 = float(z0)
    if not z0 > 0:
        raise ValueError(f"reference impedance must be positive, got {z0}")
    blocks = _cayley_blocks(params.matrices(), z0)
    n_i, n_g = params.topology.n_i, params.topology.n_g
    theta = np.zeros((n_i, n_i), dtype=complex)
    for g in range(params.topology.n_groups):
        sl = slice(g * n_g, (g + 1) * n_g)
        theta[sl, sl] = blocks[g]
    return theta


def impedance_network_from_components(branch_impedances, ground_impedances):
    """Port impedance matrix of a component-level network description.

    ``ground_impedances[n]`` is the impedance from port n to ground and
    ``branch_impedances`` maps port pairs (n, m) to the impedance joining
    them; missing pairs, None, or inf mean an open circuit. The admittance
    matrix carries -1/Z_nm off the diagonal and 1/Z_n + sum_k 1/Z_nk on it;
    its inverse is the (symmetric) port impedance matrix.
    """
    n = len(ground_impedances)
    if n < 1:
        raise ValueError("at least one port is required")
    y = np.zeros((n, n), dtype=complex)
    for port, z in enumerate(ground_impedances):
        if z is None or np.isinf(z):
            continue
        z = complex(z)
        if z == 0:
            raise ValueError(f"ground impedance at port {port} is zero (short circuit)")
        y[port, port] += 1.0 / z
    seen = set()
    for (p, q), z in branch_impedances.items():
        if not (0 <= p < n and 0 <= q < n):
            raise ValueError(f"branch ({p}, {q}) references a port outside 0..{n - 1}")
        if p == q:
            raise ValueError(f"branch ({p}, {q}) connects a port to itself")
        key = (min(p, q), max(p, q))
        if key in seen:
            raise ValueError(f"branch {key} specified more than once")
        seen.add(key)
        if z is None or np.isinf(z):
            continue
        z = complex(z)
        if z == 0:
            raise ValueError(f"branch impedance {key} is zero (short circuit)")
        y[p, q] -= 1.0 / z
        y[q, p] -= 1.0 / z
        y[p, p] += 1.0 / z
        y[q, q] += 1.0 / z
    cond = np.linalg.cond(y)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedError(
            "admittance matrix is numerically singular", cond=float(cond)
        )
    z_i = np.linalg.inv(y)
    return (z_i + z_i.T) / 2.0


@dataclass(frozen=True)
class ScatteringValidation:
    """Structural defects of a candidate reflection matrix (Frobenius norms)."""

    block_symmetry: np.ndarray
    block_unitarity: np.ndarray
    off_block_leakage: float
    tol: float

    @property
    def passes(self):
        return bool(
            np.max(self.block_symmetry) <= self.tol
            and np.max(self.block_unitarity) <= self.tol
            and self.off_block_leakage <= self.tol
        )


def validate_scattering(theta, topology, tol=1e-8):
    """Check that a reflection matrix is realizable by the given topology.

    Reports, per group block, the symmetry defect ||B - B^T|| and the
    unitarity defect ||B^H B - I||, plus the total energy outside the
    block-diagonal support. Passes when all of them are at most ``tol``.
    """
    theta = _as_square(theta, "theta")
    if theta.shape[0] != topology.n_i:
        raise ValueError(f"theta has {theta.shape[0]} ports, expected {topology.n_i}")
    n_g = topology.n_g
    eye = np.eye(n_g)
    symmetry = np.zeros(topology.n_groups)
    unitarity = np.zeros(topology.n_groups)
    mask = np.ones_like(theta, dtype=bool)
    for g in range(topology.n_groups):
        sl = slice(g * n_g, (g + 1) * n_g)
        block = theta[sl, sl]
        symmetry[g] = np.linalg.norm(block - block.T)
        unitarity[g] = np.linalg.norm(block.conj().T @ block - eye)
        mask[sl, sl] = False
    leakage = float(np.linalg.norm(theta[mask]))
    return ScatteringValidation(symmetry, unitarity, leakage, float(tol))
