#!/usr/bin/env python3
"""Walk through the multiport wave formalism.

Builds a 3-port network (one transmit antenna, one reflecting element, one
receive antenna), terminates it, and solves for the steady-state waves. The
result is cross-checked with a plain fixed-point iteration of the defining
equations, and the impedance/scattering conversions are demonstrated.
"""

import numpy as np

import risnet as rn

rng = rn.trial_rng(2024)

print("== reflection coefficients ==")
for z in (50.0, 100.0, 50j, 25 - 40j):
    print(f"  z = {z!s:>12}  ->  gamma = {rn.reflection_coefficient(z):.4f}")

print("\n== impedance <-> scattering round trip ==")
z = np.array([[50 + 20j, 5j, 0], [5j, 60 - 10j, 2 + 1j], [0, 2 + 1j, 55 + 0j]])
s = rn.z_to_s(z)
z_back = rn.s_to_z(s)
print(f"  max singular value of S: {np.linalg.svd(s, compute_uv=False)[0]:.4f}")
print(f"  round-trip error: {np.linalg.norm(z_back - z) / np.linalg.norm(z):.2e}")

print("\n== terminated network waves ==")
a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
full = (a + a.T) / 2
full *= 0.7 / np.linalg.svd(full, compute_uv=False)[0]
parts = rn.PartitionedScattering.from_full(full, 1, 1, 1)
term = rn.TerminationSet.from_impedances([60 + 5j], [45 - 10j], v_s=1.0)
theta = np.array([[np.exp(0.8j)]])  # one reflecting element, pure phase shift
b, t = rn.solve_network_waves(parts, term, theta)
print(f"  reflected waves b = {np.round(b, 4)}")

# the same waves from 200 rounds of bouncing the equations b = S(b_s + Gamma b)
gamma = np.diag([term.gamma_t[0], theta[0, 0], term.gamma_r[0]])
b_s = np.array([term.b_s_t[0], 0, 0])
b_iter = np.zeros(3, dtype=complex)
for _ in range(200):
    b_iter = full @ (b_s + gamma @ b_iter)
print(f"  fixed-point difference: {np.max(np.abs(b - b_iter)):.2e}")

print("\n== end-to-end channel with and without coupling terms ==")
real = rn.ChannelRealization(
    0.1 + 0.05j, rn.draw_rayleigh_vector(4, rng), rn.draw_rayleigh_vector(4, rng))
x = rng.standard_normal((4, 4)) * 60
params = rn.ReactanceParams.from_matrices(rn.Topology.fully(4), ((x + x.T) / 2)[None])
theta4 = rn.scattering_from_reactance(params)
h = rn.assemble_simplified_channel(real, theta4)
print(f"  first-order channel H = {h:.5f}")
print(f"  |H|^2 = {abs(h) ** 2:.5f}")
