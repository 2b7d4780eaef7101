#!/usr/bin/env python3
"""Simulate mode trajectories, estimate both parameters, decompose the error.

The simulation is exact in distribution at the grid times (no Euler bias),
the estimator is the closed-form solution of the 2x2 normal equations, and
the error admits an exact algebraic decomposition into stochastic-integral
terms -- checked here to ten significant digits on a single replicate.
"""
import numpy as np

from hypermle import psi
from hypermle.equations import preset
from hypermle.estimate import (
    error_decomposition,
    estimate_from_trajectories,
    mle,
    sufficient_statistics,
)
from hypermle.simulate import TimeGrid, simulate_solution

spec, params = preset("alg_ex1", d=1)  # u_tt = theta1 Lap u + theta2 u_t + noise
print(f"true parameters: theta1 = {params.theta1}, theta2 = {params.theta2}")

grid = TimeGrid(params.T, 4096)
N = 100
trajs = simulate_solution(spec, params, N, grid, seed=2024)
print(f"simulated {N} modes on a {grid.n_steps}-step grid")

stats = sufficient_statistics(trajs, spec)
print("\nnine sufficient statistics (endpoint-identity variant):")
for f in ("A1", "A2", "F1", "F2", "K1", "K2", "K12", "L1", "L2"):
    print(f"  {f:3s} = {getattr(stats, f): .6e}")

pv = psi(spec, params, N)
res = estimate_from_trajectories(trajs, spec, params, pv)
print(f"\nestimates: theta1_hat = {res.theta1_hat:.5f}, "
      f"theta2_hat = {res.theta2_hat:.5f}")
print(f"normalized errors: {res.norm_err1:+.4f}, {res.norm_err2:+.4f} "
      "(asymptotically standard normal)")
print(f"coupling diagnostic D_N = {res.D_N:.5f} (vanishes as N grows)")

print("\nerror decomposition (raw Riemann statistics, residual increments):")
dec = error_decomposition(trajs, spec, params, increments="residual")
th = mle(dec.stats)
direct = (th[0] - params.theta1, th[1] - params.theta2)
for i, (d, r) in enumerate(zip(direct, dec.reconstructed), start=1):
    print(f"  theta{i}: direct {d:+.12e}  reconstructed {r:+.12e}  "
          f"rel diff {abs(d - r) / abs(d):.2e}")
print("the identity is algebraically exact once every sum shares left endpoints")

print("\nIto isometry snapshot: E iota_i^2 should match psi_i")
from hypermle.montecarlo import run_replicates

batch = run_replicates(spec, params, 25, TimeGrid(params.T, 512), seed=11, M=600)
pv25 = psi(spec, params, 25)
print(f"  mean iota1^2 / psi1 = {np.mean(batch.iota1 ** 2) / pv25.psi1:.3f}")
print(f"  mean iota2^2 / psi2 = {np.mean(batch.iota2 ** 2) / pv25.psi2:.3f}")
