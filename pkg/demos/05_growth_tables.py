#!/usr/bin/env python3
"""Normalizer growth: fitted exponents vs the theoretical matrix.

psi1 and psi2 are the Fisher-information-like normalizers; their growth in N
decides estimability and convergence rates.  The theoretical matrix follows
from the summand exponents gamma_i; the fitted slopes come from the exact
per-mode integrals.
"""
import math

from hypermle.cli import growth_tables
from hypermle.equations import preset
from hypermle.fundamental import psi_curve
from hypermle.montecarlo import fit_growth

print("theoretical growth matrix (gamma-exponent arithmetic):\n")
_, text = growth_tables()
print(text)

print()
print("fitted log-log slopes from the exact normalizers, N in [50, 800]:\n")
Ns = [50, 71, 100, 141, 200, 283, 400, 566, 800]
for name, d in [("alg_ex1", 1), ("alg_ex2", 1), ("alg_ex3", 1)]:
    spec, params = preset(name, d=d)
    fit = fit_growth(psi_curve(spec, params, Ns))
    print(f"  {name} (d={d}): psi1 slope {fit['psi1']['slope']:6.3f}, "
          f"psi2 slope {fit['psi2']['slope']:6.3f}")

print()
print("logarithmic growth at a boundary case (closed-form sum column):")
spec, params = preset("alg_ex3", d=2)
rows = psi_curve(spec, params, Ns)
fit = fit_growth(rows, columns=("psi1_asym",))
print(f"  alg_ex3 (d=2): slope {fit['psi1_asym']['slope']:.3f}, "
      f"log flag = {fit['psi1_asym']['log_flag']}")

print()
print("exponential spectrum: psi2 tracks N (ln N)^(T*theta2)")
spec, params = preset("sec5_example")
rows = psi_curve(spec, params, [100, 200, 400, 800])
for r in rows:
    ratio = r.psi2 / (r.N * math.log(r.N) ** (params.T * params.theta2))
    print(f"  N={r.N:4d}: psi2 = {r.psi2:10.2f}   psi2/(N ln N) = {ratio:.4f}")
