#!/usr/bin/env python3
"""The per-mode response kernel and its energy integrals.

Shows the three root regimes of f'' - mu f' + lam f = 0, the auxiliary M/V
functions that summarize time-averaged mode energy, and a regime the
closed-form envelope theory misses: strongly overdamped modes that never
equilibrate inside the observation window.
"""
from hypermle import fund_solution, m_func, v_func, mode_moments, predicted_moments
from hypermle.fundamental import characteristic_roots

print("=" * 72)
print("1. Root regimes of the mode kernel")
print("=" * 72)
for lam, mu in [(1.0, 0.0), (1.0, -2.0), (3.0, -4.0)]:
    r = characteristic_roots(lam, mu)
    f, fd = fund_solution(lam, mu, 1.0)
    print(f"lam={lam:4.1f} mu={mu:5.1f}: {r.tag:12s} ell={r.ell:.3f}  "
          f"f(1)={f:+.6f}  f'(1)={fd:+.6f}")

print()
print("=" * 72)
print("2. M and V: mean and variance scale of time-integrated mode energy")
print("=" * 72)
print(f"M(0) = {m_func(0.0)}   (exactly 1/4)")
print(f"V(0) = {v_func(0.0):.10f}   (exactly 1/24 = {1/24:.10f})")
for x in (-100.0, -10.0, 0.0, 2.0):
    print(f"  x={x:7.1f}:  M={m_func(x):.6e}  V={v_func(x):.6e}")
print("negative tail: M(x) ~ 1/(2|x|), V(x) ~ 4/(2|x|)^3")
for x in (-1e2, -1e3):
    print(f"  x={x:8.0f}: M ratio {m_func(x)*2*abs(x):.5f}, "
          f"V ratio {v_func(x)*(2*abs(x))**3/4:.5f}")

print()
print("=" * 72)
print("3. Exact energy integrals vs the equilibrated envelope predictions")
print("=" * 72)
T = 1.0
print(f"{'lam':>9} {'mu':>9} {'E int u^2 (exact)':>18} {'envelope':>12} {'ratio':>7}")
for lam, mu in [(1e4, -1.0), (1e4, -10.0), (1e4, -1e3), (20.0, -200.0), (20.0, -2000.0)]:
    mm = mode_moments(lam, mu, T)
    env = predicted_moments(lam, mu, T)["EintU2_asym"]
    print(f"{lam:9.0f} {mu:9.0f} {mm.double_int_f2:18.6e} {env:12.4e} "
          f"{mm.double_int_f2/env:7.3f}")
print()
print("With |mu| >> lam*T the slow root relaxes at rate lam/|mu|, so the mode")
print("never reaches its stationary energy within [0, T]: the true integral")
print("falls short of the envelope prediction by roughly lam*T/|mu|.  The")
print("normalizer machinery therefore always integrates the exact kernel.")
