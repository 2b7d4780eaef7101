"""Exact-in-distribution simulation of the Gaussian mode triples (u, v, w).

Each mode obeys  dv = (-lam*u + mu*v) dt + dw,  du = v dt,  u(0)=v(0)=0.
One time step of the exact solution is a linear map of the state plus a
Gaussian noise triple (state noise in u, state noise in v, the Brownian
increment) whose 3x3 covariance comes from the fundamental solution.  The
grid therefore introduces no bias in the marginal law of (u, v) at grid
times; only time-integrated statistics see the step size.

Stiff modes are propagated in energy coordinates (sqrt(lam)*u, v) with a
power-of-two scale, so extreme eigenvalues neither overflow nor lose the
state to underflow; rescaling by the exact power of two is lossless.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fundamental import fund_solution, scaled_mode_integrals
from .quadrature import integrate
from .spectrum import lambda_mu_slog

__all__ = [
    "TimeGrid",
    "ModeTrajectory",
    "UnderresolvedModeWarning",
    "TransitionError",
    "transition",
    "simulate_mode",
    "simulate_solution",
    "ito_sum",
    "mode_stream",
]

_EXP_MAX = 700.0
_LN2 = math.log(2.0)


class UnderresolvedModeWarning(UserWarning):
    """The grid does not resolve the mode oscillation (ell*dt > pi).

    Grid-point marginals stay exact in distribution, but pathwise Riemann/Ito
    sums of oscillatory integrands lose accuracy for such modes.
    """


class TransitionError(RuntimeError):
    """Noise covariance left the PSD cone by more than the tolerated clip."""


@dataclass(frozen=True)
class TimeGrid:
    T: float
    n_steps: int

    def __post_init__(self):
        if self.T <= 0.0 or self.n_steps < 1:
            raise ValueError("TimeGrid needs T > 0 and n_steps >= 1")

    @property
    def dt(self):
        return self.T / self.n_steps

    def times(self):
        return np.linspace(0.0, self.T, self.n_steps + 1)


@dataclass
class ModeTrajectory:
    """Sampled path of one mode; u is stored as scale*u with a power-of-two scale."""

    k: int
    u_scaled: np.ndarray
    v: np.ndarray
    dw: np.ndarray
    scale: float = 1.0
    lam: float = math.nan
    mu: float = math.nan
    grid_dt: float = math.nan

    @property
    def u(self):
        return self.u_scaled / self.scale

    def __len__(self):
        return len(self.dw)


def _pow2_scale(log_lam):
    """Power-of-two close to sqrt(lam); exact to rescale by."""
    if log_lam is None or log_lam <= 0.0:
        return 1.0
    e = int(round(log_lam / (2.0 * _LN2)))
    return math.ldexp(1.0, e)


def _psd_factor(Q):
    w, V = np.linalg.eigh(Q)
    clip = max(0.0, -float(w.min()))
    rel = clip / max(float(w.max()), 1e-300)
    if rel > 1e-8:
        raise TransitionError(f"noise covariance clip {rel:.3e} exceeds 1e-8 of the spectrum")
    S = V * np.sqrt(np.clip(w, 0.0, None))[None, :]
    return S, clip


def _scaled_transition(mu, dt, log_lam=None, lam=None, rtol=1e-9, warn=True):
    """Propagator and noise covariance in (scale*u, v, w) coordinates.

    Returns (P, Q, scale).  P is 2x2 over the state, Q the 3x3 covariance of
    (state noise in scale*u, state noise in v, Brownian increment).
    """
    if log_lam is None:
        if lam is None:
            raise ValueError("either lam or log_lam is required")
        log_lam = math.log(lam) if lam > 0.0 else None
    if log_lam is not None and log_lam > _EXP_MAX:
        raise ValueError("transition needs lam within the float range (log lam <= 700)")
    if lam is None:
        lam = math.exp(log_lam)

    b = 0.5 * mu
    disc = b * b - lam
    if warn and disc < 0.0 and math.sqrt(-disc) * dt > math.pi:
        warnings.warn(
            f"mode oscillation unresolved: ell*dt = {math.sqrt(-disc) * dt:.3g} > pi",
            UnderresolvedModeWarning,
            stacklevel=3,
        )

    f, fd = fund_solution(lam, mu, dt)
    g = fd - mu * f

    if lam > 0.0:
        scale = _pow2_scale(log_lam)
        lam_over_s2 = math.exp(log_lam - 2.0 * math.log(scale)) if scale != 1.0 else lam
        sf = scale * f
        si = scaled_mode_integrals(mu, dt, log_lam=log_lam, rtol=rtol)
        q_uu = si.lam_if2 / lam_over_s2
        q_uv = sf * sf / (2.0 * scale)
        q_uw = si.sqlam_if / math.sqrt(lam_over_s2)
        P = np.array([[g, sf], [-lam_over_s2 * sf, fd]])
        Q = np.array(
            [
                [q_uu, q_uv, q_uw],
                [q_uv, si.ifd2, f],
                [q_uw, f, dt],
            ]
        )
        return P, Q, scale

    # lam <= 0: no scaling; direct quadrature of the three kernels
    def f2(s):
        fs, _ = fund_solution(lam, mu, s)
        return fs * fs

    def fd2(s):
        _, fds = fund_solution(lam, mu, s)
        return fds * fds

    def fv(s):
        fs, _ = fund_solution(lam, mu, s)
        return fs

    if2, _ = integrate(f2, 0.0, dt, rtol=rtol, atol=1e-300)
    ifd2, _ = integrate(fd2, 0.0, dt, rtol=rtol, atol=1e-300)
    intf, _ = integrate(fv, 0.0, dt, rtol=rtol, atol=1e-300)
    P = np.array([[g, f], [-lam * f, fd]])
    Q = np.array([[if2, f * f / 2.0, intf], [f * f / 2.0, ifd2, f], [intf, f, dt]])
    return P, Q, 1.0


def transition(lam, mu, dt, rtol=1e-9):
    """Exact one-step propagator and joint noise covariance in plain (u, v, w) coordinates."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    P, Q, s = _scaled_transition(mu, dt, lam=lam, rtol=rtol)
    D = np.array([1.0 / s, 1.0, 1.0])
    P_plain = P.copy()
    P_plain[0, 1] /= s
    P_plain[1, 0] *= s
    Q_plain = Q * D[:, None] * D[None, :]
    return P_plain, Q_plain


def mode_stream(seed, replicate, k):
    """Counter-based generator keyed by (seed, replicate, mode); order-independent."""
    if not (0 <= replicate < 2 ** 32 and 0 <= k < 2 ** 32):
        raise ValueError("replicate and k must fit in 32 bits")
    key = np.array([seed % (2 ** 64), (replicate << 32) | k], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _run_chain(P, S, xi):
    """Iterate the exact transition.  xi: (n, 3, M) standard normals.

    Returns (u, v, dw) with u, v of shape (n+1, M) and dw of shape (n, M),
    in the scaled coordinates of P and S.
    """
    n, _, m = xi.shape
    noise = np.einsum("ij,njm->nim", S, xi)
    u = np.empty((n + 1, m))
    v = np.empty((n + 1, m))
    u[0] = 0.0
    v[0] = 0.0
    a, bb = P[0, 0], P[0, 1]
    c, d = P[1, 0], P[1, 1]
    cu = np.zeros(m)
    cv = np.zeros(m)
    for i in range(n):
        cu, cv = a * cu + bb * cv + noise[i, 0], c * cu + d * cv + noise[i, 1]
        u[i + 1] = cu
        v[i + 1] = cv
    return u, v, noise[:, 2, :]


def simulate_mode(lam, mu, grid, rng, k=1):
    """One exact trajectory of a single mode, driven by the given generator."""
    P, Q, scale = _scaled_transition(mu, grid.dt, lam=lam)
    S, _ = _psd_factor(Q)
    xi = rng.standard_normal((grid.n_steps, 3))[:, :, None]
    u, v, dw = _run_chain(P, S, xi)
    return ModeTrajectory(k, u[:, 0], v[:, 0], dw[:, 0], scale, lam, mu, grid.dt)


def simulate_solution(spec, params, N, grid, seed, replicate=0):
    """Independent trajectories of modes 1..N at the true parameters.

    The stream of mode k is derived from (seed, replicate, k), so any subset
    of modes reproduces identically regardless of execution order.
    """
    if N < 1 or N > spec.k_max:
        raise ValueError(f"N must lie in [1, {spec.k_max}]")
    out = []
    for k in range(1, N + 1):
        (s_lam, l_lam), mu = lambda_mu_slog(spec, params.theta1, params.theta2, k)
        lam = s_lam * math.exp(l_lam) if (s_lam != 0.0 and l_lam <= _EXP_MAX) else (
            math.inf if s_lam > 0.0 else 0.0)
        if l_lam > _EXP_MAX:
            raise ValueError(f"mode {k}: lambda exceeds the float range; simulation unsupported")
        rng = mode_stream(seed, replicate, k)
        traj = simulate_mode(lam, mu, grid, rng, k=k)
        out.append(traj)
    return out


def ito_sum(integrand, increments):
    """Left-endpoint Ito sum: sum integrand[i] * increments[i]."""
    integrand = np.asarray(integrand, dtype=float)
    increments = np.asarray(increments, dtype=float)
    if integrand.shape[-1] != increments.shape[-1] + 1:
        raise ValueError(
            f"integrand must have one more sample than increments: "
            f"{integrand.shape[-1]} vs {increments.shape[-1]}"
        )
    return float(np.dot(integrand[..., :-1], increments))
