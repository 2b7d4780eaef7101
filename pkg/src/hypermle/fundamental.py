"""Closed-form fundamental solution of u'' - mu u' + lam u = w' and its energy integrals.

The mode response kernel f solves f'' - mu f' + lam f = 0 with f(0)=0,
f'(0)=1.  Everything the estimator theory needs reduces to f, f', the
functions M and V, and a handful of integrals of f^2 and f'^2 over [0, T].

Integrals are computed by adaptive quadrature where the integrand is
resolvable and by exact antiderivatives (or their phase-averaged envelope,
relative error O(1/(l*T))) where the oscillation frequency l makes panel
counts infeasible.  The regimes overlap and are cross-checked in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import integrate, QuadratureError

__all__ = [
    "RootKind",
    "characteristic_roots",
    "fund_solution",
    "m_func",
    "v_func",
    "m_func_log",
    "ModeMoments",
    "mode_moments",
    "covariance_u",
    "predicted_moments",
    "psi",
    "psi_curve",
    "upsilon",
    "FundamentalOverflowError",
    "QuadratureError",
]

ROOT_COMPLEX = "complex_pair"
ROOT_DOUBLE = "double_root"
ROOT_REAL = "real_pair"

# relative width of the discriminant band that is tagged as a double root
DOUBLE_ROOT_BAND = 1e-8
# below this value of (l*t)^2 the sin/sinh branches are evaluated by one series
_SERIES_X = 0.25
_EXP_MAX = 700.0

# oscillation handling thresholds, in units of total phase l*T
_QUAD_PHASE_MAX = 4096 * math.pi   # beyond: exact antiderivatives
_ENVELOPE_PHASE_MIN = 1e7          # beyond: drop O(1/(l*T)) oscillatory terms


class FundamentalOverflowError(OverflowError):
    """exp(b*t) exceeds the float range; only possible off the hyperbolic regime."""

    def __init__(self, exponent):
        super().__init__(
            f"fundamental solution overflows: exponent {exponent:.3g} "
            f"(log-magnitude fallback value)"
        )
        self.log_magnitude = exponent


@dataclass(frozen=True)
class RootKind:
    tag: str
    ell: float       # sqrt(|mu^2/4 - lam|)
    half_mu: float   # b = mu/2


def characteristic_roots(lam, mu):
    """Classify r^2 - mu r + lam = 0 by its discriminant."""
    b = 0.5 * mu
    disc = b * b - lam
    scale = max(abs(b * b), abs(lam))
    ell = math.sqrt(abs(disc))
    if scale == 0.0 or abs(disc) <= DOUBLE_ROOT_BAND * scale:
        return RootKind(ROOT_DOUBLE, ell, b)
    if disc < 0.0:
        return RootKind(ROOT_COMPLEX, ell, b)
    return RootKind(ROOT_REAL, ell, b)


def _sc_series(x):
    """S(x) = sum x^j/(2j+1)!, C(x) = sum x^j/(2j)! for |x| small.

    S and C interpolate sin/ sinh (x = -(l t)^2 resp. (l t)^2): t*S = sin(lt)/l
    or sinh(lt)/l, C = cos(lt) or cosh(lt).
    """
    s = np.ones_like(x)
    c = np.ones_like(x)
    term_s = np.ones_like(x)
    term_c = np.ones_like(x)
    for j in range(1, 11):
        term_s = term_s * x / ((2 * j) * (2 * j + 1))
        term_c = term_c * x / ((2 * j - 1) * (2 * j))
        s += term_s
        c += term_c
    return s, c


def _stable_real_roots(lam, b, ell):
    """Roots b +- ell with the smaller one obtained from the product r+ r- = lam."""
    if b <= 0.0:
        r_minus = b - ell
        r_plus = lam / r_minus if r_minus != 0.0 else 0.0
    else:
        r_plus = b + ell
        r_minus = lam / r_plus if r_plus != 0.0 else 0.0
    return r_plus, r_minus


def fund_solution(lam, mu, t):
    """(f(t), f'(t)) for scalar lam, mu; t may be an array.

    Branches follow the sign of mu^2/4 - lam; near the double root the
    sin/sinh factor is evaluated by a single series in (l t)^2 so that the
    value is continuous across the switch.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(t < 0.0):
        raise ValueError("fund_solution requires t >= 0")
    b = 0.5 * mu
    disc = b * b - lam
    ell = math.sqrt(abs(disc))

    tmax = float(t.max()) if t.size else 0.0
    grow = max(b, 0.0) + (ell if disc > 0.0 and b + ell > 0.0 else 0.0)
    if grow * tmax > _EXP_MAX:
        raise FundamentalOverflowError(grow * tmax)

    x = disc * t * t  # signed (l t)^2
    f = np.empty_like(t)
    fdot = np.empty_like(t)

    near = np.abs(x) < _SERIES_X
    if np.any(near):
        tn = t[near]
        s, c = _sc_series(x[near])
        ebt = np.exp(b * tn)
        f[near] = tn * s * ebt
        fdot[near] = ebt * (b * tn * s + c)

    far = ~near
    if np.any(far):
        tf = t[far]
        if disc < 0.0:
            ebt = np.exp(b * tf)
            sn = np.sin(ell * tf)
            cs = np.cos(ell * tf)
            f[far] = ebt * sn / ell
            fdot[far] = ebt * (cs + b * sn / ell)
        else:
            r_plus, r_minus = _stable_real_roots(lam, b, ell)
            ep = np.exp(np.minimum(r_plus * tf, _EXP_MAX))
            em = np.exp(np.minimum(r_minus * tf, _EXP_MAX))
            f[far] = (ep - em) / (2.0 * ell)
            fdot[far] = (r_plus * ep - r_minus * em) / (2.0 * ell)

    if scalar:
        return float(f[0]), float(fdot[0])
    return f, fdot


# ---------------------------------------------------------------------------
# The auxiliary functions M and V
# ---------------------------------------------------------------------------

_M_SWITCH = 1e-3
# V's numerator is O(x^4) against O(x)-sized terms, so its direct form only
# reaches 1e-10 accuracy beyond |x| ~ 0.1; the degree-8 series is exact to
# machine precision on that whole window.
_V_SWITCH = 0.1
_M_COEF = np.array([1.0 / (2.0 * math.factorial(m + 2)) for m in range(9)])
_V_COEF = np.array(
    [(2.0 ** (m + 4) + 4.0 - 4.0 * (m + 4)) / (4.0 * math.factorial(m + 4)) for m in range(9)]
)


def m_func(x):
    """M(x) = (e^x - x - 1)/(2 x^2), continuous with M(0) = 1/4."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = np.abs(x) < _M_SWITCH
    out[small] = np.polynomial.polynomial.polyval(x[small], _M_COEF)
    xs = x[~small]
    with np.errstate(over="ignore"):
        out[~small] = (np.expm1(xs) - xs) / (2.0 * xs * xs)
    return float(out[0]) if scalar else out


def v_func(x):
    """V(x) = (e^{2x} + 4e^x - 4x e^x - 2x - 5)/(4 x^4), V(0) = 1/24."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = np.abs(x) < _V_SWITCH
    out[small] = np.polynomial.polynomial.polyval(x[small], _V_COEF)
    xs = x[~small]
    with np.errstate(over="ignore"):
        em1 = np.expm1(xs)
        # e^{2x} + 4e^x - 4x e^x - 2x - 5 rearranged through expm1 terms
        num = np.expm1(2.0 * xs) + 4.0 * em1 - 4.0 * xs * em1 - 6.0 * xs
        out[~small] = num / (4.0 * xs ** 4)
    return float(out[0]) if scalar else out


def m_func_log(x):
    """log M(x), stable for arguments far outside the float range of e^x."""
    if abs(x) <= 30.0:
        return math.log(m_func(x))
    if x > 30.0:
        return x - math.log(2.0 * x * x) + math.log1p(-(x + 1.0) * math.exp(-x))
    return math.log(-x - 1.0 + math.exp(x)) - math.log(2.0 * x * x)


# ---------------------------------------------------------------------------
# Exact antiderivative building blocks
# ---------------------------------------------------------------------------


def _p0(z, T):
    """int_0^T e^{zt} dt for complex or real z, series-stable near z = 0."""
    zT = z * T
    if abs(zT) < 0.5:
        term = 1.0 + 0j if isinstance(z, complex) else 1.0
        acc = term
        for j in range(1, 22):
            term = term * zT / (j + 1)
            acc += term
        return T * acc
    return (np.exp(zT) - 1.0) / z


def _w0(z, T):
    """int_0^T (T - t) e^{zt} dt = (e^{zT} - zT - 1)/z^2."""
    zT = z * T
    if abs(zT) < 0.5:
        term = 0.5 + 0j if isinstance(z, complex) else 0.5
        acc = term
        for j in range(1, 22):
            term = term * zT * (j + 1) / ((j + 2) * (j + 1))
            acc += term
        return T * T * acc
    return (np.exp(zT) - zT - 1.0) / (z * z)


@dataclass(frozen=True)
class ScaledIntegrals:
    """Mode energy integrals over [0, T] in lam-scaled form.

    lam_if2   = lam * int f^2
    ifd2      =       int f'^2
    lam_iif2  = lam * int (T-t) f^2      (= lam * double integral of f^2)
    iifd2     =       int (T-t) f'^2
    sqlam_if  = sqrt(lam) * int f
    regime    = "quadrature" | "closed" | "envelope"
    """

    lam_if2: float
    ifd2: float
    lam_iif2: float
    iifd2: float
    sqlam_if: float
    regime: str


def _quad_edges(T, ell, damp_rate):
    """Oscillation-resolving uniform panels plus geometric panels into any boundary layer."""
    n_osc = int(min(max(8, math.ceil(ell * T / math.pi) + 4), 4200))
    edges = set(np.linspace(0.0, T, n_osc + 1).tolist())
    if damp_rate * T > 50.0:
        j_max = min(int(math.ceil(math.log2(damp_rate * T))) + 4, 1000)
        edges.update(T * 2.0 ** (-j) for j in range(1, j_max))
    return np.array(sorted(edges))


def _integrals_quadrature(lam, mu, T, rtol, ell):
    b = 0.5 * mu
    damp = abs(b) + (ell if b * b - lam > 0.0 else 0.0)
    edges = _quad_edges(T, ell, damp)

    def f2(s):
        f, _ = fund_solution(lam, mu, s)
        return f * f

    def fd2(s):
        _, fd = fund_solution(lam, mu, s)
        return fd * fd

    def wf2(s):
        f, _ = fund_solution(lam, mu, s)
        return (T - s) * f * f

    def wfd2(s):
        _, fd = fund_solution(lam, mu, s)
        return (T - s) * fd * fd

    def fval(s):
        f, _ = fund_solution(lam, mu, s)
        return f

    if2, _ = integrate(f2, 0.0, T, rtol=rtol, atol=1e-300, edges=edges)
    ifd2, _ = integrate(fd2, 0.0, T, rtol=rtol, atol=1e-300, edges=edges)
    iif2, _ = integrate(wf2, 0.0, T, rtol=rtol, atol=1e-300, edges=edges)
    iifd2, _ = integrate(wfd2, 0.0, T, rtol=rtol, atol=1e-300, edges=edges)
    intf, _ = integrate(fval, 0.0, T, rtol=rtol, atol=1e-300, edges=edges)
    sq = math.sqrt(lam) if lam > 0 else 0.0
    return ScaledIntegrals(lam * if2, ifd2, lam * iif2, iifd2, sq * intf, "quadrature")


def _integrals_closed_complex(lam, mu, T, ell):
    b = 0.5 * mu
    c = 2.0 * b
    z = complex(2.0 * b, 2.0 * ell)
    p0c = _p0(c, T)
    p0z = _p0(z, T)
    w0c = _w0(c, T)
    w0z = _w0(z, T)
    ell2 = ell * ell

    if2 = (p0c - p0z.real) / (2.0 * ell2)
    iif2 = (w0c - w0z.real) / (2.0 * ell2)
    ifd2 = 0.5 * (p0c + p0z.real) + (b / ell) * p0z.imag + (b * b / (2.0 * ell2)) * (p0c - p0z.real)
    iifd2 = 0.5 * (w0c + w0z.real) + (b / ell) * w0z.imag + (b * b / (2.0 * ell2)) * (w0c - w0z.real)
    intf = _p0(complex(b, ell), T).imag / ell
    return ScaledIntegrals(lam * if2, ifd2, lam * iif2, iifd2, math.sqrt(lam) * intf, "closed")


def _integrals_closed_real(lam, mu, T, ell):
    b = 0.5 * mu
    r_plus, r_minus = _stable_real_roots(lam, b, ell)
    if max(r_plus, 0.0) * 2.0 * T > _EXP_MAX:
        raise FundamentalOverflowError(2.0 * r_plus * T)
    four_ell2 = 4.0 * ell * ell
    p0p, p0m, p0c = _p0(2.0 * r_plus, T), _p0(2.0 * r_minus, T), _p0(mu, T)
    w0p, w0m, w0c = _w0(2.0 * r_plus, T), _w0(2.0 * r_minus, T), _w0(mu, T)

    if2 = (p0p - 2.0 * p0c + p0m) / four_ell2
    iif2 = (w0p - 2.0 * w0c + w0m) / four_ell2
    ifd2 = (r_plus ** 2 * p0p - 2.0 * lam * p0c + r_minus ** 2 * p0m) / four_ell2
    iifd2 = (r_plus ** 2 * w0p - 2.0 * lam * w0c + r_minus ** 2 * w0m) / four_ell2
    intf = (_p0(r_plus, T) - _p0(r_minus, T)) / (2.0 * ell)
    sq = math.sqrt(lam) if lam > 0 else 0.0
    return ScaledIntegrals(lam * if2, ifd2, lam * iif2, iifd2, sq * intf, "closed")


def _integrals_envelope(log_lam, mu, T):
    """Phase-averaged integrals; valid for l*T >> 1, error O(1/(l*T)).

    Works from log(lam) directly, so it covers eigenvalues beyond the float
    range (the only regime that has to).
    """
    b = 0.5 * mu
    if b == 0.0:
        b2_over_lam = 0.0
    else:
        b2_over_lam = math.exp(min(2.0 * math.log(abs(b)) - log_lam, 0.0))
        if b2_over_lam >= 0.5:
            raise ValueError("envelope integrals require mu^2 << 4 lam")
    lam_over_ell2 = 1.0 / (1.0 - b2_over_lam)
    b2_over_ell2 = b2_over_lam * lam_over_ell2

    p0c = _p0(2.0 * b, T)
    w0c = _w0(2.0 * b, T)
    lam_if2 = 0.5 * lam_over_ell2 * p0c
    ifd2 = 0.5 * (1.0 + b2_over_ell2) * p0c
    lam_iif2 = 0.5 * lam_over_ell2 * w0c
    iifd2 = 0.5 * (1.0 + b2_over_ell2) * w0c
    return ScaledIntegrals(lam_if2, ifd2, lam_iif2, iifd2, 0.0, "envelope")


def scaled_mode_integrals(mu, T, lam=None, log_lam=None, rtol=1e-9):
    """Dispatch between quadrature, antiderivative, and envelope evaluation."""
    if T <= 0.0:
        raise ValueError("T must be positive")
    if log_lam is None:
        if lam is None:
            raise ValueError("either lam or log_lam is required")
        log_lam = math.log(lam) if lam > 0.0 else None
    if lam is None:
        if log_lam > _EXP_MAX:
            return _integrals_envelope(log_lam, mu, T)
        lam = math.exp(log_lam)

    b = 0.5 * mu
    disc = b * b - lam
    ell = math.sqrt(abs(disc))
    phase = ell * T

    if disc < 0.0:
        if phase < 0.5 or phase <= _QUAD_PHASE_MAX:
            return _integrals_quadrature(lam, mu, T, rtol, ell)
        if phase <= _ENVELOPE_PHASE_MIN:
            return _integrals_closed_complex(lam, mu, T, ell)
        return _integrals_envelope(math.log(lam), mu, T)
    if phase < 0.5:
        return _integrals_quadrature(lam, mu, T, rtol, 0.0)
    return _integrals_closed_real(lam, mu, T, ell)


# ---------------------------------------------------------------------------
# Public moment operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModeMoments:
    int_f2: float
    int_fdot2: float
    double_int_f2: float
    double_int_fdot2: float
    Eu2T: float


def mode_moments(lam, mu, T, tol=1e-9):
    """Energy integrals of one mode; Eu2T equals int_f2 by construction."""
    if lam > 0.0:
        si = scaled_mode_integrals(mu, T, lam=lam, rtol=tol)
        int_f2 = si.lam_if2 / lam
        dbl_f2 = si.lam_iif2 / lam
        return ModeMoments(int_f2, si.ifd2, dbl_f2, si.iifd2, int_f2)

    # lam <= 0: no lam-scaling; direct quadrature of the (non-oscillatory) kernel
    def f2(s):
        f, _ = fund_solution(lam, mu, s)
        return f * f

    def fd2(s):
        _, fd = fund_solution(lam, mu, s)
        return fd * fd

    def wf2(s):
        f, _ = fund_solution(lam, mu, s)
        return (T - s) * f * f

    def wfd2(s):
        _, fd = fund_solution(lam, mu, s)
        return (T - s) * fd * fd

    int_f2, _ = integrate(f2, 0.0, T, rtol=tol, atol=1e-300)
    int_fd2, _ = integrate(fd2, 0.0, T, rtol=tol, atol=1e-300)
    dbl_f2, _ = integrate(wf2, 0.0, T, rtol=tol, atol=1e-300)
    dbl_fd2, _ = integrate(wfd2, 0.0, T, rtol=tol, atol=1e-300)
    return ModeMoments(int_f2, int_fd2, dbl_f2, dbl_fd2, int_f2)


def covariance_u(lam, mu, s, t, rtol=1e-9):
    """E u(s)u(t) = int_0^{min(s,t)} f(s-r) f(t-r) dr."""
    if s < 0.0 or t < 0.0:
        raise ValueError("covariance_u requires s, t >= 0")
    m = min(s, t)
    if m == 0.0:
        return 0.0
    roots = characteristic_roots(lam, mu)
    panels = int(min(max(8, math.ceil(roots.ell * m / math.pi) + 4), 4200))

    def kernel(r):
        fa, _ = fund_solution(lam, mu, s - r)
        fb, _ = fund_solution(lam, mu, t - r)
        return fa * fb

    val, _ = integrate(kernel, 0.0, m, rtol=rtol, atol=1e-300, initial_panels=panels)
    return val


def _em1_over(x):
    """(e^x - 1)/x, continuous at 0."""
    if abs(x) < 1e-8:
        return 1.0 + 0.5 * x
    return math.expm1(x) / x


def predicted_moments(lam, mu, T):
    """Leading-order moments of u(T), int u^2 and int v^2 (valid for large lam)."""
    if lam <= 0.0:
        raise ValueError("predicted_moments requires lam > 0")
    x = mu * T
    eu2t = T * _em1_over(x) / (2.0 * lam)
    mb = m_func(x)
    vb = v_func(x)
    return {
        "Eu2T_asym": eu2t,
        "VarU2T_asym": 3.0 * eu2t * eu2t,
        "EintU2_asym": T * T * mb / lam,
        "VarIntU2_asym": T ** 4 * vb / (lam * lam),
        "EintV2_asym": T * T * mb,
        "VarIntV2_asym": T ** 4 * vb,
    }


# ---------------------------------------------------------------------------
# Normalizing sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsiValues:
    N: int
    psi1: float
    psi2: float
    psi12: float
    psi1_asym: float
    psi2_asym: float


def _psi_mode_terms(spec, params, ks, rtol):
    """Per-mode contributions to (psi1, psi2, psi12, psi1_asym, psi2_asym)."""
    from .spectrum import lambda_mu_slog  # late import: avoid a module cycle

    out = np.empty((len(ks), 5))
    for i, k in enumerate(ks):
        (s_lam, l_lam), mu = lambda_mu_slog(spec, params.theta1, params.theta2, k)
        if s_lam <= 0.0:
            raise ValueError(f"psi requires positive evolution eigenvalues; mode {k} fails")
        si = scaled_mode_integrals(mu, params.T, log_lam=l_lam, rtol=rtol)

        s_tau, l_tau = spec.tau.slog(k)
        s_nu, l_nu = spec.nu.slog(k)
        nu = s_nu * math.exp(l_nu) if l_nu > -math.inf else 0.0

        c1 = math.exp(2.0 * l_tau - l_lam) if l_tau > -math.inf else 0.0
        c12 = (
            s_tau * s_nu * math.exp(l_tau + l_nu - l_lam)
            if (l_tau > -math.inf and l_nu > -math.inf)
            else 0.0
        )
        x = params.T * mu
        m_log = m_func_log(x)
        with np.errstate(over="ignore"):
            asym1 = (
                math.exp(min(2.0 * l_tau - l_lam + m_log, _EXP_MAX)) * params.T ** 2
                if l_tau > -math.inf
                else 0.0
            )
        asym2 = nu * nu * params.T ** 2 * math.exp(min(m_log, _EXP_MAX))

        out[i, 0] = c1 * si.lam_iif2
        out[i, 1] = nu * nu * si.iifd2
        out[i, 2] = -0.5 * c12 * si.lam_if2
        out[i, 3] = asym1
        out[i, 4] = asym2
    return out


def psi(spec, params, N, rtol=1e-9):
    """Exact (quadrature-grade) and asymptotic normalizers at the true parameters."""
    if N < 1:
        raise ValueError("N must be >= 1")
    terms = _psi_mode_terms(spec, params, range(1, N + 1), rtol)
    sums = terms.sum(axis=0)
    return PsiValues(N, sums[0], sums[1], sums[2], sums[3], sums[4])


def psi_curve(spec, params, N_list, rtol=1e-9):
    """PsiValues at every N in an increasing list, sharing per-mode work."""
    N_list = [int(n) for n in N_list]
    if any(n < 1 for n in N_list) or sorted(N_list) != N_list:
        raise ValueError("N_list must be increasing positive integers")
    terms = _psi_mode_terms(spec, params, range(1, max(N_list) + 1), rtol)
    csums = np.cumsum(terms, axis=0)
    return [
        PsiValues(n, csums[n - 1, 0], csums[n - 1, 1], csums[n - 1, 2], csums[n - 1, 3], csums[n - 1, 4])
        for n in N_list
    ]


def upsilon(N, gamma):
    """Growth scale of sum_{k<=N} k^gamma: N^{gamma+1} above the -1 boundary, log N at it."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if gamma < -1.0 - 1e-12:
        raise ValueError("upsilon is defined for gamma >= -1")
    if abs(gamma + 1.0) <= 1e-12:
        return math.log(N)
    return float(N) ** (gamma + 1.0)
