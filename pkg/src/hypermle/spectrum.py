"""Operator eigenvalue sequences and the conditions the estimation theory puts on them.

Four sequences (kappa_k, tau_k, rho_k, nu_k) define the equation; the evolution
and dissipation eigenvalues are the affine combinations

    lambda_k(theta) = kappa_k + theta * tau_k,
    mu_k(theta)     = rho_k   + theta * nu_k.

All condition checks here are finite-range empirical verifications: each
report carries the k-range it looked at, the constants it fitted, and a
pass/fail/inconclusive verdict.  Sequences are evaluated internally in
sign + log-magnitude form so that e.g. kappa_k = e^{2k} stays exact in sign
and usable far beyond the float range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fundamental import m_func_log
from .slog import slog_add, slog_scale, log_cumsum_exp

__all__ = [
    "Generator",
    "PowerLaw",
    "ExpLaw",
    "LogLaw",
    "LogLogLaw",
    "Constant",
    "Explicit",
    "SignedAlternating",
    "SpectrumSpec",
    "ModelParams",
    "ConditionReport",
    "AlgebraicClass",
    "NonAlgebraicSpectrumError",
    "eigenvalues",
    "lambda_mu",
    "lambda_mu_slog",
    "check_hyperbolic",
    "verify_lower_bound_props",
    "classify_algebraic",
    "consistency_conditions",
    "slowly_increasing_test",
    "conditions_1_2",
]

_NEG_INF = -np.inf


class Generator:
    """One eigenvalue sequence k -> value, exact in sign and log magnitude."""

    kind = "generator"

    def slog(self, k):
        """(sign, log|value|) at integer k >= 1."""
        raise NotImplementedError

    def slog_array(self, ks):
        ks = np.asarray(ks)
        signs = np.empty(ks.shape)
        logs = np.empty(ks.shape)
        for i, k in enumerate(ks.ravel()):
            s, l = self.slog(int(k))
            signs.ravel()[i] = s
            logs.ravel()[i] = l
        return signs, logs

    def value(self, k):
        s, l = self.slog(k)
        if s == 0.0:
            return 0.0
        with np.errstate(over="ignore"):
            return float(s * np.exp(l))

    def value_array(self, ks):
        s, l = self.slog_array(ks)
        with np.errstate(over="ignore"):
            return s * np.exp(l)

    def k_max(self):
        return None  # unbounded unless the generator says otherwise

    def to_config(self):
        raise NotImplementedError


def _check_k(k):
    if k < 1 or int(k) != k:
        raise ValueError(f"mode index must be a positive integer, got {k}")
    return int(k)


@dataclass(frozen=True)
class PowerLaw(Generator):
    """coefficient * k^exponent"""

    coefficient: float
    exponent: float
    kind = "power_law"

    def slog(self, k):
        k = _check_k(k)
        if self.coefficient == 0.0:
            return 0.0, _NEG_INF
        return math.copysign(1.0, self.coefficient), math.log(abs(self.coefficient)) + self.exponent * math.log(k)

    def slog_array(self, ks):
        ks = np.asarray(ks, dtype=float)
        if self.coefficient == 0.0:
            return np.zeros_like(ks), np.full_like(ks, _NEG_INF)
        s = np.full_like(ks, math.copysign(1.0, self.coefficient))
        return s, math.log(abs(self.coefficient)) + self.exponent * np.log(ks)

    def value(self, k):
        k = _check_k(k)
        try:
            return self.coefficient * float(k) ** self.exponent
        except OverflowError:
            return super().value(k)

    def to_config(self):
        return {"kind": "power_law", "coefficient": self.coefficient, "exponent": self.exponent}


@dataclass(frozen=True)
class ExpLaw(Generator):
    """coefficient * e^{rate * k}"""

    coefficient: float
    rate: float
    kind = "exp_law"

    def slog(self, k):
        k = _check_k(k)
        if self.coefficient == 0.0:
            return 0.0, _NEG_INF
        return math.copysign(1.0, self.coefficient), math.log(abs(self.coefficient)) + self.rate * k

    def slog_array(self, ks):
        ks = np.asarray(ks, dtype=float)
        if self.coefficient == 0.0:
            return np.zeros_like(ks), np.full_like(ks, _NEG_INF)
        s = np.full_like(ks, math.copysign(1.0, self.coefficient))
        return s, math.log(abs(self.coefficient)) + self.rate * ks

    def value(self, k):
        k = _check_k(k)
        try:
            return self.coefficient * math.exp(self.rate * k)
        except OverflowError:
            return math.copysign(math.inf, self.coefficient)

    def to_config(self):
        return {"kind": "exp_law", "coefficient": self.coefficient, "rate": self.rate}


@dataclass(frozen=True)
class LogLaw(Generator):
    """coefficient * (ln(k + shift))^exponent; requires k + shift > 1."""

    coefficient: float
    exponent: float = 1.0
    shift: float = 0.0
    kind = "log_law"

    def slog(self, k):
        k = _check_k(k)
        base = math.log(k + self.shift)
        if base <= 0.0:
            raise ValueError(f"log_law undefined at k={k} with shift={self.shift}")
        if self.coefficient == 0.0:
            return 0.0, _NEG_INF
        return math.copysign(1.0, self.coefficient), math.log(abs(self.coefficient)) + self.exponent * math.log(base)

    def to_config(self):
        return {
            "kind": "log_law",
            "coefficient": self.coefficient,
            "exponent": self.exponent,
            "shift": self.shift,
        }


@dataclass(frozen=True)
class LogLogLaw(Generator):
    """coefficient * ln(ln(k + shift)); requires ln(k + shift) > 1."""

    coefficient: float
    shift: float = 0.0
    kind = "loglog_law"

    def slog(self, k):
        k = _check_k(k)
        inner = math.log(k + self.shift)
        if inner <= 1.0:
            raise ValueError(f"loglog_law undefined at k={k} with shift={self.shift}")
        if self.coefficient == 0.0:
            return 0.0, _NEG_INF
        return math.copysign(1.0, self.coefficient), math.log(abs(self.coefficient)) + math.log(math.log(inner))

    def to_config(self):
        return {"kind": "loglog_law", "coefficient": self.coefficient, "shift": self.shift}


@dataclass(frozen=True)
class Constant(Generator):
    coefficient: float
    kind = "constant"

    def slog(self, k):
        _check_k(k)
        if self.coefficient == 0.0:
            return 0.0, _NEG_INF
        return math.copysign(1.0, self.coefficient), math.log(abs(self.coefficient))

    def slog_array(self, ks):
        ks = np.asarray(ks, dtype=float)
        if self.coefficient == 0.0:
            return np.zeros_like(ks), np.full_like(ks, _NEG_INF)
        return (
            np.full_like(ks, math.copysign(1.0, self.coefficient)),
            np.full_like(ks, math.log(abs(self.coefficient))),
        )

    def value(self, k):
        _check_k(k)
        return self.coefficient

    def to_config(self):
        return {"kind": "constant", "coefficient": self.coefficient}


@dataclass(frozen=True)
class Explicit(Generator):
    values: tuple
    kind = "explicit"

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(float(v) for v in values))

    def slog(self, k):
        k = _check_k(k)
        if k > len(self.values):
            raise ValueError(f"explicit sequence has {len(self.values)} entries; k={k} out of range")
        v = self.values[k - 1]
        if v == 0.0:
            return 0.0, _NEG_INF
        return math.copysign(1.0, v), math.log(abs(v))

    def value(self, k):
        k = _check_k(k)
        if k > len(self.values):
            raise ValueError(f"explicit sequence has {len(self.values)} entries; k={k} out of range")
        return self.values[k - 1]

    def k_max(self):
        return len(self.values)

    def to_config(self):
        return {"kind": "explicit", "values": list(self.values)}


@dataclass(frozen=True)
class SignedAlternating(Generator):
    """(-1)^k times an inner generator."""

    inner: Generator
    kind = "signed_alternating"

    def slog(self, k):
        s, l = self.inner.slog(k)
        return (s if k % 2 == 0 else -s), l

    def k_max(self):
        return self.inner.k_max()

    def to_config(self):
        return {"kind": "signed_alternating", "inner": self.inner.to_config()}


@dataclass(frozen=True)
class SpectrumSpec:
    """The four sequences plus the spatial dimension used by order-based specs."""

    kappa: Generator
    tau: Generator
    rho: Generator
    nu: Generator
    dimension: int = 1
    k_max: int = 10 ** 6

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        declared = [g.k_max() for g in (self.kappa, self.tau, self.rho, self.nu)]
        bound = min([self.k_max] + [d for d in declared if d is not None])
        object.__setattr__(self, "k_max", int(bound))

    def generators(self):
        return {"kappa": self.kappa, "tau": self.tau, "rho": self.rho, "nu": self.nu}

    def to_config(self):
        cfg = {name: g.to_config() for name, g in self.generators().items()}
        cfg["dimension"] = self.dimension
        return cfg


@dataclass(frozen=True)
class ModelParams:
    theta1: float
    theta2: float
    theta1_box: tuple
    theta2_box: tuple
    T: float

    def __post_init__(self):
        for name, th, box in (
            ("theta1", self.theta1, self.theta1_box),
            ("theta2", self.theta2, self.theta2_box),
        ):
            lo, hi = box
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValueError(f"{name}_box must be a finite interval [lo, hi]")
            if not (lo <= th <= hi):
                raise ValueError(f"{name}={th} lies outside its box {box}")
        if not self.T > 0.0:
            raise ValueError("T must be positive")


# ---------------------------------------------------------------------------
# Pointwise evaluation
# ---------------------------------------------------------------------------


def eigenvalues(spec, k):
    """(kappa_k, tau_k, rho_k, nu_k) as floats; overflow saturates to +-inf."""
    if k > spec.k_max:
        raise ValueError(f"k={k} exceeds the declared k_max={spec.k_max}")
    return tuple(g.value(k) for g in (spec.kappa, spec.tau, spec.rho, spec.nu))


def lambda_mu_slog(spec, theta1, theta2, k):
    """((sign, log|lambda_k|), mu_k) with lambda in log form and mu as a float."""
    sk, lk = spec.kappa.slog(k)
    st, lt = spec.tau.slog(k)
    st, lt = slog_scale(st, lt, theta1)
    s_lam, l_lam = slog_add(sk, lk, st, lt)

    sr, lr = spec.rho.slog(k)
    sn, ln_ = spec.nu.slog(k)
    with np.errstate(over="ignore"):
        rho = sr * np.exp(lr) if lr > _NEG_INF else 0.0
        nu = sn * np.exp(ln_) if ln_ > _NEG_INF else 0.0
    return (float(s_lam), float(l_lam)), float(rho + theta2 * nu)


def lambda_mu(spec, theta1, theta2, k):
    """(lambda_k, mu_k) as floats; exact direct arithmetic within the float range."""
    kap = spec.kappa.value(k)
    tau = spec.tau.value(k)
    if math.isfinite(kap) and math.isfinite(tau):
        lam = kap + theta1 * tau
        if math.isfinite(lam):
            rho = spec.rho.value(k)
            nu = spec.nu.value(k)
            return lam, rho + theta2 * nu
    (s, l), mu = lambda_mu_slog(spec, theta1, theta2, k)
    with np.errstate(over="ignore"):
        lam = s * np.exp(l) if l > _NEG_INF else 0.0
    return float(lam), mu


def _lambda_slog_arrays(spec, theta, ks):
    sk, lk = spec.kappa.slog_array(ks)
    st, lt = spec.tau.slog_array(ks)
    st, lt = slog_scale(st, lt, theta)
    return slog_add(sk, lk, st, lt)


def _mu_arrays(spec, theta, ks):
    sr, lr = spec.rho.slog_array(ks)
    sn, ln_ = spec.nu.slog_array(ks)
    with np.errstate(over="ignore"):
        rho = np.where(sr == 0.0, 0.0, sr * np.exp(lr))
        nu = np.where(sn == 0.0, 0.0, sn * np.exp(ln_))
    return rho + theta * nu


# ---------------------------------------------------------------------------
# Condition reports
# ---------------------------------------------------------------------------

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class ConditionReport:
    hyperbolic: str
    witnesses: list = field(default_factory=list)
    checked_range: tuple = (1, 0)
    constants_used: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "hyperbolic": self.hyperbolic,
            "witnesses": [list(w) for w in self.witnesses],
            "checked_range": list(self.checked_range),
            "constants_used": dict(self.constants_used),
            "notes": list(self.notes),
        }


def _theta_grid(box, resolution):
    lo, hi = box
    if resolution < 2 or lo == hi:
        return np.unique(np.array([lo, hi]))
    return np.unique(np.concatenate([np.linspace(lo, hi, resolution), [lo, hi]]))


_CSTAR_GRID = [0.0] + [2.0 ** p for p in range(0, 21)]


def check_hyperbolic(spec, params, k_range=(1, 1000), theta_grid_resolution=5, constants=None):
    """Empirical verification of the hyperbolicity conditions on a k-range.

    Searches a coarse grid plus bisection for the smallest shift C* making
    every lambda_k(theta) + C* positive, checks monotone growth and the
    theta-uniform ratio bounds, then fits C, J for the damping-domination
    inequality T*mu_k <= ln(lambda_k) + C.  `constants` may pin (C_star, C, J)
    to re-evaluate a previous verdict on a different range.
    """
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    if k_lo < 1 or k_hi < k_lo:
        raise ValueError("k_range must satisfy 1 <= k_lo <= k_hi")
    k_hi = min(k_hi, spec.k_max)
    lo1, hi1 = params.theta1_box
    if lo1 > hi1 or params.theta2_box[0] > params.theta2_box[1]:
        raise ValueError("degenerate theta box (lo > hi)")
    ks = np.arange(k_lo, k_hi + 1)
    t1_grid = _theta_grid(params.theta1_box, theta_grid_resolution)
    t2_corners = np.array(params.theta2_box)

    report = ConditionReport(PASS, checked_range=(k_lo, k_hi))
    witnesses = report.witnesses

    # lambda arrays per theta1 grid point (affine in theta, corners are extreme)
    lam_signs, lam_logs = {}, {}
    for th in t1_grid:
        s, l = _lambda_slog_arrays(spec, th, ks)
        lam_signs[th], lam_logs[th] = s, l

    # --- part 1a: positivity under the smallest workable shift C* -------------
    if constants is not None and "C_star" in constants:
        c_star = float(constants["C_star"])
    else:
        c_star = None
        for cand in _CSTAR_GRID:
            if _positive_under_shift(lam_signs, lam_logs, cand):
                c_star = cand
                break
        if c_star is None:
            worst = _most_negative(lam_signs, lam_logs, t1_grid, ks)
            report.hyperbolic = FAIL
            witnesses.append((int(worst[0]), float(worst[1]), "lambda_k + C* <= 0 for all C* on the search grid"))
            report.constants_used = {"C_star": math.inf, "C": math.nan, "J": -1}
            return report
        if c_star > 0.0:
            lo_c = _CSTAR_GRID[max(_CSTAR_GRID.index(c_star) - 1, 0)]
            for _ in range(40):
                mid = 0.5 * (lo_c + c_star)
                if _positive_under_shift(lam_signs, lam_logs, mid):
                    c_star = mid
                else:
                    lo_c = mid
    if not _positive_under_shift(lam_signs, lam_logs, c_star):
        report.hyperbolic = FAIL
        worst = _most_negative(lam_signs, lam_logs, t1_grid, ks)
        witnesses.append((int(worst[0]), float(worst[1]), f"lambda_k + C* <= 0 at C*={c_star:g}"))

    # --- part 1b: non-decreasing and unbounded (shift-independent) ------------
    decile = max(1, (k_hi - k_lo + 1) // 10)
    for th in t1_grid:
        lam = _shifted_values(lam_signs[th], lam_logs[th], c_star)
        drops = np.nonzero(lam[1:] < lam[:-1] * (1.0 - 1e-12))[0]
        if drops.size:
            only_tail = drops.min() >= len(lam) - 1 - decile
            verdict = INCONCLUSIVE if only_tail else FAIL
            if report.hyperbolic == PASS:
                report.hyperbolic = verdict
            elif verdict == FAIL:
                report.hyperbolic = FAIL
            k_bad = int(ks[drops[0] + 1])
            witnesses.append((k_bad, float(th), "lambda_k(theta) + C* not non-decreasing"))
        if lam[-1] <= lam[0] * (1.0 + 1e-9) + 1e-9:
            report.hyperbolic = FAIL
            witnesses.append((int(ks[-1]), float(th), "lambda_k(theta) shows no growth on the range (bounded?)"))

    # --- part 1c: theta-uniform comparability (corner ratios) -----------------
    corners = [params.theta1_box[0], params.theta1_box[1]]
    s_a, l_a = lam_signs[corners[0]], lam_logs[corners[0]]
    s_b, l_b = lam_signs[corners[1]], lam_logs[corners[1]]
    la = _shifted_values(s_a, l_a, c_star)
    lb = _shifted_values(s_b, l_b, c_star)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = la / lb
    finite = np.isfinite(ratio) & (ratio > 0.0)
    if not np.all(finite):
        k_bad = int(ks[np.argmin(finite)])
        report.hyperbolic = FAIL
        witnesses.append((k_bad, tuple(corners), "ratio lambda(theta)/lambda(theta') not positive-finite"))
        c1 = c2 = math.nan
    else:
        c1, c2 = float(ratio.min()), float(ratio.max())
        tail = ratio[-decile:]
        head = ratio[:-decile] if len(ratio) > decile else ratio
        if tail.max() > head.max() * 4.0 or tail.min() < head.min() / 4.0:
            if report.hyperbolic == PASS:
                report.hyperbolic = INCONCLUSIVE
            report.notes.append("theta-ratio still drifting in the last decile")

    # --- part 2: T mu_k <= ln lambda_k + C beyond some J -----------------------
    mu_hi = np.maximum(_mu_arrays(spec, params.theta2_box[0], ks), _mu_arrays(spec, params.theta2_box[1], ks))
    log_lam_min = np.minimum.reduce([lam_logs[th] for th in corners])  # lambda > 0 needed
    sign_min = np.minimum.reduce([lam_signs[th] for th in corners])
    g = params.T * mu_hi - np.where(sign_min > 0.0, log_lam_min, -np.inf)

    if constants is not None and "J" in constants:
        j_idx = max(int(constants["J"]) - k_lo, 0)
    else:
        pos = np.nonzero(~((sign_min > 0.0) & (log_lam_min > 0.0)))[0]  # lambda <= 1 region
        j_idx = int(pos.max() + 1) if pos.size else 0
        if j_idx >= len(ks):
            report.hyperbolic = FAIL
            witnesses.append((int(ks[-1]), None, "lambda_k <= 1 through the whole range"))
            report.constants_used = {"C_star": c_star, "C": math.nan, "J": int(ks[-1])}
            return report
    J = int(ks[j_idx])
    g_tail = g[j_idx:]
    ks_tail = ks[j_idx:]

    if constants is not None and "C" in constants:
        C = float(constants["C"])
        bad = np.nonzero(g_tail > C + 1e-9)[0]
        if bad.size:
            report.hyperbolic = FAIL
            for i in bad[:5]:
                witnesses.append((int(ks_tail[i]), None, f"T*mu_k > ln(lambda_k) + C with C={C:g}"))
    else:
        head_len = max(1, int(0.9 * len(g_tail)))
        c_head = float(np.max(g_tail[:head_len]))
        C = max(0.0, float(np.max(g_tail)))
        rise = float(np.max(g_tail[head_len:])) - c_head if head_len < len(g_tail) else 0.0
        if rise > 0.1:
            half = g_tail[len(g_tail) // 2 :]
            upticks = np.count_nonzero(np.diff(half) > 0.0)
            trending_up = upticks >= 0.6 * max(len(half) - 1, 1)
            bad = np.nonzero(g_tail > c_head + 1e-9)[0]
            if trending_up:
                report.hyperbolic = FAIL
                for i in bad[:5]:
                    witnesses.append(
                        (int(ks_tail[i]), None, f"T*mu_k > ln(lambda_k) + C with fitted C={c_head:g}")
                    )
                C = c_head
            else:
                if report.hyperbolic == PASS:
                    report.hyperbolic = INCONCLUSIVE
                report.notes.append("damping-domination bound still rising in the last decile")

    report.constants_used = {"C_star": float(c_star), "C": float(C), "J": J, "c1": c1, "c2": c2}
    return report


def _positive_under_shift(lam_signs, lam_logs, shift):
    for th, s in lam_signs.items():
        vals = _shifted_values(s, lam_logs[th], shift)
        if not np.all(vals > 0.0):
            return False
    return True


def _shifted_values(signs, logs, shift):
    # saturating at e^700 keeps order comparisons meaningful past the float range
    vals = signs * np.exp(np.minimum(logs, 700.0))
    return np.where(signs == 0.0, 0.0, vals) + shift


def _most_negative(lam_signs, lam_logs, t1_grid, ks):
    worst = (int(ks[0]), float(t1_grid[0]))
    worst_val = math.inf
    for th in t1_grid:
        vals = _shifted_values(lam_signs[th], lam_logs[th], 0.0)
        i = int(np.argmin(vals))
        if vals[i] < worst_val:
            worst_val = vals[i]
            worst = (int(ks[i]), float(th))
    return worst


def verify_lower_bound_props(spec, params, k_range=(1, 1000)):
    """Fitted J with lambda_k > 1 and the ratio bound |tau_k|/lambda_k <= c0 beyond it."""
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    ks = np.arange(k_lo, min(k_hi, spec.k_max) + 1)
    corners = [params.theta1_box[0], params.theta1_box[1]]
    report = ConditionReport(PASS, checked_range=(k_lo, int(ks[-1])))

    log_lam = {}
    for th in corners:
        s, l = _lambda_slog_arrays(spec, th, ks)
        if not np.all(s > 0.0):
            bad = int(ks[np.argmin(s)])
            report.hyperbolic = FAIL
            report.witnesses.append((bad, float(th), "lambda_k <= 0"))
            return report
        log_lam[th] = l
    log_lam_min = np.minimum(log_lam[corners[0]], log_lam[corners[1]])

    above_one = log_lam_min > 0.0
    if not above_one.any():
        report.hyperbolic = FAIL
        report.witnesses.append((int(ks[-1]), None, "lambda_k <= 1 on the whole range"))
        return report
    first_ok = int(np.argmax(above_one))
    if not np.all(above_one[first_ok:]):
        bad = int(ks[first_ok + int(np.argmin(above_one[first_ok:]))])
        report.hyperbolic = FAIL
        report.witnesses.append((bad, None, "lambda_k dips back below 1"))
        return report
    J = int(ks[first_ok])

    _, log_tau = spec.tau.slog_array(ks)
    log_ratio = log_tau - log_lam_min  # log(|tau|/lambda) at the worst corner
    tail = ks >= J
    with np.errstate(over="ignore"):
        ratios = np.exp(log_ratio[tail])
    c0 = float(np.max(ratios))
    decile = max(1, int(0.1 * np.count_nonzero(tail)))
    head_max = float(np.max(ratios[:-decile])) if np.count_nonzero(tail) > decile else c0
    if c0 > head_max * (1.0 + 1e-6) and c0 > 2.0 * head_max:
        report.hyperbolic = INCONCLUSIVE
        report.notes.append("|tau|/lambda still growing at the range end")
    report.constants_used = {"J": J, "c0": c0}
    return report


# ---------------------------------------------------------------------------
# Algebraic classification
# ---------------------------------------------------------------------------


class NonAlgebraicSpectrumError(ValueError):
    """Raised when a sequence has no eventual sign or no power-law structure."""


@dataclass(frozen=True)
class AlgebraicClass:
    alpha: float
    alpha1: float
    beta: float
    beta1: float
    fit_quality: float


def _power_exponent_exact(gen):
    """Exponent when the generator is a pure power law (or constant), else None."""
    if isinstance(gen, PowerLaw):
        return gen.exponent if gen.coefficient != 0.0 else None
    if isinstance(gen, Constant):
        return 0.0 if gen.coefficient != 0.0 else None
    return None


def _fit_log_slope(ks, logs):
    """Least squares slope of log|value| against log k; returns (slope, max residual)."""
    x = np.log(ks)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    resid = logs - A @ coef
    return float(coef[0]), float(np.max(np.abs(resid)))


def _sequence_exponent(signs, logs, ks, what):
    if np.any(signs == 0.0):
        return None, 0.0  # identically-zero entries: caller decides
    if np.any(signs[:-1] * signs[1:] < 0.0):
        raise NonAlgebraicSpectrumError(f"{what} oscillates in sign; classification refused")
    slope, resid = _fit_log_slope(ks, logs)
    if resid > 0.5:
        raise NonAlgebraicSpectrumError(
            f"{what} is far from a power law (log-log fit residual {resid:.2f})"
        )
    return slope, resid


def classify_algebraic(spec, params, k_range=(1, 1000)):
    """(alpha, alpha1, beta, beta1) exponents, exact for power-law generators.

    lambda and mu are examined at the corners of the theta boxes; beta = 0
    encodes a bounded dissipation sequence.
    """
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    k_hi = min(k_hi, spec.k_max)
    upper = np.arange(max(k_lo, (k_lo + k_hi) // 2), k_hi + 1)
    fit_quality = 0.0

    # |tau|: exact exponent where possible
    a1 = _power_exponent_exact(spec.tau)
    if a1 is None:
        s, l = spec.tau.slog_array(upper)
        if np.all(s == 0.0):
            a1 = -math.inf  # tau identically zero: no theta1 information at all
        else:
            a1, q = _sequence_exponent(s, l, upper, "tau")
            fit_quality = max(fit_quality, q)

    # lambda exponents per corner must agree
    alphas = []
    ek = _power_exponent_exact(spec.kappa)
    et = _power_exponent_exact(spec.tau)
    for th in params.theta1_box:
        exact = _affine_power_exponent(spec.kappa, spec.tau, ek, et, th)
        if exact is not None:
            alphas.append(exact)
            continue
        s, l = _lambda_slog_arrays(spec, th, upper)
        val, q = _sequence_exponent(s, l, upper, "lambda")
        if val is None:
            raise NonAlgebraicSpectrumError("lambda vanishes on the fit range")
        alphas.append(val)
        fit_quality = max(fit_quality, q)
    if max(alphas) - min(alphas) > 0.05:
        raise NonAlgebraicSpectrumError(
            f"lambda exponent is not theta-uniform over the box: {alphas}"
        )
    alpha = float(np.mean(alphas))

    # |nu|
    b1 = _power_exponent_exact(spec.nu)
    if b1 is None:
        s, l = spec.nu.slog_array(upper)
        if np.all(s == 0.0):
            b1 = -math.inf
        else:
            b1, q = _sequence_exponent(s, l, upper, "nu")
            fit_quality = max(fit_quality, q)

    # mu: bounded (beta = 0) or -mu ~ k^beta; exact when rho, nu are power laws
    exact_mu = [_affine_power_lead(spec.rho, spec.nu, th) for th in params.theta2_box]
    if all(r is not None for r in exact_mu) or all(
        isinstance(g, (PowerLaw, Constant)) and g.coefficient == 0.0 for g in (spec.rho, spec.nu)
    ):
        if any(r is None for r in exact_mu):  # rho = nu = 0: mu identically zero
            beta = 0.0
        else:
            exps = {r[0] for r in exact_mu}
            if len(exps) > 1:
                raise NonAlgebraicSpectrumError(f"mu exponent not theta-uniform: {exact_mu}")
            exp = exps.pop()
            if exp <= 0.0:
                beta = 0.0  # bounded dissipation/amplification
            elif all(r[1] < 0.0 for r in exact_mu):
                beta = exp
            else:
                raise NonAlgebraicSpectrumError(
                    "unbounded mu must be eventually negative for an algebraic class"
                )
    else:
        mus = {th: _mu_arrays(spec, th, upper) for th in params.theta2_box}
        max_abs = max(float(np.max(np.abs(m))) for m in mus.values())
        half = max(1, len(upper) // 2)
        max_abs_head = max(float(np.max(np.abs(m[:half]))) for m in mus.values())
        if max_abs <= max(1e-12, max_abs_head) * 1.02:
            beta = 0.0
        else:
            betas = []
            for th, m in mus.items():
                if np.any(m >= 0.0):
                    raise NonAlgebraicSpectrumError(
                        "unbounded mu must be eventually negative for an algebraic class"
                    )
                slope, q = _fit_log_slope(upper, np.log(-m))
                betas.append(slope)
                fit_quality = max(fit_quality, q)
            if max(betas) - min(betas) > 0.05:
                raise NonAlgebraicSpectrumError(f"mu exponent not theta-uniform: {betas}")
            beta = float(np.mean(betas))
            if beta <= 0.0:
                beta = 0.0
    return AlgebraicClass(alpha, a1, beta, b1, fit_quality)


def _affine_power_lead(gen_a, gen_b, theta):
    """(exponent, leading coefficient) of a + theta*b for pure power-law generators.

    Returns None when either generator is not a power law / constant, when the
    combination vanishes, or when the leading term cancels exactly.
    """
    def _ce(gen):
        if isinstance(gen, PowerLaw):
            return gen.coefficient, gen.exponent
        if isinstance(gen, Constant):
            return gen.coefficient, 0.0
        return None

    a = _ce(gen_a)
    b = _ce(gen_b)
    if a is None or b is None:
        return None
    terms = [(e, c) for e, c in [(a[1], a[0]), (b[1], b[0] * theta)] if c != 0.0]
    if not terms:
        return None
    top = max(e for e, _ in terms)
    lead = sum(c for e, c in terms if e == top)
    if lead == 0.0:
        return None  # exact cancellation of the leading term: fall back to fitting
    return top, lead


def _affine_power_exponent(gen_a, gen_b, ea, eb, theta):
    r = _affine_power_lead(gen_a, gen_b, theta)
    return None if r is None else r[0]


def consistency_conditions(cls):
    """Summand growth exponents and the two order conditions.

    gamma1 = 2*alpha1 - alpha - beta   (theta1 estimable iff gamma1 >= -1)
    gamma2 = 2*beta1 - beta            (theta2 estimable iff gamma2 >= -1)
    gamma12 = alpha1 - alpha + beta1 - beta
    """
    g1 = 2.0 * cls.alpha1 - cls.alpha - cls.beta
    g2 = 2.0 * cls.beta1 - cls.beta
    g12 = cls.alpha1 - cls.alpha + cls.beta1 - cls.beta
    return {
        "gamma1": g1,
        "gamma2": g2,
        "gamma12": g12,
        "theta1_ok": bool(g1 >= -1.0),
        "theta2_ok": bool(g2 >= -1.0),
    }


# ---------------------------------------------------------------------------
# Slowly increasing sequences (general, non-algebraic case)
# ---------------------------------------------------------------------------


def _ratio_curve_from_logs(log_a, ks):
    num = log_cumsum_exp(2.0 * log_a)
    den = 2.0 * log_cumsum_exp(log_a)
    return np.exp(num - den)


def _slow_verdict(r, ks, pass_threshold, slope_tol):
    decile = max(4, len(ks) // 10)
    x = np.log(ks[-decile:].astype(float))
    y = np.log(r[-decile:])
    A = np.vstack([x, np.ones_like(x)]).T
    slope = float(np.linalg.lstsq(A, y, rcond=None)[0][0])
    r_end = float(r[-1])
    if r_end < pass_threshold and slope <= slope_tol:
        return "pass", slope
    if r_end >= pass_threshold and slope >= -slope_tol:
        return "fail", slope
    return "inconclusive", slope


def slowly_increasing_test(seq, n_max=None, pass_threshold=0.05, slope_tol=0.01):
    """r_n = sum a_k^2 / (sum a_k)^2 with a trilean verdict on its tail behavior.

    seq may be an array of positive values or a callable k -> a_k.  The curve
    is computed in log space, so values like e^sqrt(k) are fine far past the
    float overflow point of a_k^2.
    """
    if callable(seq):
        if n_max is None:
            raise ValueError("n_max is required when seq is a callable")
        vals = np.array([seq(k) for k in range(1, n_max + 1)], dtype=float)
    else:
        vals = np.asarray(seq, dtype=float)
        if n_max is not None:
            vals = vals[:n_max]
    if vals.size < 10:
        raise ValueError("need at least 10 terms")
    if np.any(~(vals > 0.0)):
        raise ValueError("sequence must be strictly positive")
    ks = np.arange(1, len(vals) + 1)
    r = _ratio_curve_from_logs(np.log(vals), ks)
    verdict, slope = _slow_verdict(r, ks, pass_threshold, slope_tol)
    return {
        "ratio_curve": np.column_stack([ks, r]),
        "verdict": verdict,
        "tail_slope": slope,
    }


def _slowly_increasing_log(log_vals, pass_threshold=0.05, slope_tol=0.01):
    ks = np.arange(1, len(log_vals) + 1)
    r = _ratio_curve_from_logs(np.asarray(log_vals, dtype=float), ks)
    verdict, slope = _slow_verdict(r, ks, pass_threshold, slope_tol)
    return {"ratio_curve": np.column_stack([ks, r]), "verdict": verdict, "tail_slope": slope}


def conditions_1_2(spec, params, n_max=1000):
    """Weak-law conditions for estimability when the eigenvalues are not power laws.

    Condition 1: tau_k^2 M(T mu_k) / lambda_k slowly increasing (theta1).
    Condition 2: nu_k^2 M(T mu_k) slowly increasing (theta2).
    Both sequences are evaluated at the true theta, in log space.
    """
    n_max = min(n_max, spec.k_max)
    log_c1 = np.empty(n_max)
    log_c2 = np.empty(n_max)
    for i, k in enumerate(range(1, n_max + 1)):
        (s_lam, l_lam), mu = lambda_mu_slog(spec, params.theta1, params.theta2, k)
        if s_lam <= 0.0:
            raise ValueError(f"conditions require lambda_k > 0; mode {k} fails")
        m_log = m_func_log(params.T * mu)
        s_tau, l_tau = spec.tau.slog(k)
        s_nu, l_nu = spec.nu.slog(k)
        log_c1[i] = (2.0 * l_tau - l_lam + m_log) if l_tau > -math.inf else -math.inf
        log_c2[i] = (2.0 * l_nu + m_log) if l_nu > -math.inf else -math.inf

    res1 = _slowly_increasing_log(log_c1) if np.all(np.isfinite(log_c1)) else {"verdict": "fail", "ratio_curve": None, "tail_slope": math.nan}
    res2 = _slowly_increasing_log(log_c2) if np.all(np.isfinite(log_c2)) else {"verdict": "fail", "ratio_curve": None, "tail_slope": math.nan}
    return {"cond1": res1["verdict"], "cond2": res2["verdict"], "curve1": res1["ratio_curve"], "curve2": res2["ratio_curve"]}
