"""Closed-form outage analysis for the block transmission scheme.

Everything here is a pure function of the information constants and the
scheme parameters (arrival rate, normalized code rate, packet count,
asynchrony window, decoder mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .channel import InfoQuantities

__all__ = [
    "TIN",
    "DI",
    "SchemeParams",
    "OutageInputs",
    "Interval",
    "AnalysisError",
    "InfeasibleRate",
    "rho",
    "kappa",
    "delta_cdf",
    "admissible_intervals",
    "rate_feasibility_interval",
    "feasible_rate_interval",
    "r0",
    "outage_ub_finite_n",
    "outage_ub_numeric_oracle",
    "outage_ub_limit",
    "outage_inputs",
    "epsilon_bound",
    "epsilon_gaussian_tin",
    "epsilon_gaussian_di",
    "outage_ub_subunit_rate",
    "avg_rate",
    "outage_ub_one_packet",
    "outage_ub_two_packets",
]

TIN = "tin"
DI = "di"

# Numerical equality threshold for the additive-channel special case C* == C_cross.
_ADDITIVE_TOL = 1e-9


class AnalysisError(ValueError):
    pass


class InfeasibleRate(Exception):
    """No normalized code rate r > 1 satisfies the scheme's feasibility predicate."""


@dataclass(frozen=True)
class SchemeParams:
    lam: float            # arrival rate, bits/slot
    r: float              # normalized code rate R_c / lam
    n_packets: int
    d_max: float          # asynchrony window D
    decoder: tuple[str, str] = (TIN, TIN)

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise AnalysisError("arrival rate must be in (0, 1]")
        if self.r <= 0:
            raise AnalysisError("normalized code rate must be positive")
        if self.n_packets < 1:
            raise AnalysisError("need at least one packet")
        if self.d_max <= 0:
            raise AnalysisError("asynchrony window must be positive")
        dec = self.decoder
        if isinstance(dec, str):
            dec = (dec, dec)
            object.__setattr__(self, "decoder", dec)
        if any(m not in (TIN, DI) for m in dec):
            raise AnalysisError(f"unknown decoder mode in {dec}")

    @property
    def code_rate(self) -> float:
        return self.r * self.lam

    @property
    def alpha(self) -> float:
        return self.lam * self.d_max


@dataclass(frozen=True)
class Interval:
    """Open interval on the real line; ``unbounded`` means (lo, inf)."""

    lo: float
    hi: float = math.inf
    unbounded: bool = False

    @classmethod
    def empty(cls) -> "Interval":
        return cls(lo=0.0, hi=0.0)

    @property
    def is_empty(self) -> bool:
        return not self.unbounded and self.lo >= self.hi

    def contains(self, x: float) -> bool:
        if self.is_empty:
            return False
        return x > self.lo and (self.unbounded or x < self.hi)

    def intersect(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return Interval.empty()
        lo = max(self.lo, other.lo)
        if self.unbounded and other.unbounded:
            return Interval(lo, unbounded=True)
        hi = min(math.inf if self.unbounded else self.hi,
                 math.inf if other.unbounded else other.hi)
        if lo >= hi:
            return Interval.empty()
        return Interval(lo, hi)


class RhoValue(NamedTuple):
    value: float
    r_cap: float | None   # extra feasibility cap r < r_cap (additive DI case)


def rho(info: InfoQuantities, user: int, r: float, lam: float, mode: str) -> RhoValue:
    """Interference-exposure fraction rho_i(r) plus any extra rate cap.

    TIN uses the (lam*r - C_i)/(C_i* - C_i) ratio.  DI takes the maximum of
    the own-signal and interferer-signal ratios; when the channel is additive
    (C_i* == C_{i,i'}) the own-signal ratio degenerates and is replaced by the
    hard cap r < C_i*/lam.
    """
    if r <= 0:
        raise AnalysisError("r must be positive")
    c_star, c, c_cross, ct_star, ct = info.for_user(user)
    if mode == TIN:
        denom = c_star - c
        if denom <= 0:
            raise AnalysisError(
                f"user {user}: nonpositive denominator C*-C = {denom:.3e}"
            )
        return RhoValue((lam * r - c) / denom, None)
    if mode != DI:
        raise AnalysisError(f"unknown decoder mode {mode!r}")
    t_denom = ct_star - ct
    if t_denom <= 0:
        raise AnalysisError(
            f"user {user}: nonpositive denominator C~*-C~ = {t_denom:.3e}"
        )
    tilde_ratio = (lam * r - ct) / t_denom
    if abs(c_star - c_cross) < _ADDITIVE_TOL:
        return RhoValue(tilde_ratio, c_star / lam)
    denom = c_star - c_cross
    if denom <= 0:
        raise AnalysisError(
            f"user {user}: nonpositive denominator C*-C_cross = {denom:.3e}"
        )
    return RhoValue(max((lam * r - c_cross) / denom, tilde_ratio), None)


def kappa(alpha: float) -> float:
    """Asynchrony-window factor: 2 for alpha < 1, else (2/alpha)(2 - 1/alpha)."""
    if alpha <= 0:
        raise AnalysisError("alpha must be positive")
    if alpha < 1.0:
        return 2.0
    return (2.0 / alpha) * (2.0 - 1.0 / alpha)


def delta_cdf(delta: float, d_max: float) -> float:
    """CDF of the asynchrony |d1 - d2| for d_i ~ U[0, D]."""
    if d_max <= 0:
        raise AnalysisError("d_max must be positive")
    if delta < 0:
        return 0.0
    if delta >= d_max:
        return 1.0
    u = delta / d_max
    return u * (2.0 - u)


def admissible_intervals(r: float, rho_i: float, n_packets: int) -> list[Interval]:
    """Per-packet ranges of normalized asynchrony that keep every codeword clean.

    The first n_packets - 1 intervals are bounded; the last extends to
    infinity.  Bounded entries invert to the empty interval when
    2*rho_i >= r.
    """
    if r <= 1:
        raise AnalysisError("admissible intervals are defined for r > 1")
    out = []
    for j in range(1, n_packets):
        lo = (j - 1) * r + rho_i
        hi = j * r - rho_i
        out.append(Interval(lo, hi) if lo < hi else Interval.empty())
    out.append(Interval((n_packets - 1) * r + rho_i, unbounded=True))
    return out


def rate_feasibility_interval(a: float, b: float, lam: float) -> Interval:
    """Solution in r > 1 of (lam*r - b)/(a - b) < min(1, r - 1) for a > b > 0."""
    if not a > b > 0:
        raise AnalysisError(f"need a > b > 0, got a={a}, b={b}")
    below_b = lam < b
    below_half_a = lam < a / 2.0
    if below_b and below_half_a:
        return Interval(1.0, a / lam)
    if below_b and not below_half_a:
        return Interval(1.0, (a - 2.0 * b) / (a - b - lam))
    if not below_b and below_half_a:
        return Interval((a - 2.0 * b) / (a - b - lam), a / lam)
    return Interval.empty()


def feasible_rate_interval(info: InfoQuantities, user: int, lam: float, mode: str) -> Interval:
    """Set of r > 1 with rho_i(r) < min(1, r-1) (and the additive DI cap)."""
    c_star, c, c_cross, ct_star, ct = info.for_user(user)
    if mode == TIN:
        return rate_feasibility_interval(c_star, c, lam)
    if mode != DI:
        raise AnalysisError(f"unknown decoder mode {mode!r}")
    tilde = rate_feasibility_interval(ct_star, ct, lam)
    if abs(c_star - c_cross) < _ADDITIVE_TOL:
        return tilde.intersect(Interval(1.0, c_star / lam))
    return tilde.intersect(rate_feasibility_interval(c_star, c_cross, lam))


def _modes(mode) -> tuple[str, str]:
    return (mode, mode) if isinstance(mode, str) else tuple(mode)


def r0(info: InfoQuantities, lam: float, d_max: float, mode) -> float:
    """Smallest feasible normalized code rate r > 1 for both users.

    Computed by intersecting the per-user feasible intervals; cross-checked
    by bisection on the raw predicate.  Raises InfeasibleRate when the
    intersection is empty.
    """
    m1, m2 = _modes(mode)
    window = feasible_rate_interval(info, 1, lam, m1).intersect(
        feasible_rate_interval(info, 2, lam, m2)
    )
    if window.is_empty:
        raise InfeasibleRate(
            f"no r > 1 satisfies both users' constraints at lambda={lam}"
        )
    analytic = window.lo

    def predicate(r: float) -> bool:
        for user, m in ((1, m1), (2, m2)):
            value, cap = rho(info, user, r, lam, m)
            if value >= min(1.0, r - 1.0):
                return False
            if cap is not None and r >= cap:
                return False
        return True

    hi = window.hi if not window.unbounded else window.lo + 10.0
    probe = min(analytic + 1e-6, (analytic + hi) / 2.0) if hi > analytic else analytic
    if analytic > 1.0 and predicate(probe):
        lo_b, hi_b = 1.0, probe
        while hi_b - lo_b > 1e-12:
            mid = (lo_b + hi_b) / 2.0
            if predicate(mid):
                hi_b = mid
            else:
                lo_b = mid
        if abs(hi_b - analytic) > 1e-6:
            raise AnalysisError(
                f"r0 cross-check failed: analytic {analytic} vs bisected {hi_b}"
            )
    return analytic


class BoundValue(NamedTuple):
    value: float
    clamped: bool


def _clamp(p: float) -> BoundValue:
    if -1e-12 <= p <= 1.0 + 1e-12:
        return BoundValue(min(max(p, 0.0), 1.0), False)
    return BoundValue(p, True)


def outage_ub_finite_n(
    alpha: float, beta: float, n_packets: int, chi1: bool, chi2: bool
) -> BoundValue:
    """Finite-N closed form for the outage upper bound of one user.

    ``beta`` is rho_i(r)/r; ``alpha`` is lam*D.  ``beta == 0`` is accepted
    (the formulas are continuous there); negative beta is the caller's
    zero-outage path and is rejected.
    """
    if alpha <= 0:
        raise AnalysisError("alpha must be positive")
    if beta < 0:
        raise AnalysisError("rho_i <= 0 means zero outage; closed form not applicable")
    if n_packets < 1:
        raise AnalysisError("need at least one packet")
    n = n_packets
    na = n * alpha
    m = math.ceil(na - beta)
    x1 = 1.0 if chi1 else 0.0
    x2 = 1.0 if chi2 else 0.0
    if m >= n:
        p = (
            1.0
            - (1.0 - 2.0 * beta) * (2.0 - (n - 1) / na) * ((n - 1) / na) * x1
            - (1.0 - (n - 1 + beta) / na) ** 2 * x2
        )
    elif m == 0 or m <= na + beta:
        p = 1.0 - (1.0 - 2.0 * beta) * (2.0 - m / na) * (m / na) * x1
    else:
        # The interval straddling the window edge contributes (1 - u_m)^2 to
        # the success mass, so it is subtracted along with the telescoped sum;
        # continuity at m = N*alpha + beta pins the sign.
        p = (
            1.0
            - (
                (1.0 - 2.0 * beta) * (2.0 - (m - 1) / na) * ((m - 1) / na)
                + (1.0 - (m - 1 + beta) / na) ** 2
            )
            * x1
        )
    return _clamp(p)


def outage_ub_numeric_oracle(
    r: float,
    rho_i: float,
    n_packets: int,
    lam: float,
    d_max: float,
    chi1: bool,
    chi2: bool,
) -> float:
    """Interval-sum evaluation of the same bound, used to cross-check the
    closed form: one CDF difference per admissible interval."""
    theta = 1.0 / (n_packets * r * lam)
    intervals = admissible_intervals(r, rho_i, n_packets)
    mass_union = 0.0
    for iv in intervals[:-1]:
        if not iv.is_empty:
            mass_union += delta_cdf(theta * iv.hi, d_max) - delta_cdf(
                theta * iv.lo, d_max
            )
    tail = 1.0 - delta_cdf(theta * intervals[-1].lo, d_max)
    p = 1.0
    if chi1:
        p -= mass_union
    if chi2:
        p -= tail
    return p


def outage_ub_limit(alpha: float, beta: float, chi1: bool, chi2: bool) -> float:
    """N -> infinity limit of the finite-N bound; equals kappa*beta when chi1 holds."""
    if alpha <= 0:
        raise AnalysisError("alpha must be positive")
    if beta < 0:
        raise AnalysisError("negative beta has no outage limit; use the zero path")
    x1 = 1.0 if chi1 else 0.0
    x2 = 1.0 if chi2 else 0.0
    if alpha < 1.0:
        return 1.0 - (1.0 - 2.0 * beta) * x1
    return (
        1.0
        - (1.0 / alpha) * (2.0 - 1.0 / alpha) * (1.0 - 2.0 * beta) * x1
        - (1.0 - 1.0 / alpha) ** 2 * x2
    )


@dataclass(frozen=True)
class OutageInputs:
    """Derived scalars feeding the finite-N bound and the epsilon bound."""

    alpha: float
    rho: tuple[float, float]
    beta: tuple[float, float]
    kappa: float
    chi1: tuple[bool, bool]
    chi2: tuple[bool, bool]

    def __post_init__(self):
        if self.alpha <= 0:
            raise AnalysisError("alpha must be positive")
        for j in range(2):
            if self.chi1[j] and not self.chi2[j]:
                raise AnalysisError("chi1 implies chi2")
            if self.chi1[j] and not (self.beta[j] < 0.5):
                raise AnalysisError(
                    f"user {j+1}: chi1 requires beta < 1/2, got {self.beta[j]}"
                )


def outage_inputs(info: InfoQuantities, scheme: SchemeParams) -> OutageInputs:
    """Evaluate rho, beta, kappa and the chi indicators for a parameter point."""
    rhos = []
    chi1 = []
    chi2 = []
    for user in (1, 2):
        value, cap = rho(info, user, scheme.r, scheme.lam, scheme.decoder[user - 1])
        cap_ok = cap is None or scheme.r < cap
        rhos.append(value)
        chi1.append(value < min(1.0, scheme.r - 1.0) and cap_ok)
        chi2.append(value < 1.0 and cap_ok)
    return OutageInputs(
        alpha=scheme.alpha,
        rho=tuple(rhos),
        beta=tuple(v / scheme.r for v in rhos),
        kappa=kappa(scheme.alpha),
        chi1=tuple(chi1),
        chi2=tuple(chi2),
    )


@dataclass(frozen=True)
class EpsilonResult:
    kind: str             # "zero", "value" or "not-applicable"
    value: float | None = None
    r0: float | None = None
    kappa: float | None = None
    user: int | None = None    # index attaining the max in the bound
    case_label: str = ""

    @property
    def epsilon(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "value":
            return self.value
        raise AnalysisError("epsilon bound is not applicable at this point")


def epsilon_bound(
    info: InfoQuantities,
    lam: float,
    d_max: float,
    mode,
    lambda_bar_value: float | None = None,
) -> EpsilonResult:
    """Outage-level bound: zero below the decoder threshold, else
    kappa * max_i beta_i(r0)."""
    if lambda_bar_value is not None and lam > lambda_bar_value:
        raise AnalysisError(
            f"lambda={lam} exceeds converse threshold {lambda_bar_value:.4f}"
        )
    m1, m2 = _modes(mode)
    thresholds = []
    for user, m in ((1, m1), (2, m2)):
        c_star, c, c_cross, ct_star, ct = info.for_user(user)
        thresholds.append(c if m == TIN else min(c_cross, ct))
    if lam < min(thresholds):
        return EpsilonResult(kind="zero", case_label="below-threshold")
    try:
        r_inf = r0(info, lam, d_max, (m1, m2))
    except InfeasibleRate:
        return EpsilonResult(kind="not-applicable", case_label="no-feasible-rate")
    k = kappa(lam * d_max)
    betas = []
    for user, m in ((1, m1), (2, m2)):
        value, _ = rho(info, user, r_inf, lam, m)
        betas.append(value / r_inf)
    user = 1 + int(betas[1] > betas[0])
    value = k * max(betas)
    # The rho/r0 and beta forms of the bound are algebraically identical.
    alt = (k / r_inf) * max(
        rho(info, 1, r_inf, lam, m1).value, rho(info, 2, r_inf, lam, m2).value
    )
    if abs(alt - value) > 1e-9:
        raise AnalysisError("beta-form and rho-form of the bound disagree")
    return EpsilonResult(kind="value", value=value, r0=r_inf, kappa=k, user=user)


def _gaussian_ladder(
    a: tuple[float, float],
    b: tuple[float, float],
    lam: float,
    d_max: float,
    caps: tuple[float, float] | None,
) -> EpsilonResult:
    """Shared case ladder for the Gaussian closed forms.

    ``a``/``b`` are the per-user (C*, C) or (C~*, C~) pairs; ``caps`` carries
    the additive-case r < C_i*/lam bounds for the DI variant.
    """
    def lower(j):   # b_j <= lam < a_j / 2
        return b[j] <= lam < a[j] / 2.0

    def free(j):    # lam below both break points
        return lam < min(b[j], a[j] / 2.0)

    def upper(j):   # a_j / 2 <= lam < b_j
        return a[j] / 2.0 <= lam < b[j]

    def ratio(j):
        return (a[j] - 2.0 * b[j]) / (a[j] - b[j] - lam)

    def cap_value():
        return math.inf if caps is None else min(caps)

    k = kappa(lam * d_max)

    def result(j, label):
        return EpsilonResult(
            kind="value",
            value=k * (lam - b[j]) / (a[j] - 2.0 * b[j]),
            r0=ratio(j),
            kappa=k,
            user=j + 1,
            case_label=label,
        )

    for j in (0, 1):
        other = 1 - j
        if lower(j) and free(other):
            if ratio(j) < cap_value():
                return result(j, f"case1-user{j+1}")
            return EpsilonResult(kind="not-applicable", case_label="cap-exceeded")
        if lower(j) and upper(other):
            if ratio(j) < min(ratio(other), cap_value()):
                return result(j, f"case2-user{j+1}")
            return EpsilonResult(kind="not-applicable", case_label="empty-intersection")
    if lower(0) and lower(1):
        j = 0 if ratio(0) >= ratio(1) else 1
        if ratio(j) <= cap_value():
            return result(j, f"case3-user{j+1}")
        return EpsilonResult(kind="not-applicable", case_label="cap-exceeded")
    return EpsilonResult(kind="not-applicable", case_label="outside-ladder")


def epsilon_gaussian_tin(info: InfoQuantities, lam: float, d_max: float) -> EpsilonResult:
    """TIN case ladder: kappa (lam - C_i)/(C_i* - 2 C_i) for the binding user."""
    return _gaussian_ladder(info.c_star, info.c, lam, d_max, caps=None)


def epsilon_gaussian_di(info: InfoQuantities, lam: float, d_max: float) -> EpsilonResult:
    """DI case ladder on the interferer-signal constants, with the additive
    r < C_i*/lam caps."""
    caps = (info.c_star[0] / lam, info.c_star[1] / lam)
    return _gaussian_ladder(info.c_tilde_star, info.c_tilde, lam, d_max, caps=caps)


class SubunitRateBound(NamedTuple):
    finite_n: float
    limit: float


def outage_ub_subunit_rate(
    info: InfoQuantities,
    user: int,
    lam: float,
    r: float,
    n_packets: int,
    d_max: float,
) -> SubunitRateBound:
    """Outage bound for the gapless 0 < r < 1 regime (TIN decoding), plus its
    (N -> inf, r -> 1-) limit.  The limit is kappa/2 in the middle branch."""
    if not 0.0 < r < 1.0:
        raise AnalysisError("this bound applies to 0 < r < 1 only")
    c_star, c, _, _, _ = info.for_user(user)
    value = (lam * r - c) / (c_star - c)
    theta = 1.0 / (n_packets * r * lam)
    n = n_packets
    p = 1.0
    if value < 1.0:
        p -= 1.0 - delta_cdf((n - 1 + value) * theta, d_max)
    if value < 0.0:
        p -= delta_cdf((n - 1) * theta, d_max)
    if lam <= c:
        limit = 0.0
    elif lam <= c_star:
        limit = delta_cdf(1.0 / lam, d_max)
    else:
        limit = 1.0
    return SubunitRateBound(p, limit)


def avg_rate(n_packets: int, r: float, lam: float) -> float:
    """Long-run average transmission rate of the scheme."""
    if n_packets < 1 or r <= 0:
        raise AnalysisError("need n_packets >= 1 and r > 0")
    n = n_packets
    if r > 1.0:
        return n * r / (n * r + 1.0) * lam
    return n * r / (n + r) * lam


def outage_ub_one_packet(alpha: float, beta: float) -> float:
    """N=1 bound when both chi indicators hold."""
    if beta >= alpha:
        return 1.0
    u = beta / alpha
    return u * (2.0 - u)


def outage_ub_two_packets(alpha: float, beta: float) -> float:
    """N=2 bound when both chi indicators hold."""
    ta = 2.0 * alpha
    if beta >= ta:
        return 1.0
    if ta <= 1.0 - beta:
        return 1.0 - (1.0 - beta / ta) ** 2
    base = 1.0 - (1.0 - 2.0 * beta) * (2.0 - 1.0 / ta) / ta
    if ta <= 1.0 + beta:
        return base
    return base - (1.0 - (1.0 + beta) / ta) ** 2
