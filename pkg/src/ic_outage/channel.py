"""Two-user interference channel models and their mutual-information constants.

Supports finite-alphabet channels given by per-receiver transition kernels and
the scalar Gaussian interference channel with unit noise variance.  All
information quantities are in bits per channel use (log base 2).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "DiscreteIC",
    "GaussianIC",
    "InputDistribution",
    "InfoQuantities",
    "ChannelValidationError",
    "validate",
    "info_quantities",
    "gaussian_info_quantities",
    "lambda_bar",
    "lambda_thresholds",
    "load_channel",
    "awgn_capacity",
    "dbw_to_watts",
]

_ROW_SUM_TOL = 1e-12


class ChannelValidationError(ValueError):
    """A channel or distribution violates one of its structural invariants."""


@dataclass(frozen=True)
class DiscreteIC:
    """Finite-alphabet two-user IC.

    ``kernel1[a * x2_size + b, c]`` is the probability that receiver 1 sees
    output ``c`` when the transmitters send ``(a, b)``; likewise ``kernel2``
    for receiver 2.  ``idle1``/``idle2`` are the symbols each transmitter
    emits while it has no codeword on the air.
    """

    x1_size: int
    x2_size: int
    y1_size: int
    y2_size: int
    kernel1: np.ndarray
    kernel2: np.ndarray
    idle1: int = 0
    idle2: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kernel1", np.asarray(self.kernel1, dtype=float))
        object.__setattr__(self, "kernel2", np.asarray(self.kernel2, dtype=float))

    def kernel(self, receiver: int) -> np.ndarray:
        """Kernel for ``receiver`` reshaped to (x1, x2, y)."""
        k = self.kernel1 if receiver == 1 else self.kernel2
        y = self.y1_size if receiver == 1 else self.y2_size
        return k.reshape(self.x1_size, self.x2_size, y)


@dataclass(frozen=True)
class GaussianIC:
    """Scalar Gaussian IC ``y_i = x_i + sqrt(c_i) x_i' + z_i`` with N(0,1) noise."""

    p1: float
    p2: float
    c1: float
    c2: float

    def __post_init__(self):
        if self.p1 <= 0 or self.p2 <= 0:
            raise ChannelValidationError("transmit powers must be positive")
        if self.c1 < 0 or self.c2 < 0:
            raise ChannelValidationError("cross gains must be nonnegative")


@dataclass(frozen=True)
class InputDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if p.ndim != 1:
            raise ChannelValidationError("input distribution must be a vector")
        if (p < 0).any():
            raise ChannelValidationError("input distribution has negative mass")
        if abs(p.sum() - 1.0) > _ROW_SUM_TOL:
            raise ChannelValidationError(
                f"input distribution sums to {p.sum():.15f}, expected 1"
            )

    @classmethod
    def bernoulli(cls, p: float) -> "InputDistribution":
        """Binary input with P(x=1) = p."""
        return cls(np.array([1.0 - p, p]))


@dataclass(frozen=True)
class InfoQuantities:
    """The ten per-receiver mutual-information constants, bits/channel use.

    Index convention: tuples are (user 1, user 2).  ``c_cross[i]`` is the
    own-signal rate given the interferer's symbol, ``c_tilde*`` are the
    interferer-signal rates seen at receiver i.
    """

    c_star: tuple[float, float]
    c: tuple[float, float]
    c_cross: tuple[float, float]
    c_tilde_star: tuple[float, float]
    c_tilde: tuple[float, float]

    def for_user(self, i: int) -> tuple[float, float, float, float, float]:
        """(C*, C, C_cross, C~*, C~) for user i in {1, 2}."""
        j = i - 1
        return (
            self.c_star[j],
            self.c[j],
            self.c_cross[j],
            self.c_tilde_star[j],
            self.c_tilde[j],
        )


def validate(channel: DiscreteIC) -> None:
    """Check alphabet sizes, kernel shapes, row stochasticity and idle indices."""
    for name, size in (
        ("x1_size", channel.x1_size),
        ("x2_size", channel.x2_size),
        ("y1_size", channel.y1_size),
        ("y2_size", channel.y2_size),
    ):
        if size < 1:
            raise ChannelValidationError(f"{name} must be a positive integer")
    n_rows = channel.x1_size * channel.x2_size
    for name, kern, y in (
        ("kernel1", channel.kernel1, channel.y1_size),
        ("kernel2", channel.kernel2, channel.y2_size),
    ):
        if kern.shape != (n_rows, y):
            raise ChannelValidationError(
                f"{name} has shape {kern.shape}, expected {(n_rows, y)}"
            )
        if (kern < 0).any():
            r = int(np.argwhere(kern < 0)[0][0])
            raise ChannelValidationError(f"{name} row {r} has a negative entry")
        sums = kern.sum(axis=1)
        bad = np.abs(sums - 1.0) > _ROW_SUM_TOL
        if bad.any():
            r = int(np.argmax(bad))
            raise ChannelValidationError(
                f"{name} row {r} sums to {sums[r]:.15f} (deviation "
                f"{sums[r] - 1.0:+.3e})"
            )
    if not 0 <= channel.idle1 < channel.x1_size:
        raise ChannelValidationError("idle index out of range for user 1")
    if not 0 <= channel.idle2 < channel.x2_size:
        raise ChannelValidationError("idle index out of range for user 2")


def _mutual_information(pi: np.ndarray, cond: np.ndarray) -> float:
    """I(X; Y) in bits for X ~ pi and conditional law cond[x, y].

    Uses the 0 log 0 = 0 convention; zero output columns are allowed.
    """
    joint = pi[:, None] * cond
    py = joint.sum(axis=0)
    mask = joint > 0
    ratio = np.ones_like(joint)
    denom = (pi[:, None] * py[None, :])[mask]
    ratio[mask] = joint[mask] / denom
    return float(np.sum(joint[mask] * np.log2(ratio[mask])))


def _receiver_quantities(
    k3: np.ndarray,
    pi_own: np.ndarray,
    pi_int: np.ndarray,
    idle_own: int,
    idle_int: int,
) -> tuple[float, float, float, float, float]:
    """(C*, C, C_cross, C~*, C~) for one receiver.

    ``k3`` must be shaped (own alphabet, interferer alphabet, output).
    """
    c_star = _mutual_information(pi_own, k3[:, idle_int, :])
    c_avg = np.einsum("j,ijy->iy", pi_int, k3)
    c = _mutual_information(pi_own, c_avg)
    c_cross = sum(
        pi_int[x] * _mutual_information(pi_own, k3[:, x, :])
        for x in range(len(pi_int))
        if pi_int[x] > 0
    )
    c_tilde_star = _mutual_information(pi_int, k3[idle_own, :, :])
    t_avg = np.einsum("i,ijy->jy", pi_own, k3)
    c_tilde = _mutual_information(pi_int, t_avg)
    return c_star, c, float(c_cross), c_tilde_star, c_tilde


def info_quantities(
    channel: DiscreteIC, pi1: InputDistribution, pi2: InputDistribution
) -> InfoQuantities:
    """All ten information constants under independent inputs pi1, pi2."""
    validate(channel)
    if len(pi1.probs) != channel.x1_size or len(pi2.probs) != channel.x2_size:
        raise ChannelValidationError("input distribution size does not match alphabet")
    q1 = _receiver_quantities(
        channel.kernel(1), pi1.probs, pi2.probs, channel.idle1, channel.idle2
    )
    q2 = _receiver_quantities(
        channel.kernel(2).transpose(1, 0, 2),
        pi2.probs,
        pi1.probs,
        channel.idle2,
        channel.idle1,
    )
    info = InfoQuantities(
        c_star=(q1[0], q2[0]),
        c=(q1[1], q2[1]),
        c_cross=(q1[2], q2[2]),
        c_tilde_star=(q1[3], q2[3]),
        c_tilde=(q1[4], q2[4]),
    )
    for j in range(2):
        if info.c[j] > info.c_cross[j] + 1e-9:
            raise ChannelValidationError(
                f"C_{j+1} exceeds C_{{ {j+1},{2-j} }}: conditioning on an "
                "independent input cannot reduce mutual information"
            )
    return info


def awgn_capacity(snr: float) -> float:
    """0.5 log2(1 + snr), bits per real channel use."""
    return 0.5 * np.log2(1.0 + snr)


def gaussian_info_quantities(channel: GaussianIC) -> InfoQuantities:
    """Closed-form constants for Gaussian point-to-point codebooks."""
    p = (channel.p1, channel.p2)
    c = (channel.c1, channel.c2)
    c_star = tuple(awgn_capacity(p[i]) for i in range(2))
    c_plain = tuple(awgn_capacity(p[i] / (1.0 + c[i] * p[1 - i])) for i in range(2))
    c_tilde_star = tuple(awgn_capacity(c[i] * p[1 - i]) for i in range(2))
    c_tilde = tuple(
        awgn_capacity(c[i] * p[1 - i] / (1.0 + p[i])) for i in range(2)
    )
    return InfoQuantities(
        c_star=c_star,
        c=c_plain,
        c_cross=c_star,
        c_tilde_star=c_tilde_star,
        c_tilde=c_tilde,
    )


def _simplex_grid(dim: int, resolution: int):
    """All probability vectors with entries that are multiples of 1/resolution."""
    for comp in itertools.combinations_with_replacement(range(dim), resolution):
        v = np.bincount(comp, minlength=dim) / resolution
        yield v


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def _cross_mi(k3: np.ndarray, pi_own: np.ndarray, pi_int: np.ndarray) -> float:
    """C_{i,i'} = sum over interferer symbols of the conditional MI."""
    return float(
        sum(
            pi_int[x] * _mutual_information(pi_own, k3[:, x, :])
            for x in range(len(pi_int))
            if pi_int[x] > 0
        )
    )


def lambda_bar(
    channel: DiscreteIC | GaussianIC, resolution: int = 64, refine: bool = True
):
    """Converse threshold min_i max_{pi1,pi2} C_{i,i'}.

    Gaussian channels have the closed form min{C(P1), C(P2)}.  Discrete
    channels are handled by grid search over both input simplexes followed by
    a Nelder-Mead polish in softmax coordinates.  Returns
    ``(value, (pi1, pi2))`` with the achieving product distribution of the
    minimizing user (None for Gaussian channels).
    """
    if isinstance(channel, GaussianIC):
        return min(awgn_capacity(channel.p1), awgn_capacity(channel.p2)), None
    validate(channel)
    kernels = {1: channel.kernel(1), 2: channel.kernel(2).transpose(1, 0, 2)}
    sizes = {1: (channel.x1_size, channel.x2_size), 2: (channel.x2_size, channel.x1_size)}
    per_user = {}
    for i in (1, 2):
        n_own, n_int = sizes[i]
        best = (-1.0, None, None)
        for pi_own in _simplex_grid(n_own, resolution):
            for pi_int in _simplex_grid(n_int, resolution):
                v = _cross_mi(kernels[i], pi_own, pi_int)
                if v > best[0]:
                    best = (v, pi_own, pi_int)
        if refine:
            def neg(z, i=i, n_own=n_own):
                return -_cross_mi(kernels[i], _softmax(z[:n_own]), _softmax(z[n_own:]))

            z0 = np.concatenate(
                [np.log(np.maximum(best[1], 1e-6)), np.log(np.maximum(best[2], 1e-6))]
            )
            res = minimize(neg, z0, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-12})
            if -res.fun > best[0]:
                best = (-res.fun, _softmax(res.x[:n_own]), _softmax(res.x[n_own:]))
        per_user[i] = best
    i_min = min((1, 2), key=lambda i: per_user[i][0])
    v, pi_own, pi_int = per_user[i_min]
    if i_min == 1:
        dists = (InputDistribution(pi_own), InputDistribution(pi_int))
    else:
        dists = (InputDistribution(pi_int), InputDistribution(pi_own))
    return v, dists


def lambda_thresholds(info: InfoQuantities) -> tuple[float, float]:
    """(lambda_TIN, lambda_DI): the arrival rates below which outage vanishes."""
    l_tin = min(info.c)
    l_di = min(info.c_cross[0], info.c_tilde[0], info.c_cross[1], info.c_tilde[1])
    return l_tin, l_di


def dbw_to_watts(dbw: float) -> float:
    return 10.0 ** (dbw / 10.0)


def load_channel(path_or_dict) -> DiscreteIC | GaussianIC:
    """Load a channel from a JSON config file path or an already-parsed dict."""
    if isinstance(path_or_dict, dict):
        cfg = path_or_dict
    else:
        with open(path_or_dict) as f:
            cfg = json.load(f)
    kind = cfg.get("type")
    if kind == "discrete":
        ch = DiscreteIC(
            x1_size=cfg["x1"],
            x2_size=cfg["x2"],
            y1_size=cfg["y1"],
            y2_size=cfg["y2"],
            kernel1=np.asarray(cfg["kernel1"], dtype=float),
            kernel2=np.asarray(cfg["kernel2"], dtype=float),
            idle1=cfg.get("idle1", 0),
            idle2=cfg.get("idle2", 0),
        )
        validate(ch)
        return ch
    if kind == "gaussian":
        def power(key):
            if f"{key}_dbw" in cfg and key in cfg:
                raise ChannelValidationError(f"give {key} or {key}_dbw, not both")
            if f"{key}_dbw" in cfg:
                return dbw_to_watts(cfg[f"{key}_dbw"])
            if key in cfg:
                return float(cfg[key])
            raise ChannelValidationError(f"missing {key} or {key}_dbw")

        return GaussianIC(p1=power("p1"), p2=power("p2"), c1=cfg["c1"], c2=cfg["c2"])
    raise ChannelValidationError(f"unknown channel type {kind!r}")
