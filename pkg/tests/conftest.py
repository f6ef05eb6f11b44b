import numpy as np
import pytest

from ic_outage import DiscreteIC, GaussianIC, InfoQuantities, InputDistribution

# 2x2-input, 5-output transition matrix used as the discrete regression channel.
# Rows are the input pairs (0,0), (0,1), (1,0), (1,1).
KERNEL = np.array(
    [
        [0.3266, 0.1314, 0.1674, 0.3588, 0.0158],
        [0.3148, 0.0612, 0.2158, 0.1898, 0.2184],
        [0.1905, 0.3272, 0.4279, 0.0102, 0.0442],
        [0.4091, 0.2734, 0.0970, 0.1693, 0.0512],
    ]
)


def normalize_rows(k: np.ndarray) -> np.ndarray:
    return k / k.sum(axis=1, keepdims=True)


@pytest.fixture
def discrete_channel() -> DiscreteIC:
    k = normalize_rows(KERNEL)
    return DiscreteIC(
        x1_size=2, x2_size=2, y1_size=5, y2_size=5, kernel1=k, kernel2=k
    )


@pytest.fixture
def gaussian_channel() -> GaussianIC:
    # 30 dBW transmit powers, cross gains 0.8 and 1.5.
    return GaussianIC(p1=1000.0, p2=1000.0, c1=0.8, c2=1.5)


def random_discrete(rng: np.random.Generator, x1=2, x2=2, y=3) -> DiscreteIC:
    k1 = normalize_rows(rng.random((x1 * x2, y)) + 1e-3)
    k2 = normalize_rows(rng.random((x1 * x2, y)) + 1e-3)
    return DiscreteIC(
        x1_size=x1, x2_size=x2, y1_size=y, y2_size=y,
        kernel1=k1, kernel2=k2,
        idle1=int(rng.integers(x1)), idle2=int(rng.integers(x2)),
    )


def reference_point(rho1: float = 0.016, rho2: float = 0.0501) -> InfoQuantities:
    """Synthetic constants hitting exact rho targets at lambda=0.1, r=1.1.

    With C_i* = 1 and C_i = (0.11 - rho_i)/(1 - rho_i), the TIN exposure
    fraction (0.11 - C_i)/(1 - C_i) equals rho_i exactly.
    """
    c = tuple((0.11 - t) / (1.0 - t) for t in (rho1, rho2))
    return InfoQuantities(
        c_star=(1.0, 1.0),
        c=c,
        c_cross=(1.0, 1.0),
        c_tilde_star=(0.5, 0.5),
        c_tilde=(0.02, 0.02),
    )


def dist(rng: np.random.Generator, size: int) -> InputDistribution:
    p = rng.random(size) + 1e-3
    return InputDistribution(p / p.sum())
