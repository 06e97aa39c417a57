"""Gray-mapped square QAM, Rayleigh fading with AWGN, and decoder likelihoods.

Point ``a`` of a constellation is the point labeled by the m-bit string whose
LSB-first integer value is ``a``; with m == p the label of a coded symbol is
its binary image, so ``points[a]`` is the point transmitting symbol ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Dict

import numpy as np
from scipy.special import expit, logsumexp, softmax

from .gf import Field
from .interleaver import InterleaverPattern, deapply


MODULATIONS: Dict[str, int] = {"qam4": 2, "qam16": 4, "qam64": 6, "qam256": 8}

# E[h^2] = 2 * RAYLEIGH_SCALE^2 = 1
RAYLEIGH_SCALE = math.sqrt(0.5)


@dataclass(frozen=True, eq=False)
class Constellation:
    name: str
    m: int
    points: np.ndarray
    labels: np.ndarray  # labels[a] is the LSB-first bit string of point a

    @property
    def size(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class ChannelRealization:
    rho: np.ndarray
    h: np.ndarray
    sigma2: float


def gray_to_index(gray: np.ndarray) -> np.ndarray:
    index = np.array(gray, dtype=np.int64, copy=True)
    shift = index >> 1
    while np.any(shift):
        index ^= shift
        shift >>= 1
    return index


def qam_constellation(m: int) -> Constellation:
    """Square QAM as the product of two Gray-labeled PAM axes.

    The low m/2 label bits select the in-phase level, the high m/2 bits the
    quadrature level; an all-zero axis label sits at the largest positive level.
    """
    if m < 2 or m % 2:
        raise ValueError(f"square QAM needs an even number of bits, got m = {m}")
    half = m // 2
    levels = 1 << half
    labels = np.arange(1 << m, dtype=np.int64)
    i_index = gray_to_index(labels & (levels - 1))
    q_index = gray_to_index(labels >> half)
    grid = ((levels - 1) - 2 * i_index) + 1j * ((levels - 1) - 2 * q_index)
    energy = 2.0 * (levels**2 - 1) / 3.0
    bits = ((labels[:, None] >> np.arange(m)) & 1).astype(np.uint8)
    return Constellation(
        name=f"qam{1 << m}",
        m=m,
        points=grid / math.sqrt(energy),
        labels=bits,
    )


def constellation_for(name: str) -> Constellation:
    try:
        return qam_constellation(MODULATIONS[name])
    except KeyError:
        raise ValueError(f"unsupported modulation: {name} (choose from {', '.join(MODULATIONS)})") from None


def ebn0_to_sigma2(ebn0_db: float, rate: float, m: int) -> float:
    """Noise variance per real dimension for unit-energy symbols and E[h^2] = 1."""
    return 1.0 / (2.0 * rate * m * 10.0 ** (ebn0_db / 10.0))


def ebn0_to_esn0(ebn0_db: float, rate: float, m: int) -> float:
    return ebn0_db + 10.0 * math.log10(rate * m)


def modulate(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    values = np.asarray(bits, dtype=np.int64)
    if values.size % constellation.m:
        raise ValueError(f"{values.size} bits do not fill {constellation.m}-bit symbols")
    groups = values.reshape(-1, constellation.m)
    return constellation.points[groups @ (1 << np.arange(constellation.m))]


def rayleigh_awgn(
    x: np.ndarray,
    sigma2: float,
    rng: np.random.Generator,
    fading: np.ndarray | None = None,
) -> ChannelRealization:
    """rho = h x + z with Rayleigh h (E[h^2] = 1) and complex noise of
    variance ``sigma2`` per dimension. ``fading`` overrides the drawn h."""
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    size = np.shape(x)
    h = rng.rayleigh(scale=RAYLEIGH_SCALE, size=size) if fading is None else np.asarray(fading, dtype=float)
    std = math.sqrt(sigma2)
    noise = rng.normal(0.0, std, size=size) + 1j * rng.normal(0.0, std, size=size)
    return ChannelRealization(rho=h * x + noise, h=h, sigma2=sigma2)


def _point_logits(
    rhos: np.ndarray,
    hs: np.ndarray,
    sigma2: float,
    constellation: Constellation,
) -> np.ndarray:
    rho = np.asarray(rhos)[:, None]
    h = np.asarray(hs, dtype=float)[:, None]
    if rho.shape != h.shape:
        raise ValueError("received samples and fading amplitudes differ in length")
    distance = np.abs(rho - h * constellation.points[None, :]) ** 2
    return -distance / (2.0 * max(sigma2, np.finfo(float).tiny))


def symbol_likelihoods(
    rhos: np.ndarray,
    hs: np.ndarray,
    sigma2: float,
    constellation: Constellation,
    field: Field,
) -> np.ndarray:
    """Direct symbol likelihoods when each coded symbol rides one QAM point."""
    if constellation.m != field.p:
        raise ValueError(f"direct demapping needs m == p, got m = {constellation.m}, p = {field.p}")
    return softmax(_point_logits(rhos, hs, sigma2, constellation), axis=1)


def bitwise_marginalize(
    rhos: np.ndarray,
    hs: np.ndarray,
    sigma2: float,
    constellation: Constellation,
) -> np.ndarray:
    """Per-bit posteriors, shape (N_m * m, 2), columns P(bit = 0), P(bit = 1)."""
    logits = _point_logits(rhos, hs, sigma2, constellation)
    ones = constellation.labels.astype(bool)
    log_one = np.stack([logsumexp(logits[:, ones[:, t]], axis=1) for t in range(constellation.m)], axis=1)
    log_zero = np.stack([logsumexp(logits[:, ~ones[:, t]], axis=1) for t in range(constellation.m)], axis=1)
    p_one = expit(log_one - log_zero).reshape(-1)
    p_zero = expit(log_zero - log_one).reshape(-1)
    return np.stack([p_zero, p_one], axis=1)


def regroup_bits_to_symbols(
    bit_probs: np.ndarray,
    pattern: InterleaverPattern,
    field: Field,
) -> np.ndarray:
    """De-interleave bit posteriors and multiply them into symbol likelihoods."""
    probs = np.asarray(bit_probs, dtype=float)
    if probs.shape != (pattern.n, 2):
        raise ValueError(f"expected ({pattern.n}, 2) bit probabilities, got {probs.shape}")
    coded = deapply(pattern, probs).reshape(-1, field.p, 2)
    # factors[i, a, t] = P(bit t of symbol i equals bit t of a)
    factors = coded[:, np.arange(field.p)[None, :], field.bit_table.astype(np.int64)]
    gammas = np.prod(factors, axis=2)
    return gammas / gammas.sum(axis=1, keepdims=True)
