"""Deterministic random streams with explicit lineage.

Every stream is a pure function of its lineage tuple (master seed, strategy
tag, society index, purpose tag, optional extensions) built on a counter-based
Philox generator, so any stream can be re-derived anywhere without replaying
draws and results never depend on scheduling order. Worker processes derive
the streams they need from plain integers instead of sharing generator state.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ParameterError


class Purpose(IntEnum):
    """Stable purpose tags; the values are part of the stream lineage."""

    FOUNDING = 0
    OPTIMIZER = 1
    MATING = 2
    REPRODUCTION = 3
    MUTATION = 4
    MORTALITY = 5


@dataclass
class RngStream:
    """A draw source bound to its lineage; draws mutate generator state."""

    lineage: tuple[int, ...]
    generator: np.random.Generator

    def substream(self, *extension: int) -> "RngStream":
        """Child stream with extended lineage, independent of draws made here."""
        return _stream(self.lineage + tuple(int(part) for part in extension))


def _stream(lineage: tuple[int, ...]) -> RngStream:
    for part in lineage:
        if part < 0:
            raise ParameterError(f"lineage entries must be non-negative, got {part}")
    seq = np.random.SeedSequence(entropy=list(lineage))
    return RngStream(lineage=lineage, generator=np.random.Generator(np.random.Philox(seq)))


def derive_stream(
    master_seed: int, strategy_tag: int, society_index: int, purpose: int
) -> RngStream:
    """Derive the stream for one (strategy, society, purpose) triple under a master seed."""
    return _stream((int(master_seed), int(strategy_tag), int(society_index), int(purpose)))


def uniform01(stream: RngStream) -> float:
    """Uniform draw in [0, 1)."""
    return float(stream.generator.random())


def exponential(stream: RngStream, rate: float) -> float:
    """Exponential draw with the given rate (mean 1/rate), strictly positive."""
    if not rate > 0.0:
        raise ParameterError(f"rate must be > 0, got {rate}")
    value = float(stream.generator.exponential(1.0 / rate))
    while value == 0.0:
        # numpy may return exactly 0.0 with probability ~2**-53; the contract is > 0
        value = float(stream.generator.exponential(1.0 / rate))
    return value


def poisson(stream: RngStream, mean: float) -> int:
    """Poisson draw; a mean of 0 always yields 0."""
    if not mean >= 0.0:
        raise ParameterError(f"mean must be >= 0, got {mean}")
    return int(stream.generator.poisson(mean))


def bernoulli(stream: RngStream, p: float) -> bool:
    """True with probability p; p=0 is never true, p=1 always is."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    return bool(stream.generator.random() < p)


def gaussian(stream: RngStream, mean: float, sd: float) -> float:
    """Normal draw; sd=0 returns mean exactly while still consuming one draw."""
    if not sd >= 0.0:
        raise ParameterError(f"sd must be >= 0, got {sd}")
    return mean + sd * float(stream.generator.standard_normal())
