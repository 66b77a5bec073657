"""Deterministic seed streams.

Every random consumer gets a Philox (counter-based) generator keyed by the
user seed plus a stream path.  Stream path elements are integers or strings;
strings are mapped to integers with CRC32 so the derivation is stable across
Python versions and processes.  ``make_rng(seed, "walk", 17)`` is the
generator for trajectory 17 of the walk stage.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream ids must be nonnegative")
        return int(part)
    return zlib.crc32(str(part).encode("utf8"))


def stream_key(*stream) -> tuple[int, ...]:
    return tuple(_key(p) for p in stream)


def make_rng(seed: int, *stream) -> np.random.Generator:
    if seed is None:
        raise ValueError("a seed is required (no wall-clock seeding)")
    ss = np.random.SeedSequence(int(seed), spawn_key=stream_key(*stream))
    return np.random.Generator(np.random.Philox(ss))
