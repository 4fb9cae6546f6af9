"""Deterministic derivation of named RNG substreams from one master seed."""

from __future__ import annotations

import zlib

import numpy as np


def _entropy(master: int, path) -> list[int]:
    out = [int(master)]
    for part in path:
        if isinstance(part, str):
            out.append(zlib.crc32(part.encode("utf-8")))
        else:
            out.append(int(part))
    return out


def seed_sequence(master: int, *path) -> np.random.SeedSequence:
    return np.random.SeedSequence(_entropy(master, path))


def generator(master: int, *path) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master, *path))


def derive_int(master: int, *path) -> int:
    """A plain integer seed for components that take one, e.g. estimator specs."""
    return int(seed_sequence(master, *path).generate_state(1, np.uint64)[0])
