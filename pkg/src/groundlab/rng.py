"""Seeded randomness: every random draw flows from one root seed through
named substreams, so individual components can be re-run in isolation."""
from __future__ import annotations

import zlib

import numpy as np


def substream(root_seed: int, name: str) -> np.random.Generator:
    """Generator for the named substream of a root seed.

    The mapping is stable across runs and processes: the stream depends
    only on (root_seed, name).
    """
    tag = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(root_seed), tag]))


def substream_seed(root_seed: int, name: str) -> int:
    """A derived integer seed for APIs that take a plain seed."""
    return int(substream(root_seed, name).integers(0, 2**63 - 1))
