"""Uniform draw sources consumed by the compiled kernels.

Kernels read uniforms from a flat float64 buffer and report how many they
used.  ``UniformStream`` refills that buffer from a numpy ``Generator`` so the
sequence of draws depends only on the seed, never on how a run is chunked.
``ScriptedStream`` replays fixed values for white-box tests.
"""
from __future__ import annotations

import hashlib
from collections.abc import Iterable

import numpy as np

from .errors import UsageError


def derive_seed(master: int, index: int) -> int:
    """Seed of replicate ``index`` under master seed ``master``.

    Replicate 0 runs on the master seed itself; replicate ``i >= 1`` uses the
    first 8 bytes (big endian) of ``sha256(b"evoflow:{master}:{i}")``.  This
    mapping is part of the reproducibility contract and must not change.
    """
    if index == 0:
        return int(master)
    digest = hashlib.sha256(f"evoflow:{int(master)}:{int(index)}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class UniformStream:
    """Buffered stream of U[0,1) draws from a PCG64 generator."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))
        self.buf = np.empty(0, dtype=np.float64)
        self.pos = 0
        self.consumed = 0

    def available(self) -> int:
        return self.buf.shape[0] - self.pos

    def ensure(self, k: int) -> None:
        """Guarantee at least ``k`` unread draws in the buffer."""
        have = self.available()
        if have >= k:
            return
        fresh = self.generator.random(k - have)
        self.buf = np.concatenate([self.buf[self.pos:], fresh])
        self.pos = 0

    def advance(self, new_pos: int) -> None:
        self.consumed += new_pos - self.pos
        self.pos = new_pos

    def take(self, k: int) -> np.ndarray:
        self.ensure(k)
        out = self.buf[self.pos:self.pos + k].copy()
        self.advance(self.pos + k)
        return out

    def fingerprint(self) -> str:
        """Seed and draws consumed: the stream position, independent of buffering."""
        return f"{self.seed}:{self.consumed}"


class ScriptedStream(UniformStream):
    """Replays a fixed list of uniforms; running past its end is an error."""

    def __init__(self, values: Iterable[float]):
        self.seed = None
        self.generator = None
        self.buf = np.asarray(list(values), dtype=np.float64)
        if np.any((self.buf < 0.0) | (self.buf >= 1.0)):
            raise UsageError("scripted uniforms must lie in [0, 1)")
        self.pos = 0
        self.consumed = 0

    def ensure(self, k: int) -> None:
        pass

    def take(self, k: int) -> np.ndarray:
        if self.available() < k:
            raise UsageError("scripted uniform stream exhausted")
        return super().take(k)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.buf[self.pos:].tobytes()).hexdigest()
