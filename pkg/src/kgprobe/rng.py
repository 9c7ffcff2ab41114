"""Reproducible random streams.

Every stochastic operation in this package draws from an :class:`RngStream`,
a value object naming a stream as ``(master_seed, purpose_tag, repeat_index)``.
The triple is hashed (SHA-256) into a Philox key, so streams are

* counter-based: independent streams never share state,
* platform-stable: the same triple yields the same draws on any machine,
* order-free: deriving or using one stream never disturbs another.

Operators re-derive a fresh generator on every call, which makes them pure
functions of their arguments: calling an operator twice with the same stream
gives bit-identical results.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Names one reproducible random stream."""

    master_seed: int
    purpose_tag: str
    repeat_index: int = 0

    def __post_init__(self) -> None:
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.repeat_index < 0:
            raise ValueError(f"repeat_index must be non-negative, got {self.repeat_index}")

    def key(self) -> int:
        """128-bit Philox key derived from the stream name."""
        text = f"{self.master_seed}|{self.purpose_tag}|{self.repeat_index}"
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        return int.from_bytes(digest[:16], "little")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.Philox(key=self.key()))

    def child(self, tag: str) -> "RngStream":
        """Sub-stream for a named purpose within this stream."""
        return RngStream(self.master_seed, f"{self.purpose_tag}/{tag}", self.repeat_index)
