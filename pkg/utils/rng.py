"""
Named random streams split from a single root seed.

Each stochastic component asks for ``stream(root_seed, "component", ...)``;
the stream id is a stable hash of the names, so adding a new stream never
shifts the numbers drawn by an existing one.
"""
from typing import Union

import numpy as np

from utils.common import sha256_hash

_MASK64 = (1 << 64) - 1

StreamName = Union[str, int, float]


def stream_id(*names: StreamName) -> int:
    """64-bit id of a stream path such as ("gram", 3, 5)"""
    key = "/".join(str(name) for name in names)
    return int(sha256_hash(key)[:16], 16)


def stream_seed(root_seed: int, *names: StreamName) -> int:
    """Integer seed for a named child stream (usable as a new root_seed)"""
    sequence = np.random.SeedSequence([root_seed & _MASK64, stream_id(*names)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def stream(root_seed: int, *names: StreamName) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([root_seed & _MASK64, stream_id(*names)])))
