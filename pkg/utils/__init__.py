from .common import get_time, sha256_hash, debug_enabled, debug_print, log, default_workers
from .rng import stream, stream_seed, stream_id
from .parallel import ordered_map

__all__ = [
    "get_time", "sha256_hash", "debug_enabled", "debug_print", "log", "default_workers",
    "stream", "stream_seed", "stream_id", "ordered_map",
]
