"""Small shared helpers: stable seed derivation and optional thread mapping."""

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor


def derive_seed(seed: int, key: str) -> int:
    """Stable per-item RNG seed from a base seed and a string key.

    Uses a keyed hash rather than Python's hash() so the result does not
    change across processes or platforms.
    """
    raw = f"{seed}\x1f{key}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "big")


def thread_count() -> int:
    raw = os.environ.get("SPECASR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """map() that may fan out over SPECASR_THREADS workers but always returns
    results in input order, so callers stay deterministic."""
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
