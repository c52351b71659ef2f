"""Shared helpers: worker pool sizing, ordered parallel map, atomic writes."""

import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import ConfigError

THREADS_ENV = "FREQPRINT_THREADS"


def worker_count() -> int:
    """Worker cap: FREQPRINT_THREADS if set, else min(cpu_count, 8)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is not None:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1, got {n}")
        return n
    return min(os.cpu_count() or 1, 8)


def pmap(fn, items):
    """Map fn over items preserving order, threaded when workers allow.

    Work items must be independent; results are collected in input order so
    parallelism never changes output.
    """
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write payload to path via a temp file + rename, no partial files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
