import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker cap from FADEKIT_THREADS (0 or unset means one per CPU)."""
    try:
        n = int(os.environ.get("FADEKIT_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def ordered_map(fn, items):
    """map() that may run on threads but always returns results in input order."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
