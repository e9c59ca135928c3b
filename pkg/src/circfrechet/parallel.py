import os
from typing import Optional


def worker_count(threads: Optional[int] = None) -> int:
    """Number of worker threads; ``CIRC_THREADS`` when not given, 0 means one per CPU."""
    if threads is None:
        try:
            threads = int(os.environ.get("CIRC_THREADS", "0"))
        except ValueError:
            threads = 0
    if threads <= 0:
        threads = os.cpu_count() or 1
    return max(1, int(threads))
