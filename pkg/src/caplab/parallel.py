"""Optional thread fan-out for independent parameter points.

Every sweep in this package is a pure map over immutable geometry, so a
plain thread pool is safe; CAPLAB_THREADS caps the width (default serial).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_map(fn, items):
    items = list(items)
    width = int(os.environ.get("CAPLAB_THREADS", "1"))
    if width <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=width) as pool:
        return list(pool.map(fn, items))
