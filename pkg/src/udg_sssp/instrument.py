"""Process-wide operation counters (merges, trace steps, locates, heap ops, ...)."""
from collections import Counter
from contextlib import contextmanager

COUNTERS = Counter()


def add(name, k=1):
    COUNTERS[name] += k


def snapshot():
    return dict(COUNTERS)


def reset():
    COUNTERS.clear()


@contextmanager
def counting():
    """Run a block with fresh counters; yields the Counter being filled.

    The yielded Counter keeps only the block's counts; on exit they are also
    added to the enclosing counters.
    """
    global COUNTERS
    outer = COUNTERS
    COUNTERS = Counter()
    try:
        yield COUNTERS
    finally:
        fresh = COUNTERS
        COUNTERS = outer
        COUNTERS.update(fresh)
