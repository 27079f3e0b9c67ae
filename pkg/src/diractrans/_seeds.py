"""Deterministic seed derivation.

Every randomized routine takes a single integer seed and derives labeled
child seeds from it, so that a campaign seed fans out into independent,
reproducible streams (one per trial, per retry, per construction stage)
without any global state.
"""

import hashlib
import random

_MASK63 = (1 << 63) - 1


def derive_seed(master, *labels):
    """Derive a child seed from a master seed and a label path.

    Labels may be strings or integers; the same (master, labels) pair always
    yields the same 63-bit integer, and distinct label paths are independent
    for all practical purposes (sha256).
    """
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest()[:8], "big") & _MASK63


def rng_for(master, *labels):
    """A stdlib Random seeded by the derived child seed."""
    return random.Random(derive_seed(master, *labels))


def np_rng_for(master, *labels):
    """A numpy Generator seeded by the derived child seed."""
    import numpy as np

    return np.random.default_rng(derive_seed(master, *labels))
