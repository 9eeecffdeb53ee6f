"""Keyed random streams.

Every stream is a deterministic function of a master seed and a tuple of
integer keys (replication index, lag, ...), so results never depend on the
order in which work is scheduled.
"""
import secrets

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def entropy_seed() -> int:
    """Fresh 63-bit seed for runs where the caller did not fix one."""
    return secrets.randbits(63)
