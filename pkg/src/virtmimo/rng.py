"""Named random streams derived from a master seed.

Every random quantity in a drop comes from its own stream, so switching one
feature on (e.g. CSI error) never shifts the draws of another.
"""

import zlib

import numpy as np

STREAMS = ("positions", "shadowing", "fading", "csi_error", "drop")


def _stream_key(name):
    if name not in STREAMS:
        raise KeyError(f"unknown random stream {name!r}; known: {STREAMS}")
    return zlib.crc32(name.encode("ascii"))


def stream(seed, name):
    """Generator for stream ``name`` under integer ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence([int(seed), _stream_key(name)]))


def derive_seed(master_seed, drop):
    """Seed for Monte-Carlo drop ``drop``; a pure function of its inputs."""
    ss = np.random.SeedSequence([int(master_seed), int(drop), _stream_key("drop")])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
