"""Utilities and helper functions."""

import errno
import hashlib
import os

import numpy as np


def mkdir_p(path):
    """Make directory and have it work when it already exists."""
    try:
        os.makedirs(path)
    except OSError as exc:
        if exc.errno == errno.EEXIST and os.path.isdir(path):
            pass
        else:
            raise


def derive_seed(*parts) -> int:
    """Build a stable 63 bit seed out of ints and strings.

    Python's hash() is salted per process, so we go through sha256 to keep
    seeds identical across runs and platforms.
    """
    text = "/".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def make_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))


def fmt_float(value) -> str:
    """Decimal rendering with 17 significant digits.

    17 digits is enough to round trip any float64 exactly.
    """
    return format(float(value), ".17g")

