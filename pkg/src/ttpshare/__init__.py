"""Root-based threshold secret sharing distributed through two trusted third parties."""

import logging

from .errors import TTPShareError
from .field import PrimeContext, mod_inverse, mod_pow
from .partition import (
    Partition,
    ShareSet,
    reconstruct_blocks,
    reconstruct_roots,
    recover_secret,
    split_blocks,
    split_secret,
)
from .rng import ScriptedSource, SplitMix64

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "Partition",
    "PrimeContext",
    "ScriptedSource",
    "ShareSet",
    "SplitMix64",
    "TTPShareError",
    "mod_inverse",
    "mod_pow",
    "reconstruct_blocks",
    "reconstruct_roots",
    "recover_secret",
    "split_blocks",
    "split_secret",
]
