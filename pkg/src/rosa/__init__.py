"""Semiring associative arrays, a tabular process/file kernel, and a
fork-throughput benchmark."""

from .array import (AssociativeArray, KeyPattern, construct, empty, identity,
                    identity_pairs, load_tsv, save_tsv, selector)
from .kernel import KernelState
from .semiring import Semiring, check_laws, preset

__all__ = [
    "AssociativeArray",
    "KernelState",
    "KeyPattern",
    "Semiring",
    "check_laws",
    "construct",
    "empty",
    "identity",
    "identity_pairs",
    "load_tsv",
    "preset",
    "save_tsv",
    "selector",
]
