"""Sparse rooted maps: exact enumeration, uniform sampling via the
core-kernel decomposition, and statistical verification of their limit laws."""

__version__ = "0.1.0"

from .maps import (  # noqa: F401
    EMPTY_MAP,
    EulerSignature,
    RootedMap,
    build_map,
    canonical_encode,
    deserialize,
    euler_signature,
    faces,
    serialize,
)
