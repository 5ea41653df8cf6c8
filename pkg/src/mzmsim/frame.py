"""Bit-vector algebra for Majorana operator strings over GF(2).

A Majorana string is stored as a uint8 vector with one entry per MZM site;
bit ``1`` means the corresponding Majorana operator has been applied an odd
number of times.  Operator phases are never tracked: every observable used
here (measurement outcomes, logical checks) only depends on support overlaps
mod 2.
"""

from __future__ import annotations

import numpy as np

MZMS_PER_ISLAND = 4  # tetron: m = 2 pairs


def flat_index(island: int, site: int, mzms_per_island: int = MZMS_PER_ISLAND) -> int:
    """Map (island, site) to the flat MZM index ``island * 2m + site``."""
    if not 0 <= site < mzms_per_island:
        raise ValueError(f"site {site} outside [0, {mzms_per_island})")
    if island < 0:
        raise ValueError(f"island {island} must be non-negative")
    return island * mzms_per_island + site


def island_site(flat: int, mzms_per_island: int = MZMS_PER_ISLAND) -> tuple[int, int]:
    """Invert :func:`flat_index`."""
    if flat < 0:
        raise ValueError(f"flat index {flat} must be non-negative")
    return flat // mzms_per_island, flat % mzms_per_island


def zeros(n_mzm: int) -> np.ndarray:
    """Return the trivial Majorana string on ``n_mzm`` sites."""
    return np.zeros(n_mzm, dtype=np.uint8)


def from_sites(n_mzm: int, sites) -> np.ndarray:
    """Build a string by XOR-ing single-site flips (repeats cancel)."""
    s = zeros(n_mzm)
    for f in sites:
        s[f] ^= 1
    return s


def xor_accumulate(frame: np.ndarray, event: np.ndarray) -> np.ndarray:
    """Bitwise XOR of two equal-length strings (Majorana string product)."""
    frame = np.asarray(frame, dtype=np.uint8)
    event = np.asarray(event, dtype=np.uint8)
    if frame.shape != event.shape:
        raise ValueError(f"length mismatch: {frame.shape} vs {event.shape}")
    return frame ^ event


def overlap_parity(a: np.ndarray, b: np.ndarray) -> int:
    """|support(a) AND support(b)| mod 2.

    For even-weight ``b`` this is 1 exactly when the operators anticommute.
    ``b`` must have even weight; for odd-weight operators the commutation
    parity would also involve the total weights, which we never need.
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if int(b.sum()) % 2 != 0:
        raise ValueError("overlap_parity requires an even-weight second operand")
    return int(np.bitwise_and(a, b).sum()) & 1


def mat_vec_parity(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Row-wise overlap parities: GF(2) matrix-vector product."""
    mat = np.asarray(mat, dtype=np.uint8)
    vec = np.asarray(vec, dtype=np.uint8)
    if mat.ndim != 2 or mat.shape[1] != vec.shape[0]:
        raise ValueError(f"dimension mismatch: {mat.shape} vs {vec.shape}")
    return ((mat.astype(np.int64) @ vec.astype(np.int64)) & 1).astype(np.uint8)


def mat_mat_parity(mat: np.ndarray, other: np.ndarray) -> np.ndarray:
    """GF(2) matrix product ``mat @ other.T`` of two 0/1 row matrices."""
    mat = np.asarray(mat, dtype=np.int64)
    other = np.asarray(other, dtype=np.int64)
    if mat.shape[1] != other.shape[1]:
        raise ValueError(f"dimension mismatch: {mat.shape} vs {other.shape}")
    return ((mat @ other.T) & 1).astype(np.uint8)


def island_parities(s: np.ndarray, mzms_per_island: int = MZMS_PER_ISLAND) -> np.ndarray:
    """Per-island parity of the string: popcount per island, mod 2."""
    s = np.asarray(s, dtype=np.uint8)
    if s.shape[0] % mzms_per_island:
        raise ValueError("string length is not a multiple of the island size")
    return (s.reshape(-1, mzms_per_island).sum(axis=1) & 1).astype(np.uint8)


class IslandParityTracker:
    """Incrementally maintained island parities of an accumulating frame.

    Step-0 sampling consults parities every time step, so they are cached
    and updated per event instead of recomputed; ``check`` recomputes from
    scratch for debugging.
    """

    def __init__(self, n_islands: int, mzms_per_island: int = MZMS_PER_ISLAND):
        self.mzms_per_island = mzms_per_island
        self.frame = zeros(n_islands * mzms_per_island)
        self.parity = np.zeros(n_islands, dtype=np.uint8)

    def ingest(self, event: np.ndarray) -> None:
        """XOR an event string into the frame, updating cached parities."""
        self.frame = xor_accumulate(self.frame, event)
        self.parity ^= island_parities(event, self.mzms_per_island)

    def check(self) -> bool:
        """True when the cache matches a from-scratch recomputation."""
        return bool(
            np.array_equal(self.parity, island_parities(self.frame, self.mzms_per_island))
        )
