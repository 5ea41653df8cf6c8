"""Distance-d Bacon-Shor code on a d x d grid of tetrons.

Builds the gauge/stabilizer/logical matrices over MZM sites for both MZM
layouts, the four-step measurement schedule, the row/column lookup decoder,
and the repeated-syndrome selector.

Grid convention: island ``j = row * d + col``; MZM sites are 0..3 per island
(paper-style gamma_1..gamma_4 shifted to 0-based).  Syndrome bits are ordered
X-type stabilizers by column pair (left to right), then Z-type by row pair
(top to bottom).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .frame import MZMS_PER_ISLAND, mat_mat_parity, mat_vec_parity, zeros


class LayoutKind(Enum):
    """How Pauli operators map onto MZM sites.

    STANDARD uses the per-island identification X = g2 g3, Y = g1 g3,
    Z = g1 g2 for every measurement.  GEOMETRIC reflects the physical
    two-quantum-dot wiring: XX on a horizontal pair acts on sites (2,3) of
    the left island and (1,4) of the right one, ZZ on a vertical pair acts
    on (3,4) top / (1,2) bottom (1-based site labels).
    """

    STANDARD = "standard"
    GEOMETRIC = "geometric"


# 0-based site sets per layout. "x"/"z" are the per-island correction and
# logical representatives; the gauge entries give (sites on first island,
# sites on second island, dot-connected site pairs).
_LAYOUT_SITES = {
    LayoutKind.STANDARD: {
        "x": (1, 2),
        "z": (0, 1),
        "xx": ((1, 2), (1, 2), ((1, 1), (2, 2))),
        "zz": ((0, 1), (0, 1), ((0, 0), (1, 1))),
    },
    LayoutKind.GEOMETRIC: {
        "x": (1, 2),
        "z": (2, 3),
        "xx": ((1, 2), (0, 3), ((1, 0), (2, 3))),
        "zz": ((2, 3), (0, 1), ((2, 0), (3, 1))),
    },
}


@dataclass(frozen=True)
class MeasuredPair:
    """One two-island (four-MZM) joint measurement.

    ``sites_i``/``sites_j`` are the measured MZM sites on each island;
    ``connected`` lists the two dot-connected (site_i, site_j) pairs.
    """

    i: int
    j: int
    sites_i: tuple[int, int]
    sites_j: tuple[int, int]
    connected: tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class ScheduleStep:
    """One of the four measurement steps of an error-correction round."""

    index: int
    stab_ids: tuple[int, ...]          # syndrome-bit indices measured here
    gauge_rows: tuple[int, ...]        # gauge-matrix rows measured here
    pairs: tuple[MeasuredPair, ...]    # k=2 islands
    idle: tuple[int, ...]              # k=0 islands


@dataclass(frozen=True, eq=False)
class CodeLayout:
    """Bacon-Shor code data: GF(2) matrices plus the measurement schedule."""

    d: int
    layout: LayoutKind
    n_islands: int
    n_mzm: int
    gauge: np.ndarray        # (2d(d-1), 4d^2) one row per gauge generator
    stab_gauge: np.ndarray   # (2(d-1), 2d(d-1)) stabilizer = product of gauge rows
    logical: np.ndarray      # (2, 4d^2): bare X-bar (column 0), bare Z-bar (row 0)
    schedule: tuple[ScheduleStep, ...]
    corr_x: np.ndarray       # (d, 4d^2): X correction for flagged row r at (r, 0)
    corr_z: np.ndarray       # (d, 4d^2): Z correction for flagged column c at (0, c)
    pauli_reps: dict         # canonical per-island X/Y/Z site pairs

    @property
    def n_gauge(self) -> int:
        return self.gauge.shape[0]

    @property
    def n_stab(self) -> int:
        return self.stab_gauge.shape[0]

    def stab_support(self) -> np.ndarray:
        """Stabilizer rows expanded to MZM support via the gauge matrix."""
        return mat_mat_parity(self.stab_gauge, self.gauge.T)

    def syndrome_of(self, frame: np.ndarray) -> np.ndarray:
        """Noiseless syndrome of a Majorana string."""
        return mat_vec_parity(self.stab_gauge, mat_vec_parity(self.gauge, frame))

    def to_dict(self) -> dict:
        """JSON-friendly dump of matrices and schedule (for golden tests)."""
        return {
            "d": self.d,
            "layout": self.layout.value,
            "n_islands": self.n_islands,
            "n_mzm": self.n_mzm,
            "gauge": self.gauge.tolist(),
            "stab_gauge": self.stab_gauge.tolist(),
            "logical": self.logical.tolist(),
            "corr_x": self.corr_x.tolist(),
            "corr_z": self.corr_z.tolist(),
            "schedule": [
                {
                    "index": st.index,
                    "stab_ids": list(st.stab_ids),
                    "gauge_rows": list(st.gauge_rows),
                    "pairs": [
                        {
                            "islands": [p.i, p.j],
                            "sites_i": list(p.sites_i),
                            "sites_j": list(p.sites_j),
                            "connected": [list(c) for c in p.connected],
                        }
                        for p in st.pairs
                    ],
                    "idle": list(st.idle),
                }
                for st in self.schedule
            ],
        }


def _island_string(n_mzm: int, island: int, sites) -> np.ndarray:
    s = zeros(n_mzm)
    for site in sites:
        s[island * MZMS_PER_ISLAND + site] ^= 1
    return s


def build_code(d: int, layout: LayoutKind = LayoutKind.STANDARD) -> CodeLayout:
    """Construct the distance-d Bacon-Shor code on a d x d tetron grid.

    Gauge generators are XX on horizontal and ZZ on vertical nearest
    neighbours; each stabilizer is the product of the d gauge generators in
    one column pair (X-type) or row pair (Z-type).  The schedule measures
    even column pairs, odd column pairs, even row pairs, odd row pairs, so
    every gauge generator is covered exactly once per round.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError(f"d must be an odd integer >= 3, got {d}")
    sites = _LAYOUT_SITES[layout]
    n_islands = d * d
    n_mzm = MZMS_PER_ISLAND * n_islands

    def isl(row: int, col: int) -> int:
        return row * d + col

    # Gauge rows: X-type indexed by (column pair c, row r) then Z-type by
    # (row pair rp, column c).  Grouping by stabilizer keeps stab_gauge and
    # the schedule contiguous.
    n_xg = d * (d - 1)
    gauge = np.zeros((2 * n_xg, n_mzm), dtype=np.uint8)
    xx_i, xx_j, _ = sites["xx"]
    zz_i, zz_j, _ = sites["zz"]
    for c in range(d - 1):
        for r in range(d):
            row = gauge[c * d + r]
            row ^= _island_string(n_mzm, isl(r, c), xx_i)
            row ^= _island_string(n_mzm, isl(r, c + 1), xx_j)
    for rp in range(d - 1):
        for c in range(d):
            row = gauge[n_xg + rp * d + c]
            row ^= _island_string(n_mzm, isl(rp, c), zz_i)
            row ^= _island_string(n_mzm, isl(rp + 1, c), zz_j)

    stab_gauge = np.zeros((2 * (d - 1), 2 * n_xg), dtype=np.uint8)
    for c in range(d - 1):
        stab_gauge[c, c * d : (c + 1) * d] = 1
    for rp in range(d - 1):
        stab_gauge[(d - 1) + rp, n_xg + rp * d : n_xg + (rp + 1) * d] = 1

    logical = np.zeros((2, n_mzm), dtype=np.uint8)
    for r in range(d):  # bare X-bar on column 0
        logical[0] ^= _island_string(n_mzm, isl(r, 0), sites["x"])
    for c in range(d):  # bare Z-bar on row 0
        logical[1] ^= _island_string(n_mzm, isl(0, c), sites["z"])

    corr_x = np.zeros((d, n_mzm), dtype=np.uint8)
    corr_z = np.zeros((d, n_mzm), dtype=np.uint8)
    for r in range(d):
        corr_x[r] = _island_string(n_mzm, isl(r, 0), sites["x"])
    for c in range(d):
        corr_z[c] = _island_string(n_mzm, isl(0, c), sites["z"])

    def xx_pair(r: int, c: int) -> MeasuredPair:
        si, sj, conn = sites["xx"]
        return MeasuredPair(isl(r, c), isl(r, c + 1), si, sj, conn)

    def zz_pair(rp: int, c: int) -> MeasuredPair:
        si, sj, conn = sites["zz"]
        return MeasuredPair(isl(rp, c), isl(rp + 1, c), si, sj, conn)

    steps = []
    even_cols = tuple(range(0, d - 1, 2))
    odd_cols = tuple(range(1, d - 1, 2))
    for index, cols in enumerate((even_cols, odd_cols)):
        pairs = tuple(xx_pair(r, c) for c in cols for r in range(d))
        used = {q for p in pairs for q in (p.i, p.j)}
        steps.append(
            ScheduleStep(
                index=index,
                stab_ids=cols,
                gauge_rows=tuple(c * d + r for c in cols for r in range(d)),
                pairs=pairs,
                idle=tuple(sorted(set(range(n_islands)) - used)),
            )
        )
    for index, rows in enumerate((even_cols, odd_cols), start=2):
        pairs = tuple(zz_pair(rp, c) for rp in rows for c in range(d))
        used = {q for p in pairs for q in (p.i, p.j)}
        steps.append(
            ScheduleStep(
                index=index,
                stab_ids=tuple((d - 1) + rp for rp in rows),
                gauge_rows=tuple(n_xg + rp * d + c for rp in rows for c in range(d)),
                pairs=pairs,
                idle=tuple(sorted(set(range(n_islands)) - used)),
            )
        )

    # Canonical Y representative: product of the X and Z site pairs (XOR).
    y = zeros(MZMS_PER_ISLAND)
    for s in sites["x"] + sites["z"]:
        y[s] ^= 1
    pauli_reps = {
        "X": tuple(sites["x"]),
        "Y": tuple(int(i) for i in np.flatnonzero(y)),
        "Z": tuple(sites["z"]),
    }

    layout_obj = CodeLayout(
        d=d,
        layout=layout,
        n_islands=n_islands,
        n_mzm=n_mzm,
        gauge=gauge,
        stab_gauge=stab_gauge,
        logical=logical,
        schedule=tuple(steps),
        corr_x=corr_x,
        corr_z=corr_z,
        pauli_reps=pauli_reps,
    )
    _validate(layout_obj)
    return layout_obj


def _validate(lay: CodeLayout) -> None:
    """Build-time checks of the subsystem-code commutation structure."""
    stab = lay.stab_support()
    if np.any(mat_mat_parity(stab, lay.gauge)):
        raise AssertionError("a stabilizer anticommutes with a gauge generator")
    if np.any(mat_mat_parity(lay.logical, lay.gauge)):
        raise AssertionError("a logical row anticommutes with a gauge generator")
    if np.any(mat_mat_parity(lay.logical, stab)):
        raise AssertionError("a logical row anticommutes with a stabilizer")
    cross = mat_mat_parity(lay.logical, lay.logical)
    if cross[0, 1] != 1:
        raise AssertionError("bare logical operators must anticommute")
    covered = sorted(r for st in lay.schedule for r in st.gauge_rows)
    if covered != list(range(lay.n_gauge)):
        raise AssertionError("schedule does not cover every gauge generator exactly once")


def decode_syndrome(syndrome: np.ndarray, layout: CodeLayout) -> np.ndarray:
    """Minimum-weight row/column lookup decoding of one syndrome.

    The X-type bits are consecutive column-pair differences of per-column
    Z-error indicators (and symmetrically for rows); of the two consistent
    indicator vectors the lighter one is chosen (d odd, so never a tie).
    Corrections are placed on the top row (Z) and left column (X).
    """
    syndrome = np.asarray(syndrome, dtype=np.uint8).reshape(1, -1)
    return decode_batch(syndrome, layout)[0]


def decode_batch(syndromes: np.ndarray, layout: CodeLayout) -> np.ndarray:
    """Vectorized :func:`decode_syndrome` over rows of ``syndromes``."""
    syndromes = np.asarray(syndromes, dtype=np.uint8)
    if syndromes.ndim != 2 or syndromes.shape[1] != layout.n_stab:
        raise ValueError(f"expected (B, {layout.n_stab}) syndromes")
    d = layout.d
    nb = syndromes.shape[0]

    def indicators(part: np.ndarray) -> np.ndarray:
        e = np.zeros((nb, d), dtype=np.uint8)
        e[:, 1:] = np.bitwise_xor.accumulate(part, axis=1)
        w = e.sum(axis=1)
        flip = w > (d - w)
        e[flip] ^= 1
        return e

    cols = indicators(syndromes[:, : d - 1])     # columns needing Z
    rows = indicators(syndromes[:, d - 1 :])     # rows needing X
    corr = (cols.astype(np.int64) @ layout.corr_z.astype(np.int64)) + (
        rows.astype(np.int64) @ layout.corr_x.astype(np.int64)
    )
    return (corr & 1).astype(np.uint8)


def select_syndrome(rounds) -> np.ndarray:
    """Accept the last syndrome that repeats in two consecutive rounds.

    Scans from the end; if no consecutive pair matches, the final round's
    syndrome is assumed.  Works for any window of >= 2 rounds (the protocol
    always passes 4).
    """
    rounds = [np.asarray(r, dtype=np.uint8) for r in rounds]
    if len(rounds) < 2:
        raise ValueError("need at least two rounds")
    for t in range(len(rounds) - 1, 0, -1):
        if np.array_equal(rounds[t], rounds[t - 1]):
            return rounds[t]
    return rounds[-1]


def select_syndrome_batch(stack: np.ndarray) -> np.ndarray:
    """Vectorized selector over a (rounds, B, n_stab) stack."""
    n_rounds, nb, _ = stack.shape
    accepted = stack[-1].copy()
    chosen = np.zeros(nb, dtype=bool)
    for t in range(n_rounds - 1, 0, -1):
        match = (stack[t] == stack[t - 1]).all(axis=1) & ~chosen
        accepted[match] = stack[t][match]
        chosen |= match
    return accepted


def is_logical_failure(residual: np.ndarray, layout: CodeLayout) -> bool:
    """True when the residual anticommutes with a bare logical operator.

    Gauge elements commute with both bare logical rows, so checking the two
    bare representatives is equivalent to checking every dressed logical for
    residuals in the code space.
    """
    return bool(mat_vec_parity(layout.logical, residual).any())
