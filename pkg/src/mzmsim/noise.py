"""Stochastic Majorana noise models for tetron islands.

Implements the four models (Qp, QpBf, MC, PMC) as a three-stage process per
time step: step 0 relaxes odd-parity islands, step 1 applies single-island
events and (for MC/PMC) correlated events across measured pairs, step 2
flips classical measurement bits.  A long-lived-excitation variant of step 0
(hopping decision tree) is provided as an optional extension.

Every event is drawn from explicit outcome tables; the same tables back the
single-shot sampling operations, the vectorized batch sampler used by the
Monte Carlo engine, and the analytic class distributions used as test
oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .code import CodeLayout, MeasuredPair, ScheduleStep
from .frame import MZMS_PER_ISLAND, mat_vec_parity, zeros

N_SITES = MZMS_PER_ISLAND  # 2m with m = 2


class ModelKind(Enum):
    QP = "Qp"
    QPBF = "QpBf"
    MC = "MC"
    PMC = "PMC"
    MC_LONG_LIVED = "MCLongLived"


#: Models whose step 1 draws correlated events on measured pairs.
CORRELATED_MODELS = frozenset({ModelKind.MC, ModelKind.PMC, ModelKind.MC_LONG_LIVED})


@dataclass(frozen=True)
class ModelParams:
    """User-facing noise knobs: excitation p_k, relaxation r, correlation q.

    ``p0``/``p1``/``p2`` are per-context excitation probabilities (idle,
    two-MZM measurement, four-MZM measurement); Qp and QpBf use ``p0`` for
    every island.  ``q`` is the k=2 correlation parameter (q0 = q1 = 0).
    ``p_mst1``/``p_mst2`` are measurement bit-flip probabilities, and
    ``p_hyb`` is an optional additive hybridization contribution to the
    pair-wise dephasing probability.
    """

    model: ModelKind
    p0: float
    p1: float | None = None
    p2: float | None = None
    r: float = 0.0
    q: float = 0.0
    p_mst1: float = 0.0
    p_mst2: float = 0.0
    p_hyb: float = 0.0
    m: int = 2

    def __post_init__(self):
        if self.m != 2:
            raise ValueError("only tetron islands (m = 2) are supported")
        object.__setattr__(self, "p1", self.p0 if self.p1 is None else self.p1)
        object.__setattr__(self, "p2", self.p0 if self.p2 is None else self.p2)
        for name in ("p0", "p1", "p2", "r", "q", "p_mst1", "p_mst2", "p_hyb"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} outside [0, 1]")
        if self.model in (ModelKind.QP, ModelKind.QPBF) and self.q != 0.0:
            raise ValueError(f"{self.model.value} has no correlation parameter (q must be 0)")
        if self.model is ModelKind.QP and (self.p_mst1 or self.p_mst2):
            raise ValueError("Qp has perfect measurements (p_mst must be 0)")


@dataclass(frozen=True)
class EventProbs:
    """Derived per-event probabilities, indexed by measurement rank k."""

    model: ModelKind
    p_qp: tuple[float, float, float]
    p_pair: tuple[float, float, float]
    p_odd: tuple[float, float, float]
    p_cor_odd: float
    p_cor_even: float
    p_mst: tuple[float, float, float]  # p_mst[0] unused (idle islands)

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "p_qp": list(self.p_qp),
            "p_pair": list(self.p_pair),
            "p_odd": list(self.p_odd),
            "p_cor_odd": self.p_cor_odd,
            "p_cor_even": self.p_cor_even,
            "p_mst": list(self.p_mst),
        }


def derive_event_probs(params: ModelParams) -> EventProbs:
    """Expand model parameters into per-event probabilities.

    p_pair[k] = p_k (1-q_k)(1-r), p_qp[k] = p_k (1-q_k) r, p_odd[k] = 1 - p_qp[k],
    p_cor_even = 2 p_2 q (1-r), p_cor_odd = 2 p_2 q r, with q_0 = q_1 = 0.
    Qp/QpBf use p_k = p0 for all k and q = 0.
    """
    if params.model in (ModelKind.QP, ModelKind.QPBF):
        pk = (params.p0, params.p0, params.p0)
    else:
        pk = (params.p0, params.p1, params.p2)
    qk = (0.0, 0.0, params.q)
    r = params.r
    p_qp = tuple(p * (1.0 - q) * r for p, q in zip(pk, qk))
    p_pair = tuple(p * (1.0 - q) * (1.0 - r) + params.p_hyb for p, q in zip(pk, qk))
    p_odd = tuple(1.0 - x for x in p_qp)
    if params.model in CORRELATED_MODELS:
        p_cor_even = 2.0 * params.p2 * params.q * (1.0 - r)
        p_cor_odd = 2.0 * params.p2 * params.q * r
    else:
        p_cor_even = p_cor_odd = 0.0
    p_mst = (0.0, params.p_mst1, params.p_mst2)

    probs = EventProbs(
        model=params.model,
        p_qp=p_qp,
        p_pair=p_pair,
        p_odd=p_odd,
        p_cor_odd=p_cor_odd,
        p_cor_even=p_cor_even,
        p_mst=p_mst,
    )
    for k in range(3):
        for name in ("p_qp", "p_pair", "p_odd", "p_mst"):
            v = getattr(probs, name)[k]
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"derived {name}[{k}] = {v} outside [0, 1]")
        if p_qp[k] + p_pair[k] > 1.0:
            raise ValueError(f"single-island event probability exceeds 1 at k = {k}")
    if not 0.0 <= p_cor_odd + p_cor_even <= 1.0:
        raise ValueError("correlated event probability outside [0, 1]")
    return probs


@dataclass(frozen=True)
class StepContext:
    """Per-island roles for one time step: measured pairs (k=2) and idle (k=0).

    ``gauge_rows`` lists the gauge generators read out at the end of the
    step; ``None`` means all of them (the Qp/QpBf protocols measure every
    stabilizer at once).
    """

    n_islands: int
    pairs: tuple[MeasuredPair, ...] = ()
    idle: tuple[int, ...] = ()
    gauge_rows: tuple[int, ...] | None = None

    def __post_init__(self):
        seen: set[int] = set()
        for p in self.pairs:
            for q in (p.i, p.j):
                if q in seen:
                    raise ValueError(f"island {q} appears in more than one measurement")
                seen.add(q)
        if seen & set(self.idle):
            raise ValueError("an island cannot be both idle and measured")

    @classmethod
    def all_idle(cls, n_islands: int) -> "StepContext":
        return cls(n_islands=n_islands, idle=tuple(range(n_islands)))

    @classmethod
    def from_schedule_step(cls, layout: CodeLayout, step: ScheduleStep) -> "StepContext":
        return cls(
            n_islands=layout.n_islands,
            pairs=step.pairs,
            idle=step.idle,
            gauge_rows=step.gauge_rows,
        )


# ---------------------------------------------------------------------------
# Outcome tables


def _canon_class(bits: int) -> int:
    """Canonical computational class of a 4-bit island string (mod 1111)."""
    return min(bits, bits ^ 0xF)


def _bits_of_sites(sites) -> int:
    b = 0
    for s in sites:
        b ^= 1 << s
    return b


@dataclass(frozen=True)
class SingleIslandTable:
    """Step-1(a) outcome table for one island.

    Outcome 0 is "no event"; outcomes 1..4 are quasiparticle events on sites
    0..3; outcomes 5..20 are ordered pairs (a, b) in a-major order.  ``site2``
    is -1 for quasiparticle outcomes.
    """

    probs: np.ndarray        # (21,)
    site1: np.ndarray        # (21,) int8, -1 for "no event"
    site2: np.ndarray        # (21,) int8
    parity_delta: np.ndarray  # (21,) uint8
    relax_probs: np.ndarray  # (4,) step-0 site probabilities

    @property
    def event_prob(self) -> float:
        return float(self.probs[1:].sum())

    @property
    def relax_prob(self) -> float:
        return float(self.relax_probs.sum())

    def nontrivial_prob(self) -> float:
        keep = ~((self.site1 == self.site2) | (self.site1 < 0))
        return float(self.probs[keep].sum())


def single_island_table(
    probs: EventProbs,
    model: ModelKind,
    k: int,
    measured_sites: tuple[int, ...] = (),
) -> SingleIslandTable:
    """Build the per-island outcome table for a k-island measurement context.

    For PMC with k >= 1, events touching only unmeasured MZMs use the k=0
    probabilities while events touching a measured MZM use the k ones; every
    site (pair) keeps the uniform 1/2m (1/(2m)^2) combinatorial share.
    """
    pmc_split = model is ModelKind.PMC and k >= 1 and measured_sites
    meas = set(measured_sites)

    def qp_p(site: int) -> float:
        kk = k if (not pmc_split or site in meas) else 0
        return probs.p_qp[kk] / N_SITES

    def pair_p(a: int, b: int) -> float:
        kk = k if (not pmc_split or (a in meas or b in meas)) else 0
        return probs.p_pair[kk] / N_SITES**2

    def odd_p(site: int) -> float:
        kk = k if (not pmc_split or site in meas) else 0
        return probs.p_odd[kk] / N_SITES

    n_out = 1 + N_SITES + N_SITES**2
    p = np.zeros(n_out)
    s1 = np.full(n_out, -1, dtype=np.int8)
    s2 = np.full(n_out, -1, dtype=np.int8)
    pd = np.zeros(n_out, dtype=np.uint8)
    idx = 1
    for a in range(N_SITES):
        p[idx], s1[idx], pd[idx] = qp_p(a), a, 1
        idx += 1
    for a in range(N_SITES):
        for b in range(N_SITES):
            p[idx], s1[idx], s2[idx] = pair_p(a, b), a, b
            idx += 1
    p[0] = 1.0 - p[1:].sum()
    if p[0] < -1e-12:
        raise ValueError("single-island event probabilities exceed 1")
    p[0] = max(p[0], 0.0)
    relax = np.array([odd_p(s) for s in range(N_SITES)])
    return SingleIslandTable(p, s1, s2, pd, relax)


@dataclass(frozen=True)
class CorrelatedTable:
    """Correlated-event outcomes for one measured pair, in local sites.

    ``sites_i``/``sites_j`` hold up to two MZM sites applied on each island
    (-1 padding); repeated sites cancel under XOR, matching gamma^2 = 1.
    """

    probs: np.ndarray         # (N,)
    sites_i: np.ndarray       # (N, 2) int8
    sites_j: np.ndarray       # (N, 2) int8
    parity_delta_i: np.ndarray  # (N,)
    parity_delta_j: np.ndarray  # (N,)
    is_odd: np.ndarray        # (N,) bool

    @property
    def event_prob(self) -> float:
        return float(self.probs.sum())

    def nontrivial_mask(self) -> np.ndarray:
        bits_i = np.zeros(len(self.probs), dtype=np.int64)
        bits_j = np.zeros(len(self.probs), dtype=np.int64)
        for col in range(2):
            si, sj = self.sites_i[:, col], self.sites_j[:, col]
            bits_i ^= np.where(si >= 0, 1 << np.maximum(si, 0), 0)
            bits_j ^= np.where(sj >= 0, 1 << np.maximum(sj, 0), 0)
        return (bits_i != 0) | (bits_j != 0)

    def nontrivial_prob(self) -> float:
        return float(self.probs[self.nontrivial_mask()].sum())


def correlated_table(
    probs: EventProbs,
    model: ModelKind,
    connected: tuple[tuple[int, int], tuple[int, int]],
) -> CorrelatedTable:
    """Enumerate correlated-event outcomes for a four-MZM measured pair.

    MC draws odd events uniformly over {odd island} x {single MZM} x {ordered
    pair on the partner} and even events over ordered-pair x ordered-pair.
    PMC restricts to strings whose transfer pair is one of the two
    dot-connected MZM pairs.  Totals are p_cor_odd and p_cor_even.
    """
    rows: list[tuple[float, tuple[int, ...], tuple[int, ...], int, int, bool]] = []
    if model is ModelKind.PMC:
        for init_slot in (0, 1):
            for a in range(N_SITES):
                for conn in connected:
                    own, other = (conn[0], conn[1]) if init_slot == 0 else (conn[1], conn[0])
                    # odd: excitation created (a), transferred through the dot
                    # (own, other); the partner island is left odd.
                    odd_i = (a, own) if init_slot == 0 else (other,)
                    odd_j = (other,) if init_slot == 0 else (a, own)
                    rows.append((probs.p_cor_odd / 16.0, odd_i, odd_j, 0 if init_slot == 0 else 1, 1 if init_slot == 0 else 0, True))
                    for c in range(N_SITES):
                        ev_i = (a, own) if init_slot == 0 else (other, c)
                        ev_j = (other, c) if init_slot == 0 else (a, own)
                        rows.append((probs.p_cor_even / 64.0, ev_i, ev_j, 0, 0, False))
    elif model in CORRELATED_MODELS:
        for odd_slot in (0, 1):
            for a in range(N_SITES):
                for b in range(N_SITES):
                    for c in range(N_SITES):
                        si = (a,) if odd_slot == 0 else (b, c)
                        sj = (b, c) if odd_slot == 0 else (a,)
                        rows.append((probs.p_cor_odd / 128.0, si, sj, 1 - odd_slot, odd_slot, True))
        for a in range(N_SITES):
            for b in range(N_SITES):
                for c in range(N_SITES):
                    for d_ in range(N_SITES):
                        rows.append((probs.p_cor_even / 256.0, (a, b), (c, d_), 0, 0, False))
    else:
        rows = []

    n = len(rows)
    tab = CorrelatedTable(
        probs=np.array([r[0] for r in rows]) if n else np.zeros(0),
        sites_i=np.array([list(r[1]) + [-1] * (2 - len(r[1])) for r in rows], dtype=np.int8).reshape(n, 2),
        sites_j=np.array([list(r[2]) + [-1] * (2 - len(r[2])) for r in rows], dtype=np.int8).reshape(n, 2),
        parity_delta_i=np.array([r[3] for r in rows], dtype=np.uint8),
        parity_delta_j=np.array([r[4] for r in rows], dtype=np.uint8),
        is_odd=np.array([r[5] for r in rows], dtype=bool),
    )
    return tab


# ---------------------------------------------------------------------------
# Vectorized sampler


def _categorical(u: np.ndarray, cdf_rows: np.ndarray) -> np.ndarray:
    """Row-wise inverse-CDF lookup; cdf_rows is (n, K) or (K,)."""
    if cdf_rows.ndim == 1:
        return np.searchsorted(cdf_rows, u, side="right").astype(np.int64)
    return (u[:, None] >= cdf_rows[:, :-1]).sum(axis=1)


class StepSampler:
    """Vectorized noise sampler for one time-step context.

    Operates in place on a batch of frames (B, n_mzm) and parities
    (B, n_islands).  The same tables drive the single-shot operations and the
    analytic distributions, so there is a single definition of each model.
    """

    def __init__(self, ctx: StepContext, probs: EventProbs, model: ModelKind):
        if model is not probs.model:
            raise ValueError("context model and derived probabilities disagree")
        self.ctx = ctx
        self.model = model
        self.n_islands = ctx.n_islands

        tables: list[SingleIslandTable] = [None] * ctx.n_islands  # type: ignore[list-item]
        for isl in ctx.idle:
            tables[isl] = single_island_table(probs, model, 0)
        for p in ctx.pairs:
            tables[p.i] = single_island_table(probs, model, 2, p.sites_i)
            tables[p.j] = single_island_table(probs, model, 2, p.sites_j)
        for isl, t in enumerate(tables):
            if t is None:
                raise ValueError(f"island {isl} missing from context")
        self.tables = tables

        self.evt_prob = np.array([t.event_prob for t in tables])
        with np.errstate(invalid="ignore", divide="ignore"):
            cdf = np.cumsum(np.stack([t.probs[1:] for t in tables]), axis=1)
            tot = self.evt_prob[:, None]
            self.out_cdf = np.where(tot > 0, cdf / np.where(tot > 0, tot, 1.0), 1.0)
        self.out_cdf[:, -1] = 1.0
        self.out_site1 = np.stack([t.site1[1:] for t in tables])
        self.out_site2 = np.stack([t.site2[1:] for t in tables])
        self.out_pdelta = np.stack([t.parity_delta[1:] for t in tables])

        self.relax_prob = np.array([t.relax_prob for t in tables])
        with np.errstate(invalid="ignore", divide="ignore"):
            rc = np.cumsum(np.stack([t.relax_probs for t in tables]), axis=1)
            rt = self.relax_prob[:, None]
            self.relax_cdf = np.where(rt > 0, rc / np.where(rt > 0, rt, 1.0), 1.0)
        self.relax_cdf[:, -1] = 1.0

        self.pair_islands = np.array([[p.i, p.j] for p in ctx.pairs], dtype=np.int64).reshape(
            len(ctx.pairs), 2
        )
        self.cor_table = (
            correlated_table(probs, model, ctx.pairs[0].connected)
            if ctx.pairs and model in CORRELATED_MODELS
            else None
        )
        if self.cor_table is not None and self.cor_table.event_prob > 0:
            self.cor_prob = self.cor_table.event_prob
            self.cor_cdf = np.cumsum(self.cor_table.probs) / self.cor_prob
            self.cor_cdf[-1] = 1.0
        else:
            self.cor_prob = 0.0
            self.cor_cdf = np.ones(1)

    # -- step 0 -------------------------------------------------------------
    def sample_step0(self, rng, frames: np.ndarray, parities: np.ndarray) -> None:
        """Relax odd-parity islands with probability p_odd (per context)."""
        nb = frames.shape[0]
        u = rng.random((nb, self.n_islands))
        hit = (parities != 0) & (u < self.relax_prob[None, :])
        if not hit.any():
            return
        rows, isls = np.nonzero(hit)
        cond = u[rows, isls] / self.relax_prob[isls]
        sites = (cond[:, None] >= self.relax_cdf[isls, :-1]).sum(axis=1)
        np.bitwise_xor.at(frames, (rows, isls * N_SITES + sites), np.uint8(1))
        parities[rows, isls] ^= 1

    # -- step 1(a) ----------------------------------------------------------
    def sample_step1a(self, rng, frames, parities, allow: np.ndarray | None = None) -> None:
        """One single-island event per island (quasiparticle or pair)."""
        nb = frames.shape[0]
        u = rng.random((nb, self.n_islands))
        hit = u < self.evt_prob[None, :]
        if allow is not None:
            hit &= allow
        if not hit.any():
            return
        rows, isls = np.nonzero(hit)
        cond = u[rows, isls] / self.evt_prob[isls]
        out = (cond[:, None] >= self.out_cdf[isls, :-1]).sum(axis=1)
        self._apply_single(frames, parities, rows, isls, out)

    def _apply_single(self, frames, parities, rows, isls, out) -> None:
        s1 = self.out_site1[isls, out].astype(np.int64)
        s2 = self.out_site2[isls, out].astype(np.int64)
        np.bitwise_xor.at(frames, (rows, isls * N_SITES + s1), np.uint8(1))
        m2 = s2 >= 0
        if m2.any():
            np.bitwise_xor.at(
                frames, (rows[m2], isls[m2] * N_SITES + s2[m2]), np.uint8(1)
            )
        parities[rows, isls] ^= self.out_pdelta[isls, out]

    # -- step 1(b) ----------------------------------------------------------
    def sample_step1b(self, rng, frames, parities, allow: np.ndarray | None = None) -> None:
        """At most one correlated event per measured pair."""
        n_pairs = len(self.pair_islands)
        if n_pairs == 0 or self.cor_prob == 0.0:
            return
        nb = frames.shape[0]
        u = rng.random((nb, n_pairs))
        hit = u < self.cor_prob
        if allow is not None:
            hit &= allow
        if not hit.any():
            return
        rows, pidx = np.nonzero(hit)
        cond = u[rows, pidx] / self.cor_prob
        out = _categorical(cond, self.cor_cdf)
        self._apply_correlated(frames, parities, rows, pidx, out)

    def _apply_correlated(self, frames, parities, rows, pidx, out) -> None:
        tab = self.cor_table
        isl_i = self.pair_islands[pidx, 0]
        isl_j = self.pair_islands[pidx, 1]
        for sites, isl in ((tab.sites_i, isl_i), (tab.sites_j, isl_j)):
            for col in range(2):
                s = sites[out, col].astype(np.int64)
                m = s >= 0
                if m.any():
                    np.bitwise_xor.at(
                        frames, (rows[m], isl[m] * N_SITES + s[m]), np.uint8(1)
                    )
        parities[rows, isl_i] ^= tab.parity_delta_i[out]
        parities[rows, isl_j] ^= tab.parity_delta_j[out]


# ---------------------------------------------------------------------------
# Single-shot operations (spec surface); wrap the batch sampler with B = 1.


def step0_relax(parities: np.ndarray, ctx: StepContext, probs: EventProbs, rng) -> np.ndarray:
    """Sample the step-0 relaxation events for one time step."""
    sampler = StepSampler(ctx, probs, probs.model)
    frames = np.zeros((1, ctx.n_islands * N_SITES), dtype=np.uint8)
    par = np.asarray(parities, dtype=np.uint8).reshape(1, -1).copy()
    sampler.sample_step0(rng, frames, par)
    return frames[0]


def step1_events(ctx: StepContext, probs: EventProbs, model: ModelKind, rng) -> np.ndarray:
    """Sample the step-1 single-island and correlated events for one step."""
    sampler = StepSampler(ctx, probs, model)
    frames = np.zeros((1, ctx.n_islands * N_SITES), dtype=np.uint8)
    par = np.zeros((1, ctx.n_islands), dtype=np.uint8)
    sampler.sample_step1a(rng, frames, par)
    sampler.sample_step1b(rng, frames, par)
    return frames[0]


def step2_measure(
    frame: np.ndarray, ctx: StepContext, layout: CodeLayout, probs: EventProbs, rng
) -> np.ndarray:
    """Measure this step's gauge generators, flipping each bit w.p. p_mst.

    All gauge measurements in the Bacon-Shor protocol are two-island
    (four-MZM) measurements, so the k=2 bit-flip probability applies.
    """
    rows = np.arange(layout.n_gauge) if ctx.gauge_rows is None else np.asarray(ctx.gauge_rows)
    outcomes = mat_vec_parity(layout.gauge[rows], frame)
    p = probs.p_mst[2]
    if p > 0:
        outcomes = outcomes ^ (rng.random(len(rows)) < p).astype(np.uint8)
    return outcomes


def step0_long_lived(
    parities: np.ndarray,
    ctx: StepContext,
    p_hop: float,
    p_odd: float,
    p_stay: float,
    rng,
    final_relax: float | None = None,
) -> np.ndarray:
    """Long-lived-excitation step 0: relax / hop / stay decision tree.

    Per measured set, while a member island is odd: hop the excitation
    across a dot-connected pair (recursing), relax it (exit), or leave it
    (exit).  The tree is truncated after k^2 iterations; the final
    iteration drops the hop branch and uses the renormalized relax
    probability ``final_relax`` (p_odd / (p_odd + p_stay) unless given,
    which is 1 - exp(-1/r) for the physical triple).  Idle islands have no
    hop channel, so they use the same renormalized relax/stay split.
    """
    if min(p_hop, p_odd, p_stay) < 0 or abs(p_hop + p_odd + p_stay - 1.0) > 1e-9:
        raise ValueError("(p_hop, p_odd, p_stay) must be a probability triple summing to 1")
    parities = np.asarray(parities, dtype=np.uint8).copy()
    out = zeros(ctx.n_islands * N_SITES)
    no_hop_total = p_odd + p_stay
    p_relax_cond = p_odd / no_hop_total if no_hop_total > 0 else 0.0
    if final_relax is None:
        # At p_hop = 1 the relax/stay split is unrecoverable; keep the
        # excitation in that degenerate case.
        final_relax = p_relax_cond

    def relax(isl: int) -> None:
        site = int(rng.integers(N_SITES))
        out[isl * N_SITES + site] ^= 1
        parities[isl] ^= 1

    for isl in ctx.idle:
        if parities[isl] and rng.random() < p_relax_final:
            relax(isl)

    for pair in ctx.pairs:
        members = (pair.i, pair.j)
        k = len(members)
        for depth in range(k * k):
            odd = [q for q in members if parities[q]]
            if not odd:
                break
            actor = odd[0] if len(odd) == 1 else odd[int(rng.integers(len(odd)))]
            last = depth == k * k - 1
            u = rng.random()
            if not last and u < p_hop:
                conn = pair.connected[int(rng.integers(2))]
                if actor == pair.i:
                    sa, sb, other = conn[0], conn[1], pair.j
                else:
                    sa, sb, other = conn[1], conn[0], pair.i
                out[actor * N_SITES + sa] ^= 1
                out[other * N_SITES + sb] ^= 1
                parities[actor] ^= 1
                parities[other] ^= 1
                continue
            # conditional relax/stay (the final step excludes hopping)
            u2 = (u - p_hop) / no_hop_total if not last else u
            if u2 < p_relax_final:
                relax(actor)
            break
    return out


def long_lived_probs(q: float, r: float) -> tuple[float, float, float]:
    """(p_hop, p_odd, p_stay) for the long-lived-excitation step 0."""
    survive = math.exp(-1.0 / r) if r > 0 else 0.0
    return q, (1.0 - q) * (1.0 - survive), (1.0 - q) * survive


# ---------------------------------------------------------------------------
# Analytic distributions (test oracles)


def single_island_distribution(
    probs: EventProbs,
    parity: int,
    k: int,
    measured_sites: tuple[int, ...] = (),
) -> dict[int, float]:
    """Exact class distribution of the composed step0 + step1(a) sampler.

    Returns probabilities over the 8 computationally distinct single-island
    bit strings (canonical 4-bit value, full flips identified).  The
    even-parity column reproduces the standard table; the odd-parity column
    is the exact two-stage composition, which differs from the published
    odd-parity table at order p_odd * p_pair (the two-stage semantics is
    normative here).
    """
    tab = single_island_table(probs, probs.model, k, measured_sites)
    relax_total = tab.relax_prob
    step0 = [(0, 1.0 - relax_total)] if parity else [(0, 1.0)]
    if parity:
        step0 += [(1 << s, tab.relax_probs[s]) for s in range(N_SITES)]

    dist: dict[int, float] = {}
    for bits0, w0 in step0:
        if w0 == 0.0:
            continue
        for o in range(len(tab.probs)):
            w1 = tab.probs[o]
            if w1 == 0.0:
                continue
            bits = bits0
            if tab.site1[o] >= 0:
                bits ^= 1 << int(tab.site1[o])
            if tab.site2[o] >= 0:
                bits ^= 1 << int(tab.site2[o])
            c = _canon_class(bits)
            dist[c] = dist.get(c, 0.0) + w0 * w1
    return dist


def correlated_class_distribution(
    probs: EventProbs,
    model: ModelKind,
    connected: tuple[tuple[int, int], tuple[int, int]],
) -> dict[tuple[int, int], float]:
    """Exact class distribution of one correlated-event draw on a pair.

    Keys are (class on island i, class on island j); the no-event mass is
    accumulated at (0, 0).
    """
    tab = correlated_table(probs, model, connected)
    dist: dict[tuple[int, int], float] = {(0, 0): 1.0 - tab.event_prob}
    for o in range(len(tab.probs)):
        bi = _bits_of_sites([s for s in tab.sites_i[o] if s >= 0])
        bj = _bits_of_sites([s for s in tab.sites_j[o] if s >= 0])
        key = (_canon_class(bi), _canon_class(bj))
        dist[key] = dist.get(key, 0.0) + float(tab.probs[o])
    return dist


def pauli_class(name: str) -> int:
    """Canonical class of a single-island Pauli operator (standard layout)."""
    return {"I": 0, "X": 0b0110, "Y": 0b0101, "Z": 0b0011}[name]
