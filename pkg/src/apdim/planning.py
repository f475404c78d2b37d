"""Frequency planning: greedy min-interference channel assignment and the K* search.

The same assignment heuristic serves both the Wi-Fi channelization and the
static-cellular reuse plan; planning is done once per deployment on average
path gains, never per fading snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True, eq=False)
class ChannelAssignment:
    """Total map AP index -> channel index in [0, k)."""

    k: int
    channel_of: np.ndarray  # (n_aps,) int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if np.any(self.channel_of < 0) or np.any(self.channel_of >= self.k):
            raise ValueError("channel indices must lie in [0, k)")

    def aps_on(self, ch: int) -> np.ndarray:
        return np.flatnonzero(self.channel_of == ch)


def assign_channels(l_ap_ap: np.ndarray, k: int, rng: np.random.Generator) -> ChannelAssignment:
    """Greedy assignment: visit APs in random order, pick the least-interfered channel.

    Each visited AP gets the channel minimizing the aggregate average
    interference sum(L_ij) over already-assigned co-channel APs j (the common
    transmit power scales all candidates equally and is omitted). Ties break
    toward the lowest channel index, so empty channels fill first.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = l_ap_ap.shape[0]
    channel_of = np.full(n, -1, dtype=np.int64)
    aggregate = np.zeros((n, k))  # aggregate[i, c]: avg interference at AP i from channel c
    for i in rng.permutation(n):
        c = int(np.argmin(aggregate[i]))
        channel_of[i] = c
        others = np.arange(n) != i
        aggregate[others, c] += l_ap_ap[i, others]
    return ChannelAssignment(k=k, channel_of=channel_of)


@dataclass(frozen=True)
class KRecord:
    """Engine evaluation of one reuse number K."""

    k: int
    lambda_s_mean: float  # Mbps/km2
    outage_mean: float
    outage_ci_high: float
    payload: object = None  # whatever the engine handle wants to keep per K


@dataclass(frozen=True)
class ReuseSearchResult:
    k_star: int | None  # None = no K met the outage constraint
    records: tuple[KRecord, ...]

    @property
    def feasible(self) -> bool:
        return self.k_star is not None

    def record_for(self, k: int) -> KRecord:
        for rec in self.records:
            if rec.k == k:
                return rec
        raise KeyError(f"no record for K={k}")


def search_k_star(
    n_aps: int,
    k_max: int,
    beta: float,
    evaluate: Callable[[int], KRecord],
) -> ReuseSearchResult:
    """Exhaustively evaluate K = 1..min(k_max, n_aps), return the smallest feasible K.

    ``evaluate`` runs the Monte-Carlo engine for one K and returns its record;
    K is feasible when the estimated outage satisfies nu < beta. All per-K
    records are kept for diagnostics whether or not a feasible K exists.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    records = []
    k_star = None
    for k in range(1, min(k_max, n_aps) + 1):
        rec = evaluate(k)
        records.append(rec)
        if k_star is None and rec.outage_mean < beta:
            k_star = k
    return ReuseSearchResult(k_star=k_star, records=tuple(records))
