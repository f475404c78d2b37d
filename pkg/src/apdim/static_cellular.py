"""Frequency-planned pico-cellular rates: full-buffer downlink, reuse-K SINR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .planning import ChannelAssignment


@dataclass(frozen=True)
class StaticParams:
    eta_sta: float  # max link spectral efficiency, bps/Hz
    pt_mw: float

    def __post_init__(self):
        if self.eta_sta <= 0:
            raise ValueError(f"eta_sta must be > 0, got {self.eta_sta}")
        if self.pt_mw <= 0:
            raise ValueError(f"pt_mw must be > 0, got {self.pt_mw}")


def static_rates(
    assignment: ChannelAssignment,
    serving_aps: np.ndarray,
    gains: np.ndarray,
    params: StaticParams,
    w_total_mhz: float,
    sigma2_mw: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-user rate (Mbps) and SINR under static reuse-K planning.

    Every AP with traffic transmits in every snapshot (full buffer), so the
    interference at a served user sums over all co-channel transmitters except
    the serving AP. Each link uses w = W / K and sees noise sigma2 / K; the
    rate clamps at R_max = w * eta_sta.

    ``gains`` holds AP-to-user power gains with one column per served user,
    aligned with ``serving_aps`` (column i belongs to the user served by
    serving_aps[i]).
    """
    k = assignment.k
    w = w_total_mhz / k
    r_max = w * params.eta_sta
    noise = sigma2_mw / k

    n_served = serving_aps.shape[0]
    sinr = np.empty(n_served, dtype=float)
    channels = assignment.channel_of[serving_aps]
    for ch in np.unique(channels):
        sel = np.flatnonzero(channels == ch)
        tx = serving_aps[sel]  # co-channel transmitters (all of them transmit)
        rx = gains[np.ix_(tx, sel)] * params.pt_mw
        signal = np.diag(rx)
        interference = rx.sum(axis=0) - signal
        sinr[sel] = signal / (interference + noise)
    rates = np.minimum(w * np.log2(1.0 + sinr), r_max)
    return rates, sinr
