"""Radio channel model: multiwall pathloss, Rayleigh block fading, delayed CSIT.

All powers are linear milliwatts unless a name says dB/dBm. Gain matrices are
indexed [transmitter, receiver].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Layout, ServiceArea, crossing_counts

# Pathloss is evaluated at max(d, 1 m); the model diverges below the 1 m
# intercept that the constant-loss term represents.
MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class PropagationParams:
    """Multiwall pathloss parameters: constant loss, exponent, per-wall loss."""

    l0_db: float
    alpha: float
    lw_db: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.lw_db < 0:
            raise ValueError(f"per-wall loss must be >= 0 dB, got {self.lw_db}")


def path_loss_db(params: PropagationParams, d_m, phi):
    """Pathloss L0 + 10*alpha*log10(d) + phi*Lw in dB. Scalar or elementwise.

    Distances below 1 m are clamped to 1 m; d <= 0 is rejected.
    """
    d_m = np.asarray(d_m, dtype=float)
    if np.any(d_m <= 0.0):
        raise ValueError("distance must be positive")
    d_m = np.maximum(d_m, MIN_DISTANCE_M)
    loss = params.l0_db + 10.0 * params.alpha * np.log10(d_m) + np.asarray(phi) * params.lw_db
    return loss if loss.ndim else float(loss)


def linear_gain(loss_db):
    """dB loss -> linear power gain 10^(-loss/10)."""
    out = 10.0 ** (-np.asarray(loss_db, dtype=float) / 10.0)
    return out if out.ndim else float(out)


def average_gains(area: ServiceArea, params: PropagationParams, tx_xy, rx_xy) -> np.ndarray:
    """Linear average path gains between all tx/rx point pairs, (n_tx, n_rx).

    Euclidean distance (clamped at 1 m) plus the strict wall-crossing count.
    """
    tx_xy = np.atleast_2d(np.asarray(tx_xy, dtype=float))
    rx_xy = np.atleast_2d(np.asarray(rx_xy, dtype=float))
    diff = tx_xy[:, None, :] - rx_xy[None, :, :]
    d = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), MIN_DISTANCE_M)
    phi = crossing_counts(area, tx_xy, rx_xy)
    return linear_gain(params.l0_db + 10.0 * params.alpha * np.log10(d) + phi * params.lw_db)


def noise_power_mw(boltzmann_j_per_k: float, temperature_k: float, bandwidth_hz: float) -> float:
    """Thermal noise power k*T*W over the given bandwidth, in mW."""
    return boltzmann_j_per_k * temperature_k * bandwidth_hz * 1e3


def draw_fading(rng: np.random.Generator, shape, sigma_z2: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian draws with E[|z|^2] = sigma_z2."""
    scale = np.sqrt(sigma_z2 / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


def draw_symmetric_fading(rng: np.random.Generator, n: int, sigma_z2: float = 1.0) -> np.ndarray:
    """Reciprocal fading matrix for AP-to-AP links: z[i, x] == z[x, i], zero diagonal."""
    z = np.zeros((n, n), dtype=complex)
    if n > 1:
        iu = np.triu_indices(n, k=1)
        z[iu] = draw_fading(rng, iu[0].shape, sigma_z2)
        z = z + z.T
    return z


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One block-fading snapshot: average gains L, fading Z, H = sqrt(L)*Z, G = |H|^2."""

    L: np.ndarray
    Z: np.ndarray
    H: np.ndarray
    G: np.ndarray


def realization_from(L: np.ndarray, Z: np.ndarray) -> ChannelRealization:
    H = np.sqrt(L) * Z
    return ChannelRealization(L=L, Z=Z, H=H, G=np.abs(H) ** 2)


def draw_realization(
    layout: Layout,
    users,
    params: PropagationParams,
    rng: np.random.Generator,
    sigma_z2: float = 1.0,
) -> ChannelRealization:
    """Draw one AP-to-user channel snapshot for the given user positions."""
    users = np.atleast_2d(np.asarray(users, dtype=float))
    if users.shape[0] == 0:
        raise ValueError("users must be nonempty")
    L = average_gains(layout.area, params, layout.ap_xy, users)
    Z = draw_fading(rng, L.shape, sigma_z2)
    return realization_from(L, Z)


@dataclass(frozen=True, eq=False)
class DelayedChannel:
    """CSIT view of a channel: h_hat entries equal the true channel except on outdated links."""

    h_hat: np.ndarray
    outdated_mask: np.ndarray


def delayed_csit(
    z_prev: np.ndarray,
    delta: float,
    rho: float,
    rng: np.random.Generator,
    sigma_z2: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Evolve fading past a feedback delay; the CSIT keeps the pre-delay state.

    Each link is independently outdated with probability ``delta``. On an
    outdated link the current fading is the AR(1) step
    z_now = rho * z_prev + sqrt(1 - rho^2) * q with q ~ CN(0, sigma_z2);
    elsewhere z_now == z_prev, so the CSIT (always z_prev) is exact there.

    Returns (z_now, outdated_mask). The caller builds h_hat = sqrt(L) * z_prev
    and the true channel from z_now; average gains are shared.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must be in [0, 1], got {delta}")
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    z_prev = np.asarray(z_prev)
    outdated = rng.random(z_prev.shape) < delta
    q = draw_fading(rng, z_prev.shape, sigma_z2)
    evolved = rho * z_prev + np.sqrt(1.0 - rho**2) * q
    z_now = np.where(outdated, evolved, z_prev)
    return z_now, outdated
