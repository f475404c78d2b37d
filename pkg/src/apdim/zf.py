"""Multi-cell zero-forcing: channel inversion, PAPC power optimization, rate evaluation.

The symbol-power problem is

    maximize   sum_j min{ W log2(1 + p_j / sigma2), W eta }
    subject to sum_j |w_ij|^2 p_j <= Pt   for every antenna i,   p >= 0

which, because power beyond the rate cap is wasted, equals the smooth concave
program with per-user caps p_j <= sigma2 (2^eta - 1). It is solved with a
primal log-barrier Newton method on the SNR-scaled variables q = p / sigma2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularChannelError(RuntimeError):
    """Raised when the CSIT matrix is too ill-conditioned to invert reliably."""


@dataclass(frozen=True)
class ZfParams:
    eta_zf: float  # max link spectral efficiency, bps/Hz
    pt_mw: float  # per-antenna power budget
    delta: float = 0.0  # probability a link's CSIT is outdated
    rho: float = 0.9  # fading correlation across the feedback delay

    def __post_init__(self):
        if self.eta_zf <= 0:
            raise ValueError(f"eta_zf must be > 0, got {self.eta_zf}")
        if self.pt_mw <= 0:
            raise ValueError(f"pt_mw must be > 0, got {self.pt_mw}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")


@dataclass(frozen=True, eq=False)
class Beamformer:
    """Channel-inverting beamforming matrix with its conditioning diagnostic."""

    w: np.ndarray  # (N, N) complex, H_hat @ w == I
    cond: float  # condition number of H_hat @ H_hat^dagger


COND_LIMIT = 1e12
_INVERSION_TOL = 1e-8


def build_beamformer(h_hat: np.ndarray, cond_limit: float = COND_LIMIT) -> Beamformer:
    """Invert the CSIT matrix so that every user receives only its own symbol.

    For the square N = M case the precoder H^dagger (H H^dagger)^{-1} is the
    plain matrix inverse; one step of iterative refinement keeps the
    multiply-back residual ||H_hat w - I||_inf below 1e-8. Channels whose
    H H^dagger condition number exceeds ``cond_limit`` are rejected so the
    caller can redraw the snapshot's fading.
    """
    h_hat = np.asarray(h_hat, dtype=complex)
    if h_hat.ndim != 2 or h_hat.shape[0] != h_hat.shape[1]:
        raise ValueError(f"expected a square channel matrix, got shape {h_hat.shape}")
    n = h_hat.shape[0]
    s = np.linalg.svd(h_hat, compute_uv=False)
    cond = np.inf if s[-1] == 0.0 else float((s[0] / s[-1]) ** 2)
    if cond > cond_limit:
        raise SingularChannelError(f"channel condition {cond:.3e} exceeds {cond_limit:.1e}")
    eye = np.eye(n, dtype=complex)
    w = np.linalg.solve(h_hat, eye)
    residual = eye - h_hat @ w
    if np.abs(residual).max() > _INVERSION_TOL:
        w = w + np.linalg.solve(h_hat, residual)
        if np.abs(h_hat @ w - eye).max() > _INVERSION_TOL:
            raise SingularChannelError("inversion residual did not reach tolerance")
    return Beamformer(w=w, cond=cond)


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Optimized symbol powers and the per-antenna loads they induce."""

    p_mw: np.ndarray  # (N,) symbol powers
    antenna_load_mw: np.ndarray  # (N,) sum_j |w_ij|^2 p_j
    sum_rate_mbps: float
    converged: bool
    kkt_residual: float
    newton_iterations: int


def allocate_power(
    beamformer: Beamformer,
    sigma2_mw: float,
    pt_mw: float,
    w_mhz: float,
    eta_zf: float,
) -> PowerAllocation:
    """Maximize the capped sum rate subject to the per-antenna power constraints."""
    a = np.abs(beamformer.w) ** 2  # antenna i load coefficient on user j
    q_cap = 2.0**eta_zf - 1.0  # SNR value at which the rate cap binds
    b = a * sigma2_mw  # constraint matrix in q = p / sigma2 units
    q, converged, kkt, iters = _barrier_solve(b, pt_mw, q_cap)
    p = q * sigma2_mw
    rates = np.minimum(w_mhz * np.log2(1.0 + q), w_mhz * eta_zf)
    return PowerAllocation(
        p_mw=p,
        antenna_load_mw=a @ p,
        sum_rate_mbps=float(rates.sum()),
        converged=converged,
        kkt_residual=kkt,
        newton_iterations=iters,
    )


def _barrier_solve(
    b: np.ndarray, budget: float, q_cap: float
) -> tuple[np.ndarray, bool, float, int]:
    """max sum(log(1+q)) s.t. b @ q <= budget, 0 <= q <= q_cap, via log barrier.

    The centering objective is scaled by 1/t, i.e. -f0(q) + phi(q)/t, so line
    search comparisons stay well conditioned as t grows. Returns
    (q, converged, relative KKT stationarity residual, Newton steps).
    """
    n = b.shape[1]
    m = 3 * n  # antenna constraints + lower + upper bounds
    # Strictly feasible start: shrink a uniform point until every row has slack.
    row_load = b.sum(axis=1) * q_cap
    theta = min(0.45, 0.45 * budget / max(row_load.max(), np.finfo(float).tiny))
    q = np.full(n, theta * q_cap)

    def centering_value(qv: np.ndarray, t: float) -> float:
        slack = budget - b @ qv
        if slack.min() <= 0 or qv.min() <= 0 or (q_cap - qv).min() <= 0:
            return np.inf
        phi = -np.log(slack).sum() - np.log(qv).sum() - np.log(q_cap - qv).sum()
        return float(-np.log1p(qv).sum() + phi / t)

    def scaled_gradient(qv: np.ndarray, t: float) -> np.ndarray:
        inv_slack = 1.0 / (budget - b @ qv)
        return -1.0 / (1.0 + qv) + (b.T @ inv_slack - 1.0 / qv + 1.0 / (q_cap - qv)) / t

    def grad_rel_of(g: np.ndarray, qv: np.ndarray) -> float:
        # Stationarity residual of the KKT system with the barrier multipliers
        # (exactly the scaled gradient), relative to ||grad f0||_inf.
        return float(np.abs(g).max() * (1.0 + qv.min()))

    f_scale = max(1.0, n * np.log1p(q_cap))
    gap_tol = 1e-8 * f_scale
    grad_tol = 1e-8  # well under the 1e-6 contract; ~3e-9 is the float floor here
    t = max(1.0, m / f_scale)
    total_newton = 0
    stalled = False
    while True:
        # Intermediate centers only guide the path; only the last one must
        # satisfy the tight stationarity tolerance.
        final_round = m / t <= gap_tol
        inner_tol = grad_tol if final_round else 1e-4
        for _ in range(60):
            slack = budget - b @ q
            inv_slack = 1.0 / slack
            grad = scaled_gradient(q, t)
            if grad_rel_of(grad, q) <= inner_tol:
                break
            hess = (b.T * inv_slack**2) @ b / t
            diag = 1.0 / (1.0 + q) ** 2 + (1.0 / q**2 + 1.0 / (q_cap - q) ** 2) / t
            hess[np.diag_indices_from(hess)] += diag
            try:
                step = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                stalled = True
                break
            total_newton += 1
            # Largest step keeping strict feasibility, with a 1% margin.
            alpha = 1.0
            load = b @ step
            for num, den in ((slack, load), (q, -step), (q_cap - q, step)):
                pos = den > 0
                if pos.any():
                    alpha = min(alpha, 0.99 * float((num[pos] / den[pos]).min()))
            base = centering_value(q, t)
            gts = float(grad @ step)
            accepted = False
            while alpha > 1e-13:
                cand = q + alpha * step
                val = centering_value(cand, t)
                if np.isfinite(val) and val <= base + 0.25 * alpha * gts:
                    q = cand
                    accepted = True
                    break
                # Near the center the value decrease falls below float
                # resolution; a (near-)full Newton step that shrinks the
                # gradient norm is equally valid there.
                if np.isfinite(val) and alpha >= 0.5:
                    if np.abs(scaled_gradient(cand, t)).max() < np.abs(grad).max():
                        q = cand
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                if grad_rel_of(grad, q) > 1e-7:
                    stalled = True
                break
        if stalled or m / t <= gap_tol:
            break
        t *= 30.0
    final_grad_rel = grad_rel_of(scaled_gradient(q, t), q)
    return q, not stalled, final_grad_rel, total_newton


def equal_power_baseline(beamformer: Beamformer, sigma2_mw: float, pt_mw: float, eta_zf: float) -> np.ndarray:
    """Uniform feasible powers, scaled to the tightest antenna constraint and capped."""
    a = np.abs(beamformer.w) ** 2
    tightest = a.sum(axis=1).max()
    c = pt_mw / max(tightest, np.finfo(float).tiny)
    p_cap = sigma2_mw * (2.0**eta_zf - 1.0)
    return np.full(a.shape[1], min(c, p_cap))


def zf_rates_ideal(
    alloc: PowerAllocation, w_mhz: float, sigma2_mw: float, eta_zf: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-user rate (Mbps) and effective SNR with perfect CSIT.

    Inversion leaves each user with only its own symbol plus noise, so the SNR
    is p_j / sigma2 and the rate is min{W log2(1 + SNR), W eta}.
    """
    snr = alloc.p_mw / sigma2_mw
    rates = np.minimum(w_mhz * np.log2(1.0 + snr), w_mhz * eta_zf)
    return rates, snr


def zf_rates_erroneous(
    h_true: np.ndarray,
    beamformer: Beamformer,
    alloc: PowerAllocation,
    w_mhz: float,
    sigma2_mw: float,
    eta_zf: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-user rate and SINR when the precoder was built from stale CSIT.

    The true channel applied to the stale beamformer leaves the residual
    coupling C = H_true @ W; user j keeps |c_jj|^2 p_j of signal and absorbs
    sum_{m != j} |c_jm|^2 p_m of leakage from the other users' symbols.
    """
    coupling = np.abs(np.asarray(h_true) @ beamformer.w) ** 2
    signal = np.diag(coupling) * alloc.p_mw
    leakage = coupling @ alloc.p_mw - signal
    sinr = signal / (leakage + sigma2_mw)
    rates = np.minimum(w_mhz * np.log2(1.0 + sinr), w_mhz * eta_zf)
    return rates, sinr
