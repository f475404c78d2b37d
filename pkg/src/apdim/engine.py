"""Snapshot Monte-Carlo engine: user drops, association, per-system evaluation,
estimates with confidence intervals, demand conversion, and the AP-count search.

Determinism contract: every snapshot derives its own generator from
(master_seed, deployment_id, snapshot_index), so results are bit-identical
for any thread count and evaluation order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import channel as ch
from . import planning, static_cellular, wifi, zf
from .geometry import Layout, ServiceArea, grid_ladder, place_aps

Z95 = 1.959963984540054

# Mbps/user -> GB/month/user at 100% busy-hour fraction:
# /8 bits per byte, /1024 MB per GB, x3600 busy seconds per day, x30 days.
C0_GB_MONTH_PER_MBPS = (1.0 / 1024.0) * (1.0 / 8.0) * 3600.0 * 30.0

_SALT_SNAPSHOT = 1
_SALT_PLANNING = 2

MAX_REDRAWS_PER_SNAPSHOT = 100

SYSTEMS = ("wifi-baseline", "wifi-aggressive", "static", "zf-ideal", "zf-erroneous")


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent deterministic generator for one (seed, key...) coordinate."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# Traffic and demand conversion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrafficParams:
    omega: float  # busy-hour fraction of the day
    lambda_u_per_km2: float  # mean user density

    def __post_init__(self):
        if not 0.0 < self.omega <= 1.0:
            raise ValueError(f"omega must be in (0, 1], got {self.omega}")
        if self.lambda_u_per_km2 <= 0:
            raise ValueError(f"lambda_u must be > 0, got {self.lambda_u_per_km2}")


def throughput_to_demand(mu_mbps_per_user: float, traffic: TrafficParams) -> float:
    """Busy-hour per-user throughput (Mbps) -> monthly demand (GB/month/user)."""
    if mu_mbps_per_user < 0:
        raise ValueError(f"mu must be >= 0, got {mu_mbps_per_user}")
    return C0_GB_MONTH_PER_MBPS / traffic.omega * mu_mbps_per_user


def demand_to_throughput(demand_gb_month: float, traffic: TrafficParams) -> float:
    """Inverse of throughput_to_demand."""
    if demand_gb_month < 0:
        raise ValueError(f"demand must be >= 0, got {demand_gb_month}")
    return demand_gb_month * traffic.omega / C0_GB_MONTH_PER_MBPS


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a 95% confidence interval."""

    mean: float
    count: int
    ci_low: float
    ci_high: float

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)

    def overlaps(self, other: "Estimate") -> bool:
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high


def normal_estimate(samples) -> Estimate:
    """Sample mean with a normal-approximation interval (degenerate at n = 1)."""
    samples = np.asarray(samples, dtype=float)
    n = int(samples.size)
    if n < 1:
        raise ValueError("need at least one sample")
    mean = float(samples.mean())
    hw = float(Z95 * samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return Estimate(mean=mean, count=n, ci_low=mean - hw, ci_high=mean + hw)


def wilson_estimate(successes: int, trials: int) -> Estimate:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    z2 = Z95 * Z95
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    hw = Z95 / denom * np.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))
    return Estimate(
        mean=p, count=trials, ci_low=max(0.0, center - hw), ci_high=min(1.0, center + hw)
    )


# ---------------------------------------------------------------------------
# Snapshot building blocks
# ---------------------------------------------------------------------------


def drop_users(area: ServiceArea, count: int, rng: np.random.Generator) -> np.ndarray:
    """count i.i.d. uniform user positions in the area, (count, 2)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return rng.random((count, 2)) * np.array([area.lx, area.ly])


def associate(avg_gains: np.ndarray) -> np.ndarray:
    """Attach each user to the AP with the highest average gain (lowest index on ties)."""
    return np.argmax(avg_gains, axis=0)


def select_served(
    assoc: np.ndarray, n_aps: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """One uniformly chosen user per AP that has any; APs visited in index order.

    Returns (serving_aps, user_cols): parallel arrays of AP indices and the
    column (user index) each one serves this snapshot.
    """
    order = np.argsort(assoc, kind="stable")
    sorted_assoc = assoc[order]
    ap_ids = np.arange(n_aps)
    starts = np.searchsorted(sorted_assoc, ap_ids, side="left")
    ends = np.searchsorted(sorted_assoc, ap_ids, side="right")
    serving = []
    chosen = []
    for ap in ap_ids:
        m = ends[ap] - starts[ap]
        if m == 0:
            continue
        serving.append(ap)
        chosen.append(int(order[starts[ap] + rng.integers(m)]))
    return np.array(serving, dtype=np.int64), np.array(chosen, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SnapshotResult:
    """Per-served-user outcomes of one snapshot."""

    rates_mbps: np.ndarray
    sinr: np.ndarray
    outage: np.ndarray  # sinr < gamma_t, per served user
    lambda_s_sample: float  # Mbps/km2
    served: int
    redraws: int = 0
    solver_fallbacks: int = 0


@dataclass(frozen=True, eq=False)
class DeploymentContext:
    """Deployment-static data shared by every snapshot evaluator."""

    area: ServiceArea
    prop: ch.PropagationParams
    layout: Layout
    l_ap_ap: np.ndarray  # average AP-to-AP gains (diagonal unused)
    n_users: int
    sigma_z2: float

    @property
    def n_aps(self) -> int:
        return self.layout.n_aps


def make_context(
    area: ServiceArea,
    prop: ch.PropagationParams,
    layout: Layout,
    n_users: int,
    sigma_z2: float = 1.0,
) -> DeploymentContext:
    l_ap_ap = ch.average_gains(area, prop, layout.ap_xy, layout.ap_xy)
    return DeploymentContext(
        area=area, prop=prop, layout=layout, l_ap_ap=l_ap_ap, n_users=n_users, sigma_z2=sigma_z2
    )


def _snapshot_common(ctx: DeploymentContext, rng: np.random.Generator):
    """Steps shared by all systems: drop, associate, select one user per AP."""
    users = drop_users(ctx.area, ctx.n_users, rng)
    avg = ch.average_gains(ctx.area, ctx.prop, ctx.layout.ap_xy, users)
    assoc = associate(avg)
    serving, cols = select_served(assoc, ctx.n_aps, rng)
    return avg, serving, cols


class WifiSnapshotEvaluator:
    """One Wi-Fi transmission epoch: contention graph, SSI draw, rate equation."""

    def __init__(
        self,
        ctx: DeploymentContext,
        params: wifi.WifiParams,
        assignment: planning.ChannelAssignment,
        w_total_mhz: float,
        sigma2_mw: float,
        gamma_t_linear: float,
    ):
        self.ctx = ctx
        self.params = params
        self.assignment = assignment
        self.w_total_mhz = w_total_mhz
        self.sigma2_mw = sigma2_mw
        self.gamma_t_linear = gamma_t_linear

    def evaluate(self, rng: np.random.Generator) -> SnapshotResult:
        ctx = self.ctx
        avg, serving, cols = _snapshot_common(ctx, rng)
        z = ch.draw_fading(rng, (ctx.n_aps, cols.shape[0]), ctx.sigma_z2)
        gains = avg[:, cols] * np.abs(z) ** 2
        z_ap = ch.draw_symmetric_fading(rng, ctx.n_aps, ctx.sigma_z2)
        g_ap_ap = ctx.l_ap_ap * np.abs(z_ap) ** 2
        graph = wifi.build_contention_graph(
            self.assignment, g_ap_ap, self.params, participating=serving
        )
        active = wifi.sample_ssi(graph, rng)
        _, rates, sinr = wifi.wifi_rates(
            active, serving, gains, self.params, self.w_total_mhz, self.sigma2_mw
        )
        return SnapshotResult(
            rates_mbps=rates,
            sinr=sinr,
            outage=sinr < self.gamma_t_linear,
            lambda_s_sample=float(rates.sum()) / ctx.area.area_km2,
            served=int(rates.shape[0]),
        )


class StaticSnapshotEvaluator:
    """Full-buffer frequency-planned cellular snapshot."""

    def __init__(
        self,
        ctx: DeploymentContext,
        params: static_cellular.StaticParams,
        assignment: planning.ChannelAssignment,
        w_total_mhz: float,
        sigma2_mw: float,
        gamma_t_linear: float,
    ):
        self.ctx = ctx
        self.params = params
        self.assignment = assignment
        self.w_total_mhz = w_total_mhz
        self.sigma2_mw = sigma2_mw
        self.gamma_t_linear = gamma_t_linear

    def evaluate(self, rng: np.random.Generator) -> SnapshotResult:
        ctx = self.ctx
        avg, serving, cols = _snapshot_common(ctx, rng)
        z = ch.draw_fading(rng, (ctx.n_aps, cols.shape[0]), ctx.sigma_z2)
        gains = avg[:, cols] * np.abs(z) ** 2
        rates, sinr = static_cellular.static_rates(
            self.assignment, serving, gains, self.params, self.w_total_mhz, self.sigma2_mw
        )
        return SnapshotResult(
            rates_mbps=rates,
            sinr=sinr,
            outage=sinr < self.gamma_t_linear,
            lambda_s_sample=float(rates.sum()) / ctx.area.area_km2,
            served=int(rates.shape[0]),
        )


class ZfSnapshotEvaluator:
    """Multi-cell ZF snapshot: inversion precoder plus PAPC power optimization.

    With ``erroneous`` set, the precoder and powers come from CSIT that is
    per-link outdated with probability delta while rates are evaluated on the
    true (AR(1)-evolved) channel. Near-singular CSIT draws are replaced by a
    fresh fading draw, up to MAX_REDRAWS_PER_SNAPSHOT.
    """

    def __init__(
        self,
        ctx: DeploymentContext,
        params: zf.ZfParams,
        w_total_mhz: float,
        sigma2_mw: float,
        gamma_t_linear: float,
        erroneous: bool = False,
    ):
        self.ctx = ctx
        self.params = params
        self.w_total_mhz = w_total_mhz
        self.sigma2_mw = sigma2_mw
        self.gamma_t_linear = gamma_t_linear
        self.erroneous = erroneous

    def evaluate(self, rng: np.random.Generator) -> SnapshotResult:
        ctx = self.ctx
        avg, serving, cols = _snapshot_common(ctx, rng)
        sqrt_l = np.sqrt(avg[np.ix_(serving, cols)].T)  # (user j, antenna i)
        redraws = 0
        while True:
            z_base = ch.draw_fading(rng, sqrt_l.shape, ctx.sigma_z2)
            if self.erroneous:
                z_now, _ = ch.delayed_csit(
                    z_base, self.params.delta, self.params.rho, rng, ctx.sigma_z2
                )
                h_hat = sqrt_l * z_base
                h_true = sqrt_l * z_now
            else:
                h_hat = h_true = sqrt_l * z_base
            try:
                bf = zf.build_beamformer(h_hat)
                break
            except zf.SingularChannelError:
                redraws += 1
                if redraws > MAX_REDRAWS_PER_SNAPSHOT:
                    raise RuntimeError(
                        f"snapshot exceeded {MAX_REDRAWS_PER_SNAPSHOT} singular-channel redraws"
                    )
        alloc = zf.allocate_power(
            bf, self.sigma2_mw, self.params.pt_mw, self.w_total_mhz, self.params.eta_zf
        )
        if self.erroneous:
            rates, sinr = zf.zf_rates_erroneous(
                h_true, bf, alloc, self.w_total_mhz, self.sigma2_mw, self.params.eta_zf
            )
        else:
            rates, sinr = zf.zf_rates_ideal(
                alloc, self.w_total_mhz, self.sigma2_mw, self.params.eta_zf
            )
        return SnapshotResult(
            rates_mbps=rates,
            sinr=sinr,
            outage=sinr < self.gamma_t_linear,
            lambda_s_sample=float(rates.sum()) / ctx.area.area_km2,
            served=int(rates.shape[0]),
            redraws=redraws,
            solver_fallbacks=0 if alloc.converged else 1,
        )


# ---------------------------------------------------------------------------
# Monte-Carlo runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RunResult:
    lambda_s: Estimate  # Mbps/km2
    outage: Estimate  # proportion over served users, pooled
    served_total: int
    redraws: int
    solver_fallbacks: int
    lambda_samples: np.ndarray


def run_snapshots(
    evaluator,
    n_snapshots: int,
    master_seed: int,
    deployment_id: int = 0,
    threads: int = 1,
) -> RunResult:
    """Run independent snapshots and aggregate estimates.

    Snapshots may execute on a thread pool; each derives its generator from
    (master_seed, deployment_id, snapshot index) and results are aggregated in
    snapshot order, so the output is identical for any thread count.
    """
    if n_snapshots < 1:
        raise ValueError(f"n_snapshots must be >= 1, got {n_snapshots}")

    def one(s: int) -> SnapshotResult:
        rng = substream(master_seed, deployment_id, _SALT_SNAPSHOT, s)
        return evaluator.evaluate(rng)

    if threads <= 1:
        results = [one(s) for s in range(n_snapshots)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(n_snapshots)))

    lambda_samples = np.array([r.lambda_s_sample for r in results])
    outage_hits = sum(int(r.outage.sum()) for r in results)
    served_total = sum(r.served for r in results)
    return RunResult(
        lambda_s=normal_estimate(lambda_samples),
        outage=wilson_estimate(outage_hits, served_total),
        served_total=served_total,
        redraws=sum(r.redraws for r in results),
        solver_fallbacks=sum(r.solver_fallbacks for r in results),
        lambda_samples=lambda_samples,
    )


# ---------------------------------------------------------------------------
# Deployment evaluation and dimensioning
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DeploymentRecord:
    """One (deployment, system) evaluation, ready for a result row."""

    system: str
    nx: int
    ny: int
    ap_count: int
    ap_density_per_km2: float
    k_channels: Optional[int]  # K^wifi, K*, or None (ZF / no feasible K)
    outage_feasible: bool  # upper 95% bound of outage < beta
    lambda_s: Estimate
    outage: Estimate
    mu_mbps_per_user: float
    demand_gb_month: float  # demand this deployment can carry
    n_snapshots: int
    served_samples: int
    zf_redraws: int
    solver_fallbacks: int
    k_search: Optional[planning.ReuseSearchResult] = None


def _wifi_params_for(scn, system: str) -> wifi.WifiParams:
    cs = (
        scn.wifi.cs_thr_baseline_dbm
        if system == "wifi-baseline"
        else scn.wifi.cs_thr_aggressive_dbm
    )
    return wifi.WifiParams(
        cs_thr_dbm=cs, k_wifi=scn.wifi.k_wifi, eta_wifi=scn.wifi.eta_wifi, pt_mw=scn.radio.pt_mw
    )


def evaluate_deployment(
    scn,
    layout: Layout,
    system: str,
    deployment_id: int,
    n_snapshots: Optional[int] = None,
    threads: int = 1,
) -> DeploymentRecord:
    """Evaluate one system on one AP layout under a scenario.

    ``scn`` is a Scenario (see apdim.scenario); only its documented attributes
    are touched, keeping this module independent of the config layer.
    """
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}; expected one of {SYSTEMS}")
    n_snapshots = scn.engine.n_snapshots if n_snapshots is None else n_snapshots
    seed = scn.engine.seed
    ctx = make_context(scn.area, scn.propagation, layout, scn.n_users, scn.radio.sigma_z2)
    w_mhz = scn.radio.bandwidth_mhz
    sigma2 = scn.sigma2_mw
    gamma = scn.gamma_t_linear

    k_channels: Optional[int]
    k_search: Optional[planning.ReuseSearchResult] = None

    if system in ("wifi-baseline", "wifi-aggressive"):
        params = _wifi_params_for(scn, system)
        assignment = planning.assign_channels(
            ctx.l_ap_ap, params.k_wifi, substream(seed, deployment_id, _SALT_PLANNING, params.k_wifi)
        )
        evaluator = WifiSnapshotEvaluator(ctx, params, assignment, w_mhz, sigma2, gamma)
        run = run_snapshots(evaluator, n_snapshots, seed, deployment_id, threads)
        k_channels = params.k_wifi
    elif system == "static":
        sparams = static_cellular.StaticParams(eta_sta=scn.static.eta_sta, pt_mw=scn.radio.pt_mw)

        def handle(k: int) -> planning.KRecord:
            assignment = planning.assign_channels(
                ctx.l_ap_ap, k, substream(seed, deployment_id, _SALT_PLANNING, k)
            )
            ev = StaticSnapshotEvaluator(ctx, sparams, assignment, w_mhz, sigma2, gamma)
            res = run_snapshots(ev, n_snapshots, seed, deployment_id, threads)
            return planning.KRecord(
                k=k,
                lambda_s_mean=res.lambda_s.mean,
                outage_mean=res.outage.mean,
                outage_ci_high=res.outage.ci_high,
                payload=res,
            )

        k_search = planning.search_k_star(ctx.n_aps, scn.static.k_max, scn.radio.beta, handle)
        if k_search.feasible:
            best = k_search.record_for(k_search.k_star)
            k_channels = k_search.k_star
        else:
            # No K met the constraint; report the least-bad K as a diagnostic.
            best = min(k_search.records, key=lambda r: (r.outage_mean, r.k))
            k_channels = None
        run = best.payload
    else:  # zf-ideal / zf-erroneous
        erroneous = system == "zf-erroneous"
        zparams = zf.ZfParams(
            eta_zf=scn.zf.eta_zf,
            pt_mw=scn.radio.pt_mw,
            delta=scn.zf.delta if erroneous else 0.0,
            rho=scn.zf.rho,
        )
        evaluator = ZfSnapshotEvaluator(ctx, zparams, w_mhz, sigma2, gamma, erroneous=erroneous)
        run = run_snapshots(evaluator, n_snapshots, seed, deployment_id, threads)
        k_channels = None

    outage_ok = run.outage.ci_high < scn.radio.beta
    if system == "static" and k_channels is None:
        outage_ok = False
    mu = run.lambda_s.mean / scn.traffic.lambda_u_per_km2
    return DeploymentRecord(
        system=system,
        nx=layout.nx,
        ny=layout.ny,
        ap_count=layout.n_aps,
        ap_density_per_km2=layout.density_per_km2,
        k_channels=k_channels,
        outage_feasible=outage_ok,
        lambda_s=run.lambda_s,
        outage=run.outage,
        mu_mbps_per_user=mu,
        demand_gb_month=throughput_to_demand(max(mu, 0.0), scn.traffic),
        n_snapshots=n_snapshots,
        served_samples=run.served_total,
        zf_redraws=run.redraws,
        solver_fallbacks=run.solver_fallbacks,
        k_search=k_search,
    )


@dataclass(frozen=True, eq=False)
class SystemDimensioning:
    system: str
    records: tuple[DeploymentRecord, ...]
    # demand (GB/month/user) -> minimal feasible record, or None if infeasible up to cap
    minimums: dict
    ladder_cap: int


@dataclass(frozen=True, eq=False)
class DimensioningResult:
    demand_grid: tuple[float, ...]
    ladder: tuple[tuple[int, int], ...]
    per_system: dict


def dimension(
    scn,
    systems: Sequence[str],
    n_snapshots: Optional[int] = None,
    threads: int = 1,
    stop_when_satisfied: bool = True,
    progress: Optional[Callable[[str], None]] = None,
) -> DimensioningResult:
    """Minimum AP count per demand point, per system, walking the grid ladder.

    A deployment is feasible for demand D when the upper 95% bound of its
    outage estimate is below beta and its mean area throughput covers
    mu(D) * E[lambda_u]. The ladder walk stops early once every demand point
    has found its minimum, unless ``stop_when_satisfied`` is off.
    """
    demand_grid = tuple(scn.demand_gb_month)
    if any(b < a for a, b in zip(demand_grid, demand_grid[1:])):
        raise ValueError("demand grid must be sorted ascending")
    ladder = tuple(grid_ladder(scn.engine.ladder_max_aps))
    targets = {
        d: demand_to_throughput(d, scn.traffic) * scn.traffic.lambda_u_per_km2
        for d in demand_grid
    }
    per_system = {}
    for system in systems:
        records = []
        minimums = {d: None for d in demand_grid}
        for rung_id, (nx, ny) in enumerate(ladder):
            layout = place_aps(scn.area, nx, ny)
            rec = evaluate_deployment(scn, layout, system, rung_id, n_snapshots, threads)
            records.append(rec)
            if progress is not None:
                progress(
                    f"{system} {nx}x{ny}: lambda_s={rec.lambda_s.mean:.4g} Mbps/km2 "
                    f"outage={rec.outage.mean:.4f} feasible={rec.outage_feasible}"
                )
            for d in demand_grid:
                if minimums[d] is None and rec.outage_feasible and rec.lambda_s.mean >= targets[d]:
                    minimums[d] = rec
            if stop_when_satisfied and all(v is not None for v in minimums.values()):
                break
        per_system[system] = SystemDimensioning(
            system=system,
            records=tuple(records),
            minimums=minimums,
            ladder_cap=scn.engine.ladder_max_aps,
        )
    return DimensioningResult(demand_grid=demand_grid, ladder=ladder, per_system=per_system)
