"""Simulation oracle for mixture models.

Two engines with different reproducibility contracts share the counter-
based Philox generator. sample_path gives every path its own keyed
stream (key = [seed, path index]) so any single path can be regenerated
in isolation; simulate_ensemble is a vectorized generation-synchronous
engine that draws full-width uniform blocks keyed [seed, block tag], so
lane i of every block always belongs to path i and results are
bit-exact for a fixed (seed, paths) regardless of how many paths are
still alive. The two engines agree in distribution, not draw for draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InsufficientSampleError,
    ModelValidationError,
    OutOfSupportError,
)
from .mixture import MixtureModel, PathRecord

__all__ = [
    "REGIME_BASE",
    "REGIME_SCALED",
    "SimulationConfig",
    "SimulatedPath",
    "EnsembleSample",
    "PosteriorEstimate",
    "sample_path",
    "simulate_paths",
    "simulate_ensemble",
    "empirical_survival",
    "empirical_cause_cdf",
    "empirical_posterior",
]

REGIME_BASE = 0
REGIME_SCALED = 1

_REGIME_MODES = ("mixture", "base", "scaled")

_MAX_GENERATIONS = 100_000


@dataclass(frozen=True)
class SimulationConfig:
    """Simulation request.

    horizon=None runs every path to absorption (requires certain
    absorption under every regime the config can sample); a finite
    horizon right-censors. regime forces all paths into one regime
    instead of drawing it from the starting state's weight. start_state
    pins the starting state instead of drawing from the model's initial
    distribution. record_regime=False hides the latent regime label from
    the output, mimicking real data.
    """

    paths: int
    horizon: float | None = None
    seed: int = 0
    record_regime: bool = True
    start_state: int | None = None
    regime: str = "mixture"

    def __post_init__(self):
        if self.paths < 1:
            raise OutOfSupportError(f"paths must be >= 1, got {self.paths}")
        if self.horizon is not None and self.horizon <= 0:
            raise OutOfSupportError(f"horizon must be positive, got {self.horizon}")
        if self.regime not in _REGIME_MODES:
            raise OutOfSupportError(
                f"regime must be one of {_REGIME_MODES}, got {self.regime!r}"
            )


@dataclass(frozen=True)
class SimulatedPath:
    """One simulated trajectory: the observable record, the latent regime
    label (None when the config hides it), and the absorption flag."""

    record: PathRecord
    regime: int | None
    absorbed: bool

    @property
    def absorption_time(self) -> float:
        return self.record.total_time if self.absorbed else math.inf


def _start_cdf(model: MixtureModel, config: SimulationConfig) -> np.ndarray | None:
    if config.start_state is not None:
        if not 0 <= config.start_state < model.n_transient:
            raise OutOfSupportError(
                f"start state {config.start_state} is not transient"
            )
        return None
    if model.defective:
        raise ModelValidationError(
            "the initial distribution is defective (mass already absorbed); "
            "simulation needs a proper start, normalize the initial vector "
            "or pin start_state"
        )
    total = float(model.initial.sum())
    return np.cumsum(model.initial / total)


def _check_horizon_feasible(model: MixtureModel, config: SimulationConfig) -> None:
    if config.horizon is not None:
        return
    needs_base = config.regime in ("mixture", "base")
    needs_scaled = config.regime in ("mixture", "scaled") and (
        config.regime == "scaled" or np.any(model.scaled_weight > 0))
    if needs_base and not model.gen.absorption_certain:
        raise OutOfSupportError(
            "horizon=None needs certain absorption under the base regime"
        )
    if needs_scaled and not model.scaled_gen.absorption_certain:
        raise OutOfSupportError(
            "horizon=None needs certain absorption under the scaled regime "
            "(zero-speed states can stall forever); set a finite horizon"
        )


def sample_path(model: MixtureModel, index: int,
                config: SimulationConfig) -> SimulatedPath:
    """Simulate path `index` of the configured batch, reproducibly.

    The path owns the Philox stream keyed [seed, index]; draw order is
    start state (when drawn), regime (when drawn), then one exponential
    and one jump uniform per visit.
    """
    _check_horizon_feasible(model, config)
    rng = np.random.Generator(np.random.Philox(key=[config.seed, index]))
    start_cdf = _start_cdf(model, config)
    if start_cdf is None:
        state = config.start_state
    else:
        state = int(np.searchsorted(start_cdf, rng.random(), side="right"))
        state = min(state, model.n_transient - 1)
    if config.regime == "mixture":
        regime = REGIME_SCALED if rng.random() < model.scaled_weight[state] \
            else REGIME_BASE
    else:
        regime = REGIME_SCALED if config.regime == "scaled" else REGIME_BASE
    gen = model.scaled_gen if regime == REGIME_SCALED else model.gen
    Q = gen.full_generator
    m = model.n_transient
    horizon = config.horizon

    visits: list[tuple[int, float]] = []
    terminal: int | None = None
    now = 0.0
    for _ in range(_MAX_GENERATIONS):
        rate = -Q[state, state]
        if rate <= 0.0:
            visits.append((state, horizon - now))
            break
        hold = rng.exponential(1.0 / rate)
        if horizon is not None and now + hold > horizon:
            visits.append((state, horizon - now))
            break
        row = Q[state].copy()
        row[state] = 0.0
        cdf = np.cumsum(row / rate)
        nxt = int(np.searchsorted(cdf, rng.random(), side="right"))
        nxt = min(nxt, len(cdf) - 1)
        visits.append((state, hold))
        now += hold
        if nxt >= m:
            terminal = nxt
            break
        state = nxt
    else:
        raise OutOfSupportError(
            f"path exceeded {_MAX_GENERATIONS} jumps; check the model's rates"
        )
    record = PathRecord(visits=tuple(visits), terminal=terminal)
    return SimulatedPath(
        record=record,
        regime=regime if config.record_regime else None,
        absorbed=record.absorbed,
    )


def simulate_paths(model: MixtureModel, config: SimulationConfig) -> list[SimulatedPath]:
    """All configured paths from the per-path engine."""
    return [sample_path(model, k, config) for k in range(config.paths)]


@dataclass(frozen=True)
class EnsembleSample:
    """Vectorized simulation output.

    absorption_time is inf for censored lanes and cause is -1 there;
    probe_states[k, i] is the full-chain state index of lane i at
    probe_times[k] (absorbing indices once absorbed). regime is None
    when the config hid the labels.
    """

    absorption_time: np.ndarray
    cause: np.ndarray
    start: np.ndarray
    regime: np.ndarray | None
    horizon: float | None
    probe_times: tuple[float, ...] = field(default=())
    probe_states: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.absorption_time.shape[0]


def _block(seed: int, tag: int, n: int) -> np.ndarray:
    return np.random.Generator(np.random.Philox(key=[seed, tag])).random(n)


def simulate_ensemble(model: MixtureModel, config: SimulationConfig,
                      probe_times=()) -> EnsembleSample:
    """Simulate the whole batch at once (see module docstring).

    probe_times asks for every lane's state at those times, which feeds
    the empirical posterior estimator; each probe must lie within the
    horizon.
    """
    _check_horizon_feasible(model, config)
    probes = tuple(float(x) for x in probe_times)
    for x in probes:
        if x < 0:
            raise OutOfSupportError(f"probe time {x} is negative")
        if config.horizon is not None and x > config.horizon:
            raise OutOfSupportError(
                f"probe time {x} lies beyond the horizon {config.horizon}"
            )
    n = config.paths
    m, p = model.n_transient, model.n_absorbing
    horizon = math.inf if config.horizon is None else float(config.horizon)

    # Per-regime jump tables over the full state list.
    rate_out = np.zeros((2, m))
    jump_cdf = np.zeros((2, m, m + p))
    for r, gen in ((REGIME_BASE, model.gen), (REGIME_SCALED, model.scaled_gen)):
        Q = gen.full_generator[:m]
        rate_out[r] = -np.diag(Q[:, :m])
        for i in range(m):
            row = Q[i].copy()
            row[i] = 0.0
            total = row.sum()
            jump_cdf[r, i] = np.cumsum(row / total) if total > 0 else 1.0

    u_start = _block(config.seed, 0, n)
    u_regime = _block(config.seed, 1, n)
    start_cdf = _start_cdf(model, config)
    if start_cdf is None:
        cur = np.full(n, config.start_state, dtype=np.int64)
    else:
        cur = np.minimum(
            np.searchsorted(start_cdf, u_start, side="right"), m - 1
        ).astype(np.int64)
    start = cur.copy()
    if config.regime == "mixture":
        regime = (u_regime < model.scaled_weight[cur]).astype(np.int64)
    else:
        regime = np.full(
            n, REGIME_SCALED if config.regime == "scaled" else REGIME_BASE,
            dtype=np.int64,
        )

    tnow = np.zeros(n)
    done = np.zeros(n, dtype=bool)
    absorption_time = np.full(n, math.inf)
    cause = np.full(n, -1, dtype=np.int64)
    probe_states = np.full((len(probes), n), -1, dtype=np.int64) if probes else None

    for g in range(_MAX_GENERATIONS):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        u_hold = _block(config.seed, 2 + 2 * g, n)[active]
        u_jump = _block(config.seed, 3 + 2 * g, n)[active]
        rates = rate_out[regime[active], cur[active]]
        with np.errstate(divide="ignore"):
            dt = np.where(rates > 0, -np.log1p(-u_hold) / np.where(rates > 0, rates, 1.0),
                          math.inf)
        tnew = tnow[active] + dt

        if probe_states is not None:
            for k, tau in enumerate(probes):
                hit = (tnow[active] <= tau) & (tau < tnew)
                lanes = active[hit]
                probe_states[k, lanes] = cur[lanes]

        crossed = tnew > horizon
        done[active[crossed]] = True

        moving = ~crossed
        lanes = active[moving]
        if lanes.size:
            rows = jump_cdf[regime[lanes], cur[lanes]]
            nxt = np.minimum(
                (u_jump[moving, None] > rows).sum(axis=1), m + p - 1
            ).astype(np.int64)
            t_jump = tnew[moving]
            absorbed = nxt >= m
            abs_lanes = lanes[absorbed]
            if abs_lanes.size:
                done[abs_lanes] = True
                absorption_time[abs_lanes] = t_jump[absorbed]
                cause[abs_lanes] = nxt[absorbed] - m
                if probe_states is not None:
                    for k, tau in enumerate(probes):
                        late = t_jump[absorbed] <= tau
                        probe_states[k, abs_lanes[late]] = nxt[absorbed][late]
            move_lanes = lanes[~absorbed]
            cur[move_lanes] = nxt[~absorbed]
            tnow[move_lanes] = t_jump[~absorbed]
    else:
        raise OutOfSupportError(
            f"simulation exceeded {_MAX_GENERATIONS} generations; "
            "check the model's rates"
        )

    return EnsembleSample(
        absorption_time=absorption_time,
        cause=cause,
        start=start,
        regime=regime if config.record_regime else None,
        horizon=config.horizon,
        probe_times=probes,
        probe_states=probe_states,
    )


def _times_and_flags(sample) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """(absorption times, cause ids, censored mask, min censor time)."""
    if isinstance(sample, EnsembleSample):
        times = sample.absorption_time
        causes = sample.cause
        censored = ~np.isfinite(times)
        limit = sample.horizon if sample.horizon is not None else math.inf
        return times, causes, censored, (limit if censored.any() else math.inf)
    paths = list(sample)
    if not paths:
        raise OutOfSupportError("no simulated paths supplied")
    times = np.array([sp.absorption_time for sp in paths])
    causes = np.array([
        sp.record.terminal if sp.absorbed else -1 for sp in paths
    ], dtype=np.int64)
    censored = ~np.isfinite(times)
    limit = math.inf
    if censored.any():
        limit = float(min(p.record.total_time for p in
                          (paths[k] for k in np.flatnonzero(censored))))
    return times, causes, censored, limit


def empirical_survival(sample, grid):
    """Empirical survival curve with binomial standard errors.

    Accepts an EnsembleSample or a list of SimulatedPath. Grid points
    beyond the earliest censoring time are rejected since the empirical
    tail is undefined there.
    """
    from .curves import CurveGrid

    times, _, censored, limit = _times_and_flags(sample)
    xs = np.asarray(grid, dtype=float)
    if censored.any() and np.any(xs > limit + 1e-12):
        raise OutOfSupportError(
            f"grid extends past the censoring limit {limit}; survival is "
            "not identified there"
        )
    n = times.shape[0]
    values = np.array([(times > t).mean() for t in xs])
    se = np.sqrt(values * (1.0 - values) / n)
    return CurveGrid(
        abscissa_name="t", abscissa=xs,
        columns={"survival": values, "se": se},
        metadata={"paths": str(n)},
    )


def empirical_cause_cdf(sample, grid, cause: int, n_transient: int | None = None):
    """Empirical cause-specific incidence curve with standard errors.

    cause is the 0-based cause id (absorbing-state offset). For a list
    of SimulatedPath the terminal indices are full-chain, so n_transient
    must be supplied to map them to cause ids; EnsembleSample input
    carries cause ids already.
    """
    from .curves import CurveGrid

    times, causes, censored, limit = _times_and_flags(sample)
    if not isinstance(sample, EnsembleSample):
        if n_transient is None:
            raise OutOfSupportError(
                "pass n_transient to map path terminal states to cause ids"
            )
        finite = np.isfinite(times)
        causes = causes.copy()
        causes[finite] -= n_transient
    xs = np.asarray(grid, dtype=float)
    if censored.any() and np.any(xs > limit + 1e-12):
        raise OutOfSupportError(
            f"grid extends past the censoring limit {limit}; the incidence "
            "curve is not identified there"
        )
    n = times.shape[0]
    hit = np.isfinite(times) & (causes == cause)
    values = np.array([(hit & (times <= t)).mean() for t in xs])
    se = np.sqrt(values * (1.0 - values) / n)
    return CurveGrid(
        abscissa_name="t", abscissa=xs,
        columns={"cause_cdf": values, "se": se},
        metadata={"paths": str(n), "cause": str(cause)},
    )


@dataclass(frozen=True)
class PosteriorEstimate:
    """Empirical posterior of the scaled regime with its binomial error."""

    value: float
    se: float
    count: int


MIN_POSTERIOR_SAMPLE = 500


def empirical_posterior(sample: EnsembleSample, state: int,
                        t: float) -> PosteriorEstimate:
    """Fraction of scaled-regime lanes among those in `state` at time t.

    t must be one of the sample's probe times. Requires at least 500
    lanes in the state (InsufficientSampleError otherwise) and recorded
    regime labels.
    """
    if not isinstance(sample, EnsembleSample) or sample.probe_states is None:
        raise OutOfSupportError(
            "empirical_posterior needs an EnsembleSample simulated with probe_times"
        )
    if sample.regime is None:
        raise OutOfSupportError(
            "the sample was simulated with record_regime=False; the latent "
            "labels are unavailable"
        )
    idx = None
    for k, tau in enumerate(sample.probe_times):
        if abs(tau - t) <= 1e-12 * max(1.0, abs(t)):
            idx = k
            break
    if idx is None:
        raise OutOfSupportError(
            f"time {t} is not among the sample's probe times {sample.probe_times}"
        )
    in_state = sample.probe_states[idx] == state
    count = int(in_state.sum())
    if count < MIN_POSTERIOR_SAMPLE:
        raise InsufficientSampleError(
            f"only {count} lanes occupy state {state} at time {t}; "
            f"need at least {MIN_POSTERIOR_SAMPLE}",
            count=count, needed=MIN_POSTERIOR_SAMPLE,
        )
    frac = float((sample.regime[in_state] == REGIME_SCALED).mean())
    se = math.sqrt(frac * (1.0 - frac) / count)
    return PosteriorEstimate(value=frac, se=se, count=count)
