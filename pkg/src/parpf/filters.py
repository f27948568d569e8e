"""Filter step functions and single-run drivers.

Three step kernels share the particle-system types from :mod:`parpf.core`:

* ``bf_step`` - the standard bootstrap step: propagate, weight by the
  likelihood, multinomial-resample back to uniform weights.
* ``apf_step`` - a two-stage auxiliary step that pre-selects ancestors with a
  deterministic one-step lookahead before propagating.
* ``dbf_step`` - the island comparator: per-island bootstrap steps plus a
  periodic multinomial resampling of whole islands by their accumulated
  weights.

Every step ends with uniform weights, so the per-step posterior estimates
recorded by the drivers are plain particle averages.  When a step's weights
collapse (all raw weights underflow), the step resets to uniform weights,
leaves the normalising-constant trace unchanged and flags the event; drivers
record the flagged step indices so sweeps keep running with invalid
estimates marked.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ParticleApproximation,
    StateSpaceModel,
    normalize_log_weights,
    posterior_mean,
    uniform_weights,
)
from .exceptions import UnsupportedModelError, WeightCollapseError
from .resampling import multinomial_resample_indices

VARIANT_BOOTSTRAP = "bootstrap"
VARIANT_AUXILIARY = "auxiliary"


@dataclass
class FilterOutput:
    """Per-step record of one filter run.

    ``estimates[t]`` is the posterior-mean estimate after observation t + 1,
    ``log_norm_const[t]`` the running log normalising-constant estimate and
    ``step_seconds[t]`` the wall-clock duration of that step.  Wall-clock
    fields are measurement metadata: the determinism contract (same seed,
    same output) covers every other field.
    """

    variant: str
    n_particles: int
    seed: object
    estimates: np.ndarray
    log_norm_const: np.ndarray
    step_seconds: np.ndarray
    collapse_steps: list[int] = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return self.estimates.shape[0]

    @property
    def total_seconds(self) -> float:
        return float(self.step_seconds.sum())

    def same_result(self, other: "FilterOutput") -> bool:
        """Bitwise equality of everything except wall-clock measurements."""
        return (
            self.variant == other.variant
            and self.n_particles == other.n_particles
            and self.collapse_steps == other.collapse_steps
            and np.array_equal(self.estimates, other.estimates)
            and np.array_equal(self.log_norm_const, other.log_norm_const)
        )


def _check_uniform(state: ParticleApproximation):
    n = state.n_particles
    if not np.allclose(state.weights, 1.0 / n, rtol=0.0, atol=1e-12):
        raise ValueError("step functions expect uniform (post-resampling) weights")


def bf_init(model: StateSpaceModel, n_particles: int,
            rng: np.random.Generator) -> ParticleApproximation:
    """Initial particle system: prior draws with uniform weights."""
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    particles = model.sample_prior(rng, n_particles)
    return ParticleApproximation(particles, uniform_weights(n_particles),
                                 log_norm_const=0.0, t=0)


def bf_step(model: StateSpaceModel, state: ParticleApproximation, y,
            rng: np.random.Generator) -> ParticleApproximation:
    """One bootstrap step: propagate, weight, resample to uniform."""
    _check_uniform(state)
    t = state.t + 1
    n = state.n_particles
    propagated = model.sample_transition(state.particles, t, rng)
    log_w = model.log_likelihood(y, propagated, t)
    try:
        weights, log_mean_raw = normalize_log_weights(log_w)
    except WeightCollapseError:
        return ParticleApproximation(propagated, uniform_weights(n),
                                     state.log_norm_const, t, collapsed=True)
    idx = multinomial_resample_indices(weights, n, rng)
    return ParticleApproximation(propagated[idx], uniform_weights(n),
                                 state.log_norm_const + log_mean_raw, t)


def apf_step(model: StateSpaceModel, state: ParticleApproximation, y,
             rng: np.random.Generator) -> ParticleApproximation:
    """One auxiliary step (Pitt-Shephard style two-stage selection).

    First-stage weights come from the likelihood evaluated at the model's
    deterministic transition point prediction; after propagating the chosen
    ancestors, second-stage weights correct for that lookahead.  The
    normalising-constant increment is log(mean first-stage raw weight) +
    log(mean second-stage raw weight).
    """
    if not model.has_point_prediction():
        raise UnsupportedModelError(
            "auxiliary filtering needs transition_point_prediction")
    _check_uniform(state)
    t = state.t + 1
    n = state.n_particles
    predicted = model.transition_point_prediction(state.particles, t)
    lam = model.log_likelihood(y, predicted, t)
    collapsed = False
    try:
        first_stage, log_mean_first = normalize_log_weights(lam)
    except WeightCollapseError:
        # Uninformative lookahead: fall back to a plain bootstrap selection.
        collapsed = True
        lam = np.zeros(n)
        first_stage, log_mean_first = uniform_weights(n), 0.0
    ancestors = multinomial_resample_indices(first_stage, n, rng)
    propagated = model.sample_transition(state.particles[ancestors], t, rng)
    log_w = model.log_likelihood(y, propagated, t) - lam[ancestors]
    try:
        weights, log_mean_second = normalize_log_weights(log_w)
    except WeightCollapseError:
        return ParticleApproximation(propagated, uniform_weights(n),
                                     state.log_norm_const, t, collapsed=True)
    idx = multinomial_resample_indices(weights, n, rng)
    return ParticleApproximation(
        propagated[idx], uniform_weights(n),
        state.log_norm_const + log_mean_first + log_mean_second, t,
        collapsed=collapsed,
    )


_STEP_FUNCTIONS = {
    VARIANT_BOOTSTRAP: bf_step,
    VARIANT_AUXILIARY: apf_step,
}


def run_filter(model: StateSpaceModel, observations, variant: str,
               n_particles: int, seed) -> FilterOutput:
    """Drive one filter across an observation record.

    Deterministic given ``(model, observations, variant, n_particles, seed)``.
    ``seed`` is anything accepted by ``numpy.random.default_rng``.
    """
    observations = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    if observations.shape[0] == 0:
        raise ValueError("observation sequence must be non-empty")
    try:
        step = _STEP_FUNCTIONS[variant]
    except KeyError:
        raise ValueError(f"unknown filter variant {variant!r}") from None
    rng = np.random.default_rng(seed)
    state = bf_init(model, n_particles, rng)
    n_steps = observations.shape[0]
    estimates = np.empty((n_steps, model.dim_x))
    trace = np.empty(n_steps)
    seconds = np.empty(n_steps)
    collapse_steps = []
    for k in range(n_steps):
        t0 = time.perf_counter()
        state = step(model, state, observations[k], rng)
        seconds[k] = time.perf_counter() - t0
        estimates[k] = posterior_mean(state)
        trace[k] = state.log_norm_const
        if state.collapsed:
            collapse_steps.append(state.t)
    return FilterOutput(variant, n_particles, seed, estimates, trace, seconds,
                        collapse_steps)


# ---------------------------------------------------------------------------
# Double bootstrap (particle islands)
# ---------------------------------------------------------------------------


@dataclass
class IslandSystem:
    """M equally sized particle islands plus their accumulated log weights.

    Island log weights are sums of the islands' per-step log-mean-raw-weight
    increments since the last island-level resampling, after which they reset
    to zero.
    """

    islands: list[ParticleApproximation]
    log_weights: np.ndarray

    def __post_init__(self):
        sizes = {isl.n_particles for isl in self.islands}
        if len(sizes) != 1:
            raise ValueError("all islands must share the same particle count")
        self.log_weights = np.asarray(self.log_weights, dtype=np.float64)
        if self.log_weights.shape != (len(self.islands),):
            raise ValueError("one log weight per island required")

    @property
    def n_islands(self) -> int:
        return len(self.islands)

    def island_probs(self) -> np.ndarray:
        shifted = np.exp(self.log_weights - self.log_weights.max())
        return shifted / shifted.sum()

    def pooled_estimate(self) -> np.ndarray:
        probs = self.island_probs()
        est = probs[0] * posterior_mean(self.islands[0])
        for m in range(1, self.n_islands):
            est = est + probs[m] * posterior_mean(self.islands[m])
        return est


def _copy_island(isl: ParticleApproximation) -> ParticleApproximation:
    return ParticleApproximation(isl.particles.copy(), isl.weights.copy(),
                                 isl.log_norm_const, isl.t, collapsed=isl.collapsed)


def dbf_init(model: StateSpaceModel, n_islands: int, n_particles: int,
             rngs: list[np.random.Generator]) -> IslandSystem:
    if n_islands < 1:
        raise ValueError("n_islands must be >= 1")
    islands = [bf_init(model, n_particles, rngs[m]) for m in range(n_islands)]
    return IslandSystem(islands, np.zeros(n_islands))


def dbf_step(model: StateSpaceModel, system: IslandSystem, y, t: int,
             island_period: int, rngs: list[np.random.Generator],
             island_rng: np.random.Generator) -> IslandSystem:
    """Advance every island one bootstrap step; resample whole islands every
    ``island_period`` steps by their accumulated weights.

    ``rngs[m]`` drives island m exclusively (islands may be advanced
    concurrently), ``island_rng`` drives the island-level selection.
    """
    if island_period < 1:
        raise ValueError("island_period must be >= 1")
    new_islands = []
    log_weights = system.log_weights.copy()
    for m, isl in enumerate(system.islands):
        stepped = bf_step(model, isl, y, rngs[m])
        log_weights[m] += stepped.log_norm_const - isl.log_norm_const
        new_islands.append(stepped)
    if t % island_period == 0:
        shifted = np.exp(log_weights - log_weights.max())
        probs = shifted / shifted.sum()
        idx = multinomial_resample_indices(probs, system.n_islands, island_rng)
        new_islands = [_copy_island(new_islands[i]) for i in idx]
        log_weights = np.zeros(system.n_islands)
    return IslandSystem(new_islands, log_weights)


def run_double_bootstrap(model: StateSpaceModel, observations, n_islands: int,
                         n_particles: int, island_period: int, seed) -> FilterOutput:
    """Drive the island scheme across an observation record.

    Per-island generator streams are spawned from the seed up front, so the
    result does not depend on any execution schedule.  The recorded
    normalising-constant trace is the log of the island average of the
    per-island estimates (a diagnostic; island selection already acts on the
    islands themselves).
    """
    observations = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    if observations.shape[0] == 0:
        raise ValueError("observation sequence must be non-empty")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(n_islands + 1)
    rngs = [np.random.default_rng(c) for c in children[:n_islands]]
    island_rng = np.random.default_rng(children[n_islands])
    system = dbf_init(model, n_islands, n_particles, rngs)
    n_steps = observations.shape[0]
    estimates = np.empty((n_steps, model.dim_x))
    trace = np.empty(n_steps)
    seconds = np.empty(n_steps)
    collapse_steps = []
    for k in range(n_steps):
        t0 = time.perf_counter()
        system = dbf_step(model, system, observations[k], k + 1, island_period,
                          rngs, island_rng)
        seconds[k] = time.perf_counter() - t0
        estimates[k] = system.pooled_estimate()
        lncs = np.array([isl.log_norm_const for isl in system.islands])
        m = lncs.max()
        trace[k] = m + math.log(np.exp(lncs - m).sum()) - math.log(n_islands)
        for isl in system.islands:
            if isl.collapsed:
                collapse_steps.append(k + 1)
                break
    return FilterOutput("double-bf", n_islands * n_particles, seed, estimates,
                        trace, seconds, collapse_steps)
