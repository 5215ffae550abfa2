"""Bacteria-foraging optimizer over the unit hypercube.

The swarm evolves through chemotactic generations: each bacterium tumbles
into a random unit direction, takes one step, then keeps swimming in the
same direction while the move improves its augmented fitness (plain
weighted objective minus the cell-to-cell swarming potential), up to the
swim limit. Every ``n_chemo`` generations the healthier half of the
population reproduces by cloning; every ``n_chemo * n_repro`` generations
each bacterium is independently dispersed to a fresh random position with
probability ``p_elim``. The run stops after ``n_total`` generations.

All randomness flows through a single :class:`~bforage.engines.StochasticEngine`,
so a run is a pure function of its weight vector, parameters and engine
configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .engines import EngineConfig, StochasticEngine, make_engine
from .errors import BudgetError, ConfigError
from .problem import (
    DecisionVector,
    ObjectiveVector,
    WeightVector,
    aggregate,
    clamp_unit,
    evaluate,
    to_physical,
)

__all__ = [
    "BfaParams",
    "Bacterium",
    "SwarmState",
    "RunResult",
    "initialize_swarm",
    "tumble_direction",
    "chemotaxis_move",
    "swarming_term",
    "chemotaxis_generation",
    "reproduce",
    "eliminate_disperse",
    "run_bfa",
    "run_custom",
]

N_DIMENSIONS = 4

ScoreFn = Callable[[np.ndarray], float]
Observer = Callable[[int, "SwarmState"], None]


@dataclass(frozen=True)
class BfaParams:
    """Algorithm settings.

    ``step_size`` is expressed in normalized (unit-cube) coordinates so a
    single scalar step is meaningful across all four dimensions.
    """

    n_total: int = 200        # chemotactic-generation budget for the whole run
    pop_size: int = 25        # swarm size, constant throughout
    n_swim: int = 5           # extra same-direction moves allowed per tumble
    n_chemo: int = 10         # generations between reproduction events
    n_repro: int = 5          # reproduction events between dispersal events
    n_elim: int = 5           # dispersal-event limit; the generation cap governs termination
    w_rep: float = 10.0       # repellent signal width
    w_att: float = 0.2        # attractant signal width
    h_rep: float = 0.1        # repellent signal height
    h_att: float = 0.1        # attractant signal height (= attractant depth)
    step_size: float = 0.05   # chemotactic step, normalized units
    p_elim: float = 0.25      # per-bacterium dispersal probability
    swarming: bool = True     # include the cell-to-cell term in fitness

    def __post_init__(self):
        if not (isinstance(self.n_total, int) and self.n_total >= 1):
            raise BudgetError(f"n_total must be >= 1, got {self.n_total!r}")
        for name in ("pop_size", "n_swim", "n_chemo", "n_repro", "n_elim"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 0):
                raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")
        if self.pop_size < 1 or self.n_chemo < 1 or self.n_repro < 1 or self.n_elim < 1:
            raise ConfigError("pop_size, n_chemo, n_repro and n_elim must all be >= 1")
        if not self.step_size > 0:
            raise ConfigError(f"step_size must be positive, got {self.step_size}")
        if not 0.0 <= self.p_elim <= 1.0:
            raise ConfigError(f"p_elim must lie in [0, 1], got {self.p_elim}")


@dataclass
class Bacterium:
    """One swarm member.

    ``health`` is the running sum of every augmented cost evaluated for
    this bacterium since the last reproduction event (the initial placement
    and dispersal re-evaluations included); reproduction resets it to zero.
    """

    theta: np.ndarray     # position, unit cube
    f_plain: float        # weighted objective at theta, no swarming term
    cost: float           # augmented fitness at the last evaluation
    health: float


@dataclass
class SwarmState:
    """Mutable run state: the population plus the best-so-far archive."""

    bacteria: list[Bacterium]
    best_theta: np.ndarray
    best_f: float
    trace: list[float] = field(default_factory=list)
    evaluations: int = 0
    last_moves: list[int] = field(default_factory=list)  # moves per bacterium, last generation

    @property
    def size(self) -> int:
        return len(self.bacteria)


@dataclass(frozen=True)
class RunResult:
    """Outcome of one full run; comparable field by field for replay checks."""

    best_theta: tuple[float, ...]
    best_decision: Optional[DecisionVector]
    best_objectives: Optional[ObjectiveVector]
    best_f: float
    trace: tuple[float, ...]
    evaluations: int
    seed: int
    aer: Optional[float] = None

    def with_aer(self, value: float) -> "RunResult":
        return replace(self, aer=value)


def tumble_direction(engine: StochasticEngine) -> np.ndarray:
    """Unit-length random direction; redraws in the all-zero corner case."""
    while True:
        delta = np.array([engine.sample_signed() for _ in range(N_DIMENSIONS)])
        norm = math.sqrt(float(delta @ delta))
        if norm > 0.0:
            return delta / norm


def swarming_term(theta: np.ndarray, swarm: SwarmState, params: BfaParams) -> float:
    """Cell-to-cell potential at ``theta``: attractant wells plus repellent hills.

    Summed over every swarm member (the bacterium itself included; at zero
    distance the two contributions cancel when the heights are equal).
    Distances are squared Euclidean over the normalized coordinates.
    """
    positions = np.stack([b.theta for b in swarm.bacteria])
    d = np.sum((positions - theta) ** 2, axis=1)
    attract = -params.h_att * np.exp(-params.w_att * d)
    repel = params.h_rep * np.exp(-params.w_rep * d)
    return float(np.sum(attract) + np.sum(repel))


def _augmented(f_plain: float, theta: np.ndarray, swarm: SwarmState, params: BfaParams) -> float:
    if not params.swarming:
        return f_plain
    return f_plain - swarming_term(theta, swarm, params)


def _evaluate_at(b: Bacterium, swarm: SwarmState, score: ScoreFn, params: BfaParams) -> None:
    b.f_plain = score(b.theta)
    swarm.evaluations += 1
    b.cost = _augmented(b.f_plain, b.theta, swarm, params)
    b.health += b.cost
    if b.f_plain > swarm.best_f:
        swarm.best_f = b.f_plain
        swarm.best_theta = b.theta.copy()


def chemotaxis_move(
    b: Bacterium,
    direction: np.ndarray,
    swarm: SwarmState,
    score: ScoreFn,
    params: BfaParams,
) -> float:
    """Step ``b`` along ``direction``, clamp, re-evaluate; returns the new cost."""
    b.theta = clamp_unit(b.theta + params.step_size * direction)
    _evaluate_at(b, swarm, score, params)
    return b.cost


def initialize_swarm(engine: StochasticEngine, params: BfaParams, score: ScoreFn) -> SwarmState:
    """Place ``pop_size`` bacteria at engine-drawn positions and evaluate them.

    Draw order is fixed: all positions first (bacterium by bacterium, one
    unit draw per component), then every cost is evaluated against the
    complete initial swarm.
    """
    bacteria = []
    for _ in range(params.pop_size):
        theta = np.array([engine.sample_unit() for _ in range(N_DIMENSIONS)])
        bacteria.append(Bacterium(theta=theta, f_plain=0.0, cost=0.0, health=0.0))
    swarm = SwarmState(bacteria=bacteria, best_theta=bacteria[0].theta.copy(), best_f=-math.inf)
    for b in swarm.bacteria:
        _evaluate_at(b, swarm, score, params)
    return swarm


def chemotaxis_generation(
    swarm: SwarmState,
    engine: StochasticEngine,
    score: ScoreFn,
    params: BfaParams,
) -> SwarmState:
    """One generation: every bacterium tumbles once, then swims while improving.

    The swim gate compares augmented fitness before and after each move; a
    move is always committed, the gate only decides whether another one
    follows. Appends the best-so-far value to the trace.
    """
    moves = []
    for b in swarm.bacteria:
        previous = _augmented(b.f_plain, b.theta, swarm, params)
        direction = tumble_direction(engine)
        current = chemotaxis_move(b, direction, swarm, score, params)
        taken = 1
        while taken <= params.n_swim and current > previous:
            previous = current
            current = chemotaxis_move(b, direction, swarm, score, params)
            taken += 1
        moves.append(taken)
    swarm.last_moves = moves
    swarm.trace.append(swarm.best_f)
    return swarm


def reproduce(swarm: SwarmState, params: BfaParams) -> SwarmState:
    """Health-ranked cloning: the healthier half survives and splits.

    With population S the top ``ceil(S/2)`` (ties broken by list position)
    are kept in rank order and the leading ``S - ceil(S/2)`` of them are
    cloned, so the size is exactly S again. Health resets to zero for
    everyone.
    """
    size = swarm.size
    order = sorted(range(size), key=lambda i: (-swarm.bacteria[i].health, i))
    keep = (size + 1) // 2
    survivors = [swarm.bacteria[i] for i in order[:keep]]
    for b in survivors:
        b.health = 0.0
    clones = [
        Bacterium(theta=b.theta.copy(), f_plain=b.f_plain, cost=b.cost, health=0.0)
        for b in survivors[: size - keep]
    ]
    swarm.bacteria = survivors + clones
    return swarm


def eliminate_disperse(
    swarm: SwarmState,
    engine: StochasticEngine,
    score: ScoreFn,
    params: BfaParams,
) -> SwarmState:
    """Independently disperse each bacterium with probability ``p_elim``.

    One unit draw decides; a dispersed bacterium gets a fresh engine-drawn
    position and is re-evaluated. The best-so-far archive is never erased.
    """
    for b in swarm.bacteria:
        if engine.sample_unit() < params.p_elim:
            b.theta = np.array([engine.sample_unit() for _ in range(N_DIMENSIONS)])
            _evaluate_at(b, swarm, score, params)
    return swarm


def _run_loop(
    score: ScoreFn,
    params: BfaParams,
    engine: StochasticEngine,
    observer: Optional[Observer] = None,
) -> SwarmState:
    swarm = initialize_swarm(engine, params, score)
    dispersal_period = params.n_chemo * params.n_repro
    for generation in range(1, params.n_total + 1):
        chemotaxis_generation(swarm, engine, score, params)
        # reproduction and dispersal happen between generations; one that
        # falls exactly on the budget boundary is skipped, so the final
        # trace entry always reflects the final archive
        if generation < params.n_total:
            if generation % params.n_chemo == 0:
                reproduce(swarm, params)
            if generation % dispersal_period == 0:
                eliminate_disperse(swarm, engine, score, params)
        if observer is not None:
            observer(generation, swarm)
    return swarm


def run_custom(
    score: ScoreFn,
    params: BfaParams,
    engine_config: EngineConfig,
    observer: Optional[Observer] = None,
) -> RunResult:
    """Run the optimizer on an arbitrary unit-cube objective (maximized)."""
    engine = make_engine(engine_config)
    swarm = _run_loop(score, params, engine, observer)
    return RunResult(
        best_theta=tuple(float(v) for v in swarm.best_theta),
        best_decision=None,
        best_objectives=None,
        best_f=swarm.best_f,
        trace=tuple(swarm.trace),
        evaluations=swarm.evaluations,
        seed=engine_config.seed,
    )


def run_bfa(
    weights: WeightVector,
    params: BfaParams,
    engine_config: EngineConfig,
    observer: Optional[Observer] = None,
) -> RunResult:
    """Run the optimizer on the sand-mould model under ``weights``.

    Deterministic: identical arguments give an identical result, draw for
    draw. The returned decision and objective vectors are recomputed at
    the archived best position (outside the evaluation count).
    """

    def score(u: np.ndarray) -> float:
        return aggregate(evaluate(to_physical(u)), weights)

    engine = make_engine(engine_config)
    swarm = _run_loop(score, params, engine, observer)
    decision = to_physical(swarm.best_theta)
    objectives = evaluate(decision)
    return RunResult(
        best_theta=tuple(float(v) for v in swarm.best_theta),
        best_decision=decision,
        best_objectives=objectives,
        best_f=swarm.best_f,
        trace=tuple(swarm.trace),
        evaluations=swarm.evaluations,
        seed=engine_config.seed,
    )
