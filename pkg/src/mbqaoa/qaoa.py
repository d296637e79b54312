"""Classical outer loop: expectation values, parameter search and sampling."""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from mbqaoa.graph import Assignment, Graph, InstanceTooLarge, brute_force_max_kcut, cut_value
from mbqaoa.hamiltonian import (
    EncodingParams,
    PauliZPolynomial,
    build_penalized_target,
    build_target,
    decode_index,
    evaluate_diagonal,
)
from mbqaoa.pattern import assemble_pattern
from mbqaoa.simulator import QuantumState, reference_evolution, run_pattern

BRUTE_FORCE_BITS = 24


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings.

    ``method`` is ``"grid"`` or ``"nelder-mead"`` (grid, then Nelder-Mead from
    the best grid point).  For ``p > 1`` the grid shares one ``(gamma, beta)``
    across layers and Nelder-Mead refines all ``2p`` angles.  ``restarts - 1``
    extra Nelder-Mead runs start from seeded random points.  ``max_evals`` is
    the budget per restart; the grid counts against the first one.
    """

    method: str = "nelder-mead"
    p: int = 1
    restarts: int = 1
    max_evals: int = 2000
    seed: int = 0
    use_penalty: bool = False
    backend: str = "reference"
    grid_points: int = 32
    gamma_max: float | None = None
    beta_max: float = math.pi
    shots: int = 1000
    shot_objective: int | None = None  # shots per evaluation; None = exact

    def __post_init__(self):
        if self.method not in ("grid", "nelder-mead"):
            raise ValueError(f"unknown optimizer {self.method!r}")
        if self.backend not in ("reference", "mbqc"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.max_evals < 1 or self.restarts < 1 or self.p < 1:
            raise ValueError("max_evals, restarts and p must be positive")
        if self.grid_points < 2:
            raise ValueError("grid needs at least 2 points per parameter")


@dataclass
class QaoaResult:
    best_params: tuple[tuple[float, ...], tuple[float, ...]]
    best_expectation: float
    history: list[tuple[tuple[float, ...], float]] = field(default_factory=list)
    sampled: list[tuple[Assignment, int]] = field(default_factory=list)
    best_sampled_value: float | None = None
    best_assignment: Assignment | None = None
    optimum: float | None = None
    approximation_ratio: float | None = None
    target_expectation: float | None = None
    penalized_expectation: float | None = None

    def to_json(self) -> str:
        doc = {
            "best_params": {"gamma": list(self.best_params[0]), "beta": list(self.best_params[1])},
            "best_expectation": self.best_expectation,
            "target_expectation": self.target_expectation,
            "penalized_expectation": self.penalized_expectation,
            "best_sampled_value": self.best_sampled_value,
            "best_assignment": list(self.best_assignment) if self.best_assignment is not None else None,
            "optimum": self.optimum,
            "approximation_ratio": self.approximation_ratio,
            "samples": [{"assignment": list(a), "count": c} for a, c in self.sampled],
            "history": [{"params": list(p), "expectation": e} for p, e in self.history],
        }
        return json.dumps(doc, indent=2) + "\n"

    def history_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        p = len(self.best_params[0])
        writer.writerow(
            ["eval"] + [f"gamma_{i + 1}" for i in range(p)] + [f"beta_{i + 1}" for i in range(p)] + ["expectation"]
        )
        for i, (params, e) in enumerate(self.history):
            writer.writerow([i, *map(repr, params), repr(e)])
        return buf.getvalue()


def expectation(state: QuantumState, h: PauliZPolynomial | np.ndarray) -> float:
    """``<state| h |state>`` for a diagonal ``h`` (polynomial or its diagonal)."""
    diag = evaluate_diagonal(h) if isinstance(h, PauliZPolynomial) else h
    if diag.shape[0] != state.amplitudes.shape[0]:
        raise ValueError("state and Hamiltonian dimensions differ")
    amps = state.ordered_amplitudes(range(state.live_count))
    return float(np.dot(np.abs(amps) ** 2, diag))


def sample_solutions(
    state: QuantumState, shots: int, seed: int | None, enc: EncodingParams
) -> list[tuple[Assignment, int]]:
    """Born-rule samples decoded to assignments.

    Sorted by descending count, ties by ascending basis index.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(state.ordered_amplitudes(range(state.live_count))) ** 2
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    hits = np.flatnonzero(counts)
    order = sorted(hits, key=lambda i: (-counts[i], i))
    return [(decode_index(int(i), enc), int(counts[i])) for i in order]


def approximation_ratio(best_sampled_value: float | None, optimum: float | None) -> float | None:
    if best_sampled_value is None or optimum is None or optimum == 0:
        return None
    return best_sampled_value / optimum


class Objective:
    """Maps flat parameter vectors ``[gammas..., betas...]`` to output states."""

    def __init__(self, g: Graph, K: int, cfg: OptimizerConfig):
        self.g, self.K, self.cfg = g, K, cfg
        self.enc = EncodingParams(K, g.vertex_count)
        self.target_diag = evaluate_diagonal(build_target(g, self.enc))
        self.penalized_diag = (
            evaluate_diagonal(build_penalized_target(g, self.enc))
            if not self.enc.is_power_of_two
            else self.target_diag
        )
        self.diag = self.penalized_diag if cfg.use_penalty else self.target_diag
        self.pattern = None
        if cfg.backend == "mbqc":
            if cfg.use_penalty and not self.enc.is_power_of_two:
                raise ValueError("the MBQC backend has no pattern for the penalty term")
            self.pattern = assemble_pattern(g, K, cfg.p)
        self._rng = np.random.default_rng(cfg.seed)

    def split(self, x: Sequence[float]) -> tuple[tuple[float, ...], tuple[float, ...]]:
        p = self.cfg.p
        return tuple(map(float, x[:p])), tuple(map(float, x[p:]))

    def state(self, x: Sequence[float]) -> QuantumState:
        gammas, betas = self.split(x)
        if self.pattern is not None:
            out, _ = run_pattern(self.pattern, gammas, betas, seed=self.cfg.seed)
            return out
        return reference_evolution(self.g, self.enc, gammas, betas, diagonal=self.diag)

    def __call__(self, x: Sequence[float]) -> float:
        st = self.state(x)
        if self.cfg.shot_objective:
            probs = np.abs(st.ordered_amplitudes(range(st.live_count))) ** 2
            counts = self._rng.multinomial(self.cfg.shot_objective, probs / probs.sum())
            return float(np.dot(counts, self.diag) / self.cfg.shot_objective)
        return expectation(st, self.diag)


class _BudgetExhausted(Exception):
    pass


def _gamma_max(g: Graph, cfg: OptimizerConfig) -> float:
    if cfg.gamma_max is not None:
        return cfg.gamma_max
    scale = max((abs(w) for _, _, w in g.edges), default=1.0) or 1.0
    return 2 * math.pi / scale


def optimize(g: Graph, K: int, cfg: OptimizerConfig | None = None) -> QaoaResult:
    """Maximise the cost expectation; deterministic for a given ``cfg.seed``.

    The objective is the penalised Hamiltonian when ``cfg.use_penalty`` is set
    (both expectations are reported).  Samples ``cfg.shots`` assignments from
    the best state and scores them against the brute-force optimum when that
    is small enough to enumerate.
    """
    cfg = cfg or OptimizerConfig()
    obj = Objective(g, K, cfg)
    p = cfg.p
    history: list[tuple[tuple[float, ...], float]] = []
    g_max, b_max = _gamma_max(g, cfg), cfg.beta_max

    def tracked(budget: int) -> Callable[[np.ndarray], float]:
        start = len(history)

        def f(x):
            if len(history) - start >= budget:
                raise _BudgetExhausted
            val = obj(x)
            history.append((tuple(map(float, x)), val))
            return -val

        return f

    f0 = tracked(cfg.max_evals)
    gammas = np.arange(cfg.grid_points) * (g_max / cfg.grid_points)
    betas = np.arange(cfg.grid_points) * (b_max / cfg.grid_points)
    best_x, best_val = None, -math.inf
    try:
        for gm in gammas:
            for bt in betas:
                x = np.array([gm] * p + [bt] * p)
                val = -f0(x)
                if val > best_val:
                    best_x, best_val = x, val
    except _BudgetExhausted:
        pass

    if cfg.method == "nelder-mead":
        starts = [(best_x, f0)]
        rng = np.random.default_rng(cfg.seed)
        for _ in range(cfg.restarts - 1):
            x0 = np.concatenate([rng.uniform(0, g_max, p), rng.uniform(0, b_max, p)])
            starts.append((x0, tracked(cfg.max_evals)))
        for x0, f in starts:
            try:
                minimize(
                    f,
                    x0,
                    method="Nelder-Mead",
                    options={"xatol": 1e-6, "fatol": 1e-10, "maxfev": cfg.max_evals},
                )
            except _BudgetExhausted:
                pass

    # max over (value, lowest history index) keeps the choice deterministic
    best_i = max(range(len(history)), key=lambda i: (history[i][1], -i))
    best_flat, best_val = history[best_i]
    best_state = obj.state(best_flat)
    result = QaoaResult(
        best_params=obj.split(best_flat),
        best_expectation=best_val,
        history=history,
        target_expectation=expectation(best_state, obj.target_diag),
        penalized_expectation=expectation(best_state, obj.penalized_diag),
    )
    result.sampled = sample_solutions(best_state, cfg.shots, cfg.seed, obj.enc)
    score_samples(result, g, K)
    return result


def score_samples(result: QaoaResult, g: Graph, K: int) -> None:
    """Fill ``best_sampled_value``, ``best_assignment`` and the approximation ratio.

    Assignments using a surplus label (``>= K``) are not K-cuts and are
    skipped.  Among equal best values the lowest basis index wins.
    """
    enc = EncodingParams(K, g.vertex_count)
    best, best_key = None, None
    for a, _ in result.sampled:
        if any(label >= K for label in a):
            continue
        val = cut_value(g, a)
        key = (val, -sum(label << (j * enc.m) for j, label in enumerate(a)))
        if best_key is None or key > best_key:
            best, best_key = a, key
    result.best_assignment = best
    result.best_sampled_value = best_key[0] if best_key else None
    try:
        result.optimum, _ = brute_force_max_kcut(g, K, max_bits=BRUTE_FORCE_BITS, max_solutions=1)
    except InstanceTooLarge:
        result.optimum = None
    result.approximation_ratio = approximation_ratio(result.best_sampled_value, result.optimum)


def frequency_weighted_cut(samples: list[tuple[Assignment, int]], g: Graph) -> tuple[float, float]:
    """Sample mean of the cut value and its standard error."""
    counts = np.array([c for _, c in samples], dtype=float)
    vals = np.array([cut_value(g, a) for a, _ in samples])
    n = counts.sum()
    mean = float(np.dot(counts, vals) / n)
    var = float(np.dot(counts, (vals - mean) ** 2) / (n - 1)) if n > 1 else 0.0
    return mean, math.sqrt(var / n)

