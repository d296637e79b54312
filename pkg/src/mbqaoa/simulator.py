"""Statevector execution of measurement patterns and the direct QAOA oracle."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from mbqaoa import kernels
from mbqaoa.graph import Graph, InstanceTooLarge
from mbqaoa.hamiltonian import (
    DENSE_QUBIT_LIMIT,
    EncodingParams,
    build_penalized_target,
    build_target,
    evaluate_diagonal,
)
from mbqaoa.pattern import MeasurementPattern, Plane

NORM_TOL = 1e-10
MIN_FORCED_PROBABILITY = 1e-12
_SQRT_HALF = 1.0 / math.sqrt(2.0)


class DeadNodeError(KeyError):
    """Operation on a node that is not live in the register."""


class ImpossibleOutcome(ValueError):
    """A forced outcome has (numerically) zero probability."""


def basis_coefficients(plane: Plane | str, angle: float, outcome: int) -> tuple[complex, complex]:
    """Computational-basis amplitudes of the measurement eigenvector for ``outcome``."""
    plane = Plane(plane)
    sign = -1.0 if outcome else 1.0
    phase = sign * complex(math.cos(angle), math.sin(angle))
    if plane is Plane.X:
        phase = sign
    if plane is Plane.YZ:
        # (|+> + phase |->) / sqrt2
        return (1.0 + phase) / 2.0, (1.0 - phase) / 2.0
    return _SQRT_HALF, _SQRT_HALF * phase


class QuantumState:
    """Pure state on a dynamic set of live nodes.

    Node ``node_map[n]`` is bit ``node_map[n]`` of the amplitude index.
    Operations mutate in place and return ``self``; use :meth:`copy` for
    value semantics.
    """

    def __init__(self, amplitudes: np.ndarray | None = None, node_map: Mapping[int, int] | None = None):
        if amplitudes is None:
            amplitudes = np.ones(1, dtype=np.complex128)
            node_map = {}
        self.amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        self.node_map = dict(node_map or {})
        if self.amplitudes.shape[0] != 1 << len(self.node_map):
            raise ValueError("amplitude length does not match the live node count")
        if sorted(self.node_map.values()) != list(range(len(self.node_map))):
            raise ValueError("node_map must be a bijection onto register positions")

    @classmethod
    def plus(cls, nodes: Sequence[int]) -> QuantumState:
        n = len(nodes)
        amps = np.full(1 << n, 1.0 / math.sqrt(1 << n), dtype=np.complex128)
        return cls(amps, {node: i for i, node in enumerate(nodes)})

    @property
    def live_count(self) -> int:
        return len(self.node_map)

    def copy(self) -> QuantumState:
        return QuantumState(self.amplitudes.copy(), self.node_map)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def _pos(self, node: int) -> int:
        try:
            return self.node_map[node]
        except KeyError:
            raise DeadNodeError(f"node {node} is not live") from None

    def allocate_plus(self, node: int) -> QuantumState:
        if node in self.node_map:
            raise ValueError(f"node {node} already live")
        self.amplitudes = np.concatenate([self.amplitudes, self.amplitudes]) * _SQRT_HALF
        self.node_map[node] = len(self.node_map)
        return self

    def apply_cz(self, a: int, b: int) -> QuantumState:
        pa, pb = self._pos(a), self._pos(b)
        if pa == pb:
            raise ValueError("CZ needs two distinct nodes")
        kernels.apply_cz(self.amplitudes, pa, pb)
        return self

    def apply_pauli(self, node: int, pauli: str) -> QuantumState:
        pos = self._pos(node)
        if pauli == "X":
            kernels.apply_x(self.amplitudes, pos)
        elif pauli == "Z":
            kernels.apply_z(self.amplitudes, pos)
        else:
            raise ValueError(f"unsupported Pauli {pauli!r}")
        return self

    def apply_rx(self, node: int, beta: float) -> QuantumState:
        """``exp(-i beta X)`` on one node."""
        kernels.apply_rx(self.amplitudes, self._pos(node), beta)
        return self

    def measure(
        self,
        node: int,
        plane: Plane | str,
        angle: float,
        rng: np.random.Generator | None = None,
        forced: int | None = None,
    ) -> tuple[int, float]:
        """Projectively measure ``node`` and drop it from the register.

        Exactly one of ``rng`` (Born-rule sampling) and ``forced`` (post-select
        that outcome) is used.  Returns ``(outcome, probability)``.
        """
        pos = self._pos(node)
        c0, c1 = basis_coefficients(plane, angle, 0)
        out0, p0 = kernels.project_out(self.amplitudes, pos, c0, c1)
        if forced is None:
            if rng is None:
                raise ValueError("need a random generator or a forced outcome")
            outcome = 0 if rng.random() < p0 else 1
        else:
            outcome = int(forced)
        if outcome == 0:
            out, prob = out0, p0
        else:
            c0, c1 = basis_coefficients(plane, angle, 1)
            out, prob = kernels.project_out(self.amplitudes, pos, c0, c1)
        if prob < MIN_FORCED_PROBABILITY:
            raise ImpossibleOutcome(f"outcome {outcome} on node {node} has probability {prob:.3g}")
        self.amplitudes = out / math.sqrt(prob)
        del self.node_map[node]
        for other, p in self.node_map.items():
            if p > pos:
                self.node_map[other] = p - 1
        return outcome, prob

    def ordered_amplitudes(self, nodes: Sequence[int]) -> np.ndarray:
        """Amplitudes re-indexed so that ``nodes[i]`` is bit ``i``."""
        n = self.live_count
        if sorted(nodes) != sorted(self.node_map):
            raise ValueError("node list does not match the live register")
        if n == 0:
            return self.amplitudes.copy()
        tensor = self.amplitudes.reshape([2] * n)
        axes = [n - 1 - self.node_map[nodes[n - 1 - a]] for a in range(n)]
        return np.ascontiguousarray(tensor.transpose(axes)).reshape(-1)

    def relabel(self, mapping: Mapping[int, int]) -> QuantumState:
        """New state whose node ``mapping[k]`` sits at bit position ``i`` of key order."""
        nodes = list(mapping)
        return QuantumState(self.ordered_amplitudes(nodes), {mapping[k]: i for i, k in enumerate(nodes)})

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """Global-phase-insensitive overlap ``|<a|b>|``."""
    if set(a.node_map) != set(b.node_map):
        raise ValueError("states live on different node sets")
    order = sorted(a.node_map, key=a.node_map.__getitem__)
    val = abs(np.vdot(a.amplitudes, b.ordered_amplitudes(order)))
    return float(min(1.0, val))


@dataclass
class OutcomeRecord:
    """Measurement outcomes of one pattern run.

    ``outcomes`` are the corrected (pattern-level) bits that drive sign
    dependencies and correction rules; ``raw`` are the bits the simulator
    actually drew before byproduct reinterpretation.
    """

    source: str
    seed: int | None
    outcomes: dict[int, int] = field(default_factory=dict)
    raw: dict[int, int] = field(default_factory=dict)
    probabilities: dict[int, float] = field(default_factory=dict)
    angles: dict[int, float] = field(default_factory=dict)
    peak_live: int = 0

    def to_json(self) -> str:
        doc = {
            "source": self.source,
            "seed": self.seed,
            "peak_live": self.peak_live,
            "measurements": [
                {
                    "node": n,
                    "outcome": self.outcomes[n],
                    "raw": self.raw[n],
                    "probability": self.probabilities[n],
                    "angle": self.angles[n],
                }
                for n in sorted(self.outcomes)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def run_pattern(
    pat: MeasurementPattern,
    gammas: Sequence[float],
    betas: Sequence[float],
    *,
    seed: int | None = None,
    forced: Mapping[int, int] | str | None = None,
) -> tuple[QuantumState, OutcomeRecord]:
    """Execute ``pat`` with lazily allocated ancillas.

    Each node is allocated and CZ-linked only when one of its links is
    needed by the next measurement, so a cost ancilla lives only between its
    entangling and its measurement.  Correction rules whose target is still
    to be measured are carried as pending Paulis: a pending X on ``a`` turns
    into a pending Z on ``b`` when ``CZ(a, b)`` is applied, and at measurement
    time a pending Pauli either negates the angle or flips the recorded
    outcome.  Pending Paulis left on output nodes are applied at the end.

    ``forced`` is ``"zeros"`` or a ``node -> bit`` map of corrected outcomes
    (unlisted nodes sample from ``seed``).  The returned state is keyed by
    vertex-qubit index.
    """
    if len(gammas) != pat.p or len(betas) != pat.p:
        raise ValueError(f"expected {pat.p} gamma and beta values")
    if forced == "zeros":
        forced_map: Mapping[int, int] = {ins.node: 0 for ins in pat.instructions}
    elif forced is None:
        forced_map = {}
    elif isinstance(forced, Mapping):
        forced_map = forced
    else:
        raise ValueError(f"bad forced mode {forced!r}")
    all_forced = forced == "zeros" or (
        isinstance(forced, Mapping) and all(i.node in forced for i in pat.instructions)
    )
    rng = np.random.default_rng(seed)
    record = OutcomeRecord("forced" if all_forced else "sampled", seed)

    adj = pat.adjacency()
    state = QuantumState()
    for n in pat.inputs:
        state.allocate_plus(n)
    allocated = set(pat.inputs)
    measured: set[int] = set()
    applied: set[tuple[int, int]] = set()
    px: dict[int, int] = defaultdict(int)
    pz: dict[int, int] = defaultdict(int)
    waiting = [set(r.sources) for r in pat.corrections]
    by_source: dict[int, list[int]] = defaultdict(list)
    for i, r in enumerate(pat.corrections):
        for s in r.sources:
            by_source[s].append(i)
    record.peak_live = state.live_count

    def ensure(node):
        if node in measured:
            raise DeadNodeError(f"node {node} already measured")
        if node not in allocated:
            state.allocate_plus(node)
            allocated.add(node)
            record.peak_live = max(record.peak_live, state.live_count)

    def link(node):
        ensure(node)
        for nb in adj[node]:
            e = (min(node, nb), max(node, nb))
            if e in applied:
                continue
            ensure(nb)
            state.apply_cz(nb, node)
            applied.add(e)
            pz[e[1]] ^= px[e[0]]
            pz[e[0]] ^= px[e[1]]

    outcomes = record.outcomes
    for ins in pat.instructions:
        n = ins.node
        link(n)
        angle = ins.angle(gammas, betas)
        if sum(outcomes[d] for d in ins.sign_dependencies) & 1:
            angle = -angle
        if ins.plane is Plane.YZ:
            negate, flip = pz.pop(n, 0), px.pop(n, 0)
        else:
            negate, flip = px.pop(n, 0), pz.pop(n, 0)
        if negate:
            angle = -angle
        if n in forced_map:
            raw, prob = state.measure(n, ins.plane, angle, forced=forced_map[n] ^ flip)
        else:
            raw, prob = state.measure(n, ins.plane, angle, rng=rng)
        measured.add(n)
        outcomes[n] = raw ^ flip
        record.raw[n] = raw
        record.probabilities[n] = prob
        record.angles[n] = angle
        for i in by_source[n]:
            waiting[i].discard(n)
            if waiting[i]:
                continue
            rule = pat.corrections[i]
            if rule.target in measured:
                raise ValueError(f"correction rule targets measured node {rule.target}")
            if sum(outcomes[s] for s in rule.sources) & 1:
                if rule.pauli == "X":
                    px[rule.target] ^= 1
                else:
                    pz[rule.target] ^= 1

    for n in pat.outputs:
        link(n)
    for n in pat.outputs:
        if px.get(n):
            state.apply_pauli(n, "X")
        if pz.get(n):
            state.apply_pauli(n, "Z")
    final = state.relabel({node: q for q, node in enumerate(pat.outputs)})
    return final, record


def reference_evolution(
    g: Graph,
    enc: EncodingParams,
    gammas: Sequence[float],
    betas: Sequence[float],
    *,
    penalty: bool = False,
    diagonal: np.ndarray | None = None,
    max_qubits: int = DENSE_QUBIT_LIMIT,
) -> QuantumState:
    """``prod_l exp(-i beta_l H_m) exp(-i gamma_l H) |+>^n`` by direct statevector evolution.

    ``H`` is the cost Hamiltonian (penalised when ``penalty``); a precomputed
    ``diagonal`` may be passed to skip its evaluation.
    """
    if len(gammas) != len(betas):
        raise ValueError("gamma and beta lists differ in length")
    n = enc.total_qubits
    if n > max_qubits:
        raise InstanceTooLarge(f"{n} qubits exceed the dense guard of {max_qubits}")
    if diagonal is None:
        h = build_penalized_target(g, enc) if penalty else build_target(g, enc)
        diagonal = evaluate_diagonal(h, max_qubits)
    state = QuantumState.plus(range(n))
    for gamma, beta in zip(gammas, betas):
        kernels.apply_phase(state.amplitudes, diagonal, float(gamma))
        for q in range(n):
            kernels.apply_rx(state.amplitudes, q, float(beta))
    return state
