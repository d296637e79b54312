"""Self-checks run by ``mbqaoa verify``.

Each check compares a construction against an independent brute-force
oracle and reports counterexamples instead of raising.
"""

from __future__ import annotations

import itertools
import time
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field

import numpy as np

from mbqaoa.graph import Graph, cut_value
from mbqaoa.hamiltonian import (
    EncodingParams,
    build_edge_term,
    build_penalty,
    build_projector,
    build_target,
    check_edge_term_theorem,
    encode_assignment,
    evaluate_diagonal,
)
from mbqaoa.pattern import COST_CALIBRATION, MIXER_CALIBRATION, assemble_pattern
from mbqaoa.simulator import fidelity, reference_evolution, run_pattern

SELECTORS = ("edge-operator", "projector", "cut-diagonal", "penalty", "oracle")
FIDELITY_TOL = 1e-9
MAX_COUNTEREXAMPLES = 5

# known Z-expansions of the M=3 (m=2) and M=7 (m=3) projectors, keyed by support
PROJECTOR_EXAMPLES = {
    (3, 2): {0b00: 0.75, 0b01: 0.25, 0b10: 0.25, 0b11: -0.25},
    (7, 3): {
        0b000: 7 / 8,
        0b001: 1 / 8,
        0b010: 1 / 8,
        0b100: 1 / 8,
        0b011: -1 / 8,
        0b110: -1 / 8,
        0b101: -1 / 8,
        0b111: 1 / 8,
    },
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float = 0.0
    cases: int = 0
    counterexamples: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: {self.cases} cases in {self.seconds:.3f}s"
        for c in self.counterexamples:
            text += f"\n    counterexample: {c}"
        return text


class _Collector:
    def __init__(self, name: str):
        self.result = CheckResult(name, True)

    def case(self, ok: bool, describe: Callable[[], str]) -> None:
        self.result.cases += 1
        if not ok:
            self.result.passed = False
            if len(self.result.counterexamples) < MAX_COUNTEREXAMPLES:
                self.result.counterexamples.append(describe())


def check_edge_operator(max_m: int = 3, atol: float = 1e-12) -> CheckResult:
    """Edge operator is ``1 - delta(w, u)`` for ``m <= max_m``; base case is diag(0,1,1,0)."""
    col = _Collector("edge-operator")
    base = build_edge_term((0, 1), EncodingParams(2, 2)).to_dense()
    col.case(np.allclose(base, np.diag([0, 1, 1, 0]), rtol=0, atol=atol), lambda: "m=1 matrix != diag(0,1,1,0)")
    for m in range(1, max_m + 1):
        col.case(check_edge_term_theorem(m, atol), lambda m=m: f"m={m}")
    return col.result


def brute_force_projector(M: int, m: int) -> np.ndarray:
    """Diagonal matrix projecting onto the first ``M`` basis states."""
    return np.diag((np.arange(1 << m) < M).astype(float))


def check_projector(max_m: int = 4, atol: float = 1e-12) -> CheckResult:
    col = _Collector("projector")
    for m in range(1, max_m + 1):
        for M in range(1, (1 << m) + 1):
            diff = np.max(np.abs(build_projector(M, m).to_dense() - brute_force_projector(M, m)))
            col.case(diff <= atol, lambda M=M, m=m, d=diff: f"M={M} m={m} max|diff|={d:.3g}")
    for (M, m), expected in PROJECTOR_EXAMPLES.items():
        got = dict(build_projector(M, m).terms)
        ok = set(got) == set(expected) and all(abs(got[k] - v) <= atol for k, v in expected.items())
        col.case(ok, lambda M=M, m=m, got=got: f"expansion of P({M},{m}) = {got}")
    return col.result


def random_complete_graph(n: int, rng: np.random.Generator) -> Graph:
    edges = [(u, v, float(rng.uniform(0.1, 2.0))) for u, v in itertools.combinations(range(n), 2)]
    return Graph(n, tuple(edges))


def check_cut_diagonal(max_vertices: int = 4, Ks=(2, 4), seed: int = 0, atol: float = 1e-9) -> CheckResult:
    """Diagonal of the target Hamiltonian equals the classical cut, exhaustively."""
    col = _Collector("cut-diagonal")
    rng = np.random.default_rng(seed)
    for n in range(1, max_vertices + 1):
        g = random_complete_graph(n, rng)
        for K in Ks:
            enc = EncodingParams(K, n)
            diag = evaluate_diagonal(build_target(g, enc))
            for a in itertools.product(range(K), repeat=n):
                got, want = diag[encode_assignment(a, enc)], cut_value(g, a)
                col.case(abs(got - want) <= atol, lambda a=a, got=got, want=want, K=K: f"K={K} a={a}: {got} vs {want}")
    return col.result


def penalised_weight(g: Graph, a, K: int) -> float:
    """Total weight of edges with an endpoint carrying a label ``>= K``."""
    return sum(w for u, v, w in g.edges if a[u] >= K or a[v] >= K)


def check_penalty(K: int = 3, max_vertices: int = 4, seed: int = 1, atol: float = 1e-9) -> CheckResult:
    col = _Collector("penalty")
    rng = np.random.default_rng(seed)
    for n in range(1, max_vertices + 1):
        g = random_complete_graph(n, rng)
        enc = EncodingParams(K, n)
        diag = evaluate_diagonal(build_penalty(g, enc))
        for a in itertools.product(range(1 << enc.m), repeat=n):
            got, want = diag[encode_assignment(a, enc)], penalised_weight(g, a, K)
            col.case(abs(got - want) <= atol, lambda a=a, got=got, want=want: f"n={n} a={a}: {got} vs {want}")
    return col.result


@dataclass(frozen=True)
class OracleCase:
    graph: Graph
    K: int
    p: int
    gammas: tuple[float, ...]
    betas: tuple[float, ...]
    seed: int

    def describe(self) -> str:
        return (
            f"V={self.graph.vertex_count} E={self.graph.edge_count} K={self.K} p={self.p} "
            f"gammas={self.gammas} betas={self.betas} seed={self.seed}"
        )


def random_oracle_cases(count: int, seed: int = 0, Ks=(2, 4, 8), ps=(1, 2), max_qubits: int = 12) -> Iterator[OracleCase]:
    """Random weighted graphs with ``m|V| <= max_qubits``, cycling through ``Ks`` x ``ps``."""
    rng = np.random.default_rng(seed)
    combos = list(itertools.product(Ks, ps))
    for i in range(count):
        K, p = combos[i % len(combos)]
        m = (K - 1).bit_length()
        n = int(rng.integers(1, max_qubits // m + 1))
        pairs = list(itertools.combinations(range(n), 2))
        keep = rng.random(len(pairs)) < rng.uniform(0.3, 1.0)
        edges = tuple((u, v, float(rng.uniform(-1.0, 2.0))) for (u, v), k in zip(pairs, keep) if k)
        yield OracleCase(
            Graph(n, edges),
            K,
            p,
            tuple(map(float, rng.uniform(0, 2 * np.pi, p))),
            tuple(map(float, rng.uniform(0, np.pi, p))),
            int(rng.integers(0, 2**31)),
        )


def oracle_fidelity(case: OracleCase, cost_calibration: float = COST_CALIBRATION, mixer_calibration: float = MIXER_CALIBRATION) -> float:
    pat = assemble_pattern(
        case.graph, case.K, case.p, cost_calibration=cost_calibration, mixer_calibration=mixer_calibration
    )
    out, _ = run_pattern(pat, case.gammas, case.betas, seed=case.seed)
    ref = reference_evolution(case.graph, pat.encoding, case.gammas, case.betas)
    return fidelity(out, ref)


def check_oracle(
    cases: int = 40,
    seed: int = 0,
    cost_calibration: float = COST_CALIBRATION,
    mixer_calibration: float = MIXER_CALIBRATION,
    max_qubits: int = 10,
) -> CheckResult:
    """Pattern output equals the reference evolution up to global phase."""
    col = _Collector("oracle")
    for case in random_oracle_cases(cases, seed, max_qubits=max_qubits):
        f = oracle_fidelity(case, cost_calibration, mixer_calibration)
        col.case(f >= 1 - FIDELITY_TOL, lambda f=f, case=case: f"fidelity {f:.12f} for {case.describe()}")
    return col.result


def run_checks(selectors=SELECTORS, **oracle_kwargs) -> list[CheckResult]:
    """Run the named checks in order; ``oracle_kwargs`` go to :func:`check_oracle`."""
    table = {
        "edge-operator": check_edge_operator,
        "projector": check_projector,
        "cut-diagonal": check_cut_diagonal,
        "penalty": check_penalty,
        "oracle": lambda: check_oracle(**oracle_kwargs),
    }
    results = []
    for name in selectors:
        if name not in table:
            raise ValueError(f"unknown check {name!r}; choose from {', '.join(SELECTORS)}")
        t0 = time.perf_counter()
        res = table[name]()
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
