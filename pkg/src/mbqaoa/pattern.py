"""Compile a MAX K-CUT instance into a cluster state and adaptive measurement program.

Per layer the cost evolution is realised by one ancilla per non-identity
summand of every edge term: the ancilla is CZ-linked to the encoding qubits
selected by the summand's bits and measured in the YZ plane.  The X-mixer is
a three-node chain per vertex qubit ``q - a1 - a2``: ``q`` is measured in X,
``a1`` in the XY plane with its angle sign set by ``q``'s outcome, and ``a2``
carries the qubit on.

Measurement angles (for the YZ basis ``|+> +/- e^{i phi}|->`` and XY basis
``|0> +/- e^{i phi}|1>``):

* cost ancilla: ``COST_CALIBRATION * w / 2**m * gamma``; the gadget applies
  ``exp(i phi/2 Z_S)``, which is ``exp(-i gamma w H_e)`` up to global phase.
* mixer ``a1``: ``MIXER_CALIBRATION * beta``; the chain applies
  ``exp(i phi/2 X)``, i.e. ``exp(-i beta X)``.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from enum import Enum

from mbqaoa.graph import Graph
from mbqaoa.hamiltonian import EncodingParams, edge_summand_masks

COST_CALIBRATION = 2.0
MIXER_CALIBRATION = -2.0
SCHEMA_VERSION = 1


class Role(str, Enum):
    INPUT = "vertex-input"
    COST = "cost-ancilla"
    MIXER_A1 = "mixer-a1"
    MIXER_A2 = "mixer-a2"


class Plane(str, Enum):
    YZ = "YZ"
    XY = "XY"
    X = "X"


@dataclass(frozen=True)
class Node:
    id: int
    role: Role
    layer: int
    qubit: int | None = None  # vertex-qubit index carried (input, a1, a2)
    edge: int | None = None  # edge index (cost ancilla)
    summand: int | None = None  # l in 1 .. 2**m - 1 (cost ancilla)


@dataclass(frozen=True)
class MeasurementInstruction:
    node: int
    plane: Plane
    param: str | None  # "gamma", "beta" or None for a fixed angle
    layer: int
    coefficient: float
    sign_dependencies: frozenset[int]
    round: int

    def angle(self, gammas, betas) -> float:
        if self.param is None:
            return self.coefficient
        values = gammas if self.param == "gamma" else betas
        return self.coefficient * float(values[self.layer - 1])


@dataclass(frozen=True)
class CorrectionRule:
    target: int
    pauli: str  # "X" or "Z"
    sources: frozenset[int]


@dataclass(frozen=True)
class PatternFragment:
    """One layer's worth of nodes, links, instructions and corrections."""

    nodes: tuple[Node, ...]
    cz_edges: tuple[tuple[int, int], ...]
    instructions: tuple[MeasurementInstruction, ...]
    corrections: tuple[CorrectionRule, ...]
    inputs: tuple[int, ...]  # node id per vertex qubit entering the fragment
    outputs: tuple[int, ...]  # node id per vertex qubit leaving it


@dataclass(frozen=True)
class MeasurementPattern:
    graph: Graph
    K: int
    p: int
    calibration: dict[str, float]
    nodes: tuple[Node, ...]
    cz_edges: tuple[tuple[int, int], ...]
    instructions: tuple[MeasurementInstruction, ...]
    corrections: tuple[CorrectionRule, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    declared_rounds: int
    m: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "m", EncodingParams(self.K, self.graph.vertex_count).m)

    @property
    def encoding(self) -> EncodingParams:
        return EncodingParams(self.K, self.graph.vertex_count)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for a, b in self.cz_edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def validate(self) -> None:
        """Raise ``ValueError`` if a structural invariant is broken."""
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        measured = [ins.node for ins in self.instructions]
        if len(set(measured)) != len(measured):
            raise ValueError("node measured twice")
        if set(measured) | set(self.outputs) != known or set(measured) & set(self.outputs):
            raise ValueError("every non-output node needs exactly one instruction")
        for a, b in self.cz_edges:
            if a == b or a not in known or b not in known:
                raise ValueError(f"bad CZ link {(a, b)}")
        seen: set[int] = set()
        for ins in self.instructions:
            if not ins.sign_dependencies <= seen:
                raise ValueError(f"node {ins.node} depends on a later measurement")
            if ins.plane is Plane.XY and not ins.sign_dependencies:
                raise ValueError(f"XY node {ins.node} has no sign dependency")
            seen.add(ins.node)
        for rule in self.corrections:
            if rule.target not in known or not rule.sources <= seen:
                raise ValueError(f"bad correction rule {rule}")


def _cost_fragment(
    g: Graph, enc: EncodingParams, layer: int, inputs: tuple[int, ...], first_id: int, c_cost: float
) -> PatternFragment:
    nodes, edges, instructions, corrections = [], [], [], []
    nid = first_id
    scale = c_cost / enc.labels
    for k, (u, v, w) in enumerate(g.edges):
        for ell, mask in enumerate(edge_summand_masks(u, v, enc.m), start=1):
            linked = [inputs[q] for q in range(enc.total_qubits) if (mask >> q) & 1]
            nodes.append(Node(nid, Role.COST, layer, edge=k, summand=ell))
            edges += [(min(nid, t), max(nid, t)) for t in linked]
            instructions.append(
                MeasurementInstruction(
                    nid, Plane.YZ, "gamma", layer, scale * w, frozenset(), 2 * layer - 1
                )
            )
            corrections += [CorrectionRule(t, "Z", frozenset({nid})) for t in linked]
            nid += 1
    return PatternFragment(
        tuple(nodes), tuple(edges), tuple(instructions), tuple(corrections), inputs, inputs
    )


def build_cost_layer(
    g: Graph,
    enc: EncodingParams,
    layer: int = 1,
    *,
    inputs: tuple[int, ...] | None = None,
    first_id: int | None = None,
    calibration: float = COST_CALIBRATION,
) -> PatternFragment:
    """Cost-evolution fragment: one YZ-measured ancilla per edge summand.

    ``inputs`` are the node ids holding the vertex qubits (default
    ``0 .. m|V|-1``); new nodes are numbered from ``first_id``.
    """
    if inputs is None:
        inputs = tuple(range(enc.total_qubits))
    if first_id is None:
        first_id = max(inputs, default=-1) + 1
    return _cost_fragment(g, enc, layer, tuple(inputs), first_id, calibration)


def build_mixer_layer(
    enc: EncodingParams,
    layer: int = 1,
    *,
    inputs: tuple[int, ...] | None = None,
    first_id: int | None = None,
    calibration: float = MIXER_CALIBRATION,
) -> PatternFragment:
    """X-mixer fragment: a ``q - a1 - a2`` chain per vertex qubit."""
    if inputs is None:
        inputs = tuple(range(enc.total_qubits))
    inputs = tuple(inputs)
    if first_id is None:
        first_id = max(inputs, default=-1) + 1
    n = len(inputs)
    nodes, edges, x_meas, xy_meas, corrections = [], [], [], [], []
    outputs = []
    for qubit, q in enumerate(inputs):
        a1, a2 = first_id + qubit, first_id + n + qubit
        nodes.append(Node(a1, Role.MIXER_A1, layer, qubit=qubit))
        edges += [(min(q, a1), max(q, a1)), (a1, a2)]
        x_meas.append(MeasurementInstruction(q, Plane.X, None, layer, 0.0, frozenset(), 2 * layer - 1))
        xy_meas.append(
            MeasurementInstruction(a1, Plane.XY, "beta", layer, calibration, frozenset({q}), 2 * layer)
        )
        corrections += [
            CorrectionRule(a2, "X", frozenset({a1})),
            CorrectionRule(a2, "Z", frozenset({q})),
        ]
        outputs.append(a2)
    nodes += [Node(a2, Role.MIXER_A2, layer, qubit=qubit) for qubit, a2 in enumerate(outputs)]
    return PatternFragment(
        tuple(nodes), tuple(edges), tuple(x_meas + xy_meas), tuple(corrections), inputs, tuple(outputs)
    )


def assemble_pattern(
    g: Graph,
    K: int,
    p: int = 1,
    *,
    cost_calibration: float = COST_CALIBRATION,
    mixer_calibration: float = MIXER_CALIBRATION,
) -> MeasurementPattern:
    """Stack ``p`` (cost, mixer) layer pairs; cost acts first in each layer."""
    if p < 1:
        raise ValueError("p must be >= 1")
    enc = EncodingParams(K, g.vertex_count)
    inputs = tuple(range(enc.total_qubits))
    nodes = [Node(i, Role.INPUT, 1, qubit=i) for i in inputs]
    edges: list[tuple[int, int]] = []
    instructions: list[MeasurementInstruction] = []
    corrections: list[CorrectionRule] = []
    current = inputs
    next_id = len(inputs)
    for layer in range(1, p + 1):
        cost = build_cost_layer(
            g, enc, layer, inputs=current, first_id=next_id, calibration=cost_calibration
        )
        next_id += len(cost.nodes)
        mixer = build_mixer_layer(
            enc, layer, inputs=current, first_id=next_id, calibration=mixer_calibration
        )
        next_id += len(mixer.nodes)
        for frag in (cost, mixer):
            nodes += frag.nodes
            edges += frag.cz_edges
            instructions += frag.instructions
            corrections += frag.corrections
        current = mixer.outputs
    pat = MeasurementPattern(
        graph=g,
        K=K,
        p=p,
        calibration={"cost": float(cost_calibration), "mixer": float(mixer_calibration)},
        nodes=tuple(nodes),
        cz_edges=tuple(edges),
        instructions=tuple(instructions),
        corrections=tuple(corrections),
        inputs=inputs,
        outputs=tuple(current),
        declared_rounds=2 * p,
    )
    pat.validate()
    return pat


def expected_node_count(vertex_count: int, edge_count: int, K: int, p: int) -> int:
    m = (K - 1).bit_length()
    return m * vertex_count + p * (((1 << m) - 1) * edge_count + 2 * m * vertex_count)


# -- compile-time signal propagation --------------------------------------


@dataclass(frozen=True)
class SignalDomains:
    """Outcome dependencies expressed over raw (uncorrected) outcomes.

    ``angle[n]``: raw outcomes whose parity negates node ``n``'s angle.
    ``flip[n]``: raw outcomes (other than ``n``) whose parity flips ``n``'s
    recorded outcome.  ``output_x`` / ``output_z``: final byproducts.
    """

    angle: dict[int, frozenset[int]]
    flip: dict[int, frozenset[int]]
    output_x: dict[int, frozenset[int]]
    output_z: dict[int, frozenset[int]]


def signal_domains(pat: MeasurementPattern) -> SignalDomains:
    """Push every correction rule forward through CZ links and measurements.

    Uses the same lazy schedule as the simulator: a CZ link is applied just
    before the first of its endpoints is measured, and a correction rule
    becomes a pending byproduct as soon as its last source is measured.
    """
    adj = pat.adjacency()
    px: dict[int, frozenset[int]] = defaultdict(frozenset)
    pz: dict[int, frozenset[int]] = defaultdict(frozenset)
    true: dict[int, frozenset[int]] = {}
    applied: set[tuple[int, int]] = set()
    waiting = [set(r.sources) for r in pat.corrections]
    by_source: dict[int, list[int]] = defaultdict(list)
    for i, r in enumerate(pat.corrections):
        for s in r.sources:
            by_source[s].append(i)
    angle, flip = {}, {}

    def xor_all(sets):
        out: frozenset[int] = frozenset()
        for s in sets:
            out = out ^ s
        return out

    def link(n):
        for nb in adj[n]:
            e = (min(n, nb), max(n, nb))
            if e in applied:
                continue
            applied.add(e)
            pz[e[1]] = pz[e[1]] ^ px[e[0]]
            pz[e[0]] = pz[e[0]] ^ px[e[1]]

    for ins in pat.instructions:
        n = ins.node
        link(n)
        sign = xor_all(true[d] for d in ins.sign_dependencies)
        if ins.plane is Plane.YZ:
            sign, f = sign ^ pz[n], px[n]
        else:
            sign, f = sign ^ px[n], pz[n]
        angle[n] = sign if ins.plane is not Plane.X else frozenset()
        flip[n] = f
        true[n] = frozenset({n}) ^ f
        px.pop(n, None)
        pz.pop(n, None)
        for i in by_source[n]:
            waiting[i].discard(n)
            if not waiting[i]:
                rule = pat.corrections[i]
                dom = xor_all(true[s] for s in rule.sources)
                if rule.target in true:
                    raise ValueError(f"correction targets measured node {rule.target}")
                if rule.pauli == "X":
                    px[rule.target] = px[rule.target] ^ dom
                else:
                    pz[rule.target] = pz[rule.target] ^ dom
    for n in pat.outputs:
        link(n)
    return SignalDomains(
        angle, flip, {n: px[n] for n in pat.outputs}, {n: pz[n] for n in pat.outputs}
    )


def dependency_depth(pat: MeasurementPattern, domains: SignalDomains | None = None) -> int:
    """Number of measurement rounds forced by angle dependencies.

    Outcome flips are classical post-processing and add no round.
    """
    if domains is None:
        domains = signal_domains(pat)
    depth: dict[int, int] = {}
    for ins in pat.instructions:
        deps = domains.angle[ins.node]
        depth[ins.node] = 1 + max((depth[d] for d in deps), default=0)
    return max(depth.values(), default=0)


def pattern_stats(pat: MeasurementPattern) -> dict:
    counts = {r.value: 0 for r in Role}
    for n in pat.nodes:
        counts[n.role.value] += 1
    return {
        "nodes": len(pat.nodes),
        "by_role": counts,
        "inputs": counts[Role.INPUT.value],
        "cost_ancillae": counts[Role.COST.value],
        "mixer": counts[Role.MIXER_A1.value] + counts[Role.MIXER_A2.value],
        "cz_links": len(pat.cz_edges),
        "measurements": len(pat.instructions),
        "corrections": len(pat.corrections),
        "declared_rounds": pat.declared_rounds,
    }


# -- export -----------------------------------------------------------------

_ROLE_COLOURS = {
    Role.INPUT: "orange",
    Role.COST: "lightblue",
    Role.MIXER_A1: "purple",
    Role.MIXER_A2: "green",
}


def _to_document(pat: MeasurementPattern) -> dict:
    return {
        "schema": "mbqaoa-pattern",
        "version": SCHEMA_VERSION,
        "header": {
            "calibration": pat.calibration,
            "p": pat.p,
            "K": pat.K,
            "m": pat.m,
            "graph_hash": pat.graph.digest(),
            "declared_rounds": pat.declared_rounds,
        },
        "graph": {"vertex_count": pat.graph.vertex_count, "edges": [list(e) for e in pat.graph.edges]},
        "body": {
            "nodes": [
                {k: (v.value if isinstance(v, Enum) else v) for k, v in asdict(n).items()}
                for n in pat.nodes
            ],
            "cz_edges": [list(e) for e in pat.cz_edges],
            "instructions": [
                {
                    "node": i.node,
                    "plane": i.plane.value,
                    "param": i.param,
                    "layer": i.layer,
                    "coefficient": i.coefficient,
                    "sign_dependencies": sorted(i.sign_dependencies),
                    "round": i.round,
                }
                for i in pat.instructions
            ],
            "corrections": [
                {"target": c.target, "pauli": c.pauli, "sources": sorted(c.sources)}
                for c in pat.corrections
            ],
            "inputs": list(pat.inputs),
            "outputs": list(pat.outputs),
        },
    }


def _to_dot(pat: MeasurementPattern) -> str:
    lines = ["graph pattern {", "  node [style=filled];"]
    for n in pat.nodes:
        lines.append(
            f'  {n.id} [label="{n.id + 1}", fillcolor={_ROLE_COLOURS[n.role]}, role="{n.role.value}"];'
        )
    lines += [f"  {a} -- {b};" for a, b in pat.cz_edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_pattern(pat: MeasurementPattern, fmt: str = "json") -> str:
    """Serialise an assembled pattern as ``json`` (round-trippable) or ``dot``."""
    if not isinstance(pat, MeasurementPattern):
        raise TypeError("only assembled patterns can be exported")
    fmt = fmt.lower()
    if fmt == "json":
        return json.dumps(_to_document(pat), indent=2, sort_keys=True) + "\n"
    if fmt == "dot":
        return _to_dot(pat)
    raise ValueError(f"unknown pattern format {fmt!r}")


def load_pattern(text: str) -> MeasurementPattern:
    doc = json.loads(text)
    if doc.get("schema") != "mbqaoa-pattern" or doc.get("version") != SCHEMA_VERSION:
        raise ValueError("not a supported pattern document")
    head, body = doc["header"], doc["body"]
    graph = Graph(doc["graph"]["vertex_count"], tuple(tuple(e) for e in doc["graph"]["edges"]))
    if graph.digest() != head["graph_hash"]:
        raise ValueError("graph hash mismatch")
    nodes = tuple(
        Node(n["id"], Role(n["role"]), n["layer"], n["qubit"], n["edge"], n["summand"])
        for n in body["nodes"]
    )
    instructions = tuple(
        MeasurementInstruction(
            i["node"],
            Plane(i["plane"]),
            i["param"],
            i["layer"],
            i["coefficient"],
            frozenset(i["sign_dependencies"]),
            i["round"],
        )
        for i in body["instructions"]
    )
    corrections = tuple(
        CorrectionRule(c["target"], c["pauli"], frozenset(c["sources"])) for c in body["corrections"]
    )
    pat = MeasurementPattern(
        graph=graph,
        K=head["K"],
        p=head["p"],
        calibration=dict(head["calibration"]),
        nodes=nodes,
        cz_edges=tuple(tuple(e) for e in body["cz_edges"]),
        instructions=instructions,
        corrections=corrections,
        inputs=tuple(body["inputs"]),
        outputs=tuple(body["outputs"]),
        declared_rounds=head["declared_rounds"],
    )
    pat.validate()
    return pat
