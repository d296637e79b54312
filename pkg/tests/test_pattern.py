import pytest

from mbqaoa.graph import Graph, complete_graph
from mbqaoa.hamiltonian import EncodingParams
from mbqaoa.pattern import (
    Plane,
    Role,
    assemble_pattern,
    build_cost_layer,
    build_mixer_layer,
    dependency_depth,
    expected_node_count,
    export_pattern,
    load_pattern,
    pattern_stats,
    signal_domains,
)
from mbqaoa.resources import native_cluster_size
from mbqaoa.simulator import run_pattern


@pytest.fixture
def k4_pattern(k4):
    return assemble_pattern(k4, 4, 1)


class TestCounts:
    def test_k4_node_layout(self, k4_pattern):
        stats = pattern_stats(k4_pattern)
        assert stats["nodes"] == 42
        assert stats["inputs"] == 8
        assert stats["cost_ancillae"] == 18
        assert stats["mixer"] == 16
        ids = {r: [n.id for n in k4_pattern.nodes if n.role is r] for r in Role}
        assert ids[Role.INPUT] == list(range(8))
        assert ids[Role.COST] == list(range(8, 26))
        assert ids[Role.MIXER_A1] == list(range(26, 34))
        assert ids[Role.MIXER_A2] == list(range(34, 42))

    def test_native_size_agrees(self, k4_pattern):
        assert len(k4_pattern.nodes) == native_cluster_size(4, 6, 4)

    @pytest.mark.parametrize("n,K,p", [(3, 2, 1), (4, 4, 2), (3, 8, 3), (2, 3, 1)])
    def test_expected_node_count(self, n, K, p):
        g = complete_graph(n)
        assert len(assemble_pattern(g, K, p).nodes) == expected_node_count(n, g.edge_count, K, p)

    def test_cost_ancilla_degree_is_twice_popcount(self, k4_pattern):
        adj = k4_pattern.adjacency()
        for n in k4_pattern.nodes:
            if n.role is Role.COST:
                assert len(adj[n.id]) == 2 * bin(n.summand).count("1")

    def test_mixer_chain_degrees(self, k4_pattern):
        adj = k4_pattern.adjacency()
        for n in k4_pattern.nodes:
            if n.role is Role.MIXER_A1:
                assert len(adj[n.id]) == 2
            elif n.role is Role.MIXER_A2:
                assert len(adj[n.id]) == 1

    def test_empty_graph_has_no_cost(self):
        pat = assemble_pattern(Graph(2), 2, 1)
        assert pattern_stats(pat)["cost_ancillae"] == 0


class TestInstructions:
    def test_planes(self, k4_pattern):
        by_role = {n.id: n.role for n in k4_pattern.nodes}
        for ins in k4_pattern.instructions:
            role = by_role[ins.node]
            expected = {Role.COST: Plane.YZ, Role.INPUT: Plane.X, Role.MIXER_A1: Plane.XY}[role]
            assert ins.plane is expected

    def test_cost_angle_scaling(self):
        g = Graph(2, ((0, 1, 3.0),))
        pat = assemble_pattern(g, 4, 1)
        ins = [i for i in pat.instructions if i.plane is Plane.YZ]
        assert all(i.angle([0.5], [0.0]) == pytest.approx(2 * 3.0 / 4 * 0.5) for i in ins)

    def test_mixer_dependencies(self):
        enc = EncodingParams(2, 2)
        frag = build_mixer_layer(enc, inputs=(0, 1), first_id=10)
        xy = [i for i in frag.instructions if i.plane is Plane.XY]
        assert [(i.node, set(i.sign_dependencies)) for i in xy] == [(10, {0}), (11, {1})]
        assert frag.outputs == (12, 13)

    def test_cost_layer_corrections_target_inputs(self):
        enc = EncodingParams(2, 3)
        frag = build_cost_layer(complete_graph(3), enc)
        assert all(r.pauli == "Z" and r.target in range(3) for r in frag.corrections)

    def test_p_must_be_positive(self, k4):
        with pytest.raises(ValueError):
            assemble_pattern(k4, 4, 0)


class TestDomains:
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_depth_is_two_per_layer(self, k4, p):
        assert dependency_depth(assemble_pattern(k4, 4, p)) == 2 * p

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_domains_match_runtime(self, seed):
        g = Graph(3, ((0, 1, 1.0), (1, 2, 0.5)))
        pat = assemble_pattern(g, 4, 2)
        dom = signal_domains(pat)
        gammas, betas = (0.3, 0.9), (0.4, 0.2)
        _, rec = run_pattern(pat, gammas, betas, seed=seed)
        for ins in pat.instructions:
            n = ins.node
            neg = sum(rec.raw[d] for d in dom.angle[n]) & 1
            assert rec.angles[n] == pytest.approx((-1) ** neg * ins.angle(gammas, betas))
            flip = sum(rec.raw[d] for d in dom.flip[n]) & 1
            assert rec.outcomes[n] == rec.raw[n] ^ flip


class TestExport:
    def test_json_round_trip(self, k4_pattern):
        text = export_pattern(k4_pattern, "json")
        again = load_pattern(text)
        assert pattern_stats(again) == pattern_stats(k4_pattern)
        assert export_pattern(again, "json") == text

    def test_dot(self, k4_pattern):
        dot = export_pattern(k4_pattern, "dot")
        assert dot.count("label=") == 42
        assert dot.count(" -- ") == len(k4_pattern.cz_edges)
        assert 'label="1"' in dot and 'label="42"' in dot

    def test_rejects_fragment(self):
        frag = build_mixer_layer(EncodingParams(2, 1))
        with pytest.raises(TypeError):
            export_pattern(frag, "json")

    def test_unknown_format(self, k4_pattern):
        with pytest.raises(ValueError):
            export_pattern(k4_pattern, "yaml")

    def test_tampered_hash_rejected(self, k4_pattern):
        text = export_pattern(k4_pattern).replace('"vertex_count": 4', '"vertex_count": 5', 1)
        with pytest.raises(ValueError):
            load_pattern(text)
