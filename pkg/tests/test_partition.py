import json

import numpy as np
import pytest

from revcomp import (
    ExactSolverCapError,
    IndistinguishabilityGraph,
    Partition,
    ReportMismatchError,
    ValidationError,
    build_graph,
    compress,
    compressibility,
    compose,
    decompression_channel,
    default_exact_cap,
    fidelity,
    graph_from_fidelity_matrix,
    make_erasure,
    make_generalized_erasure,
    make_identity,
    partition_is_clique_cover,
    reverse_fidelity_matrix,
    solve_exact,
    solve_greedy,
)
from revcomp.channels import Distribution

from oracles import min_clique_cover_brute, random_adjacency, random_channel


def graph_from_edges(n, edges):
    adj = np.eye(n, dtype=bool)
    for a, b in edges:
        adj[a, b] = adj[b, a] = True
    return IndistinguishabilityGraph(adj)


class TestGraph:
    def test_adjacency_must_be_square_symmetric_reflexive(self):
        with pytest.raises(ValidationError):
            IndistinguishabilityGraph(np.ones((2, 3), dtype=bool))
        bad = np.eye(3, dtype=bool)
        bad[0, 1] = True
        with pytest.raises(ValidationError):
            IndistinguishabilityGraph(bad)
        with pytest.raises(ValidationError):
            IndistinguishabilityGraph(np.zeros((2, 2), dtype=bool))

    def test_threshold_rule(self):
        rng = np.random.default_rng(0)
        fid = rng.random((5, 5))
        fid = (fid + fid.T) / 2
        np.fill_diagonal(fid, 1.0)
        eps = 0.4
        g = graph_from_fidelity_matrix(fid, eps)
        for i in range(5):
            for j in range(5):
                assert g.are_adjacent(i, j) == (fid[i, j] >= 1.0 - eps)

    def test_epsilon_range(self):
        fid = np.eye(2)
        graph_from_fidelity_matrix(fid, 0.0)
        graph_from_fidelity_matrix(fid, 1.0)
        with pytest.raises(ValidationError):
            graph_from_fidelity_matrix(fid, -0.01)
        with pytest.raises(ValidationError):
            graph_from_fidelity_matrix(fid, 1.01)

    def test_build_graph_erasure(self):
        # pairwise fidelity 0.81 >= 1 - 0.2, so everything is adjacent
        g = build_graph(make_erasure(3, 0.9), 0.2)
        assert all(g.are_adjacent(i, j) for i in range(3) for j in range(3))
        g = build_graph(make_erasure(3, 0.9), 0.1)
        assert not g.are_adjacent(0, 1)
        assert g.are_adjacent(1, 1)


class TestPartition:
    def test_canonical_order(self):
        p = Partition(((3, 1), (0, 2)))
        assert p.blocks == ((0, 2), (1, 3))
        assert p.representatives() == (0, 1)

    def test_rejects_overlap_and_empty(self):
        with pytest.raises(ValidationError):
            Partition(((0, 1), (1, 2)))
        with pytest.raises(ValidationError):
            Partition(((0,), ()))

    def test_covers(self):
        assert Partition(((0, 1), (2,))).covers(3)
        assert not Partition(((0, 1),)).covers(3)
        assert not Partition(((0, 3),)).covers(2)

    def test_block_index(self):
        p = Partition(((0, 2), (1,)))
        assert p.block_index() == {0: 0, 2: 0, 1: 1}

    def test_clique_cover_validator(self):
        g = graph_from_edges(3, [(0, 1)])
        assert partition_is_clique_cover(Partition(((0, 1), (2,))), g)
        assert not partition_is_clique_cover(Partition(((0, 2), (1,))), g)
        assert not partition_is_clique_cover(Partition(((0, 1),)), g)


class TestSolvers:
    def test_known_graphs(self):
        path3 = graph_from_edges(3, [(0, 1), (1, 2)])
        assert solve_exact(path3).num_blocks == 2
        cycle5 = graph_from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
        assert solve_exact(cycle5).num_blocks == 3
        complete = graph_from_edges(4, [(i, j) for i in range(4) for j in range(i)])
        assert solve_exact(complete).blocks == ((0, 1, 2, 3),)
        empty = graph_from_edges(4, [])
        assert solve_exact(empty).num_blocks == 4

    def test_single_vertex(self):
        g = graph_from_edges(1, [])
        assert solve_exact(g).blocks == ((0,),)
        assert solve_greedy(g).blocks == ((0,),)

    def test_exact_matches_brute_force(self):
        rng = np.random.default_rng(12)
        for trial in range(150):
            n = int(rng.integers(1, 9))
            p = float(rng.uniform(0.1, 0.9))
            adj = random_adjacency(rng, n, p)
            g = IndistinguishabilityGraph(adj)
            got = solve_exact(g)
            assert partition_is_clique_cover(got, g)
            assert got.num_blocks == min_clique_cover_brute(adj)

    def test_greedy_valid_and_never_better(self):
        rng = np.random.default_rng(13)
        for trial in range(100):
            n = int(rng.integers(1, 9))
            adj = random_adjacency(rng, n, float(rng.uniform(0.2, 0.8)))
            g = IndistinguishabilityGraph(adj)
            exact = solve_exact(g)
            greedy = solve_greedy(g)
            assert partition_is_clique_cover(greedy, g)
            assert greedy.num_blocks >= exact.num_blocks

    def test_greedy_can_be_suboptimal(self):
        # first-fit merges 0 with 1 and then strands 2 and 3
        g = graph_from_edges(4, [(0, 1), (0, 2), (1, 3)])
        assert solve_exact(g).num_blocks == 2
        assert solve_greedy(g).num_blocks == 3

    def test_exact_deterministic(self):
        rng = np.random.default_rng(14)
        adj = random_adjacency(rng, 8, 0.5)
        g1 = IndistinguishabilityGraph(adj)
        g2 = IndistinguishabilityGraph(adj.copy())
        assert solve_exact(g1).blocks == solve_exact(g2).blocks

    def test_cap_enforced(self):
        g = graph_from_edges(21, [])
        with pytest.raises(ExactSolverCapError):
            solve_exact(g)
        assert solve_exact(g, cap=21).num_blocks == 21

    def test_cap_env_override(self, monkeypatch):
        monkeypatch.setenv("REVCOMP_EXACT_CAP", "25")
        assert default_exact_cap() == 25
        g = graph_from_edges(22, [])
        assert solve_exact(g).num_blocks == 22
        monkeypatch.setenv("REVCOMP_EXACT_CAP", "zero")
        with pytest.raises(ValidationError):
            default_exact_cap()


class TestCompressibility:
    def test_edge_cases(self):
        assert compressibility(1, 1) == 1.0
        assert compressibility(5, 5) == 0.0
        assert compressibility(5, 1) == 1.0
        assert compressibility(4, 2) == pytest.approx(2 / 3, abs=0)

    def test_invalid_counts(self):
        with pytest.raises(ValidationError):
            compressibility(0, 1)
        with pytest.raises(ValidationError):
            compressibility(3, 4)
        with pytest.raises(ValidationError):
            compressibility(3, 0)


class TestCompress:
    def test_full_merge_erasure(self):
        report = compress(make_erasure(2, 0.9), 0.2)
        assert report.solver == "exact"
        assert report.optimal
        assert report.partition.blocks == ((0, 1),)
        assert report.compressibility == 1.0
        assert report.certificates[0] == pytest.approx(0.81, abs=1e-12)

    def test_identity_never_merges(self):
        report = compress(make_identity(5), 0.9)
        assert report.partition.num_blocks == 5
        assert report.compressibility == 0.0
        assert report.certificates == (1.0,) * 5

    def test_generalized_erasure_two_blocks(self):
        ch = make_generalized_erasure((("1", "2"), ("3", "4")), (0.9, 0.95))
        report = compress(ch, 0.2)
        assert report.to_json_dict()["blocks"] == [["1", "2"], ["3", "4"]]
        assert report.to_json_dict()["representatives"] == ["1", "3"]
        assert report.compressibility == 2 / 3
        assert report.certificates == (
            pytest.approx(0.81, abs=1e-12),
            pytest.approx(0.9025, abs=1e-12),
        )

    def test_epsilon_zero_merges_only_equal_rows(self):
        ch = make_erasure(2, 0.9)
        assert compress(ch, 0.0).partition.num_blocks == 2
        const = make_identity(3)
        fid = reverse_fidelity_matrix(const)
        assert compress(const, 0.0).partition.num_blocks == 3
        assert np.all(np.diag(fid) == 1.0)

    def test_constant_channel_all_epsilon(self):
        from revcomp import make_constant

        for eps in (0.0, 0.3, 1.0):
            report = compress(make_constant(4), eps)
            assert report.partition.blocks == ((0, 1, 2, 3),)
            assert report.compressibility == 1.0

    def test_blocks_grow_with_epsilon(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            ch = random_channel(rng, int(rng.integers(2, 7)), int(rng.integers(2, 5)))
            epsilons = sorted(rng.uniform(0.0, 1.0, size=3))
            counts = [compress(ch, e).partition.num_blocks for e in epsilons]
            assert counts == sorted(counts, reverse=True)

    def test_certificates_clear_threshold(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            ch = random_channel(rng, 5, 3)
            eps = float(rng.uniform(0.05, 0.95))
            report = compress(ch, eps)
            assert all(c >= 1.0 - eps for c in report.certificates)

    def test_auto_falls_back_to_greedy(self):
        report = compress(make_identity(25), 0.5)
        assert report.solver == "greedy"
        assert not report.optimal
        assert report.partition.num_blocks == 25

    def test_exact_solver_cap_error(self):
        with pytest.raises(ExactSolverCapError):
            compress(make_identity(25), 0.5, solver="exact")

    def test_unknown_solver(self):
        with pytest.raises(ValidationError):
            compress(make_identity(2), 0.5, solver="fast")

    def test_report_json_round_trip(self):
        report = compress(make_erasure(3, 0.5), 0.8)
        data = json.loads(report.to_json())
        assert list(data.keys()) == [
            "epsilon",
            "solver",
            "optimal",
            "blocks",
            "representatives",
            "compressibility",
            "certificates",
        ]
        assert data["epsilon"] == 0.8
        assert data["blocks"] == [["1", "2", "3"]]

    def test_byte_identical_reports(self):
        a = compress(make_erasure(4, 0.7), 0.6).to_json()
        b = compress(make_erasure(4, 0.7), 0.6).to_json()
        assert a == b


class TestDecompression:
    def test_round_trip_stays_within_epsilon(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            ch = random_channel(rng, 6, 4)
            eps = float(rng.uniform(0.1, 0.9))
            report = compress(ch, eps)
            dec = decompression_channel(report, ch)
            effective = compose(dec, ch)
            index = report.partition.block_index()
            for i, x in enumerate(ch.input.labels):
                row = Distribution(ch.output, ch.matrix[i])
                eff = Distribution(ch.output, effective.matrix[index[i]])
                assert fidelity(row, eff) >= 1.0 - eps - 1e-12

    def test_decompression_structure(self):
        ch = make_generalized_erasure((("1", "2"), ("3", "4")), (0.9, 0.95))
        dec = decompression_channel(compress(ch, 0.2), ch)
        assert dec.input.labels == ("z1", "z2")
        assert dec.output.labels == ch.input.labels
        assert np.array_equal(dec.matrix, np.array([[1, 0, 0, 0], [0, 0, 1, 0]], dtype=float))

    def test_mismatched_channel_rejected(self):
        report = compress(make_erasure(3, 0.5), 0.8)
        with pytest.raises(ReportMismatchError):
            decompression_channel(report, make_identity(4))
