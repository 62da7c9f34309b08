"""Exact inference on the chain trellis: forward-backward, marginals,
Viterbi, and trellis assembly, checked against brute-force enumeration."""

import numpy as np
import pytest

from oracles import (
    all_paths,
    enumerate_log_z,
    enumerate_marginals,
    enumerate_viterbi,
    path_scores,
)
from synthetic import random_trellis
from tmcrf.chain import (
    Trellis,
    forward_backward,
    get_backends,
    marginals,
    path_score,
    posterior_helix,
    sequence_log_prob,
    trellis_from_features,
    viterbi,
)
from tmcrf.config import FeatureConfig
from tmcrf.errors import InfeasiblePathError, InfeasibleTopologyError, NumericalFailureError
from tmcrf.features import LabelContexts, build_index, extract
from tmcrf.sequence import Dataset, ProteinRecord
from tmcrf.states import binary_topology, check_path, extended_topology


def _log_z_of(kernels, start, edges, end_mask):
    alpha = kernels.forward(start, edges)
    v = alpha[-1] + end_mask
    mx = v.max()
    if not np.isfinite(mx):
        return -np.inf, alpha
    return float(mx + np.log(np.exp(v - mx).sum())), alpha


class TestForwardBackward:
    def test_log_z_matches_enumeration(self, kernels):
        rng = np.random.default_rng(3111)
        for _ in range(60):
            n_pos = int(rng.integers(1, 7))
            n_states = int(rng.integers(2, 5))
            start, edges, end_mask = random_trellis(rng, n_pos, n_states)
            log_z, _ = _log_z_of(kernels, start, edges, end_mask)
            expected = enumerate_log_z(start, edges, end_mask)
            assert abs(log_z - expected) < 1e-10

    def test_alpha_beta_agree_on_log_z_at_every_position(self, kernels):
        rng = np.random.default_rng(515)
        for _ in range(20):
            n_pos = int(rng.integers(2, 8))
            start, edges, end_mask = random_trellis(rng, n_pos, 3)
            log_z, alpha = _log_z_of(kernels, start, edges, end_mask)
            beta = kernels.backward(end_mask, edges)
            for t in range(n_pos):
                v = alpha[t] + beta[t]
                assert abs(np.logaddexp.reduce(v) - log_z) < 1e-10

    def test_zero_weights_count_paths(self, kernels):
        for n_pos, n_states in ((1, 2), (4, 2), (3, 5)):
            start = np.zeros(n_states)
            edges = np.zeros((n_pos - 1, n_states, n_states))
            log_z, _ = _log_z_of(kernels, start, edges, np.zeros(n_states))
            assert abs(log_z - n_pos * np.log(n_states)) < 1e-12

    def test_single_position_posterior(self, kernels):
        start = np.array([np.log(3.0), 0.0])
        edges = np.empty((0, 2, 2))
        end_mask = np.zeros(2)
        log_z, alpha = _log_z_of(kernels, start, edges, end_mask)
        assert alpha.shape == (1, 2)
        assert abs(log_z - np.log(4.0)) < 1e-12
        beta = kernels.backward(end_mask, edges)
        post = np.exp(alpha[0] + beta[0] - log_z)
        np.testing.assert_allclose(post, [0.75, 0.25], atol=1e-12)

    def test_constant_shift_moves_log_z_not_marginals(self, kernels):
        rng = np.random.default_rng(777)
        start, edges, end_mask = random_trellis(rng, 5, 3)
        fb1 = forward_backward(Trellis(start, edges, end_mask))
        node1, edge1 = marginals(fb1, Trellis(start, edges, end_mask))
        shifts = rng.uniform(-3.0, 3.0, size=edges.shape[0])
        c = float(rng.uniform(-3.0, 3.0))
        shifted = Trellis(start + c, np.ascontiguousarray(edges + shifts[:, None, None]), end_mask)
        fb2 = forward_backward(shifted)
        node2, edge2 = marginals(fb2, shifted)
        assert abs(fb2.log_Z - (fb1.log_Z + c + shifts.sum())) < 1e-10
        np.testing.assert_allclose(node2, node1, atol=1e-12)
        np.testing.assert_allclose(edge2, edge1, atol=1e-12)

    def test_marginals_match_enumeration_with_masks(self, kernels):
        rng = np.random.default_rng(2024)
        done = 0
        while done < 40:
            n_pos = int(rng.integers(2, 6))
            n_states = int(rng.integers(2, 4))
            start, edges, end_mask = random_trellis(rng, n_pos, n_states, mask_prob=0.15)
            if not np.isfinite(enumerate_log_z(start, edges, end_mask)):
                continue
            done += 1
            trellis = Trellis(start, edges, end_mask)
            fb = forward_backward(trellis)
            node, edge = marginals(fb, trellis)
            exp_node, exp_edge = enumerate_marginals(start, edges, end_mask)
            np.testing.assert_allclose(node, exp_node, atol=1e-10)
            np.testing.assert_allclose(edge, exp_edge, atol=1e-10)
            assert np.all(np.abs(node.sum(axis=1) - 1.0) < 1e-10)
            assert np.all(np.abs(edge.sum(axis=(1, 2)) - 1.0) < 1e-10)

    def test_all_end_states_masked_is_infeasible(self):
        start = np.zeros(2)
        edges = np.zeros((2, 2, 2))
        end_mask = np.full(2, -np.inf)
        with pytest.raises(InfeasibleTopologyError):
            forward_backward(Trellis(start, edges, end_mask))

    def test_overflowed_partition_is_numerical_not_infeasible(self):
        # a score that overflows to +inf means arithmetic failure, not an
        # empty path set; it must not be reported as infeasibility
        start = np.array([np.inf, 0.0])
        with np.errstate(all="ignore"), pytest.raises(NumericalFailureError):
            forward_backward(Trellis(start, np.empty((0, 2, 2)), np.zeros(2)))


class TestViterbi:
    def test_matches_enumeration_under_ties(self, kernels):
        # integer-valued scores force frequent exact ties
        rng = np.random.default_rng(90210)
        for _ in range(80):
            n_pos = int(rng.integers(1, 6))
            n_states = int(rng.integers(2, 4))
            start = rng.integers(0, 3, n_states).astype(np.float64)
            edges = np.ascontiguousarray(
                rng.integers(0, 3, (n_pos - 1, n_states, n_states)).astype(np.float64)
            )
            end_mask = np.zeros(n_states)
            path, score = kernels.viterbi_path(start, edges, end_mask)
            exp_path, exp_score = enumerate_viterbi(start, edges, end_mask)
            assert score == exp_score  # identical accumulation order: exact
            assert path.tolist() == exp_path.tolist()

    def test_matches_enumeration_random_weights(self, kernels):
        rng = np.random.default_rng(41)
        for _ in range(60):
            n_pos = int(rng.integers(1, 7))
            n_states = int(rng.integers(2, 5))
            start, edges, end_mask = random_trellis(rng, n_pos, n_states)
            path, score = kernels.viterbi_path(start, edges, end_mask)
            exp_path, exp_score = enumerate_viterbi(start, edges, end_mask)
            assert score == exp_score
            assert path.tolist() == exp_path.tolist()

    def test_score_is_left_to_right_path_sum(self, kernels):
        rng = np.random.default_rng(6)
        start, edges, end_mask = random_trellis(rng, 7, 4)
        path, score = kernels.viterbi_path(start, edges, end_mask)
        assert score == path_score(Trellis(start, edges, end_mask), path)

    def test_all_blocked_reports_infeasible(self):
        start = np.full(2, -np.inf)
        trellis = Trellis(start, np.zeros((1, 2, 2)), np.zeros(2))
        with pytest.raises(InfeasibleTopologyError):
            viterbi(trellis, binary_topology())

    def test_overflowed_score_is_numerical_not_infeasible(self):
        # finite weights whose running sum exceeds the float range decode
        # to +inf: an arithmetic failure, not a blocked topology
        huge = np.full((3, 2, 2), 1e308)
        trellis = Trellis(np.zeros(2), huge, np.zeros(2))
        with np.errstate(all="ignore"), pytest.raises(NumericalFailureError):
            viterbi(trellis, binary_topology())

    def test_backends_agree_bitwise(self):
        backends = sorted(get_backends().items())
        if len(backends) < 2:
            pytest.skip("only one backend importable")
        rng = np.random.default_rng(9933)
        for _ in range(25):
            start, edges, end_mask = random_trellis(rng, int(rng.integers(1, 9)), 4)
            results = []
            for _, mod in backends:
                alpha = mod.forward(start, edges)
                beta = mod.backward(end_mask, edges)
                path, score = mod.viterbi_path(start, edges, end_mask)
                results.append((alpha, beta, path, score))
            ref = results[0]
            for other in results[1:]:
                # logsumexp accumulation order may differ in the last bit
                np.testing.assert_allclose(other[0], ref[0], rtol=1e-13, atol=1e-13)
                np.testing.assert_allclose(other[1], ref[1], rtol=1e-13, atol=1e-13)
                # max/argmax and the path sum are order-identical: exact
                assert other[2].tolist() == ref[2].tolist()
                assert other[3] == ref[3]


class TestTrellisAssembly:
    def _toy_trellis(self, seq: str, weight_on: tuple[str, str, str], lam_value: float = 1.0):
        topo = binary_topology()
        contexts = LabelContexts(topo)
        fc = FeatureConfig(enabled=frozenset({"basic"}))
        # two gold labelings instantiate C and D under both labels
        train = Dataset((ProteinRecord("t1", "CD", "01"), ProteinRecord("t2", "CD", "10")))
        index = build_index(train, fc, topo)
        lam = np.zeros(index.K)
        from tmcrf.features import FeatureKey

        fid = index.lookup(FeatureKey(*weight_on))
        assert fid is not None
        lam[fid] = lam_value
        rf = extract(ProteinRecord("q", seq), index, fc, topo, contexts)
        return trellis_from_features(rf, lam, topo, contexts), topo

    def test_unigram_scores_ride_incoming_edges(self):
        trellis, _ = self._toy_trellis("CC", ("basic", "C", "y=0"))
        # position 0's score sits on the start vector, position 1's on edges
        np.testing.assert_allclose(trellis.start, [1.0, 0.0])
        np.testing.assert_allclose(trellis.edges[0], [[1.0, 0.0], [1.0, 0.0]])
        np.testing.assert_allclose(trellis.end_mask, [0.0, 0.0])

    def test_hand_computed_log_z(self):
        trellis, _ = self._toy_trellis("CC", ("basic", "C", "y=0"))
        # paths 00,01,10,11 score 2,1,1,0
        fb = forward_backward(trellis)
        assert abs(fb.log_Z - np.log(np.exp(2) + 2 * np.exp(1) + 1)) < 1e-12

    def test_length_one_record(self):
        trellis, topo = self._toy_trellis("C", ("basic", "C", "y=1"))
        assert trellis.edges.shape == (0, 2, 2)
        path, labels, score = viterbi(trellis, topo)
        assert labels == "1" and score == 1.0

    def test_path_probabilities_sum_to_one(self):
        trellis, topo = self._toy_trellis("CDCD", ("basic", "C", "y=0"), lam_value=0.7)
        paths = all_paths(4, 2)
        total = sum(
            np.exp(sequence_log_prob(trellis, p, topo)) for p in paths
        )
        assert abs(total - 1.0) < 1e-10

    def test_sequence_log_prob_rejects_illegal_paths(self):
        topo = extended_topology()
        contexts = LabelContexts(topo)
        fc = FeatureConfig(enabled=frozenset({"basic"}))
        train = Dataset((ProteinRecord("t", "A" * 20, "0" * 10 + "1" * 10),))
        index = build_index(train, fc, topo)
        rf = extract(train.records[0], index, fc, topo, contexts)
        trellis = trellis_from_features(rf, np.zeros(index.K), topo, contexts)
        with pytest.raises(InfeasiblePathError):
            sequence_log_prob(trellis, np.zeros(20, dtype=np.int64), topo, "t")


class TestExtendedDecoding:
    def test_zero_weight_tie_break_is_deterministic(self):
        topo = extended_topology()
        contexts = LabelContexts(topo)
        fc = FeatureConfig(enabled=frozenset({"basic"}))
        train = Dataset((ProteinRecord("t", "ACDEF" * 4, "00000" * 2 + "11111" * 2),))
        index = build_index(train, fc, topo)
        rf = extract(ProteinRecord("q", "ACDEFGHIKL"), index, fc, topo, contexts)
        trellis = trellis_from_features(rf, np.zeros(index.K), topo, contexts)
        path, labels, score = viterbi(trellis, topo)
        assert score == 0.0
        check_path(path, topo)
        # With all paths tied, backtracking always takes the lowest-indexed
        # state. The lowest end state (first loop-entry) is only reachable
        # from a helix end, whose cheapest predecessor is the loop entry
        # again, so the tie walks those two states alternately.
        loop_entry = topo.index_of["loop_in1"]
        helix_entry = topo.index_of["helix_in1"]
        assert path.tolist() == [helix_entry, loop_entry] * 5
        assert labels == "10" * 5

    def test_decoded_paths_always_legal(self):
        topo = extended_topology()
        contexts = LabelContexts(topo)
        fc = FeatureConfig(enabled=frozenset({"basic", "properties"}))
        rng = np.random.default_rng(48151)
        letters = np.array(list("ACDEFGHIKLMNPQRSTVWY"))
        train = Dataset((
            ProteinRecord("t", "A" * 40, "0" * 10 + "1" * 20 + "0" * 10),
        ))
        index = build_index(train, fc, topo)
        for _ in range(15):
            lam = rng.uniform(-2.0, 2.0, index.K)
            seq = "".join(rng.choice(letters, size=int(rng.integers(3, 60))))
            rf = extract(ProteinRecord("q", seq), index, fc, topo, contexts)
            trellis = trellis_from_features(rf, lam, topo, contexts)
            path, labels, _ = viterbi(trellis, topo)
            check_path(path, topo)
            assert len(labels) == len(seq)

    def test_posterior_helix_sums_helix_state_marginals(self):
        topo = extended_topology()
        contexts = LabelContexts(topo)
        fc = FeatureConfig(enabled=frozenset({"basic"}))
        train = Dataset((ProteinRecord("t", "A" * 30, "0" * 10 + "1" * 15 + "0" * 5),))
        index = build_index(train, fc, topo)
        rng = np.random.default_rng(7)
        lam = rng.uniform(-1.0, 1.0, index.K)
        rf = extract(ProteinRecord("q", "ADEAILVADE"), index, fc, topo, contexts)
        trellis = trellis_from_features(rf, lam, topo, contexts)
        fb = forward_backward(trellis)
        post = posterior_helix(fb, topo)
        node, _ = marginals(fb, trellis)
        np.testing.assert_allclose(post, node[:, topo.labels == 1].sum(axis=1), atol=1e-12)
        assert np.all((post >= -1e-12) & (post <= 1.0 + 1e-12))
