import numpy as np
import numpy.testing as npt
import pytest

from domset.assoc import (
    AssociationResult,
    AssociationSet,
    GroupedAffinity,
    RankedNeighborList,
    dynamic_nn_select,
    feature_weights,
    gate_grouped_affinity,
    prune_query,
    refine_constraint1,
    refine_constraint2,
    track_association,
    transitive_closure,
)
from domset.cdsc import enumerate_all_constrained
from domset.exceptions import (
    DimensionMismatchError,
    EmptyGroupError,
    EmptyListError,
    LengthMismatchError,
    TooFewNeighborsError,
    ValidationError,
    ZeroAreaError,
)


def ranked(distances, query_id=0):
    ids = np.arange(100, 100 + len(distances))
    return RankedNeighborList(query_id, ids, np.asarray(distances, dtype=float))


class TestRankedNeighborList:
    def test_empty_rejected(self):
        with pytest.raises(EmptyListError):
            RankedNeighborList(0, [], [])

    def test_decreasing_distances_rejected(self):
        with pytest.raises(ValidationError):
            ranked([2.0, 1.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            RankedNeighborList(0, [1, 2], [0.5])


class TestDynamicNnSelect:
    def test_similar_pair_then_gap(self):
        # 1.0/1.1 > 0.7 admits the second; 1.1/5.0 stops the scan
        out = dynamic_nn_select(ranked([1.0, 1.1, 5.0]), theta=0.7)
        npt.assert_array_equal(out, [100, 101])

    def test_immediate_gap_keeps_first_only(self):
        out = dynamic_nn_select(ranked([1.0, 10.0, 11.0]), theta=0.7)
        npt.assert_array_equal(out, [100])

    def test_single_neighbor(self):
        npt.assert_array_equal(dynamic_nn_select(ranked([2.5])), [100])

    def test_uniformly_similar_selects_all(self):
        out = dynamic_nn_select(ranked([1.0, 1.05, 1.1, 1.15]), theta=0.7)
        npt.assert_array_equal(out, [100, 101, 102, 103])

    def test_ratio_equal_to_theta_stops(self):
        out = dynamic_nn_select(ranked([0.7, 1.0, 1.0]), theta=0.7)
        npt.assert_array_equal(out, [100])

    def test_output_is_prefix(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            d = np.sort(rng.random(8) + 0.1)
            nns = ranked(d)
            out = dynamic_nn_select(nns)
            npt.assert_array_equal(out, nns.ids[: out.size])

    def test_zero_distance_beyond_first_rejected(self):
        with pytest.raises(ValidationError):
            dynamic_nn_select(ranked([0.0, 0.0, 1.0]))


class TestPruneQuery:
    def test_flat_list_dropped(self):
        assert prune_query(ranked([1.0, 1.1, 1.2]), beta=0.7) is False

    def test_spread_list_kept(self):
        assert prune_query(ranked([1.0, 5.0, 10.0]), beta=0.7) is True

    def test_identical_distances_dropped(self):
        assert prune_query(ranked([1.0, 1.0])) is False

    def test_all_zero_distances_dropped(self):
        assert prune_query(ranked([0.0, 0.0])) is False

    def test_single_neighbor_rejected(self):
        with pytest.raises(TooFewNeighborsError):
            prune_query(ranked([1.0]))


def two_camera_instance():
    """Ten tracks in three groups with one strong cross-group clique.

    Vertices 1 and 3 (group 0) form a 0.9-clique with 5 (group 1) and
    8 (group 2); everything else is disconnected.
    """
    a = np.zeros((10, 10))
    clique = [1, 3, 5, 8]
    for i in clique:
        for j in clique:
            if i != j:
                a[i, j] = 0.9
    groups = [[0, 1, 2, 3], [4, 5, 6], [7, 8, 9]]
    return GroupedAffinity(a, groups)


class TestGroupedAffinity:
    def test_blocks_view(self):
        ga = two_camera_instance()
        block = ga.block(0, 1)
        assert block.shape == (4, 3)
        assert block[1, 1] == 0.9  # vertex 1 vs vertex 5

    def test_group_of_mapping(self):
        ga = two_camera_instance()
        npt.assert_array_equal(ga.group_of([0, 5, 9]), [0, 1, 2])

    def test_overlapping_groups_rejected(self):
        with pytest.raises(ValidationError):
            GroupedAffinity(np.zeros((3, 3)), [[0, 1], [1, 2]])

    def test_uncovered_vertex_rejected(self):
        with pytest.raises(ValidationError):
            GroupedAffinity(np.zeros((3, 3)), [[0], [2]])

    def test_empty_group_rejected(self):
        with pytest.raises(EmptyGroupError):
            GroupedAffinity(np.zeros((2, 2)), [[0, 1], []])


class TestEnumerateWithin:
    def test_pool_restricts_constraint_coverage(self):
        ga = two_camera_instance()
        clusters = enumerate_all_constrained(ga.a, within=[4, 5, 6])
        covered = set()
        for c in clusters:
            covered |= set(c.support.tolist())
        assert {4, 5, 6} <= covered

    def test_empty_pool_rejected(self):
        from domset.exceptions import ZeroSizeError

        with pytest.raises(ZeroSizeError):
            enumerate_all_constrained(np.zeros((3, 3)), within=[])


class TestTrackAssociation:
    def test_two_singleton_groups_join(self):
        a = np.array([[0.0, 0.9], [0.9, 0.0]])
        result = track_association(GroupedAffinity(a, [[0], [1]]))
        assert result.group_count == 2
        assert len(result.sets) == 2
        for s in result.sets:
            npt.assert_array_equal(s.members, [0, 1])

    def test_block_diagonal_groups_stay_apart(self):
        a = np.zeros((4, 4))
        a[0, 1] = a[1, 0] = 1.0
        a[2, 3] = a[3, 2] = 1.0
        result = track_association(GroupedAffinity(a, [[0, 1], [2, 3]]))
        for s in result.sets:
            groups = set(int(g) for g in result.group_of[s.members])
            assert groups == {s.group}

    def test_cross_camera_clique_found_from_home_group(self):
        ga = two_camera_instance()
        result = track_association(ga)
        first_of_group0 = result.sets_of_group(0)[0]
        npt.assert_array_equal(first_of_group0.members, [1, 3, 5, 8])

    def test_affinity_not_mutated(self):
        ga = two_camera_instance()
        before = ga.a.copy()
        track_association(ga)
        npt.assert_array_equal(ga.a, before)

    def test_membership_scores_positive_on_members(self):
        ga = two_camera_instance()
        result = track_association(ga)
        s = result.sets_of_group(0)[0]
        for entity in s.members:
            assert s.score_of(entity) > 0.0


def synthetic_result(sets, group_of, group_count):
    """Build an AssociationResult from (group, members, scores) triples."""
    n = len(group_of)
    built = []
    for group, members, scores in sets:
        memberships = np.zeros(n)
        memberships[list(members)] = scores
        built.append(
            AssociationSet(
                group=group,
                members=np.asarray(sorted(members), dtype=np.intp),
                memberships=memberships,
            )
        )
    return AssociationResult(
        sets=tuple(built),
        group_of=np.asarray(group_of, dtype=np.intp),
        group_count=group_count,
    )


class TestRefineConstraint1:
    def test_no_duplicates_unchanged(self):
        result = synthetic_result(
            [(0, [0, 1], [0.5, 0.5]), (0, [2, 3], [0.5, 0.5])],
            group_of=[0, 0, 0, 0],
            group_count=1,
        )
        refined = refine_constraint1(result)
        assert [set(s.members.tolist()) for s in refined.sets] == [{0, 1}, {2, 3}]

    def test_size_score_product_decides(self):
        # entity 0 in a size-4 set with score 0.10 (product 0.40) and a
        # size-2 set with score 0.15 (product 0.30): the first wins
        result = synthetic_result(
            [
                (0, [0, 1, 2, 3], [0.10, 0.30, 0.30, 0.30]),
                (0, [0, 4], [0.15, 0.85]),
            ],
            group_of=[0] * 5,
            group_count=1,
        )
        refined = refine_constraint1(result)
        assert set(refined.sets[0].members.tolist()) == {0, 1, 2, 3}
        assert set(refined.sets[1].members.tolist()) == {4}
        assert refined.sets[1].score_of(0) == 0.0

    def test_exact_tie_goes_to_lowest_set(self):
        result = synthetic_result(
            [(0, [0, 1], [0.2, 0.8]), (0, [0, 2], [0.2, 0.8])],
            group_of=[0, 0, 0],
            group_count=1,
        )
        refined = refine_constraint1(result)
        assert 0 in refined.sets[0].members
        assert 0 not in refined.sets[1].members

    def test_different_groups_not_deduplicated(self):
        result = synthetic_result(
            [(0, [0, 1], [0.5, 0.5]), (1, [0, 2], [0.5, 0.5])],
            group_of=[0, 0, 1],
            group_count=2,
        )
        refined = refine_constraint1(result)
        assert 0 in refined.sets[0].members and 0 in refined.sets[1].members

    def test_invariant_at_most_one_per_group(self):
        rng = np.random.default_rng(1)
        sets = []
        for k in range(6):
            members = rng.choice(10, size=4, replace=False)
            sets.append((k % 2, members, rng.random(4) + 0.01))
        result = synthetic_result(sets, group_of=[0] * 10, group_count=2)
        refined = refine_constraint1(result)
        for p in range(2):
            counts = np.zeros(10)
            for s in refined.sets_of_group(p):
                counts[s.members] += 1
            assert counts.max(initial=0) <= 1


class TestRefineConstraint2:
    def test_within_budget_unchanged(self):
        result = synthetic_result(
            [(0, [0, 1], [0.5, 0.5]), (1, [0, 2], [0.5, 0.5])],
            group_of=[0, 0, 1],
            group_count=2,
        )
        refined = refine_constraint2(result)
        assert 0 in refined.sets[0].members and 0 in refined.sets[1].members

    def test_reciprocal_intersection_decides(self):
        # entity 0 (group 0) sits in three sets under I=2; its home set
        # shares 3 other members with set 1 and only 1 with set 2
        result = synthetic_result(
            [
                (0, [0, 1, 2, 3], [0.4, 0.2, 0.2, 0.2]),
                (1, [0, 1, 2, 3, 4], [0.2] * 5),
                (1, [0, 3, 5], [0.4, 0.3, 0.3]),
            ],
            group_of=[0, 0, 0, 0, 1, 1],
            group_count=2,
        )
        refined = refine_constraint2(result)
        assert 0 in refined.sets[0].members
        assert 0 in refined.sets[1].members
        assert 0 not in refined.sets[2].members

    def test_empty_intersections_keep_home_only(self):
        # entity 0 exceeds the budget of 2, but neither foreign set shares
        # any other member with its home set, so home alone survives
        result = synthetic_result(
            [
                (0, [0, 1], [0.5, 0.5]),
                (1, [0, 2], [0.5, 0.5]),
                (1, [0, 3], [0.5, 0.5]),
            ],
            group_of=[0, 0, 1, 1],
            group_count=2,
        )
        refined = refine_constraint2(result)
        assert 0 in refined.sets[0].members
        assert 0 not in refined.sets[1].members
        assert 0 not in refined.sets[2].members

    def test_invariant_at_most_group_count_sets(self):
        rng = np.random.default_rng(2)
        sets = []
        for k in range(8):
            members = rng.choice(6, size=3, replace=False)
            sets.append((k % 3, members, rng.random(3) + 0.01))
        result = synthetic_result(sets, group_of=[0, 0, 1, 1, 2, 2], group_count=3)
        refined = refine_constraint2(result)
        counts = np.zeros(6)
        for s in refined.sets:
            counts[s.members] += 1
        assert counts.max(initial=0) <= 3


class TestFeatureWeights:
    def test_identical_curves_share_equally(self):
        w = feature_weights([[0.3, 0.7], [0.3, 0.7]])
        npt.assert_allclose(w, [0.5, 0.5])

    def test_inverse_area_hand_case(self):
        w = feature_weights([[0.2, 0.2], [0.8, 0.8]])
        npt.assert_allclose(w, [0.8, 0.2])

    def test_three_curve_hand_case(self):
        w = feature_weights([[0.5, 0.5], [0.5, 0.5], [0.25, 0.25]])
        npt.assert_allclose(w, [0.25, 0.25, 0.5])

    def test_zero_area_takes_all_mass(self):
        w = feature_weights([[0.0, 0.0], [0.6, 0.6]])
        npt.assert_allclose(w, [1.0, 0.0])

    def test_two_zero_areas_split_mass(self):
        w = feature_weights([[0.0, 0.0], [0.0, 0.0], [0.6, 0.6]])
        npt.assert_allclose(w, [0.5, 0.5, 0.0])

    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(3)
        curves = rng.random((4, 11))
        assert feature_weights(curves).sum() == pytest.approx(1.0)

    def test_ragged_curves_rejected(self):
        with pytest.raises(LengthMismatchError):
            feature_weights([[0.1, 0.2], [0.1, 0.2, 0.3]])

    def test_short_curves_rejected(self):
        with pytest.raises(ValidationError):
            feature_weights([[0.5], [0.6]])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            feature_weights([[0.0, 1.4], [0.2, 0.3]])

    def test_empty_list_rejected(self):
        with pytest.raises(ZeroAreaError):
            feature_weights([])


class TestGating:
    def test_transitive_closure_chains(self):
        allowed = np.array(
            [
                [True, True, False],
                [True, True, True],
                [False, True, True],
            ]
        )
        closed = transitive_closure(allowed)
        assert closed[0, 2] and closed[2, 0]

    def test_closure_keeps_disconnected_apart(self):
        allowed = np.eye(3, dtype=bool)
        closed = transitive_closure(allowed)
        assert not closed[0, 1] and not closed[1, 2]

    def test_gating_zeroes_disallowed_blocks(self):
        ga = two_camera_instance()
        allowed = np.eye(3, dtype=bool)
        allowed[0, 1] = allowed[1, 0] = True
        gated = gate_grouped_affinity(ga, allowed, close_paths=False)
        assert gated[1, 5] == 0.9  # groups 0-1 allowed
        assert gated[1, 8] == 0.0  # groups 0-2 blocked
        assert gated[5, 8] == 0.0  # groups 1-2 blocked

    def test_gating_with_closure_opens_chained_blocks(self):
        ga = two_camera_instance()
        allowed = np.eye(3, dtype=bool)
        allowed[0, 1] = allowed[1, 0] = True
        allowed[1, 2] = allowed[2, 1] = True
        gated = gate_grouped_affinity(ga, allowed)
        assert gated[1, 8] == 0.9  # 0-2 permitted through group 1

    def test_input_not_mutated(self):
        ga = two_camera_instance()
        before = ga.a.copy()
        gate_grouped_affinity(ga, np.eye(3, dtype=bool))
        npt.assert_array_equal(ga.a, before)

    def test_mask_shape_checked(self):
        ga = two_camera_instance()
        with pytest.raises(DimensionMismatchError):
            gate_grouped_affinity(ga, np.eye(2, dtype=bool))
