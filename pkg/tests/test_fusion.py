from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as graph_components

from patrolsense.errors import InvalidParameterError, OffMapError
from patrolsense.fusion import (Detection, FusionConfig, RobotRecord, ally_bbox, combine_tree,
                                fuse_detections, iou, merge_all, remove_ally_detections)
from patrolsense.gridmap import BinaryGrid
from patrolsense.localview import BBox

GRID = BinaryGrid(np.full((200, 200), 255, np.uint8), 0.05, (0.0, 0.0))


@st.composite
def boxes(draw, lo=0, hi=30):
    x1 = draw(st.integers(lo, hi - 1))
    y1 = draw(st.integers(lo, hi - 1))
    return BBox(x1, y1, draw(st.integers(x1 + 1, hi)), draw(st.integers(y1 + 1, hi)))


def raster(b, n=32):
    m = np.zeros((n, n), bool)
    m[b.y1:b.y2, b.x1:b.x2] = True
    return m


def det(x1, y1, x2, y2, src=0):
    return Detection(BBox(x1, y1, x2, y2), src)


class TestIoU:
    def test_half_overlap_example(self):
        assert iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)) == pytest.approx(1 / 3)

    @settings(max_examples=1000)
    @given(boxes(), boxes())
    def test_matches_cell_count(self, a, b):
        ra, rb = raster(a), raster(b)
        expected = Fraction(int((ra & rb).sum()), int((ra | rb).sum()))
        assert iou(a, b) == pytest.approx(float(expected), abs=1e-12)

    @given(boxes(), boxes())
    def test_symmetric_and_bounded(self, a, b):
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0

    @given(boxes())
    def test_self_iou_is_one(self, a):
        assert iou(a, a) == 1.0


class TestAllyBox:
    def test_four_cell_box_for_020_diameter(self):
        b = ally_bbox((2.525, 2.525), 0.2, GRID)  # robot cell (50, 50)
        assert (b.width, b.height) == (4, 4)
        assert b.x1 <= 50 < b.x2 and b.y1 <= 50 < b.y2

    def test_default_diameter_gives_five_cells(self):
        assert ally_bbox((5.0, 5.0), 0.21, GRID).width == 5

    def test_off_map(self):
        with pytest.raises(OffMapError):
            ally_bbox((-1.0, 5.0), 0.2, GRID)


class TestAllyRemoval:
    def test_exact_footprint_is_removed(self):
        poses = [(2.0, 2.0), (4.0, 4.0)]
        ally = ally_bbox(poses[0], 0.2, GRID)
        roster = [RobotRecord(0, poses[0]), RobotRecord(1, poses[1], (Detection(ally, 1),))]
        out = remove_ally_detections(roster, FusionConfig(0.5, 0.2), GRID)
        assert out[1].detections == ()

    def test_three_robots_keep_only_the_intruder(self):
        poses = [(2.0, 2.0), (3.0, 2.0), (2.5, 3.0)]
        intruder = BBox(45, 50, 52, 56)
        roster = []
        for j, pose in enumerate(poses):
            seen = [Detection(ally_bbox(p, 0.21, GRID), j) for i, p in enumerate(poses) if i != j]
            seen.insert(1, Detection(intruder, j))
            roster.append(RobotRecord(j, pose, tuple(seen)))
        out = remove_ally_detections(roster, FusionConfig(), GRID)
        assert [[d.box for d in r.detections] for r in out] == [[intruder]] * 3

    def test_one_deletion_per_ally(self):
        pose = (2.0, 2.0)
        b = ally_bbox(pose, 0.21, GRID)
        roster = [RobotRecord(0, pose), RobotRecord(1, (4.0, 4.0), (Detection(b, 1), Detection(b, 1)))]
        out = remove_ally_detections(roster, FusionConfig(), GRID)
        assert len(out[1].detections) == 1

    def test_own_footprint_is_not_removed(self):
        pose = (2.0, 2.0)
        b = ally_bbox(pose, 0.21, GRID)
        out = remove_ally_detections([RobotRecord(0, pose, (Detection(b, 0),))], FusionConfig(), GRID)
        assert len(out[0].detections) == 1


class TestFuse:
    def test_disjoint_lists_concatenate(self):
        s1 = [det(0, 0, 2, 2), det(10, 10, 12, 12)]
        s2 = [det(20, 20, 22, 22)]
        assert fuse_detections(s1, s2, 0.3) == s2 + s1

    def test_larger_box_replaces(self):
        small, big = det(0, 0, 10, 10, 1), det(0, 0, 10, 12, 0)
        assert fuse_detections([big], [small], 0.3) == [big]
        assert fuse_detections([small], [big], 0.3) == [big]

    def test_identical_lists_keep_second(self):
        s1 = [det(0, 0, 4, 4, 0), det(9, 9, 12, 12, 0)]
        s2 = [det(0, 0, 4, 4, 1), det(9, 9, 12, 12, 1)]
        assert fuse_detections(s1, s2, 0.3) == s2

    @settings(max_examples=1000)
    @given(st.lists(boxes(), max_size=6), st.lists(boxes(), max_size=6), st.floats(0.05, 1.0))
    def test_membership_and_size(self, b1, b2, t):
        s1 = [Detection(b, 0) for b in b1]
        s2 = [Detection(b, 1) for b in b2]
        out = fuse_detections(s1, s2, t)
        assert all(any(d is e for e in s1 + s2) for d in out)
        assert len(s2) <= len(out) <= len(s1) + len(s2)
        assert fuse_detections([], s2, t) == s2
        assert fuse_detections(s1, [], t) == s1

    @settings(max_examples=1000)
    @given(st.lists(boxes(0, 12), max_size=5), st.lists(boxes(40, 52), max_size=5))
    def test_low_overlap_concatenates(self, b1, b2):
        s1 = [Detection(b, 0) for b in b1]
        s2 = [Detection(b, 1) for b in b2]
        assert fuse_detections(s1, s2, 0.3) == s2 + s1


class TestMergeAll:
    def test_single_robot_unchanged(self):
        dets = (det(0, 0, 3, 3), det(5, 5, 6, 6))
        assert merge_all([RobotRecord(0, (0, 0), dets)], 0.3) == list(dets)

    def test_five_robot_tree(self):
        assert combine_tree(5) == (((0, 1), 2), (3, 4))

    def test_empty_roster(self):
        with pytest.raises(InvalidParameterError):
            merge_all([], 0.3)

    def test_three_views_of_one_intruder_keep_largest(self):
        views = [det(10, 10, 20, 20, 0), det(10, 10, 21, 21, 1), det(11, 11, 20, 20, 2)]
        roster = [RobotRecord(i, (0, 0), (v,)) for i, v in enumerate(views)]
        assert merge_all(roster, 0.3) == [views[1]]

    @settings(max_examples=1000)
    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_count_matches_graph_clustering(self, n_robots, n_objects, seed):
        rng = np.random.default_rng(seed)
        roster, all_boxes = [], []
        for r in range(n_robots):
            dets = []
            for k in rng.permutation(n_objects):
                if rng.random() < 0.6:
                    # objects 40 cells apart; jitter of at most 1 cell keeps every pairwise IoU >= 0.47
                    x, y = 40 * k + rng.integers(-1, 2), rng.integers(-1, 2)
                    dets.append(Detection(BBox(int(x), int(y), int(x) + 10, int(y) + 10), r))
            all_boxes.extend(dets)
            roster.append(RobotRecord(r, (0.0, 0.0), tuple(dets)))
        n = len(all_boxes)
        adj = np.array([[iou(a, b) >= 0.3 for b in all_boxes] for a in all_boxes], dtype=bool).reshape(n, n)
        expected = graph_components(csr_matrix(adj), directed=False)[0] if n else 0
        assert len(merge_all(roster, 0.3)) == expected


class TestConfig:
    @pytest.mark.parametrize("t", [0.0, 1.5])
    def test_rejects_bad_threshold(self, t):
        with pytest.raises(InvalidParameterError):
            FusionConfig(iou_threshold=t)
