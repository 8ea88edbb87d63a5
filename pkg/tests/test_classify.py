import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdlbp.classify import (EmptyGalleryError, Gallery, ThresholdError, compute_threshold,
                            identify, nearest)


def brute_threshold(labels, vectors):
    best = None
    for i, j in itertools.combinations(range(len(labels)), 2):
        if labels[i] == labels[j]:
            d = float(np.linalg.norm(np.subtract(vectors[i], vectors[j])))
            best = d if best is None else max(best, d)
    return best / 2


class TestNearest:
    def test_exact_match(self):
        g = Gallery(("a", "b", "c"), [[0, 0], [1, 1], [5, 5]])
        assert nearest(g, [1, 1]) == ("b", 0.0)

    def test_closer_entry(self):
        g = Gallery(("A", "B"), [[0, 0], [3, 4]])
        label, dist = nearest(g, [3, 3])
        assert label == "B" and dist == pytest.approx(1.0)

    def test_tie_goes_to_lowest_index(self):
        g = Gallery(("A", "B"), [[0, 0], [0, 0]])
        assert nearest(g, [0, 0])[0] == "A"

    def test_errors(self):
        with pytest.raises(EmptyGalleryError):
            nearest(Gallery((), np.zeros((0, 2))), [0, 0])
        with pytest.raises(ValueError):
            nearest(Gallery(("A",), [[0, 0]]), [0, 0, 0])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 1000), st.floats(1.01, 10))
    def test_far_entries_do_not_change_result(self, seed, factor):
        rng = np.random.default_rng(seed)
        g = Gallery(tuple("abcde"), rng.standard_normal((5, 3)))
        probe = rng.standard_normal(3)
        label, dist = nearest(g, probe)
        far = probe + (dist * factor + 1e-6) * np.array([1.0, 0, 0])
        g2 = Gallery(g.labels + ("z",), np.vstack([g.vectors, far]))
        assert nearest(g2, probe) == (label, dist)

    def test_every_entry_self_matches(self):
        rng = np.random.default_rng(0)
        vecs = rng.standard_normal((12, 4))
        g = Gallery(tuple(f"s{i}" for i in range(12)), vecs)
        for i, v in enumerate(vecs):
            assert nearest(g, v) == (f"s{i}", 0.0)


class TestThreshold:
    def test_single_pair(self):
        assert compute_threshold(["x", "x"], [[0, 0], [6, 8]]) == 5.0

    def test_zero_diameter(self):
        assert compute_threshold(["a", "a", "b", "b"], np.ones((4, 3))) == 0.0

    def test_two_classes(self):
        labels = ["A", "A", "B", "B"]
        vecs = [[0, 0], [2, 0], [10, 0], [13, 0]]
        assert compute_threshold(labels, vecs) == brute_threshold(labels, vecs) == 1.5

    def test_random_against_brute_force(self):
        rng = np.random.default_rng(1)
        labels = list(rng.integers(0, 4, 20).astype(str))
        vecs = rng.standard_normal((20, 5))
        assert compute_threshold(labels, vecs) == pytest.approx(brute_threshold(labels, vecs))

    def test_no_pairs(self):
        with pytest.raises(ThresholdError):
            compute_threshold(["a", "b"], [[0], [1]])


class TestIdentify:
    def gallery(self):
        return Gallery.build(["A", "A", "B", "B"], [[0, 0], [2, 0], [10, 0], [13, 0]])

    def test_accepts_match(self):
        g = self.gallery()
        assert g.threshold == 1.5
        assert identify(g, [2, 0]) == "A"

    def test_hand_case(self):
        assert identify(self.gallery(), [11, 0]) == "B"

    def test_zero_threshold_rejects(self):
        g = Gallery(("A",), [[0, 0]], threshold=0.0)
        assert identify(g, [0, 0]) is None

    def test_boundary_is_rejected(self):
        g = self.gallery()
        assert identify(g, [0, 1.5]) is None  # distance == threshold

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 1000))
    def test_never_accepts_beyond_threshold(self, seed):
        rng = np.random.default_rng(seed)
        g = Gallery.build(list("aabbcc"), rng.standard_normal((6, 2)))
        probe = rng.standard_normal(2) * 3
        label = identify(g, probe)
        if label is not None:
            assert nearest(g, probe)[1] < g.threshold
