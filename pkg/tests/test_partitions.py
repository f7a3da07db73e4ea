import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ultrasep.disc import CarlesonWindow
from ultrasep.harness import gen_radial, gen_random_separated
from ultrasep.partitions import (
    Partition,
    PartitionKind,
    build_partition,
    classify_window_points,
    good_partition,
    hoffman_partition,
    restricted_good_partition,
    verify_partition,
)
from ultrasep.sequences import PointSequence

from .oracles import brute_nearest
from .strategies import point_sequences, separated_sequences


def test_perfect_pair():
    s = PointSequence([0.1, 0.5j])
    p = good_partition(s)
    assert p.part_a == (0,) and p.part_b == (1,)
    assert p.phi == {0: 1} and p.psi == {1: 0}


def test_branch_example_euclidean():
    s = PointSequence([0, 0.3, 0.9])
    p = good_partition(s, "euclidean")
    assert set(p.part_a) == {0, 2} and p.part_b == (1,)
    assert p.phi == {0: 1, 2: 1}
    assert p.psi == {1: 0}
    assert verify_partition(s, p) == []


def test_singleton_good_partition():
    p = good_partition(PointSequence([0.4]))
    assert p.part_a == (0,) and p.part_b == ()
    assert verify_partition(PointSequence([0.4]), p) == []


def test_unknown_metric():
    with pytest.raises(ValueError):
        good_partition(PointSequence([0, 0.5]), "taxicab")


@pytest.mark.parametrize("metric", ["pseudo_hyperbolic", "hyperbolic", "euclidean"])
def test_good_nearest_neighbour_law(metric):
    rng = np.random.default_rng(7)
    for trial in range(100):
        n = 20
        z = 0.98 * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
        s = PointSequence(z)
        p = good_partition(s, metric)
        assert verify_partition(s, p) == []
        assert set(p.phi) == set(p.part_a) and set(p.psi) == set(p.part_b)
        for a, b in p.phi.items():
            assert b == brute_nearest(s.z, a, metric=metric)
        for b, a in p.psi.items():
            assert a == brute_nearest(s.z, b, metric=metric)


@settings(max_examples=60, deadline=None)
@given(point_sequences(max_size=15))
def test_cover_and_disjoint(s):
    for kind in PartitionKind:
        p = build_partition(s, kind, 0.5)
        assert sorted(p.part_a + p.part_b) == list(range(len(s)))
        assert verify_partition(s, p) == []
        assert all(b in p.part_b for a, b in p.pairs())
        assert all(a in p.part_a for a in p.psi.values())


def test_hoffman_singleton_annulus():
    s = PointSequence([0.6j])
    p = hoffman_partition(s, 0.5)
    assert p.part_a == (0,) and p.part_b == () and p.phi == {}


def test_hoffman_three_points():
    # equal moduli, increasing argument, one annulus
    s = PointSequence([0.6 * np.exp(1j * t) for t in (0.3, 0.2, 0.4)])
    p = hoffman_partition(s, 0.5)
    assert set(p.part_a) == {1, 2} and p.part_b == (0,)
    assert p.phi == {1: 0}
    assert 2 not in p.phi


def test_hoffman_argument_monotone():
    for seed in range(100):
        s = gen_random_separated(50, 0.2, seed)
        p = hoffman_partition(s, 0.5)
        assert all(s.arguments[b] >= s.arguments[a] for a, b in p.phi.items())
        assert verify_partition(s, p) == []


def test_restricted_radial_all_in_a():
    s = gen_radial(0.5, 8)
    p = restricted_good_partition(s, 0.5)
    assert p.part_a == tuple(range(8)) and p.part_b == () and p.phi == {}


def test_restricted_two_in_one_annulus():
    s = PointSequence([0.6, 0.55j])
    p = restricted_good_partition(s, 0.5)
    assert len(p.part_a) == 1 and len(p.part_b) == 1
    a, b = p.part_a[0], p.part_b[0]
    assert p.phi == {a: b} and p.psi == {b: a}


@settings(max_examples=30, deadline=None)
@given(separated_sequences(), st.floats(0.2, 0.8))
def test_restricted_ratio_bound(s, gamma):
    p = restricted_good_partition(s, gamma)
    t = s.heights
    for a, b in p.phi.items():
        assert gamma <= t[a] / t[b] <= 1 / gamma
    assert verify_partition(s, p) == []


def test_corrupted_phi_is_reported():
    s = gen_random_separated(20, 0.2, 3)
    p = good_partition(s)
    a, b = next(iter(sorted(p.phi.items())))
    other = next(c for c in p.part_b if c != b)
    bad = Partition(p.part_a, p.part_b, {**p.phi, a: other}, p.psi, p.kind, p.n_points, metric=p.metric)
    v = verify_partition(s, bad)
    assert len(v) == 1
    assert v[0].clause == "nearest-neighbour" and v[0].index == a


def test_corrupted_cover_is_reported():
    s = PointSequence([0.1, 0.5j, -0.3])
    p = good_partition(s)
    bad = Partition(p.part_a, p.part_b[:-1] if p.part_b else (), p.phi, p.psi, p.kind, 3, metric=p.metric)
    assert any(v.clause == "cover" for v in verify_partition(s, bad))


def test_hoffman_random_50_valid():
    s = gen_random_separated(50, 0.2, 11)
    assert verify_partition(s, hoffman_partition(s, 0.5)) == []


def test_partition_round_trip():
    s = gen_random_separated(15, 0.2, 0)
    p = build_partition(s, "hoffman", 0.5)
    assert Partition.from_dict(p.to_dict()) == p


def test_classify_window_points():
    s = PointSequence([0.9, 0.92 + 0.01j, 0.5j, 0.95 + 0.2j])
    p = Partition((0, 2, 3), (1,), {0: 1, 3: 1}, {1: 0}, PartitionKind.GOOD, 4)
    w = CarlesonWindow.at(0.0, 0.15)
    cls = classify_window_points(s, p, w)
    assert cls.f_w == (0,)
    assert cls.e_w == ()
    cls = classify_window_points(s, p, CarlesonWindow.at(0.25, 0.2))
    assert 3 in cls.e_w
    # undefined phi goes to E_W
    q = Partition((0, 2), (1, 3), {2: 3}, {}, PartitionKind.GOOD, 4)
    assert classify_window_points(s, q, CarlesonWindow.at(0.0, 0.15)).e_w == (0,)
    with pytest.raises(ValueError):
        classify_window_points(PointSequence([0.1]), p, w)


def test_classification_counts_random_windows():
    rng = np.random.default_rng(2)
    s = gen_random_separated(40, 0.2, 2)
    p = restricted_good_partition(s, 0.5)
    for _ in range(200):
        w = CarlesonWindow.at(2 * math.pi * rng.random(), 0.01 + 0.98 * rng.random())
        cls = classify_window_points(s, p, w)
        inside_a = [a for a in p.part_a if w.contains(s[a])]
        assert sorted(cls.e_w + cls.f_w) == inside_a
        assert not set(cls.e_w) & set(cls.f_w)
