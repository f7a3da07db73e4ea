import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings

from ultrasep.errors import DegenerateDenominatorError, SequenceFormatError
from ultrasep.harness import gen_radial
from ultrasep.sequences import (
    PointSequence,
    blaschke,
    blaschke_modulus,
    blaschke_product,
    carleson_bound_from_annuli,
    carleson_condition_inf,
    carleson_norm,
    dual_bound_witness,
    is_delta_separated,
    is_interpolating,
    points_per_annulus,
    separation_constant,
    separation_delta,
    window_mass,
)

from .oracles import grid_carleson_norm, pseudo_hyperbolic
from .strategies import point_sequences, separated_sequences

# -- the sequence type


def test_rejects_bad_input():
    with pytest.raises(SequenceFormatError):
        PointSequence([])
    with pytest.raises(SequenceFormatError):
        PointSequence([0.5, 1.0])
    with pytest.raises(SequenceFormatError):
        PointSequence([0.5, 0.5])
    with pytest.raises(SequenceFormatError):
        PointSequence([complex(math.nan, 0)])


def test_json_round_trip(tmp_path):
    s = PointSequence([0.1 + 0.2j, -0.5, 0.9j])
    path = tmp_path / "s.json"
    s.save(path)
    assert json.loads(path.read_text()) == [[0.1, 0.2], [-0.5, 0.0], [0.0, 0.9]]
    assert PointSequence.load(path) == s


@pytest.mark.parametrize("text", ["{}", "[[0.1]]", "[[0.1, 0.2, 0.3]]", '[["a", 0]]', "not json", "[]", "[[2, 0]]"])
def test_from_json_rejects(text):
    with pytest.raises(SequenceFormatError):
        PointSequence.from_json(text)


def test_arguments_in_range():
    s = PointSequence([0, -0.5, -0.5j, 0.5j, 0.3 - 1e-300j])
    assert np.all((s.arguments >= 0) & (s.arguments < 2 * math.pi))
    assert s.arguments[0] == 0.0
    assert s.arguments[1] == pytest.approx(math.pi)


# -- separation


def test_separation_examples():
    single = separation_constant(PointSequence([0.3]))
    assert single.delta_p == 1.0 and single.witness_pair is None
    assert separation_constant(PointSequence([0, 0.5])).delta_p == pytest.approx(0.5)
    rep = separation_constant(PointSequence([0, 0.5, -0.5]))
    assert rep.delta_p == pytest.approx(0.5)
    assert rep.witness_pair in {(0, 1), (0, 2)}


def test_delta_separated_examples():
    assert is_delta_separated(PointSequence([0.7j]), 0.9)
    assert is_delta_separated(PointSequence([0, 0.5]), 0.2)
    assert not is_delta_separated(PointSequence([0, 0.5]), 0.4)
    with pytest.raises(ValueError):
        is_delta_separated(PointSequence([0, 0.5]), 1.0)


@given(point_sequences(min_size=2))
def test_separation_is_exact_min(s):
    assume(len(s) >= 2)
    rep = separation_constant(s)
    brute = min(pseudo_hyperbolic(s[i], s[j]) for i in range(len(s)) for j in range(i))
    assert rep.delta_p == pytest.approx(brute, rel=1e-12, abs=1e-15)
    i, j = rep.witness_pair
    assert pseudo_hyperbolic(s[i], s[j]) == pytest.approx(rep.delta_p, rel=1e-12, abs=1e-15)


@given(separated_sequences())
def test_separation_delta_threshold(s):
    d = separation_delta(s)
    if len(s) > 1:
        assert is_delta_separated(s, min(0.999 * d, 0.99))
        if d < 0.99:
            assert not is_delta_separated(s, min(1.001 * d, 0.999))


# -- Carleson norm


def test_carleson_examples():
    assert carleson_norm(PointSequence([0])).norm_estimate == 0.0
    assert carleson_norm(PointSequence([0.9])).norm_estimate == pytest.approx(1.0, abs=1e-6)
    s = gen_radial(0.5, 10)
    est = carleson_norm(s).norm_estimate
    grid = grid_carleson_norm(s.z, n_dirs=10_000, n_heights=1000)
    assert grid / 2 <= est <= 2 * grid


@settings(max_examples=40, deadline=None)
@given(separated_sequences())
def test_witness_attains_estimate(s):
    rep = carleson_norm(s)
    if rep.witness_window is None:
        assert rep.norm_estimate == 0.0
        return
    w = rep.witness_window
    assert window_mass(s, w) / w.height == pytest.approx(rep.norm_estimate, rel=1e-12)
    assert 0 < w.height < 1


def test_annulus_counts():
    assert points_per_annulus(PointSequence([0]), 0.5) == ({0: 1}, 1)
    assert points_per_annulus(PointSequence([0.6, 0.55]), 0.5) == ({1: 2}, 2)
    assert points_per_annulus(gen_radial(0.5, 10), 0.5)[1] == 1


def test_annulus_bound():
    assert carleson_bound_from_annuli(3, 0.5) == pytest.approx(12)
    assert carleson_bound_from_annuli(1, 0.5) == pytest.approx(4)
    gs = np.linspace(0.01, 0.99, 99)
    vals = [carleson_bound_from_annuli(2, g) for g in gs]
    assert gs[int(np.argmin(vals))] == pytest.approx(0.5)
    assert min(vals) == pytest.approx(8)
    with pytest.raises(ValueError):
        carleson_bound_from_annuli(0, 0.5)


@settings(max_examples=60, deadline=None)
@given(separated_sequences())
def test_norm_below_annulus_bound(s):
    _, m = points_per_annulus(s, 0.5)
    assert carleson_norm(s).norm_estimate <= carleson_bound_from_annuli(m, 0.5) + 1e-6


# -- Blaschke products and condition (C)


def test_blaschke_examples():
    s = PointSequence([0.4 - 0.2j])
    assert blaschke_product(s, 0, 0.1j) == 1
    assert abs(blaschke_product(s, None, s[0])) < 1e-15
    assert abs(blaschke_product(PointSequence([0.5, -0.5]), None, 0.0)) == pytest.approx(0.25)


@given(point_sequences(max_size=6), point_sequences(max_size=1))
def test_blaschke_modulus_matches_product(s, z):
    assert abs(blaschke(s.z, z[0])) == pytest.approx(blaschke_modulus(s.z, z[0]), abs=1e-12)
    assert abs(blaschke(s.z, z[0])) <= 1 + 1e-12


def test_blaschke_origin_factor():
    assert blaschke([0], 0.3j) == pytest.approx(-0.3j)


def test_condition_c_examples():
    assert carleson_condition_inf(PointSequence([0.3j])) == 1.0
    assert carleson_condition_inf(PointSequence([0, 0.5])) == pytest.approx(0.5)
    assert carleson_condition_inf(gen_radial(0.5, 12)) > 0


@given(point_sequences(max_size=8))
def test_condition_c_two_code_paths(s):
    via_products = min(abs(blaschke_product(s, a, s[a])) for a in range(len(s)))
    assert carleson_condition_inf(s) == pytest.approx(via_products, abs=1e-12)


def test_dual_witness():
    s = gen_radial(0.5, 6)
    c = carleson_condition_inf(s)
    rng = np.random.default_rng(0)
    mesh = 0.9999 * np.sqrt(rng.random(10_000)) * np.exp(2j * np.pi * rng.random(10_000))
    for a in range(len(s)):
        vals = dual_bound_witness(s, a, s.z)
        assert np.allclose(vals, np.eye(len(s))[a], atol=1e-10)
        assert np.max(np.abs(dual_bound_witness(s, a, mesh))) <= 1 / c + 1e-9


def test_dual_witness_degenerate():
    # 41 points 1e-9 apart: |B_a(a)| is about 40! (4/3 1e-9)^40 < 1e-300
    s = PointSequence([0.5 + k * 1e-9 for k in range(41)])
    with pytest.raises(DegenerateDenominatorError):
        dual_bound_witness(s, 0, 0.0)


def test_interpolating_examples():
    assert is_interpolating(PointSequence([0.2]), 0.5)
    assert is_interpolating(PointSequence([0, 0.5]), 0.4)
    assert not is_interpolating(PointSequence([0, 0.5]), 0.6)
    with pytest.raises(ValueError):
        is_interpolating(PointSequence([0, 0.5]), 0.0)
