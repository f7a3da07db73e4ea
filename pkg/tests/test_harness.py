import csv
import io
import json

import numpy as np
import pytest

from ultrasep.errors import CapacityError, PipelineError
from ultrasep.harness import (
    DEFAULT_TOLERANCES,
    ExperimentConfig,
    build_pair_tubes,
    check_corollary,
    e_w_bound_constant,
    gen_non_carleson,
    gen_radial,
    gen_random_separated,
    run_experiment,
    separating_function,
    sweep_windows,
    window_sweep,
    working_delta,
)
from ultrasep.partitions import good_partition
from ultrasep.sequences import (
    carleson_norm,
    is_delta_separated,
    is_interpolating,
    points_per_annulus,
)

# -- generators


def test_gen_radial():
    s = gen_radial(0.5, 3)
    assert s.z.tolist() == [0.5, 0.75, 0.875]
    assert points_per_annulus(gen_radial(0.5, 12), 0.5)[1] == 1
    with pytest.raises(ValueError):
        gen_radial(1.0, 3)
    with pytest.raises(ValueError):
        gen_radial(0.5, 0)


def test_gen_random_separated():
    one = gen_random_separated(1, 0.3, 4)
    assert len(one) == 1
    for seed in range(10):
        s = gen_random_separated(40, 0.2, seed)
        assert is_delta_separated(s, 0.2)
    assert gen_random_separated(30, 0.2, 9) == gen_random_separated(30, 0.2, 9)
    assert gen_random_separated(30, 0.2, 9) != gen_random_separated(30, 0.2, 10)


def test_gen_random_separated_capacity():
    with pytest.raises(CapacityError):
        gen_random_separated(50, 0.95, 0, max_modulus=0.3, max_tries=2000)
    with pytest.raises(ValueError):
        gen_random_separated(5, 0.0, 0)


def test_gen_non_carleson():
    s = gen_non_carleson(2)
    assert s.z.tolist() == pytest.approx([0.5, 2 / 3])
    assert carleson_norm(gen_non_carleson(100)).norm_estimate > carleson_norm(gen_non_carleson(10)).norm_estimate
    assert not is_interpolating(gen_non_carleson(100), 0.1)
    with pytest.raises(ValueError):
        gen_non_carleson(1)


# -- configuration


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(gamma=1.0)
    with pytest.raises(ValueError):
        ExperimentConfig(kappa=1.0)
    with pytest.raises(ValueError):
        ExperimentConfig(partition_kind="best")
    with pytest.raises(ValueError):
        ExperimentConfig(eta=0.6)
    with pytest.raises(ValueError):
        ExperimentConfig(eta=0.3, tau=0.2, kappa=2)
    with pytest.raises(ValueError):
        ExperimentConfig(delta_hint=1.5)
    cfg = ExperimentConfig(eta=0.3, tau=0.05, tolerances={"carleson_max": 8.0})
    assert cfg.tolerances["carleson_max"] == 8.0
    assert cfg.tolerances["e_w_slack"] == DEFAULT_TOLERANCES["e_w_slack"]


def test_working_delta():
    s = gen_random_separated(20, 0.2, 1)
    assert working_delta(s, ExperimentConfig(delta_hint=0.1)) == 0.1
    d = working_delta(s, ExperimentConfig())
    assert 0 < d <= 0.5 and is_delta_separated(s, d)


# -- pipeline pieces


def test_check_corollary():
    eta_hat, interp = check_corollary(gen_radial(0.5, 12), ExperimentConfig())
    assert eta_hat == 1.0 and interp
    eta_hat, interp = check_corollary(gen_radial(0.5, 12), ExperimentConfig(partition_kind="good"))
    assert 0 < eta_hat < 1 and interp
    eta_hat, interp = check_corollary(gen_non_carleson(200), ExperimentConfig(partition_kind="good"))
    assert eta_hat < 1e-3 and not interp


def test_separating_function_levels():
    s = gen_random_separated(30, 0.2, 2)
    p = good_partition(s)
    f = separating_function(s, p, ExperimentConfig(), 0.2)
    assert f.tau == 0.0
    assert f.eta < 0.5 and f.eta == pytest.approx(f.eta_hat**f.power)
    assert f.tau < f.tau_prime < f.psi_low < f.eta**2 < f.psi_high < f.eta
    assert 0 < f.r <= 0.2
    # zero on A, at least the upper cutoff level near B
    assert np.all(f.modulus(s.z[list(p.part_a)]) < 1e-12)
    assert np.all(f.modulus(s.z[list(p.part_b)]) >= f.eta * (1 - 1e-12))


def test_sweep_windows():
    s = gen_radial(0.5, 4)
    ws = sweep_windows(s, 12)
    assert len(ws) == 12
    assert sorted(w.height for w in ws) == sorted(2.0**-j for j in range(1, 13))


def test_e_w_constant():
    assert e_w_bound_constant(1, 0.5, 0.25) == pytest.approx(4 + 8)


def test_build_pair_tubes_keys():
    s = gen_random_separated(30, 0.2, 3)
    p = good_partition(s)
    f = separating_function(s, p, ExperimentConfig(), 0.2)
    tubes = build_pair_tubes(s, p, 0.2, f.r, f.r_large)
    assert set(tubes) == set(p.part_a)


# -- end to end


def _clauses(report):
    return {c.name: c for c in report.clauses}


def test_radial_passes():
    rep = run_experiment(gen_radial(0.5, 12))
    assert rep.verdict, rep.failed_clauses()
    c = _clauses(rep)
    assert c["condition_c"].passed and rep.condition_c > 0
    assert c["e_w_bound"].passed
    for clause in rep.clauses:
        if clause.passed is not None:
            assert clause.lhs is not None and clause.rhs is not None and clause.tolerance is not None
        else:
            assert clause.detail.startswith("skipped")


def test_radial_good_partition_checks_tubes():
    rep = run_experiment(gen_radial(0.5, 12), ExperimentConfig(partition_kind="good"))
    c = _clauses(rep)
    assert c["f_w_bound"].passed is not False
    assert rep.tubes and all(t["crossing"] >= 1 - 1e-3 for t in rep.tubes)


def test_non_carleson_fails_with_witness():
    rep = run_experiment(gen_non_carleson(200), ExperimentConfig(check_f_w=False))
    c = _clauses(rep)
    assert not rep.verdict
    assert c["carleson"].passed is False
    assert c["carleson"].lhs > DEFAULT_TOLERANCES["carleson_max"]
    assert "witness" in c["carleson"].detail
    assert rep.carleson["witness_height"] is not None
    assert rep.condition_c < 0.1 and not rep.interpolating
    assert c["implication"].passed


def test_singleton_passes_everywhere():
    rep = run_experiment(gen_radial(0.5, 1))
    assert rep.verdict
    assert all(c.passed is not False for c in rep.clauses)


def test_random_sequence_passes():
    rep = run_experiment(gen_random_separated(25, 0.2, 5), ExperimentConfig(sweep_levels=6))
    assert rep.verdict, [(c.name, c.detail) for c in rep.clauses if c.passed is False]


def test_f_w_skip_is_reported():
    rep = run_experiment(gen_random_separated(10, 0.2, 0), ExperimentConfig(check_f_w=False))
    c = _clauses(rep)
    assert c["f_w_bound"].passed is None and "skipped" in c["f_w_bound"].detail


def test_report_determinism():
    s = gen_random_separated(15, 0.2, 7)
    cfg = ExperimentConfig(sweep_levels=5)
    a, b = run_experiment(s, cfg).to_json(), run_experiment(s, cfg).to_json()
    assert a == b
    doc = json.loads(a)
    assert doc["n_points"] == 15 and "clauses" in doc and "verdict" in doc


def test_windows_csv():
    rows, clauses = window_sweep(gen_radial(0.5, 6), ExperimentConfig(sweep_levels=4))
    table = list(csv.reader(io.StringIO(run_experiment(gen_radial(0.5, 6), ExperimentConfig(sweep_levels=4)).windows_csv())))
    assert table[0][:3] == ["angle", "h", "e_w_mass"]
    assert len(table) == 1 + len(rows) == 1 + 4
    assert {c.name for c in clauses} == {"e_w_bound", "f_w_bound"}


def test_pipeline_error_names_stage():
    cfg = ExperimentConfig()
    cfg.partition_kind = "bogus"
    with pytest.raises(PipelineError) as info:
        run_experiment(gen_radial(0.5, 3), cfg)
    assert info.value.stage == "partition"
