import numpy as np
import pytest

from conftest import ZERO_GRID
from oceanswr.core import ConfigurationError, PhysicalParams
from oceanswr.optimizer import (SweepSpec, beta_sensitivity, log_factors, optimize_alpha, trial_error,
                                write_alpha_csv)
from oceanswr.transmission import TransmissionParams, alpha_taylor

P2 = PhysicalParams(epsilon=1e-2)
MATCHED = log_factors(9, 0.5, 2.0)


def test_sweep_spec_validation():
    with pytest.raises(ConfigurationError):
        SweepSpec(alpha_grid=())
    with pytest.raises(ConfigurationError):
        SweepSpec(alpha_grid=(1.0, -2.0))
    assert SweepSpec(trials=3, base_seed=5).seeds == (5, 6, 7)


def test_log_factors_symmetric_with_unity():
    f = log_factors(15, 0.25, 4.0)
    assert f[7] == 1.0 and f[0] == 0.25 and f[-1] == 4.0


def test_degenerate_grid_returns_taylor():
    res = optimize_alpha(SweepSpec(alpha_grid=(1.0,), trials=1), P2, ZERO_GRID)
    assert res.alpha_opt == res.alpha_tay == alpha_taylor(P2)
    assert res.table.mean_error.shape == (1,)


def test_table_reproducible_bitwise_and_thread_independent():
    spec = SweepSpec(alpha_grid=(0.5, 1.0, 2.0), trials=2, fixed_iterations=2)
    a = optimize_alpha(spec, P2, ZERO_GRID).table
    b = optimize_alpha(spec, P2, ZERO_GRID).table
    c = optimize_alpha(SweepSpec(alpha_grid=(0.5, 1.0, 2.0), trials=2, fixed_iterations=2, threads=3), P2,
                       ZERO_GRID).table
    assert np.array_equal(a.per_seed, b.per_seed) and np.array_equal(a.per_seed, c.per_seed)


def test_optimum_deviates_from_taylor_at_eps_1e2():
    res = optimize_alpha(SweepSpec(alpha_grid=MATCHED), P2, ZERO_GRID)
    assert res.ratio != 1.0
    tay_err = np.mean([trial_error(TransmissionParams(res.alpha_tay, 1 / (2 * 1.0)), s, 4, P2, ZERO_GRID)
                       for s in SweepSpec().seeds])
    assert res.table.mean_error.min() <= tay_err


def test_beta_spread_smaller_than_alpha_spread():
    spec = SweepSpec(alpha_grid=MATCHED)
    alpha_table = optimize_alpha(spec, P2, ZERO_GRID).table
    beta_table = beta_sensitivity(spec, P2, ZERO_GRID, beta_factors=MATCHED)
    assert beta_table.spread < alpha_table.spread


def test_single_point_beta_sweep_and_row_order():
    spec = SweepSpec(alpha_grid=(1.0,), trials=1, fixed_iterations=1)
    one = beta_sensitivity(spec, P2, ZERO_GRID, beta_factors=(1.0,))
    assert one.mean_error.shape == (1,)
    three = beta_sensitivity(spec, P2, ZERO_GRID, beta_factors=(0.5, 1.0, 2.0))
    assert list(three.factors) == [0.5, 1.0, 2.0]


def test_beta_sweep_needs_gravity():
    with pytest.raises(ConfigurationError):
        beta_sensitivity(SweepSpec(), PhysicalParams(epsilon=1e-2, fr=float("inf")), ZERO_GRID)


def test_alpha_csv_layout(tmp_path):
    spec = SweepSpec(alpha_grid=(0.5, 1.0), trials=1, fixed_iterations=1)
    res = optimize_alpha(spec, P2, ZERO_GRID)
    write_alpha_csv([res], tmp_path / "sweep.csv", tmp_path / "opt.csv")
    sweep = (tmp_path / "sweep.csv").read_text().splitlines()
    opt = (tmp_path / "opt.csv").read_text().splitlines()
    assert sweep[0] == "epsilon,factor,mean_error" and len(sweep) == 3
    assert opt[0] == "epsilon,alpha_opt,alpha_tay,ratio" and len(opt) == 2
    assert float(opt[1].split(",")[2]) == alpha_taylor(P2)
