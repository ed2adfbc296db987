"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import math

import numpy as np

from conftest import STEP_GRID, STEP_PARAMS, ZERO_GRID, record_criterion, step_state, union_zero_state
from oceanswr.config import parse_config_text
from oceanswr.core import GridSpec, PhysicalParams, State, SurfaceField, VelocityField, layout_for
from oceanswr.mono import advance, assemble_momentum_system, cached_system, run, transport_convergence, transport_step
from oceanswr.optimizer import SweepSpec, beta_sensitivity, log_factors, optimize_alpha, trial_error
from oceanswr.swr import Guess, SwrConfig, swr_run
from oceanswr.symbols import (EPS_LADDER, SymbolInput, barotropic_roots, loglog_slope, root_gap_series,
                              symbol_gap_series)
from oceanswr.transmission import MATRIX_A, TransmissionParams, b_operator_continuous, beta_taylor

SYMBOL_INPUT = SymbolInput(1.0 + 0.5j, 0.3, 2, PhysicalParams(epsilon=1e-3))


def test_criterion_1_symbol_and_root_slopes():
    slopes = {}
    for side in ("minus", "plus"):
        slopes[f"baroclinic_{side}"] = loglog_slope(EPS_LADDER, symbol_gap_series(SYMBOL_INPUT, side, EPS_LADDER))
    roots = root_gap_series(SymbolInput(1.0 + 0.5j, 0.3, 0, SYMBOL_INPUT.params), EPS_LADDER)
    for key, gaps in roots.items():
        slopes[f"root_{key}"] = loglog_slope(EPS_LADDER, gaps)
    ok = slopes.pop("root_0") >= 1.5 and all(abs(v - 0.5) <= 0.15 for v in slopes.values())
    transport = loglog_slope(EPS_LADDER, roots["0"])
    record_criterion(1, ok, f"transport root slope {transport:.3f} (>=1.5); others "
                     + ", ".join(f"{k}={v:.3f}" for k, v in slopes.items()) + " (0.5+-0.15)")
    assert ok


def test_criterion_2_root_sign_partition():
    rng = np.random.default_rng(2)
    failures = 0
    for _ in range(100):
        s = complex(rng.uniform(1e-3, 10), rng.uniform(-10, 10))
        params = PhysicalParams(epsilon=1e-3, u0=rng.uniform(0.05, 3))
        r = barotropic_roots(SymbolInput(s, rng.uniform(-5, 5), 0, params))
        failures += not ((r.real < 0).sum() == 3 and (r.real > 0).sum() == 2)
    record_criterion(2, failures == 0, f"{failures} of 100 random (s, eta, u0) break the 3/2 split")
    assert failures == 0


def test_criterion_3_transmission_identity():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        params = PhysicalParams(epsilon=10 ** rng.uniform(-5, 0), re=rng.uniform(0.5, 2), fr=rng.uniform(0.5, 2),
                                u0=rng.uniform(0.1, 2))
        tp = TransmissionParams(rng.uniform(0.1, 3), rng.uniform(0.1, 3))
        U, dU, Ub = rng.standard_normal(2), rng.standard_normal(2), rng.standard_normal(2)
        bp, _ = b_operator_continuous("plus", U, dU, Ub, rng.standard_normal(), params, tp)
        bm = b_operator_continuous("minus", U, dU, Ub, 0.0, params, tp)
        target = 2 * tp.robin_coefficient(params) * (MATRIX_A @ U)
        scale = max(np.abs(bp).max(), np.abs(bm).max(), np.abs(target).max())
        worst = max(worst, np.abs(bp + bm - target).max() / scale)
    record_criterion(3, worst <= 1e-13, f"max relative residual {worst:.2e} over 1000 traces (<=1e-13)")
    assert worst <= 1e-13


def _zero_test(eps, seed, iterations=15, guess=None):
    params = PhysicalParams(epsilon=eps)
    cfg = SwrConfig(TransmissionParams.taylor(params), max_iterations=iterations,
                    guess=guess or Guess("random", seed=seed))
    return swr_run(cfg, union_zero_state(ZERO_GRID), params, ZERO_GRID).report.per_iteration_error


def test_criterion_4_zero_solution_convergence():
    seeds = range(5)
    monotone, mean_slope = True, {}
    for eps in (1e-2, 1e-3):
        slopes = []
        for seed in seeds:
            err = _zero_test(eps, seed)
            tail = err[1:]  # from iteration 2 on
            monotone &= bool(np.all(np.diff(tail) <= 0))
            it = np.arange(2, 2 + tail.size)
            slopes.append(np.polyfit(it, np.log10(tail), 1)[0])
        mean_slope[eps] = float(np.mean(slopes))
    ok = monotone and mean_slope[1e-3] < mean_slope[1e-2]
    record_criterion(4, ok, f"non-increasing after iteration 2: {monotone}; mean log10-error slope "
                     f"eps=1e-2: {mean_slope[1e-2]:.3f}, eps=1e-3: {mean_slope[1e-3]:.3f}")
    assert ok


def test_criterion_5_frequency_dependence():
    low = _zero_test(1e-2, None, 2, Guess("sinusoid", periods=1))
    high = _zero_test(1e-2, None, 2, Guess("sinusoid", periods=10))
    reached = low.min() <= 1e-4
    ordered = high[1] > low[1]
    record_criterion(5, reached and ordered, f"1-period error within 2 iterations {low.min():.3e} (<=1e-4: "
                     f"{reached}); 10-period {high[1]:.3e} > 1-period {low[1]:.3e}: {ordered}")
    assert reached and ordered


def test_criterion_6_step_test():
    cfg = SwrConfig(TransmissionParams.taylor(STEP_PARAMS), max_iterations=12)
    err = swr_run(cfg, step_state(STEP_GRID), STEP_PARAMS, STEP_GRID).report.per_iteration_error
    by4 = err[:4].min()
    by12 = err[:12].min()
    ok = by4 <= 1e-4 and by12 <= 1e-8
    record_criterion(6, ok, f"error by iteration 4 {by4:.3e} (<=1e-4), by iteration 12 {by12:.3e} (<=1e-8); "
                     f"iteration 2 {err[1]:.3e}")
    assert ok


def test_criterion_7_scheme_orders():
    rows = transport_convergence(PhysicalParams(epsilon=1e-3))
    orders = [r.observed_order for r in rows[1:]]
    params = PhysicalParams(epsilon=0.1, fr=math.inf)
    finals = []
    for nt in (10, 20, 40, 80):
        grid = GridSpec.uniform(20, 5, nt, 0.5, 2.0)
        lay = layout_for("mono", grid)
        X, Z = np.meshgrid(lay.x_nodes, grid.z)
        init = State(VelocityField(np.cos(math.pi * X / 2) * np.cos(math.pi * Z), np.cos(math.pi * X) * np.cos(math.pi * Z)),
                     SurfaceField(np.zeros(lay.ncells)))
        finals.append(run(init, params, grid).final.velocity.interleaved())
    diffs = [np.linalg.norm(finals[i] - finals[i + 1]) for i in range(3)]
    rich = [math.log2(diffs[i] / diffs[i + 1]) for i in range(2)]
    ok = all(0.8 <= o <= 1.2 for o in orders) and min(rich) >= 1.8
    record_criterion(7, ok, "transport orders " + ", ".join(f"{o:.3f}" for o in orders)
                     + " ([0.8,1.2]); momentum Richardson orders " + ", ".join(f"{o:.3f}" for o in rich) + " (>=1.8)")
    assert ok


def test_criterion_8_structural_invariants():
    checks = {}
    traj = run(union_zero_state(STEP_GRID), STEP_PARAMS, STEP_GRID)
    checks["zero preservation"] = all(not s.velocity.u.any() and not s.velocity.v.any() and not s.surface.zeta.any()
                                      for s in traj.states)

    grid = GridSpec.uniform(20, 5, 20, 0.5, 2.0)
    rng = np.random.default_rng(8)
    cor = (assemble_momentum_system(PhysicalParams(epsilon=1e-3), grid).operator
           - assemble_momentum_system(PhysicalParams(epsilon=math.inf), grid).operator)
    x = rng.standard_normal(cor.shape[0])
    checks["Coriolis neutrality"] = abs(x @ (cor @ x)) <= 1e-12 * (x @ x) * 1e3

    egrid = GridSpec.uniform(40, 5, 40, 1.0, 4.0)
    lay = layout_for("mono", egrid)
    X, Z = np.meshgrid(lay.x_nodes, egrid.z)
    bump = np.exp(-(X / 0.2) ** 2)
    energy_ok = True
    for alpha_b in (0.0, 1.0):
        p = PhysicalParams(epsilon=1e-3, fr=math.inf, alpha_b=alpha_b)
        s = State(VelocityField(bump * np.cos(math.pi * Z), -bump), SurfaceField(np.zeros(lay.ncells)))
        sysm = cached_system(p, egrid, "mono")
        e_prev = (s.velocity.u ** 2 + s.velocity.v ** 2).sum()
        for _ in range(egrid.nt):
            s = advance(s, sysm)
            s.surface.zeta[:] = 0.0
            e = (s.velocity.u ** 2 + s.velocity.v ** 2).sum()
            energy_ok &= bool(e <= e_prev * (1 + 1e-12))
            e_prev = e
    checks["energy non-increase"] = energy_ok

    tgrid = GridSpec(nx=10, nz=2, dx=0.1, dz=0.5, dt=0.07, nt=1, half_length=1.0)
    z = rng.uniform(-1, 1, 20)
    out = transport_step(SurfaceField(z), np.full(21, 0.4), PhysicalParams(epsilon=1), tgrid, inflow=0.2).zeta
    checks["upwind min/max"] = bool(out.min() >= z.min() and out.max() <= z.max())

    p2 = PhysicalParams(epsilon=1e-2)
    small = GridSpec.uniform(12, 4, 12, 0.6, 1.2)
    runs = [swr_run(SwrConfig(TransmissionParams.taylor(p2), 4, guess=Guess("random", seed=1), parallel=par),
                    union_zero_state(small), p2, small) for par in (False, True, False)]
    checks["parallel == sequential"] = np.array_equal(runs[0].report.per_iteration_error,
                                                      runs[1].report.per_iteration_error)
    text = "experiment = swr-zero-test\nguess = random\nseed = 4\n"
    checks["config/seed determinism"] = (parse_config_text(text, env={}) == parse_config_text(text, env={})
                                         and np.array_equal(runs[0].report.per_iteration_error,
                                                            runs[2].report.per_iteration_error))
    ok = all(checks.values())
    record_criterion(8, ok, ", ".join(f"{k}: {'ok' if v else 'BROKEN'}" for k, v in checks.items()))
    assert ok


def test_criterion_9_optimizer_sanity():
    matched = log_factors(9, 0.5, 2.0)
    spec = SweepSpec(alpha_grid=matched)
    notes, ok = [], True
    for eps in (1e-2, 1e-3):
        params = PhysicalParams(epsilon=eps)
        res = optimize_alpha(spec, params, ZERO_GRID)
        opt_err = np.mean([trial_error(TransmissionParams(res.alpha_opt, beta_taylor(params)), s,
                                       spec.fixed_iterations, params, ZERO_GRID) for s in spec.seeds])
        tay_err = np.mean([trial_error(TransmissionParams(res.alpha_tay, beta_taylor(params)), s,
                                       spec.fixed_iterations, params, ZERO_GRID) for s in spec.seeds])
        beta = beta_sensitivity(spec, params, ZERO_GRID, beta_factors=matched)
        this = opt_err <= tay_err and beta.spread < res.table.spread
        ok &= bool(this)
        notes.append(f"eps={eps:g}: alpha_opt/alpha_Tay={res.ratio:.3f}, error {opt_err:.3e} <= {tay_err:.3e}, "
                     f"beta spread {beta.spread:.4f} < alpha spread {res.table.spread:.4f}")
    record_criterion(9, ok, "; ".join(notes))
    assert ok
