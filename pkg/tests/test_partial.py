import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from qsearch.errors import DomainError, InfeasibleError, LayoutError
from qsearch.grover import plan_grover
from qsearch.partial import (
    PLAN_COLUMNS,
    asymptotic_global_matrix,
    block_angle_finite,
    block_angle_limit,
    cancellation_eta,
    compact_form_xi,
    compare_strategies,
    final_matrix,
    finite_n_cancellation_gradient,
    finite_n_cancellation_residual,
    found_block,
    global_matrix,
    global_stage,
    grk_optimal_params,
    initial_reduced,
    layout_from_counts,
    limit_reduced_final,
    local_matrix,
    plan_partial,
    plan_table_csv,
    query_functional,
    query_functional_slope,
    reduce_state,
    reduced_block_angle,
    run_partial,
    run_partial_reduced,
    schedule_iterations,
    solve_finite_n_j1,
    stationary_points,
)
from qsearch.state import BlockLayout, uniform_state

K_BARS = [2, 3, 4, 5, 10, 100]


def eta_oracle(k, beta):
    # principal-branch arctan, written out independently of the package
    den = k - 4 * math.sin(beta) ** 2
    val = 2 * math.sqrt(k) * math.sin(2 * beta) / den
    return math.sqrt(k) / 2 * math.atan(val)


def argmin_lambda(k):
    # stay inside the principal branch, where K - 4 sin^2 beta > 0
    hi = math.asin(math.sqrt(k) / 2) if k < 4 else 1.2
    res = minimize_scalar(lambda b: b - eta_oracle(k, b), bounds=(1e-6, hi * 0.999),
                          method="bounded", options={"xatol": 1e-10})
    return res.x


def test_optimal_params_examples():
    b, e = grk_optimal_params(2)
    assert b == pytest.approx(math.pi / 4, abs=1e-15)
    assert e == pytest.approx(math.pi / (2 * math.sqrt(2)), abs=1e-15)
    b, e = grk_optimal_params(4)
    assert b == pytest.approx(0.6154797086703873, abs=1e-12)
    assert e == pytest.approx(0.9553166181245093, abs=1e-12)
    b, _ = grk_optimal_params(1e9)
    assert b == pytest.approx(math.pi / 6, abs=1e-8)
    with pytest.raises(DomainError):
        grk_optimal_params(1.5)


@pytest.mark.parametrize("k", [3, 4, 5, 10, 100])
def test_optimal_params_match_numeric_minimum(k):
    b, e = grk_optimal_params(k)
    assert argmin_lambda(k) == pytest.approx(b, abs=1e-6)
    assert eta_oracle(k, b) == pytest.approx(e, abs=1e-10)


@pytest.mark.parametrize("k", K_BARS)
def test_stationarity_and_savings(k):
    b, e = grk_optimal_params(k)
    if k > 2:  # at K = 2 the optimum sits on the domain edge
        h = 1e-6
        slope = (query_functional(k, b + h) - query_functional(k, b - h)) / (2 * h)
        assert abs(slope) <= 1e-6
    assert abs(query_functional_slope(k, b)) <= 1e-9
    assert query_functional(k, b) < 0
    assert cancellation_eta(k, b) == pytest.approx(e, abs=1e-12)
    assert 0 <= b <= e <= math.pi / 4 * math.sqrt(k)


def test_stationary_points():
    assert stationary_points(2) == [0.5, 0.5]
    assert stationary_points(4) == [pytest.approx(1 / 3), 1.0]
    assert len(stationary_points(5)) == 1


def test_cancellation_eta_edges():
    assert cancellation_eta(4, 0.0) == 0.0
    with pytest.raises(DomainError):
        cancellation_eta(4, -0.1)
    with pytest.raises(DomainError):
        cancellation_eta(2, 1.2)  # K - 4 sin^2 beta < 0 pushes eta past pi sqrt(K)/4


def test_schedule_examples():
    b, e = grk_optimal_params(2)
    for n in (64, 1024, 4096):
        j1, j2 = schedule_iterations(b, e, 2, n)
        assert j1 == 0
        assert j2 == math.floor(math.pi / (4 * math.sqrt(2)) * math.sqrt(n) + 0.5)
    b, e = grk_optimal_params(4)
    assert schedule_iterations(b, e, 4, 4096) == (20, 20)


def test_schedule_rejects_negative_global_count():
    with pytest.raises(InfeasibleError):
        schedule_iterations(0.1, 3.0, 4, 4096)


@pytest.mark.parametrize("k", [2, 3, 4, 8, 16])
def test_partial_beats_full_count(k):
    n = k * 2 ** 18
    plan = plan_partial(BlockLayout(n, k))
    assert plan.queries < plan_grover(n, 1).j_opt + 1
    assert plan.bound_chain_holds()


def test_block_success_near_best_neighbour():
    # rounding both counts independently can lose a little to a neighbour, never much
    layout = BlockLayout(4096, 4)
    plan = plan_partial(layout)
    ours = run_partial(layout, plan.j1, plan.j2)[1][0]
    best = max(run_partial(layout, a, b)[1][0]
               for a in range(plan.j1 - 1, plan.j1 + 2) for b in range(plan.j2 - 1, plan.j2 + 2))
    assert best - ours <= 1e-3


def test_run_partial_examples():
    layout = BlockLayout(4096, 4)
    plan = plan_partial(layout)
    psi, blocks, counter = run_partial(layout, plan.j1, plan.j2)
    reduced = run_partial_reduced(layout, plan.j1, plan.j2)
    assert abs(blocks[0] - (reduced[0] ** 2 + reduced[1] ** 2)) <= 1e-8
    assert counter.oracle_calls == plan.j1 + plan.j2 + 1
    assert found_block(blocks) == 0
    small = BlockLayout(64, 4)
    p = plan_partial(small)
    assert run_partial(small, p.j1, p.j2)[1][0] >= 0.8


def test_found_block_ties_go_low():
    assert found_block(np.array([0.25, 0.25, 0.5, 0.5])) == 2


def test_initial_reduced_vector():
    layout = BlockLayout(48, 4, target_blocks=(1,), targets_per_block=3)
    v = initial_reduced(layout)
    g, t1 = layout.gamma, layout.theta1
    assert np.allclose(v, [math.sin(g) * math.sin(t1), math.sin(g) * math.cos(t1), math.cos(g)])
    assert np.allclose(reduce_state(uniform_state(48), layout), v)


def test_plane_formula_equals_matrix_power():
    layout = BlockLayout(1024, 8, target_blocks=(0, 5), targets_per_block=2)
    v = initial_reduced(layout)
    g = global_matrix(layout)
    for j in range(12):
        assert np.allclose(np.linalg.matrix_power(g, j) @ v, global_stage(layout, j), atol=1e-13)
    assert np.allclose(np.linalg.matrix_power(local_matrix(layout), 7), local_matrix(layout, 7), atol=1e-13)


def test_final_step_variants():
    layout = BlockLayout(256, 4)
    for final in ("reversed", "grover", "reflect", "none"):
        psi, _, c = run_partial(layout, 5, 4, final)
        assert np.max(np.abs(reduce_state(psi, layout) - run_partial_reduced(layout, 5, 4, final))) <= 1e-10
    a = run_partial_reduced(layout, 5, 4, "reversed")
    b = run_partial_reduced(layout, 5, 4, "reflect")
    assert np.allclose(np.abs(a), np.abs(b))
    with pytest.raises(ValueError):
        final_matrix(layout, "sideways")


@settings(max_examples=25, deadline=None)
@given(e=st.integers(4, 14), k=st.sampled_from([2, 4, 8]), kt=st.sampled_from([1, 2]),
       bt=st.sampled_from([1, 2]), j1=st.integers(0, 12), j2=st.integers(0, 12))
def test_reduced_full_equivalence(e, k, kt, bt, j1, j2):
    n = 2 ** e
    if kt >= k or bt > n // k - 1:
        return
    layout = layout_from_counts(n, k, kt, bt)
    psi, _, _ = run_partial(layout, j1, j2)
    assert np.max(np.abs(reduce_state(psi, layout) - run_partial_reduced(layout, j1, j2))) <= 1e-10


def test_asymptotic_matrix_approaches_exact():
    errs = []
    for e in (10, 14, 18):
        layout = BlockLayout(2 ** e, 4)
        j1 = 3
        exact = np.linalg.matrix_power(global_matrix(layout), j1)
        errs.append(np.max(np.abs(asymptotic_global_matrix(layout, j1) - exact)))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("k", [3, 4, 10])
def test_compact_form_entries_are_unit(k):
    xi1, xi2 = compact_form_xi(k)
    assert xi1 ** 2 + xi2 ** 2 == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("k", K_BARS)
def test_limit_model_cancels_non_target_blocks(k):
    final = limit_reduced_final(k)
    assert abs(final[2]) <= 1e-9
    assert np.linalg.norm(final) == pytest.approx(1.0, abs=1e-12)


def test_block_angle_limit_examples():
    b4 = math.asin(1 / math.sqrt(3))
    assert math.tan(block_angle_limit(4, b4)) == pytest.approx(1 / math.sqrt(2))
    assert block_angle_limit(4, b4) == pytest.approx(0.6154797086703873, abs=1e-12)
    assert math.tan(block_angle_limit(1e12, math.pi / 6)) == pytest.approx(1 / math.sqrt(3), abs=1e-9)
    assert block_angle_limit(2, math.pi / 4) == pytest.approx(math.pi / 4)
    with pytest.raises(DomainError):
        block_angle_limit(4, 0.0)


@pytest.mark.parametrize("k", [2, 4, 10])
def test_block_angle_limit_matches_limit_model(k):
    b, _ = grk_optimal_params(k)
    assert reduced_block_angle(limit_reduced_final(k)) == pytest.approx(block_angle_limit(k, b), abs=1e-12)


def test_finite_residual_vanishes_with_non_target_component():
    layout = BlockLayout(4096, 4)
    plan = plan_partial(layout)
    th, t1 = layout.theta, layout.theta1
    j1 = solve_finite_n_j1(layout, plan.j2_analytic)
    assert abs(finite_n_cancellation_residual(th, t1, j1, plan.j2_analytic)) <= 1e-9
    final = run_partial_reduced(layout, j1, plan.j2_analytic)
    assert abs(final[2]) ** 2 <= 1e-16
    ratios = [finite_n_cancellation_residual(th, t1, a, b) / run_partial_reduced(layout, a, b)[2]
              for a, b in [(3.3, 4.1), (10.0, 2.0), (17.2, 25.9)]]
    assert np.ptp(ratios) <= 1e-9 * abs(ratios[0])


def test_finite_residual_without_local_stage():
    layout = BlockLayout(4096, 4)
    j_full = plan_grover(4096, 1).j_opt
    assert abs(finite_n_cancellation_residual(layout.theta, layout.theta1, j_full, 0)) > 1e-3


@settings(max_examples=30, deadline=None)
@given(j1=st.floats(0, 40), j2=st.floats(0, 40))
def test_finite_residual_gradient(j1, j2):
    layout = BlockLayout(4096, 8)
    th, t1 = layout.theta, layout.theta1
    h = 1e-6
    g1, g2 = finite_n_cancellation_gradient(th, t1, j1, j2)
    f = finite_n_cancellation_residual
    fd1 = (f(th, t1, j1 + h, j2) - f(th, t1, j1 - h, j2)) / (2 * h)
    fd2 = (f(th, t1, j1, j2 + h) - f(th, t1, j1, j2 - h)) / (2 * h)
    assert fd1 == pytest.approx(g1, abs=1e-5, rel=1e-6)
    assert fd2 == pytest.approx(g2, abs=1e-5, rel=1e-6)


def test_block_angle_finite_matches_reduced_where_cancelled():
    layout = BlockLayout(4096, 4)
    plan = plan_partial(layout)
    j1 = solve_finite_n_j1(layout, plan.j2_analytic)
    final = run_partial_reduced(layout, j1, plan.j2_analytic)
    omega = block_angle_finite(layout.theta, layout.theta1, j1, plan.j2_analytic)
    assert omega == pytest.approx(reduced_block_angle(final), abs=1e-9)


def test_compare_strategies_examples():
    c2 = compare_strategies(4096, 2)
    assert c2["naive"] / c2["full"] == pytest.approx(1 / math.sqrt(2))
    c4 = compare_strategies(4096, 4)
    assert c4["binary"] / c4["full"] == pytest.approx(1 / math.sqrt(2) + 0.5)
    assert c4["binary"] > c4["full"]
    for k in (2, 3, 4, 7, 16):
        c = compare_strategies(2 ** 16, k)
        assert c["grk"] <= c["gr_simple"] + 1e-9 < c["full"]
    assert "binary" not in compare_strategies(64, 3)
    with pytest.raises(DomainError):
        compare_strategies(64, 3, ["binary"])


def test_plan_table_csv():
    rows = list(csv.DictReader(io.StringIO(plan_table_csv([2, 4, 8]))))
    assert tuple(rows[0]) == PLAN_COLUMNS
    assert float(rows[1]["omega"]) == pytest.approx(0.6154797086703873)


def test_layout_from_counts_validation():
    with pytest.raises(LayoutError):
        layout_from_counts(64, 4, 5)
