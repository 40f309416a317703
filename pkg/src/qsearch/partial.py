"""GRK partial search: optimal parameters, iteration schedules, full-vector runs,
the exact three-dimensional reduction and query-count comparators.

Reduced states live in the ordered basis ``(A_T, A_nTT, A_N)``: the uniform
superpositions over targets, over non-targets inside target blocks, and over
every element of the non-target blocks.  All parameters are written in the
rescaled variables (``K_bar = K / K_T``), so the single- and multi-target
cases share one code path.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleError, LayoutError
from .grover import round_half_up
from .state import (
    BlockLayout,
    QueryCounter,
    block_probabilities,
    grover_iteration,
    invert_about_average,
    local_iteration,
    reversed_iteration,
    uniform_state,
)

BOUND_TOL = 1e-12
FINAL_STEPS = ("reversed", "grover", "reflect", "none")


# -- parameters -----------------------------------------------------------

def _check_k(k_bar: float) -> None:
    if not k_bar >= 2:
        raise DomainError(f"effective block count must be >= 2, got {k_bar}")


def grk_optimal_params(k_bar: float) -> tuple[float, float]:
    """Global minimum of ``Lambda(beta) = beta - eta(beta)``: returns ``(beta, eta)``."""
    _check_k(k_bar)
    beta = math.asin(math.sqrt(k_bar / (4 * (k_bar - 1))))
    # atan2 resolves K=2 (division by zero) to pi/2 and stays on the principal branch otherwise
    eta = math.sqrt(k_bar) / 2 * math.atan2(math.sqrt(3 * k_bar - 4), k_bar - 2)
    return beta, eta


def cancellation_eta(k_bar: float, beta: float) -> float:
    """``eta(beta)`` from the large-N cancellation of the non-target blocks."""
    _check_k(k_bar)
    if beta < 0:
        raise DomainError(f"beta must be non-negative, got {beta}")
    s2 = math.sin(beta) ** 2
    eta = math.sqrt(k_bar) / 2 * math.atan2(2 * math.sqrt(k_bar) * math.sin(2 * beta), k_bar - 4 * s2)
    if eta > math.pi / 4 * math.sqrt(k_bar) + BOUND_TOL or eta < 0:
        raise DomainError(f"beta={beta} puts eta={eta} outside [0, pi sqrt(K)/4]")
    return eta


def query_functional(k_bar: float, beta: float) -> float:
    """``Lambda(beta) = beta - eta(beta)``; negative means partial search beats full search."""
    return beta - cancellation_eta(k_bar, beta)


def query_functional_slope(k_bar: float, beta: float) -> float:
    """Closed-form ``dLambda/dbeta``."""
    K = k_bar
    s2 = math.sin(beta) ** 2
    num = 16 * (K - 1) * s2 ** 2 - 4 * K * K * s2 + K * K
    den = 16 * (K - 1) * s2 ** 2 - 8 * K * s2 - K * K
    return num / den


def stationary_points(k_bar: float) -> list[float]:
    """Values of ``sin^2 beta`` where the slope of Lambda vanishes.

    The second root ``K/4`` exists only for ``K <= 4``; it is reported but the
    optimizer always uses the first one.
    """
    _check_k(k_bar)
    roots = [k_bar / (4 * (k_bar - 1))]
    if k_bar <= 4:
        roots.append(k_bar / 4)
    return roots


# -- schedules --------------------------------------------------------------

def analytic_iterations(beta: float, eta: float, k_bar: float, n_elements: int,
                        n_marked: int = 1) -> tuple[float, float]:
    """Real-valued ``(j1, j2)``: ``j1 = (pi/4 - eta/sqrt(K))sqrt(N/M)``, ``j2 = (beta/sqrt(K))sqrt(N/M)``."""
    r = math.sqrt(n_elements / n_marked)
    sk = math.sqrt(k_bar)
    return (math.pi / 4 - eta / sk) * r, beta / sk * r


def schedule_iterations(beta: float, eta: float, k_bar: float, n_elements: int,
                        n_marked: int = 1) -> tuple[int, int]:
    j1, j2 = analytic_iterations(beta, eta, k_bar, n_elements, n_marked)
    j1_int, j2_int = round_half_up(j1), round_half_up(j2)
    if j1_int < 0:
        raise InfeasibleError(f"global count rounds negative (j1={j1:.6g}); N/M too small")
    return j1_int, max(0, j2_int)


def block_angle_limit(k_bar: float, beta: float) -> float:
    """Large-N residual rotation angle inside the target block."""
    if not 0 < beta < math.pi / 2:
        raise DomainError(f"block angle needs beta in (0, pi/2), got {beta}")
    return math.atan(0.5 / math.tan(beta) + (2 / k_bar - 0.5) * math.tan(beta))


@dataclass(frozen=True)
class PartialPlan:
    layout: BlockLayout
    beta: float
    eta: float
    k_eff: float
    j1_analytic: float
    j2_analytic: float
    j1: int
    j2: int
    block_angle: float

    @property
    def beta_tilde(self) -> float:
        return self.beta / math.sqrt(self.layout.targets_per_block)

    @property
    def eta_tilde(self) -> float:
        return self.eta / math.sqrt(self.layout.targets_per_block)

    @property
    def lam(self) -> float:
        return self.beta - self.eta

    @property
    def queries_per_sqrt_n(self) -> float:
        """Large-N ``(j1 + j2 + 1) / sqrt(N/M)``."""
        return math.pi / 4 + self.lam / math.sqrt(self.k_eff)

    @property
    def queries(self) -> int:
        return self.j1 + self.j2 + 1

    def bound_chain_holds(self) -> bool:
        top = math.pi / 4 * math.sqrt(self.k_eff)
        return 0 <= self.beta <= self.eta + BOUND_TOL and self.eta <= top + BOUND_TOL


def plan_partial(layout: BlockLayout) -> PartialPlan:
    k_bar = layout.k_eff
    beta, eta = grk_optimal_params(k_bar)
    j1a, j2a = analytic_iterations(beta, eta, k_bar, layout.n_elements, layout.n_marked)
    j1, j2 = schedule_iterations(beta, eta, k_bar, layout.n_elements, layout.n_marked)
    return PartialPlan(layout, beta, eta, k_bar, j1a, j2a, j1, j2, block_angle_limit(k_bar, beta))


# -- full-vector execution -------------------------------------------------

def apply_final_step(state: np.ndarray, layout: BlockLayout, counter: QueryCounter,
                     final: str = "reversed") -> np.ndarray:
    """``reversed``: -I_T I_Theta; ``grover``: -I_Theta I_T; ``reflect``: I_Theta (no query)."""
    if final == "reversed":
        return reversed_iteration(state, layout.space, counter)
    if final == "grover":
        return grover_iteration(state, layout.space, counter)
    if final == "reflect":
        return -invert_about_average(state)
    if final == "none":
        return state
    raise ValueError(f"unknown final step {final!r}; choose from {FINAL_STEPS}")


def run_partial(layout: BlockLayout, j1: int, j2: int, final: str = "reversed"
                ) -> tuple[np.ndarray, np.ndarray, QueryCounter]:
    counter = QueryCounter()
    space = layout.space
    psi = uniform_state(space)
    for _ in range(j1):
        psi = grover_iteration(psi, space, counter)
    for _ in range(j2):
        psi = local_iteration(psi, layout, counter)
    psi = apply_final_step(psi, layout, counter, final)
    return psi, block_probabilities(psi, layout), counter


def found_block(block_probs: np.ndarray) -> int:
    return int(np.argmax(block_probs))  # first maximum: lowest index wins ties


def reduce_state(state: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Overlaps of a full state with ``(A_T, A_nTT, A_N)``."""
    B = layout.block_size
    blocks = state.reshape(layout.n_blocks, B)
    tb = np.asarray(layout.target_blocks)
    nb = np.setdiff1d(np.arange(layout.n_blocks), tb)
    offsets = np.asarray(layout.target_offsets)
    target_rows = blocks[tb]
    t_sum = target_rows[:, offsets].sum()
    ntt_sum = target_rows.sum() - t_sum
    n_sum = blocks[nb].sum()
    n_ntt = layout.n_target_blocks * (B - layout.targets_per_block)
    n_n = len(nb) * B
    return np.array([
        t_sum / math.sqrt(layout.n_marked),
        ntt_sum / math.sqrt(n_ntt) if n_ntt else 0.0,
        n_sum / math.sqrt(n_n),
    ], dtype=np.complex128)


# -- exact reduced model ---------------------------------------------------

def initial_reduced(layout: BlockLayout) -> np.ndarray:
    """``(sin g sin t1, sin g cos t1, cos g)``; note ``sin g sin t1 = sqrt(M/N)``."""
    g, t1 = layout.gamma, layout.theta1
    return np.array([math.sin(g) * math.sin(t1), math.sin(g) * math.cos(t1), math.cos(g)])


def global_matrix(layout: BlockLayout) -> np.ndarray:
    """One global iteration ``-I_Theta I_T`` restricted to the invariant subspace."""
    v = initial_reduced(layout)
    return (2 * np.outer(v, v) - np.eye(3)) @ np.diag([-1.0, 1.0, 1.0])


def local_matrix(layout: BlockLayout, j2: float = 1.0) -> np.ndarray:
    """``j2`` local iterations: rotation by ``2 j2 theta1`` in the target-block plane."""
    phi = 2 * j2 * layout.theta1
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def final_matrix(layout: BlockLayout, final: str = "reversed") -> np.ndarray:
    v = initial_reduced(layout)
    minus_i_theta = 2 * np.outer(v, v) - np.eye(3)
    i_t = np.diag([-1.0, 1.0, 1.0])
    if final == "reversed":
        return i_t @ minus_i_theta
    if final == "grover":
        return minus_i_theta @ i_t
    if final == "reflect":
        return -minus_i_theta
    if final == "none":
        return np.eye(3)
    raise ValueError(f"unknown final step {final!r}; choose from {FINAL_STEPS}")


def global_stage(layout: BlockLayout, j1: float) -> np.ndarray:
    """``G^j1`` applied to the initial vector; valid for real ``j1``."""
    th, t1, g = layout.theta, layout.theta1, layout.gamma
    a = (2 * j1 + 1) * th
    s, c = math.sin(a), math.cos(a)
    return np.array([s, c * math.sin(g) * math.cos(t1) / math.cos(th), c * math.cos(g) / math.cos(th)])


def pre_final_reduced(layout: BlockLayout, j1: float, j2: float) -> np.ndarray:
    return local_matrix(layout, j2) @ global_stage(layout, j1)


def run_partial_reduced(layout: BlockLayout, j1: float, j2: float,
                        final: str = "reversed") -> np.ndarray:
    return final_matrix(layout, final) @ pre_final_reduced(layout, j1, j2)


def asymptotic_global_matrix(layout: BlockLayout, j1: int) -> np.ndarray:
    """Large-N, large-B form of ``G^j1`` (documentation comparison only)."""
    g = layout.gamma
    a = 2 * j1 * layout.theta
    ca, sa = math.cos(a), math.sin(a)
    sg, cg = math.sin(g), math.cos(g)
    p = (-1) ** j1
    a12, a13 = sa * sg, sa * cg
    a23 = sg * cg * (-p + ca)
    return np.array([
        [ca, a12, a13],
        [-a12, p * cg ** 2 + ca * sg ** 2, a23],
        [-a13, a23, p * sg ** 2 + ca * cg ** 2],
    ])


def compact_form_xi(k_bar: float) -> tuple[float, float]:
    """Entries of the large-N matrix of the whole optimal partial search."""
    xi1 = 1 / (2 * math.sqrt(k_bar - 1)) - 0.5 * math.sqrt((3 * k_bar - 4) / k_bar)
    xi2 = 0.5 + 0.5 * math.sqrt((3 * k_bar - 4) / (k_bar * (k_bar - 1)))
    return xi1, xi2


def limit_reduced_final(k_bar: float, beta: float | None = None, eta: float | None = None,
                        final: str = "reversed") -> np.ndarray:
    """Final reduced state in the ``N -> infinity`` limit at continuous counts.

    There ``theta, theta1 -> 0`` and ``(2 j1 + 1) theta -> pi/2 - 2 eta/sqrt(K)``,
    ``2 j2 theta1 -> 2 beta`` and ``sin^2 gamma = 1/K``.
    """
    if beta is None or eta is None:
        beta, eta = grk_optimal_params(k_bar)
    sg, cg = math.sqrt(1 / k_bar), math.sqrt(1 - 1 / k_bar)
    a = math.pi / 2 - 2 * eta / math.sqrt(k_bar)
    v1 = np.array([math.sin(a), math.cos(a) * sg, math.cos(a) * cg])
    c, s = math.cos(2 * beta), math.sin(2 * beta)
    v2 = np.array([[c, s, 0], [-s, c, 0], [0, 0, 1]]) @ v1
    theta = np.array([0.0, sg, cg])
    minus_i_theta = 2 * np.outer(theta, theta) - np.eye(3)
    i_t = np.diag([-1.0, 1.0, 1.0])
    op = {"reversed": i_t @ minus_i_theta, "grover": minus_i_theta @ i_t}[final]
    return op @ v2


# -- finite-N cancellation and block angle ----------------------------------

def finite_n_cancellation_residual(theta: float, theta1: float, j1: float, j2: float) -> float:
    """LHS - RHS of the finite-N condition for the non-target blocks to vanish."""
    a = (2 * j1 + 1) * theta
    b = 2 * j2 * theta1
    sa, ca = math.sin(a), math.cos(a)
    sb, cb = math.sin(b), math.cos(b)
    t, t1 = math.tan(theta), math.tan(theta1)
    lhs = -(0.5 - math.sin(theta) ** 2 / math.sin(theta1) ** 2) * ca / (math.sin(theta) * math.cos(theta))
    rhs = sa * cb + t / t1 * ca * sb - sa * sb / t1 + t / t1 ** 2 * ca * cb
    return lhs - rhs


def finite_n_cancellation_gradient(theta: float, theta1: float, j1: float, j2: float
                                   ) -> tuple[float, float]:
    """Analytic ``(d/dj1, d/dj2)`` of :func:`finite_n_cancellation_residual`."""
    a = (2 * j1 + 1) * theta
    b = 2 * j2 * theta1
    sa, ca = math.sin(a), math.cos(a)
    sb, cb = math.sin(b), math.cos(b)
    t, t1 = math.tan(theta), math.tan(theta1)
    k = (0.5 - math.sin(theta) ** 2 / math.sin(theta1) ** 2) / (math.sin(theta) * math.cos(theta))
    # d/da and d/db of lhs - rhs
    d_a = k * sa - (ca * cb - t / t1 * sa * sb - ca * sb / t1 - t / t1 ** 2 * sa * cb)
    d_b = -(-sa * sb + t / t1 * ca * cb - sa * cb / t1 - t / t1 ** 2 * ca * sb)
    return 2 * theta * d_a, 2 * theta1 * d_b


def solve_finite_n_j1(layout: BlockLayout, j2: float, window: float = 3.0) -> float:
    """Real ``j1`` near the analytic value that zeroes the finite-N residual at fixed ``j2``."""
    plan = plan_partial(layout)
    th, t1 = layout.theta, layout.theta1

    def f(j1):
        return finite_n_cancellation_residual(th, t1, j1, j2)

    grid = np.linspace(max(-0.5, plan.j1_analytic - window), plan.j1_analytic + window, 121)
    vals = [f(x) for x in grid]
    best = None
    for lo, hi, flo, fhi in zip(grid, grid[1:], vals, vals[1:]):
        if flo == 0.0:
            root = lo
        elif flo * fhi < 0:
            root = brentq(f, lo, hi, xtol=1e-14)
        else:
            continue
        if best is None or abs(root - plan.j1_analytic) < abs(best - plan.j1_analytic):
            best = root
    if best is None:
        raise InfeasibleError(f"no finite-N root for j1 within {window} of {plan.j1_analytic:.4f}")
    return best


def block_angle_finite(theta: float, theta1: float, j1: float, j2: float) -> float:
    """Finite-N block angle (meaningful where the non-target blocks have cancelled)."""
    a = (2 * j1 + 1) * theta
    b = 2 * j2 * theta1
    sa, ca = math.sin(a), math.cos(a)
    sb, cb = math.sin(b), math.cos(b)
    t, t1 = math.tan(theta), math.tan(theta1)
    num = sa * cb + ca * t * (sb / t1 - 1)
    den = sa * sb + ca * t / t1 * (1 - cb)
    return math.atan2(num, den)


def reduced_block_angle(final_state: np.ndarray) -> float:
    """Angle of a final reduced state inside the target-block plane."""
    return math.atan2(float(np.real(final_state[0])), float(np.real(final_state[1])))


# -- comparators -------------------------------------------------------------

STRATEGIES = ("full", "naive", "binary", "gr_simple", "grk")


def compare_strategies(n_elements: int, k: int, strategies: Iterable[str] | None = None
                       ) -> dict[str, float]:
    """Large-N query counts of the partial-search strategies (and full search)."""
    if k < 2:
        raise DomainError(f"need K >= 2, got {k}")
    is_pow2 = k & (k - 1) == 0
    wanted = tuple(strategies) if strategies is not None else tuple(
        s for s in STRATEGIES if s != "binary" or is_pow2)
    unknown = set(wanted) - set(STRATEGIES)
    if unknown:
        raise DomainError(f"unknown strategies {sorted(unknown)}")
    root = math.sqrt(n_elements)
    out: dict[str, float] = {}
    for s in wanted:
        if s == "full":
            out[s] = math.pi / 4 * root
        elif s == "naive":
            out[s] = (k - 1) * math.pi / 4 * math.sqrt(n_elements / k)
        elif s == "binary":
            if not is_pow2:
                raise DomainError(f"binary strategy needs K a power of two, got {k}")
            levels = k.bit_length() - 1
            out[s] = math.pi / 4 * root * sum(math.sqrt(0.5 ** i) for i in range(1, levels + 1))
        elif s == "gr_simple":
            out[s] = math.pi / 4 * root * math.sqrt((k - 1) / k)
        elif s == "grk":
            beta, eta = grk_optimal_params(k)
            out[s] = (math.pi / 4 + (beta - eta) / math.sqrt(k)) * root
    return out


PLAN_COLUMNS = ("K", "beta", "eta", "lambda", "queries_per_sqrtN", "omega")


def plan_table_rows(ks: Iterable[float]) -> list[dict[str, float]]:
    rows = []
    for k in ks:
        beta, eta = grk_optimal_params(k)
        rows.append({
            "K": k,
            "beta": beta,
            "eta": eta,
            "lambda": beta - eta,
            "queries_per_sqrtN": math.pi / 4 + (beta - eta) / math.sqrt(k),
            "omega": block_angle_limit(k, beta),
        })
    return rows


def plan_table_csv(ks: Iterable[float]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=PLAN_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in plan_table_rows(ks):
        w.writerow({k: repr(v) for k, v in row.items()})
    return buf.getvalue()


def layout_from_counts(n_elements: int, n_blocks: int, n_target_blocks: int = 1,
                       targets_per_block: int = 1) -> BlockLayout:
    """Layout whose target blocks are the first ``n_target_blocks`` blocks."""
    if not 1 <= n_target_blocks <= n_blocks:
        raise LayoutError(f"need 1 <= K_T <= K, got K_T={n_target_blocks}")
    return BlockLayout(n_elements, n_blocks, tuple(range(n_target_blocks)), targets_per_block)
