"""Phase-corrected final iteration that lands in the target block with certainty.

The final step is ``-I_Theta^ph I_T^ph`` with

    I_T^ph     = I - (1 - e^{i(phi1 - phi2)}) |A_T><A_T|
    I_Theta^ph = I - (1 - e^{2 i phi1})      |Theta><Theta|

which is the assignment of phases that reproduces the closed-form 3x3 matrix
entries ``b_ij``.  The unphased Grover iteration ``-I_Theta I_T`` is the point
``phi1 = pi/2, phi2 = -pi/2``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, NoSolutionError
from .partial import (
    initial_reduced,
    plan_partial,
    pre_final_reduced,
    reduce_state,
    run_partial_reduced,
)
from .grover import round_half_up
from .state import (
    BlockLayout,
    QueryCounter,
    grover_iteration,
    local_iteration,
    phase_invert_about_average,
    phase_marked,
    uniform_state,
)

RESIDUAL_TOL = 1e-10
# x^2 - (y+z)^2 this far below zero is treated as a tangent (double root)
SOLVABILITY_SLACK = 1e-14
EXTRA_STEPS = (0, 1, 2)


@dataclass(frozen=True)
class PhaseSolution:
    phi1: float
    phi2: float
    c: tuple[float, float, float]
    xyz: tuple[float, float, float]
    extra_local_steps: int = 0
    residual: float = 0.0
    candidates: tuple[tuple[float, float], ...] = field(default=(), compare=False)

    @property
    def delta(self) -> float:
        """Phase applied to the targets, ``phi1 - phi2``."""
        return self.phi1 - self.phi2


def pre_final_state(layout: BlockLayout, j1: int, j2: int) -> np.ndarray:
    """``(c11, c21, c31)`` after ``j1`` global and ``j2`` local iterations."""
    return pre_final_reduced(layout, j1, j2)


def pre_final_state_closed_form(layout: BlockLayout, j1: int, j2: int) -> np.ndarray:
    """The same triple through the ``k_g``/``l_g`` closed form."""
    th, t1, g = layout.theta, layout.theta1, layout.gamma
    s2, c2 = math.sin(2 * j1 * th), math.cos(2 * j1 * th)
    w = math.cos(t1) ** 2 * math.sin(g) ** 2 + math.cos(g) ** 2
    k_g = s2 * w + c2 * math.cos(th) * math.sin(th)
    l_g = c2 * w - s2 * math.cos(th) * math.sin(th)
    p = 2 * j2 * t1
    scale = 1 / math.cos(th) ** 2
    return scale * np.array([
        k_g * math.cos(th) * math.cos(p) + l_g * math.sin(g) * math.cos(t1) * math.sin(p),
        -k_g * math.cos(th) * math.sin(p) + l_g * math.sin(g) * math.cos(t1) * math.cos(p),
        l_g * math.cos(g),
    ])


def b_matrix(layout: BlockLayout, phi1: float, phi2: float) -> np.ndarray:
    """The phased final iteration in the reduced basis, built from projectors."""
    v = initial_reduced(layout).astype(np.complex128)
    theta_ph = np.eye(3) - (1 - np.exp(2j * phi1)) * np.outer(v, v)
    t_ph = np.diag([np.exp(1j * (phi1 - phi2)), 1.0, 1.0])
    return -theta_ph @ t_ph


def b_matrix_entries(layout: BlockLayout, phi1: float, phi2: float) -> np.ndarray:
    """The same matrix written out entry by entry (cross-check only)."""
    g, t1 = layout.gamma, layout.theta1
    sg, cg, st, ct = math.sin(g), math.cos(g), math.sin(t1), math.cos(t1)
    e = 1 - np.exp(2j * phi1)
    d = np.exp(1j * (phi1 - phi2))
    b = np.empty((3, 3), dtype=np.complex128)
    b[0, 0] = -d * (1 - e * sg ** 2 * st ** 2)
    b[0, 1] = e * sg ** 2 * st * ct
    b[0, 2] = e * sg * cg * st
    b[1, 0] = d * e * sg ** 2 * st * ct
    b[1, 1] = e * sg ** 2 * ct ** 2 - 1
    b[1, 2] = e * sg * cg * ct
    b[2, 0] = d * e * sg * cg * st
    b[2, 1] = b[1, 2]
    b[2, 2] = e * cg ** 2 - 1
    return b


def vanish_coefficients(c: np.ndarray, layout: BlockLayout) -> tuple[float, float, float]:
    """``(x, y, z)`` read off the third row of the phased matrix."""
    g, t1 = layout.gamma, layout.theta1
    sg, cg = math.sin(g), math.cos(g)
    c11, c21, c31 = (float(np.real(v)) for v in c)
    x = c11 * sg * cg * math.sin(t1)
    y = c21 * sg * cg * math.cos(t1) + c31 * cg ** 2
    z = -c31 / 2
    return x, y, z


def vanish_residual(phi1: float, phi2: float, xyz: tuple[float, float, float]) -> float:
    x, y, z = xyz
    e = 1 - np.exp(2j * phi1)
    return float(abs(np.exp(1j * (phi1 - phi2)) * e * x + e * y + 2 * z))


def _wrap(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def solve_phases(c: np.ndarray, layout: BlockLayout, extra_local_steps: int = 0) -> PhaseSolution:
    """Phases that cancel the non-target-block component of ``G_final |c>``."""
    x, y, z = vanish_coefficients(c, layout)
    if x == 0.0:
        raise DegenerateGeometryError("x = 0: the target component carries no phase freedom")
    gap = x * x - (y + z) ** 2
    if gap < -SOLVABILITY_SLACK * max(1.0, x * x):
        raise NoSolutionError(f"x^2 < (y+z)^2 (difference {gap:.3g}); no phases exist")
    den = x * x - y * y - 2 * y * z
    if den == 0.0:
        raise DegenerateGeometryError("x^2 - y^2 - 2yz = 0")
    cos2 = min(1.0, max(0.0, gap / den))
    candidates = []
    for sign in (1.0, -1.0):
        phi1 = math.acos(sign * math.sqrt(cos2))
        s1 = math.sin(phi1)
        if abs(s1) < 1e-15:
            continue
        # target phase delta = phi1 - phi2 from x cos(d) = -(y+z), x sin(d) = -z cot(phi1)
        delta = math.atan2(-z * math.cos(phi1) / s1 / x, -(y + z) / x)
        candidates.append((phi1, _wrap(phi1 - delta)))
        # direct recovery of phi2 from the cos/sin pair, kept as a candidate and filtered by the residual
        cos_p = -(y / x) * math.cos(phi1)
        sin_p = -(y / x) * s1 - z / (x * s1)
        candidates.append((phi1, math.atan2(sin_p, cos_p)))
    if not candidates:
        raise DegenerateGeometryError("sin(phi1) = 0")
    xyz = (x, y, z)
    valid = []
    for phi1, phi2 in candidates:
        res = vanish_residual(phi1, phi2, xyz)
        if res <= RESIDUAL_TOL:
            final = b_matrix(layout, phi1, phi2) @ np.asarray(c, dtype=np.complex128)
            valid.append((-abs(final[0]), abs(phi1), phi1, phi2, res))
    if not valid:
        raise NoSolutionError("no candidate phase pair passes the residual check")
    valid.sort()
    _, _, phi1, phi2, res = valid[0]
    c_t = tuple(float(np.real(v)) for v in c)
    return PhaseSolution(phi1, phi2, c_t, xyz, extra_local_steps, res,
                         tuple((p1, p2) for *_, p1, p2, _ in valid))


@dataclass(frozen=True)
class SureSuccessResult:
    layout: BlockLayout
    j1: int
    j2: int
    solution: PhaseSolution
    final: np.ndarray
    oracle_calls: int
    unphased_success: float

    @property
    def success_probability(self) -> float:
        return float(abs(self.final[0]) ** 2 + abs(self.final[1]) ** 2)

    @property
    def non_target_amplitude(self) -> float:
        return float(abs(self.final[2]))


def sure_success_counts(layout: BlockLayout) -> tuple[int, int]:
    """Base counts: nearest integer to analytic ``j1`` and floor of analytic ``j2``."""
    plan = plan_partial(layout)
    return max(0, round_half_up(plan.j1_analytic)), max(0, math.floor(plan.j2_analytic))


def run_sure_success(layout: BlockLayout) -> tuple[np.ndarray, PhaseSolution, QueryCounter, SureSuccessResult]:
    j1, j2_base = sure_success_counts(layout)
    failures = []
    for extra in EXTRA_STEPS:
        j2 = j2_base + extra
        c = pre_final_state(layout, j1, j2)
        try:
            sol = solve_phases(c, layout, extra)
        except (NoSolutionError, DegenerateGeometryError) as exc:
            failures.append(f"extra={extra}: {exc}")
            continue
        final = b_matrix(layout, sol.phi1, sol.phi2) @ c.astype(np.complex128)
        unphased = run_partial_reduced(layout, j1, j2, final="grover")
        counter = QueryCounter(j1 + j2 + 1)
        result = SureSuccessResult(layout, j1, j2, sol, final, counter.oracle_calls,
                                   float(unphased[0] ** 2 + unphased[1] ** 2))
        return final, sol, counter, result
    raise NoSolutionError(
        f"sure success infeasible for N={layout.n_elements}, K={layout.n_blocks}, "
        f"B={layout.block_size}: " + "; ".join(failures))


def run_sure_success_full(layout: BlockLayout, j1: int, j2: int, solution: PhaseSolution
                          ) -> tuple[np.ndarray, QueryCounter]:
    """State-vector run of the phased pipeline: target phase ``phi1 - phi2``, diffusion phase ``2 phi1``."""
    counter = QueryCounter()
    space = layout.space
    psi = uniform_state(space)
    for _ in range(j1):
        psi = grover_iteration(psi, space, counter)
    for _ in range(j2):
        psi = local_iteration(psi, layout, counter)
    psi = phase_marked(psi, space, solution.delta, counter)
    psi = phase_invert_about_average(psi, 2 * solution.phi1)
    return psi, counter


def full_cross_check(layout: BlockLayout) -> float:
    """Largest reduced/full component mismatch for the phased pipeline."""
    final, sol, _, res = run_sure_success(layout)
    psi, _ = run_sure_success_full(layout, res.j1, res.j2, sol)
    return float(np.max(np.abs(reduce_state(psi, layout) - final)))


SWEEP_COLUMNS = ("N", "K", "B", "j1", "j2", "extra", "phi1", "phi2", "success_prob", "feasible")


def sweep_rows(ns, ks) -> list[dict]:
    rows = []
    for n in ns:
        for k in ks:
            layout = BlockLayout(n, k)
            row = {"N": n, "K": k, "B": n // k}
            try:
                _, sol, counter, res = run_sure_success(layout)
            except NoSolutionError:
                j1, j2 = sure_success_counts(layout)
                row.update(j1=j1, j2=j2, extra="", phi1="", phi2="", success_prob="", feasible=False)
            else:
                row.update(j1=res.j1, j2=res.j2, extra=sol.extra_local_steps, phi1=sol.phi1,
                           phi2=sol.phi2, success_prob=res.success_probability, feasible=True)
            rows.append(row)
    return rows


def sweep_csv(ns, ks) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in sweep_rows(ns, ks):
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
