"""Full Grover search: iteration planning, exact runs, amplitude amplification
with an arbitrary preparation unitary, and the drift (optimality) experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidSpaceError, InvalidUnitaryError, NoTargetError
from .state import (
    QueryCounter,
    SearchSpace,
    basis_state,
    grover_iteration,
    invert_about_average,
    reflect_marked,
    uniform_state,
    walsh_hadamard,
)

UNITARY_TOL = 1e-8
# J = 1 saturates the 4 J^2 bound exactly, so rounding needs a little room
BOUND_RTOL = 1e-12


def round_half_up(x: float) -> int:
    """Nearest integer, ties towards +inf."""
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class GroverPlan:
    n_elements: int
    n_targets: int
    theta: float
    j_opt: int


def plan_grover(n_elements: int, n_targets: int) -> GroverPlan:
    """Optimal iteration count: nearest integer to (pi/4) sqrt(N/M) - 1/2, at least 0."""
    if n_targets < 1:
        raise NoTargetError("Grover search needs at least one target")
    if n_targets > n_elements:
        raise InvalidSpaceError(f"M={n_targets} exceeds N={n_elements}")
    theta = math.asin(math.sqrt(n_targets / n_elements))
    j_opt = max(0, round_half_up(math.pi / 4 * math.sqrt(n_elements / n_targets) - 0.5))
    return GroverPlan(n_elements, n_targets, theta, j_opt)


def success_probability(plan: GroverPlan, j: int) -> float:
    return math.sin((2 * j + 1) * plan.theta) ** 2


def grover_amplitudes(n_elements: int, n_targets: int, j: int) -> tuple[float, float]:
    """Closed-form (marked, unmarked) amplitudes after ``j`` iterations from the uniform state."""
    theta = math.asin(math.sqrt(n_targets / n_elements))
    a = (2 * j + 1) * theta
    marked = math.sin(a) / math.sqrt(n_targets)
    rest = n_elements - n_targets
    unmarked = math.cos(a) / math.sqrt(rest) if rest else 0.0
    return marked, unmarked


def reduced_grover_operator(theta: float) -> np.ndarray:
    """The iteration on the (target, non-target) plane as a 2x2 rotation by 2*theta."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [-s, c]])


def grover_eigensystem(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (``exp(+-2i theta)``) and eigenvectors of the reduced iteration."""
    return np.linalg.eig(reduced_grover_operator(theta))


def run_grover(space: SearchSpace, j: int) -> tuple[np.ndarray, QueryCounter]:
    if space.n_marked < 1:
        raise NoTargetError("Grover search needs at least one target")
    counter = QueryCounter()
    psi = uniform_state(space)
    for _ in range(j):
        psi = grover_iteration(psi, space, counter)
    return psi, counter


# -- amplitude amplification with a generic preparation ---------------------

StateMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AmplificationPlan:
    """Grover iteration built from a preparation unitary ``U`` with ``U|0>`` as start.

    ``inverse`` is optional: when present the start-state reflection is applied as
    ``U (I - 2|0><0|) U^-1``, otherwise as ``I - 2|U0><U0|``.
    """

    prepare: StateMap
    n_elements: int
    target_amplitude: complex
    j_u: int
    inverse: StateMap | None = None


def _check_unitary(prepare: StateMap, n: int, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    probes = [basis_state(n, 0), basis_state(n, n - 1)]
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    probes.append(v / np.linalg.norm(v))
    for probe in probes:
        out = np.asarray(prepare(probe))
        if out.shape != (n,):
            raise InvalidUnitaryError(f"preparation returned shape {out.shape}, expected ({n},)")
        drift = abs(np.vdot(out, out).real - 1.0)
        if drift > UNITARY_TOL:
            raise InvalidUnitaryError(f"preparation changed a probe norm by {drift:.3g}")


def plan_amplification(prepare: StateMap, space: SearchSpace,
                       inverse: StateMap | None = None) -> AmplificationPlan:
    if space.n_marked < 1:
        raise NoTargetError("amplification needs at least one target")
    n = space.n_elements
    _check_unitary(prepare, n)
    start = np.asarray(prepare(basis_state(n, 0)))
    amps = start[space.marked_array]
    # several targets: amplitude of the normalized target-space projection
    a = complex(amps[0]) if space.n_marked == 1 else math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    if abs(a) == 0.0:
        raise NoTargetError("the prepared state has no overlap with the target set")
    j_u = max(0, round_half_up(math.pi / (4 * abs(a)) - 0.5))
    return AmplificationPlan(prepare, n, a, j_u, inverse)


def walsh_hadamard_plan(space: SearchSpace) -> AmplificationPlan:
    return plan_amplification(walsh_hadamard, space, inverse=walsh_hadamard)


def householder_preparation(target: np.ndarray) -> tuple[StateMap, StateMap]:
    """A self-inverse unitary mapping ``|0>`` to the normalized ``target`` vector.

    ``U = I - 2 w w^dagger / <w|w>`` with ``w = e^{i arg t0}|0> - t`` (up to the
    global phase of ``t0`` this sends |0> to ``target``).
    """
    t = np.asarray(target, dtype=np.complex128)
    t = t / np.linalg.norm(t)
    phase = t[0] / abs(t[0]) if abs(t[0]) > 0 else 1.0
    t = t / phase  # make t[0] real non-negative so that U|0> = t exactly
    w = -t.copy()
    w[0] += 1.0
    ww = np.vdot(w, w).real
    if ww < 1e-30:
        return (lambda v: np.array(v, dtype=np.complex128)), (lambda v: np.array(v, dtype=np.complex128))

    def u(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.complex128)
        return v - (2.0 / ww) * w * np.vdot(w, v)

    return u, u


def run_amplified(plan: AmplificationPlan, space: SearchSpace,
                  j: int | None = None) -> tuple[np.ndarray, QueryCounter]:
    """Apply ``-I_{Theta_U} I_T`` ``j`` times (default ``plan.j_u``) to ``U|0>``."""
    n = space.n_elements
    zero = basis_state(n, 0)
    start = np.asarray(plan.prepare(zero), dtype=np.complex128)
    counter = QueryCounter()
    psi = start
    for _ in range(plan.j_u if j is None else j):
        psi = reflect_marked(psi, space, counter)
        if plan.inverse is not None:
            # -U (I - 2|0><0|) U^-1
            phi = np.asarray(plan.inverse(psi), dtype=np.complex128)
            phi[0] = -phi[0]
            psi = -np.asarray(plan.prepare(phi), dtype=np.complex128)
        else:
            psi = 2.0 * start * np.vdot(start, psi) - psi
    return psi, counter


# -- optimality experiment -------------------------------------------------

@dataclass(frozen=True)
class DriftReport:
    n_elements: int
    J: int
    drift_sum: float
    lower_bound: float
    upper_bound: float
    upper_bound_holds: bool
    mean_success: float
    sqrt_half_n: float

    @property
    def J_at_least_sqrt_half_n(self) -> bool:
        return self.J >= self.sqrt_half_n


def optimality_experiment(n_elements: int, J: int, chunk: int = 256) -> DriftReport:
    """Sum over every single target ``a_i`` of ``|psi_J^{a_i} - psi_J|^2``.

    ``psi_J`` is the empty-oracle evolution, which leaves the uniform state fixed.
    Targets are simulated in batches; each row of a batch is an independent run.
    """
    N = n_elements
    if N < 2:
        raise InvalidSpaceError("the drift experiment needs N >= 2")
    if J < 0:
        raise ValueError("J must be non-negative")
    theta0 = uniform_state(N)
    drift = 0.0
    success = 0.0
    for start in range(0, N, chunk):
        targets = np.arange(start, min(N, start + chunk))
        rows = np.arange(targets.size)
        psi = np.tile(theta0, (targets.size, 1))
        for _ in range(J):
            psi[rows, targets] *= -1
            psi = 2.0 * psi.mean(axis=1, keepdims=True) - psi
        diff = psi - theta0
        drift += float(np.sum(diff.real ** 2 + diff.imag ** 2))
        success += float(np.sum(np.abs(psi[rows, targets]) ** 2))
    upper = 4.0 * J * J
    return DriftReport(
        n_elements=N,
        J=J,
        drift_sum=drift,
        lower_bound=2.0 * N - 2.0 * math.sqrt(N),
        upper_bound=upper,
        upper_bound_holds=drift <= upper * (1 + BOUND_RTOL),
        mean_success=success / N,
        sqrt_half_n=math.sqrt(N / 2),
    )


def single_target_drift(n_elements: int, J: int, target: int = 0) -> float:
    """``|psi_J^{a} - Theta|^2`` for one target, by plain state-vector simulation."""
    space = SearchSpace(n_elements, (target,))
    psi, _ = run_grover(space, J)
    diff = psi - uniform_state(n_elements)
    return float(np.vdot(diff, diff).real)


__all__ = [
    "AmplificationPlan",
    "DriftReport",
    "GroverPlan",
    "grover_amplitudes",
    "grover_eigensystem",
    "householder_preparation",
    "invert_about_average",
    "optimality_experiment",
    "plan_amplification",
    "plan_grover",
    "reduced_grover_operator",
    "round_half_up",
    "run_amplified",
    "run_grover",
    "single_target_drift",
    "success_probability",
    "walsh_hadamard_plan",
]
