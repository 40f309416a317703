"""Adiabatic search in the exact two-dimensional invariant subspace.

Basis: ``|A_T>`` (uniform over targets) and ``|A_nT>`` (uniform over the rest).
There ``H_Theta = I - |Theta><Theta|`` with ``Theta = (sin t, cos t)``,
``sin^2 t = M/N``, and the target Hamiltonian is ``diag(0, 1)``.
Time is dimensionless (hbar = 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import AccuracyError, DomainError

NORM_DRIFT_LIMIT = 1e-6
MAX_DT = 0.01


class Schedule(str, enum.Enum):
    LINEAR = "linear"
    LOCAL = "local"


def _check(n_elements: int, n_targets: int) -> None:
    if n_elements < 2:
        raise DomainError(f"need N >= 2, got {n_elements}")
    if not 1 <= n_targets < n_elements:
        raise DomainError(f"need 1 <= M < N, got M={n_targets}, N={n_elements}")


def gap(n_elements: int, n_targets: int, s: float) -> float:
    """``E2 - E1 = sqrt(N - 4 (N - M) s (1 - s)) / sqrt(N)``."""
    _check(n_elements, n_targets)
    N, M = n_elements, n_targets
    return math.sqrt(N - 4 * (N - M) * s * (1 - s)) / math.sqrt(N)


def min_gap(n_elements: int, n_targets: int) -> float:
    return gap(n_elements, n_targets, 0.5)


def reduced_hamiltonian(n_elements: int, n_targets: int, s: float) -> np.ndarray:
    st = math.sqrt(n_targets / n_elements)
    ct = math.sqrt(1 - n_targets / n_elements)
    h_theta = np.array([[1 - st * st, -st * ct], [-st * ct, 1 - ct * ct]])
    h_target = np.diag([0.0, 1.0])
    return (1 - s) * h_theta + s * h_target


def hamiltonian_slope(n_elements: int, n_targets: int) -> np.ndarray:
    """``dH/ds = H_T - H_Theta`` (independent of ``s``)."""
    return reduced_hamiltonian(n_elements, n_targets, 1.0) - reduced_hamiltonian(n_elements, n_targets, 0.0)


def exact_eigen(n_elements: int, n_targets: int, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors (columns) of the reduced Hamiltonian."""
    return np.linalg.eigh(reduced_hamiltonian(n_elements, n_targets, s))


def exact_gap(n_elements: int, n_targets: int, s: float) -> float:
    w, _ = exact_eigen(n_elements, n_targets, s)
    return float(w[1] - w[0])


def coupling(n_elements: int, n_targets: int, s: float) -> float:
    """Exact ``|<psi_2| dH/ds |psi_1>|``; commonly approximated by 1."""
    _, v = exact_eigen(n_elements, n_targets, s)
    return float(abs(v[:, 1] @ hamiltonian_slope(n_elements, n_targets) @ v[:, 0]))


def linear_runtime_bound(n_elements: int, n_targets: int, epsilon: float) -> float:
    """``T >= N / (M eps)`` for ``s = t/T``."""
    _check(n_elements, n_targets)
    return n_elements / (n_targets * epsilon)


# -- local (gap-adapted) schedule ----------------------------------------------

def local_time(n_elements: int, n_targets: int, epsilon: float, s: float) -> float:
    """Closed-form ``t(s)`` solving ``ds/dt = eps * gap(s)^2``, ``s(0) = 0``."""
    _check(n_elements, n_targets)
    r = n_elements / n_targets
    q = math.sqrt(r - 1)
    return r / (2 * epsilon * q) * (math.atan(q * (2 * s - 1)) + math.atan(q))


def local_total_time(n_elements: int, n_targets: int, epsilon: float) -> float:
    _check(n_elements, n_targets)
    r = n_elements / n_targets
    if r == 1:
        return 0.0
    q = math.sqrt(r - 1)
    return r / (epsilon * q) * math.atan(q)


@numba.njit(cache=True)
def _local_s(t, r, eps):
    q = math.sqrt(r - 1.0)
    u = math.tan(2.0 * eps * t * q / r - math.atan(q)) / q
    s = 0.5 * (1.0 + u)
    return min(1.0, max(0.0, s))


def local_s(n_elements: int, n_targets: int, epsilon: float, t: float) -> float:
    """Inverse of :func:`local_time`, in closed form."""
    _check(n_elements, n_targets)
    return float(_local_s(float(t), n_elements / n_targets, float(epsilon)))


def local_schedule(n_elements: int, n_targets: int, epsilon: float):
    """``(s(t), T)`` for the gap-adapted schedule."""
    T = local_total_time(n_elements, n_targets, epsilon)

    def s_of_t(t: float) -> float:
        if t <= 0:
            return 0.0
        if t >= T:
            return 1.0
        return local_s(n_elements, n_targets, epsilon, t)

    return s_of_t, T


# -- integration --------------------------------------------------------------

@dataclass(frozen=True)
class AdiabaticConfig:
    """``total_time`` defaults to the schedule's natural runtime for ``epsilon``;
    ``dt`` defaults to ``min(0.01, min_gap / 10)``."""

    n_elements: int
    n_targets: int = 1
    epsilon: float = 0.1
    schedule: Schedule = Schedule.LOCAL
    total_time: float | None = None
    dt: float | None = None

    def __post_init__(self):
        _check(self.n_elements, self.n_targets)
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.total_time is not None and self.total_time < 0:
            raise DomainError("total time must be non-negative")
        if self.dt is not None and not 0 < self.dt <= self.max_dt:
            raise DomainError(f"dt must lie in (0, {self.max_dt}], got {self.dt}")

    @property
    def max_dt(self) -> float:
        return min(MAX_DT, min_gap(self.n_elements, self.n_targets) / 10)

    @property
    def step(self) -> float:
        return self.dt if self.dt is not None else self.max_dt

    @property
    def runtime(self) -> float:
        if self.total_time is not None:
            return self.total_time
        if self.schedule is Schedule.LINEAR:
            return linear_runtime_bound(self.n_elements, self.n_targets, self.epsilon)
        return local_total_time(self.n_elements, self.n_targets, self.epsilon)

    @property
    def effective_epsilon(self) -> float:
        """Local schedule: the ``eps`` whose natural runtime equals ``runtime``."""
        T = self.runtime
        if T == 0:
            return self.epsilon
        return local_total_time(self.n_elements, self.n_targets, 1.0) / T


@numba.njit(cache=True)
def _rk4(T, n_steps, kind, r, eps, st, ct, psi0, psi1):
    # H(s) = (1-s)(I - Theta Theta^T) + s diag(0, 1)
    dt = T / n_steps
    a0 = psi0
    a1 = psi1
    for k in range(n_steps):
        t = k * dt
        ks0 = np.empty(4, dtype=np.complex128)
        ks1 = np.empty(4, dtype=np.complex128)
        for stage in range(4):
            if stage == 0:
                tt = t
                x0 = a0
                x1 = a1
            elif stage == 1:
                tt = t + 0.5 * dt
                x0 = a0 + 0.5 * dt * ks0[0]
                x1 = a1 + 0.5 * dt * ks1[0]
            elif stage == 2:
                tt = t + 0.5 * dt
                x0 = a0 + 0.5 * dt * ks0[1]
                x1 = a1 + 0.5 * dt * ks1[1]
            else:
                tt = t + dt
                x0 = a0 + dt * ks0[2]
                x1 = a1 + dt * ks1[2]
            if kind == 0:
                s = tt / T
            else:
                s = _local_s(tt, r, eps)
            h00 = (1.0 - s) * (1.0 - st * st)
            h01 = -(1.0 - s) * st * ct
            h11 = (1.0 - s) * (1.0 - ct * ct) + s
            ks0[stage] = -1j * (h00 * x0 + h01 * x1)
            ks1[stage] = -1j * (h01 * x0 + h11 * x1)
        a0 = a0 + dt / 6.0 * (ks0[0] + 2 * ks0[1] + 2 * ks0[2] + ks0[3])
        a1 = a1 + dt / 6.0 * (ks1[0] + 2 * ks1[1] + 2 * ks1[2] + ks1[3])
    return a0, a1


@dataclass(frozen=True)
class EvolutionResult:
    fidelity: float
    norm_drift: float
    n_steps: int
    total_time: float
    final_state: np.ndarray


def integrate(config: AdiabaticConfig) -> EvolutionResult:
    """Fixed-step RK4 integration of ``i dpsi/dt = H(s(t)) psi`` from ``|Theta>``."""
    N, M = config.n_elements, config.n_targets
    st, ct = math.sqrt(M / N), math.sqrt(1 - M / N)
    T = config.runtime
    if T == 0:
        psi = np.array([st, ct], dtype=np.complex128)
        return EvolutionResult(M / N, 0.0, 0, 0.0, psi)
    n_steps = max(1, math.ceil(T / config.step))
    kind = 0 if config.schedule is Schedule.LINEAR else 1
    a0, a1 = _rk4(float(T), n_steps, kind, N / M, config.effective_epsilon, st, ct,
                  complex(st), complex(ct))
    psi = np.array([a0, a1])
    drift = abs(float(np.vdot(psi, psi).real) - 1.0)
    if drift > NORM_DRIFT_LIMIT:
        raise AccuracyError(f"norm drifted by {drift:.3g} with dt={T / n_steps:.3g}")
    return EvolutionResult(float(abs(a0) ** 2), drift, n_steps, float(T), psi)


def evolve(config: AdiabaticConfig) -> float:
    """Final probability of the target subspace."""
    return integrate(config).fidelity


def adiabaticity_ratio(n_elements: int, n_targets: int, s: float, total_time: float,
                       schedule: Schedule | str) -> float:
    """``|<psi_2| dH/dt |psi_1>| / (E2 - E1)^2`` with the exact coupling."""
    schedule = Schedule(schedule)
    g = gap(n_elements, n_targets, s)
    if schedule is Schedule.LINEAR:
        ds_dt = 1.0 / total_time
    else:
        eps = local_total_time(n_elements, n_targets, 1.0) / total_time
        ds_dt = eps * g * g
    return ds_dt * coupling(n_elements, n_targets, s) / (g * g)


# -- scaling ----------------------------------------------------------------

def minimal_time(n_elements: int, n_targets: int, schedule: Schedule | str,
                 target_fidelity: float = 0.95, rel_tol: float = 1e-3) -> float:
    """Smallest runtime (first crossing on a geometric scan, refined by bisection)
    at which the schedule reaches ``target_fidelity``."""
    schedule = Schedule(schedule)

    def fid(T):
        return evolve(AdiabaticConfig(n_elements, n_targets, 0.5, schedule, total_time=T))

    lo = 0.0
    hi = math.sqrt(n_elements / n_targets) / 4
    while fid(hi) < target_fidelity:
        lo, hi = hi, hi * 1.25
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if fid(mid) >= target_fidelity:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class ScalingFit:
    schedule: Schedule
    sizes: tuple[int, ...]
    times: tuple[float, ...]
    exponent: float
    intercept: float


def scaling_fit(schedule: Schedule | str, sizes=tuple(2 ** k for k in range(6, 13)),
                n_targets: int = 1, target_fidelity: float = 0.95) -> ScalingFit:
    """Least-squares slope of ``log T`` against ``log N`` at fixed target fidelity."""
    schedule = Schedule(schedule)
    times = [minimal_time(n, n_targets, schedule, target_fidelity) for n in sizes]
    slope, intercept = np.polyfit(np.log(sizes), np.log(times), 1)
    return ScalingFit(schedule, tuple(sizes), tuple(times), float(slope), float(intercept))
