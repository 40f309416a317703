"""Dense state-vector substrate.

A state is a plain ``complex128`` numpy array of length ``N``.  Operators are
pure functions returning a new array; nothing here mutates its input.  The
marked-phase reflection is the only operation that consumes an oracle query,
and it reports that to an explicit :class:`QueryCounter`.

Blocks of a :class:`BlockLayout` are contiguous index ranges
``[alpha * B, (alpha + 1) * B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidSpaceError, LayoutError, ShapeError

NORM_TOL = 1e-10


@dataclass
class QueryCounter:
    """Counts applications of the marked-phase oracle."""

    oracle_calls: int = 0

    def tick(self, n: int = 1) -> None:
        self.oracle_calls += n


@dataclass(frozen=True)
class SearchSpace:
    """``n_elements`` basis states, of which ``marked`` are targets."""

    n_elements: int
    marked: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n_elements < 1:
            raise InvalidSpaceError(f"need at least one element, got N={self.n_elements}")
        marked = tuple(sorted(set(int(i) for i in self.marked)))
        if marked and (marked[0] < 0 or marked[-1] >= self.n_elements):
            raise InvalidSpaceError(f"marked indices must lie in [0, {self.n_elements})")
        object.__setattr__(self, "marked", marked)

    @property
    def n_marked(self) -> int:
        return len(self.marked)

    @cached_property
    def marked_array(self) -> np.ndarray:
        return np.asarray(self.marked, dtype=np.intp)

    @property
    def theta(self) -> float:
        """Angle with sin^2 = M/N."""
        return math.asin(math.sqrt(self.n_marked / self.n_elements))


@dataclass(frozen=True)
class BlockLayout:
    """Partition of ``n_elements`` into ``n_blocks`` equal contiguous blocks.

    ``target_blocks`` lists the blocks that hold targets; each of them holds
    ``targets_per_block`` targets at the in-block offsets ``target_offsets``
    (default: the first ``targets_per_block`` slots).
    """

    n_elements: int
    n_blocks: int
    target_blocks: tuple[int, ...] = (0,)
    targets_per_block: int = 1
    target_offsets: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        N, K = self.n_elements, self.n_blocks
        if K < 2:
            raise LayoutError(f"partial search needs at least two blocks, got K={K}")
        if N < 1 or N % K:
            raise LayoutError(f"K={K} does not divide N={N}")
        tb = tuple(sorted(set(int(a) for a in self.target_blocks)))
        if not tb or tb[0] < 0 or tb[-1] >= K:
            raise LayoutError(f"target blocks must be a non-empty subset of [0, {K})")
        object.__setattr__(self, "target_blocks", tb)
        B = N // K
        if not 1 <= self.targets_per_block <= B:
            raise LayoutError(f"targets per block must lie in [1, {B}]")
        offsets = self.target_offsets
        if offsets is None:
            offsets = tuple(range(self.targets_per_block))
        offsets = tuple(sorted(set(int(o) for o in offsets)))
        if len(offsets) != self.targets_per_block or offsets[0] < 0 or offsets[-1] >= B:
            raise LayoutError("target offsets must be targets_per_block distinct slots in a block")
        object.__setattr__(self, "target_offsets", offsets)

    @property
    def block_size(self) -> int:
        return self.n_elements // self.n_blocks

    @property
    def n_target_blocks(self) -> int:
        return len(self.target_blocks)

    @property
    def n_marked(self) -> int:
        return self.n_target_blocks * self.targets_per_block

    @property
    def k_eff(self) -> float:
        """Effective block count K / K_T used by the rescaled optimization."""
        return self.n_blocks / self.n_target_blocks

    @cached_property
    def marked(self) -> tuple[int, ...]:
        B = self.block_size
        return tuple(a * B + o for a in self.target_blocks for o in self.target_offsets)

    @cached_property
    def space(self) -> SearchSpace:
        return SearchSpace(self.n_elements, self.marked)

    @property
    def theta(self) -> float:
        """Global angle, sin^2 = M / N."""
        return math.asin(math.sqrt(self.n_marked / self.n_elements))

    @property
    def theta1(self) -> float:
        """In-block angle, sin^2 = B_T / B."""
        return math.asin(math.sqrt(self.targets_per_block / self.block_size))

    @property
    def gamma(self) -> float:
        """Target-block angle, sin^2 = K_T / K."""
        return math.asin(math.sqrt(self.n_target_blocks / self.n_blocks))

    def block_of(self, index: int) -> int:
        return index // self.block_size


def as_state(amplitudes: Iterable[complex]) -> np.ndarray:
    psi = np.array(amplitudes, dtype=np.complex128).ravel()
    if psi.size < 1:
        raise InvalidSpaceError("a state needs at least one amplitude")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > NORM_TOL:
        raise ShapeError(f"state is not normalized (norm^2 = {norm!r})")
    return psi


def norm_squared(state: np.ndarray) -> float:
    return float(np.vdot(state, state).real)


def _n_of(space_or_n: SearchSpace | int) -> int:
    n = space_or_n.n_elements if isinstance(space_or_n, SearchSpace) else int(space_or_n)
    if n < 1:
        raise InvalidSpaceError(f"need at least one element, got N={n}")
    return n


def uniform_state(space: SearchSpace | int) -> np.ndarray:
    n = _n_of(space)
    return np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)


def basis_state(space: SearchSpace | int, index: int) -> np.ndarray:
    n = _n_of(space)
    if not 0 <= index < n:
        raise IndexError(f"basis index {index} out of range for N={n}")
    psi = np.zeros(n, dtype=np.complex128)
    psi[index] = 1.0
    return psi


def _check_dim(state: np.ndarray, n: int) -> None:
    if state.ndim != 1 or state.shape[0] != n:
        raise ShapeError(f"state has shape {state.shape}, expected ({n},)")


def reflect_marked(state: np.ndarray, space: SearchSpace, counter: QueryCounter | None = None) -> np.ndarray:
    """Oracle reflection: negate the marked amplitudes.  One query."""
    _check_dim(state, space.n_elements)
    out = state.copy()
    out[space.marked_array] *= -1
    if counter is not None:
        counter.tick()
    return out


def phase_marked(state: np.ndarray, space: SearchSpace, phase: float,
                 counter: QueryCounter | None = None) -> np.ndarray:
    """Phase oracle ``I - (1 - e^{i phase}) P_T``.  One query; ``phase = pi`` is the reflection."""
    _check_dim(state, space.n_elements)
    out = state.copy()
    out[space.marked_array] *= np.exp(1j * phase)
    if counter is not None:
        counter.tick()
    return out


def invert_about_average(state: np.ndarray) -> np.ndarray:
    """Map every amplitude ``c_i`` to ``2 * mean(c) - c_i`` (the operator -I_Theta)."""
    return 2.0 * state.mean() - state


def phase_invert_about_average(state: np.ndarray, phase: float) -> np.ndarray:
    """``-(I - (1 - e^{i phase})|Theta><Theta|)``; reduces to inversion about average at ``pi``."""
    return (1.0 - np.exp(1j * phase)) * state.mean() - state


def block_invert_about_average(state: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Invert about the average independently inside every block."""
    _check_dim(state, layout.n_elements)
    blocks = state.reshape(layout.n_blocks, layout.block_size)
    return (2.0 * blocks.mean(axis=1, keepdims=True) - blocks).ravel()


def grover_iteration(state: np.ndarray, space: SearchSpace, counter: QueryCounter | None = None) -> np.ndarray:
    """One standard iteration ``-I_Theta I_T`` (oracle first)."""
    return invert_about_average(reflect_marked(state, space, counter))


def reversed_iteration(state: np.ndarray, space: SearchSpace, counter: QueryCounter | None = None) -> np.ndarray:
    """``-I_T I_Theta``: diffusion first, oracle second."""
    return reflect_marked(invert_about_average(state), space, counter)


def local_iteration(state: np.ndarray, layout: BlockLayout, counter: QueryCounter | None = None) -> np.ndarray:
    """Simultaneous per-block iteration: oracle, then per-block diffusion."""
    return block_invert_about_average(reflect_marked(state, layout.space, counter), layout)


def walsh_hadamard(state: np.ndarray) -> np.ndarray:
    """Normalized Walsh-Hadamard transform via in-place radix-2 butterflies."""
    x = np.array(state, dtype=np.complex128).ravel()
    n = x.size
    if n < 1 or n & (n - 1):
        raise ShapeError(f"Walsh-Hadamard needs a power-of-two length, got {n}")
    h = 1
    while h < n:
        x = x.reshape(-1, 2, h)
        top = x[:, 0, :] + x[:, 1, :]
        bottom = x[:, 0, :] - x[:, 1, :]
        x = np.stack((top, bottom), axis=1).reshape(-1)
        h *= 2
    return x / math.sqrt(n)


def probability_of_set(state: np.ndarray, indices: Sequence[int] | np.ndarray) -> float:
    idx = np.asarray(indices, dtype=np.intp).ravel()
    if idx.size == 0:
        return 0.0
    if idx.min() < 0 or idx.max() >= state.shape[0]:
        raise IndexError("probability requested for an index outside the state")
    amps = state[idx]
    return float(np.sum(amps.real ** 2 + amps.imag ** 2))


def block_probabilities(state: np.ndarray, layout: BlockLayout) -> np.ndarray:
    _check_dim(state, layout.n_elements)
    p = (state.real ** 2 + state.imag ** 2).reshape(layout.n_blocks, layout.block_size)
    return p.sum(axis=1)
