"""One-query algorithms: Deutsch, Deutsch-Jozsa and Bernstein-Vazirani.

The oracle is used in phase form, ``|x> -> (-1)^f(x) |x>``; the fixed
``H|1>`` ancilla is never materialized.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PromiseViolation, ShapeError
from .state import QueryCounter, basis_state, walsh_hadamard

PROB_TOL = 1e-12


class Promise(str, enum.Enum):
    CONSTANT_OR_BALANCED = "constant-or-balanced"
    LINEAR = "linear"
    NONE = "none"


class FunctionClass(str, enum.Enum):
    CONSTANT = "constant"
    BALANCED = "balanced"


def dot_mod2(a: int, x: int) -> int:
    return (a & x).bit_count() & 1


def bits_to_int(bits: str) -> int:
    """``"1011"`` -> 11 (leftmost character is the most significant bit)."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return int(bits, 2)


def int_to_bits(value: int, n_bits: int) -> str:
    return format(value, f"0{n_bits}b")


@dataclass(frozen=True)
class BooleanOracle:
    """Truth table of ``f: {0,1}^n -> {0,1}`` with an eagerly checked promise."""

    n_bits: int
    truth_table: tuple[int, ...]
    promise: Promise = Promise.NONE

    def __post_init__(self):
        table = tuple(int(v) for v in self.truth_table)
        if self.n_bits < 1:
            raise ShapeError("need at least one input bit")
        if len(table) != 2 ** self.n_bits:
            raise ShapeError(f"truth table has {len(table)} entries, expected {2 ** self.n_bits}")
        if set(table) - {0, 1}:
            raise ShapeError("truth table entries must be 0 or 1")
        object.__setattr__(self, "truth_table", table)
        object.__setattr__(self, "promise", Promise(self.promise))
        if self.promise is Promise.CONSTANT_OR_BALANCED:
            ones = sum(table)
            if ones not in (0, len(table), len(table) // 2):
                raise PromiseViolation(f"{ones} ones out of {len(table)}: neither constant nor balanced")
        elif self.promise is Promise.LINEAR:
            if self._linear_string() is None:
                raise PromiseViolation("function is not of the form a.x mod 2")

    def _linear_string(self) -> int | None:
        # a is read off the unit vectors, then the whole table is checked
        a = 0
        for k in range(self.n_bits):
            if self.truth_table[1 << k]:
                a |= 1 << k
        if any(self.truth_table[x] != dot_mod2(a, x) for x in range(len(self.truth_table))):
            return None
        return a

    @property
    def signs(self) -> np.ndarray:
        return 1.0 - 2.0 * np.asarray(self.truth_table, dtype=float)

    @classmethod
    def constant(cls, n_bits: int, value: int) -> BooleanOracle:
        return cls(n_bits, (value,) * 2 ** n_bits, Promise.CONSTANT_OR_BALANCED)

    @classmethod
    def single_bit(cls, n_bits: int, bit: int, negate: bool = False) -> BooleanOracle:
        """Balanced ``f(x) = x_bit`` (xor 1 when ``negate``); bit 0 is the most significant."""
        shift = n_bits - 1 - bit
        table = tuple(((x >> shift) & 1) ^ int(negate) for x in range(2 ** n_bits))
        return cls(n_bits, table, Promise.CONSTANT_OR_BALANCED)

    @classmethod
    def linear(cls, hidden: str | int, n_bits: int | None = None) -> BooleanOracle:
        if isinstance(hidden, str):
            n_bits = len(hidden)
            hidden = bits_to_int(hidden)
        if n_bits is None:
            raise ValueError("n_bits is required when the hidden string is an integer")
        table = tuple(dot_mod2(hidden, x) for x in range(2 ** n_bits))
        return cls(n_bits, table, Promise.LINEAR)

    @classmethod
    def from_text(cls, text: str, promise: Promise | str = Promise.NONE) -> BooleanOracle:
        digits = "".join(text.split())
        n = len(digits).bit_length() - 1
        if len(digits) < 2 or 2 ** n != len(digits):
            raise ShapeError(f"truth table length {len(digits)} is not a power of two >= 2")
        if set(digits) - {"0", "1"}:
            raise ShapeError("truth table file may only contain 0 and 1")
        return cls(n, tuple(int(c) for c in digits), Promise(promise))

    @classmethod
    def from_file(cls, path: str | Path, promise: Promise | str = Promise.NONE) -> BooleanOracle:
        return cls.from_text(Path(path).read_text(), promise)

    def to_text(self) -> str:
        return "".join(str(v) for v in self.truth_table) + "\n"


def query_phase_oracle(state: np.ndarray, oracle: BooleanOracle, counter: QueryCounter) -> np.ndarray:
    counter.tick()
    return state * oracle.signs


def one_query_state(oracle: BooleanOracle, counter: QueryCounter | None = None) -> np.ndarray:
    """``H^n U_f H^n |0...0>`` with the ancilla discarded."""
    counter = counter if counter is not None else QueryCounter()
    psi = walsh_hadamard(basis_state(2 ** oracle.n_bits, 0))
    psi = query_phase_oracle(psi, oracle, counter)
    return walsh_hadamard(psi)


def _classify(psi: np.ndarray) -> FunctionClass:
    p0 = abs(psi[0]) ** 2
    if abs(p0 - 1.0) <= PROB_TOL:
        return FunctionClass.CONSTANT
    if p0 <= PROB_TOL:
        return FunctionClass.BALANCED
    raise PromiseViolation(f"outcome |0...0> has probability {p0:.3g}; promise does not hold")


def classify_deutsch(oracle: BooleanOracle, counter: QueryCounter | None = None) -> FunctionClass:
    if oracle.n_bits != 1:
        raise ShapeError(f"Deutsch's problem is on one bit, got n={oracle.n_bits}")
    return _classify(one_query_state(oracle, counter))


def classify_deutsch_jozsa(oracle: BooleanOracle, counter: QueryCounter | None = None) -> FunctionClass:
    if oracle.n_bits > 1 and oracle.promise is not Promise.CONSTANT_OR_BALANCED:
        raise PromiseViolation("Deutsch-Jozsa needs an oracle tagged constant-or-balanced")
    return _classify(one_query_state(oracle, counter))


def recover_hidden_string(oracle: BooleanOracle, counter: QueryCounter | None = None) -> str:
    if oracle.promise is not Promise.LINEAR:
        raise PromiseViolation("Bernstein-Vazirani needs an oracle tagged linear")
    psi = one_query_state(oracle, counter)
    a = int(np.argmax(np.abs(psi)))
    if abs(abs(psi[a]) ** 2 - 1.0) > PROB_TOL:
        raise PromiseViolation("post-oracle state is not a basis state")
    return int_to_bits(a, oracle.n_bits)
