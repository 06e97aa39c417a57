"""Table-driven arithmetic in GF(2^p) and the fixed symbol <-> bit isomorphism.

Symbols are plain integers in [0, q). The binary image of a symbol is its bit
pattern, read LSB-first: bit t of the image is ``(a >> t) & 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Sequence

import numpy as np


# Canonical primitive polynomials, bit k set <=> x^k present.
PRIMITIVE_POLYNOMIALS: Dict[int, int] = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
}

MIN_BITS = 1
MAX_BITS = 8


@dataclass(frozen=True, eq=False)
class Field:
    """GF(q), q = 2^p, with log/antilog tables.

    ``antilog_table`` has length 2(q-1) so that ``antilog[log[a] + log[b]]``
    never needs a modulo. ``log_table[0]`` is -1 and must not be used.
    """

    p: int
    q: int
    primitive_poly: int
    log_table: np.ndarray
    antilog_table: np.ndarray

    def add(self, a: int, b: int) -> int:
        return int(a) ^ int(b)

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.antilog_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        order = self.q - 1
        return int(self.antilog_table[(order - self.log_table[a]) % order])

    def symbol_to_bits(self, a: int) -> np.ndarray:
        return self.bit_table[int(a)].copy()

    def bits_to_symbol(self, bits: Sequence[int]) -> int:
        values = np.asarray(bits, dtype=np.int64)
        if values.shape != (self.p,):
            raise ValueError(f"expected {self.p} bits, got shape {values.shape}")
        return int(values @ self.bit_weights)

    def symbols_to_bits(self, symbols: Sequence[int]) -> np.ndarray:
        """Binary images of a symbol vector, shape (len, p)."""
        return self.bit_table[np.asarray(symbols, dtype=np.int64)]

    def bits_to_symbols(self, bits: np.ndarray) -> np.ndarray:
        matrix = np.asarray(bits, dtype=np.int64).reshape(-1, self.p)
        return matrix @ self.bit_weights

    @cached_property
    def bit_weights(self) -> np.ndarray:
        return 1 << np.arange(self.p, dtype=np.int64)

    @cached_property
    def bit_table(self) -> np.ndarray:
        """Row a is the LSB-first binary image of symbol a."""
        symbols = np.arange(self.q, dtype=np.int64)
        return ((symbols[:, None] >> np.arange(self.p)) & 1).astype(np.uint8)

    @cached_property
    def mul_table(self) -> np.ndarray:
        logs = self.log_table
        table = self.antilog_table[logs[1:, None] + logs[None, 1:]]
        full = np.zeros((self.q, self.q), dtype=np.int64)
        full[1:, 1:] = table
        return full

    @cached_property
    def inv_table(self) -> np.ndarray:
        """``inv_table[a]`` is a^-1; entry 0 is 0 and means nothing."""
        table = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            table[a] = self.inv(a)
        return table


def field_new(p: int, primitive_poly: Optional[int] = None) -> Field:
    if not isinstance(p, (int, np.integer)) or not MIN_BITS <= p <= MAX_BITS:
        raise ValueError(f"bits per symbol must be in [{MIN_BITS}, {MAX_BITS}], got {p}")
    p = int(p)
    poly = PRIMITIVE_POLYNOMIALS[p] if primitive_poly is None else int(primitive_poly)
    if poly >> p != 1:
        raise ValueError(f"polynomial {poly:#b} is not of degree {p}")

    q = 1 << p
    order = q - 1
    log_table = np.full(q, -1, dtype=np.int64)
    antilog_table = np.zeros(2 * order, dtype=np.int64)

    value = 1
    for power in range(order):
        if log_table[value] != -1:
            raise ValueError(f"polynomial {poly:#b} is not primitive for p={p}")
        log_table[value] = power
        antilog_table[power] = value
        value <<= 1
        if value & q:
            value ^= poly
    if value != 1:
        raise ValueError(f"polynomial {poly:#b} is not primitive for p={p}")
    antilog_table[order:] = antilog_table[:order]

    return Field(
        p=p,
        q=q,
        primitive_poly=poly,
        log_table=log_table,
        antilog_table=antilog_table,
    )


def add(a: int, b: int) -> int:
    return int(a) ^ int(b)


def mul(field: Field, a: int, b: int) -> int:
    return field.mul(a, b)


def inv(field: Field, a: int) -> int:
    return field.inv(a)


def symbol_to_bits(a: int, p: int) -> np.ndarray:
    return ((int(a) >> np.arange(p)) & 1).astype(np.uint8)


def bits_to_symbol(bits: Sequence[int]) -> int:
    values = np.asarray(bits, dtype=np.int64)
    return int(values @ (1 << np.arange(values.size, dtype=np.int64)))
