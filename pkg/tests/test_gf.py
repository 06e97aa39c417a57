import itertools

import numpy as np
import pytest

from src import gf
from src.gf import PRIMITIVE_POLYNOMIALS, field_new


@pytest.mark.parametrize("p", [2, 4])
def test_field_axioms_exhaustive(p):
    field = field_new(p)
    q = field.q
    elements = range(q)
    for a, b in itertools.product(elements, elements):
        assert field.add(a, b) == field.add(b, a)
        assert field.mul(a, b) == field.mul(b, a)
        assert field.add(a, b) < q and field.mul(a, b) < q
    for a, b, c in itertools.product(elements, elements, elements):
        assert field.mul(field.mul(a, b), c) == field.mul(a, field.mul(b, c))
        assert field.mul(a, field.add(b, c)) == field.add(field.mul(a, b), field.mul(a, c))
    for a in range(1, q):
        assert field.mul(a, field.inv(a)) == 1
        assert field.mul(a, 1) == a
        assert field.add(a, a) == 0


@pytest.mark.parametrize("p", [6, 8])
def test_field_axioms_random(p):
    field = field_new(p)
    rng = np.random.default_rng(11)
    a, b, c = rng.integers(0, field.q, size=(3, 10_000))
    mul = field.mul_table
    assert np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]])
    assert np.array_equal(mul[a, b ^ c], mul[a, b] ^ mul[a, c])
    nonzero = a[a != 0]
    assert np.all(mul[nonzero, field.inv_table[nonzero]] == 1)


def test_gf4_multiplication():
    field = field_new(2)
    assert field.mul(2, 2) == 3
    assert field.mul(2, 3) == 1
    assert field.inv(3) == 2


def test_generator_has_full_period():
    field = field_new(4)
    powers = field.antilog_table[: field.q - 1]
    assert powers.size == 15
    assert sorted(powers.tolist()) == list(range(1, 16))
    assert field.mul(int(powers[-1]), 2) == 1


def test_inverse_of_zero_raises():
    field = field_new(3)
    with pytest.raises(ZeroDivisionError):
        field.inv(0)
    with pytest.raises(ZeroDivisionError):
        gf.inv(field, 0)


def test_unsupported_sizes_raise():
    with pytest.raises(ValueError):
        field_new(0)
    with pytest.raises(ValueError):
        field_new(9)


def test_non_primitive_polynomial_raises():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but has order 5
    with pytest.raises(ValueError):
        field_new(4, 0b11111)


def test_bit_image_is_lsb_first():
    field = field_new(3)
    assert field.symbol_to_bits(6).tolist() == [0, 1, 1]
    assert gf.symbol_to_bits(6, 3).tolist() == [0, 1, 1]
    assert field.bits_to_symbol([1, 0, 1]) == 5
    assert gf.bits_to_symbol([1, 0, 1]) == 5
    symbols = np.arange(field.q)
    assert np.array_equal(field.bits_to_symbols(field.symbols_to_bits(symbols)), symbols)


def test_module_helpers_match_field():
    field = field_new(4)
    assert gf.add(9, 3) == 10
    assert gf.mul(field, 7, 9) == field.mul(7, 9)


@pytest.mark.parametrize("p", [2, 4, 6, 8])
def test_tables_agree_with_galois(p):
    galois = pytest.importorskip("galois")
    field = field_new(p)
    reference = galois.GF(2**p, irreducible_poly=galois.Poly.Int(PRIMITIVE_POLYNOMIALS[p]))
    elements = reference.elements
    expected = np.array(elements[:, None] * elements[None, :], dtype=np.int64)
    assert np.array_equal(field.mul_table, expected)
