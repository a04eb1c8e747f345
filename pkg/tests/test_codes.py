import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddahash.codes import BinaryCode, load_codes, pack_rows, save_codes, to_words
from ddahash.errors import FormatError, InvalidArgumentError


def test_msb_first_layout():
    code = BinaryCode.from_bits([1, 0, 0, 0, 0, 0, 0, 0, 0, 1])
    assert code.length == 10
    assert code.packed.tolist() == [0b10000000, 0b01000000]
    assert code.hex() == "8040"


def test_pad_bits_must_be_zero():
    with pytest.raises(InvalidArgumentError):
        BinaryCode(np.array([0xFF], dtype=np.uint8), 5)
    with pytest.raises(InvalidArgumentError):
        BinaryCode(np.array([0xFF, 0], dtype=np.uint8), 8)


@given(st.lists(st.booleans(), min_size=1, max_size=80))
def test_bits_round_trip(bits):
    code = BinaryCode.from_bits(bits)
    assert code.packed.size == (len(bits) + 7) // 8
    assert code.bits().tolist() == [int(b) for b in bits]
    assert BinaryCode.from_hex(code.hex(), code.length) == code
    assert BinaryCode.from_int(code.to_int(), code.length) == code


def test_int_view():
    code = BinaryCode.from_bits([1] + [0] * 15)
    assert code.to_int() == 1 << 15
    assert BinaryCode.from_int(1, 16).bits()[-1] == 1
    with pytest.raises(InvalidArgumentError):
        BinaryCode.from_int(1 << 16, 16)


def test_codes_are_hashable_values():
    a = BinaryCode.from_bits([1, 0, 1])
    b = BinaryCode.from_bits([1, 0, 1])
    assert a == b and hash(a) == hash(b)
    assert a != BinaryCode.from_bits([1, 0, 1, 0])


def test_words_pad_to_64_bits():
    packed = pack_rows(np.ones((3, 70), dtype=np.uint8))
    w = to_words(packed)
    assert w.shape == (3, 2) and w.dtype == np.uint64
    assert int(np.bitwise_count(w).sum()) == 210


def test_code_file_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    codes = [BinaryCode.from_bits(rng.integers(0, 2, 13)) for _ in range(5)]
    ids = [f"id{i}" for i in range(5)]
    path = tmp_path / "c.codes"
    save_codes(path, ids, codes, "abc")
    got_ids, got = load_codes(path)
    assert got_ids == ids and got == codes
    assert all(c.length == 13 for c in got)
    first = path.read_bytes()
    save_codes(path, got_ids, got, "abc")
    assert path.read_bytes() == first


def test_code_file_errors(tmp_path):
    p = tmp_path / "bad.codes"
    p.write_text("nonsense\n")
    with pytest.raises(FormatError, match="expected header"):
        load_codes(p)
    p.write_text("#ddahash-codes v1 -\nx 16 abc\n")
    with pytest.raises(FormatError):
        load_codes(p)
    with pytest.raises(InvalidArgumentError):
        save_codes(p, ["has space"], [BinaryCode.from_bits([1])])
