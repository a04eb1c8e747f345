import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddahash.errors import FormatError, IrmaParseError
from ddahash.irma import (
    POSITIONS,
    BranchTable,
    build_branch_table,
    image_error,
    load_branch_table,
    load_irma_codes,
    max_image_error,
    parse_irma,
    save_branch_table,
    save_irma_codes,
    structure_errors,
    total_error,
)

U10 = BranchTable.uniform(10)


def with_char(text, pos, ch):
    return text[:pos] + ch + text[pos + 1 :]


def test_parse_round_trip():
    c = parse_irma("1121-4A0-914-700")
    assert c.structures == ("1121", "4a0", "914", "700")
    assert c.text == "1121-4a0-914-700"
    assert parse_irma("11214a0914700") == c
    assert c.char(2, 2) == "a"


@pytest.mark.parametrize("bad", ["1121-4a0-914", "1121-4a0-914-70", "1121-4a0-9!4-700", "", "1121_4a0_914_700"])
def test_parse_rejects(bad):
    with pytest.raises(IrmaParseError):
        parse_irma(bad)


def test_parse_error_position():
    with pytest.raises(IrmaParseError) as info:
        parse_irma("1121-4a0-9!4-700")
    assert info.value.position == 10


def test_identical_codes_zero():
    c = parse_irma("1121-4a0-914-700")
    assert image_error(c, c, U10) == 0.0


def test_deep_mismatch():
    q = parse_irma("1121-4a0-914-700")
    r = parse_irma("1122-4a0-914-700")
    assert abs(image_error(q, r, U10) - 0.025) < 1e-12


def test_first_position_mismatch_cascades():
    q = parse_irma("1121-4a0-914-700")
    r = parse_irma("2121-4a0-914-700")
    expected = 0.1 * (1 + 1 / 2 + 1 / 3 + 1 / 4)
    assert abs(image_error(q, r, U10) - expected) < 1e-12
    assert abs(structure_errors(q, r, U10)[0] - expected) < 1e-12


def test_max_error():
    q = parse_irma("1121-4a0-914-700")
    r = parse_irma("2232-5b1-025-811")
    assert abs(image_error(q, r, U10) - max_image_error(U10)) < 1e-12


codes = st.text(alphabet="0123ab", min_size=13, max_size=13).map(parse_irma)


@given(st.lists(st.tuples(codes, codes), max_size=8), st.lists(st.tuples(codes, codes), max_size=8))
@settings(max_examples=50)
def test_total_error_additive(a, b):
    assert abs(total_error(a + b, U10) - total_error(a, U10) - total_error(b, U10)) < 1e-12


@given(st.lists(st.tuples(codes, codes), min_size=1, max_size=6), st.randoms())
@settings(max_examples=50)
def test_total_error_permutation_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    assert abs(total_error(pairs, U10) - total_error(shuffled, U10)) < 1e-12


@given(codes, codes)
@settings(max_examples=100)
def test_error_bounds_and_symmetry(q, r):
    e = image_error(q, r, U10)
    assert 0.0 <= e <= max_image_error(U10) + 1e-12
    assert e == image_error(r, q, U10)


def test_hierarchy_monotone():
    base = "1121-4a0-914-700"
    errs = [image_error(parse_irma(base), parse_irma(with_char(base, p, "z")), U10) for p in range(4)]
    assert errs == sorted(errs, reverse=True)


def test_branch_table_global_and_conditioned():
    cs = [parse_irma(t) for t in ["1121-4a0-914-700", "1122-4a0-914-700", "2121-4a0-914-700", "1131-4a0-914-700"]]
    g = build_branch_table(cs)
    assert g[(1, 1)] == 2 and g[(1, 3)] == 2 and g[(1, 4)] == 2 and g[(2, 1)] == 1
    p = build_branch_table(cs, prefix_conditioned=True)
    # position 4 follows prefixes "112" (1, 2), "212" (1) and "113" (1): mean 4/3
    assert p[(1, 4)] == 4 / 3
    assert p[(1, 1)] == 2


def test_branch_table_validation():
    with pytest.raises(ValueError):
        BranchTable({(1, 1): 2})
    with pytest.raises(ValueError):
        BranchTable({p: 0.5 for p in POSITIONS})


def test_files_round_trip(tmp_path):
    table = BranchTable({p: 1 + k / 7 for k, p in enumerate(POSITIONS)})
    save_branch_table(tmp_path / "b.csv", table)
    assert load_branch_table(tmp_path / "b.csv") == table
    codes_ = {f"i{k}": parse_irma(t) for k, t in enumerate(["1121-4a0-914-700", "2121-4a0-914-700"])}
    save_irma_codes(tmp_path / "c.txt", codes_)
    assert load_irma_codes(tmp_path / "c.txt") == codes_
    (tmp_path / "bad.txt").write_text("x;1121-4a0\n")
    with pytest.raises(FormatError):
        load_irma_codes(tmp_path / "bad.txt")


def test_exhaustive_small_alphabet_matches_closed_form():
    # single-structure mismatch at depth d costs sum_{i>=d} 1/(b i)
    q = parse_irma("1111-111-111-111")
    for d, (j, n) in itertools.product(range(1, 4), [(2, 3)]):
        t = list(q.text)
        t[5 + d - 1] = "2"
        r = parse_irma("".join(t))
        expected = sum(0.1 / i for i in range(d, n + 1))
        assert abs(image_error(q, r, U10) - expected) < 1e-12
