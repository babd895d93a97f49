import numpy as np
import pytest

from ptqgt import ParseError, parse_expression, parse_model
from ptqgt.families import (
    load_bundled_model,
    pt_two_level_family,
    spin_half_family,
)


def ev(source, lam=(), n_params=0):
    return parse_expression(source, n_params)(lam)


def test_literals():
    assert ev("2") == 2.0
    assert ev("2.5e-1") == 0.25
    assert ev("3i") == 3j
    assert ev("i") == 1j
    assert ev("-i") == -1j


def test_arithmetic_and_precedence():
    assert ev("1 + 2*3") == 7.0
    assert ev("(1 + 2)*3") == 9.0
    assert ev("1 - 2 - 3") == -4.0
    assert ev("8/4/2") == 1.0
    assert ev("-2*3") == -6.0
    assert ev("2 - -3") == 5.0


def test_functions_and_params():
    lam = (0.3, 1.2)
    fn = parse_expression("sin(l1)*cos(l2) + exp(i*l1)", n_params=2)
    expected = np.sin(0.3) * np.cos(1.2) + np.exp(0.3j)
    assert abs(fn(lam) - expected) < 1e-14


def test_error_positions():
    with pytest.raises(ParseError, match="col 5"):
        parse_expression("1 + $", n_params=0)
    with pytest.raises(ParseError, match="trailing input"):
        parse_expression("1 2", n_params=0)
    with pytest.raises(ParseError, match="unknown identifier"):
        parse_expression("foo + 1", n_params=0)
    with pytest.raises(ParseError, match="out of range"):
        parse_expression("l3", n_params=2)
    with pytest.raises(ParseError, match="expected a value"):
        parse_expression("1 +", n_params=0)
    with pytest.raises(ParseError, match=r"expected '\)'"):
        parse_expression("sin(l1", n_params=1)


def test_error_reports_line_number():
    text = "dim 2\nparams 1\nH[1,1] = l1 +\n"
    with pytest.raises(ParseError, match="line 3"):
        parse_model(text)


def test_parse_model_basic():
    fam = parse_model(
        """
        # Pauli-z times l3 plus ladder terms
        dim 2
        params 3
        H[1,1] = l3
        H[1,2] = l1 - i*l2
        H[2,1] = l1 + i*l2
        H[2,2] = -l3
        """
    )
    assert fam.dim_hilbert == 2
    assert fam.dim_param == 3
    h = fam([0.5, -0.25, 2.0])
    expected = np.array([[2.0, 0.5 + 0.25j], [0.5 - 0.25j, -2.0]])
    assert np.max(np.abs(h - expected)) < 1e-15


def test_parse_model_unspecified_entries_zero():
    fam = parse_model("dim 3\nparams 1\nH[2,2] = l1\n")
    h = fam([4.0])
    assert h[1, 1] == 4.0
    assert np.count_nonzero(h) == 1


def test_parse_model_errors():
    with pytest.raises(ParseError, match="must declare"):
        parse_model("# empty\n")
    with pytest.raises(ParseError, match="must precede"):
        parse_model("H[1,1] = 1\ndim 1\nparams 1\n")
    with pytest.raises(ParseError, match="outside"):
        parse_model("dim 2\nparams 1\nH[3,1] = l1\n")
    with pytest.raises(ParseError, match="unrecognized"):
        parse_model("dim 2\nparams 1\nH[1,1] := l1\n")
    with pytest.raises(ParseError, match="malformed 'dim'"):
        parse_model("dim two\nparams 1\n")


def test_bundled_spin_half_matches_analytic():
    fam = load_bundled_model("spin_half")
    ref = spin_half_family()
    rng = np.random.default_rng(0)
    for _ in range(5):
        lam = rng.normal(size=3)
        assert np.max(np.abs(fam(lam) - ref(lam))) < 1e-14


def test_bundled_pt_two_level_matches_analytic():
    fam = load_bundled_model("pt_two_level")
    ref = pt_two_level_family()
    rng = np.random.default_rng(1)
    for _ in range(5):
        lam = rng.normal(size=2)
        assert np.max(np.abs(fam(lam) - ref(lam))) < 1e-14
