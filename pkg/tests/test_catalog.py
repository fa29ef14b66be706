import pytest

from dpat import formula as fm
from dpat.catalog import CATALOG_NAMES, catalog_lookup
from dpat.errors import UnknownCatalogEntry
from dpat.evaluate import evaluate
from dpat.finfield import make_field


def test_fixed_texts():
    assert catalog_lookup("squares").formula == fm.parse("E y (y*y = x)")
    assert catalog_lookup("paley2").formula == fm.parse("E z (~(z = 0) & z*z = x - y)")
    assert catalog_lookup("paley2").arity == 2


def test_unknown():
    with pytest.raises(UnknownCatalogEntry):
        catalog_lookup("nosuch")
    with pytest.raises(ValueError):
        catalog_lookup("squares:3")


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_every_entry_evaluates(name):
    entry = catalog_lookup(name)
    s = evaluate(entry.formula, make_field(7, 1), free=entry.free)
    assert s.arity == entry.arity
    assert fm.parse(entry.text) == entry.formula


@pytest.mark.parametrize("p", [7, 11, 13])
def test_dth_powers_match_image(p):
    F = make_field(p, 1)
    for d in (1, 2, 3, 4):
        a = catalog_lookup(f"dth-powers:{d}")
        b = catalog_lookup("dth-powers", d=d)
        assert a == b
        got = set(evaluate(a.formula, F, free=a.free).elements())
        assert got == {pow(y, d, p) for y in range(p)}


def test_polynomial_image():
    F = make_field(11, 1)
    e = catalog_lookup("polynomial-image:1,0,2")
    assert set(evaluate(e.formula, F, free=e.free).elements()) == {(1 + 2 * y * y) % 11 for y in range(11)}
    const = catalog_lookup("polynomial-image", coeffs=[3])
    assert set(evaluate(const.formula, F, free=const.free).elements()) == {3}
    with pytest.raises(ValueError):
        catalog_lookup("polynomial-image:")


def test_residue_moduli():
    assert catalog_lookup("cubes").residue_modulus == 3
    assert catalog_lookup("dth-powers:5").residue_modulus == 5
    assert catalog_lookup("full").residue_modulus is None
