import numpy as np
import pytest

from mnlab.corpus import corpus, corpus_function, corpus_names, random_polynomial, select, series_from_dict


def test_corpus_has_twenty_distinct_functions():
    items = corpus()
    assert len(items) == 20
    assert len(set(corpus_names())) == 20
    # constants, monomials, both kernel truncations, lacunary and seeded random polynomials
    for prefix in ("const_", "z^", "geom_", "geom2_", "lac_", "rand_", "log_"):
        assert any(name.startswith(prefix) for name, _ in items), prefix


def test_corpus_contents():
    assert corpus_function("z^64").degree == 64
    g2 = corpus_function("geom2_64").coeffs.real
    assert np.array_equal(g2, np.arange(1, 66))
    lac = corpus_function("lac_0_6")
    assert np.flatnonzero(lac.coeffs).tolist() == [1, 2, 4, 8, 16, 32]


def test_corpus_is_reproducible():
    a = dict(corpus())
    b = dict(corpus())
    for name in a:
        assert np.array_equal(a[name].coeffs, b[name].coeffs)
    assert not np.array_equal(random_polynomial(8, 1).coeffs, random_polynomial(8, 2).coeffs)


def test_series_descriptions():
    assert series_from_dict({"kind": "constant", "value": [2, -1]}).coeffs[0] == 2 - 1j
    assert np.allclose(series_from_dict({"kind": "coeffs", "coeffs": [1, [0, 1]]}).coeffs, [1, 1j])
    assert series_from_dict({"kind": "monomial", "n": 3, "coeff": 2}).coeffs[3] == 2
    assert np.array_equal(series_from_dict({"kind": "corpus", "name": "z"}).coeffs, [0, 1])
    for bad in ({"kind": "spline"}, {}, {"kind": "constant", "value": [1, 2, 3]}):
        with pytest.raises(ValueError):
            series_from_dict(bad)


def test_select():
    assert len(select("all")) == 20
    assert [n for n, _ in select(["z", {"kind": "monomial", "n": 2, "name": "sq"}])] == ["z", "sq"]
    with pytest.raises(ValueError):
        select(["nope"])
