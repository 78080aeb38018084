"""The fixed test corpus and a small text schema for power series."""
from __future__ import annotations

import numpy as np

from mnlab.series import PowerSeries, lacunary_series

RANDOM_SEED = 20240917


def random_polynomial(degree: int, seed: int) -> PowerSeries:
    """Complex Gaussian coefficients scaled by 1/sqrt(degree + 1)."""
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    return PowerSeries(c / np.sqrt(2 * (degree + 1)))


def _corpus_specs() -> list[tuple[str, dict]]:
    return [
        ("const_1", {"kind": "constant", "value": 1.0}),
        ("const_2-i", {"kind": "constant", "value": [2.0, -1.0]}),
        ("z", {"kind": "monomial", "n": 1}),
        ("z^2", {"kind": "monomial", "n": 2}),
        ("z^4", {"kind": "monomial", "n": 4}),
        ("z^16", {"kind": "monomial", "n": 16}),
        ("z^64", {"kind": "monomial", "n": 64}),
        ("1+z", {"kind": "coeffs", "coeffs": [1.0, 1.0]}),
        ("geom_64", {"kind": "geometric", "degree": 64, "order": 1}),
        ("geom_256", {"kind": "geometric", "degree": 256, "order": 1}),
        ("geom2_64", {"kind": "geometric", "degree": 64, "order": 2}),
        ("geom2_256", {"kind": "geometric", "degree": 256, "order": 2}),
        ("lac_0_6", {"kind": "lacunary", "k0": 0, "m": 6}),
        ("lac_3_5_harm", {"kind": "lacunary", "k0": 3, "m": 5, "coeffs": [1, 1 / 2, 1 / 3, 1 / 4, 1 / 5]}),
        ("lac_4_9", {"kind": "lacunary", "k0": 4, "m": 9}),
        ("log_256", {"kind": "log_kernel", "degree": 256}),
        ("rand_8", {"kind": "random", "degree": 8, "seed": RANDOM_SEED}),
        ("rand_32", {"kind": "random", "degree": 32, "seed": RANDOM_SEED + 1}),
        ("rand_64", {"kind": "random", "degree": 64, "seed": RANDOM_SEED + 2}),
        ("rand_128", {"kind": "random", "degree": 128, "seed": RANDOM_SEED + 3}),
    ]


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("complex numbers are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def series_from_dict(d: dict) -> PowerSeries:
    """Build a series from its text description.

    kinds: constant(value), monomial(n, coeff), coeffs(coeffs), geometric(degree,
    order), lacunary(k0, m, coeffs), log_kernel(degree), random(degree, seed),
    corpus(name). Complex numbers are [re, im] pairs or plain reals.
    """
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("series description needs a 'kind'")
    kind = d["kind"]
    if kind == "constant":
        return PowerSeries.constant(_complex(d.get("value", 1.0)))
    if kind == "monomial":
        return PowerSeries.monomial(int(d["n"]), _complex(d.get("coeff", 1.0)))
    if kind == "coeffs":
        return PowerSeries([_complex(c) for c in d["coeffs"]])
    if kind == "geometric":
        return PowerSeries.geometric(int(d["degree"]), int(d.get("order", 1)))
    if kind == "lacunary":
        coeffs = d.get("coeffs")
        return lacunary_series(int(d["k0"]), int(d["m"]), None if coeffs is None else [_complex(c) for c in coeffs])
    if kind == "log_kernel":
        return PowerSeries.log_kernel(int(d["degree"]))
    if kind == "random":
        return random_polynomial(int(d["degree"]), int(d.get("seed", RANDOM_SEED)))
    if kind == "corpus":
        return corpus_function(str(d["name"]))
    raise ValueError(f"unknown series kind {kind!r}")


def corpus() -> list[tuple[str, PowerSeries]]:
    """The 20 named test functions, in a fixed order."""
    return [(name, series_from_dict(spec)) for name, spec in _corpus_specs()]


def corpus_names() -> list[str]:
    return [name for name, _ in _corpus_specs()]


def corpus_function(name: str) -> PowerSeries:
    for key, spec in _corpus_specs():
        if key == name:
            return series_from_dict(spec)
    raise ValueError(f"unknown corpus function {name!r}")


def select(selector) -> list[tuple[str, PowerSeries]]:
    """'all', a list of names, or a list of series descriptions."""
    if selector in (None, "all"):
        return corpus()
    if isinstance(selector, str):
        return [(selector, corpus_function(selector))]
    out = []
    for i, item in enumerate(selector):
        if isinstance(item, str):
            out.append((item, corpus_function(item)))
        else:
            out.append((str(item.get("name", f"f{i}")), series_from_dict(item)))
    return out
