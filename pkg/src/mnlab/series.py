"""Truncated power series on the unit disc and the special test-function families.

Every analytic function in the package is carried by a :class:`PowerSeries`,
a finite vector of Taylor coefficients. All operations are pure and return
new objects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import signal

DEFAULT_MAX_DEGREE = 1024
LACUNARY_DEGREE_BUDGET = 2**24

# np.convolve is exact enough and faster below this many multiply-adds
_DIRECT_CONVOLVE_LIMIT = 2_000_000
_EVAL_BATCH = 1 << 20


def floor_e(x: float) -> int:
    """Integer part E(x) with E(x) <= x < E(x) + 1.

    Values within a few ulps of an integer are snapped to it, so that
    ``floor_e(1 / (1 - 0.9))`` is 10 and not 9.
    """
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * max(1.0, abs(x)):
        return int(nearest)
    return math.floor(x)


def pow2_at_least(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Analytic function on the disc given by its first ``degree + 1`` Taylor coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size == 0:
            c = np.zeros(1, dtype=np.complex128)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, c: complex) -> "PowerSeries":
        return cls([c])

    @classmethod
    def monomial(cls, n: int, c: complex = 1.0) -> "PowerSeries":
        coeffs = np.zeros(n + 1, dtype=np.complex128)
        coeffs[n] = c
        return cls(coeffs)

    @classmethod
    def geometric(cls, degree: int, order: int = 1) -> "PowerSeries":
        """Truncation of ``(1 - z)^(-order)``: coefficients binom(m + order - 1, m)."""
        m = np.arange(degree + 1, dtype=float)
        coeffs = np.ones(degree + 1)
        for k in range(1, order):
            coeffs = coeffs * (m + k) / k
        return cls(coeffs)

    @classmethod
    def log_kernel(cls, degree: int) -> "PowerSeries":
        """Truncation of ``log(1 / (1 - z)) = sum z^m / m``."""
        coeffs = np.zeros(degree + 1)
        coeffs[1:] = 1.0 / np.arange(1, degree + 1)
        return cls(coeffs)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        flat = z.ravel()
        out = np.empty(flat.size, dtype=np.complex128)
        step = max(1, _EVAL_BATCH // (self.degree + 1))
        for i in range(0, flat.size, step):
            chunk = flat[i:i + step]
            pw = np.empty((chunk.size, self.degree + 1), dtype=np.complex128)
            pw[:, 0] = 1.0
            pw[:, 1:] = chunk[:, None]
            out[i:i + step] = np.cumprod(pw, axis=1) @ self.coeffs
        out = out.reshape(z.shape)
        return out if out.ndim else complex(out)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=np.complex128)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return PowerSeries(out)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "PowerSeries":
        return PowerSeries(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "PowerSeries":
        return (-1.0) * self

    def __repr__(self) -> str:
        return f"PowerSeries(degree={self.degree})"

    def trimmed(self) -> "PowerSeries":
        """Drop trailing zero coefficients."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return PowerSeries([0.0])
        return PowerSeries(self.coeffs[: nz[-1] + 1])

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def abs_sum(self) -> float:
        """Upper bound for sup |f| on the closed disc."""
        return float(np.abs(self.coeffs).sum())


@dataclass(frozen=True)
class CircleSamples:
    radius: float
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def thetas(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n


def default_sample_count(f: PowerSeries) -> int:
    return pow2_at_least(2 * f.degree + 1)


def _check_radius(r: float) -> None:
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"radius must lie in [0, 1], got {r}")


def effective_degree(f: PowerSeries, r: float, rtol: float = 1e-17) -> int:
    """Smallest d such that the coefficient tail beyond d is negligible at radius r."""
    if r >= 1.0 or f.degree == 0:
        return f.degree
    w = np.abs(f.coeffs) * _powers(r, f.degree)
    total = w.sum()
    if total == 0.0:
        return 0
    tail = np.cumsum(w[::-1])[::-1]
    keep = np.flatnonzero(tail > rtol * total)
    return int(keep[-1]) if keep.size else 0


def _powers(r: float, degree: int) -> np.ndarray:
    if r == 0.0:
        out = np.zeros(degree + 1)
        out[0] = 1.0
        return out
    return np.exp(np.arange(degree + 1) * math.log(r))


def scaled_samples(coeffs: np.ndarray, r: float, n: int) -> np.ndarray:
    """Values of sum c_m r^m e^{i m theta_k} on the n-point uniform circle grid.

    Coefficients beyond n are folded modulo n, which is exact for the samples.
    """
    c = coeffs * _powers(r, coeffs.size - 1)
    if c.size > n:
        folded = np.zeros(n, dtype=np.complex128)
        idx = np.arange(c.size) % n
        folded.real = np.bincount(idx, weights=c.real, minlength=n)
        folded.imag = np.bincount(idx, weights=c.imag, minlength=n)
        c = folded
    else:
        c = np.concatenate([c, np.zeros(n - c.size, dtype=np.complex128)])
    return n * np.fft.ifft(c)


def evaluate_on_circle(f: PowerSeries, r: float, n: int | None = None) -> CircleSamples:
    """Sample f on the circle of radius r at the points 2*pi*k/n."""
    _check_radius(r)
    if n is None:
        n = default_sample_count(f)
    if n < 1:
        raise ValueError("sample count must be positive")
    return CircleSamples(float(r), scaled_samples(f.coeffs, r, int(n)))


def derivative(f: PowerSeries, n: int = 1) -> PowerSeries:
    if n < 0:
        raise ValueError("derivative order must be nonnegative")
    if n == 0:
        return f
    if f.degree < n:
        return PowerSeries([0.0])
    m = np.arange(f.degree + 1 - n, dtype=float)
    factor = np.ones_like(m)
    for k in range(1, n + 1):
        factor *= m + k
    return PowerSeries(f.coeffs[n:] * factor)


def primitive(f: PowerSeries) -> PowerSeries:
    """The antiderivative vanishing at the origin."""
    out = np.zeros(f.degree + 2, dtype=np.complex128)
    out[1:] = f.coeffs / np.arange(1, f.degree + 2)
    return PowerSeries(out)


def cauchy_product(f: PowerSeries, g: PowerSeries, max_degree: int | None = None) -> PowerSeries:
    """Coefficients of f*g up to ``max_degree`` (full product when None)."""
    if max_degree is None:
        max_degree = f.degree + g.degree
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    a = f.coeffs[: max_degree + 1]
    b = g.coeffs[: max_degree + 1]
    if a.size * b.size <= _DIRECT_CONVOLVE_LIMIT:
        prod = np.convolve(a, b)
    else:
        prod = signal.fftconvolve(a, b)
    prod = prod[: max_degree + 1]
    if prod.size < max_degree + 1:
        prod = np.concatenate([prod, np.zeros(max_degree + 1 - prod.size)])
    return PowerSeries(prod)


def lacunary_exponents(k0: int, m: int) -> list[int]:
    return [2 ** (k0 + k) for k in range(m)]


def lacunary_series(
    k0: int,
    m: int,
    coeffs: Sequence[complex] | None = None,
    max_degree: int = LACUNARY_DEGREE_BUDGET,
) -> PowerSeries:
    """Hadamard-gap series with exponents 2^k0, ..., 2^(k0+m-1)."""
    if k0 < 0 or m < 1:
        raise ValueError("need k0 >= 0 and m >= 1")
    if coeffs is None:
        coeffs = np.ones(m)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.size != m:
        raise ValueError(f"expected {m} coefficients, got {coeffs.size}")
    top = 2 ** (k0 + m - 1)
    if top > max_degree:
        raise ValueError(f"top exponent {top} exceeds the degree budget {max_degree}")
    out = np.zeros(top + 1, dtype=np.complex128)
    out[lacunary_exponents(k0, m)] = coeffs
    return PowerSeries(out)


# -- atoms ------------------------------------------------------------------


def ring_radii(K: int, j: int) -> tuple[float, float]:
    return 1.0 - float(K) ** (-(j - 1)), 1.0 - float(K) ** (-j)


def atom_center(K: int, j: int, l: int) -> complex:
    """Midpoint of the polar block Q_{j,l}."""
    lo, hi = ring_radii(K, j)
    n = K ** (j + 2)
    return 0.5 * (lo + hi) * np.exp(2j * np.pi * (l + 0.5) / n)


def atom_centers(K: int, j_max: int) -> list[tuple[int, int, complex]]:
    return [(j, l, atom_center(K, j, l)) for j in range(1, j_max + 1) for l in range(K ** (j + 2))]


def pseudohyperbolic(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return np.abs((a - b) / (1 - np.conj(a) * b))


def min_separation(points: Iterable[complex]) -> float:
    pts = np.fromiter(points, dtype=np.complex128)
    if pts.size < 2:
        return math.inf
    d = pseudohyperbolic(pts[:, None], pts[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


@dataclass(frozen=True)
class AtomSpec:
    """Normalized kernel power centred at ``center``.

    ``weight`` is a :class:`mnlab.weights.RadialWeight`; ``index`` the (j, l)
    label of the centre on the block grid, when it comes from one.
    """

    center: complex
    M: float
    p: float
    q: float
    weight: object
    index: tuple[int, int] | None = None
    normalize: bool = True

    def scale(self) -> float:
        if not self.normalize:
            return 1.0
        rad = abs(self.center)
        return (1 - rad) ** (self.M - 1 / self.p) * self.weight.tail(rad) ** (-1 / self.q)

    def kernel(self, z):
        return (1 - np.conj(self.center) * np.asarray(z)) ** (-self.M)


def atom_threshold(weight, p: float, q: float) -> float:
    from mnlab.weights import lemma_a_constants

    consts = lemma_a_constants(weight)
    return 1 + 1 / p + (consts.alpha0 + consts.lam) / q


def atom_degree(center: complex, M: float, cap: int = 8192, digits: float = 40.0) -> int:
    """Truncation degree after which the kernel coefficients are negligible."""
    rad = abs(center)
    if rad == 0:
        return 0
    need = (M + digits) / -math.log(rad)
    return int(min(cap, pow2_at_least(int(math.ceil(need)))))


def kernel_coeffs(center: complex, M: float, degree: int) -> np.ndarray:
    """Coefficients of (1 - conj(w) z)^(-M) by the ratio recurrence."""
    w = np.conj(center)
    m = np.arange(1, degree + 1, dtype=float)
    ratios = (M + m - 1) / m
    out = np.empty(degree + 1, dtype=np.complex128)
    out[0] = 1.0
    if degree:
        # cumulative product of ratio * w keeps every term in range
        out[1:] = np.cumprod(ratios * w)
    return out


def atom_function(spec: AtomSpec, max_degree: int | None = None, check_threshold: bool = True) -> PowerSeries:
    if check_threshold:
        thr = atom_threshold(spec.weight, spec.p, spec.q)
        if spec.M <= thr:
            raise ValueError(f"atom exponent M={spec.M} must exceed {thr:.4f}")
    if max_degree is None:
        max_degree = atom_degree(spec.center, spec.M)
    return PowerSeries(spec.scale() * kernel_coeffs(spec.center, spec.M, max_degree))


@dataclass(frozen=True)
class SignPattern:
    """Seeded Rademacher signs, one row per ring."""

    seed: int
    rows: tuple = field(default=())

    @classmethod
    def random(cls, row_lengths: Sequence[int], seed: int, first_ring: int = 1) -> "SignPattern":
        rng = np.random.default_rng(seed)
        rows = tuple(rng.choice(np.array([-1, 1]), size=n) for n in row_lengths)
        return cls(seed, rows)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        j, l = idx
        return int(self.rows[j - 1][l])

    def indices(self) -> set[tuple[int, int]]:
        return {(j + 1, l) for j, row in enumerate(self.rows) for l in range(len(row))}


def rademacher_combination(atoms: Sequence[AtomSpec], a, signs: SignPattern, max_degree: int | None = None) -> PowerSeries:
    """Signed sum  sum a_{j,l} r_{j,l} atom_{j,l}.

    ``a`` is any object indexable by (j, l) exposing ``indices()``; usually a
    :class:`mnlab.carleson.DoubleIndexSeq`.
    """
    idx = [s.index for s in atoms]
    if any(i is None for i in idx) or len(set(idx)) != len(idx):
        raise ValueError("every atom needs a distinct (j, l) index")
    if set(idx) != set(a.indices()) or set(idx) != signs.indices():
        raise ValueError("index sets of atoms, coefficients and signs differ")
    for M, p, q, weight in {(s.M, s.p, s.q, s.weight) for s in atoms if s.normalize}:
        thr = atom_threshold(weight, p, q)
        if M <= thr:
            raise ValueError(f"atom exponent M={M} must exceed {thr:.4f}")
    if max_degree is None:
        max_degree = max(atom_degree(s.center, s.M) for s in atoms)
    out = np.zeros(max_degree + 1, dtype=np.complex128)
    for spec in atoms:
        coef = a[spec.index] * signs[spec.index]
        if coef == 0:
            continue
        out += coef * atom_function(spec, max_degree, check_threshold=False).coeffs
    return PowerSeries(out)
