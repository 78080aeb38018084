"""Mixed norms of A^{p,q}_omega, Hardy norms, the Littlewood-Paley proxy,
L^{inf,q}_omega quantities and block sup norms.

Radial integrals run over the cells of r_k = 1 - 2^(-k/8), k = 0..radial_nodes,
with Gauss-Legendre nodes inside each cell. The piece [r_max, 1) is replaced
by M^q(r_max) * tail(r_max), and the bound tail(r_max) * M^q(1) is reported.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from mnlab.means import OVERSAMPLE, _golden_max, lq_norm
from mnlab.sequences import DoubleIndexSeq, conjugate, lpq_norm
from mnlab.series import PowerSeries, derivative, effective_degree, pow2_at_least
from mnlab.weights import RadialWeight, r_grid, require_doubling

RADIAL_NODES = 160
CELL_ORDER = 6
NODES_PER_OCTAVE = 8
_FFT_BATCH = 1 << 22


# -- exponent bookkeeping ---------------------------------------------------------


def _inv(x: float) -> float:
    return 0.0 if math.isinf(x) else 1.0 / x


def _from_inv(v: float) -> float:
    return math.inf if v == 0 else 1.0 / v


@dataclass(frozen=True)
class ExponentProfile:
    """Exponents of T: A^{p,q} -> A^{s,t} with the derived signed p~, q~.

    1/p~ = 1/s - 1/p and 1/q~ = 1/t - 1/q may be negative; ``inv_pt`` and
    ``inv_qt`` carry them, and p~ = inf stands for 1/p~ = 0.
    """

    p: float
    q: float
    s: float
    t: float

    def __post_init__(self):
        for name in ("p", "q", "s", "t"):
            if not getattr(self, name) > 0:
                raise ValueError(f"exponent {name} must be positive")

    @property
    def inv_pt(self) -> float:
        return _inv(self.s) - _inv(self.p)

    @property
    def inv_qt(self) -> float:
        return _inv(self.t) - _inv(self.q)

    @property
    def p_tilde(self) -> float:
        return _from_inv(self.inv_pt)

    @property
    def q_tilde(self) -> float:
        return _from_inv(self.inv_qt)

    @property
    def case(self) -> str:
        lo_p = self.p <= self.s
        lo_q = self.q <= self.t
        return {(True, True): "a", (False, True): "b", (True, False): "c", (False, False): "d"}[(lo_p, lo_q)]

    @property
    def multiplier_exponents(self) -> tuple[float, float]:
        """(s (p/s)', t (q/t)')."""
        return self.s * conjugate(self.p / self.s), self.t * conjugate(self.q / self.t)

    def to_dict(self) -> dict:
        return {
            "p": self.p, "q": self.q, "s": self.s, "t": self.t, "case": self.case,
            "p_tilde": self.p_tilde, "q_tilde": self.q_tilde,
            "multiplier_exponents": list(self.multiplier_exponents),
        }


@dataclass(frozen=True)
class BlockGrid:
    """Polar blocks Q_{j,l}: r_{j-1} <= |z| < r_j, arg z in the l-th of K^(j+2) arcs."""

    K: int
    j_max: int

    def __post_init__(self):
        if self.K < 2 or self.j_max < 1:
            raise ValueError("need K >= 2 and j_max >= 1")

    @property
    def radii(self) -> np.ndarray:
        return r_grid(self.K, self.j_max)

    def arcs(self, j: int) -> int:
        return self.K ** (j + 2)

    def ring_area(self, j: int) -> float:
        r = self.radii
        return math.pi * (r[j] ** 2 - r[j - 1] ** 2)

    def block_areas(self, j: int) -> np.ndarray:
        # integral of r dr dtheta over each polar rectangle
        r = self.radii
        n = self.arcs(j)
        return np.full(n, 0.5 * (r[j] ** 2 - r[j - 1] ** 2) * 2 * math.pi / n)


# -- radial quadrature ------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def radial_rule(radial_nodes: int = RADIAL_NODES, order: int = CELL_ORDER) -> tuple[np.ndarray, np.ndarray, float]:
    """Nodes and weights of the cell-wise Gauss rule on [0, r_max), and r_max."""
    if radial_nodes < 1:
        raise ValueError("radial_nodes must be positive")
    edges = 1.0 - 2.0 ** (-np.arange(radial_nodes + 1) / NODES_PER_OCTAVE)
    t, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * (t[None, :] + 1) + a).ravel()
    weights = (0.5 * (b - a) * w[None, :]).ravel()
    return nodes, weights, float(edges[-1])


def means_at(f: PowerSeries, radii, p: float, oversample: int = 1) -> np.ndarray:
    """M_p(r, f) for every r in ``radii`` (batched transforms, Parseval for p = 2)."""
    radii = np.asarray(radii, dtype=float)
    if not p > 0:
        raise ValueError("p must be positive")
    if p == 2:
        c2 = np.abs(f.coeffs) ** 2
        # Horner in r^2 with nonnegative coefficients is stable
        return np.sqrt(np.polynomial.polynomial.polyval(radii**2, c2))
    out = np.empty(radii.size)
    sizes = np.array([
        pow2_at_least(max(64, oversample * OVERSAMPLE * (effective_degree(f, float(r)) + 1))) for r in radii
    ])
    for n in np.unique(sizes):
        idx = np.flatnonzero(sizes == n)
        batch = max(1, _FFT_BATCH // int(n))
        for start in range(0, idx.size, batch):
            sel = idx[start:start + batch]
            rs = radii[sel]
            pw = np.power(rs[:, None], np.arange(f.degree + 1)[None, :])
            coeffs = f.coeffs[None, :] * pw
            if coeffs.shape[1] > n:
                folded = np.zeros((sel.size, int(n)), dtype=np.complex128)
                for k0 in range(0, coeffs.shape[1], int(n)):
                    chunk = coeffs[:, k0:k0 + int(n)]
                    folded[:, : chunk.shape[1]] += chunk
                coeffs = folded
            vals = np.abs(n * np.fft.ifft(coeffs, n=int(n), axis=1))
            if math.isinf(p):
                k = vals.argmax(axis=1)
                h = 2 * np.pi / n
                th0 = h * k
                best = _golden_max(lambda th: np.abs(f(rs * np.exp(1j * th))), th0 - h, th0 + h)
                out[sel] = np.maximum(vals.max(axis=1), best)
            else:
                top = vals.max(axis=1)
                safe = np.where(top > 0, top, 1.0)
                out[sel] = np.where(top > 0, safe * np.mean((vals / safe[:, None]) ** p, axis=1) ** (1 / p), 0.0)
    return out


@dataclass(frozen=True)
class RadialIntegral:
    """int_0^1 M_p^q(r, f) (1 - r)^power omega(r) dr with its truncation data."""

    value: float
    body: float
    tail_estimate: float
    tail_bound: float
    r_max: float
    divergent: bool = False

    def root(self, q: float) -> float:
        return self.value ** (1 / q) if not self.divergent else math.inf


def _octave_sums(contrib: np.ndarray, order: int) -> np.ndarray:
    per = NODES_PER_OCTAVE * order
    usable = contrib.size // per * per
    return contrib[:usable].reshape(-1, per).sum(axis=1)


def radial_integral(
    f: PowerSeries,
    p: float,
    q: float,
    w: RadialWeight,
    power: float = 0.0,
    radial_nodes: int = RADIAL_NODES,
    order: int = CELL_ORDER,
    oversample: int = 1,
) -> RadialIntegral:
    """Radial integral of M_p^q(r, f) (1 - r)^power omega(r).

    For power = 0 the remainder on [r_max, 1) is M^q(r_max) tail(r_max), which
    underestimates it by at most tail(r_max) (M^q(1) - M^q(r_max)). For other
    powers the remainder uses the integral of (1 - r)^power omega in closed
    form when the weight is standard and a geometric extrapolation of the
    octave contributions otherwise. ``divergent`` is set when those octave
    contributions stop decaying.
    """
    if not (q > 0 and not math.isinf(q)):
        raise ValueError("q must be positive and finite")
    nodes, weights, r_max = radial_rule(radial_nodes, order)
    m = means_at(f, nodes, p, oversample)
    contrib = m**q * (1 - nodes) ** power * w.density(nodes) * weights
    body = float(contrib.sum())
    m_max = float(means_at(f, [r_max], p, oversample)[0])
    m_one = float(means_at(f, [1.0], p, oversample)[0])
    divergent = False
    if power == 0:
        tail_w = float(w.tail(r_max))
        tail_est = m_max**q * tail_w
        tail_bound = (m_one**q - m_max**q) * tail_w
    else:
        octaves = _octave_sums(contrib, order)
        last = octaves[-4:]
        ratio = float(np.mean(last[1:] / np.where(last[:-1] > 0, last[:-1], 1.0))) if last[-1] > 0 else 0.0
        if ratio >= 0.97 and last[-1] > 1e-14 * max(body, 1e-300):
            divergent = True
            tail_est = tail_bound = math.inf
        else:
            tail_est = float(last[-1] * ratio / (1 - ratio)) if ratio > 0 else 0.0
            tail_bound = tail_est * max(1.0, (m_one / m_max) ** q if m_max > 0 else 1.0)
    value = body + tail_est
    return RadialIntegral(value if not divergent else math.inf, body, tail_est, tail_bound, r_max, divergent)


# -- norms -----------------------------------------------------------------------


def apq_norm(f: PowerSeries, p: float, q: float, w: RadialWeight, radial_nodes: int = RADIAL_NODES, oversample: int = 1) -> float:
    """(int_0^1 M_p^q(r, f) omega(r) dr)^(1/q)."""
    if radial_nodes < 64:
        raise ValueError("radial_nodes must be at least 64")
    return radial_integral(f, p, q, w, 0.0, radial_nodes, oversample=oversample).root(q)


def apq_report(f: PowerSeries, p: float, q: float, w: RadialWeight, radial_nodes: int = RADIAL_NODES) -> RadialIntegral:
    return radial_integral(f, p, q, w, 0.0, radial_nodes)


def hp_norm(f: PowerSeries, p: float, radial_steps: int = 64) -> float:
    """sup_r M_p(r, f); M_p(1, f) for p >= 1, a refining radial max otherwise."""
    if p >= 1:
        return float(means_at(f, [1.0], p)[0])
    radii = np.concatenate([1 - 2.0 ** -np.arange(radial_steps, dtype=float), [1.0]])
    return float(means_at(f, radii, p).max())


def littlewood_paley_norm(
    f: PowerSeries, p: float, q: float, w: RadialWeight, radial_nodes: int = RADIAL_NODES, check: bool = True, oversample: int = 1
) -> float:
    """(int M_p^q(r, f') (1 - r)^q omega(r) dr + |f(0)|^q)^(1/q)."""
    if check:
        require_doubling(w)
    df = derivative(f, 1)
    body = 0.0 if df.is_zero() else radial_integral(df, p, q, w, q, radial_nodes, oversample=oversample).value
    return (body + abs(f.coeffs[0]) ** q) ** (1 / q)


@dataclass(frozen=True)
class LinfReport:
    value: float
    divergent: bool
    tail_estimate: float


def linf_q_norm(series: PowerSeries, power: float, q_tilde: float, w: RadialWeight, radial_nodes: int = RADIAL_NODES) -> LinfReport:
    """(int_0^1 M_inf^{q~}(r, series) (1 - r)^{power q~} omega(r) dr)^(1/q~)."""
    if not (q_tilde > 0 and not math.isinf(q_tilde)):
        raise ValueError("q_tilde must be positive and finite")
    if series.is_zero():
        return LinfReport(0.0, False, 0.0)
    res = radial_integral(series, math.inf, q_tilde, w, power * q_tilde, radial_nodes)
    if res.divergent:
        return LinfReport(math.inf, True, math.inf)
    return LinfReport(res.value ** (1 / q_tilde), False, res.tail_estimate)


# -- block sup norms -------------------------------------------------------------


def _eval(f: PowerSeries, z: np.ndarray) -> np.ndarray:
    return f(z)


def block_sups(f: PowerSeries, grid: BlockGrid, j: int, sub: int = 3) -> np.ndarray:
    """Sampled sup |f| over each block of ring j.

    Each block is sampled on a sub x sub grid including its corners and
    centre; the best sample's neighbourhood is then resampled once.
    """
    r = grid.radii
    n = grid.arcs(j)
    lo, hi = r[j - 1], r[j]
    dr, dth = hi - lo, 2 * np.pi / n
    u = np.linspace(0.0, 1.0, sub)
    rad = lo + dr * u
    th = dth * (np.arange(n)[:, None] + u[None, :])
    z = rad[None, :, None] * np.exp(1j * th)[:, None, :]
    vals = np.abs(_eval(f, z)).reshape(n, -1)
    best = vals.max(axis=1)
    k = vals.argmax(axis=1)
    ir, it = np.unravel_index(k, (sub, sub))
    h_r, h_t = dr / (sub - 1), dth / (sub - 1)
    cr = np.clip(rad[ir][:, None] + h_r * (u[None, :] - 0.5), lo, hi)
    ct = th[np.arange(n), it][:, None] + h_t * (u[None, :] - 0.5)
    ct = np.clip(ct, dth * np.arange(n)[:, None], dth * (np.arange(n)[:, None] + 1))
    z2 = cr[:, :, None] * np.exp(1j * ct)[:, None, :]
    vals2 = np.abs(_eval(f, z2)).reshape(n, -1)
    return np.maximum(best, vals2.max(axis=1))


def block_sup_sequence(f: PowerSeries, n: int, grid: BlockGrid, p: float, q: float, w: RadialWeight) -> DoubleIndexSeq:
    """{ sup_{Q_{j,l}} |f^(n)| K^(-j(n + 1/p)) tail(r_j)^(1/q) }."""
    df = derivative(f, n)
    r = grid.radii
    K = grid.K
    rows = []
    for j in range(1, grid.j_max + 1):
        factor = float(K) ** (-j * (n + 1 / p)) * w.tail(float(r[j])) ** (1 / q)
        rows.append(factor * block_sups(df, grid, j))
    return DoubleIndexSeq(K, tuple(rows))


def block_sup_norm(f: PowerSeries, n: int, grid: BlockGrid, p: float, q: float, w: RadialWeight) -> float:
    return lpq_norm(block_sup_sequence(f, n, grid, p, q, w), p, q)


__all__ = [
    "ExponentProfile", "BlockGrid", "RadialIntegral", "LinfReport", "radial_rule", "means_at", "radial_integral",
    "apq_norm", "apq_report", "hp_norm", "littlewood_paley_norm", "linf_q_norm", "block_sups",
    "block_sup_sequence", "block_sup_norm", "lq_norm",
]
