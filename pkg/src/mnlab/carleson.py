"""Double-index sequence norms, multipliers between them, discrete
characterising sequences and both sides of the Carleson-type inequality.

Measures are restricted to computable representations: the angular measure
at radius r is normalised Lebesgue measure, |G(r e^{it})|^s dt / 2 pi for a
power series G, or radius bands each carrying point masses plus a piecewise
constant density. The radial measure is a RadialWeight or a list of atoms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mnlab.means import abs_samples, arc_means, lq_norm
from mnlab.mixed_norm import ExponentProfile, radial_integral
from mnlab.sequences import DoubleIndexSeq, conjugate, lpq_norm
from mnlab.series import PowerSeries, cauchy_product, derivative, pow2_at_least
from mnlab.weights import RadialWeight, r_grid, require_doubling, weight_from_dict

TWO_PI = 2 * math.pi
RING_ORDER = 12

__all__ = [
    "DoubleIndexSeq", "lpq_norm", "conjugate", "multiplier_exponents", "multiplier_extremizer",
    "multiplier_norm_bruteforce", "DiscreteNorm", "tg_discrete_seq", "sg_discrete_seq", "g_nu_discrete_seq",
    "AngularMeasure", "MeasureSpec", "carleson_discrete_lhs", "carleson_continuous_lhs", "measure_continuous_lhs",
]


# -- multipliers -----------------------------------------------------------------


def multiplier_exponents(profile: ExponentProfile) -> tuple[float, float]:
    """(s (p/s)', t (q/t)'): the exponents of the multiplier space."""
    return profile.multiplier_exponents


def _holder_vector(b: np.ndarray, outer: float, inner: float) -> np.ndarray:
    """Unit-free vector a maximising ||a b||_inner / ||a||_outer for fixed b."""
    mag = np.abs(b)
    if mag.max() == 0:
        out = np.zeros_like(mag)
        out[0] = 1.0
        return out
    if outer <= inner:
        out = np.zeros_like(mag)
        out[int(np.argmax(mag))] = 1.0
        return out
    P = inner * outer / (outer - inner)
    return (mag / mag.max()) ** (P / outer)


def multiplier_extremizer(b: DoubleIndexSeq, profile: ExponentProfile) -> DoubleIndexSeq:
    """The generalised-Holder extremal sequence for the multiplier norm of b.

    Within a row, a_l ~ |b_l|^(P/p) when P = s (p/s)' is finite, otherwise a
    coordinate at the largest entry; rows are then weighted the same way
    with the exponents (q, t).
    """
    p, q, s, t = profile.p, profile.q, profile.s, profile.t
    P, _ = profile.multiplier_exponents
    rows = []
    row_vals = []
    for row in b.rows:
        a = _holder_vector(row, p, s)
        na = lq_norm(a, p)
        a = a / na if na > 0 else a
        rows.append(a)
        row_vals.append(lq_norm(a * np.abs(row), s))
    c = _holder_vector(np.array(row_vals), q, t)
    return DoubleIndexSeq(b.K, tuple(ci * r for ci, r in zip(c, rows)), b.first_ring)


def _ratio(a: DoubleIndexSeq, b: DoubleIndexSeq, profile: ExponentProfile) -> float:
    den = lpq_norm(a, profile.p, profile.q)
    if den == 0:
        return 0.0
    return lpq_norm(a * b, profile.s, profile.t) / den


def multiplier_norm_bruteforce(
    b: DoubleIndexSeq, profile: ExponentProfile, trials: int = 200, seed: int = 0, analytic: bool = True
) -> float:
    """Lower bound for ||b||_{[l^{p,q}, l^{s,t}]} by direct search.

    Candidates: every coordinate sequence, ``trials`` random nonnegative
    sequences (uniform entries, also raised to random powers to vary their
    concentration), a coordinate-ascent polish of the best one, and
    optionally the analytic Holder extremiser.
    """
    best = max(float(np.abs(r).max()) if r.size else 0.0 for r in b.rows)
    rng = np.random.default_rng(seed)
    top, top_val = None, -1.0
    for _ in range(trials):
        expo = rng.uniform(0.5, 4.0)
        a = DoubleIndexSeq(b.K, tuple(rng.random(r.size) ** expo for r in b.rows), b.first_ring)
        val = _ratio(a, b, profile)
        if val > top_val:
            top, top_val = a, val
    best = max(best, top_val)
    if top is not None:
        best = max(best, _polish(top, b, profile, rng))
    if analytic:
        best = max(best, _ratio(multiplier_extremizer(b, profile), b, profile))
    return best


def _polish(a: DoubleIndexSeq, b: DoubleIndexSeq, profile: ExponentProfile, rng, sweeps: int = 4) -> float:
    rows = [r.astype(float).copy() for r in a.rows]
    cur = _ratio(DoubleIndexSeq(a.K, tuple(rows), a.first_ring), b, profile)
    for _ in range(sweeps):
        for i, row in enumerate(rows):
            for l in rng.permutation(row.size):
                old = row[l]
                for factor in (0.0, 0.5, 2.0):
                    row[l] = old * factor if old > 0 else factor
                    val = _ratio(DoubleIndexSeq(a.K, tuple(rows), a.first_ring), b, profile)
                    if val > cur:
                        cur, old = val, row[l]
                row[l] = old
    return cur


# -- discrete characterising sequences -------------------------------------------


@dataclass(frozen=True)
class DiscreteNorm:
    """A discrete characterising sequence with its multiplier-space norm.

    ``row_norms`` are the l^P norms of the rows; ``tail_flag`` is set when
    the last rows stop decreasing, so truncation at j_max may hide mass.
    ``tail_estimate`` extrapolates the remaining rows geometrically.
    """

    seq: DoubleIndexSeq
    exponents: tuple[float, float]
    norm: float
    row_norms: np.ndarray
    tail_flag: bool
    tail_estimate: float

    def to_dict(self) -> dict:
        return {
            "norm": self.norm, "exponents": list(self.exponents), "row_norms": self.row_norms.tolist(),
            "tail_flag": self.tail_flag, "tail_estimate": self.tail_estimate,
        }


def _finish(seq: DoubleIndexSeq, profile: ExponentProfile) -> DiscreteNorm:
    P, Q = profile.multiplier_exponents
    rows = seq.row_norms(P)
    norm = lq_norm(rows, Q)
    flag = False
    tail = 0.0
    if rows.size >= 3 and rows[-1] > 0:
        ratio = rows[-1] / rows[-2] if rows[-2] > 0 else math.inf
        flag = bool(ratio >= 1.0)
        if not flag and not math.isinf(Q):
            rq = ratio**Q
            tail = float((norm**Q + rows[-1] ** Q * rq / (1 - rq)) ** (1 / Q) - norm)
    return DiscreteNorm(seq, (P, Q), norm, rows, flag, tail)


def _arc_rows(G: PowerSeries, K: int, j_max: int, s: float, factor) -> DoubleIndexSeq:
    r = r_grid(K, j_max)
    rows = []
    for j in range(1, j_max + 1):
        c = factor(j, float(r[j]))
        if G.is_zero() or c == 0:
            rows.append(np.zeros(K ** (j + 2)))
        else:
            rows.append(c * arc_means(G, float(r[j - 1]), s, K ** (j + 2)).values)
    return DoubleIndexSeq(K, tuple(rows))


def tg_discrete_seq(
    g: PowerSeries, profile: ExponentProfile, w: RadialWeight, j_max: int, K: int | None = None
) -> DiscreteNorm:
    """{K^(j(1/p - 1)) tail(r_j)^(1/t - 1/q) (g'_[s](r_{j-1}))_{K^(j+2), l}} and its norm."""
    if K is None:
        K = require_doubling(w)
    p, q, s, t = profile.p, profile.q, profile.s, profile.t
    e = 1 / t - 1 / q
    seq = _arc_rows(derivative(g, 1), K, j_max, s, lambda j, rj: float(K) ** (j * (1 / p - 1)) * w.tail(rj) ** e)
    return _finish(seq, profile)


def sg_discrete_seq(
    g: PowerSeries, profile: ExponentProfile, w: RadialWeight, j_max: int, K: int | None = None
) -> DiscreteNorm:
    """{K^(j/p) tail(r_j)^(1/t - 1/q) (g_[s](r_{j-1}))_{K^(j+2), l}} and its norm."""
    if K is None:
        K = require_doubling(w)
    p, q, s, t = profile.p, profile.q, profile.s, profile.t
    e = 1 / t - 1 / q
    seq = _arc_rows(g, K, j_max, s, lambda j, rj: float(K) ** (j / p) * w.tail(rj) ** e)
    return _finish(seq, profile)


def g_nu_discrete_seq(
    G: PowerSeries, n: int, profile: ExponentProfile, w: RadialWeight, nu: RadialWeight, j_max: int, K: int | None = None
) -> DiscreteNorm:
    """{K^(j(n + 1/p)) nu-tail(r_j)^(1/t) tail(r_j)^(-1/q) (G_[s](r_{j-1}))_{K^(j+2), l}}.

    K defaults to the larger of the audited K of w and nu.
    """
    if K is None:
        K = max(require_doubling(w), require_doubling(nu))
    p, q, s, t = profile.p, profile.q, profile.s, profile.t
    seq = _arc_rows(
        G, K, j_max, s, lambda j, rj: float(K) ** (j * (n + 1 / p)) * nu.tail(rj) ** (1 / t) * w.tail(rj) ** (-1 / q)
    )
    return _finish(seq, profile)


# -- measures ----------------------------------------------------------------------


@dataclass(frozen=True)
class AngularMeasure:
    """Point masses (theta, mass) plus a density, constant on [breaks_i, breaks_{i+1}),
    with respect to d theta / 2 pi. Angles are taken modulo 2 pi."""

    atoms: tuple = ()
    breaks: tuple = (0.0, TWO_PI)
    values: tuple = (0.0,)

    def __post_init__(self):
        atoms = tuple((float(th) % TWO_PI, float(m)) for th, m in self.atoms)
        breaks = tuple(float(b) for b in self.breaks)
        values = tuple(float(v) for v in self.values)
        if any(m < 0 for _, m in atoms) or any(v < 0 for v in values):
            raise ValueError("measure masses and densities must be nonnegative")
        if len(breaks) != len(values) + 1 or breaks[0] != 0.0 or abs(breaks[-1] - TWO_PI) > 1e-12:
            raise ValueError("density breaks must run from 0 to 2 pi with one value per piece")
        if any(b <= a for a, b in zip(breaks, breaks[1:])):
            raise ValueError("density breaks must be increasing")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "values", values)

    @classmethod
    def lebesgue(cls) -> "AngularMeasure":
        return cls((), (0.0, TWO_PI), (1.0,))

    def _cdf(self, theta: np.ndarray) -> np.ndarray:
        br = np.array(self.breaks)
        cum = np.concatenate([[0.0], np.cumsum(np.diff(br) * np.array(self.values))]) / TWO_PI
        return np.interp(theta, br, cum)

    def arc_masses(self, N: int) -> np.ndarray:
        edges = TWO_PI * np.arange(N + 1) / N
        cdf = self._cdf(edges)
        out = np.diff(cdf)
        for th, m in self.atoms:
            out[min(int(th // (TWO_PI / N)), N - 1)] += m
        return out

    def integrate_power(self, h: PowerSeries, r: float, s: float, n: int) -> float:
        """int |h(r e^{it})|^s d mu(t)."""
        vals = abs_samples(h, r, n) ** s
        theta = TWO_PI * np.arange(n) / n
        idx = np.clip(np.searchsorted(np.array(self.breaks), theta, side="right") - 1, 0, len(self.values) - 1)
        total = float(np.mean(vals * np.array(self.values)[idx]))
        for th, m in self.atoms:
            total += m * abs(h(r * np.exp(1j * th))) ** s
        return total

    def to_dict(self) -> dict:
        return {"atoms": [list(a) for a in self.atoms], "breaks": list(self.breaks), "values": list(self.values)}


@dataclass(frozen=True)
class MeasureSpec:
    """Family {mu_r} of angular measures and a radial measure nu.

    Angular part: ``modulus`` = (G, s) gives |G|^s d theta / 2 pi; otherwise
    ``bands`` lists (r_lo, r_hi, AngularMeasure) covering [0, 1). Radial
    part: ``nu`` weight, or ``nu_atoms`` as (r, mass) pairs.
    """

    bands: tuple = ()
    modulus: tuple | None = None
    nu: RadialWeight | None = None
    nu_atoms: tuple = field(default=())

    def __post_init__(self):
        if self.modulus is None and not self.bands:
            raise ValueError("measure needs angular bands or a modulus function")
        if self.nu is None and not self.nu_atoms:
            raise ValueError("measure needs a radial weight or radial atoms")
        if any(m < 0 or not 0 <= r < 1 for r, m in self.nu_atoms):
            raise ValueError("radial atoms need 0 <= r < 1 and nonnegative mass")
        for lo, hi, _ in self.bands:
            if not 0 <= lo < hi <= 1:
                raise ValueError("radius bands must satisfy 0 <= lo < hi <= 1")

    def angular(self, r: float) -> AngularMeasure:
        for lo, hi, mu in self.bands:
            if lo <= r < hi:
                return mu
        return AngularMeasure()

    def arc_masses(self, r: float, N: int) -> np.ndarray:
        if self.modulus is not None:
            G, s = self.modulus
            return arc_means(G, r, s, N).values ** s
        return self.angular(r).arc_masses(N)

    def integrate_power(self, h: PowerSeries, r: float, s: float, n: int) -> float:
        if self.modulus is not None:
            G, s_mod = self.modulus
            if s_mod != s:
                raise ValueError("modulus measure was built for a different exponent")
            return float(np.mean(abs_samples(cauchy_product(h, G), r, n) ** s))
        return self.angular(r).integrate_power(h, r, s, n)

    def radial_nodes(self, a: float, b: float, order: int = RING_ORDER) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of d nu on [a, b)."""
        if self.nu is not None:
            t, w = np.polynomial.legendre.leggauss(order)
            x = 0.5 * (b - a) * (t + 1) + a
            return x, 0.5 * (b - a) * w * self.nu.density(x)
        pts = [(r, m) for r, m in self.nu_atoms if a <= r < b]
        if not pts:
            return np.zeros(0), np.zeros(0)
        r, m = zip(*pts)
        return np.array(r), np.array(m)

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureSpec":
        from mnlab.corpus import series_from_dict

        ang = d.get("angular", {"kind": "lebesgue"})
        kind = ang.get("kind")
        bands, modulus = (), None
        if kind == "lebesgue":
            bands = ((0.0, 1.0, AngularMeasure.lebesgue()),)
        elif kind == "modulus":
            modulus = (series_from_dict(ang["G"]), float(ang["s"]))
        elif kind == "bands":
            bands = tuple(
                (
                    float(bd["r"][0]), float(bd["r"][1]),
                    AngularMeasure(
                        tuple(tuple(a) for a in bd.get("atoms", [])),
                        tuple(bd.get("breaks", [0.0, TWO_PI])),
                        tuple(bd.get("values", [0.0])),
                    ),
                )
                for bd in ang["bands"]
            )
        else:
            raise ValueError(f"unknown angular measure kind {kind!r}")
        rad = d.get("radial")
        if rad is None:
            raise ValueError("measure needs a 'radial' entry")
        if "weight" in rad:
            return cls(bands, modulus, weight_from_dict(rad["weight"]))
        if "atoms" in rad:
            return cls(bands, modulus, None, tuple(tuple(a) for a in rad["atoms"]))
        raise ValueError("radial measure needs 'weight' or 'atoms'")


# -- both sides of the Carleson-type inequality -------------------------------------


def carleson_discrete_lhs(
    a: DoubleIndexSeq, measures: MeasureSpec, profile: ExponentProfile, w: RadialWeight, n: int = 0
) -> float:
    """(sum_j int_{r_{j-1}}^{r_j} K^(jt(n+1/p)) tail(r_j)^(-t/q)
    (sum_l |a_{j,l}|^s mu_r(I_{K^(j+2), l}))^(t/s) d nu(r))^(1/t)."""
    if n < 0:
        raise ValueError("derivative order must be nonnegative")
    p, q, s, t = profile.p, profile.q, profile.s, profile.t
    K = a.K
    radii = r_grid(K, a.j_max)
    total = 0.0
    for j in a.ring_indices():
        row = np.abs(a.row(j)) ** s
        if not row.any():
            continue
        lo, hi = float(radii[j - 1]), float(radii[j])
        xs, ws = measures.radial_nodes(lo, hi)
        if xs.size == 0:
            continue
        N = K ** (j + 2)
        inner = np.array([float(np.dot(row, measures.arc_masses(float(x), N))) for x in xs])
        factor = float(K) ** (j * t * (n + 1 / p)) * w.tail(hi) ** (-t / q)
        total += factor * float(np.dot(ws, inner ** (t / s)))
    return total ** (1 / t)


def carleson_continuous_lhs(
    f: PowerSeries, G: PowerSeries, n: int, s: float, t: float, nu: RadialWeight, radial_nodes: int = 160
) -> float:
    """(int_0^1 (int |f^(n)|^s |G|^s d theta / 2 pi)^(t/s) nu(r) dr)^(1/t)."""
    h = cauchy_product(derivative(f, n), G)
    if h.is_zero():
        return 0.0
    return radial_integral(h, s, t, nu, 0.0, radial_nodes).root(t)


def measure_continuous_lhs(
    f: PowerSeries, n: int, measures: MeasureSpec, s: float, t: float, radial_nodes: int = 160, order: int = 6
) -> float:
    """(int (int |f^(n)(r e^{it})|^s d mu_r)^(t/s) d nu(r))^(1/t) for a MeasureSpec."""
    h = derivative(f, n)
    if h.is_zero():
        return 0.0
    deg = h.degree + (measures.modulus[0].degree if measures.modulus else 0)
    samples = pow2_at_least(max(64, 8 * (deg + 1)))
    if measures.nu is not None:
        edges = 1.0 - 2.0 ** (-np.arange(radial_nodes + 1) / 8)
        xs, ws = [], []
        for a_, b_ in zip(edges[:-1], edges[1:]):
            x, wgt = measures.radial_nodes(float(a_), float(b_), order)
            xs.append(x)
            ws.append(wgt)
        xs, ws = np.concatenate(xs), np.concatenate(ws)
    else:
        xs, ws = measures.radial_nodes(0.0, 1.0)
    vals = np.array([measures.integrate_power(h, float(x), s, samples) for x in xs])
    return float(np.dot(ws, vals ** (t / s))) ** (1 / t)
