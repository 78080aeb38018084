"""Analytic paraproducts T_g, S_g, M_g on truncated series, the continuous
quantity rho in its four cases, empirical operator-norm lower bounds and the
degeneracy checks for symbols that can only be constant (or zero).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from mnlab.carleson import multiplier_extremizer, sg_discrete_seq, tg_discrete_seq
from mnlab.means import _golden_max
from mnlab.mixed_norm import ExponentProfile, apq_norm, linf_q_norm, means_at
from mnlab.series import (
    AtomSpec,
    PowerSeries,
    SignPattern,
    atom_center,
    atom_function,
    atom_threshold,
    cauchy_product,
    derivative,
    primitive,
    rademacher_combination,
)
from mnlab.weights import RadialWeight, require_doubling

KINDS = ("T", "S", "M")
RHO_STEP = 0.25
RHO_POINTS = 65
MONOMIAL_SMALL = 32
MONOMIAL_CAP = 512
ATOM_J_MAX = 6
RADEMACHER_DRAWS = 32


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def apply_paraproduct(kind: str, g: PowerSeries, f: PowerSeries, max_degree: int | None = None) -> PowerSeries:
    """T_g f = int f g', S_g f = int f' g, M_g f = f g, truncated at ``max_degree``.

    The default degree is deg f + deg g, where all three are exact.
    """
    _check_kind(kind)
    if max_degree is None:
        max_degree = f.degree + g.degree
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    if kind == "M":
        return cauchy_product(f, g, max_degree)
    if max_degree == 0:
        return PowerSeries([0.0])
    if kind == "T":
        inner = cauchy_product(f, derivative(g, 1), max_degree - 1)
    else:
        inner = cauchy_product(derivative(f, 1), g, max_degree - 1)
    return primitive(inner)


# -- rho ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhoReport:
    value: float
    case: str
    kind: str
    divergent: bool
    argmax_r: float | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "case": self.case, "kind": self.kind, "divergent": self.divergent, "argmax_r": self.argmax_r}


def rho_grid(points: int = RHO_POINTS, step: float = RHO_STEP) -> np.ndarray:
    return 1.0 - 2.0 ** (-step * np.arange(points))


def _sup_radial(fun, points: int) -> tuple[float, float, bool]:
    """sup of fun over the rho grid with one golden refinement at the argmax.

    Divergent when the running sup grows by more than 5% over the last octave.
    """
    r = rho_grid(points)
    vals = fun(r)
    k = int(np.argmax(vals))
    lo, hi = r[max(k - 1, 0)], r[min(k + 1, r.size - 1)]
    best = float(vals[k])
    arg = float(r[k])
    if hi > lo:
        refined = float(_golden_max(lambda x: fun(np.atleast_1d(x))[0], lo, hi, iters=30))
        if refined > best:
            best = refined
    octave = int(round(1 / RHO_STEP))
    earlier = float(vals[: max(1, vals.size - octave)].max())
    divergent = best > 1.05 * earlier and k >= vals.size - octave
    return best, arg, divergent


def rho(g: PowerSeries, profile: ExponentProfile, w: RadialWeight, kind: str = "T", radial_nodes: int = 160, points: int = RHO_POINTS) -> RhoReport:
    """rho_{p,q,s,t,omega}(g) for T_g (kind 'T') or S_g / M_g (kind 'S' or 'M')."""
    _check_kind(kind)
    require_doubling(w)
    case = profile.case
    a_p, a_q = profile.inv_pt, profile.inv_qt
    is_t = kind == "T"
    h = derivative(g, 1) if is_t else g
    if h.is_zero():
        return RhoReport(0.0, case, kind, False)
    lift = 1.0 if is_t else 0.0

    def tails(r):
        return np.array([w.tail(float(x)) for x in np.atleast_1d(r)])

    if case == "a":
        def fun(r):
            r = np.atleast_1d(r)
            return means_at(h, r, math.inf) * tails(r) ** a_q * (1 - r) ** (lift + a_p)
        val, arg, div = _sup_radial(fun, points)
        return RhoReport(math.inf if div else val, case, kind, div, arg)
    if case == "b":
        pt = profile.p_tilde

        def fun(r):
            r = np.atleast_1d(r)
            return (1 - r) ** lift * tails(r) ** a_q * means_at(h, r, pt)
        val, arg, div = _sup_radial(fun, points)
        return RhoReport(math.inf if div else val, case, kind, div, arg)
    if case == "c":
        rep = linf_q_norm(h, lift + a_p, profile.q_tilde, w, radial_nodes)
        return RhoReport(rep.value, case, kind, rep.divergent)
    target = g - PowerSeries.constant(g.coeffs[0]) if is_t else g
    if target.is_zero():
        return RhoReport(0.0, case, kind, False)
    return RhoReport(apq_norm(target, profile.p_tilde, profile.q_tilde, w, radial_nodes), case, kind, False)


# -- test families and lower bounds --------------------------------------------------


@dataclass
class NormEstimate:
    """max over a finite test family of ||L f||_{A^{s,t}} / ||f||_{A^{p,q}}."""

    lower_bound: float
    best: str
    kind: str
    profile: ExponentProfile
    weight: dict
    family: list
    per_family: dict = field(default_factory=dict)
    by_ring: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lower_bound": self.lower_bound, "best": self.best, "kind": self.kind,
            "profile": self.profile.to_dict(), "weight": self.weight, "family": self.family,
            "per_family": self.per_family, "by_ring": {str(k): v for k, v in self.by_ring.items()}, "grid": self.grid,
        }


def monomial_degrees(cap: int = MONOMIAL_CAP) -> list[int]:
    small = list(range(0, min(cap, MONOMIAL_SMALL) + 1))
    big = [d for d in (64, 128, 256, 512, 1024, 2048) if MONOMIAL_SMALL < d <= cap]
    return small + big


def atom_exponent(w: RadialWeight, p: float, q: float) -> float:
    """M one unit above the admissibility threshold of the atoms."""
    return atom_threshold(w, p, q) + 1.0


def atom_family(w: RadialWeight, K: int, p: float, q: float, j_max: int = ATOM_J_MAX) -> list[AtomSpec]:
    """One atom at four quarter-turn positions on each ring j = 1..j_max."""
    M = atom_exponent(w, p, q)
    out = []
    for j in range(1, j_max + 1):
        N = K ** (j + 2)
        for l in sorted({0, N // 4, N // 2, 3 * N // 4}):
            out.append(AtomSpec(atom_center(K, j, l), M, p, q, w, (j, l)))
    return out


def _ratio(kind, g, f, profile, w, radial_nodes) -> float:
    den = apq_norm(f, profile.p, profile.q, w, radial_nodes)
    if den == 0:
        return 0.0
    return apq_norm(apply_paraproduct(kind, g, f), profile.s, profile.t, w, radial_nodes) / den


def operator_norm_lower_bound(
    kind: str,
    g: PowerSeries,
    profile: ExponentProfile,
    w: RadialWeight,
    family=("monomials", "atoms"),
    degree_cap: int = MONOMIAL_CAP,
    j_max: int = ATOM_J_MAX,
    draws: int = RADEMACHER_DRAWS,
    rademacher_j_max: int | None = None,
    seed: int = 0,
    radial_nodes: int = 160,
) -> NormEstimate:
    """Empirical lower bound for ||L_g: A^{p,q}_omega -> A^{s,t}_omega||.

    Families: 'monomials' (z^n up to ``degree_cap``), 'atoms' (single atoms
    on rings 1..j_max) and 'rademacher' (``draws`` seeded sign patterns over
    all atoms on rings 1..rademacher_j_max, default j_max, with coefficients
    taken from the Holder extremiser of the discrete characterising sequence;
    the first pattern is all +1, the remaining ``draws - 1`` are seeded).
    """
    if rademacher_j_max is None:
        rademacher_j_max = j_max
    _check_kind(kind)
    if isinstance(family, str):
        family = [family]
    family = list(family)
    unknown = set(family) - {"monomials", "atoms", "rademacher"}
    if unknown:
        raise ValueError(f"unknown test families {sorted(unknown)}")
    K = require_doubling(w)
    best, best_name = 0.0, ""
    per_family: dict = {}
    by_ring: dict = {}

    def consider(fam: str, name: str, val: float):
        nonlocal best, best_name
        per_family[fam] = max(per_family.get(fam, 0.0), val)
        if val > best:
            best, best_name = val, name

    if "monomials" in family:
        for n in monomial_degrees(degree_cap):
            consider("monomials", f"z^{n}", _ratio(kind, g, PowerSeries.monomial(n), profile, w, radial_nodes))
    if "atoms" in family:
        for spec in atom_family(w, K, profile.p, profile.q, j_max):
            val = _ratio(kind, g, atom_function(spec, check_threshold=False), profile, w, radial_nodes)
            consider("atoms", f"atom{spec.index}", val)
            j = spec.index[0]
            by_ring[j] = max(by_ring.get(j, 0.0), val)
        running = 0.0
        for j in sorted(by_ring):
            running = max(running, by_ring[j])
            by_ring[j] = running
    if "rademacher" in family and draws > 0:
        disc = (tg_discrete_seq if kind == "T" else sg_discrete_seq)(g, profile, w, rademacher_j_max, K)
        a = multiplier_extremizer(disc.seq, profile)
        M = atom_exponent(w, profile.p, profile.q)
        atoms = [
            AtomSpec(atom_center(K, j, l), M, profile.p, profile.q, w, (j, l))
            for j in range(1, rademacher_j_max + 1)
            for l in range(K ** (j + 2))
        ]
        lengths = [K ** (j + 2) for j in range(1, rademacher_j_max + 1)]
        # the all-plus pattern first: random signs cancel atoms sharing an angle
        patterns = [("rademacher(+)", SignPattern(-1, tuple(np.ones(n, dtype=int) for n in lengths)))]
        patterns += [(f"rademacher(seed={seed + d})", SignPattern.random(lengths, seed + d)) for d in range(draws - 1)]
        for name, signs in patterns:
            f = rademacher_combination(atoms, a, signs)
            consider("rademacher", name, _ratio(kind, g, f, profile, w, radial_nodes))
    return NormEstimate(
        best, best_name, kind, profile, w.to_dict(), family, per_family, by_ring,
        {"degree_cap": degree_cap, "j_max": j_max, "draws": draws, "rademacher_j_max": rademacher_j_max,
         "radial_nodes": radial_nodes, "K": K, "seed": seed},
    )


# -- degeneracy ------------------------------------------------------------------------


DEGENERACY_OCTAVES = 200


@dataclass(frozen=True)
class DegeneracyReport:
    verdict: str
    case: str
    kind: str
    quantity: str
    detail: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "case": self.case, "kind": self.kind, "quantity": self.quantity, "detail": self.detail}


def _limit_is_infinite(w: RadialWeight, e_tail: float, e_gap: float) -> tuple[bool, float]:
    """Does tail(r)^e_tail (1 - r)^e_gap blow up as r -> 1?

    Judged by the log-log slope over the deepest 32 octaves of the gap.
    """
    k = np.arange(0, 4 * 64 + 1)
    x = 2.0 ** (-k / 4)
    logs = e_tail * np.log2(w.tail_gap(x)) + e_gap * np.log2(x)
    deep = slice(-4 * 32, None)
    slope = -np.polyfit(np.log2(x[deep]), logs[deep], 1)[0]
    return bool(slope > 0.02), float(slope)


def _integral_diverges(w: RadialWeight, e: float) -> tuple[bool, float]:
    """Does int_0^1 (1 - r)^e omega(r) dr diverge? Octave contributions that stop decaying mean yes."""
    contrib = []
    for k in range(DEGENERACY_OCTAVES):
        lo, hi = -(k + 1) * math.log(2), -k * math.log(2)
        val, _ = integrate.quad(lambda u: math.exp(u * (e + 1)) * float(w.density_gap(math.exp(u))), lo, hi, epsrel=1e-10)
        contrib.append(val)
    c = np.array(contrib)
    last = c[-10:]
    ratio = float(np.mean(last[1:] / np.where(last[:-1] > 0, last[:-1], 1.0))) if last[-1] > 0 else 0.0
    return bool(ratio >= 0.97), ratio


def degeneracy_check(profile: ExponentProfile, w: RadialWeight, kind: str = "T") -> DegeneracyReport:
    """Decide whether only constant (T) or only zero (S, M) symbols can be bounded."""
    _check_kind(kind)
    case = profile.case
    a_p, a_q = profile.inv_pt, profile.inv_qt
    lift = 1.0 if kind == "T" else 0.0
    bad = "only constants bounded" if kind == "T" else "only zero bounded"
    if case == "a":
        inf, slope = _limit_is_infinite(w, a_q, lift + a_p)
        quantity = "lim tail(r)^(1/q~) (1-r)^(%g + 1/p~)" % lift
        return DegeneracyReport(bad if inf else "nondegenerate", case, kind, quantity, {"log_slope": slope})
    if case == "b":
        inf, slope = _limit_is_infinite(w, a_q, lift)
        quantity = "lim tail(r)^(1/q~) (1-r)^%g" % lift
        return DegeneracyReport(bad if inf else "nondegenerate", case, kind, quantity, {"log_slope": slope})
    if case == "c":
        e = (lift + a_p) * profile.q_tilde
        div, ratio = _integral_diverges(w, e)
        quantity = f"int (1-r)^{e:g} omega(r) dr"
        return DegeneracyReport(bad if div else "nondegenerate", case, kind, quantity, {"exponent": e, "octave_ratio": ratio})
    return DegeneracyReport("nondegenerate", case, kind, "none", {})
