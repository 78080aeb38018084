"""Radial weights on [0, 1), their tail integrals and the doubling audits.

Weights are evaluated in the gap variable ``x = 1 - r`` internally so that
ratios such as tail(r) / tail((1 + r) / 2) stay exact for r very close to 1.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

# nested audit grid: gaps 2^(-k/5), k = 0..199, depth ~ 2^-40
AUDIT_POINTS = 200
AUDIT_STEP = 0.2


def audit_gaps(points: int = AUDIT_POINTS, step: float = AUDIT_STEP) -> np.ndarray:
    return 2.0 ** (-step * np.arange(points))


def audit_grid(points: int = AUDIT_POINTS, step: float = AUDIT_STEP) -> np.ndarray:
    return 1.0 - audit_gaps(points, step)


class RadialWeight:
    """Base class; subclasses implement ``density_gap`` and ``tail_gap``."""

    kind = "abstract"

    def density_gap(self, x):
        raise NotImplementedError

    def tail_gap(self, x):
        raise NotImplementedError

    def density(self, r):
        return self.density_gap(1.0 - np.asarray(r, dtype=float))

    def tail(self, r):
        """omega-hat(r) = integral of the density over [r, 1)."""
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr >= 1.0) or np.any(r_arr < 0.0):
            raise ValueError("tail integral is defined for 0 <= r < 1")
        out = self.tail_gap(1.0 - r_arr)
        return float(out) if np.ndim(out) == 0 else out

    def mass(self, a: float, b: float) -> float:
        """Integral of the density over [a, b]."""
        return float(self.tail_gap(1.0 - a) - self.tail_gap(1.0 - b)) if b < 1.0 else float(self.tail_gap(1.0 - a))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class StandardWeight(RadialWeight):
    """(1 - r)^alpha with alpha > -1."""

    alpha: float = 0.0
    kind = "standard"

    def __post_init__(self):
        if self.alpha <= -1:
            raise ValueError("standard weights need alpha > -1")

    def density_gap(self, x):
        return np.asarray(x, dtype=float) ** self.alpha

    def tail_gap(self, x):
        a1 = self.alpha + 1.0
        return np.asarray(x, dtype=float) ** a1 / a1

    def to_dict(self) -> dict:
        return {"kind": "standard", "alpha": self.alpha}


@dataclass(frozen=True)
class LogPowerWeight(RadialWeight):
    """(1 - r)^alpha * log(e / (1 - r))^beta.

    Integrable when alpha > -1, or alpha = -1 and beta < -1. With alpha = -1,
    beta = -2 the tail is exactly 1 / log(e / (1 - r)).
    """

    alpha: float = 0.0
    beta: float = 1.0
    kind = "log_power"

    def __post_init__(self):
        if not (self.alpha > -1 or (self.alpha == -1 and self.beta < -1)):
            raise ValueError("log-power weight is not integrable near r = 1")

    def density_gap(self, x):
        x = np.asarray(x, dtype=float)
        return x**self.alpha * (1.0 - np.log(x)) ** self.beta

    def _tail_scalar(self, x: float) -> float:
        if x <= 0:
            return 0.0
        v0 = 1.0 - math.log(x)
        if self.alpha == -1:
            return v0 ** (self.beta + 1) / (-self.beta - 1)
        a = self.alpha + 1.0
        s = self.beta + 1.0
        if s > 0:
            # int_{v0}^inf e^{a(1-v)} v^beta dv = e^a a^-s Gamma(s, a v0)
            return math.exp(a) * a ** (-s) * special.gamma(s) * special.gammaincc(s, a * v0)
        val, _ = integrate.quad(lambda v: math.exp(a * (1 - v)) * v**self.beta, v0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
        return val

    def tail_gap(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self._tail_scalar(float(x))
        return np.array([self._tail_scalar(float(v)) for v in x.ravel()]).reshape(x.shape)

    def to_dict(self) -> dict:
        return {"kind": "log_power", "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class TabulatedWeight(RadialWeight):
    """Piecewise-linear density through knots (r_i, w_i), times (1 - r)^shift.

    Knots must start at r = 0 and end at r = 1. Tails integrate the
    interpolant exactly.
    """

    knots: tuple
    shift: float = 0.0
    kind = "tabulated"

    def __post_init__(self):
        pts = tuple((float(r), float(w)) for r, w in self.knots)
        object.__setattr__(self, "knots", pts)
        rs = [r for r, _ in pts]
        if len(pts) < 2 or rs[0] != 0.0 or rs[-1] != 1.0:
            raise ValueError("tabulated knots must run from r = 0 to r = 1")
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("tabulated knots must be strictly increasing in r")
        if any(w < 0 for _, w in pts):
            raise ValueError("tabulated density must be nonnegative")
        if self.shift < 0:
            raise ValueError("shift exponent must be nonnegative")
        # gap-ordered knots, x increasing from 0 to 1
        xs = np.array([1.0 - r for r, _ in pts[::-1]])
        ws = np.array([w for _, w in pts[::-1]])
        seg = [self._segment(xs[i], xs[i + 1], ws[i], ws[i + 1], xs[i], xs[i + 1]) for i in range(len(xs) - 1)]
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_ws", ws)
        object.__setattr__(self, "_cum", cum)

    def _segment(self, xa, xb, wa, wb, lo, hi) -> float:
        # int_lo^hi x^shift (A + B x) dx on the segment [xa, xb]
        B = (wb - wa) / (xb - xa)
        A = wa - B * xa
        b = self.shift
        return A * (hi ** (b + 1) - lo ** (b + 1)) / (b + 1) + B * (hi ** (b + 2) - lo ** (b + 2)) / (b + 2)

    def density_gap(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self._xs, self._ws) * x**self.shift

    def _tail_scalar(self, x: float) -> float:
        if x <= 0:
            return 0.0
        x = min(x, 1.0)
        i = int(np.searchsorted(self._xs, x, side="right") - 1)
        i = min(i, len(self._xs) - 2)
        return float(self._cum[i] + self._segment(self._xs[i], self._xs[i + 1], self._ws[i], self._ws[i + 1], self._xs[i], x))

    def tail_gap(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self._tail_scalar(float(x))
        return np.array([self._tail_scalar(float(v)) for v in x.ravel()]).reshape(x.shape)

    def to_dict(self) -> dict:
        return {"kind": "tabulated", "knots": [list(k) for k in self.knots], "shift": self.shift}


def weight_from_dict(d: dict) -> RadialWeight:
    kind = d.get("kind")
    if kind == "standard":
        return StandardWeight(float(d.get("alpha", 0.0)))
    if kind == "log_power":
        return LogPowerWeight(float(d.get("alpha", 0.0)), float(d.get("beta", 1.0)))
    if kind == "tabulated":
        if "knots" not in d:
            raise ValueError("tabulated weight needs 'knots'")
        return TabulatedWeight(tuple(tuple(k) for k in d["knots"]), float(d.get("shift", 0.0)))
    raise ValueError(f"unknown weight kind {kind!r}")


def omega_hat(w: RadialWeight, r: float) -> float:
    return w.tail(r)


def weight_shift(w: RadialWeight, beta: float) -> RadialWeight:
    """The weight w(r) (1 - r)^beta."""
    if beta < 0:
        raise ValueError("shift exponent must be nonnegative")
    if beta == 0:
        return w
    if isinstance(w, StandardWeight):
        return StandardWeight(w.alpha + beta)
    if isinstance(w, LogPowerWeight):
        return LogPowerWeight(w.alpha + beta, w.beta)
    if isinstance(w, TabulatedWeight):
        return TabulatedWeight(w.knots, w.shift + beta)
    raise TypeError(f"cannot shift {type(w).__name__}")


def r_grid(K: int, j_max: int) -> np.ndarray:
    """r_j = 1 - K^-j for j = 0..j_max."""
    if K < 2 or j_max < 1:
        raise ValueError("need K >= 2 and j_max >= 1")
    return 1.0 - float(K) ** -np.arange(j_max + 1, dtype=float)


# -- audits -------------------------------------------------------------------


def _gaps_of(r_grid_, gaps=None) -> np.ndarray:
    if gaps is not None:
        return np.asarray(gaps, dtype=float)
    if r_grid_ is None:
        return audit_gaps()
    r = np.asarray(r_grid_, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise ValueError("audit grid must lie in [0, 1)")
    return 1.0 - r


def audit_dhat(w: RadialWeight, r_grid=None, *, gaps=None) -> float:
    """max over the grid of tail(r) / tail((1 + r) / 2).

    ``gaps`` gives the grid as 1 - r directly, for depths beyond double precision in r.
    """
    x = _gaps_of(r_grid, gaps)
    return float(np.max(w.tail_gap(x) / w.tail_gap(x / 2)))


def audit_dcheck(w: RadialWeight, K: int, r_grid=None, *, gaps=None) -> float:
    """min over the grid of tail(r) / tail(1 - (1 - r) / K)."""
    if K < 2:
        raise ValueError("K must be an integer >= 2")
    x = _gaps_of(r_grid, gaps)
    return float(np.min(w.tail_gap(x) / w.tail_gap(x / K)))


def _deep(points: int = AUDIT_POINTS) -> np.ndarray:
    # same spacing, twice the depth
    return audit_gaps(2 * points)


def dhat_passes(w: RadialWeight) -> bool:
    c = audit_dhat(w)
    c_deep = audit_dhat(w, gaps=_deep())
    return math.isfinite(c) and abs(c_deep - c) <= 0.05 * c


def dcheck_passes(w: RadialWeight, K: int) -> bool:
    c = audit_dcheck(w, K)
    c_deep = audit_dcheck(w, K, gaps=_deep())
    return c > 1 and c_deep > 1 and (c_deep - 1) >= 0.95 * (c - 1)


def choose_K(w: RadialWeight, K_max: int = 64, threshold: float = 1.1) -> int | None:
    """Smallest K >= 2 whose lower-doubling constant exceeds ``threshold`` stably."""
    for K in range(2, K_max + 1):
        if audit_dcheck(w, K) > threshold and dcheck_passes(w, K):
            return K
    return None


@dataclass(frozen=True)
class DecayConstants:
    alpha0: float
    C_alpha: float
    lam: float
    C_lam: float


def _lambda_ratio(w: RadialWeight, x: float, lam: float) -> float:
    # int_x^1 (x / y)^lam w(1 - y) dy / tail(x), integrated in u = log y
    lo = math.log(x)
    val, _ = integrate.quad(
        lambda u: math.exp(lam * (lo - u) + u) * float(w.density_gap(math.exp(u))),
        lo, 0.0, epsabs=0, epsrel=1e-10, limit=400,
    )
    return val / float(w.tail_gap(x))


@functools.lru_cache(maxsize=64)
def lemma_a_constants(w: RadialWeight) -> DecayConstants:
    """Empirical exponents for the two equivalent forms of upper doubling.

    ``alpha0`` is the smallest local decay exponent of the tail over pairs of
    gaps 2^8 apart, the largest exponent the power bound can hold with; ``lam`` is the smallest exponent (found by bisection)
    for which the weighted integral ratio stops growing toward r = 1.
    """
    if not dhat_passes(w):
        raise ValueError("weight fails the upper doubling audit")
    x = audit_gaps()
    tails = w.tail_gap(x)
    lag = int(round(8 / AUDIT_STEP))
    local = np.log(tails[:-lag] / tails[lag:]) / np.log(x[:-lag] / x[lag:])
    alpha0 = float(max(local.min(), 1e-12))
    # tail(s) <= C ((1 - s) / (1 - t))^alpha0 tail(t) for s deeper than t
    ratio = tails[None, :] / tails[:, None] * (x[:, None] / x[None, :]) ** alpha0
    C_alpha = float(max(1.0, np.triu(ratio).max()))

    def passes(lam: float) -> bool:
        # bounded ratios drift by O(1 / log) at most; divergent ones grow
        # at least linearly in log(1 / gap), i.e. roughly threefold here
        mid = _lambda_ratio(w, 2.0**-30, lam)
        far = _lambda_ratio(w, 2.0**-90, lam)
        return far <= 1.1 * mid

    lo, hi = 0.0, 1.0
    while not passes(hi):
        lo, hi = hi, 2 * hi
        if hi > 1e3:
            raise ValueError("no admissible lambda found")
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    lam = hi
    coarse = audit_gaps(41, 1.0)
    C_lam = float(max(_lambda_ratio(w, float(g), lam) for g in coarse))
    return DecayConstants(alpha0, C_alpha, lam, C_lam)


def lemma_3_2_check(w: RadialWeight, K: int, r_grid=None, *, gaps=None) -> tuple[float, float]:
    """Empirical (C1, C2) in C1 tail(r') <= mass[r, r'] <= tail(r) <= C2 tail(r'),
    with r' = 1 - (1 - r) / K."""
    if not (dhat_passes(w) and dcheck_passes(w, K)):
        raise ValueError("weight fails the doubling audits for this K")
    x = _gaps_of(r_grid, gaps)
    t = w.tail_gap(x)
    t_k = w.tail_gap(x / K)
    return float(np.min((t - t_k) / t_k)), float(np.max(t / t_k))


def ring_mass_stable(w: RadialWeight, K: int) -> bool:
    c1, c2 = lemma_3_2_check(w, K)
    d1, d2 = lemma_3_2_check(w, K, gaps=_deep())
    return c1 > 0 and abs(d1 - c1) <= 0.05 * c1 and abs(d2 - c2) <= 0.05 * c2


@dataclass
class WeightAudit:
    C_hat: float
    dhat_pass: bool
    K: int | None
    C_check: float | None
    dcheck_pass: bool
    alpha0: float | None = None
    C_alpha: float | None = None
    lam: float | None = None
    C_lam: float | None = None
    C1: float | None = None
    C2: float | None = None
    ring_mass_pass: bool = False
    K_rule: str = "smallest K >= 2 with stable lower-doubling constant > 1.1"

    @property
    def in_D(self) -> bool:
        return self.dhat_pass and self.dcheck_pass

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["in_D"] = self.in_D
        return out


def audit_weight(w: RadialWeight, K_max: int = 64) -> WeightAudit:
    C_hat = audit_dhat(w)
    dh = dhat_passes(w)
    K = choose_K(w, K_max)
    if K is None:
        audit = WeightAudit(C_hat, dh, None, audit_dcheck(w, 2), False)
    else:
        audit = WeightAudit(C_hat, dh, K, audit_dcheck(w, K), True)
    if dh:
        la = lemma_a_constants(w)
        audit.alpha0, audit.C_alpha, audit.lam, audit.C_lam = la.alpha0, la.C_alpha, la.lam, la.C_lam
    if audit.in_D:
        audit.C1, audit.C2 = lemma_3_2_check(w, K)
        audit.ring_mass_pass = ring_mass_stable(w, K)
    return audit


@functools.lru_cache(maxsize=128)
def require_doubling(w: RadialWeight) -> int:
    """Return the audited K of a doubling weight, raising if w is not in D."""
    if not dhat_passes(w):
        raise ValueError("weight fails the upper doubling audit")
    K = choose_K(w)
    if K is None:
        raise ValueError("weight fails the lower doubling audit")
    return K
