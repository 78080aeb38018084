"""Integral means, arc means, amalgam norms and the two maximal operators.

Arc means use one global uniform grid whose size is a multiple of N, with the
trapezoid rule restricted to each arc plus the first Euler-Maclaurin endpoint
correction. Arc endpoints are shared nodes and the corrections telescope, so
the per-arc sums add up to the full-circle trapezoid sum exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mnlab.series import PowerSeries, _powers, effective_degree, floor_e, pow2_at_least, scaled_samples

SAMPLES_PER_ARC = 16
# the radial maximal function has kinks, so its interpolant converges only like n^-2
RADIAL_MIN_SAMPLES = 4096
OVERSAMPLE = 8
GOLDEN = (math.sqrt(5) - 1) / 2


def _check_p(p: float, name: str = "p") -> None:
    if not p > 0:
        raise ValueError(f"{name} must be positive, got {p}")


def _check_radius(r: float) -> None:
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"radius must lie in [0, 1], got {r}")


def circle_sample_count(f: PowerSeries, r: float, p: float = 2.0, multiple: int = 1, per_multiple: int = 1) -> int:
    """Grid size for |f|^p quadrature at radius r.

    p = 2 needs only 2d + 1 nodes (exact); other exponents get OVERSAMPLE
    nodes per degree since |f|^p is no longer a trigonometric polynomial.
    Finite p gets a power of two; p = inf gets a multiple of ``multiple``
    so that every arc endpoint is a node.
    """
    d = effective_degree(f, r)
    base = 2 * d + 1 if p == 2 else OVERSAMPLE * (d + 1)
    base = max(base, per_multiple * multiple, 64)
    # arc integrals need a grid aligned with the arcs only for the sup
    if multiple == 1 or not math.isinf(p):
        return pow2_at_least(base)
    return multiple * math.ceil(base / multiple)


def abs_samples(f: PowerSeries, r: float, n: int) -> np.ndarray:
    _check_radius(r)
    return np.abs(scaled_samples(f.coeffs, r, n))


def lq_norm(v, q: float) -> float:
    """(sum |v|^q)^(1/q), max for q = inf; a quasi-norm for q < 1."""
    _check_p(q, "q")
    vals = np.abs(np.asarray(getattr(v, "values", v), dtype=float))
    if vals.size == 0:
        return 0.0
    if math.isinf(q):
        return float(vals.max())
    top = vals.max()
    if top == 0:
        return 0.0
    # factor out the maximum to avoid overflow for small q
    return float(top * np.sum((vals / top) ** q) ** (1 / q))


def _golden_max(fun, a, b, iters: int = 40):
    """Golden-section maximisation of ``fun`` on [a, b], vectorised over brackets."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        left = fc > fd
        # keep [a, d] where f(c) wins, else [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = np.where(left, b - GOLDEN * (b - a), d)
        d_new = np.where(left, c, a + GOLDEN * (b - a))
        fc_new = np.where(left, np.nan, fd)
        fd_new = np.where(left, fc, np.nan)
        probe = np.where(left, c_new, d_new)
        fp = fun(probe)
        c, d = c_new, d_new
        fc = np.where(left, fp, fc_new)
        fd = np.where(left, fd_new, fp)
    return np.maximum(fc, fd)


def sup_modulus(f: PowerSeries, r: float, n: int | None = None) -> float:
    """M_inf(r, f): sampled maximum plus a golden-section pass near the argmax."""
    _check_radius(r)
    if n is None:
        n = circle_sample_count(f, r, math.inf)
    vals = abs_samples(f, r, n)
    k = int(np.argmax(vals))
    h = 2 * np.pi / n
    theta0 = 2 * np.pi * k / n
    best = _golden_max(lambda t: np.abs(f(r * np.exp(1j * t))), theta0 - h, theta0 + h)
    return float(max(vals[k], best))


def integral_mean(f: PowerSeries, r: float, p: float, n: int | None = None) -> float:
    """M_p(r, f) = (int |f(r e^{it})|^p dt / 2 pi)^(1/p)."""
    _check_p(p)
    if math.isinf(p):
        return sup_modulus(f, r, n)
    if n is None:
        n = circle_sample_count(f, r, p)
    vals = abs_samples(f, r, n)
    return lq_norm(vals, p) * n ** (-1 / p)


def integral_mean_power(f: PowerSeries, r: float, p: float, n: int | None = None) -> float:
    """M_p(r, f)^p without the final root, exact Parseval sum for p = 2."""
    _check_p(p)
    if p == 2 and n is None:
        return float(np.sum((np.abs(f.coeffs) * _powers(r, f.degree)) ** 2))
    return integral_mean(f, r, p, n) ** p


@dataclass(frozen=True)
class ArcMeanVector:
    """The N arc means (f_[p](r))_{N,l}, l = 0..N-1; ``samples`` is the grid size used."""

    N: int
    r: float
    p: float
    values: np.ndarray
    samples: int = 0

    def norm(self, q: float) -> float:
        return lq_norm(self.values, q)


def _arc_integrals(w: np.ndarray, N: int) -> np.ndarray:
    """Integrals of the trigonometric interpolant of w over N equal arcs, over 2 pi.

    ``w`` holds samples at 2 pi k / n for any n. The interpolant is integrated
    term by term and its antiderivative read off at the arc endpoints with one
    N-point FFT, so the arcs tile the full-circle trapezoid sum exactly and
    trigonometric polynomials of degree < n / 2 are integrated exactly.
    """
    n = w.size
    c = np.fft.fft(w) / n
    k = np.fft.fftfreq(n, 1.0 / n).round().astype(np.int64)
    anti = np.zeros(n, dtype=complex)
    nz = k != 0
    anti[nz] = c[nz] / (1j * k[nz])
    folded = np.bincount(k % N, weights=anti.real, minlength=N) + 1j * np.bincount(k % N, weights=anti.imag, minlength=N)
    if n % 2 == 0:
        # split the Nyquist term evenly between +n/2 and -n/2 so the interpolant is real
        half = n // 2
        folded[(-half) % N] -= anti[half] / 2
        folded[half % N] -= anti[half] / 2
    S = N * np.fft.ifft(folded)
    out = c[0].real / N + np.real(np.roll(S, -1) - S) / (2 * np.pi)
    return out


def arc_means_from_samples(vals: np.ndarray, N: int, p: float, r: float = math.nan) -> ArcMeanVector:
    """Arc means from |f| sampled at 2 pi k / n; p = inf needs n a multiple of N."""
    _check_p(p)
    if N < 1:
        raise ValueError("partition count N must be at least 1")
    vals = np.abs(np.asarray(vals, dtype=float))
    if math.isinf(p):
        if vals.size % N:
            raise ValueError("sample count must be a multiple of N")
        out = np.maximum(vals.reshape(N, -1).max(axis=1), np.roll(vals.reshape(N, -1)[:, 0], -1))
    else:
        out = np.maximum(_arc_integrals(vals**p, N), 0.0) ** (1 / p)
    return ArcMeanVector(int(N), float(r), float(p), out, vals.size)


def arc_means(f: PowerSeries, r: float, p: float, N: int, per_arc: int = SAMPLES_PER_ARC, n: int | None = None) -> ArcMeanVector:
    """(int_{I_{N,l}} |f(r e^{it})|^p dt / 2 pi)^(1/p) for the N equal arcs I_{N,l}."""
    _check_p(p)
    if N < 1:
        raise ValueError("partition count N must be at least 1")
    _check_radius(r)
    if n is None:
        n = circle_sample_count(f, r, p, multiple=N, per_multiple=per_arc)
    elif math.isinf(p) and n % N:
        raise ValueError("sample count must be a multiple of N")
    return arc_means_from_samples(abs_samples(f, r, n), N, p, r)


def arc_means_p2_exact(f: PowerSeries, r: float, N: int) -> ArcMeanVector:
    """Closed-form p = 2 arc means through the Gram matrix of the arcs.

    int_I e^{i k t} dt / 2 pi over I = [2 pi l / N, 2 pi (l+1) / N] is
    (e^{i k 2 pi (l+1) / N} - e^{i k 2 pi l / N}) / (2 pi i k). Cost grows with
    the square of the number of nonzero coefficients, so this suits sparse
    (lacunary) series of any degree.
    """
    if N < 1:
        raise ValueError("partition count N must be at least 1")
    _check_radius(r)
    idx = np.flatnonzero(f.coeffs)
    if idx.size == 0:
        return ArcMeanVector(N, r, 2.0, np.zeros(N))
    c = f.coeffs[idx] * _powers(r, f.degree)[idx]
    k = idx[:, None] - idx[None, :]
    cc = c[:, None] * np.conj(c)[None, :]
    out = np.empty(N)
    for l in range(N):
        # e^{i k 2 pi l / N} through k l mod N keeps the phase exact for huge k
        ka = np.exp(2j * np.pi * ((k * l) % N) / N)
        kb = np.exp(2j * np.pi * ((k * (l + 1)) % N) / N)
        with np.errstate(divide="ignore", invalid="ignore"):
            kern = np.where(k == 0, 1.0 / N, (kb - ka) / (2j * np.pi * np.where(k == 0, 1, k)))
        out[l] = max(float(np.real(np.sum(cc * kern))), 0.0)
    return ArcMeanVector(N, r, 2.0, np.sqrt(out))


# -- Hardy-Littlewood inequality ---------------------------------------------


@dataclass(frozen=True)
class HLReport:
    p: float
    q: float
    r: float
    rho: float
    N: int
    lhs: float
    rhs_classical: float
    rhs_improved: float

    @property
    def constant_classical(self) -> float:
        return _ratio(self.lhs, self.rhs_classical)

    @property
    def constant_improved(self) -> float:
        return _ratio(self.lhs, self.rhs_improved)

    def to_dict(self) -> dict:
        return {
            "p": self.p, "q": self.q, "r": self.r, "rho": self.rho, "N": self.N,
            "lhs": self.lhs, "rhs_classical": self.rhs_classical, "rhs_improved": self.rhs_improved,
            "constant_classical": self.constant_classical, "constant_improved": self.constant_improved,
        }


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return 0.0 if a == 0 else math.inf
    return a / b


def partition_count(r: float, rho: float) -> int:
    """N(r, rho) = E(1 / (rho - r))."""
    if not rho > r:
        raise ValueError("need r < rho")
    return max(1, floor_e(1.0 / (rho - r)))


def hl_report(f: PowerSeries, p: float, q: float, r: float, rho: float, refine: int = 1) -> HLReport:
    """Both sides of the classical and the arc-amalgam Hardy-Littlewood inequalities."""
    _check_p(p)
    _check_p(q, "q")
    if not (0 <= r < rho <= 1):
        raise ValueError(f"need 0 <= r < rho <= 1, got r={r}, rho={rho}")
    if not p < q:
        raise ValueError(f"need p < q, got p={p}, q={q}")
    N = partition_count(r, rho)
    gap = (rho - r) ** (1 / p - (0.0 if math.isinf(q) else 1 / q))
    n_r = refine * circle_sample_count(f, r, q)
    lhs = integral_mean(f, r, q, n_r)
    n_rho = refine * circle_sample_count(f, rho, p, multiple=N, per_multiple=SAMPLES_PER_ARC)
    vals = abs_samples(f, rho, n_rho)
    classical = lq_norm(vals, p) * n_rho ** (-1 / p) / gap
    improved = arc_means_from_samples(vals, N, p, rho).norm(q) / gap
    return HLReport(p, q, r, rho, N, lhs, classical, improved)


# -- maximal functions ----------------------------------------------------------


def radial_grid(rho: float, steps: int) -> np.ndarray:
    """rho (1 - 2^-k), k = 0..steps-1, followed by rho; nested in ``steps``."""
    k = np.arange(steps, dtype=float)
    return np.concatenate([rho * (1 - 2.0**-k), [rho]])


def radial_maximal_samples(f: PowerSeries, rho: float, n: int, radial_steps: int) -> np.ndarray:
    """Sampled R(f)(rho e^{i theta_k}) = sup_{s <= rho} |f(s e^{i theta_k})|."""
    if radial_steps < 2:
        raise ValueError("radial_steps must be at least 2")
    _check_radius(rho)
    out = np.zeros(n)
    for s in radial_grid(rho, radial_steps):
        np.maximum(out, abs_samples(f, float(s), n), out=out)
    return out


def radial_maximal_arc_means(
    f: PowerSeries, rho: float, p: float, N: int, radial_steps: int = 24, per_arc: int = SAMPLES_PER_ARC
) -> ArcMeanVector:
    """Arc means of the radial maximal function on the circle of radius rho."""
    _check_p(p)
    if N < 1:
        raise ValueError("partition count N must be at least 1")
    n = circle_sample_count(f, rho, p, multiple=N, per_multiple=per_arc)
    if not math.isinf(p):
        n = max(n, RADIAL_MIN_SAMPLES)
    return arc_means_from_samples(radial_maximal_samples(f, rho, n, radial_steps), N, p, rho)


def maximal_step_function(values: np.ndarray, a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Uncentred Hardy-Littlewood maximal function of a step function, exactly.

    ``values`` are cell values on a uniform partition of [a, b], zero outside.
    Any interval average through x is a convex combination of the left and
    right one-sided averages at x, and a one-sided average is maximised at a
    grid point or in the limit of a vanishing interval.
    """
    values = np.asarray(values, dtype=float)
    if np.any(values < 0):
        raise ValueError("maximal function input must be nonnegative")
    m = values.size
    h = (b - a) / m
    nodes = a + h * np.arange(m + 1)
    S = np.concatenate([[0.0], np.cumsum(values) * h])
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    flat = x.ravel()
    res = out.ravel()
    for i, xv in enumerate(flat):
        cell = min(max(int((xv - a) // h), 0), m - 1)
        inside = a <= xv <= b
        Sx = S[cell] + values[cell] * (xv - nodes[cell]) if inside else (0.0 if xv < a else S[-1])
        best = values[cell] if inside else 0.0
        d = nodes - xv
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = (S - Sx) / d
        slopes[np.abs(d) < 1e-15 * max(1.0, abs(xv))] = 0.0
        best = max(best, float(np.max(slopes)))
        res[i] = best
    return out


def _block_norm(fun_vals: np.ndarray, weights: np.ndarray, blocks: int, p: float, q: float) -> float:
    # fun_vals, weights shaped (blocks, nodes per block); weights already / 2 pi
    local = np.sum(weights * fun_vals**p, axis=1) ** (1 / p)
    return lq_norm(local, q)


def hl_maximal_amalgam(values, p: float, q: float, N: int, nodes_per_cell: int = 4) -> tuple[float, float]:
    """l^q(L^p) block norms of a step function on [-pi, 3 pi] and of its maximal function.

    Blocks have width 2 pi / N and tile [-pi, 3 pi]; L^p norms use d theta / 2 pi.
    The number of cells must be a multiple of 2N.
    """
    if not p > 1 or not q > 1:
        raise ValueError("need p > 1 and q > 1")
    if N < 1:
        raise ValueError("partition count N must be at least 1")
    values = np.asarray(values, dtype=float)
    blocks = 2 * N
    if values.size % blocks:
        raise ValueError("cell count must be a multiple of 2N")
    a, b = -np.pi, 3 * np.pi
    m = values.size
    h = (b - a) / m
    t, wt = np.polynomial.legendre.leggauss(nodes_per_cell)
    left = a + h * np.arange(m)
    xs = (left[:, None] + 0.5 * h * (t[None, :] + 1)).ravel()
    ws = np.tile(0.5 * h * wt, m) / (2 * np.pi)
    per = m // blocks * nodes_per_cell
    inp = np.repeat(values, nodes_per_cell)
    out = maximal_step_function(values, a, b, xs)
    shape = (blocks, per)
    return (
        _block_norm(inp.reshape(shape), ws.reshape(shape), blocks, p, q),
        _block_norm(out.reshape(shape), ws.reshape(shape), blocks, p, q),
    )
