"""Runners behind the command line: each takes an ExperimentConfig and
returns a Report holding CSV rows or a JSON object plus an acceptance flag.

Command parameters (``params`` in the config):

hl-check     pairs [[p, q], ...], radii [[r, rho], ...], boundary_N [N, ...]
sharpness    p (must be 2), q [q, ...], m (N up to 2^m), terms, k0_max
weight-audit expect ("pass" | "fail", optional)
paraproduct  kind (T | S | M), g (series), families, discrete_j_max
carleson     G (series), n, nu (weight), j_max, sequences, measure (optional
             MeasureSpec object or {"file": path}, replaces G and nu)
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mnlab.carleson import (
    MeasureSpec,
    carleson_continuous_lhs,
    carleson_discrete_lhs,
    g_nu_discrete_seq,
    measure_continuous_lhs,
    multiplier_extremizer,
    sg_discrete_seq,
    tg_discrete_seq,
)
from mnlab.config import ConfigError, ExperimentConfig, encode_number, load_json, load_weight, parse_number
from mnlab.corpus import select, series_from_dict
from mnlab.means import arc_means, arc_means_p2_exact, hl_report, integral_mean
from mnlab.mixed_norm import apq_norm
from mnlab.paraproducts import degeneracy_check, operator_norm_lower_bound, rho
from mnlab.sequences import DoubleIndexSeq, lpq_norm
from mnlab.series import PowerSeries, lacunary_series
from mnlab.weights import audit_weight

SCHEMA_VERSION = 1

DEFAULT_PAIRS = [[1, 2], [2, 4], [0.5, 1], [2, "inf"]]
DEFAULT_RADII = [[0, 0.5], [0.5, 0.75], [0.9, 0.95], [0.9, 1]]
DEFAULT_BOUNDARY_N = [1, 2, 8, 64]


@dataclass
class Report:
    """Output of one command: CSV ``rows`` under ``columns`` or a JSON ``result``."""

    fmt: str
    config: dict
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    result: dict = field(default_factory=dict)
    ok: bool = True
    failures: list = field(default_factory=list)

    def fail(self, message: str) -> None:
        self.ok = False
        self.failures.append(message)


def thread_count() -> int:
    """Worker cap from MNLAB_THREADS (default 1)."""
    raw = os.environ.get("MNLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"MNLAB_THREADS must be an integer, got {raw!r}") from None


def parallel_map(fn, items) -> list:
    """Ordered map; parallel over a thread pool when MNLAB_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return 0.0 if a == 0 else math.inf
    return a / b


def _series(entry, default: dict) -> PowerSeries:
    try:
        return series_from_dict(entry if entry is not None else default)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"series description: {exc}") from None


def _corpus(cfg: ExperimentConfig):
    try:
        return select(cfg.corpus)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"corpus: {exc}") from None


# -- hl-check --------------------------------------------------------------------

HL_COLUMNS = [
    "kind", "function", "p", "q", "r", "rho", "N", "lhs", "rhs_classical", "rhs_improved",
    "constant_classical", "constant_improved",
]


def _hl_pairs(params: dict) -> list[tuple[float, float]]:
    pairs = []
    for i, pq in enumerate(params.get("pairs", DEFAULT_PAIRS)):
        p, q = parse_number(pq[0], f"pairs[{i}].p"), parse_number(pq[1], f"pairs[{i}].q")
        if not 0 < p < math.inf:
            raise ConfigError(f"pairs[{i}]: need 0 < p < inf, got p={p}")
        if not p < q:
            raise ConfigError(f"pairs[{i}]: need p < q, got p={p}, q={q}")
        pairs.append((p, q))
    return pairs


def _hl_radii(params: dict) -> list[tuple[float, float]]:
    radii = []
    for i, rr in enumerate(params.get("radii", DEFAULT_RADII)):
        r, rh = parse_number(rr[0], f"radii[{i}].r"), parse_number(rr[1], f"radii[{i}].rho")
        if not 0 <= r < rh <= 1:
            raise ConfigError(f"radii[{i}]: need 0 <= r < rho <= 1, got r={r}, rho={rh}")
        radii.append((r, rh))
    return radii


def run_hl_check(cfg: ExperimentConfig) -> Report:
    """Both Hardy-Littlewood inequalities over the corpus, and the boundary
    amalgam inequality ||arc means at r = 1||_q <= M_p(1, f)."""
    pairs, radii = _hl_pairs(cfg.params), _hl_radii(cfg.params)
    boundary_N = [int(n) for n in cfg.params.get("boundary_N", DEFAULT_BOUNDARY_N)]
    if any(n < 1 for n in boundary_N):
        raise ConfigError("boundary_N: partition counts must be positive")
    funcs = _corpus(cfg)
    refine = cfg.factor * int(cfg.grid.get("samples", 1))
    tol = cfg.tolerances
    report = Report("csv", cfg.resolved(), HL_COLUMNS)

    def one(item):
        name, f = item
        rows = []
        for p, q in pairs:
            for r, rh in radii:
                rep = hl_report(f, p, q, r, rh, refine=refine)
                rows.append({"kind": "interior", "function": name, **rep.to_dict()})
            mp = integral_mean(f, 1.0, p)
            for N in boundary_N:
                amalgam = arc_means(f, 1.0, p, N, per_arc=16 * refine).norm(q)
                rows.append({
                    "kind": "boundary", "function": name, "p": p, "q": q, "r": 1.0, "rho": 1.0, "N": N,
                    "lhs": amalgam, "rhs_classical": mp, "rhs_improved": math.nan,
                    "constant_classical": _ratio(amalgam, mp), "constant_improved": math.nan,
                })
        return rows

    for rows in parallel_map(one, funcs):
        report.rows.extend(rows)
    for row in report.rows:
        if row["kind"] == "interior":
            if row["rhs_improved"] > row["rhs_classical"] * (1 + tol["monotone"]):
                report.fail(f"{row['function']} p={row['p']} q={row['q']} r={row['r']}: improved side exceeds classical side")
        elif row["constant_classical"] > 1 + tol["boundary"]:
            report.fail(f"{row['function']} p={row['p']} q={row['q']} N={row['N']}: boundary amalgam exceeds M_p(1, f)")
    overall = 0.0
    for p, q in pairs:
        sel = [r for r in report.rows if r["kind"] == "interior" and r["p"] == p and r["q"] == q]
        c_imp = max(r["constant_improved"] for r in sel)
        c_cls = max(r["constant_classical"] for r in sel)
        b = max((r["constant_classical"] for r in report.rows if r["kind"] == "boundary" and r["p"] == p and r["q"] == q), default=math.nan)
        if not math.isfinite(c_imp):
            report.fail(f"p={p} q={q}: improved constant is not finite")
        overall = max(overall, c_imp)
        report.rows.append({
            "kind": "summary", "function": "*", "p": p, "q": q, "r": math.nan, "rho": math.nan, "N": 0,
            "lhs": math.nan, "rhs_classical": math.nan, "rhs_improved": math.nan,
            "constant_classical": c_cls, "constant_improved": c_imp,
        })
        if boundary_N:
            report.rows.append({
                "kind": "boundary_summary", "function": "*", "p": p, "q": q, "r": 1.0, "rho": 1.0, "N": 0,
                "lhs": math.nan, "rhs_classical": math.nan, "rhs_improved": math.nan,
                "constant_classical": b, "constant_improved": math.nan,
            })
    report.result = {"max_constant_improved": overall}
    return report


def hl_constants(report: Report) -> dict:
    """Per-(p, q) improved constants from an hl-check report."""
    return {(r["p"], r["q"]): r["constant_improved"] for r in report.rows if r["kind"] == "summary"}


# -- sharpness -------------------------------------------------------------------

SHARPNESS_COLUMNS = ["q", "N", "best_k0", "ratio", "target_ratio", "cap_hit"]


def lacunary_ratio(f: PowerSeries, N: int, q: float) -> float:
    """||f||_{H^2} / || arc means of f on the unit circle ||_{l^q}, both exact."""
    h2 = float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))
    return _ratio(h2, arc_means_p2_exact(f, 1.0, N).norm(q))


def best_lacunary(N: int, q: float, terms: int, k0_max: int) -> tuple[int, float, bool]:
    """Search k0 = 0..k0_max for the unit-coefficient lacunary series with the
    largest ratio; ``cap_hit`` when the best k0 is the cap and still improving."""
    vals = [lacunary_ratio(lacunary_series(k0, terms), N, q) for k0 in range(k0_max + 1)]
    k = int(np.argmax(vals))
    cap_hit = k == k0_max and k0_max > 0 and vals[-1] > vals[-2] * (1 + 1e-12)
    return k, float(vals[k]), bool(cap_hit)


def fit_slope(N, ratios) -> float:
    """Least-squares slope of log ratio against log N."""
    return float(np.polyfit(np.log(np.asarray(N, float)), np.log(np.asarray(ratios, float)), 1)[0])


def run_sharpness(cfg: ExperimentConfig) -> Report:
    params = cfg.params
    p = parse_number(params.get("p", 2), "p")
    if p != 2:
        raise ConfigError(f"p: the sharpness search is implemented for p = 2 only, got {p}")
    qs = [parse_number(q, "q") for q in params.get("q", [4, "inf"])]
    if any(not q > 2 for q in qs):
        raise ConfigError("q: the sharpness search needs q > 2")
    m = int(params.get("m", 6))
    terms = int(params.get("terms", 6))
    k0_max = int(params.get("k0_max", 10)) * cfg.factor
    if m < 1 or terms < 1 or k0_max < 0:
        raise ConfigError("m and terms must be positive, k0_max nonnegative")
    report = Report("csv", cfg.resolved(), SHARPNESS_COLUMNS)
    summary = {}
    for q in qs:
        target = 0.5 - (0.0 if math.isinf(q) else 1 / q)
        Ns, ratios = [], []
        for e in range(0, m + 1):
            N = 2**e
            k0, val, cap = best_lacunary(N, q, terms, k0_max)
            report.rows.append({"q": q, "N": N, "best_k0": k0, "ratio": val, "target_ratio": N**target, "cap_hit": cap})
            if cap:
                report.fail(f"q={q} N={N}: k0 search cap {k0_max} reached")
            if N >= 2:
                Ns.append(N)
                ratios.append(val)
        slope = fit_slope(Ns, ratios)
        summary[encode_number(q)] = {"slope": slope, "target": target}
        if abs(slope - target) > cfg.tolerances["slope"]:
            report.fail(f"q={q}: slope {slope:.4f} is not within {cfg.tolerances['slope']} of {target:.4f}")
    report.result = summary
    return report


# -- weight-audit ----------------------------------------------------------------


def run_weight_audit(cfg: ExperimentConfig) -> Report:
    w = cfg.radial_weight()
    audit = audit_weight(w)
    res = {"weight": w.to_dict(), "audit": audit.to_dict(), "pass": bool(audit.in_D and audit.ring_mass_pass)}
    report = Report("json", cfg.resolved(), result=res)
    expect = cfg.params.get("expect")
    if expect not in (None, "pass", "fail"):
        raise ConfigError("expect: must be 'pass' or 'fail'")
    if expect is not None and res["pass"] != (expect == "pass"):
        report.fail(f"audit outcome {'pass' if res['pass'] else 'fail'} differs from expected {expect}")
    return report


# -- paraproduct -----------------------------------------------------------------


def _pair_ratio(a: float, b: float):
    if not (math.isfinite(a) and math.isfinite(b)) or a == 0 or b == 0:
        return None
    return a / b


def run_paraproduct(cfg: ExperimentConfig) -> Report:
    params = cfg.params
    kind = params.get("kind", "T")
    if kind not in ("T", "S", "M"):
        raise ConfigError(f"kind: must be T, S or M, got {kind!r}")
    g = _series(params.get("g"), {"kind": "monomial", "n": 1})
    profile = cfg.exponent_profile()
    w = cfg.radial_weight()
    nodes = int(cfg.grid["radial_nodes"]) * cfg.factor
    j_max = int(cfg.grid["j_max"])
    disc_j = int(params.get("discrete_j_max", j_max))
    families = params.get("families", ["monomials", "atoms"])
    rho_rep = rho(g, profile, w, kind, radial_nodes=nodes)
    disc = (tg_discrete_seq if kind == "T" else sg_discrete_seq)(g, profile, w, disc_j)
    est = operator_norm_lower_bound(
        kind, g, profile, w, family=families, degree_cap=int(cfg.grid["degree_cap"]), j_max=j_max,
        draws=int(cfg.grid["draws"]), seed=cfg.seed, radial_nodes=nodes,
    )
    degen = degeneracy_check(profile, w, kind)
    ratios = {
        "rho/discrete": _pair_ratio(rho_rep.value, disc.norm),
        "rho/lower_bound": _pair_ratio(rho_rep.value, est.lower_bound),
        "discrete/lower_bound": _pair_ratio(disc.norm, est.lower_bound),
    }
    if rho_rep.divergent:
        verdict = "unbounded (rho diverges)"
    elif degen.verdict != "nondegenerate" and not (g - PowerSeries.constant(g.coeffs[0]) if kind == "T" else g).is_zero():
        verdict = f"unbounded ({degen.verdict})"
    else:
        verdict = "bounded"
    res = {
        "kind": kind, "g": g.coeffs.real.tolist() if np.all(g.coeffs.imag == 0) else [[c.real, c.imag] for c in g.coeffs],
        "case": profile.case, "profile": profile.to_dict(), "weight": w.to_dict(),
        "rho": rho_rep.to_dict(), "discrete": disc.to_dict(), "lower_bound": est.to_dict(),
        "degeneracy": degen.to_dict(), "ratios": ratios, "verdict": verdict,
    }
    report = Report("json", cfg.resolved(), result=res)
    bracket = float(cfg.tolerances["bracket"])
    if verdict == "bounded":
        for name, val in ratios.items():
            if val is not None and not 1 / bracket <= val <= bracket:
                report.fail(f"{name} = {val:.4g} is outside [1/{bracket:g}, {bracket:g}]")
    return report


# -- carleson --------------------------------------------------------------------

CARLESON_COLUMNS = ["kind", "id", "lhs", "norm", "ratio"]


def _measure(cfg: ExperimentConfig):
    entry = cfg.params.get("measure")
    if entry is None:
        return None
    if isinstance(entry, dict) and set(entry) == {"file"}:
        entry = load_json(Path(cfg.base_dir) / entry["file"])
    try:
        return MeasureSpec.from_dict(entry)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"measure: {exc}") from None


def run_carleson(cfg: ExperimentConfig) -> Report:
    """Continuous and discrete Carleson-type constants and the formula norm.

    With the default measure |G|^s d theta / 2 pi and radial weight nu the
    continuous constant is max over the corpus of LHS / ||f||_{A^{p,q}_omega}, the
    discrete constant is max over seeded sequences (and the Holder extremiser)
    of the discrete LHS / ||a||_{l^{p,q}}, and both are compared with the
    norm of the discrete characterising sequence.
    """
    params = cfg.params
    profile = cfg.exponent_profile()
    p, q, s, t = profile.p, profile.q, profile.s, profile.t
    w = cfg.radial_weight()
    n = int(params.get("n", 0))
    if n < 0:
        raise ConfigError("n: derivative order must be nonnegative")
    j_max = int(params.get("j_max", 4))
    n_seq = int(params.get("sequences", 8))
    nodes = int(cfg.grid["radial_nodes"]) * cfg.factor
    measure = _measure(cfg)
    formula = None
    if measure is None:
        G = _series(params.get("G"), {"kind": "constant", "value": 1.0})
        nu = load_weight(params.get("nu", cfg.weight), Path(cfg.base_dir))
        measure = MeasureSpec(modulus=(G, s), nu=nu)
        disc = g_nu_discrete_seq(G, n, profile, w, nu, j_max)
        formula = disc
        K = disc.seq.K
    else:
        from mnlab.weights import require_doubling

        K = require_doubling(w)
        if measure.nu is not None:
            K = max(K, require_doubling(measure.nu))
    report = Report("csv", cfg.resolved(), CARLESON_COLUMNS)
    funcs = _corpus(cfg)

    def cont(item):
        name, f = item
        norm = apq_norm(f, p, q, w, nodes)
        if measure.modulus is not None and measure.nu is not None:
            lhs = carleson_continuous_lhs(f, measure.modulus[0], n, s, t, measure.nu, nodes)
        else:
            lhs = measure_continuous_lhs(f, n, measure, s, t, nodes)
        return {"kind": "function", "id": name, "lhs": lhs, "norm": norm, "ratio": _ratio(lhs, norm)}

    report.rows.extend(parallel_map(cont, funcs))
    seqs = [("zero", DoubleIndexSeq.zeros(K, j_max))]
    seqs += [(f"random(seed={cfg.seed + i})", DoubleIndexSeq.random(K, j_max, cfg.seed + i)) for i in range(n_seq)]
    if formula is not None:
        seqs.append(("extremizer", multiplier_extremizer(formula.seq, profile)))

    def discrete(item):
        name, a = item
        lhs = carleson_discrete_lhs(a, measure, profile, w, n)
        norm = lpq_norm(a, p, q)
        return {"kind": "sequence", "id": name, "lhs": lhs, "norm": norm, "ratio": _ratio(lhs, norm)}

    report.rows.extend(parallel_map(discrete, seqs))
    c_cont = max(r["ratio"] for r in report.rows if r["kind"] == "function")
    c_disc = max(r["ratio"] for r in report.rows if r["kind"] == "sequence")
    res = {"continuous_constant": c_cont, "discrete_constant": c_disc, "K": K}
    pairs = {"continuous/discrete": _pair_ratio(c_cont, c_disc)}
    summary = [("continuous_constant", c_cont), ("discrete_constant", c_disc)]
    if formula is not None:
        res["formula_norm"] = formula.norm
        res["formula_tail_flag"] = formula.tail_flag
        pairs["continuous/formula"] = _pair_ratio(c_cont, formula.norm)
        pairs["discrete/formula"] = _pair_ratio(c_disc, formula.norm)
        summary.append(("formula_norm", formula.norm))
    res["ratios"] = pairs
    for name, val in summary:
        report.rows.append({"kind": "summary", "id": name, "lhs": val, "norm": math.nan, "ratio": math.nan})
    for name, val in pairs.items():
        report.rows.append({"kind": "summary", "id": name, "lhs": math.nan, "norm": math.nan, "ratio": val if val is not None else math.nan})
    bracket = float(cfg.tolerances["bracket"])
    for name, val in pairs.items():
        if val is not None and not 1 / bracket <= val <= bracket:
            report.fail(f"{name} = {val:.4g} is outside [1/{bracket:g}, {bracket:g}]")
    report.result = res
    return report


RUNNERS = {
    "hl-check": run_hl_check,
    "sharpness": run_sharpness,
    "weight-audit": run_weight_audit,
    "paraproduct": run_paraproduct,
    "carleson": run_carleson,
}


def run(cfg: ExperimentConfig) -> Report:
    return RUNNERS[cfg.command](cfg)
