"""Configuration-driven experiments with CSV reports and an acceptance summary."""
from __future__ import annotations

import cmath
import csv
import io
import json
import math
import os
import random
import re
import time
from dataclasses import dataclass, field, fields as dc_fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigInvalid, InvalidParameter, LabError, MissingCriterion
from .fields import Field, SpaceParams
from .quadrature import DEFAULT_QUAD, QuadratureSpec

CRITERIA = tuple(f"AC{i}" for i in range(1, 13))
EXPERIMENTS = ("norms", "hardy", "semigroup", "growth", "blowup", "sector", "hinf",
               "commutators", "elliptic", "scaling", "maxreg", "weak")
DEFAULT_CRITERION = {
    "norms": "AC10", "hardy": "AC10", "semigroup": "AC2", "growth": "AC4", "blowup": "AC5",
    "sector": "AC6", "hinf": "AC8", "commutators": "AC7", "elliptic": "AC9", "scaling": "AC11",
    "maxreg": "AC11", "weak": "AC12",
}
PARAM_KEYS = ("p", "k", "gamma", "d", "bc", "lambda_shift", "eta", "q", "T")
GRID_KEYS = ("t", "lambda", "r")
QUAD_KEYS = tuple(f.name for f in dc_fields(QuadratureSpec))
CSV_HEADER = ("key", "metric", "value", "tolerance", "status")

# ----------------------------------------------------------------- config


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    criterion: str
    params: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    quad: dict = field(default_factory=dict)
    output: str | None = None
    seed: int | None = None

    def space(self) -> SpaceParams:
        pr = self.params
        return SpaceParams(float(pr.get("p", 2.0)), int(pr.get("k", 0)), float(pr.get("gamma", 0.0)),
                           int(pr.get("d", 1)))

    def quadrature(self) -> QuadratureSpec:
        return replace(DEFAULT_QUAD, **self.quad) if self.quad else DEFAULT_QUAD

    def get(self, key, default=None):
        return self.params.get(key, default)

    def grid(self, key, default):
        g = self.grids.get(key)
        return np.asarray(default if g is None else g, dtype=float)

    def echo(self) -> dict:
        return {"experiment": self.experiment, "criterion": self.criterion, "params": self.params,
                "grids": {k: list(map(float, v)) for k, v in self.grids.items()},
                "quad": self.quad, "output": self.output, "seed": self.seed}


_RANGE = re.compile(r"^(geom|lin)\(([^)]*)\)$")


def _number(text: str, key: str):
    try:
        v = float(text)
    except ValueError:
        raise ConfigInvalid(key, f"not a number: {text!r}") from None
    return int(v) if v.is_integer() and re.fullmatch(r"[+-]?\d+", text.strip()) else v


def _grid_value(text: str, key: str) -> tuple:
    text = text.strip()
    m = _RANGE.match(text)
    if m:
        parts = [s.strip() for s in m.group(2).split(",")]
        if len(parts) != 3:
            raise ConfigInvalid(key, "ranges take (start, stop, count)")
        a, b, n = float(_number(parts[0], key)), float(_number(parts[1], key)), int(_number(parts[2], key))
        if n < 1 or (m.group(1) == "geom" and (a <= 0 or b <= 0)):
            raise ConfigInvalid(key, "invalid range")
        vals = np.geomspace(a, b, n) if m.group(1) == "geom" else np.linspace(a, b, n)
        return tuple(float(v) for v in vals)
    return tuple(float(_number(s, key)) for s in text.split(",") if s.strip())


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment; dotted keys nest."""
    raw: dict = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {ln}", "expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigInvalid(f"line {ln}", "empty key")
        raw[k] = v
    raw.update(overrides or {})
    if "experiment" not in raw:
        raise ConfigInvalid("experiment", "missing")
    exp = raw.pop("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigInvalid("experiment", f"unknown experiment {exp!r}")
    crit = raw.pop("criterion", DEFAULT_CRITERION[exp])
    if crit not in CRITERIA:
        raise ConfigInvalid("criterion", f"unknown criterion {crit!r}")
    params, grids, quad = {}, {}, {}
    output = raw.pop("output", None)
    seed = raw.pop("seed", None)
    seed = None if seed is None else int(_number(seed, "seed"))
    for k, v in raw.items():
        if k in PARAM_KEYS:
            if k == "bc":
                if v.lower() not in ("dirichlet", "neumann"):
                    raise ConfigInvalid(k, "bc must be dirichlet or neumann")
                params[k] = v.lower()
            else:
                params[k] = _number(v, k)
        elif k.startswith("grid.") and k[5:] in GRID_KEYS:
            grids[k[5:]] = _grid_value(v, k)
        elif k.startswith("quad.") and k[5:] in QUAD_KEYS:
            quad[k[5:]] = _number(v, k)
        else:
            raise ConfigInvalid(k, "unknown key")
    cfg = RunConfig(exp, crit, params, grids, quad, output, seed)
    try:
        cfg.space()
        cfg.quadrature()
    except InvalidParameter as e:
        raise ConfigInvalid("params", str(e)) from None
    return cfg


def load_config(path, overrides: dict | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), overrides)


# ----------------------------------------------------------------- reports


@dataclass(frozen=True)
class Row:
    key: str
    metric: str
    value: float
    tolerance: str
    status: str  # PASS, FAIL or INFO


@dataclass(frozen=True)
class ExperimentReport:
    config: RunConfig
    rows: tuple
    metadata: dict

    @property
    def passed(self) -> bool:
        return all(r.status != "FAIL" for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow((r.key, r.metric, format(float(r.value), ".17g"), r.tolerance, r.status))
        return buf.getvalue()


def _fmt(x) -> str:
    return format(float(x), ".17g")


class _Rows:
    """Row collector bound to one criterion id."""

    def __init__(self, crit: str):
        self.crit = crit
        self.rows: list = []

    def info(self, key, metric, value):
        self.rows.append(Row(key, f"{self.crit}:{metric}", float(value), "", "INFO"))

    def le(self, key, metric, value, tol):
        ok = bool(np.isfinite(value) and value <= tol)
        self.rows.append(Row(key, f"{self.crit}:{metric}", float(value), "<=" + _fmt(tol), "PASS" if ok else "FAIL"))

    def ge(self, key, metric, value, tol):
        ok = bool(np.isfinite(value) and value >= tol)
        self.rows.append(Row(key, f"{self.crit}:{metric}", float(value), ">=" + _fmt(tol), "PASS" if ok else "FAIL"))

    def near(self, key, metric, value, target, tol):
        ok = bool(np.isfinite(value) and abs(value - target) <= tol)
        self.rows.append(Row(key, f"{self.crit}:{metric}", float(value), f"{_fmt(target)}+-{_fmt(tol)}",
                             "PASS" if ok else "FAIL"))

    def flag(self, key, metric, ok: bool):
        self.rows.append(Row(key, f"{self.crit}:{metric}", 1.0 if ok else 0.0, "==1", "PASS" if ok else "FAIL"))

    def fail(self, key, metric, err: Exception):
        self.rows.append(Row(key, f"{self.crit}:{metric}", float("nan"), f"error {type(err).__name__}", "FAIL"))


def _sp_key(bc, sp) -> str:
    return f"{bc}(p={sp.p:g},k={sp.k},gamma={sp.gamma:g},d={sp.d})"


def _shuffled(cfg: RunConfig, items: list) -> list:
    items = list(items)
    if cfg.seed is not None:
        random.Random(cfg.seed).shuffle(items)
    return items


def _probe_err(a: Field, b: Field, x) -> float:
    va, vb = a(x), b(x)
    return float(np.max(np.abs(va - vb))) / max(float(np.max(np.abs(vb))), 1e-300)


# ----------------------------------------------------------------- batteries


def oracle_battery() -> list:
    """(bc, field) pairs whose odd/even extensions are smooth."""
    from .axial import GaussPoly

    odd = [GaussPoly((0.0, 1.0), 1.0), GaussPoly((0.0, 0.0, 0.0, 1.0), 0.25), GaussPoly((0.0, 1.0, 0.0, -0.5), 2.0)]
    even = [GaussPoly((1.0,), 1.0), GaussPoly((1.0, 0.0, 1.0), 0.25), GaussPoly((0.0, 0.0, 1.0), 2.0)]
    return [("dirichlet", Field.axial(a)) for a in odd] + [("neumann", Field.axial(a)) for a in even]


def bump() -> Field:
    from .axial import Product, Step

    return Field.axial(Product((Step(0.5, 1.0, True), Step(1.5, 2.5))))


# ----------------------------------------------------------------- runners


def run_norms(cfg: RunConfig, R: _Rows):
    from .axial import ExpPoly
    from .fields import multiply_power
    from .norms import extend, full_line_lp_norm, weighted_lp_norm, weighted_sobolev_norm

    quad = cfg.quadrature()
    sp = cfg.space()
    p, g = sp.p, sp.gamma
    fields_ = [("exp", Field.axial(ExpPoly((1.0,), 1.0))), ("bump", bump()), ("zero", Field.zero(1))]
    x = np.linspace(0.05, 6.0, 60)
    for name, f in _shuffled(cfg, fields_):
        R.info(name, "sobolev_norm", weighted_sobolev_norm(f, sp, quad))
        base = weighted_lp_norm(f, p, g, quad)
        for par in ("odd", "even"):
            full = full_line_lp_norm(extend(f, par), p, g, quad)
            err = abs(full**p - 2 * base**p) / max(2 * base**p, 1e-300) if base > 0 else abs(full)
            R.le(name, f"extension_{par}_isometry", err, 1e-10)
        if f.terms:
            back = multiply_power(multiply_power(f, 0.5), -0.5)
            R.le(name, "power_roundtrip", float(np.max(np.abs(back(x) - f(x)))), 1e-12)


def run_hardy(cfg: RunConfig, R: _Rows):
    from .axial import ExpPoly, Power, Product
    from .norms import hardy_check

    quad = cfg.quadrature()
    p = float(cfg.get("p", 2.0))
    cases = [("x*exp", Field.axial(ExpPoly((0.0, 1.0), 1.0)), 2.0), ("x*exp", Field.axial(ExpPoly((0.0, 1.0), 1.0)), 0.0),
             ("bump", bump(), 0.0), ("bump", bump(), 2.5), ("x2*exp", Field.axial(ExpPoly((0.0, 0.0, 1.0), 1.0)), 3.0)]
    for name, u, g in _shuffled(cfg, cases):
        res = hardy_check(u, p, g, quad)
        R.le(f"{name},gamma={g:g}", "hardy_ratio", res.ratio, res.ceiling)
    ratios = []
    for eps in (0.2, 0.1, 0.05, 0.025):
        u = Field.axial(Product((Power(eps), ExpPoly((1.0,), 1.0))))
        r = hardy_check(u, p, p - 1, quad, enforce=False).ratio
        ratios.append(r)
        R.info(f"eps={eps:g}", "critical_ratio", r)
    R.flag(f"gamma={p - 1:g}", "critical_family_increasing", all(b > a for a, b in zip(ratios, ratios[1:])))


def run_semigroup(cfg: RunConfig, R: _Rows):
    from .norms import trace
    from .quadrature import integrate_half_line
    from .semigroup import apply_semigroup, witness
    from .spectral import oracle_function_calculus

    quad = cfg.quadrature()
    x = np.linspace(0.0, 6.0, 61)
    crit = cfg.criterion
    if crit == "AC1":
        for t in cfg.grid("t", (0.1, 1.0)):
            for i, (bc, f) in enumerate(_shuffled(cfg, oracle_battery())):
                a = apply_semigroup(bc, t, f, quad)
                b = oracle_function_calculus(bc, lambda s: np.exp(-t * s), 0.0, f)
                R.le(f"{bc},field={i},t={t:g}", "oracle_rel_err", _probe_err(a, b, x), 1e-6)
    elif crit == "AC2":
        ts = cfg.grid("t", (0.25, 0.5, 1.0))
        for bc in ("dirichlet", "neumann"):
            f = bump()
            for t in ts:
                for s in ts:
                    a = apply_semigroup(bc, t, apply_semigroup(bc, s, f, quad), quad)
                    b = apply_semigroup(bc, t + s, f, quad)
                    R.le(f"{bc},t={t:g},s={s:g}", "semigroup_law", _probe_err(a, b, x), 1e-8)
            hs = np.geomspace(1e-1, 1e-5, 5)
            xs = np.linspace(0.0, 4.0, 81)
            res = [float(np.max(np.abs(apply_semigroup(bc, h, f, quad)(xs) - f(xs)))) for h in hs]
            for h, r in zip(hs, res):
                R.info(f"{bc},t={h:g}", "continuity_residual", r)
            R.flag(bc, "continuity_monotone", all(b < a for a, b in zip(res, res[1:])))
    elif crit == "AC3":
        fields_ = [f for _, f in oracle_battery()] + [Field.axial(witness()), bump()]
        for t in cfg.grid("t", (0.1, 1.0)):
            for i, f in enumerate(_shuffled(cfg, fields_)):
                td = trace(apply_semigroup("dirichlet", t, f, quad), 0, tol=np.inf).value
                R.le(f"field={i},t={t:g}", "dirichlet_trace", abs(td), 1e-8)
                tn = trace(apply_semigroup("neumann", t, f, quad), 1, tol=np.inf).value
                R.le(f"field={i},t={t:g}", "neumann_normal_trace", abs(tn), 1e-6)
                u = apply_semigroup("neumann", t, f, quad)
                m0 = integrate_half_line(lambda y: f(y), 0.0, quad, quad.r_max, f.breakpoints, f.scale, f.graded)
                m1 = integrate_half_line(lambda y: u(y), 0.0, quad, quad.r_max, (), u.scale, False)
                R.le(f"field={i},t={t:g}", "neumann_mass", abs(m1 - m0) / abs(m0), 1e-9)
    else:
        raise ConfigInvalid("criterion", f"semigroup covers AC1-AC3, not {crit}")


def run_growth(cfg: RunConfig, R: _Rows):
    from .semigroup import growth_exponent, growth_experiment

    bc = cfg.get("bc", "dirichlet")
    sp = cfg.space()
    fit = growth_experiment(bc, sp, cfg.grid("t", np.geomspace(10.0, 1e4, 12)), cfg.quadrature(), r2_min=None)
    target = growth_exponent(bc, sp)
    key = _sp_key(bc, sp)
    R.near(key, "growth_slope", fit.slope, target, 0.05 if target > 0 else 0.03)
    R.ge(key, "growth_r2", fit.r_squared, 0.98)


def run_blowup(cfg: RunConfig, R: _Rows):
    from .semigroup import blowup_probe

    bc = cfg.get("bc", "dirichlet")
    p = float(cfg.get("p", 2.0))
    res = blowup_probe(bc, p, cfg.get("gamma"), float(cfg.get("T", 1.0)))
    key = f"{bc},p={p:g}"
    for L, v in zip(res.levels, res.partials):
        R.info(f"{key},level={L:.6g}", "partial_value", v)
    for i, r in enumerate(res.growth_ratios):
        R.ge(f"{key},step={i + 1}", "partial_growth_ratio", r, 2.0)
    R.flag(key, "membership_converged", res.membership_converged)
    R.flag(key, "verdict_diverges", res.verdict == "DIVERGES")


def run_sector(cfg: RunConfig, R: _Rows):
    from .resolvent import sectoriality_scan
    from .semigroup import growth_exponent

    bc = cfg.get("bc", "dirichlet")
    sp = cfg.space()
    shift = float(cfg.get("lambda_shift", 0.0))
    growth = growth_exponent(bc, sp) > 0 and shift == 0
    rep = sectoriality_scan(bc, sp, cfg.grid("lambda", np.geomspace(1e-2, 1e2, 9)), lambda_shift=shift,
                            fit_ray=math.pi if growth else None, quad=cfg.quadrature())
    key = _sp_key(bc, sp) + f",shift={shift:g}"
    if growth:
        target = -1.0 - (sp.effective_gamma - 2 * sp.p + 1) / (2 * sp.p) if bc == "dirichlet" else \
            -1.0 - (sp.effective_gamma - sp.p + 1) / (2 * sp.p)
        R.near(key, "small_lambda_exponent", rep.small_lambda_exponent, target, 0.1)
        R.info(key, "small_lambda_r2", rep.small_lambda_r2)
    elif shift > 0:
        R.le(key, "shifted_sup", rep.sup, 10.0)
    else:
        R.le(key, "table_variation", rep.variation, 20.0)
    R.info(key, "table_sup", rep.sup)


def run_hinf(cfg: RunConfig, R: _Rows):
    from .axial import GaussPoly
    from .hinf import (ContourSpec, hinf_apply, hinf_bound_probe, symbol_expdiff, symbol_rational)
    from .spectral import oracle_function_calculus, resolve_green

    quad = cfg.quadrature()
    shift = float(cfg.get("lambda_shift", 1.0))
    bc = cfg.get("bc", "dirichlet")
    odd = Field.axial(GaussPoly((0.0, 1.0), 1.0))
    even = Field.axial(GaussPoly((1.0,), 1.0))
    battery = [("bump", "dirichlet", bump()), ("odd", "dirichlet", odd), ("even", "neumann", even)]
    x = np.linspace(0.05, 4.0, 40)
    c0 = ContourSpec(nu=math.pi / 16, arc_radius=0.5 * shift)
    c1 = ContourSpec(nu=1.2 * math.pi / 16, arc_radius=0.25 * shift)
    rat = symbol_rational(1.0)
    for name, b, f in _shuffled(cfg, battery):
        # z/(1+z)^2 at A = shift - Δ: (1+A)^{-1} A (1+A)^{-1} f by two resolvent solves
        v = resolve_green(b, 1.0 + shift, f)
        ref = resolve_green(b, 1.0 + shift, shift * v - v.laplacian())
        got = hinf_apply(b, rat, c0, shift, f)
        R.le(f"{b},{name}", "rational_exactness", _probe_err(got, ref, x), 1e-5)
        alt = hinf_apply(b, rat, c1, shift, f)
        R.le(f"{b},{name}", "contour_invariance", _probe_err(alt, got, x), 1e-5)
        if name != "bump":
            ed = symbol_expdiff()
            got = hinf_apply(b, ed, c0, shift, f)
            ora = oracle_function_calculus(b, ed.fn, shift, f)
            R.le(f"{b},{name}", "oracle_agreement", _probe_err(got, ora, x), 1e-5)
    sp = cfg.space()
    symbols = [symbol_rational(a) for a in (0.1, 1.0, 10.0)]
    base = [bump(), odd]
    wider = base + [Field.axial(GaussPoly((0.0, 0.0, 0.0, 1.0), 0.25))]
    for s in cfg.grid("lambda", (1.0, 0.1)):
        pr = hinf_bound_probe(bc, sp, symbols, base, float(s), quad=quad)
        pw = hinf_bound_probe(bc, sp, symbols, wider, float(s), quad=quad)
        key = _sp_key(bc, sp) + f",shift={s:g}"
        R.le(key, "probe_max_ratio", pr.max_ratio, 10.0)
        R.le(key, "probe_battery_spread", pw.max_ratio / pr.max_ratio, 2.0)


def run_commutators(cfg: RunConfig, R: _Rows):
    from .commutators import commutator_suite
    from .tangential import HermiteGauss

    b = bump()
    fields_ = [b, Field.separable(b.terms[0].axial, HermiteGauss((0,), 0.5))]
    for z in (1.0, 1.0 + 1.0j):
        for u in fields_:
            for row in commutator_suite(z, u):
                R.le(f"d={u.d},z={z}", row.identity, row.relative, 1e-6)


def run_elliptic(cfg: RunConfig, R: _Rows):
    from .regularity import elliptic_regularity_check, elliptic_residual, elliptic_solve

    bc = cfg.get("bc", "dirichlet")
    sp = cfg.space()
    tab = elliptic_regularity_check(bc, sp, cfg.grid("lambda", np.geomspace(1e-2, 1e2, 17)), quad=cfg.quadrature())
    key = _sp_key(bc, sp)
    R.le(key, "observed_constant", tab.constant, tab.declared_constant)
    if sp.effective_gamma > 2 * sp.p - 1:
        R.le(key, "small_lambda_growth", tab.growth_exponent, tab.h_exponent + 0.05)
    else:
        R.info(key, "small_lambda_growth", tab.growth_exponent)
    R.info(key, "rotation_ratio", tab.rotation_ratio)
    f = bump()
    for lam in (1.0, 2.0 + 3.0j, 0.01 * cmath.exp(2.3j)):
        res = elliptic_residual(bc, lam, f, elliptic_solve(bc, lam, f))
        R.le(f"{key},lam={lam:.4g}", "pde_residual", res.pde, 1e-6)
        R.le(f"{key},lam={lam:.4g}", "boundary_trace", res.trace, 1e-6)


def run_scaling(cfg: RunConfig, R: _Rows):
    from .regularity import homogeneous_scaling_check

    bc = cfg.get("bc", "dirichlet")
    sp = cfg.space()
    rows = homogeneous_scaling_check(bc, sp, tuple(cfg.grid("r", (1.0, 2.0, 4.0, 8.0))), float(cfg.get("T", 1.0)))
    key = _sp_key(bc, sp)
    for r in rows:
        R.le(f"{key},r={r.r:g}", "scaled_residual", r.residual, 1e-6)
        R.info(f"{key},r={r.r:g}", "homogeneous_ratio", r.ratio)
    ratios = [r.ratio for r in rows]
    R.le(key, "homogeneous_ratio_spread", max(ratios) / min(ratios), 2.0)


def run_maxreg(cfg: RunConfig, R: _Rows):
    from .axial import GaussPoly
    from .regularity import ExpSource, TimeWeight, duhamel_solve, maximal_regularity_check

    bc = cfg.get("bc", "dirichlet")
    sp = cfg.space()
    quad = cfg.quadrature()
    T = float(cfg.get("T", 1.0))
    psi = Field.axial(GaussPoly((0.0, 1.0), 1.0) if bc == "dirichlet" else GaussPoly((1.0,), 1.0))
    lap = psi.laplacian()
    src = ExpSource(((1.0, psi + lap), (0.0, -1.0 * lap)))
    ts = cfg.grid("t", (0.25, 0.5, 1.0))
    sol = duhamel_solve(bc, src, ts, quad)
    x = np.linspace(0.05, 4.0, 40)
    for st in sol.states:
        exact = (1.0 - math.exp(-st.t)) * psi(x)
        err = float(np.max(np.abs(st.u(x) - exact))) / float(np.max(np.abs(psi(x))))
        R.le(f"{bc},t={st.t:g}", "manufactured_error", err, 1e-5)
        R.le(f"{bc},t={st.t:g}", "integrated_residual",
             float(np.max(np.abs(st.integrated_residual_field(x)))) / float(np.max(np.abs(psi(x)))), 1e-6)
    tw = TimeWeight(float(cfg.get("eta", 0.0)), float(cfg.get("q", 2.0)))
    odd = Field.axial(GaussPoly((0.0, 1.0), 1.0) if bc == "dirichlet" else GaussPoly((1.0,), 1.0))
    battery = [ExpSource(((1.0, bump()),)), ExpSource(((1.0, odd),))]
    out = maximal_regularity_check(bc, sp, tw, T, _shuffled(cfg, battery), quad=quad)
    for i, (a, b) in out.items():
        key = _sp_key(bc, sp) + f",q={tw.q:g},eta={tw.eta:g},field={i}"
        R.info(key, "maxreg_ratio", a.ratio)
        R.info(key, "maxreg_ratio_refined", b.ratio)
        R.le(key, "maxreg_refinement_change", max(a.ratio / b.ratio, b.ratio / a.ratio), 1.5)


def run_weak(cfg: RunConfig, R: _Rows):
    from .axial import GaussPoly
    from .regularity import WeakDatum, antiderivative_split, pairing, weak_setting_apply
    from .semigroup import apply_semigroup

    phi = Field.axial(GaussPoly((0.0, 1.0), 1.0))
    g = bump().derivative((1,))
    f1 = Field.axial(GaussPoly((1.0,), 1.0))
    for z in (0.5, 1.0 + 0.5j):
        key = f"z={z}"
        a = weak_setting_apply(z, WeakDatum((g, None)), phi)
        b = weak_setting_apply(z, antiderivative_split(g), phi)
        R.le(key, "splitting_independence", abs(a - b) / abs(a), 1e-6)
        direct = pairing(apply_semigroup("dirichlet", z, g), phi)
        R.le(key, "reduction_strong", abs(a - direct), 1e-14)
        c = weak_setting_apply(z, WeakDatum((None, f1)), phi)
        neu = -pairing(apply_semigroup("neumann", z, f1), phi.derivative((1,)))
        R.le(key, "reduction_neumann", abs(c - neu), 1e-14)
        dual = -pairing(f1, apply_semigroup("dirichlet", z, phi).derivative((1,)))
        R.le(key, "dual_cross_check", abs(c - dual) / abs(c), 1e-8)


RUNNERS = {
    "norms": run_norms, "hardy": run_hardy, "semigroup": run_semigroup, "growth": run_growth,
    "blowup": run_blowup, "sector": run_sector, "hinf": run_hinf, "commutators": run_commutators,
    "elliptic": run_elliptic, "scaling": run_scaling, "maxreg": run_maxreg, "weak": run_weak,
}


def output_path(cfg: RunConfig, out=None) -> Path | None:
    target = out if out is not None else cfg.output
    if target is None:
        return None
    p = Path(target)
    root = os.environ.get("LAB_OUT_DIR")
    if not p.is_absolute() and root:
        p = Path(root) / p
    return p


def run(cfg: RunConfig, out=None) -> ExperimentReport:
    """Run one experiment. Module errors become failed rows; the CSV is written when a path is known."""
    R = _Rows(cfg.criterion)
    t0 = time.perf_counter()
    try:
        RUNNERS[cfg.experiment](cfg, R)
    except (LabError, ValueError, ArithmeticError) as e:
        R.fail(cfg.experiment, "error", e)
    meta = {"config": cfg.echo(), "version": __version__, "numpy": np.__version__,
            "quadrature": {f.name: getattr(cfg.quadrature(), f.name) for f in dc_fields(QuadratureSpec)},
            "runtime_s": time.perf_counter() - t0}
    rep = ExperimentReport(cfg, tuple(R.rows), meta)
    path = output_path(cfg, out)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(rep.to_csv())
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str))
    return rep


@dataclass(frozen=True)
class CriterionSummary:
    criterion: str
    status: str
    runtime: float
    n_rows: int
    configs: tuple


def acceptance(config_dir, out_dir=None, partial: bool = False, overrides: dict | None = None) -> list:
    """Run every ``*.cfg`` in a directory and summarise per criterion.

    Raises MissingCriterion when a criterion has no config, unless ``partial``
    (an empty directory always raises).
    """
    paths = sorted(Path(config_dir).glob("*.cfg"))
    cfgs = [(p, load_config(p, overrides)) for p in paths]
    covered = {c.criterion for _, c in cfgs}
    missing = [c for c in CRITERIA if c not in covered]
    if not cfgs or (missing and not partial):
        raise MissingCriterion(missing)
    summary = []
    for crit in CRITERIA:
        mine = [(p, c) for p, c in cfgs if c.criterion == crit]
        if not mine:
            continue
        t0 = time.perf_counter()
        ok, n = True, 0
        for p, c in mine:
            out = None if out_dir is None else Path(out_dir) / (p.stem + ".csv")
            rep = run(c, out)
            ok &= rep.passed
            n += len(rep.rows)
        summary.append(CriterionSummary(crit, "PASS" if ok else "FAIL", time.perf_counter() - t0, n,
                                        tuple(p.name for p, _ in mine)))
    return summary


def default_config_dir() -> Path:
    return Path(__file__).parent / "configs"
