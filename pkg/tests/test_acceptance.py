"""The twelve acceptance criteria, run through the bundled configs.

Each runner row is checked here against a tolerance pinned in this file,
independently of the status the runner assigned. Rows without a pinned
tolerance must be listed in INFO, and every required metric must appear.
"""
import math
import re
import time

import pytest

import conftest
from hslab.reports import default_config_dir, load_config, run

# metric -> (comparison, bound); "near" bounds are (target, halfwidth) and depend on the config
PINNED = {
    "AC1:oracle_rel_err": ("<=", 1e-6),
    "AC2:semigroup_law": ("<=", 1e-8),
    "AC2:continuity_monotone": ("==", 1.0),
    "AC3:dirichlet_trace": ("<=", 1e-8),
    "AC3:neumann_normal_trace": ("<=", 1e-6),
    "AC3:neumann_mass": ("<=", 1e-9),
    "AC4:growth_r2": (">=", 0.98),
    "AC5:partial_growth_ratio": (">=", 2.0),
    "AC5:membership_converged": ("==", 1.0),
    "AC5:verdict_diverges": ("==", 1.0),
    "AC6:table_variation": ("<=", 20.0),
    "AC6:small_lambda_exponent": ("near", (-1.375, 0.1)),
    "AC6:shifted_sup": ("<=", 10.0),
    "AC7:[d_1^2, R_Dir]u": ("<=", 1e-6),
    "AC7:[d_2, R_Dir]u": ("<=", 1e-6),
    "AC7:[M d_1^0, R_Dir]u + 2 R d_1^1 R u": ("<=", 1e-6),
    "AC7:[M d_1^1, R_Dir]u + 2 R d_1^2 R u": ("<=", 1e-6),
    "AC7:d_1 R_Neu u - R_Dir d_1 u": ("<=", 1e-6),
    "AC8:rational_exactness": ("<=", 1e-5),
    "AC8:contour_invariance": ("<=", 1e-5),
    "AC8:oracle_agreement": ("<=", 1e-5),
    "AC8:probe_max_ratio": ("<=", 10.0),
    "AC8:probe_battery_spread": ("<=", 2.0),
    "AC9:observed_constant": ("<=", 20.0),
    "AC9:pde_residual": ("<=", 1e-6),
    "AC9:boundary_trace": ("<=", 1e-6),
    "AC10:critical_family_increasing": ("==", 1.0),
    "AC10:extension_odd_isometry": ("<=", 1e-10),
    "AC10:extension_even_isometry": ("<=", 1e-10),
    "AC10:power_roundtrip": ("<=", 1e-12),
    "AC11:manufactured_error": ("<=", 1e-5),
    "AC11:integrated_residual": ("<=", 1e-6),
    "AC11:maxreg_refinement_change": ("<=", 1.5),
    "AC11:scaled_residual": ("<=", 1e-6),
    "AC11:homogeneous_ratio_spread": ("<=", 2.0),
    "AC12:splitting_independence": ("<=", 1e-6),
    "AC12:reduction_strong": ("<=", 1e-14),
    "AC12:reduction_neumann": ("<=", 1e-14),
    "AC12:dual_cross_check": ("<=", 1e-8),
}

# config-dependent bounds
GROWTH_SLOPE = {"ac04a_growth": (0.375, 0.05), "ac04b_growth": (0.125, 0.05), "ac04c_growth": (0.0, 0.03)}
SMALL_LAMBDA_GROWTH = {"ac09a_elliptic": 0.4 + 0.05}

INFO = {
    "AC2:continuity_residual", "AC5:partial_value", "AC6:table_sup", "AC6:small_lambda_r2",
    "AC9:rotation_ratio", "AC9:small_lambda_growth", "AC10:critical_ratio", "AC10:sobolev_norm",
    "AC11:maxreg_ratio", "AC11:maxreg_ratio_refined", "AC11:homogeneous_ratio",
}

REQUIRED = {
    "ac01_oracle": {"AC1:oracle_rel_err"},
    "ac02_law": {"AC2:semigroup_law", "AC2:continuity_monotone"},
    "ac03_traces": {"AC3:dirichlet_trace", "AC3:neumann_normal_trace", "AC3:neumann_mass"},
    "ac04a_growth": {"AC4:growth_slope", "AC4:growth_r2"},
    "ac04b_growth": {"AC4:growth_slope", "AC4:growth_r2"},
    "ac04c_growth": {"AC4:growth_slope", "AC4:growth_r2"},
    "ac05a_blowup": {"AC5:partial_growth_ratio", "AC5:membership_converged", "AC5:verdict_diverges"},
    "ac05b_blowup": {"AC5:partial_growth_ratio", "AC5:membership_converged", "AC5:verdict_diverges"},
    "ac06a_sector": {"AC6:table_variation"},
    "ac06b_sector": {"AC6:small_lambda_exponent"},
    "ac06c_sector": {"AC6:shifted_sup"},
    "ac07_commutators": {"AC7:[d_1^2, R_Dir]u", "AC7:[d_2, R_Dir]u", "AC7:d_1 R_Neu u - R_Dir d_1 u",
                         "AC7:[M d_1^0, R_Dir]u + 2 R d_1^1 R u", "AC7:[M d_1^1, R_Dir]u + 2 R d_1^2 R u"},
    "ac08_hinf": {"AC8:rational_exactness", "AC8:contour_invariance", "AC8:oracle_agreement",
                  "AC8:probe_max_ratio", "AC8:probe_battery_spread"},
    "ac09a_elliptic": {"AC9:observed_constant", "AC9:small_lambda_growth", "AC9:pde_residual",
                       "AC9:boundary_trace"},
    "ac09b_elliptic": {"AC9:observed_constant", "AC9:pde_residual", "AC9:boundary_trace"},
    "ac10a_hardy": {"AC10:hardy_ratio", "AC10:critical_family_increasing"},
    "ac10b_norms": {"AC10:extension_odd_isometry", "AC10:extension_even_isometry", "AC10:power_roundtrip"},
    "ac11a_maxreg": {"AC11:manufactured_error", "AC11:integrated_residual", "AC11:maxreg_refinement_change"},
    "ac11b_maxreg": {"AC11:manufactured_error", "AC11:integrated_residual", "AC11:maxreg_refinement_change"},
    "ac11c_scaling": {"AC11:scaled_residual"},
    "ac12_weak": {"AC12:splitting_independence", "AC12:reduction_strong", "AC12:reduction_neumann",
                  "AC12:dual_cross_check"},
}

BUDGET_S = {"AC1": 30, "AC2": 30, "AC3": 20, "AC4": 180, "AC5": 60, "AC6": 120, "AC7": 60, "AC8": 120,
            "AC9": 120, "AC10": 30, "AC11": 180, "AC12": 30}

CONFIGS = {c: sorted(s for s in REQUIRED if load_config(default_config_dir() / f"{s}.cfg").criterion == c)
           for c in BUDGET_S}


def _hardy_ceiling(key: str, p: float) -> float:
    g = float(re.search(r"gamma=([-\d.e]+)", key).group(1))
    return p / abs(g - p + 1)


def _check(stem, cfg, row, failures):
    m, v = row.metric, row.value
    if m == "AC4:growth_slope":
        target, half = GROWTH_SLOPE[stem]
        ok = abs(v - target) <= half
        bound = f"{target}±{half}"
    elif m == "AC9:small_lambda_growth" and stem in SMALL_LAMBDA_GROWTH:
        ok, bound = v <= SMALL_LAMBDA_GROWTH[stem], f"<={SMALL_LAMBDA_GROWTH[stem]}"
    elif m == "AC10:hardy_ratio":
        c = _hardy_ceiling(row.key, float(cfg.get("p", 2.0)))
        ok, bound = v <= c, f"<={c}"
    elif m in PINNED:
        op, b = PINNED[m]
        if op == "<=":
            ok = v <= b
        elif op == ">=":
            ok = v >= b
        elif op == "==":
            ok = v == b
        else:
            ok = abs(v - b[0]) <= b[1]
        bound = f"{op} {b}"
    elif m in INFO:
        return
    else:
        failures.append(f"{stem}: unpinned metric {m}")
        return
    if not (isinstance(v, (int, float)) and math.isfinite(v) and ok):
        failures.append(f"{stem}: {row.key} {m} = {v!r} violates {bound}")


@pytest.mark.parametrize("crit", list(BUDGET_S))
def test_acceptance(crit, tmp_path):
    failures, n_rows, detail = [], 0, []
    t0 = time.perf_counter()
    try:
        assert CONFIGS[crit], f"no bundled config for {crit}"
        for stem in CONFIGS[crit]:
            cfg = load_config(default_config_dir() / f"{stem}.cfg")
            rep = run(cfg, out=tmp_path / f"{stem}.csv")
            if not (tmp_path / f"{stem}.csv").exists():
                failures.append(f"{stem}: report CSV not written")
            n_rows += len(rep.rows)
            seen = {r.metric for r in rep.rows}
            missing = REQUIRED[stem] - seen
            if missing:
                failures.append(f"{stem}: missing {sorted(missing)}")
            for row in rep.rows:
                if not row.metric.startswith(crit + ":"):
                    failures.append(f"{stem}: row {row.metric} outside {crit}")
                _check(stem, cfg, row, failures)
            detail.append(stem)
        runtime = time.perf_counter() - t0
        if runtime > BUDGET_S[crit]:
            failures.append(f"runtime {runtime:.1f}s exceeds {BUDGET_S[crit]}s")
        assert not failures, "\n".join(failures)
    finally:
        runtime = time.perf_counter() - t0
        status = "FAIL" if failures or not detail else "PASS"
        line = f"{crit:5s} {status}  {runtime:6.1f}s/{BUDGET_S[crit]}s  rows={n_rows:3d}  {' '.join(detail)}"
        if failures:
            line += "  | " + failures[0]
        conftest.ACCEPTANCE_LINES[crit] = line
        print(line)


def test_acceptance_specific_settings():
    """The bundled configs exercise the parameter sets the criteria name."""
    def cfg(stem):
        return load_config(default_config_dir() / f"{stem}.cfg")

    sp = {s: (cfg(s).get("bc"), cfg(s).space()) for s in REQUIRED}
    assert (sp["ac04a_growth"][0], sp["ac04a_growth"][1].k, sp["ac04a_growth"][1].gamma) == ("dirichlet", 1, 2.5)
    assert (sp["ac04b_growth"][0], sp["ac04b_growth"][1].k, sp["ac04b_growth"][1].gamma) == ("neumann", 0, 1.5)
    assert (sp["ac04c_growth"][0], sp["ac04c_growth"][1].k, sp["ac04c_growth"][1].gamma) == ("dirichlet", 0, 1.5)
    assert {cfg(s).get("bc") for s in ("ac05a_blowup", "ac05b_blowup")} == {"dirichlet", "neumann"}
    assert (sp["ac06b_sector"][1].k, sp["ac06b_sector"][1].gamma) == (1, 2.5)
    assert float(cfg("ac06c_sector").get("lambda_shift")) > 0
    assert (sp["ac09a_elliptic"][1].k, sp["ac09a_elliptic"][1].gamma) == (1, 2.5)
    assert {(cfg(s).get("q"), cfg(s).get("eta")) for s in ("ac11a_maxreg", "ac11b_maxreg")} == {(2, 0), (2, 1)}
    assert tuple(cfg("ac11c_scaling").grid("r", ())) == (1.0, 2.0, 4.0, 8.0)
