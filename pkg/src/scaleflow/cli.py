"""Config-driven experiment runner.

Subcommands mirror the verification surfaces: ``verify-action``,
``contract``, ``homogeneity``, ``construct-measure``, ``mean`` and
``sigma``.  Each reads one YAML config, writes CSV/JSON/plot reports into
the output directory and exits 0 only when every verdict passes (2 for
config errors, 3 for numerical resolution failures, 1 for verification
failures).  Reports are byte-identical across repeated runs.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as cfg_mod
from . import reports
from .actions import Ball, certify_absorption, certify_escape, certify_group_law
from .config import ConfigError
from .contraction import ContractionFlow, certify_submultiplicative, fixed_point
from .meanvalue import empirical_mean, mean_with_estimate, verify_convolution, \
    verify_translation_invariance
from .measures import (
    SupportEscapeError,
    check_factor_multiplicative,
    construct_measure,
    verify_center_null,
    verify_homogeneity,
)
from .quadrature import Box, UnderResolvedError
from .sigma import trace_norm_bound_check, verify_sigma_convergence

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_RESOLUTION = 3


def _parallel(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _status(name: str, passed: bool, detail: str = "") -> None:
    flag = "pass" if passed else "FAIL"
    suffix = f" {detail}" if detail else ""
    print(f"[{flag}] {name}{suffix}")


def _run_verify_action(cfg, header, out, jobs) -> bool:
    group = cfg_mod.build_group(cfg)
    action = cfg_mod.build_action(cfg, group)
    ladder = cfg_mod.build_ladder(cfg, group)
    seed = int(cfg.get("seed", 0))
    results = {}
    law = certify_group_law(action, sample_count=256, seed=seed)
    results["group_law"] = law.to_json()
    _status("group-law", law.passed, f"worst={law.worst_violation:.3e}")
    ok = law.passed
    block = cfg.get("absorption")
    if block:
        source = cfg_mod.build_ball(block, "source_center", "source_radius", action.dimension)
        target = Ball(center=tuple(action.center()), radius=float(block["target_radius"]))
        cert = certify_absorption(
            action, source, target, ladder,
            directions_per_dim=int(block.get("directions_per_dim", 64)),
        )
        results["absorption"] = cert.to_json()
        _status("absorption", cert.passed, f"threshold={cert.threshold}")
        ok = ok and cert.passed
    block = cfg.get("escape")
    if block:
        rep = certify_escape(action, block["point"], ladder, float(block["radius"]))
        results["escape"] = rep.to_json()
        _status("escape", rep.passed, f"threshold={rep.threshold}")
        ok = ok and rep.passed
    reports.write_json(f"{out}/action_certificates.json", {"passed": ok, "results": results}, header)
    rows = []
    for name, payload in results.items():
        rows.append({"check": name, "passed": payload["passed"]})
    reports.write_csv(f"{out}/action_summary.csv", ["check", "passed"], rows, header)
    return ok


def _run_contract(cfg, header, out, jobs) -> bool:
    group = cfg_mod.build_group(cfg)
    action = cfg_mod.build_action(cfg, group)
    block = cfg.get("contraction") or {}
    seed = int(cfg.get("seed", 0))
    flow = ContractionFlow(action)
    sub = certify_submultiplicative(
        flow, sample_count=int(block.get("pairs", 256)), seed=seed,
        ladder=cfg_mod.build_ladder(cfg, group),
    )
    _status("submultiplicative", sub.passed, f"worst_excess={sub.worst_excess:.3e}")
    eps = group.validate(block.get("eps", 0.5 if group.theta == 0.0 else -1.0))
    starts = int(block.get("starts", 10))
    tol = float(block.get("tol", 1e-12))
    rng = np.random.default_rng(seed)
    fp_rows = []
    ok = sub.passed
    for i in range(starts):
        x0 = rng.uniform(-8.0, 8.0, size=action.dimension)
        try:
            result = fixed_point(flow, eps, x0, tol=tol,
                                 max_iter=int(block.get("max_iter", 10**5)))
            fp_rows.append(
                {
                    "start": i,
                    "residual": result.residual,
                    "iterations": result.iterations,
                    "center_distance": result.center_distance,
                    "passed": True,
                }
            )
        except (RuntimeError, ValueError) as exc:
            fp_rows.append({"start": i, "residual": float("nan"), "iterations": 0,
                            "center_distance": float("nan"), "passed": False})
            _status("fixed-point", False, str(exc))
            ok = False
    fp_ok = all(r["passed"] for r in fp_rows)
    _status("fixed-point", fp_ok, f"starts={starts} eps={eps}")
    reports.write_json(
        f"{out}/contraction.json",
        {"passed": ok and fp_ok, "submultiplicative": sub.to_json(), "fixed_point": fp_rows},
        header,
    )
    reports.write_csv(
        f"{out}/fixed_point.csv",
        ["start", "iterations", "residual", "center_distance", "passed"],
        fp_rows, header,
    )
    return ok and fp_ok


_HOMOG_FIELDS = ["eps", "phi", "lhs", "rhs", "abs_err", "rel_err", "quad_est", "passed"]


def _run_homogeneity(cfg, header, out, jobs) -> bool:
    group = cfg_mod.build_group(cfg)
    action = cfg_mod.build_action(cfg, group)
    spec = cfg_mod.build_grid_spec(cfg)
    hz = cfg_mod.build_homogenizer(cfg, action, spec)
    ladder = cfg_mod.build_ladder(cfg, group)
    battery = cfg_mod.build_battery(cfg, action.dimension)
    tol = cfg_mod.tolerance(cfg, "rel", 1e-6)
    partials = _parallel(
        lambda phi: verify_homogeneity(hz, ladder, [phi], tol_rel=tol), battery, jobs
    )
    rows = [row for part in partials for row in part.rows]
    passed = all(part.passed for part in partials)
    worst = max(row["rel_err"] for row in rows)
    mult_defect = check_factor_multiplicative(hz, seed=int(cfg.get("seed", 0)))
    null = verify_center_null(hz)
    ok = passed and mult_defect <= 1e-9 and null.passed
    _status("homogeneity", passed, f"worst_rel={worst:.3e} tol={tol:g}")
    _status("factor-multiplicative", mult_defect <= 1e-9, f"defect={mult_defect:.3e}")
    _status("center-null", null.passed)
    reports.write_csv(f"{out}/homogeneity.csv", _HOMOG_FIELDS, rows, header)
    reports.write_json(
        f"{out}/homogeneity.json",
        {
            "passed": ok,
            "worst_rel_err": worst,
            "factor_multiplicative_defect": mult_defect,
            "center_null": null.to_json(),
            "decay": partials[0].factor_decay,
        },
        header,
    )
    return ok


def _run_construct(cfg, header, out, jobs) -> bool:
    group = cfg_mod.build_group(cfg)
    action = cfg_mod.build_action(cfg, group)
    block = cfg.get("construct") or {}
    seed_measure = cfg_mod.build_seed_measure(block.get("seed_measure", {"kind": "dirac", "point": [1.0]}))
    measure = construct_measure(group, action, seed_measure,
                                tail_cut=float(block.get("tail_cut", 1e-10)))
    hz = measure.as_homogenizer(cfg_mod.build_grid_spec(cfg))
    ladder = cfg_mod.build_ladder(cfg, group)
    battery = cfg_mod.build_battery(cfg, action.dimension)
    tol = cfg_mod.tolerance(cfg, "rel", 1e-5)
    partials = _parallel(
        lambda phi: verify_homogeneity(hz, ladder, [phi], tol_rel=tol), battery, jobs
    )
    rows = [row for part in partials for row in part.rows]
    passed = all(part.passed for part in partials)
    worst = max(row["rel_err"] for row in rows)
    _status("construct-homogeneity", passed, f"worst_rel={worst:.3e} tol={tol:g}")
    reports.write_csv(f"{out}/construct_homogeneity.csv", _HOMOG_FIELDS, rows, header)
    reports.write_json(
        f"{out}/construct_homogeneity.json", {"passed": passed, "worst_rel_err": worst}, header
    )
    return passed


def _run_mean(cfg, header, out, jobs) -> bool:
    group = cfg_mod.build_group(cfg)
    action = cfg_mod.build_action(cfg, group)
    spec = cfg_mod.build_grid_spec(cfg)
    hz = cfg_mod.build_homogenizer(cfg, action, spec)
    block = cfg.get("mean") or {}
    if "function" not in block:
        raise ConfigError("mean runs need a mean.function block")
    u = cfg_mod.build_mean_function(block["function"])
    phi = cfg_mod.build_test_function(
        block.get("phi", {"kind": "triangle", "center": 0.3, "width": 0.7}), action.dimension
    )
    ladder = cfg_mod.build_ladder(cfg, group)
    value, est = mean_with_estimate(u)
    print(f"closed-form mean: {value} (quadrature estimate {est:.1e})")
    report = empirical_mean(u, hz, phi, ladder, spec)
    tol = cfg_mod.tolerance(cfg, "rel", 1e-2)
    order_floor = cfg_mod.tolerance(cfg, "decay_order", 0.9)
    ok = report.final_error <= tol and report.fitted_order >= order_floor
    _status(
        "empirical-mean", ok,
        f"final_err={report.final_error:.3e} order={report.fitted_order:.2f}",
    )
    results = {"empirical": report.to_json(), "closed_form": value}
    if block.get("shift") is not None:
        trans = verify_translation_invariance(u, hz, block["shift"], phi, ladder, spec)
        results["translation"] = trans.to_json()
        _status("translation-invariance", trans.passed, f"diff={trans.difference:.3e}")
        ok = ok and trans.passed
    if block.get("kernel") is not None:
        kernel = cfg_mod.build_test_function(block["kernel"], action.dimension)
        conv = verify_convolution(kernel, u, hz, phi, ladder, spec)
        results["convolution"] = conv.to_json()
        _status("convolution", conv.passed, f"diff={conv.difference:.3e}")
        ok = ok and conv.passed
    rows = [
        {"eps": r["eps"], "value": r["value"], "abs_err": r["abs_err"], "quad_est": r["quad_est"]}
        for r in report.rows
    ]
    reports.write_csv(f"{out}/mean.csv", ["eps", "value", "abs_err", "quad_est"], rows, header)
    reports.write_json(f"{out}/mean.json", {"passed": ok, "results": results}, header)
    reports.write_curve(f"{out}/mean_error.dat", reports.log_error_curve(report.rows), header)
    return ok


_SIGMA_FIELDS = ["psi", "eps", "lhs", "rhs", "abs_err", "rel_err", "quad_est", "nodes",
                 "oscillation_free"]


def _run_sigma(cfg, header, out, jobs) -> bool:
    group = cfg_mod.build_group(cfg)
    action = cfg_mod.build_action(cfg, group)
    spec = cfg_mod.build_grid_spec(cfg)
    block = cfg.get("sigma")
    if not block:
        raise ConfigError("sigma runs need a sigma block")
    algebra = cfg_mod.build_algebra(block.get("algebra", {"kind": "periodic", "dimension": 1}))
    domain = Box.from_config(block.get("domain", [[0.0, 1.0]]))
    u = cfg_mod.build_field(block["u0"], algebra, domain)
    battery = [cfg_mod.build_field(b, algebra, domain) for b in block.get("battery", [])]
    if not battery:
        raise ConfigError("sigma runs need a non-empty battery")
    ladder = cfg_mod.build_ladder(cfg, group)
    tol = cfg_mod.tolerance(cfg, "rel", 1e-2)
    order_floor = cfg_mod.tolerance(cfg, "decay_order", 0.9)
    p = float(block.get("p", 2.0))
    partials = _parallel(
        lambda psi: verify_sigma_convergence(
            u, [psi], action, ladder, spec, tol=tol, p=p, check_norm_bound=False
        ),
        battery, jobs,
    )
    rows = [row for part in partials for row in part.rows]
    per_test = {}
    for part in partials:
        per_test.update(part.per_test)
    norm_rows = []
    for field in [u, *battery]:
        for eps in ladder:
            entry = trace_norm_bound_check(field, action, eps, p, spec)
            entry["field"] = field.name
            norm_rows.append(entry)
    norm_ok = all(r["passed"] for r in norm_rows)
    passed = all(part.passed for part in partials) and norm_ok
    orders_ok = all(
        info["fitted_order"] >= order_floor for info in per_test.values()
    )
    ok = passed and orders_ok
    for name, info in sorted(per_test.items()):
        _status(
            f"sigma[{name}]",
            info["final_rel_err"] <= tol and info["fitted_order"] >= order_floor,
            f"final_rel={info['final_rel_err']:.3e} order={info['fitted_order']:.2f}",
        )
    _status("trace-norm-bound", norm_ok)
    reports.write_csv(f"{out}/sigma.csv", _SIGMA_FIELDS, rows, header)
    reports.write_json(
        f"{out}/sigma.json",
        {"passed": ok, "per_test": per_test,
         "norm_bound": [{k: v for k, v in r.items()} for r in norm_rows]},
        header,
    )
    for name in sorted(per_test):
        curve = reports.log_error_curve(
            [r for r in rows if r["psi"] == name], err_key="rel_err"
        )
        reports.write_curve(f"{out}/sigma_{name}.dat", curve, header)
    return ok


_RUNNERS = {
    "verify-action": _run_verify_action,
    "contract": _run_contract,
    "homogeneity": _run_homogeneity,
    "construct-measure": _run_construct,
    "mean": _run_mean,
    "sigma": _run_sigma,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scaleflow",
        description="verify scaling-group flow identities from a YAML config",
    )
    parser.add_argument("subcommand", choices=sorted(_RUNNERS))
    parser.add_argument("--config", required=True, help="path to the YAML config")
    parser.add_argument("--out", default="out", help="report output directory")
    parser.add_argument("--jobs", type=int, default=1, help="parallel battery entries")
    parser.add_argument(
        "--tol-override", action="append", default=[], metavar="KEY=VALUE",
        help="override a tolerances entry",
    )
    args = parser.parse_args(argv)
    try:
        cfg = cfg_mod.load_config(args.config)
        cfg_mod.validate_config(cfg)
        cfg_mod.apply_overrides(cfg, args.tol_override)
        header = reports.report_header(
            reports.config_digest(args.config), int(cfg.get("seed", 0))
        )
        passed = _RUNNERS[args.subcommand](cfg, header, args.out, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnderResolvedError, SupportEscapeError) as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    print("PASS" if passed else "FAIL")
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
