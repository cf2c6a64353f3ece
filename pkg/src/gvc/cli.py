"""Scenario-driven command line: assemble algebra + grid + fields + Lagrangian
from a JSON scenario and run the verification suites.

Exit codes: 0 when every asserted bound holds, 2 when an assertion fails
(scientific failure), 1 on input errors (malformed JSON, unknown presets,
shape mismatches) with a diagnostic naming the offending field.

Reports are deterministic for a fixed scenario + seed except for the
``timestamp`` field; they embed the scenario hash and library version.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np


def _cap_threads():
    cap = os.environ.get("GVC_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(int(cap))
    except Exception:
        pass


VERIFY_SUITES = ("fibration", "jacobi", "gauge", "selfdual", "regularity")

#: report keys whose refinement ratios are meaningful (second-order residuals)
_REFINABLE = {
    "fibration": ("el_norm", "hc_second_norm"),
    "jacobi": ("oracle_gap",),
    "gauge": ("invariance_defect",),
    "selfdual": ("sd_defect", "asd_defect", "el_norm"),
    "regularity": (),
}

#: residual values below this are floating-point floor; ratios are noise
_RATIO_FLOOR = 1e-11


def _assertion(name, value, bound, op="<="):
    if op == "<=":
        ok = value <= bound
    elif op == ">=":
        ok = value >= bound
    else:
        ok = value == bound
    return {"name": name, "value": value, "bound": bound, "op": op, "passed": bool(ok)}


def _apply_overrides(results, tolerances, assertions):
    for key, bound in tolerances.get("assert_max", {}).items():
        if key not in results:
            raise _input_error(f"tolerances.assert_max: unknown report key {key!r}")
        assertions.append(_assertion(f"max:{key}", float(results[key]), float(bound), "<="))
    for key, bound in tolerances.get("assert_min", {}).items():
        if key not in results:
            raise _input_error(f"tolerances.assert_min: unknown report key {key!r}")
        assertions.append(_assertion(f"min:{key}", float(results[key]), float(bound), ">="))


def _input_error(msg):
    from .scenario import ScenarioError

    return ScenarioError(msg)


def _suite_fibration(sc):
    from . import variational
    from .fields import TwoTensorField, sym
    from .gauge import NonInvariantControl

    if isinstance(sc.lagrangian, NonInvariantControl):
        raise _input_error("lagrangian.type: fibration requires a curvature Lagrangian")
    s = sc.connection("s")
    t = sc.tensor("t")
    if t is None:
        zero = np.zeros(sc.grid.shape + (sc.grid.n, sc.grid.n, sc.algebra.dim_g))
        t = TwoTensorField(grid=sc.grid, t=zero, symmetry="symmetric")
    params = sc.raw.get("params", {})
    rep = variational.verify_fibration(
        sc.lagrangian,
        s,
        t,
        sc.algebra,
        kernel_points=int(params.get("kernel_points", 0)),
        rng=np.random.default_rng([sc.seed, 77]),
    )
    results = rep.as_dict()
    h2 = sc.h_max() ** 2
    assertions = [
        _assertion("hc_first<=el+C*h^2", rep.hc_first_norm, rep.el_norm + sc.C() * h2),
        _assertion("hc_second<=el+C*h^2", rep.hc_second_norm, rep.el_norm + sc.C() * h2),
        _assertion("curv_defect", rep.curv_defect, 1e-12),
        _assertion("alt_delta_norm", rep.alt_delta_norm, 1e-12),
    ]
    if rep.kernel_dim is not None:
        assertions.append(
            _assertion("kernel_dim", rep.kernel_dim, rep.kernel_dim_expected, "==")
        )
    return results, assertions


def _suite_jacobi(sc):
    from . import jacobi as jac
    from .fields import prolong, JetVariationField
    from .gauge import NonInvariantControl

    if isinstance(sc.lagrangian, NonInvariantControl):
        raise _input_error("lagrangian.type: jacobi requires a curvature Lagrangian")
    s = sc.connection("s")
    X = sc.variation("X")
    t = sc.tensor("t")
    sbar = prolong(s)
    from .fields import prolong_variation

    xbar = prolong_variation(s, X)
    if t is not None:
        xbar = JetVariationField(grid=sc.grid, v=xbar.v, dv=xbar.dv + t.t)
    jr = jac.jacobi_residual(sc.lagrangian, sbar, xbar, sc.algebra)
    hol = jac.jacobi_residual_holonomic(sc.lagrangian, s, X, sc.algebra)
    eps = 1e-4 * max(1.0, float(np.max(np.abs(s.a)))) / max(1.0, float(np.max(np.abs(X.v))))
    oracle = jac.linearize_el_fd(sc.lagrangian, s, X, sc.algebra, eps=eps)
    from .fields import max_abs

    gap = max_abs(sc.grid, hol - oracle)
    scale = jac.oracle_scale(sc.grid, X, oracle)
    _, _, sym_defect = jac.t2_decompose(sc.lagrangian, sbar, xbar, sc.algebra)
    results = {
        "jac_first": jr.first_max(),
        "jac_second": jr.second_max(),
        "oracle_gap": gap,
        "sym_defect": sym_defect,
        "oracle_scale": scale,
        "eps_used": eps,
    }
    h2 = sc.h_max() ** 2
    assertions = [
        _assertion("oracle_gap<=5(eps^2+h^2)scale", gap, 5.0 * (eps**2 + h2) * scale),
    ]
    if t is None or t.symmetry == "symmetric":
        assertions.append(_assertion("jac_second", jr.second_max(), 1e-12))
    return results, assertions


def _suite_gauge(sc):
    from . import gauge as gg
    from .fields import prolong
    from .gauge import NonInvariantControl

    s = sc.connection("s")
    eps_field = sc.gauge_parameter("eps")
    params = sc.raw.get("params", {})
    flow_step = float(params.get("flow_step", 1e-3))
    step = float(params.get("step", 1e-2))
    inv = gg.check_gauge_invariance(
        sc.lagrangian, s, eps_field, sc.algebra, flow_step=flow_step
    )
    results = {"invariance_defect": inv, "flow_step": flow_step, "step": step}
    h2 = sc.h_max() ** 2
    assertions = [
        _assertion(
            "invariance<=C(h^2+step^2)", inv, sc.C() * (h2 + flow_step**2)
        )
    ]
    if not isinstance(sc.lagrangian, NonInvariantControl):
        pres = gg.check_solution_preservation(
            sc.lagrangian, s, eps_field, sc.algebra, step=step
        )
        equi = gg.check_rho_equivariance(prolong(s), eps_field, sc.algebra, step=step)
        results.update(
            preservation_defect=pres.defect,
            equivariance_defect=equi,
            el_before=pres.el_before,
            el_after=pres.el_after,
            preservation_mode=pres.mode,
        )
        if pres.mode == "abelian_finite":
            assertions.append(_assertion("preservation_defect", pres.defect, 1e-12))
        else:
            assertions.append(
                _assertion(
                    "el_after<=eps0+C*step^2",
                    pres.el_after,
                    sc.eps0() + sc.C() * step**2,
                )
            )
        assertions.append(_assertion("equivariance_defect", equi, 1e-12))
    return results, assertions


def _suite_selfdual(sc):
    from .fields import JetField, prolong
    from .gauge import NonInvariantControl
    from .hodge import MetricContext, selfdual_check

    if isinstance(sc.lagrangian, NonInvariantControl):
        raise _input_error("lagrangian.type: selfdual requires a curvature Lagrangian")
    s = sc.connection("s")
    t = sc.tensor("t")
    sbar = prolong(s)
    if t is not None:
        sbar = JetField(base=s, da=sbar.da + t.t)
    ctx = MetricContext.from_chart(sc.grid)
    rep = selfdual_check(sbar, sc.algebra, ctx, sc.pairing)
    results = rep.as_dict()
    h2 = sc.h_max() ** 2
    assertions = [
        _assertion(
            "min(sd,asd)<=eps0+C*h^2",
            min(rep.sd_defect, rep.asd_defect),
            sc.eps0() + sc.C() * h2,
        ),
        _assertion("el_norm<=eps0+C*h^2", rep.el_norm, sc.eps0() + sc.C() * h2),
    ]
    if t is None or t.symmetry == "symmetric":
        assertions.append(_assertion("alt_defect", rep.alt_defect, 1e-12))
    return results, assertions


def _suite_regularity(sc):
    from .fields import prolong
    from .gauge import NonInvariantControl
    from .lagrangian import hessian

    if isinstance(sc.lagrangian, NonInvariantControl):
        raise _input_error("lagrangian.type: regularity requires a curvature Lagrangian")
    s = sc.connection("s", required=False)
    if s is None:
        from .fields import ConnectionField

        s = ConnectionField(
            grid=sc.grid, a=np.zeros(sc.grid.shape + (sc.grid.n, sc.algebra.dim_g))
        )
    at = tuple(d // 2 for d in sc.grid.shape)
    rep = hessian(sc.lagrangian, prolong(s), sc.algebra, at)
    results = {
        "singular_rows_ok": rep.singular_rows_ok,
        "reduced_det": rep.reduced_det,
        "reduced_cond": rep.reduced_cond,
        "full_dim": rep.full.shape[0],
        "reduced_dim": rep.reduced.shape[0],
    }
    assertions = [
        _assertion("singular_rows_ok", 1.0 if rep.singular_rows_ok else 0.0, 1.0, "=="),
        _assertion("reduced_det_nonzero", abs(rep.reduced_det), 0.0, ">="),
    ]
    # strict nondegeneracy: |det| must exceed the floating floor
    assertions[-1] = _assertion("reduced_det_nonzero", abs(rep.reduced_det), 1e-12, ">=")
    return results, assertions


_SUITES = {
    "fibration": _suite_fibration,
    "jacobi": _suite_jacobi,
    "gauge": _suite_gauge,
    "selfdual": _suite_selfdual,
    "regularity": _suite_regularity,
}


def _run_one(suite: str, sc):
    results, assertions = _SUITES[suite](sc)
    _apply_overrides(results, sc.tolerances, assertions)
    return results, assertions


def _scenario_hash(raw: dict, seed: int) -> str:
    canon = json.dumps({"scenario": raw, "seed": seed}, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()


def run(command: list[str], scenario_path: str, out_path: str | None = None,
        seed: int | None = None, refine: int = 0) -> int:
    """Execute a CLI command; returns the process exit code (0 / 1 / 2)."""
    from . import __version__
    from .scenario import ScenarioError, load_scenario

    try:
        with open(scenario_path) as fh:
            text = fh.read()
        raw = json.loads(text) if text.strip() else {}
    except OSError as e:
        print(f"error: cannot read scenario: {e}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as e:
        print(f"error: malformed JSON in scenario: {e}", file=sys.stderr)
        return 1

    try:
        sc = load_scenario(raw, seed_override=seed)
        if command[0] == "verify":
            suites = [command[1]]
        else:  # report all
            suites = ["regularity"]
            f = sc.field_specs
            if "s" in f:
                suites.append("fibration")
            if "s" in f and "X" in f:
                suites.append("jacobi")
            if "s" in f and "eps" in f:
                suites.append("gauge")
            if "s" in f and sc.grid.n == 4 and sc.grid.signature[1] == 0:
                suites.append("selfdual")

        all_assertions = []
        results_by_suite = {}
        ratios = {}
        for suite in suites:
            if refine > 0 and suite != "regularity":
                levels = []
                grid = sc.grid
                level_sc = sc
                for lvl in range(refine + 1):
                    if lvl > 0:
                        grid = grid.refine()
                        level_sc = sc.with_grid(grid)
                    res, asserts = _run_one(suite, level_sc)
                    levels.append(res)
                    for a in asserts:
                        a["name"] = f"{suite}[h/{2**lvl}]:{a['name']}"
                    all_assertions.extend(asserts)
                results_by_suite[suite] = {"levels": levels}
                suite_ratios = {}
                for key in _REFINABLE.get(suite, ()):
                    vals = [lv.get(key) for lv in levels]
                    rr = []
                    for a, b in zip(vals, vals[1:]):
                        if a is None or b is None or a < _RATIO_FLOOR or b < _RATIO_FLOOR:
                            rr.append(None)
                        else:
                            rr.append(a / b)
                    suite_ratios[key] = rr
                ratios[suite] = suite_ratios
            else:
                res, asserts = _run_one(suite, sc)
                results_by_suite[suite] = res
                for a in asserts:
                    a["name"] = f"{suite}:{a['name']}"
                all_assertions.extend(asserts)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    passed = all(a["passed"] for a in all_assertions)
    report = {
        "command": " ".join(command),
        "library_version": __version__,
        "scenario_hash": _scenario_hash(raw, sc.seed),
        "seed": sc.seed,
        "refine": refine,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "results": results_by_suite if len(suites) > 1 else results_by_suite[suites[0]],
        "ratios": ratios or None,
        "assertions": all_assertions,
        "passed": passed,
    }
    text = json.dumps(report, sort_keys=True, indent=2, default=float)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if not passed:
        failed = [a["name"] for a in all_assertions if not a["passed"]]
        print(f"FAILED assertions: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> None:
    _cap_threads()
    parser = argparse.ArgumentParser(prog="gvc", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)
    pv = sub.add_parser("verify", help="run one verification suite")
    pv.add_argument("suite", choices=VERIFY_SUITES)
    pr = sub.add_parser("report", help="run every applicable suite")
    pr.add_argument("what", choices=["all"])
    for p in (pv, pr):
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="report JSON path (default: stdout)")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument(
            "--refine",
            type=int,
            default=0,
            metavar="K",
            help="also run at h/2 .. h/2^K and report convergence ratios",
        )
    args = parser.parse_args(argv)
    command = ["verify", args.suite] if args.cmd == "verify" else ["report", "all"]
    code = run(command, args.scenario, args.out, seed=args.seed, refine=args.refine)
    sys.exit(code)


if __name__ == "__main__":
    main()
