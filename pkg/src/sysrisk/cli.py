"""Command-line entry point: ``sysrisk <subcommand> --config econ.json ...``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import binary_recovery_solve, binary_regime_solve, lemma_first_classify
from .errors import NoConvergence, SysRiskError, ValidationError
from .experiments import (
    _json_default,
    run_convergence,
    sweep_pbs,
    sweep_shocks,
    write_convergence_csv,
    write_curve_csv,
    write_summary_json,
    write_surface_csv,
)
from .finance import (
    default_metrics,
    expected_surplus,
    result_record,
    solve_clearing,
    solve_limit_clearing,
    with_connectivity,
)
from .graph import derive_seeds, sample_network
from .model import Scenario, params_from_dict, params_to_dict, validate_params

EXIT_OK, EXIT_INVALID, EXIT_NO_CONVERGENCE = 0, 1, 2


def parse_grid(text):
    """``start:stop:step`` -> inclusive array of grid points."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty grid {text!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def build_parser():
    parser = argparse.ArgumentParser(prog="sysrisk", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sysrisk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="economy JSON file")
        p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
        p.add_argument("--out", default="./out", help="output directory (default ./out)")
        p.add_argument("--zc", type=float, default=0.0, help="common shock z_c")
        p.add_argument("--zb", type=float, default=0.0, help="big-bank shock z_b")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="FIELD=JSON",
            help="override a config field, e.g. --set n=500 --set 'eta_sb=[[1,0.9],[0,0.1]]'",
        )
        return p

    p = common(sub.add_parser("solve-finite", help="clearing vector of one sampled network"))
    p.add_argument("--init", choices=("upper", "zero"), default="upper")
    common(sub.add_parser("solve-limit", help="limit aggregates and default fractions"))
    p = common(sub.add_parser("analytic", help="closed-form regime for binary shocks"))
    p.add_argument("--pbs", type=float, required=True)
    p = common(sub.add_parser("converge", help="finite-n vs limit convergence experiment"))
    p.add_argument("--n-list", type=_int_list, default=[250, 500, 1000, 2000, 4000])
    p.add_argument("--seeds", type=int, default=20, help="number of derived seeds")
    p = common(sub.add_parser("sweep-pbs", help="default fraction along the connectivity p_bs"))
    p.add_argument("--grid", type=parse_grid, default=parse_grid("0.001:0.999:0.001"))
    p.add_argument("--threshold", type=float, default=0.01)
    p = common(sub.add_parser("sweep-shocks", help="default state over a (z_b, z_c) grid"))
    p.add_argument("--pbs", type=float, default=None, help="connectivity (default: keep config laws)")
    p.add_argument("--zb-grid", type=parse_grid, default=parse_grid("0:60:0.6"))
    p.add_argument("--zc-grid", type=parse_grid, default=parse_grid("0:30:0.3"))
    common(sub.add_parser("surplus", help="expected surplus at T=1 and T=2"))
    return parser


def _effective_config(args):
    with open(args.config) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.config}: invalid JSON ({exc})") from None
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ValidationError(f"--set expects FIELD=JSON, got {item!r}")
        try:
            data[key] = json.loads(raw)
        except json.JSONDecodeError:
            raise ValidationError(f"--set {key}: value is not valid JSON") from None
    return data


def run(args):
    started = datetime.now(timezone.utc).isoformat()
    config = _effective_config(args)
    vp = validate_params(params_from_dict(config))
    scenario = Scenario(z_c=args.zc, z_b=args.zb)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmd = args.command
    result = None

    if cmd == "solve-finite":
        net = sample_network(vp, args.seed)
        cv = solve_clearing(net, vp, scenario, init=args.init)
        with open(out / "clearing.csv", "w") as fh:
            fh.write("i,x,agg,y,defaulted\n")
            for i, (x, a, y, d) in enumerate(zip(cv.x_small, cv.agg_small, net.y_draws, cv.defaulted)):
                fh.write(f"{i},{x!r},{a!r},{y!r},{int(d)}\n")
        result = {
            "n": net.n,
            "seed": args.seed,
            "x_big": cv.x_big,
            "agg_big": cv.agg_big,
            "default_fraction": cv.default_fraction,
            "iterations": cv.iterations,
            "residual": cv.residual,
            "resampled_rows": net.resampled_rows,
        }
        write_summary_json(result, out / "finite.json")
    elif cmd == "solve-limit":
        sol = solve_limit_clearing(vp, scenario)
        m = default_metrics(sol, vp, scenario)
        result = result_record(scenario, sol, m)
        result["iterations"] = sol.iterations
        write_summary_json(result, out / "limit.json")
    elif cmd == "analytic":
        r = binary_regime_solve(vp, scenario, args.pbs)
        result = r.to_dict()
        result["lemma_first"] = lemma_first_classify(with_connectivity(vp, args.pbs), scenario).value
        if vp.recovery is not None:
            try:
                result["recovery"] = asdict(binary_recovery_solve(vp, scenario, args.pbs))
            except ValidationError as exc:
                result["recovery"] = {"error": str(exc)}
        write_summary_json(result, out / "analytic.json")
    elif cmd == "converge":
        report = run_convergence(vp, scenario, args.n_list, derive_seeds(args.seed, args.seeds))
        write_convergence_csv(report, out / "convergence.csv")
        result = {"limit": report.limit, "medians": report.summary, "seeds": report.seeds}
        write_summary_json(result, out / "summary.json")
    elif cmd == "sweep-pbs":
        curve = sweep_pbs(vp, scenario, args.grid, threshold=args.threshold)
        write_curve_csv(curve, out / "curve.csv")
        result = {"jumps": curve.jumps, "points": len(curve.points)}
        write_summary_json(result, out / "summary.json")
    elif cmd == "sweep-shocks":
        surface = sweep_shocks(vp, args.pbs, args.zb_grid, args.zc_grid)
        write_surface_csv(surface, out / "surface.csv")
        result = {
            "levels": surface.levels(),
            "zc_transitions_at_zb0": surface.small_transitions("zc", 0),
            "big_transition_edges": len(surface.contours()["big"]),
        }
        write_summary_json(result, out / "summary.json")
    elif cmd == "surplus":
        sol = solve_limit_clearing(vp, scenario)
        rep = expected_surplus(sol, vp, scenario)
        m = default_metrics(sol, vp, scenario)
        result = result_record(scenario, sol, m, rep)
        result["psi_big"] = rep.psi_big
        result["psi_small"] = rep.psi_small_dist.pairs()
        write_summary_json(result, out / "surplus.json")

    manifest = {
        "config_path": str(args.config),
        "subcommand": cmd,
        "root_seed": args.seed,
        "tool_version": __version__,
        "output_dir": str(out),
        "timestamps": {"started": started, "finished": datetime.now(timezone.utc).isoformat()},
        "argv": sys.argv[1:] if args.argv is None else args.argv,
        "scenario": {"z_c": scenario.z_c, "z_b": scenario.z_b},
        "effective_config": params_to_dict(vp.params),
    }
    write_summary_json(manifest, out / "manifest.json")
    return result


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = None if argv is None else list(argv)
    try:
        result = run(args)
    except NoConvergence as exc:
        print(f"sysrisk: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ValidationError, FileNotFoundError) as exc:
        print(f"sysrisk: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SysRiskError as exc:
        print(f"sysrisk: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(result, default=_json_default, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
