"""Command-line runner: ``younglab run|refine --config <path>`` and ``younglab list-suites``.

Exit status: 0 when every suite passes, 1 on violations, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

from .config import MEMORY_LIMIT, SUITE_CHOICES, ConfigError, SuiteConfig, load_config
from .report import ExperimentReport
from .suites import refinement_deltas, run

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE = 0, 1, 2
REFINE_TOL = 0.05
OUTPUT_ENV = "YOUNGLAB_OUTPUT"

CSV_COLUMNS = ("suite", "case_id", "params", "lhs", "rhs", "ratio", "pass", "anchor")

SUITE_HELP = {
    "axioms": "lattice, Fatou, ball-indicator and local-integrability rows per space",
    "young": "||f*g||_X <= ||f||_X ||g||_1 over random pairs",
    "converse-young": "box-mollifier averages recover the norm of a translate",
    "maximal": "exponential-kernel bound by the maximal function; vector-valued maximal sweep",
    "kernel-decay": "L1 norm of the heat kernel restricted to |xi| >= 2^j against e^{-4^j t}",
    "besov": "Besov index embeddings and the lift operator",
    "linear-term": "scale uniformity of the free heat flow in L^tau(B^0_{X,1})",
    "duhamel-term": "Duhamel term ratios, exponential duality and the L^1-in-time bound",
    "maxreg": "full maximal-regularity ratios, Lorentz-in-time diagonal, translation invariance",
    "all": "every suite above",
}


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else _fmt(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def write_outputs(prefix: str, cfg: SuiteConfig, reports: list[ExperimentReport],
                  refinement: dict | None = None) -> tuple[str, str]:
    """Write ``<prefix>.report.json`` and ``<prefix>.cases.csv``; return the paths."""
    json_path, csv_path = f"{prefix}.report.json", f"{prefix}.cases.csv"
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)
    doc = {
        "config": cfg.to_dict(),
        "passed": all(r.passed for r in reports),
        "suites": {r.suite: r.aggregate() | {"notes": r.notes} for r in reports},
    }
    if refinement is not None:
        doc["refinement"] = refinement
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rep in reports:
            for c in rep.cases:
                params = c.params | ({"error": c.error} if c.error else {})
                w.writerow([rep.suite, c.case_id,
                            json.dumps(_jsonable(params), sort_keys=True, allow_nan=False),
                            _fmt(c.lhs), _fmt(c.rhs), _fmt(c.ratio),
                            "true" if c.passed else "false", c.anchor])
    return json_path, csv_path


def _summary(rep: ExperimentReport) -> str:
    agg = rep.aggregate()
    status = "PASS" if rep.passed else "FAIL"
    failed = [k for k, ok in rep.checks.items() if not ok]
    extra = f" failed checks: {', '.join(failed)}" if failed else ""
    return (f"{status} {rep.suite}: {agg['count']} cases, {agg['violations']} violations, "
            f"sup ratio {_fmt(rep.checked_sup)}" + (f" (ceiling {_fmt(rep.ceiling)})" if rep.ceiling else "")
            + extra)


def _output_prefix(cfg: SuiteConfig) -> SuiteConfig:
    env = os.environ.get(OUTPUT_ENV)
    return replace(cfg, output=env) if env else cfg


def cmd_run(cfg: SuiteConfig) -> int:
    if cfg.estimated_bytes() > MEMORY_LIMIT:
        raise ConfigError("grid", f"run needs about {cfg.estimated_bytes() / 2**30:.1f} GiB, "
                                  f"above the {MEMORY_LIMIT / 2**30:.0f} GiB limit")
    reports = run(cfg)
    paths = write_outputs(cfg.output, cfg, reports)
    for r in reports:
        print(_summary(r))
    print(f"wrote {paths[0]} and {paths[1]}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATIONS


def cmd_refine(cfg: SuiteConfig) -> int:
    fine_cfg = cfg.refined()
    need = fine_cfg.estimated_bytes()
    if need > MEMORY_LIMIT:
        raise ConfigError("grid", f"refinement to N={fine_cfg.N}, cells={fine_cfg.cells} needs about "
                                  f"{need / 2**30:.1f} GiB, above the {MEMORY_LIMIT / 2**30:.0f} GiB limit")
    coarse, fine = run(cfg), run(fine_cfg)
    refinement = {}
    ok = True
    for a, b in zip(coarse, fine):
        deltas = refinement_deltas(a, b)
        delta = max(deltas.values()) if deltas else 0.0
        for rep in (a, b):
            rep.refinement_delta = delta
        stable = delta <= REFINE_TOL
        ok &= stable and a.passed and b.passed
        refinement[a.suite] = {"delta": delta, "groups": deltas, "stable": stable,
                               "coarse": a.aggregate(), "fine": b.aggregate()}
        print(f"{'PASS' if stable else 'FAIL'} {a.suite}: refinement delta {_fmt(delta)} "
              f"(N {cfg.N}->{fine_cfg.N}, cells {cfg.cells}->{fine_cfg.cells})")
    paths = write_outputs(cfg.output, cfg, fine, refinement)
    print(f"wrote {paths[0]} and {paths[1]}")
    return EXIT_OK if ok else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="younglab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("run", "run the configured suite"),
                           ("refine", "run at (N, cells) and (2N, 2 cells) and compare suprema")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, help="path to the JSON configuration")
    sub.add_parser("list-suites", help="print the available suite names")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if args.command == "list-suites":
        for name in SUITE_CHOICES:
            print(f"{name:15s} {SUITE_HELP[name]}")
        return EXIT_OK
    try:
        cfg = _output_prefix(load_config(args.config))
        return cmd_run(cfg) if args.command == "run" else cmd_refine(cfg)
    except ConfigError as e:
        print(f"younglab: config error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
