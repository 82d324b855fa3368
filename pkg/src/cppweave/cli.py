"""``cppweave <stage> --topology F --demands F --mode M --seed N --out DIR``."""

from __future__ import annotations

import argparse
import sys

from .pipeline import EXIT_INPUT, STAGES, RunConfig, run_pipeline, seed_from_env


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cppweave", description="Convert a shared path protection design to coded path protection and verify it.")
    p.add_argument("stage", choices=STAGES + ("all",))
    p.add_argument("--topology", required=True, help="topology file (.json or line-oriented text)")
    p.add_argument("--demands", required=True, help="demand file; may be the topology file itself")
    p.add_argument("--mode", choices=("strict", "relaxed"), default="strict")
    p.add_argument("--seed", type=int, default=0, help="trail construction seed (CPPWEAVE_SEED overrides)")
    p.add_argument("--out", default=None, help="directory for stage artifacts")
    p.add_argument("--detail", action="store_true", help="print every failure with an affected demand")
    return p


def _print_detail(result) -> None:
    for rep in result.verification.reports:
        if not rep.affected and not rep.muted:
            continue
        parts = []
        for d in rep.affected:
            v = rep.verdicts[d]
            parts.append(f"{d}:{v.status}" + (f" ({v.end}: {v.reason})" if v.reason else ""))
        muted = f" muted={sorted(rep.muted)}" if rep.muted else ""
        print(f"link {rep.failed_link}: {' '.join(parts) or '-'}{muted}")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = RunConfig(args.topology, args.demands, args.mode, seed_from_env(args.seed), args.out, args.stage)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    result = run_pipeline(cfg)
    if result.report is not None:
        if result.design is None:
            r = result.report
            print(f"SPP spare {r.spp_spare:g}, working {r.working:g}, SCaP {r.scap_spp:.2f}%")
        elif "report" in cfg.stages():
            print(result.report.table(), end="")
    if result.verification is not None:
        if args.detail:
            _print_detail(result)
        passed = result.verification.passed and result.steady_state_ok
        if "report" not in cfg.stages():
            print(f"verification {'PASS' if passed else 'FAIL'}")
        for link, d in result.verification.unrecovered():
            print(f"UNRECOVERED demand {d} on failure of link {link}", file=sys.stderr)
    if result.error is not None:
        print(f"error: {result.error}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
