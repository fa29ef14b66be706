"""Command line entry point: ``dpat <mode> --config run.json [overrides]``.

Exit status is 0 on success, 2 for configuration errors and 3 when a kernel
raises. Without ``--out`` or ``--json`` the CSV rows go to stdout.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .catalog import CATALOG_NAMES
from .errors import ConfigError, DpatError
from .harness import MODES, ExperimentConfig, load_config_doc, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_KERNEL = 3


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpat", description="Pattern-counting experiments on definable sets.")
    parser.add_argument("mode", choices=MODES + ("catalog",), help="experiment mode, or 'catalog' to list sets")
    parser.add_argument("--config", help="JSON experiment config")
    src = parser.add_argument_group("set source")
    src.add_argument("--set", help="catalog name (field modes) or SF, PR, SF:k, PR:k, Z (Z modes)")
    src.add_argument("--formula", help="formula text")
    src.add_argument("--free", type=_name_list, help="free variables of --formula, comma separated")
    src.add_argument("--mset", help="MSET membership file")
    src.add_argument("--zset", help="constructible-set JSON file")
    sweep = parser.add_argument_group("field sweep")
    sweep.add_argument("--p-range", dest="p_range", help="inclusive prime range, e.g. 5..499")
    sweep.add_argument("--primes", type=_int_list, help="explicit primes, comma separated")
    sweep.add_argument("--degree", type=int, help="extension degree n (q = p^n)")
    pat = parser.add_argument_group("patterns")
    pat.add_argument("--w-set", dest="w_set", help="catalog name for the shift set W")
    pat.add_argument("--p1", type=_int_list, help="coefficients of P1, constant term first")
    pat.add_argument("--p2", type=_int_list, help="coefficients of P2, constant term first")
    pat.add_argument("--nontrivial", action="store_true", help="exclude the trivial witness g = 0")
    thr = parser.add_argument_group("thresholds")
    thr.add_argument("--r", type=int)
    thr.add_argument("--delta")
    thr.add_argument("--delta-prime", dest="delta_prime")
    thr.add_argument("--ell", type=int)
    thr.add_argument("--residue-modulus", dest="residue_modulus", type=int)
    z = parser.add_argument_group("Z windows")
    z.add_argument("--k", type=int)
    z.add_argument("--a", type=_int_list, help="starting points, comma separated")
    z.add_argument("--a-range", dest="a_range")
    z.add_argument("--gap-bound", dest="gap_bound", type=int)
    z.add_argument("--n-max", dest="n_max", type=int)
    z.add_argument("--kind", choices=("SF", "PR"))
    z.add_argument("--lo", type=int)
    z.add_argument("--hi", type=int)
    out = parser.add_argument_group("output")
    out.add_argument("--out", help="CSV output path")
    out.add_argument("--json", help="JSON report path")
    out.add_argument("--jobs", type=int, help="worker processes for field sweeps")
    return parser


_OVERRIDES = ("set", "formula", "free", "mset", "zset", "p_range", "primes", "degree", "w_set", "p1", "p2",
              "r", "delta", "delta_prime", "ell", "residue_modulus", "k", "a", "a_range", "gap_bound",
              "n_max", "kind", "lo", "hi", "out", "json", "jobs")


def config_from_args(args) -> ExperimentConfig:
    overrides = {key: getattr(args, key) for key in _OVERRIDES if getattr(args, key) is not None}
    if args.nontrivial:
        overrides["include_zero"] = False
    doc = load_config_doc(args.config) if args.config else {}
    if doc.get("mode", args.mode) != args.mode:
        raise ConfigError(f"config is for mode {doc['mode']!r}, not {args.mode!r}")
    # a set source given on the command line replaces the one in the file
    if any(k in overrides for k in ("set", "formula", "mset", "zset")):
        for k in ("set", "formula", "mset", "zset"):
            doc.pop(k, None)
    if "primes" in overrides:
        doc.pop("p_range", None)
    if "p_range" in overrides:
        doc.pop("primes", None)
    doc.update(overrides)
    doc["mode"] = args.mode
    return ExperimentConfig.from_dict(doc)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.mode == "catalog":
        for name in CATALOG_NAMES:
            print(name)
        return EXIT_OK
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"dpat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"dpat: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DpatError as exc:
        print(f"dpat: {type(exc).__name__} while running {cfg.mode}: {exc}", file=sys.stderr)
        return EXIT_KERNEL
    if not cfg.out and not cfg.json:
        sys.stdout.write(report.to_csv())
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
