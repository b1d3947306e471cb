"""Command line entry point: ``lab run <config>`` and ``lab acceptance <dir>``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigInvalid, MissingCriterion
from .reports import QUAD_KEYS, acceptance, default_config_dir, load_config, run


def _overrides(extra: list) -> dict:
    """Turn ``--quad.<key> <val>`` (or ``--quad.<key>=<val>``) pairs into config overrides."""
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--quad."):
            raise ConfigInvalid(tok, "unknown option")
        if "=" in tok:
            key, val = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigInvalid(tok[2:], "missing value")
            key, val = tok[2:], extra[i + 1]
            i += 2
        if key[5:] not in QUAD_KEYS:
            raise ConfigInvalid(key, "unknown quadrature key")
        out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lab", description="Half-space heat semigroup laboratory.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment config and write its CSV")
    r.add_argument("config", type=Path)
    r.add_argument("--out", type=Path, default=None, help="CSV path (default: the config's output key)")
    r.add_argument("--seed", type=int, default=None, help="battery shuffling seed")
    a = sub.add_parser("acceptance", help="run every *.cfg in a directory and summarise by criterion")
    a.add_argument("config_dir", type=Path, nargs="?", default=None,
                   help="config directory (default: the bundled acceptance configs)")
    a.add_argument("--out", type=Path, default=None, help="directory for per-config CSVs")
    a.add_argument("--seed", type=int, default=None, help="battery shuffling seed")
    a.add_argument("--partial", action="store_true", help="allow criteria without configs")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args, extra = ap.parse_known_args(argv)
    try:
        ov = _overrides(extra)
        if args.seed is not None:
            ov["seed"] = str(args.seed)
        if args.command == "run":
            rep = run(load_config(args.config, ov), args.out)
            sys.stdout.write(rep.to_csv())
            return 0 if rep.passed else 1
        cdir = args.config_dir or default_config_dir()
        summary = acceptance(cdir, args.out, args.partial, ov)
    except (ConfigInvalid, MissingCriterion, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"{'criterion':10s}{'status':8s}{'runtime_s':>10s}{'rows':>6s}  configs")
    for s in summary:
        print(f"{s.criterion:10s}{s.status:8s}{s.runtime:10.1f}{s.n_rows:6d}  {' '.join(s.configs)}")
    return 0 if all(s.status == "PASS" for s in summary) else 1


if __name__ == "__main__":
    raise SystemExit(main())
