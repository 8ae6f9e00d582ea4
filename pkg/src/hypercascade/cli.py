"""``hypercascade`` command-line tool.

Subcommands: verify, rates, pairs, sweep, oracle, montecarlo.  Parameters may
come from flags or from a JSON file given with ``--config``; flags win.

Exit status: 0 when every check passed, 1 when a check failed, 2 on invalid
input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import reports
from .errors import HypercascadeError, InvalidInput
from .stats import SourceModel

DEFAULTS = {
    "scheme": "pol-spatial",
    "m": 3,
    "mu": 1.0,
    "ps": 7.6e-6,
    "rep_hz": 1e9,
    "n": 2,
    "r": None,
    "trials": 1_000_000,
    "seed": 42,
    "r_max": 4,
    "workers": 1,
    "out": None,
    "format": "text",
}
SWEEP_DEFAULTS = {"mu": "0.5,1,2,4", "m": "3-8"}

# config files may use either the flag spelling or the JSON report spelling
_ALIASES = {"rep-hz": "rep_hz", "repHz": "rep_hz", "r-max": "r_max", "rMax": "r_max"}


def _parse_int_range(text) -> range:
    if isinstance(text, int):
        return range(text, text + 1)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        lo, hi = text
    else:
        s = str(text).replace("..", "-")
        lo, _, hi = s.partition("-")
        hi = hi or lo
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise InvalidInput(f"bad m range {text!r}; use e.g. 3-8") from None
    if hi < lo:
        raise InvalidInput(f"empty m range {text!r}")
    return range(lo, hi + 1)


def _parse_float_list(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InvalidInput(f"bad mu list {text!r}; use e.g. 0.5,1,2") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameter values (flags override it)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--mu", type=float, default=None, help="mean pump photons per pulse")
    src.add_argument("--ps", type=float, default=None, help="per-crystal splitting probability")
    src.add_argument("--rep-hz", dest="rep_hz", type=float, default=None, help="pulse repetition rate F")

    p = argparse.ArgumentParser(prog="hypercascade", description="Cascaded down-conversion hyperentanglement toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="simulate a cascade and compare with its target state")
    v.add_argument("--scheme", default=None, help="pol-spatial or pol-time-bin")
    v.add_argument("--m", type=int, default=None, help="number of photons")

    for name, helptext in (("rates", "generation rate and pair distribution"), ("pairs", "Pr(m, r) coefficients")):
        sp = sub.add_parser(name, parents=[common, src], help=helptext)
        sp.add_argument("--m", type=int, default=None)
        sp.add_argument("--r-max", dest="r_max", type=int, default=None)
        if name == "pairs":
            sp.add_argument("--r", type=int, default=None, help="single coefficient instead of the table")

    sw = sub.add_parser("sweep", parents=[common], help="N_tot over a grid of mu and m")
    sw.add_argument("--mu", default=None, help="comma-separated mean photon numbers (default 0.5,1,2,4)")
    sw.add_argument("--m", default=None, help="inclusive range such as 3-8 (default 3-8)")
    sw.add_argument("--ps", type=float, default=None)
    sw.add_argument("--rep-hz", dest="rep_hz", type=float, default=None)

    o = sub.add_parser("oracle", parents=[common], help="closed form vs. brute-force enumeration")
    o.add_argument("--n", type=int, default=None, help="pump photons in the pulse")
    o.add_argument("--m", type=int, default=None)
    o.add_argument("--ps", type=float, default=None)

    mc = sub.add_parser("montecarlo", parents=[common, src], help="sampled rate vs. closed form")
    mc.add_argument("--m", type=int, default=None)
    mc.add_argument("--trials", type=int, default=None, help="number of pulses")
    mc.add_argument("--seed", type=int, default=None)
    mc.add_argument("--workers", type=int, default=None)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Merge built-in defaults, the config file and explicit flags."""
    cfg = dict(DEFAULTS)
    if args.command == "sweep":
        cfg.update(SWEEP_DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidInput("config file must hold a JSON object")
        for k, val in data.items():
            cfg[_ALIASES.get(k, k)] = val
    for k, val in vars(args).items():
        if val is not None and k not in ("command", "config"):
            cfg[k] = val
    return cfg


def run(cfg: dict, command: str) -> reports.Report:
    def source():
        return SourceModel(float(cfg["mu"]), float(cfg["rep_hz"]), float(cfg["ps"]))

    m = cfg["m"]
    if command == "verify":
        return reports.verify_report(cfg["scheme"], int(m))
    if command == "rates":
        return reports.rates_report(int(m), source(), int(cfg["r_max"]))
    if command == "pairs":
        r = cfg.get("r")
        return reports.pairs_report(int(m), source(), int(cfg["r_max"]), None if r is None else int(r))
    if command == "sweep":
        return reports.sweep_report(_parse_float_list(cfg["mu"]), _parse_int_range(m), float(cfg["ps"]), float(cfg["rep_hz"]))
    if command == "oracle":
        return reports.oracle_report(int(cfg["n"]), int(m), float(cfg["ps"]))
    if command == "montecarlo":
        return reports.montecarlo_report(int(m), source(), int(cfg["trials"]), int(cfg["seed"]), int(cfg["workers"]))
    raise InvalidInput(f"unknown command {command}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        report = run(cfg, args.command)
        text = report.render(cfg["format"])
    except InvalidInput as exc:
        print(f"hypercascade: invalid input: {exc}", file=sys.stderr)
        return 2
    except HypercascadeError as exc:
        print(f"hypercascade: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
