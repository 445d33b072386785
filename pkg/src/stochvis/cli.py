"""Command line interface: ``stochvis <subcommand> [flags]``.

Subcommands: ``analytic``, ``capacity``, ``f``, ``pvis``, ``sweep`` and
``verify``. A JSON ``--config`` file supplies defaults that flags override.
Exit codes: 0 success, 1 configuration error, 2 verification FAIL,
3 insufficient precision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .analytic import MODELS, ScalingProfile, ball_capacity, f_analytic
from .brownian import BallShape, axis_capsule, capacity_mc
from .geom import Ball
from .harness import (EXIT_CONFIG, EXIT_OK, ConfigError, RunConfig, read_rows, run_sweep,
                      verify_bounds)
from .models import TrajectoryConfig
from .visibility import visibility_counts


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; exit code 2 is reserved for FAIL
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--dim", type=int, dest="d")
    p.add_argument("--alpha", type=float)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--rho", type=float)
    g.add_argument("--radius-law", dest="radius_law", help="JSON file describing the radius law")
    p.add_argument("--r", type=_floats, help="radii, comma or space separated")
    p.add_argument("--samples", type=int, dest="n")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--resolution", type=float)
    p.add_argument("--step", type=float, help="interlacement time step h")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stochvis", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analytic", help="closed-form f(r) and delta(r)")
    cap = sub.add_parser("capacity", help="walk-on-spheres capacity of a capsule or ball")
    cap.add_argument("--shape", choices=("capsule", "ball"), default="capsule",
                     help="capsule around [0, r e1] with radius rho, or the ball B(0, r)")
    sub.add_parser("f", help="fixed-direction visibility f(r)")
    sub.add_parser("pvis", help="omnidirectional visibility P_vis(r)")
    sw = sub.add_parser("sweep", help="f, P_vis and ratio statistic over r")
    sw.add_argument("--timing", action="store_true", default=None,
                    help="write wall times (otherwise 0, keeping output deterministic)")
    ver = sub.add_parser("verify", help="check that the ratio statistic is bounded")
    ver.add_argument("--input", help="sweep CSV/JSON; without it a sweep is run")
    ver.add_argument("--band", type=float)
    for p in sub.choices.values():
        _common(p)
    return parser


def _config(args) -> RunConfig:
    base = RunConfig.from_json(args.config) if args.config else RunConfig()
    changes = {k: getattr(args, k, None) for k in
               ("model", "d", "alpha", "radius_law", "n", "seed", "threads", "resolution",
                "step", "out", "format", "timing", "band")}
    if args.rho is not None:
        changes["rho"] = args.rho
        changes["radius_law"] = None
        cfg = base.override(**changes)
        cfg = RunConfig.from_dict({**cfg.to_dict(), "radius_law": None})
    else:
        cfg = base.override(**changes)
    if args.r is not None:
        cfg = RunConfig.from_dict({**cfg.to_dict(), "r": args.r})
    return cfg


def _emit(records: list[dict], cfg: RunConfig, fmt: Optional[str] = None):
    fmt = fmt or cfg.format
    records = [{k: float(v) if isinstance(v, float) else v for k, v in rec.items()}
               for rec in records]
    if fmt == "json":
        text = json.dumps(records, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow({k: repr(float(v)) if isinstance(v, float) else v for k, v in rec.items()})
        text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_analytic(cfg: RunConfig):
    params = cfg.params()
    prof = ScalingProfile(cfg.model, cfg.d)
    recs = []
    for r in cfg.r:
        fa = f_analytic(params, r)
        recs.append({"model": cfg.model, "d": cfg.d, "alpha": cfg.alpha, "rho_spec": cfg.rho_spec,
                     "r": r, "f_analytic": "" if fa is None else float(fa),
                     "delta_r": float(prof.delta(r))})
    _emit(recs, cfg)
    return EXIT_OK


def _cmd_capacity(cfg: RunConfig, shape_kind: str):
    if cfg.d < 3:
        raise ConfigError("capacity needs d >= 3")
    rho = cfg.params().rho_max
    recs = []
    for i, r in enumerate(cfg.r):
        if shape_kind == "ball":
            shape, exact = BallShape(Ball([0.0] * cfg.d, r)), ball_capacity(cfg.d, r)
        else:
            shape, exact = axis_capsule(cfg.d, r, rho), ""
        est = capacity_mc(shape, cfg.d, None, cfg.n, cfg.seed + i, threads=cfg.threads)
        recs.append({"d": cfg.d, "shape": shape_kind, "r": r,
                     "rho": rho if shape_kind == "capsule" else "", "n": est.n,
                     "cap_hat": est.value, "cap_se": est.se, "censored": est.censored,
                     "cap_exact": exact})
    _emit(recs, cfg)
    return EXIT_OK


def _cmd_visibility(cfg: RunConfig, want_pvis: bool):
    params = cfg.params()
    recs = []
    for i, r in enumerate(cfg.r):
        vc = visibility_counts(params, cfg.window(r), r, cfg.n, cfg.seed, cfg.resolution,
                               cfg.threads, TrajectoryConfig(step=cfg.step), pvis=want_pvis,
                               task=(31, i))
        fa = f_analytic(params, r)
        rec = {"model": cfg.model, "d": cfg.d, "alpha": cfg.alpha, "rho_spec": cfg.rho_spec,
               "r": r, "n": cfg.n}
        if want_pvis:
            rec.update(pvis_hat=vc.pvis.p_hat, pvis_se=vc.pvis.se,
                       undecided_frac=vc.pvis.undecided / cfg.n)
        else:
            rec.update(f_analytic="" if fa is None else float(fa), f_hat=vc.f.p_hat, f_se=vc.f.se)
        recs.append(rec)
    _emit(recs, cfg)
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig):
    result = run_sweep(cfg)
    text = result.write(cfg.out)
    if not cfg.out:
        sys.stdout.write(text)
    for row in result.rows:
        if row.error:
            print(f"r={row.r:g}: {row.error}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig, source: Optional[str]):
    if source:
        try:
            rows = read_rows(source)
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from exc
    else:
        result = run_sweep(cfg)
        if cfg.out:
            result.write(cfg.out)
        rows = result.rows
    report = verify_bounds(rows, cfg.band)
    print(report)
    return report.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "analytic":
            return _cmd_analytic(cfg)
        if args.command == "capacity":
            return _cmd_capacity(cfg, args.shape)
        if args.command in ("f", "pvis"):
            return _cmd_visibility(cfg, args.command == "pvis")
        if args.command == "sweep":
            return _cmd_sweep(cfg)
        return _cmd_verify(cfg, args.input)
    except ConfigError as exc:
        print(f"stochvis: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"stochvis: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
