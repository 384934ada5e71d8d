"""Batch command-line front end.

Four subcommands for scripts and batch studies (no interactive UI):

- ``speb``: per-agent error bounds, directional bounds and ellipse
  parameters from a network config;
- ``bounds``: per-agent lower/upper closed-form approximations and their
  ratio;
- ``experiment``: run a seeded Monte Carlo study and emit CSV + JSON files;
- ``rii``: ranging-intensity report (beta, first-path SNR, overlap
  coefficient, lambda) from a pulse file plus channel, or from a path-loss
  model.

Exit codes: 0 success, 1 input error (with line/column or JSON-path
location), 2 domain signal (unlocalizable agent under ``--strict``).
Units are spelled out in every output; all randomness is seeded through
flags or the config document, never the environment.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import efim_bounds_all
from .config import ConfigDoc, ConfigError, load_config, load_pulse_file, validate_output
from .experiments import EXPERIMENT_KINDS, default_spec, run_experiment
from .infogeo import UNLOCALIZABLE, dpeb, speb, to_ellipse
from .network import agent_efim, build_efim
from .ranging import (
    SPEED_OF_LIGHT,
    MultipathChannel,
    effective_bandwidth,
    first_contiguous_cluster,
    first_path_snr,
    path_overlap_chi,
    psi_matrix,
    rii_no_prior,
    rii_pathloss,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DOMAIN = 2


class _InputError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="locbounds",
        description="Localization error bounds for cooperative wideband networks.",
    )
    parser.add_argument("--version", action="version", version=f"locbounds {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_speb = sub.add_parser("speb", help="per-agent squared position error bounds")
    p_speb.add_argument("config", help="JSON configuration document")
    group = p_speb.add_mutually_exclusive_group()
    group.add_argument("--agent", help="report a single agent id")
    group.add_argument("--all", action="store_true", help="report every agent (default)")
    p_speb.add_argument(
        "--dpeb-deg",
        type=float,
        action="append",
        default=None,
        metavar="DEG",
        help="extra directional bound angle in degrees (repeatable); x and y axes always print",
    )
    p_speb.add_argument("--format", choices=("csv", "json"), default="csv")
    p_speb.add_argument(
        "--strict", action="store_true", help="exit 2 when any reported agent is unlocalizable"
    )

    p_bounds = sub.add_parser("bounds", help="closed-form lower/upper bound approximations")
    p_bounds.add_argument("config")
    p_bounds.add_argument("--format", choices=("csv", "json"), default="csv")
    p_bounds.add_argument("--strict", action="store_true")

    p_exp = sub.add_parser("experiment", help="run a Monte Carlo study, write CSV + JSON")
    p_exp.add_argument("kind", choices=EXPERIMENT_KINDS)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--trials", type=int, default=None)
    p_exp.add_argument("--out", default=".", help="output directory")
    p_exp.add_argument(
        "--config", default=None, help="config document whose experiment section seeds the spec"
    )

    p_rii = sub.add_parser("rii", help="ranging-intensity report")
    p_rii.add_argument("--pulse", help="two-column pulse file (time_s amplitude)")
    p_rii.add_argument(
        "--channel",
        help="channel JSON: {\"delays_s\": [...], \"amplitudes\": [...], \"los\": true}"
        " or @file.json",
    )
    p_rii.add_argument(
        "--pathloss",
        metavar="D,B[,Z[,R0[,RMAX]]]",
        help="evaluate z/d^(2b) with optional annulus cutoffs instead of a waveform",
    )
    p_rii.add_argument("--n0-half", type=float, default=1.0, help="two-sided noise PSD level")
    p_rii.add_argument("--c", type=float, default=SPEED_OF_LIGHT, help="propagation speed (m/s)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "speb":
            return _cmd_speb(args)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "rii":
            return _cmd_rii(args)
        raise AssertionError(args.command)
    except (ConfigError, _InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _load_topology(path: str) -> ConfigDoc:
    doc = load_config(path)
    if doc.topology is None:
        raise _InputError("config has no network section")
    return doc


def _cmd_speb(args) -> int:
    doc = _load_topology(args.config)
    net = build_efim(doc.topology)
    if args.agent is not None:
        if args.agent not in net.agent_ids:
            raise _InputError(f"unknown agent {args.agent!r}")
        agent_ids = [args.agent]
    else:
        agent_ids = list(net.agent_ids)

    angles = [0.0, math.pi / 2.0]
    for deg in args.dpeb_deg or ():
        angles.append(math.radians(deg))

    records = []
    any_unlocalizable = False
    for agent_id in agent_ids:
        j = agent_efim(net, agent_id, use_pinv=True)
        value = speb(j)
        localizable = value is not UNLOCALIZABLE
        any_unlocalizable |= not localizable
        record = {
            "id": agent_id,
            "localizable": localizable,
            "speb_m2": float(value) if localizable else None,
            "ellipse": None,
            "dpeb": [],
        }
        ell = to_ellipse(j)
        record["ellipse"] = {
            "mu_inv_m2": ell.mu,
            "eta_inv_m2": ell.eta,
            "theta_rad": ell.theta,
        }
        for ang in angles:
            u = (math.cos(ang), math.sin(ang))
            val = dpeb(j, u)
            record["dpeb"].append(
                {"angle_rad": ang, "value_m2": float(val) if val is not UNLOCALIZABLE else None}
            )
        records.append(record)

    if args.format == "json":
        payload = {
            "version": 1,
            "command": "speb",
            "units": {
                "speb_m2": "m^2",
                "dpeb.value_m2": "m^2",
                "ellipse.mu_inv_m2": "1/m^2",
                "ellipse.eta_inv_m2": "1/m^2",
                "ellipse.theta_rad": "rad",
            },
            "agents": records,
        }
        validate_output(payload, "speb_output")
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        header = ["id", "localizable", "speb_m2", "mu_inv_m2", "eta_inv_m2", "theta_rad"]
        header += [f"dpeb_m2@{ang:.6g}rad" for ang in angles]
        print(",".join(header))
        for rec in records:
            row = [
                rec["id"],
                str(rec["localizable"]).lower(),
                _cell(rec["speb_m2"]),
                _cell(rec["ellipse"]["mu_inv_m2"]),
                _cell(rec["ellipse"]["eta_inv_m2"]),
                _cell(rec["ellipse"]["theta_rad"]),
            ]
            row += [_cell(d["value_m2"]) for d in rec["dpeb"]]
            print(",".join(row))

    if any_unlocalizable and args.strict:
        return EXIT_DOMAIN
    return EXIT_OK


def _cell(value) -> str:
    if value is None:
        return "unlocalizable"
    return repr(float(value))


def _cmd_bounds(args) -> int:
    doc = _load_topology(args.config)
    net = build_efim(doc.topology)
    records = []
    any_unlocalizable = False
    for agent_id, (low, high, _) in efim_bounds_all(net).items():
        exact = speb(agent_efim(net, agent_id, use_pinv=True))
        upper = speb(low)  # loose information bounds the error from above
        lower = speb(high)
        localizable = upper is not UNLOCALIZABLE
        any_unlocalizable |= not localizable
        ratio = None
        if lower is not UNLOCALIZABLE and upper is not UNLOCALIZABLE:
            ratio = float(lower / upper)
        records.append(
            {
                "id": agent_id,
                "localizable": localizable,
                "speb_m2": float(exact) if exact is not UNLOCALIZABLE else None,
                "speb_lower_m2": float(lower) if lower is not UNLOCALIZABLE else None,
                "speb_upper_m2": float(upper) if upper is not UNLOCALIZABLE else None,
                "ratio": ratio,
            }
        )

    if args.format == "json":
        payload = {
            "version": 1,
            "command": "bounds",
            "units": {
                "speb_m2": "m^2",
                "speb_lower_m2": "m^2",
                "speb_upper_m2": "m^2",
                "ratio": "dimensionless",
            },
            "agents": records,
        }
        validate_output(payload, "bounds_output")
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("id,localizable,speb_m2,speb_lower_m2,speb_upper_m2,ratio")
        for rec in records:
            ratio = rec["ratio"]
            print(
                ",".join(
                    [
                        rec["id"],
                        str(rec["localizable"]).lower(),
                        _cell(rec["speb_m2"]),
                        _cell(rec["speb_lower_m2"]),
                        _cell(rec["speb_upper_m2"]),
                        f"{ratio:.6f}" if ratio is not None else "unlocalizable",
                    ]
                )
            )
    if any_unlocalizable and args.strict:
        return EXIT_DOMAIN
    return EXIT_OK


def _cmd_experiment(args) -> int:
    overrides = {}
    if args.config is not None:
        doc = load_config(args.config)
        if doc.experiment is not None:
            if doc.experiment.kind != args.kind:
                raise _InputError(
                    f"config experiment kind {doc.experiment.kind!r} does not match {args.kind!r}"
                )
            overrides = {
                k: v for k, v in doc.raw["experiment"].items() if k not in ("kind", "seed", "trials")
            }
            for key in ("na_sweep", "d_sweep", "n_sweep", "layouts"):
                if key in overrides:
                    overrides[key] = tuple(overrides[key])
    trials = args.trials
    if trials is None and args.config is not None and "experiment" in doc.raw:
        trials = doc.raw["experiment"].get("trials")
    try:
        spec = default_spec(args.kind, seed=args.seed, trials=trials, **overrides)
        result = run_experiment(spec)
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    validate_output(result.summary, "experiment_summary")
    try:
        csv_path, json_path = result.write(args.out)
    except OSError as exc:
        raise _InputError(f"cannot write outputs to {args.out!r}: {exc}") from exc
    print(f"{args.kind} seed={spec.seed} trials={spec.trials}: wrote {csv_path} {json_path}")
    print(f"summary: {_summary_line(result)}")
    return EXIT_OK


def _summary_line(result) -> str:
    summary = result.summary
    if result.kind == "lemma1":
        return f"violation fraction {summary['violation_fraction']:.6g} (n={summary['n']})"
    if result.kind == "lemma2":
        return (
            f"empirical {summary['empirical']:.6g} <= bound {summary['bound']:.6g}"
            f" (eps={summary['eps']:.4g})"
        )
    if result.kind == "dense_scaling":
        fit = summary["cooperative_fit_vs_log_n_total"]
        return f"cooperative slope {fit['slope']:.4f} +- {fit['ci95']:.4f} (95% CI)"
    if result.kind == "extended_scaling":
        return (
            f"mean_speb x log(n) spread {summary['mean_times_log_n_spread']:.4f},"
            f" terminal ratio {summary['terminal_ratio']:.4f}"
        )
    if result.kind == "fig7":
        first = result.rows[0]
        return f"mean ratio at na={first['na']}: {first['mean_ratio']:.6f}"
    return f"{len(result.rows)} rows"


def _cmd_rii(args) -> int:
    if args.pathloss is not None:
        if args.pulse or args.channel:
            raise _InputError("--pathloss excludes --pulse/--channel")
        parts = args.pathloss.split(",")
        if len(parts) < 2 or len(parts) > 5:
            raise _InputError("--pathloss expects d,b[,z[,r0[,rmax]]]")
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise _InputError(f"unparseable --pathloss value {args.pathloss!r}") from None
        d, b = values[0], values[1]
        z = values[2] if len(values) > 2 else 1.0
        r0 = values[3] if len(values) > 3 else 0.0
        rmax = values[4] if len(values) > 4 else None
        try:
            lam = rii_pathloss(d, b, z=z, r0=r0, rmax=rmax)
        except ValueError as exc:
            raise _InputError(str(exc)) from exc
        print(f"model: pathloss z/d^(2b), d = {d:g} m, b = {b:g}, z = {z:g}")
        print(f"lambda = {lam:.6e} 1/m^2")
        return EXIT_OK

    if not args.pulse or not args.channel:
        raise _InputError("waveform mode needs both --pulse and --channel (or use --pathloss)")
    waveform = load_pulse_file(args.pulse, n0_half=args.n0_half, c=args.c)
    channel_text = args.channel
    if channel_text.startswith("@"):
        try:
            with open(channel_text[1:]) as fh:
                channel_text = fh.read()
        except OSError as exc:
            raise _InputError(str(exc)) from exc
    try:
        channel_raw = json.loads(channel_text)
        channel = MultipathChannel(
            delays=np.array(channel_raw["delays_s"], dtype=float),
            amplitudes=np.array(channel_raw["amplitudes"], dtype=float),
            los=channel_raw.get("los", True),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"bad --channel specification: {exc}") from exc

    beta = effective_bandwidth(waveform)
    snr1 = first_path_snr(waveform, channel)
    print(f"beta = {beta:.6e} Hz")
    print(f"snr1 = {snr1:.6e} (dimensionless)")
    if channel.los:
        cluster = first_contiguous_cluster(waveform, channel)
        chi = path_overlap_chi(psi_matrix(waveform, cluster))
        lam = rii_no_prior(waveform, channel)
        print(f"chi = {chi:.6e} (dimensionless, first contiguous cluster of {cluster.n_paths})")
        print(f"lambda = {lam:.6e} 1/m^2")
    else:
        print("chi = n/a (NLOS)")
        print("lambda = 0.000000e+00 1/m^2 (NLOS, no channel prior)")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
