"""Command-line front end.

Subcommands: ``generate`` (state traces), ``curves`` (probability and
transition curves as plot-ready text), ``compare`` (proposed model vs the
memoryless urban-micro baseline on identical traces, with path loss), and
``estimate`` (empirical statistics, optional refit, correlation report).

Every output file starts with ``#``-prefixed provenance lines (version,
command, scenario, seed) so downstream plotters can skip them. Outputs are
written atomically (temp file, then rename). Exit codes: 0 success, 1
runtime or domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import state_probabilities, transition_matrix
from .errors import DegenerateError, V2vLosError
from .estimation import (
    EmpiricalStats,
    accumulate,
    bin_centers,
    empirical_state_probs,
    empirical_transition_probs,
    fit_same_family,
    pearson,
)
from .markov import DistanceTrace, generate_batch
from .params import (
    OVER_RANGE_POLICIES,
    ScenarioModel,
    StateProbModel,
    TransitionRowModel,
    builtin_model,
    scenario_json,
)
from .pathloss import PathLossParams, render_path_loss
from .rng import derive_subseed, mix64
from .states import CANONICAL_STATES, Density, Environment, LosState
from .traces import (
    MobilityProfile,
    dwell_statistics,
    merge_dwell,
    read_distance_trace,
    read_labeled_traces,
    synth_distance_trace,
)
from .umi import UmiParams, generate_batch_umi

_SYNTH_SALT = 0x53594E54  # distance synthesis draws from its own seed stream

PROFILE_CHOICES = ("separate1ms", "constant", "walk", "opposing", "same-direction", "urban-mixed")

_PROFILE_KIND = {
    "constant": "constant",
    "walk": "walk",
    "opposing": "opposing_highway",
    "same-direction": "same_direction_highway",
    "urban-mixed": "urban_mixed",
}


def _provenance(command: str, scenario: str | None = None, seed: int | None = None) -> list[str]:
    lines = [f"# v2vlos={__version__}", f"# command={command}"]
    if scenario is not None:
        lines.append(f"# scenario={scenario}")
    if seed is not None:
        lines.append(f"# seed={seed}")
    return lines


def _write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent) or ".", prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Fill unset options from a JSON config file; flags win over the file."""
    if not getattr(args, "config", None):
        return
    try:
        obj = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {args.config}: {exc}")
    if not isinstance(obj, dict):
        parser.error("config file must hold a JSON object")
    known = set(vars(args))
    unknown = [k for k in obj if k not in known or k in ("config", "command", "func")]
    if unknown:
        parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, value in obj.items():
        if getattr(args, key) is None:
            setattr(args, key, value)


def _scenario(args: argparse.Namespace) -> ScenarioModel:
    return builtin_model(Environment(args.env), Density(args.density))


def _build_distance_traces(args: argparse.Namespace) -> list[DistanceTrace]:
    if getattr(args, "trace_in", None):
        return [read_distance_trace(args.trace_in)] * args.count
    if args.steps is None:
        raise V2vLosError("either --steps with a profile or --trace-in is required")
    profile_name = args.profile or "separate1ms"
    try:
        if profile_name == "separate1ms":
            profile = MobilityProfile("constant", d0=args.d0, n_steps=args.steps, speed=1.0)
        else:
            kind = _PROFILE_KIND[profile_name]
            if kind == "walk":
                if args.vmax is None:
                    raise V2vLosError("--vmax is required for the walk profile")
                profile = MobilityProfile(kind, d0=args.d0, n_steps=args.steps, v_max=args.vmax)
            else:
                if args.speed is None:
                    raise V2vLosError(f"--speed is required for the {profile_name} profile")
                profile = MobilityProfile(kind, d0=args.d0, n_steps=args.steps, speed=args.speed)
    except ValueError as exc:
        raise V2vLosError(str(exc)) from exc
    synth_master = mix64(args.seed ^ _SYNTH_SALT)
    return [synth_distance_trace(profile, derive_subseed(synth_master, i)) for i in range(args.count)]


def _cmd_generate(args: argparse.Namespace) -> int:
    model = _scenario(args)
    traces = _build_distance_traces(args)
    state_traces = generate_batch(model, traces, args.seed, over_range=args.over_range)

    lines = _provenance("generate", scenario=model.tag, seed=args.seed)
    lines.append("t,d,state")
    for trace in state_traces:
        for k in range(len(trace)):
            lines.append(f"{int(trace.times[k])},{float(trace.distances[k])!r},{trace.state(k).name}")
    _write_atomic(args.out, "\n".join(lines) + "\n")

    dwell = merge_dwell(dwell_statistics(t) for t in state_traces)
    total = sum(len(t) for t in state_traces)
    occ = {s: sum(int((t.states == int(s)).sum()) for t in state_traces) / total for s in CANONICAL_STATES}
    print(f"wrote {args.out}: traces={len(state_traces)} steps={total} scenario={model.tag} seed={args.seed}")
    print("occupancy: " + " ".join(f"{s.name}={occ[s]:.4f}" for s in CANONICAL_STATES))
    print(f"state_changes={dwell.changes} mean_dwell_s={dwell.mean_dwell:.3f}")
    return 0


def _cmd_curves(args: argparse.Namespace) -> int:
    model = _scenario(args)
    lines = _provenance("curves", scenario=model.tag, seed=args.seed)
    header = ["d", "p_los", "p_nlosv", "p_nlosb"]
    for origin in CANONICAL_STATES:
        for target in CANONICAL_STATES:
            header.append(f"p_{origin.name.lower()}_{target.name.lower()}")
    lines.append(",".join(header))
    n = int((args.d_max - args.d_min) / args.d_step) + 1
    for i in range(n):
        d = args.d_min + i * args.d_step
        if d > args.d_max + 1e-9:
            break
        probs = state_probabilities(model, d)
        tm = transition_matrix(model, d)
        row = [f"{d:.6g}"] + [f"{v:.8g}" for v in probs.as_tuple()]
        row += [f"{tm.m[i2, j]:.8g}" for i2 in range(3) for j in range(3)]
        lines.append(",".join(row))
    _write_atomic(args.out, "\n".join(lines) + "\n")
    print(f"wrote {args.out}: scenario={model.tag} d=[{args.d_min}, {args.d_max}] step={args.d_step}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    model = _scenario(args)
    traces = _build_distance_traces(args)
    umi_params = UmiParams(d1=args.umi_d1, d2=args.umi_d2)
    pl_params = PathLossParams.from_file(args.pathloss_params) if args.pathloss_params else PathLossParams.defaults()

    proposed = generate_batch(model, traces, args.seed, over_range=args.over_range)
    baseline = generate_batch_umi(traces, umi_params, args.seed)

    series_model = render_path_loss(proposed[0], pl_params)
    series_umi = render_path_loss(baseline[0], pl_params)
    lines = _provenance("compare", scenario=model.tag, seed=args.seed)
    lines.append("t,d,state_model,pl_model_db,state_umi,pl_umi_db")
    for (t, d, sm, plm), (_, _, su, plu) in zip(series_model, series_umi):
        lines.append(f"{t},{d!r},{sm.name},{plm:.6f},{su.name},{plu:.6f}")
    _write_atomic(args.out, "\n".join(lines) + "\n")

    dwell_model = merge_dwell(dwell_statistics(t) for t in proposed)
    dwell_umi = merge_dwell(dwell_statistics(t) for t in baseline)
    print(f"wrote {args.out}: traces={len(traces)} scenario={model.tag} seed={args.seed}")
    print(f"model=proposed state_changes={dwell_model.changes} mean_dwell_s={dwell_model.mean_dwell:.3f}")
    print(f"model=umi state_changes={dwell_umi.changes} mean_dwell_s={dwell_umi.mean_dwell:.3f}")
    return 0


def _safe_pearson(xs, ys) -> str:
    try:
        return f"{pearson(xs, ys):.4f}"
    except DegenerateError:
        return "undefined"


# Correlation report column order: LOS, NLOSb, NLOSv.
_REPORT_ORDER = (LosState.LOS, LosState.NLOSb, LosState.NLOSv)


def _correlation_report(model: ScenarioModel, stats: EmpiricalStats) -> str:
    centers = bin_centers()
    model_state = np.asarray([state_probabilities(model, float(d)).as_tuple() for d in centers])
    model_trans = np.asarray([transition_matrix(model, float(d)).m for d in centers])
    emp_state = empirical_state_probs(stats).probs
    emp_trans = empirical_transition_probs(stats).probs

    lines = ["[los_probabilities]"]
    for s in _REPORT_ORDER:
        lines.append(f"{s.name}={_safe_pearson(emp_state[:, int(s)], model_state[:, int(s)])}")
    lines.append("[transition_probabilities]")
    for origin in _REPORT_ORDER:
        for target in _REPORT_ORDER:
            r = _safe_pearson(emp_trans[:, int(origin), int(target)], model_trans[:, int(origin), int(target)])
            lines.append(f"{origin.name}->{target.name}={r}")
    return "\n".join(lines) + "\n"


def _refit_model(model: ScenarioModel, stats: EmpiricalStats) -> ScenarioModel:
    centers = bin_centers()
    emp_state = empirical_state_probs(stats)
    emp_trans = empirical_transition_probs(stats)

    def points(values, defined):
        return [(float(c), float(v)) for c, v, ok in zip(centers, values, defined) if ok]

    explicit_state = {
        s: fit_same_family(spec, points(emp_state.probs[:, int(s)], emp_state.defined)).spec
        for s, spec in model.state_probs.explicit.items()
    }
    rows = []
    for row in model.rows:
        explicit_row = {
            target: fit_same_family(
                spec,
                points(emp_trans.probs[:, int(row.origin), int(target)], emp_trans.defined[:, int(row.origin)]),
            ).spec
            for target, spec in row.explicit.items()
        }
        rows.append(TransitionRowModel(row.origin, explicit_row, row.complement))
    state_probs = StateProbModel(explicit_state, model.state_probs.complement)
    return ScenarioModel(model.environment, model.density, state_probs, tuple(rows), model.d_min, model.d_max)


def _cmd_estimate(args: argparse.Namespace) -> int:
    model = _scenario(args)
    traces = read_labeled_traces(args.traces)
    stats = EmpiricalStats()
    for trace in traces:
        stats = accumulate(stats, trace)

    if args.out_stats:
        emp_state = empirical_state_probs(stats)
        emp_trans = empirical_transition_probs(stats)
        lines = _provenance("estimate", scenario=model.tag, seed=args.seed)
        header = ["bin", "center", "n_los", "n_nlosv", "n_nlosb", "p_los", "p_nlosv", "p_nlosb"]
        for origin in CANONICAL_STATES:
            for target in CANONICAL_STATES:
                header.append(f"p_{origin.name.lower()}_{target.name.lower()}")
        lines.append(",".join(header))
        centers = bin_centers()
        for b in range(len(centers)):
            row = [str(b), f"{centers[b]:.6g}"]
            row += [str(int(stats.occupancy[b, int(s)])) for s in CANONICAL_STATES]
            row += [f"{emp_state.probs[b, int(s)]:.8g}" for s in CANONICAL_STATES]
            row += [f"{emp_trans.probs[b, i, j]:.8g}" for i in range(3) for j in range(3)]
            lines.append(",".join(row))
        _write_atomic(args.out_stats, "\n".join(lines) + "\n")
        print(f"wrote {args.out_stats}")

    report = "\n".join(_provenance("estimate", scenario=model.tag, seed=args.seed)) + "\n" + _correlation_report(model, stats)
    if args.out_report:
        _write_atomic(args.out_report, report)
        print(f"wrote {args.out_report}")
    else:
        sys.stdout.write(report)

    if args.fit:
        if not args.out_model:
            raise V2vLosError("--fit requires --out-model")
        refit = _refit_model(model, stats)
        _write_atomic(args.out_model, scenario_json(refit))
        print(f"wrote {args.out_model}")
    return 0


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--env", required=True, choices=[e.value for e in Environment], help="environment")
    p.add_argument("--density", required=True, choices=[d.value for d in Density], help="vehicle density")


def _add_trace_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--steps", type=int, default=None, help="steps per synthetic trace")
    p.add_argument("--profile", choices=PROFILE_CHOICES, default=None,
                   help="synthetic mobility (default separate1ms: move apart at 1 m/s)")
    p.add_argument("--speed", type=float, default=None, help="profile speed in m/s")
    p.add_argument("--vmax", type=float, default=None, help="walk profile speed bound in m/s")
    p.add_argument("--d0", type=float, default=1.0, help="initial Tx-Rx distance in m")
    p.add_argument("--trace-in", default=None, help="read the distance trace from a file instead")
    p.add_argument("--count", type=int, default=1, help="number of traces")
    p.add_argument("--over-range", choices=OVER_RANGE_POLICIES, default="error",
                   help="policy for distances above 500 m")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2vlos", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"v2vlos {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate visibility-state traces")
    _add_scenario_flags(g)
    _add_trace_flags(g)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output trace file")
    g.add_argument("--config", default=None, help="JSON file with defaults for unset flags")
    g.set_defaults(func=_cmd_generate)

    c = sub.add_parser("curves", help="emit probability and transition curves")
    _add_scenario_flags(c)
    c.add_argument("--d-min", type=float, default=1.0)
    c.add_argument("--d-max", type=float, default=500.0)
    c.add_argument("--d-step", type=float, default=1.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.add_argument("--config", default=None)
    c.set_defaults(func=_cmd_curves)

    m = sub.add_parser("compare", help="proposed model vs urban-micro baseline with path loss")
    _add_scenario_flags(m)
    _add_trace_flags(m)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", required=True, help="joint path-loss series file")
    m.add_argument("--pathloss-params", default=None, help="JSON path-loss parameter file")
    m.add_argument("--umi-d1", type=float, default=18.0)
    m.add_argument("--umi-d2", type=float, default=36.0)
    m.add_argument("--config", default=None)
    m.set_defaults(func=_cmd_compare)

    e = sub.add_parser("estimate", help="empirical statistics and correlation report")
    _add_scenario_flags(e)
    e.add_argument("--seed", type=int, default=0, help="recorded in provenance; estimation is deterministic")
    e.add_argument("--traces", required=True, help="labeled trace file")
    e.add_argument("--out-stats", default=None, help="per-bin statistics file")
    e.add_argument("--out-report", default=None, help="correlation report file (stdout when omitted)")
    e.add_argument("--fit", action="store_true", help="refit the reference curve families")
    e.add_argument("--out-model", default=None, help="fitted scenario parameter file")
    e.add_argument("--config", default=None)
    e.set_defaults(func=_cmd_estimate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _load_config(parser, args)
    try:
        return args.func(args)
    except V2vLosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
