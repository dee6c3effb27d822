"""Command-line surface: build -> encode -> layout -> optimize -> report.

Exit codes: 0 success, 2 bad arguments or malformed input, 3 build/encoding
failure, 4 solution quality below threshold, 5 propagation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .annealer import AnnealerError, PropagationConfig, Schedule, propagate
from .encoding import (AtomLayout, HardwareLimits, NotEncodableError,
                       embed_layout, encode, rescale, validate)
from .hardness import (DEFAULT_EPSILON, analyze_model, format_csv,
                       format_table, hardness_parameter, report_rows)
from .models import (ModelError, as_ising, enumerate_spectrum, ground_summary,
                     model_from_json, model_to_json, state_bits)
from .optimizer import StagePlan
from .pipeline import (PipelineResult, encode_for_annealing, result_json,
                       run_pipeline, trajectory_csv)
from .problems import (PRESET_NAMES, ProblemError, ClusteringInstance,
                       ProteinToyInstance, QapInstance, SetPackingInstance,
                       TwoSatInstance, XorSatInstance, build_binary_clustering,
                       build_mixed, build_protein_toy, build_qap,
                       build_set_packing, build_two_sat, build_xor_sat,
                       preset_instance, shared_residue_exclusions)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUILD = 3
EXIT_QUALITY = 4
EXIT_PROPAGATION = 5


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _load_limits(args) -> HardwareLimits:
    if not getattr(args, "config", None):
        return HardwareLimits()
    with open(args.config) as fh:
        data = json.load(fh)
    return HardwareLimits(**data)


def _out_path(args, name: str) -> Path:
    out_dir = Path(getattr(args, "out_dir", ".") or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


def _build_from_family(family: str, params: dict):
    if family == "two_sat":
        clauses = tuple(tuple((int(i), bool(neg)) for i, neg in clause)
                        for clause in params["clauses"])
        inst = TwoSatInstance(int(params["n"]), clauses,
                              float(params.get("penalty", 1.0)))
        return inst, build_two_sat(inst)
    if family == "xor_sat":
        cons = tuple((int(i), int(j), int(b)) for i, j, b in params["constraints"])
        inst = XorSatInstance(int(params["n"]), cons,
                              float(params.get("weight", 1.0)))
        return inst, build_xor_sat(inst)
    if family == "mixed":
        ts, _ = _build_from_family("two_sat", params["two_sat"])
        xs, _ = _build_from_family("xor_sat", params["xor_sat"])
        return (ts, xs), build_mixed(ts, xs)
    if family == "set_packing":
        inst = SetPackingInstance(int(params["n"]),
                                  tuple(float(w) for w in params["weights"]),
                                  tuple((int(i), int(j)) for i, j in params["conflicts"]),
                                  float(params.get("penalty", 2.0)))
        return inst, build_set_packing(inst)
    if family == "qap":
        flow = tuple(tuple(float(v) for v in row) for row in params["flow"])
        dist = tuple(tuple(float(v) for v in row) for row in params["distance"])
        inst = QapInstance(flow, dist, float(params["penalty_facility"]),
                           float(params["penalty_location"]))
        return inst, build_qap(inst)
    if family == "clustering":
        w = tuple(tuple(float(v) for v in row) for row in params["dissimilarity"])
        inst = ClusteringInstance(w)
        return inst, build_binary_clustering(inst)
    if family == "protein":
        length = int(params["length"])
        exclusions = params.get("exclusions")
        if exclusions is None:
            exclusions = shared_residue_exclusions(length)
        else:
            exclusions = tuple((int(p), int(q)) for p, q in exclusions)
        inst = ProteinToyInstance(length, tuple(int(h) for h in params["hydrophobic"]),
                                  exclusions,
                                  float(params.get("penalty_linear", 0.5)),
                                  float(params.get("penalty_exclusion", 2.0)))
        return inst, build_protein_toy(inst)
    raise ProblemError(f"unknown family {family!r}")


def cmd_problem(args) -> int:
    try:
        if args.preset:
            preset = preset_instance(args.preset)
            model, meta = preset.model, dict(preset.metadata)
            meta["preset"] = preset.name
        else:
            params = json.loads(args.params) if args.params else {}
            for key in ("constraints", "clauses"):
                if getattr(args, key, None):
                    params[key] = json.loads(getattr(args, key))
            if "n" not in params and args.n is not None:
                params["n"] = args.n
            _, model = _build_from_family(args.family, params)
            meta = {"family": args.family}
    except (ProblemError, ModelError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUILD if isinstance(exc, (ProblemError, ModelError)) else EXIT_USAGE
    payload = model.to_dict()
    payload["metadata"] = meta
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _load_model(path: str):
    try:
        return model_from_json(path)
    except (OSError, json.JSONDecodeError, ModelError) as exc:
        print(f"error: cannot load model {path}: {exc}", file=sys.stderr)
        return None


def cmd_spectrum(args) -> int:
    model = _load_model(args.model)
    if model is None:
        return EXIT_USAGE
    try:
        table = enumerate_spectrum(model, cap=args.cap)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUILD
    summary = ground_summary(table)
    print("energy,multiplicity")
    for entry in table.entries:
        print(f"{_fmt(entry.energy)},{entry.multiplicity}")
    grounds = [''.join(map(str, state_bits(s, model.n)))
               for s in summary.ground_states]
    print(f"# C_opt={_fmt(summary.c_opt)} C_max={_fmt(summary.c_max)} "
          f"D_opt={len(summary.ground_states)} grounds={' '.join(grounds)}")
    return EXIT_OK


def cmd_encode(args) -> int:
    model = _load_model(args.model)
    if model is None:
        return EXIT_USAGE
    limits = _load_limits(args)
    try:
        outcome = encode_for_annealing(model, mode=args.mode, limits=limits)
    except NotEncodableError as exc:
        print(f"error: not encodable: {exc}", file=sys.stderr)
        return EXIT_BUILD
    enc = outcome.target
    payload = {"n": enc.n, "V": enc.v.tolist(),
               "delta_final": enc.delta_final.tolist(),
               "constant": enc.constant, "scale": enc.scale,
               "signed_interactions": outcome.signed,
               "gauge_flips": list(outcome.flips),
               "scale_binding": outcome.scale_binding}
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_layout(args) -> int:
    model = _load_model(args.model)
    if model is None:
        return EXIT_USAGE
    limits = _load_limits(args)
    try:
        outcome = encode_for_annealing(model, mode="physical", limits=limits)
        layout, report = embed_layout(outcome.target, dim=args.dim,
                                      seed=args.seed, limits=limits)
    except NotEncodableError as exc:
        print(f"error: not encodable: {exc}", file=sys.stderr)
        return EXIT_BUILD
    payload = layout.to_dict()
    payload["max_rel_error"] = report.max_rel_error
    payload["worst_pair"] = list(report.worst_pair)
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    model = _load_model(args.model)
    if model is None:
        return EXIT_USAGE
    try:
        with open(args.layout) as fh:
            layout = AtomLayout.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: cannot load layout: {exc}", file=sys.stderr)
        return EXIT_USAGE
    limits = _load_limits(args)
    try:
        outcome = encode_for_annealing(model, mode="physical", limits=limits)
        report = validate(outcome.target, layout, tol=args.tol)
    except (NotEncodableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUILD
    print(f"max_rel_error={_fmt(report.max_rel_error)} "
          f"worst_pair={report.worst_pair} "
          f"worst_unwanted={_fmt(report.worst_unwanted)} "
          f"passed={report.passed}")
    for pair in report.offending_pairs:
        print(f"offending pair: {pair}")
    return EXIT_OK if report.passed else EXIT_QUALITY


def cmd_hardness(args) -> int:
    model = _load_model(args.model)
    if model is None:
        return EXIT_USAGE
    try:
        rep = analyze_model(model, epsilon=args.epsilon,
                            energy_shift=args.energy_shift)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUILD
    note = "normalized by spectral width" if rep.normalized_by_width else ""
    row = {"problem": args.name, "E0": rep.e0, "gap": rep.gap,
           "D_opt": rep.d_opt, "D_E1": rep.d_first_excited,
           "threats": rep.threat_count, "Sigma": rep.sigma, "HP": rep.hp,
           "note": note}
    print(format_csv([row]) if args.csv else format_table([row]))
    return EXIT_OK


def _schedule_from_args(args, enc=None, preset_name=None, limits=None) -> Schedule:
    if args.schedule:
        with open(args.schedule) as fh:
            return Schedule.from_dict(json.load(fh))
    from .pipeline import default_schedule
    return default_schedule(preset_name, enc, t_total=args.duration,
                            limits=limits)


def cmd_anneal(args) -> int:
    model = _load_model(args.model)
    if model is None:
        return EXIT_USAGE
    limits = _load_limits(args)
    try:
        outcome = encode_for_annealing(model, mode=args.mode, limits=limits)
    except NotEncodableError as exc:
        print(f"error: not encodable: {exc}", file=sys.stderr)
        return EXIT_BUILD
    enc = outcome.target
    schedule = _schedule_from_args(args, enc, limits=limits)
    try:
        _, traj = propagate(enc, schedule,
                            PropagationConfig(initial_steps=args.steps))
    except AnnealerError as exc:
        print(f"error: propagation failed: {exc}", file=sys.stderr)
        return EXIT_PROPAGATION
    cols = ["t_us", "omega", "delta_G"] + \
        [f"delta_{j + 1}" for j in range(enc.n)] + ["E", "F"]
    lines = [",".join(cols)]
    for k in range(len(traj.times)):
        deltas = traj.delta_g[k] * enc.delta_final
        cells = [traj.times[k], traj.omega[k], traj.delta_g[k],
                 *deltas, traj.energy[k], traj.fidelity[k]]
        lines.append(",".join(_fmt(c) for c in cells))
    text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    print(f"# E(T)={_fmt(traj.energy[-1])} F(T)={_fmt(traj.fidelity[-1])}",
          file=sys.stderr)
    return EXIT_OK


def _run_full(args, instance_name: str, model, preset_name=None) -> int:
    limits = _load_limits(args)
    plan = StagePlan.default()
    if args.plan:
        with open(args.plan) as fh:
            plan = StagePlan.from_dict(json.load(fh))
    schedule = None
    if getattr(args, "schedule", None):
        with open(args.schedule) as fh:
            schedule = Schedule.from_dict(json.load(fh))
    try:
        result = run_pipeline(model, instance_name, preset_name=preset_name,
                              mode=args.mode, plan=plan, seed=args.seed,
                              schedule=schedule, limits=limits)
    except NotEncodableError as exc:
        print(f"error: not encodable: {exc}", file=sys.stderr)
        return EXIT_BUILD
    except AnnealerError as exc:
        print(f"error: propagation failed: {exc}", file=sys.stderr)
        return EXIT_PROPAGATION

    payload = result_json(result)
    _out_path(args, f"{instance_name}_result.json").write_text(
        json.dumps(payload, indent=2) + "\n")
    _out_path(args, f"{instance_name}_trajectory.csv").write_text(
        trajectory_csv(result) + "\n")
    try:
        rep = analyze_model(as_ising(model))
        note = "normalized by spectral width" if rep.normalized_by_width else ""
        row = {"problem": instance_name, "E0": rep.e0, "gap": rep.gap,
               "D_opt": rep.d_opt, "D_E1": rep.d_first_excited,
               "threats": rep.threat_count, "Sigma": rep.sigma, "HP": rep.hp,
               "note": note}
        _out_path(args, f"{instance_name}_hardness.csv").write_text(
            format_csv([row]) + "\n")
    except Exception as exc:
        print(f"warning: hardness row failed: {exc}", file=sys.stderr)

    opt = result.optimization
    print(f"instance={instance_name} R={_fmt(opt.ratio)} F={_fmt(opt.f_best)} "
          f"E={_fmt(opt.e_best)} evaluations={opt.evaluations} "
          f"manifest={result.manifest.hash()}")
    return EXIT_OK if opt.ratio >= args.threshold else EXIT_QUALITY


def cmd_pipeline(args) -> int:
    if args.preset:
        try:
            preset = preset_instance(args.preset)
        except ProblemError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        return _run_full(args, preset.name, preset.model, preset.name)
    model = _load_model(args.model)
    if model is None:
        return EXIT_USAGE
    name = Path(args.model).stem
    return _run_full(args, name, model)


def cmd_optimize(args) -> int:
    # optimize is the pipeline without the hardness row side output
    return cmd_pipeline(args)


def cmd_report(args) -> int:
    rows = []
    if args.from_spectral:
        try:
            with open(args.from_spectral) as fh:
                data = json.load(fh)
            for item in data:
                gap = float(item["gap"])
                e0 = float(item["E0"])
                d_opt = int(item["D_opt"])
                sig = sum(float(d) * math.exp(-float(de) / gap)
                          for d, de in item["threat_degeneracies"])
                e_max = float(item["E_max"]) if "E_max" in item else None
                hp, by_width = hardness_parameter(e0, d_opt, gap, sig, e_max)
                rows.append({"problem": item["problem"], "E0": e0, "gap": gap,
                             "D_opt": d_opt,
                             "D_E1": int(item.get("D_E1", 0)),
                             "threats": len(item["threat_degeneracies"]),
                             "Sigma": sig, "HP": hp,
                             "note": "normalized by spectral width" if by_width
                                     else "from supplied spectral quantities"})
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: malformed spectral input: {exc}", file=sys.stderr)
            return EXIT_USAGE
    elif args.presets:
        named = []
        for name in PRESET_NAMES:
            preset = preset_instance(name)
            note = ("" if preset.metadata.get("degeneracy_pinned")
                    else "degeneracy depends on unpinned penalty defaults")
            named.append((name, preset.model, note))
        rows = report_rows(named, epsilon=args.epsilon)
    else:
        if not args.inputs:
            print("error: no inputs given", file=sys.stderr)
            return EXIT_USAGE
        for path in args.inputs:
            try:
                with open(path) as fh:
                    data = json.load(fh)
                rows.append({"problem": data.get("instance", Path(path).stem),
                             "E0": float(data.get("C_opt", float("nan"))),
                             "gap": float("nan"),
                             "D_opt": len(data.get("ground_states", [])),
                             "D_E1": 0, "threats": 0, "Sigma": float("nan"),
                             "HP": float("nan"),
                             "note": f"R={data.get('R'):.6f}"})
            except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
                print(f"error: malformed input {path}: {exc}", file=sys.stderr)
                return EXIT_USAGE
    text = format_csv(rows) if args.csv else format_table(rows)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydqubo",
        description="QUBO problems on a simulated Rydberg annealer")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="hardware limits JSON file")
        p.add_argument("--out-dir", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mode", choices=("ideal", "physical"), default="ideal")

    p = sub.add_parser("problem", help="build a model from a family or preset")
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--family", choices=PRESET_NAMES)
    p.add_argument("--params", help="family parameters as JSON")
    p.add_argument("--clauses", help="two-SAT clauses JSON shorthand")
    p.add_argument("--constraints", help="XOR constraints JSON shorthand")
    p.add_argument("--n", type=int, help="variable count shorthand")
    p.add_argument("--out")
    p.set_defaults(func=cmd_problem)

    p = sub.add_parser("spectrum", help="exhaustive spectrum of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--cap", type=int, default=20)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("encode", help="map a model to interactions/detunings")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    add_common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("layout", help="embed atom positions for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--out")
    add_common(p)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("validate", help="check a layout against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--layout", required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("hardness", help="spectral hardness of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--name", default="model")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--energy-shift", type=float, default=0.0)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_hardness)

    p = sub.add_parser("anneal", help="propagate one schedule, emit trajectory")
    p.add_argument("--model", required=True)
    p.add_argument("--schedule", help="schedule JSON file")
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--out")
    add_common(p)
    p.set_defaults(func=cmd_anneal)

    for name, help_text in (("optimize", "optimize a pulse schedule"),
                            ("pipeline", "full build-encode-optimize run")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--preset", choices=PRESET_NAMES)
        p.add_argument("--model")
        p.add_argument("--plan", help="stage plan JSON file")
        p.add_argument("--schedule", help="schedule JSON file")
        p.add_argument("--threshold", type=float, default=0.98)
        add_common(p)
        p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="aggregate hardness/result rows")
    p.add_argument("inputs", nargs="*", help="result JSON files")
    p.add_argument("--from-spectral", help="JSON with spectral quantities")
    p.add_argument("--presets", action="store_true",
                   help="hardness table of the built-in presets")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("optimize", "pipeline") and not (args.preset or args.model):
        print("error: provide --preset or --model", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
