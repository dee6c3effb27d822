"""End-to-end orchestration: build -> encode -> (layout) -> optimize -> report.

Shared by the CLI and by programmatic callers.  Runs are described by a
manifest whose hash is embedded in every output file; identical manifests
produce identical numeric output.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import __version__
from .annealer import (DegenerateInitialStateError, PropagationConfig,
                       Schedule, initial_basis_index, propagate)
from .encoding import (EncodedTarget, FrustratedModelError, HardwareLimits,
                       NotEncodableError, embed_layout, encode, gauge_fix,
                       rescale, validate)
from .hardness import analyze_model
from .models import (IsingModel, QuboModel, as_ising, enumerate_spectrum,
                     ground_summary)
from .optimizer import AnnealObjective, OptimizationResult, StagePlan, run_hybrid
from .problems import preset_instance

DELTA0_CANDIDATES = (-1.0, -0.5, -2.0, 0.5, 2.0, -4.0, 4.0)


@dataclass(frozen=True)
class RunManifest:
    instance: str
    mode: str                  # "ideal" or "physical"
    schedule: dict
    plan: dict
    seed: int
    version: str = __version__
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {"instance": self.instance, "mode": self.mode,
                "schedule": self.schedule, "plan": self.plan,
                "seed": self.seed, "version": self.version,
                "timestamp": self.timestamp}

    def hash(self) -> str:
        # the timestamp is metadata, not identity
        payload = {k: v for k, v in self.to_dict().items() if k != "timestamp"}
        return hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class EncodingOutcome:
    target: EncodedTarget
    flips: tuple[int, ...]         # XOR mask mapping encoded bits to source bits
    signed: bool                   # negative interactions kept (ideal mode only)
    scale_binding: str


def encode_for_annealing(model: IsingModel | QuboModel,
                         mode: str = "ideal",
                         limits: HardwareLimits | None = None) -> EncodingOutcome:
    """Encode a model, gauge-fixing negative couplings when possible.

    Frustrated coupling signs cannot be gauged away; in ideal mode the signed
    interactions are kept (they cannot be realized geometrically, which is
    flagged), in physical mode the error propagates.
    """
    ising = as_ising(model)
    limits = limits or HardwareLimits()
    flips = (0,) * ising.n
    signed = False
    try:
        target = encode(ising)
    except NotEncodableError:
        try:
            gauged, flips = gauge_fix(ising)
            target = encode(gauged)
        except FrustratedModelError:
            if mode != "ideal":
                raise
            target = encode(ising, allow_negative=True)
            flips = (0,) * ising.n
            signed = True
    target, rep = rescale(target, limits)
    return EncodingOutcome(target, flips, signed, rep.binding)


def default_schedule(preset_name: str | None, enc: EncodedTarget,
                     t_total: float | None = None,
                     delta0: float | None = None,
                     n_delta: int = 6, n_omega: int = 6,
                     basis: str = "fourier",
                     limits: HardwareLimits | None = None) -> Schedule:
    """Schedule template with a Delta_G(0) for which H(0) has a usable start.

    Scans a small candidate list for a non-degenerate diagonal minimum; if
    every candidate is degenerate, picks one whose minima include the
    all-ground-atoms state (the annealer then starts there).
    """
    limits = limits or HardwareLimits()
    if t_total is None:
        meta = preset_instance(preset_name).metadata if preset_name else {}
        t_total = float(meta.get("duration_us", 60.0))
    t_total = min(t_total, limits.t_max)
    base = Schedule(t_total, (0.0,) * n_delta, (0.0,) * n_omega,
                    basis=basis, omega_max=limits.omega_max)
    if delta0 is not None:
        return replace(base, delta0=delta0)
    fallback = None
    for cand in DELTA0_CANDIDATES:
        sched = replace(base, delta0=cand)
        try:
            initial_basis_index(enc, sched, require_unique=True)
            return sched
        except DegenerateInitialStateError:
            if fallback is None:
                idx = initial_basis_index(enc, sched, require_unique=False)
                if idx == 0:
                    fallback = sched
    return fallback if fallback is not None else replace(base, delta0=-1.0)


@dataclass(frozen=True)
class PipelineResult:
    manifest: RunManifest
    outcome: EncodingOutcome
    optimization: OptimizationResult
    c_opt: float
    c_max: float
    ground_states: tuple[int, ...]
    trajectory_rows: list[dict]
    layout: object | None = None
    layout_report: object | None = None


def run_pipeline(model: IsingModel | QuboModel,
                 instance_name: str = "custom",
                 preset_name: str | None = None,
                 mode: str = "ideal",
                 plan: StagePlan | None = None,
                 seed: int = 0,
                 schedule: Schedule | None = None,
                 limits: HardwareLimits | None = None,
                 propagation_steps: int = 200,
                 layout_dim: int | None = None) -> PipelineResult:
    limits = limits or HardwareLimits()
    plan = plan or StagePlan.default()
    outcome = encode_for_annealing(model, mode=mode, limits=limits)
    enc = outcome.target

    layout = layout_report = None
    if mode == "physical":
        layout, layout_report = embed_layout(enc, dim=layout_dim or 2, seed=seed,
                                             limits=limits)

    if schedule is None:
        schedule = default_schedule(preset_name, enc, limits=limits)

    ising = as_ising(model)
    summary = ground_summary(enumerate_spectrum(ising))
    objective = AnnealObjective(
        enc, schedule, PropagationConfig(initial_steps=propagation_steps,
                                         adaptive=False))
    result = run_hybrid(enc, plan, seed, objective=objective)

    manifest = RunManifest(instance_name, mode, schedule.to_dict(),
                           plan.to_dict(), seed,
                           timestamp=datetime.datetime.now(
                               datetime.timezone.utc).isoformat())
    _, traj = objective.propagate(result.params,
                                  PropagationConfig(initial_steps=max(propagation_steps, 200),
                                                    adaptive=True))
    delta_final = enc.delta_final
    rows = []
    for k in range(len(traj.times)):
        row = {"t_us": traj.times[k], "omega": traj.omega[k],
               "delta_G": traj.delta_g[k]}
        for j in range(enc.n):
            row[f"delta_{j + 1}"] = traj.delta_g[k] * delta_final[j]
        row["E"] = traj.energy[k]
        row["F"] = traj.fidelity[k]
        rows.append(row)

    # ground patterns in the source-model frame (gauge flips only affect the
    # encoded target, whose ground set the objective already tracks)
    grounds = tuple(sorted(summary.ground_states))
    return PipelineResult(manifest, outcome, result, summary.c_opt,
                          summary.c_max, grounds, rows, layout, layout_report)


def trajectory_csv(result: PipelineResult) -> str:
    if not result.trajectory_rows:
        return ""
    cols = list(result.trajectory_rows[0].keys())
    out = ["# manifest " + result.manifest.hash(), ",".join(cols)]
    for row in result.trajectory_rows:
        out.append(",".join(f"{row[c]:.12g}" for c in cols))
    return "\n".join(out)


def result_json(result: PipelineResult) -> dict:
    opt = result.optimization
    return {
        "manifest": result.manifest.to_dict(),
        "manifest_hash": result.manifest.hash(),
        "instance": result.manifest.instance,
        "mode": result.manifest.mode,
        "signed_interactions": result.outcome.signed,
        "gauge_flips": list(result.outcome.flips),
        "scale": result.outcome.target.scale,
        "scale_binding": result.outcome.scale_binding,
        "schedule": opt.schedule.to_dict(),
        "E_final": opt.e_best,
        "F_final": opt.f_best,
        "R": opt.ratio,
        "C_opt": result.c_opt,
        "C_max": result.c_max,
        "C_obt": opt.c_obt,
        "evaluations": opt.evaluations,
        "budget_exhausted": opt.budget_exhausted,
        "seed": opt.seed,
        "ground_states": [int(g) for g in result.ground_states],
    }
