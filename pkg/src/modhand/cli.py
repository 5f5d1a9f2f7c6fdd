"""Command-line interface.

Subcommands: drive-map, workspace, ucm-report, envelop, hand-fk.  Exit codes:
0 success, 1 validation/usage error, 2 solver non-convergence.  Every run
that writes files also writes a run manifest (<out>.manifest.json) recording
the subcommand, a digest of the resolved configuration, the seed, the tool
version, and the output paths, so results can be traced back to their inputs.

All numeric output is fixed at 9 significant digits; computation is full
double precision.  The environment variable UCM_SEED overrides the default
sampling seed (0) when --seed is not given.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .drive import drive_to_mcp, rigid_coupled_flexion
from .errors import (
    InfeasibleStartError,
    ModhandError,
    NonConvergedError,
    SweepError,
    ValidationError,
)
from .grasp import RigidObject, envelop_sweep
from .hand import default_layout, hand_fk, load_layout
from .kinematics import points_to_csv, project_workspace, sample_workspace
from .params import (
    DriveState,
    JointState,
    params_to_dict,
    resolve_params,
)
from .ucm import constraint_rank, motion_subspaces, stiffness_matrices, transmission_jacobians


def fmt(x: float) -> str:
    return f"{float(x):.9g}"


def sig(x: float) -> float:
    """Round through the 9-significant-digit text form for stable JSON."""
    return float(fmt(x))


def sig_list(values) -> list:
    return [sig(v) for v in np.asarray(values, dtype=float).ravel()]


@dataclass
class RunManifest:
    subcommand: str
    config_digest: str
    seed: int | None
    version: str
    outputs: list = field(default_factory=list)

    def write_next_to(self, out_path: str) -> str:
        path = out_path + ".manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def config_digest(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _default_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("UCM_SEED", "0"))


def _emit(text: str, out: str | None, manifest: RunManifest) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        manifest.outputs.append(out)
        manifest.write_next_to(out)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_drive_map(args) -> int:
    params = resolve_params(args.config)
    train = params.differential
    coupling = params.coupling_model()
    theta, (q_aa, q_fe) = drive_to_mcp(DriveState(args.a1, args.a2), train)
    q2, q3 = rigid_coupled_flexion(q_fe, coupling)

    manifest = RunManifest(
        subcommand="drive-map",
        config_digest=config_digest(params_to_dict(params)),
        seed=None,
        version=__version__,
    )
    if args.format == "json":
        # single-line structured record
        payload = {
            "theta_rad": sig_list(theta.as_array()),
            "q_aa_rad": sig(q_aa),
            "q_fe_rad": sig(q_fe),
            "rigid_flexion_rad": sig_list([q_fe, q2, q3]),
            "manifest": asdict(manifest),
        }
        text = json.dumps(payload, sort_keys=True) + "\n"
    else:
        lines = [
            "quantity        value",
            f"theta1_rad      {fmt(theta.theta1)}",
            f"theta2_rad      {fmt(theta.theta2)}",
            f"q_aa_rad        {fmt(q_aa)}",
            f"q_fe_rad        {fmt(q_fe)}",
            f"q1_rad          {fmt(q_fe)}",
            f"q2_rad          {fmt(q2)}",
            f"q3_rad          {fmt(q3)}",
        ]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out, manifest)
    return 0


def cmd_workspace(args) -> int:
    if args.n < 1:
        raise ValidationError("--n must be >= 1")
    params = resolve_params(args.config)
    seed = _default_seed(args)
    cloud = sample_workspace(params, args.n, seed=seed, coupled=args.coupled)
    if args.project:
        pts = project_workspace(cloud, args.project)
        text = points_to_csv(pts, ("u_mm", "v_mm"))
    else:
        text = points_to_csv(cloud.points, ("x_mm", "y_mm", "z_mm"))
    manifest = RunManifest(
        subcommand="workspace",
        config_digest=config_digest(params_to_dict(params)),
        seed=seed,
        version=__version__,
    )
    _emit(text, args.out, manifest)
    return 0


def cmd_ucm_report(args) -> int:
    params = resolve_params(args.config)
    jac = transmission_jacobians(params)
    stiff = stiffness_matrices(params)
    rank = constraint_rank(params)
    ms = motion_subspaces(params)

    manifest = RunManifest(
        subcommand="ucm-report",
        config_digest=config_digest(params_to_dict(params)),
        seed=None,
        version=__version__,
    )
    if args.format == "json":
        payload = {
            "serial_joint_jacobian": sig_list(jac.serial_joint),
            "parallel_jacobian": [sig_list(row) for row in jac.parallel],
            "constraint_rank": rank,
            "stable": rank == 3,
            "positive_definite": stiff.positive_definite,
            "min_stiffness_eigenvalue": sig(stiff.min_eigenvalue),
            "active_direction": sig_list(ms.active_direction),
            "passive_basis": [sig_list(row) for row in ms.passive_basis],
            "passive_plane": sig_list(ms.passive_normal),
            "active_force_row": sig_list(ms.active_force),
            "manifest": asdict(manifest),
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = [
            f"serial joint jacobian   {' '.join(fmt(v) for v in jac.serial_joint)}",
            "parallel jacobian       "
            + "; ".join(" ".join(fmt(v) for v in row) for row in jac.parallel),
            f"constraint rank         {rank}",
            f"stable                  {rank == 3}",
            f"positive definite       {stiff.positive_definite}",
            f"min stiffness eigval    {fmt(stiff.min_eigenvalue)}",
            f"active direction        {' '.join(fmt(v) for v in ms.active_direction)}",
            "passive basis           "
            + "; ".join(" ".join(fmt(v) for v in row) for row in ms.passive_basis),
            f"passive plane           {' '.join(fmt(v) for v in ms.passive_normal)}",
            f"active force row        {' '.join(fmt(v) for v in ms.active_force)}",
        ]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out, manifest)
    return 0


def _trace_records(trace, steps_requested: int) -> str:
    lines = []
    n = len(trace.steps)
    for i, step in enumerate(trace.steps):
        record = {
            "step": i,
            "a": sig(step.a),
            "q_deg": sig_list(np.degrees(step.joints.as_array())),
            "contacts": [
                {
                    "phalanx": c.phalanx,
                    "force_n": sig(c.force),
                    "gap_mm": sig(c.gap),
                }
                for c in step.contacts
            ],
            "energy": sig(step.energy),
            "status": trace.status if i == n - 1 else "ok",
        }
        lines.append(json.dumps(record, sort_keys=True))
    if n == 0:
        lines.append(json.dumps({"step": None, "status": trace.status}, sort_keys=True))
    return "\n".join(lines) + "\n"


def cmd_envelop(args) -> int:
    params = resolve_params(args.config)
    center = [float(v) for v in args.center.split(",")]
    if len(center) != 3:
        raise ValidationError("--center expects x,y,z")
    if args.sphere_d <= 0:
        raise ValidationError("--sphere-d must be positive")
    if args.steps < 1:
        raise ValidationError("--steps must be >= 1")
    obj = RigidObject.sphere(tuple(center), args.sphere_d / 2.0)
    schedule = np.linspace(0.0, args.a_max, args.steps)

    manifest = RunManifest(
        subcommand="envelop",
        config_digest=config_digest(params_to_dict(params)),
        seed=None,
        version=__version__,
    )
    from .grasp import EquilibriumTrace

    try:
        trace = envelop_sweep(schedule, params, obj)
    except (SweepError, InfeasibleStartError, NonConvergedError):
        trace = EquilibriumTrace(steps=(), status="non-converged")
    text = _trace_records(trace, args.steps)
    _emit(text, args.out, manifest)
    return 2 if trace.status == "non-converged" else 0


def cmd_hand_fk(args) -> int:
    layout = default_layout() if args.layout == "default" else load_layout(args.layout)
    if args.joints == "zeros":
        states = [JointState() for _ in layout.fingers]
    else:
        with open(args.joints, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, list) or len(doc) != len(layout.fingers):
            raise ValidationError(
                f"--joints file must hold {len(layout.fingers)} joint vectors"
            )
        states = [JointState(*[float(v) for v in row]) for row in doc]
    chains = hand_fk(states, layout)

    manifest = RunManifest(
        subcommand="hand-fk",
        config_digest=config_digest({"layout": args.layout}),
        seed=None,
        version=__version__,
    )
    if args.format == "json":
        payload = {
            "fingers": {
                mount.name: {"tip_mm": sig_list(chain.tip)}
                for mount, chain in zip(layout.fingers, chains)
            },
            "manifest": asdict(manifest),
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["finger   tip_x_mm      tip_y_mm      tip_z_mm"]
        for mount, chain in zip(layout.fingers, chains):
            x, y, z = chain.tip
            lines.append(f"{mount.name:<8} {fmt(x):<13} {fmt(y):<13} {fmt(z)}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out, manifest)
    return 0


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modhand",
        description="Modular dexterous finger models: differential drive, "
        "coupled flexion, compliant transmission analysis, workspace "
        "sampling, and quasi-static enveloping simulation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    dm = sub.add_parser("drive-map", help="two-motor drive to joint mapping")
    dm.add_argument("--a1", type=float, required=True, help="motor 1 angle, rad")
    dm.add_argument("--a2", type=float, required=True, help="motor 2 angle, rad")
    dm.add_argument("--config", default="default")
    dm.add_argument("--format", choices=("text", "json"), default="text")
    dm.add_argument("--out")
    dm.set_defaults(func=cmd_drive_map)

    ws = sub.add_parser("workspace", help="Monte Carlo fingertip cloud")
    ws.add_argument("--n", type=int, required=True, help="sample count")
    ws.add_argument("--seed", type=int, default=None)
    ws.add_argument("--coupled", action="store_true",
                    help="restrict distal joints to the rigid-coupling line")
    ws.add_argument("--project", choices=("xoy", "xoz", "yoz"))
    ws.add_argument("--config", default="default")
    ws.add_argument("--out")
    ws.set_defaults(func=cmd_workspace)

    ur = sub.add_parser("ucm-report", help="compliant transmission analysis")
    ur.add_argument("--config", default="default")
    ur.add_argument("--format", choices=("text", "json"), default="text")
    ur.add_argument("--out")
    ur.set_defaults(func=cmd_ucm_report)

    ev = sub.add_parser("envelop", help="quasi-static enveloping sweep")
    ev.add_argument("--config", default="default")
    ev.add_argument("--sphere-d", type=float, required=True, help="sphere diameter, mm")
    ev.add_argument("--center", required=True, help="sphere center as x,y,z (mm)")
    ev.add_argument("--a-max", type=float, required=True, help="final drive value")
    ev.add_argument("--steps", type=int, default=160)
    ev.add_argument("--out")
    ev.set_defaults(func=cmd_envelop)

    hf = sub.add_parser("hand-fk", help="five-finger forward kinematics")
    hf.add_argument("--layout", default="default", help="layout file or 'default'")
    hf.add_argument("--joints", default="zeros",
                    help="JSON file with five [aa,q1,q2,q3] rows, or 'zeros'")
    hf.add_argument("--format", choices=("text", "json"), default="text")
    hf.add_argument("--out")
    hf.set_defaults(func=cmd_hand_fk)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract reserves 2 for
        # solver non-convergence and 1 for bad input.
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except NonConvergedError:
        print("error: solver did not converge", file=sys.stderr)
        return 2
    except ModhandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
