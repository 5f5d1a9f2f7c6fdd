"""Five-finger hand composition.

Thumb, index, and middle are full modular fingers; ring and little are
auxiliary fingers that keep the coupled flexion chain but replace the driven
lateral swing with a passive spring.  Base transforms place each finger root
in the palm frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigSchemaError, ValidationError
from .kinematics import derive_subseed, forward_kinematics, sample_workspace
from .params import FingerParams, JointState, parse_angle, params_from_dict

ACTIVE_KIND = "active-modular"
AUXILIARY_KIND = "auxiliary-passive-aa"
FINGER_NAMES = ("thumb", "index", "middle", "ring", "little")
DEFAULT_AUX_AA_SPRING = 200.0  # N*mm/rad


def rotation_from_axis_angle(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about ``axis`` by ``angle`` radians."""
    a = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(a)
    if not norm > 0:
        raise ValidationError("rotation axis must be nonzero")
    a = a / norm
    k = np.array(
        [[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]]
    )
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def base_transform(translation, axis=(0.0, 0.0, 1.0), angle: float = 0.0) -> np.ndarray:
    t = np.eye(4)
    t[:3, :3] = rotation_from_axis_angle(axis, angle)
    t[:3, 3] = np.asarray(translation, dtype=float)
    return t


@dataclass(frozen=True)
class FingerMount:
    """One finger in the hand: name, palm-frame base pose, drive kind."""

    name: str
    base: np.ndarray
    kind: str
    params: FingerParams
    aa_spring: float | None = None

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        if base.shape != (4, 4):
            raise ValidationError(f"{self.name}: base must be a 4x4 transform")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        if self.kind not in (ACTIVE_KIND, AUXILIARY_KIND):
            raise ValidationError(f"{self.name}: unknown finger kind {self.kind!r}")
        if self.kind == AUXILIARY_KIND:
            if self.aa_spring is None or not self.aa_spring > 0:
                raise ValidationError(
                    f"{self.name}: auxiliary fingers need a positive swing spring"
                )


@dataclass(frozen=True)
class HandLayout:
    """Exactly five mounted fingers; thumb/index/middle actively driven."""

    fingers: tuple

    def __post_init__(self):
        fingers = tuple(self.fingers)
        if len(fingers) != 5:
            raise ValidationError("hand layout must mount exactly 5 fingers")
        names = [f.name for f in fingers]
        if len(set(names)) != 5:
            raise ValidationError("finger names must be unique")
        object.__setattr__(self, "fingers", fingers)

    def by_name(self, name: str) -> FingerMount:
        for f in self.fingers:
            if f.name == name:
                return f
        raise KeyError(name)


def default_layout(params: FingerParams | None = None) -> HandLayout:
    """Documented stock palm: index/middle/ring/little parallel at 20 mm
    lateral pitch, thumb root offset palmward and rotated 90 degrees into
    opposition.  Ring and little are auxiliary with passive swing springs."""
    p = params if params is not None else FingerParams()
    mounts = [
        FingerMount(
            name="thumb",
            base=base_transform((-20.0, 0.0, -30.0), axis=(1.0, 0.0, 0.0), angle=math.pi / 2),
            kind=ACTIVE_KIND,
            params=p,
        )
    ]
    for i, name in enumerate(("index", "middle", "ring", "little")):
        kind = ACTIVE_KIND if name in ("index", "middle") else AUXILIARY_KIND
        mounts.append(
            FingerMount(
                name=name,
                base=base_transform((0.0, 0.0, 20.0 * i)),
                kind=kind,
                params=p,
                aa_spring=DEFAULT_AUX_AA_SPRING if kind == AUXILIARY_KIND else None,
            )
        )
    return HandLayout(fingers=tuple(mounts))


def hand_fk(joint_states, layout: HandLayout):
    """Pose chains for all five fingers; one JointState per mounted finger,
    in layout order."""
    states = list(joint_states)
    if len(states) != len(layout.fingers):
        raise ValidationError(
            f"expected {len(layout.fingers)} joint states, got {len(states)}"
        )
    return [
        forward_kinematics(q, mount.params, base=mount.base)
        for q, mount in zip(states, layout.fingers)
    ]


def auxiliary_aa_deflection(torque: float, spring: float, limit: float) -> float:
    """Passive lateral deflection of an auxiliary finger under a swing torque:
    linear spring response clamped to the travel limit."""
    if not spring > 0:
        raise ValidationError("swing spring stiffness must be strictly positive")
    angle = torque / spring
    return min(max(angle, -abs(limit)), abs(limit))


def hand_workspace(layout: HandLayout, n: int, seed: int, coupled: bool = False):
    """Per-finger fingertip clouds in the palm frame plus their union.

    Each finger consumes its own derived sub-stream so clouds stay
    reproducible regardless of evaluation order."""
    clouds = {}
    for index, mount in enumerate(layout.fingers):
        sub = derive_subseed(seed, index)
        cloud = sample_workspace(mount.params, n, seed=sub, coupled=coupled)
        pts = (mount.base[:3, :3] @ cloud.points.T).T + mount.base[:3, 3]
        clouds[mount.name] = pts
    union = np.vstack(list(clouds.values()))
    return clouds, union


# --------------------------------------------------------------------------
# Layout config documents
# --------------------------------------------------------------------------

_LAYOUT_TOP_KEYS = {"version", "fingers"}
_FINGER_KEYS = {"name", "base", "kind", "params", "aa_spring"}
_BASE_KEYS = {"translation", "axis", "angle"}


def layout_from_dict(doc: Mapping) -> HandLayout:
    """Parse a hand layout tree: key ``fingers`` with name, base pose as
    translation plus axis-angle rotation, kind, optional per-finger params."""
    if not isinstance(doc, Mapping):
        raise ConfigSchemaError("<root>", "layout must be a key/value tree")
    unknown = set(doc) - _LAYOUT_TOP_KEYS
    if unknown:
        raise ConfigSchemaError(sorted(unknown)[0], "unknown key")
    if "fingers" not in doc:
        raise ConfigSchemaError("fingers", "missing key")
    entries = doc["fingers"]
    if not isinstance(entries, (list, tuple)):
        raise ConfigSchemaError("fingers", "expected a list")

    mounts = []
    for i, entry in enumerate(entries):
        where = f"fingers[{i}]"
        if not isinstance(entry, Mapping):
            raise ConfigSchemaError(where, "expected an object")
        unknown = set(entry) - _FINGER_KEYS
        if unknown:
            raise ConfigSchemaError(f"{where}.{sorted(unknown)[0]}", "unknown key")
        if "name" not in entry or "kind" not in entry:
            raise ConfigSchemaError(where, "name and kind are required")
        base = np.eye(4)
        if "base" in entry:
            spec = entry["base"]
            if not isinstance(spec, Mapping) or set(spec) - _BASE_KEYS:
                raise ConfigSchemaError(
                    f"{where}.base", "expected translation/axis/angle"
                )
            translation = spec.get("translation", (0.0, 0.0, 0.0))
            axis = spec.get("axis", (0.0, 0.0, 1.0))
            angle = parse_angle(spec.get("angle", 0.0), f"{where}.base.angle")
            base = base_transform(translation, axis, angle)
        params = (
            params_from_dict(entry["params"]) if "params" in entry else FingerParams()
        )
        aa_spring = entry.get("aa_spring")
        mounts.append(
            FingerMount(
                name=str(entry["name"]),
                base=base,
                kind=str(entry["kind"]),
                params=params,
                aa_spring=float(aa_spring) if aa_spring is not None else None,
            )
        )
    return HandLayout(fingers=tuple(mounts))


def load_layout(source) -> HandLayout:
    if isinstance(source, Mapping):
        return layout_from_dict(source)
    text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSchemaError("<document>", f"invalid JSON: {exc}") from exc
    return layout_from_dict(doc)
