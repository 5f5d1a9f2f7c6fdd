"""Configuration and state types shared by every other module.

All types are frozen dataclasses holding plain floats/tuples, so instances
are immutable value objects: safe to share across workers, hashable where it
matters, and exactly round-trippable through the JSON config format.

Units are fixed package-wide: radians, millimeters, newtons, N*mm torques.
Config documents may write angles as raw radians or as strings with an
explicit suffix ("20deg", "0.35rad").
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigSchemaError, ValidationError

SCHEMA_VERSION = 1

# Documented defaults. Gear teeth follow the three-joint drive chain
# (MCP, PIP, DIP); drive radii use a half-unit module, radius = teeth / 2.
DEFAULT_TEETH = (22, 20, 16)
DEFAULT_DRIVE_RADII = (11.0, 10.0, 8.0)
# Coupling radii chosen so that zero deflection of the two inter-joint
# elastic elements pins the flexion joints to the 6 : 7 : 4.2 proportion.
DEFAULT_COUPLING_RADII = (7.0, 6.0, 10.0)
DEFAULT_SPRING_SERIAL = 50.0
DEFAULT_SPRING_PARALLEL = (100.0, 100.0, 100.0)
DEFAULT_LINKS = (45.0, 25.0, 20.0)
DEFAULT_LINK_RADII = (8.0, 7.0, 6.0)
DEFAULT_LIMITS = (
    (-math.pi / 9, math.pi / 9),        # abduction-adduction, +/-20 deg
    (0.0, math.radians(100.0)),         # MCP flexion
    (0.0, math.radians(100.0)),         # PIP flexion
    (0.0, math.radians(100.0)),         # DIP flexion
)

_LIMIT_KEYS = ("aa", "mcp", "pip", "dip")


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def parse_angle(value: Any, field_name: str = "angle") -> float:
    """Parse an angle: raw number = radians, "20deg"/"0.3rad" = suffixed."""
    if isinstance(value, bool):
        raise ConfigSchemaError(field_name, "angle must be a number or suffixed string")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ConfigSchemaError(field_name, "angle must be finite")
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower()
        for suffix, scale in (("deg", math.pi / 180.0), ("rad", 1.0)):
            if text.endswith(suffix):
                try:
                    return float(text[: -len(suffix)]) * scale
                except ValueError:
                    break
        raise ConfigSchemaError(field_name, f"cannot parse angle {value!r}")
    raise ConfigSchemaError(field_name, f"cannot parse angle {value!r}")


@dataclass(frozen=True)
class DifferentialTrain:
    """Two-motor gear differential at the composite proximal joint.

    The three stages multiply into the composite drive map: motor angles
    pass through the motor stage, the differential coupling (sum/difference
    mixing), and the output stage.  ``swap_modes`` flips which planetary
    mode is reported as abduction and which as flexion drive.
    """

    output_stage: tuple = ((1.0, 0.0), (0.0, 1.0))
    coupling: tuple = ((0.5, 0.5), (0.5, -0.5))
    motor_stage: tuple = ((13.0 / 24.0, 0.0), (0.0, 13.0 / 24.0))
    swap_modes: bool = False

    def __post_init__(self):
        for name in ("output_stage", "coupling", "motor_stage"):
            m = getattr(self, name)
            rows = tuple(tuple(float(x) for x in row) for row in m)
            if len(rows) != 2 or any(len(r) != 2 for r in rows):
                raise ValidationError(f"differential.{name} must be 2x2")
            if not all(math.isfinite(x) for r in rows for x in r):
                raise ValidationError(f"differential.{name} must be finite")
            object.__setattr__(self, name, rows)
        if abs(np.linalg.det(self.composite())) < 1e-12:
            raise ValidationError("composite differential matrix is singular")

    def composite(self) -> np.ndarray:
        """Output-stage @ coupling @ motor-stage, the full drive-to-planetary map."""
        return (
            np.asarray(self.output_stage)
            @ np.asarray(self.coupling)
            @ np.asarray(self.motor_stage)
        )


@dataclass(frozen=True)
class CouplingModel:
    """Rigid inter-joint coupling of the three flexion joints.

    ``constraint`` annihilates any joint vector on the coupled line;
    ``ratio`` is that line's direction, conventionally scaled to 6 : 7 : 4.2
    for the stock gear set.
    """

    constraint: tuple = ((7.0, -6.0, 0.0), (0.0, 6.0, -10.0))
    ratio: tuple = (6.0, 7.0, 4.2)

    def __post_init__(self):
        rows = tuple(tuple(float(x) for x in row) for row in self.constraint)
        if len(rows) != 2 or any(len(r) != 3 for r in rows):
            raise ValidationError("coupling constraint must be 2x3")
        ratio = tuple(float(x) for x in self.ratio)
        if len(ratio) != 3:
            raise ValidationError("coupling ratio must have 3 entries")
        object.__setattr__(self, "constraint", rows)
        object.__setattr__(self, "ratio", ratio)
        residual = np.asarray(rows) @ np.asarray(ratio)
        if np.max(np.abs(residual)) > 1e-12 * max(1.0, float(np.max(np.abs(rows)))):
            raise ValidationError("coupling constraint does not annihilate the ratio")

    @classmethod
    def from_coupling_radii(cls, radii) -> "CouplingModel":
        """Build the constraint rows and coupled line from the gear radii.

        Zero deflection of the two inter-joint elements means
        r_c2*q2 = r_c1*q1 and r_c3*q3 = r_c2*q2; the ratio is scaled so its
        leading entry is 6, matching the conventional presentation.
        """
        r1, r2, r3 = (float(r) for r in radii)
        constraint = ((r1, -r2, 0.0), (0.0, r2, -r3))
        raw = (r2 * r3, r1 * r3, r1 * r2)
        scale = raw[0] / 6.0
        return cls(constraint=constraint, ratio=tuple(x / scale for x in raw))


@dataclass(frozen=True)
class FingerParams:
    """Structural parameters of one modular finger."""

    drive_teeth: tuple = DEFAULT_TEETH
    drive_radii: tuple = DEFAULT_DRIVE_RADII
    coupling_radii: tuple = DEFAULT_COUPLING_RADII
    differential: DifferentialTrain = field(default_factory=DifferentialTrain)
    spring_serial: float = DEFAULT_SPRING_SERIAL
    spring_parallel: tuple = DEFAULT_SPRING_PARALLEL
    link_lengths: tuple = DEFAULT_LINKS
    link_radii: tuple = DEFAULT_LINK_RADII
    joint_limits: tuple = DEFAULT_LIMITS

    def __post_init__(self):
        teeth = tuple(self.drive_teeth)
        if len(teeth) != 3:
            raise ValidationError("drive_teeth must have 3 entries")
        for z in teeth:
            if isinstance(z, bool) or not isinstance(z, (int, float)) or z != int(z):
                raise ValidationError(f"drive_teeth entries must be integers, got {z!r}")
            if int(z) < 1:
                raise ValidationError(f"drive_teeth entries must be >= 1, got {z}")
        object.__setattr__(self, "drive_teeth", tuple(int(z) for z in teeth))

        for name, n in (
            ("drive_radii", 3),
            ("coupling_radii", 3),
            ("spring_parallel", 3),
            ("link_lengths", 3),
            ("link_radii", 3),
        ):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != n:
                raise ValidationError(f"{name} must have {n} entries")
            if not all(math.isfinite(v) and v > 0 for v in vals):
                raise ValidationError(f"{name} entries must be strictly positive")
            object.__setattr__(self, name, vals)

        ks = float(self.spring_serial)
        if not (math.isfinite(ks) and ks > 0):
            raise ValidationError("spring_serial must be strictly positive")
        object.__setattr__(self, "spring_serial", ks)

        limits = tuple(tuple(float(x) for x in pair) for pair in self.joint_limits)
        if len(limits) != 4 or any(len(p) != 2 for p in limits):
            raise ValidationError("joint_limits must be 4 [min, max] pairs")
        for key, (lo, hi) in zip(_LIMIT_KEYS, limits):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValidationError(f"joint_limits.{key}: min must be < max")
        object.__setattr__(self, "joint_limits", limits)

        if not isinstance(self.differential, DifferentialTrain):
            raise ValidationError("differential must be a DifferentialTrain")

    def coupling_model(self) -> CouplingModel:
        return CouplingModel.from_coupling_radii(self.coupling_radii)

    @property
    def reach(self) -> float:
        """Straight-finger distance from the composite joint to the tip, mm."""
        return sum(self.link_lengths)


@dataclass(frozen=True)
class JointState:
    """Joint-space configuration: lateral swing plus three flexion angles, rad."""

    q_aa: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0

    def __post_init__(self):
        for name in ("q_aa", "q1", "q2", "q3"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.q_aa, self.q1, self.q2, self.q3])

    def flexion(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3])

    def within_limits(self, params: FingerParams, tol: float = 1e-9) -> bool:
        return all(
            lo - tol <= v <= hi + tol
            for v, (lo, hi) in zip(self.as_array(), params.joint_limits)
        )


@dataclass(frozen=True)
class DriveState:
    """Motor output angles of the two-actuator drive, rad."""

    a1: float = 0.0
    a2: float = 0.0

    def __post_init__(self):
        for name in ("a1", "a2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2])


@dataclass(frozen=True)
class PlanetaryState:
    """Planetary gear revolution/rotation angles at the composite joint, rad."""

    theta1: float = 0.0
    theta2: float = 0.0

    def __post_init__(self):
        for name in ("theta1", "theta2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2])


def default_params() -> FingerParams:
    """Stock finger: Table-style teeth (22, 20, 16), half-module drive radii,
    coupling radii giving the 6 : 7 : 4.2 joint proportion, anthropomorphic
    45/25/20 mm links."""
    return FingerParams()


def text_ratio_params() -> FingerParams:
    """Alternate preset using the 14 : 12 : 20 tooth proportion.

    Kept only as a named preset for comparison runs; never the default.
    """
    return FingerParams(drive_teeth=(14, 12, 20), drive_radii=(7.0, 6.0, 10.0))


PRESETS = {
    "default": default_params,
    "text-ratio": text_ratio_params,
}


# --------------------------------------------------------------------------
# Config document I/O
# --------------------------------------------------------------------------

_TOP_KEYS = {
    "version",
    "teeth",
    "drive_radii_mm",
    "coupling_radii_mm",
    "springs",
    "links_mm",
    "link_radii_mm",
    "limits",
    "differential",
}
_SPRING_KEYS = {"serial", "parallel"}
_DIFF_KEYS = {"output_stage", "coupling", "motor_stage", "swap_modes"}


def _require_number_list(doc, key: str, n: int, where: str) -> tuple:
    val = doc[key]
    if not isinstance(val, (list, tuple)) or len(val) != n:
        raise ConfigSchemaError(f"{where}{key}", f"expected a list of {n} numbers")
    out = []
    for i, x in enumerate(val):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigSchemaError(f"{where}{key}[{i}]", "expected a number")
        out.append(float(x))
    return tuple(out)


def _matrix2(doc, key: str, where: str) -> tuple:
    val = doc[key]
    if (
        not isinstance(val, (list, tuple))
        or len(val) != 2
        or any(not isinstance(r, (list, tuple)) or len(r) != 2 for r in val)
    ):
        raise ConfigSchemaError(f"{where}{key}", "expected a 2x2 matrix")
    return tuple(tuple(float(x) for x in row) for row in val)


def params_from_dict(doc: Mapping) -> FingerParams:
    """Validate a parsed config tree and build FingerParams.

    Unknown keys are errors; omitted keys fall back to the documented
    defaults.  Raises ConfigSchemaError naming the offending field, or
    ValidationError if the values break a model invariant.
    """
    if not isinstance(doc, Mapping):
        raise ConfigSchemaError("<root>", "config must be a key/value tree")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigSchemaError(sorted(unknown)[0], "unknown key")
    if "version" in doc and doc["version"] != SCHEMA_VERSION:
        raise ConfigSchemaError("version", f"unsupported version {doc['version']!r}")

    kwargs: dict = {}
    if "teeth" in doc:
        teeth = doc["teeth"]
        if not isinstance(teeth, (list, tuple)) or len(teeth) != 3:
            raise ConfigSchemaError("teeth", "expected a list of 3 integers")
        kwargs["drive_teeth"] = tuple(teeth)
    if "drive_radii_mm" in doc:
        kwargs["drive_radii"] = _require_number_list(doc, "drive_radii_mm", 3, "")
    if "coupling_radii_mm" in doc:
        kwargs["coupling_radii"] = _require_number_list(doc, "coupling_radii_mm", 3, "")
    if "links_mm" in doc:
        kwargs["link_lengths"] = _require_number_list(doc, "links_mm", 3, "")
    if "link_radii_mm" in doc:
        kwargs["link_radii"] = _require_number_list(doc, "link_radii_mm", 3, "")

    if "springs" in doc:
        springs = doc["springs"]
        if not isinstance(springs, Mapping):
            raise ConfigSchemaError("springs", "expected an object")
        unknown = set(springs) - _SPRING_KEYS
        if unknown:
            raise ConfigSchemaError(f"springs.{sorted(unknown)[0]}", "unknown key")
        if "serial" in springs:
            v = springs["serial"]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigSchemaError("springs.serial", "expected a number")
            kwargs["spring_serial"] = float(v)
        if "parallel" in springs:
            kwargs["spring_parallel"] = _require_number_list(
                springs, "parallel", 3, "springs."
            )

    if "limits" in doc:
        limits = doc["limits"]
        if not isinstance(limits, Mapping):
            raise ConfigSchemaError("limits", "expected an object")
        unknown = set(limits) - set(_LIMIT_KEYS)
        if unknown:
            raise ConfigSchemaError(f"limits.{sorted(unknown)[0]}", "unknown key")
        pairs = []
        for key, default in zip(_LIMIT_KEYS, DEFAULT_LIMITS):
            if key not in limits:
                pairs.append(default)
                continue
            pair = limits[key]
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigSchemaError(f"limits.{key}", "expected [min, max]")
            pairs.append(
                (
                    parse_angle(pair[0], f"limits.{key}[0]"),
                    parse_angle(pair[1], f"limits.{key}[1]"),
                )
            )
        kwargs["joint_limits"] = tuple(pairs)

    if "differential" in doc:
        diff = doc["differential"]
        if not isinstance(diff, Mapping):
            raise ConfigSchemaError("differential", "expected an object")
        unknown = set(diff) - _DIFF_KEYS
        if unknown:
            raise ConfigSchemaError(f"differential.{sorted(unknown)[0]}", "unknown key")
        dkw: dict = {}
        for key in ("output_stage", "coupling", "motor_stage"):
            if key in diff:
                dkw[key] = _matrix2(diff, key, "differential.")
        if "swap_modes" in diff:
            if not isinstance(diff["swap_modes"], bool):
                raise ConfigSchemaError("differential.swap_modes", "expected a boolean")
            dkw["swap_modes"] = diff["swap_modes"]
        kwargs["differential"] = DifferentialTrain(**dkw)

    return FingerParams(**kwargs)


def params_to_dict(p: FingerParams) -> dict:
    """Serialize to the config-document form; inverse of params_from_dict."""
    return {
        "version": SCHEMA_VERSION,
        "teeth": list(p.drive_teeth),
        "drive_radii_mm": list(p.drive_radii),
        "coupling_radii_mm": list(p.coupling_radii),
        "springs": {
            "serial": p.spring_serial,
            "parallel": list(p.spring_parallel),
        },
        "links_mm": list(p.link_lengths),
        "link_radii_mm": list(p.link_radii),
        "limits": {
            key: list(pair) for key, pair in zip(_LIMIT_KEYS, p.joint_limits)
        },
        "differential": {
            "output_stage": [list(r) for r in p.differential.output_stage],
            "coupling": [list(r) for r in p.differential.coupling],
            "motor_stage": [list(r) for r in p.differential.motor_stage],
            "swap_modes": p.differential.swap_modes,
        },
    }


def load_params(source) -> FingerParams:
    """Load finger parameters from a JSON file path, JSON text, or mapping."""
    if isinstance(source, Mapping):
        return params_from_dict(source)
    if isinstance(source, Path) or (
        isinstance(source, str) and not source.lstrip().startswith("{")
    ):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigSchemaError("<file>", f"cannot read {source}: {exc}") from exc
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSchemaError("<document>", f"invalid JSON: {exc}") from exc
    return params_from_dict(doc)


def resolve_params(spec: str) -> FingerParams:
    """Resolve a CLI-style config reference: preset name or file path."""
    if spec in PRESETS:
        return PRESETS[spec]()
    return load_params(spec)
