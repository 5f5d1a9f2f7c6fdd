"""Forward kinematics and Monte Carlo workspace analysis.

Frame convention (documented so independent implementations can reproduce
the clouds exactly):

* base x: distal direction of the straight finger
* base y: palmar curl direction; positive flexion moves the tip toward +y
* base z: lateral axis completing the right-handed frame

The composite proximal joint rotates first about the palm normal (+y at the
joint, positive swing toward -z), then three parallel-axis flexion joints
follow.  The chain is evaluated with standard four-parameter link transforms:
a 90 degree twist takes the swing axis into the flexion axes, and each
flexion link carries its phalanx length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ValidationError
from .params import FingerParams, JointState

# Fixed alignment from the first link frame to the base convention above.
_BASE_ALIGN = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)

_PLANES = {"xoy": (0, 1), "xoz": (0, 2), "yoz": (1, 2)}


def dh_transform(theta: float, d: float, a: float, alpha: float) -> np.ndarray:
    """Single link transform: rotate theta about z, offset d along z,
    length a along x, twist alpha about x."""
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, a * ct],
            [st, ct * ca, -ct * sa, a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


@dataclass(frozen=True)
class FingerPoseChain:
    """Rigid frames of one finger at a given joint state.

    ``frames`` holds the world pose after each joint in order (composite
    joint after the swing, then each flexion link with its origin at the far
    end of the phalanx), so consecutive origins span the phalanx segments.
    """

    base: np.ndarray
    frames: tuple  # 4 world transforms: swing, proximal, middle, distal
    joint_state: JointState

    def __post_init__(self):
        base = np.array(self.base, dtype=float)
        base.setflags(write=False)
        frames = tuple(np.array(f, dtype=float) for f in self.frames)
        for f in frames:
            f.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frames", frames)

    @property
    def tip(self) -> np.ndarray:
        return self.frames[3][:3, 3]

    @property
    def tip_rotation(self) -> np.ndarray:
        return self.frames[3][:3, :3]

    def joint_positions(self) -> np.ndarray:
        """Stacked positions of the composite joint, the two inter-phalanx
        joints, and the fingertip (4 x 3, mm)."""
        return np.stack(
            [self.frames[0][:3, 3]] + [f[:3, 3] for f in self.frames[1:]]
        )

    def segments(self):
        """Phalanx axis segments proximal to distal: ((p0, p1), ...)."""
        pts = self.joint_positions()
        return ((pts[0], pts[1]), (pts[1], pts[2]), (pts[2], pts[3]))


def forward_kinematics(
    q: JointState, params: FingerParams, base: np.ndarray | None = None
) -> FingerPoseChain:
    """Pose chain of the 4-DoF finger at joint state ``q``.

    ``base`` is an optional world transform of the finger root (4 x 4).
    """
    if base is None:
        base = np.eye(4)
    l1, l2, l3 = params.link_lengths
    t_swing = base @ _BASE_ALIGN @ dh_transform(q.q_aa, 0.0, 0.0, np.pi / 2)
    t_prox = t_swing @ dh_transform(q.q1, 0.0, l1, 0.0)
    t_mid = t_prox @ dh_transform(q.q2, 0.0, l2, 0.0)
    t_dist = t_mid @ dh_transform(q.q3, 0.0, l3, 0.0)
    return FingerPoseChain(
        base=base, frames=(t_swing, t_prox, t_mid, t_dist), joint_state=q
    )


def batch_fingertips(
    qs: np.ndarray, params: FingerParams, base: np.ndarray | None = None
) -> np.ndarray:
    """Fingertip positions for an (n, 4) array of joint states, (n, 3) mm.

    Same link-transform chain as forward_kinematics, evaluated with stacked
    matrices so large Monte Carlo clouds stay cheap.
    """
    qs = np.asarray(qs, dtype=float)
    n = qs.shape[0]
    chain = np.broadcast_to(
        (_BASE_ALIGN if base is None else np.asarray(base) @ _BASE_ALIGN), (n, 4, 4)
    ).copy()
    specs = [
        (qs[:, 0], 0.0, np.pi / 2),
        (qs[:, 1], params.link_lengths[0], 0.0),
        (qs[:, 2], params.link_lengths[1], 0.0),
        (qs[:, 3], params.link_lengths[2], 0.0),
    ]
    for theta, a, alpha in specs:
        ct, st = np.cos(theta), np.sin(theta)
        ca, sa = np.cos(alpha), np.sin(alpha)
        step = np.zeros((n, 4, 4))
        step[:, 0, 0] = ct
        step[:, 0, 1] = -st * ca
        step[:, 0, 2] = st * sa
        step[:, 0, 3] = a * ct
        step[:, 1, 0] = st
        step[:, 1, 1] = ct * ca
        step[:, 1, 2] = -ct * sa
        step[:, 1, 3] = a * st
        step[:, 2, 1] = sa
        step[:, 2, 2] = ca
        step[:, 3, 3] = 1.0
        chain = chain @ step
    return chain[:, :3, 3]


class SplitMix64:
    """Deterministic 64-bit generator (splitmix64), portable by construction.

    Doubles come from the top 53 bits of each output word, so any
    implementation of the published splitmix64 recurrence reproduces the
    exact sample stream.
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = int(seed) & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float, hi: float) -> float:
        u = self.next_u64() >> 11  # 53 significant bits
        return lo + (hi - lo) * (u * (1.0 / (1 << 53)))


def derive_subseed(seed: int, index: int) -> int:
    """Sub-seed for worker partition ``index`` of a master seed.

    Partitioned runs must still emit samples in single-stream order; the
    derivation exists so concurrent samplers never share a stream.
    """
    gen = SplitMix64(seed)
    value = gen.next_u64()
    for _ in range(index):
        value = gen.next_u64()
    return value


def coupled_flexion_range(params: FingerParams, coupling=None):
    """MCP flexion interval reachable with distal joints on the coupled line
    while every joint stays inside its own limits."""
    coupling = coupling or params.coupling_model()
    r0, r1, r2 = coupling.ratio
    if r1 <= 0 or r2 <= 0 or r0 <= 0:
        raise ValidationError("coupled sampling requires a positive ratio")
    (_, _), (lo1, hi1), (lo2, hi2), (lo3, hi3) = params.joint_limits
    lo = max(lo1, lo2 * r0 / r1, lo3 * r0 / r2)
    hi = min(hi1, hi2 * r0 / r1, hi3 * r0 / r2)
    if not lo < hi:
        raise ValidationError("coupled flexion range is empty for these limits")
    return lo, hi


@dataclass(frozen=True)
class WorkspaceCloud:
    """Monte Carlo fingertip cloud with enough metadata to reproduce it."""

    points: np.ndarray  # (n, 3) mm
    seed: int
    coupled: bool
    joint_limits: tuple

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]


def sample_workspace(
    params: FingerParams, n: int, seed: int = 0, coupled: bool = False
) -> WorkspaceCloud:
    """Fingertip cloud from ``n`` i.i.d. uniform joint samples.

    Per sample the stream is consumed in a fixed order: swing angle, then
    each flexion angle (free mode), or swing angle then the single coupled
    flexion parameter (coupled mode).  The stream is sequential, so the
    first m points of a run are exactly the m-point run with the same seed.
    """
    if n < 1:
        raise ValidationError("sample count n must be >= 1")
    gen = SplitMix64(seed)
    limits = params.joint_limits
    qs = np.empty((n, 4))
    if coupled:
        coupling = params.coupling_model()
        r0, r1, r2 = coupling.ratio
        lo, hi = coupled_flexion_range(params, coupling)
        for i in range(n):
            qs[i, 0] = gen.uniform(limits[0][0], limits[0][1])
            q1 = gen.uniform(lo, hi)
            qs[i, 1] = q1
            qs[i, 2] = q1 * r1 / r0
            qs[i, 3] = q1 * r2 / r0
    else:
        for i in range(n):
            for j in range(4):
                qs[i, j] = gen.uniform(limits[j][0], limits[j][1])
    points = batch_fingertips(qs, params)
    return WorkspaceCloud(
        points=points, seed=seed, coupled=coupled, joint_limits=limits
    )


def project_workspace(cloud: WorkspaceCloud, plane: str) -> np.ndarray:
    """Orthogonal projection of the cloud onto a coordinate plane, (n, 2)."""
    key = plane.lower()
    if key not in _PLANES:
        raise ValidationError(f"plane must be one of xoy/xoz/yoz, got {plane!r}")
    if cloud.count == 0:
        raise PreconditionError("cannot project an empty workspace cloud")
    i, j = _PLANES[key]
    return cloud.points[:, (i, j)]


def points_to_csv(points: np.ndarray, header: tuple) -> str:
    """CSV text with 9 significant digits, stable across platforms."""
    lines = [",".join(header)]
    for row in np.asarray(points):
        lines.append(",".join(f"{v:.9g}" for v in row))
    return "\n".join(lines) + "\n"
