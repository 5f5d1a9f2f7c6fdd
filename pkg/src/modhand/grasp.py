"""Quasi-static adaptive enveloping against rigid objects.

Equilibrium model: the flexion joints settle where the elastic energy of the
transmission (one serial element, three parallel elements) is minimal subject
to non-penetration against the object and the joint limits.  The energy is a
convex quadratic in the joint angles, so each step is a small quadratic
program solved exactly by active-set enumeration; contact constraints are
re-detected and re-linearized around the current iterate until the fixed
point satisfies the stationarity and complementarity tolerances on the true
(curved) gap functions.

The drive coordinate ``a`` is the serial coordinate of the flexion chain
(what the flexion mode of the knuckle differential delivers); the lateral
swing angle is held fixed during a sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .errors import (
    InfeasibleStartError,
    ModhandError,
    NonConvergedError,
    PreconditionError,
    SweepError,
    ValidationError,
)
from .kinematics import FingerPoseChain, coupled_flexion_range, forward_kinematics
from .params import FingerParams, JointState
from .ucm import TransmissionState, stiffness_matrices, transmission_state

ACTIVATION_THRESHOLD = 0.5   # mm, gap below which a contact becomes a candidate
PENETRATION_TOL = 1e-6       # mm, deepest acceptable penetration at a solution
COMPLEMENTARITY_TOL = 1e-6   # N*mm, |force * gap| bound per contact
RECOVERY_TOL = 0.1           # mm, initial penetration the solver will push out
KKT_REL_TOL = 1e-8
MAX_OUTER = 20


@dataclass(frozen=True)
class RigidObject:
    """Rigid obstacle: a sphere or a half-space.

    Half-spaces occupy the side opposite their outward normal; the normal
    must be nonzero and is stored normalized.
    """

    shape: str
    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 0.0
    point: tuple = (0.0, 0.0, 0.0)
    normal: tuple = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.shape not in ("sphere", "half_space"):
            raise ValidationError(f"unknown object shape {self.shape!r}")
        if self.shape == "sphere":
            if not (math.isfinite(self.radius) and self.radius > 0):
                raise ValidationError("sphere radius must be strictly positive")
            object.__setattr__(
                self, "center", tuple(float(c) for c in self.center)
            )
        else:
            n = np.asarray(self.normal, dtype=float)
            norm = np.linalg.norm(n)
            if not norm > 0:
                raise ValidationError("half-space normal must be nonzero")
            object.__setattr__(self, "normal", tuple(n / norm))
            object.__setattr__(self, "point", tuple(float(c) for c in self.point))

    @classmethod
    def sphere(cls, center, radius: float) -> "RigidObject":
        return cls(shape="sphere", center=tuple(center), radius=float(radius))

    @classmethod
    def half_space(cls, point, outward_normal) -> "RigidObject":
        return cls(
            shape="half_space", point=tuple(point), normal=tuple(outward_normal)
        )


@dataclass(frozen=True)
class Contact:
    """One phalanx/object contact candidate.

    ``normal`` is the unit direction from the object surface toward the
    phalanx axis, i.e. the direction the contact force pushes the phalanx.
    ``gap`` is the signed surface separation (negative = penetration).
    """

    phalanx: int
    point: tuple
    normal: tuple
    gap: float
    force: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))
        object.__setattr__(self, "normal", tuple(float(x) for x in self.normal))


def _segment_closest_param(p0, p1, target) -> float:
    d = p1 - p0
    denom = float(np.dot(d, d))
    if denom < 1e-18:
        return 0.0
    t = float(np.dot(target - p0, d)) / denom
    return min(1.0, max(0.0, t))


def _phalanx_gap(p0, p1, cap_radius, obj: RigidObject):
    """Signed gap, separation direction, axis point, and contact point for
    one capsule segment against the object.

    A sphere center landing exactly on the capsule axis leaves the
    separation direction undefined; a deterministic perpendicular fallback
    keeps deep penetrations detectable."""
    if obj.shape == "sphere":
        center = np.asarray(obj.center)
        t = _segment_closest_param(p0, p1, center)
        axis_point = p0 + t * (p1 - p0)
        diff = axis_point - center
        dist = float(np.linalg.norm(diff))
        if dist < 1e-12:
            seg = p1 - p0
            ref = np.zeros(3)
            ref[int(np.argmin(np.abs(seg)))] = 1.0
            n = np.cross(seg, ref)
            n = n / np.linalg.norm(n)
            gap = -cap_radius - obj.radius
        else:
            n = diff / dist
            gap = dist - cap_radius - obj.radius
    else:
        n = np.asarray(obj.normal)
        plane_point = np.asarray(obj.point)
        g0 = float(np.dot(n, p0 - plane_point))
        g1 = float(np.dot(n, p1 - plane_point))
        if abs(g0 - g1) <= 1e-12:
            t = 0.5
        else:
            t = 0.0 if g0 < g1 else 1.0
        axis_point = p0 + t * (p1 - p0)
        gap = min(g0, g1) - cap_radius
    contact_point = axis_point - cap_radius * n
    return gap, n, axis_point, contact_point


def detect_contacts(
    chain: FingerPoseChain,
    params: FingerParams,
    obj: RigidObject,
    threshold: float = ACTIVATION_THRESHOLD,
):
    """Per-phalanx closest-point candidates with gap at most ``threshold``,
    sorted proximal to distal."""
    out = []
    for idx, (p0, p1) in enumerate(chain.segments(), start=1):
        gap, n, _, contact_point = _phalanx_gap(
            p0, p1, params.link_radii[idx - 1], obj
        )
        if gap <= threshold:
            out.append(
                Contact(
                    phalanx=idx, point=contact_point, normal=n, gap=gap, force=0.0
                )
            )
    return out


# --------------------------------------------------------------------------
# Elastic energy
# --------------------------------------------------------------------------

def elastic_energy(q_fe, a: float, params: FingerParams) -> float:
    """Total stored elastic energy at flexion q_fe and drive a."""
    state = transmission_state(q_fe, a, params)
    kp = params.spring_parallel
    return 0.5 * params.spring_serial * state.serial**2 + 0.5 * sum(
        k * t**2 for k, t in zip(kp, state.parallel)
    )


def elastic_energy_gradient(q_fe, a: float, params: FingerParams) -> np.ndarray:
    """Analytic gradient of elastic_energy with respect to the flexion angles."""
    stiff = stiffness_matrices(params)
    return stiff.joint @ np.asarray(q_fe, dtype=float) + stiff.joint_drive * float(a)


# --------------------------------------------------------------------------
# Exact QP by active-set enumeration
# --------------------------------------------------------------------------

def _solve_qp(H, c, G, h, warm=None, feas_tol=1e-9, mult_tol=1e-9):
    """Minimize 1/2 x'Hx + c'x subject to Gx >= h, H positive definite.

    Exhaustive KKT search over active subsets of at most dim(x) rows, warm
    subset tried first.  Returns (x, multipliers, active_tuple) or None when
    no subset yields a feasible KKT point (constraint system infeasible).
    """
    n = H.shape[0]
    m = G.shape[0]

    def attempt(subset):
        k = len(subset)
        if k == 0:
            x = np.linalg.solve(H, -c)
            lam = np.zeros(0)
        else:
            Gs = G[list(subset)]
            kkt = np.zeros((n + k, n + k))
            kkt[:n, :n] = H
            kkt[:n, n:] = -Gs.T
            kkt[n:, :n] = Gs
            rhs = np.concatenate([-c, h[list(subset)]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                return None
            if not np.all(np.isfinite(sol)):
                return None
            x, lam = sol[:n], sol[n:]
            if np.any(lam < -mult_tol):
                return None
        if m and np.any(G @ x < h - feas_tol):
            return None
        full = np.zeros(m)
        for j, idx in enumerate(subset):
            full[idx] = max(lam[j], 0.0)
        return x, full, tuple(subset)

    if warm is not None and all(0 <= i < m for i in warm) and len(warm) <= n:
        res = attempt(tuple(sorted(warm)))
        if res is not None:
            return res
    for size in range(0, n + 1):
        for subset in combinations(range(m), size):
            res = attempt(subset)
            if res is not None:
                return res
    return None


# --------------------------------------------------------------------------
# Equilibrium
# --------------------------------------------------------------------------

def _contact_rows(chain: FingerPoseChain, params: FingerParams, obj: RigidObject,
                  threshold: float):
    """Candidate contacts plus the gradient row of each gap with respect to
    the flexion angles (joints distal to the contact have zero influence)."""
    axis = chain.frames[0][:3, 2]
    joints = chain.joint_positions()[:3]
    rows = []
    contacts = detect_contacts(chain, params, obj, threshold)
    for c in contacts:
        hit = _phalanx_gap(
            *chain.segments()[c.phalanx - 1], params.link_radii[c.phalanx - 1], obj
        )
        _, n, axis_point, _ = hit
        grad = np.zeros(3)
        for k in range(c.phalanx):
            grad[k] = float(np.dot(n, np.cross(axis, axis_point - joints[k])))
        rows.append((c, grad))
    return rows


def _min_gap(chain, params, obj) -> float:
    return min(
        _phalanx_gap(p0, p1, params.link_radii[idx - 1], obj)[0]
        for idx, (p0, p1) in enumerate(chain.segments(), start=1)
    )


def equilibrium_solve(
    a: float,
    q_init: JointState,
    params: FingerParams,
    obj: RigidObject | None = None,
    *,
    activation: float = ACTIVATION_THRESHOLD,
    max_outer: int = MAX_OUTER,
    recovery_tol: float = RECOVERY_TOL,
    _warm_active=None,
):
    """Flexion equilibrium at drive ``a`` from ``q_init``.

    Returns (JointState, TransmissionState, contacts); contact forces are the
    constraint multipliers of the final quadratic program.  The swing angle
    is carried through unchanged.
    """
    try:
        state, trans, contacts, _, _ = _equilibrium_full(
            a,
            q_init,
            params,
            obj,
            activation=activation,
            max_outer=max_outer,
            recovery_tol=recovery_tol,
            warm_active=_warm_active,
        )
    except NonConvergedError as exc:
        best = exc.best[:3] if exc.best is not None else None
        raise NonConvergedError(str(exc), best=best) from None
    return state, trans, contacts


def _equilibrium_full(
    a: float,
    q_init: JointState,
    params: FingerParams,
    obj: RigidObject | None,
    *,
    activation: float = ACTIVATION_THRESHOLD,
    max_outer: int = MAX_OUTER,
    recovery_tol: float = RECOVERY_TOL,
    warm_active=None,
):
    """equilibrium_solve plus the joint-limit multipliers (6-vector, lower
    rows then upper rows) and the final active set for warm starting."""
    if not q_init.within_limits(params):
        raise PreconditionError("q_init violates the joint limits")
    lo = np.array([pair[0] for pair in params.joint_limits[1:]])
    hi = np.array([pair[1] for pair in params.joint_limits[1:]])
    x = np.clip(q_init.flexion(), lo, hi)
    q_aa = q_init.q_aa

    if obj is not None:
        chain0 = forward_kinematics(replace(q_init, q1=x[0], q2=x[1], q3=x[2]), params)
        if _min_gap(chain0, params, obj) < -recovery_tol:
            raise InfeasibleStartError(
                "initial configuration penetrates the object beyond the recovery tolerance"
            )

    stiff = stiffness_matrices(params)
    H = np.asarray(stiff.joint)
    c = np.asarray(stiff.joint_drive) * float(a)

    def box_rows():
        G = np.vstack([np.eye(3), -np.eye(3)])
        h = np.concatenate([lo, -hi])
        return G, h

    warm = warm_active
    best = None
    # Trust region on the outer relinearization steps: large jumps make the
    # frozen contact gradients stale and the iteration can two-cycle; the
    # radius shrinks whenever the step direction reverses.
    trust = 0.15
    prev_step = None
    prev_active = None
    for _ in range(max_outer):
        state = JointState(q_aa=q_aa, q1=x[0], q2=x[1], q3=x[2])
        chain = forward_kinematics(state, params)
        G, h = box_rows()
        rows = _contact_rows(chain, params, obj, activation) if obj else []
        if rows:
            Gc = np.vstack([grad for _, grad in rows])
            hc = np.array([grad @ x - contact.gap for contact, grad in rows])
            G = np.vstack([G, Gc])
            h = np.concatenate([h, hc])

        sol = _solve_qp(H, c, G, h, warm=warm)
        if sol is None:
            raise NonConvergedError(
                "constraint system admits no feasible equilibrium", best=best
            )
        x_new, _, warm = sol
        step = x_new - x
        step_norm = float(np.linalg.norm(step))
        if rows and step_norm > 1e-12:
            if prev_step is not None and float(np.dot(step, prev_step)) < 0.0:
                trust = max(trust * 0.5, 1e-6)
            if step_norm > trust:
                x_new = x + step * (trust / step_norm)
            prev_step = x_new - x

        result = _certify_kkt(x_new, a, q_aa, H, c, lo, hi, params, obj, activation)
        if result is not None:
            return result[:4] + (warm,)

        # The frozen-gradient fixed point can be mildly repelling under high
        # contact curvature; once the active set repeats and steps are small,
        # root-find the true stationarity-plus-contact system directly.
        if (
            rows
            and warm == prev_active
            and step_norm < 1e-2
        ):
            x_polished = _newton_polish(
                x_new, a, q_aa, H, c, lo, hi, params, obj, warm, activation
            )
            if x_polished is not None:
                result = _certify_kkt(
                    x_polished, a, q_aa, H, c, lo, hi, params, obj, activation
                )
                if result is not None:
                    return result[:4] + (warm,)
        prev_active = warm
        best = _plain_result(x_new, a, q_aa, params, obj, activation)
        x = x_new

    raise NonConvergedError("equilibrium iteration cap reached", best=best)


def _newton_polish(x0, a, q_aa, H, c, lo, hi, params, obj, active, activation):
    """Damped Newton on the active-set KKT system with true curved gaps.

    Unknowns are the flexion angles and one multiplier per active row; the
    residual stacks stationarity and the active constraint values.  The
    Jacobian is taken by forward differences.  Returns the polished angles or
    None when the iteration leaves the active set's basin.
    """
    box_idx = [i for i in active if i < 6]
    contact_idx = [i - 6 for i in active if i >= 6]

    def residual(x, f):
        state = JointState(q_aa=q_aa, q1=x[0], q2=x[1], q3=x[2])
        chain = forward_kinematics(state, params)
        rows = _contact_rows(chain, params, obj, activation)
        if max(contact_idx, default=-1) >= len(rows):
            return None
        r_stat = H @ x + c
        cons = []
        for k, i in enumerate(box_idx):
            if i < 3:
                r_stat[i] -= f[k]
                cons.append(x[i] - lo[i])
            else:
                r_stat[i - 3] += f[k]
                cons.append(hi[i - 3] - x[i - 3])
        for k, j in enumerate(contact_idx):
            contact, g_row = rows[j]
            r_stat -= f[len(box_idx) + k] * g_row
            cons.append(contact.gap)
        return np.concatenate([r_stat, cons])

    m = len(box_idx) + len(contact_idx)
    z = np.concatenate([x0, np.zeros(m)])
    n = 3 + m
    for _ in range(15):
        r = residual(z[:3], z[3:])
        if r is None:
            return None
        if np.linalg.norm(r[3:]) < 1e-12 and np.linalg.norm(r[:3]) < 1e-9 * (
            1.0 + np.linalg.norm(H @ z[:3] + c)
        ):
            break
        jac = np.zeros((n, n))
        for col in range(n):
            hstep = 1e-7 * (1.0 + abs(z[col]))
            zp = z.copy()
            zp[col] += hstep
            rp = residual(zp[:3], zp[3:])
            if rp is None:
                return None
            jac[:, col] = (rp - r) / hstep
        try:
            dz = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            return None
        limit = 0.05
        norm = np.linalg.norm(dz[:3])
        if norm > limit:
            dz = dz * (limit / norm)
        z = z + dz
        if not np.all(np.isfinite(z)):
            return None
    if np.any(z[3:] < -1e-9):
        return None
    x = np.clip(z[:3], lo, hi)
    return x


def _plain_result(x, a, q_aa, params, obj, activation):
    """Result tuple for a non-certified iterate (reported forces zero)."""
    state = JointState(q_aa=q_aa, q1=x[0], q2=x[1], q3=x[2])
    chain = forward_kinematics(state, params)
    contacts = detect_contacts(chain, params, obj, activation) if obj else []
    return state, transmission_state(x, a, params), contacts, np.zeros(6), None


def _certify_kkt(x, a, q_aa, H, c, lo, hi, params, obj, activation):
    """Check the stationarity/complementarity/feasibility conditions of the
    true (curved-gap) problem at ``x``, with multipliers solved fresh by
    nonnegative least squares against the current contact geometry.

    Returns the full result tuple when the point certifies, else None.  The
    comparison carries a floor term because evaluating H @ x + c in doubles
    has rounding of order eps * |H| * |x|, which dominates when the gradient
    itself vanishes and the stiffnesses are very large.
    """
    state = JointState(q_aa=q_aa, q1=x[0], q2=x[1], q3=x[2])
    chain = forward_kinematics(state, params)
    contacts = detect_contacts(chain, params, obj, activation) if obj else []
    if obj is not None and _min_gap(chain, params, obj) < -PENETRATION_TOL:
        return None

    rows = _contact_rows(chain, params, obj, activation) if obj else []
    grad = H @ x + c

    # Active rows: joint limits the iterate rests on, plus contacts whose
    # surfaces actually touch.  Candidates with a visible gap may not carry
    # force (complementarity), so they stay out of the multiplier fit.
    act_rows = []
    kinds = []  # ("lo", j) | ("hi", j) | ("contact", index into rows)
    bound_tol = 1e-9
    touch_tol = 1e-7
    for j in range(3):
        if x[j] - lo[j] <= bound_tol:
            e = np.zeros(3)
            e[j] = 1.0
            act_rows.append(e)
            kinds.append(("lo", j))
        elif hi[j] - x[j] <= bound_tol:
            e = np.zeros(3)
            e[j] = -1.0
            act_rows.append(e)
            kinds.append(("hi", j))
    for idx, (contact, g_row) in enumerate(rows):
        if contact.gap <= touch_tol:
            act_rows.append(g_row)
            kinds.append(("contact", idx))

    if act_rows:
        A = np.vstack(act_rows)
        sol = _solve_qp(
            A @ A.T + 1e-14 * np.eye(len(act_rows)) * max(1.0, float(np.max(A @ A.T))),
            -(A @ grad),
            np.eye(len(act_rows)),
            np.zeros(len(act_rows)),
        )
        if sol is None:
            return None
        f = sol[0]
        residual = grad - A.T @ f
    else:
        f = np.zeros(0)
        residual = grad

    noise_floor = 64.0 * np.finfo(float).eps * (
        np.linalg.norm(H, ord="fro") * np.linalg.norm(x) + np.linalg.norm(c)
    )
    if np.linalg.norm(residual) > KKT_REL_TOL * (1.0 + np.linalg.norm(grad)) + noise_floor:
        return None

    box_mult = np.zeros(6)
    forces = {}
    for value, kind in zip(f, kinds):
        tag, j = kind
        if tag == "lo":
            box_mult[j] = value
        elif tag == "hi":
            box_mult[3 + j] = value
        else:
            forces[rows[j][0].phalanx] = float(value)

    out_contacts = []
    for contact, _ in rows:
        force = forces.get(contact.phalanx, 0.0)
        if abs(force * contact.gap) > COMPLEMENTARITY_TOL:
            return None
        out_contacts.append(replace(contact, force=force))
    return (
        state,
        transmission_state(x, a, params),
        out_contacts,
        box_mult,
        None,
    )


# --------------------------------------------------------------------------
# Drive sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    a: float
    joints: JointState
    transmission: TransmissionState
    contacts: tuple
    energy: float
    object_present: bool

    def __post_init__(self):
        object.__setattr__(self, "contacts", tuple(self.contacts))


@dataclass(frozen=True)
class EquilibriumTrace:
    steps: tuple
    status: str  # completed | ejected | limit-saturated | non-converged

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def final(self) -> TraceStep:
        return self.steps[-1]


def envelop_sweep(
    a_schedule,
    params: FingerParams,
    obj: RigidObject,
    q_init: JointState | None = None,
    remove_object_at: int | None = None,
) -> EquilibriumTrace:
    """Warm-started equilibrium along a nondecreasing drive schedule.

    ``remove_object_at`` drops the object from that step index onward, which
    models releasing the grasped object mid-sweep.  Termination:

    * ``completed``: every step converged
    * ``ejected``: the contact count fell from >= 2 to 0 with the object
      still present and the drive still advancing (the finger swept past)
    * ``limit-saturated``: the drive is pressing every flexion joint into a
      travel stop
    * ``non-converged``: the solver gave up; the partial trace is kept
    """
    schedule = [float(v) for v in a_schedule]
    if len(schedule) == 0:
        raise ValidationError("drive schedule must not be empty")
    if any(b < a for a, b in zip(schedule, schedule[1:])):
        raise ValidationError("drive schedule must be nondecreasing")

    q = q_init if q_init is not None else JointState()
    steps = []
    prev_count = 0
    warm = None
    for i, a in enumerate(schedule):
        present = remove_object_at is None or i < remove_object_at
        scene = obj if present else None
        try:
            q_new, trans, contacts, box_mult, warm = _equilibrium_full(
                a, q, params, scene, warm_active=warm
            )
        except NonConvergedError:
            return EquilibriumTrace(steps=tuple(steps), status="non-converged")
        except ModhandError as exc:
            raise SweepError(i, exc) from exc

        energy = elastic_energy(q_new.flexion(), a, params)
        steps.append(
            TraceStep(
                a=a,
                joints=q_new,
                transmission=trans,
                contacts=tuple(contacts),
                energy=energy,
                object_present=present,
            )
        )
        if present and prev_count >= 2 and len(contacts) == 0 and i > 0:
            return EquilibriumTrace(steps=tuple(steps), status="ejected")
        # Saturated only when the drive is actively pressing every joint
        # into a travel stop (limit multipliers engaged), not merely resting
        # on one, and no contact is carrying the load instead.
        saturated = all(
            box_mult[j] > 1e-9 or box_mult[3 + j] > 1e-9 for j in range(3)
        )
        if saturated:
            return EquilibriumTrace(steps=tuple(steps), status="limit-saturated")
        prev_count = len(contacts)
        q = q_new
    return EquilibriumTrace(steps=tuple(steps), status="completed")


def fingertip_force(
    a: float,
    params: FingerParams,
    obj: RigidObject,
    q_init: JointState | None = None,
) -> float:
    """Normal force at a single distal-phalanx contact, from the equilibrium
    multiplier.  Raises PreconditionError unless the distal phalanx is the
    only contact touching or pressing the object."""
    q_init = q_init if q_init is not None else JointState()
    _, _, contacts = equilibrium_solve(a, q_init, params, obj)
    touching = [c for c in contacts if c.force > 1e-9 or abs(c.gap) <= 1e-6]
    if len(touching) != 1 or touching[0].phalanx != 3:
        raise PreconditionError(
            "fingertip force requires a single distal-phalanx contact"
        )
    return touching[0].force


# --------------------------------------------------------------------------
# Scene construction
# --------------------------------------------------------------------------

def inscribed_sphere(params: FingerParams, q1: float):
    """Sphere tangent to all three phalanx surfaces at a coupled-line posture.

    With the distal joints on the coupled line at MCP angle ``q1``, the three
    phalanx axes are lines in the flexion plane; the sphere center and radius
    solve the linear system placing the center at capsule-radius-plus-R from
    each axis on the palmar side.  Returns (center, radius) with the center in
    the flexion plane (z = 0).
    """
    ratio = params.coupling_model().ratio
    q2 = q1 * ratio[1] / ratio[0]
    q3 = q1 * ratio[2] / ratio[0]
    cums = (q1, q1 + q2, q1 + q2 + q3)
    pts = [np.zeros(2)]
    for L, cum in zip(params.link_lengths, cums):
        pts.append(pts[-1] + L * np.array([math.cos(cum), math.sin(cum)]))
    rows = []
    rhs = []
    for i, cum in enumerate(cums):
        inward = np.array([-math.sin(cum), math.cos(cum)])
        rows.append([inward[0], inward[1], -1.0])
        rhs.append(float(inward @ pts[i]) + params.link_radii[i])
    sol = np.linalg.solve(np.asarray(rows), np.asarray(rhs))
    cx, cy, radius = sol
    if radius <= 0:
        raise ValidationError("posture admits no inscribed sphere")
    return (float(cx), float(cy), 0.0), float(radius)


def enveloping_pose_for_radius(
    params: FingerParams, radius: float, tol: float = 1e-10
):
    """MCP angle on the coupled line whose inscribed sphere has the given
    radius, plus that sphere's center.  Bisection over the coupled flexion
    range; raises ValidationError when the radius is out of reach."""
    lo, hi = coupled_flexion_range(params)
    lo = max(lo, 1e-3)

    def r_of(q1):
        return inscribed_sphere(params, q1)[1]

    r_lo, r_hi = r_of(lo), r_of(hi)
    if not (min(r_lo, r_hi) <= radius <= max(r_lo, r_hi)):
        raise ValidationError(
            f"no coupled posture has an inscribed sphere of radius {radius} mm"
        )
    decreasing = r_lo > r_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (r_of(mid) > radius) == decreasing:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    q1 = 0.5 * (lo + hi)
    center, _ = inscribed_sphere(params, q1)
    return q1, center
