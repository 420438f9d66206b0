"""Driven two-level dynamics in the frame that follows the mixing angle.

Rotating the diabatic basis by half the mixing angle (U = exp(-i alpha
sigma_y / 2)) diagonalizes the electronic matrix to Delta sigma_z.  For a
prescribed classical nuclear trajectory (r(t), theta(t)) the residual
coupling is the frame rotation rate, so the spin sees an effective magnetic
field

    B_eff = -(d alpha/d theta) thetadot e_y + 2 Delta e_z,

together with a radial effective electric component (d alpha/d theta)/(2 r).
The integrator advances the state with exact 2x2 exponentials of the
piecewise-constant step Hamiltonian, evaluated at step midpoints, either in
the lab frame (electronic matrix along the trajectory) or in the co-moving
frame (Delta sigma_z - (1/2) (d alpha/d theta) thetadot sigma_y).  The two
routes agree up to a global phase once the steps resolve the larger of the
gap frequency and the drive rate.

The scalar trap energy r^2/2 is a global phase for the two-level problem and
is dropped throughout; dynamical phases returned here are those of the
electronic part -+Delta alone.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .berryphase import canonicalize_phase
from .eigenpath import DiscretizedPath
from .errors import (
    AlphaUndefined,
    LoopThroughDegeneracy,
    OpenPath,
    StepTooLarge,
    TrajectoryThroughDegeneracy,
)
from .jahnteller import JTParams

# Gap magnitude treated as touching the degeneracy set.
DEGENERACY_TOL = 1e-12

# A step must keep dt * max(2 Delta, |dalpha/dtheta * thetadot|) below this.
STEP_RESOLUTION_LIMIT = 0.1

# Per-step winding increments above this are considered unresolved.
WINDING_STEP_LIMIT = 0.5 * math.pi


def _field_values(p: JTParams, r, theta):
    """Coupling field f and its log-derivative data, vectorized.

    Returns (f, delta, dalpha) with delta = |f| and dalpha = d arg f /
    d theta = Re[(k r e^{i theta} - g r^2 e^{-2 i theta}) / f].
    """
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    e_plus = np.exp(1j * theta)
    e_minus2 = np.exp(-2j * theta)
    f = p.k * r * e_plus + 0.5 * p.g * r * r * e_minus2
    delta = np.abs(f)
    with np.errstate(divide="ignore", invalid="ignore"):
        dalpha = np.real((p.k * r * e_plus - p.g * r * r * e_minus2) / f)
    return f, delta, dalpha


def comoving_transform(p: JTParams, r: float, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Half-angle rotation U and the rotated electronic matrix U^T H U.

    The rotated matrix is Delta sigma_z with off-diagonal entries at the
    1e-12 level; both are returned so callers can check the residual.
    """
    f, delta, _ = _field_values(p, r, theta)
    if delta <= DEGENERACY_TOL:
        raise AlphaUndefined(r, theta)
    alpha = math.atan2(f.imag, f.real)
    c, s = math.cos(0.5 * alpha), math.sin(0.5 * alpha)
    u = np.array([[c, -s], [s, c]])
    h_el = np.array([[f.real, f.imag], [f.imag, -f.real]])
    h_rot = u.T @ h_el @ u
    if abs(h_rot[0, 1]) > 1e-12 * max(1.0, float(delta)):
        raise RuntimeError(
            f"rotated matrix off-diagonal {h_rot[0, 1]:.3e} not negligible"
        )
    return u, h_rot


@dataclass(frozen=True)
class ACConfig:
    """Single prefactor of the loop phase.

    The physical coupling (moment, line-charge density, vacuum constants)
    enters the phase only as one multiplicative scale, which is 1 in the
    natural units used everywhere else in this package.
    """

    coupling_scale: float = 1.0

    def __post_init__(self):
        if not self.coupling_scale > 0:
            raise ValueError(
                f"coupling_scale must be > 0, got {self.coupling_scale!r}"
            )


@dataclass(frozen=True)
class EffectiveFields:
    """Effective magnetic vector and electric components seen by the spin.

    e_theta is the azimuthal electric component, which this model does not
    evaluate; it is always None and kept only so the omission is explicit.
    """

    b_eff: tuple[float, float, float]
    e_radial: float
    e_theta: None = None


def effective_fields(p: JTParams, r: float, theta: float,
                     theta_dot: float) -> EffectiveFields:
    """B_eff = (0, -dalpha thetadot, 2 Delta) and E_radial = dalpha / (2 r)."""
    if r <= 0:
        raise ValueError(f"radius must be > 0, got {r!r}")
    _, delta, dalpha = _field_values(p, r, theta)
    if delta <= DEGENERACY_TOL:
        raise AlphaUndefined(r, theta)
    b = (0.0, -float(dalpha) * theta_dot, 2.0 * float(delta))
    return EffectiveFields(b_eff=b, e_radial=float(dalpha) / (2.0 * r))


@dataclass(eq=False)
class NuclearTrajectory:
    """Sampled classical path (r(t), theta(t)) with strictly increasing times."""

    times: np.ndarray
    r_of_t: np.ndarray
    theta_of_t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        r = np.asarray(self.r_of_t, dtype=float)
        th = np.asarray(self.theta_of_t, dtype=float)
        if not (t.shape == r.shape == th.shape) or t.ndim != 1 or len(t) < 3:
            raise ValueError("times, r_of_t, theta_of_t must share one shape, >= 3 samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(r)) and np.all(np.isfinite(th))):
            raise ValueError("trajectory samples must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(r <= 0):
            raise ValueError("trajectory radii must be > 0")
        self.times, self.r_of_t, self.theta_of_t = t, r, th

    def theta_dot(self) -> np.ndarray:
        """Angular velocity at the samples by central differences."""
        return np.gradient(self.theta_of_t, self.times)


def pseudorotation_trajectory(r: float, period: float, n_steps: int,
                              theta0: float = 0.0,
                              revolutions: float = 1.0) -> NuclearTrajectory:
    """Uniform circular drive at fixed radius."""
    t = np.linspace(0.0, period * revolutions, n_steps + 1)
    theta = theta0 + 2.0 * math.pi * revolutions * np.linspace(0.0, 1.0, n_steps + 1)
    return NuclearTrajectory(times=t, r_of_t=np.full(n_steps + 1, float(r)),
                             theta_of_t=theta)


def adiabaticity_ratio(p: JTParams, traj: NuclearTrajectory) -> float:
    """max over samples of |dalpha/dtheta| |thetadot| / Delta (small = adiabatic)."""
    _, delta, dalpha = _field_values(p, traj.r_of_t, traj.theta_of_t)
    if np.any(delta <= DEGENERACY_TOL):
        j = int(np.argmax(delta <= DEGENERACY_TOL))
        raise TrajectoryThroughDegeneracy(j, float(traj.r_of_t[j]),
                                          float(traj.theta_of_t[j]))
    return float(np.max(np.abs(dalpha) * np.abs(traj.theta_dot()) / delta))


@dataclass(eq=False)
class SpinEvolution:
    """Recorded spin states along a trajectory, in the requested frame."""

    times: np.ndarray
    states: np.ndarray
    frame: str
    alphas: np.ndarray

    def _pair(self) -> np.ndarray:
        return np.conj(self.states[:, 0]) * self.states[:, 1]

    @property
    def sigma_x(self) -> np.ndarray:
        return 2.0 * np.real(self._pair())

    @property
    def sigma_y(self) -> np.ndarray:
        return 2.0 * np.imag(self._pair())

    @property
    def sigma_z(self) -> np.ndarray:
        return (np.abs(self.states[:, 0]) ** 2
                - np.abs(self.states[:, 1]) ** 2)

    @property
    def sigma_y_variance(self) -> np.ndarray:
        """<sigma_y^2> - <sigma_y>^2 = 1 - <sigma_y>^2 for a pure state."""
        return 1.0 - self.sigma_y ** 2

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


def _pairwise_product(a, b, c, d):
    """One tree-reduction pass: multiply adjacent 2x2 blocks (later @ earlier)."""
    a0, b0, c0, d0 = a[0::2], b[0::2], c[0::2], d[0::2]
    a1, b1, c1, d1 = a[1::2], b[1::2], c[1::2], d[1::2]
    return (a1 * a0 + b1 * c0, a1 * b0 + b1 * d0,
            c1 * a0 + d1 * c0, c1 * b0 + d1 * d0)


def _reduce_blocks(a, b, c, d, block: int):
    """Collapse step unitaries into per-block transfer matrices.

    The step count must be a multiple of `block`, which must be a power of
    two; the reduction keeps time order exactly and only reassociates the
    product, which is harmless algebraically and deterministic numerically.
    """
    n = len(a)
    shape = (n // block, block)
    a, b, c, d = (x.reshape(shape) for x in (a, b, c, d))
    while a.shape[1] > 1:
        a, b, c, d = _pairwise_product(a.T, b.T, c.T, d.T)
        a, b, c, d = a.T, b.T, c.T, d.T
    return a[:, 0], b[:, 0], c[:, 0], d[:, 0]


def integrate_spin(p: JTParams, traj: NuclearTrajectory, psi0: np.ndarray,
                   frame: str = "comoving",
                   store_stride: int = 1) -> SpinEvolution:
    """Propagate a spin state along the trajectory with exact step unitaries.

    Step Hamiltonians are evaluated at step midpoints.  frame="lab" uses the
    electronic matrix itself; frame="comoving" uses Delta sigma_z -
    (1/2) dalpha thetadot sigma_y and expects psi0 in the rotated basis.
    States are recorded every `store_stride` steps (power of two), plus the
    final state; recorded states are renormalized.  The returned `alphas`
    are the unwrapped mixing angles at the recorded times, which is what a
    frame conversion needs after the angle has wound around.
    """
    if frame not in ("lab", "comoving"):
        raise ValueError(f"frame must be 'lab' or 'comoving', got {frame!r}")
    if store_stride < 1 or store_stride & (store_stride - 1):
        raise ValueError(f"store_stride must be a power of two, got {store_stride}")
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (2,):
        raise ValueError(f"psi0 must have shape (2,), got {psi.shape}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"psi0 must be normalized, |norm - 1| = {abs(norm - 1.0):.3e}")

    t = traj.times
    dt = np.diff(t)
    n_steps = len(dt)

    # degeneracy check at the samples themselves
    _, delta_s, _ = _field_values(p, traj.r_of_t, traj.theta_of_t)
    if np.any(delta_s <= DEGENERACY_TOL):
        j = int(np.argmax(delta_s <= DEGENERACY_TOL))
        raise TrajectoryThroughDegeneracy(j, float(traj.r_of_t[j]),
                                          float(traj.theta_of_t[j]))

    r_mid = 0.5 * (traj.r_of_t[:-1] + traj.r_of_t[1:])
    th_mid = 0.5 * (traj.theta_of_t[:-1] + traj.theta_of_t[1:])
    th_dot = np.diff(traj.theta_of_t) / dt
    f_mid, delta, dalpha = _field_values(p, r_mid, th_mid)
    if np.any(delta <= DEGENERACY_TOL):
        j = int(np.argmax(delta <= DEGENERACY_TOL))
        raise TrajectoryThroughDegeneracy(j, float(r_mid[j]), float(th_mid[j]))

    drive = dalpha * th_dot
    resolution = dt * np.maximum(2.0 * delta, np.abs(drive))
    if np.any(resolution >= STEP_RESOLUTION_LIMIT):
        j = int(np.argmax(resolution >= STEP_RESOLUTION_LIMIT))
        raise StepTooLarge(j, float(resolution[j]), STEP_RESOLUTION_LIMIT)

    if frame == "lab":
        hx, hy, hz = np.imag(f_mid), np.zeros(n_steps), np.real(f_mid)
    else:
        hx, hy, hz = np.zeros(n_steps), -0.5 * drive, delta
    omega = np.sqrt(hx * hx + hy * hy + hz * hz)
    phase = omega * dt
    cos_p = np.cos(phase)
    sinc = np.sin(phase) / omega
    # U = cos(w dt) - i sin(w dt)/w (hx sx + hy sy + hz sz), componentwise
    ua = cos_p - 1j * sinc * hz
    ub = -sinc * hy - 1j * sinc * hx
    uc = sinc * hy - 1j * sinc * hx
    ud = cos_p + 1j * sinc * hz

    # pad to a whole number of blocks with identity steps
    block = store_stride
    pad = (-n_steps) % block
    if pad:
        one = np.ones(pad, dtype=complex)
        zero = np.zeros(pad, dtype=complex)
        ua, ub = np.concatenate((ua, one)), np.concatenate((ub, zero))
        uc, ud = np.concatenate((uc, zero)), np.concatenate((ud, one))
    ba, bb, bc, bd = _reduce_blocks(ua, ub, uc, ud, block)

    recorded = [psi]
    for k in range(len(ba)):
        psi = np.array([ba[k] * psi[0] + bb[k] * psi[1],
                        bc[k] * psi[0] + bd[k] * psi[1]])
        psi = psi / np.linalg.norm(psi)
        recorded.append(psi)

    idx = np.minimum(np.arange(len(recorded)) * block, n_steps)
    states = np.array(recorded)
    alphas_all = np.unwrap(np.angle(
        _field_values(p, traj.r_of_t, traj.theta_of_t)[0]
    ))
    return SpinEvolution(times=t[idx], states=states, frame=frame,
                         alphas=alphas_all[idx])


def rotation_matrix(alpha: float) -> np.ndarray:
    """exp(-i alpha sigma_y / 2) as a real 2x2 matrix."""
    c, s = math.cos(0.5 * alpha), math.sin(0.5 * alpha)
    return np.array([[c, -s], [s, c]])


def to_lab_frame(evolution: SpinEvolution) -> np.ndarray:
    """Rotate recorded co-moving states into the lab frame.

    Uses the unwrapped mixing angle, so a full drive revolution (alpha up by
    2 pi) correctly contributes the extra overall sign of the half-angle
    rotation.
    """
    if evolution.frame != "comoving":
        raise ValueError("evolution is not in the co-moving frame")
    out = np.empty_like(evolution.states)
    for j, (alpha, psi) in enumerate(zip(evolution.alphas, evolution.states)):
        out[j] = rotation_matrix(alpha) @ psi
    return out


def dynamical_phase(p: JTParams, traj: NuclearTrajectory, band: int = 0) -> float:
    """-(integral of the band's electronic energy) by the midpoint rule.

    Uses the same midpoint samples as integrate_spin, so the difference
    between a propagated total phase and this quantity isolates the
    geometric part without quadrature mismatch.
    """
    if band not in (0, 1):
        raise ValueError(f"band must be 0 or 1, got {band!r}")
    _, delta_s, _ = _field_values(p, traj.r_of_t, traj.theta_of_t)
    if np.any(delta_s <= DEGENERACY_TOL):
        j = int(np.argmax(delta_s <= DEGENERACY_TOL))
        raise TrajectoryThroughDegeneracy(j, float(traj.r_of_t[j]),
                                          float(traj.theta_of_t[j]))
    dt = np.diff(traj.times)
    r_mid = 0.5 * (traj.r_of_t[:-1] + traj.r_of_t[1:])
    th_mid = 0.5 * (traj.theta_of_t[:-1] + traj.theta_of_t[1:])
    _, delta, _ = _field_values(p, r_mid, th_mid)
    if np.any(delta <= DEGENERACY_TOL):
        j = int(np.argmax(delta <= DEGENERACY_TOL))
        raise TrajectoryThroughDegeneracy(j, float(r_mid[j]), float(th_mid[j]))
    energy = -delta if band == 0 else delta
    return float(-np.sum(energy * dt))


def ac_loop_phase(p: JTParams, loop: DiscretizedPath,
                  cfg: ACConfig | None = None) -> float:
    """Half the winding of the mixing angle around a closed loop.

    Equals pi times the signed number of enclosed degeneracies mod 2 pi, and
    hence pi times the node-count parity: the phase an orbiting magnetic
    moment picks up from the effective line charges sitting at the
    degeneracies.  Scaled by cfg.coupling_scale (1 in natural units) and
    canonicalized to (-pi, pi].
    """
    if cfg is None:
        cfg = ACConfig()
    if not loop.closed:
        raise OpenPath("the winding is defined for closed loops only")
    coords = loop.coords_array()
    f, delta, _ = _field_values(p, coords[:, 0], coords[:, 1])
    if np.any(delta <= DEGENERACY_TOL):
        j = int(np.argmax(delta <= DEGENERACY_TOL))
        raise LoopThroughDegeneracy(j, float(coords[j, 0]), float(coords[j, 1]))
    alpha = np.angle(f)
    steps = np.angle(np.exp(1j * np.diff(alpha)))
    worst = int(np.argmax(np.abs(steps)))
    if abs(steps[worst]) >= WINDING_STEP_LIMIT:
        raise StepTooLarge(worst, float(abs(steps[worst])), WINDING_STEP_LIMIT)
    return canonicalize_phase(cfg.coupling_scale * 0.5 * float(np.sum(steps)))
