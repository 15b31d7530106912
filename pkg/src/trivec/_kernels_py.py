"""Pure-numpy implementations of the hot kernels.

These are the reference semantics; ``trivec._kernels`` (Cython) mirrors them
operation for operation. ``trivec.kernels`` selects whichever is available
at import time.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_DIVERGENCE_BOUND = 1.0e6


def actuator_sweep(c1, c2, c3, target, tol):
    """Exhaustive sweep over all per-rotor actuator sample combinations.

    Parameters
    ----------
    c1, c2, c3 : ndarray, shape (n_i, 6)
        Wrench contribution of every sampled actuator input of rotor 1/2/3.
    target : ndarray, shape (6,)
        Wrench the combination must reproduce. Component 4 (pitch torque)
        is the free coordinate being ranged over.
    tol : ndarray, shape (6,)
        Per-component acceptance half-width; component 4 is ignored.

    Returns
    -------
    (accepted, tau_min, tau_max) : (int, float, float)
        Number of accepted combinations and the extremes of their pitch
        torque; ``(0, nan, nan)`` when nothing matches.
    """
    c1 = np.ascontiguousarray(c1, dtype=float)
    c2 = np.ascontiguousarray(c2, dtype=float)
    c3 = np.ascontiguousarray(c3, dtype=float)
    target = np.asarray(target, dtype=float).reshape(6)
    tol = np.asarray(tol, dtype=float).reshape(6)
    lo = target - tol
    hi = target + tol

    pair = (c1[:, None, :] + c2[None, :, :]).reshape(-1, 6)
    accepted = 0
    tau_min = math.inf
    tau_max = -math.inf
    checked = (0, 1, 2, 3, 5)
    for k in range(c3.shape[0]):
        w = pair + c3[k]
        mask = np.ones(w.shape[0], dtype=bool)
        for j in checked:
            mask &= (w[:, j] >= lo[j]) & (w[:, j] <= hi[j])
        if mask.any():
            taus = w[mask, 4]
            accepted += taus.size
            tau_min = min(tau_min, float(taus.min()))
            tau_max = max(tau_max, float(taus.max()))
    if accepted == 0:
        return 0, math.nan, math.nan
    return accepted, tau_min, tau_max


def _rodrigues(omega, dt):
    """Rotation increment exp([omega*dt]x)."""
    wx, wy, wz = omega
    theta = math.sqrt(wx * wx + wy * wy + wz * wz) * dt
    if theta < 1e-12:
        return np.eye(3)
    ax = wx * dt / theta
    ay = wy * dt / theta
    az = wz * dt / theta
    k = np.array([[0.0, -az, ay], [az, 0.0, -ax], [-ay, ax, 0.0]])
    return np.eye(3) + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


def point_contact_force(p_world, v_point, stiffness, damping, mu_lat, friction_mode, v_eps):
    """Penalty normal force plus mode-dependent horizontal friction at one point.

    Returns ``(force_world, normal)``; both zero when the point is above ground.
    ``friction_mode``: 0 = none (aerial), 1 = wheeled (lateral only, free
    rolling longitudinally), 2 = legged-static (both horizontal axes).
    """
    if p_world[2] >= 0.0:
        return np.zeros(3), 0.0
    penetration = -p_world[2]
    normal = stiffness * penetration + damping * (-v_point[2])
    if normal < 0.0:
        normal = 0.0
    force = np.zeros(3)
    force[2] = normal
    if friction_mode == 1:
        force[1] = -mu_lat * normal * math.tanh(v_point[1] / v_eps)
    elif friction_mode == 2:
        force[0] = -mu_lat * normal * math.tanh(v_point[0] / v_eps)
        force[1] = -mu_lat * normal * math.tanh(v_point[1] / v_eps)
    return force, normal


def rigid_substeps(
    r,
    v,
    rot,
    omega,
    n_sub,
    dt,
    mass,
    inertia,
    inertia_inv,
    f_body,
    tau_body,
    points_body,
    stiffness,
    damping,
    mu_lat,
    friction_mode,
    gravity,
    v_eps,
):
    """Integrate ``n_sub`` semi-implicit substeps under a fixed body wrench.

    Contact forces are re-evaluated every substep from the body-fixed
    ``points_body``. Returns
    ``(r, v, rot, omega, sensor_force, diverged)`` where ``sensor_force``
    is the summed contact normal force at the final substep.
    """
    r = np.array(r, dtype=float)
    v = np.array(v, dtype=float)
    rot = np.array(rot, dtype=float)
    omega = np.array(omega, dtype=float)
    points_body = np.asarray(points_body, dtype=float).reshape(-1, 3)
    f_body = np.asarray(f_body, dtype=float).reshape(3)
    tau_body = np.asarray(tau_body, dtype=float).reshape(3)
    inertia = np.asarray(inertia, dtype=float).reshape(3, 3)
    inertia_inv = np.asarray(inertia_inv, dtype=float).reshape(3, 3)

    sensor = 0.0
    eye = np.eye(3)
    for _ in range(n_sub):
        f_contact = np.zeros(3)
        tau_contact = np.zeros(3)
        sensor = 0.0
        if friction_mode != 0 and points_body.shape[0] > 0:
            omega_world = rot @ omega
            for p_b in points_body:
                arm = rot @ p_b
                p_w = r + arm
                v_pt = v + np.cross(omega_world, arm)
                force, normal = point_contact_force(
                    p_w, v_pt, stiffness, damping, mu_lat, friction_mode, v_eps
                )
                f_contact += force
                tau_contact += np.cross(arm, force)
                sensor += normal

        accel = (rot @ f_body + f_contact) / mass
        accel[2] -= gravity
        v = v + dt * accel
        r = r + dt * v

        torque = tau_body - np.cross(omega, inertia @ omega) + rot.T @ tau_contact
        omega = omega + dt * (inertia_inv @ torque)
        rot = rot @ _rodrigues(omega, dt)
        rot = rot @ (1.5 * eye - 0.5 * (rot.T @ rot))

        if (
            np.max(np.abs(r)) > _DIVERGENCE_BOUND
            or np.max(np.abs(v)) > _DIVERGENCE_BOUND
            or np.max(np.abs(omega)) > _DIVERGENCE_BOUND
        ):
            return r, v, rot, omega, sensor, True
    return r, v, rot, omega, sensor, False
