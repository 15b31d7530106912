# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: actuator-grid sweep and rigid-body substeps.

Mirrors ``trivec._kernels_py`` operation for operation; the two lanes are
held equivalent by tests/test_kernels.py.
"""

from libc.math cimport cos, fabs, sin, sqrt, tanh, NAN

import numpy as np

BACKEND = "compiled"

cdef double _DIVERGENCE_BOUND = 1.0e6


def actuator_sweep(c1, c2, c3, target, tol):
    """Exhaustive sweep over all per-rotor actuator sample combinations.

    Same contract as the python lane: returns ``(accepted, tau_min, tau_max)``.
    """
    cdef const double[:, ::1] a = np.ascontiguousarray(c1, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(c2, dtype=np.float64)
    cdef const double[:, ::1] c = np.ascontiguousarray(c3, dtype=np.float64)
    cdef const double[::1] tgt = np.ascontiguousarray(np.asarray(target, dtype=np.float64).reshape(6))
    cdef const double[::1] tl = np.ascontiguousarray(np.asarray(tol, dtype=np.float64).reshape(6))

    cdef double lo0 = tgt[0] - tl[0], hi0 = tgt[0] + tl[0]
    cdef double lo1 = tgt[1] - tl[1], hi1 = tgt[1] + tl[1]
    cdef double lo2 = tgt[2] - tl[2], hi2 = tgt[2] + tl[2]
    cdef double lo3 = tgt[3] - tl[3], hi3 = tgt[3] + tl[3]
    cdef double lo5 = tgt[5] - tl[5], hi5 = tgt[5] + tl[5]

    cdef Py_ssize_t n1 = a.shape[0], n2 = b.shape[0], n3 = c.shape[0]
    cdef Py_ssize_t i, j, k
    cdef long long accepted = 0
    cdef double tau_min = np.inf
    cdef double tau_max = -np.inf
    cdef double p0, p1, p2, p3, p4, p5
    cdef double w0, w1, w2, w3, w4, w5

    for i in range(n1):
        for j in range(n2):
            p0 = a[i, 0] + b[j, 0]
            p1 = a[i, 1] + b[j, 1]
            p2 = a[i, 2] + b[j, 2]
            p3 = a[i, 3] + b[j, 3]
            p4 = a[i, 4] + b[j, 4]
            p5 = a[i, 5] + b[j, 5]
            for k in range(n3):
                w0 = p0 + c[k, 0]
                if w0 < lo0 or w0 > hi0:
                    continue
                w1 = p1 + c[k, 1]
                if w1 < lo1 or w1 > hi1:
                    continue
                w2 = p2 + c[k, 2]
                if w2 < lo2 or w2 > hi2:
                    continue
                w3 = p3 + c[k, 3]
                if w3 < lo3 or w3 > hi3:
                    continue
                w5 = p5 + c[k, 5]
                if w5 < lo5 or w5 > hi5:
                    continue
                w4 = p4 + c[k, 4]
                accepted += 1
                if w4 < tau_min:
                    tau_min = w4
                if w4 > tau_max:
                    tau_max = w4
    if accepted == 0:
        return 0, float(NAN), float(NAN)
    return int(accepted), tau_min, tau_max


cdef inline void _mat33_mul(double* out, const double* x, const double* y) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += x[3 * i + k] * y[3 * k + j]
            out[3 * i + j] = s


cdef inline void _matvec33(double* out, const double* m, const double* x) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(3):
        s = 0.0
        for k in range(3):
            s += m[3 * i + k] * x[k]
        out[i] = s


cdef inline void _matvec33_t(double* out, const double* m, const double* x) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(3):
        s = 0.0
        for k in range(3):
            s += m[3 * k + i] * x[k]
        out[i] = s


cdef inline void _cross(double* out, const double* x, const double* y) noexcept nogil:
    out[0] = x[1] * y[2] - x[2] * y[1]
    out[1] = x[2] * y[0] - x[0] * y[2]
    out[2] = x[0] * y[1] - x[1] * y[0]


cdef void _rodrigues(double* out, const double* omega, double dt) noexcept nogil:
    cdef double theta = sqrt(omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]) * dt
    cdef double ax, ay, az, s, c1
    cdef double k[9]
    cdef double kk[9]
    cdef int i
    if theta < 1e-12:
        for i in range(9):
            out[i] = 0.0
        out[0] = out[4] = out[8] = 1.0
        return
    ax = omega[0] * dt / theta
    ay = omega[1] * dt / theta
    az = omega[2] * dt / theta
    k[0] = 0.0; k[1] = -az; k[2] = ay
    k[3] = az; k[4] = 0.0; k[5] = -ax
    k[6] = -ay; k[7] = ax; k[8] = 0.0
    _mat33_mul(kk, k, k)
    s = sin(theta)
    c1 = 1.0 - cos(theta)
    for i in range(9):
        out[i] = s * k[i] + c1 * kk[i]
    out[0] += 1.0
    out[4] += 1.0
    out[8] += 1.0


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

    Same contract as the python lane: returns
    ``(r, v, rot, omega, sensor_force, diverged)``.
    """
    r_out = np.array(r, dtype=np.float64).reshape(3)
    v_out = np.array(v, dtype=np.float64).reshape(3)
    rot_out = np.ascontiguousarray(np.array(rot, dtype=np.float64).reshape(3, 3))
    om_out = np.array(omega, dtype=np.float64).reshape(3)
    pts = np.ascontiguousarray(np.asarray(points_body, dtype=np.float64).reshape(-1, 3))
    fb = np.asarray(f_body, dtype=np.float64).reshape(3)
    tb = np.asarray(tau_body, dtype=np.float64).reshape(3)
    inr = np.ascontiguousarray(np.asarray(inertia, dtype=np.float64).reshape(3, 3))
    inr_inv = np.ascontiguousarray(np.asarray(inertia_inv, dtype=np.float64).reshape(3, 3))

    cdef double[::1] rv = r_out
    cdef double[::1] vv = v_out
    cdef double[:, ::1] Rv = rot_out
    cdef double[::1] wv = om_out
    cdef const double[:, ::1] pv = pts
    cdef const double[::1] fbv = fb
    cdef const double[::1] tbv = tb
    cdef const double[:, ::1] Iv = inr
    cdef const double[:, ::1] Iinv = inr_inv

    cdef int steps = int(n_sub)
    cdef int fmode = int(friction_mode)
    cdef double h = float(dt)
    cdef double m = float(mass)
    cdef double ks = float(stiffness)
    cdef double kd = float(damping)
    cdef double mu = float(mu_lat)
    cdef double g = float(gravity)
    cdef double veps = float(v_eps)
    cdef Py_ssize_t n_pts = pv.shape[0]

    cdef double R[9]
    cdef double Rnew[9]
    cdef double dR[9]
    cdef double E[9]
    cdef double corr[9]
    cdef double f_contact[3]
    cdef double tau_contact[3]
    cdef double omega_world[3]
    cdef double arm[3]
    cdef double p_w[3]
    cdef double v_pt[3]
    cdef double force[3]
    cdef double accel[3]
    cdef double i_om[3]
    cdef double gyro[3]
    cdef double torque[3]
    cdef double tau_c_body[3]
    cdef double dom[3]
    cdef double tmp3[3]
    cdef double sensor = 0.0
    cdef double penetration, normal
    cdef bint diverged = False
    cdef int step, i, j
    cdef Py_ssize_t p

    for i in range(3):
        for j in range(3):
            R[3 * i + j] = Rv[i, j]

    for step in range(steps):
        f_contact[0] = f_contact[1] = f_contact[2] = 0.0
        tau_contact[0] = tau_contact[1] = tau_contact[2] = 0.0
        sensor = 0.0
        if fmode != 0 and n_pts > 0:
            _matvec33(omega_world, R, &wv[0])
            for p in range(n_pts):
                _matvec33(arm, R, &pv[p, 0])
                p_w[0] = rv[0] + arm[0]
                p_w[1] = rv[1] + arm[1]
                p_w[2] = rv[2] + arm[2]
                _cross(v_pt, omega_world, arm)
                v_pt[0] += vv[0]
                v_pt[1] += vv[1]
                v_pt[2] += vv[2]
                if p_w[2] >= 0.0:
                    continue
                penetration = -p_w[2]
                normal = ks * penetration + kd * (-v_pt[2])
                if normal < 0.0:
                    normal = 0.0
                force[0] = 0.0
                force[1] = 0.0
                force[2] = normal
                if fmode == 1:
                    force[1] = -mu * normal * tanh(v_pt[1] / veps)
                elif fmode == 2:
                    force[0] = -mu * normal * tanh(v_pt[0] / veps)
                    force[1] = -mu * normal * tanh(v_pt[1] / veps)
                f_contact[0] += force[0]
                f_contact[1] += force[1]
                f_contact[2] += force[2]
                _cross(tmp3, arm, force)
                tau_contact[0] += tmp3[0]
                tau_contact[1] += tmp3[1]
                tau_contact[2] += tmp3[2]
                sensor += normal

        _matvec33(accel, R, &fbv[0])
        accel[0] = (accel[0] + f_contact[0]) / m
        accel[1] = (accel[1] + f_contact[1]) / m
        accel[2] = (accel[2] + f_contact[2]) / m - g
        vv[0] += h * accel[0]
        vv[1] += h * accel[1]
        vv[2] += h * accel[2]
        rv[0] += h * vv[0]
        rv[1] += h * vv[1]
        rv[2] += h * vv[2]

        _matvec33(i_om, &Iv[0, 0], &wv[0])
        _cross(gyro, &wv[0], i_om)
        _matvec33_t(tau_c_body, R, tau_contact)
        torque[0] = tbv[0] - gyro[0] + tau_c_body[0]
        torque[1] = tbv[1] - gyro[1] + tau_c_body[1]
        torque[2] = tbv[2] - gyro[2] + tau_c_body[2]
        _matvec33(dom, &Iinv[0, 0], torque)
        wv[0] += h * dom[0]
        wv[1] += h * dom[1]
        wv[2] += h * dom[2]

        _rodrigues(dR, &wv[0], h)
        _mat33_mul(Rnew, R, dR)
        # one Newton step back onto SO(3): R <- R (1.5 I - 0.5 R^T R)
        _mat33_mul_t(E, Rnew)
        for i in range(9):
            corr[i] = -0.5 * E[i]
        corr[0] += 1.5
        corr[4] += 1.5
        corr[8] += 1.5
        _mat33_mul(R, Rnew, corr)

        if (
            fabs(rv[0]) > _DIVERGENCE_BOUND or fabs(rv[1]) > _DIVERGENCE_BOUND
            or fabs(rv[2]) > _DIVERGENCE_BOUND or fabs(vv[0]) > _DIVERGENCE_BOUND
            or fabs(vv[1]) > _DIVERGENCE_BOUND or fabs(vv[2]) > _DIVERGENCE_BOUND
            or fabs(wv[0]) > _DIVERGENCE_BOUND or fabs(wv[1]) > _DIVERGENCE_BOUND
            or fabs(wv[2]) > _DIVERGENCE_BOUND
        ):
            diverged = True
            break

    for i in range(3):
        for j in range(3):
            Rv[i, j] = R[3 * i + j]
    return r_out, v_out, rot_out, om_out, sensor, bool(diverged)


cdef inline void _mat33_mul_t(double* out, const double* x) noexcept nogil:
    """out = x^T x."""
    cdef int i, j, k
    cdef double s
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += x[3 * k + i] * x[3 * k + j]
            out[3 * i + j] = s
