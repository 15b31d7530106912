"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot paths on realistic workloads: the exhaustive actuator
sweep at the default 25x25 per-rotor grids, and closed-loop rigid-body
substeps with wheel contact. Run with ``python benchmarks/bench_kernels.py``.
"""

import time

import numpy as np

import trivec._kernels_py as python_lane
from trivec.allocation import WrenchAllocator
from trivec.config import load_config, preset_path
from trivec.feasibility import hover_wrench_at_pitch
from trivec.kinematics import contact_points_body
from trivec.model import GRAVITY, LocomotionMode

try:
    import trivec._kernels as compiled_lane
except ImportError:
    compiled_lane = None


def sweep_workload(bundle):
    geom = bundle.geometry
    cfg = bundle.feasibility
    allocator = WrenchAllocator(geom)
    lam = np.linspace(geom.lambda_min, geom.lambda_max, cfg.lambda_grid_points)
    alpha = np.linspace(geom.alpha_min, geom.alpha_max, cfg.alpha_grid_points)
    lam_mesh, alpha_mesh = np.meshgrid(lam, alpha, indexing="ij")
    samples = np.column_stack(
        [(lam_mesh * np.cos(alpha_mesh)).ravel(), (lam_mesh * np.sin(alpha_mesh)).ravel()]
    )
    contributions = [samples @ allocator.matrix[:, 2 * i : 2 * i + 2].T for i in range(3)]
    target = hover_wrench_at_pitch(geom.mass, 0.2, 0.0).as_vector()
    tolerance = np.array([3.61, 1.81, 5.42, 0.90, np.inf, 1.26])
    return contributions, target, tolerance


def substep_workload(bundle):
    geom = bundle.geometry
    points = contact_points_body(
        bundle.humanoid, bundle.poses["wheel"], LocomotionMode.WHEELED
    )
    state = (
        np.array([0.0, 0.0, -float(points[0, 2])]),
        np.zeros(3),
        np.eye(3),
        np.zeros(3),
    )
    args = (
        2000,
        1e-3,
        geom.mass,
        geom.inertia,
        np.linalg.inv(geom.inertia),
        np.array([0.0, 0.0, geom.mass * 0.75 * GRAVITY]),
        np.zeros(3),
        points,
        bundle.sim.contact_stiffness,
        bundle.sim.contact_damping,
        bundle.sim.rolling_friction_coefficient,
        1,
        GRAVITY,
        0.01,
    )
    return state, args


def time_call(fn, *args, repeats=3):
    best = np.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    bundle = load_config(preset_path("table1.cfg"))
    lanes = [("python", python_lane)]
    if compiled_lane is not None:
        lanes.append(("compiled", compiled_lane))
    else:
        print("compiled kernels not built; timing the python lane only")

    print(f"{'kernel':<18} {'lane':<10} {'time':>10}   result")
    times = {}

    contributions, target, tolerance = sweep_workload(bundle)
    n_combos = contributions[0].shape[0] ** 3
    for name, lane in lanes:
        elapsed, out = time_call(
            lane.actuator_sweep, *contributions, target, tolerance, repeats=1
        )
        times[("sweep", name)] = elapsed
        print(
            f"{'actuator_sweep':<18} {name:<10} {elapsed:>9.2f}s   "
            f"{n_combos:.2e} combos, range [{out[1]:.3f}, {out[2]:.3f}]"
        )

    state, args = substep_workload(bundle)
    for name, lane in lanes:
        elapsed, out = time_call(lane.rigid_substeps, *state, *args)
        times[("substeps", name)] = elapsed
        print(
            f"{'rigid_substeps':<18} {name:<10} {1e3 * elapsed:>8.2f}ms   "
            f"{args[0]} steps with contact, sensor {out[4]:.2f} N"
        )

    if compiled_lane is not None:
        for kernel in ("sweep", "substeps"):
            ratio = times[(kernel, "python")] / times[(kernel, "compiled")]
            print(f"speedup {kernel}: {ratio:.1f}x")


if __name__ == "__main__":
    main()
