import numpy as np
import pytest

from trivec import kernels
from trivec.model import (
    GRAVITY,
    LocomotionMode,
    RigidBodyState,
    Wrench,
    euler_to_rotation,
)
from trivec.sim import (
    ContactState,
    GaitTrajectory,
    Phase,
    Scenario,
    SensorNoise,
    SimConfig,
    SimulationDiverged,
    Trace,
    TRACE_COLUMNS,
    Waypoint,
    contact_forces,
    dynamics_step,
    run_scenario,
)


def hover_scenario(duration=4.0):
    return Scenario(
        name="hover",
        duration=duration,
        phases=(Phase(start=0.0, mode=LocomotionMode.AERIAL),),
        waypoints=(Waypoint(t=0.0, position=[0.0, 0.0, 1.0], yaw=0.0),),
        initial_position=[0.1, 0.1, 1.1],
        initial_euler=[0.1, 0.1, 0.1],
        seed=0,
    )


class TestDynamicsStep:
    def test_ballistic_matches_semi_implicit_closed_form(self, geom):
        state = RigidBodyState.at_rest([0, 0, 0])
        dt, steps = 1e-3, 1000
        for _ in range(steps):
            state = dynamics_step(state, Wrench.zero(), None, geom.mass, geom.inertia, dt)
        closed_form = -GRAVITY * dt * dt * steps * (steps + 1) / 2
        assert state.position[2] == pytest.approx(closed_form, abs=1e-6)
        # and within the integrator-order distance of the continuous solution
        assert state.position[2] == pytest.approx(-GRAVITY / 2, abs=1e-2)

    def test_static_hover_force_balance(self, geom):
        state = RigidBodyState.at_rest([0, 0, 1])
        thrust = Wrench(force=[0, 0, geom.mass * GRAVITY], torque=[0, 0, 0])
        for _ in range(100):
            state = dynamics_step(state, thrust, None, geom.mass, geom.inertia, 1e-3)
        np.testing.assert_allclose(state.position, [0, 0, 1], atol=1e-12)
        np.testing.assert_allclose(state.velocity, np.zeros(3), atol=1e-12)

    def test_constant_yaw_torque_spins_linearly(self, geom):
        state = RigidBodyState.at_rest([0, 0, 1])
        torque = 0.1
        thrust = Wrench(force=[0, 0, geom.mass * GRAVITY], torque=[0, 0, torque])
        dt, steps = 1e-3, 500
        for _ in range(steps):
            state = dynamics_step(state, thrust, None, geom.mass, geom.inertia, dt)
        expected_rate = torque / geom.inertia[2, 2] * steps * dt
        assert state.angular_velocity[2] == pytest.approx(expected_rate, rel=1e-9)

    def test_rotation_stays_orthonormal_under_wild_tumbling(self, geom):
        state = RigidBodyState(
            position=np.zeros(3),
            velocity=np.zeros(3),
            rotation=np.eye(3),
            angular_velocity=[7.0, -5.0, 3.0],
        )
        for _ in range(2000):
            # RigidBodyState construction re-validates orthonormality at 1e-9
            state = dynamics_step(state, Wrench.zero(), None, geom.mass, geom.inertia, 1e-3)
        err = np.max(np.abs(state.rotation.T @ state.rotation - np.eye(3)))
        assert err < 1e-12

    def test_divergence_guard(self, geom):
        state = RigidBodyState(
            position=np.zeros(3),
            velocity=[9.9e5, 0, 0],
            rotation=np.eye(3),
            angular_velocity=np.zeros(3),
        )
        boost = Wrench(force=[1e9, 0, 0], torque=[0, 0, 0])
        with pytest.raises(SimulationDiverged):
            for _ in range(100):
                state = dynamics_step(state, boost, None, geom.mass, geom.inertia, 1e-2)

    def test_energy_never_increases_in_free_fall(self, geom):
        state = RigidBodyState(
            position=[0, 0, 100.0],
            velocity=[2.0, 0.0, 5.0],
            rotation=np.eye(3),
            angular_velocity=[1.0, 0.5, 0.2],
        )

        def energy(s):
            kinetic = 0.5 * geom.mass * float(s.velocity @ s.velocity)
            rotational = 0.5 * float(
                s.angular_velocity @ (geom.inertia @ s.angular_velocity)
            )
            return kinetic + rotational + geom.mass * GRAVITY * s.position[2]

        e0 = energy(state)
        previous = e0
        for step in range(2000):
            state = dynamics_step(state, Wrench.zero(), None, geom.mass, geom.inertia, 1e-3)
            current = energy(state)
            assert current <= previous + 1e-9
            previous = current
        # dissipation below 0.1% of the initial energy per simulated second
        assert e0 - previous <= 1e-3 * e0 * 2.0


class TestContactForces:
    def test_no_penetration_no_force(self, geom, humanoid):
        q = humanoid.joint_vector(np.zeros(len(humanoid.joint_names)))
        state = RigidBodyState.at_rest([0, 0, 5.0])
        contacts = contact_forces(state, humanoid, q, LocomotionMode.WHEELED, SimConfig())
        assert contacts.sensor_force == 0.0
        assert not contacts.in_contact.any()

    def test_linear_penalty_law(self):
        from trivec._kernels_py import point_contact_force

        force, normal = point_contact_force(
            np.array([0.0, 0.0, -1e-3]),
            np.zeros(3),
            1e4,
            0.0,
            0.8,
            1,
            0.01,
        )
        assert normal == pytest.approx(10.0, abs=1e-12)
        np.testing.assert_allclose(force, [0, 0, 10.0], atol=1e-12)

    def test_static_rest_sensor_matches_weight_minus_thrust(self, geom, humanoid):
        # quasi-static: thrust M*a_z up, weight down, sensor carries the rest.
        # Needs the balanced wheel pose: with the CoG off the contact line the
        # body simply tips over (the clutch-angle validity condition).
        q = humanoid.joint_vector(
            {
                "left_ankle_pitch": -0.990855,
                "left_knee": 0.842227,
                "left_hip_pitch": 0.148628,
                "torso": 0.6108652381980153,
                "flight_mount": -0.6108652381980153,
                "right_hip_pitch": -0.148628,
                "right_knee": -0.842227,
                "right_ankle_pitch": 0.990855,
            }
        )
        cfg = SimConfig(contact_damping=200.0)
        a_z = 0.75 * GRAVITY
        thrust = Wrench(force=[0, 0, geom.mass * a_z], torque=[0, 0, 0])
        from trivec.kinematics import contact_points_body

        points = contact_points_body(humanoid, q, LocomotionMode.WHEELED)
        state = RigidBodyState.at_rest([0, 0, -float(points[0, 2])])
        inertia_inv = np.linalg.inv(geom.inertia)
        r, v, rot, omega = state.position, state.velocity, state.rotation, state.angular_velocity
        sensor = 0.0
        for _ in range(3000):
            r, v, rot, omega, sensor, diverged = kernels.rigid_substeps(
                r, v, rot, omega, 1, 1e-3, geom.mass, geom.inertia, inertia_inv,
                thrust.force, thrust.torque, points,
                cfg.contact_stiffness, cfg.contact_damping,
                cfg.rolling_friction_coefficient, 1, GRAVITY, 0.01,
            )
            assert not diverged
        expected = geom.mass * (GRAVITY - a_z)
        assert sensor == pytest.approx(expected, rel=0.02)

    def test_contact_state_validates_normals(self):
        with pytest.raises(ValueError):
            ContactState(
                points_world=np.zeros((1, 3)),
                penetrations=np.zeros(1),
                normal_forces=np.array([-1.0]),
                forces_world=np.zeros((1, 3)),
                in_contact=np.array([True]),
            )


class TestKernelComposition:
    def test_single_substep_matches_public_ops(self, geom, humanoid):
        # rigid_substeps(n=1) must agree with contact_forces + dynamics_step
        rng = np.random.default_rng(31)
        from trivec.kinematics import contact_points_body

        q = humanoid.joint_vector(np.zeros(len(humanoid.joint_names)))
        points = contact_points_body(humanoid, q, LocomotionMode.WHEELED)
        cfg = SimConfig(contact_damping=200.0)
        inertia_inv = np.linalg.inv(geom.inertia)
        for _ in range(25):
            state = RigidBodyState(
                position=[rng.normal(0, 0.1), rng.normal(0, 0.1), abs(points[0, 2]) + rng.normal(0, 0.01)],
                velocity=rng.normal(0, 0.5, 3),
                rotation=euler_to_rotation(rng.normal(0, 0.1, 3)),
                angular_velocity=rng.normal(0, 0.5, 3),
            )
            wrench = Wrench(force=rng.normal(0, 10, 3), torque=rng.normal(0, 1, 3))
            contacts = contact_forces(state, humanoid, q, LocomotionMode.WHEELED, cfg)
            direct = dynamics_step(state, wrench, contacts, geom.mass, geom.inertia, 1e-3)
            r, v, rot, omega, sensor, diverged = kernels.rigid_substeps(
                state.position, state.velocity, state.rotation, state.angular_velocity,
                1, 1e-3, geom.mass, geom.inertia, inertia_inv,
                wrench.force, wrench.torque, points,
                cfg.contact_stiffness, cfg.contact_damping,
                cfg.rolling_friction_coefficient, 1, GRAVITY, 0.01,
            )
            assert not diverged
            np.testing.assert_allclose(r, direct.position, atol=1e-12)
            np.testing.assert_allclose(v, direct.velocity, atol=1e-12)
            np.testing.assert_allclose(rot, direct.rotation, atol=1e-12)
            np.testing.assert_allclose(omega, direct.angular_velocity, atol=1e-12)


class TestRunScenario:
    def test_deterministic_traces_bit_identical(self, geom, humanoid, gains, tmp_path):
        cfg = SimConfig(contact_damping=200.0)
        scenario = hover_scenario(duration=2.0)
        t1 = run_scenario(scenario, geom, humanoid, gains, cfg)
        t2 = run_scenario(scenario, geom, humanoid, gains, cfg)
        assert np.array_equal(t1.data, t2.data)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        t1.write_csv(p1)
        t2.write_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_noise_is_seeded_and_reproducible(self, geom, humanoid, gains):
        cfg = SimConfig(
            contact_damping=200.0,
            sensor_noise=SensorNoise(position=0.002, euler=0.001, force=0.05),
        )
        scenario = hover_scenario(duration=1.0)
        t1 = run_scenario(scenario, geom, humanoid, gains, cfg)
        t2 = run_scenario(scenario, geom, humanoid, gains, cfg)
        assert np.array_equal(t1.data, t2.data)

    def test_different_seeds_differ_under_noise(self, geom, humanoid, gains):
        import dataclasses

        cfg = SimConfig(contact_damping=200.0, sensor_noise=SensorNoise(position=0.01))
        s1 = hover_scenario(duration=1.0)
        s2 = dataclasses.replace(s1, seed=1)
        t1 = run_scenario(s1, geom, humanoid, gains, cfg)
        t2 = run_scenario(s2, geom, humanoid, gains, cfg)
        assert not np.array_equal(t1.data, t2.data)

    def test_hover_reaches_steady_state(self, geom, humanoid, gains):
        cfg = SimConfig()
        trace = run_scenario(hover_scenario(duration=6.0), geom, humanoid, gains, cfg)
        tail = trace.data[-100:]
        assert np.max(np.abs(tail[:, 1:4] - [0, 0, 1.0])) < 0.01
        assert np.max(np.abs(tail[:, 4:7])) < 0.01

    def test_control_dt_must_be_multiple_of_physics_dt(self, geom, humanoid, gains):
        cfg = SimConfig(dt=3e-3)
        with pytest.raises(ValueError, match="integer multiple"):
            run_scenario(hover_scenario(), geom, humanoid, gains, cfg)

    def test_unknown_pose_reference_raises(self, geom, humanoid, gains):
        scenario = Scenario(
            name="bad",
            duration=1.0,
            phases=(Phase(start=0.0, mode=LocomotionMode.WHEELED, pose="missing"),),
        )
        with pytest.raises(KeyError, match="missing"):
            run_scenario(scenario, geom, humanoid, gains, SimConfig())

    def test_wheeled_quasi_static_thrust_plus_sensor_is_weight(self, geom, humanoid, gains):
        wheel_pose = humanoid.joint_vector(
            {
                "left_ankle_pitch": -0.990855,
                "left_knee": 0.842227,
                "left_hip_pitch": 0.148628,
                "torso": 0.6108652381980153,
                "flight_mount": -0.6108652381980153,
                "right_hip_pitch": -0.148628,
                "right_knee": -0.842227,
                "right_ankle_pitch": 0.990855,
            }
        )
        scenario = Scenario(
            name="wheel",
            duration=4.0,
            phases=(Phase(start=0.0, mode=LocomotionMode.WHEELED, pose="wheel", f_thresh=8.0),),
            initial_position=[0, 0, 0.4],
            start_on_ground=True,
            seed=0,
        )
        cfg = SimConfig(contact_damping=200.0)
        trace = run_scenario(scenario, geom, humanoid, gains, cfg, poses={"wheel": wheel_pose})
        tail = trace.data[-100:]
        thrust_z = geom.mass * tail[:, TRACE_COLUMNS.index("a_z_cmd")]
        total = thrust_z + tail[:, TRACE_COLUMNS.index("f_contact")]
        np.testing.assert_allclose(total, geom.mass * GRAVITY, rtol=0.02)


class TestGaitTrajectory:
    def test_round_trip_through_csv(self, tmp_path):
        path = tmp_path / "gait.csv"
        path.write_text(
            "t,j0,j1,footstep\n0.0,0.0,0.0,0\n0.5,0.1,-0.1,1\n1.0,0.2,-0.2,0\n"
        )
        gait = GaitTrajectory.from_csv(path)
        assert gait.times.shape == (3,)
        np.testing.assert_allclose(gait.sample(0.7), [0.1, -0.1])
        np.testing.assert_allclose(gait.sample(-1.0), [0.0, 0.0])
        np.testing.assert_allclose(gait.sample(9.0), [0.2, -0.2])
        assert gait.events_between(0.0, 0.5) == [1]
        assert gait.events_between(0.5, 1.0) == []

    def test_rejects_unsorted_times(self):
        with pytest.raises(ValueError):
            GaitTrajectory(
                times=[0.0, 0.0], angles=np.zeros((2, 1)), footstep=[False, False]
            )


class TestTrace:
    def test_csv_header_versioned(self, geom, humanoid, gains, tmp_path):
        trace = run_scenario(hover_scenario(duration=0.5), geom, humanoid, gains, SimConfig())
        path = tmp_path / "trace.csv"
        trace.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "# trivec.trace.v1"
        assert lines[1].split(",") == list(TRACE_COLUMNS) + ["mode"]
        assert len(lines) == 2 + trace.data.shape[0]

    def test_column_access_and_modes(self, geom, humanoid, gains):
        trace = run_scenario(hover_scenario(duration=0.5), geom, humanoid, gains, SimConfig())
        assert trace.column("t")[0] == 0.0
        assert trace.rows_in_mode(LocomotionMode.AERIAL).all()
        summary = trace.summary()
        assert summary["ticks"] == trace.data.shape[0]

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            Trace(data=np.zeros((2, 3)), modes=("aerial", "aerial"))
