"""Analytic benchmark environments.

Dependency-free stand-ins that isolate the two axes the planner variants
differ on: reward sparsity (point mass with a goal-sensing radius) and
control frequency (pendulum swing-up).  All dynamics are pure functions of
batched numpy arrays: states have shape (..., state_dim), actions
(..., action_dim), so a whole candidate population rolls out with one call
per timestep.  Environments validate actions against their bounds and raise
on violations; planners are expected to clip first.
"""

from __future__ import annotations

import numpy as np

from cemplan.optimizer import ActionBounds


def _check_actions(action: np.ndarray, bounds: ActionBounds) -> np.ndarray:
    action = np.asarray(action, dtype=float)
    if action.shape[-1] != bounds.dims:
        raise ValueError(f"expected {bounds.dims} action dims, got {action.shape[-1]}")
    if not bounds.contains(action):
        raise ValueError("action outside bounds")
    return action


def integrator_step(state: np.ndarray, action: np.ndarray, dt: float = 1.0) -> np.ndarray:
    """First-order integration: position moves by action * dt."""
    return np.asarray(state, dtype=float) + np.asarray(action, dtype=float) * dt


def point_mass_step(
    state: np.ndarray, action: np.ndarray, dt: float = 0.1, v_max: float = 2.0
) -> np.ndarray:
    """Semi-implicit Euler step of a 2-d point mass, state (..., 4) = (x, y, vx, vy).

    The velocity is updated first, magnitude-clamped at v_max, then moves the
    position.
    """
    state = np.asarray(state, dtype=float)
    velocity = state[..., 2:4] + np.asarray(action, dtype=float) * dt
    speed = np.linalg.norm(velocity, axis=-1, keepdims=True)
    velocity = np.where(speed > v_max, velocity * (v_max / np.maximum(speed, 1e-12)), velocity)
    position = state[..., 0:2] + velocity * dt
    return np.concatenate([position, velocity], axis=-1)


def sparse_goal_reward(
    position: np.ndarray, goal: np.ndarray, radius: float
) -> np.ndarray:
    """Sparse sensing reward: constant -1 outside radius, -distance/radius inside.

    The two branches agree at the sensing boundary, so there is no reward
    cliff to confound optimizer comparisons.
    """
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    distance = np.linalg.norm(np.asarray(position, dtype=float) - goal, axis=-1)
    return np.where(distance < radius, -distance / radius, -1.0)


def wrap_angle(theta: np.ndarray) -> np.ndarray:
    """Wrap angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2.0 * np.pi)


class PointMassEnv:
    """2-d point mass that must reach a randomly-placed goal it can only
    sense within a radius; success means getting within radius / 5.
    """

    state_dim = 4

    def __init__(
        self,
        goal_distance: float = 2.0,
        radius: float = 0.5,
        v_max: float = 2.0,
        dt: float = 0.1,
    ):
        self.goal_distance = goal_distance
        self.radius = radius
        self.v_max = v_max
        self.dt = dt
        self.goal = np.array([goal_distance, 0.0])
        self.action_bounds = ActionBounds(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        angle = rng.uniform(0.0, 2.0 * np.pi)
        self.goal = self.goal_distance * np.array([np.cos(angle), np.sin(angle)])
        return np.zeros(self.state_dim)

    def clone_state(self, state: np.ndarray) -> np.ndarray:
        return np.array(state, dtype=float, copy=True)

    def step(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        action = _check_actions(action, self.action_bounds)
        return point_mass_step(state, action, dt=self.dt, v_max=self.v_max)

    def reward(self, state, action, next_state) -> np.ndarray:
        return sparse_goal_reward(next_state[..., 0:2], self.goal, self.radius)

    def success(self, state: np.ndarray) -> np.ndarray:
        distance = np.linalg.norm(state[..., 0:2] - self.goal, axis=-1)
        return distance < self.radius / 5.0

    def episode_success(self, states: np.ndarray) -> bool:
        return bool(np.any(self.success(np.asarray(states))))


class IntegratorEnv:
    """First-order integrator: position is the direct integral of the action.

    Dense negative-distance reward toward a randomly-placed goal; mainly a
    testbed for the exploration properties of temporally correlated actions.
    """

    state_dim = 2

    def __init__(self, goal_distance: float = 2.0, dt: float = 0.1):
        self.goal_distance = goal_distance
        self.dt = dt
        self.goal = np.array([goal_distance, 0.0])
        self.action_bounds = ActionBounds(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        angle = rng.uniform(0.0, 2.0 * np.pi)
        self.goal = self.goal_distance * np.array([np.cos(angle), np.sin(angle)])
        return np.zeros(self.state_dim)

    def clone_state(self, state: np.ndarray) -> np.ndarray:
        return np.array(state, dtype=float, copy=True)

    def step(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        action = _check_actions(action, self.action_bounds)
        return integrator_step(state, action, dt=self.dt)

    def reward(self, state, action, next_state) -> np.ndarray:
        return -np.linalg.norm(next_state - self.goal, axis=-1)

    def success(self, state: np.ndarray) -> np.ndarray:
        return np.linalg.norm(state - self.goal, axis=-1) < 0.1

    def episode_success(self, states: np.ndarray) -> bool:
        return bool(np.any(self.success(np.asarray(states))))


class PendulumEnv:
    """Frictionless pendulum swing-up, state (..., 2) = (angle, angular velocity).

    The standard benchmark pendulum: a uniform rod (moment of inertia
    m l^2 / 3) with m = l = 1, g = 9.81, dt = 0.05, semi-implicit Euler,
    angular velocity clamped at +/- 8.  Angle is measured from upright and
    wrapped to (-pi, pi]; the episode starts hanging at rest.  Torque is
    weak relative to gravity, so the solution must pump energy over several
    swings.
    """

    state_dim = 2
    gravity = 9.81
    omega_max = 8.0
    success_angle = 0.2
    success_window = 10

    def __init__(self, dt: float = 0.05):
        self.dt = dt
        self.action_bounds = ActionBounds(np.array([-2.0]), np.array([2.0]))

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([np.pi, 0.0])

    def clone_state(self, state: np.ndarray) -> np.ndarray:
        return np.array(state, dtype=float, copy=True)

    def step(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        action = _check_actions(action, self.action_bounds)
        state = np.asarray(state, dtype=float)
        theta = state[..., 0]
        omega = state[..., 1]
        torque = action[..., 0]
        omega = omega + (1.5 * self.gravity * np.sin(theta) + 3.0 * torque) * self.dt
        omega = np.clip(omega, -self.omega_max, self.omega_max)
        theta = wrap_angle(theta + omega * self.dt)
        return np.stack([theta, omega], axis=-1)

    def reward(self, state, action, next_state) -> np.ndarray:
        action = np.asarray(action, dtype=float)
        theta = next_state[..., 0]
        omega = next_state[..., 1]
        return -(theta**2 + 0.1 * omega**2 + 0.001 * action[..., 0] ** 2)

    def energy(self, state: np.ndarray) -> np.ndarray:
        """Total mechanical energy of the rod, potential zero at pivot height."""
        state = np.asarray(state, dtype=float)
        return state[..., 1] ** 2 / 6.0 + 0.5 * self.gravity * np.cos(state[..., 0])

    def success(self, state: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(state)[..., 0]) < self.success_angle

    def episode_success(self, states: np.ndarray) -> bool:
        """Upright and staying there: the final 10 states all near zero angle."""
        states = np.asarray(states)
        if len(states) < self.success_window:
            return False
        return bool(np.all(self.success(states[-self.success_window:])))


ENVIRONMENTS = {
    "point_mass_sparse": PointMassEnv,
    "integrator": IntegratorEnv,
    "pendulum": PendulumEnv,
}


def make_env(name: str, **kwargs):
    """Instantiate an environment by its string identifier."""
    try:
        factory = ENVIRONMENTS[name]
    except KeyError:
        raise ValueError(
            f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}"
        ) from None
    return factory(**kwargs)
