"""Truth, model, and observation generation for the twin experiments.

Two forward models: a discrete-time linear system ``x_{i+1} = M x_i + w_i``
and the three-variable convection equations integrated with classical RK4.
Biased Gaussian noise enters additively through :class:`GaussianErrorSpec`
draws; every stochastic ingredient pulls from a named, counter-based
sub-stream so ensembles are reproducible and error sources independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assimilate import GaussianErrorSpec
from .errors import WassdaError

__all__ = [
    "LinearModel",
    "Lorenz63Model",
    "TrajectorySpec",
    "substream",
    "step_linear",
    "rk4_step",
    "generate_truth",
    "observe",
]

# Fixed registry of named noise streams; per-member spawn keys are
# (member, stream index), so members and sources are mutually independent.
STREAMS = {
    "model-noise": 0,
    "obs-noise": 1,
    "reference-samples": 2,
    "initial-perturbation": 3,
    "model-climatology": 4,
    "obs-climatology": 5,
}


def substream(master_seed: int, member: int, name: str) -> np.random.Generator:
    """Independent counter-based generator for one member and error source."""
    try:
        stream_id = STREAMS[name]
    except KeyError:
        raise ValueError(f"unknown stream {name!r}; expected one of {sorted(STREAMS)}") from None
    seq = np.random.SeedSequence(master_seed, spawn_key=(member, stream_id))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class LinearModel:
    """Time-invariant linear propagator ``x -> M x``."""

    M: np.ndarray
    dt: float = 0.01

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=np.float64))
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"state transition matrix must be square, got {M.shape}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "M", M)

    @property
    def dim(self) -> int:
        return self.M.shape[0]

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.M)).max())

    def is_stationary(self) -> bool:
        """True iff every eigenvalue of M lies strictly inside the unit circle."""
        return self.spectral_radius() < 1.0


@dataclass(frozen=True)
class Lorenz63Model:
    """Three-variable convection system (sigma, rho, beta parameters)."""

    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def dim(self) -> int:
        return 3

    def is_standard_chaotic_regime(self) -> bool:
        return (self.sigma, self.rho) == (10.0, 28.0) and abs(self.beta - 8.0 / 3.0) < 1e-12

    def equilibria(self) -> np.ndarray:
        """The conductive origin and the two convective fixed points."""
        r = np.sqrt(self.beta * (self.rho - 1.0))
        return np.array(
            [[0.0, 0.0, 0.0], [r, r, self.rho - 1.0], [-r, -r, self.rho - 1.0]]
        )

    def rhs(self, x: np.ndarray) -> np.ndarray:
        dx = -self.sigma * (x[0] - x[1])
        dy = self.rho * x[0] - x[1] - x[0] * x[2]
        dz = x[0] * x[1] - self.beta * x[2]
        return np.array([dx, dy, dz])


@dataclass(frozen=True)
class TrajectorySpec:
    """Length, start, noise and seeding of one trajectory."""

    x0: np.ndarray
    steps: int
    model_noise: GaussianErrorSpec | None = None
    seed: int = 0
    spin_up_steps: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.spin_up_steps < 0:
            raise ValueError("spin_up_steps must be >= 0")
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=np.float64))
        object.__setattr__(self, "x0", x0)


def step_linear(model: LinearModel, x: np.ndarray, noise: np.ndarray | None = None) -> np.ndarray:
    """One linear update ``M x (+ noise draw)``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = model.M @ x
    if noise is not None:
        out = out + noise
    return out


def rk4_step(model: Lorenz63Model, x: np.ndarray) -> np.ndarray:
    """Classical fourth-order Runge-Kutta update over one dt."""
    x = np.asarray(x, dtype=np.float64)
    h = model.dt
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = model.rhs(x)
        k2 = model.rhs(x + 0.5 * h * k1)
        k3 = model.rhs(x + 0.5 * h * k2)
        k4 = model.rhs(x + h * k3)
        out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise WassdaError(f"integration blew up: state {x} produced {out}")
    return out


def _propagate(model, x: np.ndarray) -> np.ndarray:
    if isinstance(model, Lorenz63Model):
        return rk4_step(model, x)
    return step_linear(model, x)


def generate_truth(spec: TrajectorySpec, model) -> np.ndarray:
    """Noise-free trajectory of ``spec.steps + 1`` states (including x0).

    When ``spec.spin_up_steps`` is set, that many leading steps are
    integrated and discarded, so the returned trajectory starts at the
    post-spin-up state.
    """
    x = spec.x0.copy()
    for _ in range(spec.spin_up_steps):
        x = _propagate(model, x)
    out = np.empty((spec.steps + 1, x.size))
    out[0] = x
    for i in range(spec.steps):
        x = _propagate(model, x)
        out[i + 1] = x
    return out


def propagate_noisy(
    model,
    x: np.ndarray,
    steps: int,
    noise: GaussianErrorSpec | None,
    rng: np.random.Generator | None = None,
    draws: np.ndarray | None = None,
) -> np.ndarray:
    """Propagate ``steps`` updates, adding a noise draw after each one.

    Draws may be supplied explicitly (shape ``(steps, dim)``) so that
    competing assimilation schemes consume identical realizations.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if noise is not None and draws is None:
        if rng is None:
            raise ValueError("noisy propagation needs either draws or an rng")
        draws = noise.draw(rng, size=steps)
    for i in range(steps):
        x = _propagate(model, x)
        if draws is not None:
            x = x + draws[i]
    return x


def observe(
    x_true: np.ndarray,
    H: np.ndarray,
    noise: GaussianErrorSpec | None = None,
    rng: np.random.Generator | None = None,
    draw: np.ndarray | None = None,
) -> np.ndarray:
    """Map a true state into observation space and corrupt it: ``Hx + v``."""
    x_true = np.atleast_1d(np.asarray(x_true, dtype=np.float64))
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    y = H @ x_true
    if draw is not None:
        return y + draw
    if noise is not None:
        if rng is None:
            raise ValueError("observation noise needs either a draw or an rng")
        return y + noise.draw(rng)
    return y
