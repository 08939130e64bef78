"""Neuron dynamics: resonate-and-fire variants, ALIF, and the LI readout.

Discrete-time step functions for every neuron model in the engine:

- ``rf_step``:   complex-membrane resonator u' = u + delta*((b + i*omega)*u + x)
  with optional soft/hard reset of the membrane after a spike.
- ``brf_step``:  balanced resonator adding a refractory threshold trace q,
  a smooth reset (q raises the damping instead of rewriting u), and a
  divergence boundary b = p(omega) - b' that keeps the discrete dynamics
  contractive for b' > 0.
- ``bhrf_step``: balanced damped harmonic oscillator on a (u, v) state pair.
- ``alif_step``: adaptive leaky integrate-and-fire baseline.
- ``li_step``:   non-spiking leaky integrator used as the readout layer.

All step functions are pure maps (state, input, params) -> (state', spikes);
they never mutate their arguments, so independent neurons or batch rows can
be evaluated in parallel without synchronization. Spikes are exact 0.0/1.0
float values so they can feed linear layers directly. Arrays are float64
(complex128 for the RF membrane); float32 operation is possible by passing
float32 state but is only exercised by the property suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

__all__ = [
    "RESET_MODES",
    "RFParams",
    "RFState",
    "HRFState",
    "ALIFParams",
    "ALIFState",
    "LIParams",
    "rf_step",
    "brf_step",
    "bhrf_step",
    "alif_step",
    "li_step",
    "divergence_boundary",
    "divergence_boundary_grad",
    "bhrf_boundary",
    "bhrf_boundary_grad",
    "explicit_membrane",
]

RESET_MODES = ("none", "soft", "hard", "smooth")


def _as_f64(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def divergence_boundary(omega, delta: float):
    """Upper bound p(omega) on the dampening b_c for non-expanding dynamics.

    p(omega) = (-1 + sqrt(1 - (delta*omega)^2)) / delta. Always <= 0, with
    p -> 0 as omega -> 0. Defined only for omega*delta <= 1; beyond that the
    radicand is negative and no resonating solution exists, so a ValueError
    is raised.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    omega = _as_f64(omega, "omega")
    if np.any(omega < 0):
        raise ValueError("omega must be non-negative")
    if np.any(omega * delta > 1.0):
        raise ValueError(f"omega*delta exceeds 1 (delta={delta}); boundary undefined")
    return (-1.0 + np.sqrt(1.0 - (delta * omega) ** 2)) / delta


def divergence_boundary_grad(omega, delta: float):
    """d p(omega) / d omega = -delta*omega / sqrt(1 - (delta*omega)^2).

    Used by the backward pass to route gradient from the dampening into
    omega. Requires omega*delta < 1 strictly (the derivative diverges at
    the frequency ceiling).
    """
    omega = _as_f64(omega, "omega")
    t = (delta * omega) ** 2
    if np.any(t >= 1.0):
        raise ValueError("omega*delta must be < 1 for a finite boundary slope")
    return -delta * omega / np.sqrt(1.0 - t)


def bhrf_boundary(omega):
    """Dampening b_c giving sustained oscillation of the discrete harmonic
    resonator at delta = 0.01: p(omega) = omega^2 / 200."""
    omega = _as_f64(omega, "omega")
    if np.any(omega < 0):
        raise ValueError("omega must be non-negative")
    return omega**2 / 200.0


def bhrf_boundary_grad(omega):
    """d/d omega of the harmonic boundary: omega / 100."""
    return _as_f64(omega, "omega") / 100.0


@dataclass(frozen=True)
class RFParams:
    """Parameters shared by the RF / BRF family.

    omega and b_offset are per-neuron vectors (scalars broadcast).
    ``boundary`` selects the dampening base: b_c = p(omega) - b' when True
    (balanced), b_c = -b' when False (vanilla RF). ``reset_mode`` "smooth"
    folds the refractory trace into the dampening; "soft"/"hard" rewrite the
    membrane after a spike; "none" leaves it untouched. ``refractory``
    toggles the q term inside the threshold.
    """

    omega: np.ndarray
    b_offset: np.ndarray
    delta: float = 0.01
    theta_c: float = 1.0
    gamma: float = 0.9
    reset_mode: str = "smooth"
    refractory: bool = True
    boundary: bool = True

    def __post_init__(self):
        object.__setattr__(self, "omega", _as_f64(self.omega, "omega"))
        object.__setattr__(self, "b_offset", _as_f64(self.b_offset, "b_offset"))
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.reset_mode not in RESET_MODES:
            raise ValueError(f"reset_mode must be one of {RESET_MODES}")
        if self.boundary and np.any(self.omega * self.delta > 1.0):
            raise ValueError("omega*delta must not exceed 1 when the divergence boundary is active")

    def base_dampening(self) -> np.ndarray:
        """Constant part of the dampening: p(omega) - b' (balanced) or -b'."""
        if self.boundary:
            return divergence_boundary(self.omega, self.delta) - self.b_offset
        return -self.b_offset


@dataclass(frozen=True)
class RFState:
    """Complex membrane u and refractory trace q (same shape)."""

    u: np.ndarray
    q: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "RFState":
        return cls(np.zeros(shape, dtype=np.complex128), np.zeros(shape, dtype=np.float64))


@dataclass(frozen=True)
class HRFState:
    """Harmonic resonator state: velocity-like u, position-like v, trace q."""

    u: np.ndarray
    v: np.ndarray
    q: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "HRFState":
        z = np.zeros(shape, dtype=np.float64)
        return cls(z, z.copy(), z.copy())


def _check_state_finite(*arrays) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise ValueError("state contains non-finite values")


def _heaviside(v: np.ndarray) -> np.ndarray:
    return (v >= 0.0).astype(v.dtype)


def brf_step(state: RFState, x, params: RFParams):
    """One step of the balanced resonate-and-fire neuron.

    In order: b = p(omega) - b' - q_prev, membrane Euler update, threshold
    theta = theta_c + q_prev, spike z = step(Re(u') - theta), trace update
    q' = gamma*q_prev + z. The ablation switches follow the params:
    ``refractory`` off uses theta = theta_c, and a non-smooth ``reset_mode``
    drops the -q term from b and rewrites the membrane instead.

    Returns (new_state, spikes).
    """
    x = _as_f64(x, "input")
    _check_state_finite(state.u, state.q)
    q = state.q
    b = params.base_dampening()
    if params.reset_mode == "smooth":
        b = b - q
    u = state.u + params.delta * ((b + 1j * params.omega) * state.u + x)
    theta = params.theta_c + q if params.refractory else params.theta_c
    z = _heaviside(u.real - theta)
    if params.reset_mode == "soft":
        u = u - (1.0 + 1.0j) * z * theta
    elif params.reset_mode == "hard":
        u = (1.0 - (1.0 + 1.0j) * z) * u
    q_new = params.gamma * q + z
    return RFState(u, q_new), z


def rf_step(state: RFState, x, params: RFParams):
    """Vanilla resonate-and-fire step (no divergence boundary).

    Requires ``boundary=False`` and reset_mode in {none, soft, hard}; the
    dynamics are otherwise those of :func:`brf_step`.
    """
    if params.boundary:
        raise ValueError("rf_step expects boundary=False (use brf_step for the balanced model)")
    if params.reset_mode == "smooth":
        raise ValueError("rf_step expects reset_mode in {'none', 'soft', 'hard'}")
    return brf_step(state, x, params)


def bhrf_step(state: HRFState, x, params: RFParams):
    """One step of the balanced harmonic resonate-and-fire neuron.

    b = p_h(omega) - b' - q_prev with p_h(omega) = omega^2/200, then
    u' = u + delta*(-2*b*u - omega^2*v + x), v' = v + delta*u, spike on the
    real state u' against theta = theta_c + q_prev, q' = gamma*q_prev + z.
    """
    x = _as_f64(x, "input")
    _check_state_finite(state.u, state.v, state.q)
    q = state.q
    if params.boundary:
        base = bhrf_boundary(params.omega) - params.b_offset
    else:
        base = params.b_offset  # plain positive damping
    b = base - q if params.reset_mode == "smooth" else base
    u = state.u + params.delta * (-2.0 * b * state.u - params.omega**2 * state.v + x)
    v = state.v + params.delta * state.u
    theta = params.theta_c + q if params.refractory else params.theta_c
    z = _heaviside(u - theta)
    if params.reset_mode == "soft":
        u = u - z * theta
    elif params.reset_mode == "hard":
        u = (1.0 - z) * u
    q_new = params.gamma * q + z
    return HRFState(u, v, q_new), z


@dataclass(frozen=True)
class ALIFParams:
    """Adaptive LIF parameters. Decay constants are alpha = exp(-delta/tau_m)
    and rho = exp(-delta/tau_a); delta defaults to 1 (one step = 1 ms)."""

    tau_m: np.ndarray
    tau_a: np.ndarray
    theta_0: float = 0.01
    beta: float = 1.8
    delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tau_m", _as_f64(self.tau_m, "tau_m"))
        object.__setattr__(self, "tau_a", _as_f64(self.tau_a, "tau_a"))
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if np.any(self.tau_m <= 0) or np.any(self.tau_a <= 0):
            raise ValueError("tau_m and tau_a must be positive")

    @property
    def alpha(self) -> np.ndarray:
        return np.exp(-self.delta / self.tau_m)

    @property
    def rho(self) -> np.ndarray:
        return np.exp(-self.delta / self.tau_a)


@dataclass(frozen=True)
class ALIFState:
    """Membrane u, adaptation a, and the spike z emitted last step (the
    adaptation update consumes it one step delayed)."""

    u: np.ndarray
    a: np.ndarray
    z: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "ALIFState":
        z = np.zeros(shape, dtype=np.float64)
        return cls(z, z.copy(), z.copy())


def alif_step(state: ALIFState, x, params: ALIFParams):
    """One step of the adaptive leaky integrate-and-fire neuron.

    a' = rho*a + (1-rho)*z_prev, theta = theta_0 + beta*a', membrane
    u_mid = alpha*u + (1-alpha)*I, spike z = step(u_mid - theta), soft reset
    u' = u_mid - z*theta.
    """
    x = _as_f64(x, "input")
    _check_state_finite(state.u, state.a, state.z)
    rho = params.rho
    alpha = params.alpha
    a = rho * state.a + (1.0 - rho) * state.z
    theta = params.theta_0 + params.beta * a
    u_mid = alpha * state.u + (1.0 - alpha) * x
    z = _heaviside(u_mid - theta)
    u = u_mid - z * theta
    return ALIFState(u, a, z), z


@dataclass(frozen=True)
class LIParams:
    """Leaky-integrator readout: u' = alpha*u + (1-alpha)*I with
    alpha = exp(-delta/tau_out); no spiking, no reset."""

    tau_out: np.ndarray
    delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tau_out", _as_f64(self.tau_out, "tau_out"))
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if np.any(self.tau_out <= 0):
            raise ValueError("tau_out must be positive")

    @property
    def alpha(self) -> np.ndarray:
        return np.exp(-self.delta / self.tau_out)


def li_step(u, x, params: LIParams) -> np.ndarray:
    """One leaky-integrator step of the readout potentials."""
    x = _as_f64(x, "input")
    u = _as_f64(u, "state")
    alpha = params.alpha
    return alpha * u + (1.0 - alpha) * x


def explicit_membrane(t, b: float, omega: float, delta: float):
    """Closed-form subthreshold RF membrane after a unit impulse at t = delta.

    With u(0) = 0 and I(delta) = 1 injected once, the Euler recurrence
    collapses to the geometric form u(t) = delta*(1 + delta*(b + i*omega))
    ** (t/delta - 1). Serves as the independent oracle for rf_step with no
    reset. ``t`` must be a positive integer multiple of delta (arrays
    accepted); raises ValueError otherwise.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    t = np.asarray(t, dtype=np.float64)
    steps = t / delta
    k = np.rint(steps)
    if np.any(k < 1) or np.any(np.abs(steps - k) > 1e-9 * np.maximum(np.abs(steps), 1.0)):
        raise ValueError("t must be a positive integer multiple of delta")
    lam = 1.0 + delta * (b + 1j * omega)
    return delta * np.power(lam, k - 1.0)
