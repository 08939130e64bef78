"""Single-hidden-layer fully recurrent spiking network.

Architecture: a dense input+recurrent projection w_in_rec (h x (m+h)) feeds
h hidden spiking neurons (RF / BRF / BHRF / ALIF); their spikes z^t drive a
non-spiking leaky-integrator readout through w_out (C x h). The previous
step's spikes z^{t-1} re-enter the projection (one-step recurrent delay).
No biases exist anywhere, so zero input yields identically zero output.

``forward_sequence`` runs a whole batched sequence time-major and caches
every intermediate the backward pass reads. The forward is vectorized over
batch rows (rows never interact, so the result equals serial evaluation).
Non-finite detection happens once at the end of the sequence, not per step,
to keep the hot loop branch-light; on failure the cache is scanned for the
first offending step index.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import io

import numpy as np

from .dynamics import RESET_MODES, divergence_boundary, bhrf_boundary
from .errors import ConfigError, DataError, NumericError

__all__ = [
    "NEURON_KINDS",
    "NetworkConfig",
    "NetworkWeights",
    "ForwardCache",
    "Dist",
    "InitSpec",
    "forward_sequence",
    "init_parameters",
    "count_sops",
    "prune_recurrent",
    "save_checkpoint",
    "load_checkpoint",
    "smooth_spike",
    "smooth_spike_grad",
]

NEURON_KINDS = ("rf", "brf", "bhrf", "alif")

RESONATOR_KINDS = ("rf", "brf", "bhrf")


@dataclass(frozen=True)
class NetworkConfig:
    """Shapes, neuron kind, and the dynamics constants of one network.

    ``delta`` is the hidden-neuron integration step (seconds for the RF
    family, 1 for ALIF where one step is one millisecond); ``li_delta`` is
    the readout step, fixed at 1 so tau_out ~ 20 gives alpha ~ 0.95.
    """

    n_in: int
    n_hidden: int
    n_out: int
    neuron: str = "brf"
    delta: float = 0.01
    li_delta: float = 1.0
    theta_c: float = 1.0
    gamma: float = 0.9
    reset_mode: str = "smooth"
    refractory: bool = True
    boundary: bool = True
    alif_theta0: float = 0.01
    alif_beta: float = 1.8

    def __post_init__(self):
        if self.neuron not in NEURON_KINDS:
            raise ConfigError(f"unknown neuron kind {self.neuron!r}")
        if min(self.n_in, self.n_hidden, self.n_out) < 1:
            raise ConfigError("n_in, n_hidden and n_out must all be >= 1")
        if self.delta <= 0 or self.li_delta <= 0:
            raise ConfigError("delta and li_delta must be positive")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must lie in [0, 1)")
        if self.reset_mode not in RESET_MODES:
            raise ConfigError(f"reset_mode must be one of {RESET_MODES}")

    @property
    def is_resonator(self) -> bool:
        return self.neuron in RESONATOR_KINDS


# Fixed trainable-tensor order; the checkpoint layout and the optimizer
# slot order both follow it.
_PARAM_ORDER = {
    "rf": ("w_in_rec", "w_out", "omega", "b_offset", "tau_out"),
    "brf": ("w_in_rec", "w_out", "omega", "b_offset", "tau_out"),
    "bhrf": ("w_in_rec", "w_out", "omega", "b_offset", "tau_out"),
    "alif": ("w_in_rec", "w_out", "tau_m", "tau_a", "tau_out"),
}


@dataclass
class NetworkWeights:
    """All trainable tensors of one network; no bias vectors exist."""

    w_in_rec: np.ndarray  # (h, m+h)
    w_out: np.ndarray  # (C, h)
    tau_out: np.ndarray  # (C,)
    omega: np.ndarray | None = None  # (h,) resonator kinds
    b_offset: np.ndarray | None = None  # (h,)
    tau_m: np.ndarray | None = None  # (h,) alif
    tau_a: np.ndarray | None = None  # (h,)

    def param_names(self) -> tuple:
        if self.omega is not None:
            return _PARAM_ORDER["brf"]
        return _PARAM_ORDER["alif"]

    def trainable(self) -> dict:
        """Name -> array view of every trainable tensor, in fixed order."""
        return {name: getattr(self, name) for name in self.param_names()}

    def copy(self) -> "NetworkWeights":
        def cp(a):
            return None if a is None else a.copy()

        return NetworkWeights(
            w_in_rec=self.w_in_rec.copy(),
            w_out=self.w_out.copy(),
            tau_out=self.tau_out.copy(),
            omega=cp(self.omega),
            b_offset=cp(self.b_offset),
            tau_m=cp(self.tau_m),
            tau_a=cp(self.tau_a),
        )


@dataclass(frozen=True)
class Dist:
    """Initialization distribution: uniform(a,b), normal(mu,sigma),
    sigmoid_normal(mu,sigma) (readout decay drawn through a sigmoid), or
    constant(v)."""

    kind: str
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "normal", "sigmoid_normal", "constant"):
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "uniform" and not self.b > self.a:
            raise ConfigError(f"uniform bounds must satisfy a < b, got ({self.a}, {self.b})")
        if self.kind in ("normal", "sigmoid_normal") and self.b < 0:
            raise ConfigError("normal sigma must be non-negative")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size=n)
        if self.kind == "normal":
            return rng.normal(self.a, self.b, size=n)
        if self.kind == "sigmoid_normal":
            return 1.0 / (1.0 + np.exp(-rng.normal(self.a, self.b, size=n)))
        return np.full(n, self.a, dtype=np.float64)

    @classmethod
    def parse(cls, text: str) -> "Dist":
        """Parse "uniform(15,50)" / "normal(20,5)" / "sigmoid_normal(0,0.1)"
        / "constant(1.0)"."""
        text = text.strip()
        if not text.endswith(")") or "(" not in text:
            raise ConfigError(f"cannot parse distribution {text!r}")
        kind, _, rest = text.partition("(")
        parts = [p for p in rest[:-1].split(",") if p.strip()]
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"cannot parse distribution {text!r}") from exc
        kind = kind.strip()
        if kind == "constant":
            if len(vals) != 1:
                raise ConfigError("constant(...) takes exactly one value")
            return cls(kind, vals[0])
        if len(vals) != 2:
            raise ConfigError(f"{kind}(...) takes exactly two values")
        return cls(kind, vals[0], vals[1])

    def __str__(self) -> str:
        if self.kind == "constant":
            return f"constant({self.a:g})"
        return f"{self.kind}({self.a:g},{self.b:g})"


@dataclass(frozen=True)
class InitSpec:
    """Which distribution initializes each neuron parameter vector."""

    omega: Dist | None = None
    b_offset: Dist | None = None
    tau_m: Dist | None = None
    tau_a: Dist | None = None
    tau_out: Dist = Dist("normal", 20.0, 5.0)


_TAU_FLOOR = 0.1  # normal draws are clipped here to keep tau > 0


def init_parameters(config: NetworkConfig, init: InitSpec, seed: int) -> NetworkWeights:
    """Draw all trainable tensors. Deterministic given the seed.

    Weight matrices use U(-1/sqrt(fan_in), 1/sqrt(fan_in)); neuron
    parameters follow ``init``. Draw order is fixed: w_in_rec, w_out, then
    the neuron vectors in trainable order.
    """
    m, h, c = config.n_in, config.n_hidden, config.n_out
    rng = np.random.default_rng(seed)
    k_in = 1.0 / np.sqrt(m + h)
    k_out = 1.0 / np.sqrt(h)
    w_in_rec = rng.uniform(-k_in, k_in, size=(h, m + h))
    w_out = rng.uniform(-k_out, k_out, size=(c, h))

    def tau_like(dist: Dist, n: int) -> np.ndarray:
        if dist.kind == "sigmoid_normal":
            alpha = dist.sample(rng, n)
            return -config.li_delta / np.log(alpha)
        return np.maximum(dist.sample(rng, n), _TAU_FLOOR)

    if config.is_resonator:
        if init.omega is None or init.b_offset is None:
            raise ConfigError("resonator networks need omega and b_offset init distributions")
        omega = init.omega.sample(rng, h)
        b_offset = init.b_offset.sample(rng, h)
        if np.any(omega < 0):
            raise ConfigError("drawn omega must be non-negative")
        if config.neuron != "bhrf" and config.boundary and np.any(omega * config.delta > 1.0):
            raise ConfigError("omega init exceeds the 1/delta frequency ceiling")
        tau_out = tau_like(init.tau_out, c)
        return NetworkWeights(w_in_rec=w_in_rec, w_out=w_out, tau_out=tau_out, omega=omega, b_offset=b_offset)

    if init.tau_m is None or init.tau_a is None:
        raise ConfigError("alif networks need tau_m and tau_a init distributions")
    tau_m = tau_like(init.tau_m, h)
    tau_a = tau_like(init.tau_a, h)
    tau_out = tau_like(init.tau_out, c)
    return NetworkWeights(w_in_rec=w_in_rec, w_out=w_out, tau_out=tau_out, tau_m=tau_m, tau_a=tau_a)


def smooth_spike(v: np.ndarray, width: float) -> np.ndarray:
    """Smooth saturating stand-in for the step function (differentiable-test
    mode): logistic in v with the given width."""
    return 1.0 / (1.0 + np.exp(-v / width))


def smooth_spike_grad(v: np.ndarray, width: float) -> np.ndarray:
    s = smooth_spike(v, width)
    return s * (1.0 - s) / width


@dataclass
class ForwardCache:
    """Everything the backward pass reads, time-major.

    State arrays carry T+1 entries (index 0 is the initial state); per-step
    arrays carry T. ``z`` holds fired spikes; ``z_out`` the transmitted ones
    (identical object unless spike deletion is active).
    """

    config: NetworkConfig
    weights: "NetworkWeights"
    inputs: np.ndarray  # (T, B, m)
    spike_fn: str
    smooth_width: float
    u: np.ndarray  # (T+1, B, h) complex for rf/brf, real for bhrf/alif
    z: np.ndarray  # (T+1, B, h)
    z_out: np.ndarray  # (T+1, B, h)
    vsp: np.ndarray  # (T, B, h) spike argument
    y: np.ndarray  # (T+1, B, C) readout potentials
    r: np.ndarray  # (T, B, C) readout drive
    q: np.ndarray | None = None  # (T+1, B, h) rf family
    v: np.ndarray | None = None  # (T+1, B, h) bhrf position state
    a: np.ndarray | None = None  # (T+1, B, h) alif adaptation
    u_pre: np.ndarray | None = None  # (T, B, h) pre-reset membrane (soft/hard)

    @property
    def seq_len(self) -> int:
        return self.inputs.shape[0]

    def state_at(self, t: int) -> dict:
        """State snapshot before step ``t`` (0 <= t <= T); feeding it back as
        ``init_state`` reproduces the remaining steps bit-exactly."""
        snap = {"u": self.u[t].copy(), "z": self.z[t].copy(), "y": self.y[t].copy()}
        if self.q is not None:
            snap["q"] = self.q[t].copy()
        if self.v is not None:
            snap["v"] = self.v[t].copy()
        if self.a is not None:
            snap["a"] = self.a[t].copy()
        return snap


def _spike(v: np.ndarray, spike_fn: str, width: float) -> np.ndarray:
    if spike_fn == "hard":
        return (v >= 0.0).astype(np.float64)
    return smooth_spike(v, width)


def forward_sequence(
    inputs: np.ndarray,
    weights: NetworkWeights,
    config: NetworkConfig,
    *,
    init_state: dict | None = None,
    spike_fn: str = "hard",
    smooth_width: float = 0.5,
    spike_drop: tuple | None = None,
):
    """Run a batched sequence through the network.

    Args:
        inputs: time-major (T, B, m) float array.
        init_state: optional state snapshot (see ForwardCache.state_at);
            zeros otherwise.
        spike_fn: "hard" (step function) or "smooth" (logistic stand-in used
            by the gradient-check mode).
        spike_drop: optional (p, rng) spike-deletion hook; each fired spike
            is removed from the transmitted vector with probability p, every
            step, independently. The neuron's own refractory trace keeps the
            true spike.

    Returns:
        (readout (T, B, C), transmitted spikes (T, B, h), ForwardCache)

    Raises:
        DataError on shape mismatch, NumericError (with the step index) if
        the sequence produced non-finite values.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 3 or inputs.shape[0] < 1:
        raise DataError(f"inputs must be (T, B, m) with T >= 1, got shape {inputs.shape}")
    T, B, m = inputs.shape
    h, c = config.n_hidden, config.n_out
    if m != config.n_in:
        raise DataError(f"input dimension {m} != configured n_in {config.n_in}")
    if weights.w_in_rec.shape != (h, m + h):
        raise DataError(f"w_in_rec shape {weights.w_in_rec.shape} != {(h, m + h)}")
    if weights.w_out.shape != (c, h):
        raise DataError(f"w_out shape {weights.w_out.shape} != {(c, h)}")
    if spike_fn not in ("hard", "smooth"):
        raise ConfigError(f"unknown spike_fn {spike_fn!r}")

    w_in = weights.w_in_rec[:, :m]
    w_rec = weights.w_in_rec[:, m:]
    # Input projection for every step in one matmul; the recurrent part is
    # inherently sequential.
    pre = (inputs.reshape(T * B, m) @ w_in.T).reshape(T, B, h)

    drop_masks = None
    if spike_drop is not None:
        p, rng = spike_drop
        if not 0.0 <= p <= 1.0:
            raise ConfigError("spike deletion probability must lie in [0, 1]")
        if p > 0.0:
            drop_masks = (rng.random((T, B, h)) >= p).astype(np.float64)

    z = np.zeros((T + 1, B, h))
    z_out = z if drop_masks is None else np.zeros((T + 1, B, h))
    vsp = np.empty((T, B, h))
    y = np.zeros((T + 1, B, c))
    delta = config.delta

    def init_get(key, arr):
        if init_state is not None and key in init_state:
            arr[0] = init_state[key]

    init_get("z", z)
    if z_out is not z:
        init_get("z", z_out)
    init_get("y", y)

    if config.is_resonator and config.neuron != "bhrf":
        u = np.zeros((T + 1, B, h), dtype=np.complex128)
        q = np.zeros((T + 1, B, h))
        init_get("u", u)
        init_get("q", q)
        if config.boundary:
            base = divergence_boundary(weights.omega, delta) - weights.b_offset
        else:
            base = -weights.b_offset
        iw = 1j * weights.omega
        smooth_reset = config.reset_mode == "smooth"
        rewrite = config.reset_mode in ("soft", "hard")
        u_pre = np.empty((T, B, h), dtype=np.complex128) if rewrite else None
        for t in range(T):
            x = pre[t] + z_out[t] @ w_rec.T
            qc = q[t]
            b = base - qc if smooth_reset else base
            uc = u[t]
            u_new = uc + delta * ((b + iw) * uc + x)
            theta = config.theta_c + qc if config.refractory else config.theta_c
            v = u_new.real - theta
            zf = _spike(v, spike_fn, smooth_width)
            if rewrite:
                u_pre[t] = u_new
                if config.reset_mode == "soft":
                    u_new = u_new - (1.0 + 1.0j) * zf * theta
                else:
                    u_new = (1.0 - (1.0 + 1.0j) * zf) * u_new
            u[t + 1] = u_new
            vsp[t] = v
            z[t + 1] = zf
            q[t + 1] = config.gamma * qc + zf
            if drop_masks is not None:
                z_out[t + 1] = zf * drop_masks[t]
        cache = ForwardCache(
            config=config, weights=weights, inputs=inputs, spike_fn=spike_fn, smooth_width=smooth_width,
            u=u, z=z, z_out=z_out, vsp=vsp, y=y, r=np.empty((T, B, c)), q=q, u_pre=u_pre,
        )
        final_state = u[T]
    elif config.neuron == "bhrf":
        u = np.zeros((T + 1, B, h))
        v_pos = np.zeros((T + 1, B, h))
        q = np.zeros((T + 1, B, h))
        init_get("u", u)
        init_get("v", v_pos)
        init_get("q", q)
        if config.boundary:
            base = bhrf_boundary(weights.omega) - weights.b_offset
        else:
            base = weights.b_offset.astype(np.float64)  # plain positive damping
        om2 = weights.omega**2
        smooth_reset = config.reset_mode == "smooth"
        rewrite = config.reset_mode in ("soft", "hard")
        u_pre = np.empty((T, B, h)) if rewrite else None
        for t in range(T):
            x = pre[t] + z_out[t] @ w_rec.T
            qc = q[t]
            b = base - qc if smooth_reset else base
            uc = u[t]
            u_new = uc + delta * (-2.0 * b * uc - om2 * v_pos[t] + x)
            v_pos[t + 1] = v_pos[t] + delta * uc
            theta = config.theta_c + qc if config.refractory else config.theta_c
            vv = u_new - theta
            zf = _spike(vv, spike_fn, smooth_width)
            if rewrite:
                u_pre[t] = u_new
                u_new = u_new - zf * theta if config.reset_mode == "soft" else (1.0 - zf) * u_new
            u[t + 1] = u_new
            vsp[t] = vv
            z[t + 1] = zf
            q[t + 1] = config.gamma * qc + zf
            if drop_masks is not None:
                z_out[t + 1] = zf * drop_masks[t]
        cache = ForwardCache(
            config=config, weights=weights, inputs=inputs, spike_fn=spike_fn, smooth_width=smooth_width,
            u=u, z=z, z_out=z_out, vsp=vsp, y=y, r=np.empty((T, B, c)), q=q, v=v_pos, u_pre=u_pre,
        )
        final_state = u[T]
    else:  # alif
        u = np.zeros((T + 1, B, h))
        a = np.zeros((T + 1, B, h))
        init_get("u", u)
        init_get("a", a)
        alpha = np.exp(-delta / weights.tau_m)
        rho = np.exp(-delta / weights.tau_a)
        for t in range(T):
            x = pre[t] + z_out[t] @ w_rec.T
            a_new = rho * a[t] + (1.0 - rho) * z[t]
            theta = config.alif_theta0 + config.alif_beta * a_new
            u_mid = alpha * u[t] + (1.0 - alpha) * x
            vv = u_mid - theta
            zf = _spike(vv, spike_fn, smooth_width)
            u[t + 1] = u_mid - zf * theta
            a[t + 1] = a_new
            vsp[t] = vv
            z[t + 1] = zf
            if drop_masks is not None:
                z_out[t + 1] = zf * drop_masks[t]
        cache = ForwardCache(
            config=config, weights=weights, inputs=inputs, spike_fn=spike_fn, smooth_width=smooth_width,
            u=u, z=z, z_out=z_out, vsp=vsp, y=y, r=np.empty((T, B, c)), a=a,
        )
        final_state = u[T]

    # Readout: one stacked matmul, then the sequential LI scan (C is small).
    r = (z_out[1:].reshape(T * B, h) @ weights.w_out.T).reshape(T, B, c)
    cache.r = r
    alpha_out = np.exp(-config.li_delta / weights.tau_out)
    one_minus = 1.0 - alpha_out
    for t in range(T):
        y[t + 1] = alpha_out * y[t] + one_minus * r[t]

    if not (np.all(np.isfinite(y[T])) and np.all(np.isfinite(final_state))):
        bad = T - 1
        for t in range(T):
            if not (np.all(np.isfinite(y[t + 1])) and np.all(np.isfinite(u[t + 1]))):
                bad = t
                break
        raise NumericError(f"non-finite values produced at step {bad}", step=bad)

    return y[1:], z_out[1:], cache


def count_sops(z_sum: float, n_samples: int, seq_len: int):
    """Spiking operations per sample and per sequence step.

    SOPs = z_sum / N with z_sum the total number of emitted spikes over the
    dataset; SOPs/step divides by the sequence length.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if seq_len < 1:
        raise ValueError("seq_len must be >= 1")
    sops = z_sum / n_samples
    return sops, sops / seq_len


def prune_recurrent(weights: NetworkWeights, p: float, seed: int) -> NetworkWeights:
    """Zero each hidden-to-hidden entry of w_in_rec independently with
    probability p. Input columns and w_out are untouched; p=1 removes the
    whole recurrent block."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("pruning probability must lie in [0, 1]")
    out = weights.copy()
    if p == 0.0:
        return out
    h = out.w_out.shape[1]
    m = out.w_in_rec.shape[1] - h
    mask = np.random.default_rng(seed).random((h, h)) >= p
    out.w_in_rec[:, m:] *= mask
    return out


# --- checkpoint file format -------------------------------------------------
#
# magic "BRFNET01", then a little-endian uint32 header length, then the
# UTF-8 header: "key=value" lines (sorted) describing the NetworkConfig and
# shapes, then the trainable tensors as raw little-endian float64 in fixed
# order (w_in_rec row-major, w_out row-major, parameter vectors).

_MAGIC = b"BRFNET01"
_CKPT_VERSION = 1


def _config_to_items(config: NetworkConfig) -> dict:
    return {
        "version": _CKPT_VERSION,
        "neuron": config.neuron,
        "n_in": config.n_in,
        "n_hidden": config.n_hidden,
        "n_out": config.n_out,
        "delta": repr(config.delta),
        "li_delta": repr(config.li_delta),
        "theta_c": repr(config.theta_c),
        "gamma": repr(config.gamma),
        "reset_mode": config.reset_mode,
        "refractory": int(config.refractory),
        "boundary": int(config.boundary),
        "alif_theta0": repr(config.alif_theta0),
        "alif_beta": repr(config.alif_beta),
    }


def save_checkpoint(path, weights: NetworkWeights, config: NetworkConfig) -> None:
    items = _config_to_items(config)
    header = "".join(f"{k}={items[k]}\n" for k in sorted(items)).encode("utf-8")
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(np.array(len(header), dtype="<u4").tobytes())
    buf.write(header)
    for name in weights.param_names():
        arr = weights.trainable()[name]
        buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    with open(path, "wb") as f:
        f.write(buf.getvalue())


def load_checkpoint(path):
    """Read a checkpoint; returns (weights, config)."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:8] != _MAGIC:
        raise DataError(f"{path}: bad checkpoint magic")
    hlen = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    header = raw[12 : 12 + hlen].decode("utf-8")
    fields = {}
    for line in header.splitlines():
        k, _, v = line.partition("=")
        fields[k] = v
    if int(fields.get("version", -1)) != _CKPT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {fields.get('version')}")
    config = NetworkConfig(
        n_in=int(fields["n_in"]),
        n_hidden=int(fields["n_hidden"]),
        n_out=int(fields["n_out"]),
        neuron=fields["neuron"],
        delta=float(fields["delta"]),
        li_delta=float(fields["li_delta"]),
        theta_c=float(fields["theta_c"]),
        gamma=float(fields["gamma"]),
        reset_mode=fields["reset_mode"],
        refractory=bool(int(fields["refractory"])),
        boundary=bool(int(fields["boundary"])),
        alif_theta0=float(fields["alif_theta0"]),
        alif_beta=float(fields["alif_beta"]),
    )
    m, h, c = config.n_in, config.n_hidden, config.n_out
    shapes = {
        "w_in_rec": (h, m + h),
        "w_out": (c, h),
        "omega": (h,),
        "b_offset": (h,),
        "tau_m": (h,),
        "tau_a": (h,),
        "tau_out": (c,),
    }
    offset = 12 + hlen
    arrays = {}
    for name in _PARAM_ORDER[config.neuron]:
        shape = shapes[name]
        n = int(np.prod(shape))
        end = offset + 8 * n
        if end > len(raw):
            raise DataError(f"{path}: truncated checkpoint")
        arrays[name] = np.frombuffer(raw[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
        offset = end
    if offset != len(raw):
        raise DataError(f"{path}: trailing bytes in checkpoint")
    weights = NetworkWeights(
        w_in_rec=arrays["w_in_rec"],
        w_out=arrays["w_out"],
        tau_out=arrays["tau_out"],
        omega=arrays.get("omega"),
        b_offset=arrays.get("b_offset"),
        tau_m=arrays.get("tau_m"),
        tau_a=arrays.get("tau_a"),
    )
    return weights, config
