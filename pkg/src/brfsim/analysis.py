"""Instrumentation: frequency response, divergence boundaries, convergence
statistics, noise-robustness protocols, raster and parameter exports.

Everything here is read-only over weights/checkpoints and emits plain CSV
with a one-line header; plotting is left to external tooling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import bhrf_boundary, divergence_boundary
from .errors import ConfigError, DataError
from .learning import EvalResult, evaluate_dataset
from .network import NetworkConfig, NetworkWeights

__all__ = [
    "ResponseCurve",
    "frequency_response",
    "BoundaryCurve",
    "boundary_curve",
    "ConvergenceReport",
    "convergence_stats",
    "NoiseProtocol",
    "quantize_weights",
    "synaptic_noise",
    "evaluate_with_noise",
    "noise_sweep",
    "export_raster",
    "export_param_scatter",
    "write_csv",
]


def write_csv(path, header: str, rows) -> None:
    """Plain CSV with a single header line; floats use shortest repr."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


# --- frequency response -------------------------------------------------------


@dataclass
class ResponseCurve:
    grid: np.ndarray  # driven angular frequencies, rad/s, strictly increasing
    response: np.ndarray  # mean squared |u| per injected spike, per grid point
    omega: float
    b_offset: float
    delta: float
    duration: float
    kind: str


def default_response_grid() -> np.ndarray:
    return np.linspace(0.1, 100.0, 1000)


def frequency_response(
    omega: float,
    b_offset: float,
    *,
    delta: float = 0.001,
    duration: float = 20.0,
    grid: np.ndarray | None = None,
    kind: str = "brf",
) -> ResponseCurve:
    """Subthreshold resonance profile of one neuron.

    For every grid frequency f, unit spikes are injected in phase with the
    period T = 2*pi/f (the k-th spike lands on step round(k*T/delta), so
    the average drive frequency equals f exactly rather than being
    quantized to an integer period); spiking and reset are disabled. The
    recorded response is the mean squared membrane magnitude over the
    whole ``duration``, normalized per injected spike. Normalizing by the
    drive rate is required because the raw mean grows linearly with spike
    rate (the curve would ramp toward the grid ceiling and a b'=50 neuron
    would be anything but flat), and a quadratic mean is required because
    the per-spike *linear* |u| integral of an exponentially damped rotator
    is identical for isolated impulses and resonant trains; the power
    response keeps the resonance peak on top. The damping is the balanced
    b = p(omega) - b' for "brf", -b' for "rf".
    """
    grid = default_response_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise ConfigError("grid must be positive and strictly increasing")
    if grid[-1] > 1.0 / delta:
        raise ConfigError("grid frequency above the 1/delta ceiling")
    n_steps = int(round(duration / delta))
    g = grid.size

    # Per-step spike positions, grouped by step index.
    cols_parts = []
    steps_parts = []
    n_spikes = np.zeros(g)
    for j in range(g):
        period = 2.0 * np.pi / grid[j] / delta  # steps per drive period
        ks = np.arange(0, int(np.floor((n_steps - 1) / period)) + 1)
        idx = np.rint(ks * period).astype(np.int64)
        idx = idx[idx < n_steps]
        n_spikes[j] = idx.size
        steps_parts.append(idx)
        cols_parts.append(np.full(idx.size, j, dtype=np.int64))
    steps_all = np.concatenate(steps_parts)
    cols_all = np.concatenate(cols_parts)
    order = np.argsort(steps_all, kind="stable")
    steps_all = steps_all[order]
    cols_all = cols_all[order]
    counts = np.bincount(steps_all, minlength=n_steps)
    offsets = np.concatenate([[0], np.cumsum(counts)])

    acc = np.zeros(g)
    if kind in ("brf", "rf"):
        b = (divergence_boundary(omega, delta) if kind == "brf" else 0.0) - b_offset
        lam = 1.0 + delta * (b + 1j * omega)
        u = np.zeros(g, dtype=np.complex128)
        for s in range(n_steps):
            u = lam * u
            lo, hi = offsets[s], offsets[s + 1]
            if hi > lo:
                u[cols_all[lo:hi]] += delta
            acc += u.real * u.real + u.imag * u.imag
    elif kind == "bhrf":
        b = bhrf_boundary(omega) - b_offset
        om2 = omega * omega
        u = np.zeros(g)
        v = np.zeros(g)
        for s in range(n_steps):
            u_new = u + delta * (-2.0 * b * u - om2 * v)
            v = v + delta * u
            u = u_new
            lo, hi = offsets[s], offsets[s + 1]
            if hi > lo:
                u[cols_all[lo:hi]] += delta
            acc += u * u
    else:
        raise ConfigError(f"unknown neuron kind {kind!r} for frequency response")
    return ResponseCurve(
        grid=grid, response=acc / (n_steps * n_spikes), omega=float(omega), b_offset=float(b_offset),
        delta=delta, duration=duration, kind=kind,
    )


# --- divergence boundary curves -------------------------------------------------


@dataclass
class BoundaryCurve:
    delta: float
    omega: np.ndarray
    p: np.ndarray


def boundary_curve(deltas, omega_max: float = 100.0, num: int = 1001):
    """Tabulate p(omega) per delta, truncating each curve at omega = 1/delta."""
    curves = []
    for delta in np.atleast_1d(np.asarray(deltas, dtype=np.float64)):
        top = min(omega_max, 1.0 / delta)
        omega = np.linspace(0.0, top, num)
        curves.append(BoundaryCurve(delta=float(delta), omega=omega, p=divergence_boundary(omega, delta)))
    return curves


# --- convergence ------------------------------------------------------------------


@dataclass
class ConvergenceReport:
    """1-based epochs at which 95/98/100 % of the final accuracy is first
    reached, per run plus the across-run mean."""

    thresholds: tuple
    per_run: np.ndarray  # (n_runs, 3)
    mean: np.ndarray  # (3,)


def convergence_stats(accuracy_logs, thresholds=(0.95, 0.98, 1.0)) -> ConvergenceReport:
    rows = []
    for log in accuracy_logs:
        log = np.asarray(log, dtype=np.float64)
        if log.size == 0:
            raise DataError("empty accuracy log")
        final = log[-1]
        row = []
        for thr in thresholds:
            hit = np.nonzero(log >= thr * final)[0]
            row.append(int(hit[0]) + 1)
        rows.append(row)
    per_run = np.asarray(rows, dtype=np.int64)
    return ConvergenceReport(thresholds=tuple(thresholds), per_run=per_run, mean=per_run.mean(axis=0))


# --- noise robustness ---------------------------------------------------------------


@dataclass(frozen=True)
class NoiseProtocol:
    """One robustness protocol and its sweep grid.

    kind: quantization (bits), input_gaussian (sigma), spike_deletion (p),
    or synaptic_gaussian (sigma).
    """

    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in ("quantization", "input_gaussian", "spike_deletion", "synaptic_gaussian"):
            raise ConfigError(f"unknown noise protocol {self.kind!r}")
        for v in self.values:
            if self.kind == "quantization" and (int(v) != v or v < 1):
                raise ConfigError("quantization bits must be integers >= 1")
            if self.kind == "spike_deletion" and not 0.0 <= v <= 1.0:
                raise ConfigError("deletion probability must lie in [0, 1]")
            if self.kind in ("input_gaussian", "synaptic_gaussian") and v < 0:
                raise ConfigError("noise sigma must be non-negative")


def _quantize_array(arr: np.ndarray, bits: int) -> np.ndarray:
    if bits >= 53:  # grid below float64 resolution: exact identity
        return arr.copy()
    peak = np.abs(arr).max()
    if peak == 0.0:
        return arr.copy()
    levels = 2**bits
    step = 2.0 * peak / (levels - 1) if levels > 1 else 2.0 * peak
    if levels == 2:
        return np.where(arr >= 0, peak, -peak)
    return np.clip(np.round((arr + peak) / step), 0, levels - 1) * step - peak


def quantize_weights(weights: NetworkWeights, bits: int) -> NetworkWeights:
    """Map each synaptic weight tensor onto a symmetric uniform grid with
    2^bits levels over [-max|w|, max|w|] (per tensor). Neuron parameter
    vectors are untouched."""
    if bits < 1:
        raise ConfigError("bits must be >= 1")
    out = weights.copy()
    out.w_in_rec = _quantize_array(out.w_in_rec, bits)
    out.w_out = _quantize_array(out.w_out, bits)
    return out


def synaptic_noise(weights: NetworkWeights, sigma: float, rng: np.random.Generator) -> NetworkWeights:
    """One N(0, sigma) draw per synaptic weight, applied before evaluation."""
    out = weights.copy()
    if sigma > 0.0:
        out.w_in_rec = out.w_in_rec + rng.normal(0.0, sigma, size=out.w_in_rec.shape)
        out.w_out = out.w_out + rng.normal(0.0, sigma, size=out.w_out.shape)
    return out


def evaluate_with_noise(
    weights: NetworkWeights,
    config: NetworkConfig,
    inputs,
    labels,
    mode: str,
    kind: str,
    value,
    seed: int,
    *,
    batch_size: int = 128,
) -> EvalResult:
    """Evaluate one perturbed copy of the network; identity settings
    (sigma=0, p=0, bits>=53) reproduce the clean evaluation exactly."""
    kind_ids = {"quantization": 0, "input_gaussian": 1, "spike_deletion": 2, "synaptic_gaussian": 3}
    if kind not in kind_ids:
        raise ConfigError(f"unknown noise protocol {kind!r}")
    rng = np.random.default_rng([seed, kind_ids[kind]])
    w = weights
    input_sigma = 0.0
    drop_p = 0.0
    if kind == "quantization":
        w = quantize_weights(weights, int(value))
    elif kind == "synaptic_gaussian":
        w = synaptic_noise(weights, float(value), rng)
    elif kind == "input_gaussian":
        input_sigma = float(value)
    elif kind == "spike_deletion":
        drop_p = float(value)
    else:
        raise ConfigError(f"unknown noise protocol {kind!r}")
    return evaluate_dataset(
        w, config, inputs, labels, mode,
        batch_size=batch_size, input_sigma=input_sigma, spike_drop_p=drop_p,
        noise_rng=rng if (input_sigma > 0.0 or drop_p > 0.0) else None,
    )


def noise_sweep(
    weights,
    config,
    inputs,
    labels,
    mode: str,
    protocol: NoiseProtocol,
    seeds,
    *,
    batch_size: int = 128,
):
    """Rows (value, seed, accuracy, loss, sops, sops_per_step) over the
    protocol grid; each sweep point re-seeds its own RNG."""
    rows = []
    for value in protocol.values:
        for seed in seeds:
            res = evaluate_with_noise(
                weights, config, inputs, labels, mode, protocol.kind, value, int(seed),
                batch_size=batch_size,
            )
            rows.append((float(value), int(seed), res.accuracy, res.loss, res.sops, res.sops_per_step))
    return rows


# --- exports ---------------------------------------------------------------------


def export_raster(spikes: np.ndarray, omega: np.ndarray):
    """(t, rank) rows for every spike of one sample, neurons ranked by
    ascending angular frequency (rank is storage-order independent)."""
    spikes = np.asarray(spikes)
    omega = np.asarray(omega, dtype=np.float64)
    if spikes.ndim != 2 or spikes.shape[1] != omega.shape[0]:
        raise DataError("spikes must be (T, h) aligned with omega")
    order = np.argsort(omega, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    t_idx, n_idx = np.nonzero(spikes)
    rows = np.stack([t_idx, rank[n_idx]], axis=1)
    return rows[np.lexsort((rows[:, 1], rows[:, 0]))]


def export_param_scatter(init_weights: NetworkWeights, final_weights: NetworkWeights, delta: float):
    """(phase, omega, b_offset, b_c) rows for the initial and optimized
    parameter sets plus the boundary curve for overlay (phase='boundary',
    b_offset empty)."""
    rows = []
    for phase, w in (("init", init_weights), ("final", final_weights)):
        if w.omega is None:
            raise DataError("parameter scatter requires a resonator network")
        b_c = divergence_boundary(w.omega, delta) - w.b_offset
        for om, bo, bc in zip(w.omega, w.b_offset, b_c):
            rows.append((phase, float(om), float(bo), float(bc)))
    top = min(1.0 / delta, max(100.0, float(max(init_weights.omega.max(), final_weights.omega.max()))))
    for om in np.linspace(0.0, top, 512):
        rows.append(("boundary", float(om), "", float(divergence_boundary(om, delta))))
    return rows
