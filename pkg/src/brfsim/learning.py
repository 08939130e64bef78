"""Losses, surrogate gradient, and hand-written BPTT for all neuron kinds.

The backward pass is reverse-mode accumulation through the cached forward:
readout LI recurrence and w_out, the spike nonlinearity (whose derivative
is the multi-Gaussian surrogate in hard mode, or the exact derivative of
the logistic stand-in in smooth mode), the membrane recurrences (complex
dynamics handled as the real pair), the refractory trace q, the reset
rewrites, the dampening chain through the divergence boundary p(omega),
and finally w_in_rec. Truncated BPTT severs every state gradient at window
boundaries while the forward (and hence the cached values) is unaffected.

Gradients are reduced over the batch in a single fixed-order vectorized
sum, so results are reproducible bit-for-bit on a given machine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import divergence_boundary, divergence_boundary_grad, bhrf_boundary_grad
from .errors import ConfigError, DataError, NumericError
from .network import (
    ForwardCache,
    NetworkConfig,
    NetworkWeights,
    count_sops,
    forward_sequence,
    smooth_spike_grad,
)

__all__ = [
    "SurrogateParams",
    "LOSS_MODES",
    "multi_gaussian_surrogate",
    "log_softmax",
    "loss_forward",
    "loss_grad",
    "predict",
    "accuracy",
    "GradientSet",
    "backward_from_output_grad",
    "backward_sequence",
    "finite_difference_check",
    "GradCheckReport",
    "EvalResult",
    "evaluate_dataset",
]


@dataclass(frozen=True)
class SurrogateParams:
    """Multi-Gaussian pseudo-derivative: (1+h)*g(v,0,sigma) - 2h*g(v,0,s*sigma).

    The negative side lobes are intentional; they keep gradient flowing for
    neurons far from threshold.
    """

    h: float = 0.15
    s: float = 6.0
    sigma: float = 0.5

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.s <= 1:
            raise ConfigError("s must exceed 1")


def multi_gaussian_surrogate(v, params: SurrogateParams = SurrogateParams()) -> np.ndarray:
    """Pseudo-derivative of the step function at membrane-minus-threshold v."""
    v = np.asarray(v, dtype=np.float64)
    narrow = np.exp(-0.5 * (v / params.sigma) ** 2)
    wide = np.exp(-0.5 * (v / (params.s * params.sigma)) ** 2)
    return (1.0 + params.h) * narrow - 2.0 * params.h * wide


LOSS_MODES = ("mean_sequence_nll", "label_last_nll", "label_last_ce")


def log_softmax(y: np.ndarray) -> np.ndarray:
    shifted = y - y.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _check_targets(readout: np.ndarray, targets: np.ndarray, mode: str):
    if mode not in LOSS_MODES:
        raise ConfigError(f"unknown loss mode {mode!r}")
    T, B, C = readout.shape
    targets = np.asarray(targets)
    if not np.issubdtype(targets.dtype, np.integer):
        raise DataError("targets must be integer class indices")
    if targets.ndim == 2:
        if mode != "mean_sequence_nll":
            raise ConfigError("per-step labels require the mean_sequence_nll mode")
        if targets.shape != (T, B):
            raise DataError(f"per-step targets must be (T, B) = {(T, B)}, got {targets.shape}")
    elif targets.ndim != 1 or targets.shape[0] != B:
        raise DataError(f"targets must be (B,) or (T, B), got {targets.shape}")
    if targets.size and (targets.min() < 0 or targets.max() >= C):
        raise DataError(f"class index out of range [0, {C})")
    return targets


def loss_forward(readout: np.ndarray, targets, mode: str) -> float:
    """NLL of the log-softmax readout, averaged over the batch; the
    mean_sequence mode additionally averages over time, label_last uses only
    the final step. label_last_ce is numerically the same criterion applied
    to raw logits."""
    readout = np.asarray(readout, dtype=np.float64)
    targets = _check_targets(readout, targets, mode)
    T, B, C = readout.shape
    if mode == "mean_sequence_nll":
        ls = log_softmax(readout)
        if targets.ndim == 1:
            picked = ls[:, np.arange(B), targets]  # (T, B)
        else:
            picked = np.take_along_axis(ls, targets[:, :, None], axis=2)[:, :, 0]
        return float(-picked.mean())
    ls = log_softmax(readout[T - 1])
    return float(-ls[np.arange(B), targets].mean())


def loss_grad(readout: np.ndarray, targets, mode: str):
    """Returns (loss, dloss/dreadout) with the batch/time averaging folded in."""
    readout = np.asarray(readout, dtype=np.float64)
    targets = _check_targets(readout, targets, mode)
    T, B, C = readout.shape
    gy = np.zeros_like(readout)
    if mode == "mean_sequence_nll":
        ls = log_softmax(readout)
        p = np.exp(ls)
        if targets.ndim == 1:
            picked = ls[:, np.arange(B), targets]
            onehot_rows = (np.arange(C)[None, :] == targets[:, None]).astype(np.float64)  # (B, C)
            gy = (p - onehot_rows[None, :, :]) / (T * B)
        else:
            picked = np.take_along_axis(ls, targets[:, :, None], axis=2)[:, :, 0]
            onehot = np.zeros_like(p)
            np.put_along_axis(onehot, targets[:, :, None], 1.0, axis=2)
            gy = (p - onehot) / (T * B)
        return float(-picked.mean()), gy
    ls = log_softmax(readout[T - 1])
    p = np.exp(ls)
    onehot = (np.arange(C)[None, :] == targets[:, None]).astype(np.float64)
    gy[T - 1] = (p - onehot) / B
    return float(-ls[np.arange(B), targets].mean()), gy


def predict(readout: np.ndarray, mode: str, per_step: bool = False) -> np.ndarray:
    """Class predictions consistent with the loss: last-step argmax for
    label_last modes, argmax of the time-averaged log-softmax for
    mean_sequence with sequence labels, per-step argmax for step labels."""
    readout = np.asarray(readout, dtype=np.float64)
    if mode.startswith("label_last"):
        return readout[-1].argmax(axis=-1)
    if per_step:
        return readout.argmax(axis=-1)  # (T, B)
    return log_softmax(readout).mean(axis=0).argmax(axis=-1)


def accuracy(readout: np.ndarray, targets, mode: str) -> float:
    targets = np.asarray(targets)
    preds = predict(readout, mode, per_step=targets.ndim == 2)
    return float((preds == targets).mean())


@dataclass
class GradientSet:
    """Gradients matching every trainable tensor in NetworkWeights."""

    w_in_rec: np.ndarray
    w_out: np.ndarray
    tau_out: np.ndarray
    omega: np.ndarray | None = None
    b_offset: np.ndarray | None = None
    tau_m: np.ndarray | None = None
    tau_a: np.ndarray | None = None

    def trainable(self) -> dict:
        names = ("w_in_rec", "w_out", "omega", "b_offset", "tau_out") if self.omega is not None else (
            "w_in_rec", "w_out", "tau_m", "tau_a", "tau_out")
        return {name: getattr(self, name) for name in names}

    def check_finite(self) -> None:
        for name, arr in self.trainable().items():
            if not np.all(np.isfinite(arr)):
                raise NumericError(f"non-finite gradient in {name}")


def _window(truncation, T: int) -> int:
    if truncation is None or truncation <= 0 or truncation >= T:
        return T
    return int(truncation)


def backward_from_output_grad(
    cache: ForwardCache,
    gy: np.ndarray,
    *,
    surrogate: SurrogateParams = SurrogateParams(),
    truncation: int | None = None,
    detach_state_spikes: bool = False,
) -> GradientSet:
    """Reverse-mode pass from an arbitrary readout gradient gy (T, B, C).

    ``detach_state_spikes`` severs the surrogate path through the
    state-side uses of z (the q/adaptation updates and the reset rewrites);
    the transmission path (recurrent drive and readout) always carries it.
    """
    cfg = cache.config
    w = cache.weights
    inputs = cache.inputs
    T, B, m = inputs.shape
    h, c = cfg.n_hidden, cfg.n_out
    gy = np.asarray(gy, dtype=np.float64)
    if gy.shape != (T, B, c):
        raise DataError(f"gy must have shape {(T, B, c)}, got {gy.shape}")
    K = _window(truncation, T)

    # --- readout: y[t+1] = alpha*y[t] + (1-alpha)*r[t] -----------------------
    alpha_out = np.exp(-cfg.li_delta / w.tau_out)
    one_minus = 1.0 - alpha_out
    gr = np.empty((T, B, c))
    galpha_out = np.zeros(c)
    carry = np.zeros((B, c))
    for t in range(T - 1, -1, -1):
        tot = gy[t] + carry
        gr[t] = one_minus * tot
        galpha_out += ((cache.y[t] - cache.r[t]) * tot).sum(axis=0)
        carry = alpha_out * tot
        if t % K == 0:
            carry = np.zeros((B, c))
    g_tau_out = galpha_out * alpha_out * cfg.li_delta / w.tau_out**2

    z_hist = cache.z_out  # transmitted spikes drive both readout and recurrence
    gr_flat = gr.reshape(T * B, c)
    g_w_out = gr_flat.T @ z_hist[1:].reshape(T * B, h)
    gz_buf = (gr_flat @ w.w_out).reshape(T, B, h).copy()

    # --- spike-argument pseudo/exact derivative -------------------------------
    if cache.spike_fn == "hard":
        sg = multi_gaussian_surrogate(cache.vsp, surrogate)
    else:
        sg = smooth_spike_grad(cache.vsp, cache.smooth_width)

    w_rec = w.w_in_rec[:, m:]
    delta = cfg.delta
    ga_all = np.empty((T, B, h))

    if cfg.is_resonator and cfg.neuron != "bhrf":
        smooth_reset = cfg.reset_mode == "smooth"
        rewrite = cfg.reset_mode in ("soft", "hard")
        if cfg.boundary:
            base = divergence_boundary(w.omega, delta) - w.b_offset
            dbase_domega = divergence_boundary_grad(w.omega, delta)
        else:
            base = -w.b_offset
            dbase_domega = np.zeros(h)
        gu_re = np.zeros((B, h))
        gu_im = np.zeros((B, h))
        gq = np.zeros((B, h))
        g_omega = np.zeros(h)
        g_b_offset = np.zeros(h)
        for t in range(T - 1, -1, -1):
            gz = gz_buf[t]
            if not detach_state_spikes:
                gz = gz + gq  # q[t+1] = gamma*q[t] + z[t+1]
            gq_prev = cfg.gamma * gq
            theta = cfg.theta_c + cache.q[t] if cfg.refractory else cfg.theta_c
            if rewrite:
                upre = cache.u_pre[t]
                zt = cache.z[t + 1]
                if cfg.reset_mode == "soft":
                    gsum = gu_re + gu_im
                    if not detach_state_spikes:
                        gz = gz - theta * gsum
                    if cfg.refractory:
                        gq_prev = gq_prev - zt * gsum
                else:  # hard: u_re' = (1-z)ur + z*ui ; u_im' = (1-z)ui - z*ur
                    if not detach_state_spikes:
                        gz = gz + gu_re * (upre.imag - upre.real) - gu_im * (upre.real + upre.imag)
                    gu_re, gu_im = gu_re * (1.0 - zt) - gu_im * zt, gu_re * zt + gu_im * (1.0 - zt)
            gv = gz * sg[t]
            gu_re = gu_re + gv
            if cfg.refractory:
                gq_prev = gq_prev - gv
            ur = cache.u[t].real
            ui = cache.u[t].imag
            ga = delta * gu_re
            ga_all[t] = ga
            gb = delta * (gu_re * ur + gu_im * ui)
            g_omega += delta * (gu_im * ur - gu_re * ui).sum(axis=0)
            b = base - cache.q[t] if smooth_reset else base
            one_b = 1.0 + delta * b
            dom = delta * w.omega
            gu_re, gu_im = gu_re * one_b + gu_im * dom, gu_im * one_b - gu_re * dom
            gb_sum = gb.sum(axis=0)
            g_b_offset -= gb_sum
            g_omega += gb_sum * dbase_domega
            if smooth_reset:
                gq_prev = gq_prev - gb
            gq = gq_prev
            if t % K == 0:
                gu_re = np.zeros((B, h))
                gu_im = np.zeros((B, h))
                gq = np.zeros((B, h))
            else:
                gz_buf[t - 1] += ga @ w_rec
        neuron_grads = {"omega": g_omega, "b_offset": g_b_offset}
    elif cfg.neuron == "bhrf":
        smooth_reset = cfg.reset_mode == "smooth"
        rewrite = cfg.reset_mode in ("soft", "hard")
        if cfg.boundary:
            base = None  # recomputed per step only through q; constants below
            dbase_domega = bhrf_boundary_grad(w.omega)
            b_sign = -1.0
            base_const = np.square(w.omega) / 200.0 - w.b_offset
        else:
            dbase_domega = np.zeros(h)
            b_sign = 1.0
            base_const = w.b_offset.astype(np.float64)
        om2 = w.omega**2
        gu = np.zeros((B, h))
        gvp = np.zeros((B, h))
        gq = np.zeros((B, h))
        g_omega = np.zeros(h)
        g_b_offset = np.zeros(h)
        for t in range(T - 1, -1, -1):
            gz = gz_buf[t]
            if not detach_state_spikes:
                gz = gz + gq
            gq_prev = cfg.gamma * gq
            theta = cfg.theta_c + cache.q[t] if cfg.refractory else cfg.theta_c
            if rewrite:
                zt = cache.z[t + 1]
                if cfg.reset_mode == "soft":
                    if not detach_state_spikes:
                        gz = gz - theta * gu
                    if cfg.refractory:
                        gq_prev = gq_prev - zt * gu
                else:  # hard: u' = (1-z)*u_pre
                    if not detach_state_spikes:
                        gz = gz - cache.u_pre[t] * gu
                    gu = gu * (1.0 - zt)
            gv = gz * sg[t]
            gu = gu + gv
            if cfg.refractory:
                gq_prev = gq_prev - gv
            uc = cache.u[t]
            vc = cache.v[t]
            ga = delta * gu
            ga_all[t] = ga
            gb = -2.0 * delta * (gu * uc)
            g_omega += (-2.0 * delta) * w.omega * (gu * vc).sum(axis=0)
            b = base_const - cache.q[t] if smooth_reset else base_const
            gu, gvp = gu * (1.0 - 2.0 * delta * b) + gvp * delta, gvp - gu * (delta * om2)
            gb_sum = gb.sum(axis=0)
            g_b_offset += b_sign * gb_sum
            g_omega += gb_sum * dbase_domega
            if smooth_reset:
                gq_prev = gq_prev - gb
            gq = gq_prev
            if t % K == 0:
                gu = np.zeros((B, h))
                gvp = np.zeros((B, h))
                gq = np.zeros((B, h))
            else:
                gz_buf[t - 1] += ga @ w_rec
        neuron_grads = {"omega": g_omega, "b_offset": g_b_offset}
    else:  # alif
        alpha = np.exp(-delta / w.tau_m)
        rho = np.exp(-delta / w.tau_a)
        pre = (inputs.reshape(T * B, m) @ w.w_in_rec[:, :m].T).reshape(T, B, h)
        drive = pre + (z_hist[:T].reshape(T * B, h) @ w_rec.T).reshape(T, B, h)
        gu = np.zeros((B, h))
        ga_c = np.zeros((B, h))
        gz_a = np.zeros((B, h))
        galpha = np.zeros(h)
        grho = np.zeros(h)
        for t in range(T - 1, -1, -1):
            gz = gz_buf[t] + gz_a
            theta = cfg.alif_theta0 + cfg.alif_beta * cache.a[t + 1]
            zt = cache.z[t + 1]
            g_um = gu
            if not detach_state_spikes:
                gz = gz - theta * gu  # reset: u = um - z*theta
            g_theta = -zt * gu
            gv = gz * sg[t]
            g_um = g_um + gv
            g_theta = g_theta - gv
            ga_tot = ga_c + cfg.alif_beta * g_theta
            grho += (ga_tot * (cache.a[t] - cache.z[t])).sum(axis=0)
            ga_c = rho * ga_tot
            gz_a = np.zeros((B, h)) if detach_state_spikes else (1.0 - rho) * ga_tot
            galpha += (g_um * (cache.u[t] - drive[t])).sum(axis=0)
            gi = (1.0 - alpha) * g_um
            ga_all[t] = gi
            gu = alpha * g_um
            if t % K == 0:
                gu = np.zeros((B, h))
                ga_c = np.zeros((B, h))
                gz_a = np.zeros((B, h))
            else:
                gz_buf[t - 1] += gi @ w_rec
        g_tau_m = galpha * alpha * delta / w.tau_m**2
        g_tau_a = grho * rho * delta / w.tau_a**2
        neuron_grads = {"tau_m": g_tau_m, "tau_a": g_tau_a}

    concat = np.concatenate([inputs, z_hist[:T]], axis=2)
    g_w_in_rec = ga_all.reshape(T * B, h).T @ concat.reshape(T * B, m + h)

    return GradientSet(w_in_rec=g_w_in_rec, w_out=g_w_out, tau_out=g_tau_out, **neuron_grads)


def backward_sequence(
    cache: ForwardCache,
    targets,
    mode: str,
    *,
    surrogate: SurrogateParams = SurrogateParams(),
    truncation: int | None = None,
    detach_state_spikes: bool = False,
):
    """Loss + full BPTT through a cached forward. Returns (loss, GradientSet)."""
    loss, gy = loss_grad(cache.y[1:], targets, mode)
    grads = backward_from_output_grad(
        cache, gy, surrogate=surrogate, truncation=truncation, detach_state_spikes=detach_state_spikes
    )
    grads.check_finite()
    return loss, grads


# --- finite-difference oracle -------------------------------------------------


@dataclass
class GradCheckReport:
    """Per-parameter-class max relative error between BPTT and central
    differences; ``usable`` is False when a hard-threshold crossing was
    detected inside a perturbation interval (result meaningless, not wrong)."""

    per_class: dict
    max_rel_err: float
    usable: bool = True
    crossings: int = 0


def finite_difference_check(
    weights: NetworkWeights,
    config: NetworkConfig,
    inputs: np.ndarray,
    targets,
    mode: str,
    *,
    subset: tuple | None = None,
    eps_scale: float = 1e-6,
    spike_fn: str = "smooth",
    smooth_width: float = 0.5,
    surrogate: SurrogateParams = SurrogateParams(),
    truncation: int | None = None,
    detach_state_spikes: bool = False,
) -> GradCheckReport:
    """Compare backward_sequence against central finite differences.

    In the default differentiable-test mode the forward replaces the step
    function with the smooth logistic stand-in, making the true gradient
    well defined everywhere; the backward then uses the stand-in's exact
    derivative and must match FD to high accuracy. In hard mode the check
    only makes sense for runs where no perturbation crosses a threshold;
    any detected crossing flags the report unusable.
    """
    inputs = np.asarray(inputs, dtype=np.float64)

    def run_loss():
        _, _, cache = forward_sequence(inputs, weights, config, spike_fn=spike_fn, smooth_width=smooth_width)
        return loss_forward(cache.y[1:], targets, mode), cache

    _, cache0 = run_loss()
    _, grads = backward_sequence(
        cache0, targets, mode, surrogate=surrogate, truncation=truncation,
        detach_state_spikes=detach_state_spikes,
    )
    z_ref = cache0.z.copy()

    names = subset if subset is not None else tuple(weights.trainable().keys())
    per_class = {}
    crossings = 0
    for name in names:
        arr = weights.trainable()[name]
        analytic = grads.trainable()[name]
        fd = np.zeros_like(analytic)
        flat = arr.reshape(-1)
        fd_flat = fd.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            eps = eps_scale * max(1.0, abs(orig))
            flat[i] = orig + eps
            lp, cp = run_loss()
            flat[i] = orig - eps
            lm, cm = run_loss()
            flat[i] = orig
            fd_flat[i] = (lp - lm) / (2.0 * eps)
            if spike_fn == "hard" and (
                not np.array_equal(cp.z, z_ref) or not np.array_equal(cm.z, z_ref)
            ):
                crossings += 1
        # Error relative to the class's gradient scale: individual entries
        # with near-zero true gradient sit below what central differences
        # can resolve in float64 (roundoff ~ eps_mach*|L|/eps), so per-entry
        # relative error there is meaningless.
        scale = max(np.abs(analytic).max(initial=0.0), np.abs(fd).max(initial=0.0), 1e-30)
        per_class[name] = float(np.abs(analytic - fd).max(initial=0.0) / scale)
    return GradCheckReport(
        per_class=per_class,
        max_rel_err=max(per_class.values()) if per_class else 0.0,
        usable=crossings == 0,
        crossings=crossings,
    )


# --- dataset-level evaluation ---------------------------------------------------


@dataclass
class EvalResult:
    loss: float
    accuracy: float
    z_sum: float
    sops: float
    sops_per_step: float
    n_samples: int
    seq_len: int


def evaluate_dataset(
    weights: NetworkWeights,
    config: NetworkConfig,
    inputs: np.ndarray,
    labels: np.ndarray,
    mode: str,
    *,
    batch_size: int = 128,
    input_sigma: float = 0.0,
    spike_drop_p: float = 0.0,
    noise_rng: np.random.Generator | None = None,
) -> EvalResult:
    """Deterministic single pass over (N, T, m) samples.

    Loss and accuracy are averaged over samples; SOPs follow count_sops on
    the summed transmitted spikes. The optional noise hooks perturb inputs
    (Gaussian, per element per step) and delete transmitted spikes.
    """
    inputs = np.asarray(inputs)
    labels = np.asarray(labels)
    n, T, m = inputs.shape
    if n < 1:
        raise DataError("empty evaluation set")
    per_step = labels.ndim == 2
    if (input_sigma > 0.0 or spike_drop_p > 0.0) and noise_rng is None:
        raise ConfigError("noise evaluation requires an RNG")
    loss_sum = 0.0
    correct_sum = 0.0
    z_sum = 0.0
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        xb = np.ascontiguousarray(np.swapaxes(inputs[start:stop], 0, 1), dtype=np.float64)
        if input_sigma > 0.0:
            xb = xb + noise_rng.normal(0.0, input_sigma, size=xb.shape)
        yb = np.ascontiguousarray(labels[start:stop].T) if per_step else labels[start:stop]
        drop = (spike_drop_p, noise_rng) if spike_drop_p > 0.0 else None
        readout, spikes, _ = forward_sequence(xb, weights, config, spike_drop=drop)
        batch = stop - start
        loss_sum += loss_forward(readout, yb, mode) * batch
        correct_sum += accuracy(readout, yb, mode) * batch
        z_sum += float(spikes.sum())
    sops, sops_step = count_sops(z_sum, n, T)
    return EvalResult(
        loss=loss_sum / n,
        accuracy=correct_sum / n,
        z_sum=z_sum,
        sops=sops,
        sops_per_step=sops_step,
        n_samples=n,
        seq_len=T,
    )
