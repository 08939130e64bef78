"""Command-line orchestrator: encode, train, eval, analyze.

Run configuration is a line-oriented ``key = value`` file with sections
(read with configparser); CLI flags mirror and override the file. One
fixed seed plus one dataset cache fully determine a run: metrics.csv and
the checkpoints are byte-identical across repetitions. Wall-clock timing
goes to the run journal (run.log), which is the only non-deterministic
output. Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import os
import sys
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from . import analysis
from .datasets import (
    EncoderConfig,
    SequenceDataset,
    load_cache,
    load_ecg_dir,
    load_shd_dir,
    load_smnist,
    permute_smnist,
    save_cache,
)
from .errors import ConfigError, DataError, NumericError
from .learning import (
    LOSS_MODES,
    SurrogateParams,
    accuracy,
    backward_sequence,
    evaluate_dataset,
    loss_forward,
)
from .network import (
    Dist,
    InitSpec,
    NEURON_KINDS,
    NetworkConfig,
    NetworkWeights,
    forward_sequence,
    init_parameters,
    load_checkpoint,
    prune_recurrent,
    save_checkpoint,
)
from .optim import OPTIMIZER_KINDS, lr_schedule_linear, make_optimizer, optimizer_step

__all__ = ["RunConfig", "parse_config_file", "train_run", "main", "METRIC_COLUMNS"]

TASKS = ("smnist", "psmnist", "ecg", "shd")

METRIC_COLUMNS = (
    "epoch", "lr", "train_loss", "train_acc", "val_loss", "val_acc",
    "test_loss", "test_acc", "test_sops", "test_sops_per_step",
)


@dataclass
class RunConfig:
    """Everything a training run needs besides the dataset cache."""

    task: str = "smnist"
    model: str = "brf"
    hidden: int = 256
    delta: float = 0.01
    reset: str = "smooth"
    refractory: bool = True
    boundary: bool = True
    omega_init: Dist | None = None
    b_offset_init: Dist | None = None
    tau_m_init: Dist | None = None
    tau_a_init: Dist | None = None
    tau_out_init: Dist = Dist("normal", 20.0, 5.0)
    lr: float = 0.1
    batch_size: int = 256
    eval_batch_size: int = 128
    epochs: int = 300
    loss: str = "label_last_nll"
    optimizer: str = "adam"
    schedule_end_factor: float = 0.0
    truncation: int = 0
    detach_state_spikes: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.model not in NEURON_KINDS:
            raise ConfigError(f"model must be one of {NEURON_KINDS}, got {self.model!r}")
        if self.hidden < 1:
            raise ConfigError("hidden must be >= 1")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.batch_size < 1 or self.eval_batch_size < 1:
            raise ConfigError("batch sizes must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.loss not in LOSS_MODES:
            raise ConfigError(f"loss must be one of {LOSS_MODES}")
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZER_KINDS}")
        if self.truncation < 0:
            raise ConfigError("truncation must be >= 0 (0 = full BPTT)")
        if self.model == "alif":
            if self.tau_m_init is None or self.tau_a_init is None:
                raise ConfigError("alif model needs tau_m and tau_a init distributions")
        elif self.omega_init is None or self.b_offset_init is None:
            raise ConfigError(f"{self.model} model needs omega and b_offset init distributions")

    def network_config(self, meta) -> NetworkConfig:
        return NetworkConfig(
            n_in=meta.n_in,
            n_hidden=self.hidden,
            n_out=meta.n_classes,
            neuron=self.model,
            delta=self.delta,
            reset_mode=self.reset,
            refractory=self.refractory,
            boundary=self.boundary,
        )

    def init_spec(self) -> InitSpec:
        return InitSpec(
            omega=self.omega_init,
            b_offset=self.b_offset_init,
            tau_m=self.tau_m_init,
            tau_a=self.tau_a_init,
            tau_out=self.tau_out_init,
        )


_BOOL_KEYS = {"refractory", "boundary", "detach_state_spikes"}
_DIST_KEYS = {"omega": "omega_init", "b_offset": "b_offset_init", "tau_m": "tau_m_init",
              "tau_a": "tau_a_init", "tau_out": "tau_out_init"}
_INT_KEYS = {"hidden", "batch_size", "eval_batch_size", "epochs", "truncation", "seed"}
_FLOAT_KEYS = {"delta", "lr", "schedule_end_factor"}


def _parse_bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def parse_config_file(path) -> RunConfig:
    """Read a sectioned key = value run configuration.

    Sections [run], [network], [init], [train] exist for readability; keys
    are globally unique so they are folded into one namespace.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for section in parser.sections():
        for key, value in parser.items(section):
            if key in _DIST_KEYS:
                setattr(cfg, _DIST_KEYS[key], Dist.parse(value))
            elif key in _BOOL_KEYS:
                setattr(cfg, key, _parse_bool(value, key))
            elif key in _INT_KEYS:
                try:
                    setattr(cfg, key, int(value))
                except ValueError as exc:
                    raise ConfigError(f"{key}: expected an integer, got {value!r}") from exc
            elif key in _FLOAT_KEYS:
                try:
                    setattr(cfg, key, float(value))
                except ValueError as exc:
                    raise ConfigError(f"{key}: expected a number, got {value!r}") from exc
            elif key in ("task", "model", "reset", "loss", "optimizer"):
                setattr(cfg, key, value.strip())
            elif key in known:
                setattr(cfg, key, value)
            else:
                raise ConfigError(f"{path}: unknown configuration key {key!r}")
    return cfg


@contextlib.contextmanager
def output_lock(outdir):
    """At most one writer per output directory."""
    os.makedirs(outdir, exist_ok=True)
    lock_path = os.path.join(outdir, ".lock")
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(f"{outdir} is locked by another writer (remove {lock_path} if stale)")
    try:
        yield
    finally:
        os.close(fd)
        os.unlink(lock_path)


def _format_row(values) -> str:
    return ",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in values)


def _batches(n: int, batch_size: int, order: np.ndarray):
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _time_major(x: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.swapaxes(x, 0, 1), dtype=np.float64)


def train_run(cfg: RunConfig, dataset: SequenceDataset, outdir, *, journal=None) -> dict:
    """The full training loop: forward, loss, BPTT, optimizer, LR schedule,
    per-epoch evaluation and logging, best-validation checkpointing.

    Returns a summary dict (best epoch, best val loss, final test metrics).
    Deterministic given (cfg, dataset): metrics.csv and the checkpoints are
    byte-identical across runs.
    """
    cfg.validate()
    for split in ("train", "validation", "test"):
        if split not in dataset.splits:
            raise DataError(f"dataset cache lacks the {split} split")
    meta = dataset.meta
    net_cfg = cfg.network_config(meta)
    weights = init_parameters(net_cfg, cfg.init_spec(), seed=cfg.seed)
    opt_state = make_optimizer(cfg.optimizer, weights)
    shuffle_rng = np.random.default_rng([cfg.seed, 1])
    surrogate = SurrogateParams()
    truncation = cfg.truncation if cfg.truncation > 0 else None
    per_step = meta.label_mode == "step"

    x_train, y_train = dataset.splits["train"]
    n_train = x_train.shape[0]
    if n_train < 1:
        raise DataError("empty training split")

    os.makedirs(outdir, exist_ok=True)
    metrics_path = os.path.join(outdir, "metrics.csv")
    save_checkpoint(os.path.join(outdir, "init.ckpt"), weights, net_cfg)

    def log_journal(msg):
        if journal is not None:
            journal.write(msg + "\n")
            journal.flush()

    best = {"val_loss": np.inf, "epoch": 0}
    summary = {}
    with open(metrics_path, "w", encoding="utf-8") as log:
        log.write(",".join(METRIC_COLUMNS) + "\n")
        if cfg.epochs == 0:
            save_checkpoint(os.path.join(outdir, "best.ckpt"), weights, net_cfg)
            return {"best_epoch": 0, "best_val_loss": float("nan"), "epochs": 0}
        for epoch in range(1, cfg.epochs + 1):
            t0 = time.perf_counter()
            lr = lr_schedule_linear(cfg.lr, epoch - 1, cfg.epochs, cfg.schedule_end_factor)
            order = shuffle_rng.permutation(n_train)
            loss_sum = 0.0
            acc_sum = 0.0
            for idx in _batches(n_train, cfg.batch_size, order):
                xb = _time_major(x_train[idx])
                yb = np.ascontiguousarray(y_train[idx].T) if per_step else y_train[idx]
                _, _, cache = forward_sequence(xb, weights, net_cfg)
                loss, grads = backward_sequence(
                    cache, yb, cfg.loss,
                    surrogate=surrogate, truncation=truncation,
                    detach_state_spikes=cfg.detach_state_spikes,
                )
                if not np.isfinite(loss):
                    raise NumericError(f"non-finite loss in epoch {epoch}")
                optimizer_step(weights, grads, opt_state, lr)
                loss_sum += loss * idx.size
                acc_sum += accuracy(cache.y[1:], yb, cfg.loss) * idx.size
            val = evaluate_dataset(
                weights, net_cfg, *dataset.splits["validation"], cfg.loss, batch_size=cfg.eval_batch_size
            )
            test = evaluate_dataset(
                weights, net_cfg, *dataset.splits["test"], cfg.loss, batch_size=cfg.eval_batch_size
            )
            row = (
                epoch, lr, loss_sum / n_train, acc_sum / n_train,
                val.loss, val.accuracy, test.loss, test.accuracy,
                test.sops, test.sops_per_step,
            )
            log.write(_format_row(row) + "\n")
            log.flush()
            if val.loss < best["val_loss"]:
                best = {"val_loss": val.loss, "epoch": epoch}
                save_checkpoint(os.path.join(outdir, "best.ckpt"), weights, net_cfg)
                summary["best_test_acc"] = test.accuracy
                summary["best_test_sops_per_step"] = test.sops_per_step
            log_journal(
                f"epoch {epoch}: lr={lr:.6g} train_loss={loss_sum / n_train:.6g} "
                f"val_loss={val.loss:.6g} test_acc={test.accuracy:.4f} "
                f"wall={time.perf_counter() - t0:.2f}s"
            )
    summary.update({"best_epoch": best["epoch"], "best_val_loss": best["val_loss"], "epochs": cfg.epochs})
    return summary


# --- commands ---------------------------------------------------------------------


def _data_root(args) -> str:
    root = getattr(args, "data_root", None) or os.environ.get("BRF_DATA_ROOT", "")
    if not root:
        raise ConfigError("set --data-root or the BRF_DATA_ROOT environment variable")
    return root


def _default_cache_path(root: str, task: str) -> str:
    return os.path.join(root, "cache", f"{task}.cache")


def _find_idx(dirpath: str, stem: str) -> str:
    for name in (stem, stem + ".gz"):
        path = os.path.join(dirpath, name)
        if os.path.isfile(path):
            return path
    raise DataError(f"missing IDX file {stem}[.gz] under {dirpath}")


def cmd_encode(args) -> int:
    root = _data_root(args)
    task = args.task
    if task in ("smnist", "psmnist"):
        mnist_dir = os.path.join(root, "mnist")
        ds = load_smnist(
            _find_idx(mnist_dir, "train-images-idx3-ubyte"),
            _find_idx(mnist_dir, "train-labels-idx1-ubyte"),
            _find_idx(mnist_dir, "t10k-images-idx3-ubyte"),
            _find_idx(mnist_dir, "t10k-labels-idx1-ubyte"),
        )
        if task == "psmnist":
            ds = permute_smnist(ds, args.perm_seed, task="psmnist")
    elif task == "ecg":
        ds = load_ecg_dir(os.path.join(root, "ecg"))
    else:  # shd
        ds = load_shd_dir(os.path.join(root, "shd"))
    out = args.out or _default_cache_path(root, task)
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    save_cache(ds, out)
    sizes = ds.sizes()
    print(f"encoded {task}: " + " ".join(f"{k}={v}" for k, v in sizes.items()) + f" -> {out}")
    return 0


def _load_run_dataset(args, task: str) -> SequenceDataset:
    cache = getattr(args, "cache", None)
    if not cache:
        cache = _default_cache_path(_data_root(args), task)
    if not os.path.isfile(cache):
        raise DataError(f"dataset cache not found: {cache} (run `brfsim encode` first)")
    return load_cache(cache)


def cmd_train(args) -> int:
    cfg = parse_config_file(args.config)
    for key in ("seed", "epochs", "lr", "batch_size", "truncation"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    dataset = _load_run_dataset(args, cfg.task)
    if dataset.meta.task != cfg.task:
        raise ConfigError(f"config task {cfg.task!r} but cache holds {dataset.meta.task!r}")
    outdir = args.out
    with output_lock(outdir):
        with open(os.path.join(outdir, "run.log"), "w", encoding="utf-8") as journal:
            journal.write(f"config={os.path.abspath(args.config)} seed={cfg.seed}\n")
            summary = train_run(cfg, dataset, outdir, journal=journal)
    print(" ".join(f"{k}={v}" for k, v in sorted(summary.items())))
    return 0


def cmd_eval(args) -> int:
    weights, net_cfg = load_checkpoint(args.checkpoint)
    dataset = load_cache(args.cache)
    if dataset.meta.n_in != net_cfg.n_in or dataset.meta.n_classes != net_cfg.n_out:
        raise DataError(
            f"checkpoint is {net_cfg.n_in}->{net_cfg.n_out} but cache task "
            f"{dataset.meta.task} needs {dataset.meta.n_in}->{dataset.meta.n_classes}"
        )
    if args.split not in dataset.splits:
        raise DataError(f"cache has no {args.split!r} split")
    res = evaluate_dataset(
        weights, net_cfg, *dataset.splits[args.split], args.loss, batch_size=args.batch_size
    )
    print(
        f"split={args.split} n={res.n_samples} loss={res.loss!r} accuracy={res.accuracy!r} "
        f"sops={res.sops!r} sops_per_step={res.sops_per_step!r}"
    )
    return 0


def _parse_float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc


def _parse_int_list(text: str) -> list:
    return [int(v) for v in _parse_float_list(text)]


def cmd_analyze(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    sub = args.analysis
    if sub == "freq":
        curve = analysis.frequency_response(
            args.omega, args.b_offset, delta=args.delta, duration=args.duration, kind=args.model
        )
        path = os.path.join(args.out, f"freq_omega{args.omega:g}_b{args.b_offset:g}_delta{args.delta:g}.csv")
        analysis.write_csv(path, "drive_omega,mean_abs_u", zip(curve.grid.tolist(), curve.response.tolist()))
        peak = curve.grid[int(np.argmax(curve.response))]
        print(f"wrote {path} (peak at {peak:g} rad/s)")
    elif sub == "boundary":
        curves = analysis.boundary_curve(_parse_float_list(args.deltas))
        path = os.path.join(args.out, "divergence_boundary.csv")
        rows = []
        for c in curves:
            rows.extend((c.delta, float(om), float(p)) for om, p in zip(c.omega, c.p))
        analysis.write_csv(path, "delta,omega,p", rows)
        print(f"wrote {path}")
    elif sub == "noise":
        weights, net_cfg = load_checkpoint(args.checkpoint)
        dataset = load_cache(args.cache)
        protocol = analysis.NoiseProtocol(args.protocol, tuple(_parse_float_list(args.values)))
        rows = analysis.noise_sweep(
            weights, net_cfg, *dataset.splits[args.split], args.loss, protocol,
            _parse_int_list(args.seeds), batch_size=args.batch_size,
        )
        path = os.path.join(args.out, f"noise_{args.protocol}.csv")
        analysis.write_csv(path, "value,seed,accuracy,loss,sops,sops_per_step", rows)
        print(f"wrote {path}")
    elif sub == "raster":
        weights, net_cfg = load_checkpoint(args.checkpoint)
        if weights.omega is None:
            raise ConfigError("raster export needs a resonator checkpoint")
        dataset = load_cache(args.cache)
        x, _ = dataset.splits[args.split]
        if not 0 <= args.index < x.shape[0]:
            raise DataError(f"sample index {args.index} outside the {args.split} split")
        xb = _time_major(x[args.index : args.index + 1])
        _, spikes, _ = forward_sequence(xb, weights, net_cfg)
        rows = analysis.export_raster(spikes[:, 0, :], weights.omega)
        path = os.path.join(args.out, f"raster_{args.split}{args.index}.csv")
        analysis.write_csv(path, "t,neuron_rank", rows.tolist())
        print(f"wrote {path} ({rows.shape[0]} spikes)")
    elif sub == "scatter":
        w_init, net_cfg = load_checkpoint(args.init_checkpoint)
        w_final, _ = load_checkpoint(args.final_checkpoint)
        rows = analysis.export_param_scatter(w_init, w_final, net_cfg.delta)
        path = os.path.join(args.out, "param_scatter.csv")
        analysis.write_csv(path, "phase,omega,b_offset,b_c", rows)
        print(f"wrote {path}")
    elif sub == "converge":
        logs = []
        for log_path in args.logs.split(","):
            rows = np.genfromtxt(log_path, delimiter=",", names=True)
            if rows.size == 0:
                raise DataError(f"{log_path}: empty metric log")
            logs.append(np.atleast_1d(rows["test_acc"]))
        report = analysis.convergence_stats(logs)
        path = os.path.join(args.out, "convergence.csv")
        body = [
            (i, *row) for i, row in enumerate(report.per_run.tolist())
        ] + [("mean", *report.mean.tolist())]
        analysis.write_csv(path, "run,epochs_to_95,epochs_to_98,epochs_to_100", body)
        print(f"wrote {path}")
    elif sub == "prune":
        weights, net_cfg = load_checkpoint(args.checkpoint)
        dataset = load_cache(args.cache)
        x, y = dataset.splits[args.split]
        rows = []
        for p in _parse_float_list(args.probabilities):
            for seed in _parse_int_list(args.seeds):
                pruned = prune_recurrent(weights, p, seed)
                res = evaluate_dataset(pruned, net_cfg, x, y, args.loss, batch_size=args.batch_size)
                rows.append((p, seed, res.accuracy, res.loss, res.sops, res.sops_per_step))
        path = os.path.join(args.out, "prune_sweep.csv")
        analysis.write_csv(path, "probability,seed,accuracy,loss,sops,sops_per_step", rows)
        print(f"wrote {path}")
    else:
        raise ConfigError(f"unknown analyze subcommand {sub!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brfsim", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_enc = subs.add_parser("encode", help="encode raw data into a dataset cache")
    p_enc.add_argument("--task", required=True, choices=TASKS)
    p_enc.add_argument("--data-root", default=None, help="raw data root (or $BRF_DATA_ROOT)")
    p_enc.add_argument("--out", default=None, help="cache path (default <root>/cache/<task>.cache)")
    p_enc.add_argument("--perm-seed", type=int, default=EncoderConfig().permutation_seed)
    p_enc.set_defaults(func=cmd_encode)

    p_tr = subs.add_parser("train", help="train a network from a config file")
    p_tr.add_argument("--config", required=True)
    p_tr.add_argument("--out", required=True, help="output directory")
    p_tr.add_argument("--cache", default=None, help="dataset cache path")
    p_tr.add_argument("--data-root", default=None)
    p_tr.add_argument("--seed", type=int, default=None)
    p_tr.add_argument("--epochs", type=int, default=None)
    p_tr.add_argument("--lr", type=float, default=None)
    p_tr.add_argument("--batch-size", type=int, default=None)
    p_tr.add_argument("--truncation", type=int, default=None)
    p_tr.set_defaults(func=cmd_train)

    p_ev = subs.add_parser("eval", help="evaluate a checkpoint on one split")
    p_ev.add_argument("--checkpoint", required=True)
    p_ev.add_argument("--cache", required=True)
    p_ev.add_argument("--split", default="test", choices=("train", "validation", "test"))
    p_ev.add_argument("--loss", default="label_last_nll", choices=LOSS_MODES)
    p_ev.add_argument("--batch-size", type=int, default=128)
    p_ev.set_defaults(func=cmd_eval)

    p_an = subs.add_parser("analyze", help="write analysis CSV artifacts")
    an_subs = p_an.add_subparsers(dest="analysis", required=True)

    a_freq = an_subs.add_parser("freq")
    a_freq.add_argument("--omega", type=float, required=True)
    a_freq.add_argument("--b-offset", type=float, default=1.0)
    a_freq.add_argument("--delta", type=float, default=0.001)
    a_freq.add_argument("--duration", type=float, default=20.0)
    a_freq.add_argument("--model", default="brf", choices=("brf", "rf", "bhrf"))

    a_bound = an_subs.add_parser("boundary")
    a_bound.add_argument("--deltas", default="0.002,0.005,0.01,0.02")

    a_noise = an_subs.add_parser("noise")
    a_noise.add_argument("--checkpoint", required=True)
    a_noise.add_argument("--cache", required=True)
    a_noise.add_argument("--split", default="test")
    a_noise.add_argument("--loss", default="label_last_nll", choices=LOSS_MODES)
    a_noise.add_argument("--protocol", required=True,
                         choices=("quantization", "input_gaussian", "spike_deletion", "synaptic_gaussian"))
    a_noise.add_argument("--values", required=True)
    a_noise.add_argument("--seeds", default="0,1,2,3,4")
    a_noise.add_argument("--batch-size", type=int, default=128)

    a_rast = an_subs.add_parser("raster")
    a_rast.add_argument("--checkpoint", required=True)
    a_rast.add_argument("--cache", required=True)
    a_rast.add_argument("--split", default="test")
    a_rast.add_argument("--index", type=int, default=0)

    a_scat = an_subs.add_parser("scatter")
    a_scat.add_argument("--init-checkpoint", required=True)
    a_scat.add_argument("--final-checkpoint", required=True)

    a_conv = an_subs.add_parser("converge")
    a_conv.add_argument("--logs", required=True, help="comma-separated metrics.csv paths")

    a_prune = an_subs.add_parser("prune")
    a_prune.add_argument("--checkpoint", required=True)
    a_prune.add_argument("--cache", required=True)
    a_prune.add_argument("--split", default="test")
    a_prune.add_argument("--loss", default="label_last_nll", choices=LOSS_MODES)
    a_prune.add_argument("--probabilities", default="0,0.25,0.5,0.75,1.0")
    a_prune.add_argument("--seeds", default="0,1,2")
    a_prune.add_argument("--batch-size", type=int, default=128)

    for sp in (a_freq, a_bound, a_noise, a_rast, a_scat, a_conv, a_prune):
        sp.add_argument("--out", required=True, help="output directory for CSVs")
    p_an.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
