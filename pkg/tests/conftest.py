"""Shared fixtures: toy networks, a synthetic spike-period task, and the
raw-data gate for the benchmark-dependent acceptance criteria."""

import os

import numpy as np
import pytest

from brfsim.datasets import DatasetMeta, SequenceDataset
from brfsim.network import Dist, InitSpec, NetworkConfig, init_parameters


def data_root() -> str:
    return os.environ.get("BRF_DATA_ROOT", os.path.join(os.path.dirname(__file__), "..", "data"))


def mnist_paths():
    """The four IDX files (plain or gzipped) if present, else None."""
    root = os.path.join(data_root(), "mnist")
    stems = (
        "train-images-idx3-ubyte",
        "train-labels-idx1-ubyte",
        "t10k-images-idx3-ubyte",
        "t10k-labels-idx1-ubyte",
    )
    paths = []
    for stem in stems:
        for name in (stem, stem + ".gz"):
            p = os.path.join(root, name)
            if os.path.isfile(p):
                paths.append(p)
                break
        else:
            return None
    return paths


def ecg_dir():
    p = os.path.join(data_root(), "ecg")
    return p if os.path.isdir(p) and any(f.endswith(".csv") for f in os.listdir(p)) else None


def require_mnist():
    paths = mnist_paths()
    if paths is None:
        pytest.skip(
            "raw MNIST IDX files not present (this sandbox has no dataset network access); "
            f"place train/t10k IDX files under {os.path.join(data_root(), 'mnist')} "
            "or set BRF_DATA_ROOT - see README 'Data preparation'"
        )
    return paths


def require_ecg():
    d = ecg_dir()
    if d is None:
        pytest.skip(
            "ECG recording tables not present (QT-database extraction cannot be downloaded here); "
            f"place per-recording v1,v2,label CSVs under {os.path.join(data_root(), 'ecg')} "
            "or set BRF_DATA_ROOT - see README 'Data preparation'"
        )
    return d


def make_period_task(n_per_class, *, seq_len=150, periods=(14, 40), amplitude=40.0, seed=0):
    """Spike trains whose class is their period; resonators excel at this.

    Returns (inputs (N, T, 1) float32, labels (N,) int32), phase randomized
    per sample, classes shuffled together.
    """
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for c, p in enumerate(periods):
        for _ in range(n_per_class):
            phase = int(rng.integers(0, p))
            x = np.zeros((seq_len, 1), dtype=np.float32)
            x[phase::p, 0] = amplitude
            xs.append(x)
            ys.append(c)
    order = rng.permutation(len(xs))
    return np.stack(xs)[order], np.asarray(ys, dtype=np.int32)[order]


def period_dataset(n_train=32, n_val=8, n_test=16, **kw) -> SequenceDataset:
    """The synthetic task wrapped as a three-split SequenceDataset."""
    periods = kw.get("periods", (14, 40))
    seq_len = kw.get("seq_len", 150)
    per_class = {"train": n_train, "validation": n_val, "test": n_test}
    splits = {}
    for i, (name, n) in enumerate(per_class.items()):
        kw2 = dict(kw)
        kw2["seed"] = kw.get("seed", 0) + 1000 * i
        splits[name] = make_period_task(max(n // len(periods), 1), **kw2)
    meta = DatasetMeta(
        task="smnist", seq_len=seq_len, n_in=1, n_classes=len(periods), delta=0.01, label_mode="sequence"
    )
    return SequenceDataset(meta=meta, splits=splits)


def brf_toy(n_in=2, n_hidden=4, n_out=2, seed=3, **cfg_kw):
    cfg = NetworkConfig(n_in=n_in, n_hidden=n_hidden, n_out=n_out, neuron=cfg_kw.pop("neuron", "brf"), **cfg_kw)
    if cfg.neuron == "alif":
        init = InitSpec(
            tau_m=Dist("normal", 20, 2), tau_a=Dist("normal", 150, 10), tau_out=Dist("normal", 20, 2)
        )
    else:
        init = InitSpec(
            omega=Dist("uniform", 5, 15), b_offset=Dist("uniform", 0.5, 1.5), tau_out=Dist("normal", 20, 2)
        )
    return cfg, init_parameters(cfg, init, seed=seed)
