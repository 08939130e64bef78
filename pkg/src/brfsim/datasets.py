"""Benchmark dataset ingestion and encoding.

Four tasks, all delivered as time-major sequence datasets:

- S-MNIST: IDX image/label files, each 28x28 image flattened row-major to a
  784-step scalar sequence scaled to [0, 1]; validation is the tail of the
  training file (54000/6000/10000 by default).
- PS-MNIST: the same with one fixed seed-determined pixel permutation
  applied identically to every sample in every split.
- ECG: per-recording CSV tables "v1,v2,label" (two normalized electrode
  traces plus a per-step class in [0, 6)); recordings are cut into
  1300-step segments and each segment's channels are level-cross encoded
  into +/- spike trains (m = 4).
- SHD: per-sample event CSVs "time_s,channel" binned into 250 steps of
  4 ms over 700 channels (values are event counts); shorter recordings end
  up zero-padded at the tail by construction.

Encoded datasets round-trip losslessly through a little-endian binary
cache (magic "BRFDAT01"); re-encoding identical inputs yields identical
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import gzip
import io
import os

import numpy as np

from .errors import DataError

__all__ = [
    "DatasetMeta",
    "SequenceDataset",
    "EncoderConfig",
    "load_idx",
    "load_smnist",
    "permute_smnist",
    "level_cross_encode",
    "segment_ecg",
    "load_ecg_dir",
    "bin_shd",
    "load_shd_dir",
    "save_cache",
    "load_cache",
]

SPLIT_ORDER = ("train", "validation", "test")


@dataclass(frozen=True)
class EncoderConfig:
    """Encoding constants shared by the pipelines."""

    level_threshold: float = 0.3  # ECG level-cross threshold L
    shd_bin_width: float = 4e-3  # seconds per SHD bin
    shd_seq_len: int = 250
    shd_channels: int = 700
    ecg_segment_len: int = 1300
    permutation_seed: int = 42  # PS-MNIST pixel shuffle

    def __post_init__(self):
        if self.level_threshold <= 0:
            raise DataError("level-cross threshold must be positive")
        if self.shd_bin_width <= 0:
            raise DataError("SHD bin width must be positive")


@dataclass(frozen=True)
class DatasetMeta:
    task: str
    seq_len: int
    n_in: int
    n_classes: int
    delta: float
    label_mode: str  # "sequence" or "step"


@dataclass
class SequenceDataset:
    """Split name -> (inputs (N, T, m), labels (N,) or (N, T))."""

    meta: DatasetMeta
    splits: dict

    def __post_init__(self):
        for name, (x, y) in self.splits.items():
            if name not in SPLIT_ORDER:
                raise DataError(f"unknown split tag {name!r}")
            if x.ndim != 3 or x.shape[1] != self.meta.seq_len or x.shape[2] != self.meta.n_in:
                raise DataError(f"split {name}: inputs shaped {x.shape}, expected (N, {self.meta.seq_len}, {self.meta.n_in})")
            want = (x.shape[0],) if self.meta.label_mode == "sequence" else (x.shape[0], self.meta.seq_len)
            if y.shape != want:
                raise DataError(f"split {name}: labels shaped {y.shape}, expected {want}")
            if y.size and (y.min() < 0 or y.max() >= self.meta.n_classes):
                raise DataError(f"split {name}: label outside [0, {self.meta.n_classes})")

    def sizes(self) -> dict:
        return {name: arrs[0].shape[0] for name, arrs in self.splits.items()}


# --- IDX ------------------------------------------------------------------


def _open_maybe_gz(path):
    with open(path, "rb") as f:
        head = f.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx(path) -> np.ndarray:
    """Parse one big-endian IDX file (plain or gzipped) of unsigned bytes.

    Magic 0x00000801 is a label vector, 0x00000803 an image stack; any
    other magic, a truncated payload, or trailing bytes raise DataError.
    """
    with _open_maybe_gz(path) as f:
        raw = f.read()
    if len(raw) < 4:
        raise DataError(f"{path}: file too short for an IDX header")
    magic = int.from_bytes(raw[:4], "big")
    if magic not in (0x00000801, 0x00000803):
        raise DataError(f"{path}: bad IDX magic 0x{magic:08x}")
    ndim = magic & 0xFF
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise DataError(f"{path}: truncated IDX dimension header")
    dims = [int.from_bytes(raw[4 + 4 * i : 8 + 4 * i], "big") for i in range(ndim)]
    count = int(np.prod(dims))
    if len(raw) != header_len + count:
        raise DataError(f"{path}: expected {header_len + count} bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, offset=header_len).reshape(dims)


def load_smnist(
    train_images,
    train_labels,
    test_images,
    test_labels,
    split_sizes: tuple = (54000, 6000, 10000),
) -> SequenceDataset:
    """Sequential MNIST: row-major flattened pixels, scaled to [0, 1].

    Validation is carved from the tail of the training file; split_sizes is
    (train, validation, test) and must match the files exactly.
    """
    imgs = load_idx(train_images)
    labs = load_idx(train_labels)
    t_imgs = load_idx(test_images)
    t_labs = load_idx(test_labels)
    for name, (x, y) in (("train", (imgs, labs)), ("test", (t_imgs, t_labs))):
        if x.ndim != 3 or y.ndim != 1:
            raise DataError(f"{name}: images must be 3-d and labels 1-d IDX arrays")
        if x.shape[0] != y.shape[0]:
            raise DataError(f"{name}: {x.shape[0]} images but {y.shape[0]} labels")
    n_train, n_val, n_test = split_sizes
    if imgs.shape[0] != n_train + n_val:
        raise DataError(f"training file holds {imgs.shape[0]} images, expected {n_train + n_val}")
    if t_imgs.shape[0] != n_test:
        raise DataError(f"test file holds {t_imgs.shape[0]} images, expected {n_test}")
    seq_len = imgs.shape[1] * imgs.shape[2]

    def seq(x):
        return (x.reshape(x.shape[0], seq_len, 1).astype(np.float32)) / np.float32(255.0)

    meta = DatasetMeta(task="smnist", seq_len=seq_len, n_in=1, n_classes=10, delta=0.01, label_mode="sequence")
    return SequenceDataset(
        meta=meta,
        splits={
            "train": (seq(imgs[:n_train]), labs[:n_train].astype(np.int32)),
            "validation": (seq(imgs[n_train:]), labs[n_train:].astype(np.int32)),
            "test": (seq(t_imgs), t_labs.astype(np.int32)),
        },
    )


def permute_smnist(ds: SequenceDataset, seed: int | None, task: str | None = None) -> SequenceDataset:
    """Apply one fixed pixel permutation to every sample of every split.

    ``seed=None`` is the identity. The permutation is a bijection on the
    time axis, drawn once from the seed.
    """
    if seed is None:
        perm = np.arange(ds.meta.seq_len)
    else:
        perm = np.random.default_rng(seed).permutation(ds.meta.seq_len)
    splits = {name: (x[:, perm, :], y.copy()) for name, (x, y) in ds.splits.items()}
    meta = ds.meta if task is None else replace(ds.meta, task=task)
    return SequenceDataset(meta=meta, splits=splits)


# --- ECG --------------------------------------------------------------------


def level_cross_encode(signal: np.ndarray, threshold: float = 0.3) -> np.ndarray:
    """Two spike channels per input channel from the step-to-step gradient.

    s+ fires when x_t - x_{t-1} >= L, s- when x_t - x_{t-1} <= -L (both
    inclusive). The first step compares against itself (difference 0, no
    spike). Input (T,) or (T, k); output (T, 2k) with columns
    [s+_1, s-_1, s+_2, ...].
    """
    if threshold <= 0:
        raise DataError("level-cross threshold must be positive")
    signal = np.asarray(signal, dtype=np.float64)
    squeeze = signal.ndim == 1
    if squeeze:
        signal = signal[:, None]
    diff = np.diff(signal, axis=0, prepend=signal[:1])
    out = np.zeros((signal.shape[0], 2 * signal.shape[1]))
    out[:, 0::2] = diff >= threshold
    out[:, 1::2] = diff <= -threshold
    return out


def segment_ecg(
    records,
    *,
    segment_len: int = 1300,
    threshold: float = 0.3,
    split_sizes: tuple = (557, 61, 141),
    n_classes: int = 6,
) -> SequenceDataset:
    """Cut annotated two-electrode recordings into fixed-length segments and
    level-cross encode them (m = 4, per-step labels).

    ``records`` yields (signals (L, 2), labels (L,)) pairs; each recording
    contributes floor(L / segment_len) consecutive segments. Segments fill
    the splits in order; there must be at least sum(split_sizes) of them
    (extras are dropped).
    """
    xs, ys = [], []
    for signals, labels in records:
        signals = np.asarray(signals, dtype=np.float64)
        labels = np.asarray(labels)
        if signals.ndim != 2 or signals.shape[1] != 2:
            raise DataError(f"ECG record must be (L, 2), got {signals.shape}")
        if labels.shape != (signals.shape[0],):
            raise DataError("ECG labels misaligned with the signal")
        for k in range(signals.shape[0] // segment_len):
            sl = slice(k * segment_len, (k + 1) * segment_len)
            xs.append(level_cross_encode(signals[sl], threshold).astype(np.uint8))
            ys.append(labels[sl].astype(np.int32))
    need = sum(split_sizes)
    if len(xs) < need:
        raise DataError(f"only {len(xs)} segments available, need {need}")
    inputs = np.stack(xs[:need])
    labels = np.stack(ys[:need])
    n_train, n_val, n_test = split_sizes
    meta = DatasetMeta(task="ecg", seq_len=segment_len, n_in=4, n_classes=n_classes, delta=0.01, label_mode="step")
    return SequenceDataset(
        meta=meta,
        splits={
            "train": (inputs[:n_train], labels[:n_train]),
            "validation": (inputs[n_train : n_train + n_val], labels[n_train : n_train + n_val]),
            "test": (inputs[n_train + n_val :], labels[n_train + n_val :]),
        },
    )


def _read_csv_rows(path, expect_cols: int, header: str):
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
        if first.replace(" ", "") != header:
            raise DataError(f"{path}:1: expected header '{header}', got '{first}'")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != expect_cols:
                raise DataError(f"{path}:{lineno}: expected {expect_cols} comma-separated fields")
            yield lineno, parts


def load_ecg_dir(dirpath, **kwargs) -> SequenceDataset:
    """Read every ``*.csv`` recording table (header ``v1,v2,label``) from a
    directory, in sorted filename order, and segment/encode them.

    Recordings whose label column is empty on every row are skipped (the
    unannotated case); a partially annotated recording is an error.
    """

    def records():
        files = sorted(f for f in os.listdir(dirpath) if f.endswith(".csv"))
        if not files:
            raise DataError(f"{dirpath}: no ECG recording CSVs found")
        for fname in files:
            path = os.path.join(dirpath, fname)
            v1, v2, lab = [], [], []
            missing = 0
            for lineno, parts in _read_csv_rows(path, 3, "v1,v2,label"):
                try:
                    v1.append(float(parts[0]))
                    v2.append(float(parts[1]))
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad voltage value") from exc
                if parts[2].strip() == "":
                    missing += 1
                    lab.append(-1)
                else:
                    try:
                        lab.append(int(parts[2]))
                    except ValueError as exc:
                        raise DataError(f"{path}:{lineno}: bad label value") from exc
            if missing == len(lab) and missing > 0:
                continue  # unannotated recording: dropped
            if missing > 0:
                raise DataError(f"{path}: {missing} rows lack annotations")
            yield np.stack([v1, v2], axis=1), np.asarray(lab)

    return segment_ecg(records(), **kwargs)


# --- SHD ----------------------------------------------------------------------


def bin_shd(
    times: np.ndarray,
    channels: np.ndarray,
    *,
    bin_width: float = 4e-3,
    seq_len: int = 250,
    n_channels: int = 700,
) -> np.ndarray:
    """Histogram one event stream into (seq_len, n_channels) spike counts.

    Bin index is floor(t / bin_width); events at or beyond the sequence end
    are dropped. Raises DataError on negative times or channels outside
    [0, n_channels).
    """
    times = np.asarray(times, dtype=np.float64)
    channels = np.asarray(channels)
    if times.shape != channels.shape:
        raise DataError("times and channels must align")
    grid = np.zeros((seq_len, n_channels), dtype=np.float64)
    if times.size == 0:
        return grid
    if times.min() < 0:
        raise DataError("negative event time")
    if channels.min() < 0 or channels.max() >= n_channels:
        raise DataError(f"channel outside [0, {n_channels})")
    bins = np.floor(times / bin_width).astype(np.int64)
    keep = bins < seq_len
    np.add.at(grid, (bins[keep], channels[keep].astype(np.int64)), 1.0)
    return grid


def load_shd_dir(root, *, config: EncoderConfig = EncoderConfig(), val_size: int = 815) -> SequenceDataset:
    """Load converted SHD event CSVs.

    Layout: ``root/{train,test}/`` each holding a ``labels.csv``
    (header ``filename,label``) plus the referenced per-sample event files
    (header ``time_s,channel``). Validation is the tail of the train list.
    """
    raw = {}
    for part in ("train", "test"):
        part_dir = os.path.join(root, part)
        manifest = os.path.join(part_dir, "labels.csv")
        if not os.path.isfile(manifest):
            raise DataError(f"{manifest}: missing SHD manifest")
        samples = []
        for lineno, parts in _read_csv_rows(manifest, 2, "filename,label"):
            try:
                label = int(parts[1])
            except ValueError as exc:
                raise DataError(f"{manifest}:{lineno}: bad label") from exc
            samples.append((parts[0].strip(), label))
        xs = np.zeros((len(samples), config.shd_seq_len, config.shd_channels), dtype=np.uint8)
        ys = np.zeros(len(samples), dtype=np.int32)
        for i, (fname, label) in enumerate(samples):
            path = os.path.join(part_dir, fname)
            times, chans = [], []
            for lineno, parts in _read_csv_rows(path, 2, "time_s,channel"):
                try:
                    times.append(float(parts[0]))
                    chans.append(int(parts[1]))
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: bad event row") from exc
            grid = bin_shd(
                np.asarray(times),
                np.asarray(chans, dtype=np.int64),
                bin_width=config.shd_bin_width,
                seq_len=config.shd_seq_len,
                n_channels=config.shd_channels,
            )
            xs[i] = np.minimum(grid, 255).astype(np.uint8)
            ys[i] = label
        raw[part] = (xs, ys)
    x_tr, y_tr = raw["train"]
    if not 0 <= val_size < x_tr.shape[0]:
        raise DataError(f"validation size {val_size} out of range")
    cut = x_tr.shape[0] - val_size
    meta = DatasetMeta(
        task="shd", seq_len=config.shd_seq_len, n_in=config.shd_channels,
        n_classes=20, delta=0.01, label_mode="sequence",
    )
    return SequenceDataset(
        meta=meta,
        splits={
            "train": (x_tr[:cut], y_tr[:cut]),
            "validation": (x_tr[cut:], y_tr[cut:]),
            "test": raw["test"],
        },
    )


# --- binary cache ---------------------------------------------------------------
#
# magic "BRFDAT01", little-endian uint32 header length, UTF-8 header of
# sorted "key=value" lines, then per split (train, validation, test order):
# inputs as raw little-endian arrays of the declared dtype, then labels as
# little-endian int32 ((N,) for sequence labels, (N, T) row-major for
# per-step labels).

_CACHE_MAGIC = b"BRFDAT01"
_CACHE_VERSION = 1
_DTYPE_CODES = {"<f4": "f4", "|u1": "u1", "<f8": "f8"}
_CODE_DTYPES = {"f4": "<f4", "u1": "|u1", "f8": "<f8"}


def save_cache(ds: SequenceDataset, path) -> None:
    names = [s for s in SPLIT_ORDER if s in ds.splits]
    sample = ds.splits[names[0]][0]
    dtype_code = _DTYPE_CODES.get(np.dtype(sample.dtype).newbyteorder("<").str)
    if dtype_code is None:
        raise DataError(f"unsupported cache input dtype {sample.dtype}")
    items = {
        "version": _CACHE_VERSION,
        "task": ds.meta.task,
        "seq_len": ds.meta.seq_len,
        "n_in": ds.meta.n_in,
        "n_classes": ds.meta.n_classes,
        "delta": repr(ds.meta.delta),
        "label_mode": ds.meta.label_mode,
        "input_dtype": dtype_code,
        "splits": ",".join(names),
    }
    for name in names:
        items[f"n_{name}"] = ds.splits[name][0].shape[0]
    header = "".join(f"{k}={items[k]}\n" for k in sorted(items)).encode("utf-8")
    buf = io.BytesIO()
    buf.write(_CACHE_MAGIC)
    buf.write(np.array(len(header), dtype="<u4").tobytes())
    buf.write(header)
    for name in names:
        x, y = ds.splits[name]
        buf.write(np.ascontiguousarray(x, dtype=_CODE_DTYPES[dtype_code]).tobytes())
        buf.write(np.ascontiguousarray(y, dtype="<i4").tobytes())
    with open(path, "wb") as f:
        f.write(buf.getvalue())


def load_cache(path) -> SequenceDataset:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:8] != _CACHE_MAGIC:
        raise DataError(f"{path}: bad dataset cache magic")
    hlen = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    fields = {}
    for line in raw[12 : 12 + hlen].decode("utf-8").splitlines():
        k, _, v = line.partition("=")
        fields[k] = v
    if int(fields.get("version", -1)) != _CACHE_VERSION:
        raise DataError(f"{path}: unsupported cache version")
    meta = DatasetMeta(
        task=fields["task"],
        seq_len=int(fields["seq_len"]),
        n_in=int(fields["n_in"]),
        n_classes=int(fields["n_classes"]),
        delta=float(fields["delta"]),
        label_mode=fields["label_mode"],
    )
    dtype = np.dtype(_CODE_DTYPES[fields["input_dtype"]])
    offset = 12 + hlen
    splits = {}
    for name in fields["splits"].split(","):
        n = int(fields[f"n_{name}"])
        x_bytes = n * meta.seq_len * meta.n_in * dtype.itemsize
        x = np.frombuffer(raw, dtype=dtype, count=n * meta.seq_len * meta.n_in, offset=offset)
        x = x.reshape(n, meta.seq_len, meta.n_in).copy()
        offset += x_bytes
        y_count = n if meta.label_mode == "sequence" else n * meta.seq_len
        y = np.frombuffer(raw, dtype="<i4", count=y_count, offset=offset).astype(np.int32)
        y = y if meta.label_mode == "sequence" else y.reshape(n, meta.seq_len)
        offset += 4 * y_count
        splits[name] = (x, y)
    if offset != len(raw):
        raise DataError(f"{path}: trailing bytes in dataset cache")
    return SequenceDataset(meta=meta, splits=splits)
