"""File formats used by the command-line tools.

* Channel CSV: one header row of channel names, then one row per sample,
  one column per channel.  Floats are written with 17 significant digits so
  a write/read cycle is bit-exact.
* WAV: 16-bit PCM mono per channel, values scaled to [-1, 1).
* Trace: line-delimited JSON, one object per accepted iteration with keys
  t, F, step_norm, lambda, rejected, ortho_drift.
* Run manifest: one JSON object recording command, configuration, inputs,
  seeds and outputs, sufficient to replay a run bit-identically.
"""

import json
import wave
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"
PRNG_NAME = "numpy PCG64 (numpy.random.default_rng)"


class DataFormatError(ValueError):
    """Malformed input data; message names the file and offending line."""


def write_channels_csv(path, x: np.ndarray, names=None) -> None:
    """Write an (n, t) channel matrix as sample rows under a name header."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if names is None:
        names = [f"ch{i + 1}" for i in range(n)]
    if len(names) != n:
        raise ValueError(f"got {len(names)} names for {n} channels")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for s in range(x.shape[1]):
            fh.write(",".join(FLOAT_FMT % v for v in x[:, s]) + "\n")


def read_channels_csv(path) -> tuple[np.ndarray, list[str]]:
    """Read a channel CSV back into an (n, t) matrix plus channel names."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise DataFormatError(f"{path}: empty file")
    names = [c.strip() for c in lines[0].split(",")]
    n = len(names)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != n:
            raise DataFormatError(
                f"{path}:{lineno}: expected {n} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    if len(rows) < 2:
        raise DataFormatError(f"{path}: need at least two sample rows")
    return np.array(rows).T, names


def write_matrix_csv(path, a: np.ndarray) -> None:
    """Write a square matrix, one row per line, with a column-name header."""
    a = np.asarray(a, dtype=float)
    write_channels_csv(path, a.T, names=[f"c{j + 1}" for j in range(a.shape[1])])


def read_matrix_csv(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix_csv`."""
    x, _ = read_channels_csv(path)
    return x.T


def write_wav(path, x: np.ndarray, rate: int = 16000) -> None:
    """Write one channel as 16-bit PCM mono; values are clipped to [-1, 1)."""
    x = np.asarray(x, dtype=float)
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM mono file into floats in [-1, 1) plus its rate."""
    try:
        with wave.open(str(path), "rb") as fh:
            if fh.getnchannels() != 1:
                raise DataFormatError(f"{path}: expected mono, got "
                                      f"{fh.getnchannels()} channels")
            if fh.getsampwidth() != 2:
                raise DataFormatError(f"{path}: expected 16-bit samples, got "
                                      f"{8 * fh.getsampwidth()}-bit")
            frames = fh.readframes(fh.getnframes())
            rate = fh.getframerate()
    except wave.Error as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    return np.frombuffer(frames, dtype="<i2").astype(float) / 32768.0, rate


def write_trace_jsonl(path, trace) -> None:
    """One JSON object per accepted iteration, fixed key names."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in trace:
            fh.write(json.dumps({
                "t": rec.t,
                "F": rec.f,
                "step_norm": rec.step_norm,
                "lambda": rec.lam,
                "rejected": rec.rejected,
                "ortho_drift": rec.ortho_drift,
            }) + "\n")


def read_trace_jsonl(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to replay a command bit-identically."""

    command: str
    argv: list[str]
    config: dict
    inputs: list[str]
    seeds: dict
    outputs: list[str]
    version: str
    prng: str = PRNG_NAME
    extra: dict = field(default_factory=dict)


def write_manifest(path, manifest: RunManifest) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
