"""Self-describing, byte-deterministic model checkpoints.

Layout: one UTF-8 JSON header line (format tag, full run config, array names
and shapes in order), then the arrays as raw little-endian float64 in C
order, concatenated. Writing the same parameters and config twice produces
byte-identical files; archive containers were rejected because they embed
timestamps.
"""

from __future__ import annotations

import json

import numpy as np

from .config import RunConfig
from .forecaster import ForecastModel, init_model

__all__ = ["save_checkpoint", "load_checkpoint", "FORMAT_TAG"]

FORMAT_TAG = "snce-checkpoint"
VERSION = 1


def _named_arrays(model: ForecastModel) -> list[tuple[str, np.ndarray]]:
    out = []
    for name, net in model.nets():
        for k, (w, b) in enumerate(zip(net.weights, net.biases)):
            out.append((f"{name}.w{k}", w))
            out.append((f"{name}.b{k}", b))
    return out


def save_checkpoint(path: str, model: ForecastModel, run: RunConfig):
    arrays = _named_arrays(model)
    header = {
        "format": FORMAT_TAG,
        "version": VERSION,
        "config": run.to_dict(),
        "arrays": [{"name": n, "shape": list(a.shape)} for n, a in arrays],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True,
                            separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_checkpoint(path: str) -> tuple[ForecastModel, RunConfig]:
    """Rebuild the model from the stored config, then load its parameters."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: not a checkpoint file ({exc})") from None
    if header.get("format") != FORMAT_TAG:
        raise ValueError(f"{path}: unexpected format tag {header.get('format')!r}")
    if header.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported version {header.get('version')!r}")

    run = RunConfig.from_dict(header["config"])
    model = init_model(run)
    want = {n: a for n, a in _named_arrays(model)}
    offset = 0
    seen = set()
    for entry in header["arrays"]:
        name, shape = entry["name"], tuple(entry["shape"])
        if name not in want:
            raise ValueError(f"{path}: unknown array {name!r}")
        target = want[name]
        if target.shape != shape:
            raise ValueError(
                f"{path}: array {name!r} has shape {shape}, "
                f"model built from the stored config expects {target.shape}")
        nbytes = int(np.prod(shape)) * 8
        if offset + nbytes > len(blob):
            raise ValueError(f"{path}: truncated at array {name!r}")
        target[...] = np.frombuffer(
            blob, dtype="<f8", count=int(np.prod(shape)),
            offset=offset).reshape(shape)
        offset += nbytes
        seen.add(name)
    if seen != set(want):
        missing = sorted(set(want) - seen)
        raise ValueError(f"{path}: missing arrays {missing}")
    if offset != len(blob):
        raise ValueError(f"{path}: {len(blob) - offset} trailing bytes")
    model.assert_finite()
    return model, run
