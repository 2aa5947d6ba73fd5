"""Parameter checkpoint archive.

A checkpoint is a single zip file holding ``config.json`` (model config, the
mask-block length k, language inventory, training mode, plus a manifest of
tensor names/shapes) and one ``tensors/<name>.npy`` entry per parameter,
stored as little-endian 32-bit floats.
"""

from __future__ import annotations

import hashlib
import io
import json
import zipfile

import numpy as np

from .encoder import EncoderParams, ModelConfig, tensor_shapes

FORMAT_NAME = "revdict-checkpoint"
FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path: str, params: EncoderParams, meta: dict | None = None) -> None:
    """Write params (cast to little-endian float32) plus metadata to ``path``.

    ``meta`` usually carries {"k", "languages", "mode"} from the training run.
    """
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": params.config.to_json(),
        "tensors": [
            {"name": name, "shape": list(t.shape), "dtype": "<f4"}
            for name, t in params.tensors.items()
        ],
    }
    if meta:
        header.update(meta)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("config.json", json.dumps(header, indent=1, sort_keys=True))
        for name, t in params.tensors.items():
            buf = io.BytesIO()
            np.save(buf, np.ascontiguousarray(t, dtype="<f4"))
            zf.writestr(f"tensors/{name}.npy", buf.getvalue())


def load_checkpoint(path: str) -> tuple[EncoderParams, dict, str]:
    """Read a checkpoint; returns (params, header, model_id).

    ``model_id`` is a short content digest of the archive, used by the query
    service to identify the loaded snapshot.
    """
    with open(path, "rb") as f:
        raw = f.read()
    model_id = hashlib.sha256(raw).hexdigest()[:12]
    with zipfile.ZipFile(io.BytesIO(raw)) as zf:
        try:
            header = json.loads(zf.read("config.json"))
        except KeyError:
            raise CheckpointError(f"{path}: missing config.json") from None
        if header.get("format") != FORMAT_NAME:
            raise CheckpointError(f"{path}: not a {FORMAT_NAME} archive")
        config = ModelConfig.from_json(header["config"])
        expected = tensor_shapes(config)
        tensors: dict[str, np.ndarray] = {}
        for entry in header["tensors"]:
            name = entry["name"]
            arr = np.load(io.BytesIO(zf.read(f"tensors/{name}.npy")))
            if name not in expected:
                raise CheckpointError(f"{path}: unexpected tensor {name}")
            if tuple(arr.shape) != expected[name]:
                raise CheckpointError(
                    f"{path}: tensor {name} has shape {arr.shape}, "
                    f"expected {expected[name]}")
            tensors[name] = arr.astype(np.float32)
        missing = set(expected) - set(tensors)
        if missing:
            raise CheckpointError(f"{path}: missing tensors {sorted(missing)}")
    return EncoderParams(config, tensors), header, model_id
