"""
Checkpoint container.

A checkpoint is a numpy ``.npz`` archive with one array per entry::

    param/<name>        parameter values
    buffer/<name>       running statistics and other buffers
    adam/t              optimiser step counter
    adam/m/<name>       first moment per trainable parameter
    adam/v/<name>       second moment per trainable parameter
    __meta__            JSON document (model config, hashes, statistics)

Loading never unpickles, and a save/load round trip is value-exact.
"""

import json
import logging
import os
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from radchar.apps.core.exceptions import CheckpointFormatError

from .layers import Module
from .optim import Adam

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
META_KEY = "__meta__"


@dataclass
class Checkpoint:
    params: Dict[str, np.ndarray]
    buffers: Dict[str, np.ndarray]
    meta: Dict[str, Any]
    optimizer: Optional[Dict[str, Any]] = field(default=None)

    def restore(self, model: Module, optimizer: Optional[Adam] = None) -> Module:
        """Load the stored weights (and optimiser moments) into live objects."""
        try:
            model.load_state_dict(self.params, self.buffers)
        except Exception as exc:
            raise CheckpointFormatError(f"Checkpoint does not fit the model: {exc}") from exc
        if optimizer is not None and self.optimizer is not None:
            optimizer.load_state_dict(self.optimizer)
        return model


def save_checkpoint(
    path: Path,
    model: Module,
    optimizer: Optional[Adam] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    arrays: Dict[str, np.ndarray] = {}
    state = model.state_dict()
    for name, value in state["params"].items():
        arrays[f"param/{name}"] = value
    for name, value in state["buffers"].items():
        arrays[f"buffer/{name}"] = value
    if optimizer is not None:
        opt_state = optimizer.state_dict()
        arrays["adam/t"] = np.array(opt_state["t"], dtype=np.int64)
        for name, value in opt_state["m"].items():
            arrays[f"adam/m/{name}"] = value
        for name, value in opt_state["v"].items():
            arrays[f"adam/v/{name}"] = value

    document = {"checkpoint_version": CHECKPOINT_VERSION, **(meta or {})}
    arrays[META_KEY] = np.array(json.dumps(document, sort_keys=True))

    tmp_path = path.with_name(path.name + ".partial")
    with open(tmp_path, "wb") as handle:
        np.savez(handle, **arrays)
    os.replace(tmp_path, path)
    logger.debug("Saved checkpoint %s (%d arrays)", path, len(arrays))
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    """
    Read a checkpoint written by ``save_checkpoint``.

    Raises:
        OSError: The file cannot be opened.
        CheckpointFormatError: The archive is corrupt, lacks metadata or
            was written by an unknown version.
    """
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            entries = {key: archive[key] for key in archive.files}
    except (zipfile.BadZipFile, ValueError, EOFError) as exc:
        raise CheckpointFormatError(f"{path} is not a checkpoint archive: {exc}") from exc

    if META_KEY not in entries:
        raise CheckpointFormatError(f"{path} has no metadata entry")
    try:
        meta = json.loads(str(entries.pop(META_KEY)))
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(f"{path} metadata is not valid JSON: {exc}") from exc
    if meta.get("checkpoint_version") != CHECKPOINT_VERSION:
        raise CheckpointFormatError(f"Unsupported checkpoint version {meta.get('checkpoint_version')}")

    params, buffers, m, v = {}, {}, {}, {}
    step = None
    for key, value in entries.items():
        if key.startswith("param/"):
            params[key[len("param/"):]] = value
        elif key.startswith("buffer/"):
            buffers[key[len("buffer/"):]] = value
        elif key.startswith("adam/m/"):
            m[key[len("adam/m/"):]] = value
        elif key.startswith("adam/v/"):
            v[key[len("adam/v/"):]] = value
        elif key == "adam/t":
            step = int(value)
        else:
            raise CheckpointFormatError(f"{path} has an unknown entry {key!r}")

    optimizer = {"t": step, "m": m, "v": v} if step is not None else None
    return Checkpoint(params=params, buffers=buffers, meta=meta, optimizer=optimizer)
