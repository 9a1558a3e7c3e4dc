"""Model checkpoints as NumPy ``.npz`` archives.

Layout (format_version 1)::

    meta                 JSON string: format_version, n_classes, n_transforms,
                         embed_dim, backbone {kind, input_shape, layer_sizes},
                         heads (subset of ["w", "u", "v"])
    backbone.<k>.weight  float64 [width_k, fan_in_k]
    backbone.<k>.bias    float64 [width_k]
    head.w               float64 [N*M, D]   row i*M + j is w_ij
    head.u               float64 [N, D]
    head.v               float64 [M, D]

Keys are written in sorted order with a fixed zip timestamp, so saving the same
model twice yields identical bytes.
"""

from __future__ import annotations

import io
import json
import logging
import zipfile
from pathlib import Path
from typing import Dict

import numpy as np

from sla_lab.domain.errors import FormatError
from sla_lab.domain.model import Backbone, BackboneKind, JointHead, SlaModel
from sla_lab.domain.ports import CheckpointStore
from sla_lab.domain.tensor import Parameter, Tensor

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)


class NpzCheckpointStore(CheckpointStore):

    def save(self, model: SlaModel, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        heads = [h for h, p in (("w", model.joint), ("u", model.u), ("v", model.v)) if p is not None]
        meta = {
            "format_version": FORMAT_VERSION,
            "n_classes": model.n_classes,
            "n_transforms": model.n_transforms,
            "embed_dim": model.embed_dim,
            "backbone": model.backbone.describe(),
            "heads": heads,
        }
        arrays: Dict[str, np.ndarray] = {p.name: p.tensor.data for p in model.parameters()}
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
            self._add(zf, "meta", np.array(json.dumps(meta, sort_keys=True)))
            for key in sorted(arrays):
                self._add(zf, key, arrays[key])
        logger.info(f"[checkpoint] saved {len(arrays)} arrays to {path}")
        return path

    @staticmethod
    def _add(zf: zipfile.ZipFile, key: str, array: np.ndarray) -> None:
        buf = io.BytesIO()
        # ascontiguousarray promotes 0-d to shape (1,)
        array = array if array.ndim == 0 else np.ascontiguousarray(array)
        np.lib.format.write_array(buf, array, allow_pickle=False)
        info = zipfile.ZipInfo(f"{key}.npy", date_time=_EPOCH)
        zf.writestr(info, buf.getvalue())

    def load(self, path: Path) -> SlaModel:
        path = Path(path)
        try:
            with np.load(path, allow_pickle=False) as archive:
                arrays = {k: archive[k] for k in archive.files}
        except (OSError, ValueError, zipfile.BadZipFile) as exc:
            raise FormatError(f"{path}: not a readable checkpoint ({exc})") from exc
        if "meta" not in arrays:
            raise FormatError(f"{path}: checkpoint has no meta record")
        try:
            meta = json.loads(str(arrays.pop("meta").reshape(-1)[0]))
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}: meta record is not valid JSON ({exc})") from exc
        if not isinstance(meta, dict) or meta.get("format_version") != FORMAT_VERSION:
            version = meta.get("format_version") if isinstance(meta, dict) else None
            raise FormatError(f"{path}: unsupported checkpoint version {version!r}")

        def param(name: str) -> Parameter:
            if name not in arrays:
                raise FormatError(f"{path}: missing array {name}")
            return Parameter(name, Tensor(arrays[name].astype(np.float64)))

        try:
            spec = meta["backbone"]
            backbone = Backbone(BackboneKind(spec["kind"]), tuple(spec["input_shape"]))
            n_layers = len(spec["layer_sizes"])
            n, m = int(meta["n_classes"]), int(meta["n_transforms"])
            heads, embed_dim = meta["heads"], meta["embed_dim"]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: incomplete meta record ({exc!r})") from exc
        for k in range(n_layers):
            backbone.layers.append((param(f"backbone.{k}.weight"), param(f"backbone.{k}.bias")))
        model = SlaModel(backbone=backbone, n_classes=n, n_transforms=m)
        if "w" in heads:
            model.joint = JointHead(param("head.w"), n, m)
        if "u" in heads:
            model.u = param("head.u")
        if "v" in heads:
            model.v = param("head.v")
        if model.embed_dim != embed_dim:
            raise FormatError(f"{path}: embed_dim {meta['embed_dim']} disagrees with stored weights")
        logger.info(f"[checkpoint] loaded {path} (N={n}, M={m}, D={model.embed_dim})")
        return model
