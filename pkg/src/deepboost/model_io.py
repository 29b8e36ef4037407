"""Model persistence: a versioned binary container plus a text export.

Container layout: 4 magic bytes, u32 format version, u8 model kind,
u64 payload length, JSON payload, SHA-256 digest of the payload. JSON
serializes float64 via repr, so a round-trip reproduces every parameter
bit-exactly; the digest rejects truncated or altered files outright.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from pathlib import Path

from .boost import StrongClassifier
from .compose import (
    CompositeFeature,
    CompositionConfig,
    FeatureDescriptor,
    PrimitiveFeature,
    PrimitiveLattice,
)
from .config import TrainConfig
from .errors import ChecksumMismatchError, VersionMismatchError
from .gabor import GaborIndex
from .model import DeepBoostModel, LayerModel, MulticlassModel
from .weaklearner import SigmoidStump

MAGIC = b"DBMF"
FORMAT_VERSION = 1
_KIND_BINARY = 0
_KIND_MULTICLASS = 1
_HEADER = struct.Struct("<4sIBQ")


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temp name and rename, so failures leave no partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + f".tmp.{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def save_model(model: DeepBoostModel | MulticlassModel, path: str | os.PathLike) -> None:
    if isinstance(model, MulticlassModel):
        kind, payload = _KIND_MULTICLASS, _multiclass_to_dict(model)
    elif isinstance(model, DeepBoostModel):
        kind, payload = _KIND_BINARY, _binary_to_dict(model)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = _HEADER.pack(MAGIC, FORMAT_VERSION, kind, len(body)) + body + hashlib.sha256(body).digest()
    atomic_write_bytes(path, blob)


def load_model(path: str | os.PathLike) -> DeepBoostModel | MulticlassModel:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:4] != MAGIC:
        raise VersionMismatchError(f"{path}: not a deepboost model file")
    magic, version, kind, length = _HEADER.unpack_from(raw)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: unsupported format version {version}")
    body = raw[_HEADER.size : _HEADER.size + length]
    digest = raw[_HEADER.size + length : _HEADER.size + length + 32]
    if len(body) != length or len(digest) != 32:
        raise ChecksumMismatchError(f"{path}: file is truncated")
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumMismatchError(f"{path}: payload checksum mismatch")
    payload = json.loads(body.decode("utf-8"))
    if kind == _KIND_MULTICLASS:
        return _multiclass_from_dict(payload)
    if kind == _KIND_BINARY:
        return _binary_from_dict(payload)
    raise VersionMismatchError(f"{path}: unknown model kind {kind}")


# --- dict conversions -----------------------------------------------------


def _config_to_dict(cfg: TrainConfig) -> dict:
    c = cfg.composition
    return {
        "support": cfg.support,
        "sigma": cfg.sigma,
        "wavelength": cfg.wavelength,
        "orientations": cfg.orientations,
        "stride": cfg.stride,
        "rounds": list(cfg.rounds),
        "quantile_count": cfg.quantile_count,
        "seed": cfg.seed,
        "composition": {
            "cell_size": c.cell_size,
            "neighborhood": c.neighborhood,
            "max_composites": c.max_composites,
        },
    }


def _config_from_dict(d: dict) -> TrainConfig:
    return TrainConfig(
        support=d["support"],
        sigma=d["sigma"],
        wavelength=d["wavelength"],
        orientations=d["orientations"],
        stride=d["stride"],
        rounds=tuple(d["rounds"]),
        quantile_count=d["quantile_count"],
        seed=d["seed"],
        composition=CompositionConfig(**d["composition"]),
    )


def _descriptor_to_dict(fd: FeatureDescriptor) -> dict:
    out = {"layer": fd.layer, "position": list(fd.position)}
    p = fd.provenance
    if isinstance(p, PrimitiveFeature):
        out["primitive"] = [p.gabor.w, p.gabor.h, p.gabor.alpha, p.gabor.scale]
    else:
        out["composite"] = [p.s, p.t, p.beta_s, p.beta_t]
    return out


def _descriptor_from_dict(d: dict) -> FeatureDescriptor:
    if "primitive" in d:
        w, h, alpha, scale = d["primitive"]
        prov = PrimitiveFeature(GaborIndex(w=w, h=h, alpha=alpha, scale=scale))
    else:
        s, t, bs, bt = d["composite"]
        prov = CompositeFeature(s=s, t=t, beta_s=bs, beta_t=bt)
    return FeatureDescriptor(layer=d["layer"], provenance=prov, position=tuple(d["position"]))


def _layer_to_dict(layer: LayerModel) -> dict:
    sc = layer.classifier
    if isinstance(layer.candidates, PrimitiveLattice):
        cands = {
            "kind": "lattice",
            "image_size": layer.candidates.image_size,
            "stride": layer.candidates.stride,
            "orientations": layer.candidates.orientations,
        }
    else:
        cands = {"kind": "list", "features": [_descriptor_to_dict(f) for f in layer.candidates]}
    return {
        "candidates": cands,
        "stumps": [[s.d, s.delta, s.a, s.b] for s in sc.stumps],
        "stump_train_errors": list(sc.stump_train_errors),
        "layer_index": sc.layer_index,
        "composites": [list(c) for c in layer.composites_out],
    }


def _layer_from_dict(d: dict) -> LayerModel:
    c = d["candidates"]
    if c["kind"] == "lattice":
        candidates = PrimitiveLattice(c["image_size"], c["stride"], c["orientations"])
    else:
        candidates = [_descriptor_from_dict(f) for f in c["features"]]
    sc = StrongClassifier(
        stumps=[SigmoidStump(d=s[0], delta=s[1], a=s[2], b=s[3]) for s in d["stumps"]],
        stump_train_errors=list(d["stump_train_errors"]),
        layer_index=d["layer_index"],
    )
    composites = [(c[0], c[1], c[2], c[3]) for c in d["composites"]]
    return LayerModel(candidates=candidates, classifier=sc, composites_out=composites)


def _binary_to_dict(model: DeepBoostModel) -> dict:
    return {
        "config": _config_to_dict(model.config),
        "positive_class": model.positive_class,
        "seed": model.seed,
        "layers": [_layer_to_dict(l) for l in model.layers],
    }


def _binary_from_dict(d: dict) -> DeepBoostModel:
    return DeepBoostModel(
        layers=[_layer_from_dict(l) for l in d["layers"]],
        config=_config_from_dict(d["config"]),
        positive_class=d["positive_class"],
        seed=d["seed"],
    )


def _multiclass_to_dict(mc: MulticlassModel) -> dict:
    return {
        "class_names": list(mc.class_names),
        "binaries": [_binary_to_dict(b) for b in mc.binaries],
    }


def _multiclass_from_dict(d: dict) -> MulticlassModel:
    return MulticlassModel(
        class_names=list(d["class_names"]),
        binaries=[_binary_from_dict(b) for b in d["binaries"]],
    )


# --- text export ------------------------------------------------------------


def export_text(model: DeepBoostModel | MulticlassModel) -> str:
    """Lossless structured-text dump of descriptors and stumps.

    One record per line. Layer-1 candidates form the full response lattice,
    so only the stump-referenced primitives are listed; composite layers
    list every candidate.
    """
    if isinstance(model, MulticlassModel):
        parts = [f"multiclass classes={','.join(model.class_names)}"]
        for b in model.binaries:
            parts.append(export_text(b))
        return "\n".join(parts)

    lines = [
        f"binary positive_class={model.positive_class} layers={model.layer_count} "
        f"seed={model.seed}"
    ]
    for layer in model.layers:
        sc = layer.classifier
        li = sc.layer_index
        for m, (s, err) in enumerate(zip(sc.stumps, sc.stump_train_errors)):
            lines.append(
                f"stump layer={li} round={m} d={s.d} delta={s.delta!r} "
                f"a={s.a!r} b={s.b!r} err={err!r}"
            )
        if isinstance(layer.candidates, PrimitiveLattice):
            for d in sorted({s.d for s in sc.stumps}):
                fd = layer.candidates[d]
                g = fd.provenance.gabor
                lines.append(
                    f"feature layer={li} dim={d} provenance=primitive "
                    f"w={g.w} h={g.h} alpha={g.alpha} scale={g.scale} "
                    f"position=({fd.position[0]},{fd.position[1]})"
                )
        else:
            for d, fd in enumerate(layer.candidates):
                p = fd.provenance
                lines.append(
                    f"feature layer={li} dim={d} provenance=composite "
                    f"s={p.s} t={p.t} beta_s={p.beta_s!r} beta_t={p.beta_t!r} "
                    f"position=({fd.position[0]},{fd.position[1]})"
                )
    return "\n".join(lines)
