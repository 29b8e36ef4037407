"""Dataset ingestion: decoding, grayscale conversion, canonical resizing,
and reproducible train/test splitting.

Dataset layout is one subdirectory per class under a root; class indices
follow lexicographic directory order so runs are reproducible. All feature
extraction downstream operates on the canonical 120x120 grid.
"""

from __future__ import annotations

import dataclasses
import os
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptImageError,
    DegenerateImageError,
    InsufficientClassSizeError,
    UnsupportedChannelCountError,
    UnsupportedFormatError,
)
from .rng import SplitMix64, derive_seed

CANONICAL_SIZE = 120
SUPPORTED_EXTENSIONS = {".png", ".jpg", ".jpeg", ".pgm"}

# BT.601 luminance weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclasses.dataclass
class RawImage:
    """Decoded 8-bit image, grayscale (h, w) or RGB (h, w, 3)."""

    width: int
    height: int
    channels: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        if self.pixels.size != self.width * self.height * self.channels:
            raise ValueError("pixel buffer does not match dimensions")


def load_image(path: str | os.PathLike) -> RawImage:
    """Decode a PNG/JPEG/PGM file into a RawImage.

    Palette/alpha images are normalized to RGB at decode time; grayscale
    stays single-channel.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image: {path}")
    if path.suffix.lower() not in SUPPORTED_EXTENSIONS:
        raise UnsupportedFormatError(f"unsupported format {path.suffix!r}: {path}")
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "RGB"):
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise CorruptImageError(f"cannot decode {path}: {exc}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"corrupt image {path}: {exc}") from exc
    channels = 1 if arr.ndim == 2 else arr.shape[2]
    return RawImage(width=arr.shape[1], height=arr.shape[0], channels=channels, pixels=arr)


def to_grayscale(img: RawImage) -> RawImage:
    """BT.601 luminance conversion, rounded half-up; identity on gray input."""
    if img.channels == 1:
        return img
    if img.channels != 3:
        raise UnsupportedChannelCountError(f"expected 1 or 3 channels, got {img.channels}")
    lum = img.pixels.astype(np.float64) @ _LUMA
    gray = np.floor(lum + 0.5).astype(np.uint8)
    return RawImage(width=img.width, height=img.height, channels=1, pixels=gray)


def resize_to_canonical(img: RawImage, size: int = CANONICAL_SIZE) -> np.ndarray:
    """Resize a grayscale image to the canonical lattice, scaled to [0, 1].

    Bilinear interpolation with corner-aligned sampling: output corners map
    exactly onto input corners, so a size-preserving call is the identity.
    """
    if img.channels != 1:
        raise UnsupportedChannelCountError("resize expects a grayscale image")
    if img.width < 2 or img.height < 2:
        raise DegenerateImageError(f"cannot resample a {img.width}x{img.height} image")
    src = img.pixels.astype(np.float64)
    out = _bilinear_resample(src, size, size)
    return out / 255.0


def _bilinear_resample(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    in_h, in_w = src.shape
    rows = np.arange(out_h) * ((in_h - 1) / (out_h - 1))
    cols = np.arange(out_w) * ((in_w - 1) / (out_w - 1))
    r0 = np.minimum(np.floor(rows).astype(int), in_h - 2)
    c0 = np.minimum(np.floor(cols).astype(int), in_w - 2)
    fr = (rows - r0)[:, None]
    fc = (cols - c0)[None, :]
    top = src[r0][:, c0] * (1 - fc) + src[r0][:, c0 + 1] * fc
    bot = src[r0 + 1][:, c0] * (1 - fc) + src[r0 + 1][:, c0 + 1] * fc
    return top * (1 - fr) + bot * fr


def load_canonical(path: str | os.PathLike) -> np.ndarray:
    """Load, grayscale-convert, and resize one file to the 120x120 grid."""
    return resize_to_canonical(to_grayscale(load_image(path)))


# --- datasets and splits -----------------------------------------------------


@dataclasses.dataclass
class LabeledDataset:
    """Items as (path relative to root, class index) with ordered class names."""

    root: Path
    items: list[tuple[str, int]]
    class_names: list[str]

    def class_items(self, class_index: int) -> list[str]:
        return [p for p, c in self.items if c == class_index]

    def __len__(self) -> int:
        return len(self.items)


@dataclasses.dataclass
class SplitSpec:
    train_per_class: int
    seed: int
    repeats: int = 1

    def __post_init__(self):
        if self.train_per_class < 1:
            raise ValueError("train_per_class must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


def scan_dataset(root: str | os.PathLike) -> LabeledDataset:
    """Scan a directory-per-class dataset root.

    Class order is lexicographic directory name; items within a class are
    sorted by filename.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root is not a directory: {root}")
    class_names = sorted(d.name for d in root.iterdir() if d.is_dir())
    items: list[tuple[str, int]] = []
    for idx, name in enumerate(class_names):
        files = sorted(
            f.name for f in (root / name).iterdir()
            if f.is_file() and f.suffix.lower() in SUPPORTED_EXTENSIONS
        )
        items.extend((f"{name}/{f}", idx) for f in files)
    return LabeledDataset(root=root, items=items, class_names=class_names)


def split_dataset(
    ds: LabeledDataset, spec: SplitSpec, repeat_index: int = 0
) -> tuple[LabeledDataset, LabeledDataset]:
    """Per-class random split, deterministic in (seed, repeat_index).

    Every class must have strictly more items than train_per_class so the
    test side is non-empty.
    """
    train_items: list[tuple[str, int]] = []
    test_items: list[tuple[str, int]] = []
    for idx in range(len(ds.class_names)):
        paths = sorted(ds.class_items(idx))
        if len(paths) <= spec.train_per_class:
            raise InsufficientClassSizeError(
                f"class {ds.class_names[idx]!r} has {len(paths)} items, "
                f"needs > {spec.train_per_class}"
            )
        rng = SplitMix64(derive_seed(spec.seed, repeat_index, idx))
        rng.shuffle(paths)
        chosen = set(paths[: spec.train_per_class])
        for p in sorted(paths):
            (train_items if p in chosen else test_items).append((p, idx))
    train = LabeledDataset(root=ds.root, items=train_items, class_names=list(ds.class_names))
    test = LabeledDataset(root=ds.root, items=test_items, class_names=list(ds.class_names))
    return train, test


def manifest_text(train: LabeledDataset, test: LabeledDataset) -> str:
    """Render a split manifest: one `<relpath>\\t<class>\\t<train|test>` line per item."""
    lines = [f"{relpath}\t{idx}\ttrain" for relpath, idx in train.items]
    lines += [f"{relpath}\t{idx}\ttest" for relpath, idx in test.items]
    lines.sort()  # canonical order: relative path is unique per item
    return "\n".join(lines) + "\n"


def write_manifest(path: str | os.PathLike, train: LabeledDataset, test: LabeledDataset) -> None:
    Path(path).write_text(manifest_text(train, test), encoding="utf-8")


def read_manifest(
    path: str | os.PathLike, ds: LabeledDataset
) -> tuple[LabeledDataset, LabeledDataset]:
    """Read a manifest back against a scanned dataset, validating class indices."""
    train_items: list[tuple[str, int]] = []
    test_items: list[tuple[str, int]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            relpath, idx_s, part = line.split("\t")
            idx = int(idx_s)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed manifest line") from exc
        if not 0 <= idx < len(ds.class_names):
            raise ValueError(f"{path}:{lineno}: class index {idx} out of range")
        if relpath.split("/", 1)[0] != ds.class_names[idx]:
            raise ValueError(f"{path}:{lineno}: path does not match class {idx}")
        if part == "train":
            train_items.append((relpath, idx))
        elif part == "test":
            test_items.append((relpath, idx))
        else:
            raise ValueError(f"{path}:{lineno}: expected train|test, got {part!r}")
    train = LabeledDataset(root=ds.root, items=train_items, class_names=list(ds.class_names))
    test = LabeledDataset(root=ds.root, items=test_items, class_names=list(ds.class_names))
    return train, test
