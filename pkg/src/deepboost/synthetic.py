"""Synthetic bar-image datasets for experiments and the test suite.

Two generators:

* make_two_bar_dataset: class "near" draws an oriented bar pair in a fixed
  tight configuration at a random anchor site; class "far" draws the same
  two bars at widely separated sites. Single-feature statistics are close
  between the classes, so separating them rewards features that capture
  the co-occurrence - the compositional layer's job.

* make_orientation_dataset: one class per bar orientation, bar placed near
  the image center with positional jitter.

Images are written as 8-bit PGM files in one directory per class.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .rng import derive_seed

SIZE = 120

#: anchor sites form a coarse 3x3 grid over the canvas
SITE_CENTERS = (24, 60, 96)


def render_bars(
    bars: list[tuple[float, float, float, float, float]],
    rng: np.random.Generator,
    size: int = SIZE,
    background: float = 0.15,
    noise: float = 0.05,
    intensity: float = 0.85,
) -> np.ndarray:
    """Draw anti-aliased bars (cy, cx, angle_rad, length, width) over noise."""
    img = np.clip(rng.normal(background, noise, size=(size, size)), 0.0, 1.0)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    for cy, cx, angle, length, width in bars:
        dy, dx = np.sin(angle), np.cos(angle)
        vy, vx = yy - cy, xx - cx
        t = np.clip(vy * dy + vx * dx, -length / 2.0, length / 2.0)
        dist = np.hypot(vy - t * dy, vx - t * dx)
        coverage = np.clip(width / 2.0 + 0.5 - dist, 0.0, 1.0)
        img = np.maximum(img, background + (intensity - background) * coverage)
    return np.clip(img, 0.0, 1.0)


def _save_pgm(img: np.ndarray, path: Path) -> None:
    Image.fromarray(np.round(img * 255).astype(np.uint8)).save(path)


def _sites(rng: np.random.Generator, count: int, min_cheb: int) -> list[tuple[int, int]]:
    """Pick `count` of the nine anchor sites, pairwise at least `min_cheb`
    grid steps apart (in Chebyshev distance)."""
    grid = [(r, c) for r in range(3) for c in range(3)]
    while True:
        picks = [grid[i] for i in rng.choice(len(grid), size=count, replace=False)]
        ok = all(
            max(abs(a[0] - b[0]), abs(a[1] - b[1])) >= min_cheb
            for i, a in enumerate(picks)
            for b in picks[i + 1 :]
        )
        if ok:
            return [(SITE_CENTERS[r], SITE_CENTERS[c]) for r, c in picks]


def two_bar_image(rng: np.random.Generator, near: bool) -> np.ndarray:
    """One sample of the near/far pair task.

    Both classes contain one 45-degree and one 135-degree bar; only the
    distance between the bars differs.
    """
    length, width = 26.0, 3.0
    jitter = lambda: rng.uniform(-2.0, 2.0)
    a1, a2 = np.pi / 4.0, 3.0 * np.pi / 4.0
    if near:
        (sy, sx), = _sites(rng, 1, 0)
        bars = [
            (sy - 7 + jitter(), sx - 7 + jitter(), a1, length, width),
            (sy + 7 + jitter(), sx + 7 + jitter(), a2, length, width),
        ]
    else:
        (s1y, s1x), (s2y, s2x) = _sites(rng, 2, 2)
        bars = [
            (s1y + jitter(), s1x + jitter(), a1, length, width),
            (s2y + jitter(), s2x + jitter(), a2, length, width),
        ]
    return render_bars(bars, rng)


def make_two_bar_dataset(root: str | Path, images_per_class: int = 200, seed: int = 7) -> Path:
    root = Path(root)
    for name in ("near", "far"):
        cls_dir = root / name
        cls_dir.mkdir(parents=True, exist_ok=True)
        for i in range(images_per_class):
            rng = np.random.default_rng(derive_seed(seed, name, i))
            _save_pgm(two_bar_image(rng, near=(name == "near")), cls_dir / f"{i:04d}.pgm")
    return root


def make_orientation_dataset(
    root: str | Path,
    images_per_class: int = 200,
    seed: int = 7,
    angles_deg: tuple[float, ...] = (0.0, 60.0, 120.0),
) -> Path:
    root = Path(root)
    for angle in angles_deg:
        name = f"ori{int(round(angle)):03d}"
        cls_dir = root / name
        cls_dir.mkdir(parents=True, exist_ok=True)
        for i in range(images_per_class):
            rng = np.random.default_rng(derive_seed(seed, name, i))
            cy = 60.0 + rng.uniform(-10.0, 10.0)
            cx = 60.0 + rng.uniform(-10.0, 10.0)
            img = render_bars([(cy, cx, np.radians(angle), 40.0, 3.5)], rng)
            _save_pgm(img, cls_dir / f"{i:04d}.pgm")
    return root
