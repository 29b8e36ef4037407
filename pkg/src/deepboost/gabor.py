"""Gabor wavelet filter bank and normalized feature responses.

The bank holds one even (cosine) / odd (sine) kernel pair per orientation.
Orientation 0 is sampled analytically; the remaining orientations are
bilinear rotations of that base pair, so the bank's rotation property holds
by construction. The even kernel is DC-corrected and both kernels carry
unit L2 norm, which makes a constant image respond with exactly zero
energy everywhere.

Per-image energies are normalized by the mean squared response over all
retained positions and orientations; the positive square root of the
normalized energy is the layer-1 feature value. This makes responses
comparable across images and invariant to contrast scaling.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from .errors import InvalidFilterConfigError

#: below this total-energy level an image is treated as constant
XI_SQUARED_EPSILON = 1e-12


@dataclasses.dataclass(frozen=True)
class GaborIndex:
    """Position, orientation, and scale of one primitive feature."""

    w: int      # column on the canonical lattice
    h: int      # row on the canonical lattice
    alpha: int  # orientation index, 0..A-1
    scale: int = 0


@dataclasses.dataclass(eq=False)
class FilterBank:
    support: int
    sigma: float
    wavelength: float
    orientations: int
    even: np.ndarray  # (A, support, support)
    odd: np.ndarray   # (A, support, support)
    _fft_cache: dict = dataclasses.field(default_factory=dict, repr=False)

    def config_tuple(self) -> tuple:
        return (self.support, self.sigma, self.wavelength, self.orientations)


def build_filter_bank(
    support: int = 17,
    sigma: float = 5.0,
    wavelength: float = 8.0,
    orientations: int = 8,
) -> FilterBank:
    """Construct the even/odd kernel pairs for all orientations.

    Orientation k points the carrier wave along angle k*pi/A, measured from
    the +x (column) axis toward +y (row). Kernels at k > 0 are bilinear
    rotations of the base pair; every even kernel is mean-subtracted and
    every kernel is scaled to unit L2 norm.
    """
    if support < 5 or support % 2 == 0:
        raise InvalidFilterConfigError(f"support must be odd and >= 5, got {support}")
    if sigma <= 0 or wavelength <= 0:
        raise InvalidFilterConfigError("sigma and wavelength must be positive")
    if orientations < 2:
        raise InvalidFilterConfigError("need at least 2 orientations")

    r = support // 2
    y, x = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    envelope = np.exp(-(x**2 + y**2) / (2.0 * sigma**2))
    base_even = envelope * np.cos(2.0 * np.pi * x / wavelength)
    base_even -= base_even.mean()
    base_even /= np.linalg.norm(base_even)
    base_odd = envelope * np.sin(2.0 * np.pi * x / wavelength)
    base_odd /= np.linalg.norm(base_odd)

    even = np.empty((orientations, support, support))
    odd = np.empty((orientations, support, support))
    even[0], odd[0] = base_even, base_odd
    for k in range(1, orientations):
        theta = k * np.pi / orientations
        ek = _rotate_bilinear(base_even, theta)
        ek = ek - ek.mean()
        even[k] = ek / np.linalg.norm(ek)
        ok = _rotate_bilinear(base_odd, theta)
        odd[k] = ok / np.linalg.norm(ok)
    return FilterBank(support, float(sigma), float(wavelength), orientations, even, odd)


def _rotate_bilinear(img: np.ndarray, theta: float) -> np.ndarray:
    """Rotate a square kernel about its center, sampling bilinearly.

    Positive theta turns the +x axis toward +y (rows increase downward);
    samples falling outside the kernel read as zero.
    """
    n = img.shape[0]
    c = (n - 1) / 2.0
    jj, ii = np.meshgrid(np.arange(n) - c, np.arange(n) - c)  # ii: y, jj: x
    ct, st = np.cos(theta), np.sin(theta)
    xs = ct * jj + st * ii + c
    ys = -st * jj + ct * ii + c
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    fx = xs - x0
    fy = ys - y0

    def sample(yi, xi):
        inside = (yi >= 0) & (yi < n) & (xi >= 0) & (xi < n)
        return np.where(inside, img[np.clip(yi, 0, n - 1), np.clip(xi, 0, n - 1)], 0.0)

    return (
        sample(y0, x0) * (1 - fy) * (1 - fx)
        + sample(y0, x0 + 1) * (1 - fy) * fx
        + sample(y0 + 1, x0) * fy * (1 - fx)
        + sample(y0 + 1, x0 + 1) * fy * fx
    )


@dataclasses.dataclass
class ResponseMap:
    """Normalized responses on the (possibly strided) lattice."""

    responses: np.ndarray  # (A, Hs, Ws), non-negative
    xi: float              # per-scale normalization constant (sqrt of mean energy)
    stride: int = 1

    @property
    def orientations(self) -> int:
        return self.responses.shape[0]

    def feature_vector(self) -> np.ndarray:
        """Layer-1 feature vector: C-order flattening of (alpha, row, col)."""
        return self.responses.reshape(-1)


def energy_map(img: np.ndarray, bank: FilterBank) -> np.ndarray:
    """Raw Gabor energies (even^2 + odd^2) at every lattice position.

    The image is mean-centered, then correlated with each kernel at each
    pixel with zero padding at the borders. Centering makes the zero
    padding behave like padding with the image mean, so a constant image
    yields exactly zero energy at all positions, border included, and
    responses are invariant to brightness shifts. FFT correlation is used;
    it matches the direct per-pixel computation to well below 1e-6.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    img = img - img.mean()
    h, w = img.shape
    r = bank.support // 2
    shape = (sfft.next_fast_len(h + bank.support - 1), sfft.next_fast_len(w + bank.support - 1))

    kernel_ffts = bank._fft_cache.get(shape)
    if kernel_ffts is None:
        flipped = np.concatenate([bank.even, bank.odd])[:, ::-1, ::-1]
        kernel_ffts = sfft.rfft2(flipped, s=shape)
        bank._fft_cache[shape] = kernel_ffts

    img_fft = sfft.rfft2(img, s=shape)
    full = sfft.irfft2(img_fft[None, :, :] * kernel_ffts, s=shape)
    resp = full[:, r : r + h, r : r + w]
    a = bank.orientations
    return resp[:a] ** 2 + resp[a:] ** 2


def normalize_responses(
    energies: np.ndarray, position_count: int, orientation_count: int
) -> ResponseMap:
    """Divide energies by their mean and take the positive square root.

    A mean energy at or below XI_SQUARED_EPSILON marks a degenerate
    (near-constant) image and yields the all-zero map.
    """
    energies = np.asarray(energies, dtype=np.float64)
    a, hs, ws = energies.shape
    if a != orientation_count or hs * ws != position_count:
        raise ValueError("energy array does not match the stated position/orientation counts")
    xi_sq = float(energies.sum() / (position_count * orientation_count))
    if xi_sq <= XI_SQUARED_EPSILON:
        return ResponseMap(responses=np.zeros_like(energies), xi=0.0)
    return ResponseMap(responses=np.sqrt(energies / xi_sq), xi=float(np.sqrt(xi_sq)))


def extract_responses(img: np.ndarray, bank: FilterBank, stride: int = 1) -> ResponseMap:
    """Energy computation, lattice subsampling, and normalization in one step."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    energies = energy_map(img, bank)[:, ::stride, ::stride]
    a, hs, ws = energies.shape
    rmap = normalize_responses(energies, hs * ws, a)
    rmap.stride = stride
    return rmap


def grid_shape(image_size: int, stride: int) -> tuple[int, int]:
    """Rows/cols of the retained position grid for a square image."""
    n = (image_size + stride - 1) // stride
    return n, n


def dump_kernels_pgm(bank: FilterBank, out_dir: str | Path) -> list[Path]:
    """Write each kernel as an 8-bit PGM (debug aid); returns written paths."""
    from PIL import Image

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, kernels in (("even", bank.even), ("odd", bank.odd)):
        for k in range(bank.orientations):
            arr = kernels[k]
            lo, hi = arr.min(), arr.max()
            scaled = np.zeros_like(arr) if hi == lo else (arr - lo) / (hi - lo)
            path = out_dir / f"kernel_{name}_{k:02d}.pgm"
            Image.fromarray((scaled * 255).round().astype(np.uint8)).save(path)
            written.append(path)
    return written
