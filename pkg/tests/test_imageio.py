import io

import numpy as np
import pytest
from hypothesis import given, strategies as st
from PIL import Image

from deepboost.errors import (
    CorruptImageError,
    DegenerateImageError,
    InsufficientClassSizeError,
    UnsupportedChannelCountError,
    UnsupportedFormatError,
)
from deepboost.imageio import (
    LabeledDataset,
    RawImage,
    SplitSpec,
    load_image,
    manifest_text,
    read_manifest,
    resize_to_canonical,
    scan_dataset,
    split_dataset,
    to_grayscale,
    write_manifest,
)


def bilinear_oracle(src, out_h, out_w):
    """Per-pixel corner-aligned bilinear interpolation, written naively."""
    in_h, in_w = src.shape
    out = np.zeros((out_h, out_w))
    for i in range(out_h):
        for j in range(out_w):
            ry = i * (in_h - 1) / (out_h - 1)
            rx = j * (in_w - 1) / (out_w - 1)
            y0 = min(int(np.floor(ry)), in_h - 2)
            x0 = min(int(np.floor(rx)), in_w - 2)
            fy, fx = ry - y0, rx - x0
            out[i, j] = (
                src[y0, x0] * (1 - fy) * (1 - fx)
                + src[y0, x0 + 1] * (1 - fy) * fx
                + src[y0 + 1, x0] * fy * (1 - fx)
                + src[y0 + 1, x0 + 1] * fy * fx
            )
    return out


class TestLoadImage:
    def test_pgm_roundtrip(self, tmp_path):
        # binary P5, 2x2, values 0/85/170/255
        raw = b"P5\n2 2\n255\n" + bytes([0, 85, 170, 255])
        p = tmp_path / "tiny.pgm"
        p.write_bytes(raw)
        img = load_image(p)
        assert (img.width, img.height, img.channels) == (2, 2, 1)
        assert img.pixels.tolist() == [[0, 85], [170, 255]]

    def test_missing_path(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png")

    def test_unsupported_extension(self, tmp_path):
        p = tmp_path / "notes.txt"
        p.write_text("not an image")
        with pytest.raises(UnsupportedFormatError):
            load_image(p)

    def test_truncated_png(self, tmp_path):
        buf = io.BytesIO()
        Image.fromarray((np.arange(40 * 40) % 256).astype(np.uint8).reshape(40, 40)).save(
            buf, format="PNG"
        )
        data = buf.getvalue()
        p = tmp_path / "broken.png"
        p.write_bytes(data[: len(data) // 2])
        with pytest.raises(CorruptImageError):
            load_image(p)

    def test_garbage_with_png_extension(self, tmp_path):
        p = tmp_path / "garbage.png"
        p.write_bytes(b"this is not a png at all")
        with pytest.raises(CorruptImageError):
            load_image(p)

    def test_rgba_normalized_to_rgb(self, tmp_path):
        arr = np.zeros((5, 5, 4), dtype=np.uint8)
        arr[..., 0] = 200
        arr[..., 3] = 255
        p = tmp_path / "a.png"
        Image.fromarray(arr, mode="RGBA").save(p)
        img = load_image(p)
        assert img.channels == 3


class TestToGrayscale:
    def test_gray_identity(self):
        img = RawImage(3, 2, 1, np.arange(6, dtype=np.uint8).reshape(2, 3))
        assert to_grayscale(img) is img

    def test_white_is_white(self):
        img = RawImage(1, 1, 3, np.full((1, 1, 3), 255, dtype=np.uint8))
        assert to_grayscale(img).pixels[0, 0] == 255

    def test_pure_red(self):
        # 0.299 * 255 = 76.245, rounds half-up to 76
        expected = int(np.floor(0.299 * 255 + 0.5))
        assert expected == 76
        img = RawImage(1, 1, 3, np.array([[[255, 0, 0]]], dtype=np.uint8))
        assert to_grayscale(img).pixels[0, 0] == expected

    def test_half_up_rounding(self):
        # choose a color whose luminance lands exactly on .5
        # 0.299*3 + 0.587*3 + 0.114*3 = 3.0 ... use (5, 0, 0): 1.495 -> 1
        img = RawImage(1, 1, 3, np.array([[[5, 0, 0]]], dtype=np.uint8))
        assert to_grayscale(img).pixels[0, 0] == 1  # floor(1.495 + 0.5)

    def test_bad_channels(self):
        img = RawImage(1, 1, 2, np.zeros((1, 1, 2), dtype=np.uint8))
        with pytest.raises(UnsupportedChannelCountError):
            to_grayscale(img)


class TestResize:
    def test_identity_geometry(self, rng):
        pix = rng.integers(0, 256, size=(120, 120)).astype(np.uint8)
        out = resize_to_canonical(RawImage(120, 120, 1, pix))
        np.testing.assert_allclose(out, pix / 255.0, atol=0)

    @pytest.mark.parametrize("shape", [(7, 13), (240, 240), (64, 200)])
    def test_constant_stays_constant(self, shape):
        pix = np.full(shape, 77, dtype=np.uint8)
        out = resize_to_canonical(RawImage(shape[1], shape[0], 1, pix))
        np.testing.assert_allclose(out, 77 / 255.0, atol=1e-12)

    def test_matches_bilinear_oracle(self, rng):
        pix = rng.integers(0, 256, size=(240, 240)).astype(np.uint8)
        out = resize_to_canonical(RawImage(240, 240, 1, pix))
        oracle = bilinear_oracle(pix.astype(float), 120, 120) / 255.0
        assert np.abs(out - oracle).max() <= 1e-6

    def test_upscale_matches_oracle(self, rng):
        pix = rng.integers(0, 256, size=(30, 47)).astype(np.uint8)
        out = resize_to_canonical(RawImage(47, 30, 1, pix))
        oracle = bilinear_oracle(pix.astype(float), 120, 120) / 255.0
        assert np.abs(out - oracle).max() <= 1e-6

    def test_degenerate(self):
        with pytest.raises(DegenerateImageError):
            resize_to_canonical(RawImage(1, 50, 1, np.zeros((50, 1), dtype=np.uint8)))

    @given(h=st.integers(2, 40), w=st.integers(2, 40), seed=st.integers(0, 2**32 - 1))
    def test_output_always_canonical(self, h, w, seed):
        pix = np.random.default_rng(seed).integers(0, 256, size=(h, w)).astype(np.uint8)
        out = resize_to_canonical(RawImage(w, h, 1, pix))
        assert out.shape == (120, 120)
        assert out.size == 14400
        assert out.min() >= 0.0 and out.max() <= 1.0


def fake_dataset(n_per_class, class_names=("ants", "bees")):
    items = [(f"{c}/{i:03d}.png", k) for k, c in enumerate(class_names) for i in range(n_per_class)]
    return LabeledDataset(root=None, items=items, class_names=list(class_names))


class TestSplit:
    def test_60_40(self):
        ds = fake_dataset(100)
        train, test = split_dataset(ds, SplitSpec(train_per_class=60, seed=1))
        for k in range(2):
            assert len(train.class_items(k)) == 60
            assert len(test.class_items(k)) == 40

    def test_100_100(self):
        ds = fake_dataset(200)
        train, test = split_dataset(ds, SplitSpec(train_per_class=100, seed=1))
        for k in range(2):
            assert len(train.class_items(k)) == 100
            assert len(test.class_items(k)) == 100

    def test_deterministic(self):
        ds = fake_dataset(30)
        spec = SplitSpec(train_per_class=20, seed=99, repeats=3)
        a = split_dataset(ds, spec, repeat_index=2)
        b = split_dataset(ds, spec, repeat_index=2)
        assert a[0].items == b[0].items and a[1].items == b[1].items

    def test_partition(self):
        ds = fake_dataset(37)
        train, test = split_dataset(ds, SplitSpec(train_per_class=11, seed=5))
        together = sorted(train.items + test.items)
        assert together == sorted(ds.items)

    def test_insufficient(self):
        ds = fake_dataset(10)
        with pytest.raises(InsufficientClassSizeError):
            split_dataset(ds, SplitSpec(train_per_class=10, seed=0))

    def test_repeats_differ(self):
        ds = fake_dataset(20)
        spec = SplitSpec(train_per_class=10, seed=3, repeats=10)
        splits = [tuple(split_dataset(ds, spec, r)[0].items) for r in range(10)]
        assert len(set(splits)) >= 9

    def test_manifest_roundtrip(self, tmp_path):
        ds = fake_dataset(12)
        train, test = split_dataset(ds, SplitSpec(train_per_class=7, seed=4))
        path = tmp_path / "m.tsv"
        write_manifest(path, train, test)
        train2, test2 = read_manifest(path, ds)
        assert sorted(train2.items) == sorted(train.items)
        assert sorted(test2.items) == sorted(test.items)
        # byte-identical on rewrite
        assert manifest_text(train2, test2) == path.read_text()


class TestScanDataset:
    def test_lexicographic_classes(self, tmp_path):
        for name in ("zebra", "ant", "mole"):
            d = tmp_path / name
            d.mkdir()
            Image.fromarray(np.zeros((8, 8), dtype=np.uint8)).save(d / "x.png")
        ds = scan_dataset(tmp_path)
        assert ds.class_names == ["ant", "mole", "zebra"]
        assert all(rel.split("/")[0] == ds.class_names[k] for rel, k in ds.items)

    def test_ignores_unknown_extensions(self, tmp_path):
        d = tmp_path / "only"
        d.mkdir()
        Image.fromarray(np.zeros((8, 8), dtype=np.uint8)).save(d / "keep.pgm")
        (d / "skip.txt").write_text("no")
        ds = scan_dataset(tmp_path)
        assert len(ds) == 1
