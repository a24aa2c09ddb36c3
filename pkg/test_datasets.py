"""
Tests for CSV, PGM and synthetic dataset loading.
"""

import numpy as np
import pytest

from nmfbench.datasets import (
    load_csv_matrix,
    load_dataset,
    load_pgm_dir,
    read_pgm,
    synth_dataset,
    train_split,
)
from nmfbench.errors import (
    BadRank,
    EmptySelection,
    IoError,
    MixedDimensions,
    NegativeEntry,
    NonFiniteEntry,
    ParseError,
    UnsupportedFormat,
)
from nmfbench.linalg import relative_error

P2_IMAGE = b"P2\n# two by two\n2 2\n255\n0 255\n128 64\n"
P5_IMAGE = b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64])

# ===== CSV =====

def test_load_csv_matrix(tmp_path):
    path = tmp_path / "small.csv"
    path.write_text("1,2\n3,4\n")
    dataset = load_csv_matrix(path)
    assert np.array_equal(dataset.matrix, [[1.0, 2.0], [3.0, 4.0]])
    assert dataset.name == "small"
    assert dataset.image_shape is None
    assert dataset.matrix.dtype == np.float64 and dataset.matrix.ndim == 2


def test_load_csv_matrix_skips_blank_lines(tmp_path):
    path = tmp_path / "gaps.csv"
    path.write_text("1,2\n\n3,4\n\n")
    assert load_csv_matrix(path).shape == (2, 2)


def test_load_csv_matrix_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(ParseError) as exc:
        load_csv_matrix(path)
    assert exc.value.line == 2


def test_load_csv_matrix_non_numeric_field(tmp_path):
    path = tmp_path / "text.csv"
    path.write_text("1,2\n3,abc\n")
    with pytest.raises(ParseError) as exc:
        load_csv_matrix(path)
    assert (exc.value.line, exc.value.column) == (2, 2)


def test_load_csv_matrix_non_finite_field(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1,nan\n")
    with pytest.raises(ParseError):
        load_csv_matrix(path)


def test_load_csv_matrix_negative_entry(tmp_path):
    path = tmp_path / "negative.csv"
    path.write_text("1,-1\n")
    with pytest.raises(NegativeEntry) as exc:
        load_csv_matrix(path)
    assert exc.value.position == (0, 1)
    assert exc.value.value == -1.0


def test_load_csv_matrix_empty_and_missing(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(ParseError) as exc:
        load_csv_matrix(path)
    assert exc.value.line == 1
    with pytest.raises(IoError):
        load_csv_matrix(tmp_path / "missing.csv")

# ===== PGM =====

def test_read_pgm_ascii_and_binary_agree(tmp_path):
    (tmp_path / "a.pgm").write_bytes(P2_IMAGE)
    (tmp_path / "b.pgm").write_bytes(P5_IMAGE)
    ascii_image = read_pgm(tmp_path / "a.pgm")
    binary_image = read_pgm(tmp_path / "b.pgm")
    assert np.array_equal(ascii_image, binary_image)
    assert ascii_image[0, 1] == 1.0
    assert ascii_image[1, 0] == pytest.approx(128 / 255)


def test_read_pgm_sixteen_bit(tmp_path):
    path = tmp_path / "deep.pgm"
    path.write_bytes(b"P5\n1 2\n1000\n" + (1000).to_bytes(2, "big") + (250).to_bytes(2, "big"))
    assert np.allclose(read_pgm(path)[:, 0], [1.0, 0.25])


def test_read_pgm_rejects_other_formats(tmp_path):
    path = tmp_path / "color.pgm"
    path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(UnsupportedFormat):
        read_pgm(path)


def test_read_pgm_truncated_and_out_of_range(tmp_path):
    short = tmp_path / "short.pgm"
    short.write_bytes(b"P5\n2 2\n255\n\x00\x01")
    with pytest.raises(UnsupportedFormat):
        read_pgm(short)
    bright = tmp_path / "bright.pgm"
    bright.write_bytes(b"P2\n1 1\n10\n11\n")
    with pytest.raises(UnsupportedFormat):
        read_pgm(bright)


def test_load_pgm_dir_stacks_columns(tmp_path):
    (tmp_path / "b.pgm").write_bytes(P5_IMAGE)
    (tmp_path / "a.pgm").write_bytes(b"P2\n2 2\n255\n255 255\n255 255\n")
    (tmp_path / "notes.txt").write_text("ignored")
    dataset = load_pgm_dir(tmp_path)
    assert dataset.shape == (4, 2)
    assert dataset.image_shape == (2, 2)
    assert dataset.name == tmp_path.name
    assert np.allclose(dataset.matrix[:, 0], 1.0)
    # Column-major: (0, 0), (1, 0), (0, 1), (1, 1)
    assert np.allclose(dataset.matrix[:, 1], [0.0, 128 / 255, 1.0, 64 / 255])


def test_load_pgm_dir_mixed_dimensions(tmp_path):
    (tmp_path / "a.pgm").write_bytes(P5_IMAGE)
    (tmp_path / "b.pgm").write_bytes(b"P2\n3 1\n255\n1 2 3\n")
    with pytest.raises(MixedDimensions):
        load_pgm_dir(tmp_path)


def test_load_pgm_dir_without_images(tmp_path):
    with pytest.raises(UnsupportedFormat):
        load_pgm_dir(tmp_path)
    with pytest.raises(IoError):
        load_pgm_dir(tmp_path / "nowhere")

# ===== SYNTHETIC =====

def test_synth_dataset_noiseless_is_exact():
    dataset = synth_dataset(20, 15, 3, density=1.0, noise=0.0, seed=4)
    w, h = dataset.truth
    assert relative_error(dataset.matrix, w, h) == 0.0
    sigma = np.linalg.svd(dataset.matrix, compute_uv=False)
    assert sigma[3] <= 1e-8 * sigma[0]
    assert dataset.name == "synth-20x15-r3-d1-e0"


def test_synth_dataset_is_reproducible():
    first = synth_dataset(10, 8, 2, density=0.5, noise=0.1, seed=7)
    second = synth_dataset(10, 8, 2, density=0.5, noise=0.1, seed=7)
    assert np.array_equal(first.matrix, second.matrix)
    assert np.all(first.matrix >= 0)


def test_synth_dataset_validation():
    with pytest.raises(BadRank):
        synth_dataset(3, 3, 4, density=1.0, noise=0.0, seed=0)
    with pytest.raises(ValueError):
        synth_dataset(5, 5, 2, density=0.0, noise=0.0, seed=0)
    with pytest.raises(ValueError):
        synth_dataset(5, 5, 2, density=1.0, noise=-1.0, seed=0)


def test_synth_dataset_rejects_non_finite_matrix():
    with pytest.raises(NonFiniteEntry):
        synth_dataset(5, 4, 2, density=1.0, noise=float("inf"), seed=0)

# ===== REFERENCES AND SPLITS =====

def test_load_dataset_references(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("1,2\n3,4\n")
    assert load_dataset(f"csv:{path}").shape == (2, 2)
    assert load_dataset("synth:6,5,2,1,0", seed=1).shape == (6, 5)
    for bad in ("data.csv", "xls:file", "synth:1,2", "synth:a,b,c,d,e"):
        with pytest.raises(ValueError):
            load_dataset(bad)


def test_train_split(noiseless_synth):
    dataset = noiseless_synth(8, 10, 2)
    split = train_split(dataset, 6, seed=3)
    assert split.shape == (8, 6)
    assert len(split.test_columns) == 4
    kept = sorted(set(range(10)) - set(split.test_columns.tolist()))
    assert np.array_equal(split.matrix, dataset.matrix[:, kept])
    assert split.truth[1].shape == (2, 6)
    assert np.array_equal(train_split(dataset, 6, seed=3).matrix, split.matrix)


def test_train_split_bad_count(noiseless_synth):
    dataset = noiseless_synth(8, 10, 2)
    for count in (0, 11):
        with pytest.raises(EmptySelection):
            train_split(dataset, count, seed=0)
