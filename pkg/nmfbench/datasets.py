"""
Dataset loading and synthesis for the benchmark harness.

A dataset is a non-negative matrix whose columns are samples: CSV rows are
matrix rows, PGM images become columns (vectorized column-major), and
synthetic data is a sparsified product of uniform factors plus noise.
"""

import csv
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt

from nmfbench.errors import (
    EmptySelection,
    IoError,
    MixedDimensions,
    NegativeEntry,
    ParseError,
    UnsupportedFormat,
)
from nmfbench.initializers.random_schemes import uniform_factor
from nmfbench.linalg import DenseMatrix, check_rank, dense_matrix

logger = logging.getLogger(__name__)

PGM_SUFFIX = ".pgm"


@dataclass(frozen=True)
class Dataset:
    """
    A benchmark dataset.

    Attributes:
        matrix: Non-negative data (m features x n samples)
        name: Name used in result rows and seed derivation
        image_shape: (rows, cols) of every column as an image, if any
        truth: Ground-truth (W*, H*) for synthetic data
        test_columns: Columns held out by a train split, unused for fitting
    """
    matrix: DenseMatrix
    name: str
    image_shape: Optional[Tuple[int, int]] = None
    truth: Optional[Tuple[DenseMatrix, DenseMatrix]] = None
    test_columns: npt.NDArray[np.int_] = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

# ===== CSV =====

def load_csv_matrix(path) -> Dataset:
    """
    Load a rectangular numeric CSV file.

    Args:
        path: CSV file; every row is a matrix row

    Returns:
        Dataset: Named after the file stem

    Raises:
        ParseError: On ragged rows, non-numeric or non-finite fields (1-based line)
        NegativeEntry: On the first negative value (0-based row, col)
        IoError: If the file cannot be read
    """
    path = Path(path)
    rows = []
    width = None
    try:
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            for fields in reader:
                if not fields or all(not f.strip() for f in fields):
                    continue
                line = reader.line_num
                if width is None:
                    width = len(fields)
                elif len(fields) != width:
                    raise ParseError(f"expected {width} fields, got {len(fields)}", line)
                row = []
                for col, text in enumerate(fields):
                    try:
                        value = float(text)
                    except ValueError:
                        raise ParseError(f"not a number: {text.strip()!r}", line, col + 1)
                    if not math.isfinite(value):
                        raise ParseError(f"non-finite value {text.strip()!r}", line, col + 1)
                    if value < 0:
                        raise NegativeEntry((len(rows), col), value)
                    row.append(value)
                rows.append(row)
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}")

    if not rows:
        raise ParseError("no data rows", 1)
    return Dataset(matrix=dense_matrix(rows), name=path.stem)

# ===== PGM =====

def _header_tokens(data: bytes, count: int, pos: int) -> Tuple[list, int]:
    # Whitespace-separated tokens; '#' starts a comment running to end of line
    tokens = []
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise UnsupportedFormat("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path) -> DenseMatrix:
    """
    Read a P2 (ASCII) or P5 (binary) PGM image scaled to [0, 1] by maxval.

    Args:
        path: Image file

    Returns:
        DenseMatrix: Image of shape (height, width)

    Raises:
        UnsupportedFormat: If the file is not a well-formed P2/P5 image
        IoError: If the file cannot be read
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}")

    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormat(f"{path.name}: not a P2/P5 PGM file")
    try:
        tokens, pos = _header_tokens(data, 3, 2)
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise UnsupportedFormat(f"{path.name}: malformed PGM header")
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise UnsupportedFormat(f"{path.name}: bad PGM dimensions or maxval")

    size = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates maxval from the raster
        dtype = np.dtype(">u2") if maxval >= 256 else np.dtype(np.uint8)
        pos += 1
        if len(data) - pos < size * dtype.itemsize:
            raise UnsupportedFormat(f"{path.name}: truncated raster")
        values = np.frombuffer(data, dtype=dtype, count=size, offset=pos)
    else:
        body = re.sub(rb"#[^\n\r]*", b"", data[pos:]).split()
        if len(body) < size:
            raise UnsupportedFormat(f"{path.name}: truncated raster")
        try:
            values = np.array([int(t) for t in body[:size]])
        except ValueError:
            raise UnsupportedFormat(f"{path.name}: non-integer pixel")

    if values.max(initial=0) > maxval:
        raise UnsupportedFormat(f"{path.name}: pixel above maxval {maxval}")
    return values.reshape(height, width).astype(np.float64) / maxval


def load_pgm_dir(path) -> Dataset:
    """
    Load every PGM image of a directory as one dataset column.

    Files are taken in lexicographic name order; each image is scaled to
    [0, 1] and vectorized column-major.

    Args:
        path: Directory of PGM files sharing one shape

    Returns:
        Dataset: m = rows * cols, n = number of images, image shape recorded

    Raises:
        MixedDimensions: If the images differ in shape
        UnsupportedFormat: If a file is not P2/P5 or the directory has no PGM files
        IoError: If the directory cannot be read
    """
    path = Path(path)
    if not path.is_dir():
        raise IoError(f"{path} is not a directory")
    files = sorted((p for p in path.iterdir() if p.suffix.lower() == PGM_SUFFIX),
                   key=lambda p: p.name)
    if not files:
        raise UnsupportedFormat(f"no PGM files in {path}")

    columns = []
    shape = None
    for file in files:
        image = read_pgm(file)
        if shape is None:
            shape = image.shape
        elif image.shape != shape:
            raise MixedDimensions(f"{file.name} is {image.shape}, expected {shape}")
        columns.append(image.ravel(order="F"))

    logger.info("Loaded %d images of shape %s from %s", len(files), shape, path)
    return Dataset(matrix=dense_matrix(np.column_stack(columns)), name=path.name, image_shape=shape)

# ===== SYNTHETIC =====

def synth_dataset(m: int, n: int, r: int, density: float, noise: float, seed: int) -> Dataset:
    """
    Synthesize X = W* H* + noise * |N| with sparse uniform ground truth.

    W* and H* are uniform on (0, 1]; each entry is kept with probability
    `density`. N is standard Gaussian.

    Args:
        m: Rows
        n: Columns
        r: Ground-truth rank
        density: Kept fraction of factor entries, in (0, 1]
        noise: Noise scale, >= 0
        seed: Generator seed

    Returns:
        Dataset: Synthetic data with its ground truth retained

    Raises:
        BadRank: If r is out of range
        ValueError: If density or noise is out of range
        NonFiniteEntry: If the noisy matrix is not finite
    """
    check_rank(r, m, n)
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")

    rng = np.random.default_rng(seed)
    w = uniform_factor(rng, (m, r))
    h = uniform_factor(rng, (r, n))
    w *= rng.random((m, r)) < density
    h *= rng.random((r, n)) < density
    x = w @ h
    if noise > 0:
        x = x + noise * np.abs(rng.standard_normal((m, n)))

    name = f"synth-{m}x{n}-r{r}-d{density:g}-e{noise:g}"
    return Dataset(matrix=dense_matrix(x), name=name, truth=(w, h))

# ===== REFERENCES AND SPLITS =====

def load_dataset(ref: str, seed: int = 0) -> Dataset:
    """
    Resolve a dataset reference.

    Args:
        ref: 'csv:PATH', 'pgm:DIR' or 'synth:m,n,r,density,noise'
        seed: Seed for synthetic data

    Returns:
        Dataset: The loaded or synthesized dataset

    Raises:
        ValueError: If the reference is malformed
        NmfError: From the underlying loader
    """
    kind, sep, arg = ref.partition(":")
    if not sep or not arg:
        raise ValueError(f"dataset reference {ref!r} must look like KIND:ARG")
    if kind == "csv":
        return load_csv_matrix(arg)
    if kind == "pgm":
        return load_pgm_dir(arg)
    if kind == "synth":
        parts = arg.split(",")
        if len(parts) != 5:
            raise ValueError(f"synth reference needs m,n,r,density,noise, got {arg!r}")
        try:
            m, n, r = (int(p) for p in parts[:3])
            density, noise = float(parts[3]), float(parts[4])
        except ValueError:
            raise ValueError(f"synth reference has non-numeric fields: {arg!r}")
        return synth_dataset(m, n, r, density, noise, seed)
    raise ValueError(f"unknown dataset kind {kind!r}; use csv, pgm or synth")


def train_split(dataset: Dataset, count: int, seed: int) -> Dataset:
    """
    Keep `count` columns chosen by a seeded permutation, in original order.

    The remaining columns are recorded as the (unused) test split.

    Raises:
        EmptySelection: If count is not within 1..n
    """
    n = dataset.matrix.shape[1]
    if not 1 <= count <= n:
        raise EmptySelection(f"train count {count} must lie within 1..{n}")
    order = np.random.default_rng(seed).permutation(n)
    train = np.sort(order[:count])
    test = np.sort(order[count:])

    truth = dataset.truth
    if truth is not None:
        truth = (truth[0], truth[1][:, train])
    logger.info("Training on %d of %d columns of %s", count, n, dataset.name)
    return replace(dataset, matrix=dataset.matrix[:, train], truth=truth, test_columns=test)
