"""Pixel dataset ingestion, normalization, augmentation assembly, and scenes.

Pixels are 6-band spectral vectors (B1 BLUE, B2 GREEN, B3 RED, B4 NIR,
B5 SWIR1, B6 SWIR2) in arbitrary finite band units; min-max normalization
makes everything downstream unit-agnostic.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ArgumentError, DataError, ParseError
from .nn import Mlp

N_BANDS = 6
BAND_NAMES = ("B1", "B2", "B3", "B4", "B5", "B6")


class Label(str, Enum):
    BUILTUP = "builtup"
    NONBUILTUP = "nonbuiltup"


class Role(str, Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class PixelSample:
    bands: tuple[float, ...]
    label: Label | None = None
    generated_set: int | None = None  # None = original pixel; 1-based set index otherwise

    def __post_init__(self):
        if len(self.bands) != N_BANDS:
            raise DataError(f"expected {N_BANDS} band values, got {len(self.bands)}")
        if not all(np.isfinite(self.bands)):
            raise DataError("non-finite band value")
        if self.generated_set is not None and self.label is not Label.BUILTUP:
            raise DataError("generated pixels must carry the builtup label")


@dataclass
class BandNormalization:
    """Per-band (min, max) used for the affine map into [0, 1]."""

    mins: list[float]
    maxs: list[float]

    def __post_init__(self):
        if len(self.mins) != N_BANDS or len(self.maxs) != N_BANDS:
            raise DataError("normalization needs one (min, max) per band")
        for b, (lo, hi) in enumerate(zip(self.mins, self.maxs)):
            if not (lo < hi):
                raise DataError(f"band {BAND_NAMES[b]} is constant (min == max)")

    @classmethod
    def fit(cls, bands: np.ndarray) -> "BandNormalization":
        bands = np.asarray(bands, dtype=float)
        return cls(mins=bands.min(axis=0).tolist(), maxs=bands.max(axis=0).tolist())

    def apply(self, bands: np.ndarray) -> np.ndarray:
        bands = np.asarray(bands, dtype=float)
        lo = np.asarray(self.mins)
        hi = np.asarray(self.maxs)
        return (bands - lo) / (hi - lo)

    def invert(self, scaled: np.ndarray) -> np.ndarray:
        scaled = np.asarray(scaled, dtype=float)
        lo = np.asarray(self.mins)
        hi = np.asarray(self.maxs)
        return scaled * (hi - lo) + lo

    def to_dict(self) -> dict:
        return {"min": list(self.mins), "max": list(self.maxs)}

    @classmethod
    def from_dict(cls, d: dict) -> "BandNormalization":
        try:
            return cls(mins=[float(v) for v in d["min"]], maxs=[float(v) for v in d["max"]])
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed normalization block: {exc}") from exc


@dataclass
class Dataset:
    samples: list[PixelSample]
    role: Role
    normalization: BandNormalization | None = None

    def __post_init__(self):
        if self.role is Role.TRAIN:
            for i, s in enumerate(self.samples):
                if s.label is None:
                    raise DataError(f"training sample {i} is unlabeled")

    def __len__(self) -> int:
        return len(self.samples)

    def bands_matrix(self) -> np.ndarray:
        return np.array([s.bands for s in self.samples], dtype=float)

    def label_mask(self, label: Label) -> np.ndarray:
        return np.array([s.label is label for s in self.samples], dtype=bool)

    def count(self, label: Label) -> int:
        return int(self.label_mask(label).sum())


# --- CSV ingestion --------------------------------------------------------------

_LABEL_VALUES = {lab.value: lab for lab in Label}


def load_pixels(path: str | Path, role: Role) -> Dataset:
    """Parse a pixel CSV (header B1..B6[,label]); row order preserved.

    Errors name the offending 1-based file row; the label column is required
    for the train role.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", row=1) from None
        header = [h.strip() for h in header]
        has_label = False
        if header[:N_BANDS] != list(BAND_NAMES):
            raise ParseError(f"header must start with {','.join(BAND_NAMES)}", row=1)
        if len(header) == N_BANDS + 1 and header[N_BANDS] == "label":
            has_label = True
        elif len(header) != N_BANDS:
            raise ParseError("header must be B1..B6 optionally followed by label", row=1)
        if role is Role.TRAIN and not has_label:
            raise ParseError("train files require a label column", row=1)

        samples: list[PixelSample] = []
        expected = N_BANDS + 1 if has_label else N_BANDS
        for rownum, rowvals in enumerate(reader, start=2):
            if len(rowvals) != expected:
                raise ParseError(f"expected {expected} columns, got {len(rowvals)}", row=rownum)
            try:
                bands = tuple(float(v) for v in rowvals[:N_BANDS])
            except ValueError:
                raise ParseError("non-numeric band value", row=rownum) from None
            if not all(np.isfinite(bands)):
                raise ParseError("non-finite band value", row=rownum)
            label = None
            if has_label:
                raw = rowvals[N_BANDS].strip().lower()
                if raw not in _LABEL_VALUES:
                    raise ParseError(f"unknown label {rowvals[N_BANDS]!r}", row=rownum)
                label = _LABEL_VALUES[raw]
            samples.append(PixelSample(bands=bands, label=label))
    return Dataset(samples=samples, role=role)


def _fmt(v: float) -> str:
    # repr of a Python float round-trips exactly
    return repr(float(v))


def save_pixels(path: str | Path, dataset: Dataset) -> None:
    """Write a dataset back to CSV; lossless round-trip for finite doubles."""
    with_labels = any(s.label is not None for s in dataset.samples)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(BAND_NAMES) + (["label"] if with_labels else [])
        writer.writerow(header)
        for s in dataset.samples:
            row = [_fmt(v) for v in s.bands]
            if with_labels:
                row.append(s.label.value if s.label is not None else "")
            writer.writerow(row)


def save_pixel_matrix(path: str | Path, bands: np.ndarray) -> None:
    """Write an unlabeled (k x 6) pixel matrix as CSV."""
    bands = np.asarray(bands, dtype=float)
    if bands.ndim != 2 or bands.shape[1] != N_BANDS:
        raise ArgumentError(f"expected a (k, {N_BANDS}) matrix, got {bands.shape}")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BAND_NAMES)
        for row in bands:
            writer.writerow([_fmt(v) for v in row])


# --- normalization ----------------------------------------------------------------

def normalize(dataset: Dataset) -> Dataset:
    """Min-max scale every band into [0, 1] using this dataset's own stats.

    The fitted (min, max) pairs are stored on the returned dataset so they
    can be reused for held-out data. A constant band is a data error.
    """
    if not dataset.samples:
        raise ArgumentError("cannot normalize an empty dataset")
    norm = BandNormalization.fit(dataset.bands_matrix())
    return apply_normalization(dataset, norm)


def apply_normalization(dataset: Dataset, norm: BandNormalization) -> Dataset:
    """Rescale with previously fitted stats; held-out values may leave [0, 1]."""
    scaled = norm.apply(dataset.bands_matrix())
    samples = [
        replace(s, bands=tuple(row)) for s, row in zip(dataset.samples, scaled.tolist())
    ]
    return Dataset(samples=samples, role=dataset.role, normalization=norm)


# --- augmentation assembly ---------------------------------------------------------

def assemble_training(
    original: Dataset, generated_sets: list[np.ndarray], k: int
) -> Dataset:
    """Original training set plus the first k generated pixel sets.

    Generated pixels are labeled builtup and tagged with their 1-based set
    index; the original samples (including every non-built-up pixel) are
    passed through untouched.
    """
    if k < 0 or k > len(generated_sets):
        raise ArgumentError(f"k={k} outside 0..{len(generated_sets)}")
    samples = list(original.samples)
    for set_index in range(1, k + 1):
        block = np.asarray(generated_sets[set_index - 1], dtype=float)
        if block.ndim != 2 or block.shape[1] != N_BANDS:
            raise ArgumentError(f"generated set {set_index} is not a (k, {N_BANDS}) matrix")
        for row in block:
            samples.append(
                PixelSample(bands=tuple(row), label=Label.BUILTUP, generated_set=set_index)
            )
    return Dataset(samples=samples, role=original.role, normalization=None)


# --- scene grids ---------------------------------------------------------------------

@dataclass
class SceneGrid:
    width: int
    height: int
    bands: np.ndarray = field(repr=False)  # (6, height*width) row-major planes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ArgumentError("scene dimensions must be positive")
        self.bands = np.asarray(self.bands, dtype=float)
        if self.bands.shape != (N_BANDS, self.height * self.width):
            raise ArgumentError(
                f"expected {N_BANDS} planes of {self.height * self.width} values, "
                f"got {self.bands.shape}"
            )

    def pixel_matrix(self) -> np.ndarray:
        return self.bands.T  # (height*width, 6), row-major pixel order


def load_scene_csv(path: str | Path) -> SceneGrid:
    """Read a scene from a row,col,B1..B6 CSV; every cell must appear once."""
    path = Path(path)
    cells: dict[tuple[int, int], tuple[float, ...]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", row=1) from None
        if [h.strip() for h in header] != ["row", "col", *BAND_NAMES]:
            raise ParseError("header must be row,col,B1..B6", row=1)
        for rownum, vals in enumerate(reader, start=2):
            if len(vals) != 2 + N_BANDS:
                raise ParseError(f"expected {2 + N_BANDS} columns", row=rownum)
            try:
                r, c = int(vals[0]), int(vals[1])
                bands = tuple(float(v) for v in vals[2:])
            except ValueError:
                raise ParseError("non-numeric scene value", row=rownum) from None
            if r < 0 or c < 0:
                raise ParseError("negative row/col index", row=rownum)
            if (r, c) in cells:
                raise ParseError(f"duplicate cell ({r}, {c})", row=rownum)
            cells[(r, c)] = bands
    if not cells:
        raise DataError("scene has no cells")
    height = max(r for r, _ in cells) + 1
    width = max(c for _, c in cells) + 1
    if len(cells) != height * width:
        raise DataError(f"scene is missing cells: got {len(cells)} of {height * width}")
    planes = np.empty((N_BANDS, height * width))
    for (r, c), bands in cells.items():
        planes[:, r * width + c] = bands
    return SceneGrid(width=width, height=height, bands=planes)


def classify_scene(
    model: Mlp,
    grid: SceneGrid,
    norm: BandNormalization,
    threshold: float = 0.5,
) -> np.ndarray:
    """Per-pixel normalize-then-predict; returns a (height, width) 0/1 raster."""
    from .classifier import predict  # local import to avoid a module cycle

    pixels = norm.apply(grid.pixel_matrix())
    labels, _ = predict(model, pixels, threshold=threshold)
    return labels.astype(np.int64).reshape(grid.height, grid.width)


def write_pgm(path: str | Path, raster: np.ndarray, threshold: float) -> None:
    """Write a 0/1 label raster as plain PGM (P2, maxval 1) plus a JSON sidecar."""
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise ArgumentError("raster must be 2-D")
    height, width = raster.shape
    lines = ["P2", f"{width} {height}", "1"]
    for row in raster:
        lines.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {"width": int(width), "height": int(height), "threshold": threshold}
    Path(str(path) + ".json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
