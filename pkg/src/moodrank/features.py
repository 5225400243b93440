"""Deterministic feature engineering.

Word counting, the 7-bucket sentence-length one-hot, target standardization,
and the 3x3 coarse emotion binning of valence-arousal space. Everything here
is pure and stateless; a fitted scaler is an immutable value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

N_LENGTH_BUCKETS = 7
LENGTH_BUCKET_SPAN = 800  # word counts 0..800 spread over the 7 buckets

VA_MIN = 1.0
VA_MAX = 5.0

# Per-axis thirds of [1, 5]; low edge closed, high edge open except the top.
BIN_EDGE_LOW = 7.0 / 3.0
BIN_EDGE_HIGH = 11.0 / 3.0
N_EMOTION_BINS = 9

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class VAPoint:
    """A (valence, arousal) pair on the corpus scale, nominally [1, 5]."""

    valence: float
    arousal: float

    def as_array(self) -> np.ndarray:
        return np.array([self.valence, self.arousal], dtype=np.float64)

    @classmethod
    def from_array(cls, arr) -> "VAPoint":
        return cls(valence=float(arr[0]), arousal=float(arr[1]))


@dataclass(frozen=True)
class EmotionBin:
    """One of the 9 coarse emotion cells; id = a_index * 3 + v_index."""

    id: int
    v_index: int
    a_index: int


@dataclass(frozen=True)
class VAScaler:
    """Per-dimension population mean/std of VA targets, std floored at 1e-8."""

    mean: np.ndarray
    std: np.ndarray


def word_count(body: str) -> int:
    """Count maximal non-whitespace runs (spaces, tabs, newlines all split)."""
    return len(body.split())


def bucket_index(wc: int) -> int:
    """Map a word count to one of 7 equal-width buckets over [0, 800).

    Overflow clamps to the last bucket: min(6, floor(wc * 7 / 800)).
    """
    if wc < 0:
        raise ValueError(f"word count must be non-negative, got {wc}")
    return min(N_LENGTH_BUCKETS - 1, (wc * N_LENGTH_BUCKETS) // LENGTH_BUCKET_SPAN)


def one_hot(bucket: int) -> np.ndarray:
    if not 0 <= bucket < N_LENGTH_BUCKETS:
        raise ValueError(f"bucket index out of range [0, {N_LENGTH_BUCKETS - 1}]: {bucket}")
    vec = np.zeros(N_LENGTH_BUCKETS, dtype=np.float64)
    vec[bucket] = 1.0
    return vec


def wide_feature(body: str) -> np.ndarray:
    """One-hot length bucket for a text; the model's wide-branch input."""
    return one_hot(bucket_index(word_count(body)))


def fit_scaler(targets: list[VAPoint]) -> VAScaler:
    """Fit per-dimension population statistics over a non-empty target list."""
    if not targets:
        raise ValueError("cannot fit a scaler on an empty target list")
    arr = np.array([[p.valence, p.arousal] for p in targets], dtype=np.float64)
    mean = arr.mean(axis=0)
    std = np.maximum(arr.std(axis=0), STD_FLOOR)
    return VAScaler(mean=mean, std=std)


def standardize(p: VAPoint, s: VAScaler) -> np.ndarray:
    return (p.as_array() - s.mean) / s.std


def destandardize(z, s: VAScaler) -> VAPoint:
    arr = np.asarray(z, dtype=np.float64) * s.std + s.mean
    return VAPoint.from_array(arr)


def _axis_index(x: float) -> int:
    if x < BIN_EDGE_LOW:
        return 0
    if x < BIN_EDGE_HIGH:
        return 1
    return 2


def va_bin(p: VAPoint) -> EmotionBin:
    """Assign a VA point to one of the 9 coarse bins.

    Each axis splits [1, 5] at 7/3 and 11/3 with half-open intervals and a
    closed top edge; out-of-range values clamp to the nearest bin.
    """
    if not (math.isfinite(p.valence) and math.isfinite(p.arousal)):
        raise DataError(f"non-finite VA point: ({p.valence}, {p.arousal})")
    v_index = _axis_index(p.valence)
    a_index = _axis_index(p.arousal)
    return EmotionBin(id=a_index * 3 + v_index, v_index=v_index, a_index=a_index)
