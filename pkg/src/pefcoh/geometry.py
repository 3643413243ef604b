"""Pixel-space rectangle geometry with exact rational arithmetic.

Boxes use a half-open convention: pixel (x, y) is inside iff
x_min <= x < x_max and y_min <= y < y_max. All areas, intersections and
unions are computed over :class:`fractions.Fraction`, so IoU/DSC values are
exact rationals until the final float conversion and identical across
platforms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .records import ROIAnnotation

logger = logging.getLogger(__name__)

Number = int | Fraction


@dataclass(frozen=True)
class PatchBox:
    """Axis-aligned half-open rectangle in pixel coordinates."""

    x_min: Fraction
    y_min: Fraction
    x_max: Fraction
    y_max: Fraction

    def __post_init__(self) -> None:
        for name in ("x_min", "y_min", "x_max", "y_max"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box: {self.as_tuple()}")

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def as_floats(self) -> tuple[float, float, float, float]:
        return tuple(float(v) for v in self.as_tuple())

    def area(self) -> Fraction:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def center(self) -> tuple[Fraction, Fraction]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)


RegionSet = Sequence[PatchBox]


def contains_point(box: PatchBox, x: Number | float, y: Number | float) -> bool:
    """Half-open containment test."""
    return box.x_min <= x < box.x_max and box.y_min <= y < box.y_max


def roi_center(roi: ROIAnnotation) -> tuple[Fraction, Fraction]:
    x_min, y_min, x_max, y_max = roi.bbox
    return (Fraction(x_min + x_max, 2), Fraction(y_min + y_max, 2))


def resolve_patch_box(
    loc_row: int,
    loc_col: int,
    feature_h: int,
    feature_w: int,
    image_width: int,
    image_height: int,
    patch_size: int,
) -> PatchBox:
    """Map a feature-map cell to a fixed-size patch box in pixel space.

    The box has side ``patch_size`` and is centered on the cell center
    mapped into pixel coordinates. A box that overhangs the image is
    translated (not shrunk) back inside; only when an image dimension is
    smaller than ``patch_size`` does the box span that full dimension.
    """
    if not (0 <= loc_row < feature_h and 0 <= loc_col < feature_w):
        raise ValueError(
            f"activation location ({loc_row}, {loc_col}) out of feature map "
            f"{feature_h}x{feature_w}"
        )
    if patch_size < 1:
        raise ValueError(f"patch_size must be >= 1, got {patch_size}")

    center_x = Fraction((2 * loc_col + 1) * image_width, 2 * feature_w)
    center_y = Fraction((2 * loc_row + 1) * image_height, 2 * feature_h)
    x_min, x_max = _fit_span(center_x, patch_size, image_width)
    y_min, y_max = _fit_span(center_y, patch_size, image_height)
    return PatchBox(x_min, y_min, x_max, y_max)


def _fit_span(center: Fraction, size: int, limit: int) -> tuple[Fraction, Fraction]:
    if limit <= size:
        return Fraction(0), Fraction(limit)
    half = Fraction(size, 2)
    lo, hi = center - half, center + half
    if lo < 0:
        return Fraction(0), Fraction(size)
    if hi > limit:
        return Fraction(limit - size), Fraction(limit)
    return lo, hi


def union_area(boxes: RegionSet) -> Fraction:
    """Exact area of the union, via an x-slab sweep over compressed coordinates."""
    if not boxes:
        return Fraction(0)
    xs = sorted({b.x_min for b in boxes} | {b.x_max for b in boxes})
    total = Fraction(0)
    for x_lo, x_hi in zip(xs, xs[1:]):
        spans = sorted(
            (b.y_min, b.y_max) for b in boxes if b.x_min <= x_lo and b.x_max >= x_hi
        )
        covered = Fraction(0)
        cur_lo: Fraction | None = None
        cur_hi: Fraction | None = None
        for lo, hi in spans:
            if cur_hi is None or lo > cur_hi:
                if cur_hi is not None:
                    covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            elif hi > cur_hi:
                cur_hi = hi
        if cur_hi is not None:
            covered += cur_hi - cur_lo
        total += covered * (x_hi - x_lo)
    return total


def _clip(a: PatchBox, b: PatchBox) -> PatchBox | None:
    x_min = max(a.x_min, b.x_min)
    y_min = max(a.y_min, b.y_min)
    x_max = min(a.x_max, b.x_max)
    y_max = min(a.y_max, b.y_max)
    if x_min < x_max and y_min < y_max:
        return PatchBox(x_min, y_min, x_max, y_max)
    return None


def intersection_area(a: RegionSet, b: RegionSet) -> Fraction:
    """Exact area of union(a) ∩ union(b)."""
    pieces = []
    for box_a in a:
        for box_b in b:
            clipped = _clip(box_a, box_b)
            if clipped is not None:
                pieces.append(clipped)
    return union_area(pieces)


def iou_dsc_exact(a: RegionSet, b: RegionSet) -> tuple[Fraction, Fraction]:
    """IoU and DSC between the unions of two box sets, as exact rationals.

    Both are 0 when either set covers no area; the doubly-empty case is
    degenerate and logged.
    """
    area_a = union_area(a)
    area_b = union_area(b)
    if area_a == 0 and area_b == 0:
        logger.debug("iou/dsc over two empty region sets; returning 0")
        return Fraction(0), Fraction(0)
    if area_a == 0 or area_b == 0:
        return Fraction(0), Fraction(0)
    inter = intersection_area(a, b)
    union = area_a + area_b - inter
    return inter / union, 2 * inter / (area_a + area_b)


def iou_dsc(a: RegionSet, b: RegionSet) -> tuple[float, float]:
    i, d = iou_dsc_exact(a, b)
    return float(i), float(d)


def iou(a: RegionSet, b: RegionSet) -> float:
    return iou_dsc(a, b)[0]


def dsc(a: RegionSet, b: RegionSet) -> float:
    return iou_dsc(a, b)[1]
