"""Discrete dumbbell-like domains.

A domain is a union of k well-separated core rectangles joined by thin
channel rectangles, sampled on a uniform cell-centered grid.  A cell
belongs to the domain iff its center lies inside one of the rectangles;
core labels take precedence over the channel label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

OUTSIDE = -1
CHANNEL = 0

# Channels thinner than this many cells cannot carry the ramp competitor
# the solver builds; below MIN_THICKNESS_CELLS the check hard-fails,
# between the two it is reported as a warning.
RAMP_THICKNESS_CELLS = 4
MIN_THICKNESS_CELLS = 2


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle; contains() is half-open so shared edges never double-count."""

    x: float
    y: float
    width: float
    height: float

    def contains(self, px, py):
        return (self.x <= px) & (px < self.x + self.width) & (self.y <= py) & (py < self.y + self.height)

    @property
    def thickness(self) -> float:
        return min(self.width, self.height)

    def gap_to(self, other: "Rect") -> float:
        """Separation between closures (0 when they touch or overlap)."""
        dx = max(other.x - (self.x + self.width), self.x - (other.x + other.width), 0.0)
        dy = max(other.y - (self.y + self.height), self.y - (other.y + other.height), 0.0)
        return float(np.hypot(dx, dy)) if (dx > 0 and dy > 0) else max(dx, dy)


@dataclass(frozen=True)
class DomainSpec:
    cores: tuple[Rect, ...]
    channels: tuple[Rect, ...]
    h: float

    @property
    def k(self) -> int:
        return len(self.cores)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    severity: str = "error"  # "error" blocks build_domain, "warning" does not


class DomainGrid:
    """Masked uniform grid over the bounding box of the spec rectangles.

    mask[i, j] is True for cells inside the domain; label[i, j] is the core
    index (1-based), CHANNEL, or OUTSIDE.  Instances are immutable after
    construction (arrays are flagged read-only) and safe to share.
    """

    def __init__(self, spec: DomainSpec):
        rects = spec.cores + spec.channels
        self.h = float(spec.h)
        self.k = spec.k
        self.x0 = min(r.x for r in rects)
        self.y0 = min(r.y for r in rects)
        extent_x = max(r.x + r.width for r in rects) - self.x0
        extent_y = max(r.y + r.height for r in rects) - self.y0
        self.nx = int(np.ceil(extent_x / self.h - 1e-9))
        self.ny = int(np.ceil(extent_y / self.h - 1e-9))
        self.cell_area = self.h * self.h

        cx = self.x0 + (np.arange(self.nx) + 0.5) * self.h
        cy = self.y0 + (np.arange(self.ny) + 0.5) * self.h
        self.cx, self.cy = cx, cy
        gx, gy = np.meshgrid(cx, cy)  # shape (ny, nx)

        label = np.full((self.ny, self.nx), OUTSIDE, dtype=np.int16)
        for c, rect in enumerate(spec.channels):
            label[rect.contains(gx, gy)] = CHANNEL
        for i, rect in enumerate(spec.cores, start=1):
            label[rect.contains(gx, gy)] = i
        self.label = label
        self.mask = label != OUTSIDE

        for arr in (self.label, self.mask, self.cx, self.cy):
            arr.flags.writeable = False

    def core_mask(self, i: int | None = None) -> np.ndarray:
        """Mask of core i (1-based), or of the whole unperturbed union when i is None."""
        if i is None:
            return self.label >= 1
        return self.label == i

    @property
    def channel_mask(self) -> np.ndarray:
        return self.label == CHANNEL

    def label_names(self) -> list[str]:
        return [f"core_{i}" for i in range(1, self.k + 1)] + ["channel", "outside"]

    def cell_centers(self):
        """(x, y) arrays of shape (ny, nx)."""
        return np.meshgrid(self.cx, self.cy)


def validate_spec(spec: DomainSpec) -> list[Violation]:
    """All spec-level checks; empty list means fully valid.

    Sub-ramp channel thickness (< 4 cells but >= 2) is reported with
    severity "warning" and does not block build_domain.
    """
    out: list[Violation] = []
    if spec.k < 1:
        out.append(Violation("no_cores", "spec must declare at least one core"))
        return out
    if spec.h <= 0:
        out.append(Violation("bad_spacing", f"grid spacing must be positive, got {spec.h}"))
        return out
    for name, rects in (("core", spec.cores), ("channel", spec.channels)):
        for idx, r in enumerate(rects):
            if r.width <= 0 or r.height <= 0:
                out.append(Violation(
                    "empty_rect",
                    f"{name} {idx} has nonpositive size {r.width} x {r.height}",
                ))
    if any(v.code == "empty_rect" for v in out):
        return out

    for i in range(spec.k):
        for j in range(i + 1, spec.k):
            gap = spec.cores[i].gap_to(spec.cores[j])
            if gap < spec.h:
                out.append(Violation(
                    "cores_not_disjoint",
                    f"cores {i} and {j} are separated by {gap:g} < h={spec.h:g}",
                ))

    for idx, r in enumerate(spec.channels):
        cells = r.thickness / spec.h
        if cells < MIN_THICKNESS_CELLS:
            out.append(Violation(
                "channel_unresolved",
                f"channel {idx} is {cells:.3g} cells thick, needs >= {MIN_THICKNESS_CELLS}",
            ))
        elif cells < RAMP_THICKNESS_CELLS - 1e-9:
            out.append(Violation(
                "channel_too_thin",
                f"channel {idx} is {cells:.3g} cells thick; ramps want >= {RAMP_THICKNESS_CELLS}",
                severity="warning",
            ))

    if any(v.severity == "error" for v in out):
        return out

    grid = DomainGrid(spec)
    for i in range(1, spec.k + 1):
        if not grid.core_mask(i).any():
            out.append(Violation("core_no_cells", f"core {i} contains no cell centers"))
    ncomp = _component_count(grid.mask)
    if ncomp != 1:
        out.append(Violation(
            "not_connected",
            f"domain mask splits into {ncomp} components; channels must join the cores",
        ))
    out.extend(_dangling_channels(spec, grid))
    return out


def build_domain(spec: DomainSpec) -> DomainGrid:
    """Construct the grid; raises on any error-severity violation."""
    violations = [v for v in validate_spec(spec) if v.severity == "error"]
    if violations:
        raise ValueError("invalid domain spec: " + "; ".join(v.message for v in violations))
    return DomainGrid(spec)


def measure(grid: DomainGrid, region) -> float:
    """h^2 times the number of cells with the given label(s).

    region is a name ("core_1", "channel", "outside") or an iterable of
    names.  "outside" counts as 0 by convention.
    """
    names = [region] if isinstance(region, str) else list(region)
    total = 0
    for name in names:
        total += int(np.count_nonzero(_label_mask(grid, name)))
    return grid.cell_area * total


def _label_mask(grid: DomainGrid, name: str) -> np.ndarray:
    if name == "outside":
        return np.zeros_like(grid.mask)
    if name == "channel":
        return grid.channel_mask
    if name.startswith("core_"):
        i = int(name.split("_", 1)[1])
        if 1 <= i <= grid.k:
            return grid.core_mask(i)
    raise KeyError(f"unknown region label {name!r}; expected one of {grid.label_names()}")


def _component_count(mask: np.ndarray) -> int:
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])  # 4-connectivity
    _, n = ndimage.label(mask, structure=structure)
    return int(n)


def _dangling_channels(spec: DomainSpec, grid: DomainGrid) -> list[Violation]:
    """Each channel must meet (overlap or touch) at least two other regions."""
    gx, gy = grid.cell_centers()
    covers = [r.contains(gx, gy) & grid.mask for r in spec.cores + spec.channels]
    out = []
    grow = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    for ci, rect in enumerate(spec.channels):
        mine = covers[spec.k + ci]
        if not mine.any():
            continue  # thin-channel warnings already cover this
        halo = ndimage.binary_dilation(mine, structure=grow)
        met = sum(
            1
            for oi, other in enumerate(covers)
            if oi != spec.k + ci and (halo & other).any()
        )
        if met < 2:
            out.append(Violation(
                "channel_dangling",
                f"channel {ci} touches {met} other region(s), needs >= 2",
            ))
    return out


def dump_grid_csv(grid: DomainGrid, path) -> None:
    """Write x,y,label rows for every in-domain cell (plotting aid)."""
    gx, gy = grid.cell_centers()
    names = np.where(
        grid.label >= 1,
        np.char.add("core_", grid.label.astype(str)),
        "channel",
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,label\n")
        for y, x, name in zip(gy[grid.mask], gx[grid.mask], names[grid.mask]):
            fh.write(f"{x:.9g},{y:.9g},{name}\n")
