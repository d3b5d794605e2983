"""Geometry of broken sheared waveguides.

A guide with cross-section S and shear slope beta is the image of R x S
under (x, y1, y2) |-> (x, y1, beta*|x| + y2).  Pulling the Laplacian back
to the straight product domain produces the flat metric

    G_beta = [[1+b^2, 0, b], [0, 1, 0], [b, 0, 1]],   det G_beta = 1,

so the transformed problem lives on a rectangle/cylinder with constant
coefficients and all geometry is carried by the shear cross term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ShearParam",
    "Rect",
    "MaskSection",
    "WaveguideSpec",
    "MetricTensor",
    "PrismRegion",
    "Face",
    "metric",
    "map_point",
    "contains",
    "prism_region",
    "section_diameter",
]


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ShearParam:
    """Slope beta > 0 of the reference broken line x |-> (x, 0, beta*|x|)."""

    beta: float

    def __post_init__(self) -> None:
        _require_finite("beta", self.beta)
        if self.beta <= 0.0:
            raise ValueError(f"shear slope must be positive, got {self.beta}")


def beta_value(beta: float | ShearParam, *, allow_zero: bool = False) -> float:
    """Coerce a shear argument to a float, validating its sign."""
    b = beta.beta if isinstance(beta, ShearParam) else float(beta)
    _require_finite("beta", b)
    if b < 0.0 or (b == 0.0 and not allow_zero):
        raise ValueError(f"shear slope out of range: {b}")
    return b


@dataclass(frozen=True)
class Rect:
    """Open rectangle (a,b) x (c,d) used as a cross-section in (y1, y2)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        _require_finite("rectangle bounds", self.a, self.b, self.c, self.d)
        if not (self.a < self.b and self.c < self.d):
            raise ValueError(f"degenerate rectangle {(self.a, self.b, self.c, self.d)}")

    @property
    def width1(self) -> float:
        return self.b - self.a

    @property
    def width2(self) -> float:
        return self.d - self.c

    @property
    def aspect(self) -> float:
        """R = (d-c)/(b-a), the ratio steering the uniqueness threshold."""
        return self.width2 / self.width1


@dataclass(frozen=True)
class MaskSection:
    """Cross-section given by a boolean cell grid.

    ``inside[i, j]`` marks the cell with center
    ``origin + ((i+1/2)h, (j+1/2)h)`` as part of the section; axis 0 is y1.
    """

    inside: np.ndarray
    cell: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        arr = np.asarray(self.inside, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if not arr.any():
            raise ValueError("mask has no inside cells")
        _require_finite("cell size", self.cell)
        if self.cell <= 0.0:
            raise ValueError(f"cell size must be positive, got {self.cell}")
        object.__setattr__(self, "inside", arr)


Section = Rect | MaskSection


def section_diameter(section: Section) -> float:
    if isinstance(section, Rect):
        return math.hypot(section.width1, section.width2)
    idx = np.argwhere(section.inside)
    span = (idx.max(axis=0) - idx.min(axis=0) + 1) * section.cell
    return float(math.hypot(*span))


@dataclass(frozen=True)
class WaveguideSpec:
    """A broken sheared waveguide: shear slope plus cross-section.

    ``straight`` flags the unbroken reference tube; it is the only way
    to get beta = 0 past validation, and it demands beta = 0 so a run
    cannot be half-flagged.
    """

    beta: float
    section: Section
    straight: bool = False

    def __post_init__(self) -> None:
        b = beta_value(self.beta, allow_zero=self.straight)
        if self.straight and b != 0.0:
            raise ValueError(f"straight reference runs take beta = 0, got {b}")


@dataclass(frozen=True)
class MetricTensor:
    """Pullback metric of the shear map on one half-guide."""

    beta: float
    matrix: np.ndarray = field(repr=False)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


def metric(beta: float | ShearParam) -> MetricTensor:
    """Flat metric G_beta of the transformed half-guide; det G_beta = 1."""
    b = beta_value(beta)
    g = np.array([
        [1.0 + b * b, 0.0, b],
        [0.0, 1.0, 0.0],
        [b, 0.0, 1.0],
    ])
    return MetricTensor(beta=b, matrix=g)


def map_point(beta: float | ShearParam, x, y1, y2):
    """Shear map L_beta(x, y1, y2) = (x, y1, beta*|x| + y2), vectorized."""
    b = beta_value(beta, allow_zero=True)
    x = np.asarray(x, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    return x, y1, b * np.abs(x) + y2


def contains(spec: WaveguideSpec, s, t, z):
    """Open-set membership test for rectangle guides.

    The guide in physical coordinates (s, t, z) is
    a < t < b  and  beta*|s| + c < z < beta*|s| + d.
    """
    if not isinstance(spec.section, Rect):
        raise ValueError("contains() supports rectangle sections only; "
                         "mask membership is grid-level")
    r = spec.section
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    ridge = spec.beta * np.abs(s)
    return (r.a < t) & (t < r.b) & (ridge + r.c < z) & (z < ridge + r.d)


@dataclass(frozen=True)
class Face:
    """Flat face of the comparison prism with its boundary condition."""

    name: str
    bc: str  # 'dirichlet' | 'neumann'
    normal: tuple[float, float, float]
    point: tuple[float, float, float]


@dataclass(frozen=True)
class PrismRegion:
    """Triangular prism used by the two-sided eigenvalue comparison.

    Coordinates (x, y1, y2) with x in (-A, 0), y1 in (0, depth) and
    0 < y2 < x + A; A = (d-c)/sqrt(2), depth = b-a, B = depth/2.
    """

    A: float
    B: float
    depth: float
    faces: tuple[Face, ...]

    def contains(self, x, y1, y2):
        x = np.asarray(x, dtype=float)
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        return ((-self.A < x) & (x < 0.0)
                & (0.0 < y1) & (y1 < self.depth)
                & (0.0 < y2) & (y2 < x + self.A))


def prism_region(rect: Rect) -> PrismRegion:
    """Comparison prism attached to a rectangle section."""
    A = rect.width2 / math.sqrt(2.0)
    depth = rect.width1
    s = 1.0 / math.sqrt(2.0)
    faces = (
        Face("y1_top", "dirichlet", (0.0, 1.0, 0.0), (-A / 2, depth, A / 4)),
        Face("y1_bottom", "dirichlet", (0.0, -1.0, 0.0), (-A / 2, 0.0, A / 4)),
        Face("y2_bottom", "dirichlet", (0.0, 0.0, -1.0), (-A / 2, depth / 2, 0.0)),
        Face("x_end", "neumann", (1.0, 0.0, 0.0), (0.0, depth / 2, A / 2)),
        Face("slant", "neumann", (-s, 0.0, s), (-A / 2, depth / 2, A / 2)),
    )
    return PrismRegion(A=A, B=depth / 2.0, depth=depth, faces=faces)
