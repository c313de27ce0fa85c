"""Domains, boundary distance and structured 2-D grids.

Three shapes are supported: the unit ball in any dimension (centered at the
origin), an axis-aligned ellipse centered at the origin, and the rectangle
``[0, width] x [0, height]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError, GridTooCoarseError

_MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class UnitBall:
    n: int = 2
    h: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"ball dimension must be an integer >= 2, got {self.n}")

    @property
    def dimension(self) -> int:
        return self.n

    @property
    def bounding_box(self):
        return (-1.0, 1.0), (-1.0, 1.0)

    @property
    def diameter(self) -> float:
        return 2.0

    def distance(self, x):
        x = _as_points(x, self.n)
        d = 1.0 - np.linalg.norm(x, axis=-1)
        _check_inside(d)
        return np.maximum(d, 0.0)

    def to_dict(self):
        return _with_h({"kind": "ball", "n": self.n}, self.h)


@dataclass(frozen=True)
class Ellipse:
    a: float
    b: float
    h: float | None = None

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError("ellipse half-axes must be positive")

    dimension = 2

    @property
    def bounding_box(self):
        return (-self.a, self.a), (-self.b, self.b)

    @property
    def diameter(self) -> float:
        return 2.0 * max(self.a, self.b)

    def distance(self, x):
        x = _as_points(x, 2)
        inside = (x[..., 0] / self.a) ** 2 + (x[..., 1] / self.b) ** 2
        _check_inside(1.0 - np.sqrt(inside))
        return ellipse_distance(self.a, self.b, x[..., 0], x[..., 1])

    def to_dict(self):
        return _with_h({"kind": "ellipse", "a": self.a, "b": self.b}, self.h)


@dataclass(frozen=True)
class Rectangle:
    width: float
    height: float
    h: float | None = None

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DomainError("rectangle sides must be positive")

    dimension = 2

    @property
    def bounding_box(self):
        return (0.0, self.width), (0.0, self.height)

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.width, self.height))

    def distance(self, x):
        x = _as_points(x, 2)
        d = np.minimum.reduce([x[..., 0], self.width - x[..., 0],
                               x[..., 1], self.height - x[..., 1]])
        _check_inside(d)
        return np.maximum(d, 0.0)

    def to_dict(self):
        return _with_h({"kind": "rectangle", "width": self.width,
                        "height": self.height}, self.h)


Domain = Union[UnitBall, Ellipse, Rectangle]


def distance_to_boundary(domain: Domain, x):
    """delta(x) = dist(x, boundary). Scalar in, float out; arrays broadcast."""
    d = domain.distance(x)
    return float(d) if np.ndim(d) == 0 else d


def domain_from_dict(data: dict) -> Domain:
    """Inverse of ``Domain.to_dict``; raises DomainError on bad input."""
    if not isinstance(data, dict) or "kind" not in data:
        raise DomainError('domain must be a JSON object with a "kind" field')
    kind = str(data["kind"]).lower()
    params = {k: v for k, v in data.items() if k != "kind"}
    try:
        if kind in ("ball", "unitball", "disk"):
            if kind == "disk":
                params.setdefault("n", 2)
            return UnitBall(**params)
        if kind == "ellipse":
            return Ellipse(**params)
        if kind == "rectangle":
            return Rectangle(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for domain kind {kind!r}: {exc}") from None
    raise DomainError(f"unknown domain kind {kind!r}")


def ellipse_distance(a, b, x, y):
    """Distance from interior points (x, y) to the ellipse (x/a)^2 + (y/b)^2 = 1.

    The nearest boundary point is ``(a^2 x/(t + a^2), b^2 y/(t + b^2))`` where
    ``t`` is the root of the normal equation on ``(-min(a,b)^2, 0]``; the root is
    bracketed and bisected to machine precision.
    """
    x = np.abs(np.asarray(x, dtype=float))
    y = np.abs(np.asarray(y, dtype=float))
    if b > a:
        return ellipse_distance(b, a, y, x)
    x, y = np.broadcast_arrays(x, y)
    # s = t + b^2 lies in (0, b^2]; F(s) is decreasing there.
    c2 = a * a - b * b
    lo = np.zeros_like(x)
    hi = np.full_like(x, b * b)

    def excess(s):
        with np.errstate(divide="ignore", invalid="ignore"):
            p = a * x / (s + c2)
            q = np.where(y > 0, b * y / s, 0.0)
        return p * p + q * q - 1.0

    # enough halvings to resolve roots down to the subnormal range
    for _ in range(1200):
        mid = 0.5 * (lo + hi)
        pos = excess(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(hi, 5e-324)):
            break
    s = 0.5 * (lo + hi)
    px = a * a * x / (s + c2)
    with np.errstate(divide="ignore", invalid="ignore"):
        py = np.where(y > 0, b * b * y / s, 0.0)
    # On the major axis the foot is off-axis once x < c2 / a.
    axis = y == 0
    if np.any(axis):
        inner = axis & (x < c2 / a)
        fx = np.where(inner, a * a * x / np.where(c2 > 0, c2, 1.0), a)
        fx = np.minimum(fx, a)
        fy = np.where(inner, b * np.sqrt(np.clip(1 - (fx / a) ** 2, 0, None)), 0.0)
        px = np.where(axis, fx, px)
        py = np.where(axis, fy, py)
    d = np.hypot(x - px, y - py)
    return float(d) if d.ndim == 0 else d


@dataclass
class Grid2D:
    """Uniform lattice over a 2-D domain.

    Rectangles use a vertex lattice whose outer nodes lie on the boundary;
    curved domains use a cell-centred lattice over the bounding box and are
    represented by a rasterized mask (``approximate_boundary`` is set).
    """

    domain: Domain
    h: float
    x: np.ndarray
    y: np.ndarray
    interior: np.ndarray
    delta: np.ndarray
    approximate_boundary: bool
    X: np.ndarray = field(init=False, repr=False)
    Y: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.X, self.Y = np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def shape(self):
        return self.interior.shape

    @property
    def n_interior(self) -> int:
        return int(self.interior.sum())

    def interior_points(self) -> np.ndarray:
        return np.column_stack([self.X[self.interior], self.Y[self.interior]])

    def band(self, threshold: float) -> np.ndarray:
        """Interior nodes closer than ``threshold`` to the boundary."""
        return self.interior & (self.delta < threshold)

    def index_of(self, point) -> tuple[int, int]:
        """Lattice index of the node nearest to ``point``."""
        i = int(np.argmin(np.abs(self.x - point[0])))
        j = int(np.argmin(np.abs(self.y - point[1])))
        return i, j


def build_grid(domain: Domain, h: float, min_nodes: int = 3) -> Grid2D:
    if domain.dimension != 2:
        raise DomainError("structured grids are 2-D only")
    if not h > 0:
        raise GridTooCoarseError("grid spacing must be positive")
    (x0, x1), (y0, y1) = domain.bounding_box
    if isinstance(domain, Rectangle):
        nx, ny = (x1 - x0) / h, (y1 - y0) / h
        if abs(nx - round(nx)) > 1e-9 * nx or abs(ny - round(ny)) > 1e-9 * ny:
            raise DomainError("rectangle sides must be integer multiples of h")
        nx, ny = int(round(nx)), int(round(ny))
        x = x0 + h * np.arange(nx + 1)
        y = y0 + h * np.arange(ny + 1)
        approximate = False
    else:
        nx = int(np.floor((x1 - x0) / h + 1e-9))
        ny = int(np.floor((y1 - y0) / h + 1e-9))
        x = 0.5 * (x0 + x1) + h * (np.arange(nx) - (nx - 1) / 2)
        y = 0.5 * (y0 + y1) + h * (np.arange(ny) - (ny - 1) / 2)
        approximate = True
    X, Y = np.meshgrid(x, y, indexing="ij")
    pts = np.stack([X, Y], axis=-1)
    if isinstance(domain, Rectangle):
        delta = domain.distance(pts)
        interior = np.zeros(X.shape, dtype=bool)
        interior[1:-1, 1:-1] = True
        interior &= delta > 0
    else:
        inside = _inside_mask(domain, X, Y)
        delta = np.zeros(X.shape)
        delta[inside] = domain.distance(pts[inside])
        interior = inside & (delta > 0)
    rows = interior.any(axis=1).sum()
    cols = interior.any(axis=0).sum()
    if rows < min_nodes or cols < min_nodes:
        raise GridTooCoarseError(
            f"h = {h} leaves {rows} x {cols} interior nodes; need >= {min_nodes} per axis")
    return Grid2D(domain, float(h), x, y, interior, delta, approximate)


def _inside_mask(domain, X, Y):
    if isinstance(domain, UnitBall):
        return X ** 2 + Y ** 2 < 1.0
    return (X / domain.a) ** 2 + (Y / domain.b) ** 2 < 1.0


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (dim,):
        raise DomainError(f"expected points with trailing dimension {dim}, got shape {x.shape}")
    return x


def _check_inside(signed):
    if np.any(np.asarray(signed) < -_MEMBERSHIP_TOL):
        raise DomainError("point outside the closed domain")


def _with_h(d, h):
    if h is not None:
        d["h"] = h
    return d
