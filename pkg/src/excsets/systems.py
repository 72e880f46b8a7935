"""Concrete hyperbolic models: affine horseshoes and toral automorphisms.

An affine horseshoe is specified directly by branch data: per branch an
expansion rate u_i > 1 (vertical strip of width 1/u_i) and a contraction
rate s_i in (0, 1) (horizontal band of height s_i), with the standard
placement convention that branch i occupies the i-th strip left to right
and the i-th band bottom to top, orientation preserving.  The invariant
set is a product of two Cantor sets; forward itineraries read vertical
strips and backward itineraries horizontal bands.

Linear toral automorphisms are 2x2 integer matrices of determinant +-1
with no eigenvalue on the unit circle.  Rational points are iterated in
exact arithmetic (the denominator is preserved), everything else in
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fractal import PointCloud
from .symbolic import Word, _as_symbols
from .thermo import LocallyConstantPotential

__all__ = [
    "AffineHorseshoe",
    "Rect",
    "ToralAutomorphism",
    "TargetSet",
    "ModelFormatError",
    "code_point",
    "realize_cylinder",
    "horseshoe_potentials",
    "point_from_itinerary",
    "sample_invariant_set",
    "toral_orbit",
    "toral_survivors",
    "parse_model_text",
    "load_model",
    "dump_model",
]

CELL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Rect:
    """An axis-parallel rectangle inside the unit square."""

    x0: float
    y0: float
    width: float
    height: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0 + 0.5 * self.width, self.y0 + 0.5 * self.height)

    def contains(self, point: tuple[float, float], tol: float = CELL_TOLERANCE) -> bool:
        x, y = point
        return (self.x0 - tol <= x <= self.x0 + self.width + tol
                and self.y0 - tol <= y <= self.y0 + self.height + tol)


@dataclass(frozen=True)
class AffineHorseshoe:
    """A piecewise-affine horseshoe with exact per-branch rates."""

    contraction: tuple[float, ...]
    expansion: tuple[float, ...]
    x_offsets: tuple[float, ...]
    y_offsets: tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(v) for v in self.contraction)
        u = tuple(float(v) for v in self.expansion)
        ax = tuple(float(v) for v in self.x_offsets)
        ay = tuple(float(v) for v in self.y_offsets)
        object.__setattr__(self, "contraction", s)
        object.__setattr__(self, "expansion", u)
        object.__setattr__(self, "x_offsets", ax)
        object.__setattr__(self, "y_offsets", ay)
        m = len(u)
        if m < 2 or len(s) != m or len(ax) != m or len(ay) != m:
            raise ValueError("need matching branch data for at least 2 branches")
        if any(not (0.0 < v < 1.0) for v in s):
            raise ValueError("contraction rates must lie in (0, 1)")
        if any(v <= 1.0 for v in u):
            raise ValueError("expansion rates must exceed 1")
        if sum(1.0 / v for v in u) > 1.0 + 1e-12:
            raise ValueError("vertical strips must fit inside the unit square")
        if sum(s) > 1.0 + 1e-12:
            raise ValueError("horizontal bands must fit inside the unit square")
        for i in range(m):
            if ax[i] < -1e-12 or ax[i] + 1.0 / u[i] > 1.0 + 1e-12:
                raise ValueError(f"strip {i} leaves the unit square")
            if ay[i] < -1e-12 or ay[i] + s[i] > 1.0 + 1e-12:
                raise ValueError(f"band {i} leaves the unit square")
            if i and ax[i] < ax[i - 1] + 1.0 / u[i - 1] - 1e-12:
                raise ValueError("vertical strips must be disjoint, left to right")
            if i and ay[i] < ay[i - 1] + s[i - 1] - 1e-12:
                raise ValueError("horizontal bands must be disjoint, bottom to top")

    @classmethod
    def standard(cls, contraction: Sequence[float], expansion: Sequence[float]) -> "AffineHorseshoe":
        """Evenly distribute the slack between strips and between bands."""
        s = [float(v) for v in contraction]
        u = [float(v) for v in expansion]
        m = len(u)
        widths = [1.0 / v for v in u]
        gap_x = (1.0 - sum(widths)) / (m - 1) if m > 1 else 0.0
        gap_y = (1.0 - sum(s)) / (m - 1) if m > 1 else 0.0
        ax, ay = [], []
        x = y = 0.0
        for i in range(m):
            ax.append(x)
            ay.append(y)
            x += widths[i] + gap_x
            y += s[i] + gap_y
        return cls(tuple(s), tuple(u), tuple(ax), tuple(ay))

    @property
    def branches(self) -> int:
        return len(self.expansion)

    def strip(self, i: int) -> tuple[float, float]:
        return (self.x_offsets[i], self.x_offsets[i] + 1.0 / self.expansion[i])

    def band(self, i: int) -> tuple[float, float]:
        return (self.y_offsets[i], self.y_offsets[i] + self.contraction[i])

    def branch_of_x(self, x: float, tol: float = CELL_TOLERANCE) -> int | None:
        for i in range(self.branches):
            left, right = self.strip(i)
            if left - tol <= x <= right + tol:
                return i
        return None

    def branch_of_y(self, y: float, tol: float = CELL_TOLERANCE) -> int | None:
        for i in range(self.branches):
            bottom, top = self.band(i)
            if bottom - tol <= y <= top + tol:
                return i
        return None

    def apply(self, point: tuple[float, float]) -> tuple[float, float]:
        """One forward step: expand across the strip, contract into the band."""
        x, y = point
        i = self.branch_of_x(x)
        if i is None:
            raise ValueError("point is outside every vertical strip")
        return (self.expansion[i] * (x - self.x_offsets[i]),
                self.contraction[i] * y + self.y_offsets[i])

    def describe(self) -> str:
        u = ",".join(repr(v) for v in self.expansion)
        s = ",".join(repr(v) for v in self.contraction)
        return f"horseshoe(u=[{u}], s=[{s}])"


def horseshoe_potentials(model: AffineHorseshoe) -> tuple[LocallyConstantPotential, LocallyConstantPotential]:
    """Depth-1 stable/unstable potentials: log s_i and -log u_i."""
    phi_s = LocallyConstantPotential.from_symbol_values(
        [math.log(v) for v in model.contraction])
    phi_u = LocallyConstantPotential.from_symbol_values(
        [-math.log(v) for v in model.expansion])
    return phi_s, phi_u


def code_point(model: AffineHorseshoe, point: tuple[float, float], depth: int) -> tuple[Word, Word]:
    """Forward and backward itineraries of a point of the invariant set.

    The forward word reads vertical strips along the orbit starting at
    the point itself; the backward word reads horizontal bands along the
    inverse orbit (symbol k is the branch applied k steps in the past).
    """
    if depth < 1:
        raise ValueError("coding depth must be at least 1")
    x, y = float(point[0]), float(point[1])
    forward = []
    cx = x
    # forward itinerary needs only the x coordinate
    for step in range(depth):
        i = model.branch_of_x(cx)
        if i is None:
            raise ValueError(f"not in invariant set at step {step}")
        forward.append(i)
        cx = model.expansion[i] * (cx - model.x_offsets[i])
    backward = []
    cy = y
    for step in range(1, depth + 1):
        i = model.branch_of_y(cy)
        if i is None:
            raise ValueError(f"not in invariant set at step -{step}")
        backward.append(i)
        cy = (cy - model.y_offsets[i]) / model.contraction[i]
    return Word(tuple(forward)), Word(tuple(backward))


def realize_cylinder(model: AffineHorseshoe, forward=None, backward=None) -> Rect:
    """Geometric rectangle of a bi-cylinder.

    Width is the product of 1/u over the forward word, height the
    product of s over the backward word; empty words give the full side.
    """
    fw = _as_symbols(forward) if forward is not None else ()
    bw = _as_symbols(backward) if backward is not None else ()
    x0, width = 0.0, 1.0
    for i in reversed(fw):
        x0 = model.x_offsets[i] + x0 / model.expansion[i]
        width /= model.expansion[i]
    y0, height = 0.0, 1.0
    for i in reversed(bw):
        y0 = model.y_offsets[i] + model.contraction[i] * y0
        height *= model.contraction[i]
    return Rect(x0, y0, width, height)


def point_from_itinerary(model: AffineHorseshoe, forward, backward) -> tuple[float, float]:
    """The invariant-set point whose itinerary repeats the given words.

    The x coordinate is the fixed point of the composed inverse branch
    maps of the forward word, the y coordinate the fixed point of the
    composed band maps of the backward word; both compositions are
    affine contractions so the fixed points are exact.
    """
    fw = _as_symbols(forward)
    bw = _as_symbols(backward)
    if not fw or not bw:
        raise ValueError("periodic itineraries need nonempty words")
    a, b = 1.0, 0.0
    for i in reversed(fw):
        # compose x -> a_i + x / u_i
        a = a / model.expansion[i]
        b = model.x_offsets[i] + b / model.expansion[i]
    x = b / (1.0 - a)
    a, b = 1.0, 0.0
    for i in reversed(bw):
        a = model.contraction[i] * a
        b = model.y_offsets[i] + model.contraction[i] * b
    y = b / (1.0 - a)
    return (x, y)


def _cylinder_positions(offsets: Sequence[float], ratios: Sequence[float], depth: int) -> np.ndarray:
    """Left endpoints of all depth-n cylinder intervals, branch-major order."""
    lefts = np.array([0.0])
    for _ in range(depth):
        pieces = [offsets[i] + lefts * ratios[i] for i in range(len(offsets))]
        lefts = np.concatenate(pieces)
    return lefts


def sample_invariant_set(
    model: AffineHorseshoe,
    depth: int,
    max_points: int | None = None,
    seed: int = 0,
) -> PointCloud:
    """One point (cell center) per depth-n bi-cylinder of the invariant set.

    Deterministic seeded subsampling kicks in when the M^(2n) cells
    exceed ``max_points``.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    inv_u = [1.0 / v for v in model.expansion]
    xs = _cylinder_positions(model.x_offsets, inv_u, depth)
    ys = _cylinder_positions(model.y_offsets, model.contraction, depth)
    xs = xs + 0.5 * _cylinder_widths(inv_u, depth)
    ys = ys + 0.5 * _cylinder_widths(model.contraction, depth)
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    if max_points is not None and points.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(points.shape[0], size=max_points, replace=False))
        points = points[chosen]
    return PointCloud(points, model=model.describe(), depth=depth, seed=seed)


def _cylinder_widths(ratios: Sequence[float], depth: int) -> np.ndarray:
    widths = np.array([1.0])
    for _ in range(depth):
        widths = np.concatenate([widths * r for r in ratios])
    return widths


@dataclass(frozen=True)
class ToralAutomorphism:
    """A hyperbolic linear automorphism of the 2-torus."""

    matrix: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
        if det not in (1, -1):
            raise ValueError("matrix must have determinant +1 or -1")
        trace = rows[0][0] + rows[1][1]
        if det == 1 and abs(trace) <= 2:
            raise ValueError("matrix has an eigenvalue of absolute value 1")
        if det == -1 and trace == 0:
            raise ValueError("matrix has an eigenvalue of absolute value 1")

    @property
    def determinant(self) -> int:
        m = self.matrix
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]

    @property
    def expanding_eigenvalue(self) -> float:
        """The eigenvalue of absolute value > 1, from the trace."""
        t = self.matrix[0][0] + self.matrix[1][1]
        if self.determinant == 1:
            root = math.sqrt(t * t - 4.0)
        else:
            root = math.sqrt(t * t + 4.0)
        lam = 0.5 * (t + root) if t >= 0 else 0.5 * (t - root)
        return lam

    @property
    def log_expansion(self) -> float:
        return math.log(abs(self.expanding_eigenvalue))

    def apply(self, point):
        """One step mod 1; Fractions stay Fractions."""
        x, y = point
        m = self.matrix
        nx = m[0][0] * x + m[0][1] * y
        ny = m[1][0] * x + m[1][1] * y
        return (nx % 1, ny % 1)

    def expansion_rate(self, steps: int = 60, burn_in: int = 100) -> float:
        """Measured orbit-average expansion along the unstable direction.

        Push a generic vector forward until it aligns with the unstable
        eigendirection (geometric convergence), then average the
        per-step log expansion factors.
        """
        v = np.array([1.0, 0.7071067811865476])
        a = np.array(self.matrix, dtype=float)
        for _ in range(burn_in):
            v = a @ v
            v /= np.linalg.norm(v)
        total = 0.0
        for _ in range(steps):
            v = a @ v
            norm = float(np.linalg.norm(v))
            total += math.log(norm)
            v /= norm
        return total / steps

    def describe(self) -> str:
        m = self.matrix
        return f"toral([[{m[0][0]},{m[0][1]}],[{m[1][0]},{m[1][1]}]])"


def _is_rational_point(point) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in point)


def toral_orbit(auto: ToralAutomorphism, point, steps: int) -> list[tuple]:
    """The orbit segment [x, f(x), ..., f^steps(x)] on the torus.

    Rational starting points are iterated exactly with Fractions
    (denominators never grow); floats otherwise.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if _is_rational_point(point):
        current = (Fraction(point[0]) % 1, Fraction(point[1]) % 1)
    else:
        current = (float(point[0]) % 1.0, float(point[1]) % 1.0)
    orbit = [current]
    for _ in range(steps):
        current = auto.apply(current)
        orbit.append(current)
    return orbit


@dataclass(frozen=True)
class TargetSet:
    """The avoided set: finite points, forward cylinders, or metric balls."""

    kind: str
    points: tuple[tuple[float, float], ...] = ()
    words: tuple[Word, ...] = ()
    centers: tuple[tuple[float, float], ...] = ()
    radius: float = 0.0
    depth: int = 0

    def __post_init__(self):
        if self.kind not in ("points", "cylinders", "ball", "empty"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        object.__setattr__(self, "points",
                           tuple((float(x), float(y)) for x, y in self.points))
        object.__setattr__(self, "words", tuple(
            w if isinstance(w, Word) else Word(_as_symbols(w)) for w in self.words))
        object.__setattr__(self, "centers",
                           tuple((float(x), float(y)) for x, y in self.centers))
        if self.kind == "points" and not self.points:
            raise ValueError("point target needs at least one point")
        if self.kind == "cylinders" and not self.words:
            raise ValueError("cylinder target needs at least one word")
        if self.kind == "ball":
            if not self.centers:
                raise ValueError("ball target needs at least one center")
            if self.radius < 0:
                raise ValueError("ball radius must be nonnegative")

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"


def _torus_distance(x: np.ndarray, y: np.ndarray, cx: float, cy: float) -> np.ndarray:
    """Sup-metric distance to a point on the torus, vectorized."""
    dx = np.abs(x - cx)
    dx = np.minimum(dx, 1.0 - dx)
    dy = np.abs(y - cy)
    dy = np.minimum(dy, 1.0 - dy)
    return np.maximum(dx, dy)


def toral_survivors(
    auto: ToralAutomorphism,
    target: TargetSet,
    grid: int,
    steps: int,
) -> PointCloud:
    """Grid points whose first ``steps`` iterates avoid every target ball.

    Avoidance is of the open sup-metric ball, so radius 0 keeps the full
    grid.  The whole scan is vectorized; iterate k runs over 0..steps-1.
    """
    if target.kind != "ball":
        raise ValueError("toral survivors need a ball target")
    if target.radius > 0 and target.radius <= 1.0 / grid:
        raise ValueError("ball radius must exceed the grid spacing")
    if steps * auto.log_expansion > 45.0:
        raise ValueError("too many steps for float safety")
    coords = np.arange(grid, dtype=float) / grid
    gx, gy = np.meshgrid(coords, coords, indexing="ij")
    x = gx.ravel()
    y = gy.ravel()
    alive = np.ones(x.shape[0], dtype=bool)
    m = auto.matrix
    cx, cy = x.copy(), y.copy()
    for _ in range(steps):
        for (tx, ty) in target.centers:
            alive &= _torus_distance(cx, cy, tx, ty) >= target.radius
        nx = (m[0][0] * cx + m[0][1] * cy) % 1.0
        ny = (m[1][0] * cx + m[1][1] * cy) % 1.0
        cx, cy = nx, ny
    points = np.column_stack([x[alive], y[alive]])
    return PointCloud(points, model=auto.describe(), depth=steps, seed=None)


class ModelFormatError(ValueError):
    """Raised with a line-precise message for bad model files."""


def _parse_floats(text: str) -> list[float]:
    return [float(part) for part in text.replace(",", " ").split()]


def parse_model_text(text: str, source: str = "<model>"):
    """Parse the structured model description.

    Lines are ``key: value``; blank lines and # comments are skipped.
    ``type`` selects horseshoe (keys u, s, optional x_offsets, y_offsets)
    or toral (key matrix with four integers, row major).
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ModelFormatError(f"{source}:{lineno}: expected 'key: value'")
        key, value = line.split(":", 1)
        key = key.strip()
        if key in entries:
            raise ModelFormatError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = (value.strip(), lineno)

    def need(key: str) -> tuple[str, int]:
        if key not in entries:
            raise ModelFormatError(f"{source}:1: missing key {key!r}")
        return entries[key]

    kind, kind_line = need("type")
    if kind == "horseshoe":
        allowed = {"type", "u", "s", "x_offsets", "y_offsets"}
        for key, (_, lineno) in entries.items():
            if key not in allowed:
                raise ModelFormatError(f"{source}:{lineno}: unknown key {key!r}")
        u_text, u_line = need("u")
        s_text, s_line = need("s")
        try:
            u = _parse_floats(u_text)
        except ValueError:
            raise ModelFormatError(f"{source}:{u_line}: bad expansion rates") from None
        try:
            s = _parse_floats(s_text)
        except ValueError:
            raise ModelFormatError(f"{source}:{s_line}: bad contraction rates") from None
        try:
            if "x_offsets" in entries or "y_offsets" in entries:
                ax_text, ax_line = need("x_offsets")
                ay_text, ay_line = need("y_offsets")
                ax = _parse_floats(ax_text)
                ay = _parse_floats(ay_text)
                return AffineHorseshoe(tuple(s), tuple(u), tuple(ax), tuple(ay))
            return AffineHorseshoe.standard(s, u)
        except ValueError as exc:
            raise ModelFormatError(f"{source}:{kind_line}: {exc}") from None
    if kind == "toral":
        allowed = {"type", "matrix"}
        for key, (_, lineno) in entries.items():
            if key not in allowed:
                raise ModelFormatError(f"{source}:{lineno}: unknown key {key!r}")
        m_text, m_line = need("matrix")
        try:
            values = [int(part) for part in m_text.replace(",", " ").split()]
        except ValueError:
            raise ModelFormatError(f"{source}:{m_line}: matrix entries must be integers") from None
        if len(values) != 4:
            raise ModelFormatError(f"{source}:{m_line}: matrix needs exactly 4 integers")
        try:
            return ToralAutomorphism(((values[0], values[1]), (values[2], values[3])))
        except ValueError as exc:
            raise ModelFormatError(f"{source}:{m_line}: {exc}") from None
    raise ModelFormatError(f"{source}:{kind_line}: unknown model type {kind!r}")


def load_model(path: str):
    with open(path) as handle:
        return parse_model_text(handle.read(), source=str(path))


def dump_model(model) -> str:
    if isinstance(model, AffineHorseshoe):
        return "\n".join([
            "type: horseshoe",
            "u: " + " ".join(repr(v) for v in model.expansion),
            "s: " + " ".join(repr(v) for v in model.contraction),
            "x_offsets: " + " ".join(repr(v) for v in model.x_offsets),
            "y_offsets: " + " ".join(repr(v) for v in model.y_offsets),
        ]) + "\n"
    if isinstance(model, ToralAutomorphism):
        m = model.matrix
        return "\n".join([
            "type: toral",
            f"matrix: {m[0][0]} {m[0][1]} {m[1][0]} {m[1][1]}",
        ]) + "\n"
    raise TypeError("unknown model type")
