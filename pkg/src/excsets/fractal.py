"""Cover-based entropy and dimension estimators.

Three estimators live here.  Moran covers partition a sequence space
into cylinders on which the Birkhoff sum of a negative potential first
drops below log r; they are the bridge between symbolic covers and
geometric scales.  The Bowen-style entropy of a survivor set is the
critical exponent where weighted cover sums cross 1, evaluated over
refining cylinder covers.  Box-counting dimension is the least-squares
slope of log N(delta) against log(1/delta) on a sampled point cloud; for
the quasi-self-similar sets produced by the shipped models it is an
honest (upper-bound-biased) surrogate for Hausdorff dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .symbolic import EMPTY_ENTROPY, Sft, SurvivorSet, Word, _as_symbols
from .thermo import LocallyConstantPotential

__all__ = [
    "CylinderCover",
    "PointCloud",
    "DimEstimate",
    "moran_cover",
    "birkhoff_sum",
    "bowen_entropy_estimate",
    "bowen_measure_class",
    "box_dimension",
    "marstrand_bound",
    "save_pointcloud",
    "load_pointcloud",
]

MAX_COVER_SIZE = 1 << 22

BOWEN_DEPTHS = tuple(range(8, 25))


@dataclass(frozen=True)
class CylinderCover:
    """A finite family of cylinders with their escape-time weights."""

    cylinders: tuple[tuple[Word, int], ...]
    r: float


def birkhoff_sum(psi: LocallyConstantPotential, word, n: int | None = None) -> float:
    """Sum of psi over the first n windows of a word.

    The word must carry psi.depth - 1 symbols beyond position n - 1 so
    that every window is determined.
    """
    symbols = _as_symbols(word)
    if n is None:
        n = len(symbols) - psi.depth + 1
    if n < 1 or len(symbols) < n + psi.depth - 1:
        raise ValueError("word too short for the requested Birkhoff sum")
    return float(sum(psi(symbols[j: j + psi.depth]) for j in range(n)))


def moran_cover(sft: Sft, psi: LocallyConstantPotential, r: float) -> CylinderCover:
    """Partition into cylinders whose Birkhoff sums first drop below log r.

    Walking the legal words of the SFT, a branch is cut at the smallest n
    with S_n psi < log r; emitted cylinders carry n as weight and satisfy
    the sandwich log r - C0 <= S_n psi < log r with C0 = max |psi|.
    Cylinders of a depth-k potential carry k - 1 trailing symbols so the
    last window is determined.
    """
    if not (0.0 < r < 1.0):
        raise ValueError("Moran parameter r must lie in (0, 1)")
    if psi.max_value() >= 0:
        raise ValueError("Moran cover requires a blockwise negative potential")
    if sft.is_empty:
        return CylinderCover((), r)
    log_r = math.log(r)
    depth = psi.depth
    successors = sft.successors()
    block = sft.block_depth
    index = sft.state_index()

    def next_symbols(word: tuple[int, ...], state: int | None) -> list[tuple[int, int | None]]:
        """Legal one-symbol extensions as (symbol, new_state) pairs."""
        if state is not None:
            return [(sft.states[j].symbols[-1], j) for j in successors[state]]
        options = []
        prefixes = {s.symbols[: len(word) + 1] for s in sft.states}
        for candidate in sorted(prefixes):
            if candidate[:-1] == word:
                new_state = None
                if len(candidate) == block:
                    new_state = index[Word(candidate)]
                options.append((candidate[-1], new_state))
        return options

    cylinders: list[tuple[Word, int]] = []
    stack: list[tuple[tuple[int, ...], int | None, float]] = [((), None, 0.0)]
    while stack:
        word, state, partial = stack.pop()
        if len(word) >= depth:
            n = len(word) - depth + 1
            window_sum = partial + psi(word[n - 1: n - 1 + depth])
            if window_sum < log_r:
                cylinders.append((Word(word), n))
                continue
            partial = window_sum
        for symbol, new_state in next_symbols(word, state):
            stack.append((word + (symbol,), new_state, partial))
        if len(cylinders) + len(stack) > MAX_COVER_SIZE:
            raise ValueError("Moran cover too large; increase r")
    cylinders.sort(key=lambda item: item[0])
    return CylinderCover(tuple(cylinders), r)


def _forced_runs(sft: Sft) -> list[float]:
    """Extra escape time per final state.

    After reading a word the next symbol is forced while the current
    state has a single successor; the cover weight of the cylinder grows
    by that run.  A run that never branches is reported as inf.
    """
    successors = sft.successors()
    runs: list[float] = []
    for start in range(len(sft.states)):
        state = start
        run = 0
        seen = set()
        while len(successors[state]) == 1:
            if state in seen:
                run = math.inf
                break
            seen.add(state)
            state = successors[state][0]
            run += 1
        runs.append(float(run))
    return runs


def _depth_counts(sft: Sft, depth: int, start: Word | None) -> list[int]:
    """Number of legal depth-``depth`` words per final state."""
    successors = sft.successors()
    n_states = len(sft.states)
    if start is None:
        counts = [1] * n_states
    else:
        index = sft.state_index()
        if start not in index:
            raise ValueError(f"start block {start} is not a state of the SFT")
        counts = [0] * n_states
        counts[index[start]] = 1
    for _ in range(depth):
        fresh = [0] * n_states
        for i, succ in enumerate(successors):
            c = counts[i]
            if c:
                for j in succ:
                    fresh[j] += c
        counts = fresh
    return counts


def _cover_sum(counts: list[int], runs: list[float], depth: int, block: int, d: float) -> float:
    total = 0.0
    for state, count in enumerate(counts):
        if count and math.isfinite(runs[state]):
            total += count * math.exp(-d * (depth + block + runs[state]))
    return total


def _critical_exponent(counts: list[int], runs: list[float], depth: int, block: int) -> float:
    """Solve sum_U exp(-d n(U)) = 1 for d by bisection."""
    at_zero = _cover_sum(counts, runs, depth, block, 0.0)
    if at_zero <= 1.0:
        return 0.0
    lo, hi = 0.0, math.log(at_zero) / (depth + block) + 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _cover_sum(counts, runs, depth, block, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _resolve_sft(target: SurvivorSet | Sft) -> Sft:
    return target.sft if isinstance(target, SurvivorSet) else target


def bowen_entropy_estimate(
    target: SurvivorSet | Sft,
    depths: tuple[int, ...] = BOWEN_DEPTHS,
    start: Word | None = None,
) -> float:
    """Critical exponent of refining cylinder cover sums.

    At cover depth n each legal n-word is weighted by its escape time
    (n plus the deterministic forced run of its final state) and the
    exponent where the sum crosses 1 is reported at the deepest cover.
    With ``start`` the count is restricted to words continuing a given
    block, which realizes the estimate on a single unstable fiber.
    Returns -inf for the empty survivor.
    """
    sft = _resolve_sft(target)
    if sft.is_empty:
        return EMPTY_ENTROPY
    runs = _forced_runs(sft)
    block = sft.block_depth
    estimate = 0.0
    for depth in sorted(depths):
        steps = max(depth - block, 0)
        counts = _depth_counts(sft, steps, start)
        estimate = _critical_exponent(counts, runs, steps, block)
    return estimate


def bowen_measure_class(
    target: SurvivorSet | Sft,
    d: float,
    depths: tuple[int, ...] = BOWEN_DEPTHS,
    slope_tolerance: float = 0.02,
) -> str:
    """Classify the d-weighted cover sums as 'zero', 'infinite' or 'finite'.

    Fits the log cover sum against depth: a positive slope means the sums
    diverge (measure infinite, d below the entropy), a negative slope
    means they vanish.  Returns 'empty' for the empty survivor.
    """
    sft = _resolve_sft(target)
    if sft.is_empty:
        return "empty"
    runs = _forced_runs(sft)
    block = sft.block_depth
    points = []
    for depth in depths:
        m = _cover_sum(_depth_counts(sft, max(depth - block, 0), None), runs,
                       max(depth - block, 0), block, d)
        if m > 0.0:
            points.append((depth, math.log(m)))
    if len(points) < 2:
        return "zero"
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    slope = float(np.polyfit(xs, ys, 1)[0])
    if slope > slope_tolerance:
        return "infinite"
    if slope < -slope_tolerance:
        return "zero"
    return "finite"


@dataclass(frozen=True)
class PointCloud:
    """A finite sample of points in the unit square or interval."""

    points: np.ndarray
    model: str = ""
    depth: int = 0
    seed: int | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        if pts.size and (pts.min() < -1e-9 or pts.max() > 1.0 + 1e-9):
            raise ValueError("coordinates must lie in the unit cube")
        if pts.ndim != 2 or pts.shape[1] not in (1, 2):
            raise ValueError("points must be an (n, 1) or (n, 2) array")

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class DimEstimate:
    """Box-counting dimension with regression diagnostics."""

    value: float
    stderr: float
    scales_used: tuple[float, ...]
    residual: float


def _box_count(points: np.ndarray, delta: float) -> int:
    # the nudge keeps grid-aligned points (Cantor endpoints, lattice
    # samples) in their own box despite representation error
    idx = np.floor(points / delta + 1e-9).astype(np.int64)
    idx = np.minimum(idx, int(math.ceil(1.0 / delta)) - 1)
    if points.shape[1] == 1:
        return int(np.unique(idx[:, 0]).size)
    keys = idx[:, 0] * (2**31) + idx[:, 1]
    return int(np.unique(keys).size)


def box_dimension(points: PointCloud, scales: list[float]) -> DimEstimate:
    """Least-squares box-counting slope over the given scales.

    Scales must be at least four, strictly decreasing, inside (0, 1).
    The value is clipped into [0, 2]; the standard error and RMS
    residual come from the ordinary regression over all provided scales
    (no auto-selection, for auditability).
    """
    scales = [float(s) for s in scales]
    if len(scales) < 4:
        raise ValueError("need at least 4 scales")
    if any(not (0.0 < s < 1.0) for s in scales):
        raise ValueError("scales must lie in (0, 1)")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly decreasing")
    if points.count == 0:
        raise ValueError("empty point cloud")
    counts = np.array([_box_count(points.points, s) for s in scales], dtype=float)
    if np.all(counts == counts[0]):
        raise ValueError("degenerate regression: box counts are constant")
    x = np.log(1.0 / np.array(scales))
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    resid = y - fitted
    dof = max(len(scales) - 2, 1)
    sigma2 = float(resid @ resid) / dof
    sxx = float(((x - x.mean()) ** 2).sum())
    stderr = math.sqrt(sigma2 / sxx)
    value = min(max(float(slope), 0.0), 2.0)
    return DimEstimate(
        value=value,
        stderr=stderr,
        scales_used=tuple(scales),
        residual=math.sqrt(float(resid @ resid) / len(scales)),
    )


def marstrand_bound(b1: float, fiber_dims: list[float]) -> float:
    """Product slicing bound: base dimension plus uniform fiber dimension.

    If a set meets every fiber over a base of dimension at least b1 in a
    set of dimension at least min(fiber_dims), its dimension is at least
    the sum.
    """
    if b1 < 0:
        raise ValueError("base dimension must be nonnegative")
    dims = list(fiber_dims)
    if not dims:
        raise ValueError("need at least one fiber dimension")
    return float(b1 + min(dims))


def save_pointcloud(cloud: PointCloud, path: str) -> None:
    """CSV export: metadata comment, header, one point per line."""
    header = ["x"] if cloud.ambient_dim == 1 else ["x", "y"]
    lines = [
        f"# model={cloud.model} depth={cloud.depth} seed={cloud.seed} count={cloud.count}",
        ",".join(header),
    ]
    for row in cloud.points:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_pointcloud(path: str) -> PointCloud:
    model, depth, seed = "", 0, None
    rows = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" not in token:
                        continue
                    key, value = token.split("=", 1)
                    if key == "model":
                        model = value
                    elif key == "depth":
                        depth = int(value)
                    elif key == "seed" and value != "None":
                        seed = int(value)
                continue
            if line[0].isalpha():
                continue
            rows.append([float(part) for part in line.split(",")])
    return PointCloud(np.array(rows), model=model, depth=depth, seed=seed)
