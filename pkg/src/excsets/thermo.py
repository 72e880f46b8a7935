"""Topological pressure, Bowen-equation roots, and measure functionals.

Potentials are locally constant: a depth-k potential assigns one value
(nats per step) to each legal k-block.  For such potentials the pressure
of an SFT is exactly the log spectral radius of the transition structure
weighted by exp(potential), which keeps every downstream dimension
computation free of statistical error.  Dimensions of stable/unstable
slices come from the Bowen equation P(d * phi) = 0, and Young's formula
h * (1/chi_u - 1/chi_s) converts a measure's entropy and Lyapunov
exponents into its dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .spectral import spectral_radius
from .symbolic import Sft, Word, _as_symbols, refine_sft

__all__ = [
    "LocallyConstantPotential",
    "MarkovMeasure",
    "HyperbolicSpectrum",
    "pressure",
    "bowen_root",
    "markov_measure",
    "bernoulli_measure",
    "parry_measure",
    "measure_entropy",
    "lyapunov",
    "cylinder_probability",
    "young_dimension",
    "dynamical_dimension",
]


@dataclass(frozen=True)
class LocallyConstantPotential:
    """A potential constant on cylinders of a fixed depth."""

    depth: int
    values: Mapping[Word, float]

    def __post_init__(self):
        converted = {}
        for key, value in dict(self.values).items():
            word = key if isinstance(key, Word) else Word(_as_symbols(key))
            value = float(value)
            if len(word) != self.depth:
                raise ValueError(f"block {word} does not have depth {self.depth}")
            if not math.isfinite(value):
                raise ValueError("potential values must be finite")
            converted[word] = value
        object.__setattr__(self, "values", converted)
        if self.depth < 1:
            raise ValueError("potential depth must be at least 1")
        if not converted:
            raise ValueError("potential needs at least one block value")

    @classmethod
    def constant(cls, value: float, alphabet_size: int) -> "LocallyConstantPotential":
        return cls(1, {Word((a,)): value for a in range(alphabet_size)})

    @classmethod
    def from_symbol_values(cls, values: Sequence[float]) -> "LocallyConstantPotential":
        """Depth-1 potential from per-symbol values (index = symbol)."""
        return cls(1, {Word((a,)): v for a, v in enumerate(values)})

    def __call__(self, block) -> float:
        word = block if isinstance(block, Word) else Word(_as_symbols(block))
        try:
            return self.values[word]
        except KeyError:
            raise KeyError(f"potential has no value for block {word}") from None

    def scale(self, factor: float) -> "LocallyConstantPotential":
        return LocallyConstantPotential(
            self.depth, {w: factor * v for w, v in self.values.items()}
        )

    def min_value(self) -> float:
        return min(self.values.values())

    def max_value(self) -> float:
        return max(self.values.values())

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "values": {str(w): v for w, v in sorted(self.values.items())},
        }

    @classmethod
    def from_dict(cls, record: dict) -> "LocallyConstantPotential":
        return cls(
            int(record["depth"]),
            {Word.from_string(k): float(v) for k, v in record["values"].items()},
        )


def _aligned(sft: Sft, phi: LocallyConstantPotential) -> Sft:
    """Re-block the SFT so the potential is readable on edges."""
    if phi.depth > sft.block_depth + 1:
        return refine_sft(sft, phi.depth - 1)
    return sft


def _weighted_matrix(sft: Sft, phi: LocallyConstantPotential) -> tuple[Sft, sp.csr_matrix]:
    sft = _aligned(sft, phi)
    n = len(sft.states)
    rows, cols, data = [], [], []
    for i, j in sft.edges:
        edge_word = sft.states[i].symbols + (sft.states[j].symbols[-1],)
        weight = math.exp(phi(edge_word[: phi.depth]))
        rows.append(i)
        cols.append(j)
        data.append(weight)
    return sft, sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def pressure(sft: Sft, phi: LocallyConstantPotential, rtol: float = 1e-12) -> float:
    """Topological pressure: log spectral radius of the weighted structure.

    Exact for locally constant potentials (no Birkhoff sampling); the SFT
    is re-blocked automatically when the potential is deeper than the
    presentation.
    """
    if sft.is_empty:
        raise ValueError("pressure of the empty SFT is undefined")
    _, weighted = _weighted_matrix(sft, phi)
    rho = spectral_radius(weighted, rtol=rtol)
    if rho == 0.0:
        raise ValueError("transition structure has no cycles")
    return math.log(rho)


def bowen_root(sft: Sft, phi: LocallyConstantPotential, tol: float = 1e-10) -> float:
    """The unique d >= 0 with P(d * phi) = 0 for blockwise negative phi.

    d -> P(d * phi) is strictly decreasing, so the root is bracketed on
    [0, P(0)/min|phi| + 1] and found by bisection with a final Newton
    polish (finite-difference derivative).
    """
    if phi.max_value() >= 0:
        raise ValueError("Bowen root requires negative potential")
    p0 = pressure(sft, phi.scale(0.0))
    if p0 < -1e-12:
        raise ValueError("P(0) must be nonnegative")
    if p0 <= tol:
        return 0.0
    lo, hi = 0.0, p0 / (-phi.max_value()) + 1.0

    def value(d: float) -> float:
        return pressure(sft, phi.scale(d))

    f_lo = p0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        f_mid = value(mid)
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    root = 0.5 * (lo + hi)
    # one Newton step sharpens the bisection result
    h = 1e-7
    f_root = value(root)
    slope = (value(root + h) - value(root - h)) / (2.0 * h)
    if slope < 0.0:
        candidate = root - f_root / slope
        if lo - 1e-9 <= candidate <= hi + 1e-9:
            candidate = min(max(candidate, 0.0), hi)
            if abs(value(candidate)) <= abs(f_root):
                root = candidate
    if abs(value(root)) > tol:
        raise ValueError(f"Bowen root did not reach tolerance {tol}")
    return root


def _stationary_gth(rows: np.ndarray) -> np.ndarray:
    """Stationary vector of an irreducible stochastic matrix (GTH).

    State-reduction form of Gaussian elimination; no subtractions of
    like-signed quantities, so it is stable even for stiff chains.
    """
    p = np.array(rows, dtype=float)
    n = p.shape[0]
    for k in range(n - 1, 0, -1):
        denom = p[k, :k].sum()
        if denom <= 0.0:
            raise ValueError("transition matrix is not irreducible")
        p[:k, k] /= denom
        for i in range(k):
            p[:k, i] += p[:k, k] * p[k, i]
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ p[:k, k]
    return pi / pi.sum()


@dataclass(frozen=True)
class MarkovMeasure:
    """A shift-invariant Markov measure supported on an SFT.

    ``rows`` is row-stochastic with support inside the adjacency
    structure; ``stationary`` is the fixed left probability vector.
    """

    sft: Sft
    rows: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        pi = np.array(self.stationary, dtype=float)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "stationary", pi)
        n = len(self.sft.states)
        if rows.shape != (n, n):
            raise ValueError("transition rows must be square over the SFT states")
        if np.any(rows < -1e-15):
            raise ValueError("transition probabilities must be nonnegative")
        if np.max(np.abs(rows.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("rows must sum to 1 within 1e-12")
        allowed = np.zeros((n, n), dtype=bool)
        for i, j in self.sft.edges:
            allowed[i, j] = True
        if np.any((rows > 1e-15) & ~allowed):
            raise ValueError("support must respect the SFT transitions")
        if np.any(pi < -1e-12) or abs(pi.sum() - 1.0) > 1e-9:
            raise ValueError("stationary vector must be a probability vector")
        if np.max(np.abs(pi @ rows - pi)) > 1e-9:
            raise ValueError("stationary vector is not fixed by the rows")


def markov_measure(sft: Sft, rows: np.ndarray) -> MarkovMeasure:
    """Build a MarkovMeasure from stochastic rows, solving for pi."""
    rows = np.array(rows, dtype=float)
    pi = _stationary_gth(rows)
    return MarkovMeasure(sft, rows, pi)


def bernoulli_measure(sft: Sft, probabilities: Sequence[float]) -> MarkovMeasure:
    """Bernoulli measure on a full shift (identical rows)."""
    p = np.array(probabilities, dtype=float)
    n = len(sft.states)
    if len(p) != n:
        raise ValueError("need one probability per state")
    rows = np.tile(p, (n, 1))
    return MarkovMeasure(sft, rows, p.copy())


def parry_measure(sft: Sft) -> MarkovMeasure:
    """The measure of maximal entropy of an irreducible SFT.

    p_ij = A_ij v_j / (rho v_i) with v the right Perron vector; the
    stationary vector is u_i v_i normalized, with u the left one.
    """
    adjacency = sft.adjacency()
    rho = spectral_radius(adjacency)
    n = len(sft.states)
    right = _perron_vector(adjacency, rho)
    left = _perron_vector(adjacency.T.tocsr(), rho)
    rows = np.zeros((n, n))
    dense = adjacency.toarray()
    for i in range(n):
        rows[i] = dense[i] * right / (rho * right[i])
    rows /= rows.sum(axis=1, keepdims=True)
    pi = left * right
    pi /= pi.sum()
    return MarkovMeasure(sft, rows, pi)


def _perron_vector(matrix: sp.csr_matrix, rho: float, iterations: int = 200000) -> np.ndarray:
    n = matrix.shape[0]
    shift = float(np.asarray(matrix.sum(axis=1)).ravel().max())
    x = np.full(n, 1.0 / n)
    for _ in range(iterations):
        y = matrix @ x + shift * x
        y /= y.sum()
        if np.max(np.abs(y - x)) <= 1e-15:
            return y
        x = y
    return x


def measure_entropy(mu: MarkovMeasure) -> float:
    """Shannon entropy rate -sum_i pi_i sum_j p_ij log p_ij (nats)."""
    rows = mu.rows
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(rows > 0.0, rows * np.log(np.where(rows > 0.0, rows, 1.0)), 0.0)
    return float(-(mu.stationary @ plogp.sum(axis=1)))


def cylinder_probability(mu: MarkovMeasure, block) -> float:
    """Measure of the cylinder over a word of any length.

    Words shorter than the block depth sum the stationary vector over
    matching states; longer words multiply transition probabilities
    along the unique state path.
    """
    symbols = _as_symbols(block)
    depth = mu.sft.block_depth
    index = mu.sft.state_index()
    if len(symbols) <= depth:
        total = 0.0
        for i, state in enumerate(mu.sft.states):
            if state.symbols[: len(symbols)] == symbols:
                total += mu.stationary[i]
        return float(total)
    first = index.get(Word(symbols[:depth]))
    if first is None:
        return 0.0
    prob = mu.stationary[first]
    current = first
    for t in range(len(symbols) - depth):
        nxt = index.get(Word(symbols[t + 1: t + 1 + depth]))
        if nxt is None:
            return 0.0
        prob *= mu.rows[current, nxt]
        current = nxt
    return float(prob)


def lyapunov(mu: MarkovMeasure, phi: LocallyConstantPotential) -> float:
    """The integral of a locally constant potential against the measure.

    With the convention phi_u = -log|expansion| the caller negates the
    result to obtain the positive unstable exponent.
    """
    total = 0.0
    for block, value in phi.values.items():
        total += cylinder_probability(mu, block) * value
    return float(total)


@dataclass(frozen=True)
class HyperbolicSpectrum:
    """Entropy and Lyapunov exponents of a hyperbolic measure."""

    chi_s: float
    chi_u: float
    entropy: float

    def __post_init__(self):
        if not (self.chi_s < 0.0 < self.chi_u):
            raise ValueError("need chi_s < 0 < chi_u")
        if self.entropy < 0.0:
            raise ValueError("entropy must be nonnegative")
        if self.entropy > self.chi_u + 1e-9:
            raise ValueError("entropy exceeds the unstable exponent (Ruelle)")


def young_dimension(spectrum: HyperbolicSpectrum) -> float:
    """Dimension of a hyperbolic measure: h * (1/chi_u - 1/chi_s)."""
    return spectrum.entropy * (1.0 / spectrum.chi_u - 1.0 / spectrum.chi_s)


def _measure_spectrum(mu: MarkovMeasure, phi_s: LocallyConstantPotential,
                      phi_u: LocallyConstantPotential) -> HyperbolicSpectrum:
    return HyperbolicSpectrum(
        chi_s=lyapunov(mu, phi_s),
        chi_u=-lyapunov(mu, phi_u),
        entropy=measure_entropy(mu),
    )


def _project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _rows_from_params(params: list[np.ndarray], support: list[list[int]], n: int) -> np.ndarray:
    rows = np.zeros((n, n))
    for i, succ in enumerate(support):
        rows[i, succ] = params[i]
    return rows


def dynamical_dimension(
    sft: Sft,
    phi_s: LocallyConstantPotential,
    phi_u: LocallyConstantPotential,
    memory: int = 1,
    restarts: int = 20,
    seed: int = 0,
    tol: float = 1e-8,
) -> tuple[float, MarkovMeasure]:
    """Best Young dimension over Markov measures of bounded memory.

    Projected-gradient ascent on the transition rows with seeded random
    restarts.  Markov measures of finite memory are weak-* dense among
    ergodic measures on an SFT, but a finite memory search only certifies
    a lower bound for the true supremum; the returned measure attains the
    returned value.
    """
    if phi_s.max_value() >= 0 or phi_u.max_value() >= 0:
        raise ValueError("potentials must be blockwise negative")
    working = refine_sft(sft, sft.block_depth + memory - 1) if memory > 1 else sft
    n = len(working.states)
    support = working.successors()
    if any(len(s) == 0 for s in support):
        raise ValueError("SFT must be essential")

    def objective(params: list[np.ndarray]) -> float:
        rows = _rows_from_params(params, support, n)
        try:
            mu = markov_measure(working, rows)
            spectrum = _measure_spectrum(mu, phi_s, phi_u)
        except ValueError:
            # reducible rows or a spectrum failing validation: not a
            # candidate, not an error
            return -math.inf
        return young_dimension(spectrum)

    seeds = np.random.SeedSequence(seed).spawn(restarts)
    best_value = -math.inf
    best_params: list[np.ndarray] | None = None
    floor = 1e-9
    fd_step = 1e-6
    for restart_seed in seeds:
        rng = np.random.default_rng(restart_seed)
        params = [
            np.maximum(_project_to_simplex(rng.random(len(succ)) + 0.5), floor)
            for succ in support
        ]
        params = [p / p.sum() for p in params]
        current = objective(params)
        step = 0.25
        for _ in range(400):
            grads = []
            for i, p in enumerate(params):
                grad = np.zeros(len(p))
                for k in range(len(p)):
                    bumped = [q.copy() for q in params]
                    bumped[i][k] += fd_step
                    bumped[i] /= bumped[i].sum()
                    grad[k] = (objective(bumped) - current) / fd_step
                grad -= grad.mean()
                grads.append(grad)
            gain = 0.0
            improved = False
            while step > 1e-10:
                trial = [
                    np.maximum(_project_to_simplex(p + step * g), floor)
                    for p, g in zip(params, grads)
                ]
                trial = [p / p.sum() for p in trial]
                trial_value = objective(trial)
                if trial_value > current:
                    gain = trial_value - current
                    params, current = trial, trial_value
                    improved = True
                    step = min(step * 2.0, 1.0)
                    break
                step *= 0.5
            if not improved or gain <= tol:
                break
        value = current
        if value > best_value + 1e-12:
            best_value, best_params = value, params
        elif best_params is not None and abs(value - best_value) <= 1e-12:
            # deterministic tie-break: lexicographically smallest rows
            flat_new = np.concatenate(params)
            flat_old = np.concatenate(best_params)
            if tuple(flat_new) < tuple(flat_old):
                best_params = params
    assert best_params is not None
    rows = _rows_from_params(best_params, support, n)
    mu = markov_measure(working, rows)
    return best_value, mu
