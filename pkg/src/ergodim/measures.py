"""Measure oracles: exact cylinder measures and seeded samplers.

An oracle answers two kinds of question: "what is the measure of this
cylinder?" (exactly, for symbolic oracles) and "give me a typical point"
(seeded, reproducible).  Sampling uses a counter-based scheme: the generator
for sample point ``i`` is seeded from ``(master_seed, i)``, so serial and
parallel draws produce byte-identical streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AtomBudgetExceeded,
    IncompatibleOracle,
    LengthMismatch,
    UnsupportedOracle,
    ZeroMassAtom,
)
from .systems import (
    FullShift,
    ProductPoint,
    ProductSystem,
    SymbolicPoint,
    SystemDescriptor,
    ToralAutomorphism,
    TorusPoint,
    TorusTranslation,
)

__all__ = [
    "MeasureOracle",
    "LebesgueTorus",
    "BernoulliIID",
    "MarkovStationary",
    "ProductMeasure",
    "ConditionalShiftOracle",
    "stationary_distribution",
    "entropy_rate",
    "marginal_entropy",
    "rng_for",
    "sample_point",
    "sample_points",
    "cylinder_measure",
    "fixed_coords_measure",
    "word_distribution",
    "sample_symbol_block",
    "ATOM_BUDGET",
]

# Hard cap on exact enumerations: number of joint atoms a computation may touch.
ATOM_BUDGET = 1 << 24


def rng_for(master_seed: int, *tags: int) -> np.random.Generator:
    """Deterministic child generator for (master_seed, tag, tag, ...)."""
    entropy = [int(master_seed)] + [int(t) for t in tags]
    if any(e < 0 for e in entropy):
        raise ValueError("seeds and tags must be nonnegative integers")
    return np.random.default_rng(entropy)


class MeasureOracle:
    """Marker base class for measure oracles."""


@dataclass(frozen=True)
class LebesgueTorus(MeasureOracle):
    """Normalized Lebesgue measure on the 2-torus."""


@dataclass(frozen=True, eq=False)
class BernoulliIID(MeasureOracle):
    """Product measure on the full shift with iid symbol distribution ``probs``."""

    probs: tuple = (0.5, 0.5)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 2 or np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probs must be a distribution over >= 2 symbols")

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    @property
    def alphabet_size(self) -> int:
        return len(self.probs)


@dataclass(frozen=True, eq=False)
class MarkovStationary(MeasureOracle):
    """Stationary two-sided Markov measure with transition matrix ``transitions``.

    The stationary vector is computed from the transition matrix unless given,
    and stationarity pi P = pi is validated to 1e-12 either way.
    """

    transitions: tuple = ((0.9, 0.1), (0.5, 0.5))
    pi: tuple | None = None

    def __post_init__(self):
        P = np.asarray(self.transitions, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise ValueError("transitions must be a square matrix of size >= 2")
        if np.any(P < 0.0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("transition rows must be distributions")
        pi = stationary_distribution(P) if self.pi is None else np.asarray(self.pi, dtype=float)
        if np.max(np.abs(pi @ P - pi)) > 1e-12:
            raise ValueError("pi is not stationary for the transition matrix")
        object.__setattr__(self, "pi", tuple(float(v) for v in pi))

    @property
    def P(self) -> np.ndarray:
        return np.asarray(self.transitions, dtype=float)

    @property
    def pi_vec(self) -> np.ndarray:
        return np.asarray(self.pi, dtype=float)

    @property
    def alphabet_size(self) -> int:
        return len(self.transitions)

    def backward(self) -> np.ndarray:
        """Backward transition kernel B[j, i] = pi_i P_ij / pi_j (rows for pi_j > 0)."""
        P = self.P
        pi = self.pi_vec
        B = np.zeros_like(P)
        for j in range(P.shape[0]):
            if pi[j] > 0.0:
                B[j, :] = pi * P[:, j] / pi[j]
        return B

    def power(self, d: int) -> np.ndarray:
        return np.linalg.matrix_power(self.P, int(d))


@dataclass(frozen=True, eq=False)
class ProductMeasure(MeasureOracle):
    left: MeasureOracle
    right: MeasureOracle


@dataclass(frozen=True, eq=False)
class ConditionalShiftOracle(MeasureOracle):
    """A shift oracle conditioned on fixing a contiguous block of coordinates.

    ``fixed`` maps coordinate index -> symbol over a contiguous index block.
    Measures are ratios mu(fixed and query) / mu(fixed) of the base oracle.
    """

    base: MeasureOracle
    fixed: dict

    def __post_init__(self):
        idx = sorted(self.fixed)
        if not idx:
            raise ValueError("fixed block must be nonempty")
        if idx != list(range(idx[0], idx[-1] + 1)):
            raise ValueError("fixed coordinates must form a contiguous block")
        base_mass = fixed_coords_measure(self.base, idx, [self.fixed[i] for i in idx])
        if base_mass <= 0.0:
            raise ZeroMassAtom("conditioning block has measure zero")
        object.__setattr__(self, "_block_mass", base_mass)

    @property
    def alphabet_size(self) -> int:
        return self.base.alphabet_size

    @property
    def block(self) -> tuple[int, int]:
        idx = sorted(self.fixed)
        return idx[0], idx[-1]


def stationary_distribution(P: np.ndarray) -> np.ndarray:
    """Stationary row vector of a stochastic matrix via the unit left eigenvector."""
    vals, vecs = np.linalg.eig(np.asarray(P, dtype=float).T)
    i = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, i])
    v = np.abs(v)
    return v / v.sum()


def entropy_rate(oracle: MeasureOracle) -> float:
    """Closed-form entropy rate (nats per step) of a symbolic oracle."""
    if isinstance(oracle, BernoulliIID):
        p = oracle.p
        return float(-np.sum(p[p > 0.0] * np.log(p[p > 0.0])))
    if isinstance(oracle, MarkovStationary):
        P = oracle.P
        pi = oracle.pi_vec
        mask = P > 0.0
        terms = np.where(mask, P * np.log(np.where(mask, P, 1.0)), 0.0)
        return float(-(pi[:, None] * terms).sum())
    if isinstance(oracle, ConditionalShiftOracle):
        return entropy_rate(oracle.base)
    raise UnsupportedOracle(f"no closed-form entropy rate for {type(oracle).__name__}")


def marginal_entropy(oracle: MeasureOracle) -> float:
    """Entropy of the single-coordinate marginal."""
    if isinstance(oracle, BernoulliIID):
        return entropy_rate(oracle)
    if isinstance(oracle, MarkovStationary):
        pi = oracle.pi_vec
        pos = pi[pi > 0.0]
        return float(-np.sum(pos * np.log(pos)))
    raise UnsupportedOracle(f"no marginal entropy for {type(oracle).__name__}")


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _sample_categorical(rng, cumulative: np.ndarray) -> int:
    return int(np.searchsorted(cumulative, rng.random(), side="right"))


def _sample_markov_window(oracle: MarkovStationary, window: int, rng) -> np.ndarray:
    """Window -N..N of a stationary two-sided chain: forward from 0, backward kernel below."""
    n = 2 * window + 1
    out = np.empty(n, dtype=np.int8)
    P = oracle.P
    cum_f = np.cumsum(P, axis=1)
    cum_b = np.cumsum(oracle.backward(), axis=1)
    cum_pi = np.cumsum(oracle.pi_vec)
    mid = window  # array position of coordinate 0
    out[mid] = _sample_categorical(rng, cum_pi)
    for j in range(mid + 1, n):
        out[j] = _sample_categorical(rng, cum_f[out[j - 1]])
    for j in range(mid - 1, -1, -1):
        out[j] = _sample_categorical(rng, cum_b[out[j + 1]])
    return out


def _sample_shift_window(sys: FullShift, oracle: MeasureOracle, rng) -> np.ndarray:
    N = sys.window
    if isinstance(oracle, BernoulliIID):
        if oracle.alphabet_size != sys.alphabet_size:
            raise IncompatibleOracle("oracle alphabet does not match system alphabet")
        return rng.choice(oracle.alphabet_size, size=2 * N + 1, p=oracle.p).astype(np.int8)
    if isinstance(oracle, MarkovStationary):
        if oracle.alphabet_size != sys.alphabet_size:
            raise IncompatibleOracle("oracle alphabet does not match system alphabet")
        return _sample_markov_window(oracle, N, rng)
    if isinstance(oracle, ConditionalShiftOracle):
        return _sample_conditional_window(sys, oracle, rng)
    raise IncompatibleOracle(f"{type(oracle).__name__} cannot sample a full shift")


def _sample_conditional_window(sys: FullShift, oracle: ConditionalShiftOracle, rng) -> np.ndarray:
    N = sys.window
    lo_f, hi_f = oracle.block
    if lo_f < -N or hi_f > N:
        raise IncompatibleOracle("conditioning block exceeds the system window")
    base = oracle.base
    out = np.empty(2 * N + 1, dtype=np.int8)
    if isinstance(base, BernoulliIID):
        out[:] = rng.choice(base.alphabet_size, size=2 * N + 1, p=base.p).astype(np.int8)
    elif isinstance(base, MarkovStationary):
        cum_f = np.cumsum(base.P, axis=1)
        cum_b = np.cumsum(base.backward(), axis=1)
        # seed the fixed block, then run the chain outward from its two ends
        for i in range(lo_f, hi_f + 1):
            out[i + N] = oracle.fixed[i]
        for i in range(hi_f + 1, N + 1):
            out[i + N] = _sample_categorical(rng, cum_f[out[i - 1 + N]])
        for i in range(lo_f - 1, -N - 1, -1):
            out[i + N] = _sample_categorical(rng, cum_b[out[i + 1 + N]])
        return out
    else:
        raise IncompatibleOracle(f"cannot sample conditional of {type(base).__name__}")
    for i in range(lo_f, hi_f + 1):
        out[i + N] = oracle.fixed[i]
    return out


def sample_point(sys: SystemDescriptor, oracle: MeasureOracle, master_seed: int, point_index: int = 0):
    """A typical point of the system, seeded per (master_seed, point_index)."""
    rng = rng_for(master_seed, point_index)
    if isinstance(sys, (ToralAutomorphism, TorusTranslation)):
        if not isinstance(oracle, LebesgueTorus):
            raise IncompatibleOracle(f"{type(oracle).__name__} cannot sample the torus")
        xy = rng.random(2)
        return TorusPoint(float(xy[0]), float(xy[1]))
    if isinstance(sys, FullShift):
        return SymbolicPoint(_sample_shift_window(sys, oracle, rng), -sys.window)
    if isinstance(sys, ProductSystem):
        if not isinstance(oracle, ProductMeasure):
            raise IncompatibleOracle("product system needs a product measure")
        # split deterministically: factor tag 0 / 1 appended to the counter
        left = sample_point(sys.left, oracle.left, master_seed, 2 * point_index)
        right = sample_point(sys.right, oracle.right, master_seed, 2 * point_index + 1)
        return ProductPoint(left, right)
    raise IncompatibleOracle(f"unknown system kind {type(sys).__name__}")


def sample_points(sys, oracle, master_seed: int, count: int, start_index: int = 0) -> list:
    return [sample_point(sys, oracle, master_seed, start_index + i) for i in range(count)]


# ---------------------------------------------------------------------------
# exact cylinder measures
# ---------------------------------------------------------------------------


def cylinder_measure(oracle: MeasureOracle, word, start: int = 0) -> float:
    """Measure of the cylinder fixing ``word`` at consecutive coordinates from ``start``.

    Stationary oracles give the same answer for every ``start``.
    """
    w = list(int(s) for s in word)
    if not w:
        return 1.0
    return fixed_coords_measure(oracle, list(range(start, start + len(w))), w)


def fixed_coords_measure(oracle: MeasureOracle, indices, symbols) -> float:
    """Measure of {x : x_i = s_i for each fixed coordinate}, for sorted indices."""
    idx = [int(i) for i in indices]
    syms = [int(s) for s in symbols]
    if len(idx) != len(syms):
        raise LengthMismatch(f"{len(idx)} indices vs {len(syms)} symbols")
    if not idx:
        return 1.0
    order = sorted(range(len(idx)), key=lambda j: idx[j])
    idx = [idx[j] for j in order]
    syms = [syms[j] for j in order]
    for a, b, sa, sb in zip(idx, idx[1:], syms, syms[1:]):
        if a == b:
            if sa != sb:
                return 0.0
    # drop duplicate (consistent) constraints
    dedup = [(i, s) for j, (i, s) in enumerate(zip(idx, syms)) if j == 0 or i != idx[j - 1]]
    idx = [i for i, _ in dedup]
    syms = [s for _, s in dedup]

    if isinstance(oracle, BernoulliIID):
        p = oracle.p
        if max(syms) >= p.size or min(syms) < 0:
            raise ValueError("symbol outside the oracle alphabet")
        return float(np.prod(p[syms]))
    if isinstance(oracle, MarkovStationary):
        a = oracle.alphabet_size
        if max(syms) >= a or min(syms) < 0:
            raise ValueError("symbol outside the oracle alphabet")
        m = oracle.pi_vec[syms[0]]
        for j in range(len(idx) - 1):
            gap = idx[j + 1] - idx[j]
            m *= oracle.power(gap)[syms[j], syms[j + 1]]
        return float(m)
    if isinstance(oracle, ConditionalShiftOracle):
        f_idx = sorted(oracle.fixed)
        f_syms = [oracle.fixed[i] for i in f_idx]
        joint = fixed_coords_measure(oracle.base, f_idx + idx, f_syms + syms)
        return joint / oracle._block_mass
    raise UnsupportedOracle(f"{type(oracle).__name__} has no exact cylinder measures")


def fixed_coords_log_measure(oracle: MeasureOracle, indices, symbols) -> float:
    """log mu{x : x_i = s_i}, computed in log space (safe for very long words).

    Returns -inf for measure-zero constraints.
    """
    idx = [int(i) for i in indices]
    syms = [int(s) for s in symbols]
    if len(idx) != len(syms):
        raise LengthMismatch(f"{len(idx)} indices vs {len(syms)} symbols")
    if not idx:
        return 0.0
    order = sorted(range(len(idx)), key=lambda j: idx[j])
    idx = [idx[j] for j in order]
    syms = [syms[j] for j in order]
    for a, b, sa, sb in zip(idx, idx[1:], syms, syms[1:]):
        if a == b and sa != sb:
            return -math.inf
    dedup = [(i, s) for j, (i, s) in enumerate(zip(idx, syms)) if j == 0 or i != idx[j - 1]]
    idx = [i for i, _ in dedup]
    syms = [s for _, s in dedup]

    if isinstance(oracle, BernoulliIID):
        p = oracle.p
        chosen = p[syms]
        if np.any(chosen <= 0.0):
            return -math.inf
        return float(np.sum(np.log(chosen)))
    if isinstance(oracle, MarkovStationary):
        start = oracle.pi_vec[syms[0]]
        if start <= 0.0:
            return -math.inf
        total = math.log(start)
        P = oracle.P
        for j in range(len(idx) - 1):
            gap = idx[j + 1] - idx[j]
            entry = P[syms[j], syms[j + 1]] if gap == 1 else oracle.power(gap)[syms[j], syms[j + 1]]
            if entry <= 0.0:
                return -math.inf
            total += math.log(entry)
        return total
    if isinstance(oracle, ConditionalShiftOracle):
        f_idx = sorted(oracle.fixed)
        f_syms = [oracle.fixed[i] for i in f_idx]
        joint = fixed_coords_log_measure(oracle.base, f_idx + idx, f_syms + syms)
        return joint - math.log(oracle._block_mass)
    raise UnsupportedOracle(f"{type(oracle).__name__} has no exact cylinder measures")


def word_distribution(oracle: MeasureOracle, indices, budget: int = ATOM_BUDGET) -> np.ndarray:
    """Probabilities of all symbol words on ``indices`` (sorted, distinct).

    The result is a vector of length alphabet**len(indices) in mixed-radix
    order: the first index is the most significant digit.
    """
    idx = sorted(int(i) for i in indices)
    if len(set(idx)) != len(idx):
        raise ValueError("indices must be distinct")
    if not isinstance(oracle, (BernoulliIID, MarkovStationary)):
        raise UnsupportedOracle(f"{type(oracle).__name__} has no word distributions")
    a = oracle.alphabet_size
    count = a ** len(idx)
    if count > budget:
        raise AtomBudgetExceeded(f"{count} atoms exceed the budget of {budget}")

    if isinstance(oracle, BernoulliIID):
        probs = np.ones(1)
        for _ in idx:
            probs = np.multiply.outer(probs, oracle.p).ravel()
        return probs
    probs = oracle.pi_vec.copy()
    for j in range(len(idx) - 1):
        gap = idx[j + 1] - idx[j]
        Pg = oracle.power(gap)
        last = np.arange(probs.size) % a  # least significant digit = latest coordinate
        probs = (probs[:, None] * Pg[last, :]).ravel()
    return probs


def sample_symbol_block(oracle: MeasureOracle, length: int, count: int, rng) -> np.ndarray:
    """``count`` independent words of ``length`` consecutive symbols, as an array."""
    if isinstance(oracle, BernoulliIID):
        return rng.choice(oracle.alphabet_size, size=(count, length), p=oracle.p).astype(np.int8)
    if isinstance(oracle, MarkovStationary):
        out = np.empty((count, length), dtype=np.int8)
        cum_pi = np.cumsum(oracle.pi_vec)
        cum_f = np.cumsum(oracle.P, axis=1)
        u = rng.random((count, length))
        out[:, 0] = np.searchsorted(cum_pi, u[:, 0], side="right")
        for t in range(1, length):
            rows = cum_f[out[:, t - 1]]
            out[:, t] = (u[:, t : t + 1] >= rows).sum(axis=1)
        return out
    raise UnsupportedOracle(f"{type(oracle).__name__} cannot sample symbol blocks")
