"""Bowen balls, pointwise Lipschitz estimation, and ball-inclusion checks.

The pointwise Lipschitz constant at x over scale r and time n is

    L_n^r(x) = sup { d(T^n x, T^n y) / d(x, y) : y in B_n(x, r), y != x }

where B_n(x, r) is the open Bowen ball {y : max_{0<=k<n} d(T^k x, T^k y) < r}.
The sup is estimated by probing: candidate points are drawn in B(x, r) across
logarithmically spread scales (small scales are essential, otherwise expanding
directions are thinned out of the Bowen ball and the sup is unreachable),
filtered by Bowen membership, and the ratio is maximized over survivors.

For linear torus maps all probe arithmetic runs on displacement vectors,
which is exact for the linearized orbit and immune to the catastrophic
cancellation that direct point iteration suffers below ~1e-14.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoProbeAccepted, ScaleUnderflow
from .systems import (
    DyadicMetric,
    FullShift,
    ProductSystem,
    SymbolicPoint,
    SystemDescriptor,
    ToralAutomorphism,
    TorusTranslation,
    WeightedL2Metric,
    distance,
    iterate,
    resolution_floor,
)
from .measures import rng_for

__all__ = [
    "bowen_ball_contains",
    "LipschitzEstimate",
    "estimate_pointwise_lipschitz",
    "lipschitz_table",
    "InclusionRecord",
    "InclusionReport",
    "check_ball_inclusion",
]


def bowen_ball_contains(sys: SystemDescriptor, x, y, n: int, r: float) -> bool:
    """True iff max_{0 <= k <= n-1} d(T^k x, T^k y) < r (open Bowen ball)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if r <= 0.0:
        raise ValueError("r must be positive")
    for k in range(n):
        if distance(sys, iterate(sys, x, k), iterate(sys, y, k)) >= r:
            return False
    return True


@dataclass
class LipschitzEstimate:
    """Result of probing L_n^r(x); ``curve`` tracks the running max vs probes used."""

    x: object
    n: int
    r: float
    value: float
    probe_count: int  # accepted probes that entered the max
    attempts: int
    probe_radius_floor: float
    curve: list = field(default_factory=list)  # (attempts so far, running max)


# ---------------------------------------------------------------------------
# probe kernels (vectorized over probes; value = max ratio per requested n)
# ---------------------------------------------------------------------------


def _torus_probe_ratios(sys, r, ns, probes, rng):
    """Displacement-route ratios for linear torus maps.

    Returns (accepted[probes, len(ns)], ratios[probes, len(ns)]).
    """
    floor = max(resolution_floor(sys), 1e-12 * r)
    u = rng.random((probes, 2))
    mags = floor * (r / floor) ** u[:, 0]  # log-uniform across scales in [floor, r)
    angles = 2.0 * math.pi * u[:, 1]
    v = np.stack([mags * np.cos(angles), mags * np.sin(angles)], axis=1)

    if isinstance(sys, TorusTranslation):
        A = np.eye(2)
    else:
        A = sys.as_array()
    n_max = max(ns)
    w = v.copy()
    d0 = _torus_norm_rows(v)
    run_max = d0.copy()  # max_{0<=k<=j} d_k, starting at k=0
    accepted = np.zeros((probes, len(ns)), dtype=bool)
    ratios = np.zeros((probes, len(ns)))
    col = {n: j for j, n in enumerate(ns)}
    for k in range(1, n_max + 1):
        w = w @ A.T
        dk = _torus_norm_rows(w)
        if k in col:
            j = col[k]
            ok = (run_max < r) & (d0 > 0.0)  # Bowen membership uses k <= n-1
            accepted[:, j] = ok
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios[:, j] = np.where(ok, dk / d0, 0.0)
        run_max = np.maximum(run_max, dk)
    return accepted, ratios


def _torus_norm_rows(v: np.ndarray) -> np.ndarray:
    """Torus norm (min over the 9 lattice translates) of each displacement row."""
    frac = v - np.round(v)  # nearest-integer reduction = min translate per axis
    return np.hypot(frac[:, 0], frac[:, 1])


def _shift_probe_symbols(x: SymbolicPoint, sys: FullShift, k_lo, k_hi, rng, probes):
    """Probes that agree with x on |i| < k, are forced to differ at +-k, random beyond."""
    a = sys.alphabet_size
    width = x.symbols.size
    base = np.broadcast_to(x.symbols, (probes, width)).copy()
    ks = rng.integers(k_lo, k_hi + 1, size=probes)
    sides = np.where(rng.random(probes) < 0.5, 1, -1)
    # randomize everything at |coord| >= k, then force the chosen flip at side*k
    coords = np.arange(x.lo, x.hi + 1)
    rand = rng.integers(0, a, size=(probes, width), dtype=np.int8)
    outside = np.abs(coords)[None, :] >= ks[:, None]
    base[outside] = rand[outside]
    flip_pos = sides * ks - x.lo
    rows = np.arange(probes)
    offset = rng.integers(1, a, size=probes, dtype=np.int8)
    base[rows, flip_pos] = (x.symbols[flip_pos] + offset) % a
    return base, ks


def _shift_probe_ratios(sys: FullShift, x: SymbolicPoint, r, ns, probes, rng):
    """Flip-route ratios for full shifts (dyadic or weighted metric)."""
    n_max = max(ns)
    if isinstance(sys.metric, DyadicMetric):
        k_lo = int(math.floor(math.log2(1.0 / r))) + 1
        while 2.0 ** (-k_lo) >= r:
            k_lo += 1
    else:
        # smallest flip depth whose worst-case weighted distance is below r
        k_lo = 1
        from .systems import weighted_tail_bound

        while weighted_tail_bound(sys.metric.weights, k_lo - 1) >= r and k_lo < sys.window:
            k_lo += 1
    # flips surviving Bowen membership through time n sit at depth >= n + k_lo,
    # so the draw range must extend past n_max + k_lo (within the stored window)
    k_hi = min(x.hi - 1, -x.lo - 1, k_lo + n_max + 16)
    if k_hi < k_lo:
        raise ScaleUnderflow(
            f"no admissible flip depth: need k in [{k_lo}, {k_hi}] inside the window"
        )
    symbols, _ = _shift_probe_symbols(x, sys, k_lo, k_hi, rng, probes)

    accepted = np.zeros((probes, len(ns)), dtype=bool)
    ratios = np.zeros((probes, len(ns)))
    diff = symbols != np.broadcast_to(x.symbols, symbols.shape)
    if isinstance(sys.metric, DyadicMetric):
        coords = np.arange(x.lo, x.hi + 1)
        # nearest[j] = min |i - j| over mismatch coords i, for j = 0..n_max
        nearest = np.full((probes, n_max + 1), np.inf)
        for j in range(n_max + 1):
            dist_j = np.where(diff, np.abs(coords[None, :] - j), np.inf)
            nearest[:, j] = dist_j.min(axis=1)
        d = 2.0 ** (-nearest)
        d0 = d[:, 0]
    else:
        w = sys.metric.weights
        width = x.symbols.size
        kmax_needed = max(abs(x.lo), abs(x.hi)) + n_max
        vals = w.values(kmax_needed)
        coords = np.arange(x.lo, x.hi + 1)
        # d(T^j x, T^j y)^2 = sum_i a_|i - j| * diff_i, one matmul covers all j
        wmat = vals[np.abs(coords[:, None] - np.arange(n_max + 1)[None, :])]
        cap = np.abs(coords[:, None] - np.arange(n_max + 1)[None, :]) <= sys.window
        d = np.sqrt(diff.astype(float) @ (wmat * cap))
        d0 = d[:, 0]
    col = {n: j for j, n in enumerate(ns)}
    run_max = d[:, 0].copy()
    for k in range(1, n_max + 1):
        if k in col:
            j = col[k]
            ok = (run_max < r) & (d0 > 0.0)
            accepted[:, j] = ok
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios[:, j] = np.where(ok, d[:, k] / d0, 0.0)
        run_max = np.maximum(run_max, d[:, k])
    return accepted, ratios


def _probe_ratios(sys, x, r, ns, probes, rng):
    if isinstance(sys, (ToralAutomorphism, TorusTranslation)):
        return _torus_probe_ratios(sys, r, ns, probes, rng)
    if isinstance(sys, FullShift):
        return _shift_probe_ratios(sys, x, r, ns, probes, rng)
    if isinstance(sys, ProductSystem):
        raise NotImplementedError("Lipschitz probing for product systems is not implemented")
    raise NotImplementedError(f"no probe kernel for {type(sys).__name__}")


def estimate_pointwise_lipschitz(
    sys: SystemDescriptor, x, n: int, r: float, probes: int = 1024, seed: int = 0
) -> LipschitzEstimate:
    """Probe-based estimate of L_n^r(x).

    ``probes`` is the attempt budget; candidates falling outside the Bowen
    ball are rejected and only survivors enter the max, so the estimate is a
    lower bound of the sup and is nondecreasing in ``probes`` for a fixed
    seed.  Probes use per-index derived seeds, so prefixes are stable.

    Raises ``NoProbeAccepted`` when no candidate lands in B_n(x, r).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    floor = resolution_floor(sys)
    if not (r > floor):
        raise ScaleUnderflow(f"r = {r} is not above the resolution floor {floor}")
    accepted_total = 0
    best = 0.0
    curve = []
    checkpoint = max(1, probes // 16)
    # per-probe derived seeds keep prefixes stable under a larger budget
    for i in range(probes):
        rng = rng_for(seed, i)
        acc, rat = _probe_ratios(sys, x, r, [n], 1, rng)
        if acc[0, 0]:
            accepted_total += 1
            if rat[0, 0] > best:
                best = float(rat[0, 0])
        if (i + 1) % checkpoint == 0 or i + 1 == probes:
            curve.append((i + 1, best))
    if accepted_total == 0:
        raise NoProbeAccepted(f"no probe accepted in B_{n}(x, {r}) after {probes} attempts")
    return LipschitzEstimate(
        x=x,
        n=n,
        r=r,
        value=best,
        probe_count=accepted_total,
        attempts=probes,
        probe_radius_floor=floor,
        curve=curve,
    )


def lipschitz_table(
    sys: SystemDescriptor,
    points: list,
    r: float,
    n_schedule: list,
    probes: int,
    seed: int,
    r_tag: int = 0,
):
    """Batched L_n^r estimates: values[point, n_index], NaN where no probe accepted.

    Each point gets its own derived generator (seed, r_tag, point index), and
    one probe block is drawn per point and reused across the n-schedule, so
    results are independent of evaluation order and of threading.
    """
    ns = [int(n) for n in n_schedule]
    values = np.full((len(points), len(ns)), np.nan)
    accepted_counts = np.zeros((len(points), len(ns)), dtype=int)
    for i, x in enumerate(points):
        rng = rng_for(seed, r_tag, i)
        acc, rat = _probe_ratios(sys, x, r, ns, probes, rng)
        any_acc = acc.any(axis=0)
        accepted_counts[i] = acc.sum(axis=0)
        vals = np.where(any_acc, rat.max(axis=0), np.nan)
        values[i] = vals
    return values, accepted_counts


# ---------------------------------------------------------------------------
# ball inclusion: B(x, eta e^{-n lambda}) vs the Bowen ball B_n(x, eps)
# ---------------------------------------------------------------------------


@dataclass
class InclusionRecord:
    n: int
    radius: float
    tested: int
    violations: int
    underflow: bool
    witness: object = None  # displacement or probe description of the first violation


@dataclass
class InclusionReport:
    eta: float
    lam: float
    eps: float
    n_max: int
    records: list
    holds_from_n: int | None
    first_failure: tuple | None
    tested_up_to: int
    underflow_from_n: int | None


def check_ball_inclusion(
    sys: SystemDescriptor,
    x,
    lam: float,
    eps: float,
    eta: float,
    n_max: int,
    probes_per_n: int = 100,
    seed: int = 0,
) -> InclusionReport:
    """Sampled check of B(x, eta e^{-n lam}) subset of B_n(x, eps) for n <= n_max.

    For linear torus maps membership is evaluated on displacements, which is
    exact for arbitrarily small radii.  For symbolic systems, scales below
    the metric's resolution floor cannot be probed; those n are marked
    ``underflow`` and excluded (a run whose very first scale underflows
    raises ``ScaleUnderflow``).
    """
    if not (0.0 < eta < 1.0):
        raise ValueError("eta must lie in (0, 1)")
    if lam <= 0.0 or eps <= 0.0 or n_max < 1:
        raise ValueError("lam, eps must be positive and n_max >= 1")

    linear_torus = isinstance(sys, (ToralAutomorphism, TorusTranslation))
    floor = resolution_floor(sys)
    records = []
    first_failure = None
    underflow_from = None
    tested_up_to = 0
    for n in range(1, n_max + 1):
        radius = eta * math.exp(-n * lam)
        if not linear_torus and radius < floor:
            if n == 1:
                raise ScaleUnderflow(
                    f"radius {radius} below resolution floor {floor} at n = 1"
                )
            if underflow_from is None:
                underflow_from = n
            records.append(InclusionRecord(n, radius, 0, 0, True))
            continue
        tested_up_to = n
        rng = rng_for(seed, n)
        if linear_torus:
            violations, witness = _torus_inclusion_sample(sys, radius, eps, n, probes_per_n, rng)
        else:
            violations, witness = _shift_inclusion_sample(sys, x, radius, eps, n, probes_per_n, rng)
        rec = InclusionRecord(n, radius, probes_per_n, violations, False, witness)
        records.append(rec)
        if violations and first_failure is None:
            first_failure = (n, witness)

    holds_from = None
    for n in range(1, n_max + 1):
        tail = [rec for rec in records if rec.n >= n and not rec.underflow]
        if tail and all(rec.violations == 0 for rec in tail):
            holds_from = n
            break
    return InclusionReport(
        eta=eta,
        lam=lam,
        eps=eps,
        n_max=n_max,
        records=records,
        holds_from_n=holds_from,
        first_failure=first_failure,
        tested_up_to=tested_up_to,
        underflow_from_n=underflow_from,
    )


def _torus_inclusion_sample(sys, radius, eps, n, probes, rng):
    if isinstance(sys, TorusTranslation):
        A = np.eye(2)
    else:
        A = sys.as_array()
    u = rng.random((probes, 2))
    mags = radius * np.sqrt(u[:, 0])  # area-uniform in the open ball
    angles = 2.0 * math.pi * u[:, 1]
    v = np.stack([mags * np.cos(angles), mags * np.sin(angles)], axis=1)
    w = v.copy()
    worst = _torus_norm_rows(w)
    for _ in range(1, n):
        w = w @ A.T
        worst = np.maximum(worst, _torus_norm_rows(w))
    bad = worst >= eps
    witness = None
    if bad.any():
        i = int(np.argmax(bad))
        witness = {"displacement": v[i].tolist(), "worst_distance": float(worst[i])}
    return int(bad.sum()), witness


def _shift_inclusion_sample(sys, x, radius, eps, n, probes, rng):
    violations = 0
    witness = None
    if isinstance(sys.metric, DyadicMetric):
        k_lo = int(math.floor(math.log2(1.0 / radius))) + 1
        while 2.0 ** (-k_lo) >= radius:
            k_lo += 1
    else:
        from .systems import weighted_tail_bound

        k_lo = 1
        while weighted_tail_bound(sys.metric.weights, k_lo - 1) >= radius and k_lo < sys.window:
            k_lo += 1
    k_hi = min(-x.lo - 1, x.hi - 1, k_lo + 16)
    if k_hi < k_lo:
        raise ScaleUnderflow("no flip depth available inside the window at this radius")
    symbols, _ = _shift_probe_symbols(x, sys, k_lo, k_hi, rng, probes)
    for row in symbols:
        y = SymbolicPoint(row, x.lo)
        if distance(sys, x, y) >= radius or distance(sys, x, y) == 0.0:
            continue  # outside the open ball (or indistinguishable); not a candidate
        if not bowen_ball_contains(sys, x, y, n, eps):
            violations += 1
            if witness is None:
                witness = {"flip_point_lo": int(y.lo)}
    return violations, witness
