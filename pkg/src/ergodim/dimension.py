"""Local unstable sets, box-counting and local-mass dimension, and the
end-to-end check that the dimension proxy dominates entropy / expansion rate.

The delta-local unstable set of x collects points whose backward orbit stays
within delta of the backward orbit of x.  The limit "distance tends to 0" is
replaced by a finite-horizon admission test: every returned point is checked
at all back-iterates up to the horizon and must come within an admission
tolerance (default delta / 8) at the final one.  All admission arithmetic is
exact on the dyadic grid / stored symbol windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .entropy import dyadic_agreement_radius
from .errors import (
    EmptyCloud,
    MassStarvation,
    TooFewPoints,
    TooFewScales,
    UnsupportedOracle,
    WindowExhausted,
)
from .lyapunov import estimate_chi
from .measures import (
    BernoulliIID,
    ConditionalShiftOracle,
    LebesgueTorus,
    MarkovStationary,
    entropy_rate,
    fixed_coords_log_measure,
    rng_for,
    sample_point,
)
from .systems import (
    FIXED_DENOM,
    DyadicMetric,
    FullShift,
    SymbolicPoint,
    ToralAutomorphism,
    TorusPoint,
    WeightedL2Metric,
    invert,
    resolution_floor,
)

__all__ = [
    "PointCloud",
    "DimensionEstimate",
    "sample_unstable_set",
    "box_counting_dimension",
    "local_dimension_lower",
    "unstable_cover_counts",
    "VerifyReport",
    "verify_main_inequality",
]


@dataclass
class PointCloud:
    """Points admitted into the delta-local unstable set of a base point."""

    points: list
    base: object
    delta: float
    back_horizon: int
    admission_tolerance: float
    kind: str  # "torus" or "shift"
    admitted: int
    rejected: int
    collinearity_residual: float | None = None
    varied_window: tuple | None = None  # (first coord, depth) for shift clouds
    diagnostics: dict = field(default_factory=dict)


@dataclass
class DimensionEstimate:
    scales: list
    counts: list  # box counts, or ball masses for the local-mass method
    slope: float
    stderr: float
    ci: tuple
    method: str  # "box_count" or "local_mass"
    n_points: int
    monotone: bool
    alt_slope: float | None = None
    liminf_proxy: float | None = None
    per_scale_ratio: list | None = None
    dropped_scales: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# unstable set sampling
# ---------------------------------------------------------------------------


def _unstable_direction(matrix: np.ndarray):
    """Unit eigenvector of the largest-modulus eigenvalue, sign-normalized."""
    vals, vecs = np.linalg.eig(matrix.astype(float))
    i = int(np.argmax(np.abs(vals)))
    lam = float(np.real(vals[i]))
    e = np.real(vecs[:, i])
    e = e / np.linalg.norm(e)
    if e[0] < 0 or (e[0] == 0 and e[1] < 0):
        e = -e
    return abs(lam), e


def _lattice_ladder(sys: ToralAutomorphism, e_u: np.ndarray, s_max: float):
    """Integer vectors M^j v0 hugging the unstable line, with projections.

    Returns (vectors, projections, perpendiculars) for j = 0, 1, ... while the
    unstable projection stays below s_max.  These are the only lattice
    directions whose backward iterates do not blow up in the stable direction,
    so candidate displacements are built as short signed combinations of them.
    """
    M = np.array(sys.matrix, dtype=object)
    v = np.array([1, 0], dtype=object)
    if abs(float(v[0]) * e_u[0] + float(v[1]) * e_u[1]) < 1e-9:
        v = np.array([0, 1], dtype=object)
    vecs, projs, perps = [], [], []
    for _ in range(200):
        vf = np.array([float(v[0]), float(v[1])])
        proj = float(vf @ e_u)
        if abs(proj) > s_max:
            break
        perp = float(np.linalg.norm(vf - proj * e_u))
        vecs.append((int(v[0]), int(v[1])))
        projs.append(proj)
        perps.append(perp)
        v = M @ v
    return vecs, projs, perps


def _torus_unstable_cloud(sys, x, delta, back_horizon, budget, tol):
    lam, e_u = _unstable_direction(np.array(sys.matrix, dtype=float))
    if lam <= 1.0:
        raise UnsupportedOracle("unstable sampling needs a hyperbolic matrix")
    s_max = 0.98 * delta * FIXED_DENOM
    vecs, projs, perps = _lattice_ladder(sys, e_u, s_max)
    # keep ladder levels whose stable residue stays below the admission
    # tolerance after back_horizon steps of exponential growth
    perp_budget = (tol * FIXED_DENOM) / (lam**back_horizon) / 16.0
    usable = [j for j in range(len(vecs)) if perps[j] <= perp_budget]
    if not usable:
        raise EmptyCloud(
            "no lattice direction survives the admission tolerance: "
            f"delta={delta} is below the backward-horizon resolution floor"
        )
    usable = [j for j in usable if abs(projs[j]) > 0]
    order = sorted(usable, key=lambda j: -abs(projs[j]))
    smallest = min(abs(projs[j]) for j in usable)

    targets = np.linspace(-s_max, s_max, budget)
    kx0, ky0 = x.ints()
    seen = set()
    disp = []
    for t in targets:
        s = float(t)
        kx, ky = 0, 0
        for j in order:
            w = projs[j]
            aw = abs(w)
            while abs(s) >= aw and aw >= smallest:
                sgn = 1 if (s > 0) == (w > 0) else -1
                kx += sgn * vecs[j][0]
                ky += sgn * vecs[j][1]
                s -= sgn * w
        if (kx, ky) not in seen:
            seen.add((kx, ky))
            disp.append((kx, ky))
    if not disp or disp == [(0, 0)]:
        raise EmptyCloud("no candidate displacements at this delta")

    D = np.array(disp, dtype=np.int64) % FIXED_DENOM
    Minv = np.array(sys.inverse_matrix, dtype=np.int64)
    cur = D.copy()
    ok = np.ones(len(disp), dtype=bool)
    first_fail = np.full(len(disp), -1)
    final_d = None
    for i in range(back_horizon + 1):
        frac = cur / FIXED_DENOM
        frac -= np.round(frac)
        d = np.hypot(frac[:, 0], frac[:, 1])
        bad = ok & (d > delta)
        first_fail[bad & (first_fail < 0)] = i
        ok &= d <= delta
        if i == back_horizon:
            final_d = d
        else:
            cur = (cur @ Minv.T) % FIXED_DENOM
    ok &= final_d <= tol
    fail_tol = (final_d > tol) & (first_fail < 0)
    first_fail[fail_tol] = back_horizon
    keep = np.flatnonzero(ok)
    if not any(disp[i] != (0, 0) for i in keep):
        tightest = int(first_fail[first_fail >= 0].min()) if (first_fail >= 0).any() else 0
        raise EmptyCloud(
            f"no nontrivial candidate survived admission; tightest failing n = {tightest}"
        )
    pts = [
        TorusPoint.from_ints(kx0 + disp[i][0], ky0 + disp[i][1]) for i in keep
    ]
    # perpendicular offset from the unstable line through x (exact displacements)
    Df = np.array([disp[i] for i in keep], dtype=float) / FIXED_DENOM
    perp_resid = float(np.abs(Df @ np.array([-e_u[1], e_u[0]])).max()) if len(keep) else 0.0
    return PointCloud(
        points=pts,
        base=x,
        delta=delta,
        back_horizon=back_horizon,
        admission_tolerance=tol,
        kind="torus",
        admitted=len(pts),
        rejected=len(disp) - len(pts),
        collinearity_residual=perp_resid,
        diagnostics={
            "lambda": lam,
            "ladder_levels": len(usable),
            "final_distance_max": float(final_d[keep].max()) if len(keep) else 0.0,
        },
    )


def _shift_unstable_cloud(sys: FullShift, oracle, x, delta, back_horizon, budget, tol, seed):
    a = sys.alphabet_size
    if isinstance(sys.metric, DyadicMetric):
        m_delta = 0
        while 2.0 ** (-m_delta) > delta:
            m_delta += 1
    else:
        w = sys.metric.weights
        m_delta = 0
        while (a - 1) * math.sqrt(max(w.total - math.fsum(w.a(k) for k in range(m_delta)), 0.0)) > delta:
            m_delta += 1
            if m_delta > sys.window:
                break
    m_delta = max(m_delta, 1)
    side = 1 if not sys.inverted else -1
    # forward shifts expand futures: vary coordinates >= m_delta; inverted
    # shifts expand pasts: vary coordinates <= -m_delta
    if side == 1:
        room = x.hi - m_delta + 1
    else:
        room = -m_delta - x.lo + 1
    if room < 1:
        raise EmptyCloud(f"delta={delta} requires varying coordinates outside the stored window")
    if back_horizon > (-x.lo if side == 1 else x.hi):
        raise WindowExhausted("back horizon exceeds the stored window of the base point")

    depth = 1
    while a ** (depth + 1) <= budget and depth + 1 <= room:
        depth += 1
    n_words = a**depth
    if n_words <= budget:
        words = np.array(
            [[(w_ // a**j) % a for j in range(depth - 1, -1, -1)] for w_ in range(n_words)],
            dtype=np.int8,
        )
    else:  # pragma: no cover - enumeration always fits by construction of depth
        rng = rng_for(seed, 31)
        words = rng.integers(0, a, size=(budget, depth), dtype=np.int8)
    if side == 1:
        var_coords = np.arange(m_delta, m_delta + depth)
    else:
        var_coords = np.arange(-m_delta - depth + 1, -m_delta + 1)

    base_word = np.asarray(x.coords(list(var_coords)), dtype=np.int8)
    diff = words != base_word[None, :]
    iis = np.arange(back_horizon + 1)
    # back-iterates move mismatch coordinates by +i (forward shift) / -i (inverted)
    shifted = np.abs(var_coords[None, :, None] + side * iis[None, None, :])
    if isinstance(sys.metric, DyadicMetric):
        big = np.where(diff[:, :, None], shifted, np.iinfo(np.int64).max)
        nearest = big.min(axis=1).astype(float)
        dists = np.where(nearest < 1e17, 2.0**-nearest, 0.0)
    else:
        vals = sys.metric.weights.values(int(shifted.max()))
        wmat = vals[shifted] * (shifted <= sys.window)
        dists = np.sqrt((diff[:, :, None] * wmat).sum(axis=1))
    ok = (dists <= delta).all(axis=1) & (dists[:, -1] <= tol)
    if not ok.any():
        per_i_fail = (dists > delta).argmax(axis=1)
        raise EmptyCloud(
            f"every candidate failed admission; tightest failing n = {int(per_i_fail.min())}"
        )
    keep = np.flatnonzero(ok)
    pos = var_coords - x.lo
    pts = []
    for i in keep:
        syms = x.symbols.copy()
        syms[pos] = words[i]
        pts.append(SymbolicPoint(syms, x.lo))
    return PointCloud(
        points=pts,
        base=x,
        delta=delta,
        back_horizon=back_horizon,
        admission_tolerance=tol,
        kind="shift",
        admitted=len(pts),
        rejected=int(len(words) - len(pts)),
        varied_window=(int(var_coords[0]), depth),
        diagnostics={"m_delta": m_delta, "alphabet": a, "inverted": sys.inverted},
    )


def sample_unstable_set(
    sys,
    oracle,
    x,
    delta: float,
    back_horizon: int = 40,
    budget: int = 10_000,
    seed: int = 0,
    admission_tolerance: float | None = None,
) -> PointCloud:
    """Sample the delta-local unstable set of x with exact admission testing.

    Hyperbolic torus maps sweep the unstable eigendirection through x using
    lattice displacements whose backward iterates stay small; shifts vary the
    expanding coordinates of x.  Every candidate is admission-tested exactly:
    d(T^{-i} x, T^{-i} y) <= delta for all i <= back_horizon and <= the
    admission tolerance (default delta/8) at the horizon itself.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    tol = delta / 8.0 if admission_tolerance is None else admission_tolerance
    if isinstance(sys, ToralAutomorphism):
        return _torus_unstable_cloud(sys, x, delta, back_horizon, budget, tol)
    if isinstance(sys, FullShift):
        return _shift_unstable_cloud(sys, oracle, x, delta, back_horizon, budget, tol, seed)
    raise UnsupportedOracle(f"no unstable sampling for {type(sys).__name__}")


# ---------------------------------------------------------------------------
# box-counting dimension
# ---------------------------------------------------------------------------


def _symbolic_box_radius(sys: FullShift, eps: float) -> int:
    """Smallest window radius whose cylinders have diameter <= eps."""
    if isinstance(sys.metric, DyadicMetric):
        k = 0
        while 2.0 ** (-k) > eps:
            k += 1
        return k
    w = sys.metric.weights
    a = sys.alphabet_size
    k = 0
    while (a - 1) * math.sqrt(2.0 * w.tail_sum(k)) > eps:
        k += 1
        if k > 10 * sys.window:
            raise ValueError(f"scale {eps} below the weighted-metric resolution")
    return k


def _cloud_box_counts(cloud: PointCloud, sys, scales, origin_shift: float = 0.0):
    counts = []
    if cloud.kind == "torus":
        P = np.array([[p.x, p.y] for p in cloud.points])
        for eps in scales:
            idx = np.floor((P + origin_shift * eps) / eps).astype(np.int64)
            counts.append(int(np.unique(idx, axis=0).shape[0]))
    else:
        S = np.stack([p.symbols for p in cloud.points])
        lo = cloud.points[0].lo
        hi = cloud.points[0].hi
        for eps in scales:
            k = _symbolic_box_radius(sys, eps)
            c0, c1 = max(-k, lo), min(k, hi)
            block = S[:, c0 - lo : c1 - lo + 1]
            counts.append(int(np.unique(block, axis=0).shape[0]))
    return counts


def box_counting_dimension(cloud: PointCloud, scales, sys=None) -> DimensionEstimate:
    """Slope of log N(eps) against log(1/eps) over occupied half-open boxes.

    Symbolic clouds count distinct central words at the window radius whose
    cylinders have diameter <= eps.  A quarter-scale origin shift is rerun on
    torus clouds as a robustness column.
    """
    scales = sorted(float(s) for s in scales)[::-1]  # decreasing
    n_pts = len(cloud.points)
    if n_pts == 0:
        raise EmptyCloud("no points to count")
    if 1 < n_pts < 100:
        raise TooFewPoints(f"{n_pts} points is too few for a slope (need >= 100 or exactly 1)")
    floor = resolution_floor(sys) if sys is not None else 0.0
    kept = [s for s in scales if s > floor]
    dropped = [s for s in scales if s <= floor]
    if len(kept) < 4:
        raise TooFewScales(f"only {len(kept)} scales above the resolution floor {floor}")
    counts = _cloud_box_counts(cloud, sys, kept)
    monotone = all(c2 >= c1 for c1, c2 in zip(counts, counts[1:]))
    logs = np.log(1.0 / np.array(kept))
    logc = np.log(np.array(counts, dtype=float))
    if np.allclose(logc, logc[0]):
        slope, stderr = 0.0, 0.0
        est_ci = (0.0, 0.0)
    else:
        fit = linregress(logs, logc)
        slope, stderr = float(fit.slope), float(fit.stderr)
        est_ci = (slope - 1.96 * stderr, slope + 1.96 * stderr)
    alt = None
    if cloud.kind == "torus":
        alt_counts = _cloud_box_counts(cloud, sys, kept, origin_shift=0.25)
        alt_logc = np.log(np.array(alt_counts, dtype=float))
        if np.allclose(alt_logc, alt_logc[0]):
            alt = 0.0
        else:
            alt = float(linregress(logs, alt_logc).slope)
    return DimensionEstimate(
        scales=kept,
        counts=counts,
        slope=slope,
        stderr=stderr,
        ci=est_ci,
        method="box_count",
        n_points=n_pts,
        monotone=monotone,
        alt_slope=alt,
        dropped_scales=dropped,
    )


# ---------------------------------------------------------------------------
# local mass dimension
# ---------------------------------------------------------------------------


def local_dimension_lower(
    cloud: PointCloud,
    conditional_oracle,
    probe_y,
    scales,
    sys=None,
) -> DimensionEstimate:
    """Slope and liminf proxy of log mu_x(B(y, r)) / log r over the scales.

    With a conditional shift oracle the ball masses are exact cylinder
    measures (dyadic metric); otherwise the cloud's empirical measure is used
    and scales with zero neighbor mass raise no estimate but are dropped and
    reported (all-dropped -> MassStarvation).
    """
    scales = sorted(float(s) for s in scales)[::-1]
    if len(scales) < 4:
        raise TooFewScales(f"{len(scales)} scales requested, need >= 4")
    masses = []
    kept = []
    dropped = []
    if isinstance(conditional_oracle, ConditionalShiftOracle):
        if not (isinstance(sys, FullShift) and isinstance(sys.metric, DyadicMetric)):
            raise UnsupportedOracle("exact local mass needs a dyadic-metric shift")
        for r in scales:
            rho = dyadic_agreement_radius(r)
            coords = list(range(-rho, rho + 1))
            logm = fixed_coords_log_measure(
                conditional_oracle, coords, probe_y.coords(coords)
            )
            if logm == -math.inf:
                dropped.append(r)
                continue
            kept.append(r)
            masses.append(logm)
        log_mass = np.array(masses)
    else:
        pts = cloud.points
        if cloud.kind == "torus":
            P = np.array([[p.x, p.y] for p in pts])
            v = P - np.array([probe_y.x, probe_y.y])[None, :]
            v -= np.round(v)
            d = np.hypot(v[:, 0], v[:, 1])
        else:
            S = np.stack([p.symbols for p in pts])
            target = np.asarray(
                probe_y.coords(list(range(pts[0].lo, pts[0].hi + 1))), dtype=S.dtype
            )
            diff = S != target[None, :]
            coords_abs = np.abs(np.arange(pts[0].lo, pts[0].hi + 1))
            big = np.where(diff, coords_abs[None, :], np.iinfo(np.int64).max)
            nearest = big.min(axis=1).astype(float)
            d = np.where(nearest < 1e17, 2.0**-nearest, 0.0)
        self_mask = d > 0.0  # exclude the probe itself from its neighbor counts
        n_total = int(self_mask.sum())
        if n_total == 0:
            raise MassStarvation("cloud contains no point distinct from the probe")
        for r in scales:
            hits = int(((d < r) & self_mask).sum())
            if hits == 0:
                dropped.append(r)
                continue
            kept.append(r)
            masses.append(math.log(hits / n_total))
        log_mass = np.array(masses)
    if len(kept) < 4:
        raise MassStarvation(
            f"only {len(kept)} scales carry mass (dropped {len(dropped)}); need >= 4"
        )
    log_r = np.log(np.array(kept))
    ratios = log_mass / log_r
    fit = linregress(log_r, log_mass)
    tail = ratios[len(ratios) // 2 :]
    return DimensionEstimate(
        scales=kept,
        counts=[float(np.exp(v)) for v in log_mass],
        slope=float(fit.slope),
        stderr=float(fit.stderr),
        ci=(float(fit.slope) - 1.96 * float(fit.stderr), float(fit.slope) + 1.96 * float(fit.stderr)),
        method="local_mass",
        n_points=len(cloud.points),
        monotone=all(m2 <= m1 for m1, m2 in zip(masses, masses[1:])),
        liminf_proxy=float(tail.min()),
        per_scale_ratio=[float(v) for v in ratios],
        dropped_scales=dropped,
    )


# ---------------------------------------------------------------------------
# exact cover counts for the divergence regime
# ---------------------------------------------------------------------------


def unstable_cover_counts(sys: FullShift, delta: float, octaves: int = 4, base_scale: float | None = None):
    """Exact log cover counts of the full delta-local unstable set of a shift.

    The set of points agreeing with the base on the contracting side is
    covered by cylinders of diameter <= eps on the window [-k(eps), k(eps)];
    the count is alphabet^(k(eps) - m_delta + 1), exact in log space.  Returns
    dicts with per-octave scales, log counts, and successive slopes.
    """
    a = sys.alphabet_size
    if isinstance(sys.metric, DyadicMetric):
        m_delta = 0
        while 2.0 ** (-m_delta) > delta:
            m_delta += 1
    else:
        w = sys.metric.weights
        m_delta = 0
        while (a - 1) * math.sqrt(2.0 * w.tail_sum(m_delta - 1 if m_delta else 0)) > delta and m_delta < 10_000:
            m_delta += 1
    m_delta = max(m_delta, 1)
    eps0 = base_scale if base_scale is not None else delta / 2.0
    scales = [eps0 * 2.0 ** (-j) for j in range(octaves + 1)]
    if isinstance(sys.metric, DyadicMetric):
        ks = [_symbolic_box_radius(sys, e) for e in scales]
    else:
        # analytic covering radii: the stored-window cap does not apply here;
        # scan the exact tail sum incrementally (k grows like 1/eps^2, and the
        # scales are descending, so one pass covers every scale)
        w = sys.metric.weights
        ks = []
        k = 0
        partial = w.a(0)
        tail = max(w.total - partial, 0.0) if w.total is not None else w.tail_sum(0)
        for e in scales:
            while (a - 1) * math.sqrt(2.0 * tail) > e:
                k += 1
                partial += w.a(k)
                tail = max(w.total - partial, 0.0) if w.total is not None else w.tail_sum(k)
            ks.append(k)
    log_counts = [max(k - m_delta + 1, 0) * math.log(a) for k in ks]
    slopes = [
        (c2 - c1) / math.log(2.0) for c1, c2 in zip(log_counts, log_counts[1:])
    ]
    return {
        "m_delta": m_delta,
        "scales": scales,
        "window_radii": ks,
        "log_counts": log_counts,
        "octave_slopes": slopes,
        "strictly_increasing": all(s2 > s1 for s1, s2 in zip(slopes, slopes[1:])),
    }


# ---------------------------------------------------------------------------
# end-to-end verification
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    direction: str
    h_value: float
    chi: float
    chi_floor: float
    regime: str  # "ratio" or "divergence"
    ratio: float
    dim_estimate: float | None
    per_point_slopes: list
    mass_liminf: float | None
    slack: float | None
    holds: bool
    divergence: dict | None
    flags: list
    disclaimer: str
    diagnostics: dict = field(default_factory=dict)


_DISCLAIMER = (
    "The reported dimension is a box-counting proxy computed on sampled "
    "finite-horizon local unstable sets, paired with a local-mass lower "
    "proxy where conditional measures are exact; it upper-bounds nothing "
    "and is compared to h/chi as an empirical slope, not as a Hausdorff "
    "dimension."
)


def _invert_oracle(oracle):
    if isinstance(oracle, (BernoulliIID, LebesgueTorus)):
        return oracle
    if isinstance(oracle, MarkovStationary):
        B = oracle.backward()
        return MarkovStationary(tuple(tuple(float(v) for v in row) for row in B), oracle.pi)
    raise UnsupportedOracle(f"cannot reverse {type(oracle).__name__}")


def _closed_form_h(sys, oracle) -> float:
    if isinstance(sys, ToralAutomorphism):
        lam, _ = _unstable_direction(np.array(sys.matrix, dtype=float))
        return math.log(lam)
    return entropy_rate(oracle)


def verify_main_inequality(
    sys,
    oracle,
    direction: str = "forward",
    delta: float | None = None,
    base_points: int = 20,
    cloud_budget: int = 10_000,
    scales=None,
    r_schedule=None,
    n_schedule=(2, 4, 6, 8),
    chi_points: int = 256,
    chi_probes: int = 128,
    back_horizon: int = 40,
    chi_floor: float = 0.05,
    slack_tolerance: float = 0.05,
    mass_points: int = 5,
    past_depth: int = 8,
    seed: int = 0,
    threads: int = 1,
) -> VerifyReport:
    """Compare a box-dimension proxy of local unstable sets against h / chi.

    h is taken in closed form (log of the expanding eigenvalue for hyperbolic
    torus maps, the entropy rate for shift oracles); chi comes from the
    pointwise-Lipschitz estimator.  When chi falls at or below ``chi_floor``
    the ratio is treated as infinite and the verdict switches to the
    divergence criterion: exact cover-count slopes of the local unstable set
    must strictly increase across the last four scale octaves.  Per-point
    failures are flagged, not fatal.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    work_sys = sys if direction == "forward" else invert(sys)
    work_oracle = oracle if direction == "forward" else _invert_oracle(oracle)
    flags = []
    if r_schedule is None:
        # weighted-metric flip probes cannot reach below the stored-window
        # tail bound, so their schedule starts coarser
        weighted = isinstance(work_sys, FullShift) and not isinstance(work_sys.metric, DyadicMetric)
        r_schedule = (0.4, 0.3, 0.2) if weighted else (0.2, 0.1, 0.05)

    h_value = _closed_form_h(work_sys if isinstance(sys, ToralAutomorphism) else sys, work_oracle)
    chi_est = estimate_chi(
        work_sys,
        work_oracle,
        r_schedule=r_schedule,
        n_schedule=n_schedule,
        points=chi_points,
        probes=chi_probes,
        seed=seed,
        threads=threads,
    )
    chi = chi_est.value

    if delta is None:
        delta = 0.05 if isinstance(work_sys, ToralAutomorphism) else 0.5

    if chi <= chi_floor:
        if not isinstance(work_sys, FullShift):
            raise UnsupportedOracle("divergence regime is only defined for shift systems here")
        cover = unstable_cover_counts(work_sys, delta, octaves=4)
        holds = bool(cover["strictly_increasing"])
        return VerifyReport(
            direction=direction,
            h_value=h_value,
            chi=chi,
            chi_floor=chi_floor,
            regime="divergence",
            ratio=math.inf,
            dim_estimate=None,
            per_point_slopes=[],
            mass_liminf=None,
            slack=None,
            holds=holds,
            divergence=cover,
            flags=flags,
            disclaimer=_DISCLAIMER,
            diagnostics={"chi_diagnostics": chi_est.diagnostics},
        )

    if scales is None:
        if isinstance(work_sys, ToralAutomorphism):
            scales = [delta * 2.0 ** (-j) for j in range(2, 8)]
        else:
            scales = [2.0 ** (-k) for k in range(2, 10)]

    slopes = []
    mass_liminfs = []
    for i in range(base_points):
        try:
            x = sample_point(work_sys, work_oracle, seed, 1000 + i)
            cloud = sample_unstable_set(
                work_sys, work_oracle, x, delta,
                back_horizon=back_horizon, budget=cloud_budget, seed=seed + i,
            )
            est = box_counting_dimension(cloud, scales, sys=work_sys)
            slopes.append(est.slope)
            if not est.monotone:
                flags.append(f"base point {i}: non-monotone box counts")
            if (
                len(mass_liminfs) < mass_points
                and isinstance(work_sys, FullShift)
                and isinstance(work_sys.metric, DyadicMetric)
                and isinstance(work_oracle, (BernoulliIID, MarkovStationary))
            ):
                from .partitions import disintegrate_past

                # condition deeply enough that no ball radius reaches past
                # the fixed block (keeps the per-scale ratios clean)
                need = dyadic_agreement_radius(min(scales)) + 1
                cond = disintegrate_past(work_oracle, max(past_depth, need), x)
                probe = cloud.points[min(1, len(cloud.points) - 1)]
                mass_est = local_dimension_lower(cloud, cond, probe, scales, sys=work_sys)
                mass_liminfs.append(mass_est.liminf_proxy)
        except Exception as exc:  # noqa: BLE001 - per-point failures are flagged
            flags.append(f"base point {i}: {type(exc).__name__}: {exc}")
    if not slopes:
        raise EmptyCloud("no base point produced a dimension estimate; see flags")

    dim_est = float(np.median(slopes))
    ratio = float(h_value / chi)
    slack = float(dim_est - ratio)
    holds = bool(slack >= -slack_tolerance)
    return VerifyReport(
        direction=direction,
        h_value=h_value,
        chi=chi,
        chi_floor=chi_floor,
        regime="ratio",
        ratio=ratio,
        dim_estimate=dim_est,
        per_point_slopes=[float(s) for s in slopes],
        mass_liminf=float(np.median(mass_liminfs)) if mass_liminfs else None,
        slack=slack,
        holds=holds,
        divergence=None,
        flags=flags,
        disclaimer=_DISCLAIMER,
        diagnostics={
            "delta": delta,
            "points_used": len(slopes),
            "chi_diagnostics": chi_est.diagnostics,
        },
    )
