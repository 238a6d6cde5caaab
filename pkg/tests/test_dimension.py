"""Local unstable sets, dimension proxies, and the end-to-end inequality check.

Independent oracles: admission is re-verified definitionally (exact integer
backward orbits must stay delta-close at every step); symbolic box counts are
predicted in closed form (2^k distinct central words at window radius k); the
weighted-metric covering radii are re-derived by direct per-scale tail-sum
search rather than the production incremental scan.
"""
import math

import numpy as np
import pytest

from ergodim.dimension import (
    PointCloud,
    box_counting_dimension,
    local_dimension_lower,
    sample_unstable_set,
    unstable_cover_counts,
    verify_main_inequality,
)
from ergodim.errors import (
    EmptyCloud,
    MassStarvation,
    TooFewPoints,
    TooFewScales,
    UnsupportedOracle,
    WindowExhausted,
)
from ergodim.measures import BernoulliIID, sample_point
from ergodim.partitions import disintegrate_past
from ergodim.systems import (
    FIXED_DENOM,
    FullShift,
    TorusPoint,
    distance,
    iterate,
)
from tests.conftest import LOG2, LOG_LAM


# ---------------------------------------------------------------------------
# unstable cloud sampling: torus
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def cat_cloud(cat, lebesgue):
    x = sample_point(cat, lebesgue, 0, 1000)
    return x, sample_unstable_set(cat, lebesgue, x, 0.05, back_horizon=40, budget=10_000)


def test_torus_cloud_shape(cat_cloud):
    x, cloud = cat_cloud
    assert cloud.kind == "torus"
    assert cloud.admitted == len(cloud.points) == 10_000
    assert cloud.rejected == 0
    assert cloud.base is x


def test_torus_cloud_is_collinear(cat_cloud):
    _, cloud = cat_cloud
    assert cloud.collinearity_residual < 1e-9


def test_torus_admission_verified_definitionally(cat, cat_cloud):
    # exact integer backward orbits of the displacement must stay within delta
    # at every step and within the admission tolerance at the horizon
    x, cloud = cat_cloud
    Minv = np.array(cat.inverse_matrix, dtype=np.int64)
    xi = np.array(x.ints(), dtype=np.int64)
    sample = cloud.points[:: max(1, len(cloud.points) // 200)]
    disp = np.array([p.ints() for p in sample], dtype=np.int64) - xi[None, :]
    disp %= FIXED_DENOM
    cur = disp.copy()
    for i in range(cloud.back_horizon + 1):
        frac = cur / FIXED_DENOM
        frac -= np.round(frac)
        d = np.hypot(frac[:, 0], frac[:, 1])
        assert (d <= cloud.delta + 1e-15).all(), f"admission broken at back-step {i}"
        if i == cloud.back_horizon:
            assert (d <= cloud.admission_tolerance + 1e-15).all()
        cur = (cur @ Minv.T) % FIXED_DENOM


def test_torus_cloud_empty_below_resolution(cat, lebesgue):
    x = sample_point(cat, lebesgue, 0, 1000)
    with pytest.raises(EmptyCloud):
        sample_unstable_set(cat, lebesgue, x, 1e-8, back_horizon=40)


def test_delta_must_be_positive(cat, lebesgue):
    x = sample_point(cat, lebesgue, 0, 1000)
    with pytest.raises(ValueError):
        sample_unstable_set(cat, lebesgue, x, 0.0)


def test_no_unstable_sampling_for_isometries(translation, lebesgue):
    with pytest.raises(UnsupportedOracle):
        sample_unstable_set(translation, lebesgue, TorusPoint(0.1, 0.2), 0.05)


# ---------------------------------------------------------------------------
# unstable cloud sampling: shifts
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def shift_cloud():
    shift = FullShift(alphabet_size=2)
    oracle = BernoulliIID((0.5, 0.5))
    x = sample_point(shift, oracle, 0, 1000)
    return shift, oracle, x, sample_unstable_set(shift, oracle, x, 0.5, back_horizon=40, budget=10_000)


def test_dyadic_cloud_admits_everything(shift_cloud):
    # varying future coordinates can only shrink backward distances, so at
    # delta = 1/2 every enumerated word is admitted
    _, _, x, cloud = shift_cloud
    assert cloud.varied_window == (1, 13)  # 2^13 = 8192 <= budget < 2^14
    assert cloud.admitted == 8192
    assert cloud.rejected == 0
    assert cloud.diagnostics["m_delta"] == 1


def test_shift_admission_verified_definitionally(shift_cloud):
    shift, _, x, cloud = shift_cloud
    for p in cloud.points[:: 1024]:
        xx, yy = x, p
        for i in range(6):
            assert distance(shift, xx, yy) <= cloud.delta
            xx, yy = iterate(shift, xx, -1), iterate(shift, yy, -1)


def test_shift_cloud_window_guards(shift_cloud):
    shift, oracle, x, _ = shift_cloud
    with pytest.raises(WindowExhausted):
        sample_unstable_set(shift, oracle, x, 0.5, back_horizon=300)
    with pytest.raises(EmptyCloud):
        sample_unstable_set(shift, oracle, x, 2.0**-300, back_horizon=10)


def test_weighted_cloud_admission(weighted_shift, bern_half):
    x = sample_point(weighted_shift, bern_half, 0, 1000)
    cloud = sample_unstable_set(weighted_shift, bern_half, x, 0.5, back_horizon=20, budget=512)
    assert cloud.admitted >= 1
    assert cloud.varied_window[0] == cloud.diagnostics["m_delta"]
    for p in cloud.points[:: max(1, len(cloud.points) // 8)]:
        xx, yy = x, p
        for i in range(5):
            assert distance(weighted_shift, xx, yy) <= cloud.delta + 1e-12
            xx, yy = iterate(weighted_shift, xx, -1), iterate(weighted_shift, yy, -1)


# ---------------------------------------------------------------------------
# box-counting dimension
# ---------------------------------------------------------------------------


def test_torus_line_cloud_slope_near_one(cat, cat_cloud):
    _, cloud = cat_cloud
    scales = [0.05 * 2.0 ** (-j) for j in range(2, 8)]
    est = box_counting_dimension(cloud, scales, sys=cat)
    assert 0.95 <= est.slope <= 1.05
    assert est.monotone
    assert est.alt_slope is not None and 0.9 <= est.alt_slope <= 1.1
    assert est.method == "box_count"
    assert est.n_points == 10_000


def test_single_point_has_slope_zero(cat):
    cloud = PointCloud(
        points=[TorusPoint(0.3, 0.4)], base=TorusPoint(0.3, 0.4), delta=0.05,
        back_horizon=0, admission_tolerance=0.01, kind="torus", admitted=1, rejected=0,
    )
    est = box_counting_dimension(cloud, [0.01, 0.005, 0.0025, 0.00125], sys=cat)
    assert est.slope == 0.0
    assert est.ci == (0.0, 0.0)


def test_symbolic_counts_are_powers_of_two(shift_cloud):
    shift, _, _, cloud = shift_cloud
    scales = [2.0 ** (-k) for k in range(2, 10)]
    est = box_counting_dimension(cloud, scales, sys=shift)
    # window radius k frees exactly the varied coordinates 1..k
    assert est.counts == [2 ** min(k, 13) for k in range(2, 10)]
    assert abs(est.slope - 1.0) < 1e-6
    assert est.monotone


def test_too_few_points(cat):
    pts = [TorusPoint(0.1 * i, 0.2) for i in range(5)]
    cloud = PointCloud(
        points=pts, base=pts[0], delta=0.05, back_horizon=0,
        admission_tolerance=0.01, kind="torus", admitted=5, rejected=0,
    )
    with pytest.raises(TooFewPoints):
        box_counting_dimension(cloud, [0.01, 0.005, 0.0025, 0.00125], sys=cat)


def test_too_few_scales_above_floor(shift_cloud):
    shift, _, _, cloud = shift_cloud
    with pytest.raises(TooFewScales):
        box_counting_dimension(cloud, [2.0**-300, 2.0**-301, 2.0**-302, 2.0**-303], sys=shift)
    with pytest.raises(TooFewScales):
        box_counting_dimension(cloud, [0.1, 0.05, 0.025], sys=shift)


def test_empty_cloud_rejected(cat):
    cloud = PointCloud(
        points=[], base=None, delta=0.05, back_horizon=0,
        admission_tolerance=0.01, kind="torus", admitted=0, rejected=10,
    )
    with pytest.raises(EmptyCloud):
        box_counting_dimension(cloud, [0.01, 0.005, 0.0025, 0.00125], sys=cat)


# ---------------------------------------------------------------------------
# local mass dimension
# ---------------------------------------------------------------------------


def test_exact_conditional_masses_dyadic(shift_cloud):
    shift, oracle, x, cloud = shift_cloud
    cond = disintegrate_past(oracle, 12, x)
    probe = cloud.points[1]
    scales = [2.0 ** (-k) for k in range(2, 10)]
    est = local_dimension_lower(cloud, cond, probe, scales, sys=shift)
    # ball of radius 2^-k pins coords -k..k; the negatives are already fixed
    # by the conditioning, leaving k+1 free fair coins
    for k, ratio in zip(range(2, 10), est.per_scale_ratio):
        assert ratio == pytest.approx((k + 1) / k, abs=1e-12)
    assert est.slope == pytest.approx(1.0, abs=1e-12)
    assert est.liminf_proxy == pytest.approx(10 / 9, abs=1e-12)
    assert est.method == "local_mass"
    assert est.monotone


def test_point_mass_conditional_slope_zero(shift_cloud):
    shift, _, x, cloud = shift_cloud
    zero = type(x)(np.zeros_like(x.symbols), x.lo)
    cond = disintegrate_past(BernoulliIID((1.0, 0.0)), 12, zero)
    est = local_dimension_lower(cloud, cond, zero, [0.25, 0.125, 0.0625, 0.03125], sys=shift)
    assert est.slope == 0.0
    assert est.liminf_proxy == 0.0


def test_empirical_mass_slope_near_one(cat_cloud, cat):
    _, cloud = cat_cloud
    probe = cloud.points[1]
    scales = [0.05 * 2.0 ** (-j) for j in range(2, 8)]
    est = local_dimension_lower(cloud, None, probe, scales, sys=cat)
    assert 0.9 <= est.slope <= 1.1
    assert est.liminf_proxy > 0.5
    assert not est.dropped_scales


def test_mass_starvation(cat_cloud, cat):
    _, cloud = cat_cloud
    probe = cloud.points[1]
    with pytest.raises(MassStarvation):
        local_dimension_lower(cloud, None, probe, [1e-12, 5e-13, 2.5e-13, 1.25e-13], sys=cat)


def test_mass_needs_four_scales(cat_cloud, cat):
    _, cloud = cat_cloud
    with pytest.raises(TooFewScales):
        local_dimension_lower(cloud, None, cloud.points[1], [0.01, 0.005, 0.0025], sys=cat)


def test_exact_mass_needs_dyadic_metric(weighted_shift, bern_half):
    x = sample_point(weighted_shift, bern_half, 0, 1000)
    cloud = sample_unstable_set(weighted_shift, bern_half, x, 0.5, back_horizon=10, budget=64)
    cond = disintegrate_past(bern_half, 8, x)
    with pytest.raises(UnsupportedOracle):
        local_dimension_lower(cloud, cond, cloud.points[0], [0.5, 0.25, 0.125, 0.0625], sys=weighted_shift)


# ---------------------------------------------------------------------------
# exact cover counts (divergence regime)
# ---------------------------------------------------------------------------


def test_dyadic_cover_slopes_constant(dyadic_shift):
    cover = unstable_cover_counts(dyadic_shift, 0.5, octaves=4)
    assert cover["m_delta"] == 1
    assert cover["octave_slopes"] == pytest.approx([1.0, 1.0, 1.0, 1.0], abs=1e-12)
    assert not cover["strictly_increasing"]


def test_weighted_cover_radii_match_direct_search(weighted_shift):
    cover = unstable_cover_counts(weighted_shift, 0.5, octaves=4)
    w = weighted_shift.metric.weights
    for eps, k_got in zip(cover["scales"], cover["window_radii"]):
        k = 0
        while math.sqrt(2.0 * w.tail_sum(k)) > eps:
            k += 1
        assert k == k_got
    for k, lc in zip(cover["window_radii"], cover["log_counts"]):
        assert lc == pytest.approx(max(k - cover["m_delta"] + 1, 0) * LOG2, abs=1e-12)


def test_weighted_cover_slopes_strictly_increase(weighted_shift):
    cover = unstable_cover_counts(weighted_shift, 0.5, octaves=4)
    slopes = cover["octave_slopes"]
    assert cover["strictly_increasing"]
    assert all(b > 3.5 * a for a, b in zip(slopes, slopes[1:]))


# ---------------------------------------------------------------------------
# end-to-end verification
# ---------------------------------------------------------------------------


def test_verify_cat_map(cat, lebesgue):
    rep = verify_main_inequality(
        cat, lebesgue, base_points=6, cloud_budget=5000, chi_points=64, chi_probes=64, seed=0
    )
    assert rep.regime == "ratio"
    assert rep.h_value == pytest.approx(LOG_LAM, abs=1e-12)
    assert abs(rep.chi - LOG_LAM) / LOG_LAM < 0.02
    assert 0.9 <= rep.dim_estimate <= 1.1
    assert abs(rep.ratio - 1.0) < 0.05
    assert rep.holds and rep.slack >= -0.05
    assert rep.flags == []
    assert rep.disclaimer


def test_verify_dyadic_shift(dyadic_shift, bern_half):
    rep = verify_main_inequality(
        dyadic_shift, bern_half, base_points=5, cloud_budget=8192,
        chi_points=48, chi_probes=64, seed=0,
    )
    assert rep.regime == "ratio"
    assert rep.h_value == pytest.approx(LOG2, abs=1e-15)
    assert rep.dim_estimate == pytest.approx(1.0, abs=1e-6)
    assert abs(rep.ratio - 1.0) < 0.05
    assert rep.mass_liminf is not None and rep.mass_liminf > 1.0
    assert rep.holds


def test_verify_backward_direction(cat, lebesgue):
    rep = verify_main_inequality(
        cat, lebesgue, direction="backward", base_points=4, cloud_budget=5000,
        chi_points=48, chi_probes=64, seed=0,
    )
    assert rep.direction == "backward"
    assert rep.regime == "ratio"
    assert abs(rep.ratio - 1.0) < 0.05
    assert rep.holds


def test_verify_weighted_divergence(weighted_shift, bern_half):
    rep = verify_main_inequality(
        weighted_shift, bern_half, chi_points=32, chi_probes=48, n_schedule=(2, 4, 8),
        base_points=4, seed=0,
    )
    assert rep.regime == "divergence"
    assert rep.chi <= rep.chi_floor
    assert rep.ratio == math.inf
    assert rep.dim_estimate is None
    assert rep.divergence["strictly_increasing"]
    assert rep.holds


def test_verify_direction_validation(cat, lebesgue):
    with pytest.raises(ValueError):
        verify_main_inequality(cat, lebesgue, direction="sideways")


def test_verify_isometry_has_no_divergence_route(translation, lebesgue):
    # chi = 0 trips the floor, and the divergence criterion is undefined off
    # the shift systems
    with pytest.raises(UnsupportedOracle):
        verify_main_inequality(
            translation, lebesgue, base_points=2, chi_points=16, chi_probes=16,
            n_schedule=(2, 4),
        )


def test_verify_surfaces_total_failure(cat, lebesgue):
    with pytest.raises(EmptyCloud):
        verify_main_inequality(
            cat, lebesgue, delta=1e-9, base_points=3, chi_points=16, chi_probes=16,
            n_schedule=(2, 4),
        )
