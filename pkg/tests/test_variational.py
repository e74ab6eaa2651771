import numpy as np
import pytest
from oracles import grid_argmin, sampled_integral

from disclab.errors import ConstructionError, InvalidParameterError, RangeError
from disclab.piecewise import PiecewiseLinear
from disclab.variational import (
    QDOUBLEPRIME,
    QPRIME,
    AdmissibleParams,
    SegmentSpec,
    admissible_closed_form_total,
    assemble_extremal,
    build_qdoubleprime,
    build_qprime_admissible,
    build_qprime_strong,
    build_strong_part,
    check_admissible,
    check_condition_A,
    chi_lower_bound,
    extremal_layout,
    kink_point,
    layout_from_lengths,
    optimal_delta,
    optimal_slope_selector,
    oracle_minimize,
    q1_integral,
    q2_integral,
    slope_pair,
    strong_chi_range,
    strong_closed_form_total,
    strong_q_integral,
)

P1 = AdmissibleParams(3.5, 1)
P2 = AdmissibleParams(3.5, 2)


def quad_abs(f: PiecewiseLinear, jumps) -> float:
    return sampled_integral(lambda x: np.abs(f(x)), jumps, lo=f.lo, hi=f.hi)


def qprime_opt(chi, p):
    return build_qprime_admissible(SegmentSpec(0.0, chi, chi / 2, 0.5, 0.5), p)


def test_params():
    assert P2.b == 3.5 and P2.max_slope == 12.25 and P2.min_slope == 1.5 * 3.5
    assert P1.qprime_count == 1.5 and P1.qdoubleprime_count == 2
    for a in (3.0, 4.0, 2.5):
        with pytest.raises(RangeError):
            AdmissibleParams(a, 1)
    with pytest.raises(InvalidParameterError):
        AdmissibleParams(3.5, 0)


def test_slope_pair():
    assert slope_pair(0, P1) == (-3.5, -2.5)
    assert slope_pair(1, P1) == (-2.5, -1.5)
    assert slope_pair(2, P1) == (-1.5, -1.5)


def test_segment_spec_validation():
    with pytest.raises(InvalidParameterError):
        SegmentSpec(0, 1, 1.2, 0.5, 0.5)
    with pytest.raises(InvalidParameterError):
        SegmentSpec(0, 1, 0.5, 0.4, 0.4)  # Q' jump below 1
    with pytest.raises(InvalidParameterError):
        SegmentSpec(0, 1, 0.5, 0.5, 0.5, v=2.5)
    SegmentSpec(0, 1, 0.5, 0.2, 0.2, QDOUBLEPRIME)


# -- closed forms against constructed shapes ------------------------------


def test_q1_example():
    assert q1_integral(1 / 3, P1) == pytest.approx(0.0729166666, abs=1e-9)
    assert q1_integral(1 / 3, P1) == pytest.approx((1 + 4 / 3 - 7 / 3 - 7 / 9 + 49 / 36) / 8, abs=1e-15)
    assert qprime_opt(1 / 3, P1).integrate_abs() == pytest.approx(q1_integral(1 / 3, P1), abs=1e-12)


def test_q1_small_chi_limit():
    for p in (P1, P2):
        assert q1_integral(1e-9, p) == pytest.approx(p.a ** (1 - p.t) / 8, abs=1e-8)
    with pytest.raises(InvalidParameterError):
        q1_integral(0.0, P1)


def test_q1_t2_construction():
    # the t = 2 Q' part is only constructible for a^-2 <= chi <= 1/((a-2)a)
    lo, hi = 3.5 ** -2, 1 / P2.min_slope
    for chi in np.linspace(lo, hi, 7):
        f = qprime_opt(chi, P2)
        assert f.integrate_abs() == pytest.approx(q1_integral(chi, P2), abs=1e-10)
        assert quad_abs(f, [0, chi / 2, chi]) == pytest.approx(q1_integral(chi, P2), abs=1e-10)
    with pytest.raises(ConstructionError):
        qprime_opt(1 / 3, P2)


def test_q2_examples():
    assert q2_integral(0.25, P1) == 0.0234375
    assert q2_integral(0.25, P2) == 0.08203125
    assert q2_integral(0.0, P1) == 0.0
    with pytest.raises(InvalidParameterError):
        q2_integral(-0.1, P1)
    for p in (P1, P2):
        f = build_qdoubleprime(0.0, 0.25, p)
        assert quad_abs(f, [0, 0.125, 0.25]) == pytest.approx(q2_integral(0.25, p), abs=1e-10)


def test_strong_q_examples():
    assert strong_q_integral(1 / 3, P1) == pytest.approx(0.0763888888, abs=1e-9)
    lo, hi = strong_chi_range(P1)
    assert (lo, hi) == pytest.approx((1 / 3, 0.5))
    v = optimal_slope_selector(0, lo / 2, 0.5, P1)[0]
    assert v == pytest.approx(0.0, abs=1e-12)
    f = build_qprime_strong(SegmentSpec(0, lo, lo / 2, 0.5, 0.5, v=0.0, v_prime=0.0), P1)
    assert f.integrate_abs() == pytest.approx(strong_q_integral(lo, P1), abs=1e-12)
    with pytest.raises(RangeError):
        strong_q_integral(lo * (1 - 1e-6), P1)
    with pytest.raises(RangeError):
        strong_q_integral(hi * (1 + 1e-6), P1)


@pytest.mark.parametrize("p", [P1, P2, AdmissibleParams(3.9, 1)], ids=lambda p: f"a{p.a}-t{p.t}")
def test_strong_q_matches_selected_construction(p):
    lo, hi = strong_chi_range(p)
    for chi in np.linspace(lo, hi, 9):
        _, v = optimal_slope_selector(0, chi / 2, 0.5, p)
        f = build_qprime_strong(SegmentSpec(0, chi, chi / 2, 0.5, 0.5, v=v, v_prime=v), p)
        assert quad_abs(f, [0, chi / 2, chi]) == pytest.approx(strong_q_integral(chi, p), abs=1e-10)


# -- chi_a ---------------------------------------------------------------


def test_chi_examples():
    assert chi_lower_bound(3.5) == pytest.approx(46.5 / 288, abs=1e-15)
    assert chi_lower_bound(3.71866) == pytest.approx(0.169782, rel=1e-5)
    assert chi_lower_bound(3.71866) / (2 * np.log(3.71866)) == pytest.approx(0.0646363, abs=1e-7)
    # a = 3 itself is outside the open domain; the formula tends to 27/200
    assert chi_lower_bound(3 + 1e-12) == pytest.approx(0.135, abs=1e-10)
    with pytest.raises(RangeError):
        chi_lower_bound(3.0)


def test_chi_is_the_assembled_real_count_total():
    lo = strong_chi_range(P1)[0]
    assert 1.5 * strong_q_integral(lo, P1) + 2 * q2_integral((1 - 1.5 * lo) / 2, P1) == pytest.approx(
        chi_lower_bound(3.5), abs=1e-15)


@pytest.mark.parametrize("a", [3.1, 3.5, 3.71866, 3.9])
def test_totals_are_t_independent(a):
    vals = [strong_closed_form_total(AdmissibleParams(a, t)) for t in (1, 2, 3, 4)]
    np.testing.assert_allclose(vals, chi_lower_bound(a), atol=1e-12)
    adm = [admissible_closed_form_total(AdmissibleParams(a, t)) for t in (1, 2, 3)]
    np.testing.assert_allclose(adm, adm[0], atol=1e-12)
    assert adm[0] <= vals[0] + 1e-12


# -- stationary points ----------------------------------------------------


def test_optimal_delta_examples():
    for chi in (0.3, 0.4):
        assert optimal_delta(0, chi, chi / 2, P1) == 0.5
    assert optimal_delta(0, 0.4, 0.1, P1) == pytest.approx(0.35)
    assert optimal_delta(0, 0.4, 0.3, P1) == pytest.approx(0.65)
    with pytest.raises(InvalidParameterError):
        optimal_delta(0, 0.4, 0.5, P1)


def part_area(alpha, beta, gamma, delta, p, strong=False, v=(0.0, 0.0)):
    try:
        seg = SegmentSpec(alpha, beta, gamma, delta, 1 - delta, QPRIME, *v)
        f = build_qprime_strong(seg, p) if strong else build_qprime_admissible(seg, p)
    except (ConstructionError, InvalidParameterError):
        return None
    return f.integrate_abs()


@pytest.mark.parametrize("gamma", [0.1, 0.15, 0.18, 0.2, 0.24])
def test_optimal_delta_grid_scan(gamma):
    want = optimal_delta(0, 0.4, gamma, P1)
    got, _ = grid_argmin(lambda d: part_area(0, 0.4, gamma, d, P1), 0.0, 1.0)
    assert got == pytest.approx(want, abs=1e-3 + 1e-12)


def test_midpoint_gamma_grid_scan():
    chi = 0.4

    def best(gamma):
        return part_area(0, chi, gamma, optimal_delta(0, chi, gamma, P1), P1)

    got, _ = grid_argmin(best, 1e-3, chi - 1e-3)
    assert got == pytest.approx(chi / 2, abs=1e-3)


def test_equal_split_grid_scan():
    total = 0.7
    area = lambda l1: qprime_opt(l1, P1).integrate_abs() + qprime_opt(total - l1, P1).integrate_abs()
    got, _ = grid_argmin(area, 0.3, 0.4)
    assert got == pytest.approx(total / 2, abs=1e-3)
    qq = lambda l1: (build_qdoubleprime(0, l1, P1).integrate_abs()
                     + build_qdoubleprime(0, total - l1, P1).integrate_abs())
    got, _ = grid_argmin(qq, 0.05, 0.65)
    assert got == pytest.approx(total / 2, abs=1e-3)


def test_selector_examples():
    lo = strong_chi_range(P1)[0]
    assert optimal_slope_selector(0, lo / 2, 0.5, P1)[0] == pytest.approx(0, abs=1e-12)
    v, vc = optimal_slope_selector(0, 0.2, 0.6, P1)
    assert v == pytest.approx(0, abs=1e-12) and vc == pytest.approx(0, abs=1e-12)
    v, vc = optimal_slope_selector(0, 0.5, 0.6, P1)
    assert (v, vc) == (pytest.approx(1.8), 1.0)
    with pytest.raises(InvalidParameterError):
        optimal_slope_selector(0.2, 0.2, 0.6, P1)
    with pytest.raises(InvalidParameterError):
        optimal_slope_selector(0, 0.2, 0.0, P1)


def left_side_area(L, delta, v, p):
    # area of a strong part left of its jump; the right side is held fixed
    try:
        f = build_strong_part(SegmentSpec(0, 2 * L, L, delta, 2.5 * L, QDOUBLEPRIME, v, 0.5), p)
    except ConstructionError:
        return None
    return sampled_integral(lambda x: np.abs(f(x)), [0, L], samples=4000, lo=0, hi=L)


@pytest.mark.parametrize("L, delta", [(0.2, 0.45), (0.2, 0.5), (0.2, 0.6), (0.3, 0.6), (0.3, 0.5)])
def test_selector_grid_scan(L, delta):
    _, want = optimal_slope_selector(0, L, delta, P1)
    got, _ = grid_argmin(lambda v: left_side_area(L, delta, v, P1), 0.0, 1.0)
    assert got == pytest.approx(want, abs=1e-3 + 1e-12)


# -- kinks ----------------------------------------------------------------


def test_kink_examples():
    s_m, s_M = slope_pair(0, P1)
    assert kink_point(0, 0.2, 0.6, s_M, s_m) == pytest.approx(0.1)
    assert kink_point(0, 0.2, 0.2 * -s_m, s_M, s_m) == pytest.approx(0.0, abs=1e-15)
    assert kink_point(0, 0.2, 0.2 * -s_M, s_M, s_m) == pytest.approx(0.2)
    with pytest.raises(ConstructionError):
        kink_point(0, 0.2, 0.8, s_M, s_m)
    f = build_qprime_strong(SegmentSpec(0, 0.4, 0.2, 0.6, 0.6), P1)
    assert f.xs[1] == pytest.approx(0.1)
    assert f(0.2) == pytest.approx(-0.6) and f.right_limit(0.2) == pytest.approx(0.6)
    with pytest.raises(ConstructionError, match="left of the jump"):
        build_qprime_strong(SegmentSpec(0, 0.4, 0.2, 0.8, 0.6), P1)
    with pytest.raises(ConstructionError, match="right of the jump"):
        build_qprime_strong(SegmentSpec(0, 0.4, 0.2, 0.6, 0.8), P1)
    with pytest.raises(InvalidParameterError):
        build_qprime_strong(SegmentSpec(0, 0.4, 0.2, 0.3, 0.3, QDOUBLEPRIME), P1)


def test_continuity_of_constructed_parts():
    rng = np.random.default_rng(7)
    for _ in range(50):
        chi = rng.uniform(*strong_chi_range(P1))
        _, v = optimal_slope_selector(0, chi / 2, 0.5, P1)
        f = build_qprime_strong(SegmentSpec(0, chi, chi / 2, 0.5, 0.5, v=v, v_prime=v), P1)
        assert f(0) == 0 and abs(f(chi)) < 1e-12
        jumps = np.abs(f.jumps) > 1e-12
        assert jumps.sum() == 1


# -- admissibility --------------------------------------------------------


def test_assembled_minimiser_is_admissible():
    rep = check_admissible(assemble_extremal(P1, "admissible"), P1)
    assert rep.admissible, rep.to_json()


def test_zero_function_fails_iv_and_v():
    rep = check_admissible(PiecewiseLinear.constant(0.0), P1)
    assert rep.flags["i"] and rep.flags["ii"] and rep.flags["iii"]
    assert not rep.flags["iv"] and not rep.flags["v"]


def test_overwritten_slope_fails_v_with_witness():
    f = assemble_extremal(P1, "admissible")
    slopes = f.slopes.copy()
    slopes[2] = -P1.min_slope / 2
    g = PiecewiseLinear(f.xs, slopes, f.starts, f.origin)
    rep = check_admissible(g, P1)
    assert not rep.flags["v"]
    assert rep.witnesses["v"] == (pytest.approx(f.xs[2]), pytest.approx(-0.75))


def test_condition_A_examples():
    steep = PiecewiseLinear(np.linspace(0, 1, 5), [-3.5] * 4, [0, 0.125, 0.25, 0.375], 0.0)
    rep = check_condition_A(steep, P1)
    assert rep.flags["A"]
    two = PiecewiseLinear([0, 0.1, 0.2], [-3.5, -1.5], [0.0, -0.35], 0.0)
    rep = check_condition_A(two, P1)
    assert not rep.flags["A"]
    assert rep.witnesses["A"][1] == pytest.approx(2.0)
    strong = assemble_extremal(P1, "strong")
    assert check_condition_A(strong, P1).strongly_admissible
    assert set(np.round(strong.slopes, 12)) == {-3.5, -2.5, -1.5}


def test_strong_q_parts_use_steepest_and_next_slope():
    lay = extremal_layout(P2, "strong")
    f = lay.function()
    for s in lay.parts:
        if s.kind == QPRIME:
            inside = (f.xs[:-1] >= s.alpha - 1e-12) & (f.xs[1:] <= s.beta + 1e-12)
            got = set(np.round(f.slopes[inside], 9))
            assert got <= {-P2.max_slope, -(P2.a - 1) * P2.b}


# -- assembly -------------------------------------------------------------


def test_assembly_examples():
    strong = assemble_extremal(P1, "strong").integrate_abs()
    assert strong >= chi_lower_bound(3.5) - 0.02
    adm = assemble_extremal(P1, "admissible").integrate_abs()
    assert adm <= strong
    for t in (1, 2, 3):
        p = AdmissibleParams(3.71866, t)
        a_int = assemble_extremal(p, "admissible").integrate_abs()
        s_int = assemble_extremal(p, "strong").integrate_abs()
        assert a_int <= s_int + 1e-12


def test_admissible_integer_count_gap():
    # rounding the part counts is the only gap to the real-count total; it shrinks with t
    ref = admissible_closed_form_total(P2)
    got = assemble_extremal(P2, "admissible").integrate_abs()
    assert abs(got - ref) / ref < 0.06
    p3 = AdmissibleParams(3.5, 3)
    ref3 = admissible_closed_form_total(p3)
    assert abs(assemble_extremal(p3, "admissible").integrate_abs() - ref3) / ref3 <= 0.02


def test_assembled_layout_tiles_unit_interval():
    for p in (P1, P2, AdmissibleParams(3.1, 2), AdmissibleParams(3.9, 3)):
        for mode in ("admissible", "strong"):
            lay = extremal_layout(p, mode)
            f = lay.function()
            assert f.lo == 0 and f.hi == 1
            assert check_admissible(f, p).admissible
            assert lay.n_qprime >= p.qprime_count


def test_assembly_errors():
    with pytest.raises(InvalidParameterError):
        extremal_layout(P1, "weak")
    spec = [dict(kind=QPRIME, length=0.5, g=0.5, delta=0.5, tau=0.5)] * 3
    with pytest.raises((ConstructionError, InvalidParameterError)):
        layout_from_lengths(P1, "strong", spec).function()


# -- oracles --------------------------------------------------------------


def test_structured_oracle_t_independent():
    vals = [oracle_minimize(AdmissibleParams(3.5, t), "structured", 64).value for t in (1, 2, 3)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-9)
    assert vals[0] == pytest.approx(chi_lower_bound(3.5), rel=0.01)


def test_perturbed_oracle_detects_a_suboptimal_baseline():
    from disclab.variational import _relative

    rel = _relative(extremal_layout(P1, "strong"))
    for d in rel:
        if d["kind"] == QPRIME:
            d["delta"] = d["tau"] = 0.55
    worse = layout_from_lengths(P1, "strong", rel)
    res = oracle_minimize(P1, "perturbed", 32, baseline=worse)
    assert res.improved > 0 and res.value < res.baseline


def test_oracle_errors():
    with pytest.raises(InvalidParameterError):
        oracle_minimize(P1, "annealing")
    with pytest.raises(InvalidParameterError):
        oracle_minimize(P1, "structured", 4)
