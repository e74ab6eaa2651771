import numpy as np
import pytest
from oracles import brute_envelope, disc_matrix, sampled_integral

from disclab.envelope import (
    WindowScheme,
    argmax_indices,
    envelope_difference,
    f_function,
    g_function,
    integrate_abs,
    jump_census,
    p_integral,
    split_terms,
    window_envelope,
    window_spread,
)
from disclab.errors import InvalidParameterError
from disclab.piecewise import PiecewiseLinear
from disclab.points import PointSet, kronecker, van_der_corput
from disclab.variational import AdmissibleParams, check_condition_A, chi_lower_bound

A_STAR = 3.71866
VDC = PointSet(van_der_corput(4096))
KRON = PointSet(kronecker(4096))


def test_scheme_windows():
    s = WindowScheme(A_STAR, 2)
    assert (s.N, s.m) == (13, 3)
    assert s.A0 == (1, 3) and s.A1 == (4, 10) and s.A2 == (11, 13)
    assert WindowScheme(3.5, 2).N == 12
    assert [WindowScheme(A_STAR, t).N for t in range(1, 6)] == [3, 13, 51, 191, 711]
    for a, t in [(3.0, 1), (4.0, 1), (3.5, 0)]:
        with pytest.raises(InvalidParameterError):
            WindowScheme(a, t)


def test_single_point_envelope():
    e = window_envelope(PointSet([0.5]), (1, 1), "max")
    assert e(0.25) == -0.25
    assert e(0.5) == -0.5
    assert e(0.75) == 0.25
    assert jump_census(e, 0.5) == (1, 1)


def test_two_point_example():
    e = window_envelope(PointSet([0.25, 0.75]), (1, 2), "max")
    assert e(0.5) == 0.5


def test_singleton_window_max_equals_min():
    rng = np.random.default_rng(0)
    ps = PointSet(rng.random(20))
    for n in (1, 7, 20):
        hi, lo = window_envelope(ps, (n, n), "max"), window_envelope(ps, (n, n), "min")
        x = rng.random(100)
        np.testing.assert_allclose(hi(x), lo(x), atol=1e-13)


@pytest.mark.parametrize("seed", range(25))
def test_envelope_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 60))
    vals = rng.random(N)
    if seed % 3 == 0:
        vals = np.round(vals * 8) / 8 % 1.0  # repeated values
    ps = PointSet(vals)
    lo = int(rng.integers(1, N + 1))
    hi = int(rng.integers(lo, N + 1))
    x = np.concatenate([rng.random(300), vals, [0.0, 1.0]])
    for mode in ("max", "min"):
        env = window_envelope(ps, (lo, hi), mode)
        np.testing.assert_allclose(env(x), brute_envelope(vals, (lo, hi), x, mode), atol=1e-12)
        # right limits: counts include the point itself
        D = disc_matrix(vals[:hi], np.nextafter(vals, 2.0))[lo - 1:hi]
        want = D.max(axis=0) if mode == "max" else D.min(axis=0)
        np.testing.assert_allclose(env.right_limit(vals), want, atol=1e-9)


def test_envelope_errors():
    ps = PointSet([0.1, 0.2])
    with pytest.raises(InvalidParameterError):
        window_envelope(ps, (2, 1))
    with pytest.raises(InvalidParameterError):
        window_envelope(ps, (1, 3))
    with pytest.raises(InvalidParameterError):
        window_envelope(ps, (1, 2), "median")


def test_difference_identities():
    e = window_envelope(VDC, (5, 9), "max")
    assert envelope_difference(e, e).max_abs() == 0.0
    zero = PiecewiseLinear.constant(0.0)
    x = np.linspace(0, 1, 257)
    np.testing.assert_array_equal(envelope_difference(e, zero)(x), e(x))


def test_census_zero_function():
    assert jump_census(PiecewiseLinear.constant(0.0), 1.0) == (0, 0)


@pytest.mark.parametrize("t", [2, 3])
def test_census_example(t):
    s = WindowScheme(A_STAR, t)
    _, big = jump_census(f_function(VDC, s), 1.0)
    assert big >= s.N - 2 * s.m


def test_integrate_abs_examples():
    assert integrate_abs(PiecewiseLinear.constant(0.0)) == 0.0
    assert integrate_abs(PiecewiseLinear.line(-1.0)) == 0.5
    s = WindowScheme(3.5, 1)
    f = f_function(VDC, s)
    vals = VDC.values[:s.N]
    brute = lambda x: np.abs(brute_envelope(vals, s.A2, x) - brute_envelope(vals, s.A0, x))
    assert integrate_abs(f) == pytest.approx(sampled_integral(brute, vals), abs=1e-6)


def test_p_integral_examples():
    assert p_integral(PointSet([0.5]), 1) == 0.0
    s = WindowScheme(A_STAR, 1)
    vals = VDC.values[:s.N]
    spread = lambda x: brute_envelope(vals, s.A, x) - brute_envelope(vals, s.A, x, "min")
    assert p_integral(VDC, s) == pytest.approx(sampled_integral(spread, vals), abs=1e-6)
    assert p_integral(VDC, WindowScheme(A_STAR, 3)) >= 3 * chi_lower_bound(A_STAR)
    with pytest.raises(InvalidParameterError):
        p_integral(PointSet([0.5, 0.1]), WindowScheme(A_STAR, 2))


@pytest.mark.parametrize("ps", [VDC, KRON], ids=["vdc", "kronecker"])
@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_real_f_structure(ps, t):
    s = WindowScheme(A_STAR, t)
    f = f_function(ps, s)
    mag = -f.slopes
    assert np.all(mag >= s.N - 2 * s.m + 1 - 1e-9) and np.all(mag <= s.N - 1 + 1e-9)
    assert np.all(f.jumps >= -1e-9)
    assert abs(f(0.0)) < 1e-12 and abs(f(1.0)) < 1e-9
    # slope spread on every maximal jump-free interval stays within m
    cuts = np.flatnonzero(f.jumps > 1e-9)
    for lo, hi in zip(np.concatenate([[0], cuts]), np.concatenate([cuts, [mag.size]])):
        if hi > lo:
            assert np.ptp(mag[lo:hi]) <= s.m + 1e-9
    g = g_function(ps, s)
    assert np.all(-g.slopes >= s.N - 2 * s.m + 1 - 1e-9)


@pytest.mark.parametrize("ps", [VDC, KRON], ids=["vdc", "kronecker"])
@pytest.mark.parametrize("t", [2, 3])
def test_real_f_is_strongly_admissible(ps, t):
    rep = check_condition_A(f_function(ps, WindowScheme(A_STAR, t)), AdmissibleParams(A_STAR, t))
    assert rep.strongly_admissible, rep.to_json()


def test_argmax_moves_monotonically_between_points():
    ps = PointSet(kronecker(60))
    for mode, direction in (("max", -1), ("min", 1)):
        env = window_envelope(ps, (10, 60), mode)
        n = argmax_indices(env)
        assert np.all((n >= 10) & (n <= 60))
        breaks = np.sort(ps.values)
        cell = np.searchsorted(breaks, env.xs[:-1], side="right")
        for c in np.unique(cell):
            run = n[cell == c]
            assert np.all(direction * np.diff(run) >= 0)


@pytest.mark.parametrize("ps", [VDC, KRON], ids=["vdc", "kronecker"])
@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_integrated_splitting_inequality(ps, t):
    terms = split_terms(ps, WindowScheme(A_STAR, t))
    assert terms.p >= terms.rhs - 1e-12
    assert terms.spread2 >= 0 and terms.spread0 >= 0


def test_spread_is_max_minus_min():
    ps = PointSet(kronecker(40))
    x = np.random.default_rng(2).random(500)
    sp = window_spread(ps, (3, 40))
    want = brute_envelope(ps.values, (3, 40), x) - brute_envelope(ps.values, (3, 40), x, "min")
    np.testing.assert_allclose(sp(x), want, atol=1e-12)
    assert np.all(sp(x) >= -1e-12)
