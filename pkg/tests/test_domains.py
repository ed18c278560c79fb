import math

import numpy as np
import pytest
import sympy as sp
from scipy.optimize import linear_sum_assignment
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiherm import domains
from quasiherm.domains import (
    Axis,
    beta_critical,
    classify_spectrum,
    ep_events,
    evaluate_G,
    fusion_offset,
    nine_quartic,
    real_roots,
    reality_count,
    scan_grid,
    secular_quartic,
    secular_roots,
    t_crit,
    trace_zero_line,
)
from quasiherm.errors import NotFoundError, ParameterError
from quasiherm.metric import positivity, three_level_metric
from quasiherm.models import (
    ModelSpec,
    NineLevelParams,
    ThreeLevelParams,
    TwoLevelParams,
    build_nine,
    build_three_level,
    build_two_level,
)
from quasiherm.numerics import PolyCoeffs, char_poly, eig, poly_discriminant

z_sym, g_sym, t_sym, E_sym = sp.symbols("z g t E")

# Boundary polynomial display, term by term; the truncation keeps the first
# row of low-order terms.
G_DISPLAY = (
    60 * g_sym**2 * z_sym**2 - 6 * z_sym * g_sym**4 - 12 * g_sym**2 * z_sym**3 - z_sym**6
    - 162 * z_sym + 27 * g_sym**2 - 18 * g_sym**4 - g_sym**6 - 153 * z_sym**2
    - 3 * g_sym**4 * z_sym**2 - 3 * g_sym**2 * z_sym**4 - 6 * z_sym**5 - 30 * z_sym**4
    - 80 * z_sym**3 + 144 * z_sym * g_sym**2
)
G0_DISPLAY = (
    27 * g_sym**2 - 162 * z_sym - 18 * g_sym**4 + 144 * z_sym * g_sym**2 - g_sym**6
    - 153 * z_sym**2 - 6 * z_sym * g_sym**4
)

# Reference coefficient table of the quartic in z = E^2, ascending powers of
# t for z^3, z^2, z^1, z^0. It describes the nine-level family with t -> -t.
DISPLAYED_QUARTIC = (
    (-100, -20, 2),
    (3750, 500, -80, -34),
    (-62500, 12500, 4810, 360, 158),
    (390625, -312500, -23500, 22450, -3221, -126),
)


def H3(z, g):
    return build_three_level(ThreeLevelParams(z, g))


def nine(t, beta=1.0):
    return build_nine(NineLevelParams.family(t, beta))


def symbolic_nine_quartic():
    """Characteristic polynomial of the nine-level family at beta_env = 1.

    For a tridiagonal matrix with couplings +v above and -v below the
    diagonal only the products -v^2 enter, and those are polynomial in t.
    """
    diag = [-8, -6, -4, -2, 0, 2, 4, 6, 8]
    b2 = 3 + 3 * t_sym
    c2 = 4 + 4 * t_sym
    d2 = 3 + 3 * t_sym
    a2 = t_sym**2
    sq = [b2, c2, d2, a2, a2, d2, c2, b2]
    p_prev, p = sp.Integer(1), E_sym - diag[0]
    for k in range(1, 9):
        p_prev, p = p, sp.expand((E_sym - diag[k]) * p + sq[k - 1] * p_prev)
    q, rem = sp.div(p, E_sym, E_sym)
    assert rem == 0
    return sp.Poly(sp.expand(q.subs(E_sym, sp.sqrt(z_sym))), z_sym)


class TestClassify:
    def test_examples(self):
        assert classify_spectrum(eig(np.diag([-1.0, 1.0]))).kind == "real_nondegenerate"
        assert classify_spectrum(eig(build_two_level(TwoLevelParams(1.0)))).kind == "degenerate"
        c = classify_spectrum(eig(build_two_level(TwoLevelParams(2.0))))
        assert c.kind == "complex" and c.real_count == 0
        assert c.max_abs_imag == pytest.approx(math.sqrt(3))

    def test_reality_count(self):
        assert reality_count(build_two_level(TwoLevelParams(0.5))) == 2
        assert reality_count(build_two_level(TwoLevelParams(2.0))) == 0
        assert reality_count(nine(0.05)) < 9

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-0.9, 0.2), st.floats(0, 3.5))
    def test_nine_level_nonzero_count_even(self, t, beta):
        assert (reality_count(nine(t, beta)) - 1) % 2 == 0


class TestBoundaryPolynomial:
    def test_matches_display(self):
        f = sp.lambdify((z_sym, g_sym), G_DISPLAY)
        f0 = sp.lambdify((z_sym, g_sym), G0_DISPLAY)
        rng = np.random.default_rng(0)
        for z, g in rng.uniform(-3, 3, size=(50, 2)):
            assert evaluate_G(z, g) == pytest.approx(f(z, g), rel=1e-12, abs=1e-9)
            assert evaluate_G(z, g, truncated=True) == pytest.approx(f0(z, g), rel=1e-12, abs=1e-9)

    def test_is_quarter_discriminant(self):
        H = sp.Matrix([[-1, z_sym + 1, 0], [-(z_sym + 1), 1, g_sym], [0, -g_sym, 3]])
        p = sp.Poly(H.charpoly(E_sym).as_expr(), E_sym)
        assert sp.expand(sp.discriminant(p, E_sym) - 4 * G_DISPLAY) == 0

    def test_origin_and_evenness(self):
        assert evaluate_G(0.0, 0.0) == 0.0
        rng = np.random.default_rng(1)
        zs, gs = rng.uniform(-5, 5, size=(2, 100))
        np.testing.assert_array_equal(evaluate_G(zs, gs), evaluate_G(zs, -gs))

    def test_vectorized(self):
        zs = np.linspace(-2, 1, 7)
        np.testing.assert_allclose(evaluate_G(zs, 0.3), [evaluate_G(z, 0.3) for z in zs])

    def test_sign_agrees_with_numerical_discriminant(self):
        for z in np.linspace(-2.9, 0.9, 15):
            for g in np.linspace(-1.4, 1.4, 15):
                G = evaluate_G(z, g)
                d = poly_discriminant(char_poly(H3(z, g)))
                if abs(G) > 1e-6 * domains.G_scale(z, g):
                    assert np.sign(d) == np.sign(G)
                    assert (G > 0) == eig(H3(z, g)).is_real()


class TestTrace:
    def test_single_root(self):
        tr = trace_zero_line(lambda lam: lam**2 - 1, [(0.0, 2.0)], resolution=50)
        assert len(tr) == 1
        assert tr.points[0][0] == pytest.approx(1.0, abs=1e-9)
        assert tr.is_within_tolerance()

    def test_exact_zero_on_node(self):
        tr = trace_zero_line(lambda lam: lam**2 - 1, [(0.0, 2.0)], resolution=3)
        assert tr.points == [(1.0,)]

    def test_no_crossing_is_empty(self):
        tr = trace_zero_line(lambda x: x**2 + 1, [(-1.0, 1.0)], resolution=20)
        assert len(tr) == 0

    def test_pole_is_dropped(self):
        tr = trace_zero_line(lambda x: 1.0 / x, [(-1.0, 1.0)], resolution=20)
        assert len(tr) == 0

    def test_G_trace_tolerance(self):
        tr = trace_zero_line(evaluate_G, ((-3.0, 1.0), (-1.5, 1.5)), resolution=81, field_name="G")
        assert len(tr) > 50
        for (z, g), v, s in zip(tr.points, tr.values, tr.scales):
            assert v == evaluate_G(z, g)
            assert abs(v) <= 1e-9 * s

    def test_G_and_G0_agree_near_origin_only(self):
        near = trace_zero_line(lambda z: evaluate_G(z, 0.2), [(-0.5, 0.5)], resolution=101)
        near0 = trace_zero_line(lambda z: evaluate_G(z, 0.2, True), [(-0.5, 0.5)], resolution=101)
        assert len(near) == len(near0) == 1
        assert abs(near.points[0][0] - near0.points[0][0]) < 1e-3
        # along g = 0.5 the left branches differ by more than a unit of z
        far = trace_zero_line(lambda z: evaluate_G(z, 0.5), [(-4.0, 1.0)], resolution=201)
        far0 = trace_zero_line(lambda z: evaluate_G(z, 0.5, True), [(-4.0, 1.0)], resolution=201)
        assert len(far) == len(far0) == 2
        assert abs(far.points[0][0] - far0.points[0][0]) > 1.0
        assert abs(far.points[1][0] - far0.points[1][0]) < 1e-2

    def test_window_validation(self):
        with pytest.raises(ParameterError):
            trace_zero_line(evaluate_G, ((0, 1), (0, 1), (0, 1)))


class TestSecularQuartic:
    def test_symbolic_oracle(self):
        q = symbolic_nine_quartic()
        want = [sp.Poly(c, t_sym) for c in q.all_coeffs()[1:]]  # z^3 .. z^0
        for w, coeffs in zip(want, domains._SECULAR_T_COEFFS):
            assert [int(c) for c in reversed(w.all_coeffs())] == list(coeffs)

    def test_displayed_table_is_mirror_image(self):
        for t in (-0.7, -0.2, 0.1, 0.35):
            shown = [sum(c * t**k for k, c in enumerate(row)) for row in DISPLAYED_QUARTIC]
            ours = secular_quartic(-t).coeffs[:4][::-1]
            np.testing.assert_allclose(shown, ours, rtol=1e-14)

    def test_t0_is_binomial(self):
        p = secular_quartic(0)
        assert p.coeffs == (390625, -62500, 3750, -100, 1)
        assert all(isinstance(c, int) for c in p.coeffs)
        assert PolyCoeffs.from_descending(np.poly([25, 25, 25, 25])).coeffs == tuple(float(c) for c in p.coeffs)

    def test_roots_match_eigenvalues(self):
        for t in np.linspace(-0.9, 0.2, 23):
            if abs(t) < 1e-3:
                continue  # defective quadruplets: eigenvalues only good to eps**(1/4)
            ev = eig(nine(t)).eigenvalues
            sq = (ev[np.argsort(np.abs(ev))][1:]) ** 2  # drop the level at zero
            got = np.repeat(secular_roots(t), 2)  # +-E share one z
            cost = np.abs(got[:, None] - sq[None, :])
            rows, cols = linear_sum_assignment(cost)
            assert np.max(cost[rows, cols] / np.abs(sq[cols])) <= 1e-8

    def test_general_beta_path_agrees(self):
        for t in (-0.5, -0.1, 0.1):
            np.testing.assert_allclose(nine_quartic(t, 1.0).coeffs, secular_quartic(t).coeffs, rtol=1e-10, atol=1e-8)

    def test_negative_t_roots_real(self):
        for t in np.linspace(-0.9, -0.01, 20):
            assert len(real_roots(secular_roots(t))) == 4

    def test_positive_t_complexifies(self):
        assert len(real_roots(secular_roots(0.05))) < 4


class TestCriticalCoupling:
    def test_t_crit_weak_coupling(self):
        assert abs(t_crit(1.0)) <= 1e-4

    def test_t_crit_strong_coupling(self):
        assert t_crit(2.75) == pytest.approx(-0.004, abs=2e-3)

    def test_t_crit_just_below_fusion(self):
        assert t_crit(2.73) <= 1e-4

    def test_events_are_refined(self):
        for e in ep_events(2.75):
            lo, hi = e.t - 2e-6, e.t + 2e-6
            assert domains.nine_reality_count(lo, 2.75) == e.count_before
            assert domains.nine_reality_count(hi, 2.75) == e.count_after

    def test_fusion_offset_sign(self):
        assert fusion_offset(2.7) > 0
        assert fusion_offset(2.75) < 0

    def test_beta_critical(self):
        assert beta_critical((2.6, 2.9)) == pytest.approx(2.738, abs=5e-3)

    def test_beta_critical_not_bracketed(self):
        with pytest.raises(NotFoundError):
            beta_critical((0.5, 1.5))

    def test_bad_window(self):
        with pytest.raises(ParameterError):
            ep_events(1.0, window=(-1.5, 0.1))


class TestScan:
    def test_two_level_closed_form_all_inside(self):
        res = scan_grid(
            ModelSpec("two_level", {}),
            (Axis("lambda", -0.99, 0.99, 21), Axis("s", -10, 10, 11)),
        )
        assert len(res.cells) == 21 * 11
        assert res.flag_grid("in_D").all()

    def test_two_level_outside_strip(self):
        res = scan_grid(ModelSpec("two_level", {}), (Axis("lambda", 1.01, 3, 9), Axis("s", -1, 1, 3)))
        assert not res.flag_grid("in_DH").any()
        assert not res.flag_grid("in_D").any()

    def test_three_level_positivity_rectangle(self):
        res = scan_grid(ModelSpec("three_level", {}), (Axis("z", -1.5, -0.5, 11), Axis("g", -0.5, 0.5, 11)))
        assert res.flag_grid("in_DTheta").all()
        assert res.flag_grid("in_D").all()

    def test_three_level_positivity_map_matches_direct(self):
        res = scan_grid(ModelSpec("three_level", {}), (Axis("z", -3, 1, 17), Axis("g", -1.5, 1.5, 13)))
        for c in res.cells:
            T = three_level_metric(c.p1, c.p2, 1, 1, 1)
            assert c.flags.in_DTheta == positivity(T).is_pd
            assert c.min_theta_eig == positivity(T).min_eigenvalue
        grid = res.flag_grid("in_DTheta")
        assert grid.any() and not grid.all()

    def test_row_major_order(self):
        res = scan_grid(ModelSpec("three_level", {}), (Axis("z", 0, 1, 3), Axis("g", 0, 2, 5)))
        assert [(c.p1, c.p2) for c in res.cells[:6]] == [(0, 0), (0, 0.5), (0, 1), (0, 1.5), (0, 2), (0.5, 0)]
        assert res.cell(1, 0) is res.cells[5]

    def test_invalid_cells_continue(self):
        res = scan_grid(
            ModelSpec("chain", {"N": 2, "G": (1.0,)}),
            (Axis("t", 0, 2, 5), Axis("beta_m", 0.5, 1, 2)),
            metric_rule="fixed-weights", weights=(1.0, 1.0),
        )
        valid = [c.valid for c in res.cells]
        assert valid[:6] == [True] * 6 and not any(valid[6:])
        assert all(c.real_count == -1 for c in res.cells[6:])

    def test_threads_identical(self):
        args = (ModelSpec("three_level", {}), (Axis("z", -3, 1, 15), Axis("g", -1.5, 1.5, 15)))
        assert scan_grid(*args, threads=1) == scan_grid(*args, threads=4)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"axes": (Axis("z", 0, 1, 2),)},
            {"axes": (Axis("z", 0, 1, 2), Axis("z", 0, 1, 2))},
            {"axes": (Axis("z", 0, 1, 2), Axis("q", 0, 1, 2))},
            {"axes": (Axis("z", 0, 1, 2), Axis("g", 0, 1, 2)), "metric_rule": "best"},
            {"axes": (Axis("z", 0, 1, 2), Axis("g", 0, 1, 2)), "metric_rule": "fixed-weights"},
        ],
    )
    def test_rejects_bad_setup(self, kwargs):
        with pytest.raises(ParameterError):
            scan_grid(ModelSpec("three_level", {}), **kwargs)

    def test_closed_form_needs_supported_family(self):
        with pytest.raises(ParameterError):
            scan_grid(ModelSpec("robin_lattice", {"N": 4}), (Axis("lambda", 0, 1, 2), Axis("mu", 0, 1, 2)))
