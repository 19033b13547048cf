import math

import pytest

from torusgreen import lattice, moduli, weier

# frozen from the bisection route at tol = 1e-12, cross checked against the
# hessian determinant degeneracy of the half period 1/2 on the rhombic line
B0_FROZEN = 0.35472989252248
B1_FROZEN = 0.70476158133267


def test_thresholds_frozen_digits():
    rep = moduli.thresholds(tol=1e-12)
    assert abs(rep.b0 - B0_FROZEN) < 1e-11
    assert abs(rep.b1 - B1_FROZEN) < 1e-11
    assert rep.residual_b0 < 1e-9
    assert rep.residual_b1 < 1e-9
    assert rep.bracket_width <= 1e-12


def test_thresholds_ordering_invariants():
    rep = moduli.thresholds()
    # b0 < 1/2 < b1 < sqrt(3)/2: the middle band contains the self dual
    # rhombus and excludes the hexagonal one
    assert rep.b0 < 0.5 < rep.b1 < math.sqrt(3) / 2


def test_thresholds_tol_floor():
    with pytest.raises(ValueError):
        moduli.thresholds(tol=1e-13)


def test_threshold_defining_quantities_change_sign():
    rep = moduli.thresholds()
    eps = 1e-6

    def q(b):
        inv = weier.invariants(lattice.make_torus(complex(0.5, b)))
        return (inv.e1 + inv.eta1).real

    assert q(rep.b0 - eps) * q(rep.b0 + eps) < 0.0
    assert (q(rep.b1 - eps) - 2 * math.pi / (rep.b1 - eps)) \
        * (q(rep.b1 + eps) - 2 * math.pi / (rep.b1 + eps)) < 0.0


def test_inequalities_hold_on_coarse_grid():
    grid = [0.15, 0.25, 0.4, 0.5, 0.7, 0.9, 1.3, 1.8, 2.4]
    rep = moduli.verify_fundamental_inequalities(grid)
    assert rep.ok, rep.violations
    assert len(rep.rows) == len(grid)
    for row in rep.rows:
        assert row.curvature_theta2 > 0.0
        assert row.theta3_b < 0.0
        assert row.theta3_bb > 0.0
        assert row.bridge_gap_slope <= 1e-6
        assert row.bridge_gap_theta3 <= 1e-9


def test_inequalities_collect_bad_grid_points():
    rep = moduli.verify_fundamental_inequalities([0.5, -1.0, 0.0])
    assert not rep.ok
    assert len(rep.rows) == 1
    assert len(rep.violations) == 2


def test_functional_equation_residual():
    for b in (0.3, 0.5, 0.85, 1.4):
        assert moduli.functional_equation_residual(b) < 1e-9
    with pytest.raises(ValueError):
        moduli.functional_equation_residual(0.0)


def test_functional_equation_self_dual_point():
    # at b = 1/2 the identity collapses to f(1/2) = -1/2 on the nose
    from torusgreen import theta

    f_half, _ = theta.log_theta1_b_derivs(0.5, 0.5)
    assert abs(f_half + 0.5) < 1e-12


def test_lambda_circle_residual_on_and_off_the_line():
    for b in (0.4, 0.8660254, 1.3):
        assert moduli.lambda_circle_residual(complex(0.5, b)) < 1e-10
    assert moduli.lambda_circle_residual(0.3 + 0.9j) > 1e-3
    assert moduli.lambda_circle_residual(1j) > 0.4


def test_scan_classifies_rhombic_strip():
    # a 1 x 6 column along Re tau = 1/2 crossing both thresholds
    cells = moduli.scan((0.4995, 0.25, 0.5005, 0.85), 1, 6)
    assert len(cells) == 6
    counts = [c.count for c in cells]
    # centers at b = 0.3, ..., 0.8; only 0.3 is below b0 and only 0.8 above b1
    assert counts == [5, 3, 3, 3, 3, 5]
    for c in cells:
        assert c.error is None
        if c.count == 5:
            assert c.extra_point is not None
        else:
            assert c.extra_point is None


def test_scan_is_deterministic_and_ordered():
    region = (0.1, 0.6, 0.45, 1.0)
    a = moduli.scan(region, 3, 2)
    b = moduli.scan(region, 3, 2)
    assert [c.tau for c in a] == [c.tau for c in b]
    assert [c.count for c in a] == [c.count for c in b]
    # row major from the bottom row up
    assert a[0].tau.imag == a[1].tau.imag == a[2].tau.imag < a[3].tau.imag
    assert a[0].tau.real < a[1].tau.real < a[2].tau.real


def test_scan_validates_inputs():
    with pytest.raises(ValueError):
        moduli.scan((0.0, 0.5, 0.4, 0.2), 4, 4)
    with pytest.raises(ValueError):
        moduli.scan((0.0, -0.1, 0.4, 0.5), 4, 4)
    with pytest.raises(ValueError):
        moduli.scan((0.0, 0.1, 0.4, 0.5), 0, 4)
    with pytest.raises(ValueError):
        moduli.scan((0.0, 0.1, 0.4, 0.5), 4, 1024)


def test_flip_edges_straddle_thresholds():
    cells = moduli.scan((0.4995, 0.25, 0.5005, 0.85), 1, 6)
    edges = moduli.flip_edges(cells, 1, 6)
    assert len(edges) == 2
    mids = sorted(e.midpoint.imag for e in edges)
    assert abs(mids[0] - B0_FROZEN) < 0.1
    assert abs(mids[1] - B1_FROZEN) < 0.1
    for e in edges:
        assert {e.count_low, e.count_high} == {3, 5}
        # on the rhombic line the merge always happens at the half period 1/2
        assert e.degenerate_half_period == 1
    # refining toward the threshold drives the midpoint determinant down
    fine = moduli.scan((0.4995, B0_FROZEN - 0.01, 0.5005, B0_FROZEN + 0.01), 1, 2)
    fine_edges = moduli.flip_edges(fine, 1, 2)
    assert len(fine_edges) == 1
    assert fine_edges[0].min_abs_det < 0.02
