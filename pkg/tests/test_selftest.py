import numpy as np

from torusgreen import lattice, selftest

EXPECTED_NAMES = [
    "legendre_relation",
    "e_sum",
    "wp_differential_equation",
    "zeta_addition",
    "heat_equation",
    "triple_product",
    "jacobi_imaginary_cross",
]


def test_run_all_passes():
    rep = selftest.run_all(n_samples=120)
    assert rep.ok
    assert [c.name for c in rep.checks] == EXPECTED_NAMES
    for c in rep.checks:
        assert c.ok
        assert c.max_residual < c.tolerance
        assert c.n_samples > 0


def test_run_all_is_deterministic():
    a = selftest.run_all(n_samples=48)
    b = selftest.run_all(n_samples=48)
    assert [c.max_residual for c in a.checks] == [c.max_residual for c in b.checks]


def test_report_flags_failing_check():
    bad = selftest.CheckResult(name="synthetic", max_residual=1.0,
                               tolerance=1e-9, n_samples=1)
    good = selftest.CheckResult(name="fine", max_residual=1e-12,
                                tolerance=1e-9, n_samples=1)
    assert not bad.ok
    assert good.ok
    assert not selftest.SelftestReport(checks=(good, bad)).ok
    assert selftest.SelftestReport(checks=(good,)).ok


def test_individual_residuals_small_on_fresh_samples():
    T = lattice.make_torus(0.21 + 1.13j)
    assert selftest.legendre_residual(T) < 1e-12
    assert selftest.e_sum_residual(T) < 1e-12
    z = 0.23 + 0.11j
    assert np.max(selftest.wp_de_residual(z, T)) < 1e-9
    assert np.max(selftest.heat_equation_residual(z, T)) < 1e-7
    assert np.max(selftest.triple_product_residual(z, T)) < 1e-10
    assert np.max(selftest.jacobi_cross_residual(z, T)) < 1e-10
    assert np.max(selftest.zeta_addition_residual(z, T)) < 1e-9
