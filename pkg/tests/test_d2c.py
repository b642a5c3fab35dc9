import math

import numpy as np
from nose.tools import eq_, raises

import tests.surfseg_utils as utils
from surfseg import d2c
from surfseg.errors import BadInputError, SingularNormalEquations
from surfseg.grid import column_normalize, probmap


def test_000_exact_gaussian():
    f = utils.sampled_gaussian(5, 2.0, 1.0)
    report = d2c.fit_column(f)

    assert not report.fallback_used
    assert abs(report.gamma - 2.0) <= 1e-9
    assert abs(report.sigma - 1.0) <= 1e-9
    assert report.weighted_residual <= 1e-20


def test_001_symmetric_column():
    f = np.array([0.1, 0.3, 0.7, 1.0, 0.7, 0.3, 0.1])
    report = d2c.fit_column(f)

    assert not report.fallback_used
    assert abs(report.gamma - 3.0) <= 1e-12


def test_002a_near_linear_log_profile():
    # (0.1, 0.2, 0.4, 0.8, 1.0) is concave at the top: a valid Gaussian
    # whose vertex lies past the last row, so gamma is clamped
    f = np.array([0.1, 0.2, 0.4, 0.8, 1.0])
    report = d2c.fit_column(f)
    coef = utils.weighted_logquad_lstsq(f, d2c.D2C_TAU)

    assert coef[2] < 0
    assert not report.fallback_used
    eq_(report.gamma, 4.5)

    fit = report.coefficients
    assert abs(fit.c - coef[2]) <= 1e-9
    vertex = -fit.b / (2 * fit.c)
    assert vertex > 4.5
    assert abs(vertex - (-coef[1] / (2 * coef[2]))) <= 1e-6


def test_002b_interior_vertex_matches_lstsq():
    f = np.array([0.2, 0.6, 1.0, 0.9, 0.4])
    report = d2c.fit_column(f)
    coef = utils.weighted_logquad_lstsq(f, d2c.D2C_TAU)
    vertex = -coef[1] / (2 * coef[2])

    assert 0.0 < vertex < 4.0
    assert not report.fallback_used
    assert abs(report.gamma - vertex) <= 1e-9
    assert abs(report.sigma - math.sqrt(-1.0 / (2 * coef[2]))) <= 1e-9


def test_003_log_linear_column_falls_back():
    f = 2.0 ** (np.arange(5) - 4.0)
    report = d2c.fit_column(f)

    assert report.fallback_used
    eq_(report.gamma, 4.0)
    eq_(report.sigma, 0.5)


def test_004_too_few_samples():
    f = np.array([0.0, 0.0, 1.0, 0.5, 0.0, 0.0])
    report = d2c.fit_column(f)

    assert report.fallback_used
    eq_(report.gamma, 2.0)


@raises(BadInputError)
def test_005_tau_range():
    d2c.fit_column(utils.sampled_gaussian(9, 4.0, 1.0), tau=1.0)


@raises(SingularNormalEquations)
def test_006_singular_system():
    d2c.solve3([[1, 2, 3], [2, 4, 6], [1, 1, 1]], [1, 2, 3])


def test_007_solve3():
    m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]
    v = [1.0, 2.0, 3.0]
    x = d2c.solve3(m, v)
    assert np.allclose(np.dot(m, x), v, rtol=0, atol=1e-14)


def test_008_exactness_grid():
    """
    Noiseless sampled Gaussians are recovered to 1e-9.
    """
    worst = 0.0
    for n in (64, 128, 512):
        for sigma in (1.0, 2.0, 0.1 * n, 0.3 * n):
            step = max(1, (n - 3) // 40)
            for gamma in list(range(1, n - 1, step)) + [n - 2]:
                f = utils.sampled_gaussian(n, gamma, sigma)
                report = d2c.fit_column(f)
                assert not report.fallback_used, (n, sigma, gamma)
                worst = max(
                    worst,
                    abs(report.gamma - gamma),
                    abs(report.sigma - sigma),
                )

    print("worst D2C recovery error %g" % worst)
    assert worst <= 1e-9


def test_009_shift_equivariance():
    n = 64
    base = d2c.fit_column(utils.sampled_gaussian(n, 20.3, 3.0))
    for k in (1, 5, 17):
        shifted = d2c.fit_column(utils.sampled_gaussian(n, 20.3 + k, 3.0))
        assert abs(shifted.gamma - base.gamma - k) <= 1e-9
        assert abs(shifted.sigma - base.sigma) <= 1e-9


def test_010_coefficients_minimize_residual():
    rng = np.random.default_rng(21)
    f = utils.sampled_gaussian(40, 17.2, 4.0) * (1 + 0.05 * rng.random(40))
    f = f / f.max()

    report = d2c.fit_column(f)
    fit = report.coefficients
    eps = fit.residual(f)
    assert abs(eps - report.weighted_residual) <= 1e-9 * max(eps, 1e-12)

    for name in ("a", "b", "c"):
        for delta in (1e-4, -1e-4):
            values = {"a": fit.a, "b": fit.b, "c": fit.c}
            values[name] += delta
            moved = d2c.LogQuadraticFit(**values)
            assert moved.residual(f) > eps, (name, delta)


def test_011_fit_field_exact():
    p = utils.gaussian_map(32, [10.0, 12.0, 11.0], 2.0)
    gf, reports = d2c.fit_field(p)

    assert np.allclose(gf.gamma, [10.0, 12.0, 11.0], rtol=0, atol=1e-9)
    assert np.allclose(gf.sigma, [2.0, 2.0, 2.0], rtol=0, atol=1e-9)
    assert not any(r.fallback_used for r in reports)


def test_012_fit_field_constant_column():
    data = utils.gaussian_map(32, [10.0, 12.0, 11.0], 2.0).data.copy()
    data[:, 1] = 0.25
    gf, reports = d2c.fit_field(probmap(data))

    assert reports[1].fallback_used
    eq_(gf.sigma[1], 0.1 * 32)
    assert not reports[0].fallback_used
    assert not reports[2].fallback_used
    assert abs(gf.gamma[0] - 10.0) <= 1e-9


def test_013_fit_field_matches_fit_column():
    rng = np.random.default_rng(4)
    data = utils.gaussian_map(48, rng.uniform(5, 40, 6), 3.0).data
    p = probmap(data + 0.02 * rng.random(data.shape))

    gf, reports = d2c.fit_field(p)
    normalized = column_normalize(p)
    for i in range(p.n_cols):
        r = d2c.fit_column(normalized.column(i))
        eq_(r.gamma, gf.gamma[i])
        eq_(r.sigma, gf.sigma[i])


def test_014_noisy_synthetic_field():
    """
    A 60 column map with additive noise std 0.01 stays within 0.5 px of the
    brute force maximum likelihood fit.
    """
    rng = np.random.default_rng(60)
    n = 128
    gammas = 64 + 10 * np.sin(np.arange(60) / 7.0)
    clean = utils.gaussian_map(n, gammas, 0.1 * n).data
    noisy = np.clip(clean + rng.normal(0, 0.01, clean.shape), 0, None)
    gf, _ = d2c.fit_field(probmap(noisy))

    j = np.arange(n, dtype=float)
    grid = np.arange(0, n - 1, 0.05)
    worst = 0.0
    for i in range(60):
        col = noisy[:, i] / noisy[:, i].sum()
        best, best_ll = None, -math.inf
        for g in grid[np.abs(grid - gammas[i]) < 3]:
            for s in (11.0, 12.8, 14.0):
                d = np.exp(-((j - g) ** 2) / (2 * s * s))
                ll = np.sum(col * np.log(d / d.sum() + 1e-300))
                if ll > best_ll:
                    best, best_ll = g, ll
        worst = max(worst, abs(gf.gamma[i] - best))

    assert worst < 0.5


def test_015_clamped_gamma():
    f = np.exp(-((np.arange(10.0) - 14.0) ** 2) / 50.0)
    report = d2c.fit_column(f / f.max())

    assert not report.fallback_used
    eq_(report.gamma, 9.5)
