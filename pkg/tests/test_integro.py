import numpy as np
import pytest

import fracspec as fs
from fracspec.errors import DomainError
from fracspec.integro import (
    analytic_extend,
    apply_A,
    build_pqr_grid,
    c_ratio,
    reconstruct_f_exact,
    refine_rho,
    secular,
    solve_pqr,
)
from fracspec.nystrom import (
    KernelKind,
    KernelSpec,
    build_grid,
    discretize_and_solve,
    eigenfunction_at,
)


def _leading_deviation(sol):
    # sup distance of (p, q, r) from their large-rho leading forms
    t = sol.grid
    return max(
        np.abs(sol.p[0] - 1).max(),
        np.abs(sol.p[1]).max(),
        np.abs(sol.q[0]).max(),
        np.abs(sol.q[1] - 1).max(),
        np.abs(sol.r[0]).max(),
        np.abs(sol.r[1] - t).max(),
    )


class TestGridAndOperator:
    def test_grid_shape(self):
        t, w = build_pqr_grid(25.0)
        assert t.size == w.size == 240
        assert np.all(np.diff(t) > 0)
        assert np.all(w > 0)
        t_max = 40.0 / 25.0
        assert t_max / 2 < t[-1] < t_max
        assert t[0] < 1e-11
        assert not t.flags.writeable

    def test_grid_rejects_nonpositive_rho(self):
        with pytest.raises(DomainError):
            build_pqr_grid(0.0)

    def test_apply_A_shape_check(self, table075):
        with pytest.raises(DomainError):
            apply_A(np.zeros((2, 7)), 20.0, table075)
        with pytest.raises(DomainError):
            apply_A(np.zeros(240), 20.0, table075)

    def test_apply_A_linear(self, table075):
        rng = np.random.default_rng(7)
        t, w = build_pqr_grid(20.0)
        f = rng.normal(size=(2, t.size))
        g = rng.normal(size=(2, t.size))
        left = apply_A(f + 2.5 * g, 20.0, table075)
        right = apply_A(f, 20.0, table075) + 2.5 * apply_A(g, 20.0, table075)
        assert np.allclose(left, right, atol=1e-13)

    def test_apply_A_contracts(self, table075):
        # the operator norm is well below one at moderate rho
        t, w = build_pqr_grid(30.0)
        f = np.ones((2, t.size))
        out = apply_A(f, 30.0, table075)
        assert np.abs(out).max() < 0.5


class TestSolvePqr:
    def test_converges(self, table075):
        sol = solve_pqr(40.0, table075)
        assert sol.converged
        assert sol.iterations < 30
        assert sol.residual < 1e-12
        assert len(sol.residuals) == 3

    def test_fixed_point(self, table075):
        # p = A p + e1 must hold on the grid after convergence
        sol = solve_pqr(35.0, table075)
        grid = (sol.grid, sol.weights)
        ap = apply_A(sol.p, 35.0, table075, grid=grid)
        b = np.zeros_like(sol.p)
        b[0] = 1.0
        assert np.abs(sol.p - (ap + b)).max() < 1e-11
        ar = apply_A(sol.r, 35.0, table075, grid=grid)
        br = np.stack([np.zeros_like(sol.grid), sol.grid])
        assert np.abs(sol.r - (ar + br)).max() < 1e-11

    def test_leading_form_deviations(self, table075):
        # frozen: 2.0916e-2 / 1.2612e-2 / 7.5528e-3 / 1.5497e-3
        caps = {30.0: 2.5e-2, 60.0: 1.5e-2, 120.0: 1e-2, 1000.0: 3e-3}
        devs = {}
        for rho, cap in caps.items():
            d = _leading_deviation(solve_pqr(rho, table075))
            assert d < cap
            devs[rho] = d
        # decay close to 1/rho between octaves
        assert 4.0 / 3.0 < devs[30.0] / devs[60.0] < 3.0
        assert 4.0 / 3.0 < devs[60.0] / devs[120.0] < 3.0


class TestExtension:
    def test_reproduces_grid_nodes(self, table075):
        sol = solve_pqr(28.0, table075)
        for j in (5, 120, 200):
            z = complex(sol.grid[j])
            p, q, r = analytic_extend(sol, z, table075)
            assert p[0] == pytest.approx(sol.p[0, j], abs=1e-11)
            assert q[1] == pytest.approx(sol.q[1, j], abs=1e-11)
            assert r[1] == pytest.approx(sol.r[1, j], abs=1e-11)

    def test_conjugate_symmetry(self, table075):
        sol = solve_pqr(28.0, table075)
        z = 0.4 + 0.9j
        pa, qa, ra = analytic_extend(sol, z, table075)
        pb, qb, rb = analytic_extend(sol, np.conj(z), table075)
        assert pa[0] == pytest.approx(np.conj(pb[0]), abs=1e-13)
        assert qa[1] == pytest.approx(np.conj(qb[1]), abs=1e-13)
        assert ra[1] == pytest.approx(np.conj(rb[1]), abs=1e-13)

    def test_rejects_cut(self, table075):
        sol = solve_pqr(28.0, table075)
        for z in (0.0, -1.0, complex(-3.0, 0.0)):
            with pytest.raises(DomainError):
                analytic_extend(sol, z, table075)


class TestSecular:
    def test_large_rho_model(self, table075):
        # xi conj(eta) approaches the explicit oscillatory model at 1/rho rate
        a = 0.75
        ba = fs.b_alpha(a)
        xc = fs.xc0(1j, table075)
        for rho in (20.0, 40.0, 80.0, 160.0):
            sv = secular(rho, table075)
            got = sv.xi * np.conj(sv.eta)
            model = (
                (1.0 / (rho * 1j))
                * xc**2
                * rho**a
                * (-1j) ** (a - 1.0)
                * np.exp(1j * rho)
                * (ba + 1j)
            )
            assert abs(got - model) / abs(model) < 0.05 / rho

    def test_solution_reuse_checks_rho(self, table075):
        sol = solve_pqr(30.0, table075)
        with pytest.raises(DomainError):
            secular(31.0, table075, solution=sol)

    def test_normalized_bounded(self, table075):
        sv = secular(33.3, table075)
        assert abs(sv.normalized) <= 1.0


class TestRefine:
    def test_frozen_root(self, roots075):
        assert roots075[10].rho == pytest.approx(30.8923316355, abs=1e-6)

    def test_residual_contract(self, roots075):
        for root in roots075.values():
            assert root.condition_residual < 1e-10

    def test_roots_increasing_and_near_asymptote(self, roots075, order075):
        rhos = [roots075[n].rho for n in sorted(roots075)]
        assert np.all(np.diff(rhos) > 0)
        for n, root in roots075.items():
            tilde = fs.rho_asymptotic(n, order075)
            assert abs(root.rho - tilde) < 0.1

    def test_gap_to_asymptote_shrinks(self, roots075, order075):
        gaps = [
            abs(roots075[n].rho - fs.rho_asymptotic(n, order075))
            for n in sorted(roots075)
        ]
        assert gaps[-1] < gaps[0]

    def test_variant_and_alpha_guards(self, table075):
        with pytest.raises(DomainError):
            refine_rho(5, fs.FractionalOrder(0.75, fs.Variant.CAPUTO))
        with pytest.raises(DomainError):
            refine_rho(5, 1.0)
        with pytest.raises(DomainError):
            refine_rho(0, 0.75, table=table075)


class TestCoefficientRatio:
    def test_alternation_and_decay(self, roots075, table075):
        cs = {n: c_ratio(roots075[n].rho, table075) for n in range(5, 13)}
        for n, c in cs.items():
            assert np.sign(c) == (-1.0) ** (n + 1)
            assert 0.005 < n * abs(c) < 0.08
        mags = [abs(cs[n]) for n in range(5, 13)]
        assert np.all(np.diff(mags) < 0)

    def test_frozen_value(self, roots075, table075):
        assert c_ratio(roots075[10].rho, table075) == pytest.approx(
            -0.002140, abs=2e-5
        )


class TestCrossSolver:
    def test_refined_vs_nystrom(self, roots075, bridge2000):
        # the two independent eigenvalue routes agree to well inside the
        # asymptotic error scale, with an alternating signed gap
        rho_ny = bridge2000.rho
        signs = []
        for n in sorted(roots075):
            gap = roots075[n].rho - rho_ny[n - 1]
            assert abs(gap) < 0.1 * n ** (-1.9)
            signs.append(np.sign(gap))
        assert np.all(signs[:-1] != signs[1:])


class TestReconstruct:
    def test_matches_nystrom_eigenfunction(self, roots075, bridge2000, table075):
        rho = roots075[10].rho
        x = np.linspace(0.0, 1.0, 201)
        f = reconstruct_f_exact(x, rho, table075)
        g = eigenfunction_at(bridge2000, 10, x)
        if np.sign(f[5]) != np.sign(g[5]):
            g = -g
        assert np.max(np.abs(f - g)) < 5e-3

    def test_endpoint_values_small(self, roots075, table075):
        rho = roots075[10].rho
        ends = reconstruct_f_exact(np.array([0.0, 1.0]), rho, table075)
        assert np.max(np.abs(ends)) < 5e-3

    def test_unit_l2(self, roots075, table075):
        from fracspec.quadrature import gauss_legendre_01

        rho = roots075[10].rho
        x, w = gauss_legendre_01(400)
        f = reconstruct_f_exact(x, rho, table075)
        assert w @ f**2 == pytest.approx(1.0, abs=1e-6)

    def test_high_alpha_agreement(self):
        # closer to alpha = 1 both routes sharpen; frozen sup 7.73e-5
        order = fs.FractionalOrder(0.95)
        table = fs.PhaseTable(order)
        root = refine_rho(8, order, table=table)
        spectrum = discretize_and_solve(
            KernelSpec(order, KernelKind.BRIDGE), build_grid(1200)
        )
        x = np.linspace(0.0, 1.0, 201)
        f = reconstruct_f_exact(x, root.rho, table)
        g = eigenfunction_at(spectrum, 8, x)
        if np.sign(f[5]) != np.sign(g[5]):
            g = -g
        assert np.max(np.abs(f - g)) < 5e-4

    def test_domain_check(self, roots075, table075):
        with pytest.raises(DomainError):
            reconstruct_f_exact(np.array([-0.1, 0.5]), roots075[10].rho, table075)
        with pytest.raises(DomainError):
            reconstruct_f_exact(np.array([0.5, 1.2]), roots075[10].rho, table075)


def test_dump_integro_csv(roots075, order075):
    import io

    from fracspec.integro import dump_integro_csv

    buf = io.StringIO()
    roots = [roots075[n] for n in sorted(roots075)]
    dump_integro_csv(roots, order075, buf)
    lines = buf.getvalue().split("\n")
    assert lines[0] == "n,rho_refined,rho_asym2,condition_residual,iterations"
    assert len(lines) == 2 + len(roots)
    first = lines[1].split(",")
    assert first[0] == "5"
    assert float(first[1]) == pytest.approx(roots[0].rho)
