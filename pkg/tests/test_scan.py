import numpy as np
import pytest

from parrondo import GameParams, current
from parrondo.fairness import fair_pb2_batch, fair_pb2_closed, FairnessQuery
from parrondo.scan import (
    FAIR,
    NONTRIVIAL,
    TRIVIAL,
    UNSOLVABLE,
    axis_values,
    classify,
    fair_surface_fixed_pb1,
    find_inversion,
    gamma_sweep,
    inversion_curve_fixed_gamma,
    local_extrema,
    region_map,
    site_classification,
)

from conftest import PARRONDO_N4_PB, INVERSION_N3_PB

# bisection root of the exact current for the N=3 inversion set (grid 1001)
INVERSION_GAMMA_STAR = 0.4846449118


def _fair_pb2(n, p1, p3):
    return float(fair_pb2_batch(n, p1, p3, 1e-14))


class TestGammaSweep:
    def test_inversion_n3_single_root(self, inversion_n3):
        sw = gamma_sweep(inversion_n3)
        assert len(sw.roots) == 1
        (g,) = sw.roots
        assert 0 < g < 1
        assert abs(current(inversion_n3.with_gamma(g))) < 1e-12
        inner = (sw.gammas > 0) & (sw.gammas < 1)
        assert (sw.currents[inner & (sw.gammas < g)] < 0).all()
        assert (sw.currents[inner & (sw.gammas > g)] > 0).all()

    def test_points_sorted(self, inversion_n3):
        sw = gamma_sweep(inversion_n3, 51)
        gs = [g for g, _ in sw.points]
        assert gs == sorted(gs) and len(set(gs)) == 51
        assert gs[0] == 0.0 and gs[-1] == 1.0

    @pytest.mark.xfail(strict=True, reason="rounded p_B2=0.65 makes J(gamma=0) = -1.0e-3 "
                       "so the curve crosses zero near gamma=0.0026")
    def test_parrondo_n4_no_roots_rounded(self, parrondo_n4):
        assert gamma_sweep(parrondo_n4).roots == []

    def test_parrondo_n4_rounded_has_spurious_root_near_zero(self, parrondo_n4):
        (g,) = gamma_sweep(parrondo_n4).roots
        assert g < 0.005

    def test_parrondo_n4_refined_no_roots(self):
        p2 = fair_pb2_closed(FairnessQuery(4, 0.79, 0.15))
        sw = gamma_sweep(GameParams(4, (0.79, p2, 0.15)))
        assert sw.roots == []
        assert (sw.currents[1:-1] > 0).all()

    @pytest.mark.parametrize("n", [2, 3, 5, 12])
    def test_reflection_family_flat(self, n):
        sw = gamma_sweep(GameParams(n, (0.3, 0.5, 0.7)), 101)
        assert sw.roots == []
        assert np.abs(sw.currents).max() < 1e-12

    def test_endpoint_zero_not_a_root(self):
        # game B exactly fair: J(0) = J(1) = 0 but no interior crossing
        p2 = fair_pb2_closed(FairnessQuery(4, 0.79, 0.15))
        sw = gamma_sweep(GameParams(4, (0.79, p2, 0.15)), 11)
        assert abs(sw.currents[0]) < 1e-12 and sw.roots == []

    def test_grid_validation(self, inversion_n3):
        with pytest.raises(ValueError):
            gamma_sweep(inversion_n3, 1)

    def test_solver_error_tags_gamma(self):
        from parrondo import SolverError

        with pytest.raises(SolverError, match="gamma=0.0"):
            gamma_sweep(GameParams(2, (0.8, 0.0, 0.8)), 5)


class TestFindInversion:
    def test_inversion_n3_regression(self, inversion_n3):
        res = find_inversion(inversion_n3)
        assert len(res.roots) == 1
        assert res.roots[0] == pytest.approx(INVERSION_GAMMA_STAR, abs=1e-8)
        below, above = res.extrema
        assert below.current < 0 < above.current
        assert below.gamma < res.roots[0] < above.gamma
        # refined extrema beat every grid point on their side
        js = res.sweep.currents
        assert below.current <= js.min() + 1e-15
        assert above.current >= js.max() - 1e-15

    def test_parrondo_n4_refined_empty(self):
        p2 = fair_pb2_closed(FairnessQuery(4, 0.79, 0.15))
        res = find_inversion(GameParams(4, (0.79, p2, 0.15)))
        assert res.roots == []
        assert len(res.extrema) == 1 and res.extrema[0].current > 0

    @pytest.mark.parametrize("a", [0.1, 0.35, 0.8])
    def test_trivial_family(self, a):
        assert find_inversion(GameParams(4, (a, 0.5, 1 - a)), 201).roots == []


def test_local_extrema():
    assert local_extrema([0, 1, 0, -1, 0]) == ([1], [3])


class TestRegionMap:
    def test_n2_diagonal_planes_fair(self):
        grid = np.round(np.linspace(0.1, 0.9, 9), 10)
        pts = region_map(2, np.linspace(0.05, 0.95, 7), grid, grid)
        diag = [p for p in pts if abs(p.pb1 + p.pb3 - 1) < 1e-9 or abs(p.pb1 - p.pb3) < 1e-9]
        assert diag and all(p.label == FAIR for p in diag)
        assert all(abs(p.current) < 1e-9 for p in diag)
        # off the planes A+B is not fair for N=2
        off = [p for p in pts if p not in diag]
        assert sum(p.label != FAIR for p in off) > 0.5 * len(off)

    def test_labels_consistent(self):
        pts = region_map(3, 5, 7, 7)
        for p in pts:
            assert p.label == classify(p.current)
        assert any(p.label == UNSOLVABLE for p in pts)  # p1 = 1 or p3 = 0 corners

    def test_unsolvable_kept(self):
        pts = region_map(3, [0.5], [1.0], [0.5])
        assert len(pts) == 1 and pts[0].label == UNSOLVABLE and np.isnan(pts[0].pb2)

    def test_n3_curved_surface_not_uniform_in_gamma(self):
        # off-diagonal (p1, p3) nodes with an inversion root inside (0, 1)
        roots = []
        for p1, p3 in [(0.686, 0.8), (0.3, 0.35), (0.7, 0.85), (0.2, 0.33)]:
            p2 = _fair_pb2(3, p1, p3)
            r = find_inversion(GameParams(3, (p1, p2, p3)), 201).roots
            assert len(r) == 1
            roots.append(r[0])
        assert np.ptp(roots) > 0.05

    def test_deterministic(self):
        a = region_map(3, 4, 6, 6)
        b = region_map(3, 4, 6, 6)
        assert [(repr(p.current), p.label) for p in a] == [(repr(p.current), p.label) for p in b]

    def test_refinement_stable(self):
        coarse = {(p.gamma, p.pb1, p.pb3): p for p in region_map(3, 3, 6, 6)}
        fine = region_map(3, 5, 11, 11)
        shared = 0
        for p in fine:
            key = (p.gamma, p.pb1, p.pb3)
            if key in coarse:
                shared += 1
                c = coarse[key]
                if abs(p.current) > 1e-3 and abs(c.current) > 1e-3:
                    assert c.label == p.label
        assert shared == 3 * 6 * 6

    def test_ordering_gamma_slowest(self):
        pts = region_map(2, [0.2, 0.6], [0.3, 0.7], [0.4, 0.8])
        assert [p.gamma for p in pts] == [0.2] * 4 + [0.6] * 4


class TestFairSurface:
    @pytest.mark.parametrize("n", [3, 10, 50])
    def test_trivial_point(self, n):
        pts = fair_surface_fixed_pb1(n, 0.4, [0.6])
        assert pts[0].pb2 == pytest.approx(0.5, abs=1e-10)

    def test_inversion_n3_point(self):
        (pt,) = fair_surface_fixed_pb1(3, 0.686, [0.8])
        assert abs(pt.pb2 - 0.423) < 5e-4

    @pytest.mark.parametrize("a", [0.15, 0.55, 0.9])
    def test_reflection_point(self, a):
        for pt in fair_surface_fixed_pb1([3, 7], a, [1 - a]):
            assert pt.pb2 == pytest.approx(0.5, abs=1e-10)

    def test_multi_n_and_unsolvable(self):
        pts = fair_surface_fixed_pb1([3, 10], 0.4, 11)
        assert [p.n for p in pts] == [3] * 11 + [10] * 11
        assert not pts[0].solvable  # p3 = 0 makes game B reducible
        for p in pts:
            if p.solvable:
                assert abs(current(GameParams(p.n, (p.pb1, p.pb2, p.pb3)))) < 1e-10


def _orientation(points):
    nt = np.array([(p.pb1, p.pb3) for p in points if p.branch == NONTRIVIAL])
    return float(np.median(nt[:, 1] - nt[:, 0]))


@pytest.fixture(scope="module")
def curves():
    return {n: inversion_curve_fixed_gamma(n, 0.4, 41, 41) for n in (3, 4, 10)}


class TestInversionCurve:
    def test_points_are_zeros(self, curves):
        for n, pts in curves.items():
            nt = [p for p in pts if p.branch == NONTRIVIAL]
            assert len(nt) > 20
            for p in nt:
                p2 = _fair_pb2(n, p.pb1, p.pb3)
                assert abs(current(GameParams(n, (p.pb1, p2, p.pb3), gamma=0.4))) < 1e-10

    def test_trivial_branch(self, curves):
        for n, pts in curves.items():
            tr = [p for p in pts if p.branch == TRIVIAL]
            assert len(tr) == 41
            for p in tr:
                assert abs(current(GameParams(n, (p.pb1, 0.5, p.pb3), gamma=0.4))) < 1e-12

    @pytest.mark.parametrize("n", [3, 4])
    def test_reflection_symmetry(self, curves, n):
        for p in curves[n]:
            if p.branch != NONTRIVIAL:
                continue
            q1, q3 = 1 - p.pb3, 1 - p.pb1
            p2 = _fair_pb2(n, q1, q3)
            assert abs(current(GameParams(n, (q1, p2, q3), gamma=0.4))) < 1e-10

    def test_n4_bends_the_other_way(self, curves):
        assert _orientation(curves[3]) > 0
        assert _orientation(curves[10]) > 0
        assert _orientation(curves[4]) < 0


class TestSiteClassification:
    def test_inversion_n3_game_b(self, inversion_n3):
        assert site_classification(inversion_n3) == ["winning", "losing", "losing", "winning"]

    def test_game_a_neutral(self):
        assert site_classification(GameParams(4, (0.2, 0.9, 0.1), gamma=1.0)) == ["neutral"] * 5

    def test_parrondo_n4_game_b(self, parrondo_n4):
        assert site_classification(parrondo_n4) == ["losing", "losing", "winning", "winning", "winning"]


def test_axis_values():
    assert axis_values(3).tolist() == [0.0, 0.5, 1.0]
    assert axis_values(0.25).tolist() == [0.25]
    assert axis_values([0.1, 0.2]).tolist() == [0.1, 0.2]
    with pytest.raises(ValueError):
        axis_values(1)
