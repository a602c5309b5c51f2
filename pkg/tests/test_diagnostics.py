import math

import numpy as np
import pytest

from fronttrack import diagnostics as dg
from fronttrack import measures as ms

from conftest import quick_run


class TestMinCharacteristic:
    def test_constant_state_straight_line(self):
        tl = quick_run("burgers", {"kind": "breakpoints", "xs": [0.0],
                                   "values": [[0.7], [0.7]]}, 0.1, 2.0)
        c = dg.min_characteristic(tl, 1, 0.0, -1.0, 2.0)
        assert c.position(2.0) == pytest.approx(-1.0 + 0.7 * 2.0)
        assert all(s == pytest.approx(0.7) for s in c.slopes)

    def test_impinges_then_rides_shock(self):
        tl = quick_run("burgers", {"kind": "breakpoints", "xs": [1.0],
                                   "values": [[1.0], [0.0]]}, 0.1, 4.0)
        c = dg.min_characteristic(tl, 1, 0.0, 0.0, 4.0)
        # slope 1 catches the speed-0.5 shock at t = 2, x = 2, then rides
        assert c.position(2.0) == pytest.approx(2.0)
        assert c.position(4.0) == pytest.approx(3.0)
        assert c.rode[-1] is not None

    def test_remark_family1_zero_slope(self, remark_timeline):
        c = dg.min_characteristic(remark_timeline, 1, 0.0, 0.37, 1.5)
        for (t0, x0), (t1, x1), slope in c.segments():
            assert abs(slope) <= 1e-10 or slope == 0.0
        assert c.position(1.5) == pytest.approx(0.37, abs=1e-9)

    def test_slopes_admissible_on_every_segment(self, sawtooth_timeline):
        tl = sawtooth_timeline
        c = dg.min_characteristic(tl, 1, 0.0, -0.4, 2.0)
        for (t0, x0), (t1, x1), slope in c.segments():
            if t1 <= t0:
                continue
            tm = 0.5 * (t0 + t1)
            fld = tl.slice_at(tm)
            xm = x0 + slope * (tm - t0)
            lam_plus = tl.model.fprime(float(fld.state_at(xm + 1e-9)[0]))
            lam_minus = tl.model.fprime(float(fld.state_at(xm - 1e-9)[0]))
            assert lam_plus - 1e-9 <= slope <= lam_minus + 1e-9


class TestRegionBalance:
    def test_quiet_region_exact(self):
        tl = quick_run("burgers", {"kind": "breakpoints", "xs": [0.0],
                                   "values": [[1.0], [0.0]]}, 0.1, 2.0)
        region = dg.make_region(tl, 1, 0.1, 1.0, [(-2.0, 2.0)])
        rep = dg.region_balance_check(tl, region)
        assert rep["mu_I"] == 0.0
        assert abs(rep["W_out"] - rep["W_in"]) <= 1e-12
        assert rep["flux_residual"] == pytest.approx(0.0, abs=1e-12)

    def test_merge_region_balances(self, burgers_merge_timeline):
        tl = burgers_merge_timeline
        region = dg.make_region(tl, 1, 0.5, 3.0, [(-2.0, 2.0)])
        rep = dg.region_balance_check(tl, region)
        assert rep["mu_I"] == pytest.approx(0.125)
        assert abs(rep["W_out"] - rep["W_in"]) <= 1e-12  # scalar additivity
        assert rep["ratio_signed"] == pytest.approx(0.0, abs=1e-9)

    def test_random_regions_controlled(self, sawtooth_timeline):
        rng = np.random.default_rng(5)
        worst = 0.0
        checked = 0
        for _ in range(25):
            t0 = float(rng.uniform(0.0, 1.2))
            tau = float(rng.uniform(0.3, 0.6))
            a = float(rng.uniform(-1.5, 0.5))
            b = a + float(rng.uniform(0.5, 1.5))
            region = dg.make_region(sawtooth_timeline, 1, t0, tau, [(a, b)])
            rep = dg.region_balance_check(sawtooth_timeline, region)
            if rep["mu_I"] > 1e-12:
                worst = max(worst, rep["ratio_signed"])
            else:
                assert abs(rep["W_out"] - rep["W_in"]) <= 1e-9
            assert abs(rep["flux_residual"]) <= 1e-9 + 2.0 * len(rep["boundary_events"])
            checked += 1
        assert checked == 25
        assert math.isfinite(worst)

    def test_multi_interval_region(self, sawtooth_timeline):
        region = dg.make_region(sawtooth_timeline, 1, 0.2, 0.5,
                                [(-1.2, -0.3), (0.1, 1.2)])
        rep = dg.region_balance_check(sawtooth_timeline, region)
        assert math.isfinite(rep["ratio_signed"]) or rep["mu_I"] == 0.0


class TestPositiveDecay:
    def test_centered_fan_density(self, burgers_fan_timeline):
        # exact solution u = x/t inside the fan: [v]^+([a,b]) ~ (b-a)/t
        tl = burgers_fan_timeline
        for t in (0.5, 1.0, 2.0):
            fan_lo, fan_hi = 0.0, t  # fan spans speeds [0, 1]
            w = fan_hi - fan_lo
            sets = [[(fan_lo + 0.2 * w, fan_lo + 0.55 * w)],
                    [(fan_lo + 0.3 * w, fan_lo + 0.9 * w)],
                    [(fan_lo + 0.1 * w, fan_lo + 0.35 * w),
                     (fan_lo + 0.5 * w, fan_lo + 0.8 * w)]]
            rep = dg.positive_decay_check(tl, 1, 0.0, t, sets)
            assert rep["q_drop"] == pytest.approx(0.0, abs=1e-12)
            assert rep["C_required"] <= 1.0 + 8.0 * tl.config.epsilon

    def test_pure_shock_zero_positive_mass(self):
        tl = quick_run("burgers", {"kind": "breakpoints", "xs": [0.0],
                                   "values": [[1.0], [0.0]]}, 0.1, 2.0)
        rep = dg.positive_decay_check(tl, 1, 0.0, 1.0, [[(-3.0, 3.0)]])
        assert rep["C_required"] == 0.0

    def test_sawtooth_with_q_drop(self, sawtooth_timeline):
        rep = dg.positive_decay_check(sawtooth_timeline, 1, 0.0, 1.8,
                                      [[(-2.0, 2.0)], [(-0.5, 0.5)]])
        assert rep["q_drop"] >= 0.0
        assert math.isfinite(rep["C_required"])


class TestDecayEstimate:
    def test_quiescent_fan_bound(self, burgers_fan_timeline):
        tl = burgers_fan_timeline
        rep = dg.decay_estimate_check(tl, 1, 1.0, 0.5,
                                      [[(0.2, 0.8)], [(0.05, 0.95)]])
        assert rep["icj_window_mass"] == 0.0
        # fan density 1/t = 1 against L(B)/tau = 2 L(B)
        assert rep["C_required"] <= 1.0

    def test_disjoint_sets_zero(self, burgers_fan_timeline):
        rep = dg.decay_estimate_check(burgers_fan_timeline, 1, 1.0, 0.5,
                                      [[(5.0, 6.0)]])
        assert rep["C_required"] == 0.0

    def test_merge_straddle_dominated_by_icj(self, burgers_merge_timeline):
        tl = burgers_merge_timeline
        t_ev = tl.events[0].t
        rep = dg.decay_estimate_check(tl, 1, t_ev + 0.25, 0.5, [[(-3.0, 3.0)]])
        assert rep["icj_window_mass"] > 0.0
        assert math.isfinite(rep["C_required"])


class TestTameOscillation:
    def test_constant_data(self):
        tl = quick_run("burgers", {"kind": "breakpoints", "xs": [0.0],
                                   "values": [[0.4], [0.4]]}, 0.1, 2.0)
        rep = dg.tame_oscillation_check(tl, [{"a": -1.0, "b": 1.0, "tau": 0.0}])
        assert rep["rows"][0]["osc"] == 0.0
        assert rep["C_prime"] == 0.0

    def test_single_shock_ratio_at_most_one(self):
        tl = quick_run("burgers", {"kind": "breakpoints", "xs": [0.0],
                                   "values": [[1.0], [0.0]]}, 0.1, 2.0)
        rep = dg.tame_oscillation_check(tl, [{"a": -2.0, "b": 2.0, "tau": 0.0}])
        row = rep["rows"][0]
        assert row["osc"] == pytest.approx(1.0)
        assert row["tv_base"] == pytest.approx(1.0)
        assert row["ratio"] <= 1.0 + 1e-12

    def test_sawtooth_random_triangles_bounded(self, sawtooth_timeline):
        rng = np.random.default_rng(8)
        tris = []
        for _ in range(100):
            a = float(rng.uniform(-2.5, 1.5))
            b = a + float(rng.uniform(0.5, 2.5))
            tau = float(rng.uniform(0.0, 1.5))
            tris.append({"a": a, "b": b, "tau": tau})
        rep = dg.tame_oscillation_check(sawtooth_timeline, tris)
        finite = [r["ratio"] for r in rep["rows"] if math.isfinite(r["ratio"])]
        assert finite, "all triangles degenerate"
        assert math.isfinite(rep["C_prime"])


class TestSbvAtomReport:
    def test_merge_single_exceptional_time(self, burgers_merge_timeline):
        tl = burgers_merge_timeline
        rep = dg.sbv_atom_report(tl, 1, 1e-8)
        assert rep["exceptional_times"] == [tl.events[0].t]

    def test_pure_fan_no_exceptional_times(self, burgers_fan_timeline):
        rep = dg.sbv_atom_report(burgers_fan_timeline, 1, 1e-8)
        assert rep["exceptional_times"] == []

    def test_definitional_exactness(self, sawtooth_timeline):
        tl = sawtooth_timeline
        thresh = 1e-3
        rep = dg.sbv_atom_report(tl, 1, thresh)
        icj = ms.mu_ICJ(tl, 1, tl.curves(1))
        oracle = {}
        for t, w in zip(icj.ts, icj.ws):
            oracle[t] = oracle.get(t, 0.0) + abs(w)
        # t = 0 holds the datum's initiation atoms, excluded by definition
        expect = sorted(t for t, m in oracle.items() if m > thresh and t > 0.0)
        assert rep["exceptional_times"] == expect

    def test_ramp_ladder_concentrates_at_unit_time(self):
        initial = {"kind": "profile", "name": "ramp", "samples": 40}
        for eps in (0.1, 0.05, 0.025):
            tl = quick_run("burgers", initial, epsilon=eps, t_end=2.0)
            rep = dg.sbv_atom_report(tl, 1, 1e-6)
            assert rep["exceptional_times"], "no exceptional times found"
            assert 0.9 <= min(rep["exceptional_times"]) <= 1.1

    def test_scalar_spectrum_reported(self, burgers_merge_timeline):
        rep = dg.sbv_atom_report(burgers_merge_timeline, 1, 1e-8, times=(3.0,))
        atoms = rep["fprime_atom_spectra"][3.0]
        assert len(atoms) == 1
        assert atoms[0][1] == pytest.approx(-1.0)  # f' = u jumps by -1


class TestConvergence:
    def test_burgers_shock_exact(self):
        rep = dg.convergence_study("burgers_shock", [0.1, 0.05], t_eval=1.0)
        for row in rep["rows"]:
            assert row["l1_error"] <= 1e-9

    def test_burgers_rarefaction_first_order(self):
        rep = dg.convergence_study("burgers_rarefaction", [0.1, 0.05, 0.025],
                                   t_eval=1.0)
        for row in rep["rows"]:
            assert row["l1_error"] <= 1.0 * row["epsilon"]
        assert all(o >= 0.9 for o in rep["observed_orders"])

    def test_cubic_riemann_envelope_oracle(self):
        rep = dg.convergence_study("cubic_riemann", [0.1, 0.05], t_eval=1.0)
        for row in rep["rows"]:
            assert row["l1_error"] <= 2.0 * row["epsilon"]

    def test_linear_system_exact_translates(self):
        rep = dg.convergence_study("linear_2x2", [0.1], t_eval=1.0)
        assert rep["rows"][0]["l1_error"] <= 1e-9

    def test_uniform_tv_bounds_across_ladder(self):
        rep = dg.convergence_study("burgers_rarefaction", [0.1, 0.05, 0.025])
        vs = [row["V_max"] for row in rep["rows"]]
        assert max(vs) <= 1.0 + 1e-9

    def test_unknown_scenario_rejected(self):
        with pytest.raises(Exception) as err:
            dg.convergence_study("kdv_soliton", [0.1])
        assert "scenario" in str(err.value)
