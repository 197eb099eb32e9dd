"""Acceptance battery: one check per published claim, shared by the CLI
`accept` command and the test suite.

Each check runs at its stated tolerance against the converged defaults
(16384-point grid, 8192 steps per Bloch period).  Four checks are known
to fail for physical reasons and are reported honestly; see KNOWN_DEVIATIONS
and the README.  Heavy runs are cached on the battery object so checks can
share them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bands import (BlochProblem, band_filtered_state, ground_band_width,
                    solve_bands)
from .experiments import (ExperimentConfig, SPLIT_T2_LOWER, SPLIT_T2_UPPER,
                          SweepSpec, run_sweep)
from .model import ScaledParams, WaveFunction, default_grid, make_gaussian
from .observables import (dense_moments, fringe_fit, interval_probability,
                          occupation_cosine_fit, occupation_series)
from .propagate import PropagationConfig, run
from .schedules import schedule_from_table
from .tightbinding import (TBGaussian, TBModel, constant_profile,
                           dispersion_law, flip_profile, lie_moments,
                           shuttle_profile, tb_moments, tb_oracle)

BZ_EPS_SINGLE = 0.0825
BZ_EPS_DOUBLE = 0.121
GPE_EPS = 0.104

# Checks that a converged simulation cannot satisfy at the stated
# thresholds; the measured values and the reasons are in the README.
KNOWN_DEVIATIONS = {
    "4a": "converged continuum shuttle variance growth for n >= 2 periods "
          "is 2.7-3.9x the tight-binding leading-order law: the shallow "
          "lattice's band-edge curvature exceeds the cosine-band value",
    "4b": "the n = 1 growth carries a stepping-sensitive transient on top "
          "of the n^2 term, so the fitted exponent over n = 1..4 lands "
          "near 1.4 at the battery's stepping (2.2 at half the step)",
    "8c": "at eps = 0.121 the zone-edge tunnel probability is ~0.15, which "
          "floors the T_B fidelity near 0.79",
    "11b": "the ~3% higher-band loss plus the 0.42/0.58 branch imbalance "
           "cap the fitted fringe contrast near 0.95",
}


@dataclass
class CheckResult:
    check_id: str
    name: str
    passed: bool
    detail: str

    @property
    def expected_fail(self) -> bool:
        return self.check_id in KNOWN_DEVIATIONS


class Battery:
    """Lazy, cached acceptance runs.

    quick=True coarsens the stepping to 4096 steps per Bloch period and
    trims the sweeps; tolerances are unchanged, so quick results are
    indicative rather than authoritative.
    """

    def __init__(self, quick: bool = False):
        self.quick = quick
        self.steps_per_tb = 4096 if quick else 8192
        self.params = ScaledParams()
        self.grid = default_grid()
        self.T_B = self.params.bloch_period()
        self.dt = self.T_B / self.steps_per_tb

    # ---------- shared ingredients ----------

    def _config(self, **kwargs) -> PropagationConfig:
        kwargs.setdefault("snapshot_stride", 10 ** 9)
        kwargs.setdefault("moment_stride", 10 ** 9)
        return PropagationConfig(dt=self.dt, **kwargs)

    @cached_property
    def delta(self) -> float:
        return ground_band_width(self.params)

    @cached_property
    def gaussian60(self) -> WaveFunction:
        return make_gaussian(self.grid, 60.0)

    @cached_property
    def table_eps0(self):
        return solve_bands(BlochProblem.for_grid(
            self.grid, self.params.with_(eps=0.0, F=0.0)), n_bands=2)

    @cached_property
    def table_0825(self):
        return solve_bands(BlochProblem.for_grid(
            self.grid, self.params.with_(eps=BZ_EPS_SINGLE, F=0.0)), n_bands=2)

    @cached_property
    def bloch_run(self):
        """Band-filtered packet, eps = 0, 4 Bloch periods, dense moments."""
        psi0 = band_filtered_state(self.gaussian60, self.table_eps0, (0,))
        n = 3 if self.quick else 4
        sched = schedule_from_table("bloch", self.params, n)
        traj = run(psi0, sched, self._config(moment_stride=8), self.params)
        return dense_moments(traj)

    def _shuttle(self, params: ScaledParams, x0: float):
        psi0 = band_filtered_state(make_gaussian(self.grid, 60.0, x0=x0),
                                   self.table_eps0, (0,))
        n = 2 if self.quick else 4
        sched = schedule_from_table("shuttle", params, n)
        traj = run(psi0, sched, self._config(moment_stride=16), params)
        return dense_moments(traj), n

    @cached_property
    def shuttle_run(self):
        return self._shuttle(self.params, x0=4500.0)

    @cached_property
    def shuttle_run_2F(self):
        return self._shuttle(self.params.with_(F=2 * self.params.F), x0=2500.0)

    @cached_property
    def bz_single_run(self):
        """eps = 0.0825 over 4 T_B with complex snapshots at T_1 multiples."""
        p = self.params.with_(eps=BZ_EPS_SINGLE)
        n = 2 if self.quick else 4
        sched = schedule_from_table("bloch", p, n)
        return run(self.gaussian60, sched,
                   self._config(snapshot_stride=self.steps_per_tb // 2,
                                store_complex=True), p)

    @cached_property
    def bz_double_run(self):
        """eps = 0.121 over 2 T_B with complex snapshots each T_B."""
        p = self.params.with_(eps=BZ_EPS_DOUBLE)
        sched = schedule_from_table("bloch", p, 2)
        return run(self.gaussian60, sched,
                   self._config(snapshot_stride=self.steps_per_tb,
                                store_complex=True), p)

    @cached_property
    def mzi_sweep(self):
        n = 16 if self.quick else 32
        stop = 0.145 if self.quick else 0.21
        cfg = ExperimentConfig(experiment="mzi_v0_sweep",
                               params=self.params.with_(eps=BZ_EPS_SINGLE),
                               dt_per_TB=self.steps_per_tb,
                               sweep=SweepSpec("V0", 0.0, stop, n), workers=1)
        return run_sweep(cfg, cfg.resolved_params(), self.grid)

    @cached_property
    def eps_sweep(self):
        n = 7 if self.quick else 9
        cfg = ExperimentConfig(experiment="eps_sweep", params=self.params,
                               dt_per_TB=self.steps_per_tb,
                               sweep=SweepSpec("eps", -0.2, 0.2, 2 * n - 1),
                               workers=1)
        return run_sweep(cfg, cfg.resolved_params(), self.grid)

    @cached_property
    def gpe_sweep(self):
        n = 8 if self.quick else 24
        cfg = ExperimentConfig(experiment="gpe_g_sweep",
                               params=self.params.with_(eps=GPE_EPS),
                               dt_per_TB=self.steps_per_tb,
                               sweep=SweepSpec("g", 0.0, 1.5, n), workers=1)
        return run_sweep(cfg, cfg.resolved_params(), self.grid)

    # ---------- criteria ----------

    def check_1_bloch_period(self) -> CheckResult:
        m = self.bloch_run
        sig = m.mean_x - m.mean_x.mean()
        n = sig.size
        ac = np.correlate(sig, sig, mode="full")[n - 1:]
        ac /= (n - np.arange(n))
        dt_s = m.times[1] - m.times[0]
        lo = int(0.7 * self.T_B / dt_s)
        hi = int(1.3 * self.T_B / dt_s)
        pk = lo + int(np.argmax(ac[lo:hi]))
        y0, y1, y2 = ac[pk - 1], ac[pk], ac[pk + 1]
        T = (pk + 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2)) * dt_s
        err = abs(T / self.T_B - 1.0)
        return CheckResult("1", "Bloch period from <x> autocorrelation",
                           err < 0.01,
                           f"measured {T:.2f} vs T_B {self.T_B:.2f} "
                           f"({100 * err:.3f}%, tol 1%)")

    def check_2_bloch_amplitude(self) -> CheckResult:
        m = self.bloch_run
        sel = (m.times >= self.T_B) & (m.times <= 2 * self.T_B)
        amp = m.mean_x[sel].max() - m.mean_x[sel].min()
        L = self.delta / abs(self.params.F)
        err = abs(amp / L - 1.0)
        return CheckResult("2", "Bloch amplitude = Delta/F",
                           err < 0.05,
                           f"measured {amp:.2f} vs Delta/F {L:.2f} "
                           f"({100 * err:.2f}%, tol 5%)")

    def check_3_shuttle_velocity(self) -> CheckResult:
        v_pred = self.params.d * self.delta / (np.pi * self.params.hbar)
        m, n = self.shuttle_run
        v1 = abs(m.mean_x[-1] - m.mean_x[0]) / (n * self.T_B)
        m2, n2 = self.shuttle_run_2F
        T_B2 = self.params.with_(F=2 * self.params.F).bloch_period()
        v2 = abs(m2.mean_x[-1] - m2.mean_x[0]) / (n2 * T_B2)
        err = abs(v1 / v_pred - 1.0)
        change = abs(v2 / v1 - 1.0)
        ok = err < 0.05 and change < 0.02
        return CheckResult("3", "shuttle velocity d*Delta/(pi*hbar), "
                           "independent of F0", ok,
                           f"v {v1:.5f} vs {v_pred:.5f} ({100 * err:.2f}%, "
                           f"tol 5%); doubling F changes it by "
                           f"{100 * change:.2f}% (tol 2%)")

    def _shuttle_growths(self):
        m, n_periods = self.shuttle_run
        var0 = m.var_x[0]
        growths = []
        for n in range(1, n_periods + 1):
            i = int(np.argmin(np.abs(m.times - n * self.T_B)))
            growths.append(m.var_x[i] - var0)
        sigma_std = float(np.sqrt(var0))
        pred = [self.delta ** 2 * self.params.d ** 4 * n ** 2
                / (8.0 * self.params.F ** 2 * sigma_std ** 4)
                for n in range(1, n_periods + 1)]
        return np.asarray(growths), np.asarray(pred)

    def check_4a_shuttle_dispersion_factor(self) -> CheckResult:
        growths, pred = self._shuttle_growths()
        ratios = growths / pred
        ok = bool(np.all((ratios > 0.5) & (ratios < 2.0)))
        return CheckResult("4a", "shuttle variance growth within factor 2 "
                           "of the leading-order law", ok,
                           f"growth/prediction per period: "
                           f"{np.round(ratios, 2).tolist()} (tol [0.5, 2])")

    def check_4b_shuttle_dispersion_exponent(self) -> CheckResult:
        growths, _ = self._shuttle_growths()
        ns = np.arange(1, growths.size + 1)
        slope = np.polyfit(np.log(ns), np.log(np.abs(growths)), 1)[0]
        ok = abs(slope - 2.0) < 0.2
        return CheckResult("4b", "shuttle variance growth scales as n^2", ok,
                           f"fitted exponent {slope:.2f} (tol 2 +- 0.2)")

    def check_5a_tb_exactness(self) -> CheckResult:
        hbar = self.params.hbar
        F0 = 0.0044
        T_B = 2 * np.pi * hbar / (2 * np.pi * F0)
        n_sites = 1601
        state = TBGaussian(sigma_n=10.0, n_sites=n_sites)
        worst = 0.0
        for prof in (constant_profile(F0, 3.5 * T_B),
                     flip_profile(F0, 0.7 * T_B, 3.5 * T_B),
                     shuttle_profile(F0, hbar, 4)):
            model = TBModel(delta=1.0, hbar=hbar, f_profile=prof,
                            n_sites=n_sites)
            for t in (T_B / 2, T_B, 3 * T_B):
                ln, ln2 = lie_moments(model, state, t)
                c = tb_oracle(model, state, t)
                on, on2 = tb_moments(c, model.sites)
                worst = max(worst, abs(ln2 - on2) / abs(on2),
                            abs(ln - on) / max(1.0, abs(on)))
        return CheckResult("5a", "closed-form tight-binding moments match "
                           "the exact propagator", worst <= 1e-8,
                           f"worst relative error {worst:.2e} (tol 1e-8)")

    def check_5b_tb_sigma_scaling(self) -> CheckResult:
        hbar = self.params.hbar
        F0 = 0.0044
        growths = []
        sigmas = (10.0, 20.0, 40.0)
        for sigma in sigmas:
            n_sites = 2 * int(10 * sigma + 160) + 1
            state = TBGaussian(sigma_n=sigma, n_sites=n_sites)
            model = TBModel(delta=1.0, hbar=hbar,
                            f_profile=shuttle_profile(F0, hbar, 2),
                            n_sites=n_sites)
            c = tb_oracle(model, state, 2 * model.bloch_period())
            mn, mn2 = tb_moments(c, model.sites)
            n2_0 = tb_moments(state.c.astype(complex), model.sites)[1]
            growths.append(mn2 - mn ** 2 - n2_0)
        slope = np.polyfit(np.log(sigmas), np.log(growths), 1)[0]
        ok = abs(slope + 4.0) < 0.2
        return CheckResult("5b", "tight-binding dispersion scales as "
                           "sigma_n^-4", ok,
                           f"log-log slope {slope:.3f} (tol -4 +- 0.2)")

    def check_6_free_spreading(self) -> CheckResult:
        from .schedules import ControlSchedule, Segment
        t_end = 2000.0
        steps = 6400 if not self.quick else 3200
        psi0 = self.gaussian60
        sched = ControlSchedule((Segment(0.0, t_end, 0.0, 0.0, 0.0),))
        cfg = PropagationConfig(dt=t_end / steps, snapshot_stride=10 ** 9,
                                moment_stride=steps, absorber_width=0.0)
        m = dense_moments(run(psi0, sched, cfg,
                              self.params.with_(F=0.0, A=0.0)))
        growth = m.var_x[-1] - m.var_x[0]
        pred = self.params.hbar ** 2 * t_end ** 2 / (4.0 * m.var_x[0])
        err = abs(growth / pred - 1.0)
        return CheckResult("6", "free-packet variance growth "
                           "hbar^2 t^2 / (4 sigma^2)", err < 0.005,
                           f"growth {growth:.2f} vs {pred:.2f} "
                           f"({100 * err:.4f}%, tol 0.5%)")

    def check_7a_folding_degeneracy(self) -> CheckResult:
        gap = self.table_eps0.edge_gap()
        return CheckResult("7a", "eps = 0 minibands touch at the zone edge",
                           gap < 1e-8, f"edge gap {gap:.2e} (tol 1e-8)")

    def check_7b_miniband_structure(self) -> CheckResult:
        p = self.params.with_(eps=BZ_EPS_DOUBLE, F=0.0)
        table = solve_bands(BlochProblem(p, plane_wave_cutoff=48,
                                         n_kappa=512), n_bands=3,
                            check_cutoff=False)
        gap01 = table.gap_01
        gap12 = float(table.energies[:, 2].min() - table.energies[:, 1].max())
        span = float(table.energies[:, 1].max() - table.energies[:, 0].min())
        ok = (gap01 > 0 and gap12 > 5 * gap01
              and abs(span / self.delta - 1.0) < 0.1)
        return CheckResult("7b", "eps = 0.121: two split minibands far below "
                           "band 2", ok,
                           f"gap01 {gap01:.4f}, gap to band 2 {gap12:.4f}, "
                           f"miniband span {span:.4f} vs Delta {self.delta:.4f}")

    def check_8a_reconstruction_single(self) -> CheckResult:
        fid = abs(self.bz_single_run.state_at(self.T_B).overlap(self.gaussian60))
        return CheckResult("8a", "eps = 0.0825 reconstructs after one Bloch "
                           "time", fid >= 0.9,
                           f"|<psi0|psi(T_B)>| = {fid:.4f} (tol >= 0.9)")

    def check_8b_reconstruction_double(self) -> CheckResult:
        fid = abs(self.bz_double_run.final.overlap(self.gaussian60))
        return CheckResult("8b", "eps = 0.121 reconstructs after two Bloch "
                           "times", fid >= 0.9,
                           f"|<psi0|psi(2T_B)>| = {fid:.4f} (tol >= 0.9)")

    def check_8c_no_single_time_reconstruction(self) -> CheckResult:
        fid = abs(self.bz_double_run.state_at(self.T_B).overlap(self.gaussian60))
        return CheckResult("8c", "eps = 0.121 not yet reconstructed at T_B",
                           fid < 0.7,
                           f"|<psi0|psi(T_B)>| = {fid:.4f} (tol < 0.7)")

    def check_9_occupation_law(self) -> CheckResult:
        occ = occupation_series(self.bz_single_run, self.table_0825)
        ns = np.arange(occ.p0.size)
        q = self.table_0825.miniladder_offset_gap() / (
            self.params.d * abs(self.params.F))
        s = 2 * round((q - 1) / 2) + 1        # nearest odd integer
        fit = occupation_cosine_fit(ns, occ.p0, s / 2.0)
        ok = fit["rms"] < 0.02
        return CheckResult("9", "miniband occupation follows the cosine law "
                           "at multiples of T_1", ok,
                           f"rms {fit['rms']:.4f} with s/r = {s}/2 "
                           f"(tol 0.02); X={fit['X']:.3f} Y={fit['Y']:.3f}")

    @cached_property
    def split_t2_final(self):
        p = self.params.with_(eps=BZ_EPS_SINGLE)
        sched = schedule_from_table("split_t2", p, 1)
        return run(self.gaussian60, sched, self._config(), p).final

    def check_10a_beam_splitter(self) -> CheckResult:
        f = self.split_t2_final
        pl = interval_probability(f, *SPLIT_T2_LOWER)
        pu = interval_probability(f, *SPLIT_T2_UPPER)
        gap = interval_probability(f, SPLIT_T2_LOWER[1], SPLIT_T2_UPPER[0])
        ok = (0.05 < pl < 0.95 and 0.05 < pu < 0.95 and pl + pu > 0.9
              and gap < 0.01)
        return CheckResult("10a", "table-2 splitter: two disjoint packets, "
                           "little loss", ok,
                           f"branches {pl:.3f} / {pu:.3f} (sum {pl + pu:.3f}, "
                           f"tol > 0.9), between-branch weight {gap:.4f}")

    def check_10b_eps_transition(self) -> CheckResult:
        data = self.eps_sweep
        eps, up = data["eps"], data["p_upper"]
        pos = eps >= -1e-12
        up_pos = up[pos][np.argsort(eps[pos])]
        neg = eps <= 1e-12
        up_neg = up[neg][np.argsort(-eps[neg])]
        mono = bool(np.all(np.diff(up_pos) > -1e-3)
                    and np.all(np.diff(up_neg) > -1e-3))
        swing = float(up.max() - up.min())
        even = float(np.max(np.abs(up_pos - up_neg)))
        ok = mono and swing > 0.5 and even < 0.02
        return CheckResult("10b", "branch occupation vs eps: even, monotone "
                           "transition across |eps| <= 0.2", ok,
                           f"monotone={mono}, swing {swing:.3f}, "
                           f"evenness dev {even:.4f}")

    def check_11a_mzi_period(self) -> CheckResult:
        data = self.mzi_sweep
        fit = fringe_fit(data["V0"], data["p_upper"])
        self._mzi_fit = fit
        pred = 10.0 * 2.0 * np.pi * abs(self.params.F)
        err = abs(fit["period"] / pred - 1.0)
        return CheckResult("11a", "Mach-Zehnder fringe period "
                           "10*2*pi*F", err < 0.03,
                           f"period {fit['period']:.5f} vs {pred:.5f} "
                           f"({100 * err:.2f}%, tol 3%)")

    def check_11b_mzi_contrast(self) -> CheckResult:
        fit = getattr(self, "_mzi_fit", None)
        if fit is None:
            data = self.mzi_sweep
            fit = fringe_fit(data["V0"], data["p_upper"])
        ok = abs(fit["contrast"] - 0.977) <= 0.02
        return CheckResult("11b", "Mach-Zehnder fringe contrast", ok,
                           f"contrast {fit['contrast']:.4f} "
                           f"(raw {fit['raw_contrast']:.4f}, tol 0.977 +- 0.02)")

    def check_12a_gpe_linear_limit(self) -> CheckResult:
        p = self.params.with_(eps=GPE_EPS, g=0.0)
        psi0 = make_gaussian(self.grid, 20.0)
        sched = schedule_from_table("bloch", p, 1)
        cfg_lin = self._config(nonlinearity_on=False)
        cfg_non = self._config(nonlinearity_on=True)
        a = run(psi0, sched, cfg_lin, p).final.psi
        b = run(psi0, sched, cfg_non, p).final.psi
        diff = float(np.max(np.abs(a - b)))
        return CheckResult("12a", "g = 0 mean-field path equals the linear "
                           "path", diff < 1e-8,
                           f"max amplitude difference {diff:.2e} (tol 1e-8)")

    def check_12b_gpe_sensitivity(self) -> CheckResult:
        data = self.gpe_sweep
        swing = float(data["p_upper"].max() - data["p_upper"].min())
        return CheckResult("12b", "interferometer output varies strongly "
                           "with g", swing > 0.2,
                           f"upper-branch swing {swing:.3f} over g in "
                           f"[0, 1.5] (tol > 0.2)")

    def check_13a_norm_conservation(self) -> CheckResult:
        p = self.params.with_(eps=BZ_EPS_SINGLE)
        steps = 10 ** 4
        sched = schedule_from_table("bloch", p, 2).truncated(steps * self.dt)
        cfg = PropagationConfig(dt=self.dt, snapshot_stride=10 ** 9,
                                moment_stride=10 ** 9, absorber_width=0.0)
        drift = abs(run(self.gaussian60, sched, cfg, p).final.norm_inside - 1.0)
        return CheckResult("13a", "norm conserved without absorber",
                           drift < 1e-9,
                           f"drift {drift:.2e} over 10^4 steps (tol 1e-9)")

    def check_13b_time_reversal(self) -> CheckResult:
        p = self.params.with_(eps=BZ_EPS_SINGLE)
        sched = schedule_from_table("bloch", p, 1).truncated(self.T_B / 4)
        cfg = PropagationConfig(dt=self.dt, snapshot_stride=10 ** 9,
                                moment_stride=10 ** 9, absorber_width=0.0)
        fwd = run(self.gaussian60, sched, cfg, p).final
        back = run(WaveFunction(self.grid, np.conj(fwd.psi)),
                   sched.reversed(), cfg, p).final
        fid = abs(np.vdot(np.conj(back.psi), self.gaussian60.psi)
                  * self.grid.dx)
        return CheckResult("13b", "time reversal recovers the initial state",
                           fid > 1.0 - 1e-6,
                           f"fidelity {min(fid, 1.0):.10f} (tol > 1 - 1e-6)")

    def check_13c_strang_order(self) -> CheckResult:
        p = self.params.with_(eps=BZ_EPS_SINGLE)
        sched = schedule_from_table("bloch", p, 1).truncated(self.T_B / 8)

        def end_state(steps):
            cfg = PropagationConfig(dt=(self.T_B / 8) / steps,
                                    snapshot_stride=10 ** 9,
                                    moment_stride=10 ** 9, absorber_width=0.0)
            return run(self.gaussian60, sched, cfg, p).final.psi

        e1, e2, e4 = end_state(1024), end_state(2048), end_state(4096)
        d12 = np.linalg.norm(e1 - e2)
        d24 = np.linalg.norm(e2 - e4)
        ratio = d12 / d24
        return CheckResult("13c", "halving dt shrinks the error second order",
                           ratio >= 3.9,
                           f"error ratio {ratio:.2f} (tol >= 3.9)")

    # ---------- driver ----------

    CHECKS = (
        "check_1_bloch_period", "check_2_bloch_amplitude",
        "check_3_shuttle_velocity", "check_4a_shuttle_dispersion_factor",
        "check_4b_shuttle_dispersion_exponent", "check_5a_tb_exactness",
        "check_5b_tb_sigma_scaling", "check_6_free_spreading",
        "check_7a_folding_degeneracy", "check_7b_miniband_structure",
        "check_8a_reconstruction_single", "check_8b_reconstruction_double",
        "check_8c_no_single_time_reconstruction", "check_9_occupation_law",
        "check_10a_beam_splitter", "check_10b_eps_transition",
        "check_11a_mzi_period", "check_11b_mzi_contrast",
        "check_12a_gpe_linear_limit", "check_12b_gpe_sensitivity",
        "check_13a_norm_conservation", "check_13b_time_reversal",
        "check_13c_strang_order",
    )

    def run_all(self, report=print) -> list:
        results = []
        for name in self.CHECKS:
            t0 = time.time()
            res = getattr(self, name)()
            results.append(res)
            status = "PASS" if res.passed else "FAIL"
            note = ""
            if not res.passed and res.expected_fail:
                note = "  [known deviation]"
            report(f"[{status}] {res.check_id:>3}  {res.name}: {res.detail} "
                   f"({time.time() - t0:.1f}s){note}")
        return results
