from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from blochlab import (BlochProblem, CommensurabilityError, ScaledParams,
                      band_filtered_state, bloch_state_on_grid,
                      find_commensurate_eps, ground_band_width, make_gaussian,
                      project_onto_bands, reconstruction_eps_candidates,
                      solve_bands, synthesize_from_bands, time_scales)
from blochlab.bands import nearest_kappa
from blochlab.model import D_PERIOD

HBAR = 2.828


def small_table(eps, n_bands=2, n_kappa=256, M=32):
    prob = BlochProblem(ScaledParams(eps=eps, F=0.0), plane_wave_cutoff=M,
                        n_kappa=n_kappa)
    return solve_bands(prob, n_bands=n_bands, check_cutoff=False)


def test_eps0_zone_edge_degeneracy():
    table = small_table(0.0)
    assert table.edge_gap() < 1e-8
    assert table.gap_01 < 1e-8


def test_parity_symmetry_in_kappa():
    table = small_table(0.121)
    k = table.kappa
    for alpha in range(2):
        e = table.energies[:, alpha]
        for i in range(1, k.size // 2):
            j = np.argmin(np.abs(k + k[i]))
            assert abs(e[i] - e[j]) < 1e-9


def test_miniband_splitting_at_0121():
    table = small_table(0.121, n_bands=3)
    assert table.edge_gap() > 0.05
    span = table.energies[:, 1].max() - table.energies[:, 0].min()
    delta = ground_band_width(ScaledParams())
    assert abs(span / delta - 1.0) < 0.1
    gap12 = table.energies[:, 2].min() - table.energies[:, 1].max()
    assert gap12 > 5 * table.gap_01


def test_edge_gap_linear_in_eps():
    gaps = [small_table(e).edge_gap() for e in (0.01, 0.02, 0.04)]
    slope = np.polyfit(np.log([0.01, 0.02, 0.04]), np.log(gaps), 1)[0]
    assert abs(slope - 1.0) < 0.1


def test_cutoff_convergence():
    e32 = small_table(0.121, M=32).energies
    e64 = small_table(0.121, M=64).energies
    assert np.max(np.abs(e32 - e64)) < 1e-10


def test_band_width_against_finite_difference_oracle():
    """Central-difference discretization over one fundamental period with
    Bloch phase factors, as an independent check of the ground-band width."""
    n = 4096
    dx = D_PERIOD / n
    x = np.arange(n) * dx
    main = np.full(n, 2.0) / dx ** 2 * (HBAR ** 2 / 2) + np.cos(x)
    off = -np.ones(n - 1) / dx ** 2 * (HBAR ** 2 / 2)

    def lowest(bloch_phase):
        h = sp.diags([off, main, off], [-1, 0, 1], format="lil",
                     dtype=complex)
        h[0, -1] = -np.exp(-1j * bloch_phase) / dx ** 2 * (HBAR ** 2 / 2)
        h[-1, 0] = -np.exp(1j * bloch_phase) / dx ** 2 * (HBAR ** 2 / 2)
        vals = eigsh(h.tocsc(), k=1, which="SA",
                     return_eigenvectors=False)
        return float(vals[0])

    # band minimum at k = 0, maximum at the zone edge k = 1/2 (phase pi)
    delta_fd = lowest(np.pi) - lowest(0.0)
    delta = ground_band_width(ScaledParams(), plane_wave_cutoff=48,
                              n_kappa=512)
    assert abs(delta_fd / delta - 1.0) < 1e-4


def test_ground_band_width_value():
    delta = ground_band_width(ScaledParams())
    assert abs(delta - 0.59214) < 2e-4


def test_bloch_state_periodicity(fine_grid):
    p = ScaledParams(eps=0.121, F=0.0)
    table = solve_bands(BlochProblem.for_grid(fine_grid, p), n_bands=2)
    shift = int(round(2 * D_PERIOD / fine_grid.dx))     # 4 pi in grid cells

    chi0 = bloch_state_on_grid(table, 0, 0.0, fine_grid)
    assert np.allclose(np.roll(chi0.psi, -shift), chi0.psi, atol=1e-12)

    kappa = 0.125
    chi = bloch_state_on_grid(table, 0, kappa, fine_grid)
    phase = np.exp(1j * kappa * 2 * D_PERIOD)
    assert np.max(np.abs(np.roll(chi.psi, -shift) - phase * chi.psi)) < 1e-9


def test_bloch_state_spectral_residual(fine_grid):
    p = ScaledParams(eps=0.0825, F=0.0)
    table = solve_bands(BlochProblem.for_grid(fine_grid, p), n_bands=2)
    chi = bloch_state_on_grid(table, 0, 0.0, fine_grid)
    i0 = int(np.argmin(np.abs(table.kappa)))
    e0 = table.energies[i0, 0]
    v = p.A * np.cos(fine_grid.x) + p.eps * np.cos(0.5 * fine_grid.x)
    hchi = (np.fft.ifft(0.5 * p.hbar ** 2 * fine_grid.k ** 2
                        * np.fft.fft(chi.psi)) + v * chi.psi)
    resid = np.linalg.norm(hchi - e0 * chi.psi) / np.linalg.norm(chi.psi)
    assert resid < 1e-6


def test_nearest_kappa_snap():
    table = small_table(0.1)
    i, off = nearest_kappa(table, 0.2501)
    # folds back into the zone and snaps to the -1/4 edge node
    assert abs(table.kappa[i] + 0.25) < 1e-12
    assert abs(off) <= 0.5 / table.kappa.size


def test_projection_roundtrip(fine_grid):
    p = ScaledParams(eps=0.0825, F=0.0)
    table = solve_bands(BlochProblem.for_grid(fine_grid, p), n_bands=2)
    psi = make_gaussian(fine_grid, 30.0)
    amps = project_onto_bands(psi, table)
    rebuilt = synthesize_from_bands(amps, table, fine_grid)
    # the two minibands carry ~97% of the packet; the remainder lives in
    # higher bands, so the roundtrip reproduces the in-band component
    amps2 = project_onto_bands(rebuilt, table)
    assert np.max(np.abs(amps2 - amps)) < 1e-10
    p_total = np.sum(np.abs(amps) ** 2)
    assert 0.9 < p_total <= 1.0 + 1e-12


def test_band_filtered_state_is_pure(fine_grid):
    from blochlab import band_occupations
    p = ScaledParams(eps=0.0825, F=0.0)
    table = solve_bands(BlochProblem.for_grid(fine_grid, p), n_bands=2)
    psi = band_filtered_state(make_gaussian(fine_grid, 30.0), table, (0,))
    p0, p1 = band_occupations(psi, table)
    assert abs(p0 - 1.0) < 1e-10
    assert p1 < 1e-10


def test_time_scales():
    p = ScaledParams()
    table = small_table(0.0825)
    ts = time_scales(table, p)
    assert np.isclose(ts["T_B"], 2570.909090909091, rtol=1e-12)
    assert ts["T_1"] == ts["T_B"] / 2
    ratio = ts["T_1"] / ts["T_2"]
    gap = table.miniladder_offset_gap()
    assert np.isclose(ratio, gap / (2 * D_PERIOD * p.F), rtol=1e-12)
    # the ratio sits near a small-denominator rational (r <= 4)
    best = min(abs(ratio - round(ratio * r) / r) for r in (1, 2, 3, 4))
    assert best < 0.05
    with pytest.raises(ValueError):
        time_scales(table, ScaledParams(F=0.0))


def test_miniladder_gap_value():
    table = small_table(0.0825, n_kappa=512, M=48)
    assert abs(table.miniladder_offset_gap() - 0.364307) < 5e-5


def test_find_commensurate_two_bloch_periods():
    # reconstruction after two Bloch times: T_1/T_2 = s/4 with s odd
    eps = find_commensurate_eps(ScaledParams(), Fraction(107, 4),
                                (0.09, 0.15))
    assert abs(eps - 0.121) / 0.121 < 0.2
    p = ScaledParams(eps=eps)
    from blochlab.bands import t1_over_t2
    assert abs(t1_over_t2(p) - 107 / 4) < 1e-4


def test_reconstruction_candidates_two_bloch():
    cands = reconstruction_eps_candidates(ScaledParams(), 2, (0.09, 0.15))
    assert len(cands) == 1
    eps, s, r = cands[0]
    assert r == 4 and s % 2 == 1
    assert abs(eps - 0.121) / 0.121 < 0.2


@pytest.mark.xfail(strict=True, reason=(
    "the field-free miniband means underestimate the dynamical miniladder "
    "splitting by ~0.3 ladder units, so the predicted single-period "
    "reconstruction eps lands ~22% above 0.0825 (see notes in README)"))
def test_reconstruction_candidates_single_bloch_near_paper_value():
    cands = reconstruction_eps_candidates(ScaledParams(), 1, (0.05, 0.15))
    assert len(cands) == 1
    eps, s, r = cands[0]
    assert r == 2 and s % 2 == 1
    assert abs(eps - 0.0825) / 0.0825 < 0.2


def test_reconstruction_candidate_single_bloch_is_commensurate():
    from blochlab.bands import t1_over_t2
    cands = reconstruction_eps_candidates(ScaledParams(), 1, (0.05, 0.15))
    (eps, s, r), = cands
    assert r == 2 and s == 53
    assert abs(t1_over_t2(ScaledParams(eps=eps)) - s / r) < 1e-4


def test_commensurate_requires_bracketing():
    # near eps = 0 no commensurability with a small target is reachable
    with pytest.raises(CommensurabilityError):
        find_commensurate_eps(ScaledParams(), Fraction(1, 1), (1e-4, 0.02))


def test_band_table_csv(tmp_path):
    table = small_table(0.0)
    path = tmp_path / "bands.csv"
    table.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    header = path.read_text().splitlines()[0]
    assert header == "kappa,E_0,E_1"
    i_edge = np.argmin(np.abs(data[:, 0] + 0.25))
    assert abs(data[i_edge, 2] - data[i_edge, 1]) < 1e-8
