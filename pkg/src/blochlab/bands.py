"""Field-free Bloch bands of the double-periodic lattice.

With the weak eps*cos(x/2) term the lattice period doubles to 2d = 4*pi,
the Brillouin zone halves to kappa in [-1/4, 1/4), and the ground band of
the fundamental lattice folds into two minibands separated by a gap that
opens linearly in |eps| at the zone edge.  The bands are obtained by
plane-wave diagonalization in the basis exp(i*(kappa + m/2)*x), m = -M..M;
the half-integer steps are the reciprocal vectors of the doubled lattice.

Everything here is field-free (F enters only through the derived time
scales T_B, T_1, T_2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import D_PERIOD, ScaledParams, SpatialGrid, WaveFunction

ZONE_EDGE = 0.25  # pi/(2d) = 1/4 for d = 2*pi


class CutoffError(RuntimeError):
    """Plane-wave basis too small for the requested bands."""


class CommensurabilityError(RuntimeError):
    """No commensurate eps in the given bracket."""


@dataclass(frozen=True)
class BlochProblem:
    """Diagonalization setup: parameters, basis cutoff and kappa mesh.

    The mesh spans the reduced zone [-1/4, 1/4) uniformly, including the
    -1/4 edge, so it coincides with the grid-commensurate quasimomenta of
    any spatial grid with n_kappa doubled periods.
    """

    params: ScaledParams
    plane_wave_cutoff: int = 64
    n_kappa: int = 1024

    def __post_init__(self):
        if self.plane_wave_cutoff < 32:
            raise ValueError("plane_wave_cutoff must be at least 32")
        if self.n_kappa < 128 or self.n_kappa % 2:
            raise ValueError("kappa mesh size must be even and at least 128")

    @property
    def kappa_mesh(self) -> np.ndarray:
        n = self.n_kappa
        return (np.arange(n) - n // 2) / (2.0 * n)

    @classmethod
    def for_grid(cls, grid: SpatialGrid, params: ScaledParams,
                 plane_wave_cutoff: int = 64) -> "BlochProblem":
        """Problem whose mesh matches the quasimomenta representable on grid."""
        return cls(params=params, plane_wave_cutoff=plane_wave_cutoff,
                   n_kappa=grid.doubled_periods)


def _hamiltonian_batch(kappas: np.ndarray, m: np.ndarray,
                       params: ScaledParams) -> np.ndarray:
    """Real symmetric plane-wave Hamiltonians, one per kappa.

    cos(x) couples m -> m +- 2 with amplitude A/2, cos(x/2) couples
    m -> m +- 1 with amplitude eps/2.
    """
    nb = m.size
    h = np.zeros((kappas.size, nb, nb))
    kin = 0.5 * params.hbar ** 2 * (kappas[:, None] + 0.5 * m[None, :]) ** 2
    h[:, np.arange(nb), np.arange(nb)] = kin
    i = np.arange(nb - 1)
    h[:, i, i + 1] = 0.5 * params.eps
    h[:, i + 1, i] = 0.5 * params.eps
    i = np.arange(nb - 2)
    h[:, i, i + 2] = 0.5 * params.A
    h[:, i + 2, i] = 0.5 * params.A
    return h


@dataclass(frozen=True)
class BandTable:
    """Sampled dispersion E_alpha(kappa) and Bloch eigenvectors.

    energies has shape (n_kappa, n_bands), ascending per kappa; vectors has
    shape (n_kappa, 2M+1, n_bands) with real coefficients, phase fixed so
    the largest-magnitude coefficient is positive.
    """

    params: ScaledParams
    kappa: np.ndarray
    m_values: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def n_bands(self) -> int:
        return self.energies.shape[1]

    def band_width(self, alpha: int) -> float:
        e = self.energies[:, alpha]
        return float(e.max() - e.min())

    def band_mean(self, alpha: int) -> float:
        return float(self.energies[:, alpha].mean())

    @property
    def E0_bar(self) -> float:
        return self.band_mean(0)

    @property
    def E1_bar(self) -> float:
        return self.band_mean(1)

    @property
    def gap_01(self) -> float:
        """Minimum over kappa of E_1 - E_0 (attained at the zone edge)."""
        return float((self.energies[:, 1] - self.energies[:, 0]).min())

    def edge_gap(self) -> float:
        """E_1 - E_0 at kappa = -1/4 (the folding degeneracy for eps = 0)."""
        i = int(np.argmin(np.abs(self.kappa + ZONE_EDGE)))
        return float(self.energies[i, 1] - self.energies[i, 0])

    def miniladder_offset_gap(self) -> float:
        """E1_bar - E0_bar, the weak-field miniladder offset difference."""
        return self.E1_bar - self.E0_bar

    def to_csv(self, path) -> None:
        header = "kappa," + ",".join(f"E_{a}" for a in range(self.n_bands))
        data = np.column_stack([self.kappa, self.energies])
        np.savetxt(path, data, delimiter=",", header=header, comments="",
                   fmt="%.17g")


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coefficient of each eigenvector positive."""
    idx = np.argmax(np.abs(vectors), axis=1)             # (n_kappa, n_bands)
    picked = np.take_along_axis(vectors, idx[:, None, :], axis=1)[:, 0, :]
    sign = np.where(picked < 0, -1.0, 1.0)
    return vectors * sign[:, None, :]


def _order_degenerate_by_parity(energies, vectors, m, tol=1e-10):
    """Resolve eps = 0 folding degeneracies by translation parity.

    Under x -> x + 2*pi a plane-wave component picks up (-1)^m (times a
    common phase), so sum |c_m|^2 (-1)^m separates the folded copies of the
    fundamental band.  Band 0 keeps the even-m (k = kappa) sector.
    """
    parity = (-1.0) ** (m % 2)
    for ik in range(energies.shape[0]):
        e = energies[ik]
        for a in range(e.size - 1):
            if e[a + 1] - e[a] < tol:
                pa = float(np.sum(parity * vectors[ik, :, a] ** 2))
                pb = float(np.sum(parity * vectors[ik, :, a + 1] ** 2))
                if pb > pa:
                    vectors[ik, :, [a, a + 1]] = vectors[ik, :, [a + 1, a]]
    return vectors


def solve_bands(problem: BlochProblem, n_bands: int = 2,
                check_cutoff: bool = True) -> BandTable:
    """Diagonalize the field-free Hamiltonian on the kappa mesh.

    Raises CutoffError when enlarging the basis by 8 still moves the
    highest requested band by more than 1e-8 (sampled on a few kappa).
    """
    M = problem.plane_wave_cutoff
    if n_bands > 2 * M:
        raise ValueError(f"n_bands = {n_bands} exceeds basis size 2M = {2 * M}")
    m = np.arange(-M, M + 1)
    kappas = problem.kappa_mesh

    energies = np.empty((kappas.size, n_bands))
    vectors = np.empty((kappas.size, m.size, n_bands))
    chunk = 128
    for lo in range(0, kappas.size, chunk):
        h = _hamiltonian_batch(kappas[lo:lo + chunk], m, problem.params)
        w, v = np.linalg.eigh(h)
        energies[lo:lo + chunk] = w[:, :n_bands]
        vectors[lo:lo + chunk] = v[:, :, :n_bands]

    vectors = _order_degenerate_by_parity(energies, vectors, m)
    vectors = _fix_phases(vectors)

    if check_cutoff:
        sample = kappas[:: max(1, kappas.size // 8)]
        m_big = np.arange(-(M + 8), M + 9)
        h = _hamiltonian_batch(sample, m_big, problem.params)
        w = np.linalg.eigvalsh(h)[:, :n_bands]
        idx = np.arange(0, kappas.size, max(1, kappas.size // 8))
        drift = np.max(np.abs(w[:, -1] - energies[idx, -1]))
        if drift > 1e-8:
            raise CutoffError(
                f"band {n_bands - 1} moves by {drift:.2e} when the plane-wave "
                f"cutoff grows from {M} to {M + 8}; increase plane_wave_cutoff"
            )

    return BandTable(params=problem.params, kappa=kappas, m_values=m,
                     energies=energies, vectors=vectors)


def nearest_kappa(table: BandTable, kappa: float) -> tuple[int, float]:
    """Index of the closest mesh node and the snap offset (kappa - node)."""
    mesh = table.kappa
    # fold into [-1/4, 1/4)
    folded = (kappa + ZONE_EDGE) % (2 * ZONE_EDGE) - ZONE_EDGE
    i = int(np.argmin(np.abs(mesh - folded)))
    return i, float(folded - mesh[i])


def bloch_state_on_grid(table: BandTable, alpha: int, kappa: float,
                        grid: SpatialGrid) -> WaveFunction:
    """Sample the Bloch wave chi_{alpha,kappa} on a spatial grid, unit norm.

    kappa snaps to the nearest mesh node (which must be grid-commensurate,
    i.e. the table was built with BlochProblem.for_grid).  Plane-wave
    components beyond the grid's momentum cutoff are dropped; for the low
    bands their weight is far below roundoff.
    """
    if table.kappa.size != grid.doubled_periods:
        raise ValueError(
            f"band table mesh ({table.kappa.size}) does not match the grid "
            f"({grid.doubled_periods} doubled periods); build the table with "
            f"BlochProblem.for_grid"
        )
    if alpha >= table.n_bands:
        raise ValueError(f"band {alpha} not in table with {table.n_bands} bands")
    i, _offset = nearest_kappa(table, kappa)
    kap = table.kappa[i]
    x = grid.x
    k_max = np.pi / grid.dx
    psi = np.zeros(grid.n_points, dtype=complex)
    for m, c in zip(table.m_values, table.vectors[i, :, alpha]):
        k = kap + 0.5 * m
        if abs(k) >= k_max or c == 0.0:
            continue
        psi += c * np.exp(1j * k * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return WaveFunction(grid=grid, psi=psi, absorbed_norm=0.0)


def project_onto_bands(psi: WaveFunction, table: BandTable) -> np.ndarray:
    """Projection amplitudes <chi_{alpha,kappa}|psi> for all mesh kappa.

    Returns complex array of shape (n_bands, n_kappa).  Uses the exact
    correspondence between plane-wave components and FFT bins: the momentum
    kappa_i + m/2 sits in bin i + m*n_kappa, so distinct kappa channels are
    exactly orthogonal on the grid and sum_alpha,kappa |amp|^2 = norm of psi
    when summed over a complete set of bands.
    """
    grid = psi.grid
    P = grid.doubled_periods
    if table.kappa.size != P:
        raise ValueError(
            "band table mesh does not match the grid; build with for_grid")
    N = grid.n_points
    n_m_half = N // (2 * P)
    # unit-norm momentum components: sum_j |psi_hat_j|^2 = sum |psi|^2 dx
    psi_hat = np.fft.fft(psi.psi) * grid.dx / np.sqrt(grid.length)
    # phase reference: FFT assumes x starts at grid.x[0], plane waves are
    # referenced to x = 0
    psi_hat *= np.exp(-1j * grid.k * grid.x_min)

    m_grid = np.arange(-n_m_half, n_m_half)
    # channel matrix Psi[i_kappa, m]: bin (i - P/2) + m*P modulo N
    i_kappa = np.arange(P) - P // 2
    bins = (i_kappa[:, None] + m_grid[None, :] * P) % N
    channels = psi_hat[bins]                      # (P, n_m)

    # align table m range with the grid-supported range
    sel = (table.m_values >= m_grid[0]) & (table.m_values <= m_grid[-1])
    m_common = table.m_values[sel]
    cols = m_common - m_grid[0]
    amps = np.einsum("kmb,km->bk", table.vectors[:, sel, :],
                     channels[:, cols])
    return amps


def synthesize_from_bands(amps: np.ndarray, table: BandTable,
                          grid: SpatialGrid) -> WaveFunction:
    """Inverse of project_onto_bands: rebuild psi = sum amp chi_{alpha,kappa}."""
    P = grid.doubled_periods
    if table.kappa.size != P:
        raise ValueError(
            "band table mesh does not match the grid; build with for_grid")
    N = grid.n_points
    n_m_half = N // (2 * P)
    m_grid = np.arange(-n_m_half, n_m_half)
    i_kappa = np.arange(P) - P // 2
    bins = (i_kappa[:, None] + m_grid[None, :] * P) % N

    sel = (table.m_values >= m_grid[0]) & (table.m_values <= m_grid[-1])
    cols = table.m_values[sel] - m_grid[0]
    channels = np.zeros((P, m_grid.size), dtype=complex)
    channels[:, cols] = np.einsum("kmb,bk->km", table.vectors[:, sel, :], amps)

    psi_hat = np.zeros(N, dtype=complex)
    psi_hat[bins.ravel()] = channels.ravel()
    psi_hat *= np.exp(1j * grid.k * grid.x_min)
    psi = np.fft.ifft(psi_hat) * np.sqrt(grid.length) / grid.dx
    return WaveFunction(grid=grid, psi=psi, absorbed_norm=0.0)


def band_filtered_state(psi: WaveFunction, table: BandTable,
                        bands=(0,)) -> WaveFunction:
    """Projection of psi onto the listed minibands, renormalized to 1.

    Useful for preparing packets free of the few-percent higher-band
    admixture of a bare Gaussian, e.g. for clean single-band transport.
    """
    amps = project_onto_bands(psi, table)
    keep = np.zeros_like(amps)
    for b in bands:
        keep[b] = amps[b]
    out = synthesize_from_bands(keep, table, psi.grid)
    norm = np.sqrt(np.sum(np.abs(out.psi) ** 2) * psi.grid.dx)
    if norm == 0.0:
        raise ValueError("state has no weight in the requested bands")
    out.psi /= norm
    return out


def time_scales(table: BandTable, params: ScaledParams) -> dict:
    """Characteristic times: T_B = 2*pi*hbar/(d|F|), T_1 = T_B/2 and the
    miniladder beat period T_2 = 2*pi*hbar/(E1_bar - E0_bar)."""
    if params.F == 0:
        raise ValueError("T_B and T_1 are undefined for F = 0")
    T_B = params.bloch_period()
    gap = table.miniladder_offset_gap()
    T_2 = 2.0 * np.pi * params.hbar / gap
    return {"T_B": T_B, "T_1": 0.5 * T_B, "T_2": T_2}


def t1_over_t2(params: ScaledParams, plane_wave_cutoff: int = 32,
               n_kappa: int = 256) -> float:
    """T_1/T_2 = (E1_bar - E0_bar) / (2 d |F|) for the given parameters."""
    prob = BlochProblem(params=params, plane_wave_cutoff=plane_wave_cutoff,
                        n_kappa=n_kappa)
    table = solve_bands(prob, n_bands=2, check_cutoff=False)
    return table.miniladder_offset_gap() / (2.0 * D_PERIOD * abs(params.F))


def find_commensurate_eps(params: ScaledParams, target: Fraction | tuple,
                          bracket: tuple[float, float], tol: float = 1e-4,
                          plane_wave_cutoff: int = 32,
                          n_kappa: int = 256) -> float:
    """Bisect for the eps where T_1/T_2 equals the rational target s/r.

    The ratio must be continuous and monotone across the bracket (checked
    by sampling); raises CommensurabilityError when the target is not
    bracketed.
    """
    if isinstance(target, tuple):
        target = Fraction(*target)
    goal = float(target)
    lo, hi = bracket
    if not lo < hi:
        raise ValueError("bracket must satisfy eps_lo < eps_hi")

    def f(eps):
        return t1_over_t2(params.with_(eps=eps), plane_wave_cutoff,
                          n_kappa) - goal

    samples = np.linspace(lo, hi, 7)
    values = [f(e) for e in samples]
    diffs = np.diff(values)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise CommensurabilityError(
            f"T_1/T_2 is not monotone on [{lo}, {hi}]; narrow the bracket")
    if values[0] * values[-1] > 0:
        raise CommensurabilityError(
            f"target T_1/T_2 = {target} not bracketed on [{lo}, {hi}]: "
            f"ratio spans [{min(values) + goal:.6g}, {max(values) + goal:.6g}]")

    f_lo = values[0]
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < tol:
            return mid
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def reconstruction_eps_candidates(params: ScaledParams, bloch_periods: int,
                                  bracket: tuple[float, float],
                                  n_scan: int = 25, **solver_kwargs) -> list:
    """All eps in the bracket giving wave-packet reconstruction after exactly
    bloch_periods Bloch times.

    Reconstruction at r*T_1 requires T_1/T_2 = s/r in lowest terms; with
    r = 2*bloch_periods this means q = (E1_bar - E0_bar)/(d|F|) crosses an
    odd multiple of 1/bloch_periods.  Returns a list of (eps, s, r).
    """
    if bloch_periods < 1:
        raise ValueError("bloch_periods must be >= 1")
    r = 2 * bloch_periods
    lo, hi = bracket
    eps_scan = np.linspace(lo, hi, n_scan)
    q = np.array([2.0 * t1_over_t2(params.with_(eps=e), **solver_kwargs)
                  for e in eps_scan])
    out = []
    # s must be odd for s/r to be in lowest terms (r is a power-of-two times 2)
    mq = q * bloch_periods
    for a, b, qa, qb in zip(eps_scan, eps_scan[1:], mq, mq[1:]):
        s_lo, s_hi = sorted((qa, qb))
        first_odd = int(np.floor(s_lo))
        for s in range(first_odd, int(np.ceil(s_hi)) + 1):
            if s % 2 == 1 and s_lo <= s <= s_hi:
                eps = find_commensurate_eps(
                    params, Fraction(s, r), (a, b), **solver_kwargs)
                out.append((eps, s, r))
    return out


def ground_band_width(params: ScaledParams, plane_wave_cutoff: int = 32,
                      n_kappa: int = 256) -> float:
    """Energy width of the fundamental-lattice ground band (eps = 0).

    In the folded zone the unfolded ground band is the union of minibands
    0 and 1, so its width is max E_1 - min E_0 of the eps = 0 table.
    """
    prob = BlochProblem(params=params.with_(eps=0.0),
                        plane_wave_cutoff=plane_wave_cutoff, n_kappa=n_kappa)
    table = solve_bands(prob, n_bands=2, check_cutoff=False)
    return float(table.energies[:, 1].max() - table.energies[:, 0].min())
