"""Measured quantities: moments, band occupations, interval probabilities
and interference-fringe fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .bands import BandTable, project_onto_bands
from .model import WaveFunction
from .propagate import Trajectory


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class MomentSeries:
    times: np.ndarray
    mean_x: np.ndarray
    var_x: np.ndarray
    norm_inside: np.ndarray


@dataclass(frozen=True)
class BandOccupationSeries:
    times: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    residual: np.ndarray      # 1 - p0 - p1 - absorbed


def moments(traj: Trajectory) -> MomentSeries:
    """Position moments of the snapshots, on the unabsorbed density.

    The moments are normalized by the probability still on the grid; the
    accompanying norm_inside makes the conditioning explicit.
    """
    if traj.densities.size == 0:
        raise ValueError("trajectory has no snapshots")
    x = traj.grid.x
    dx = traj.grid.dx
    rho = traj.densities ** 2
    norm = rho.sum(axis=1) * dx
    mean = (rho @ x) * dx / norm
    mean2 = (rho @ (x * x)) * dx / norm
    return MomentSeries(times=traj.times.copy(), mean_x=mean,
                        var_x=mean2 - mean ** 2, norm_inside=norm)


def dense_moments(traj: Trajectory) -> MomentSeries:
    """The finely sampled moment series recorded while stepping."""
    return MomentSeries(times=traj.moment_times.copy(),
                        mean_x=traj.mean_x.copy(),
                        var_x=traj.var_x.copy(),
                        norm_inside=traj.norm_inside.copy())


def band_occupations(psi: WaveFunction, table: BandTable) -> tuple[float, float]:
    """Occupation probabilities of minibands 0 and 1.

    p_alpha sums |<chi_{alpha,kappa}|psi>|^2 over the reduced-zone mesh;
    the projection uses the exact grid orthogonality of distinct kappa
    channels, so a pure Bloch state gives p = 1 to roundoff.
    """
    amps = project_onto_bands(psi, table)
    p = np.sum(np.abs(amps) ** 2, axis=1)
    return float(p[0]), float(p[1])


def occupation_series(traj: Trajectory, table: BandTable) -> BandOccupationSeries:
    """Band occupations at every stored complex snapshot."""
    if not traj.psis:
        raise ValueError("occupation_series needs a store_complex trajectory")
    p0s, p1s, res = [], [], []
    for arr, absorbed in zip(traj.psis, traj.absorbed):
        wf = WaveFunction(traj.grid, arr, float(absorbed))
        p0, p1 = band_occupations(wf, table)
        p0s.append(p0)
        p1s.append(p1)
        res.append(1.0 - p0 - p1 - float(absorbed))
    return BandOccupationSeries(times=traj.times.copy(), p0=np.asarray(p0s),
                                p1=np.asarray(p1s), residual=np.asarray(res))


def interval_probability(psi: WaveFunction, a: float, b: float) -> float:
    """Probability on [a, b]: trapezoidal integral of |psi|^2 with the
    endpoints snapped to the grid by linear interpolation of the cumulative.
    Additive over disjoint intervals by construction."""
    grid = psi.grid
    if a >= b:
        raise ValueError("interval needs a < b")
    if a < grid.x_min or b > grid.x_max:
        raise ValueError(
            f"interval [{a}, {b}] outside the grid "
            f"[{grid.x_min:.6g}, {grid.x_max:.6g}]")
    rho = psi.density()
    # cumulative trapezoid over nodes, periodic wrap for the final cell so
    # the full domain reproduces sum |psi|^2 dx exactly
    rho_ext = np.concatenate([rho, rho[:1]])
    cells = 0.5 * (rho_ext[:-1] + rho_ext[1:]) * grid.dx
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    nodes = np.concatenate([grid.x, [grid.x_max]])
    return float(np.interp(b, nodes, cum) - np.interp(a, nodes, cum))


def quasimomentum_centroid(psi: WaveFunction) -> float:
    """Circular centroid of the folded quasimomentum density, in [-1/4, 1/4).

    The density at reduced kappa sums |psi_hat|^2 over all reciprocal
    shifts m/2; the centroid is the circular mean over the zone of width
    1/2, which drifts at -F/hbar under a constant tilt (acceleration
    theorem) independent of zone-edge wrapping.
    """
    grid = psi.grid
    P = grid.doubled_periods
    N = grid.n_points
    power = np.abs(np.fft.fft(psi.psi)) ** 2
    folded = power.reshape(N // P, P).sum(axis=0)     # index = bin mod P
    kappa = np.fft.fftfreq(P) * 0.5                   # bin i -> i/(2P), folded
    z = np.sum(folded * np.exp(1j * 4.0 * np.pi * kappa))
    if abs(z) == 0.0:
        return 0.0
    return float(np.angle(z) / (4.0 * np.pi))


def unwrap_centroids(kappas: np.ndarray) -> np.ndarray:
    """Remove the 1/2-periodic wraps from a centroid time series."""
    out = np.asarray(kappas, dtype=float).copy()
    for i in range(1, out.size):
        while out[i] - out[i - 1] > 0.25:
            out[i] -= 0.5
        while out[i] - out[i - 1] < -0.25:
            out[i] += 0.5
    return out


def fringe_fit(values: np.ndarray, probabilities: np.ndarray) -> dict:
    """Least-squares cosine fit  p = A + B cos(2 pi v / period + phase).

    Needs at least 12 samples spanning >= 1.5 fitted periods.  Returns the
    period, the phase, the contrast (max - min of the fitted curve over the
    sweep range) and, for reference, the raw max - min of the samples.
    """
    v = np.asarray(values, dtype=float)
    p = np.asarray(probabilities, dtype=float)
    if v.size < 12:
        raise FitError(f"fringe fit needs >= 12 sweep points, got {v.size}")
    span = v.max() - v.min()

    # initial period guess from the dominant nonzero Fourier mode
    vs = np.linspace(v.min(), v.max(), 256)
    ps = np.interp(vs, v[np.argsort(v)], p[np.argsort(v)])
    spec = np.abs(np.fft.rfft(ps - ps.mean()))
    freq = np.fft.rfftfreq(vs.size, d=vs[1] - vs[0])
    period0 = 1.0 / max(freq[np.argmax(spec[1:]) + 1], 1e-12)

    def model(x, a, b, period, phase):
        return a + b * np.cos(2.0 * np.pi * x / period + phase)

    guess = [p.mean(), 0.5 * (p.max() - p.min()), period0, 0.0]
    try:
        popt, _ = curve_fit(model, v, p, p0=guess, maxfev=20000)
    except RuntimeError as err:
        raise FitError(f"fringe fit did not converge: {err}") from err
    a, b, period, phase = popt
    period = abs(period)
    if b < 0:
        b, phase = -b, phase + np.pi
    phase = (phase + np.pi) % (2.0 * np.pi) - np.pi
    resid = p - model(v, a, b, period, phase)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    if span < 1.5 * period:
        raise FitError(
            f"sweep spans {span:.4g}, less than 1.5 fitted periods "
            f"({period:.4g}); residual rms {rms:.3g}")
    dense = model(np.linspace(v.min(), v.max(), 4096), a, b, period, phase)
    return {
        "period": float(period),
        "phase": float(phase),
        "offset": float(a),
        "amplitude": float(b),
        "contrast": float(dense.max() - dense.min()),
        "raw_contrast": float(p.max() - p.min()),
        "residual_rms": rms,
    }


def occupation_cosine_fit(n_values: np.ndarray, p_values: np.ndarray,
                          s_over_r: float, refine_frequency: bool = False) -> dict:
    """Fit p(n) = X + Y cos(2 pi (s/r) n + phi) with the frequency fixed by
    the commensurability ratio (optionally refined over a small window).

    Linear in (X, Y cos phi, Y sin phi); rank-deficient cases (e.g. the
    ratio a half-integer, where sin(theta_n) vanishes identically) are
    resolved by the minimum-norm solution, which pins phi to 0 or pi.
    """
    n = np.asarray(n_values, dtype=float)
    p = np.asarray(p_values, dtype=float)

    def solve(ratio):
        theta = 2.0 * np.pi * ratio * n
        design = np.column_stack([np.ones_like(theta), np.cos(theta),
                                  np.sin(theta)])
        # rcond cuts the near-null sin column that appears when the ratio
        # is a half-integer (sin(theta_n) = 0 up to roundoff)
        coef, _, _, _ = np.linalg.lstsq(design, p, rcond=1e-8)
        resid = p - design @ coef
        return coef, float(np.sqrt(np.mean(resid ** 2)))

    ratio = s_over_r
    if refine_frequency:
        candidates = s_over_r + np.linspace(-0.02, 0.02, 81)
        ratio = candidates[int(np.argmin([solve(c)[1] for c in candidates]))]
    coef, rms = solve(ratio)
    x, yc, ys = coef
    y = float(np.hypot(yc, ys))
    phi = float(np.arctan2(-ys, yc))
    return {"X": float(x), "Y": y, "phi": phi, "rms": rms,
            "ratio_used": float(ratio)}
