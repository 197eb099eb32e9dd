"""Split-operator time evolution under the tilted-lattice Hamiltonian.

Strang splitting: half potential phase in position space, full kinetic
phase in momentum space (via FFT), half potential phase.  The tilt F*x is
applied directly in the potential phase; components escaping to large |x|
are removed by a smooth cos^2 absorbing layer at the domain edges so they
cannot wrap around, and the removed probability is tracked.

With g != 0 the mean-field term g*|psi|^2 is added to each potential
half-phase using the density at the start of that half-step (standard
split-step treatment of the nonlinearity).

Stability: keep the kinetic phase per step moderate over the momenta the
dynamics populates.  On the default grid (dx = pi/4) the tilted-lattice
runs need at least ~4096 steps per Bloch period; coarser stepping heats
the packet into high-momentum components and the absorber removes it.
The defaults (8192 steps per T_B) carry a factor-two margin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft, ifft

from .model import ScaledParams, SpatialGrid, WaveFunction
from .schedules import ControlSchedule, Segment


class PropagationError(RuntimeError):
    """Non-finite amplitudes encountered while stepping."""


@dataclass(frozen=True)
class PropagationConfig:
    """Integrator settings.

    dt              time step (choose it to divide every segment length;
                    steps_per_bloch_period is the convenient constructor)
    absorber_width  fraction of the domain per edge covered by the
                    absorbing layer (0 disables it)
    absorber_strength  peak damping rate of the layer
    snapshot_stride steps between stored |psi| snapshots
    moment_stride   steps between stored <x>, <x^2> samples
    store_complex   also keep the full complex state at snapshot times
    nonlinearity_on None picks g != 0 automatically; set explicitly to
                    force the linear or mean-field code path
    """

    dt: float
    absorber_width: float = 0.05
    absorber_strength: float = 1.0
    snapshot_stride: int = 256
    moment_stride: int = 8
    store_complex: bool = False
    nonlinearity_on: bool | None = None

    def __post_init__(self):
        if self.dt == 0:
            raise ValueError("dt must be nonzero")
        if not 0.0 <= self.absorber_width < 0.25:
            raise ValueError("absorber_width must lie in [0, 0.25)")
        if self.snapshot_stride < 1 or self.moment_stride < 1:
            raise ValueError("strides must be positive")

    @classmethod
    def for_params(cls, params: ScaledParams, steps_per_bloch_period: int = 8192,
                   **kwargs) -> "PropagationConfig":
        return cls(dt=params.bloch_period() / steps_per_bloch_period, **kwargs)


@dataclass
class Trajectory:
    """Stored time evolution: |psi| snapshots plus dense moment series."""

    grid: SpatialGrid
    times: np.ndarray                 # snapshot times
    steps: np.ndarray                 # snapshot step indices
    densities: np.ndarray             # |psi| at snapshots, (n_snap, n_points)
    absorbed: np.ndarray              # absorbed norm at snapshot times
    moment_times: np.ndarray
    mean_x: np.ndarray
    var_x: np.ndarray
    norm_inside: np.ndarray
    final: WaveFunction
    psis: list = field(default_factory=list)   # complex snapshots if requested

    @property
    def n_snapshots(self) -> int:
        return len(self.times)

    def state_at(self, t: float) -> WaveFunction:
        """Stored complex state closest to time t (store_complex runs only)."""
        if not self.psis:
            raise ValueError("trajectory was run without store_complex")
        i = int(np.argmin(np.abs(self.times - t)))
        return WaveFunction(self.grid, self.psis[i].copy(),
                            float(self.absorbed[i]))


def segment_potential(grid: SpatialGrid, seg: Segment,
                      probe_v: np.ndarray | None = None) -> np.ndarray:
    """Static potential of one schedule segment (without the g|psi|^2 term)."""
    x = grid.x
    v = seg.A * np.cos(x) + seg.eps * np.cos(0.5 * x) + seg.F * x
    if probe_v is not None:
        v = v + probe_v
    return v


def probe_potential(grid: SpatialGrid, x_left: float, x_right: float,
                    V0: float) -> np.ndarray:
    """Flat square barrier/well on [x_left, x_right], sharp edges."""
    x = grid.x
    return np.where((x >= x_left) & (x <= x_right), V0, 0.0)


def absorber_mask(grid: SpatialGrid, width_fraction: float, strength: float,
                  dt: float) -> np.ndarray | None:
    """Per-step damping factor exp(-strength*|dt|*s(x)), s a cos^2 edge ramp."""
    if width_fraction == 0.0 or strength == 0.0:
        return None
    x = grid.x
    w = width_fraction * grid.length
    s = np.zeros(grid.n_points)
    left = x < grid.x_min + w
    right = x > grid.x_max - w
    s[left] = np.cos(0.5 * np.pi * (x[left] - grid.x_min) / w) ** 2
    s[right] = np.cos(0.5 * np.pi * (grid.x_max - x[right]) / w) ** 2
    return np.exp(-strength * abs(dt) * s)


def _kinetic_phase(grid: SpatialGrid, params: ScaledParams,
                   dt: float) -> np.ndarray:
    # E(k) = hbar^2 k^2 / 2, phase = E dt / hbar
    return np.exp(-0.5j * params.hbar * grid.k ** 2 * dt)


def step(psi: WaveFunction, v: np.ndarray, dt: float, params: ScaledParams,
         g: float = 0.0, mask: np.ndarray | None = None) -> WaveFunction:
    """One Strang step under the static potential v (plus optional g|psi|^2).

    Functional version used by tests and small studies; run() applies the
    same update in a preallocated loop.
    """
    arr = psi.psi.copy()
    kin = _kinetic_phase(psi.grid, params, dt)
    half = np.exp(-0.5j * v * dt / params.hbar)
    coef = -0.5j * g * dt / params.hbar
    dx = psi.grid.dx

    arr *= half
    if g != 0.0:
        arr *= np.exp(coef * np.abs(arr) ** 2)
    arr = ifft(kin * fft(arr))
    arr *= half
    if g != 0.0:
        arr *= np.exp(coef * np.abs(arr) ** 2)
    absorbed = psi.absorbed_norm
    if mask is not None:
        before = float(np.sum(np.abs(arr) ** 2)) * dx
        arr *= mask
        absorbed += before - float(np.sum(np.abs(arr) ** 2)) * dx
    if not np.all(np.isfinite(arr)):
        raise PropagationError("non-finite amplitudes after a single step")
    return WaveFunction(psi.grid, arr, absorbed)


def _spans(schedule: ControlSchedule, dt: float):
    """Split the schedule into spans of constant potential, in step units.

    Segment boundaries must sit on the step grid to 1e-9 relative; probe
    windows snap to the nearest step boundary.
    """
    seg_steps = []
    total = 0
    for seg in schedule.segments:
        n = round(seg.duration / dt)
        if n < 1 or abs(n * dt - seg.duration) > 1e-9 * max(1.0, seg.duration):
            raise ValueError(
                f"dt = {dt} does not divide segment [{seg.t_start}, "
                f"{seg.t_end}] (duration {seg.duration})")
        seg_steps.append((total, total + n, seg))
        total += n

    breaks = {0, total}
    for lo, hi, _ in seg_steps:
        breaks.update((lo, hi))
    probe_steps = []
    for p in schedule.probes:
        lo = round(p.t_start / dt)
        hi = round(p.t_end / dt)
        lo, hi = max(0, lo), min(total, hi)
        probe_steps.append((lo, hi, p))
        breaks.update((lo, hi))

    spans = []
    marks = sorted(breaks)
    for lo, hi in zip(marks, marks[1:]):
        seg = next(s for a, b, s in seg_steps if a <= lo and hi <= b)
        active = [p for a, b, p in probe_steps if a <= lo and hi <= b]
        spans.append((lo, hi, seg, active))
    return spans, total


def run(psi0: WaveFunction, schedule: ControlSchedule,
        config: PropagationConfig, params: ScaledParams) -> Trajectory:
    """Propagate psi0 through the whole schedule.

    Parameters are piecewise constant per segment; probe windows switch on
    and off at the nearest step boundary.  Returns the trajectory with a
    norm audit (norm_inside + absorbed is conserved for unitary stepping).
    """
    grid = psi0.grid
    dt = config.dt
    if dt <= 0:
        raise ValueError(
            "run() needs dt > 0; propagate backwards by conjugation "
            "(the potential is real): conj(run(conj(psi), schedule.reversed()))")
    nonlinear = (params.g != 0.0 if config.nonlinearity_on is None
                 else config.nonlinearity_on)
    g = params.g if nonlinear else 0.0

    spans, n_steps = _spans(schedule, dt)
    mask = absorber_mask(grid, config.absorber_width,
                         config.absorber_strength, dt)
    kin = _kinetic_phase(grid, params, dt)
    x = grid.x
    dx = grid.dx

    psi = psi0.psi.astype(complex).copy()
    absorbed = psi0.absorbed_norm

    snap_times, snap_steps, snaps, snap_absorbed, cpsis = [], [], [], [], []
    mom_times, means, variances, norms = [], [], [], []

    def record(step_index):
        t = step_index * dt
        if step_index % config.moment_stride == 0 or step_index == n_steps:
            rho = np.abs(psi) ** 2
            n_in = float(np.sum(rho)) * dx
            mx = float(np.sum(rho * x)) * dx / n_in
            mx2 = float(np.sum(rho * x * x)) * dx / n_in
            mom_times.append(t)
            means.append(mx)
            variances.append(mx2 - mx * mx)
            norms.append(n_in)
        if step_index % config.snapshot_stride == 0 or step_index == n_steps:
            if not np.all(np.isfinite(psi)):
                raise PropagationError(
                    f"non-finite amplitudes at step {step_index}")
            snap_times.append(t)
            snap_steps.append(step_index)
            snaps.append(np.abs(psi))
            snap_absorbed.append(absorbed)
            if config.store_complex:
                cpsis.append(psi.copy())

    record(0)
    coef = -0.5j * g * dt / params.hbar
    norm_prev = float(np.sum(np.abs(psi) ** 2)) * dx
    for lo, hi, seg, probes in spans:
        probe_v = None
        if probes:
            probe_v = np.zeros(grid.n_points)
            for p in probes:
                probe_v += probe_potential(grid, p.x_left, p.x_right, p.V0)
        v = segment_potential(grid, seg, probe_v)
        half = np.exp(-0.5j * v * dt / params.hbar)
        for istep in range(lo, hi):
            psi *= half
            if g != 0.0:
                psi *= np.exp(coef * np.abs(psi) ** 2)
            psi = ifft(fft(psi, overwrite_x=True) * kin, overwrite_x=True)
            psi *= half
            if g != 0.0:
                psi *= np.exp(coef * np.abs(psi) ** 2)
            if mask is not None:
                psi *= mask
                norm_now = float(np.sum(np.abs(psi) ** 2)) * dx
                absorbed += norm_prev - norm_now
                norm_prev = norm_now
            record(istep + 1)
        if mask is None:
            norm_prev = float(np.sum(np.abs(psi) ** 2)) * dx

    final = WaveFunction(grid, psi, absorbed)
    return Trajectory(
        grid=grid,
        times=np.asarray(snap_times),
        steps=np.asarray(snap_steps, dtype=int),
        densities=np.asarray(snaps),
        absorbed=np.asarray(snap_absorbed),
        moment_times=np.asarray(mom_times),
        mean_x=np.asarray(means),
        var_x=np.asarray(variances),
        norm_inside=np.asarray(norms),
        final=final,
        psis=cpsis,
    )
