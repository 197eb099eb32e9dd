"""Piecewise-constant control schedules for F(t), eps(t) and A(t).

The named presets encode the published switching sequences for transport,
beam splitting and interferometry.  All segment boundaries are expressed
in units of the Bloch time T_B = 2*pi*hbar/(d*|F|) taken from the first
segment's field strength.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ScaledParams


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    F: float
    eps: float
    A: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class ProbeWindow:
    """Flat extra potential V0 on [x_left, x_right] during [t_start, t_end]."""

    t_start: float
    t_end: float
    x_left: float
    x_right: float
    V0: float


@dataclass(frozen=True)
class ControlSchedule:
    segments: tuple[Segment, ...]
    probes: tuple[ProbeWindow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        segs = self.segments
        if not segs:
            raise ScheduleError("schedule needs at least one segment")
        if abs(segs[0].t_start) > 1e-12:
            raise ScheduleError("first segment must start at t = 0")
        for a, b in zip(segs, segs[1:]):
            if abs(a.t_end - b.t_start) > 1e-9 * max(1.0, abs(a.t_end)):
                raise ScheduleError(
                    f"segments must tile [0, t_final]: gap/overlap at t = {a.t_end}"
                )
            if b.t_end <= b.t_start:
                raise ScheduleError("segment durations must be positive")
        if segs[0].t_end <= 0:
            raise ScheduleError("segment durations must be positive")
        for p in self.probes:
            if not (0.0 <= p.t_start < p.t_end <= self.t_final + 1e-9):
                raise ScheduleError(
                    f"probe window [{p.t_start}, {p.t_end}] outside [0, {self.t_final}]"
                )
            if p.x_left >= p.x_right:
                raise ScheduleError("probe window needs x_left < x_right")

    @property
    def t_final(self) -> float:
        return self.segments[-1].t_end

    def with_probe(self, t_start: float, t_end: float, x_left: float,
                   x_right: float, V0: float) -> "ControlSchedule":
        probe = ProbeWindow(t_start, t_end, x_left, x_right, V0)
        return ControlSchedule(self.segments, self.probes + (probe,))

    def truncated(self, t_end: float) -> "ControlSchedule":
        """Schedule cut off at t_end (which must lie inside it)."""
        if not 0.0 < t_end <= self.t_final + 1e-9:
            raise ScheduleError(f"cannot truncate at t = {t_end}")
        segs = []
        for s in self.segments:
            if s.t_start >= t_end - 1e-12:
                break
            segs.append(s if s.t_end <= t_end else
                        Segment(s.t_start, t_end, s.F, s.eps, s.A))
        probes = tuple(p for p in self.probes if p.t_end <= t_end + 1e-9)
        return ControlSchedule(tuple(segs), probes)

    def reversed(self) -> "ControlSchedule":
        """Time-mirrored schedule (used by the time-reversal checks)."""
        T = self.t_final
        segs = tuple(
            Segment(T - s.t_end, T - s.t_start, s.F, s.eps, s.A)
            for s in reversed(self.segments)
        )
        probes = tuple(
            ProbeWindow(T - p.t_end, T - p.t_start, p.x_left, p.x_right, p.V0)
            for p in self.probes
        )
        return ControlSchedule(segs, probes)


PRESET_NAMES = (
    "bloch", "shuttle", "bz_transport", "split_t2", "split_t3",
    "split_t4", "mzi_t5", "free_split",
)


def _segments_from_signs(boundaries, eps_signs, f_signs, params, T_B):
    """Build segments from boundaries in units of T_B and sign sequences.

    Signs multiply |F| and |eps| of params; a 0 sign switches the term off.
    """
    F0, e0, A0 = abs(params.F), abs(params.eps), params.A
    segs = []
    for i, (ta, tb) in enumerate(zip(boundaries, boundaries[1:])):
        segs.append(Segment(ta * T_B, tb * T_B,
                            f_signs[i] * F0, eps_signs[i] * e0, A0))
    return segs


def schedule_from_table(preset_name: str, params: ScaledParams,
                        n_repeats: int = 1) -> ControlSchedule:
    """Build the control schedule of a named switching sequence.

    bloch        constant F, constant eps for n_repeats Bloch times
    shuttle      F flipped every T_B/2 for n_repeats periods (eps as given)
    bz_transport two-band transport block of 2 T_B, repeated n_repeats times:
                 eps +,-,-,+ and F +,+,-,- on quarter boundaries
    split_t2     eps +,0,0,0 and F +,-,+,+ on [0, .5, 1, 1.5, 3] T_B
    split_t3     eps +,+,+,+ and F +,-,-,- on the same boundaries
    split_t4     split then shuttle apart: F +,-,+,- on [0..2], alternating
                 half-period flips on [2, 6], then + on [6, 9]; eps only +
                 during the first half period
    mzi_t5       F +,-,-,+ on [0, .5, 1, 1.5, 2] T_B with eps held constant
    free_split   lattice, eps and field all switched off at T_B/2
    """
    if n_repeats < 1:
        raise ScheduleError(f"n_repeats must be >= 1, got {n_repeats}")
    if params.F == 0:
        raise ScheduleError("presets need F != 0 to define the Bloch time")
    T_B = params.bloch_period()
    F0, e0, A0 = abs(params.F), abs(params.eps), params.A

    if preset_name == "bloch":
        segs = [Segment(0.0, n_repeats * T_B, params.F, params.eps, A0)]
    elif preset_name == "shuttle":
        segs = []
        for j in range(2 * n_repeats):
            sign = 1.0 if j % 2 == 0 else -1.0
            segs.append(Segment(j * T_B / 2, (j + 1) * T_B / 2,
                                sign * F0, params.eps, A0))
    elif preset_name == "bz_transport":
        segs = []
        for rep in range(n_repeats):
            t0 = 2.0 * rep
            segs += _segments_from_signs(
                [t0, t0 + 0.5, t0 + 1.0, t0 + 1.5, t0 + 2.0],
                eps_signs=(+1, -1, -1, +1), f_signs=(+1, +1, -1, -1),
                params=params, T_B=T_B)
    elif preset_name == "split_t2":
        segs = _segments_from_signs(
            [0.0, 0.5, 1.0, 1.5, 3.0],
            eps_signs=(+1, 0, 0, 0), f_signs=(+1, -1, +1, +1),
            params=params, T_B=T_B)
    elif preset_name == "split_t3":
        segs = _segments_from_signs(
            [0.0, 0.5, 1.0, 1.5, 3.0],
            eps_signs=(+1, +1, +1, +1), f_signs=(+1, -1, -1, -1),
            params=params, T_B=T_B)
    elif preset_name == "split_t4":
        # Alternation on [2, 6] starts opposite to the sign ending at 2 T_B,
        # continuing the shuttle pattern that carries the branches apart.
        boundaries = [0.0, 0.5, 1.0, 1.5, 2.0]
        eps_signs = [+1, 0, 0, 0]
        f_signs = [+1, -1, +1, -1]
        for j in range(8):
            boundaries.append(2.0 + 0.5 * (j + 1))
            eps_signs.append(0)
            f_signs.append(+1 if j % 2 == 0 else -1)
        boundaries.append(9.0)
        eps_signs.append(0)
        f_signs.append(+1)
        segs = _segments_from_signs(boundaries, eps_signs, f_signs, params, T_B)
    elif preset_name == "mzi_t5":
        segs = _segments_from_signs(
            [0.0, 0.5, 1.0, 1.5, 2.0],
            eps_signs=(+1, +1, +1, +1), f_signs=(+1, -1, -1, +1),
            params=params, T_B=T_B)
    elif preset_name == "free_split":
        segs = [
            Segment(0.0, 0.5 * T_B, params.F, params.eps, A0),
            Segment(0.5 * T_B, 1.5 * T_B, 0.0, 0.0, 0.0),
        ]
    else:
        raise ScheduleError(
            f"unknown preset {preset_name!r}; choose from {PRESET_NAMES}")
    return ControlSchedule(tuple(segs))
