import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blochlab import ScaledParams, ScheduleError, schedule_from_table
from blochlab.schedules import ControlSchedule, ProbeWindow, Segment, PRESET_NAMES

P = ScaledParams(eps=0.0825)
T_B = P.bloch_period()


def signs(values):
    return [0 if v == 0 else int(np.sign(v)) for v in values]


def test_bloch_single_segment():
    s = schedule_from_table("bloch", P, 1)
    assert len(s.segments) == 1
    seg = s.segments[0]
    assert seg.t_start == 0.0 and np.isclose(seg.t_end, T_B)
    assert seg.F == P.F and seg.eps == P.eps and seg.A == P.A


def test_bz_transport_table_signs():
    s = schedule_from_table("bz_transport", P, 1)
    assert len(s.segments) == 4
    assert signs([g.eps for g in s.segments]) == [+1, -1, -1, +1]
    assert signs([g.F for g in s.segments]) == [+1, +1, -1, -1]
    bounds = [g.t_start / T_B for g in s.segments] + [s.t_final / T_B]
    assert np.allclose(bounds, [0.0, 0.5, 1.0, 1.5, 2.0])


def test_bz_transport_repeats():
    s = schedule_from_table("bz_transport", P, 3)
    assert len(s.segments) == 12
    assert np.isclose(s.t_final, 6 * T_B)
    assert signs([g.eps for g in s.segments]) == [+1, -1, -1, +1] * 3


def test_split_t2_table():
    s = schedule_from_table("split_t2", P, 1)
    assert signs([g.eps for g in s.segments]) == [+1, 0, 0, 0]
    assert signs([g.F for g in s.segments]) == [+1, -1, +1, +1]
    bounds = [g.t_start / T_B for g in s.segments] + [s.t_final / T_B]
    assert np.allclose(bounds, [0.0, 0.5, 1.0, 1.5, 3.0])


def test_split_t3_table():
    s = schedule_from_table("split_t3", P, 1)
    assert signs([g.eps for g in s.segments]) == [+1, +1, +1, +1]
    assert signs([g.F for g in s.segments]) == [+1, -1, -1, -1]
    assert np.isclose(s.t_final, 3 * T_B)


def test_split_t4_table():
    s = schedule_from_table("split_t4", P, 1)
    assert np.isclose(s.t_final, 9 * T_B)
    f_signs = signs([g.F for g in s.segments])
    # initial splitting block, then the half-period alternation on [2, 6]
    # starting opposite to the sign that ends at 2 T_B, then constant +
    assert f_signs[:4] == [+1, -1, +1, -1]
    assert f_signs[4:12] == [+1, -1, +1, -1, +1, -1, +1, -1]
    assert f_signs[12] == +1
    assert signs([g.eps for g in s.segments]) == [+1] + [0] * 12
    durations = [g.duration / T_B for g in s.segments]
    assert np.allclose(durations, [0.5] * 12 + [3.0])


def test_mzi_t5_table():
    s = schedule_from_table("mzi_t5", P, 1)
    assert signs([g.F for g in s.segments]) == [+1, -1, -1, +1]
    assert all(np.isclose(g.eps, abs(P.eps)) for g in s.segments)
    assert np.isclose(s.t_final, 2 * T_B)


def test_free_split_switches_everything_off():
    s = schedule_from_table("free_split", ScaledParams(), 1)
    assert len(s.segments) == 2
    first, second = s.segments
    assert np.isclose(first.t_end, T_B / 2)
    assert first.A == 1.0 and first.F == ScaledParams().F
    assert second.F == 0.0 and second.eps == 0.0 and second.A == 0.0


def test_shuttle_alternation():
    s = schedule_from_table("shuttle", ScaledParams(), 3)
    assert len(s.segments) == 6
    assert signs([g.F for g in s.segments]) == [+1, -1, +1, -1, +1, -1]
    assert all(np.isclose(g.duration, T_B / 2) for g in s.segments)


def test_unknown_preset():
    with pytest.raises(ScheduleError, match="unknown preset"):
        schedule_from_table("nope", P, 1)
    with pytest.raises(ScheduleError):
        schedule_from_table("bloch", P, 0)
    with pytest.raises(ScheduleError):
        schedule_from_table("bloch", ScaledParams(F=0.0), 1)


@given(name=st.sampled_from(PRESET_NAMES),
       n=st.integers(min_value=1, max_value=4))
@settings(max_examples=40, deadline=None)
def test_presets_tile_time_axis(name, n):
    s = schedule_from_table(name, P, n)
    assert s.segments[0].t_start == 0.0
    for a, b in zip(s.segments, s.segments[1:]):
        assert abs(a.t_end - b.t_start) < 1e-9 * max(1.0, a.t_end)
        assert b.duration > 0
    assert s.t_final > 0


def test_schedule_validation_errors():
    seg = Segment(0.0, 1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ScheduleError):
        ControlSchedule((seg, Segment(2.0, 3.0, 0.0, 0.0, 1.0)))
    with pytest.raises(ScheduleError):
        ControlSchedule((Segment(1.0, 2.0, 0.0, 0.0, 1.0),))
    with pytest.raises(ScheduleError):
        ControlSchedule(())
    with pytest.raises(ScheduleError, match="probe"):
        ControlSchedule((seg,), (ProbeWindow(0.5, 2.0, -1.0, 1.0, 0.1),))
    with pytest.raises(ScheduleError, match="x_left"):
        ControlSchedule((seg,), (ProbeWindow(0.1, 0.2, 1.0, -1.0, 0.1),))


def test_truncated():
    s = schedule_from_table("split_t2", P, 1).truncated(0.75 * T_B)
    assert len(s.segments) == 2
    assert np.isclose(s.t_final, 0.75 * T_B)
    with pytest.raises(ScheduleError):
        schedule_from_table("bloch", P, 1).truncated(2 * T_B)


def test_reversed_mirrors_segments_and_probes():
    s = schedule_from_table("split_t2", P, 1).with_probe(
        0.2 * T_B, 0.3 * T_B, -10.0, 10.0, 0.05)
    r = s.reversed()
    assert np.isclose(r.t_final, s.t_final)
    assert np.isclose(r.segments[0].duration, s.segments[-1].duration)
    assert r.segments[0].F == s.segments[-1].F
    assert np.isclose(r.probes[0].t_start, s.t_final - 0.3 * T_B)
