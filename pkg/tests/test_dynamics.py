import math

import numpy as np
import pytest

from wanderlab.dynamics import (
    ATTRACTED,
    DRIFTING,
    JULIA_SUSPECT,
    POLE_ADJACENT,
    UNRESOLVED,
    Attracted,
    BudgetExhausted,
    Escaped,
    NotFound,
    Orbit,
    OrbitConfig,
    PoleHit,
    StationSpec,
    classify_grid,
    find_fixed_point,
    iterate,
    track_wandering,
)
from wanderlab.maps import PoleHitError, build_family, custom_map, eval_map
from wanderlab.numerics import ComplexBox
from wanderlab.regions import Disk

A1 = 2.0 ** -6
EPS1 = 2.0 ** -16
EPS2 = 1e-5


def ex1():
    return build_family("ex1", {"a": A1, "eps": EPS1})


# --- single-orbit verdicts ----------------------------------------------------

def test_orbit_points_chain():
    m = ex1()
    orb = iterate(m, 0.01 + 0.01j)
    for a, b in zip(orb.points, orb.points[1:]):
        assert eval_map(m, a) == b


def test_orbit_attracted_matches_fixed_point():
    m = ex1()
    orb = iterate(m, 0j)
    assert isinstance(orb.verdict, Attracted)
    assert orb.verdict.multiplier_modulus < 1.0
    rep = find_fixed_point(m, Disk(0j, A1 / 2))
    assert abs(orb.verdict.fixed_point - rep.location) < 1e-10


def test_orbit_pole_hit_at_start():
    orb = iterate(ex1(), complex(A1))
    assert orb.verdict == PoleHit(index=0, pole=complex(A1))
    orb2 = iterate(build_family("ex2", {"eps": EPS2}), 0j)
    assert isinstance(orb2.verdict, PoleHit)
    assert orb2.verdict.index == 0


def test_orbit_escape_index():
    orb = iterate(custom_map("(pow z 2)"), complex(2.0))
    assert isinstance(orb.verdict, Escaped)
    assert abs(orb.points[orb.verdict.first_exit_index]) > 1e6
    assert all(abs(p) <= 1e6 for p in orb.points[:orb.verdict.first_exit_index])


def test_orbit_budget_on_rotation():
    # multiply by i: a 4-cycle, never attracted, never escaping
    orb = iterate(custom_map("(mul z i)"), complex(1.0),
                  OrbitConfig(max_iter=50))
    assert isinstance(orb.verdict, BudgetExhausted)
    assert len(orb.points) == 51


def test_attraction_needs_newton_confirmation():
    # constant drift below the step tolerance: small steps forever but no
    # fixed point at all — must not be reported as attracted
    m = custom_map("(add z 1e-10)")
    orb = iterate(m, 0j, OrbitConfig(max_iter=30))
    assert isinstance(orb.verdict, BudgetExhausted)


# --- fixed points ---------------------------------------------------------------

def test_ex1_fixed_point_report():
    rep = find_fixed_point(ex1(), Disk(0j, A1 / 2))
    assert abs(rep.location) < A1 / 2
    assert rep.residual < 1e-12
    assert abs(rep.multiplier) < 1.0
    assert rep.attracting
    assert abs(rep.location - (-0.00091652390785)) < 1e-9


def test_ex5_parabolic_fixed_point():
    rep = find_fixed_point(build_family("ex5"), Disk(0j, 0.1))
    assert abs(rep.location) < 1e-12
    assert abs(abs(rep.multiplier) - 1.0) < 1e-12
    assert not rep.attracting


def test_fixed_point_not_found():
    with pytest.raises(NotFound):
        find_fixed_point(custom_map("(add z 1)"), Disk(0j, 1.0))


# --- wandering tracks -----------------------------------------------------------

def test_track_doubling_stations():
    z0 = 2j * math.pi
    centers = [z0 * 2 ** n for n in range(12)]
    flags = track_wandering(ex1(), z0, centers, A1 / 2, 11)
    assert flags == [True] * 11


def test_track_detects_wrong_stations():
    z0 = 2j * math.pi
    centers = [z0 * 2 ** n for n in range(4)]
    centers[2] += 1.0
    flags = track_wandering(ex1(), z0, centers, A1 / 2, 4)
    assert flags == [True, True, False, True]


def test_track_propagates_pole_hit():
    with pytest.raises(PoleHitError):
        track_wandering(build_family("ex2", {"eps": EPS2}), 0j,
                        [0j, 0j], 0.1, 2)


def test_track_validates_center_count():
    with pytest.raises(ValueError):
        track_wandering(ex1(), 0j, [0j], 0.1, 5)


# --- grid classification ---------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        OrbitConfig(max_iter=0)
    with pytest.raises(ValueError):
        StationSpec(radius=0.0)
    with pytest.raises(ValueError):
        StationSpec(streak=1)


def test_pixel_center_of_roundtrip():
    g = classify_grid(custom_map("z"), ComplexBox(-1.0, 1.0, -1.0, 1.0), 8, 8,
                      OrbitConfig(max_iter=2))
    for i, j in ((0, 0), (3, 5), (7, 7)):
        assert g.pixel_of(g.pixel_center(i, j)) == (i, j)
    with pytest.raises(ValueError):
        g.pixel_of(complex(2.0))


def test_uniform_escape_is_unresolved():
    g = classify_grid(custom_map("(pow z 2)"), ComplexBox(1.5, 3.0, 1.5, 3.0),
                      16, 16, OrbitConfig(max_iter=60))
    assert (g.labels == UNRESOLVED).all()
    assert (g.ids == -1).all()


def test_uniform_attraction_single_basin():
    g = classify_grid(custom_map("(pow z 2)"),
                      ComplexBox(-0.4, 0.4, -0.4, 0.4), 16, 16,
                      OrbitConfig(max_iter=200))
    assert (g.labels == ATTRACTED).all()
    assert (g.ids == 0).all()


def test_behavior_boundary_marked_suspect():
    # straddle the unit circle of the squaring map: attracted inside,
    # escaped outside, the rim must be flagged
    g = classify_grid(custom_map("(pow z 2)"), ComplexBox(0.2, 1.8, -0.5, 0.5),
                      40, 24, OrbitConfig(max_iter=300))
    assert (g.labels == ATTRACTED).any()
    assert (g.labels == UNRESOLVED).any()
    assert (g.labels == JULIA_SUSPECT).any()
    att = g.labels == ATTRACTED
    esc = g.labels == UNRESOLVED
    # no attracted pixel touches an escaped pixel directly
    assert not (att[:, 1:] & esc[:, :-1]).any()
    assert not (att[:, :-1] & esc[:, 1:]).any()
    assert not (att[1:, :] & esc[:-1, :]).any()
    assert not (att[:-1, :] & esc[1:, :]).any()


def test_ex1_window_classification():
    m = ex1()
    win = ComplexBox(-0.05, 0.05, -0.05, 0.05)
    g = classify_grid(m, win, 128, 128, OrbitConfig())
    i, j = g.pixel_of(complex(-A1))
    assert g.labels[j, i] == ATTRACTED
    assert g.ids[j, i] == 0
    pi_, pj_ = g.pixel_of(complex(A1))
    assert g.labels[pj_, pi_] == POLE_ADJACENT
    assert (g.labels == ATTRACTED).sum() > 0.5 * 128 * 128


def test_drifting_block_near_first_station():
    m = build_family("ex2", {"eps": EPS2})
    two_pi = 2.0 * math.pi
    win = ComplexBox(two_pi - 0.02, two_pi + 0.02, -0.02, 0.02)
    g = classify_grid(m, win, 4, 4, OrbitConfig(stations=StationSpec()))
    assert (g.labels == DRIFTING).all()
    assert (g.ids == 1).all()


def test_grid_deterministic_and_worker_invariant():
    m = ex1()
    win = ComplexBox(-0.05, 0.05, -0.05, 0.05)
    g1 = classify_grid(m, win, 48, 36, OrbitConfig())
    g2 = classify_grid(m, win, 48, 36, OrbitConfig())
    g3 = classify_grid(m, win, 48, 36, OrbitConfig(), workers=3)
    assert np.array_equal(g1.labels, g2.labels)
    assert np.array_equal(g1.ids, g2.ids)
    assert np.array_equal(g1.labels, g3.labels)
    assert np.array_equal(g1.ids, g3.ids)


def test_ex2_raster_headline(ex2_raster):
    g = ex2_raster
    pole_cells = np.argwhere(g.labels == POLE_ADJACENT)
    assert len(pole_cells) == 2
    assert {tuple(rc) for rc in pole_cells.tolist()} == {(199, 76), (200, 76)}
    tracks = np.unique(g.ids[g.labels == DRIFTING])
    assert {1, 2, 3}.issubset(set(tracks.tolist()))
