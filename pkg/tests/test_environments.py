import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prwalk import core
from prwalk.core import DIRECTIONS, Direction, RelativeMove, W, relative_to_absolute
from prwalk.environments import (
    Box,
    ZetaLaw,
    audit_env,
    average_drift,
    backward_inhom_env,
    flr_env,
    forward_inhom_env,
    forward_trap_env,
    homogeneous_env,
    leftright_env,
    local_drift,
    shift_env,
    structural_ok,
    symmetric_leftright_env,
    table_env,
)
from prwalk.errors import BadParameterError

from conftest import sites

E, N, Wd, S = Direction.E, Direction.N, Direction.W, Direction.S
BOX = Box.centered(20, 20)


def all_families(seed=3):
    return {
        "homogeneous": homogeneous_env(core.rank_one((0.4, 0.3, 0.2, 0.1))),
        "flr": flr_env(seed, 0.1),
        "flr_swapped": flr_env(seed, 0.1, swap_fb=True),
        "forward_inhom": forward_inhom_env(seed, ZetaLaw(0.0, 1.0)),
        "forward_trap": forward_trap_env(seed, ZetaLaw(0.0, 1.0)),
        "backward_inhom": backward_inhom_env(seed, ZetaLaw(0.0, 1.0), forbid_trap=True),
        "leftright": leftright_env(seed, 0.2),
    }


def rel(a, d, m):
    return a[d, relative_to_absolute(d, m)]


# -- homogeneous ------------------------------------------------------------------


def test_homogeneous_is_constant():
    env = homogeneous_env(W)
    assert env.matrix((5, -3)) == W
    assert np.array_equal(env.raw_matrix((5, -3)), env.raw_matrix((5, -3)))
    q = core.rank_one((0.7, 0.1, 0.1, 0.1))
    assert audit_env(homogeneous_env(q), BOX).count("isotropic") == 0
    assert audit_env(homogeneous_env(W), BOX).count("isotropic") == len(BOX)


# -- flr ----------------------------------------------------------------------------


def test_flr_rows():
    env = flr_env(42, 0.1)
    assert np.array_equal(env.raw_matrix((0, 0)), env.raw_matrix((0, 0)))
    for x in Box.centered(10).sites():
        a = env.raw_matrix(x)
        triples = {tuple(rel(a, d, m) for m in (RelativeMove.F, RelativeMove.L, RelativeMove.R)) for d in DIRECTIONS}
        assert len(triples) == 1
        f, l, r = triples.pop()
        assert min(f, l, r) >= 0.1 - 1e-12 and abs(f + l + r - 1) < 1e-12
        assert all(rel(a, d, RelativeMove.B) == 0 for d in DIRECTIONS)
        assert core.is_isotropic(a)
        assert not core.is_elliptic(a, 1e-9)


def test_flr_swapped_blocks_forward():
    env = flr_env(42, 0.1, swap_fb=True)
    a = env.raw_matrix((1, 2))
    assert all(rel(a, d, RelativeMove.F) == 0 for d in DIRECTIONS)
    assert all(rel(a, d, RelativeMove.B) >= 0.1 - 1e-12 for d in DIRECTIONS)


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.34])
def test_flr_bad_eps(eps):
    with pytest.raises(BadParameterError):
        flr_env(1, eps)


def test_flr_weights_look_uniform_on_simplex():
    # Uniform on the simplex: each weight has mean 1/3 and P(w < 1/2) = 3/4
    env = flr_env(9, 1e-9)
    w = np.array([rel(env.raw_matrix(x), E, RelativeMove.F) for x in Box.centered(60).sites()])
    assert abs(w.mean() - 1 / 3) < 0.02
    assert abs(np.mean(w < 0.5) - 0.75) < 0.03


# -- forward / backward families ----------------------------------------------------


def test_forward_inhom_rows():
    env = forward_inhom_env(1, ZetaLaw.constant(0.3))
    assert np.allclose(env.row((0, 0), E), [0, 0.5, 0, 0.5])
    assert np.allclose(env.row((0, 0), N), [0.35, 0.3, 0.35, 0])
    assert np.allclose(env.row((1, 0), S), [0.35, 0, 0.35, 0.3])
    assert np.allclose(env.row((1, 0), N), [0.5, 0, 0.5, 0])


def test_zero_zeta_gives_symmetric_leftright():
    ref = symmetric_leftright_env()
    for env in (forward_inhom_env(1, 0.0), forward_trap_env(1, 0.0), backward_inhom_env(1, 0.0)):
        for x in Box.centered(6).sites():
            assert np.array_equal(env.raw_matrix(x), ref.raw_matrix(x))


def test_forward_trap_rows():
    env = forward_trap_env(2, ZetaLaw(0.0, 1.0))
    for x in Box.centered(8).sites():
        a = env.raw_matrix(x)
        if core.parity_class(x) is core.Parity.ODD:
            for d in DIRECTIONS:
                assert rel(a, d, RelativeMove.L) == rel(a, d, RelativeMove.R) == 0.5
        else:
            z = env.zeta(x)
            for d in (N, S):
                assert a[d, d] == z
    one = forward_trap_env(2, 1.0)
    assert np.array_equal(one.row((0, 0), S), [0, 0, 0, 1])


def test_forward_trap_average_drift_zero():
    env = forward_trap_env(4, ZetaLaw(0.0, 1.0))
    assert np.allclose(average_drift(env, BOX), 0.0, atol=1e-15)


def test_backward_inhom_rows():
    env = backward_inhom_env(1, 0.5)
    assert np.allclose(env.row((0, 0), N), [0.25, 0, 0.25, 0.5])
    assert np.allclose(env.row((1, 0), S), [0.25, 0.5, 0.25, 0])
    assert np.allclose(env.row((0, 0), S), [0.5, 0, 0.5, 0])


def test_forbid_trap_breaks_every_twin_pair():
    env = backward_inhom_env(5, 1.0, forbid_trap=True)
    free = backward_inhom_env(5, 1.0)
    for x in BOX.sites():
        if core.parity_class(x) is core.Parity.EVEN:
            below = (x[0], x[1] - 1)
            assert not (env.zeta(x) == 1.0 and env.zeta(below) == 1.0)
            assert free.zeta(x) == free.zeta(below) == 1.0
    assert audit_env(env, BOX).count("stochastic") == len(BOX)


# -- leftright ---------------------------------------------------------------------


def test_leftright_rows():
    env = leftright_env(7, 0.2)
    for x in Box.centered(10).sites():
        a = env.raw_matrix(x)
        for d in DIRECTIONS:
            # exactly zero, not approximately
            assert a[d, d] == 0.0 and a[d, d.opposite] == 0.0
        if core.parity_class(x) is core.Parity.EVEN:
            assert np.all(a[a > 0] == 0.5)
            z, zp = env.zeta_pair(x)
            assert 0.2 <= z <= 0.8 and 0.2 <= zp <= 0.8
            east = env.raw_matrix((x[0] + 1, x[1]))
            assert east[E, N] == z and east[E, S] == 1 - z
            north = env.raw_matrix((x[0], x[1] + 1))
            assert north[N, E] == zp and north[N, Wd] == 1 - zp


@pytest.mark.parametrize("eps", [0.0, 0.5])
def test_leftright_bad_eps(eps):
    with pytest.raises(BadParameterError):
        leftright_env(1, eps)


def test_zeta_accessors_reject_wrong_family():
    with pytest.raises(BadParameterError):
        flr_env(1, 0.1).zeta((0, 0))
    with pytest.raises(BadParameterError):
        leftright_env(1, 0.1).zeta_pair((1, 0))


# -- shifts and drifts -------------------------------------------------------------


@given(sites, sites)
def test_shift_is_group_action(x, y):
    env = flr_env(11, 0.05)
    assert np.array_equal(shift_env(env, (0, 0)).raw_matrix(x), env.raw_matrix(x))
    moved = shift_env(env, y)
    assert np.array_equal(moved.raw_matrix(x), env.raw_matrix((x[0] + y[0], x[1] + y[1])))
    back = shift_env(moved, (-y[0], -y[1]))
    assert np.array_equal(back.raw_matrix(x), env.raw_matrix(x))
    h = homogeneous_env(core.rank_one((0.4, 0.3, 0.2, 0.1)))
    assert np.array_equal(shift_env(h, y).raw_matrix(x), h.raw_matrix(x))


def test_local_drift_examples():
    assert np.array_equal(local_drift(homogeneous_env(W), (3, 4), N), [0, 0])
    assert np.allclose(local_drift(forward_inhom_env(1, 0.3), (0, 0), N), [0, 0.3])
    assert np.array_equal(local_drift(leftright_env(1, 0.2), (0, 0), N), [0, 0])


def drift_by_summation(env, box):
    total = [0.0, 0.0]
    for x in box.sites():
        for d in DIRECTIONS:
            for d2 in DIRECTIONS:
                p = env.row(x, d)[d2]
                total[0] += p * d2.vector[0]
                total[1] += p * d2.vector[1]
    return np.array(total) / (4 * len(box))


@pytest.mark.parametrize(
    "env", [homogeneous_env(W), forward_inhom_env(1, 0.3), leftright_env(2, 0.1), flr_env(3, 0.1)]
)
def test_average_drift_matches_summation(env):
    assert np.allclose(average_drift(env, BOX), drift_by_summation(env, BOX), atol=1e-14)


def test_average_drift_balanced_box():
    assert np.allclose(average_drift(forward_inhom_env(1, 0.3), BOX), 0, atol=1e-15)
    assert np.array_equal(average_drift(homogeneous_env(W), BOX), [0, 0])


@given(st.sampled_from(sorted(all_families())), sites, st.integers(0, 3))
def test_drift_in_unit_ball(name, x, d):
    v = local_drift(all_families()[name], x, Direction(d))
    assert np.abs(v).sum() <= 1 + 1e-12


# -- purity, structure, audit -----------------------------------------------------


@pytest.mark.parametrize("name", sorted(all_families()))
def test_purity_under_repeated_queries(name):
    env = all_families()[name]
    rng = np.random.default_rng(0)
    pts = rng.integers(-1000, 1000, size=(200, 2))
    first = [env.raw_matrix(tuple(p)) for p in pts]
    for _ in range(50):
        for p, a in zip(pts, first):
            assert np.array_equal(env.raw_matrix(tuple(p)), a)


@pytest.mark.parametrize("name", sorted(all_families()))
def test_structure_and_stochasticity_over_box(name):
    env = all_families()[name]
    rep = audit_env(env, BOX)
    assert rep.count("stochastic") == len(BOX)
    assert rep.count("structural") == len(BOX)


def test_structural_check_catches_wrong_rows():
    env = forward_inhom_env(1, 0.3)
    a = env.raw_matrix((0, 0)).copy()
    a[E] = [0.3, 0.35, 0, 0.35]  # Forward out of a non-designated state
    assert not structural_ok(env, (0, 0), a)


def test_audit_examples():
    flr = audit_env(flr_env(1, 0.1), BOX)
    assert flr.footer().startswith("stochastic: all, isotropic: all")
    assert flr.count("toth") == len(BOX) and flr.min_toth_eps > 0
    lr = audit_env(leftright_env(1, 0.2), BOX)
    assert lr.count("toth") == 0 and "toth: none" in lr.footer()
    w = audit_env(homogeneous_env(W), BOX, eps=0.25)
    assert w.count("elliptic") == len(BOX)


def test_flr_norm_below_one_everywhere():
    env = flr_env(8, 0.05)
    for x in BOX.sites():
        a = env.raw_matrix(x)
        assert core.is_doubly_stochastic(a) and core.deviation_norm(a) < 1


def test_table_env_round_trip_and_bounds():
    src = flr_env(4, 0.1)
    box = Box(-2, 3, 0, 4)
    env = table_env(box, [src.raw_matrix(x) for x in box.sites()])
    for x in box.sites():
        assert np.array_equal(env.raw_matrix(x), src.raw_matrix(x))
    with pytest.raises(IndexError):
        env.raw_matrix((10, 10))


def test_box_parsing_helpers():
    b = Box.centered(20)
    assert len(b) == 400 and (-10, -10) in b and (10, 0) not in b
    with pytest.raises(BadParameterError):
        Box(0, 0, 0, 1)
    with pytest.raises(BadParameterError):
        ZetaLaw(0.5, 0.4)
