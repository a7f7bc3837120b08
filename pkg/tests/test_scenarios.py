import math

import numpy as np
import pytest

from serre1d.flux import GRAVITY
from serre1d.grid import make_grid
from serre1d.scenarios import (
    BORE_VELOCITY_FLAG,
    ScenarioConfig,
    ScenarioError,
    SolitonParams,
    build,
    dam_break_ic,
    rectangular_wave_ic,
    soliton_fields,
    stoker_middle_state,
    sww_dam_break_exact,
    undular_bore_config,
)


def test_soliton_parameters_reference():
    p = SolitonParams(10.0, 1.0)
    assert p.c == pytest.approx(10.387973815908472, rel=1e-15)
    assert p.kappa == pytest.approx(0.026111648393354676, rel=1e-15)
    h, u, G, du = soliton_fields(p, 0.0, 0.0)
    assert h == pytest.approx(11.0) and du == pytest.approx(0.0, abs=1e-15)
    assert u == pytest.approx(0.9443612559916793, rel=1e-14)


def test_soliton_translates_at_celerity():
    p = SolitonParams(10.0, 1.0)
    x = np.linspace(-50, 50, 11)
    assert np.allclose(soliton_fields(p, x + p.c * 3.0, 3.0)[0], soliton_fields(p, x, 0.0)[0])


def test_soliton_G_matches_finite_differences():
    """Closed-form G against an eighth-order finite-difference evaluation."""
    p = SolitonParams(10.0, 1.0)
    x = np.linspace(-60, 60, 25)
    d = 1e-2
    w1 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
    off = np.arange(-4, 5) * d
    def H(y): return soliton_fields(p, y, 0.0)[0]
    def U(y): return soliton_fields(p, y, 0.0)[1]
    flux = lambda y: H(y) ** 3 * sum(w * U(y + o) for w, o in zip(w1, off)) / d  # noqa: E731
    dflux = sum(w * flux(x + o) for w, o in zip(w1, off)) / d
    G_fd = U(x) * H(x) - dflux / 3.0
    assert np.max(np.abs(G_fd - soliton_fields(p, x, 0.0)[2])) < 1e-8


def test_soliton_validation():
    with pytest.raises(ScenarioError):
        SolitonParams(0.0, 1.0)
    with pytest.raises(ScenarioError):
        SolitonParams(1.0, 1.0, g=0.0)


@pytest.mark.parametrize(
    "h1, h0, h_m, u_m, s",
    [
        (10.0, 1.0, 3.961748167994429, 7.340769044034992, 9.819294775345178),
        (10.0, 2.0, 5.07871434456667, 5.692122049680139, 9.389848706085026),
        (1.8, 1.0, 1.36897726483452, 1.0749826171210923, 3.9883941456151413),
    ],
)
def test_stoker_middle_states(h1, h0, h_m, u_m, s):
    got = stoker_middle_state(h1, h0, GRAVITY)
    assert got == pytest.approx((h_m, u_m, s), rel=1e-12)
    # Rankine-Hugoniot mass jump across the shock
    assert s * (h_m - h0) == pytest.approx(h_m * u_m, rel=1e-12)


def test_stoker_profile_structure():
    sol = sww_dam_break_exact(10.0, 1.0, GRAVITY, 500.0, 30.0)
    x = np.linspace(0, 1000, 2001)
    h, u = sol.profile(x, 30.0)
    assert h.dtype == float
    assert h.max() == pytest.approx(10.0) and h.min() == pytest.approx(1.0)
    assert np.all(np.diff(h[x < 500 + sol.shock_speed * 30 - 1]) <= 1e-12)
    assert sol.head_speed == pytest.approx(-math.sqrt(GRAVITY * 10.0))
    # rarefaction joins continuously onto the middle state
    c1 = math.sqrt(GRAVITY * 10.0)
    assert (2 * c1 - sol.tail_speed) ** 2 / (9 * GRAVITY) == pytest.approx(sol.h_m, rel=1e-12)


def test_stoker_equal_depths_and_bad_order():
    h, u = sww_dam_break_exact(2.0, 2.0, GRAVITY, 0.0, 1.0, x=np.arange(3))
    assert np.all(h == 2.0) and np.all(u == 0.0)
    with pytest.raises(ScenarioError):
        stoker_middle_state(1.0, 2.0)
    with pytest.raises(ScenarioError):
        sww_dam_break_exact(10.0, 1.0, GRAVITY, 0.0, 0.0).profile(np.zeros(2), 0.0)


def test_dam_break_snaps_to_interface():
    grid = make_grid(0.0, 10.0, 10)
    ic = dam_break_ic(2.0, 1.0, 4.3, grid)
    assert ic.metadata == {"x_dam": 4.3, "x_dam_snapped": 4.0}
    assert np.array_equal(ic.h[2:-2], [2, 2, 2, 2, 1, 1, 1, 1, 1, 1])
    assert np.all(ic.G == 0.0)


def test_rectangular_wave_ic():
    grid = make_grid(-5.0, 5.0, 20)
    ic = rectangular_wave_ic(0.1, 0.01, 0.61, grid)
    assert ic.metadata["b_snapped"] == (-0.5, 0.5)
    inside = np.abs(grid.centers) < 0.5
    assert np.allclose(ic.h[2:-2][inside], 0.09) and np.allclose(ic.h[2:-2][~inside], 0.1)
    with pytest.raises(ScenarioError):
        rectangular_wave_ic(0.1, 0.2, 1.0, grid)


def test_config_validation():
    base = dict(scenario="dam_break", x_min=0.0, x_max=1.0, n_cells=10, cr=0.5, t_end=1.0)
    with pytest.raises(ScenarioError, match="unknown scenario"):
        ScenarioConfig(**{**base, "scenario": "tsunami"})
    with pytest.raises(ScenarioError, match="missing"):
        ScenarioConfig(**base, params={"h1": 1.0})
    with pytest.raises(ScenarioError, match="unknown parameter"):
        ScenarioConfig(**base, params={"h1": 1.0, "h0": 0.5, "a0": 1})
    with pytest.raises(ScenarioError, match="cr"):
        ScenarioConfig(**{**base, "cr": 0.0}, params={"h1": 1.0, "h0": 0.5})
    with pytest.raises(ScenarioError, match="boundary"):
        ScenarioConfig("soliton", 0, 1, 10, 0.5, 1.0, params={"a0": 1, "a1": 1, "boundary": "open"})
    with pytest.raises(ScenarioError, match="custom"):
        ScenarioConfig("custom", 0, 1, 10, 0.5, 1.0, params={"left_h": 1, "left_u": 0, "right_h": 1, "right_u": 0})


def test_build_soliton_still_boundary():
    cfg = ScenarioConfig("soliton", -300, 300, 600, 0.2, 1.0, params={"a0": 10.0, "a1": 1.0, "boundary": "still"})
    sc = build(cfg)
    assert sc.solution is None
    assert sc.bc.left_h == 10.0 and sc.bc.right_u == 0.0
    assert np.all(sc.initial.h[:2] == 10.0) and np.all(sc.initial.G[-2:] == 0.0)


def test_build_soliton_exact_boundary():
    cfg = ScenarioConfig("soliton", -50, 50, 100, 0.2, 1.0, params={"a0": 10.0, "a1": 1.0})
    sc = build(cfg)
    assert sc.solution is not None
    assert sc.bc.left_u > 0 and sc.initial.metadata["celerity"] == pytest.approx(10.387973815908472)


def test_build_undular_bore():
    cfg = undular_bore_config()
    sc = build(cfg)
    assert cfg.n_cells == 1000 and cfg.dx == pytest.approx(0.01115)
    assert sc.interpretation == (BORE_VELOCITY_FLAG,)
    assert sc.initial.metadata["froude_up"] == pytest.approx(0.199 / math.sqrt(GRAVITY * 0.192))
    assert sc.bc.right_u == 0.0 and sc.bc.right_h == 0.22


def test_build_rectangular_wave_domain_check():
    cfg = ScenarioConfig("rectangular_wave", -0.5, 0.5, 20, 0.2, 1.0, params={"h1": 0.1, "drop": 0.01, "b": 0.61})
    with pytest.raises(ScenarioError, match="inside"):
        build(cfg)


def test_build_custom():
    def initial(grid):
        h = 1.0 + 0.1 * np.exp(-grid.padded_centers**2)
        return h, np.zeros_like(h)

    cfg = ScenarioConfig("custom", -5, 5, 50, 0.3, 0.1, initial=initial,
                         params={"left_h": 1.0, "left_u": 0.0, "right_h": 1.0, "right_u": 0.0})
    sc = build(cfg)
    assert sc.initial.h.shape == (54,)
    bad = ScenarioConfig("custom", -5, 5, 50, 0.3, 0.1, initial=lambda g: (np.ones(3), np.zeros(3)),
                         params={"left_h": 1.0, "left_u": 0.0, "right_h": 1.0, "right_u": 0.0})
    with pytest.raises(ScenarioError, match="length"):
        build(bad)
