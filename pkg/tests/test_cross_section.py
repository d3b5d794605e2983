import math

import numpy as np
import pytest

from shearspec.cross_section import (
    l_shaped_mask,
    numeric_modes,
    rect_mode_value,
    rectangle_modes,
    refine_mask,
    section_constants,
)
from shearspec.geometry import Rect

PI2 = math.pi**2
UNIT = Rect(0.0, 1.0, 0.0, 1.0)


# ------------------------------------------------------------ closed forms

def test_unit_square_ground_modes():
    assert rectangle_modes(1.0, UNIT, 1)[0].E == pytest.approx(3 * PI2)
    assert rectangle_modes(0.0, UNIT, 1)[0].E == pytest.approx(2 * PI2)


def test_unit_square_second_mode_beta_one():
    modes = rectangle_modes(1.0, UNIT, 2)
    # (2,1) at 6 pi^2 beats (1,2) at 9 pi^2 once the shear weights y2
    assert modes[1].E == pytest.approx(6 * PI2)
    assert modes[1].index == (2, 1)


def test_degenerate_ties_break_lexicographically():
    modes = rectangle_modes(0.0, UNIT, 3)
    assert modes[1].E == pytest.approx(5 * PI2)
    assert modes[2].E == pytest.approx(5 * PI2)
    assert modes[1].index == (1, 2)
    assert modes[2].index == (2, 1)


def test_rectangle_mode_list_is_sorted_and_complete():
    rect = Rect(0.0, 1.0, 0.0, math.pi * math.sqrt(2.0))
    modes = rectangle_modes(1.0, rect, 12)
    E = [m.E for m in modes]
    assert E == sorted(E)
    # brute-force the same list over a wide index box
    brute = sorted(rect_mode_value(m, n, 1.0, rect)
                   for m in range(1, 40) for n in range(1, 40))[:12]
    assert np.allclose(E, brute, rtol=1e-14)


def test_closed_form_mode_is_normalized_and_vanishes_on_boundary():
    mode = rectangle_modes(1.0, Rect(0.0, 2.0, -1.0, 1.0), 1)[0]
    y1, y2 = np.meshgrid(np.linspace(0, 2, 401), np.linspace(-1, 1, 401),
                         indexing="ij")
    vals = mode.evaluate(y1, y2)
    norm2 = np.trapezoid(np.trapezoid(vals**2, y2[0], axis=1), y1[:, 0])
    assert norm2 == pytest.approx(1.0, rel=1e-4)
    # boundary traces vanish to sine roundoff
    edges = np.concatenate([vals[0], vals[-1], vals[:, 0], vals[:, -1]])
    assert np.allclose(edges, 0.0, atol=1e-12)
    # outside points are clamped to zero exactly
    assert mode.evaluate(-1.0, 0.0) == 0.0


def test_e1_strictly_increasing_in_beta():
    rect = Rect(0.0, 1.5, 0.0, 0.7)
    betas = np.linspace(0.0, 4.0, 17)
    e1 = [rectangle_modes(b, rect, 1)[0].E for b in betas]
    assert np.all(np.diff(e1) > 0)


def test_e1_simple_on_rectangles():
    for rect in (UNIT, Rect(0, 1, 0, 2), Rect(0, 2, 0, 1), Rect(0, 1, 0, 4.44)):
        for beta in (0.25, 1.0, 3.0):
            m = rectangle_modes(beta, rect, 2)
            assert m[1].E - m[0].E > 0


# ------------------------------------------------------------ numeric path

def test_numeric_matches_trivial_laplacian():
    got = numeric_modes(0.0, UNIT, 128, 1)[0].E
    assert got == pytest.approx(2 * PI2, rel=5e-3)


def test_numeric_matches_closed_form_at_128():
    got = numeric_modes(1.0, UNIT, 128, 1)[0].E
    assert got == pytest.approx(3 * PI2, rel=1e-3)


def test_numeric_second_order_convergence():
    exact = 3 * PI2
    errs = [abs(numeric_modes(1.0, UNIT, n, 1)[0].E - exact)
            for n in (32, 64, 128)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.5 <= r <= 4.5 for r in ratios)


def test_numeric_anisotropic_rectangle_grid_pair():
    rect = Rect(0.0, 1.0, 0.0, 2.0)
    got = numeric_modes(2.0, rect, (48, 96), 2)
    exact = [m.E for m in rectangle_modes(2.0, rect, 2)]
    assert np.allclose([m.E for m in got], exact, rtol=3e-3)


def test_numeric_mode_nodal_normalization():
    mode = numeric_modes(1.0, UNIT, 32, 1)[0]
    h1, h2 = mode.spacing
    assert np.sum(mode.values**2) * h1 * h2 == pytest.approx(1.0, abs=1e-10)


def test_lshape_mask_self_convergence():
    coarse = numeric_modes(1.0, l_shaped_mask(128), None, 1)[0].E
    fine = numeric_modes(1.0, l_shaped_mask(256), None, 1)[0].E
    assert abs(coarse - fine) / fine < 0.01
    # the L-shape binds tighter than its bounding square
    assert fine > 3 * PI2


def test_mask_refinement_is_exact_subdivision():
    assert np.array_equal(refine_mask(l_shaped_mask(64), 2).inside,
                          l_shaped_mask(128).inside)
    got = numeric_modes(1.0, l_shaped_mask(64), 2, 1)[0].E
    ref = numeric_modes(1.0, l_shaped_mask(128), None, 1)[0].E
    assert got == pytest.approx(ref, rel=1e-12)


# -------------------------------------------------------------- constants

def test_kappa_closed_forms():
    chi = rectangle_modes(1.0, UNIT, 1)[0]
    assert section_constants(chi).kappa == pytest.approx(PI2)
    chi2 = rectangle_modes(1.0, Rect(0, 1, 0, 2), 1)[0]
    assert section_constants(chi2).kappa == pytest.approx(PI2 / 4)


def test_moment_is_minus_half_closed_form():
    for beta in (0.0, 0.5, 2.0):
        for rect in (UNIT, Rect(0, 1, -3, -1)):
            chi = rectangle_modes(beta, rect, 1)[0]
            assert section_constants(chi).moment == pytest.approx(-0.5,
                                                                  abs=1e-8)


def test_moment_is_minus_half_on_masks():
    chi = numeric_modes(1.0, l_shaped_mask(256), None, 1)[0]
    const = section_constants(chi)
    assert const.moment == pytest.approx(-0.5, abs=1e-4)
    assert const.kappa > 0


def test_moment_on_numeric_rectangle():
    chi = numeric_modes(1.0, UNIT, 96, 1)[0]
    const = section_constants(chi)
    assert const.moment == pytest.approx(-0.5, abs=1e-3)
    assert const.kappa == pytest.approx(PI2, rel=1e-2)


def test_unnormalized_mode_rejected():
    mode = numeric_modes(1.0, UNIT, 32, 1)[0]
    bad = type(mode)(kind=mode.kind, E=mode.E, beta=mode.beta,
                     index=mode.index, rect=mode.rect,
                     values=2.0 * mode.values, spacing=mode.spacing)
    with pytest.raises(ValueError):
        section_constants(bad)


# ------------------------------------------------------------- validation

def test_validation_errors():
    with pytest.raises(ValueError):
        rectangle_modes(1.0, UNIT, 0)
    with pytest.raises(ValueError):
        numeric_modes(1.0, UNIT, 6, 1)  # fewer than 8x8 interior nodes
    with pytest.raises(ValueError):
        l_shaped_mask(7)
    with pytest.raises(ValueError):
        refine_mask(l_shaped_mask(8), 0)
