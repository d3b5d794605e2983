import math

import numpy as np
import pytest

from shearspec.geometry import (
    MaskSection,
    MetricTensor,
    Rect,
    ShearParam,
    WaveguideSpec,
    contains,
    map_point,
    metric,
    prism_region,
    section_diameter,
)


UNIT = Rect(0.0, 1.0, 0.0, 1.0)


def test_metric_matrix_and_unit_determinant():
    for beta in (1e-3, 0.25, 1.0, 2.0, 1e3):
        g = metric(beta)
        expect = np.array([
            [1 + beta**2, 0, beta],
            [0, 1, 0],
            [beta, 0, 1],
        ])
        assert np.array_equal(g.matrix, expect)
        # volume-preserving shear: det stays 1 up to roundoff of the det
        # evaluation itself, which scales with the entries
        assert abs(g.det - 1.0) <= 32 * np.finfo(float).eps * (1 + beta**2)


def test_metric_symmetric_positive_definite():
    g = metric(3.0).matrix
    assert np.array_equal(g, g.T)
    assert np.linalg.eigvalsh(g).min() > 0


def test_shear_param_validation():
    with pytest.raises(ValueError):
        ShearParam(0.0)
    with pytest.raises(ValueError):
        ShearParam(-1.0)
    with pytest.raises(ValueError):
        ShearParam(math.inf)
    assert ShearParam(0.5).beta == 0.5


def test_map_point_even_in_x():
    beta = 0.7
    x = np.linspace(-3, 3, 13)
    _, _, z_pos = map_point(beta, x, 0.2, 0.3)
    _, _, z_neg = map_point(beta, -x, 0.2, 0.3)
    assert np.array_equal(z_pos, z_neg)
    assert np.allclose(z_pos, beta * np.abs(x) + 0.3)


def test_map_point_accepts_shear_param():
    x, y1, z = map_point(ShearParam(2.0), 1.5, 0.0, 0.25)
    assert z == 2.0 * 1.5 + 0.25


def test_contains_follows_the_ridge():
    spec = WaveguideSpec(beta=1.0, section=UNIT)
    # center of the tube over x = 2 sits at z = beta*|2| + 1/2
    assert contains(spec, 2.0, 0.5, 2.5)
    assert contains(spec, -2.0, 0.5, 2.5)
    assert not contains(spec, 2.0, 0.5, 0.5)
    # boundary is excluded (open set)
    assert not contains(spec, 0.0, 0.0, 0.5)
    assert not contains(spec, 0.0, 0.5, 1.0)


def test_contains_vectorized_symmetry():
    spec = WaveguideSpec(beta=0.6, section=Rect(0.0, 2.0, -1.0, 1.0))
    rng = np.random.default_rng(7)
    s = rng.uniform(-4, 4, size=200)
    t = rng.uniform(-0.5, 2.5, size=200)
    z = rng.uniform(-2, 4, size=200)
    assert np.array_equal(contains(spec, s, t, z), contains(spec, -s, t, z))


def test_contains_rejects_mask_sections():
    mask = MaskSection(np.ones((3, 3), dtype=bool), cell=0.25)
    spec = WaveguideSpec(beta=1.0, section=mask)
    with pytest.raises(ValueError):
        contains(spec, 0.0, 0.1, 0.1)


def test_rect_validation_and_aspect():
    with pytest.raises(ValueError):
        Rect(0.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Rect(1.0, 0.0, 0.0, 1.0)
    r = Rect(0.0, 1.0, 0.0, math.pi * math.sqrt(2.0))
    assert r.aspect == pytest.approx(math.pi * math.sqrt(2.0))


def test_mask_validation():
    with pytest.raises(ValueError):
        MaskSection(np.zeros((2, 2), dtype=bool), cell=0.1)
    with pytest.raises(ValueError):
        MaskSection(np.ones((2, 2), dtype=bool), cell=-0.1)
    with pytest.raises(ValueError):
        MaskSection(np.ones(4, dtype=bool), cell=0.1)


def test_section_diameter():
    assert section_diameter(UNIT) == pytest.approx(math.sqrt(2.0))
    inside = np.zeros((8, 8), dtype=bool)
    inside[2:5, 1:7] = True  # 3 x 6 block of 0.5-cells
    assert section_diameter(MaskSection(inside, cell=0.5)) == pytest.approx(
        math.hypot(1.5, 3.0))


def test_prism_region_dimensions():
    rect = Rect(0.0, 1.0, 0.0, 1.0)
    prism = prism_region(rect)
    assert prism.A == pytest.approx(1.0 / math.sqrt(2.0))
    assert prism.B == pytest.approx(0.5)
    assert prism.depth == 1.0
    bcs = {f.name: f.bc for f in prism.faces}
    assert bcs == {
        "y1_top": "dirichlet",
        "y1_bottom": "dirichlet",
        "y2_bottom": "dirichlet",
        "x_end": "neumann",
        "slant": "neumann",
    }


def test_prism_contains_matches_half_square_cut():
    prism = prism_region(Rect(0.0, 1.0, 0.0, 1.0))
    A = prism.A
    assert prism.contains(-A / 2, 0.5, A / 4)
    assert not prism.contains(-A / 2, 0.5, A / 2 + 1e-9)  # above the slant
    assert not prism.contains(A / 2, 0.5, A / 4)  # x > 0
    # slant face normal is unit and 45 degrees off the x axis
    slant = next(f for f in prism.faces if f.name == "slant")
    n = np.array(slant.normal)
    assert np.linalg.norm(n) == pytest.approx(1.0)
    assert n @ [1.0, 0.0, 0.0] == pytest.approx(-math.cos(math.pi / 4))


def test_metric_tensor_repr_hides_matrix():
    g = metric(1.0)
    assert isinstance(g, MetricTensor)
    assert "matrix" not in repr(g)
