import numpy as np
import pytest

from dessinjulia.dynamics import (CycleRefinementError, OrbitConfig, classify,
                                  escape_radius, iterate_orbit, refine_cycle)
from dessinjulia.plane_tree import parse_plane_code
from dessinjulia.polynomial import ComplexPoly, parse_poly, poly_from_roots
from dessinjulia.shabat import solve_tree

RNG = np.random.default_rng(20240818)


def _solve(code):
    return solve_tree(parse_plane_code(code)).poly


# ------------------------------------------------------------ escape radius


def test_escape_radius_guarantee_random():
    for _ in range(200):
        deg = int(RNG.integers(2, 7))
        c = RNG.normal(size=deg + 1) + 1j * RNG.normal(size=deg + 1)
        c[-1] += 3.0  # keep the leading term well away from zero
        p = ComplexPoly(tuple(c))
        R = escape_radius(p)
        theta = RNG.uniform(0, 2 * np.pi, size=32)
        z = (R + 1e-9) * np.exp(1j * theta)
        assert np.all(np.abs(p(z)) >= 2 * np.abs(z) - 1e-9)


def test_escape_radius_rejects_low_degree():
    with pytest.raises(ValueError):
        escape_radius(ComplexPoly((1, 2)))


# ------------------------------------------------------------- single orbits


def test_orbit_escape():
    fate = iterate_orbit(ComplexPoly((3, 0, 1)), 1.0)  # z^2 + 3
    assert fate.kind == "escape" and not fate.bounded


def test_orbit_superattracting_cycle():
    # z^2 - 1: 0 -> -1 -> 0, superattracting 2-cycle
    fate = iterate_orbit(ComplexPoly((-1, 0, 1)), 1.0)
    assert fate.kind == "attracting_cycle"
    assert fate.period == 2
    assert abs(fate.multiplier) < 1e-9
    assert min(abs(z) for z in fate.cycle_points) < 1e-9


def test_orbit_attracting_fixed_point():
    # z^2 - 0.2: attracting fixed point is the smaller root of z^2 - z - 0.2
    p = ComplexPoly((-0.2, 0, 1))
    fate = iterate_orbit(p, 0.9)
    assert fate.kind == "attracting_point"
    zfix = (1 - np.sqrt(1.8)) / 2
    assert abs(fate.cycle_points[0] - zfix) < 1e-9
    assert abs(fate.multiplier - 2 * zfix) < 1e-8


def test_orbit_config_validation():
    with pytest.raises(ValueError):
        iterate_orbit(ComplexPoly((0, 0, 1)), 0.5, max_iter=0)
    with pytest.raises(ValueError):
        refine_cycle(ComplexPoly((0, 0, 1)), 0, 0.5)


def test_refine_cycle_polish_and_multiplier():
    p = ComplexPoly((-1, 0, 1))  # z^2 - 1
    ref = refine_cycle(p, 2, 0.05 + 0.02j)
    pts = sorted(ref["points"], key=lambda z: z.real)
    assert abs(pts[0] + 1) < 1e-12 and abs(pts[1]) < 1e-12
    assert abs(ref["multiplier"]) < 1e-12
    with pytest.raises(CycleRefinementError):
        refine_cycle(ComplexPoly((3, 0, 1)), 3, 50.0 + 50j, tol=1e-15)


# --------------------------------------------------- taxonomy on known trees


def test_classify_g2_superattracting():
    # the 6-edge tree whose critical values form the 2-cycle {1, -1}
    cls = classify(_solve("W((()))()()()"))
    assert cls.taxonomy == "g2"
    assert cls.connectedness == "connected"
    assert abs(cls.fate_plus.multiplier) < 1e-8
    assert {round(z.real) for z in cls.fate_plus.cycle_points} == {1, -1}


def test_classify_g3_long_cycle():
    cls = classify(_solve("W(())()()()"))
    assert cls.taxonomy == "g3"
    assert cls.fate_plus.period == 24
    assert cls.connectedness == "connected"


def test_classify_g1_fixed_points():
    cls = classify(_solve("W(())()(())()()"))
    assert cls.taxonomy == "g1"
    assert cls.fate_plus.period == 1 and cls.fate_minus.period == 1
    assert cls.connectedness == "connected"


def test_classify_g4_both_escape():
    cls = classify(_solve("W((()))((()))()"))
    assert cls.taxonomy == "g4"
    assert cls.connectedness == "totally_disconnected"


def test_classify_s2_two_cycles():
    # (z^5 - 5z^3 + 5z)/2: two distinct attracting 4-cycles swapped by z->-z
    p = parse_poly("0,5/2,0,-5/2,0,1/2")
    cls = classify(p)
    assert cls.taxonomy == "s2"
    assert cls.fate_plus.period == 4 and cls.fate_minus.period == 4
    got = sorted(z.real for z in cls.fate_plus.cycle_points)
    want = sorted((0.500469, 0.953491, 0.610612, 0.999810))
    assert np.allclose(got, want, atol=1e-4)
    assert np.allclose(sorted(z.real for z in cls.fate_minus.cycle_points),
                       [-w for w in want[::-1]], atol=1e-4)


def test_classify_s3_mixed():
    cls = classify(_solve("W(())((()))(())"))
    assert cls.taxonomy == "s3"
    assert cls.connectedness == "infinitely_many_components"
    kinds = {cls.fate_plus.kind, cls.fate_minus.kind}
    assert "escape" in kinds and len(kinds) == 2


def test_classify_deterministic_json():
    cls = classify(_solve("W((()))()()"))
    rec = cls.to_json()
    assert rec["taxonomy"] == cls.taxonomy
    assert len(rec["plus"]["points"]) == cls.fate_plus.period


def test_known_two_cycle_values():
    # quintic -(z+2)^3 (z-3)^2/54 + 1: both orbits join the 2-cycle
    # {0.607872363, -0.879463661}
    p = poly_from_roots([-2.0, 3.0], [3, 2], -1 / 54) + 1.0
    cls = classify(p)
    assert cls.taxonomy == "g2"
    got = sorted(z.real for z in cls.fate_plus.cycle_points)
    assert np.allclose(got, [-0.879463661, 0.607872363], atol=1e-6)
