import numpy as np
import pytest

from dessinjulia.dynamics import classify
from dessinjulia.fractal import (BAND_NAMES, DimensionEstimate, FractalError,
                                 box_dim, julia_cloud, pressure_dim,
                                 render_basins, render_escape,
                                 repelling_fixed_point, save_cloud, write_ppm)
from dessinjulia.polynomial import ComplexPoly

RNG = np.random.default_rng(20240819)

BASILICA = ComplexPoly((-1, 0, 1))  # z^2 - 1
SQUARE = ComplexPoly((0, 0, 1))  # z^2, Julia set = unit circle


# ------------------------------------------------------------------ rasters


def test_render_escape_basic():
    r = render_escape(BASILICA, (0, 0, 2, 2), (64, 48), 80)
    assert r.escaped_at.shape == (48, 64)
    # corners escape, the superattracting orbit of 0 never does
    assert r.escaped_at[0, 0] >= 0
    assert r.escaped_at[24, 32] == -1
    xs, ys = r.pixel_axes()
    assert len(xs) == 64 and abs(xs[0] + 2 * (1 - 1 / 64)) < 1e-12
    rgb = r.to_rgb()
    assert rgb.shape == (48, 64, 3) and rgb.dtype == np.uint8
    # interior black, exterior shaded
    assert tuple(rgb[24, 32]) == (0, 0, 0)
    assert rgb[0, 0].max() > 0


def test_render_escape_deterministic():
    a = render_escape(SQUARE, (0, 0, 1.5, 1.5), (50, 50), 60)
    b = render_escape(SQUARE, (0, 0, 1.5, 1.5), (50, 50), 60)
    assert np.array_equal(a.escaped_at, b.escaped_at)


def test_write_ppm(tmp_path):
    r = render_escape(BASILICA, (0, 0, 2, 2), (20, 10), 40)
    path = tmp_path / "img.ppm"
    r.write_ppm(path)
    data = path.read_bytes()
    assert data.startswith(b"P6\n20 10\n255\n")
    assert len(data) == len(b"P6\n20 10\n255\n") + 20 * 10 * 3
    # rows come out top-down: first written row is the raster's last
    body = data[len(b"P6\n20 10\n255\n"):]
    first_row = np.frombuffer(body[:60], dtype=np.uint8).reshape(20, 3)
    assert np.array_equal(first_row, r.to_rgb()[-1])


def test_raster_validation():
    with pytest.raises(ValueError):
        render_escape(BASILICA, size=(0, 10))


def test_render_basins_bands():
    cls = classify(BASILICA)
    r = render_basins(BASILICA, cls, (0, 0, 2, 2), (80, 80),
                      trap_radius=0.05, thresholds=(3, 6, 12), max_iter=300)
    assert r.band is not None and len(BAND_NAMES) == 5
    assert set(np.unique(r.band)) <= {0, 1, 2, 3, 4}
    # almost every pixel eventually enters a trap
    assert np.mean(r.band == 4) < 0.01
    # near the superattracting point 0 entry is immediate (band 0)
    assert r.band[40, 40] == 0
    # entry times respect the band thresholds
    entered = r.escaped_at >= 0
    assert np.all(r.escaped_at[entered & (r.band == 0)] <= 3)
    assert np.all(r.escaped_at[entered & (r.band == 3)] > 12)


def test_render_basins_escape_only():
    p = ComplexPoly((3, 0, 1))  # z^2 + 3: both critical orbits escape
    cls = classify(p)
    r = render_basins(p, cls, (0, 0, 2, 2), (40, 40), max_iter=100)
    assert np.mean(r.band == 4) < 0.05
    assert np.all(r.attractor_id[r.escaped_at >= 0] == 0)


# -------------------------------------------------------------- point cloud


def test_repelling_fixed_point():
    z = repelling_fixed_point(BASILICA)
    assert abs(z * z - 1 - z) < 1e-9
    assert abs(2 * z) > 1


def test_julia_cloud_on_circle():
    pts = julia_cloud(SQUARE, 5000, rng_seed=1)
    assert len(pts) == 5000
    assert np.max(np.abs(np.abs(pts) - 1.0)) < 1e-8


def test_julia_cloud_deterministic_and_invariant():
    a = julia_cloud(BASILICA, 3000, rng_seed=7)
    b = julia_cloud(BASILICA, 3000, rng_seed=7)
    assert np.array_equal(a, b)
    c = julia_cloud(BASILICA, 3000, rng_seed=8)
    assert not np.array_equal(a, c)
    # forward images of cloud points stay on the Julia set: compare against
    # the distance scale of the cloud itself
    fwd = BASILICA(a[:500])
    d = np.array([np.min(np.abs(a - w)) for w in fwd])
    assert float(np.quantile(d, 0.99)) < 0.02


def test_save_cloud(tmp_path):
    pts = julia_cloud(SQUARE, 100, rng_seed=0)
    path = tmp_path / "cloud.csv"
    save_cloud(pts, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "re,im"
    assert len(lines) == 101
    re, im = map(float, lines[1].split(","))
    assert abs(complex(re, im) - pts[0]) < 1e-15


def test_cloud_validation():
    with pytest.raises(FractalError):
        julia_cloud(ComplexPoly((0, 1)), 100)
    with pytest.raises(ValueError):
        julia_cloud(SQUARE, 0)


# --------------------------------------------------------------- dimensions


def test_box_dim_segment_and_square():
    n = 400_000
    seg = RNG.uniform(0, 1, size=n).astype(np.complex128)
    d = box_dim(seg)
    assert abs(d.value - 1.0) < 0.05
    sq = RNG.uniform(0, 1, size=n) + 1j * RNG.uniform(0, 1, size=n)
    d2 = box_dim(sq)
    assert abs(d2.value - 2.0) < 0.05
    assert d.method == "box_counting" and "fit_r2" in d.diagnostics


def test_box_dim_validation():
    with pytest.raises(ValueError):
        box_dim(np.zeros(100, dtype=np.complex128))
    with pytest.raises(FractalError):
        box_dim(np.zeros(20000, dtype=np.complex128))  # degenerate set
    d = box_dim(RNG.uniform(0, 1, 50000).astype(np.complex128),
                disconnected=True)
    assert d.confidence == "low"


def test_dimension_estimate_range():
    with pytest.raises(ValueError):
        DimensionEstimate(2.5, "box_counting")
    rec = DimensionEstimate(1.2, "pressure", {"drift": 0.0}).to_json()
    assert rec == {"value": 1.2, "method": "pressure", "confidence": "ok",
                   "diagnostics": {"drift": 0.0}}


def test_pressure_dim_circle():
    # the unit circle has dimension exactly 1
    d = pressure_dim(SQUARE, max_period=9)
    assert d.method == "pressure"
    assert abs(d.value - 1.0) < 0.02
    assert d.diagnostics["drift"] <= 0.02 and d.confidence == "ok"


def test_pressure_dim_validation():
    with pytest.raises(FractalError):
        pressure_dim(SQUARE, max_period=20)  # 2^20 over the root cap
    d = pressure_dim(SQUARE, max_period=8, attractor_multipliers=(0.95,))
    assert d.confidence == "low"
