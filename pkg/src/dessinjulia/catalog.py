"""Batch pipeline: enumerate trees, solve, classify, estimate dimensions,
render, and persist everything in a resumable on-disk store.

Store layout: ``store/index.json`` mapping canonical code -> record file,
``store/records/<sha1(code)>.json``, ``store/images/<sha1(code)>-*.ppm``.
All writes are write-temp-then-rename, so concurrent workers and interrupted
runs leave the store consistent.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from importlib import resources

from .dynamics import DynamicsClassification, OrbitConfig, classify
from .fractal import (FractalError, box_dim, julia_cloud, pressure_dim,
                      render_basins, render_escape)
from .plane_tree import (Passport, enumerate_trees, parse_plane_code,
                         passport_of, plane_code, symmetry_flags)
from .shabat import (ExhaustedError, NoZapponiFormError, SZSolution,
                     solve_tree)


DEFAULT_STORE = os.environ.get("DESSIN_STORE", "store")


@dataclass
class CatalogConfig:
    rng_seed: int = 0
    budget: int = None
    max_iter: int = 200_000
    with_dims: bool = False
    with_images: bool = False
    cloud_points: int = 200_000
    image_size: tuple = (400, 400)
    trap_radius: float = 0.01
    thresholds: tuple = (5, 7, 10)
    force: bool = False


@dataclass
class CatalogRecord:
    tree_code: str
    passport: str
    symmetry: dict
    sz: SZSolution = None
    sz_absent_reason: str = None  # symmetric | degenerate | exhausted
    classification: DynamicsClassification = None
    dims: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    error: str = None

    def validate(self):
        if (self.sz is None) != (self.sz_absent_reason is not None):
            raise ValueError("sz absent iff a reason is recorded")
        if self.sz_absent_reason not in (None, "symmetric", "degenerate",
                                         "exhausted"):
            raise ValueError(f"bad reason {self.sz_absent_reason!r}")
        if self.classification is not None and self.sz is None:
            raise ValueError("classification requires a solved polynomial")
        if self.sz is not None:
            devs = self.sz.invariant_deviations()
            if max(devs) > 1e-6:
                raise ValueError(f"solution invariants violated: {devs}")
        if self.classification is not None:
            c = self.classification
            bounded = (c.fate_plus.bounded, c.fate_minus.bounded)
            want = {
                (True, True): "connected",
                (False, False): "totally_disconnected",
                (True, False): "infinitely_many_components",
                (False, True): "infinitely_many_components",
            }
            if c.taxonomy != "undetermined" and \
                    c.connectedness != want[bounded]:
                raise ValueError("taxonomy/connectedness mismatch")

    def to_json(self):
        rec = {
            "tree_code": self.tree_code,
            "passport": self.passport,
            "symmetry": self.symmetry,
            "sz": self.sz.to_json() if self.sz else None,
            "sz_absent_reason": self.sz_absent_reason,
            "classification":
                self.classification.to_json() if self.classification else None,
            "dims": [d.to_json() for d in self.dims],
            "artifacts": self.artifacts,
            "timings": self.timings,
        }
        if self.error:
            rec["error"] = self.error
        return rec

    @classmethod
    def from_json(cls, rec):
        from .dynamics import CriticalOrbitFate
        from .fractal import DimensionEstimate
        sz = SZSolution.from_json(rec["sz"]) if rec["sz"] else None
        cl = None
        if rec["classification"]:
            c = rec["classification"]

            def fate(d):
                return CriticalOrbitFate(
                    d["kind"], [complex(re, im) for re, im in d["points"]],
                    d["period"], complex(*d["multiplier"]),
                    d["iterations_used"])
            cl = DynamicsClassification(fate(c["plus"]), fate(c["minus"]),
                                        c["taxonomy"], c["connectedness"])
        dims = [DimensionEstimate(d["value"], d["method"], d["diagnostics"],
                                  d["confidence"]) for d in rec["dims"]]
        out = cls(rec["tree_code"], rec["passport"], rec["symmetry"], sz,
                  rec["sz_absent_reason"], cl, dims, rec["artifacts"],
                  rec["timings"], rec.get("error"))
        out.validate()
        return out


def analyze_tree(tree, cfg=None, store=None):
    """Full pipeline on one tree; every stage failure is recorded in the
    returned CatalogRecord and later stages are skipped."""
    cfg = cfg or CatalogConfig()
    code = plane_code(tree)
    rec = CatalogRecord(code, str(passport_of(tree)), symmetry_flags(tree))
    t0 = time.time()
    try:
        rec.sz = solve_tree(tree, budget=cfg.budget, rng_seed=cfg.rng_seed)
    except NoZapponiFormError as exc:
        rec.sz_absent_reason = ("symmetric" if rec.symmetry["rotational"]
                                else "degenerate")
        rec.error = str(exc)
    except ExhaustedError as exc:
        rec.sz_absent_reason = "exhausted"
        rec.error = str(exc)
    rec.timings["solve"] = time.time() - t0
    if rec.sz is None:
        return rec

    t0 = time.time()
    rec.classification = classify(rec.sz.poly,
                                  cfg=OrbitConfig(max_iter=cfg.max_iter))
    rec.timings["classify"] = time.time() - t0

    if cfg.with_dims:
        _attach_dims(rec, cfg)
    if cfg.with_images and store is not None:
        _attach_images(rec, cfg, store)
    rec.validate()
    return rec


def _attach_dims(rec, cfg):
    p = rec.sz.poly
    cls = rec.classification
    disconnected = cls.connectedness == "totally_disconnected"
    t0 = time.time()
    try:
        cloud = julia_cloud(p, cfg.cloud_points, rng_seed=cfg.rng_seed)
        rec.dims.append(box_dim(cloud, disconnected=disconnected))
    except (FractalError, ValueError) as exc:
        rec.error = f"box_dim: {exc}"
    rec.timings["box_dim"] = time.time() - t0
    t0 = time.time()
    try:
        mults = [abs(f.multiplier) for f in (cls.fate_plus, cls.fate_minus)
                 if f.bounded]
        rec.dims.append(pressure_dim(p, rng_seed=cfg.rng_seed,
                                     attractor_multipliers=mults))
    except (FractalError, ValueError) as exc:
        rec.error = f"pressure_dim: {exc}"
    rec.timings["pressure_dim"] = time.time() - t0


def _attach_images(rec, cfg, store):
    p = rec.sz.poly
    span = 1.5 * max(max(abs(w.location) for w in rec.sz.white),
                     max(abs(b.location) for b in rec.sz.black), 1.0)
    viewport = (0.0, 0.0, span, span)
    key = _key(rec.tree_code)
    t0 = time.time()
    esc = render_escape(p, viewport, cfg.image_size, max_iter=500)
    path = store.image_path(f"{key}-escape.ppm")
    _atomic_bytes(path, _ppm_bytes(esc))
    rec.artifacts["escape"] = os.path.relpath(path, store.root)
    try:
        bas = render_basins(p, rec.classification, viewport, cfg.image_size,
                            trap_radius=cfg.trap_radius,
                            thresholds=cfg.thresholds, max_iter=2000)
        path = store.image_path(f"{key}-basins.ppm")
        _atomic_bytes(path, _ppm_bytes(bas))
        rec.artifacts["basins"] = os.path.relpath(path, store.root)
    except FractalError:
        pass
    rec.timings["render"] = time.time() - t0


def _ppm_bytes(raster):
    rgb = raster.to_rgb()
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode() + rgb[::-1].tobytes()


# ------------------------------------------------------------------- store


def _key(code):
    return hashlib.sha1(code.encode()).hexdigest()[:16]


def _atomic_bytes(path, data):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _atomic_json(path, obj):
    _atomic_bytes(path, json.dumps(obj, indent=1, sort_keys=True).encode())


class Store:
    """Directory-backed record store with per-key atomic writes."""

    def __init__(self, root=None):
        self.root = root or DEFAULT_STORE
        os.makedirs(os.path.join(self.root, "records"), exist_ok=True)
        os.makedirs(os.path.join(self.root, "images"), exist_ok=True)

    @property
    def index_path(self):
        return os.path.join(self.root, "index.json")

    def image_path(self, name):
        return os.path.join(self.root, "images", name)

    def index(self):
        try:
            with open(self.index_path) as fh:
                return json.load(fh)
        except FileNotFoundError:
            return {}

    def has(self, code):
        return code in self.index()

    def load(self, code):
        rel = self.index()[code]
        with open(os.path.join(self.root, rel)) as fh:
            return CatalogRecord.from_json(json.load(fh))

    def save(self, rec):
        rel = os.path.join("records", f"{_key(rec.tree_code)}.json")
        _atomic_json(os.path.join(self.root, rel), rec.to_json())
        idx = self.index()
        idx[rec.tree_code] = rel
        _atomic_json(self.index_path, idx)

    def all_records(self):
        return [self.load(code) for code in sorted(self.index())]


# --------------------------------------------------------------- pipelines


def run_catalog(n_edges, cfg=None, store_path=None, progress=None):
    """Analyze every tree-pair representative with the given edge count;
    resumable (existing records are reused unless cfg.force)."""
    if not 2 <= n_edges <= 8:
        raise ValueError("n_edges must be in 2..8 (the default catalog cap)")
    cfg = cfg or CatalogConfig()
    store = Store(store_path)
    out = []
    for tree in enumerate_trees(n_edges):
        code = plane_code(tree)
        if not cfg.force and store.has(code):
            out.append(store.load(code))
            continue
        rec = analyze_tree(tree, cfg, store)
        store.save(rec)
        if progress:
            progress(rec)
        out.append(rec)
    return out


_SERIES_STEMS = {1: "W(())", 2: "W((()))", 3: "W((()()))"}


def series_tree(family, n):
    """The caterpillar of passport <n,family|2,1,...,1>: a degree-n vertex
    with one chain of interior degree ``family`` hanging off it."""
    if family not in _SERIES_STEMS:
        raise ValueError("family must be 1, 2 or 3")
    if n < 3:
        raise ValueError("need n >= 3")
    return parse_plane_code(_SERIES_STEMS[family] + "()" * (n - 1))


def run_series(family, n_range, cfg=None, store_path=None, progress=None):
    """The <n,family> series over the given n values; returns records in
    order of n."""
    cfg = cfg or CatalogConfig()
    store = Store(store_path)
    out = []
    for n in n_range:
        tree = series_tree(family, n)
        code = plane_code(tree)
        if not cfg.force and store.has(code):
            out.append(store.load(code))
            continue
        rec = analyze_tree(tree, cfg, store)
        store.save(rec)
        if progress:
            progress(rec)
        out.append(rec)
    return out


def big_passport_trees():
    """Bundled embeddings of the <13,1,1|2,2,1,...,1> passport."""
    with resources.files("dessinjulia.fixtures") \
            .joinpath("big_passport_trees.json").open() as fh:
        return json.load(fh)


# ----------------------------------------------------------------- report


def _fate_text(fate):
    if fate.kind == "escape":
        return "inf"
    if fate.kind == "attracting_point":
        return "p"
    if fate.kind == "attracting_cycle":
        return f"c({fate.period})"
    return "?"


def report(store_path=None):
    """Markdown summary table of every record in the store."""
    store = Store(store_path)
    lines = ["| tree | passport | taxonomy | +1 | -1 | connectedness | dims |",
             "|---|---|---|---|---|---|---|"]
    for rec in store.all_records():
        if rec.sz is None:
            lines.append(f"| `{rec.tree_code}` | {rec.passport} | "
                         f"no SZ form ({rec.sz_absent_reason}) | | | | |")
            continue
        c = rec.classification
        dims = ", ".join(f"{d.value:.3f} ({d.method}"
                         f"{', low' if d.confidence == 'low' else ''})"
                         for d in rec.dims) or ""
        lines.append(
            f"| `{rec.tree_code}` | {rec.passport} | {c.taxonomy} | "
            f"{_fate_text(c.fate_plus)} | {_fate_text(c.fate_minus)} | "
            f"{c.connectedness} | {dims} |")
    return "\n".join(lines) + "\n"
