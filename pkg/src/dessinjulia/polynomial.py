"""Dense complex polynomials: evaluation, derivatives, simultaneous root
finding with multiplicity clustering, critical data.

Coefficients are stored ascending (a0 ... an).  The text format is
comma-separated complex coefficients, ``x+yi`` for complex entries and
``p/q`` for exact rationals, e.g. ``0,-15/4,0,10,0,-12``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._kernels import aberth_roots


class PolynomialError(ValueError):
    pass


class RootFindingError(PolynomialError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class RootCluster:
    location: complex
    multiplicity: int
    residual: float


@dataclass(frozen=True)
class ComplexPoly:
    coeffs: tuple  # ascending, trailing zeros trimmed

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        if not c:
            c = (0j,)
        object.__setattr__(self, "coeffs", c)

    # -- basic queries ----------------------------------------------------
    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    def as_array(self):
        return np.asarray(self.coeffs, dtype=np.complex128)

    def __call__(self, z):
        return evaluate(self, z)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ComplexPoly):
            other = ComplexPoly((complex(other),))
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, dtype=np.complex128)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return ComplexPoly(tuple(a))

    def __sub__(self, other):
        if not isinstance(other, ComplexPoly):
            other = ComplexPoly((complex(other),))
        return self + (other * -1)

    def __mul__(self, other):
        if isinstance(other, ComplexPoly):
            return ComplexPoly(tuple(np.convolve(self.as_array(),
                                                 other.as_array())))
        return ComplexPoly(tuple(np.asarray(self.coeffs) * complex(other)))

    __rmul__ = __mul__

    def monic(self):
        return ComplexPoly(tuple(self.as_array() / self.leading))

    def compose_affine(self, alpha, beta):
        """Coefficients of p(alpha*z + beta)."""
        lin = ComplexPoly((beta, alpha))
        acc = ComplexPoly((self.coeffs[-1],))
        for a in self.coeffs[-2::-1]:
            acc = acc * lin + ComplexPoly((a,))
        return acc

    def __str__(self):
        return format_poly(self)


def poly_from_roots(roots, mults, leading=1.0):
    acc = np.array([complex(leading)], dtype=np.complex128)
    for r, m in zip(roots, mults):
        lin = np.array([-complex(r), 1.0], dtype=np.complex128)
        for _ in range(m):
            acc = np.convolve(acc, lin)
    return ComplexPoly(tuple(acc))


def evaluate(p, z):
    """Horner evaluation; accepts scalars or arrays."""
    c = p.coeffs
    if np.isscalar(z) or isinstance(z, complex):
        acc = c[-1]
        for a in c[-2::-1]:
            acc = acc * z + a
        return acc
    z = np.asarray(z, dtype=np.complex128)
    acc = np.full_like(z, c[-1])
    for a in c[-2::-1]:
        acc = acc * z + a
    return acc


def derivative(p):
    if p.degree < 1:
        return ComplexPoly((0j,))
    c = p.as_array()
    return ComplexPoly(tuple(c[1:] * np.arange(1, len(c))))


# -------------------------------------------------------------- text format

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?"
_TOKEN = re.compile(
    rf"^\s*(?P<re>[+-]?{_NUM})?\s*(?P<im>[+-]\s*(?:{_NUM})?|^[+-]?(?:{_NUM})?)?"
)


def _parse_real(text):
    text = text.replace(" ", "")
    try:
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise PolynomialError(f"bad coefficient {text!r}") from exc


def parse_complex(token):
    """Accepts '1.5', '-3/4', '2i', '1+2i', '1-1/3i', 'i', '-i'."""
    t = token.strip().replace(" ", "")
    if not t:
        raise PolynomialError("empty coefficient")
    if t.endswith(("i", "I", "j", "J")):
        body = t[:-1]
        # split real and imaginary at the last +/- not at position 0 or after e/E
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                re_part, im_part = body[:pos], body[pos:]
                break
        else:
            re_part, im_part = "", body
        if im_part in ("", "+"):
            im = 1.0
        elif im_part == "-":
            im = -1.0
        else:
            im = _parse_real(im_part)
        real = _parse_real(re_part) if re_part else 0.0
        return complex(real, im)
    return complex(_parse_real(t), 0.0)


def parse_poly(text):
    toks = text.split(",")
    if not toks:
        raise PolynomialError("no coefficients")
    return ComplexPoly(tuple(parse_complex(t) for t in toks))


def _fmt_real(x):
    return f"{x:.12g}"


def format_complex(z):
    z = complex(z)
    if z.imag == 0:
        return _fmt_real(z.real)
    if z.real == 0:
        return f"{_fmt_real(z.imag)}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{_fmt_real(z.real)}{sign}{_fmt_real(abs(z.imag))}i"


def format_poly(p):
    return ",".join(format_complex(c) for c in p.coeffs)


# ------------------------------------------------------------- root finding


def _single_linkage(points, tol):
    """Greedy single-linkage clusters of a 1D complex point set."""
    pts = list(points)
    clusters = [[z] for z in pts]
    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                if any(abs(a - b) < tol for a in clusters[i]
                       for b in clusters[j]):
                    clusters[i].extend(clusters[j])
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break
    return clusters


def _polish_cluster(p, center, mult, rounds=12):
    """A root of multiplicity m is a simple root of the (m-1)-th derivative;
    Newton there recovers full accuracy."""
    g = p
    for _ in range(mult - 1):
        g = derivative(g)
    dg = derivative(g)
    c = center
    for _ in range(rounds):
        gv = evaluate(g, c)
        dv = evaluate(dg, c)
        if dv == 0:
            break
        step = gv / dv
        c -= step
        if abs(step) < 1e-15 * (1 + abs(c)):
            break
    return c


def _cluster_quality(p, clusters):
    """Relative coefficient error of re-expanding the clustered roots."""
    locs = [c.location for c in clusters]
    mults = [c.multiplicity for c in clusters]
    q = poly_from_roots(locs, mults, p.leading)
    pa, qa = p.as_array(), q.as_array()
    n = max(len(pa), len(qa))
    pa = np.pad(pa, (0, n - len(pa)))
    qa = np.pad(qa, (0, n - len(qa)))
    return float(np.max(np.abs(pa - qa)) / np.max(np.abs(pa)))


def roots(p, cluster_tol=1e-6, maxiter=2000):
    """All roots with multiplicities via simultaneous (Aberth-style)
    iteration followed by adaptive clustering.

    Clustering threshold: a numerically split m-fold root spreads over a
    radius ~eps^(1/m), so a ladder of thresholds is tried and the one whose
    re-expansion best reproduces the coefficients wins.
    """
    if p.degree < 1:
        raise PolynomialError("degree must be >= 1")
    if cluster_tol <= 0:
        raise PolynomialError("cluster_tol must be positive")
    raw = aberth_roots(p.as_array(), maxiter=maxiter)
    resid = np.abs(evaluate(p, raw))
    scale = float(np.max(np.abs(raw))) + 1.0
    coeff_scale = float(np.max(np.abs(p.as_array())))
    if np.max(resid) > 1e-5 * coeff_scale * scale:
        raise RootFindingError(
            f"simultaneous iteration did not converge (residual "
            f"{np.max(resid):.3g})", best=raw)

    best = None
    t = cluster_tol * scale
    while t < 0.45 * scale:
        groups = _single_linkage(raw, t)
        clusters = []
        for g in groups:
            m = len(g)
            center = _polish_cluster(p, complex(np.mean(g)), m)
            clusters.append(RootCluster(center, m,
                                        float(abs(evaluate(p, center)))))
        err = _cluster_quality(p, clusters)
        if best is None or err < best[0]:
            best = (err, clusters)
        t *= 4.0
    err, clusters = best
    if err > 1e-4:
        raise RootFindingError(
            f"could not certify a multiplicity clustering (error {err:.3g})",
            best=raw)
    return sorted(clusters, key=lambda c: (c.location.real, c.location.imag))


def critical_data(p, tol=1e-6):
    """Critical points (clustered), their values, and local degrees."""
    if p.degree < 2:
        raise PolynomialError("degree must be >= 2 for critical data")
    out = []
    for c in roots(derivative(p), cluster_tol=tol):
        out.append({
            "point": c.location,
            "value": evaluate(p, c.location),
            "local_degree": c.multiplicity + 1,
        })
    return out


def is_shabat(p, tol=1e-6):
    """True iff every finite critical value is within tol of +1 or -1 and
    both values occur."""
    if p.degree < 2:
        return False
    try:
        data = critical_data(p, tol=min(tol, 1e-6))
    except PolynomialError:
        return False
    saw_plus = saw_minus = False
    for d in data:
        v = d["value"]
        if abs(v - 1) < tol:
            saw_plus = True
        elif abs(v + 1) < tol:
            saw_minus = True
        else:
            return False
    return saw_plus and saw_minus
