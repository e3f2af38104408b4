"""Numerical hot loops, in two flavors per kernel.

``*_nb`` variants are numba-compiled scalar loops; ``*_np`` variants are
vectorized numpy fallbacks.  The public names dispatch on the backend flag
(see _backend).  Both flavors implement the same algorithm so results agree
to floating-point noise.
"""

from __future__ import annotations

import numpy as np

from ._backend import USE_NUMBA, njit

# ---------------------------------------------------------------- polyval


@njit(cache=True)
def _polyval_scalar(c, z):
    acc = c[-1] + 0j
    for i in range(len(c) - 2, -1, -1):
        acc = acc * z + c[i]
    return acc


def _polyval_np(c, z):
    acc = np.full_like(z, c[-1], dtype=np.complex128)
    for i in range(len(c) - 2, -1, -1):
        acc = acc * z + c[i]
    return acc


# ---------------------------------------------------------------- Aberth

def _aberth_start(coeffs, n):
    """Cold-start points: circle at the classical root bound, slightly
    ellipted and rotated off symmetry axes."""
    an = abs(coeffs[-1])
    r = 1.0 + max(abs(coeffs[i]) for i in range(n)) / an
    ang = 2.0 * np.pi * np.arange(n) / n + 0.4 / n + 0.77
    return r * np.exp(1j * ang) * (1.0 + 0.03 * np.cos(3.1 * ang))


@njit(cache=True)
def _aberth_iterate_nb(c, dc, w, maxiter, tol):
    n = len(w)
    for _ in range(maxiter):
        shift = 0.0
        for i in range(n):
            p = _polyval_scalar(c, w[i])
            if p == 0.0:
                continue
            dp = _polyval_scalar(dc, w[i])
            ratio = dp / p
            s = 0.0 + 0.0j
            for j in range(n):
                if j != i:
                    d = w[i] - w[j]
                    if d == 0.0:
                        d = 1e-12 + 1e-12j
                    s += 1.0 / d
            denom = ratio - s
            if denom == 0.0:
                continue
            corr = 1.0 / denom
            w[i] -= corr
            m = abs(corr) / (1.0 + abs(w[i]))
            if m > shift:
                shift = m
        if shift < tol:
            break
    return w


def _aberth_iterate_np(c, dc, w, maxiter, tol):
    n = len(w)
    for _ in range(maxiter):
        p = _polyval_np(c, w)
        dp = _polyval_np(dc, w)
        ok = p != 0.0
        ratio = np.where(ok, dp / np.where(ok, p, 1.0), 0.0)
        diff = w[:, None] - w[None, :]
        np.fill_diagonal(diff, 1.0)
        diff[diff == 0.0] = 1e-12 + 1e-12j
        s = (1.0 / diff).sum(axis=1) - 1.0  # subtract the diagonal dummy
        denom = ratio - s
        good = ok & (denom != 0.0)
        corr = np.where(good, 1.0 / np.where(good, denom, 1.0), 0.0)
        w = w - corr
        if np.max(np.abs(corr) / (1.0 + np.abs(w))) < tol:
            break
    return w


def aberth_roots(coeffs, start=None, maxiter=1000, tol=1e-14):
    """All roots of the dense ascending-coefficient polynomial at once."""
    c = np.asarray(coeffs, dtype=np.complex128)
    n = len(c) - 1
    if n < 1:
        return np.empty(0, dtype=np.complex128)
    if n == 1:
        return np.array([-c[0] / c[1]])
    dc = c[1:] * np.arange(1, n + 1)
    w = np.array(start, dtype=np.complex128) if start is not None \
        else _aberth_start(c, n)
    if USE_NUMBA:
        return _aberth_iterate_nb(c, dc, w.copy(), maxiter, tol)
    return _aberth_iterate_np(c, dc, w.copy(), maxiter, tol)


# ---------------------------------------------------------------- orbits

ORBIT_RUNNING = 0
ORBIT_ESCAPE = 1
ORBIT_CYCLE = 2


@njit(cache=True)
def _orbit_brent_nb(c, z0, max_iter, radius, tol):
    tortoise = z0
    hare = z0
    power = 1
    lam = 0
    steps = 0
    while steps < max_iter:
        hare = _polyval_scalar(c, hare)
        steps += 1
        lam += 1
        ah = abs(hare)
        if ah > radius or not np.isfinite(ah):
            return ORBIT_ESCAPE, 0, hare, steps
        if abs(hare - tortoise) < tol * (1.0 + ah) and lam > 0:
            return ORBIT_CYCLE, lam, hare, steps
        if lam == power:
            tortoise = hare
            power *= 2
            lam = 0
    return ORBIT_RUNNING, 0, hare, steps


def _orbit_brent_np(c, z0, max_iter, radius, tol):
    # scalar fallback; same control flow as the compiled version
    tortoise = complex(z0)
    hare = complex(z0)
    cl = [complex(x) for x in c]

    def ev(z):
        acc = cl[-1]
        for a in cl[-2::-1]:
            acc = acc * z + a
        return acc

    power, lam, steps = 1, 0, 0
    while steps < max_iter:
        hare = ev(hare)
        steps += 1
        lam += 1
        ah = abs(hare)
        if ah > radius or not np.isfinite(ah):
            return ORBIT_ESCAPE, 0, hare, steps
        if abs(hare - tortoise) < tol * (1.0 + ah):
            return ORBIT_CYCLE, lam, hare, steps
        if lam == power:
            tortoise = hare
            power *= 2
            lam = 0
    return ORBIT_RUNNING, 0, hare, steps


def orbit_brent(coeffs, z0, max_iter, radius, tol):
    c = np.asarray(coeffs, dtype=np.complex128)
    if USE_NUMBA:
        return _orbit_brent_nb(c, complex(z0), max_iter, radius, tol)
    return _orbit_brent_np(c, complex(z0), max_iter, radius, tol)


@njit(cache=True)
def _orbit_tail_nb(c, z0, n_iter, keep, radius):
    tail = np.empty(keep, dtype=np.complex128)
    z = z0
    for i in range(n_iter):
        z = _polyval_scalar(c, z)
        az = abs(z)
        if az > radius or not np.isfinite(az):
            return True, tail, 0
        if i >= n_iter - keep:
            tail[i - (n_iter - keep)] = z
    return False, tail, keep


def orbit_tail(coeffs, z0, n_iter, keep, radius):
    """Last ``keep`` orbit points after ``n_iter`` steps (or escape flag)."""
    c = np.asarray(coeffs, dtype=np.complex128)
    if USE_NUMBA:
        return _orbit_tail_nb(c, complex(z0), n_iter, keep, radius)
    z = complex(z0)
    cl = [complex(x) for x in c]
    tail = np.empty(keep, dtype=np.complex128)
    for i in range(n_iter):
        acc = cl[-1]
        for a in cl[-2::-1]:
            acc = acc * z + a
        z = acc
        az = abs(z)
        if az > radius or not np.isfinite(az):
            return True, tail, 0
        if i >= n_iter - keep:
            tail[i - (n_iter - keep)] = z
    return False, tail, keep


# ---------------------------------------------------------------- rendering


@njit(cache=True)
def _render_escape_nb(c, xs, ys, max_iter, radius):
    h = len(ys)
    w = len(xs)
    out = np.full((h, w), -1, dtype=np.int32)
    for iy in range(h):
        for ix in range(w):
            z = complex(xs[ix], ys[iy])
            if abs(z) > radius:
                out[iy, ix] = 0
                continue
            for it in range(1, max_iter + 1):
                z = _polyval_scalar(c, z)
                az = abs(z)
                if az > radius or not np.isfinite(az):
                    out[iy, ix] = it
                    break
    return out


def _render_escape_np(c, xs, ys, max_iter, radius):
    z = (xs[None, :] + 1j * ys[:, None]).astype(np.complex128)
    out = np.full(z.shape, -1, dtype=np.int32)
    out[np.abs(z) > radius] = 0
    active = out < 0
    for it in range(1, max_iter + 1):
        if not active.any():
            break
        za = _polyval_np(c, z[active])
        z[active] = za
        with np.errstate(invalid="ignore", over="ignore"):
            esc = ~(np.abs(za) <= radius)
        idx = np.where(active)
        gone = (idx[0][esc], idx[1][esc])
        out[gone] = it
        active[gone] = False
        z[gone] = 0.0  # keep escaped cells finite
    return out


def render_escape_grid(coeffs, xs, ys, max_iter, radius):
    c = np.asarray(coeffs, dtype=np.complex128)
    if USE_NUMBA:
        return _render_escape_nb(c, xs, ys, max_iter, radius)
    return _render_escape_np(c, xs, ys, max_iter, radius)


@njit(cache=True)
def _render_basin_nb(c, xs, ys, max_iter, radius, traps, groups, trap_r):
    h = len(ys)
    w = len(xs)
    steps = np.full((h, w), -1, dtype=np.int32)
    which = np.zeros((h, w), dtype=np.int16)
    nt = len(traps)
    r2 = trap_r * trap_r
    for iy in range(h):
        for ix in range(w):
            z = complex(xs[ix], ys[iy])
            for it in range(max_iter + 1):
                az = abs(z)
                if az > radius or not np.isfinite(az):
                    steps[iy, ix] = it
                    which[iy, ix] = 0
                    break
                hit = -1
                for t in range(nt):
                    d = z - traps[t]
                    if d.real * d.real + d.imag * d.imag <= r2:
                        hit = t
                        break
                if hit >= 0:
                    steps[iy, ix] = it
                    which[iy, ix] = groups[hit] + 1
                    break
                if it < max_iter:
                    z = _polyval_scalar(c, z)
    return steps, which


def _render_basin_np(c, xs, ys, max_iter, radius, traps, groups, trap_r):
    z = (xs[None, :] + 1j * ys[:, None]).astype(np.complex128)
    steps = np.full(z.shape, -1, dtype=np.int32)
    which = np.zeros(z.shape, dtype=np.int16)
    active = np.ones(z.shape, dtype=bool)
    for it in range(max_iter + 1):
        if not active.any():
            break
        za = z[active]
        with np.errstate(invalid="ignore", over="ignore"):
            esc = ~(np.abs(za) <= radius)
        hit = np.full(za.shape, -1, dtype=np.int64)
        for t in range(len(traps)):
            m = (hit < 0) & ~esc & (np.abs(za - traps[t]) <= trap_r)
            hit[m] = t
        done = esc | (hit >= 0)
        if done.any():
            idx = np.where(active)
            sel = (idx[0][done], idx[1][done])
            steps[sel] = it
            wsel = np.zeros(done.sum(), dtype=np.int16)
            hd = hit[done]
            wsel[hd >= 0] = groups[hd[hd >= 0]] + 1
            which[sel] = wsel
            active[sel] = False
        if it < max_iter and active.any():
            z[active] = _polyval_np(c, z[active])
    return steps, which


def render_basin_grid(coeffs, xs, ys, max_iter, radius, traps, groups, trap_r):
    c = np.asarray(coeffs, dtype=np.complex128)
    traps = np.asarray(traps, dtype=np.complex128)
    groups = np.asarray(groups, dtype=np.int16)
    if USE_NUMBA:
        return _render_basin_nb(c, xs, ys, max_iter, radius, traps, groups,
                                trap_r)
    return _render_basin_np(c, xs, ys, max_iter, radius, traps, groups, trap_r)


# ------------------------------------------------------- inverse iteration


@njit(cache=True)
def _cloud_nb(c, dc, z0, choices, out, burn):
    nb_chains, length = choices.shape
    deg = len(c) - 1
    for b in range(nb_chains):
        # preimage polynomial p(w) - z: only the constant coefficient moves
        cc = c.copy()
        z = z0[b]
        w = np.empty(deg, dtype=np.complex128)
        an = abs(c[deg])
        r = 0.0
        for i in range(deg):
            a = abs(c[i]) / an
            if a > r:
                r = a
        r += 2.0
        for i in range(deg):
            ang = 2.0 * np.pi * i / deg + 0.77
            w[i] = r * np.cos(ang) + 1j * r * np.sin(ang)
        for step in range(length):
            cc[0] = c[0] - z
            w = _aberth_iterate_nb(cc, dc, w, 80, 1e-13)
            # the warm start can stall on a degenerate configuration (e.g.
            # all-real iterates with all-complex roots stay real forever);
            # restart such chains from an asymmetric circle
            resid = 0.0
            scale = abs(cc[0]) + abs(cc[deg])
            for i in range(deg):
                q = abs(_polyval_scalar(cc, w[i]))
                if q > resid:
                    resid = q
            if resid > 1e-8 * (scale + 1.0):
                rr = r + abs(z)
                for i in range(deg):
                    ang = 2.0 * np.pi * i / deg + 0.77 + 0.31 * (step + 1)
                    w[i] = rr * np.cos(ang) + 1j * rr * np.sin(ang)
                w = _aberth_iterate_nb(cc, dc, w, 200, 1e-13)
            # deterministic branch pick: lexicographic (re, im) order
            order = np.argsort(w.real + 1e-9 * w.imag)
            z = w[order[choices[b, step]]]
            if step >= burn:
                out[b, step - burn] = z
    return out


def _cloud_np(c, dc, z0, choices, out, burn):
    nb_chains, length = choices.shape
    deg = len(c) - 1
    an = abs(c[deg])
    r = 2.0 + max(abs(c[i]) / an for i in range(deg))
    ang = 2.0 * np.pi * np.arange(deg) / deg + 0.77
    w = np.tile(r * np.exp(1j * ang), (nb_chains, 1))
    z = z0.copy()
    def iterate(w, z, maxiter):
        for _ in range(maxiter):
            p = _polyval_np(c, w) - z[:, None]
            dp = _polyval_np(dc, w)
            ok = p != 0.0
            ratio = np.where(ok, dp / np.where(ok, p, 1.0), 0.0)
            diff = w[:, :, None] - w[:, None, :]
            ii = np.arange(deg)
            diff[:, ii, ii] = 1.0
            diff[diff == 0.0] = 1e-12 + 1e-12j
            s = (1.0 / diff).sum(axis=2) - 1.0
            denom = ratio - s
            good = ok & (denom != 0.0)
            corr = np.where(good, 1.0 / np.where(good, denom, 1.0), 0.0)
            w = w - corr
            if np.max(np.abs(corr) / (1.0 + np.abs(w))) < 1e-13:
                break
        return w

    for step in range(length):
        # batched Aberth on p(w) - z_b, warm-started from the previous step
        w = iterate(w, z, 80)
        # restart chains whose warm start stalled on a degenerate
        # configuration (e.g. all-real iterates with all-complex roots)
        resid = np.abs(_polyval_np(c, w) - z[:, None]).max(axis=1)
        bad = resid > 1e-8 * (np.abs(z) + 1.0)
        if bad.any():
            ang2 = ang + 0.31 * (step + 1)
            w[bad] = (r + np.abs(z[bad]))[:, None] * np.exp(1j * ang2)
            w[bad] = iterate(w[bad], z[bad], 200)
        order = np.argsort(w.real + 1e-9 * w.imag, axis=1)
        pick = order[np.arange(nb_chains), choices[:, step]]
        z = w[np.arange(nb_chains), pick]
        if step >= burn:
            out[:, step - burn] = z
    return out


def cloud_chains(coeffs, z0, choices, burn):
    """Backward random orbits: ``choices[b, s]`` selects the preimage branch
    (in (re, im) sorted order) of chain b at step s."""
    c = np.asarray(coeffs, dtype=np.complex128)
    deg = len(c) - 1
    dc = c[1:] * np.arange(1, deg + 1)
    z0 = np.asarray(z0, dtype=np.complex128)
    choices = np.asarray(choices, dtype=np.int64)
    out = np.empty((choices.shape[0], choices.shape[1] - burn),
                   dtype=np.complex128)
    if USE_NUMBA:
        return _cloud_nb(c, dc, z0, choices, out, burn)
    return _cloud_np(c, dc, z0, choices, out, burn)


# ------------------------------------------------- periodic point refinement


@njit(cache=True)
def _newton_periodic_nb(c, dc, seeds, k, maxiter, tol, bound):
    n = len(seeds)
    pts = seeds.copy()
    mult = np.zeros(n, dtype=np.complex128)
    ok = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        z = pts[i]
        conv = False
        for _ in range(maxiter):
            w = z
            d = 1.0 + 0.0j
            bad = False
            for _ in range(k):
                d *= _polyval_scalar(dc, w)
                w = _polyval_scalar(c, w)
                if abs(w) > bound or not np.isfinite(abs(w)):
                    bad = True
                    break
            if bad:
                break
            f = w - z
            fp = d - 1.0
            if fp == 0.0:
                break
            step = f / fp
            z -= step
            if abs(step) < tol * (1.0 + abs(z)):
                conv = True
                break
        if conv:
            # final multiplier at the converged point
            w = z
            d = 1.0 + 0.0j
            for _ in range(k):
                d *= _polyval_scalar(dc, w)
                w = _polyval_scalar(c, w)
            if abs(w - z) < 1e-6 * (1.0 + abs(z)):
                pts[i] = z
                mult[i] = d
                ok[i] = True
    return pts, mult, ok


def _newton_periodic_np(c, dc, seeds, k, maxiter, tol, bound):
    z = seeds.copy()
    alive = np.ones(len(z), dtype=bool)
    for _ in range(maxiter):
        w = z.copy()
        d = np.ones(len(z), dtype=np.complex128)
        for _ in range(k):
            d[alive] *= _polyval_np(dc, w[alive])
            w[alive] = _polyval_np(c, w[alive])
            with np.errstate(invalid="ignore", over="ignore"):
                gone = alive & ~(np.abs(w) <= bound)
            alive &= ~gone
        f = w - z
        fp = d - 1.0
        good = alive & (fp != 0.0)
        step = np.zeros_like(z)
        step[good] = f[good] / fp[good]
        z = z - step
        if not alive.any():
            break
        if np.max(np.abs(step[alive]) / (1.0 + np.abs(z[alive]))) < tol:
            break
    # verify and compute multipliers
    w = z.copy()
    d = np.ones(len(z), dtype=np.complex128)
    for _ in range(k):
        d[alive] *= _polyval_np(dc, w[alive])
        w[alive] = _polyval_np(c, w[alive])
        with np.errstate(invalid="ignore", over="ignore"):
            gone = alive & ~(np.abs(w) <= bound)
        alive &= ~gone
    ok = alive & (np.abs(w - z) < 1e-6 * (1.0 + np.abs(z)))
    return z, d, ok


def newton_periodic(coeffs, seeds, k, maxiter=60, tol=1e-12, bound=None):
    """Newton on p^(k)(z) - z from each seed; returns points, multipliers of
    the k-fold derivative, and a convergence mask."""
    c = np.asarray(coeffs, dtype=np.complex128)
    deg = len(c) - 1
    dc = c[1:] * np.arange(1, deg + 1)
    seeds = np.asarray(seeds, dtype=np.complex128)
    if bound is None:
        bound = 1e6
    if USE_NUMBA:
        return _newton_periodic_nb(c, dc, seeds, k, maxiter, tol, bound)
    return _newton_periodic_np(c, dc, seeds, k, maxiter, tol, bound)
