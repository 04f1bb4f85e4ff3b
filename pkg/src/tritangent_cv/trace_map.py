"""The boundary-trace map (a, b, c, d) -> (p, q, r, s) and its inverse.

The coefficients p, q, r are the three pairings ab+cd, bc+da, ca+bd, i.e. the
roots of the resolvent cubic of the quartic whose roots are a, b, c, d.  The
fiber solver exploits this: the symmetric functions of (p, q, r) together
with s pin down the elementary symmetric functions of (a, b, c, d) up to a
cubic in u = e1**2.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from itertools import permutations
from typing import NamedTuple

import numpy as np

from .algebra import DEFAULT_TOL, as_complex, poly_roots, solve_linear
from .errors import DomainError


class Traces4(NamedTuple):
    a: complex
    b: complex
    c: complex
    d: complex


class CubicParams(NamedTuple):
    p: complex
    q: complex
    r: complex
    s: complex


class ElemSym(NamedTuple):
    e1: complex
    e2: complex
    e3: complex
    e4: complex

    def quartic(self):
        """Coefficients (lowest first) of t^4 - e1 t^3 + e2 t^2 - e3 t + e4."""
        return [self.e4, -self.e3, self.e2, -self.e1, 1]


@dataclass
class FiberSolution:
    points: list
    residuals: list
    seed: int
    method: str = "elimination"
    clustered: bool = False
    warnings: list = field(default_factory=list)


@dataclass
class FiberCount:
    count: int
    saturated: bool
    non_generic: bool
    points: list
    rounds: int


def phi(t):
    """Coefficients of the cubic surface attached to boundary traces.

    Works elementwise, so the entries of ``t`` may be numpy arrays.
    """
    a, b, c, d = t
    return CubicParams(
        a * b + c * d,
        b * c + d * a,
        c * a + b * d,
        4 - a * a - b * b - c * c - d * d - a * b * c * d,
    )


def phi_jacobian(t):
    """4x4 matrix of partials; rows (p, q, r, s), columns (a, b, c, d).

    Accepts batched entries; the result then has shape (..., 4, 4).
    """
    a, b, c, d = (np.asarray(x, dtype=complex) for x in t)
    rows = [
        [b, a, d, c],
        [d, c, b, a],
        [c, d, a, b],
        [-2 * a - b * c * d, -2 * b - a * c * d, -2 * c - a * b * d, -2 * d - a * b * c],
    ]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def _det_cofactor(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * _det_cofactor(minor)
    return total


def phi_jacobian_det(t):
    """Jacobian determinant by Laplace expansion along the first row.

    With integer inputs every intermediate is an integer-valued float, so the
    result is exact.
    """
    m = phi_jacobian([as_complex(x) for x in t]).tolist()
    return complex(_det_cofactor(m))


def factor_residuals(t):
    """Residuals of the three difference and three sum factorizations of p, q, r.

    Order: p-q, q-r, r-p, p+q, q+r, r+p.  Elementwise on arrays.  The
    third difference is r - p = (a - d)(c - b).
    """
    a, b, c, d = t
    p, q, r, _ = phi(t)
    return (
        abs((p - q) - (a - c) * (b - d)),
        abs((q - r) - (b - a) * (c - d)),
        abs((r - p) - (a - d) * (c - b)),
        abs((p + q) - (a + c) * (b + d)),
        abs((q + r) - (b + a) * (c + d)),
        abs((r + p) - (a + d) * (b + c)),
    )


def _maxabs(v):
    return max(abs(x) for x in v)


def forward_residual(t, target):
    """max |phi(t) - target| relative to 1 + max|target|."""
    got = phi(t)
    return _maxabs([g - w for g, w in zip(got, target)]) / (1 + _maxabs(target))


def resolvent_cubic_in_u(target):
    """Coefficients (lowest first) of the cubic whose roots are u = e1^2.

    With K = 4 + 2 e2 - s and M = (pq+qr+rp) + 4K, the relations
        e2 = p + q + r,
        e1 e3 = M - 4u,          e4 = K - u,
        e3^2 = pqr - u e4 + 4 e2 e4
    combine (multiply the last by u) into
        u^3 - (K + 4 e2 + 16) u^2 + (pqr + 4 e2 K + 8 M) u - M^2 = 0.
    """
    p, q, r, s = (as_complex(x) for x in target)
    e2 = p + q + r
    sig2 = p * q + q * r + r * p
    sig3 = p * q * r
    K = 4 + 2 * e2 - s
    M = sig2 + 4 * K
    return [-M * M, sig3 + 4 * e2 * K + 8 * M, -(K + 4 * e2 + 16), 1 + 0j]


def _elem_sym_candidates(target, tol, seed):
    p, q, r, s = (as_complex(x) for x in target)
    e2 = p + q + r
    sig2 = p * q + q * r + r * p
    sig3 = p * q * r
    K = 4 + 2 * e2 - s
    M = sig2 + 4 * K
    scale = 1 + _maxabs(target)
    out = []
    seen = []
    for u in poly_roots(resolvent_cubic_in_u(target), tol, seed):
        if any(abs(u - w) <= tol.eps_equal * (1 + abs(w)) for w in seen):
            continue
        seen.append(u)
        if abs(u) <= tol.eps_equal * scale ** 2:
            # e1 = 0: then 4 e4 = -(pq+qr+rp) and e3^2 = pqr + 4 e2 e4
            e4 = K
            if abs(4 * e4 + sig2) > 1e-6 * scale ** 2:
                continue
            root = cmath.sqrt(sig3 + 4 * e2 * e4)
            out.append(ElemSym(0j, e2, root, e4))
            out.append(ElemSym(0j, e2, -root, e4))
        else:
            for e1 in (cmath.sqrt(u), -cmath.sqrt(u)):
                out.append(ElemSym(e1, e2, (M - 4 * u) / e1, K - u))
    return out


def _polish(t, target, tol, iters=6):
    """Newton refinement of a near-preimage; returns the best point seen."""
    x = np.array(t, dtype=complex)
    tgt = np.array(target, dtype=complex)
    best = x.copy()
    best_res = forward_residual(x, tgt)
    for _ in range(iters):
        if best_res < 1e-3 * tol.eps_residual:
            break
        F = np.array(phi(x)) - tgt
        try:
            step = solve_linear(phi_jacobian(x), F, tol)
        except DomainError:
            break
        x = x - step
        res = forward_residual(x, tgt)
        if not np.isfinite(res):
            break
        if res < best_res:
            best, best_res = x.copy(), res
    return best, best_res


def _point_key(t):
    return tuple(v for z in t for v in (z.real, z.imag))


def canonical_points(points, tol=DEFAULT_TOL):
    """Deduplicate by max-modulus distance and sort lexicographically."""
    uniq = []
    for t in sorted(points, key=_point_key):
        arr = np.asarray(t, dtype=complex)
        thresh = tol.eps_equal * (1 + float(np.max(np.abs(arr))))
        if any(float(np.max(np.abs(arr - np.asarray(u)))) <= thresh for u in uniq):
            continue
        uniq.append(Traces4(*(complex(v) for v in arr)))
    return uniq


def fiber(target, tol=DEFAULT_TOL, seed=0):
    """Preimages of ``target`` under the trace map, by resolvent elimination.

    Solves the cubic in u = e1^2, recovers (e1, e2, e3, e4) on each branch,
    factors the quartic with those symmetric functions, and keeps every
    ordering of its roots whose pairings reproduce (p, q, r).  Candidates are
    Newton-polished and verified against the forward residual.  The result
    is closed under t -> -t.  Falls back to the multistart Newton search only
    if elimination verifies nothing.
    """
    target = CubicParams(*(as_complex(x) for x in target))
    scale = 1 + _maxabs(target)
    raw = []
    clustered = False
    for k, es in enumerate(_elem_sym_candidates(target, tol, seed)):
        roots = poly_roots(es.quartic(), tol, seed + k + 1)
        if len({(round(z.real, 12), round(z.imag, 12)) for z in roots}) < 4:
            clustered = True
        for perm in set(permutations(roots)):
            a, b, c, d = perm
            got = (a * b + c * d, b * c + d * a, c * a + b * d)
            if max(abs(g - w) for g, w in zip(got, target[:3])) <= 1e-5 * scale:
                raw.append(perm)

    points = []
    for t in raw:
        pt, res = _polish(t, target, tol)
        if res < tol.eps_residual:
            points.append(pt)
            points.append(-pt)
    method = "elimination"
    if not points:
        points = [np.asarray(t) for t in newton_fiber(target, tol=tol, seed=seed)]
        method = "newton_oracle"
    if not points:
        raise DomainError("fiber-not-found", "no verified preimage found")
    pts = canonical_points(points, tol)
    residuals = [forward_residual(t, target) for t in pts]
    warnings = ["clustered roots present; multiplicities not resolved"] if clustered else []
    return FiberSolution(pts, residuals, seed, method, clustered, warnings)


def newton_fiber(target, starts=500, box=10.0, tol=DEFAULT_TOL, seed=0, maxiter=200):
    """Multistart Newton search for preimages; an oracle independent of elimination.

    Starts are uniform in the complex box with |Re|, |Im| <= ``box``.  All
    starts iterate together in batched form.
    """
    target = np.array([as_complex(x) for x in target])
    rng = np.random.default_rng(seed)
    T = rng.uniform(-box, box, (starts, 4)) + 1j * rng.uniform(-box, box, (starts, 4))
    scale = 1 + float(np.max(np.abs(target)))
    active = np.ones(starts, dtype=bool)
    done = np.zeros(starts, dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        X = T[idx]
        F = np.stack(phi(X.T), axis=-1) - target
        res = np.max(np.abs(F), axis=1) / scale
        conv = res < 1e-3 * tol.eps_residual
        done[idx[conv]] = True
        active[idx[conv]] = False
        keep = ~conv
        idx, X, F = idx[keep], X[keep], F[keep]
        if idx.size == 0:
            break
        J = phi_jacobian(X.T)
        det = np.linalg.det(J)
        jscale = (1 + np.max(np.abs(X), axis=1)) ** 6
        ok = np.abs(det) > 1e-14 * jscale
        step = np.zeros_like(X)
        if ok.any():
            step[ok] = np.linalg.solve(J[ok], F[ok][..., None])[..., 0]
        # damp huge steps so starts do not fly off to infinity in one move
        size = np.max(np.abs(step), axis=1)
        cap = 10 * (1 + np.max(np.abs(X), axis=1))
        factor = np.where(size > cap, cap / np.maximum(size, 1e-300), 1.0)
        Xn = X - step * factor[:, None]
        bad = ~ok | ~np.all(np.isfinite(Xn), axis=1) | (np.max(np.abs(Xn), axis=1) > 1e8)
        T[idx] = Xn
        active[idx[bad]] = False
    found = []
    for t in T[done | active]:
        res = forward_residual(t, target)
        if res < 1e-3:
            t, res = _polish(t, target, tol)
        if res < tol.eps_residual:
            found.append(t)
    return canonical_points(found, tol)


def _jacobian_is_degenerate(t):
    scale = (1 + float(np.max(np.abs(np.asarray(t))))) ** 6
    return abs(np.linalg.det(phi_jacobian(t))) <= 1e-8 * scale


def fiber_count(target, trials=3, seed=0, tol=DEFAULT_TOL, starts=500):
    """Number of distinct preimages: elimination plus Newton saturation rounds.

    ``saturated`` is True when the last Newton round contributed nothing new.
    ``non_generic`` is set if any preimage has a (numerically) vanishing
    Jacobian, in which case the count is not a degree.
    """
    sol = fiber(target, tol, seed)
    pts = list(sol.points)
    saturated = True
    for k in range(trials):
        new = newton_fiber(target, starts=starts, tol=tol, seed=seed + 1000 * (k + 1))
        merged = canonical_points(pts + new + [Traces4(*(-np.asarray(t))) for t in new], tol)
        saturated = len(merged) == len(pts)
        pts = merged
    non_generic = sol.clustered or any(_jacobian_is_degenerate(t) for t in pts)
    return FiberCount(len(pts), saturated, non_generic, pts, trials)


def min_image_on_sphere(R, samples=10_000, seed=0):
    """min over sampled traces of max-modulus R of max(|p|, |q|, |r|, |s|).

    Samples are uniform in the complex polydisc of radius R, then rescaled so
    that the largest entry has modulus exactly R.
    """
    if R < 0 or samples < 1:
        raise ValueError("need R >= 0 and samples >= 1")
    rng = np.random.default_rng(seed)
    rad = R * np.sqrt(rng.uniform(0, 1, (samples, 4)))
    ang = rng.uniform(0, 2 * np.pi, (samples, 4))
    T = rad * np.exp(1j * ang)
    m = np.max(np.abs(T), axis=1, keepdims=True)
    T = np.where(m > 0, T * (R / np.where(m > 0, m, 1)), T)
    img = np.abs(np.stack(phi(T.T), axis=-1))
    return float(np.min(np.max(img, axis=1)))


def classify_pqr_zero(t, tol=1e-12):
    """Which vanishing family (if any) the traces belong to.

    Returns ``"all_zero_family"`` when three entries vanish,
    ``"antidiagonal_family"`` when three are equal and the fourth is their
    negative, and ``"none"`` otherwise.  These are exactly the traces with
    p = q = r = 0.
    """
    t = [as_complex(x) for x in t]
    eps = tol * (1 + _maxabs(t))
    for k in range(4):
        rest = t[:k] + t[k + 1:]
        if all(abs(x) <= eps for x in rest):
            return "all_zero_family"
    for k in range(4):
        rest = t[:k] + t[k + 1:]
        if (abs(rest[0] - rest[1]) <= eps and abs(rest[0] - rest[2]) <= eps
                and abs(t[k] + rest[0]) <= eps):
            return "antidiagonal_family"
    return "none"
