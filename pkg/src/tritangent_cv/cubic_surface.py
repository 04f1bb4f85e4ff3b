"""Geometry of the affine cubics x^2 + y^2 + z^2 + xyz = px + qy + rz + s.

Covers membership, reduction of a general affine cubic with a generic
tritangent plane at infinity to that normal form, classification of a plane
section of a projective cubic, and singular points of the family.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    AffineChange,
    AffineCubicPoly,
    Poly,
    ProjectiveCubic,
    as_complex,
    poly_roots,
    substitute,
)
from .errors import DomainError
from .trace_map import CubicParams


class SingularPointReport(NamedTuple):
    location: tuple
    gradient_residual: float
    surface_residual: float
    hessian_rank: int
    label: str | None


class TritangentResult(NamedTuple):
    kind: str  # generic | eckardt | not_tritangent | touches_singularity
    point: tuple | None = None
    lines: tuple | None = None


def on_surface(params, pt):
    """Normalized residual of the cubic equation at ``pt``."""
    p, q, r, s = (as_complex(v) for v in params)
    x, y, z = (as_complex(v) for v in pt)
    val = x * x + y * y + z * z + x * y * z - p * x - q * y - r * z - s
    size = max(abs(x), abs(y), abs(z))
    return abs(val) / (1 + size ** 3)


def solve_for_z(params, x, y, tol=DEFAULT_TOL):
    """Both z with (x, y, z) on the surface: roots of z^2 + (xy - r) z + (x^2 + y^2 - px - qy - s)."""
    p, q, r, s = (as_complex(v) for v in params)
    x, y = as_complex(x), as_complex(y)
    return poly_roots([x * x + y * y - p * x - q * y - s, x * y - r, 1], tol)


# ---------------------------------------------------------------------------
# ternary cubic forms that split into lines
# ---------------------------------------------------------------------------

def _restrict_to_line(G, A, B):
    """Coefficients (lowest first) of t -> G(A + t B)."""
    coeffs = np.zeros(4, dtype=complex)
    for e, c in G.terms.items():
        term = np.array([c], dtype=complex)
        for i, k in enumerate(e):
            for _ in range(k):
                term = np.polynomial.polynomial.polymul(term, [A[i], B[i]])
        coeffs[: len(term)] += term
    return coeffs


def _unit(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def _line_residual(G, form, gscale):
    """How far ``G`` is from vanishing on the line ``form . X = 0``."""
    _, _, vh = np.linalg.svd(form[None, :])
    A, B = vh[1].conj(), vh[2].conj()
    return float(np.max(np.abs(_restrict_to_line(G, A, B)))) / gscale


def split_into_lines(G, tol=DEFAULT_TOL, seed=0):
    """Write a ternary cubic form as ``lam * l1 * l2 * l3`` if possible.

    Restricts ``G`` to two random lines; the three points on each are one
    point per factor line.  Of the nine lines joining a point of the first
    triple to a point of the second, a factor line is one on which ``G``
    vanishes.  Returns ``(lam, [l1, l2, l3])`` with unit-norm forms, or None
    when no consistent triple of factors exists.
    """
    if G.nvars != 3 or any(sum(e) != 3 for e in G.terms):
        raise ValueError("expected a ternary cubic form")
    gscale = G.max_abs()
    if gscale == 0:
        return None
    rng = np.random.default_rng(seed)
    triples = []
    for _ in range(2):
        P0 = _unit(rng.normal(size=3) + 1j * rng.normal(size=3))
        P1 = _unit(rng.normal(size=3) + 1j * rng.normal(size=3))
        coeffs = _restrict_to_line(G, P0, P1)
        if abs(coeffs[3]) <= 1e-8 * gscale:
            return None
        triples.append([_unit(P0 + t * P1) for t in poly_roots(coeffs, tol, seed)])
    thresh = max(tol.eps_equal, 1e-6)
    ok = {}
    for i, j in itertools.product(range(3), range(3)):
        form = np.cross(triples[0][i], triples[1][j])
        if np.linalg.norm(form) <= 1e-10:
            continue
        form = _unit(form)
        if _line_residual(G, form, gscale) <= thresh:
            ok[(i, j)] = form
    for perm in itertools.permutations(range(3)):
        if all((i, perm[i]) in ok for i in range(3)):
            lines = [ok[(i, perm[i])] for i in range(3)]
            break
    else:
        return None
    probe = rng.normal(size=3) + 1j * rng.normal(size=3)
    denom = np.prod([form @ probe for form in lines])
    lam = G(*probe) / denom
    prod = Poly.constant(lam, 3)
    for form in lines:
        prod = prod * Poly.linear_form(form.tolist())
    if prod.distance(G) > thresh * gscale:
        return None
    return complex(lam), lines


def _independent(l1, l2, tol):
    return np.linalg.norm(np.cross(l1, l2)) > tol


def _concurrency(lines):
    """|det| of the unit-norm line matrix; 0 iff the lines share a point."""
    return abs(np.linalg.det(np.array(lines)))


def _projective_key(v):
    v = np.asarray(v, dtype=complex)
    big = np.max(np.abs(v))
    k = next(i for i, x in enumerate(v) if abs(x) > 1e-8 * big)
    return v / v[k]


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------

EVEN_SIGNS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def _lex_less(a, b, tol):
    for x, y in zip(a, b):
        if abs(x - y) > tol * (1 + max(abs(x), abs(y))):
            return x < y
    return False


def _flat(params):
    return [v for z in params for v in (z.real, z.imag)]


def _clean(z, scale, eps=1e-13):
    """Snap round-off-sized real/imag parts to zero."""
    re = 0.0 if abs(z.real) <= eps * scale else z.real
    im = 0.0 if abs(z.imag) <= eps * scale else z.imag
    return complex(re, im)


def canonical_params(params, tol=1e-9):
    """Least representative of params under coordinate permutations and even sign flips.

    Returns ``(params, P)`` with P the signed permutation matrix such that
    substituting x -> P x maps the given normal form to the returned one.
    """
    pqr = np.array([as_complex(v) for v in params[:3]])
    s = as_complex(params[3])
    scale = 1 + max(abs(v) for v in params)
    best, best_P = None, None
    for perm in itertools.permutations(range(3)):
        for signs in EVEN_SIGNS:
            P = np.zeros((3, 3))
            for i in range(3):
                P[i, perm[i]] = signs[i]
            cand = [_clean(complex(v), scale) for v in P.T @ pqr] + [_clean(s, scale)]
            if best is None or _lex_less(_flat(cand), _flat(best), tol):
                best, best_P = cand, P
    return CubicParams(*best), best_P


def normalize(f, tol=DEFAULT_TOL, seed=0):
    """Reduce an affine cubic to x^2+y^2+z^2+xyz = px+qy+rz+s.

    The cubic part must split into three independent, non-concurrent linear
    forms.  The change is built in three steps: a linear map sending those
    forms to x, y, z; the translation (x,y,z) -> (x - f23, y - f13, z - f12)
    killing the cross terms; and the diagonal scaling by
    sqrt(f22 f33), sqrt(f11 f33), sqrt(f11 f22) with signs chosen so the
    product of the scales is f11 f22 f33.  Finally the parameters are
    canonicalized (see ``canonical_params``).

    Returns ``(params, change)`` with ``substitute(f, change)`` equal to the
    normal form of ``params``.
    """
    if not isinstance(f, AffineCubicPoly):
        f = AffineCubicPoly(f.terms)
    split = split_into_lines(f.cubic_part(), tol, seed)
    if split is None:
        raise DomainError("not-generic-tritangent-at-infinity",
                          "cubic part is not a product of three linear forms")
    lam, lines = split
    for l1, l2 in itertools.combinations(lines, 2):
        if not _independent(l1, l2, tol.eps_equal):
            raise DomainError("not-generic-tritangent-at-infinity",
                              "cubic part has a repeated linear factor")
    if _concurrency(lines) <= tol.eps_equal:
        raise DomainError("eckardt-at-infinity", "the three lines at infinity are concurrent")

    step1 = AffineChange(np.linalg.inv(np.array(lines)), np.zeros(3), lam)
    g = substitute(f, step1)
    f12, f13, f23 = g.coeff(1, 1, 0), g.coeff(1, 0, 1), g.coeff(0, 1, 1)
    step2 = AffineChange(np.eye(3), [-f23, -f13, -f12], 1)
    g = substitute(g, step2)
    f11, f22, f33 = g.coeff(2, 0, 0), g.coeff(0, 2, 0), g.coeff(0, 0, 2)
    gscale = 1 + g.max_abs()
    if min(abs(f11), abs(f22), abs(f33)) <= tol.eps_equal * gscale:
        raise DomainError("singular-at-infinity",
                          "a squared coefficient vanishes, so the surface is singular at infinity")
    alpha, beta, gamma = np.sqrt(complex(f22 * f33)), np.sqrt(complex(f11 * f33)), np.sqrt(complex(f11 * f22))
    want = f11 * f22 * f33
    if abs(alpha * beta * gamma - want) > abs(alpha * beta * gamma + want):
        gamma = -gamma
    step3 = AffineChange(np.diag([alpha, beta, gamma]), np.zeros(3), alpha * beta * gamma)
    g = substitute(g, step3)
    raw = CubicParams(-g.coeff(1, 0, 0), -g.coeff(0, 1, 0), -g.coeff(0, 0, 1), -g.coeff(0, 0, 0))
    params, P = canonical_params(raw)
    change = step1.then(step2).then(step3).then(AffineChange(P, np.zeros(3), 1))
    return params, change


def normal_form_residual(f, params, change):
    """Max coefficient gap between substitute(f, change) and the normal form."""
    return substitute(f, change).distance(AffineCubicPoly.normal_form(params))


# ---------------------------------------------------------------------------
# plane sections
# ---------------------------------------------------------------------------

def plane_basis(plane):
    """Three vectors spanning the plane ``plane . X = 0`` in C^4."""
    plane = np.asarray(plane, dtype=complex)
    if plane.shape != (4,) or not np.any(plane):
        raise ValueError("plane must be a nonzero 4-vector")
    _, _, vh = np.linalg.svd(plane[None, :])
    return vh[1:].conj()


def _singular_on_line(S, A, B, tol):
    """Whether the projective line through A and B meets the singular locus of S."""
    grads = [S.diff(i) for i in range(4)]
    gscale = max(g.max_abs() for g in grads) or 1.0
    restricted = []
    for g in grads:
        c = np.zeros(3, dtype=complex)
        for e, coef in g.terms.items():
            term = np.array([coef], dtype=complex)
            for i, k in enumerate(e):
                for _ in range(k):
                    term = np.polynomial.polynomial.polymul(term, [A[i], B[i]])
            c[: len(term)] += term
        restricted.append(c)
    R = np.array(restricted) / gscale
    eps = tol.eps_equal
    if np.max(np.abs(R)) <= eps:
        return True
    # the point B itself (t = infinity)
    if np.max(np.abs(R[:, 2])) <= eps:
        return True
    k = int(np.argmax(np.max(np.abs(R), axis=1)))
    lead = R[k]
    if np.max(np.abs(lead[1:])) <= eps:
        return False
    for t in poly_roots(lead, tol):
        vals = np.array([np.polynomial.polynomial.polyval(t, row) for row in R])
        if np.max(np.abs(vals)) <= eps * (1 + abs(t)) ** 2:
            return True
    return False


def verify_tritangent(S, plane, tol=DEFAULT_TOL, seed=0):
    """Classify the section of the cubic surface ``S`` by ``plane``.

    Returns a TritangentResult whose ``kind`` is ``generic`` (three lines,
    pairwise meeting in three distinct points), ``eckardt`` (three concurrent
    lines; ``point`` is the common point), ``not_tritangent`` (not three
    distinct lines), or ``touches_singularity``.
    """
    if not isinstance(S, ProjectiveCubic):
        S = ProjectiveCubic(S.terms)
    basis = plane_basis(plane)  # rows
    G = S.compose_linear(basis.T)
    if G.max_abs() <= tol.eps_equal * S.max_abs():
        return TritangentResult("not_tritangent")
    split = split_into_lines(G, tol, seed)
    if split is None:
        return TritangentResult("not_tritangent")
    _, lines = split
    for l1, l2 in itertools.combinations(lines, 2):
        if not _independent(l1, l2, tol.eps_equal):
            return TritangentResult("not_tritangent")
    lines_p3 = []
    for form in lines:
        _, _, vh = np.linalg.svd(form[None, :])
        A, B = vh[1].conj() @ basis, vh[2].conj() @ basis
        lines_p3.append((A, B))
        if _singular_on_line(S, A, B, tol):
            return TritangentResult("touches_singularity", lines=tuple(lines_p3))
    if _concurrency(lines) <= tol.eps_equal:
        _, _, vh = np.linalg.svd(np.array(lines))
        common = vh[-1].conj() @ basis
        return TritangentResult("eckardt", tuple(_projective_key(common)), tuple(lines_p3))
    return TritangentResult("generic", lines=tuple(lines_p3))


# ---------------------------------------------------------------------------
# singular points
# ---------------------------------------------------------------------------

def _gradient_residual(params, pt):
    p, q, r, _ = params
    x, y, z = pt
    g = (2 * x + y * z - p, 2 * y + x * z - q, 2 * z + x * y - r)
    return max(abs(v) for v in g) / (1 + max(abs(x), abs(y), abs(z)) ** 2)


def hessian(pt):
    x, y, z = pt
    return np.array([[2, z, y], [z, 2, x], [y, x, 2]], dtype=complex)


def hessian_rank(pt, rtol=1e-7):
    sv = np.linalg.svd(hessian(pt), compute_uv=False)
    return int(np.sum(sv > rtol * max(sv[0], 1.0)))


def _gradient_candidates(params, tol):
    """All solutions of the gradient system, by elimination to a quintic in z.

    x = (p - yz)/2 from the first equation; the second gives
    y (4 - z^2) = 2q - pz; clearing (4 - z^2)^2 in the third leaves
    4z D^2 + p N D - z N^2 - 2r D^2 = 0 with N = 2q - pz, D = 4 - z^2.
    The roots z = +-2 (D = 0) are handled separately.
    """
    p, q, r, _ = (as_complex(v) for v in params)
    P = np.polynomial.polynomial
    N = np.array([2 * q, -p])
    D = np.array([4, 0, -1], dtype=complex)
    D2 = P.polymul(D, D)
    terms = [P.polymul([0, 4], D2), P.polymul(p * N, D),
             -P.polymul([0, 1], P.polymul(N, N)), -2 * r * D2]
    quintic = np.zeros(6, dtype=complex)
    for t in terms:
        quintic[: len(t)] += t
    out = []
    for z in poly_roots(quintic, tol):
        Dz = 4 - z * z
        if abs(Dz) <= 1e-6:
            continue
        y = (2 * q - p * z) / Dz
        out.append(((p - y * z) / 2, y, z))
    for z in (2 + 0j, -2 + 0j):
        if abs(2 * q - p * z) <= 1e-9 * (1 + abs(p) + abs(q)):
            # third equation: 4z + p y - y^2 z = 2r, quadratic in y
            for y in poly_roots([4 * z - 2 * r, p, -z], tol):
                out.append(((p - y * z) / 2, y, z))
    return out


def _newton_gradient(params, pt, iters=4):
    p, q, r, _ = params
    x = np.array(pt, dtype=complex)
    best = x.copy()
    best_res = _gradient_residual(params, x)
    for _ in range(iters):
        F = np.array([2 * x[0] + x[1] * x[2] - p, 2 * x[1] + x[0] * x[2] - q, 2 * x[2] + x[0] * x[1] - r])
        H = hessian(x)
        try:
            x = x - np.linalg.solve(H, F)
        except np.linalg.LinAlgError:
            break
        res = _gradient_residual(params, x)
        if res < best_res:
            best, best_res = x.copy(), res
    return tuple(complex(v) for v in best)


def singular_points(params, tol=DEFAULT_TOL):
    """Singular points of the affine surface with the given parameters.

    Each report carries the Hessian rank; rank 3 is labelled ``A1``.  No
    finer ADE labels are assigned.
    """
    params = CubicParams(*(as_complex(v) for v in params))
    reports = []
    for pt in _gradient_candidates(params, tol):
        pt = _newton_gradient(params, pt)
        gres = _gradient_residual(params, pt)
        sres = on_surface(params, pt)
        if gres >= tol.eps_residual or sres >= tol.eps_residual:
            continue
        arr = np.array(pt)
        if any(np.max(np.abs(arr - np.array(rep.location))) <= tol.eps_equal * (1 + np.max(np.abs(arr)))
               for rep in reports):
            continue
        rank = hessian_rank(pt)
        reports.append(SingularPointReport(pt, gres, sres, rank, "A1" if rank == 3 else None))
    reports.sort(key=lambda rep: [v for z in rep.location for v in (z.real, z.imag)])
    return reports


def newton_gradient_search(params, starts=200, box=5.0, seed=0, maxiter=60):
    """Multistart Newton on the gradient system; an oracle for ``singular_points``.

    Returns the converged gradient solutions (not yet filtered by the surface
    equation).
    """
    p, q, r, _ = (as_complex(v) for v in params)
    rng = np.random.default_rng(seed)
    X = rng.uniform(-box, box, (starts, 3)) + 1j * rng.uniform(-box, box, (starts, 3))
    for _ in range(maxiter):
        x, y, z = X.T
        F = np.stack([2 * x + y * z - p, 2 * y + x * z - q, 2 * z + x * y - r], axis=-1)
        H = np.empty((len(X), 3, 3), dtype=complex)
        H[:, 0] = np.stack([np.full_like(x, 2), z, y], axis=-1)
        H[:, 1] = np.stack([z, np.full_like(x, 2), x], axis=-1)
        H[:, 2] = np.stack([y, x, np.full_like(x, 2)], axis=-1)
        det = np.linalg.det(H)
        ok = np.abs(det) > 1e-12
        step = np.zeros_like(X)
        step[ok] = np.linalg.solve(H[ok], F[ok][..., None])[..., 0]
        X = X - step
        X[~np.all(np.isfinite(X), axis=1)] = 1e6
    found = []
    params = (p, q, r, 0)
    for pt in X:
        if np.max(np.abs(pt)) < 1e5 and _gradient_residual(params, pt) < 1e-9:
            if not any(np.max(np.abs(pt - f)) < 1e-6 for f in found):
                found.append(pt)
    return [tuple(complex(v) for v in pt) for pt in found]
