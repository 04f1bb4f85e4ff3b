"""Explicit SL(2, C) representations behind the cubic surfaces.

Trace coordinates for the 4-holed sphere with boundary relation ABCD = I:
a, b, c, d are the traces of A, B, C, D and x = tr AB, y = tr BC,
z = tr CA.  For the 1-holed torus (free on A, B): x = tr A, y = tr B,
z = tr AB, and the boundary trace is tr(A B A^-1 B^-1).

Matrix helpers accept stacked arrays of shape (..., 2, 2), so identities can
be checked on many random samples at once.
"""

from __future__ import annotations

import cmath
from typing import NamedTuple

import numpy as np

from .algebra import DEFAULT_TOL, as_complex, solve_linear
from .cubic_surface import solve_for_z
from .errors import DomainError
from .trace_map import CubicParams, Traces4, phi


class CharacterPoint(NamedTuple):
    x: complex
    y: complex
    z: complex


class FourHoledSphereRep(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray


class TorusRep(NamedTuple):
    A: np.ndarray
    B: np.ndarray


class TorusCorrespondence(NamedTuple):
    kappa: complex
    published_value: complex
    agrees: bool


EVEN_SIGN_CHANGES = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def tr(M):
    return np.trace(M, axis1=-2, axis2=-1)


def det2(M):
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def inv2(M):
    """Inverse of a unimodular 2x2 matrix (the adjugate)."""
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out


def _scalar(v):
    v = np.asarray(v)
    return complex(v) if v.ndim == 0 else v


def random_unimodular(rng, size=None):
    """Random SL(2, C) matrices: complex Gaussian entries rescaled to unit determinant."""
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (2, 2)
    M = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    dt = det2(M)
    small = np.abs(dt) < 1e-3
    while np.any(small):
        fresh = rng.normal(size=M[small].shape) + 1j * rng.normal(size=M[small].shape)
        M[small] = fresh
        dt = det2(M)
        small = np.abs(dt) < 1e-3
    return M / np.sqrt(dt)[..., None, None]


def random_four_holed_rep(rng, size=None):
    A, B, C = (random_unimodular(rng, size) for _ in range(3))
    return FourHoledSphereRep(A, B, C, inv2(A @ B @ C))


def _check_rep(rep):
    I = np.eye(2)
    for name, M in zip("ABCD", rep):
        if np.max(np.abs(det2(np.asarray(M)) - 1)) > 1e-10 * max(1.0, np.max(np.abs(M)) ** 2):
            raise DomainError("not-unimodular", f"det {name} != 1")
    A, B, C, D = (np.asarray(M, dtype=complex) for M in rep)
    size = np.max(np.abs(A)) * np.max(np.abs(B)) * np.max(np.abs(C)) * np.max(np.abs(D))
    if np.max(np.abs(A @ B @ C @ D - I)) > 1e-9 * max(1.0, float(size)):
        raise DomainError("relation-violated", "A B C D != I")


def traces_of_rep(rep, check=True):
    """Boundary traces and interior trace coordinates of a 4-holed sphere rep."""
    if check:
        _check_rep(rep)
    A, B, C, D = (np.asarray(M, dtype=complex) for M in rep)
    t = Traces4(*(_scalar(tr(M)) for M in (A, B, C, D)))
    pt = CharacterPoint(_scalar(tr(A @ B)), _scalar(tr(B @ C)), _scalar(tr(C @ A)))
    return t, pt


def hypersurface_residual(t, pt):
    """Relative residual of x^2+y^2+z^2+xyz = px+qy+rz+s with (p,q,r,s) = phi(t).

    Normalized by the sum of the moduli of the individual terms.  Works
    elementwise on arrays.
    """
    p, q, r, s = phi(t)
    x, y, z = pt
    terms = [x * x, y * y, z * z, x * y * z, -p * x, -q * y, -r * z, -s]
    val = sum(terms)
    scale = 1 + sum(abs(v) for v in terms)
    return abs(val) / scale


def _normal_position(u, v, w):
    """A = [[xi, 1], [0, 1/xi]], B = [[eta, 0], [zeta, 1/eta]] with
    tr A = u, tr B = v, tr AB = w."""
    def branch(trace):
        disc = cmath.sqrt(trace * trace - 4)
        roots = [(trace + disc) / 2, (trace - disc) / 2]
        # prefer |root| >= 1, then nonnegative imaginary part
        roots.sort(key=lambda z: (-round(abs(z), 12), -z.imag))
        return roots[0]

    xi, eta = branch(u), branch(v)
    zeta = w - xi * eta - 1 / (xi * eta)
    A = np.array([[xi, 1], [0, 1 / xi]], dtype=complex)
    B = np.array([[eta, 0], [zeta, 1 / eta]], dtype=complex)
    return A, B


def build_rep_4holed(t, pt, tol=DEFAULT_TOL):
    """An explicit representation with the given traces.

    A and B are put in normal position; C is solved from the four linear
    trace conditions tr C = c, tr CA = z, tr BC = y, tr ABC = d; then
    D = (ABC)^-1.

    Raises DomainError with kind ``off-variety``, ``reducible-locus`` or
    ``degenerate-configuration``.
    """
    a, b, c, d = (as_complex(v) for v in t)
    x, y, z = (as_complex(v) for v in pt)
    if hypersurface_residual((a, b, c, d), (x, y, z)) > tol.eps_residual:
        raise DomainError("off-variety", "point does not satisfy the cubic for these traces")
    comm = x * x + a * a + b * b - a * b * x - 4
    if abs(comm) <= tol.eps_equal * (1 + abs(x) ** 2 + abs(a) ** 2 + abs(b) ** 2 + abs(a * b * x)):
        raise DomainError("reducible-locus", "tr[A,B] = 2, the pair (A, B) is reducible")
    A, B = _normal_position(a, b, x)
    AB = A @ B
    # rows: coefficient of (c11, c12, c21, c22) in tr(C M) = sum_ij C_ij M_ji
    rows = [np.array([M[0, 0], M[1, 0], M[0, 1], M[1, 1]]) for M in (np.eye(2), A, B, AB)]
    try:
        cvec = solve_linear(np.array(rows), np.array([c, z, y, d]), tol)
    except DomainError as exc:
        raise DomainError("degenerate-configuration", "trace equations for C are singular") from exc
    C = cvec.reshape(2, 2)
    cscale = max(1.0, float(np.max(np.abs(C))) ** 2)
    if abs(det2(C) - 1) > max(tol.eps_equal, 1e-3 * tol.eps_residual) * cscale:
        raise DomainError("degenerate-configuration", f"det C = {det2(C)} != 1")
    C = C / np.sqrt(det2(C))
    D = inv2(A @ B @ C)
    return FourHoledSphereRep(A, B, C, D)


def torus_char(pt):
    """x^2 + y^2 + z^2 - xyz - 2: the commutator trace for tr A = x, tr B = y, tr AB = z."""
    x, y, z = pt
    return x * x + y * y + z * z - x * y * z - 2


def commutator_trace(rep):
    A, B = (np.asarray(M, dtype=complex) for M in rep)
    return _scalar(tr(A @ B @ inv2(A) @ inv2(B)))


def build_rep_torus(pt, tol=DEFAULT_TOL):
    """A pair (A, B) with tr A = x, tr B = y, tr AB = z.

    The point (2, 2, 2) gives the identity pair; any other point on the
    reducible locus (commutator trace 2) is refused.
    """
    x, y, z = (as_complex(v) for v in pt)
    scale = 1 + max(abs(x), abs(y), abs(z)) ** 3
    if max(abs(x - 2), abs(y - 2), abs(z - 2)) <= tol.eps_equal:
        return TorusRep(np.eye(2, dtype=complex), np.eye(2, dtype=complex))
    if abs(torus_char((x, y, z)) - 2) <= tol.eps_equal * scale:
        raise DomainError("reducible-locus", "commutator trace is 2")
    A, B = _normal_position(x, y, z)
    return TorusRep(A, B)


def delta_orbit(params, tol=DEFAULT_TOL):
    """Orbit of (p, q, r, s) under even sign changes of (x, y, z).

    Returns ``(is_invariant, orbit)``; invariance holds exactly when
    p = q = r = 0.
    """
    p, q, r, s = (as_complex(v) for v in params)
    scale = 1 + max(abs(p), abs(q), abs(r), abs(s))
    orbit = []
    for e1, e2, e3 in EVEN_SIGN_CHANGES:
        cand = CubicParams(e1 * p + 0j, e2 * q + 0j, e3 * r + 0j, s)
        cand = CubicParams(*(complex(v.real + 0.0, v.imag + 0.0) for v in cand))
        if not any(max(abs(u - v) for u, v in zip(cand, o)) <= tol.eps_equal * scale for o in orbit):
            orbit.append(cand)
    return len(orbit) == 1, orbit


def apply_sign_change(signs, pt):
    if np.prod(signs) != 1:
        raise ValueError("sign change must have product +1")
    return CharacterPoint(*(e * as_complex(v) for e, v in zip(signs, pt)))


def torus_correspondence(s):
    """Boundary trace of the torus character variety equivalent to V(0,0,0,s).

    Flipping (x, y, z) -> (-x, -y, -z) turns x^2+y^2+z^2+xyz = s into
    x^2+y^2+z^2-xyz = s, i.e. the commutator trace equals s - 2.  The value
    s + 2 is returned alongside as ``published_value``; the two never agree.
    """
    s = as_complex(s)
    kappa, stated = s - 2, s + 2
    return TorusCorrespondence(kappa, stated, abs(kappa - stated) < 1e-12)


def torus_oracle_trace(s, seed=0, tol=DEFAULT_TOL):
    """Commutator trace of an explicit rep at a point of V(0,0,0,s), after the sign flip.

    Independent of ``torus_correspondence``: samples (x, y), solves for z on
    V(0,0,0,s), negates, builds the pair and takes tr[A, B].  When the whole
    surface is reducible (s = 4) the identity pair at (2, 2, 2) is used.
    """
    s = as_complex(s)
    if abs(s - 4) <= tol.eps_equal:
        # (-2,-2,-2) lies on V(0,0,0,4); its flip is the identity character
        pt = CharacterPoint(2 + 0j, 2 + 0j, 2 + 0j)
    else:
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=2) + 1j * rng.normal(size=2)
        z = solve_for_z((0, 0, 0, s), x, y, tol)[0]
        pt = CharacterPoint(-x, -y, -z)
    rep = build_rep_torus(pt, tol)
    return commutator_trace(rep), pt
