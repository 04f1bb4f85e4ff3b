"""Numeric substrate: complex polynomial roots, small linear solves, and
sparse multivariate polynomials with affine substitution.

Everything here is a pure function of its inputs.  Randomized steps (root
finder start points) take an explicit ``seed``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import DomainError

_MACH_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    """Residual and equality thresholds used throughout the package."""

    eps_residual: float = 1e-9
    eps_equal: float = 1e-7

    def __post_init__(self):
        for name in ("eps_residual", "eps_equal"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")


DEFAULT_TOL = Tolerance()


def as_complex(value) -> complex:
    """Coerce to a finite Python complex; NaN and infinities are rejected."""
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite scalar {value!r}")
    return z


# ---------------------------------------------------------------------------
# univariate polynomials (coefficient lists, lowest degree first)
# ---------------------------------------------------------------------------

def trim(coeffs):
    """Drop negligible leading (highest-degree) coefficients."""
    c = [as_complex(x) for x in coeffs]
    big = max((abs(x) for x in c), default=0.0)
    while c and abs(c[-1]) <= 1e-14 * big:
        c.pop()
    return c


def polyval(coeffs, z):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _backward_error(coeffs, z):
    """|p(z)| divided by the magnitude of the terms that were summed."""
    r = abs(z)
    bound = 0.0
    for c in reversed(coeffs):
        bound = bound * r + abs(c)
    return abs(polyval(coeffs, z)) / bound if bound else 0.0


def _derivative(coeffs):
    return [k * coeffs[k] for k in range(1, len(coeffs))]


def _quadratic_roots(c0, c1, c2):
    disc = cmath.sqrt(c1 * c1 - 4 * c2 * c0)
    # pick the sign that avoids cancellation
    if (c1.conjugate() * disc).real < 0:
        disc = -disc
    denom = -(c1 + disc) / 2
    if denom == 0:
        return [0j, 0j]
    return [denom / c2, c0 / denom]


def _aberth(a, rng, maxiter=500):
    """Aberth-Ehrlich simultaneous iteration on the monic polynomial ``a``."""
    n = len(a) - 1
    # Fujiwara bound on root moduli
    radius = 2 * max(abs(a[n - k]) ** (1.0 / k) for k in range(1, n + 1))
    radius = radius if radius > 0 else 1.0
    phase = rng.uniform(0, 2 * math.pi)
    z = [0.5 * radius * cmath.exp(1j * (2 * math.pi * k / n + phase)) for k in range(n)]
    absa = [abs(x) for x in a]
    for _ in range(maxiter):
        moving = False
        for i in range(n):
            zi = z[i]
            p, dp = 1 + 0j, 0j
            for k in range(n - 1, -1, -1):
                dp = dp * zi + p
                p = p * zi + a[k]
            r = abs(zi)
            bound = 1.0
            for k in range(n - 1, -1, -1):
                bound = bound * r + absa[k]
            if abs(p) <= 8 * n * _MACH_EPS * bound:
                continue
            if dp == 0:
                z[i] = zi + 1e-8 * (1 + r) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
                moving = True
                continue
            ratio = p / dp
            s = 0j
            for j in range(n):
                if j != i:
                    diff = zi - z[j]
                    if diff != 0:
                        s += 1 / diff
            denom = 1 - ratio * s
            w = ratio / denom if denom != 0 else ratio
            z[i] = zi - w
            if abs(w) > 4 * _MACH_EPS * (1 + r):
                moving = True
        if not moving:
            return z, True
    return z, False


def _merge_clusters(coeffs, roots, tol):
    """Collapse numerically split multiple roots into exact repeats.

    A multiple root of multiplicity m comes back from simultaneous iteration
    as m points spread by roughly eps**(1/m).  Groups whose centroid is itself
    a root to within ``eps_residual`` are replaced by the centroid, refined by
    Newton on the (m-1)-th derivative where that root is simple.
    """
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= 1e-3 * (1 + max(abs(roots[i]), abs(roots[j]))):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    out = []
    for idx in groups.values():
        pts = [roots[i] for i in idx]
        m = len(pts)
        if m == 1:
            out.append(pts[0])
            continue
        centre = sum(pts) / m
        tight = all(abs(z - centre) <= tol.eps_equal * (1 + abs(centre)) for z in pts)
        if not tight and _backward_error(coeffs, centre) > tol.eps_residual:
            out.extend(pts)
            continue
        d = coeffs
        for _ in range(m - 1):
            d = _derivative(d)
        best, best_err = centre, _backward_error(coeffs, centre)
        z = centre
        dd = _derivative(d)
        for _ in range(8):
            den = polyval(dd, z)
            if den == 0:
                break
            z = z - polyval(d, z) / den
            err = _backward_error(coeffs, z)
            if err < best_err:
                best, best_err = z, err
        out.extend([best] * m)
    return out


def root_key(z):
    return (z.real, z.imag)


def poly_roots(coeffs, tol=DEFAULT_TOL, seed=0, max_restarts=4):
    """All roots, with multiplicity, of a univariate complex polynomial.

    Parameters
    ----------
    coeffs : sequence of complex
        Coefficients, lowest degree first.
    tol : Tolerance
    seed : int
        Seeds the start configuration and any restarts.

    Returns
    -------
    list of complex
        Exactly ``degree`` roots sorted by (real, imag).  Repeated roots are
        reported as exact repeats.

    Raises
    ------
    DomainError
        ``indeterminate`` for the zero polynomial, ``no-convergence`` if the
        iteration stalls on every restart.
    """
    c = trim(coeffs)
    if not c:
        raise DomainError("indeterminate", "zero polynomial has no well-defined roots")
    if len(c) == 1:
        raise ValueError("polynomial of degree 0 has no roots")
    zeros = 0
    while c[0] == 0:
        c.pop(0)
        zeros += 1
    n = len(c) - 1
    roots = [0j] * zeros
    if n == 1:
        roots.append(-c[0] / c[1])
    elif n == 2:
        roots.extend(_quadratic_roots(c[0], c[1], c[2]))
    elif n >= 3:
        a = [x / c[-1] for x in c]
        rng = np.random.default_rng(seed)
        for _ in range(max_restarts):
            z, ok = _aberth(a, rng)
            if ok or all(_backward_error(a, w) < tol.eps_residual for w in z):
                break
        else:
            raise DomainError("no-convergence", f"root iteration did not converge for degree {n}")
        roots.extend(_merge_clusters(a, z, tol))
    return sorted(roots, key=root_key)


def cluster_roots(roots, tol=DEFAULT_TOL):
    """Group a root list into ``(root, multiplicity)`` pairs."""
    out = []
    for z in roots:
        for k, (w, m) in enumerate(out):
            if abs(z - w) <= tol.eps_equal * (1 + abs(w)):
                out[k] = (w, m + 1)
                break
        else:
            out.append((z, 1))
    return out


# ---------------------------------------------------------------------------
# small dense linear systems
# ---------------------------------------------------------------------------

def solve_linear(A, b, tol=DEFAULT_TOL, return_cond=False):
    """Solve ``A x = b`` for n in {2, 3, 4} by partially pivoted elimination.

    Raises ``DomainError('singular-system', rank=...)`` when a pivot vanishes
    relative to the matrix scale or the back-substituted residual is too large.
    With ``return_cond`` the 2-norm condition number is returned as well.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,) or n not in (2, 3, 4):
        raise ValueError(f"expected an n x n system with n in 2..4, got {A.shape} and {b.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in linear system")
    scale = float(np.max(np.abs(A)))
    M = [list(row) + [bi] for row, bi in zip(A.tolist(), b.tolist())]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if abs(M[piv][col]) <= 1e3 * _MACH_EPS * scale or scale == 0:
            rank = int(np.linalg.matrix_rank(A, tol=1e3 * _MACH_EPS * max(scale, 1e-300)))
            raise DomainError("singular-system", "matrix is singular within tolerance", rank=rank)
        M[col], M[piv] = M[piv], M[col]
        pivot_row = M[col]
        inv = 1 / pivot_row[col]
        for r in range(col + 1, n):
            f = M[r][col] * inv
            if f:
                row = M[r]
                for k in range(col, n + 1):
                    row[k] -= f * pivot_row[k]
    x = [0j] * n
    for i in range(n - 1, -1, -1):
        acc = M[i][n]
        for k in range(i + 1, n):
            acc -= M[i][k] * x[k]
        x[i] = acc / M[i][i]
    x = np.array(x)
    resid = float(np.max(np.abs(A @ x - b)))
    bnorm = float(np.max(np.abs(b)))
    if resid >= tol.eps_residual * (1 + bnorm):
        rank = int(np.linalg.matrix_rank(A))
        raise DomainError("singular-system", "solution residual too large", rank=rank)
    if return_cond:
        return x, float(np.linalg.cond(A))
    return x


# ---------------------------------------------------------------------------
# sparse multivariate polynomials
# ---------------------------------------------------------------------------

class Poly:
    """Sparse polynomial in ``nvars`` variables with complex coefficients.

    ``terms`` maps exponent tuples to coefficients; zero coefficients are
    never stored.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, terms=None, nvars=None):
        terms = dict(terms or {})
        if nvars is None:
            if not terms:
                raise ValueError("nvars is required for an empty polynomial")
            nvars = len(next(iter(terms)))
        clean = {}
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps} for {nvars} variables")
            c = as_complex(c)
            if c != 0:
                clean[exps] = clean.get(exps, 0j) + c
        self.nvars = nvars
        self.terms = {e: c for e, c in clean.items() if c != 0}

    @classmethod
    def constant(cls, c, nvars):
        return Poly({(0,) * nvars: c}, nvars)

    @classmethod
    def linear_form(cls, coeffs, const=0):
        n = len(coeffs)
        terms = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = c
        return Poly(terms, n)

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def coeff(self, *exps):
        return self.terms.get(tuple(exps), 0j)

    def homogeneous_part(self, d):
        return Poly({e: c for e, c in self.terms.items() if sum(e) == d}, self.nvars)

    def max_abs(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def _lift(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0j) + c
        return Poly(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Poly({e: -c for e, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = as_complex(other)
            return Poly({e: c * v for e, v in self.terms.items()}, self.nvars)
        other = self._lift(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0j) + c1 * c2
        return Poly(out, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1 / as_complex(scalar))

    def __pow__(self, k):
        out = Poly.constant(1, self.nvars)
        for _ in range(int(k)):
            out = out * self
        return out

    def __call__(self, *x):
        if len(x) != self.nvars:
            raise ValueError(f"expected {self.nvars} arguments")
        total = 0j
        for e, c in self.terms.items():
            term = c
            for xi, k in zip(x, e):
                if k:
                    term *= xi ** k
            total += term
        return total

    def diff(self, i):
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return Poly(out, self.nvars)

    def compose_linear(self, M, v=None):
        """Return the polynomial ``y -> self(M @ y + v)``.

        ``M`` has shape (self.nvars, m); the result lives in m variables.
        """
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != self.nvars:
            raise ValueError(f"substitution matrix must have {self.nvars} rows")
        m = M.shape[1]
        v = np.zeros(self.nvars, dtype=complex) if v is None else np.asarray(v, dtype=complex)
        deg = max(self.degree(), 0)
        forms = [Poly.linear_form(M[i].tolist(), v[i]) for i in range(self.nvars)]
        powers = []
        for form in forms:
            row = [Poly.constant(1, m)]
            for _ in range(deg):
                row.append(row[-1] * form)
            powers.append(row)
        out = Poly({}, m)
        for e, c in self.terms.items():
            term = Poly.constant(c, m)
            for i, k in enumerate(e):
                if k:
                    term = term * powers[i][k]
            out = out + term
        return out

    def distance(self, other):
        """Max-modulus coefficient difference."""
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.coeff(*k) - other.coeff(*k)) for k in keys), default=0.0)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{e}" for e, c in self.sorted_terms()) or "0"
        return f"{type(self).__name__}({body})"


class AffineCubicPoly(Poly):
    """Polynomial of degree exactly 3 in the affine coordinates (x, y, z)."""

    def __init__(self, terms=None, nvars=3):
        super().__init__(terms, 3 if nvars is None else nvars)
        if self.nvars != 3:
            raise ValueError("affine cubics live in three variables")
        if self.degree() != 3:
            raise ValueError(f"not a cubic: degree {self.degree()}")

    @classmethod
    def normal_form(cls, params):
        """x^2 + y^2 + z^2 + xyz - p x - q y - r z - s."""
        p, q, r, s = (as_complex(v) for v in params)
        return cls({
            (2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1, (1, 1, 1): 1,
            (1, 0, 0): -p, (0, 1, 0): -q, (0, 0, 1): -r, (0, 0, 0): -s,
        })

    def cubic_part(self):
        return self.homogeneous_part(3)


class ProjectiveCubic(Poly):
    """Cubic form in homogeneous coordinates (X, Y, Z, W)."""

    def __init__(self, terms=None, nvars=4):
        super().__init__(terms, 4 if nvars is None else nvars)
        if self.nvars != 4:
            raise ValueError("projective cubics live in four homogeneous variables")
        if not self.terms:
            raise ValueError("zero cubic form")
        if any(sum(e) != 3 for e in self.terms):
            raise ValueError("cubic form must be homogeneous of degree 3")

    @classmethod
    def from_affine(cls, f):
        """Projective closure with W as the homogenizing coordinate."""
        return cls({e + (3 - sum(e),): c for e, c in f.terms.items()})


@dataclass(frozen=True, eq=False)
class AffineChange:
    """The substitution f(x) -> f(L x + v) / divisor."""

    L: np.ndarray = field(default_factory=lambda: np.eye(3, dtype=complex))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))
    divisor: complex = 1 + 0j

    def __post_init__(self):
        L = np.array(self.L, dtype=complex)
        v = np.array(self.v, dtype=complex)
        if L.shape != (3, 3) or v.shape != (3,):
            raise ValueError("AffineChange needs a 3x3 matrix and a 3-vector")
        if not (np.all(np.isfinite(L)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite affine change")
        divisor = as_complex(self.divisor)
        if divisor == 0:
            raise DomainError("singular-change", "divisor must be nonzero")
        scale = float(np.max(np.abs(L)))
        if scale == 0 or abs(np.linalg.det(L)) <= 1e-12 * scale ** 3:
            raise DomainError("singular-change", "linear part is not invertible")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "divisor", divisor)

    @classmethod
    def identity(cls):
        return cls()

    def then(self, other):
        """The change equivalent to applying ``self`` and afterwards ``other``."""
        return AffineChange(self.L @ other.L, self.L @ other.v + self.v,
                            self.divisor * other.divisor)


def substitute(f, change):
    """Coefficients of ``f(L x + v) / divisor`` as an AffineCubicPoly."""
    g = f.compose_linear(change.L, change.v) / change.divisor
    return AffineCubicPoly(g.terms)


def monomials(nvars, degree):
    """Exponent tuples of total degree exactly ``degree``."""
    return [e for e in product(range(degree + 1), repeat=nvars) if sum(e) == degree]
