"""Randomized identity suites run by ``tritangent-cv selftest``."""

import time

import numpy as np

from . import trace_map
from .characters import commutator_trace, random_four_holed_rep, random_unimodular, torus_char, tr

LEVELS = {"quick": 100, "full": 100_000}


def _eq2_suite(rng, n):
    A, B, C, D = random_four_holed_rep(rng, n)
    t = (tr(A), tr(B), tr(C), tr(D))
    x, y, z = tr(A @ B), tr(B @ C), tr(C @ A)
    p, q, r, s = trace_map.phi(t)
    terms = [x * x, y * y, z * z, x * y * z, -p * x, -q * y, -r * z, -s]
    res = np.abs(sum(terms)) / (1 + sum(np.abs(v) for v in terms))
    return int(np.sum(res < 1e-9))


def _factor_suite(rng, n):
    t = rng.normal(size=(4, n)) + 1j * rng.normal(size=(4, n))
    bound = 1e-12 * (1 + np.sum(np.abs(t) ** 2, axis=0))
    res = np.stack(trace_map.factor_residuals(tuple(t)))
    return int(np.sum(np.all(res < bound, axis=0)))


def _torus_suite(rng, n):
    A, B = random_unimodular(rng, n), random_unimodular(rng, n)
    kappa = torus_char((tr(A), tr(B), tr(A @ B)))
    return int(np.sum(np.abs(commutator_trace((A, B)) - kappa) < 1e-9))


SUITES = (
    ("four_holed_sphere_identity", _eq2_suite),
    ("pqr_factorizations", _factor_suite),
    ("torus_commutator_identity", _torus_suite),
)


def selftest(level="quick", seed=0):
    """Run every identity suite; returns a report dict with ``ok`` set iff nothing failed."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}")
    n = LEVELS[level]
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    suites = []
    for name, fn in SUITES:
        passed = fn(rng, n)
        suites.append({"name": name, "passed": passed, "failed": n - passed})
    return {
        "level": level,
        "samples": n,
        "suites": suites,
        "ok": all(s["failed"] == 0 for s in suites),
        "runtime_s": round(time.perf_counter() - start, 3),
    }
