"""Brute-force oracles shared by the unit and acceptance tests.

Everything here is deliberately written without touching the library's
vectorized code paths, so agreement is evidence rather than tautology.
"""

import math

from smia import EmbeddingGeometry, KernelSpec

FAMILIES = [
    KernelSpec("rbf", sigma=0.9),
    KernelSpec("laplacian", sigma=1.3),
    KernelSpec("polynomial", c=0.5, p=3),
    KernelSpec("rational_quadratic", sigma=1.1, alpha_rq=0.7),
]


def kernel_scalar(spec, x, y):
    """Scalar kernel oracle."""
    if spec.family == "rbf":
        return math.exp(-sum((a - b) ** 2 for a, b in zip(x, y)) / (2 * spec.sigma**2))
    if spec.family == "laplacian":
        return math.exp(-sum(abs(a - b) for a, b in zip(x, y)) / spec.sigma)
    if spec.family == "polynomial":
        return (sum(a * b for a, b in zip(x, y)) + spec.c) ** spec.p
    sq = sum((a - b) ** 2 for a, b in zip(x, y))
    return (1 + sq / (2 * spec.alpha_rq * spec.sigma**2)) ** (-spec.alpha_rq)


def mmd2_triple_loop(x, y, spec, biased):
    """Triple-loop MMD^2 oracle (biased or unbiased)."""
    n, m = len(x), len(y)
    xx = sum(
        kernel_scalar(spec, x[i], x[j])
        for i in range(n)
        for j in range(n)
        if biased or i != j
    )
    yy = sum(
        kernel_scalar(spec, y[i], y[j])
        for i in range(m)
        for j in range(m)
        if biased or i != j
    )
    xy = sum(kernel_scalar(spec, x[i], y[j]) for i in range(n) for j in range(m))
    if biased:
        return xx / n**2 + yy / m**2 - 2 * xy / (n * m)
    return xx / (n * (n - 1)) + yy / (m * (m - 1)) - 2 * xy / (n * m)


def random_geometry(rng, dim=6):
    """Inner products of three random vectors: always a valid geometry."""
    t, v, f = rng.standard_normal((3, dim))
    return EmbeddingGeometry(
        tt=float(t @ t),
        vv=float(v @ v),
        ff=float(f @ f),
        tv=float(t @ v),
        tf=float(t @ f),
        vf=float(v @ f),
    )


def quadratic_objective(geom, alphas):
    """``||mu_f - a mu_v - (1-a) mu_t||^2`` expanded through the Gram blocks."""
    a = alphas
    return (
        geom.ff
        + a**2 * geom.vv
        + (1 - a) ** 2 * geom.tt
        - 2 * a * geom.vf
        - 2 * (1 - a) * geom.tf
        + 2 * a * (1 - a) * geom.tv
    )
