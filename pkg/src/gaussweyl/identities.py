"""Sweeps checking the classical Gauss-sum identities over a whole field.

Every checker returns the maximal relative residual over its sweep.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .characters import roots_of_unity
from .charsums import gauss_all, jacobi_all, jacobi_sum, jacobi_via_gauss
from .field_tower import FieldCtx, get_tower

JACOBI_DIRECT_LIMIT = 2**21


def _max(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(values.max()) if values.size else 0.0


def check_conjugation(ctx: FieldCtx) -> float:
    """G(chi) G(conj chi) = chi(-1) q over nontrivial chi."""
    n = ctx.n_units
    g = gauss_all(ctx)
    e = np.arange(1, n)
    sign = roots_of_unity(n)[(e * ctx.log_minus_one) % n]
    return _max(np.abs(g[e] * g[(-e) % n] - sign * ctx.order) / ctx.order)


def check_frobenius(ctx: FieldCtx) -> float:
    """G(chi^p) = G(chi) over all chi."""
    n = ctx.n_units
    g = gauss_all(ctx)
    e = np.arange(n)
    return _max(np.abs(g[(e * ctx.p) % n] - g) / math.sqrt(ctx.order))


def check_hd_product(ctx: FieldCtx, d: int) -> float:
    """G(chi^d) = chi(d^d) prod_i G(chi eps^i) / G(eps^i), eps of order d."""
    n = ctx.n_units
    if d < 1 or n % d:
        raise ValueError(f"d={d} does not divide {n}")
    g = gauss_all(ctx)
    w = roots_of_unity(n)
    eps = n // d
    e = np.arange(n)
    rhs = np.ones(n, dtype=complex)
    for i in range(d):
        rhs *= g[(e + i * eps) % n] / g[(i * eps) % n]
    log_dd = d * ctx.dlog(ctx.from_int(d))
    rhs *= w[(e * log_dd) % n]
    return _max(np.abs(g[(e * d) % n] - rhs) / math.sqrt(ctx.order))


def check_hd_lifting(ctx_1: FieldCtx, ctx_m: FieldCtx) -> float:
    """G_m(chi o Norm) = G(chi)^m for every chi of the base level.

    Both contexts must come from one tower, so that the base generator is the
    norm of the level-m generator.
    """
    if ctx_1.p != ctx_m.p or ctx_1.q != ctx_m.q or ctx_m.m % ctx_1.m:
        raise ValueError("contexts are not levels of one tower")
    if not norm_compatible(ctx_1, ctx_m):
        raise ValueError("contexts are not norm-compatible")
    rel = ctx_m.m // ctx_1.m
    g1 = gauss_all(ctx_1)
    gm = gauss_all(ctx_m)
    e = np.arange(ctx_1.n_units)
    lifted = gm[(e * (ctx_m.n_units // ctx_1.n_units)) % ctx_m.n_units]
    return _max(np.abs(lifted - g1**rel) / math.sqrt(ctx_m.order))


def _horner(ctx, coeffs, x):
    acc = ctx.zero
    for c in reversed(coeffs):
        acc = ctx.add(ctx.mul(acc, x), ctx.from_int(c))
    return acc


def norm_compatible(ctx_1: FieldCtx, ctx_m: FieldCtx) -> bool:
    """True when some embedding of ctx_1 into ctx_m sends the base generator
    to Norm(g_m)."""
    norm = ctx_m.pow(ctx_m.generator, ctx_m.n_units // ctx_1.n_units)
    scale = ctx_m.n_units // ctx_1.n_units
    candidates = [ctx_m.zero] + [ctx_m.exp(j * scale) for j in range(ctx_1.n_units)]
    for rho in candidates:
        if not any(_horner(ctx_m, ctx_1.modulus, rho)) and _horner(ctx_m, ctx_1.generator, rho) == norm:
            return True
    return False


def check_scaled(ctx: FieldCtx, alphas=None) -> float:
    """G(alpha, chi) = conj(chi)(alpha) G(chi) over alpha != 0 and all chi."""
    n = ctx.n_units
    g = gauss_all(ctx)
    w = roots_of_unity(n)
    e = np.arange(n)
    if alphas is None:
        alphas = [ctx.exp(k) for k in range(n)]
    worst = 0.0
    for alpha in alphas:
        ga = gauss_all(ctx, alpha)
        rhs = w[(-e * ctx.dlog(alpha)) % n] * g
        worst = max(worst, _max(np.abs(ga - rhs) / math.sqrt(ctx.order)))
    return worst


def check_jacobi(ctx: FieldCtx, n_chars: int) -> float:
    """Direct Jacobi sums against the Gauss quotient, over every tuple of
    nontrivial characters with nontrivial product."""
    if n_chars not in (2, 3):
        raise ValueError("n must be 2 or 3")
    n = ctx.n_units
    g = gauss_all(ctx)
    scale = math.sqrt(ctx.order) ** (n_chars - 1)
    if n**n_chars <= JACOBI_DIRECT_LIMIT:
        direct = jacobi_all(ctx, n_chars)
        idx = np.indices((n,) * n_chars).reshape(n_chars, -1)
        valid = np.all(idx != 0, axis=0) & (idx.sum(axis=0) % n != 0)
        idx = idx[:, valid]
        quotient = np.prod(g[idx], axis=0) / g[idx.sum(axis=0) % n]
        return _max(np.abs(direct[tuple(idx)] - quotient) / scale)
    worst = 0.0
    for tup in np.ndindex(*(n,) * n_chars):
        if 0 in tup or sum(tup) % n == 0:
            continue
        res = abs(jacobi_sum(ctx, *tup) - jacobi_via_gauss(ctx, *tup, gauss=g)) / scale
        worst = max(worst, res)
    return worst


@dataclass
class IdentityResult:
    field: str
    identity: str
    residual: float
    sweep_size: int
    seconds: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.tolerance


def run_suite(p: int, f: int, m: int, tolerance: float = 1e-8, max_lift: int = 3,
              jacobi_max: int = 3) -> list[IdentityResult]:
    """All checks on F_{p^(f m)}; lifting uses every tower top up to max_lift."""
    q_m = p ** (f * m)
    ctx = get_tower(p, f, m).level(m)
    label = f"F_{q_m}"
    n = ctx.n_units
    results = []

    def record(name, fn, size):
        t0 = time.perf_counter()
        res = fn()
        results.append(IdentityResult(label, name, res, size, time.perf_counter() - t0, tolerance))

    record("conjugation", lambda: check_conjugation(ctx), n - 1)
    record("frobenius", lambda: check_frobenius(ctx), n)
    for d in range(1, n + 1):
        if n % d == 0:
            record(f"hd_product[d={d}]", lambda d=d: check_hd_product(ctx, d), n)
    for top in range(1, max_lift + 1):
        tower = get_tower(p, f * m, top)
        record(f"hd_lifting[m={top}]", lambda t=tower, top=top: check_hd_lifting(t.level(1), t.level(top)), n)
    record("scaled", lambda: check_scaled(ctx), n * n)
    for k in range(2, jacobi_max + 1):
        record(f"jacobi[n={k}]", lambda k=k: check_jacobi(ctx, k), n**k)
    return results
