"""Finite fields F_{p^(f*m)} arranged in norm-compatible towers.

Elements are tuples of coefficients over F_p (lowest degree first) modulo the
context's modulus.  Each tower is built from its top level down: the top field
uses the smallest irreducible modulus and the smallest primitive element, and
every lower level takes as generator the norm of the top generator, with that
norm's minimal polynomial as modulus (so the lower generator is just ``x``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from sympy import factorint, isprime

DEFAULT_TABLE_BUDGET = 2**22

FieldElement = tuple  # coefficient vector over F_p, length f*m


class FieldConfigError(ValueError):
    """Raised for invalid field parameters or an exhausted search budget."""


# -- polynomial arithmetic over F_p (lists, lowest degree first) -------------


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, mod, p):
    a = [c % p for c in a]
    dm = len(mod) - 1
    inv_lead = pow(mod[-1], -1, p)
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] * inv_lead % p
        if c:
            shift = i - dm
            for j, mc in enumerate(mod):
                a[shift + j] = (a[shift + j] - c * mc) % p
    return _trim(a[:dm]) if len(a) >= dm else _trim(a)


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _poly_mulmod(a, b, mod, p):
    return _poly_mod(_poly_mul(a, b, p), mod, p)


def _poly_powmod(a, e, mod, p):
    result = [1]
    base = _poly_mod(a, mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _poly_gcd(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _poly_mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def is_irreducible(poly, p: int) -> bool:
    """Rabin's test: x^(p^D) = x mod poly and gcd(x^(p^(D/l)) - x, poly) = 1."""
    poly = _trim(poly)
    deg = len(poly) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    x = [0, 1]
    if _poly_sub(_poly_powmod(x, p**deg, poly, p), x, p):
        return False
    for ell in factorint(deg):
        h = _poly_sub(_poly_powmod(x, p ** (deg // ell), poly, p), x, p)
        if len(_poly_gcd(poly, h, p)) != 1:
            return False
    return True


def smallest_irreducible(p: int, degree: int, budget: int | None = None):
    """Monic irreducible polynomial of the given degree with the smallest
    lower-coefficient code sum(c_j p^j)."""
    limit = p**degree if budget is None else min(budget, p**degree)
    for code in range(limit):
        coeffs = [(code // p**j) % p for j in range(degree)]
        if degree > 1 and coeffs[0] == 0:
            continue
        poly = coeffs + [1]
        if is_irreducible(poly, p):
            return tuple(poly)
    raise FieldConfigError(
        f"no irreducible polynomial of degree {degree} over F_{p} within budget {limit}"
    )


# -- field parameters and contexts -------------------------------------------


@dataclass(frozen=True)
class FieldParams:
    p: int
    f: int
    m: int

    def __post_init__(self):
        if not isprime(self.p):
            raise FieldConfigError(f"p={self.p} is not prime")
        if self.f < 1 or self.m < 1:
            raise FieldConfigError("f and m must be positive")

    @property
    def q(self) -> int:
        return self.p**self.f

    @property
    def order(self) -> int:
        return self.q**self.m

    @property
    def degree(self) -> int:
        return self.f * self.m


class FieldCtx:
    """A concrete realization of k_m = F_{q^m}.

    Immutable after construction; the lazily built tables are deterministic
    and safe to share read-only.
    """

    def __init__(self, params: FieldParams, modulus, generator, table_budget=DEFAULT_TABLE_BUDGET):
        self.params = params
        self.p = params.p
        self.q = params.q
        self.m = params.m
        self.degree = params.degree
        self.order = params.order
        self.n_units = self.order - 1
        self.modulus = tuple(modulus)
        if len(self.modulus) != self.degree + 1 or self.modulus[-1] != 1:
            raise FieldConfigError("modulus must be monic of degree f*m")
        self.generator = self.element(generator)
        self.table_budget = table_budget
        self.exp_table = None
        self.log_table = None
        if self.order <= table_budget:
            self._build_tables()

    def __repr__(self):
        return f"FieldCtx(p={self.p}, f={self.params.f}, m={self.m})"

    # representation helpers
    def element(self, coeffs) -> FieldElement:
        coeffs = [int(c) % self.p for c in coeffs]
        if len(coeffs) > self.degree:
            coeffs = _poly_mod(coeffs, self.modulus, self.p)
        return tuple(coeffs) + (0,) * (self.degree - len(coeffs))

    def from_int(self, n: int) -> FieldElement:
        """The image of the integer n under Z -> F_p -> this field."""
        return self.element([n % self.p])

    def code(self, x: FieldElement) -> int:
        return sum(c * self.p**j for j, c in enumerate(x))

    def from_code(self, code: int) -> FieldElement:
        return tuple((code // self.p**j) % self.p for j in range(self.degree))

    @property
    def zero(self) -> FieldElement:
        return (0,) * self.degree

    @property
    def one(self) -> FieldElement:
        return self.from_int(1)

    def elements(self):
        return [self.from_code(c) for c in range(self.order)]

    # arithmetic
    def add(self, x, y):
        return tuple((a + b) % self.p for a, b in zip(x, y))

    def sub(self, x, y):
        return tuple((a - b) % self.p for a, b in zip(x, y))

    def neg(self, x):
        return tuple(-a % self.p for a in x)

    def mul(self, x, y):
        if self.log_table is not None:
            lx = self.log_table[self.code(x)]
            ly = self.log_table[self.code(y)]
            if lx < 0 or ly < 0:
                return self.zero
            return self.from_code(int(self.exp_table[(lx + ly) % self.n_units]))
        return self.element(_poly_mulmod(list(x), list(y), self.modulus, self.p))

    def pow(self, x, e: int):
        if not any(x):
            if e == 0:
                return self.one
            if e < 0:
                raise ZeroDivisionError("zero has no inverse")
            return self.zero
        if self.log_table is not None:
            lx = int(self.log_table[self.code(x)])
            return self.exp(lx * e)
        if e < 0:
            x = self.inv(x)
            e = -e
        return self.element(_poly_powmod(list(x), e, self.modulus, self.p))

    def inv(self, x):
        if not any(x):
            raise ZeroDivisionError("zero has no inverse")
        return self.pow(x, self.n_units - 1)

    def exp(self, k: int) -> FieldElement:
        """generator**k."""
        k %= self.n_units
        if self.exp_table is not None:
            return self.from_code(int(self.exp_table[k]))
        return self.element(_poly_powmod(list(self.generator), k, self.modulus, self.p))

    # tables
    def _build_tables(self):
        codes = self._power_codes_blocked()
        log_table = np.full(self.order, -1, dtype=np.int64)
        log_table[codes] = np.arange(self.n_units, dtype=np.int64)
        if np.count_nonzero(log_table >= 0) != self.n_units:
            raise FieldConfigError("generator is not primitive")
        self.exp_table = codes
        self.log_table = log_table

    def _power_codes_blocked(self) -> np.ndarray:
        """Codes of g^k, k < q^m - 1: a block of sqrt(N) consecutive powers
        is translated by successive multiplications by g^block."""
        n, p, deg = self.n_units, self.p, self.degree
        step = max(1, math.isqrt(n))
        mat = self._poly_mul_matrix(self.generator)
        block = np.zeros((step, deg), dtype=np.int64)
        v = np.zeros(deg, dtype=np.int64)
        v[0] = 1
        for j in range(step):
            block[j] = v
            v = (mat @ v) % p
        jump = _matpow_mod(mat, step, p)
        weights = p ** np.arange(deg, dtype=np.int64)
        out = np.empty(n, dtype=np.int64)
        shift = np.eye(deg, dtype=np.int64)
        for start in range(0, n, step):
            rows = (block @ shift.T) % p
            stop = min(n, start + step)
            out[start:stop] = rows[: stop - start] @ weights
            shift = (jump @ shift) % p
        return out

    def _poly_mul_matrix(self, alpha) -> np.ndarray:
        cols = [self.element(_poly_mulmod(list(alpha), [0] * j + [1], self.modulus, self.p))
                for j in range(self.degree)]
        return np.array(cols, dtype=np.int64).T

    # maps
    @cached_property
    def trace_vector(self) -> np.ndarray:
        """Tr(x^j) for the power basis, j < degree."""
        out = []
        for j in range(self.degree):
            xj = self.element([0] * j + [1])
            out.append(self._trace_frobenius(xj))
        return np.array(out, dtype=np.int64)

    def _trace_frobenius(self, x) -> int:
        acc = self.zero
        y = x
        for _ in range(self.degree):
            acc = self.add(acc, y)
            y = self.pow(y, self.p)
        if any(acc[1:]):
            raise ArithmeticError("trace left F_p")
        return acc[0]

    def trace_to_prime(self, x: FieldElement) -> int:
        return int(np.dot(np.asarray(x, dtype=np.int64), self.trace_vector) % self.p)

    def norm_to_level(self, x: FieldElement, target_m: int) -> FieldElement:
        if target_m < 1 or self.m % target_m:
            raise FieldConfigError(f"level {target_m} does not divide {self.m}")
        if not any(x):
            return self.zero
        return self.pow(x, self.n_units // (self.q**target_m - 1))

    def dlog(self, x: FieldElement) -> int:
        if not any(x):
            raise ValueError("zero has no discrete logarithm")
        if self.log_table is not None:
            return int(self.log_table[self.code(x)])
        return self._bsgs(x)

    def _bsgs(self, x) -> int:
        n = self.n_units
        step = math.isqrt(n - 1) + 1
        baby = {}
        y = self.one
        for j in range(step):
            baby.setdefault(y, j)
            y = self.mul(y, self.generator)
        giant = self.pow(self.generator, -step)
        y = tuple(x)
        for i in range(step + 1):
            j = baby.get(y)
            if j is not None:
                return (i * step + j) % n
            y = self.mul(y, giant)
        raise ArithmeticError("discrete log not found; generator not primitive?")

    # vectorized views over the cyclic group
    @cached_property
    def power_codes(self) -> np.ndarray:
        if self.exp_table is not None:
            return self.exp_table
        return self._power_codes_blocked()

    @cached_property
    def power_coeffs(self) -> np.ndarray:
        """Coefficient rows of generator**k, shape (q^m - 1, degree)."""
        codes = self.power_codes
        return np.stack([(codes // self.p**j) % self.p for j in range(self.degree)], axis=1)

    @cached_property
    def trace_sequence(self) -> np.ndarray:
        """Tr(generator**k) for k = 0 .. q^m - 2."""
        return (self.power_coeffs @ self.trace_vector) % self.p

    def mul_matrix(self, alpha: FieldElement) -> np.ndarray:
        """Matrix M over F_p with coeffs(alpha*y) = M @ coeffs(y)."""
        cols = [self.mul(alpha, self.element([0] * j + [1])) for j in range(self.degree)]
        return np.array(cols, dtype=np.int64).T

    @cached_property
    def log_minus_one(self) -> int:
        return 0 if self.p == 2 else self.n_units // 2


def _matpow_mod(mat, e, p):
    out = np.eye(mat.shape[0], dtype=np.int64)
    base = mat % p
    while e:
        if e & 1:
            out = (out @ base) % p
        base = (base @ base) % p
        e >>= 1
    return out


def _is_primitive(ctx: FieldCtx, g, prime_factors) -> bool:
    if not any(g):
        return False
    n = ctx.n_units
    return all(ctx.pow(g, n // ell) != ctx.one for ell in prime_factors)


class Tower:
    """Norm-compatible fields k_m for m dividing ``top``."""

    def __init__(self, p: int, f: int, top: int, table_budget: int = DEFAULT_TABLE_BUDGET,
                 search_budget: int | None = None):
        params = FieldParams(p, f, top)
        self.p, self.f, self.top = p, f, top
        self.q = params.q
        self.table_budget = table_budget
        modulus = smallest_irreducible(p, params.degree, search_budget)
        probe = FieldCtx(params, modulus, [0, 1] if params.degree > 1 else [1], table_budget=0)
        factors = list(factorint(probe.n_units))
        generator = None
        for code in range(1, probe.order):
            g = probe.from_code(code)
            if _is_primitive(probe, g, factors):
                generator = g
                break
        if generator is None:
            raise FieldConfigError("no primitive element found")
        self._levels = {top: FieldCtx(params, modulus, generator, table_budget)}

    def __repr__(self):
        return f"Tower(p={self.p}, f={self.f}, top={self.top})"

    @property
    def top_ctx(self) -> FieldCtx:
        return self._levels[self.top]

    def level(self, m: int) -> FieldCtx:
        if m < 1 or self.top % m:
            raise FieldConfigError(f"level {m} does not divide top level {self.top}")
        if m not in self._levels:
            top = self.top_ctx
            g = top.pow(top.generator, top.n_units // (self.q**m - 1))
            modulus = _minimal_polynomial(top, g, self.f * m)
            params = FieldParams(self.p, self.f, m)
            gen = [0, 1] if self.f * m > 1 else [(-modulus[0]) % self.p]
            self._levels[m] = FieldCtx(params, modulus, gen, self.table_budget)
        return self._levels[m]

    def embed(self, x: FieldElement, from_m: int, to_m: int) -> FieldElement:
        """Field embedding k_from -> k_to with g_from -> Norm(g_to)."""
        if to_m % from_m:
            raise FieldConfigError(f"{from_m} does not divide {to_m}")
        src, dst = self.level(from_m), self.level(to_m)
        if not any(x):
            return dst.zero
        scale = dst.n_units // src.n_units
        return dst.exp(src.dlog(x) * scale)

    def restrict(self, y: FieldElement, from_m: int, to_m: int) -> FieldElement:
        """Inverse of ``embed`` on the image of k_to inside k_from."""
        src, dst = self.level(from_m), self.level(to_m)
        if not any(y):
            return dst.zero
        scale = src.n_units // dst.n_units
        k = src.dlog(y)
        if k % scale:
            raise ValueError("element does not lie in the requested subfield")
        return dst.exp(k // scale)

    # identification of level 1 with the canonical base field
    @cached_property
    def base_ctx(self) -> FieldCtx:
        return self.level(1) if self.top == 1 else get_tower(self.p, self.f, 1, self.table_budget).level(1)

    @cached_property
    def _base_root(self) -> FieldElement:
        """Smallest root, in this tower's k, of the canonical base modulus."""
        k = self.level(1)
        mod = self.base_ctx.modulus
        for code in range(k.order):
            x = k.from_code(code)
            acc = k.zero
            for c in reversed(mod):
                acc = k.add(k.mul(acc, x), k.from_int(c))
            if not any(acc):
                return x
        raise ArithmeticError("canonical modulus has no root in level 1")

    def from_base(self, x: FieldElement) -> FieldElement:
        """Image of a canonical base-field element in this tower's level 1."""
        k = self.level(1)
        rho = self._base_root
        acc = k.zero
        for c in reversed(x):
            acc = k.add(k.mul(acc, rho), k.from_int(c))
        return acc

    @cached_property
    def base_log_scale(self) -> int:
        """L with from_base(canonical generator) = g_1**L."""
        return self.level(1).dlog(self.from_base(self.base_ctx.generator))

    def base_log(self, x: FieldElement, m: int = 1) -> int:
        """Discrete log at level m of a canonical base-field element."""
        ctx = self.level(m)
        k = self.level(1).dlog(self.from_base(x))
        return k * (ctx.n_units // (self.q - 1)) % ctx.n_units


def _minimal_polynomial(ctx: FieldCtx, g, degree: int):
    conj = [g]
    for _ in range(degree - 1):
        conj.append(ctx.pow(conj[-1], ctx.p))
    poly = [ctx.one]
    for c in conj:
        # poly * (X - c)
        shifted = [ctx.zero] + poly
        scaled = [ctx.neg(ctx.mul(c, a)) for a in poly] + [ctx.zero]
        poly = [ctx.add(a, b) for a, b in zip(shifted, scaled)]
    out = []
    for a in poly:
        if any(a[1:]):
            raise ArithmeticError("minimal polynomial not defined over F_p")
        out.append(a[0])
    return tuple(out)


@lru_cache(maxsize=64)
def get_tower(p: int, f: int, top: int, table_budget: int = DEFAULT_TABLE_BUDGET) -> Tower:
    return Tower(p, f, top, table_budget)


def make_field(p: int, f: int, m: int, top_level: int | None = None,
               table_budget: int = DEFAULT_TABLE_BUDGET) -> FieldCtx:
    """Level-m field of the tower (p, f, top_level)."""
    top_level = m if top_level is None else top_level
    if min(f, m, top_level) < 1:
        raise FieldConfigError("f, m and top_level must be positive")
    if top_level % m:
        raise FieldConfigError(f"m={m} does not divide top_level={top_level}")
    if not isprime(p):
        raise FieldConfigError(f"p={p} is not prime")
    return get_tower(p, f, top_level, table_budget).level(m)


def split_prime_power(q: int) -> tuple[int, int]:
    """(p, f) with q = p**f."""
    fac = factorint(q)
    if len(fac) != 1:
        raise FieldConfigError(f"{q} is not a prime power")
    (p, f), = fac.items()
    return int(p), int(f)
