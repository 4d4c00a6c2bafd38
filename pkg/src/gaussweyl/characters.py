"""Additive and multiplicative characters, and finite-order characters of the
injective limit stored as exact fractions u/v mod 1.

Characters are exact integer data; complex numbers only appear when a value
is requested, and then come from a shared table of N-th roots of unity.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .field_tower import FieldCtx, FieldElement


@lru_cache(maxsize=256)
def roots_of_unity(n: int) -> np.ndarray:
    """exp(2 pi i k / n) for k = 0..n-1, read-only."""
    k = np.arange(n)
    table = np.exp(2j * np.pi * k / n)
    # pin the exactly representable values
    table[0] = 1.0
    if n % 2 == 0:
        table[n // 2] = -1.0
    if n % 4 == 0:
        table[n // 4] = 1j
        table[3 * n // 4] = -1j
    table.setflags(write=False)
    return table


def unit(k: int, n: int) -> complex:
    return complex(roots_of_unity(n)[k % n])


@dataclass(frozen=True)
class AdditiveCharacter:
    """psi_alpha(x) = exp(2 pi i Tr(alpha x) / p) on the field of ``ctx``."""

    ctx: FieldCtx
    alpha: FieldElement

    def __call__(self, x: FieldElement) -> complex:
        return eval_additive(self, x)


def eval_additive(psi: AdditiveCharacter, x: FieldElement) -> complex:
    ctx = psi.ctx
    return unit(ctx.trace_to_prime(ctx.mul(psi.alpha, x)), ctx.p)


@dataclass(frozen=True, order=True)
class MultCharacter:
    """The character of k_m^x sending the generator g_m to exp(2 pi i e / (q^m - 1))."""

    q: int
    m: int
    index: int

    def __post_init__(self):
        object.__setattr__(self, "index", self.index % self.modulus)

    @property
    def modulus(self) -> int:
        return self.q**self.m - 1

    @property
    def is_trivial(self) -> bool:
        return self.index == 0

    @property
    def order(self) -> int:
        return self.modulus // math.gcd(self.modulus, self.index)

    def __mul__(self, other: MultCharacter) -> MultCharacter:
        if (self.q, self.m) != (other.q, other.m):
            raise ValueError("characters live at different levels")
        return MultCharacter(self.q, self.m, self.index + other.index)

    def __pow__(self, k: int) -> MultCharacter:
        return MultCharacter(self.q, self.m, self.index * k)

    def conj(self) -> MultCharacter:
        return MultCharacter(self.q, self.m, -self.index)

    def __str__(self):
        return f"{self.index} mod {self.modulus}"

    @classmethod
    def parse(cls, text: str, q: int) -> MultCharacter:
        match = re.fullmatch(r"\s*(-?\d+)\s+mod\s+(\d+)\s*", text)
        if not match:
            raise ValueError(f"cannot parse multiplicative character {text!r}")
        e, modulus = int(match[1]), int(match[2])
        m = round(math.log(modulus + 1, q))
        if q**m - 1 != modulus:
            raise ValueError(f"{modulus} is not q^m - 1 for q={q}")
        return cls(q, m, e)


def eval_mult(chi: MultCharacter, ctx: FieldCtx, x: FieldElement) -> complex:
    if ctx.n_units != chi.modulus:
        raise ValueError("character and field levels differ")
    return unit(chi.index * ctx.dlog(x), chi.modulus)


def pullback_index(e: int, q: int, m_from: int, m_to: int) -> int:
    """Index at level m_to of the level-m_from character e composed with the norm."""
    if m_to % m_from:
        raise ValueError(f"level {m_from} does not divide {m_to}")
    n_to = q**m_to - 1
    return e * (n_to // (q**m_from - 1)) % n_to


@dataclass(frozen=True)
class LimitCharacter:
    """Finite-order character u/v mod 1 (v prime to p)."""

    u: int
    v: int

    def __post_init__(self):
        if self.v < 1:
            raise ValueError("denominator must be positive")
        g = math.gcd(self.u % self.v, self.v)
        object.__setattr__(self, "u", (self.u % self.v) // g)
        object.__setattr__(self, "v", self.v // g)

    @classmethod
    def trivial(cls) -> LimitCharacter:
        return cls(0, 1)

    @classmethod
    def from_fraction(cls, x: Fraction) -> LimitCharacter:
        return cls(x.numerator, x.denominator)

    @classmethod
    def parse(cls, text: str) -> LimitCharacter:
        match = re.fullmatch(r"\s*(-?\d+)\s*/\s*(\d+)\s*", text)
        if not match:
            raise ValueError(f"cannot parse limit character {text!r}")
        return cls(int(match[1]), int(match[2]))

    @property
    def value(self) -> Fraction:
        return Fraction(self.u, self.v)

    @property
    def is_trivial(self) -> bool:
        return self.u == 0

    def check_prime_to(self, p: int) -> LimitCharacter:
        if self.v % p == 0:
            raise ValueError(f"denominator of {self} is divisible by p={p}")
        return self

    def __mul__(self, other: LimitCharacter) -> LimitCharacter:
        return LimitCharacter.from_fraction(self.value + other.value)

    def __pow__(self, k: int) -> LimitCharacter:
        return LimitCharacter.from_fraction(self.value * k)

    def conj(self) -> LimitCharacter:
        return self**-1

    def index_at(self, q: int, m: int = 1) -> int:
        n = q**m - 1
        if n % self.v:
            raise ValueError(f"{self} is not defined over F_{q}^{m}")
        return self.u * (n // self.v)

    def sort_key(self):
        return self.value

    def __lt__(self, other):
        return self.value < other.value

    def __str__(self):
        return f"{self.u}/{self.v}"


def realize(xi: LimitCharacter, q: int, m: int = 1) -> MultCharacter:
    return MultCharacter(q, m, xi.index_at(q, m))


def to_limit(chi: MultCharacter) -> LimitCharacter:
    return LimitCharacter(chi.index, chi.modulus)


def pth_root(chi: MultCharacter, p: int) -> MultCharacter:
    """The unique psi with psi**p == chi."""
    return MultCharacter(chi.q, chi.m, chi.index * pow(p, -1, chi.modulus))


def pth_root_limit(xi: LimitCharacter, p: int) -> LimitCharacter:
    xi.check_prime_to(p)
    if xi.v == 1:
        return xi
    return LimitCharacter(xi.u * pow(p, -1, xi.v), xi.v)


def prime_to_part(n: int, p: int) -> int:
    while n % p == 0:
        n //= p
    return n


def roots_mu(eta: LimitCharacter, mu: int, p: int) -> list[LimitCharacter]:
    """All xi in Char_k with xi**mu == eta, sorted by value."""
    if mu < 1:
        raise ValueError("mu must be positive")
    eta.check_prime_to(p)
    out = set()
    for j in range(mu):
        xi = LimitCharacter(eta.u + j * eta.v, mu * eta.v)
        if xi.v % p:
            out.add(xi)
    return sorted(out)


def roots_over_k(e: int, d: int, q: int) -> list[int]:
    """All y mod q-1 with d*y = e mod q-1."""
    n = q - 1
    g = math.gcd(d, n)
    if e % g:
        return []
    n_g = n // g
    y0 = (e // g) * pow(d // g, -1, n_g) % n_g if n_g > 1 else 0
    return sorted((y0 + j * n_g) % n for j in range(g))


def tower_index(xi: LimitCharacter, tower, m: int) -> int:
    """Index at level m of ``tower`` of the base character xi.

    Base characters are indexed against the canonical generator of k; the
    tower's own level-1 generator differs from it by a known exponent.
    """
    q = tower.q
    if (q - 1) % xi.v:
        raise ValueError(f"{xi} is not defined over F_{q}")
    u = xi.u * pow(tower.base_log_scale, -1, xi.v) % xi.v if xi.v > 1 else 0
    return LimitCharacter(u, xi.v).index_at(q, m)
