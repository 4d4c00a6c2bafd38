"""Slow, independent reference implementations used only by the tests.

Field arithmetic here is plain Python on coefficient lists; nothing is
imported from the package except through the modulus and generator handed in.
"""

import cmath
import itertools
import math


class PolyField:
    """F_p[x]/(modulus) with a chosen generator, all in pure Python."""

    def __init__(self, p, modulus, generator):
        self.p = p
        self.modulus = list(modulus)
        self.deg = len(modulus) - 1
        self.order = p**self.deg
        self.n = self.order - 1
        self.gen = self.reduce(list(generator))
        self.powers = [self.one()]
        for _ in range(self.n - 1):
            self.powers.append(self.mul(self.powers[-1], self.gen))
        self.log = {tuple(x): k for k, x in enumerate(self.powers)}
        assert len(self.log) == self.n, "generator is not primitive"

    def one(self):
        return [1] + [0] * (self.deg - 1)

    def reduce(self, a):
        a = [c % self.p for c in a]
        while len(a) > self.deg:
            lead = a.pop()
            for j in range(self.deg):
                a[len(a) - self.deg + j] = (a[len(a) - self.deg + j] - lead * self.modulus[j]) % self.p
        return a + [0] * (self.deg - len(a))

    def mul(self, a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return self.reduce(out)

    def add(self, a, b):
        return [(x + y) % self.p for x, y in zip(a, b)]

    def trace(self, a):
        acc, x = [0] * self.deg, list(a)
        for _ in range(self.deg):
            acc = self.add(acc, x)
            y = self.one()
            for _ in range(self.p):
                y = self.mul(y, x)
            x = y
        assert all(c == 0 for c in acc[1:])
        return acc[0]


def naive_gauss(field, e):
    """-sum_k exp(2 pi i e k / N) psi(g^k)."""
    total = 0
    for k, x in enumerate(field.powers):
        total += cmath.exp(2j * math.pi * e * k / field.n) * cmath.exp(2j * math.pi * field.trace(x) / field.p)
    return -total


def naive_gauss_table(field):
    return [naive_gauss(field, e) for e in range(field.n)]


def naive_jacobi(field, idx):
    """(-1)^(n-1) sum over x_1 + ... + x_n = 1, x_i != 0."""
    n_chars = len(idx)
    elements = [x for x in field.powers]
    total = 0
    for xs in itertools.product(elements, repeat=n_chars - 1):
        last = field.one()
        for x in xs:
            last = [(a - b) % field.p for a, b in zip(last, x)]
        if not any(last):
            continue
        logs = [field.log[tuple(x)] for x in xs] + [field.log[tuple(last)]]
        total += cmath.exp(2j * math.pi * sum(e * k for e, k in zip(idx, logs)) / field.n)
    return total if n_chars % 2 else -total


def naive_weyl_r1(field, exps, c):
    """Average over chi with every chi^{a_i} nontrivial of prod (G(chi^{a_i})/sqrt(Q))^{c_i}."""
    table = naive_gauss_table(field)
    root = math.sqrt(field.order)
    terms = []
    for chi in range(field.n):
        idx = [(a * chi) % field.n for a in exps]
        if any(i == 0 for i in idx):
            continue
        term = 1
        for i, ci in zip(idx, c):
            z = table[i] / root
            term *= z**ci if ci >= 0 else z.conjugate() ** (-ci)
        terms.append(term)
    return sum(terms) / len(terms), len(terms)


def first_irreducible(p, deg):
    """Smallest monic polynomial of degree 2 or 3 without roots (hence irreducible)."""
    assert deg in (2, 3)
    for tail in itertools.product(range(p), repeat=deg):
        poly = list(reversed(tail))[::-1] + [1]
        if all(sum(c * x**j for j, c in enumerate(poly)) % p for x in range(p)):
            return poly
    raise ValueError


def any_field(p, deg):
    """A field of size p^deg with a brute-force generator, independent of the package."""
    modulus = [0, 1] if deg == 1 else first_irreducible(p, deg)
    if deg == 1:
        for g in range(1, p):
            if len({pow(g, k, p) for k in range(p - 1)}) == p - 1:
                return PolyField(p, [-g % p, 1], [g])
    for code in range(1, p**deg):
        g = [(code // p**j) % p for j in range(deg)]
        try:
            return PolyField(p, modulus, g)
        except AssertionError:
            continue
    raise ValueError
