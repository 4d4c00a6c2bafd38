"""Weyl sums of normalized Gauss-sum monomials, the explicit decay bound,
the linear-independence hypothesis, and the Jacobi-sum presets.

For a configuration of n triples (eta_i, a_i, t_i) and a level m, each
character tuple chi in S_m gives a point

    Phi_m(chi) = (q^{-m/2} chi(t_i) G_m(eta_i chi^{a_i}))_i  on (S^1)^n

and the Weyl sum for c in Z^n is the average of Phi_m(chi)^c over S_m.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .characters import LimitCharacter, roots_mu, roots_of_unity, tower_index
from .charsums import gauss_all
from .field_tower import get_tower
from .rational import nullspace, rref

DEFAULT_CHUNK = 2**16


def primitive_split(a) -> tuple[int, tuple[int, ...]]:
    """a = mu * b with b primitive (coprime entries, first nonzero positive)."""
    a = tuple(int(x) for x in a)
    if not any(a):
        raise ValueError("exponent tuple must be nonzero")
    g = reduce(math.gcd, (abs(x) for x in a))
    b = tuple(x // g for x in a)
    first = next(x for x in b if x)
    if first < 0:
        return -g, tuple(-x for x in b)
    return g, b


@dataclass(frozen=True)
class Entry:
    eta: LimitCharacter
    a: tuple
    t: tuple | None = None  # codes of r base-field elements; None means all ones

    @property
    def mu(self) -> int:
        return primitive_split(self.a)[0]

    @property
    def b(self) -> tuple:
        return primitive_split(self.a)[1]


@dataclass
class MonomialConfig:
    p: int
    f: int
    entries: list

    def __post_init__(self):
        if not self.entries:
            raise ValueError("a configuration needs at least one entry")
        r = len(self.entries[0].a)
        base = get_tower(self.p, self.f, 1).level(1)
        for e in self.entries:
            if len(e.a) != r:
                raise ValueError("all exponent tuples must have the same length")
            primitive_split(e.a)
            if (self.q - 1) % e.eta.v:
                raise ValueError(f"{e.eta} is not defined over F_{self.q}")
            if e.t is not None:
                if len(e.t) != r or any(not 0 < int(x) < base.order for x in e.t):
                    raise ValueError("t must be r nonzero base-field element codes")

    @property
    def q(self) -> int:
        return self.p**self.f

    @property
    def r(self) -> int:
        return len(self.entries[0].a)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def a_const(self) -> int:
        """sum_i min_{j: a_ij != 0} |a_ij|."""
        return sum(min(abs(x) for x in e.a if x) for e in self.entries)


# -- independence hypothesis ------------------------------------------------


def root_vector(eta: LimitCharacter, mu: int, p: int) -> list[LimitCharacter]:
    """Support of v = sum of xi with xi^mu = eta (every coefficient is 1)."""
    if mu > 0:
        return roots_mu(eta, mu, p)
    return roots_mu(eta.conj(), -mu, p)


@dataclass(frozen=True)
class GroupRank:
    b: tuple
    indices: tuple
    rank: int
    pivot_trace: tuple


@dataclass(frozen=True)
class Independent:
    groups: tuple

    def to_json(self) -> dict:
        return {
            "verdict": "independent",
            "groups": [
                {"b": list(g.b), "entries": list(g.indices), "rank": g.rank,
                 "pivots": [list(t) for t in g.pivot_trace]}
                for g in self.groups
            ],
        }


@dataclass(frozen=True)
class Dependent:
    b: tuple
    indices: tuple
    coefficients: tuple

    def to_json(self) -> dict:
        return {"verdict": "dependent", "b": list(self.b), "entries": list(self.indices),
                "coefficients": [str(c) for c in self.coefficients]}


def check_independence(entries, p: int) -> Independent | Dependent:
    """Test linear independence of the root vectors within each direction b.

    ``entries`` holds objects with ``eta`` and ``a``.  Groups are scanned in
    increasing order of b; the first dependent group is reported with a kernel
    vector scaled to have leading coefficient 1.
    """
    groups: dict[tuple, list[int]] = {}
    for i, e in enumerate(entries):
        groups.setdefault(primitive_split(e.a)[1], []).append(i)
    ranks = []
    for b in sorted(groups):
        idx = groups[b]
        supports = [root_vector(entries[i].eta, primitive_split(entries[i].a)[0], p) for i in idx]
        basis = sorted(set(itertools.chain.from_iterable(supports)))
        pos = {xi: j for j, xi in enumerate(basis)}
        matrix = [[0] * len(idx) for _ in basis]
        for col, sup in enumerate(supports):
            for xi in sup:
                matrix[pos[xi]][col] = 1
        kernel = nullspace(matrix, len(idx))
        if kernel:
            return Dependent(b, tuple(idx), tuple(kernel[0]))
        ech = rref(matrix)
        ranks.append(GroupRank(b, tuple(idx), ech.rank, tuple(ech.trace)))
    return Independent(tuple(ranks))


# -- level data and Weyl sums -------------------------------------------------


class LevelData:
    """Everything needed to evaluate Phi_m at level m: the tower, the cached
    Gauss table, and the exact indices of eta_i and logs of t_i."""

    def __init__(self, config: MonomialConfig, m: int):
        self.config = config
        self.m = m
        self.tower = get_tower(config.p, config.f, m)
        self.ctx = self.tower.level(m)
        self.N = self.ctx.n_units
        self.order = self.ctx.order
        self.gauss = gauss_all(self.ctx)
        self.amat = np.array([e.a for e in config.entries], dtype=np.int64)
        self.eta_idx = np.array([tower_index(e.eta, self.tower, m) for e in config.entries], dtype=np.int64)
        base = self.tower.base_ctx
        tlog = np.zeros((config.n, config.r), dtype=np.int64)
        for i, e in enumerate(config.entries):
            if e.t is not None:
                for l, x in enumerate(e.t):
                    tlog[i, l] = self.tower.base_log(base.from_code(int(x)), m)
        self.tlog = tlog

    def tuples(self, start: int, stop: int) -> np.ndarray:
        """Rows start..stop-1 of T_m in row-major order (last coordinate fastest)."""
        flat = np.arange(start, stop, dtype=np.int64)
        out = np.empty((len(flat), self.config.r), dtype=np.int64)
        for l in reversed(range(self.config.r)):
            out[:, l] = flat % self.N
            flat //= self.N
        return out

    def char_indices(self, chis: np.ndarray) -> np.ndarray:
        """Index of eta_i chi^{a_i} for every row."""
        return (chis @ (self.amat.T % self.N) + self.eta_idx) % self.N

    def phi(self, chis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(rows of S_m among ``chis``, Phi_m at those rows)."""
        idx = self.char_indices(chis)
        keep = np.all(idx != 0, axis=1)
        chis, idx = chis[keep], idx[keep]
        phase = (chis @ self.tlog.T) % self.N
        z = roots_of_unity(self.N)[phase] * self.gauss[idx] / math.sqrt(self.order)
        return chis, z

    @property
    def size(self) -> int:
        return self.N**self.config.r


def enumerate_S(config: MonomialConfig, m: int, chunk: int = DEFAULT_CHUNK):
    """Yield the character tuples of S_m (as index tuples) in row-major order."""
    level = LevelData(config, m)
    for start in range(0, level.size, chunk):
        chis = level.tuples(start, min(level.size, start + chunk))
        keep = np.all(level.char_indices(chis) != 0, axis=1)
        for row in chis[keep]:
            yield tuple(int(x) for x in row)


def phi(config: MonomialConfig, chi, m: int, level: LevelData | None = None) -> np.ndarray:
    level = level or LevelData(config, m)
    chis = np.array([chi], dtype=np.int64) % level.N
    kept, z = level.phi(chis)
    if len(kept) == 0:
        raise ValueError(f"{tuple(chi)} is not in S_{m}")
    return z[0]


def _power(z: np.ndarray, c) -> np.ndarray:
    out = np.ones(z.shape[0], dtype=complex)
    for i, ci in enumerate(c):
        if ci > 0:
            out = out * z[:, i] ** ci
        elif ci < 0:
            out = out * np.conj(z[:, i]) ** (-ci)
    return out


def _accumulate(level: LevelData, cs, transform=None, workers: int = 1, chunk: int = DEFAULT_CHUNK):
    """Per-c sums over S_m with a fixed chunking and a correctly rounded
    reduction, so the result does not depend on ``workers``."""
    bounds = [(s, min(level.size, s + chunk)) for s in range(0, level.size, chunk)]

    def work(bound):
        _, z = level.phi(level.tuples(*bound))
        if transform is not None:
            z = transform(z)
        parts = []
        for c in cs:
            v = _power(z, c)
            parts.append((math.fsum(v.real), math.fsum(v.imag)))
        return len(z), parts

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, bounds))
    else:
        results = [work(b) for b in bounds]
    count = sum(r[0] for r in results)
    sums = []
    for j in range(len(cs)):
        re_ = math.fsum(r[1][j][0] for r in results)
        im_ = math.fsum(r[1][j][1] for r in results)
        sums.append(complex(re_, im_))
    return count, sums


@dataclass
class WeylReport:
    m: int
    q: int
    r: int
    c: tuple
    sigma: complex | None
    s_size: int
    a_const: int
    bound_fit: float | None = None
    rhs: float | None = None

    @property
    def abs_sigma(self) -> float | None:
        return None if self.sigma is None else abs(self.sigma)

    @property
    def within_bound(self) -> bool | None:
        if self.rhs is None or self.sigma is None:
            return None
        return abs(self.sigma) <= self.rhs

    def csv_row(self) -> dict:
        fmt = lambda x: "" if x is None else repr(float(x))
        return {
            "m": self.m, "q": self.q, "c": " ".join(str(x) for x in self.c),
            "re": fmt(None if self.sigma is None else self.sigma.real),
            "im": fmt(None if self.sigma is None else self.sigma.imag),
            "abs": fmt(self.abs_sigma), "s_size": self.s_size, "a": self.a_const,
            "rhs": fmt(self.rhs),
        }


CSV_FIELDS = ["m", "q", "c", "re", "im", "abs", "s_size", "a", "rhs"]


class EmptySError(ValueError):
    """S_m has no elements at the requested level."""


def _check_count(level: LevelData, count: int):
    cfg = level.config
    lower = level.N**cfg.r - cfg.a_const * level.N ** (cfg.r - 1)
    if count < lower:
        raise AssertionError(f"|S_m|={count} below the counting bound {lower}")


def weyl_sums(config: MonomialConfig, cs, m: int, workers: int = 1,
              chunk: int = DEFAULT_CHUNK, level: LevelData | None = None) -> list[WeylReport]:
    cs = [tuple(int(x) for x in c) for c in cs]
    for c in cs:
        if len(c) != config.n:
            raise ValueError("c must have one entry per configuration entry")
    level = level or LevelData(config, m)
    count, sums = _accumulate(level, cs, workers=workers, chunk=chunk)
    _check_count(level, count)
    if count == 0:
        raise EmptySError(f"S_{m} is empty")
    out = []
    for c, s in zip(cs, sums):
        sigma = complex(1.0) if not any(c) else s / count
        out.append(WeylReport(m, config.q, config.r, c, sigma, count, config.a_const))
    return out


def weyl_sum(config: MonomialConfig, c, m: int, workers: int = 1,
             chunk: int = DEFAULT_CHUNK) -> WeylReport:
    return weyl_sums(config, [c], m, workers, chunk)[0]


def bound_rhs(a_const: int, a_fit: float, q: int, m: int, r: int) -> float:
    """Upper bound for |Sigma_m| given the constant a_fit, valid for q^m > 1 + a."""
    Q = q**m
    if Q <= 1 + a_const:
        raise ValueError(f"q^m={Q} must exceed 1 + a = {1 + a_const}")
    num = a_fit * float(Q - 1) ** r / math.sqrt(Q) + a_const * float(Q - 1) ** (r - 1)
    return num / (float(Q - 1) ** (r - 1) * (Q - 1 - a_const))


def fit_constant(report: WeylReport) -> float:
    """Smallest constant for which the leading bound term alone covers |Sigma_m|."""
    Q = report.q**report.m
    r, a = report.r, report.a_const
    return abs(report.sigma) * float(Q - 1) ** (r - 1) * (Q - 1 - a) * math.sqrt(Q) / float(Q - 1) ** r


def admissible(q: int, m: int, a_const: int) -> bool:
    return q**m > 1 + a_const


def weyl_series(config: MonomialConfig, c, ms, calibration=(1, 2), workers: int = 1,
                chunk: int = DEFAULT_CHUNK) -> list[WeylReport]:
    """Sigma_m for every m in ``ms``; the bound constant is fitted on the
    admissible levels of the calibration window and the bound is attached to
    every admissible level.  Levels with empty S_m get ``sigma=None``."""
    reports = []
    for m in ms:
        try:
            reports.append(weyl_sum(config, c, m, workers, chunk))
        except EmptySError:
            reports.append(WeylReport(m, config.q, config.r, tuple(c), None, 0, config.a_const))
    calib = [rep for rep in reports
             if rep.m in calibration and rep.sigma is not None and admissible(config.q, rep.m, config.a_const)]
    if calib and any(c):
        a_fit = max(fit_constant(rep) for rep in calib)
        for rep in reports:
            rep.bound_fit = a_fit
            if admissible(config.q, rep.m, config.a_const):
                rep.rhs = bound_rhs(config.a_const, a_fit, config.q, rep.m, config.r)
    return reports


def c_window(n: int, C: int = 3):
    """All c in Z^n with 0 < max|c_i| <= C."""
    return [c for c in itertools.product(range(-C, C + 1), repeat=n) if any(c)]


def equidistribution_window(config: MonomialConfig, m: int, C: int = 3, workers: int = 1):
    """Weyl sums for the whole window and the discrepancy proxy max |Sigma|."""
    reports = weyl_sums(config, c_window(config.n, C), m, workers)
    return reports, max(rep.abs_sigma for rep in reports)


# -- Jacobi-sum corollaries ---------------------------------------------------

PRESETS = ("jacobi_all_free", "jacobi_fixed_tail", "jacobi_powers")


@dataclass
class Corollary:
    """A configuration and the torus homomorphism (plus translation) carrying
    Phi_m to the normalized Jacobi sums of one corollary."""

    preset: str
    config: MonomialConfig
    exponents: np.ndarray  # rows: output coordinate, columns: entries
    fixed_tail: list = field(default_factory=list)

    @property
    def n_out(self) -> int:
        return self.exponents.shape[0]

    def translation(self, level: LevelData) -> np.ndarray:
        out = np.ones(self.n_out, dtype=complex)
        for i, etas in enumerate(self.fixed_tail):
            for eta in etas:
                idx = tower_index(eta, level.tower, level.m)
                out[i] *= level.gauss[idx] / math.sqrt(level.order)
        return out

    def transform(self, level: LevelData):
        shift = self.translation(level)
        ex = self.exponents

        def apply(z):
            w = np.ones((z.shape[0], ex.shape[0]), dtype=complex)
            for o in range(ex.shape[0]):
                w[:, o] = _power(z, ex[o]) * shift[o]
            return w

        return apply


def make_corollary(preset: str, p: int, f: int = 1, *, n: int = 2, d: int = 2,
                   tails=None, powers=None) -> Corollary:
    """Build one of the Jacobi presets.

    jacobi_all_free: J(chi_1, ..., chi_n), all chi_i free.
    jacobi_fixed_tail: J(chi_1..chi_d, eta_i1..eta_ie) for each tail i in ``tails``.
    jacobi_powers: J(chi^d_1, ..., chi^d_n) for d in ``powers``.
    """
    one = LimitCharacter.trivial()
    if preset == "jacobi_all_free":
        if n < 2:
            raise ValueError("n must be at least 2")
        entries = [Entry(one, tuple(int(i == j) for j in range(n))) for i in range(n)]
        entries.append(Entry(one, (1,) * n))
        ex = np.array([[1] * n + [-1]], dtype=np.int64)
        return Corollary(preset, MonomialConfig(p, f, entries), ex)
    if preset == "jacobi_fixed_tail":
        if not tails:
            raise ValueError("jacobi_fixed_tail needs at least one tail of fixed characters")
        tails = [[LimitCharacter.parse(x) if isinstance(x, str) else x for x in tail] for tail in tails]
        products = []
        for tail in tails:
            if not tail or any(eta.is_trivial for eta in tail):
                raise ValueError("fixed characters must be nontrivial")
            products.append(reduce(lambda x, y: x * y, tail))
        if len(set(products)) != len(products):
            raise ValueError("tail products must be distinct")
        entries = [Entry(one, tuple(int(i == j) for j in range(d))) for i in range(d)]
        entries += [Entry(prod, (1,) * d) for prod in products]
        ex = np.zeros((len(tails), d + len(tails)), dtype=np.int64)
        ex[:, :d] = 1
        for i in range(len(tails)):
            ex[i, d + i] = -1
        return Corollary(preset, MonomialConfig(p, f, entries), ex, tails)
    if preset == "jacobi_powers":
        powers = list(powers or [])
        if len(powers) < 2 or any(x < 1 or x % p == 0 for x in powers):
            raise ValueError("jacobi_powers needs n >= 2 positive exponents prime to p")
        distinct = sorted(set(powers))
        total = sum(powers)
        entries = [Entry(one, (x,)) for x in distinct] + [Entry(one, (total,))]
        ex = np.array([[powers.count(x) for x in distinct] + [-1]], dtype=np.int64)
        return Corollary(preset, MonomialConfig(p, f, entries), ex)
    raise ValueError(f"unknown preset {preset!r}; expected one of {PRESETS}")


def corollary_values(cor: Corollary, m: int):
    """(tuples in S_m, normalized Jacobi values) at level m."""
    level = LevelData(cor.config, m)
    chis, z = level.phi(level.tuples(0, level.size))
    return chis, cor.transform(level)(z)


def corollary_experiment(cor: Corollary, m: int, C: int = 3, workers: int = 1) -> list[WeylReport]:
    """Weyl sums of the pushed-forward points on the output torus for every
    c in the window 0 < max|c| <= C."""
    level = LevelData(cor.config, m)
    cs = c_window(cor.n_out, C)
    count, sums = _accumulate(level, cs, transform=cor.transform(level), workers=workers)
    if count == 0:
        raise EmptySError(f"S_{m} is empty")
    return [WeylReport(m, cor.config.q, cor.config.r, c, s / count, count, cor.config.a_const)
            for c, s in zip(cs, sums)]
