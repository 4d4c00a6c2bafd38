"""Gauss-sum monomials as elements of a free abelian group, the three families
of known relations, and a membership procedure that either writes a monomial
as a product of relations or returns a certificate that it is not one.

Everything here is exact; floating point only enters ``numeric_crosscheck``
and ``constancy_variance``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .characters import LimitCharacter, pth_root_limit, roots_of_unity, roots_over_k, tower_index
from .charsums import gauss_all
from .equidist import Entry, Independent, check_independence, primitive_split
from .field_tower import get_tower

Key = tuple  # (LimitCharacter, a-tuple)


def _key_order(key: Key):
    return (key[0].value, key[1])


def _sorted_terms(terms: dict) -> dict:
    return {k: terms[k] for k in sorted(terms, key=_key_order)}


@dataclass
class GaussMonomial:
    """A finite product of symbols e_{eta,a}^eps over k = F_{p^f}."""

    p: int
    f: int
    r: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (eta, a), eps in self.terms.items():
            eta = eta if isinstance(eta, LimitCharacter) else LimitCharacter.parse(eta)
            a = tuple(int(x) for x in a)
            if len(a) != self.r:
                raise ValueError(f"exponent tuple {a} does not have length {self.r}")
            if not any(a):
                raise ValueError("exponent tuples must be nonzero")
            if (self.q - 1) % eta.v:
                raise ValueError(f"{eta} is not defined over F_{self.q}")
            if eps:
                clean[(eta, a)] = clean.get((eta, a), 0) + int(eps)
        self.terms = _sorted_terms({k: v for k, v in clean.items() if v})

    @property
    def q(self) -> int:
        return self.p**self.f

    def like(self, terms: dict) -> GaussMonomial:
        return GaussMonomial(self.p, self.f, self.r, terms)

    def __mul__(self, other: GaussMonomial) -> GaussMonomial:
        if (self.p, self.f, self.r) != (other.p, other.f, other.r):
            raise ValueError("monomials live over different fields or dimensions")
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, 0) + v
        return self.like(merged)

    def __pow__(self, k: int) -> GaussMonomial:
        return self.like({key: v * k for key, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, GaussMonomial):
            return NotImplemented
        return (self.p, self.f, self.r, self.terms) == (other.p, other.f, other.r, other.terms)

    def __len__(self):
        return len(self.terms)

    @property
    def weight(self) -> int:
        return sum(self.terms.values())

    @property
    def mu_measure(self) -> int:
        """sum over terms of (|mu_i| - 1)."""
        return sum(abs(primitive_split(a)[0]) - 1 for _, a in self.terms)

    def __str__(self):
        return format_monomial(self)


def combine(x: GaussMonomial) -> GaussMonomial:
    """Normal form: like keys merged, zero exponents dropped, keys sorted."""
    return x.like(dict(x.terms))


# -- generators ---------------------------------------------------------------


@dataclass(frozen=True)
class Move:
    kind: str  # "P", "Q" or "R"
    eta: LimitCharacter
    a: tuple
    d: int = 1
    exponent: int = 1

    def __post_init__(self):
        if self.kind not in ("P", "Q", "R"):
            raise ValueError(f"unknown move kind {self.kind!r}")
        if not any(self.a):
            raise ValueError("move exponent tuple must be nonzero")
        if self.exponent == 0:
            raise ValueError("move exponent must be nonzero")
        if self.kind == "R" and self.d < 1:
            raise ValueError("R needs a positive d")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "eta": str(self.eta), "a": list(self.a), "exponent": self.exponent}
        if self.kind == "R":
            out["d"] = self.d
        return out

    @classmethod
    def from_json(cls, data: dict) -> Move:
        return cls(data["kind"], LimitCharacter.parse(data["eta"]), tuple(data["a"]),
                   int(data.get("d", 1)), int(data["exponent"]))


def expand_move(mv: Move, p: int, f: int) -> GaussMonomial:
    """The generator as a formal product, raised to the move's exponent."""
    q = p**f
    r = len(mv.a)
    a = tuple(mv.a)
    if (q - 1) % mv.eta.v:
        raise ValueError(f"{mv.eta} is not defined over F_{q}")
    if mv.kind == "P":
        terms = {(mv.eta, a): 1, (mv.eta.conj(), tuple(-x for x in a)): 1}
    elif mv.kind == "Q":
        terms = {(mv.eta**p, tuple(p * x for x in a)): -1, (mv.eta, a): 1}
    else:
        if (q - 1) % mv.d:
            raise ValueError(f"d={mv.d} does not divide q-1={q - 1}")
        terms: dict = {}
        big = (mv.eta**mv.d, tuple(mv.d * x for x in a))
        terms[big] = terms.get(big, 0) - 1
        for j in range(mv.d):
            key = (mv.eta * LimitCharacter(j, mv.d), a)
            terms[key] = terms.get(key, 0) + 1
    base = GaussMonomial(p, f, r, terms)
    return base**mv.exponent


def product_of_moves(moves, p: int, f: int, r: int) -> GaussMonomial:
    out = GaussMonomial(p, f, r)
    for mv in moves:
        out = out * expand_move(mv, p, f)
    return out


# -- decomposition ------------------------------------------------------------


@dataclass
class Decomposition:
    """x equals the product of the expanded moves."""

    p: int
    f: int
    r: int
    moves: list
    mu_sequence: list = field(default_factory=list)

    @property
    def q(self) -> int:
        return self.p**self.f

    def t_exponents(self) -> dict:
        """t as a map base -> exponent vector: t_l = prod_base base^{vec_l}."""
        out: dict[int, list[int]] = {}

        def add(base, vec):
            cur = out.setdefault(base, [0] * self.r)
            for l, v in enumerate(vec):
                cur[l] += v

        for mv in self.moves:
            if mv.kind == "P":
                add(-1, [mv.exponent * x for x in mv.a])
            elif mv.kind == "R":
                add(mv.d, [mv.exponent * mv.d * x for x in mv.a])
        return {b: v for b, v in sorted(out.items()) if any(v)}

    def d_factors(self) -> list[dict]:
        """Symbolic factors of the constant D."""
        out = []
        for mv in self.moves:
            if mv.kind == "P":
                out.append({"factor": "eta(-1)*q", "eta": str(mv.eta), "exponent": mv.exponent})
            elif mv.kind == "R":
                out.append({"factor": "eta(d^-d)*prod G(xi), xi^d=1", "eta": str(mv.eta),
                            "d": mv.d, "exponent": mv.exponent})
        return out

    @property
    def weight(self) -> int:
        w = 0
        for mv in self.moves:
            if mv.kind == "P":
                w += 2 * mv.exponent
            elif mv.kind == "R":
                w += (mv.d - 1) * mv.exponent
        return w

    def d_value(self) -> complex:
        """D evaluated on the base field."""
        base = get_tower(self.p, self.f, 1).level(1)
        n = base.n_units
        gauss = gauss_all(base)
        w = roots_of_unity(n)
        total = complex(1.0)
        for mv in self.moves:
            if mv.kind == "P":
                val = w[mv.eta.index_at(self.q) * base.log_minus_one % n] * self.q
            elif mv.kind == "R":
                log_d = base.dlog(base.from_int(mv.d))
                val = w[(-mv.eta.index_at(self.q) * mv.d * log_d) % n]
                for j in range(mv.d):
                    val = val * gauss[LimitCharacter(j, mv.d).index_at(self.q)]
            else:
                continue
            total *= complex(val) ** mv.exponent
        return total

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "r": self.r,
            "moves": [mv.to_json() for mv in self.moves],
            "t": {str(b): v for b, v in self.t_exponents().items()},
            "D": self.d_factors(),
            "D_weight": self.weight,
            "mu_sequence": list(self.mu_sequence),
        }

    @classmethod
    def from_json(cls, data: dict, p: int, f: int) -> Decomposition:
        moves = [Move.from_json(m) for m in data["moves"]]
        return cls(p, f, int(data["r"]), moves, list(data.get("mu_sequence", [])))


@dataclass
class InH:
    decomposition: Decomposition

    verdict = "in_H"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "decomposition": self.decomposition.to_json()}


@dataclass
class NotInH:
    witness: dict
    mu_sequence: list = field(default_factory=list)

    verdict = "not_in_H"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness, "mu_sequence": list(self.mu_sequence)}


MAX_STEPS = 100_000


def _entries(x: GaussMonomial):
    return [Entry(eta, a) for eta, a in x.terms]


def decompose(x: GaussMonomial) -> InH | NotInH:
    """Reduce x by generator moves until it is empty or provably outside the
    subgroup of relations."""
    p, q = x.p, x.q
    x = combine(x)
    applied: list[Move] = []
    mus = [x.mu_measure]

    def apply(mv: Move):
        nonlocal x
        applied.append(mv)
        x = x * expand_move(mv, p, x.f)

    for _ in range(MAX_STEPS):
        if not x.terms:
            inverse = [Move(mv.kind, mv.eta, mv.a, mv.d, -mv.exponent) for mv in reversed(applied)]
            return InH(Decomposition(p, x.f, x.r, inverse, mus))

        # sign normalization
        flipped = False
        for (eta, a), eps in list(x.terms.items()):
            if primitive_split(a)[0] < 0:
                apply(Move("P", eta.conj(), tuple(-v for v in a), 1, -eps))
                flipped = True
        if flipped:
            mus.append(x.mu_measure)
            continue

        # Frobenius reduction on the largest mu divisible by p
        divisible = [(k, eps) for k, eps in x.terms.items() if primitive_split(k[1])[0] % p == 0]
        if divisible:
            (eta, a), eps = max(divisible, key=lambda ke: (primitive_split(ke[0][1])[0], _key_order(ke[0])))
            apply(Move("Q", pth_root_limit(eta, p), tuple(v // p for v in a), 1, eps))
            mus.append(x.mu_measure)
            continue

        cert = check_independence(_entries(x), p)
        if isinstance(cert, Independent):
            return NotInH({"kind": "independent", "certificate": cert.to_json()}, mus)

        keys = list(x.terms)
        candidates = [keys[i] for i, c in zip(cert.indices, cert.coefficients) if c != 0]
        candidates.sort(key=lambda k: (-primitive_split(k[1])[0], _key_order(k)))
        move = None
        for eta, a in candidates:
            mu, b = primitive_split(a)
            e_idx = eta.index_at(q)
            for d in range(2, mu + 1):
                if mu % d:
                    continue
                roots = roots_over_k(e_idx, d, q)
                if len(roots) < 2:
                    continue
                diff = (roots[1] - roots[0]) % (q - 1)
                e = (q - 1) // math.gcd(q - 1, diff)
                theta = LimitCharacter(roots_over_k(e_idx, e, q)[0], q - 1)
                move = Move("R", theta, tuple((mu // e) * v for v in b), e, x.terms[(eta, a)])
                break
            if move is not None:
                break
        if move is None:
            return NotInH({
                "kind": "blocked",
                "b": list(cert.b),
                "coefficients": [str(c) for c in cert.coefficients],
                "terms": [format_term(keys[i], x.terms[keys[i]]) for i in cert.indices],
            }, mus)
        apply(move)
        mus.append(x.mu_measure)
    raise RuntimeError("decomposition did not terminate")


def verify_decomposition(x: GaussMonomial, dec: Decomposition) -> bool:
    """Exact check that the moves multiply out to x."""
    if (x.p, x.f, x.r) != (dec.p, dec.f, dec.r):
        return False
    try:
        return product_of_moves(dec.moves, x.p, x.f, x.r) == combine(x)
    except ValueError:
        return False


# -- numeric evaluation -------------------------------------------------------


@dataclass
class LevelEval:
    """Normalized evaluations chi -> prod (G_m(eta chi^a) q^{-m/2})^eps at level m."""

    chis: np.ndarray
    values: np.ndarray
    excluded: int
    tower: object
    N: int


def _all_tuples(N: int, r: int) -> np.ndarray:
    grids = np.indices((N,) * r).reshape(r, -1).T
    return grids.astype(np.int64)


def evaluate(x: GaussMonomial, m: int, exclude=(), chis: np.ndarray | None = None,
             skip_support: bool = False) -> LevelEval:
    """Evaluate x at level m over ``chis`` (default: every r-tuple), dropping
    tuples where a term of x or of ``exclude`` becomes a trivial character.
    With ``skip_support`` only ``exclude`` is used for dropping."""
    tower = get_tower(x.p, x.f, m)
    ctx = tower.level(m)
    N = ctx.n_units
    gauss = gauss_all(ctx)
    if chis is None:
        chis = _all_tuples(N, x.r)
    chis = np.asarray(chis, dtype=np.int64) % N
    dropping = set(exclude) | (set() if skip_support else set(x.terms))
    keep = np.ones(len(chis), dtype=bool)
    idx_of = {}
    for eta, a in sorted(set(x.terms) | dropping, key=_key_order):
        idx = (chis @ (np.array(a, dtype=np.int64) % N) + tower_index(eta, tower, m)) % N
        if (eta, a) in dropping:
            keep &= idx != 0
        idx_of[(eta, a)] = idx
    values = np.ones(int(keep.sum()), dtype=complex)
    scale = math.sqrt(ctx.order)
    for key, eps in x.terms.items():
        z = gauss[idx_of[key][keep]] / scale
        values *= z**eps
    return LevelEval(chis[keep], values, int((~keep).sum()), tower, N)


def _chi_of_t(ev: LevelEval, t_exponents: dict, m: int) -> np.ndarray:
    tower = ev.tower
    base = tower.base_ctx
    phase = np.zeros(len(ev.chis), dtype=np.int64)
    for b, vec in t_exponents.items():
        log_b = tower.base_log(base.from_int(b), m)
        coeff = np.array([v * log_b for v in vec], dtype=object)
        coeff = np.array([int(c) % ev.N for c in coeff], dtype=np.int64)
        phase = (phase + ev.chis @ coeff) % ev.N
    return roots_of_unity(ev.N)[phase]


@dataclass
class Crosscheck:
    deviation: float
    used: int
    excluded: int
    target: complex


def _p_terms(dec: Decomposition):
    keys = set()
    for mv in dec.moves:
        if mv.kind == "P":
            keys.add((mv.eta, tuple(mv.a)))
            keys.add((mv.eta.conj(), tuple(-v for v in mv.a)))
    return keys


def numeric_crosscheck(x: GaussMonomial, dec: Decomposition, m: int,
                       sample_size: int | None = None, seed: int = 0,
                       strict_support: bool = False) -> Crosscheck:
    """max |chi(t) ev(x) - D^m| / |D|^m over the level-m tuples (all of them,
    or a seeded uniform sample).

    Tuples making a conjugation move's character trivial are skipped; with
    ``strict_support`` those making any term of x trivial are skipped too.
    """
    tower = get_tower(x.p, x.f, m)
    N = tower.level(m).n_units
    chis = None
    if sample_size is not None and sample_size < N**x.r:
        rng = np.random.default_rng(seed)
        chis = rng.integers(0, N, size=(sample_size, x.r))
    # only the conjugation relation fails, and only where its character is trivial
    ev = evaluate(x, m, exclude=_p_terms(dec), chis=chis, skip_support=not strict_support)
    if len(ev.values) == 0:
        raise ValueError(f"every tuple at level {m} is excluded; the field is too small")
    d_norm = dec.d_value() / math.sqrt(dec.q) ** dec.weight
    target = d_norm**m
    lhs = ev.values * _chi_of_t(ev, dec.t_exponents(), m)
    deviation = float(np.max(np.abs(lhs - target)))
    return Crosscheck(deviation, len(ev.values), ev.excluded, complex(target))


def smallest_level(x: GaussMonomial, min_size: int = 100, max_m: int = 12) -> int:
    """Smallest m at which at least ``min_size`` tuples survive the exclusions."""
    for m in range(1, max_m + 1):
        N = x.q**m - 1
        if N**x.r < min_size:
            continue
        if len(evaluate(x, m).values) >= min_size:
            return m
    raise ValueError("no level with enough tuples")


def constancy_variance(x: GaussMonomial, m: int) -> float:
    """Smallest variance of chi(t) ev(x) over every t in (k^x)^r."""
    ev = evaluate(x, m)
    base_gen_log = ev.tower.base_log(ev.tower.base_ctx.generator, m)
    n1 = x.q - 1
    best = math.inf
    w = roots_of_unity(ev.N)
    for s in np.ndindex(*(n1,) * x.r):
        coeff = np.array([(si * base_gen_log) % ev.N for si in s], dtype=np.int64)
        z = ev.values * w[(ev.chis @ coeff) % ev.N]
        mean = complex(math.fsum(z.real), math.fsum(z.imag)) / len(z)
        var = math.fsum(np.abs(z) ** 2) / len(z) - abs(mean) ** 2
        best = min(best, var)
    return best


# -- text formats -------------------------------------------------------------


class MonomialParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TERM = re.compile(
    r"\[\s*eta\s*=\s*(?P<u>-?\d+)\s*/\s*(?P<v>\d+)\s*;"
    r"\s*a\s*=\s*\((?P<a>[^)]*)\)\s*;"
    r"\s*exp\s*=\s*(?P<e>-?\d+)\s*\]"
)


def parse_monomial(text: str, p: int, f: int, r: int | None = None) -> GaussMonomial:
    """Parse ``[eta=u/v; a=(a1,...,ar); exp=e] * ...``.

    "1" is the empty product and needs ``r`` to be given.
    """
    if text.strip() == "1":
        if r is None:
            raise MonomialParseError("the empty product needs an explicit dimension", 0)
        return GaussMonomial(p, f, r)
    terms: dict = {}
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        match = _TERM.match(text, pos)
        if not match:
            raise MonomialParseError("expected a term [eta=u/v; a=(...); exp=e]", pos)
        try:
            a = tuple(int(x) for x in match["a"].split(","))
        except ValueError:
            raise MonomialParseError("exponent tuple must be integers separated by commas",
                                     match.start("a")) from None
        if r is None:
            r = len(a)
        if len(a) != r:
            raise MonomialParseError(f"tuple of length {len(a)}, expected {r}", match.start("a"))
        if not any(a):
            raise MonomialParseError("exponent tuple must be nonzero", match.start("a"))
        if int(match["v"]) == 0:
            raise MonomialParseError("zero denominator", match.start("v"))
        eta = LimitCharacter(int(match["u"]), int(match["v"]))
        if (p**f - 1) % eta.v:
            raise MonomialParseError(f"{eta} is not defined over F_{p**f}", match.start("u"))
        terms[(eta, a)] = terms.get((eta, a), 0) + int(match["e"])
        pos = match.end()
        while pos < n and text[pos].isspace():
            pos += 1
        if pos == n:
            break
        if text[pos] != "*":
            raise MonomialParseError("expected '*' between terms", pos)
        pos += 1
    return GaussMonomial(p, f, r, terms)


def format_term(key: Key, eps: int) -> str:
    eta, a = key
    return f"[eta={eta}; a=({','.join(str(v) for v in a)}); exp={eps}]"


def format_monomial(x: GaussMonomial) -> str:
    if not x.terms:
        return "1"
    return " * ".join(format_term(k, v) for k, v in x.terms.items())


def dumps_result(result: InH | NotInH, **extra) -> str:
    data = result.to_json()
    data.update(extra)
    return json.dumps(data, indent=2, sort_keys=True)


def random_moves(rng, p: int, f: int, r: int, max_moves: int = 6, max_entry: int = 3) -> list[Move]:
    """Between 1 and ``max_moves`` random generator moves over F_{p^f}."""
    q = p**f
    divisors = [d for d in range(2, q) if (q - 1) % d == 0]
    moves = []
    for _ in range(int(rng.integers(1, max_moves + 1))):
        kind = str(rng.choice(["P", "Q", "R"]))
        eta = LimitCharacter(int(rng.integers(0, q - 1)), q - 1)
        a = tuple(0 for _ in range(r))
        while not any(a):
            a = tuple(int(v) for v in rng.integers(-max_entry, max_entry + 1, size=r))
        d = int(rng.choice(divisors)) if kind == "R" else 1
        exponent = int(rng.choice([-2, -1, 1, 2]))
        moves.append(Move(kind, eta, a, d, exponent))
    return moves


def random_monomial(rng, p: int, f: int, r: int, max_terms: int = 3, max_entry: int = 3) -> GaussMonomial:
    """A random nonempty monomial with up to ``max_terms`` terms."""
    q = p**f
    terms = {}
    while not terms:
        for _ in range(int(rng.integers(1, max_terms + 1))):
            eta = LimitCharacter(int(rng.integers(0, q - 1)), q - 1)
            a = tuple(0 for _ in range(r))
            while not any(a):
                a = tuple(int(v) for v in rng.integers(-max_entry, max_entry + 1, size=r))
            terms[(eta, a)] = int(rng.choice([-2, -1, 1, 2]))
    return GaussMonomial(p, f, r, terms)
