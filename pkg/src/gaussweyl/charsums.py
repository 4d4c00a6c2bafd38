"""Gauss and Jacobi sums.

Sign convention: G(chi) = -sum_{t != 0} chi(t) psi(t), so G(1) = 1 and
G_m(chi o Norm) = G(chi)^m.
"""

from __future__ import annotations

import hashlib
import math
import os
from pathlib import Path

import numpy as np

from .characters import MultCharacter, roots_of_unity
from .field_tower import FieldCtx, FieldElement

NAIVE_DFT_THRESHOLD = 512
CACHE_ENV = "GAUSSWEYL_CACHE_DIR"


def rel_tolerance(q_m: int, base: float = 1e-8) -> float:
    """Residual threshold for a sum over the field of size q_m."""
    return base * max(1.0, math.sqrt(q_m))


def fsum_complex(values) -> complex:
    """Correctly rounded sum, hence independent of summation order."""
    values = np.asarray(values)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _check_alpha(ctx: FieldCtx, alpha):
    if alpha is None:
        return ctx.one
    alpha = ctx.element(alpha)
    if not any(alpha):
        raise ValueError("alpha must be nonzero")
    return alpha


def additive_sequence(ctx: FieldCtx, alpha: FieldElement | None = None) -> np.ndarray:
    """psi(alpha * g^k) for k = 0..q^m-2, by explicit field multiplication."""
    alpha = _check_alpha(ctx, alpha)
    if alpha == ctx.one:
        traces = ctx.trace_sequence
    else:
        coeffs = (ctx.power_coeffs @ ctx.mul_matrix(alpha).T) % ctx.p
        traces = (coeffs @ ctx.trace_vector) % ctx.p
    return roots_of_unity(ctx.p)[traces]


def gauss_sum(ctx: FieldCtx, chi: MultCharacter | int, alpha: FieldElement | None = None) -> complex:
    """G(alpha, chi) by direct summation over k^x."""
    e = chi.index if isinstance(chi, MultCharacter) else int(chi)
    if isinstance(chi, MultCharacter) and chi.modulus != ctx.n_units:
        raise ValueError("character and field levels differ")
    n = ctx.n_units
    psi = additive_sequence(ctx, alpha)
    k = np.arange(n, dtype=np.int64)
    return -fsum_complex(roots_of_unity(n)[(e % n) * k % n] * psi)


def dft_naive(x: np.ndarray) -> np.ndarray:
    """X[e] = sum_k x[k] exp(2 pi i e k / N), O(N^2)."""
    n = len(x)
    k = np.arange(n, dtype=np.int64)
    w = roots_of_unity(n)
    out = np.empty(n, dtype=complex)
    block = max(1, 2**20 // max(n, 1))
    for start in range(0, n, block):
        e = k[start:start + block, None]
        out[start:start + block] = w[(e * k[None, :]) % n] @ x
    return out


def dft_chirp(x: np.ndarray) -> np.ndarray:
    """Same transform as ``dft_naive`` for any length, via Bluestein's chirp
    convolution on a power-of-two FFT."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    if n == 1:
        return x.copy()
    j = np.arange(n, dtype=np.int64)
    # exp(pi i j^2 / n), index kept exact mod 2n
    chirp = roots_of_unity(2 * n)[(j * j) % (2 * n)]
    size = 1 << (2 * n - 1).bit_length()
    a = np.zeros(size, dtype=complex)
    a[:n] = x * chirp
    b = np.zeros(size, dtype=complex)
    b[:n] = np.conj(chirp)
    b[size - n + 1:] = np.conj(chirp[1:][::-1])
    conv = np.fft.ifft(np.fft.fft(a) * np.fft.fft(b))
    return chirp * conv[:n]


def dft(x: np.ndarray, threshold: int = NAIVE_DFT_THRESHOLD) -> np.ndarray:
    return dft_naive(x) if len(x) < threshold else dft_chirp(x)


def _cache_path(ctx: FieldCtx, alpha) -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    key = repr((ctx.p, ctx.params.f, ctx.m, ctx.modulus, ctx.generator, tuple(alpha)))
    digest = hashlib.sha256(key.encode()).hexdigest()[:24]
    return Path(root) / f"gauss_{ctx.p}_{ctx.params.f}_{ctx.m}_{digest}.npy"


def gauss_all(ctx: FieldCtx, alpha: FieldElement | None = None,
              threshold: int = NAIVE_DFT_THRESHOLD) -> np.ndarray:
    """G(alpha, chi_e) for every index e mod q^m - 1, as one DFT.

    Results are memoized on the context (and on disk when the cache
    directory variable is set); the returned array is read-only.
    """
    alpha = _check_alpha(ctx, alpha)
    cache = ctx.__dict__.setdefault("_gauss_cache", {})
    key = (alpha, threshold)
    if key in cache:
        return cache[key]
    path = _cache_path(ctx, alpha)
    if path is not None and path.exists():
        out = np.load(path)
    else:
        out = -dft(additive_sequence(ctx, alpha), threshold)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.save(path, out)
    out.setflags(write=False)
    cache[key] = out
    return out


def _indices(ctx: FieldCtx, chis) -> list[int]:
    out = []
    for chi in chis:
        if isinstance(chi, MultCharacter):
            if chi.modulus != ctx.n_units:
                raise ValueError("character and field levels differ")
            out.append(chi.index)
        else:
            out.append(int(chi) % ctx.n_units)
    return out


def _logs_of_codes(ctx: FieldCtx, codes: np.ndarray) -> np.ndarray:
    if ctx.log_table is not None:
        return ctx.log_table[codes]
    return np.array([ctx.dlog(ctx.from_code(int(c))) if c else -1 for c in codes], dtype=np.int64)


def _encode(ctx: FieldCtx, coeffs: np.ndarray) -> np.ndarray:
    weights = ctx.p ** np.arange(ctx.degree, dtype=np.int64)
    return (coeffs % ctx.p) @ weights


def one_minus_logs(ctx: FieldCtx, shift: np.ndarray | None = None) -> np.ndarray:
    """log(1 - shift - g^k) for every k, -1 where that element is zero."""
    one = np.zeros(ctx.degree, dtype=np.int64)
    one[0] = 1
    base = one if shift is None else one - shift
    return _logs_of_codes(ctx, _encode(ctx, base[None, :] - ctx.power_coeffs))


def jacobi_sum(ctx: FieldCtx, *chis) -> complex:
    """(-1)^(n-1) sum over x_1 + ... + x_n = 1, all x_i nonzero, of prod chi_i(x_i)."""
    if len(chis) == 1 and isinstance(chis[0], (list, tuple)):
        chis = tuple(chis[0])
    n_chars = len(chis)
    if n_chars < 2:
        raise ValueError("a Jacobi sum needs at least two characters")
    idx = _indices(ctx, chis)
    n = ctx.n_units
    w = roots_of_unity(n)
    k = np.arange(n, dtype=np.int64)
    partials = []

    def walk(depth, shift, phase):
        # shift: coefficient vector of x_1 + ... + x_depth; phase: exponent so far
        if depth == n_chars - 2:
            logs = one_minus_logs(ctx, shift)
            ok = logs >= 0
            expo = (phase + idx[depth] * k[ok] + idx[-1] * logs[ok]) % n
            partials.append(math.fsum(w[expo].real) + 1j * math.fsum(w[expo].imag))
            return
        for kk in range(n):
            walk(depth + 1, (shift + ctx.power_coeffs[kk]) % ctx.p, (phase + idx[depth] * kk) % n)

    walk(0, np.zeros(ctx.degree, dtype=np.int64), 0)
    total = fsum_complex(np.array(partials))
    return total if n_chars % 2 else -total


def jacobi_all(ctx: FieldCtx, n_chars: int, max_size: int = 2**23) -> np.ndarray:
    """Direct Jacobi sums for every n-tuple of characters at once.

    The defining sum runs over solutions of x_1 + ... + x_n = 1; in log
    coordinates this is the n-dimensional DFT of the solution indicator.
    Entry [e_1, ..., e_n] is J(chi_e1, ..., chi_en).
    """
    if n_chars < 2:
        raise ValueError("a Jacobi sum needs at least two characters")
    n = ctx.n_units
    if n**n_chars > max_size:
        raise ValueError(f"{n}^{n_chars} tuples exceed the batch budget")
    indicator = np.zeros((n,) * n_chars)
    coeffs = ctx.power_coeffs
    grid = np.indices((n,) * (n_chars - 1)).reshape(n_chars - 1, -1)
    partial = np.zeros((grid.shape[1], ctx.degree), dtype=np.int64)
    for row in grid:
        partial += coeffs[row]
    one = np.zeros(ctx.degree, dtype=np.int64)
    one[0] = 1
    last = _logs_of_codes(ctx, _encode(ctx, one[None, :] - partial))
    ok = last >= 0
    indicator[tuple(grid[:, ok]) + (last[ok],)] = 1.0
    out = np.fft.ifftn(indicator) * float(n) ** n_chars
    return out if n_chars % 2 else -out


def jacobi_via_gauss(ctx: FieldCtx, *chis, gauss: np.ndarray | None = None) -> complex:
    """G(chi_1)...G(chi_n) / G(chi_1...chi_n); requires every chi_i and the
    product to be nontrivial."""
    if len(chis) == 1 and isinstance(chis[0], (list, tuple)):
        chis = tuple(chis[0])
    if len(chis) < 2:
        raise ValueError("a Jacobi sum needs at least two characters")
    idx = _indices(ctx, chis)
    n = ctx.n_units
    total = sum(idx) % n
    if any(e == 0 for e in idx) or total == 0:
        raise ValueError("quotient identity needs nontrivial characters and product")
    g = gauss_all(ctx) if gauss is None else gauss
    num = complex(1.0)
    for e in idx:
        num *= g[e]
    return num / g[total]
