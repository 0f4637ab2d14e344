"""Small-dimension lattice workhorses: LLL over floats, Fincke-Pohst style
short-vector enumeration, and exact enumeration for integral Gram matrices.

Row convention throughout: the lattice is the integer row span of `basis`.
Dimensions here are tiny (n <= 8), so clarity beats asymptotics.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np


def _gauss_reduce_2d(basis: np.ndarray):
    """Lagrange-Gauss reduction for rank-2 lattices: terminates in
    O(log cond) steps, robust for extremely skewed inputs."""
    B = np.array(basis, dtype=float)
    U = np.eye(2, dtype=object)
    for _ in range(10000):
        n0 = B[0] @ B[0]
        n1 = B[1] @ B[1]
        if n1 < n0:
            B = B[[1, 0]]
            U = U[[1, 0]]
            n0, n1 = n1, n0
        mu = (B[1] @ B[0]) / n0
        q = round(mu)
        if q == 0:
            break
        B[1] = B[1] - q * B[0]
        U[1] = U[1] - q * U[0]
    return B, U


def lll_reduce(basis: np.ndarray, delta: float = 0.99):
    """LLL reduction; returns (reduced_basis, U) with reduced = U @ basis,
    U unimodular integer."""
    B = np.array(basis, dtype=float)
    n = B.shape[0]
    if n == 2:
        return _gauss_reduce_2d(basis)
    U = np.eye(n, dtype=np.int64)

    def gso(B):
        Bs = np.zeros_like(B)
        mu = np.zeros((n, n))
        for i in range(n):
            Bs[i] = B[i]
            for j in range(i):
                denom = Bs[j] @ Bs[j]
                mu[i, j] = (B[i] @ Bs[j]) / denom if denom > 0 else 0.0
                Bs[i] = Bs[i] - mu[i, j] * Bs[j]
        return Bs, mu

    Bs, mu = gso(B)
    k = 1
    it = 0
    while k < n:
        it += 1
        if it > 10000:
            break
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                B[k] -= q * B[j]
                U[k] -= q * U[j]
                Bs, mu = gso(B)
        lhs = Bs[k] @ Bs[k]
        rhs = (delta - mu[k, k - 1] ** 2) * (Bs[k - 1] @ Bs[k - 1])
        if lhs >= rhs - 1e-300:
            k += 1
        else:
            B[[k - 1, k]] = B[[k, k - 1]]
            U[[k - 1, k]] = U[[k, k - 1]]
            Bs, mu = gso(B)
            k = max(k - 1, 1)
    return B, U


def enumerate_short(basis: np.ndarray, r2: float) -> List[np.ndarray]:
    """All nonzero lattice vectors v = c @ basis with |v|_2^2 <= r2, one per
    +-pair.  Float Fincke-Pohst on an LLL-reduced copy."""
    B, U = lll_reduce(np.asarray(basis, dtype=float))
    n = B.shape[0]
    G = B @ B.T
    L = np.linalg.cholesky(G)  # G = L L^T
    out = []

    # enumerate c (in reduced coords): |c L|^2 <= r2, back-substitution
    def rec(level, partial, rem):
        # partial: accumulated contributions for columns > level
        if level < 0:
            c = np.array(partial_coords, dtype=np.int64)
            if np.any(c):
                out.append(c.copy())
            return
        # bounds for c_level from the triangular structure
        center = -sum(partial_coords[j] * L[j, level] for j in range(level + 1, n)) / L[level, level]
        half = math.sqrt(max(rem, 0.0)) / L[level, level]
        lo = math.ceil(center - half - 1e-9)
        hi = math.floor(center + half + 1e-9)
        for c in range(lo, hi + 1):
            d = (c - center) * L[level, level]
            rem2 = rem - d * d
            if rem2 < -1e-9:
                continue
            partial_coords[level] = c
            rec(level - 1, partial, max(rem2, 0.0))
        partial_coords[level] = 0

    # Cholesky here is lower-triangular for |c L|^2 = sum_k (sum_{j>=k} c_j L[j,k])^2;
    # enumerate from the last coordinate down
    partial_coords = [0] * n
    rec(n - 1, None, r2 * (1 + 1e-12))
    # dedup +-: keep the lexicographically positive representative
    seen = {}
    for c in out:
        key = tuple(c) if next((x for x in c if x), 1) > 0 else tuple(-c)
        seen[key] = True
    res = [np.array(k, dtype=np.int64) @ U for k in seen]
    return res


def shortest_vector(basis: np.ndarray) -> Tuple[np.ndarray, float]:
    """Exact-by-enumeration shortest nonzero vector (coefficients, l2 norm)."""
    B, U = lll_reduce(np.asarray(basis, dtype=float))
    r2 = float(B[0] @ B[0]) * (1 + 1e-9)
    cands = enumerate_short(basis, r2)
    best, bn = None, math.inf
    A = np.asarray(basis, dtype=float)
    for c in cands:
        v = c @ A
        nn = float(v @ v)
        if nn < bn:
            best, bn = c, nn
    return best, math.sqrt(bn)


def min_sup_norm(basis: np.ndarray) -> float:
    """Minimum sup-norm over nonzero lattice vectors (exact by enumeration:
    any sup-norm minimizer has l2 norm <= sqrt(n) * supmin)."""
    n = np.asarray(basis).shape[0]
    c, l2 = shortest_vector(basis)
    sup0 = float(np.max(np.abs(c @ np.asarray(basis, dtype=float))))
    cands = enumerate_short(basis, n * sup0 * sup0 * (1 + 1e-9))
    A = np.asarray(basis, dtype=float)
    return min(float(np.max(np.abs(c @ A))) for c in cands)


def tiled_box_candidates(M: np.ndarray, logs: np.ndarray, mu: float,
                         slack: float = 0.05):
    """Coefficient vectors of all lattice points x (one per +- pair) whose
    norm satisfies log|N(x)| <= n*mu, complete modulo translation by the
    log-lattice `logs` (rows): its fundamental cell is tiled into slabs so
    each search box stays O(1) even for astronomically skewed cells."""
    n = M.shape[0]
    Js = [max(1, int(math.ceil(float(np.max(np.abs(l))) / 0.6))) for l in logs]
    seen = set()
    for idx in np.ndindex(*Js):
        shift = mu * np.ones(n)
        half = np.zeros(n)
        for l, j, J in zip(logs, idx, Js):
            shift = shift + ((j + 0.5) / J) * l
            half = half + np.abs(l) / (2 * J)
        scales = np.exp(-shift)
        rows = M * scales[None, :]
        B = float(np.exp(np.max(half))) * (1 + slack)
        for c in enumerate_short(rows, n * B * B):
            v = c @ rows
            if np.max(np.abs(v)) > B:
                continue
            key = tuple(int(x) for x in c)
            lead = next((x for x in key if x != 0), 0)
            if lead < 0:
                key = tuple(-x for x in key)
            if key in seen:
                continue
            seen.add(key)
            yield np.array(key, dtype=object)


def enumerate_gram_short(G: Sequence[Sequence[int]], bound: int) -> List[Tuple[int, ...]]:
    """All nonzero integer c (one per +-pair) with c G c^T <= bound, for an
    exact positive-definite integer Gram matrix.  Rational Cholesky keeps the
    search bounds exact enough; the final test is exact integer arithmetic."""
    n = len(G)
    Gf = np.array([[float(x) for x in row] for row in G])
    L = np.linalg.cholesky(Gf)
    out = []
    coords = [0] * n

    def form(c):
        return sum(c[i] * G[i][j] * c[j] for i in range(n) for j in range(n))

    def rec(level, rem):
        if level < 0:
            c = tuple(coords)
            if any(c) and form(c) <= bound:
                out.append(c)
            return
        center = -sum(coords[j] * L[j, level] for j in range(level + 1, n)) / L[level, level]
        half = math.sqrt(max(rem, 0.0)) / L[level, level]
        lo = math.ceil(center - half - 1e-6)
        hi = math.floor(center + half + 1e-6)
        for c in range(lo, hi + 1):
            d = (c - center) * L[level, level]
            coords[level] = c
            rec(level - 1, rem - d * d + 1e-9)
        coords[level] = 0

    rec(n - 1, float(bound) * (1 + 1e-9) + 1e-6)
    seen = {}
    for c in out:
        key = c if next((x for x in c if x), 1) > 0 else tuple(-x for x in c)
        seen[key] = True
    return list(seen)
