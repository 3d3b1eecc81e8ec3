"""Linear algebra over GF(2) with vectors packed into Python ints.

Bit ``k`` of a vector is coordinate ``k``.
"""

from __future__ import annotations

from typing import Iterable, Sequence


def pack(bits: Sequence[int]) -> int:
    v = 0
    for k, b in enumerate(bits):
        if b:
            v |= 1 << k
    return v


def unpack(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> k) & 1 for k in range(n))


def echelon(vectors: Iterable[int]) -> dict[int, int]:
    """Reduced basis keyed by pivot bit (the lowest set bit of each row)."""
    basis: dict[int, int] = {}
    for v in vectors:
        for p, row in basis.items():
            if v >> p & 1:
                v ^= row
        if v:
            p = (v & -v).bit_length() - 1
            for q in basis:
                if basis[q] >> p & 1:
                    basis[q] ^= v
            basis[p] = v
    return basis


def rank(vectors: Iterable[int]) -> int:
    return len(echelon(vectors))


def null_space(vectors: Iterable[int], n: int) -> list[int]:
    """Basis of {a : a . v = 0 for every v} in GF(2)^n."""
    basis = echelon(vectors)
    out = []
    for f in range(n):
        if f in basis:
            continue
        a = 1 << f
        for p, row in basis.items():
            if row >> f & 1:
                a |= 1 << p
        out.append(a)
    return out


def dot(a: int, b: int) -> int:
    return bin(a & b).count("1") & 1


def coset_equations(rows: Sequence[int], n: int) -> list[tuple[int, int]] | None:
    """Equations ``(mask, rhs)`` cutting out ``rows`` if they form an affine subspace.

    Returns None when the rows are not a coset of a linear subspace.
    """
    rows = sorted(set(rows))
    if not rows:
        return None
    t0 = rows[0]
    diffs = [t ^ t0 for t in rows]
    if len(rows) != 1 << rank(diffs):
        return None
    return [(a, dot(a, t0)) for a in null_space(diffs, n)]


def solve_affine(equations: Iterable[tuple[int, int]], n: int) -> tuple[int, ...] | None:
    """One solution of the system (free coordinates set to 0), or None."""
    basis: dict[int, tuple[int, int]] = {}
    for mask, rhs in equations:
        for p, (row, r) in basis.items():
            if mask >> p & 1:
                mask ^= row
                rhs ^= r
        if not mask:
            if rhs:
                return None
            continue
        p = (mask & -mask).bit_length() - 1
        for q in list(basis):
            row, r = basis[q]
            if row >> p & 1:
                basis[q] = (row ^ mask, r ^ rhs)
        basis[p] = (mask, rhs)
    x = [0] * n
    for p, (row, r) in basis.items():
        # reduced form: the pivot is the only pivot column in its row, free columns are 0
        x[p] = r
    return tuple(x)


def count_solutions(equations: Sequence[tuple[int, int]], n: int) -> int:
    if solve_affine(equations, n) is None:
        return 0
    return 1 << (n - rank(m for m, _ in equations))
