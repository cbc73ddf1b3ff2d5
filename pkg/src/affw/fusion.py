"""Verlinde fusion coefficients from a unitary S-matrix, plus ring comparison.

Integrality of the rounded coefficients is treated as a hard correctness
gate: it cross-checks every upstream decision (label sets, identifications,
normalisation), so violations raise instead of warning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .modular import SMatrix

__all__ = ["FusionTable", "FusionError", "find_vacuum", "verlinde", "fusion_ring_isomorphic"]

INTEGRALITY_TOL = 1e-6


class FusionError(ValueError):
    pass


@dataclass
class FusionTable:
    labels: list
    coefficients: np.ndarray        # N[a, b, c], non-negative integers
    vacuum: int
    quantum_dimensions: np.ndarray  # d_a = S[v,a]/S[v,v]
    max_coefficient: int
    rounding_residual: float

    @property
    def size(self) -> int:
        return self.coefficients.shape[0]

    def check_axioms(self):
        n = self.coefficients
        v = self.vacuum
        size = self.size
        if not np.array_equal(n[v], np.eye(size, dtype=n.dtype)):
            raise FusionError("N_{v a}^b != delta_a^b")
        if not np.array_equal(n, n.transpose(1, 0, 2)):
            raise FusionError("fusion coefficients not symmetric in (a, b)")
        lhs = np.einsum("abe,ecd->abcd", n, n)
        rhs = np.einsum("bce,aed->abcd", n, n)
        if not np.array_equal(lhs, rhs):
            raise FusionError("fusion coefficients are not associative")


def _verlinde_raw(s: np.ndarray, vacuum: int) -> np.ndarray:
    """N_{ab}^c = sum_j S_aj S_bj conj(S_cj) / S_vj."""
    with np.errstate(divide="raise", invalid="raise"):
        inv = 1.0 / s[vacuum]
    return np.einsum("aj,bj,cj,j->abc", s, s, s.conj(), inv)


def _candidate_vacua(s: np.ndarray) -> list[int]:
    out = []
    for v in range(s.shape[0]):
        if np.abs(s[v]).min() < 1e-12:
            continue
        raw = _verlinde_raw(s, v)
        rounded = np.round(raw.real)
        if (
            np.abs(raw - rounded).max() < INTEGRALITY_TOL
            and rounded.min() > -INTEGRALITY_TOL
        ):
            out.append(v)
    return out


def find_vacuum(s: SMatrix) -> int:
    """Index against which Verlinde yields non-negative integers.

    Simple-current twists can make several rows pass the integrality scan;
    ties are broken in favour of a row with positive quantum dimensions, and
    failing that by the constructor's declared vacuum.  Anything still
    ambiguous is a structural error upstream.
    """
    if s.normalization != "unitary":
        raise FusionError("find_vacuum needs a unitary S-matrix")
    cands = _candidate_vacua(s.entries)
    if not cands:
        raise FusionError("no vacuum candidate: wrong label set or normalisation")
    if len(cands) == 1:
        return cands[0]
    positive = [
        v
        for v in cands
        if np.all((s.entries[v] / s.entries[v, v]).real > 1e-9)
        and np.abs((s.entries[v] / s.entries[v, v]).imag).max() < 1e-9
    ]
    if len(positive) == 1:
        return positive[0]
    declared = s.provenance.get("vacuum")
    if declared in cands:
        return declared
    raise FusionError(f"vacuum is not unique: candidates {cands}")


def verlinde(s: SMatrix, vacuum: Optional[int] = None) -> FusionTable:
    if vacuum is None:
        vacuum = find_vacuum(s)
    raw = _verlinde_raw(s.entries, vacuum)
    rounded = np.round(raw.real)
    residual = float(np.abs(raw - rounded).max())
    if residual >= INTEGRALITY_TOL:
        raise FusionError(f"fusion coefficients not integral (residual {residual:.3e})")
    if rounded.min() < -INTEGRALITY_TOL:
        raise FusionError("negative fusion coefficient")
    coeffs = rounded.astype(np.int64)
    coeffs[coeffs < 0] = 0
    dims = (s.entries[vacuum] / s.entries[vacuum, vacuum]).real
    table = FusionTable(
        labels=list(s.labels),
        coefficients=coeffs,
        vacuum=vacuum,
        quantum_dimensions=dims,
        max_coefficient=int(coeffs.max()),
        rounding_residual=residual,
    )
    table.check_axioms()
    return table


def charge_conjugation(s: SMatrix, tol: float = 1e-9) -> np.ndarray:
    """Permutation from S^2 (on a phase-fixed matrix); errors if not one."""
    m = s.entries @ s.entries
    perm = np.full(s.size, -1, dtype=int)
    for a in range(s.size):
        row = np.abs(m[a])
        b = int(row.argmax())
        if abs(m[a, b] - 1) > tol or row.sum() - row[b] > tol:
            raise FusionError("S^2 is not a permutation matrix")
        perm[a] = b
    if sorted(perm) != list(range(s.size)):
        raise FusionError("S^2 permutation is not a bijection")
    return perm


def fusion_ring_isomorphic(f1: FusionTable, f2: FusionTable) -> Optional[list[int]]:
    """A vacuum-preserving relabelling with N1[a,b,c] = N2[s(a),s(b),s(c)], or None."""
    if f1.size != f2.size:
        return None
    n = f1.size
    n1, n2 = f1.coefficients, f2.coefficients

    def invariants(nt, dims, a):
        return (
            int(nt[a, a, a]),
            int(nt[a, a].sum()),
            int(nt[a].sum()),
            round(float(dims[a]), 6),
        )

    inv1 = [invariants(n1, f1.quantum_dimensions, a) for a in range(n)]
    inv2 = [invariants(n2, f2.quantum_dimensions, a) for a in range(n)]
    cand = [
        [b for b in range(n) if inv2[b] == inv1[a]] for a in range(n)
    ]
    if not all(cand):
        return None

    perm = [-1] * n
    used = [False] * n
    perm[f1.vacuum] = f2.vacuum
    used[f2.vacuum] = True
    order = sorted(
        (a for a in range(n) if a != f1.vacuum), key=lambda a: len(cand[a])
    )

    def consistent(a, assigned):
        for x in assigned:
            for c in assigned:
                if n1[a, x, c] != n2[perm[a], perm[x], perm[c]]:
                    return False
                if n1[x, a, c] != n2[perm[x], perm[a], perm[c]]:
                    return False
                if n1[x, c, a] != n2[perm[x], perm[c], perm[a]]:
                    return False
        return True

    def backtrack(idx, assigned):
        if idx == len(order):
            idxs = np.array(perm)
            return bool(np.array_equal(n1, n2[np.ix_(idxs, idxs, idxs)]))
        a = order[idx]
        for b in cand[a]:
            if used[b]:
                continue
            perm[a] = b
            used[b] = True
            if consistent(a, assigned) and backtrack(idx + 1, assigned + [a]):
                return True
            used[b] = False
            perm[a] = -1
        return False

    if backtrack(0, [f1.vacuum]):
        return perm
    return None
