"""The three modular S-matrix constructions.

* Kac-Peterson: integrable level-k labels, sum over the full Weyl group.
* Principal (FKW): pairs of alcove-regular weights at levels p and q; the
  raw entry is a product of two Weyl sums times a cross phase
  ``exp(2 pi i [(nu, eta') + (eta, nu')])``.  Without the cross phase the
  matrix is not unitary (rows of identified labels collapse).
* Subregular: the eta-side Weyl sum degenerates to a sum over the half group
  ``{y : y(alpha_*) > 0}`` weighted by ``<y(alpha_*), x> / <alpha_*, x>``.
  The kernel must be fed the conservative weights ``e_i = y_i(eta_i)`` where
  ``y_i`` throws the wall root of ``eta_i`` onto ``alpha_*`` (``theta`` onto
  ``-alpha_*`` for the affine wall); with those arguments the kernel is
  independent of the probe ``x`` and the assembled matrix is unitary.

All Weyl-sum exponents are exact rationals with a fixed denominator, reduced
mod 1 and looked up in a table of roots of unity, so streaming large groups
accumulates integers and adds no floating-point drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .affine import (
    AdmissibleLevel,
    PrincipalLabel,
    SubregularLabel,
    alpha_star,
    enumerate_P_plus_k,
    principal_labels,
    subregular_labels,
)
from .liealg import Root, RootSystem, Weight, WeylElement

__all__ = [
    "SMatrix",
    "SMatrixError",
    "kac_peterson",
    "fkw_principal",
    "degenerate_kernel",
    "subregular_S",
    "default_probe",
    "alternate_probe",
]

NORMALIZATION_TOL = 1e-8


class SMatrixError(ValueError):
    """Normalisation failed: S~ S~+ is not proportional to the identity."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


@dataclass
class SMatrix:
    labels: list
    entries: np.ndarray
    normalization: str
    provenance: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def unitarity_residual(self) -> float:
        s = self.entries
        return float(np.abs(s @ s.conj().T - np.eye(self.size)).max())

    def symmetry_residual(self) -> float:
        return float(np.abs(self.entries - self.entries.T).max())

    def phase_fixed(self, vacuum: int) -> "SMatrix":
        """Copy with the global phase chosen so S[v, v] is positive real."""
        svv = self.entries[vacuum, vacuum]
        if abs(svv) < 1e-14:
            raise SMatrixError("vacuum diagonal entry vanishes; cannot fix phase")
        phase = abs(svv) / svv
        return SMatrix(
            self.labels,
            self.entries * phase,
            self.normalization,
            {**self.provenance, "phase_fixed_at": vacuum},
        )


# -- exact exponent helpers ---------------------------------------------------


def _gram_int(rs: RootSystem) -> tuple[np.ndarray, int]:
    """Integer matrix D*G and the common denominator D of the Gram matrix."""
    den = 1
    for row in rs.gram:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    mg = np.array(
        [[int(x * den) for x in row] for row in rs.gram], dtype=np.int64
    )
    return mg, den


def _phase_table(den: int) -> np.ndarray:
    """e^{-2 pi i k / den} for k = 0..den-1."""
    return np.exp(-2j * np.pi * np.arange(den) / den)


def _weight_ints(ws: Sequence[Weight]) -> np.ndarray:
    arr = []
    for w in ws:
        if not w.is_integral():
            raise SMatrixError("expected integral weight coordinates")
        arr.append([int(c) for c in w.coords])
    return np.array(arr, dtype=np.int64)


def _alternating_sum_matrix(
    rs: RootSystem, left: np.ndarray, right: np.ndarray, coef: Fraction
) -> np.ndarray:
    """``A[i,j] = sum_w eps(w) exp(-2 pi i coef (w(left_i), right_j))``.

    One pass over the Weyl group; the left vectors ride along the orbit walk
    so no matrices are multiplied.  Exponents are bucketed as integers mod
    the table size.
    """
    mg, dg = _gram_int(rs)
    n = rs.rank
    den = coef.denominator * dg
    num = coef.numerator
    u = (mg @ right.T).T  # (m, n) integer: pairing (v, right_j) = v . u_j / dg
    nl, m = left.shape[0], right.shape[0]
    acc = np.zeros((nl, m, den), dtype=np.int64)
    cartan = rs.cartan_matrix

    rho = tuple(1 for _ in range(n))
    stack = [(rho, 1, [tuple(int(c) for c in left[i]) for i in range(nl)])]
    while stack:
        v, parity, vecs = stack.pop()
        for i in range(nl):
            vi = vecs[i]
            for j in range(m):
                dot = 0
                uj = u[j]
                for a in range(n):
                    dot += vi[a] * uj[a]
                acc[i, j, (num * dot) % den] += parity
        for k in range(n - 1, -1, -1):
            if v[k] > 0:
                ak = cartan[k]
                vk = v[k]
                nv = tuple(c - vk * ak[t] for t, c in enumerate(v))
                if next(t for t, c in enumerate(nv) if c < 0) == k:
                    stack.append(
                        (
                            nv,
                            -parity,
                            [
                                tuple(c - x[k] * ak[t] for t, c in enumerate(x))
                                for x in vecs
                            ],
                        )
                    )
    table = _phase_table(den)
    return np.einsum("ijd,d->ij", acc, table)


def _cross_phase(rs: RootSystem, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``P[i,j] = exp(2 pi i [(a_i, b_j) + (b_i... )])`` one-sided; callers combine."""
    mg, dg = _gram_int(rs)
    dots = (a @ mg @ b.T) % dg  # exponent (a_i, b_j) mod 1 times dg
    return np.exp(2j * np.pi * dots / dg)


def _normalize(raw: np.ndarray, labels, provenance) -> SMatrix:
    m = raw @ raw.conj().T
    diag = np.diag(m).real
    c = float(diag.mean())
    if c <= 0:
        raise SMatrixError("degenerate raw S-matrix", residual=float("inf"))
    off = np.abs(m - c * np.eye(len(labels))).max()
    if off > NORMALIZATION_TOL * c:
        raise SMatrixError(
            f"S~S~+ is not proportional to the identity (relative residual "
            f"{off / c:.3e}); the label set or identification is wrong",
            residual=off / c,
        )
    s = raw / math.sqrt(c)
    sm = SMatrix(list(labels), s, "unitary", provenance)
    provenance["unitarity_residual"] = sm.unitarity_residual()
    provenance["normalization_constant"] = c
    return sm


# -- Kac-Peterson --------------------------------------------------------------


def kac_peterson(rs: RootSystem, k: int) -> SMatrix:
    """Integrable level-k S-matrix over the labels P_+^k.

    ``S = i^{|Delta_+|} |P/(k+h)Q_check|^{-1/2} sum_w eps(w)
    e^{-2 pi i (w(lam+rho), mu+rho)/(k+h)}``.
    """
    if k < 0:
        raise SMatrixError("level must be a non-negative integer")
    labels = enumerate_P_plus_k(rs, k)
    n = k + rs.dual_coxeter
    rho = rs.weyl_vector
    shifted = _weight_ints([lam + rho for lam in labels])
    a = _alternating_sum_matrix(rs, shifted, shifted, Fraction(1, n))
    index = n ** rs.rank * rs.index_P_mod_Qcheck
    pref = (1j) ** len(rs.positive_roots) / math.sqrt(index)
    entries = pref * a
    prov = {
        "constructor": "kac_peterson",
        "type": str(rs.cartan_type),
        "level": k,
        "vacuum": 0,
    }
    sm = SMatrix(list(labels), entries, "unitary", prov)
    resid = sm.unitarity_residual()
    if resid > 1e-9 or sm.symmetry_residual() > 1e-9:
        raise SMatrixError("Kac-Peterson matrix failed its unitarity contract", residual=resid)
    prov["unitarity_residual"] = resid
    return sm


# -- principal (FKW) -----------------------------------------------------------


def fkw_principal(lv: AdmissibleLevel) -> SMatrix:
    """Principal admissible S-matrix on pairs (nu, eta), normalised to unitary."""
    rs = lv.root_system
    labels = principal_labels(lv)
    nus = _weight_ints([l.nu for l in labels])
    etas = _weight_ints([l.eta for l in labels])
    p, q = lv.p, lv.q
    f_nu = _alternating_sum_matrix(rs, nus, nus, Fraction(q, p))
    f_eta = _alternating_sum_matrix(rs, etas, etas, Fraction(p, q))
    cross = _cross_phase(rs, nus, etas) * _cross_phase(rs, etas, nus)
    raw = cross * f_nu * f_eta
    prov = {
        "constructor": "fkw_principal",
        "type": str(rs.cartan_type),
        "p": p,
        "q": q,
        "vacuum": 0,
        "nu_factor": f_nu,
        "eta_factor": f_eta,
    }
    return _normalize(raw, labels, prov)


# -- subregular ----------------------------------------------------------------


def default_probe(rs: RootSystem) -> tuple[int, ...]:
    """Probe x with <alpha_i, x> = i (on simple-root coordinates)."""
    return tuple(range(1, rs.rank + 1))


def alternate_probe(rs: RootSystem) -> tuple[int, ...]:
    """Second probe <alpha_i, x> = 2i + 1, used by independence checks."""
    return tuple(2 * i + 1 for i in range(1, rs.rank + 1))


def _element_mapping(rs: RootSystem, src: Weight, dst: Weight) -> WeylElement:
    """Some w with w(src) = dst, by BFS over the (small) W-orbit of src."""
    from collections import deque

    start = src.coords
    if start == dst.coords:
        return rs.identity_element()
    seen: dict[tuple, tuple] = {start: ()}
    queue = deque([start])
    target = dst.coords
    while queue:
        v = queue.popleft()
        for i in range(rs.rank):
            u = rs.reflect_coords(i, v)
            if u in seen:
                continue
            seen[u] = (i, v)
            if u == target:
                word = []
                cur = u
                while seen[cur]:
                    i, prev = seen[cur]
                    word.append(i)
                    cur = prev
                w = rs.identity_element()
                for i in reversed(word):
                    w = rs.simple_reflection(i) * w
                # word was collected target-to-source, so the product above
                # is s_{i_last} ... s_{i_first} and maps src to dst
                return w
            queue.append(u)
    raise SMatrixError("weights are not in one Weyl orbit")


def conservative_weights(
    lv: AdmissibleLevel,
    labels: Sequence[SubregularLabel],
    alpha_st: Optional[Root] = None,
) -> tuple[list[Weight], list[int]]:
    """Conservative kernel arguments ``e_i = y_i(eta_i)`` and signs eps(y_i).

    ``y_i`` maps the wall root of eta_i to alpha_* (finite wall) or theta to
    -alpha_* (affine wall); found per wall by a root-orbit walk.
    """
    rs = lv.root_system
    if alpha_st is None:
        alpha_st = alpha_star(rs)
    star_w = alpha_st.weight
    theta = rs.highest_root.weight
    needed = sorted(set(l.wall_id for l in labels))
    found: dict[int, WeylElement] = {}
    for wall in needed:
        src = theta if wall == 0 else rs.simple_roots[wall - 1].weight
        tgt = -star_w if wall == 0 else star_w
        found[wall] = _element_mapping(rs, src, tgt)
    ws = [found[l.wall_id] for l in labels]
    return [w.act(l.eta) for w, l in zip(ws, labels)], [w.length_parity for w in ws]


def _half_group_kernel_matrix(
    rs: RootSystem,
    alpha_st: Root,
    x_probe: Sequence[int],
    p: int,
    q: int,
    left: np.ndarray,
    right: np.ndarray,
) -> np.ndarray:
    """``K[i,j] = sum_{y(alpha_*)>0} eps(y) <y(alpha_*),x>/<alpha_*,x>
    e^{-2 pi i (p/q)(y(left_i), right_j)}``.

    Single orbit walk with the alpha_* root riding along in root coordinates
    (positive iff all coordinates >= 0); integer exponent bucketing.
    """
    mg, dg = _gram_int(rs)
    n = rs.rank
    den = Fraction(p, q).denominator * dg
    num = Fraction(p, q).numerator
    u = (mg @ right.T).T
    nl, m = left.shape[0], right.shape[0]
    acc = np.zeros((nl, m, den), dtype=np.int64)
    cartan = rs.cartan_matrix
    x = tuple(int(c) for c in x_probe)
    star_rc = tuple(int(c) for c in rs.weight_to_root(alpha_st.weight))
    w0 = sum(a * b for a, b in zip(star_rc, x))
    if w0 == 0:
        raise SMatrixError("probe x is orthogonal to alpha_*")

    rho = tuple(1 for _ in range(n))
    seeds = [tuple(int(c) for c in left[i]) for i in range(nl)]
    stack = [(rho, 1, star_rc, seeds)]
    while stack:
        v, parity, arc, vecs = stack.pop()
        if all(c >= 0 for c in arc):
            wt = parity * sum(a * b for a, b in zip(arc, x))
            for i in range(nl):
                vi = vecs[i]
                for j in range(m):
                    dot = 0
                    uj = u[j]
                    for a in range(n):
                        dot += vi[a] * uj[a]
                    acc[i, j, (num * dot) % den] += wt
        for k in range(n - 1, -1, -1):
            if v[k] > 0:
                ak = cartan[k]
                vk = v[k]
                nv = tuple(c - vk * ak[t] for t, c in enumerate(v))
                if next(t for t, c in enumerate(nv) if c < 0) == k:
                    # reflect the root coordinates of y(alpha_*):
                    # r'_k = r_k - sum_i r_i a_{ik}
                    pairing = sum(arc[t] * cartan[t][k] for t in range(n))
                    narc = tuple(
                        c - pairing * int(t == k) for t, c in enumerate(arc)
                    )
                    stack.append(
                        (
                            nv,
                            -parity,
                            narc,
                            [
                                tuple(c - xv[k] * ak[t] for t, c in enumerate(xv))
                                for xv in vecs
                            ],
                        )
                    )
    table = _phase_table(den)
    return np.einsum("ijd,d->ij", acc, table) / w0


def degenerate_kernel(
    rs: RootSystem,
    alpha_st: Root,
    x_probe: Sequence[int],
    p: int,
    q: int,
    eta: Weight,
    eta_p: Weight,
) -> complex:
    """One entry of the degenerate half-group kernel.

    The sum runs over ``{y : y(alpha_*) in Delta_+}`` with the weight factor
    ``<y(alpha_*), x>/<alpha_*, x>``; on conservative weights the value does
    not depend on the probe.
    """
    left = _weight_ints([eta])
    right = _weight_ints([eta_p])
    k = _half_group_kernel_matrix(rs, alpha_st, x_probe, p, q, left, right)
    return complex(k[0, 0])


def subregular_S(
    lv: AdmissibleLevel,
    alpha_st: Optional[Root] = None,
    x_probe: Optional[Sequence[int]] = None,
) -> SMatrix:
    """Subregular S-matrix: degenerate kernel times the full-Weyl nu factor.

    Entries ``eps(y_i) eps(y_j) e^{2 pi i [(e_i, nu_j) + (nu_i, e_j)]}
    K(e_i, e_j) F(nu_i, nu_j)`` over the conservative weights e_i, then
    normalised to unitary.
    """
    rs = lv.root_system
    if alpha_st is None:
        alpha_st = alpha_star(rs)
    if x_probe is None:
        x_probe = default_probe(rs)
    labels = subregular_labels(lv, alpha_st)
    if not labels:
        raise SMatrixError(
            f"empty subregular label set for {rs.cartan_type} (p,q)=({lv.p},{lv.q})"
        )
    cons, eps_y = conservative_weights(lv, labels, alpha_st)
    es = _weight_ints(cons)
    nus = _weight_ints([l.nu for l in labels])
    p, q = lv.p, lv.q
    kern = _half_group_kernel_matrix(rs, alpha_st, x_probe, p, q, es, es)
    f_nu = _alternating_sum_matrix(rs, nus, nus, Fraction(q, p))
    cross = _cross_phase(rs, es, nus) * _cross_phase(rs, nus, es)
    sign = np.array(eps_y, dtype=float)
    raw = sign[:, None] * sign[None, :] * cross * kern * f_nu
    nu_degenerate = len({tuple(l.nu.coords) for l in labels}) == 1
    prov = {
        "constructor": "subregular_S",
        "type": str(rs.cartan_type),
        "p": p,
        "q": q,
        "vacuum": 0,
        "alpha_star_node": alpha_st.root_coords.index(1) + 1,
        "probe": tuple(x_probe),
        "nu_factor_degenerate": nu_degenerate,
        "kernel": kern,
        "nu_factor": f_nu,
    }
    return _normalize(raw, labels, prov)


def subregular_S_streamed(
    lv: AdmissibleLevel,
    alpha_st: Optional[Root] = None,
    x_probe: Optional[Sequence[int]] = None,
    checkpoint: Optional[str] = None,
    checkpoint_every: int = 10_000_000,
    chunk_depth: int = 3,
    progress: bool = False,
    workers: int = 1,
) -> SMatrix:
    """Subregular S via the chunked streamed kernel (the E8 long-run path).

    When every label shares one nu (p = h_check) the nu factor is a global
    constant and is absorbed by the normalisation, which is what makes the
    E8 job a single pass over the Weyl group.
    """
    rs = lv.root_system
    if alpha_st is None:
        alpha_st = alpha_star(rs)
    kern, labels, eps_y = streamed_half_group_kernel(
        lv,
        alpha_st,
        x_probe,
        checkpoint=checkpoint,
        checkpoint_every=checkpoint_every,
        chunk_depth=chunk_depth,
        progress=progress,
        workers=workers,
    )
    cons, _ = conservative_weights(lv, labels, alpha_st)
    es = _weight_ints(cons)
    nus = _weight_ints([l.nu for l in labels])
    nu_degenerate = len({tuple(l.nu.coords) for l in labels}) == 1
    if nu_degenerate:
        f_nu = np.ones((len(labels), len(labels)), dtype=complex)
    else:
        f_nu = _alternating_sum_matrix(rs, nus, nus, Fraction(lv.q, lv.p))
    cross = _cross_phase(rs, es, nus) * _cross_phase(rs, nus, es)
    sign = np.array(eps_y, dtype=float)
    raw = sign[:, None] * sign[None, :] * cross * kern * f_nu
    prov = {
        "constructor": "subregular_S_streamed",
        "type": str(rs.cartan_type),
        "p": lv.p,
        "q": lv.q,
        "vacuum": 0,
        "alpha_star_node": alpha_st.root_coords.index(1) + 1,
        "nu_factor_degenerate": nu_degenerate,
    }
    return _normalize(raw, labels, prov)


# -- long-running streamed kernel (E8 scale) -----------------------------------


def _orbit_chunk_roots(rs: RootSystem, seeds, star_rc, depth: int):
    """Split the orbit walk into chunks: single nodes above ``depth``, whole
    subtrees from ``depth`` down.  Every group element lands in exactly one
    chunk."""
    n = rs.rank
    cartan = rs.cartan_matrix
    rho = tuple(1 for _ in range(n))
    frontier = [(rho, 1, star_rc, [tuple(s) for s in seeds])]
    for _ in range(depth):
        out = []
        for v, parity, arc, vecs in frontier:
            yield (v, parity, arc, vecs, False)
            for k in range(n):
                if v[k] > 0:
                    ak = cartan[k]
                    nv = tuple(c - v[k] * ak[t] for t, c in enumerate(v))
                    if next(t for t, c in enumerate(nv) if c < 0) == k:
                        pairing = sum(arc[t] * cartan[t][k] for t in range(n))
                        narc = tuple(
                            c - pairing * int(t == k) for t, c in enumerate(arc)
                        )
                        out.append(
                            (
                                nv,
                                -parity,
                                narc,
                                [
                                    tuple(c - x[k] * ak[t] for t, c in enumerate(x))
                                    for x in vecs
                                ],
                            )
                        )
        frontier = out
    yield from ((v, p_, a, vc, True) for v, p_, a, vc in frontier)


def streamed_half_group_kernel(
    lv: AdmissibleLevel,
    alpha_st: Optional[Root] = None,
    x_probe: Optional[Sequence[int]] = None,
    checkpoint: Optional[str] = None,
    checkpoint_every: int = 10_000_000,
    chunk_depth: int = 3,
    progress: bool = False,
    workers: int = 1,
) -> tuple[np.ndarray, list[SubregularLabel], list[int]]:
    """Degenerate kernel matrix via a chunked, checkpointed Weyl walk.

    Intended for the E8 long run: the orbit tree is split into subtrees at
    ``chunk_depth``; workers own private integer accumulator tables that are
    merged per completed subtree (order-free associative reduction), and
    partial state goes to ``checkpoint`` (npz) so the run can resume.  Uses
    numba (nogil) when importable, else a pure-Python walk.
    """
    import threading

    rs = lv.root_system
    if alpha_st is None:
        alpha_st = alpha_star(rs)
    if x_probe is None:
        x_probe = default_probe(rs)
    labels = subregular_labels(lv, alpha_st)
    cons, eps_y = conservative_weights(lv, labels, alpha_st)
    es = _weight_ints(cons)
    mg, dg = _gram_int(rs)
    p, q = lv.p, lv.q
    den = Fraction(p, q).denominator * dg
    num = Fraction(p, q).numerator
    u = (mg @ es.T).T
    nl = es.shape[0]
    star_rc = tuple(int(c) for c in rs.weight_to_root(alpha_st.weight))
    x = tuple(int(c) for c in x_probe)
    w0 = sum(a * b for a, b in zip(star_rc, x))
    if w0 == 0:
        raise SMatrixError("probe x is orthogonal to alpha_*")

    chunks = list(
        _orbit_chunk_roots(rs, [tuple(int(c) for c in row) for row in es], star_rc, chunk_depth)
    )
    acc = np.zeros((nl, nl, den), dtype=np.int64)
    done = np.zeros(len(chunks), dtype=bool)
    count = 0
    if checkpoint and Path(checkpoint).exists():
        data = np.load(checkpoint)
        acc = data["acc"]
        done = data["done"]
        count = int(data["count"])

    cartan = np.array(rs.cartan_matrix, dtype=np.int64)
    xv = np.array(x, dtype=np.int64)
    uv = np.ascontiguousarray(u)
    walker = _chunk_walker()

    todo = [ci for ci in range(len(chunks)) if not done[ci]]
    lock = threading.Lock()
    state = {"count": count, "since": 0, "cursor": 0, "error": None}

    def save():
        if checkpoint:
            np.savez_compressed(checkpoint, acc=acc, done=done, count=state["count"])

    def worker():
        nonlocal acc
        local = np.zeros_like(acc)
        while True:
            with lock:
                if state["error"] is not None or state["cursor"] >= len(todo):
                    return
                ci = todo[state["cursor"]]
                state["cursor"] += 1
            v, parity, arc, vecs, is_leaf = chunks[ci]
            local[:] = 0
            visited = walker(
                np.array(v, dtype=np.int64),
                np.int64(parity),
                np.array(arc, dtype=np.int64),
                np.array(vecs, dtype=np.int64),
                cartan,
                xv,
                uv,
                np.int64(num),
                np.int64(den),
                local,
                bool(is_leaf),
            )
            with lock:
                if visited < 0:
                    state["error"] = SMatrixError("orbit walk exceeded its stack bound")
                    return
                acc += local
                done[ci] = True
                state["count"] += int(visited)
                state["since"] += int(visited)
                if checkpoint and state["since"] >= checkpoint_every:
                    save()
                    state["since"] = 0
                if progress:
                    print(
                        f"chunk {ci + 1}/{len(chunks)}: {state['count']} elements",
                        flush=True,
                    )

    nworkers = max(1, int(workers))
    if nworkers == 1:
        worker()
    else:
        threads = [threading.Thread(target=worker) for _ in range(nworkers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if state["error"] is not None:
        raise state["error"]
    save()

    table = _phase_table(den)
    kern = np.einsum("ijd,d->ij", acc, table) / w0
    return kern, labels, eps_y


def _walk_chunk_py(v0, parity0, arc0, vecs0, cartan, xv, u, num, den, acc, descend):
    """Pure-Python subtree walk; mirrors the numba kernel exactly."""
    n = v0.shape[0]
    nl = vecs0.shape[0]
    stack = [(tuple(v0), int(parity0), tuple(arc0), [tuple(r) for r in vecs0])]
    visited = 0
    first = True
    while stack:
        v, parity, arc, vecs = stack.pop()
        visited += 1
        if all(c >= 0 for c in arc):
            wt = parity * sum(a * b for a, b in zip(arc, xv))
            for i in range(nl):
                vi = vecs[i]
                for j in range(nl):
                    dot = 0
                    for a in range(n):
                        dot += vi[a] * u[j][a]
                    acc[i, j, (num * dot) % den] += wt
        if first and not descend:
            break
        first = False
        for k in range(n - 1, -1, -1):
            if v[k] > 0:
                ak = cartan[k]
                nv = tuple(c - v[k] * ak[t] for t, c in enumerate(v))
                neg = -1
                for t, c in enumerate(nv):
                    if c < 0:
                        neg = t
                        break
                if neg == k:
                    pairing = sum(arc[t] * cartan[t][k] for t in range(n))
                    narc = tuple(c - pairing * int(t == k) for t, c in enumerate(arc))
                    stack.append(
                        (
                            nv,
                            -parity,
                            narc,
                            [tuple(c - r[k] * ak[t] for t, c in enumerate(r)) for r in vecs],
                        )
                    )
    return visited


def _chunk_walker():
    """Return the compiled subtree walker, or the Python fallback."""
    try:
        from numba import njit
    except ImportError:
        return _walk_chunk_py

    @njit(cache=True, nogil=True)
    def walk(v0, parity0, arc0, vecs0, cartan, xv, u, num, den, acc, descend):
        n = v0.shape[0]
        nl = vecs0.shape[0]
        maxdepth = 2048
        vs = np.zeros((maxdepth, n), dtype=np.int64)
        arcs = np.zeros((maxdepth, n), dtype=np.int64)
        pars = np.zeros(maxdepth, dtype=np.int64)
        mats = np.zeros((maxdepth, nl, n), dtype=np.int64)
        vs[0, :] = v0
        arcs[0, :] = arc0
        pars[0] = parity0
        mats[0, :, :] = vecs0
        top = 1
        visited = 0
        first = True
        while top > 0:
            top -= 1
            v = vs[top].copy()
            arc = arcs[top].copy()
            parity = pars[top]
            vecs = mats[top].copy()
            visited += 1
            pos = True
            for t in range(n):
                if arc[t] < 0:
                    pos = False
                    break
            if pos:
                wt = 0
                for t in range(n):
                    wt += arc[t] * xv[t]
                wt *= parity
                for i in range(nl):
                    for j in range(nl):
                        dot = 0
                        for a in range(n):
                            dot += vecs[i, a] * u[j, a]
                        acc[i, j, (num * dot) % den] += wt
            if first and not descend:
                break
            first = False
            for k in range(n - 1, -1, -1):
                if v[k] > 0:
                    neg = -1
                    for t in range(n):
                        c = v[t] - v[k] * cartan[k, t]
                        if c < 0:
                            neg = t
                            break
                    if neg == k:
                        if top >= maxdepth:
                            return -1
                        for t in range(n):
                            vs[top, t] = v[t] - v[k] * cartan[k, t]
                        pairing = 0
                        for t in range(n):
                            pairing += arc[t] * cartan[t, k]
                        for t in range(n):
                            arcs[top, t] = arc[t]
                        arcs[top, k] -= pairing
                        pars[top] = -parity
                        for i in range(nl):
                            for t in range(n):
                                mats[top, i, t] = vecs[i, t] - vecs[i, k] * cartan[k, t]
                        top += 1
        return visited

    return walk
