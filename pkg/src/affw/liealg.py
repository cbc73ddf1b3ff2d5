"""Exact root-system, weight-lattice and Weyl-group machinery for the finite
simple Lie algebras.

Everything here is exact: weights are vectors of rationals in the
fundamental-weight basis (so the pairing with a simple coroot is a coordinate
read), roots additionally carry integer coordinates in the simple-root basis,
and Weyl elements are integer matrices acting on fundamental-weight
coordinates.  The bilinear form is normalised so the highest root has squared
length 2.

Weyl groups are never materialised: :func:`weyl_stream` walks the orbit tree
of the Weyl vector with a canonical-parent rule, which visits every group
element exactly once using memory proportional to the longest element.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

__all__ = [
    "CartanType",
    "LieAlgebraError",
    "RootSystem",
    "Root",
    "Weight",
    "WeylElement",
    "build_root_system",
    "inner_product",
    "weyl_stream",
    "dot_action",
    "exponents",
]


class LieAlgebraError(ValueError):
    """Invalid Cartan data or an operation applied outside its domain."""


_FAMILIES = "ABCDEFG"


@dataclass(frozen=True)
class CartanType:
    """A finite-type Cartan datum ``(family, rank)`` in Bourbaki numbering."""

    family: str
    rank: int

    def __post_init__(self):
        f, n = self.family, self.rank
        if f not in _FAMILIES:
            raise LieAlgebraError(f"unknown family {f!r}")
        ok = {
            "A": n >= 1,
            "B": n >= 2,
            "C": n >= 2,
            "D": n >= 3,
            "E": n in (6, 7, 8),
            "F": n == 4,
            "G": n == 2,
        }[f]
        if not ok:
            raise LieAlgebraError(f"invalid rank {n} for family {f}")

    def __str__(self):
        return f"{self.family}{self.rank}"

    @staticmethod
    def parse(name: str) -> "CartanType":
        name = name.strip()
        if len(name) < 2 or name[0].upper() not in _FAMILIES or not name[1:].isdigit():
            raise LieAlgebraError(f"cannot parse Cartan type {name!r}")
        return CartanType(name[0].upper(), int(name[1:]))

    def cartan_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Cartan matrix with ``a[i][j] = <alpha_i, alpha_j_check>``."""
        n = self.rank
        a = [[2 * (i == j) for j in range(n)] for i in range(n)]

        def bond(i, j, aij=-1, aji=-1):
            a[i][j] = aij
            a[j][i] = aji

        f = self.family
        if f in "ABC":
            for i in range(n - 1):
                bond(i, i + 1)
            if f == "B" and n >= 2:
                # alpha_{n-1} long, alpha_n short
                bond(n - 2, n - 1, -2, -1)
            if f == "C" and n >= 2:
                bond(n - 2, n - 1, -1, -2)
        elif f == "D":
            for i in range(n - 2):
                bond(i, i + 1)
            bond(n - 3, n - 1)
        elif f == "E":
            # Bourbaki: chain 1-3-4-5-...-n with node 2 attached to node 4.
            chain = [0] + list(range(2, n))
            for x, y in zip(chain, chain[1:]):
                bond(x, y)
            bond(1, 3)
        elif f == "F":
            bond(0, 1)
            bond(1, 2, -2, -1)
            bond(2, 3)
        elif f == "G":
            bond(0, 1, -1, -3)
        return tuple(tuple(row) for row in a)


@dataclass(frozen=True)
class Weight:
    """A vector in the fundamental-weight basis; entry ``i`` is ``<lam, alpha_i_check>``."""

    coords: tuple[Fraction, ...]

    @staticmethod
    def of(*coords) -> "Weight":
        return Weight(tuple(Fraction(c) for c in coords))

    @property
    def rank(self) -> int:
        return len(self.coords)

    def __add__(self, other: "Weight") -> "Weight":
        self._check(other)
        return Weight(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Weight") -> "Weight":
        self._check(other)
        return Weight(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Weight":
        return Weight(tuple(-a for a in self.coords))

    def __rmul__(self, c) -> "Weight":
        c = Fraction(c)
        return Weight(tuple(c * a for a in self.coords))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coords)

    def is_dominant(self) -> bool:
        return all(a >= 0 for a in self.coords)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.coords)

    def pairing(self, i: int) -> Fraction:
        """``<self, alpha_i_check>`` (a coordinate read)."""
        return self.coords[i]

    def _check(self, other: "Weight"):
        if len(self.coords) != len(other.coords):
            raise LieAlgebraError("rank mismatch between weights")


@dataclass(frozen=True)
class Root:
    """A root carrying both coordinate systems plus its height."""

    weight: Weight                     # fundamental-weight coordinates
    root_coords: tuple[int, ...]       # simple-root coordinates
    height: int


@dataclass(frozen=True)
class WeylElement:
    """Weyl group element as an integer matrix on fundamental-weight coordinates."""

    matrix: tuple[tuple[int, ...], ...]
    length_parity: int  # epsilon(w) = (-1)^{length}

    def act(self, lam: Weight) -> Weight:
        m = self.matrix
        return Weight(
            tuple(sum(m[r][c] * lam.coords[c] for c in range(len(m))) for r in range(len(m)))
        )

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        a, b = self.matrix, other.matrix
        n = len(a)
        prod = tuple(
            tuple(sum(a[r][k] * b[k][c] for k in range(n)) for c in range(n)) for r in range(n)
        )
        return WeylElement(prod, self.length_parity * other.length_parity)


def _identity_matrix(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(r == c) for c in range(n)) for r in range(n))


def _mat_inverse_fraction(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Exact inverse by Gauss-Jordan elimination."""
    n = len(m)
    aug = [[Fraction(m[r][c]) for c in range(n)] + [Fraction(int(r == c)) for c in range(n)]
           for r in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise LieAlgebraError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _det_fraction(m: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = Fraction(1) / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


@dataclass(frozen=True)
class RootSystem:
    """Root system data of a finite simple Lie algebra.

    The Gram matrix refers to the fundamental-weight basis, normalised so that
    ``(theta, theta) = 2``.
    """

    cartan_type: CartanType
    cartan_matrix: tuple[tuple[int, ...], ...]
    simple_root_norms_half: tuple[Fraction, ...]      # d_i = (alpha_i, alpha_i)/2
    gram: tuple[tuple[Fraction, ...], ...]            # (varpi_i, varpi_j)
    cartan_inverse: tuple[tuple[Fraction, ...], ...]
    simple_roots: tuple[Root, ...]
    positive_roots: tuple[Root, ...]                  # ordered by (height, root coords)
    highest_root: Root
    weyl_vector: Weight
    dual_coxeter: int
    comarks: tuple[int, ...]                          # <varpi_i, theta_check>
    exponents: tuple[int, ...]
    weyl_order: int
    index_P_mod_Q: int
    index_P_mod_Qcheck: int

    @property
    def rank(self) -> int:
        return self.cartan_type.rank

    @property
    def dimension(self) -> int:
        return 2 * len(self.positive_roots) + self.rank

    # -- basis conversions ------------------------------------------------

    def root_to_weight(self, root_coords: Sequence) -> Weight:
        """Weight coordinates of ``sum_i c_i alpha_i``."""
        a = self.cartan_matrix
        n = self.rank
        return Weight(
            tuple(sum(Fraction(root_coords[i]) * a[i][j] for i in range(n)) for j in range(n))
        )

    def weight_to_root(self, lam: Weight) -> tuple[Fraction, ...]:
        """Simple-root coordinates of ``lam``; exact, round-trips with root_to_weight."""
        ainv = self.cartan_inverse
        n = self.rank
        # lam = sum_i c_i alpha_i with f = A^T c, so c = A^{-T} f.
        return tuple(
            sum(ainv[j][i] * lam.coords[j] for j in range(n)) for i in range(n)
        )

    def fundamental_weight(self, i: int) -> Weight:
        return Weight(tuple(Fraction(int(i == j)) for j in range(self.rank)))

    def zero_weight(self) -> Weight:
        return Weight((Fraction(0),) * self.rank)

    # -- pairings ----------------------------------------------------------

    def bilinear(self, lam: Weight, mu: Weight) -> Fraction:
        """The normalised invariant form ``(lam, mu)``."""
        if lam.rank != self.rank or mu.rank != self.rank:
            raise LieAlgebraError("rank mismatch")
        g = self.gram
        return sum(
            lam.coords[i] * g[i][j] * mu.coords[j]
            for i in range(self.rank)
            for j in range(self.rank)
            if lam.coords[i] != 0 and mu.coords[j] != 0
        ) or Fraction(0)

    def coroot_pairing(self, lam: Weight, root: Root) -> Fraction:
        """``<lam, alpha_check>`` for a root ``alpha``."""
        num = sum(
            Fraction(c) * d * lam.coords[i]
            for i, (c, d) in enumerate(zip(root.root_coords, self.simple_root_norms_half))
        )
        half_norm = self._root_half_norm(root)
        return num / half_norm

    def _root_half_norm(self, root: Root) -> Fraction:
        return self.bilinear(root.weight, root.weight) / 2

    def level(self, lam: Weight) -> Fraction:
        """``<lam, theta_check>``."""
        return sum(Fraction(c) * x for c, x in zip(self.comarks, lam.coords)) or Fraction(0)

    # -- Weyl group --------------------------------------------------------

    def simple_reflection(self, i: int) -> WeylElement:
        # (s_i lam)_j = lam_j - lam_i a_{ij}, so column i of the matrix holds
        # delta_{ji} - a_{ij}.
        n = self.rank
        a = self.cartan_matrix
        mat = tuple(
            tuple(int(r == c) - (a[i][r] if c == i else 0) for c in range(n)) for r in range(n)
        )
        return WeylElement(mat, -1)

    def identity_element(self) -> WeylElement:
        return WeylElement(_identity_matrix(self.rank), 1)

    def reflect_coords(self, i: int, coords: tuple) -> tuple:
        """Apply ``s_i`` to fundamental-weight coordinates (any scalar type)."""
        a = self.cartan_matrix[i]
        ci = coords[i]
        return tuple(c - ci * a[j] for j, c in enumerate(coords))

    def longest_element(self) -> WeylElement:
        """w0, computed by sorting ``-rho`` back to the dominant chamber."""
        w = self.identity_element()
        coords = tuple(-c for c in self.weyl_vector.coords)
        while True:
            i = next((j for j, c in enumerate(coords) if c < 0), None)
            if i is None:
                return w
            coords = self.reflect_coords(i, coords)
            w = self.simple_reflection(i) * w
        # unreachable

    def to_dominant(self, lam: Weight) -> tuple[Weight, int]:
        """Dominant representative of ``W.lam`` and the sign of the word used."""
        coords = lam.coords
        sign = 1
        while True:
            i = next((j for j, c in enumerate(coords) if c < 0), None)
            if i is None:
                return Weight(coords), sign
            coords = self.reflect_coords(i, coords)
            sign = -sign


def _positive_root_closure(a: tuple[tuple[int, ...], ...]) -> list[tuple[int, ...]]:
    """All positive roots in simple-root coordinates, by height induction.

    ``beta + alpha_i`` is a root iff the alpha_i-string through beta does not
    end at beta, i.e. iff ``p - <beta, alpha_i_check> > 0`` where p is the
    number of steps down the string.
    """
    n = len(a)
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    known = set(simple)
    layers = [simple]
    while layers[-1]:
        new: list[tuple[int, ...]] = []
        for beta in layers[-1]:
            # <beta, alpha_i_check> = sum_j beta_j a_{ji}
            for i in range(n):
                pairing = sum(beta[j] * a[j][i] for j in range(n))
                p = 0
                down = beta
                while True:
                    down = tuple(
                        c - int(j == i) for j, c in enumerate(down)
                    )
                    if down in known:
                        p += 1
                    else:
                        break
                if p - pairing > 0:
                    up = tuple(c + int(j == i) for j, c in enumerate(beta))
                    if up not in known:
                        known.add(up)
                        new.append(up)
        layers.append(sorted(new))
    return [r for layer in layers for r in sorted(layer)]


def _symmetrizer(a: tuple[tuple[int, ...], ...]) -> tuple[Fraction, ...]:
    """d_i with d_j a_{ij} = d_i a_{ji}, normalised so long roots have d = 1."""
    n = len(a)
    d: list[Fraction | None] = [None] * n
    d[0] = Fraction(1)
    queue = [0]
    while queue:
        i = queue.pop()
        for j in range(n):
            if i != j and a[i][j] != 0 and d[j] is None:
                # d_j a_{ij} = d_i a_{ji}
                d[j] = d[i] * a[j][i] / a[i][j]
                queue.append(j)
    if any(x is None for x in d):
        raise LieAlgebraError("disconnected Dynkin diagram")
    top = max(d)  # type: ignore[type-var]
    return tuple(x / top for x in d)  # type: ignore[operator]


def build_root_system(t: CartanType) -> RootSystem:
    """Construct the full :class:`RootSystem` for a valid Cartan type."""
    a = t.cartan_matrix()
    n = t.rank
    # Finite type sanity: leading principal minors positive.
    for k in range(1, n + 1):
        minor = _det_fraction([row[:k] for row in a[:k]])
        if minor <= 0:
            raise LieAlgebraError(f"Cartan matrix of {t} is not of finite type")

    d = _symmetrizer(a)
    ainv = _mat_inverse_fraction([[Fraction(x) for x in row] for row in a])
    # (varpi_i, varpi_j) = (A^{-1})_{ij} d_j
    gram = tuple(tuple(ainv[i][j] * d[j] for j in range(n)) for i in range(n))

    pos_coords = _positive_root_closure(a)

    def mk_root(rc: tuple[int, ...]) -> Root:
        w = Weight(tuple(sum(Fraction(rc[i]) * a[i][j] for i in range(n)) for j in range(n)))
        return Root(w, rc, sum(rc))

    positive = tuple(mk_root(rc) for rc in pos_coords)
    by_coords = {r.root_coords: r for r in positive if r.height == 1}
    simple = tuple(
        by_coords[tuple(int(i == j) for j in range(n))] for i in range(n)
    )
    highest = max(positive, key=lambda r: (r.height, r.root_coords))

    rho = Weight((Fraction(1),) * n)

    rs = RootSystem(
        cartan_type=t,
        cartan_matrix=a,
        simple_root_norms_half=d,
        gram=gram,
        cartan_inverse=tuple(tuple(row) for row in ainv),
        simple_roots=simple,
        positive_roots=positive,
        highest_root=highest,
        weyl_vector=rho,
        dual_coxeter=0,          # placeholder, fixed below
        comarks=(),              # placeholder
        exponents=(),            # placeholder
        weyl_order=0,            # placeholder
        index_P_mod_Q=0,
        index_P_mod_Qcheck=0,
    )

    # (theta, theta) must be 2 in this normalisation.
    theta_norm = rs.bilinear(highest.weight, highest.weight)
    if theta_norm != 2:
        raise LieAlgebraError(f"normalisation broken: (theta,theta) = {theta_norm}")

    # <lam, theta_check> = (lam, theta) since (theta,theta)=2.
    comarks = tuple(
        rs.bilinear(rs.fundamental_weight(i), highest.weight) for i in range(n)
    )
    if any(c.denominator != 1 for c in comarks):
        raise LieAlgebraError("comarks are not integral")
    comarks_int = tuple(int(c) for c in comarks)
    hcheck = 1 + sum(comarks_int)

    exps = _exponents_from_heights([r.height for r in positive], n)
    weyl_order = 1
    for m in exps:
        weyl_order *= m + 1

    # |P/Q| = det A; |P/Q_check| = det(A)/prod d_i  (coroot alpha_i_check has
    # fundamental coordinates row_i(A)/d_i).
    det_a = _det_fraction([[Fraction(x) for x in row] for row in a])
    prod_d = Fraction(1)
    for x in d:
        prod_d *= x
    idx_q = int(det_a)
    idx_qc = det_a / prod_d
    if idx_qc.denominator != 1:
        raise LieAlgebraError("|P/Q_check| not integral")

    object.__setattr__(rs, "dual_coxeter", hcheck)
    object.__setattr__(rs, "comarks", comarks_int)
    object.__setattr__(rs, "exponents", exps)
    object.__setattr__(rs, "weyl_order", weyl_order)
    object.__setattr__(rs, "index_P_mod_Q", idx_q)
    object.__setattr__(rs, "index_P_mod_Qcheck", int(idx_qc))
    return rs


def _exponents_from_heights(heights: Sequence[int], rank: int) -> tuple[int, ...]:
    """Exponents as the conjugate of the partition of Delta_+ by height."""
    maxh = max(heights)
    counts = [0] * (maxh + 1)
    for h in heights:
        counts[h] += 1
    exps = sorted(
        sum(1 for h in range(1, maxh + 1) if counts[h] >= i) for i in range(1, rank + 1)
    )
    if len(exps) != rank:
        raise LieAlgebraError("height partition has wrong width")
    return tuple(exps)


# -- spec-level operations --------------------------------------------------


def inner_product(rs: RootSystem, lam: Weight, mu: Weight) -> Fraction:
    """Normalised invariant bilinear form, exact."""
    return rs.bilinear(lam, mu)


def exponents(rs: RootSystem) -> list[int]:
    """Exponents m_1 <= ... <= m_l; m_i + 1 are principal W-generator weights."""
    return list(rs.exponents)


def dot_action(rs: RootSystem, w: WeylElement, lam: Weight) -> Weight:
    """The rho-shifted action ``w(lam + rho) - rho`` (finite part)."""
    return w.act(lam + rs.weyl_vector) - rs.weyl_vector


def weyl_stream(rs: RootSystem) -> Iterator[WeylElement]:
    """Yield every Weyl group element exactly once, depth-first and deterministic.

    Walks the orbit tree of the (regular) Weyl vector: node v = w(rho) has
    children s_i(v) for exactly those i with v_i > 0 whose canonical parent
    rule (reflect at the first negative coordinate) points back through i.
    No element set is kept, so memory stays O(longest element), which is what
    permits scanning W(E8) without materialising it.
    """
    n = rs.rank
    rho = tuple(1 for _ in range(n))
    ident = rs.identity_element()
    stack: list[tuple[tuple[int, ...], WeylElement]] = [(rho, ident)]
    refl = [rs.simple_reflection(i) for i in range(n)]
    while stack:
        v, w = stack.pop()
        yield w
        # Descend in reverse so children come out in ascending i order.
        for i in range(n - 1, -1, -1):
            if v[i] > 0:
                u = rs.reflect_coords(i, v)
                if next(j for j, c in enumerate(u) if c < 0) == i:
                    stack.append((u, refl[i] * w))
