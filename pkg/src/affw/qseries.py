"""Truncated q-series with exact rational coefficients, two-variable
characters, and lattice theta functions (formal and numerically evaluated).

A :class:`QSeries` allows fractional exponents through a fixed common
denominator, so raw admissible characters (whose delta-degrees live in
(1/q)Z) stay exact.  Two-variable characters map finite weights to QSeries
and specialise to y-Laurent polynomials on demand.  The numeric theta path
is double precision with an explicit Gaussian tail certificate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .affine import AffineWeight, affine_translation, affine_weyl_vector
from .liealg import RootSystem, Weight, weyl_stream

__all__ = [
    "QSeries",
    "TwoVarCharacter",
    "ThetaSpec",
    "QSeriesError",
    "eta_like_product",
    "verma_character",
    "irreducible_character",
    "kac_wakimoto_numerator",
    "triple_product_check",
    "brst_character",
    "w_vacuum_character",
    "principal_w_weights",
    "theta_eval",
    "modular_transform_check",
]


class QSeriesError(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class QSeries:
    """Sum of c_i q^{(shift + i)/den} for i < len(coeffs), exact below order.

    ``order`` is exclusive, in units of 1/den: coefficients of q^{e} with
    e*den >= order are unknown (truncated), everything below is exact.
    """

    den: int
    shift: int
    coeffs: tuple[Fraction, ...]
    order: int

    @staticmethod
    def make(coeffs: Iterable, shift=0, den=1, order=None) -> "QSeries":
        cs = [Fraction(c) for c in coeffs]
        if order is None:
            order = shift + len(cs)
        return QSeries(den, shift, tuple(cs), order)._trim()

    @staticmethod
    def zero(order, den=1) -> "QSeries":
        return QSeries(den, 0, (), order)

    @staticmethod
    def one(order, den=1) -> "QSeries":
        return QSeries.make([1], 0, den, order)

    def _trim(self) -> "QSeries":
        cs = list(self.coeffs)
        shift = self.shift
        if shift + len(cs) > self.order:
            cs = cs[: max(0, self.order - shift)]
        while cs and cs[0] == 0:
            cs.pop(0)
            shift += 1
        while cs and cs[-1] == 0:
            cs.pop()
        return QSeries(self.den, shift if cs else 0, tuple(cs), self.order)

    def _with_den(self, den: int) -> "QSeries":
        if den == self.den:
            return self
        if den % self.den:
            raise QSeriesError("denominator must refine")
        f = den // self.den
        cs = [Fraction(0)] * (f * (len(self.coeffs) - 1) + 1 if self.coeffs else 0)
        for i, c in enumerate(self.coeffs):
            cs[i * f] = c
        return QSeries(den, self.shift * f, tuple(cs), self.order * f)

    def coefficient(self, exponent) -> Fraction:
        e = Fraction(exponent)
        scaled = e * self.den
        if scaled.denominator != 1:
            return Fraction(0)
        i = int(scaled) - self.shift
        if int(scaled) >= self.order:
            raise QSeriesError(f"coefficient of q^{e} is beyond the truncation order")
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    @property
    def order_frac(self) -> Fraction:
        return Fraction(self.order, self.den)

    def valuation(self) -> Optional[Fraction]:
        """Exponent of the lowest nonzero term, or None for (truncated) zero."""
        if not self.coeffs:
            return None
        return Fraction(self.shift, self.den)

    def is_zero(self) -> bool:
        return not self.coeffs

    def _align(self, other: "QSeries") -> tuple["QSeries", "QSeries"]:
        den = _lcm(self.den, other.den)
        return self._with_den(den), other._with_den(den)

    def __add__(self, other) -> "QSeries":
        if not isinstance(other, QSeries):
            other = QSeries.make([other], 0, self.den, self.order)
        a, b = self._align(other)
        order = min(a.order, b.order)
        lo = min(a.shift, b.shift) if (a.coeffs or b.coeffs) else 0
        hi = max(a.shift + len(a.coeffs), b.shift + len(b.coeffs), lo)
        cs = [Fraction(0)] * (hi - lo)
        for s, arr in ((a.shift, a.coeffs), (b.shift, b.coeffs)):
            for i, c in enumerate(arr):
                cs[s - lo + i] += c
        return QSeries(a.den, lo, tuple(cs), order)._trim()

    def __radd__(self, other):
        return self + other

    def __neg__(self) -> "QSeries":
        return QSeries(self.den, self.shift, tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other) -> "QSeries":
        return self + (-other if isinstance(other, QSeries) else QSeries.make([-Fraction(other)], 0, self.den, self.order))

    def __mul__(self, other) -> "QSeries":
        if not isinstance(other, QSeries):
            c = Fraction(other)
            return QSeries(self.den, self.shift, tuple(x * c for x in self.coeffs), self.order)._trim()
        a, b = self._align(other)
        # exactness: a is exact below a.order, so products are exact below
        # min(a.order + val(b), b.order + val(a)); empty (zero) factors keep
        # the other side's order plus their own guarantee.
        va = a.shift if a.coeffs else a.order
        vb = b.shift if b.coeffs else b.order
        order = min(a.order + vb, b.order + va)
        if not a.coeffs or not b.coeffs:
            return QSeries(a.den, 0, (), order)
        lo = a.shift + b.shift
        n = min(order - lo, len(a.coeffs) + len(b.coeffs) - 1)
        if n <= 0:
            return QSeries(a.den, 0, (), order)
        cs = [Fraction(0)] * n
        for i, ca in enumerate(a.coeffs):
            if ca == 0:
                continue
            jmax = min(len(b.coeffs), n - i)
            for j in range(jmax):
                cb = b.coeffs[j]
                if cb != 0:
                    cs[i + j] += ca * cb
        return QSeries(a.den, lo, tuple(cs), order)._trim()

    def __rmul__(self, other):
        return self * other

    def inverse(self) -> "QSeries":
        """Inverse when the lowest coefficient is nonzero."""
        if not self.coeffs:
            raise QSeriesError("cannot invert a zero series")
        c0 = self.coeffs[0]
        m = self.order - 2 * self.shift
        if m <= 0:
            raise QSeriesError("truncation too small to invert")
        inv = [Fraction(0)] * m
        inv[0] = 1 / c0
        for k in range(1, m):
            s = Fraction(0)
            for i in range(1, min(k, len(self.coeffs) - 1) + 1):
                s += self.coeffs[i] * inv[k - i]
            inv[k] = -s / c0
        return QSeries(self.den, -self.shift, tuple(inv), self.order - 2 * self.shift)._trim()

    def truncated(self, order) -> "QSeries":
        scaled = Fraction(order) * self.den
        o = int(scaled) if scaled.denominator == 1 else math.floor(scaled) + 1
        return QSeries(self.den, self.shift, self.coeffs, min(self.order, o))._trim()

    def same_series(self, other: "QSeries") -> bool:
        """Equal coefficients below the common truncation order."""
        a, b = self._align(other)
        order = min(a.order, b.order)
        return a.truncated(Fraction(order, a.den)).coeffs_dict() == b.truncated(
            Fraction(order, b.den)
        ).coeffs_dict()

    def coeffs_dict(self) -> dict[Fraction, Fraction]:
        return {
            Fraction(self.shift + i, self.den): c
            for i, c in enumerate(self.coeffs)
            if c != 0
        }

    def to_json(self) -> dict:
        return {
            "exponent_den": self.den,
            "coeffs": [
                [f"{self.shift + i}/{self.den}", f"{c.numerator}/{c.denominator}"]
                for i, c in enumerate(self.coeffs)
                if c != 0
            ],
            "order": f"{self.order}/{self.den}",
        }

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            e = Fraction(self.shift + i, self.den)
            parts.append(f"{c}*q^{e}")
        return " + ".join(parts) if parts else "0"


def eta_like_product(
    factors: Sequence[tuple[int, int, int]], order: int
) -> QSeries:
    """``prod over (n0, sign, mult) of prod_{n >= n0} (1 - q^n)^{sign*mult}``.

    Coefficients through q^order inclusive; ``sign`` is +1 or -1; the empty
    list gives 1.
    """
    excl = order + 1
    out = QSeries.one(excl)
    for n0, sign, mult in factors:
        if sign not in (1, -1) or mult < 0 or n0 < 1:
            raise QSeriesError("factor spec must be (n0 >= 1, +-1, mult >= 0)")
        for n in range(n0, excl):
            binom = QSeries.make([1] + [0] * (n - 1) + [-1], 0, 1, excl)
            term = binom if sign == 1 else binom.inverse()
            for _ in range(mult):
                out = out * term
    return out


# -- two-variable characters ---------------------------------------------------


@dataclass
class TwoVarCharacter:
    """Map from finite weights (fundamental coordinates) to QSeries in q."""

    rank: int
    terms: dict[tuple[Fraction, ...], QSeries] = field(default_factory=dict)
    q_order: Fraction = Fraction(0)

    @staticmethod
    def monomial(weight: Weight, series: QSeries, q_order=None) -> "TwoVarCharacter":
        qo = Fraction(q_order) if q_order is not None else series.order_frac
        return TwoVarCharacter(weight.rank, {weight.coords: series}, qo)

    def add_term(self, coords: tuple, series: QSeries):
        if coords in self.terms:
            self.terms[coords] = self.terms[coords] + series
        else:
            self.terms[coords] = series
        if self.terms[coords].is_zero():
            del self.terms[coords]

    def __add__(self, other: "TwoVarCharacter") -> "TwoVarCharacter":
        out = TwoVarCharacter(self.rank, dict(self.terms), min(self.q_order, other.q_order))
        for c, s in other.terms.items():
            out.add_term(c, s)
        return out

    def __mul__(self, other: "TwoVarCharacter") -> "TwoVarCharacter":
        out = TwoVarCharacter(self.rank, {}, min(self.q_order, other.q_order))
        for ca, sa in self.terms.items():
            for cb, sb in other.terms.items():
                prod = sa * sb
                if not prod.is_zero():
                    out.add_term(tuple(x + y for x, y in zip(ca, cb)), prod)
        return out

    def restrict_depth(self, base: Weight, rs: RootSystem, depth: Fraction) -> "TwoVarCharacter":
        """Drop weights mu with height(base - mu) above ``depth``."""
        out = TwoVarCharacter(self.rank, {}, self.q_order)
        for c, s in self.terms.items():
            diff = Weight(tuple(b - x for b, x in zip(base.coords, c)))
            h = sum(rs.weight_to_root(diff))
            if h <= depth:
                out.terms[c] = s
        return out

    def specialize(self, cochar: Sequence) -> dict[int, QSeries]:
        """y-grading by ``<mu, cochar>`` (must be integral on the support)."""
        co = [Fraction(c) for c in cochar]
        out: dict[int, QSeries] = {}
        for c, s in self.terms.items():
            e = sum(x * y for x, y in zip(c, co))
            if e.denominator != 1:
                raise QSeriesError(f"non-integral y-exponent {e}")
            k = int(e)
            out[k] = out.get(k, QSeries.zero(s.order, s.den)) + s
        return {k: v for k, v in out.items() if not v.is_zero()}

    def specialize_y1(self) -> QSeries:
        tot = None
        for s in self.terms.values():
            tot = s if tot is None else tot + s
        return tot if tot is not None else QSeries.zero(0)


def _affine_denominator_factors(rs: RootSystem, order: int, finite_factor: bool):
    """Factors (weight mu, q-power n) of prod (1 - q^n e^{-mu}) in Delta_hat_+."""
    factors: list[tuple[Weight, int]] = []
    if finite_factor:
        for r in rs.positive_roots:
            factors.append((r.weight, 0))
    zero = rs.zero_weight()
    for n in range(1, order + 1):
        for _ in range(rs.rank):
            factors.append((zero, n))
        for r in rs.positive_roots:
            factors.append((r.weight, n))
            factors.append((-r.weight, n))
    return factors


def _geometric_factor(
    rs: RootSystem, mu: Weight, n: int, order: int, depth: Fraction, den: int
) -> TwoVarCharacter:
    """(1 - q^n e^{-mu})^{-1} truncated by q-order and by height depth."""
    ch = TwoVarCharacter(rs.rank, {}, Fraction(order))
    h = sum(rs.weight_to_root(mu))
    k = 0
    while True:
        if k * n > order:
            break
        if h > 0 and k * h > depth:
            break
        if h <= 0 and n == 0 and k > 0:
            raise QSeriesError("non-convergent denominator factor")
        ch.add_term(
            tuple(-k * c for c in mu.coords),
            QSeries.make([1], k * n * den, den, (order + 1) * den),
        )
        k += 1
    return ch


def verma_character(
    rs: RootSystem,
    lam: Weight,
    order: int,
    depth: Optional[int] = None,
    finite_factor: bool = True,
) -> TwoVarCharacter:
    """Character of the affine Verma module M(lam_hat), relative truncations.

    Exact for every retained weight: coefficients of e^{mu} q^j with
    j <= order and height(lam - mu) <= depth.  With ``finite_factor`` False
    the finite Weyl denominator is omitted (loop directions only), which is
    the form whose y=1 specialisation is finite.
    """
    if depth is None:
        depth = order * (max(r.height for r in rs.positive_roots) + 1)
    dep = Fraction(depth)
    ch = TwoVarCharacter.monomial(lam, QSeries.one((order + 1)))
    for mu, n in _affine_denominator_factors(rs, order, finite_factor):
        ch = ch * _geometric_factor(rs, mu, n, order, dep, 1)
        ch = ch.restrict_depth(lam, rs, dep)
    ch.q_order = Fraction(order + 1)
    return ch


def _coroot_ball(rs: RootSystem, bound: Fraction) -> list[Weight]:
    """Coroot-lattice points beta with (beta, beta)/2 <= bound, exact."""
    out: list[Weight] = []
    # coroots have fundamental coordinates rows of A divided by d_i; in the
    # simply-laced and sl2-test cases these are the roots themselves.
    basis = [
        Weight(tuple(Fraction(x) / rs.simple_root_norms_half[i] for x in row))
        for i, row in enumerate(
            [[rs.cartan_matrix[i][j] for j in range(rs.rank)] for i in range(rs.rank)]
        )
    ]
    gram = [[rs.bilinear(a.weight if False else a, b) for b in basis] for a in basis]
    # crude box bound from the diagonal
    import itertools

    radius = []
    for i in range(rs.rank):
        radius.append(int(math.isqrt(int(4 * bound / gram[i][i])) + 2))
    for coords in itertools.product(*[range(-r, r + 1) for r in radius]):
        norm_half = Fraction(0)
        for i in range(rs.rank):
            for j in range(rs.rank):
                norm_half += Fraction(coords[i] * coords[j]) * gram[i][j]
        norm_half /= 2
        if norm_half <= bound:
            w = rs.zero_weight()
            for c, b in zip(coords, basis):
                w = w + c * b
            out.append(w)
    return out


def kac_wakimoto_numerator(
    rs: RootSystem,
    lam: Weight,
    level,
    stride: int,
    order: int,
    translation_cap: Optional[int] = None,
) -> TwoVarCharacter:
    """``sum_{w in W x t_{stride Q_check}} eps(w) e^{w o lam_hat - lam_hat}``.

    Keys are finite-weight differences; exponents of q are the delta-drops
    (rational for admissible levels).  Translations outside the norm bound
    implied by ``order`` cannot contribute and are dropped; passing a smaller
    ``translation_cap`` raises with the required bound.
    """
    level = Fraction(level)
    rho_hat = affine_weyl_vector(rs)
    lam_hat = AffineWeight(lam, level, Fraction(0))
    shifted = lam_hat + rho_hat
    kh = shifted.level
    if kh <= 0:
        raise QSeriesError("level + dual Coxeter must be positive")
    # delta-drop of t_{beta}: (beta, lam+rho) + |beta|^2/2 (k+h); minimising
    # over the W-orbit of lam+rho shows |beta|^2/2 (k+h) - |beta||lam+rho|
    # <= order is necessary.
    norm2 = rs.bilinear(shifted.finite_part, shifted.finite_part)
    # bound: |t_beta-shift| <= (|lam+rho| + sqrt(|lam+rho|^2 + 2 (k+h) order)) / (k+h)
    b = (math.sqrt(float(norm2)) + math.sqrt(float(norm2 + 2 * kh * order))) / float(kh)
    need = Fraction(math.ceil(b * b / 2 + 1), stride * stride)
    if translation_cap is not None and Fraction(translation_cap) < need:
        raise QSeriesError(
            f"translation cap {translation_cap} too small; need >= {need} "
            f"for exactness at order {order}"
        )
    ball = _coroot_ball(rs, need)
    den = (kh * stride * stride).denominator * (kh.denominator)
    den = _lcm(den, (2 * kh).denominator or 1)
    num = TwoVarCharacter(rs.rank, {}, Fraction(order + 1))
    seen_orders = den
    for beta in ball:
        tb = Weight(tuple(stride * c for c in beta.coords))
        translated = affine_translation(rs, tb, shifted)
        drop = -translated.delta_coeff
        if drop > order:
            continue
        for w in weyl_stream(rs):
            fin = w.act(translated.finite_part) - shifted.finite_part
            dden = drop.denominator
            dd = _lcm(seen_orders, dden)
            scaled = int(drop * dd)
            num.add_term(
                tuple(fin.coords),
                QSeries.make([w.length_parity], scaled, dd, (order + 1) * dd),
            )
    return num


def irreducible_character(
    rs: RootSystem,
    lam: Weight,
    level,
    stride: int,
    order: int,
    depth: Optional[int] = None,
    translation_cap: Optional[int] = None,
) -> TwoVarCharacter:
    """Kac-Wakimoto character: alternating Verma sum over W x t_{stride Q_check}.

    ``stride`` is 1 for integrable weights (Weyl-Kac) and q for admissible
    vacuum-type integral coroot systems.  Truncation by q-order and weight
    depth; exact on the retained window.
    """
    num = kac_wakimoto_numerator(rs, lam, level, stride, order, translation_cap)
    if depth is None:
        # weights of L(lam) at delta-degree <= order satisfy
        # |mu + rho|^2 <= |lam + rho|^2 + 2 (k+h) order
        shifted = lam + rs.weyl_vector
        norm2 = float(rs.bilinear(shifted, shifted))
        kh = float(Fraction(level) + rs.dual_coxeter)
        reach = math.sqrt(norm2 + 2 * kh * order) + math.sqrt(norm2)
        hmax = math.sqrt(float(rs.bilinear(rs.weyl_vector, rs.weyl_vector))) * 2
        depth = math.ceil(reach * hmax) + order + 2
    # The alternating cancellation is incomplete near the window edge: a
    # weight is exact only if every numerator term above it is in reach, so
    # compute on a padded window and cut the guard band at the end.
    num_spread = max(
        (-sum(rs.weight_to_root(Weight(c))) for c in num.terms), default=Fraction(0)
    )
    pad = math.ceil(num_spread) + order + 1
    dep = Fraction(depth + pad)
    base = lam
    ch = TwoVarCharacter(rs.rank, {}, Fraction(order + 1))
    for c, s in num.terms.items():
        ch.add_term(tuple(a + b for a, b in zip(c, base.coords)), s)
    for mu, n in _affine_denominator_factors(rs, order, True):
        ch = ch * _geometric_factor(rs, mu, n, order, dep, 1)
        ch = ch.restrict_depth(base, rs, dep)
    ch = ch.restrict_depth(base, rs, Fraction(depth))
    ch.q_order = Fraction(order + 1)
    return ch


# -- classical identities -------------------------------------------------------


def _poly2_mul(a: dict, b: dict, order: int) -> dict:
    out: dict[tuple[int, int], Fraction] = {}
    for (ya, qa), ca in a.items():
        for (yb, qb), cb in b.items():
            if qa + qb > order:
                continue
            key = (ya + yb, qa + qb)
            out[key] = out.get(key, Fraction(0)) + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def triple_product_check(order: int) -> dict:
    """Verify the Jacobi triple product in the sl2 level-1 form.

    LHS: prod (1 - y^{-1} q^{n-1})(1 - y q^n) * sum_m y^m q^{m^2};
    RHS: sum y^{3n} q^{3n^2+n} - sum y^{3n-1} q^{3n^2-n}.
    Returns a report with the first mismatch if any.
    """
    lhs = {(0, 0): Fraction(1)}
    for n in range(1, order + 2):
        lhs = _poly2_mul(lhs, {(0, 0): Fraction(1), (-1, n - 1): Fraction(-1)}, order)
        lhs = _poly2_mul(lhs, {(0, 0): Fraction(1), (1, n): Fraction(-1)}, order)
    theta = {}
    m = 0
    while m * m <= order:
        theta[(m, m * m)] = Fraction(1)
        if m:
            theta[(-m, m * m)] = Fraction(1)
        m += 1
    lhs = _poly2_mul(lhs, theta, order)

    rhs: dict[tuple[int, int], Fraction] = {}
    n = 0
    while True:
        added = False
        for nn in (n, -n) if n else (0,):
            e1 = 3 * nn * nn + nn
            if e1 <= order:
                rhs[(3 * nn, e1)] = rhs.get((3 * nn, e1), Fraction(0)) + 1
                added = True
            e2 = 3 * nn * nn - nn
            if e2 <= order:
                rhs[(3 * nn - 1, e2)] = rhs.get((3 * nn - 1, e2), Fraction(0)) - 1
                added = True
        if not added and n * n > order:
            break
        n += 1
    rhs = {k: v for k, v in rhs.items() if v != 0}

    keys = set(lhs) | set(rhs)
    mismatches = sorted(
        (q, y)
        for (y, q) in keys
        if lhs.get((y, q), Fraction(0)) != rhs.get((y, q), Fraction(0))
    )
    report = {"order": order, "equal": not mismatches}
    if mismatches:
        q, y = mismatches[0]
        report["first_mismatch"] = {
            "q_power": q,
            "y_power": y,
            "lhs": str(lhs.get((y, q), Fraction(0))),
            "rhs": str(rhs.get((y, q), Fraction(0))),
        }
    return report


def brst_character(order: int) -> dict:
    """Two-variable Euler character of the sl2 principal BRST complex.

    chi_V has factors 1/[(1 - y^{-1} q^{n-1})(1 - q^n)(1 - y q^{n+1})] and
    chi_F contributes (1 - y^{-1} q^{n-1})(1 - y q^n); the product telescopes
    by exact factor cancellation to (1 - y q) prod 1/(1 - q^n).  Returns the
    cancelled factor lists, the two-variable expansion, and the y -> 1 limit.
    """
    num: dict[tuple[int, int], int] = {}
    den: dict[tuple[int, int], int] = {}

    def bump(d, key, k=1):
        d[key] = d.get(key, 0) + k
        if d[key] == 0:
            del d[key]

    for n in range(1, order + 2):
        bump(den, (-1, n - 1))
        bump(den, (0, n))
        bump(den, (1, n + 1))
        bump(num, (-1, n - 1))
        bump(num, (1, n))
    for key in list(num):
        while key in num and key in den:
            bump(num, key, -1)
            bump(den, key, -1)
    # factors (1 - y^a q^m) with m > order are 1 at this truncation
    num = {k: v for k, v in num.items() if k[1] <= order}
    den = {k: v for k, v in den.items() if k[1] <= order}

    telescoped = num == {(1, 1): 1} and all(
        y == 0 and 1 <= q <= order for (y, q) in den
    )
    two_var = {(0, 0): Fraction(1)}
    for (y, q), k in sorted(num.items()):
        for _ in range(k):
            two_var = _poly2_mul(two_var, {(0, 0): Fraction(1), (y, q): Fraction(-1)}, order)
    inv_eta = eta_like_product([(1, -1, 1)], order)
    for (y, q), k in sorted(den.items()):
        if y != 0:
            raise QSeriesError("unexpected y-dependent factor after cancellation")
    qd = {(0, int(e)): c for e, c in inv_eta.coeffs_dict().items()}
    two_var = _poly2_mul(two_var, qd, order)

    y1 = eta_like_product([(2, -1, 1)], order)
    return {
        "telescoped": telescoped,
        "numerator_factors": dict(num),
        "two_var": two_var,
        "y1_limit": y1,
        "order": order,
    }


def principal_w_weights(rs: RootSystem) -> list[int]:
    """Conformal weights m_i + 1 of the principal W-algebra generators."""
    return [m + 1 for m in rs.exponents]


def w_vacuum_character(gen_weights: Sequence[int], order: int) -> QSeries:
    """``prod_i prod_{n >= d_i} (1 - q^n)^{-1}`` truncated at ``order``."""
    if any(d < 1 for d in gen_weights):
        raise QSeriesError("generator weights must be >= 1")
    return eta_like_product([(d, -1, 1) for d in gen_weights], order)


# -- numeric theta functions -----------------------------------------------------


@dataclass(frozen=True)
class ThetaSpec:
    """Positive-definite lattice with a rational Gram matrix and a coset shift.

    Coordinates refer to the lattice basis: a point is mu + n for integer n,
    with (a, b) = a^T G b.
    """

    gram: tuple[tuple[Fraction, ...], ...]
    shift: tuple[Fraction, ...]

    def __post_init__(self):
        g = np.array([[float(x) for x in row] for row in self.gram])
        if not np.allclose(g, g.T):
            raise QSeriesError("Gram matrix must be symmetric")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise QSeriesError("Gram matrix must be positive definite")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @staticmethod
    def root_lattice(rs: RootSystem, shift=None) -> "ThetaSpec":
        n = rs.rank
        g = tuple(
            tuple(rs.bilinear(rs.simple_roots[i].weight, rs.simple_roots[j].weight) for j in range(n))
            for i in range(n)
        )
        return ThetaSpec(g, tuple(Fraction(c) for c in (shift or [0] * n)))


def _lattice_points(g: np.ndarray, shift: np.ndarray, radius2: float):
    """Integer points n with (n+shift, n+shift) <= radius2 (Fincke-Pohst).

    With g = L L^T the norm is |L^T v|^2; coordinates are fixed from the
    last down, each bounded by the remaining radius.
    """
    ell = g.shape[0]
    lt = np.linalg.cholesky(g).T  # upper triangular

    def solve(level, acc, rem):
        # acc[i] = sum_{j > level} lt[i, j] (x_j + shift_j)
        c = lt[level, level]
        center = -acc[level] / c - shift[level]
        span = math.sqrt(max(rem, 0.0)) / abs(c)
        for x in range(math.ceil(center - span - 1e-12), math.floor(center + span + 1e-12) + 1):
            t = c * (x + shift[level]) + acc[level]
            rem2 = rem - t * t
            if rem2 < -1e-9:
                continue
            if level == 0:
                yield [x]
            else:
                acc2 = acc + lt[:, level] * (x + shift[level])
                for rest in solve(level - 1, acc2, rem2):
                    yield rest + [x]

    return [np.array(combo) for combo in solve(ell - 1, np.zeros(ell), radius2)]


def _tail_bound(g: np.ndarray, shift: np.ndarray, im_tau: float, x_im_norm: float, radius: float) -> float:
    """Upper bound on the dropped mass outside G-norm ``radius``."""
    lam_min = float(np.linalg.eigvalsh(g).min()) * 0.999
    mu_norm = math.sqrt(float(shift @ g @ shift)) if shift.any() else 0.0
    total = 0.0
    k = max(int(math.floor(radius)), 1)
    while True:
        box = (k + 1 + mu_norm) / math.sqrt(lam_min)
        count = (2 * math.floor(box) + 3) ** g.shape[0]
        term = count * math.exp(2 * math.pi * x_im_norm * (k + 1) - math.pi * im_tau * k * k)
        total += term
        if term < 1e-18 * max(total, 1.0) and k > radius + 5:
            return total
        if k > radius + 10_000:
            return float("inf")
        k += 1


def theta_eval(
    spec: ThetaSpec,
    tau: complex,
    x: Sequence[complex],
    eps: float,
    max_radius2: float = 1e6,
) -> dict:
    """``sum_{v in shift + Z^l} e^{2 pi i (v, x)} e^{pi i tau (v, v)}`` to within eps.

    Lattice-ball summation; the report carries the radius used and the
    certified Gaussian tail bound.
    """
    if tau.imag <= 0:
        raise QSeriesError("Im tau must be positive")
    g = np.array([[float(c) for c in row] for row in spec.gram])
    shift = np.array([float(c) for c in spec.shift])
    xv = np.array([complex(c) for c in x])
    x_im = np.imag(xv)
    x_im_norm = math.sqrt(max(float(x_im @ g @ x_im), 0.0))
    radius2 = max(4.0, 8.0 / tau.imag)
    while True:
        tail = _tail_bound(g, shift, tau.imag, x_im_norm, math.sqrt(radius2))
        if tail < eps:
            break
        radius2 *= 1.8
        if radius2 > max_radius2:
            raise QSeriesError(
                f"cannot certify eps={eps} within radius^2 cap {max_radius2}"
            )
    pts = _lattice_points(g, shift, radius2)
    val = 0j
    for n in pts:
        v = n + shift
        norm = float(v @ g @ v)
        phase = complex(v @ g @ xv)
        val += cmath.exp(2j * math.pi * phase + 1j * math.pi * tau * norm)
    return {
        "value": val,
        "radius2": radius2,
        "tail_bound": tail,
        "points": len(pts),
    }


def _smith_normal_form(m: np.ndarray):
    """SNF of an integer matrix: U M V = D; returns (U, D, V)."""
    m = m.copy().astype(object)
    n = m.shape[0]
    u = np.eye(n, dtype=object)
    v = np.eye(n, dtype=object)

    def minimal_pivot(k):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                if m[i, j] != 0 and (best is None or abs(m[i, j]) < abs(m[best[0], best[1]])):
                    best = (i, j)
        return best

    for k in range(n):
        while True:
            piv = minimal_pivot(k)
            if piv is None:
                break
            i, j = piv
            if i != k:
                m[[k, i]] = m[[i, k]]
                u[[k, i]] = u[[i, k]]
            if j != k:
                m[:, [k, j]] = m[:, [j, k]]
                v[:, [k, j]] = v[:, [j, k]]
            done = True
            for i in range(k + 1, n):
                qt = m[i, k] // m[k, k]
                if qt != 0:
                    m[i, :] -= qt * m[k, :]
                    u[i, :] -= qt * u[k, :]
                if m[i, k] != 0:
                    done = False
            for j in range(k + 1, n):
                qt = m[k, j] // m[k, k]
                if qt != 0:
                    m[:, j] -= qt * m[:, k]
                    v[:, j] -= qt * v[:, k]
                if m[k, j] != 0:
                    done = False
            if done:
                break
        if m[k, k] < 0:
            m[k, :] = -m[k, :]
            u[k, :] = -u[k, :]
    return u, m, v


def dual_coset_representatives(spec: ThetaSpec) -> list[tuple[Fraction, ...]]:
    """Representatives of L*/L for an integral Gram matrix."""
    for row in spec.gram:
        for x in row:
            if Fraction(x).denominator != 1:
                raise QSeriesError("dual cosets need an integral Gram matrix")
    g = np.array([[int(x) for x in row] for row in spec.gram], dtype=object)
    u, d, v = _smith_normal_form(g)
    # columns of L*-basis in lattice coordinates: solutions of G x = e_i are
    # x = V D^{-1} U e_i; cosets generated by V D^{-1} columns scaled by diag.
    reps = []
    import itertools

    diag = [int(d[i, i]) for i in range(spec.rank)]
    vints = np.array(v, dtype=object)
    for combo in itertools.product(*[range(x) for x in diag]):
        vec = [Fraction(0)] * spec.rank
        for i, c in enumerate(combo):
            if c == 0:
                continue
            for r in range(spec.rank):
                vec[r] += Fraction(c * int(vints[r, i]), diag[i])
        reps.append(tuple(f - math.floor(f) for f in vec))
    return sorted(set(reps))


def modular_transform_check(
    spec: ThetaSpec, tau: complex, x: Sequence[complex], eps: float
) -> dict:
    """Verify theta(-1/tau, x/tau) against the S-transformed sum.

    ``theta_{mu}(-1/tau, x/tau) = (-i tau)^{l/2} e^{pi i |x|^2 / tau}
    sum_{mu'} |L*/L|^{-1/2} e^{-2 pi i (mu, mu')} theta_{mu'}(tau, x)``.
    """
    ell = spec.rank
    g = np.array([[float(c) for c in row] for row in spec.gram])
    xv = np.array([complex(c) for c in x])
    tau2 = -1 / tau
    lhs = theta_eval(spec, tau2, list(xv / tau), eps)["value"]
    reps = dual_coset_representatives(spec)
    mu = np.array([float(c) for c in spec.shift])
    total = 0j
    for rep in reps:
        mup = np.array([float(c) for c in rep])
        pairing = float(mu @ g @ mup)
        term = theta_eval(ThetaSpec(spec.gram, rep), tau, list(xv), eps)["value"]
        total += cmath.exp(-2j * math.pi * pairing) * term
    pref = (-1j * tau) ** (ell / 2) / math.sqrt(len(reps))
    x_norm = complex(xv @ g @ xv)
    rhs = pref * cmath.exp(1j * math.pi * x_norm / tau) * total
    residual = abs(lhs - rhs)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "residual": residual,
        "cosets": len(reps),
        "passed": residual < max(10 * eps, 1e-12) + 1e-9,
    }
