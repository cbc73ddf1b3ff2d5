"""Bounded symbolic lambda-bracket calculus over free-field vertex algebras.

The monomial grammar is deliberately small: scalar multiples of the vacuum,
derivatives of generators, and a single binary normally ordered product of
two derivative-generators.  Every displayed computation of the source
material (Heisenberg and Sugawara Virasoro vectors, shifted central charges,
fermion currents, the abelian BRST charge) closes inside this grammar; a
bracket that would need a deeper normally ordered intermediate raises
:class:`UnsupportedDepthError` naming the offending term.

Scalars are rational functions in named parameters (exact, via sympy);
no floating point enters anywhere in this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import sympy

__all__ = [
    "OpeError",
    "UnsupportedDepthError",
    "Generator",
    "Field",
    "LambdaPolynomial",
    "ConformalAlgebra",
    "register_algebra",
    "affine",
    "heisenberg",
    "charged_fermions",
    "affine_sl",
    "tensor_algebra",
    "sugawara_sl",
    "virasoro_test",
    "VirasoroReport",
    "fermion_current",
    "brst_nilpotency_abelian",
    "brst_charge_sl2",
]


class OpeError(ValueError):
    pass


class UnsupportedDepthError(OpeError):
    """The computation left the binary normally-ordered grammar."""


Scalar = sympy.Expr
ZERO = sympy.Integer(0)
ONE_S = sympy.Integer(1)


def _scal(x) -> Scalar:
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    return sympy.sympify(x)


def _is_zero(x: Scalar) -> bool:
    if x is ZERO:
        return True
    if x.is_Number:
        return x == 0
    return sympy.cancel(sympy.together(x)) == 0


@dataclass(frozen=True)
class Generator:
    name: str
    index: int
    parity: int  # 0 even, 1 odd
    weight: Fraction = Fraction(1)  # conformal weight, bookkeeping only

    def __str__(self):
        return self.name


# monomial encodings:
#   ("1",)                      the vacuum
#   ("d", m, i)                 T^m g_i
#   ("no", m, i, n, j)          :(T^m g_i)(T^n g_j):  with (m,i) <= (n,j) order
Monomial = tuple


def _mono_parity(mono: Monomial, gens) -> int:
    if mono[0] == "1":
        return 0
    if mono[0] == "d":
        return gens[mono[2]].parity
    return (gens[mono[2]].parity + gens[mono[4]].parity) % 2


def _mono_str(mono: Monomial, gens) -> str:
    def dstr(m, i):
        g = gens[i].name
        if m == 0:
            return g
        if m == 1:
            return f"T {g}"
        return f"T^{m} {g}"

    if mono[0] == "1":
        return "1"
    if mono[0] == "d":
        return dstr(mono[1], mono[2])
    return f":{dstr(mono[1], mono[2])} {dstr(mono[3], mono[4])}:"


class Field:
    """Linear combination of grammar monomials with rational-function scalars."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: "ConformalAlgebra", terms: Optional[dict] = None):
        self.algebra = algebra
        self.terms: dict[Monomial, Scalar] = {}
        if terms:
            for m, c in terms.items():
                self._add(m, c)

    def _add(self, mono: Monomial, coef: Scalar):
        if mono in self.terms:
            self.terms[mono] = self.terms[mono] + coef
        else:
            self.terms[mono] = coef

    def _pruned(self) -> "Field":
        # cheap prune: exact zeros only; rational-function normalisation is
        # deferred to is_zero()/equal() so deep bracket recursions do not pay
        # for gcd computations on every intermediate sum
        out = Field(self.algebra)
        for m, c in self.terms.items():
            if c.is_Number:
                if c != 0:
                    out.terms[m] = c
            elif not c.is_zero:
                out.terms[m] = c
        return out

    def normalized(self) -> "Field":
        out = Field(self.algebra)
        for m, c in self.terms.items():
            if not c.is_Number:
                c = sympy.cancel(sympy.together(c))
            if c != 0:
                out.terms[m] = c
        return out

    def __add__(self, other: "Field") -> "Field":
        out = Field(self.algebra, dict(self.terms))
        for m, c in other.terms.items():
            out._add(m, c)
        return out._pruned()

    def __sub__(self, other: "Field") -> "Field":
        return self + other.scaled(-1)

    def scaled(self, c) -> "Field":
        c = _scal(c)
        out = Field(self.algebra)
        for m, x in self.terms.items():
            out.terms[m] = x * c
        return out._pruned()

    def is_zero(self) -> bool:
        return all(_is_zero(c) for c in self.terms.values())

    def parity_parts(self) -> list[tuple[int, "Field"]]:
        parts: dict[int, Field] = {}
        gens = self.algebra.generators
        for m, c in self.terms.items():
            p = _mono_parity(m, gens)
            parts.setdefault(p, Field(self.algebra))._add(m, c)
        return sorted(parts.items())

    def derivative(self) -> "Field":
        out = Field(self.algebra)
        for m, c in self.terms.items():
            if m[0] == "1":
                continue
            if m[0] == "d":
                out._add(("d", m[1] + 1, m[2]), c)
            else:
                _, a, i, b, j = m
                for mono, cc in self.algebra._no_mono(a + 1, i, b, j):
                    out._add(mono, c * cc)
                for mono, cc in self.algebra._no_mono(a, i, b + 1, j):
                    out._add(mono, c * cc)
        return out._pruned()

    def __str__(self):
        gens = self.algebra.generators
        bits = []
        for m, c in sorted(self.normalized().terms.items(), key=lambda t: t[0]):
            bits.append(f"({sympy.sstr(c)})*{_mono_str(m, gens)}")
        return " + ".join(bits) if bits else "0"

    __repr__ = __str__

    def equal(self, other: "Field") -> bool:
        return (self - other).is_zero()


class LambdaPolynomial:
    """Finitely supported map from lambda-powers to fields."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: "ConformalAlgebra", coeffs: Optional[dict] = None):
        self.algebra = algebra
        self.coeffs: dict[int, Field] = {}
        if coeffs:
            for k, f in coeffs.items():
                self.add(k, f)

    def add(self, power: int, f: Field):
        if power in self.coeffs:
            self.coeffs[power] = self.coeffs[power] + f
        else:
            self.coeffs[power] = f

    def pruned(self) -> "LambdaPolynomial":
        out = LambdaPolynomial(self.algebra)
        for k, f in self.coeffs.items():
            f = f._pruned()
            if not f.is_zero():
                out.coeffs[k] = f
        return out

    def __add__(self, other: "LambdaPolynomial") -> "LambdaPolynomial":
        out = LambdaPolynomial(self.algebra, dict(self.coeffs))
        for k, f in other.coeffs.items():
            out.add(k, f)
        return out.pruned()

    def scaled(self, c) -> "LambdaPolynomial":
        out = LambdaPolynomial(self.algebra)
        for k, f in self.coeffs.items():
            out.coeffs[k] = f.scaled(c)
        return out

    def coefficient(self, power: int) -> Field:
        return self.coeffs.get(power, Field(self.algebra))

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self.coeffs.values())

    def shift_mul_lambda(self, k: int) -> "LambdaPolynomial":
        return LambdaPolynomial(self.algebra, {p + k: f for p, f in self.coeffs.items()})

    def apply_del_plus_lambda(self, n: int) -> "LambdaPolynomial":
        """(del + lambda)^n applied on the left."""
        out = self
        for _ in range(n):
            nxt = LambdaPolynomial(self.algebra)
            for p, f in out.coeffs.items():
                nxt.add(p, f.derivative())
                nxt.add(p + 1, f)
            out = nxt
        return out.pruned()

    def substitute_minus_lambda_del(self) -> "LambdaPolynomial":
        """lambda -> -lambda - del (del acting on the field coefficients)."""
        out = LambdaPolynomial(self.algebra)
        for n, f in self.coeffs.items():
            df = f
            for j in range(n + 1):
                coef = sympy.Integer((-1) ** n) * sympy.binomial(n, j)
                out.add(n - j, df.scaled(coef))
                df = df.derivative()
        return out.pruned()

    def integrate_zero_to_lambda(self) -> "LambdaPolynomial":
        out = LambdaPolynomial(self.algebra)
        for n, f in self.coeffs.items():
            out.add(n + 1, f.scaled(sympy.Rational(1, n + 1)))
        return out.pruned()

    def integrate_minus_del_to_zero(self) -> Field:
        """int_{-del}^{0} P(lambda) d lambda."""
        total = Field(self.algebra)
        for n, f in self.coeffs.items():
            df = f
            for _ in range(n + 1):
                df = df.derivative()
            total = total + df.scaled(sympy.Rational((-1) ** n, n + 1))
        return total

    def __str__(self):
        bits = []
        for k in sorted(self.coeffs):
            body = str(self.coeffs[k])
            if k == 0:
                bits.append(body)
            else:
                bits.append(f"lambda^{k} * [{body}]")
        return " + ".join(bits) if bits else "0"

    __repr__ = __str__


class ConformalAlgebra:
    """Generators plus a lambda-bracket table on them.

    The table is checked for skew-symmetry at registration; the Jacobi
    identity is not verified (presets are trusted, user tables are flagged
    ``jacobi_unverified``).
    """

    def __init__(self, name: str, parameters: Sequence[str] = ()):
        self.name = name
        self.parameters = {p: sympy.Symbol(p) for p in parameters}
        self.generators: list[Generator] = []
        self._by_name: dict[str, Generator] = {}
        self.table: dict[tuple[int, int], LambdaPolynomial] = {}
        self.jacobi_unverified = False

    # -- construction ------------------------------------------------------

    def add_generator(self, name: str, parity=0, weight=Fraction(1)) -> Generator:
        if name in self._by_name:
            raise OpeError(f"duplicate generator name {name!r}")
        g = Generator(name, len(self.generators), parity, Fraction(weight))
        self.generators.append(g)
        self._by_name[name] = g
        return g

    def set_bracket(self, a: str, b: str, poly: "LambdaPolynomial"):
        ga, gb = self._by_name[a], self._by_name[b]
        self.table[(ga.index, gb.index)] = poly.pruned()

    def finalize(self, check_skew: bool = True, trusted: bool = True):
        for i, j in itertools.product(range(len(self.generators)), repeat=2):
            if (i, j) not in self.table and (j, i) not in self.table:
                self.table[(i, j)] = LambdaPolynomial(self)
        if check_skew:
            self._check_skew()
        self.jacobi_unverified = not trusted
        return self

    def _check_skew(self):
        for (i, j) in list(self.table):
            ga, gb = self.generators[i], self.generators[j]
            lhs = self._gen_bracket(j, i)
            rhs = self._gen_bracket(i, j).substitute_minus_lambda_del().scaled(
                -((-1) ** (ga.parity * gb.parity))
            )
            if not (lhs + rhs.scaled(-1)).is_zero():
                raise OpeError(
                    f"bracket table is not skew-symmetric on ({ga.name}, {gb.name})"
                )

    # -- field constructors --------------------------------------------------

    def one(self, coef=1) -> Field:
        return Field(self, {("1",): _scal(coef)})

    def gen(self, name: str, der: int = 0) -> Field:
        g = self._by_name[name]
        return Field(self, {("d", der, g.index): ONE_S})

    def param(self, name: str) -> Scalar:
        return self.parameters[name]

    def zero_field(self) -> Field:
        return Field(self)

    def _no_mono(self, m, i, n, j):
        """Canonical expansion of :(T^m g_i)(T^n g_j): as (monomial, coef) pairs.

        Reorders via quasi-commutativity when (m, i) is above (n, j) in the
        canonical order; for an odd generator against itself the skew rule is
        what makes :aa: well defined.
        """
        if (i, m) < (j, n) or (i, m) == (j, n):
            if (i, m) == (j, n) and self.generators[i].parity == 1:
                # :aa: = 1/2 int_{-del}^0 [a_la a] dla  (odd a)
                corr = self._db_bracket(m, i, m, i).integrate_minus_del_to_zero()
                return list(corr.scaled(sympy.Rational(1, 2)).terms.items())
            return [(("no", m, i, n, j), ONE_S)]
        pa = self.generators[i].parity
        pb = self.generators[j].parity
        sign = sympy.Integer((-1) ** (pa * pb))
        out: dict[Monomial, Scalar] = {("no", n, j, m, i): sign}
        corr = self._db_bracket(m, i, n, j).integrate_minus_del_to_zero()
        for mono, c in corr.terms.items():
            out[mono] = out.get(mono, ZERO) + c
        return list(out.items())

    def normal_product(self, a: Field, b: Field) -> Field:
        """:ab: for fields whose monomials are at most unary."""
        out = Field(self)
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                coef = ca * cb
                if ma[0] == "1":
                    out._add(mb, coef)
                    continue
                if mb[0] == "1":
                    out._add(ma, coef)
                    continue
                if ma[0] != "d" or mb[0] != "d":
                    bad = ma if ma[0] == "no" else mb
                    raise UnsupportedDepthError(
                        f"normally ordered product would nest "
                        f"{_mono_str(bad, self.generators)}"
                    )
                for mono, c2 in self._no_mono(ma[1], ma[2], mb[1], mb[2]):
                    out._add(mono, coef * c2)
        return out._pruned()

    # -- brackets -------------------------------------------------------------

    def _gen_bracket(self, i: int, j: int) -> LambdaPolynomial:
        if (i, j) in self.table:
            return self.table[(i, j)]
        base = self.table[(j, i)]
        pi = self.generators[i].parity
        pj = self.generators[j].parity
        return base.substitute_minus_lambda_del().scaled(-((-1) ** (pi * pj)))

    def _db_bracket(self, m, i, n, j) -> LambdaPolynomial:
        """[T^m g_i _la T^n g_j] via sesquilinearity."""
        base = self._gen_bracket(i, j)
        out = LambdaPolynomial(self)
        for p, f in base.coeffs.items():
            out.add(p + m, f.scaled(sympy.Integer((-1) ** m)))
        return out.apply_del_plus_lambda(n).pruned()

    def bracket(self, a: Field, b: Field) -> LambdaPolynomial:
        """[a_lambda b] within the grammar."""
        out = LambdaPolynomial(self)
        for pa, part in a.parity_parts():
            out = out + self._bracket_hom(part, pa, b)
        return out.pruned()

    def _bracket_hom(self, a: Field, pa: int, b: Field) -> LambdaPolynomial:
        out = LambdaPolynomial(self)
        for mb, cb in b.terms.items():
            if mb[0] == "1":
                continue
            if mb[0] == "d":
                term = self._bracket_field_gen(a, pa, mb[2])
                term = term.apply_del_plus_lambda(mb[1])
            else:
                term = self._bracket_field_no(a, pa, mb)
            out = out + term.scaled(cb)
        return out.pruned()

    def _bracket_field_gen(self, a: Field, pa: int, j: int) -> LambdaPolynomial:
        """[a_lambda g_j] for homogeneous a."""
        out = LambdaPolynomial(self)
        unary_done = False
        for ma, ca in a.terms.items():
            if ma[0] == "1":
                continue
            if ma[0] == "d":
                base = self._db_bracket(ma[1], ma[2], 0, j)
                out = out + base.scaled(ca)
            else:
                # skew from [g_j _la a-monomial]
                pj = self.generators[j].parity
                amono = Field(self, {ma: ca})
                rev = self._bracket_hom(self.gen_field(j), pj, amono)
                out = out + rev.substitute_minus_lambda_del().scaled(
                    -((-1) ** (pa * pj))
                )
        return out.pruned()

    def gen_field(self, j: int) -> Field:
        return Field(self, {("d", 0, j): ONE_S})

    def _bracket_field_no(self, a: Field, pa: int, mb: Monomial) -> LambdaPolynomial:
        """Non-commutative Wick formula for [a_lambda :(T^m g_i)(T^n g_j):]."""
        _, m, i, n, j = mb
        bfld = Field(self, {("d", m, i): ONE_S})
        cfld = Field(self, {("d", n, j): ONE_S})
        pb = self.generators[i].parity
        ab = self._bracket_hom(a, pa, bfld)  # [a_la b], poly in lambda
        ac = self._bracket_hom(a, pa, cfld)
        out = LambdaPolynomial(self)
        # :[a_la b] c:
        for p, f in ab.coeffs.items():
            out.add(p, self.normal_product(f, cfld))
        # +- :b [a_la c]:
        sign = sympy.Integer((-1) ** (pa * pb))
        for p, f in ac.coeffs.items():
            out.add(p, self.normal_product(bfld, f).scaled(sign))
        # integral term: int_0^la [[a_la b]_mu c] dmu
        for p, f in ab.coeffs.items():
            inner = self.bracket(f, cfld)
            out = out + inner.integrate_zero_to_lambda().shift_mul_lambda(p)
        return out.pruned()


# -- registration and presets -----------------------------------------------------


def register_algebra(
    name: str,
    generators: Sequence[tuple[str, int]],
    table: dict[tuple[str, str], dict[int, list[tuple[str, object]]]],
    parameters: Sequence[str] = (),
) -> ConformalAlgebra:
    """Register a user-supplied conformal algebra from a bracket table.

    ``generators`` are (name, parity) pairs; table values map lambda-powers
    to lists of (generator name or "1", coefficient).  Skew-symmetry of the
    table is verified; the Jacobi identity is not (the algebra is flagged
    ``jacobi_unverified``).
    """
    alg = ConformalAlgebra(name, parameters)
    for gname, parity in generators:
        alg.add_generator(gname, parity)
    for (a, b), poly in table.items():
        lp = LambdaPolynomial(alg)
        for power, terms in poly.items():
            f = alg.zero_field()
            for target, coef in terms:
                coef = sympy.sympify(coef, locals=alg.parameters)
                if target == "1":
                    f = f + alg.one(coef)
                else:
                    f = f + alg.gen(target).scaled(coef)
            lp.add(power, f)
        alg.set_bracket(a, b, lp)
    return alg.finalize(check_skew=True, trusted=False)


def affine(root_system, level_name: str = "k") -> ConformalAlgebra:
    """Affine preset for a root system; structure constants exist for type A."""
    t = root_system.cartan_type
    if t.family != "A":
        raise OpeError(
            f"affine preset has structure constants for type A only, not {t}"
        )
    return affine_sl(t.rank + 1, level_name)


def heisenberg() -> ConformalAlgebra:
    """[h_la h] = la 1."""
    alg = ConformalAlgebra("heisenberg")
    alg.add_generator("h")
    alg.set_bracket("h", "h", LambdaPolynomial(alg, {1: alg.one()}))
    return alg.finalize()


def charged_fermions(dim: int, names: Optional[tuple[str, str]] = None) -> ConformalAlgebra:
    """Odd generators phi_i, phi*_i with [phi_i la phi*_j] = delta_ij."""
    alg = ConformalAlgebra("charged_fermions")
    pn, qn = names or ("phi", "phis")
    for i in range(dim):
        alg.add_generator(f"{pn}{i + 1}" if dim > 1 else pn, parity=1, weight=Fraction(0))
    for i in range(dim):
        alg.add_generator(f"{qn}{i + 1}" if dim > 1 else qn, parity=1, weight=Fraction(1))
    for i in range(dim):
        a = alg.generators[i].name
        b = alg.generators[dim + i].name
        one = LambdaPolynomial(alg, {0: alg.one()})
        alg.set_bracket(a, b, one)
        alg.set_bracket(b, a, one)
    return alg.finalize()


def _sl_basis(nn: int):
    """Chevalley-style basis of sl_n from matrix units: (name, matrix)."""
    basis = []
    for i in range(nn):
        for j in range(nn):
            if i != j:
                m = [[Fraction(0)] * nn for _ in range(nn)]
                m[i][j] = Fraction(1)
                basis.append((f"E{i + 1}{j + 1}", m))
    for i in range(nn - 1):
        m = [[Fraction(0)] * nn for _ in range(nn)]
        m[i][i] = Fraction(1)
        m[i + 1][i + 1] = Fraction(-1)
        basis.append((f"H{i + 1}", m))
    return basis


def _mat_mul(a, b):
    nn = len(a)
    return [
        [sum(a[i][k] * b[k][j] for k in range(nn)) for j in range(nn)]
        for i in range(nn)
    ]


def _mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _mat_tr(a):
    return sum(a[i][i] for i in range(len(a)))


def _sl_structure(nn: int):
    basis = _sl_basis(nn)
    names = [n for n, _ in basis]
    mats = [m for _, m in basis]
    dim = len(basis)
    # expansion of an arbitrary traceless matrix in the basis
    def expand(m):
        coefs = [Fraction(0)] * dim
        idx = 0
        for i in range(nn):
            for j in range(nn):
                if i != j:
                    coefs[idx] = m[i][j]
                    idx += 1
        # Cartan part: m_kk - m_{k+1,k+1} determines H-coefs by telescoping
        diag = [m[i][i] for i in range(nn)]
        acc = Fraction(0)
        for k in range(nn - 1):
            acc += diag[k]
            coefs[idx] = acc
            idx += 1
        return coefs

    return names, mats, expand


def affine_sl(nn: int, level_name: str = "k") -> ConformalAlgebra:
    """Universal affine vertex algebra of sl_n: [a_la b] = [a,b] + k (a,b) la.

    The bilinear form is the defining-representation trace form, which is the
    (theta, theta) = 2 normalisation for type A.
    """
    if nn < 2:
        raise OpeError("affine preset needs sl_n with n >= 2")
    alg = ConformalAlgebra(f"affine_sl{nn}", parameters=(level_name,))
    names, mats, expand = _sl_structure(nn)
    for nm in names:
        alg.add_generator(nm)
    k = alg.param(level_name)
    for a, ma in zip(names, mats):
        for b, mb in zip(names, mats):
            comm = _mat_sub(_mat_mul(ma, mb), _mat_mul(mb, ma))
            coefs = expand(comm)
            f = Field(alg)
            for c, nm in zip(coefs, names):
                if c != 0:
                    f._add(("d", 0, alg._by_name[nm].index), _scal(c))
            poly = LambdaPolynomial(alg)
            if not f.is_zero():
                poly.add(0, f)
            form = _mat_tr(_mat_mul(ma, mb))
            if form != 0:
                poly.add(1, alg.one(_scal(form) * k))
            alg.set_bracket(a, b, poly)
    return alg.finalize()


def tensor_algebra(a: ConformalAlgebra, b: ConformalAlgebra, name=None) -> ConformalAlgebra:
    """Tensor product: generators commute across the factors."""
    params = list(a.parameters) + [p for p in b.parameters if p not in a.parameters]
    alg = ConformalAlgebra(name or f"{a.name}(x){b.name}", parameters=params)
    for g in a.generators:
        alg.add_generator(g.name, g.parity, g.weight)
    for g in b.generators:
        alg.add_generator(g.name, g.parity, g.weight)

    def imported(src: ConformalAlgebra, offset: int):
        for (i, j), poly in src.table.items():
            out = LambdaPolynomial(alg)
            for p, f in poly.coeffs.items():
                nf = Field(alg)
                for mono, c in f.terms.items():
                    c = sympy.sympify(sympy.sstr(c), locals=alg.parameters)
                    if mono[0] == "1":
                        nf._add(("1",), c)
                    elif mono[0] == "d":
                        nf._add(("d", mono[1], mono[2] + offset), c)
                    else:
                        nf._add(("no", mono[1], mono[2] + offset, mono[3], mono[4] + offset), c)
                out.add(p, nf)
            alg.table[(i + offset, j + offset)] = out

    imported(a, 0)
    imported(b, len(a.generators))
    return alg.finalize(check_skew=False, trusted=not (a.jacobi_unverified or b.jacobi_unverified))


def sugawara_sl(nn: int, alg: Optional[ConformalAlgebra] = None) -> tuple[ConformalAlgebra, Field]:
    """Sugawara vector L = 1/(2(k+h)) sum_i :a_i b_i: for sl_n."""
    if alg is None:
        alg = affine_sl(nn)
    k = alg.param("k")
    hck = nn
    pref = 1 / (2 * (k + hck))
    names, mats, expand = _sl_structure(nn)
    # dual pairs: (E_ij, E_ji); Cartan dual basis via the inverse Gram matrix
    total = alg.zero_field()
    for i in range(nn):
        for j in range(nn):
            if i != j:
                a = alg.gen(f"E{i + 1}{j + 1}")
                b = alg.gen(f"E{j + 1}{i + 1}")
                total = total + alg.normal_product(a, b)
    ncar = nn - 1
    gram = [[Fraction(_mat_tr(_mat_mul(mats[-(ncar - i)], mats[-(ncar - j)])))
             for j in range(ncar)] for i in range(ncar)]
    from .liealg import _mat_inverse_fraction

    ginv = _mat_inverse_fraction(gram)
    for i in range(ncar):
        hi = alg.gen(f"H{i + 1}")
        dual = alg.zero_field()
        for j in range(ncar):
            if ginv[j][i] != 0:
                dual = dual + alg.gen(f"H{j + 1}").scaled(_scal(ginv[j][i]))
        total = total + alg.normal_product(hi, dual)
    return alg, total.scaled(pref)


@dataclass
class VirasoroReport:
    ok: bool
    central_charge: Optional[Scalar]
    residuals: dict

    def __bool__(self):
        return self.ok


def virasoro_test(alg: ConformalAlgebra, L: Field) -> VirasoroReport:
    """Check [L_la L] = del L + 2 la L + la^3/12 c and extract c."""
    br = alg.bracket(L, L)
    res = {}
    r0 = br.coefficient(0) - L.derivative()
    if not r0.is_zero():
        res["lambda^0"] = str(r0)
    r1 = br.coefficient(1) - L.scaled(2)
    if not r1.is_zero():
        res["lambda^1"] = str(r1)
    r2 = br.coefficient(2)
    if not r2.is_zero():
        res["lambda^2"] = str(r2)
    c = None
    r3 = br.coefficient(3)
    central = r3.terms.get(("1",), ZERO)
    rest = Field(alg, {m: x for m, x in r3.terms.items() if m != ("1",)})
    if not rest.is_zero():
        res["lambda^3"] = str(rest)
    else:
        c = sympy.cancel(12 * central)
    for p in br.coeffs:
        if p > 3 and not br.coefficient(p).is_zero():
            res[f"lambda^{p}"] = str(br.coefficient(p))
    return VirasoroReport(not res, c if not res else None, res)


def fermion_current(matrices: Sequence[Sequence[Sequence]], names=None):
    """Currents F^x = sum_i :(sigma(x) e_i) phi*_i: on charged fermions.

    Returns (algebra, [F^x for each matrix]); the bracket relation
    [F^a_la F^b] = F^{[a,b]} + la tr(sigma(a) sigma(b)) is for the caller
    (tests) to verify with the engine.
    """
    mats = [
        [[Fraction(x) for x in row] for row in m] for m in matrices
    ]
    dim = len(mats[0])
    for m in mats:
        if len(m) != dim or any(len(r) != dim for r in m):
            raise OpeError("representation matrices must share one square size")
    alg = charged_fermions(dim)
    currents = []
    for m in mats:
        f = alg.zero_field()
        for i in range(dim):
            target = alg.zero_field()
            for j in range(dim):
                if m[j][i] != 0:
                    target = target + alg.gen(alg.generators[j].name).scaled(_scal(m[j][i]))
            phis = alg.gen(alg.generators[dim + i].name)
            if not target.is_zero():
                f = f + alg.normal_product(target, phis)
        currents.append(f)
    return alg, currents


def brst_charge_sl2() -> tuple[ConformalAlgebra, Field]:
    """Q = :e phi*: + phi* on V^k(sl2) x F^ch(C phi), the abelian BRST charge."""
    v = affine_sl(2)
    f = charged_fermions(1)
    alg = tensor_algebra(v, f, name="sl2_brst")
    e = alg.gen("E12")
    phis = alg.gen("phis")
    q = alg.normal_product(e, phis) + phis
    return alg, q


def brst_nilpotency_abelian(alg: ConformalAlgebra, q: Field) -> dict:
    """Check [Q_la Q] = 0 identically in lambda and the parameters."""
    br = alg.bracket(q, q)
    ok = br.is_zero()
    return {
        "nilpotent": ok,
        "residual": {p: str(f) for p, f in br.pruned().coeffs.items()},
    }
