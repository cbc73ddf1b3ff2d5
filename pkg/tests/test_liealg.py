import random
from fractions import Fraction

import pytest

from affw.liealg import (
    CartanType,
    LieAlgebraError,
    Weight,
    build_root_system,
    dot_action,
    exponents,
    inner_product,
    weyl_stream,
)

CLASSICAL = {
    # type: (|Delta_+|, |W|, h_check, exponents)
    "A1": (1, 2, 2, [1]),
    "A2": (3, 6, 3, [1, 2]),
    "A3": (6, 24, 4, [1, 2, 3]),
    "A4": (10, 120, 5, [1, 2, 3, 4]),
    "A5": (15, 720, 6, [1, 2, 3, 4, 5]),
    "B2": (4, 8, 3, [1, 3]),
    "B3": (9, 48, 5, [1, 3, 5]),
    "C3": (9, 48, 4, [1, 3, 5]),
    "D4": (12, 192, 6, [1, 3, 3, 5]),
    "D5": (20, 1920, 8, [1, 3, 4, 5, 7]),
    "D6": (30, 23040, 10, [1, 3, 5, 5, 7, 9]),
    "G2": (6, 12, 4, [1, 5]),
    "F4": (24, 1152, 9, [1, 5, 7, 11]),
    "E6": (36, 51840, 12, [1, 4, 5, 7, 8, 11]),
    "E7": (63, 2903040, 18, [1, 5, 7, 9, 11, 13, 17]),
    "E8": (120, 696729600, 30, [1, 7, 11, 13, 17, 19, 23, 29]),
}


@pytest.mark.parametrize("name", sorted(CLASSICAL))
def test_classical_data(name):
    npos, worder, hck, exps = CLASSICAL[name]
    rs = build_root_system(CartanType.parse(name))
    assert len(rs.positive_roots) == npos
    assert rs.weyl_order == worder
    assert rs.dual_coxeter == hck
    assert sorted(exponents(rs)) == sorted(exps)
    assert sum(2 * m + 1 for m in rs.exponents) == rs.dimension


@pytest.mark.parametrize(
    "bad", [("A", 0), ("E", 5), ("E", 9), ("F", 3), ("G", 3), ("D", 2), ("B", 1)]
)
def test_invalid_types(bad):
    with pytest.raises(LieAlgebraError):
        CartanType(*bad)


def test_highest_root_normalisation():
    for name in ("A2", "B2", "C3", "G2", "F4", "D5"):
        rs = build_root_system(CartanType.parse(name))
        theta = rs.highest_root.weight
        assert inner_product(rs, theta, theta) == 2


def test_a1_examples():
    rs = build_root_system(CartanType.parse("A1"))
    assert len(rs.positive_roots) == 1
    assert rs.highest_root.weight == rs.simple_roots[0].weight
    assert rs.dual_coxeter == 2


def test_a2_examples():
    rs = build_root_system(CartanType.parse("A2"))
    assert rs.weyl_vector == rs.fundamental_weight(0) + rs.fundamental_weight(1)
    assert inner_product(rs, rs.weyl_vector, rs.weyl_vector) == 2
    # (varpi_i, alpha_j) = delta_ij (alpha_j, alpha_j)/2
    for i in range(2):
        for j in range(2):
            lhs = inner_product(rs, rs.fundamental_weight(i), rs.simple_roots[j].weight)
            want = rs.simple_root_norms_half[j] if i == j else 0
            assert lhs == want


def test_e8_lattice_index():
    rs = build_root_system(CartanType.parse("E8"))
    assert rs.index_P_mod_Q == 1
    assert rs.index_P_mod_Qcheck == 1


def test_rho_is_half_sum_of_positive_roots():
    for name in ("A3", "B3", "D4", "G2"):
        rs = build_root_system(CartanType.parse(name))
        total = rs.zero_weight()
        for r in rs.positive_roots:
            total = total + r.weight
        assert Fraction(1, 2) * total == rs.weyl_vector


def test_simple_reflection_permutes_positive_roots():
    for name in ("A2", "B2", "D4"):
        rs = build_root_system(CartanType.parse(name))
        pos = {r.weight.coords for r in rs.positive_roots}
        for i in range(rs.rank):
            s = rs.simple_reflection(i)
            images = {s.act(r.weight).coords for r in rs.positive_roots}
            alpha = rs.simple_roots[i].weight
            expected = (pos - {alpha.coords}) | {(-alpha).coords}
            assert images == expected


def test_weyl_stream_counts_and_signs():
    for name in ("A1", "A2", "B2", "A3", "G2", "D4"):
        rs = build_root_system(CartanType.parse(name))
        seen = set()
        sign_sum = 0
        for w in weyl_stream(rs):
            assert w.matrix not in seen
            seen.add(w.matrix)
            sign_sum += w.length_parity
        assert len(seen) == rs.weyl_order
        assert sign_sum == 0


def test_weyl_stream_reentrant():
    rs = build_root_system(CartanType.parse("A2"))
    s1 = weyl_stream(rs)
    first = next(s1)
    s2 = list(weyl_stream(rs))
    assert len(s2) == 6
    assert first.matrix == s2[0].matrix


def test_length_parity_is_determinant_on_roots():
    rs = build_root_system(CartanType.parse("B2"))
    for w in weyl_stream(rs):
        # det of the action on root-basis coordinates equals the parity
        import numpy as np

        m = np.array(w.matrix, dtype=float)
        a = np.array(rs.cartan_matrix, dtype=float)
        root_action = np.linalg.inv(a.T) @ m @ a.T
        assert round(np.linalg.det(root_action)) == w.length_parity


def test_reflection_involution_and_sign_multiplicativity():
    rng = random.Random(11)
    for name in ("A3", "B3", "D4"):
        rs = build_root_system(CartanType.parse(name))
        sample = [w for w in weyl_stream(rs)]
        for _ in range(20):
            w = rng.choice(sample)
            i = rng.randrange(rs.rank)
            s = rs.simple_reflection(i)
            lam = Weight.of(*[rng.randint(-4, 4) for _ in range(rs.rank)])
            assert s.act(s.act(lam)) == lam
            assert (s * w).length_parity == -w.length_parity


def test_dot_action():
    rs = build_root_system(CartanType.parse("A1"))
    e = rs.identity_element()
    lam = Weight.of(3)
    assert dot_action(rs, e, lam) == lam
    s = rs.simple_reflection(0)
    assert dot_action(rs, s, rs.zero_weight()) == -rs.simple_roots[0].weight

    rs2 = build_root_system(CartanType.parse("A2"))
    w0 = rs2.longest_element()
    rho = rs2.weyl_vector
    assert dot_action(rs2, w0, rho) == w0.act(2 * rho) - rho
    assert dot_action(rs2, w0, rho) == -3 * rho


def test_root_coordinate_roundtrip():
    rng = random.Random(5)
    for name in ("A2", "B3", "F4"):
        rs = build_root_system(CartanType.parse(name))
        for _ in range(10):
            lam = Weight.of(*[Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(rs.rank)])
            rc = rs.weight_to_root(lam)
            assert rs.root_to_weight(rc) == lam


def test_exponents_dimension_crosscheck_d4():
    rs = build_root_system(CartanType.parse("D4"))
    assert list(rs.exponents) == [1, 3, 3, 5]
    assert sum(2 * m + 1 for m in rs.exponents) == 28
