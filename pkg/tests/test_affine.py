import itertools
import random
from fractions import Fraction

import pytest

from affw.affine import (
    AffineDataError,
    AffineWeight,
    affine_translation,
    affine_weyl_vector,
    alpha_star,
    enumerate_P_plus_k,
    enumerate_regular,
    enumerate_subregular_eta,
    lambda0,
    make_admissible_level,
    principal_labels,
    subregular_labels,
)
from affw.liealg import CartanType, Weight, build_root_system


@pytest.fixture(scope="module")
def a1():
    return build_root_system(CartanType.parse("A1"))


@pytest.fixture(scope="module")
def a2():
    return build_root_system(CartanType.parse("A2"))


def test_admissible_level_validation(a1):
    lv = make_admissible_level(a1, 3, 4)
    assert lv.k == Fraction(3, 4) - 2
    with pytest.raises(AffineDataError):
        make_admissible_level(a1, 2, 4)  # gcd != 1
    with pytest.raises(AffineDataError):
        make_admissible_level(a1, 1, 3)  # p < h_check
    e8 = build_root_system(CartanType.parse("E8"))
    lv8 = make_admissible_level(e8, 30, 29)
    assert lv8.k == Fraction(30, 29) - 30


def test_affine_translation_basics(a1):
    rho_hat = affine_weyl_vector(a1)
    assert rho_hat.level == 2
    lam = AffineWeight.of(Weight.of(1), level=Fraction(3, 2), delta=0)
    assert affine_translation(a1, a1.zero_weight(), lam) == lam

    # t_{alpha_check}(Lambda_0) = Lambda_0 + alpha - delta for sl2
    alpha = a1.simple_roots[0].weight
    out = affine_translation(a1, alpha, lambda0(a1))
    assert out.finite_part == alpha
    assert out.level == 1
    assert out.delta_coeff == -1

    # level-0 weight: t_alpha(lam) = lam - (alpha, lam) delta
    lam0 = AffineWeight.of(Weight.of(3), level=0, delta=0)
    out = affine_translation(a1, alpha, lam0)
    assert out.finite_part == lam0.finite_part
    assert out.delta_coeff == -a1.bilinear(alpha, lam0.finite_part)


def test_affine_translation_composes(a2):
    rng = random.Random(3)
    roots = [r.weight for r in a2.positive_roots]
    for _ in range(10):
        a = rng.choice(roots)
        b = rng.choice(roots)
        lam = AffineWeight.of(
            Weight.of(rng.randint(-3, 3), rng.randint(-3, 3)),
            level=Fraction(rng.randint(1, 5), rng.randint(1, 3)),
            delta=Fraction(rng.randint(-2, 2)),
        )
        lhs = affine_translation(a2, a, affine_translation(a2, b, lam))
        rhs = affine_translation(a2, a + b, lam)
        assert lhs == rhs


def test_translation_rejects_non_coroot(a1):
    with pytest.raises(AffineDataError):
        affine_translation(a1, a1.fundamental_weight(0), lambda0(a1))


def test_P_plus_k(a1, a2):
    labels = enumerate_P_plus_k(a1, 1)
    assert labels == [a1.zero_weight(), a1.fundamental_weight(0)]
    for k in range(5):
        assert len(enumerate_P_plus_k(a1, k)) == k + 1
    assert len(enumerate_P_plus_k(a2, 1)) == 3
    assert enumerate_P_plus_k(a2, 2)[0] == a2.zero_weight()


def test_enumerate_regular(a2):
    assert len(enumerate_regular(a2, 4)) == 3
    assert enumerate_regular(a2, 2) == []
    a1 = build_root_system(CartanType.parse("A1"))
    for p in range(2, 7):
        assert len(enumerate_regular(a1, p)) == p - 1
    e8 = build_root_system(CartanType.parse("E8"))
    regs = enumerate_regular(e8, 30)
    assert regs == [e8.weyl_vector]
    # shifted-weight consistency
    for nu in enumerate_regular(a2, 5):
        mu = nu - a2.weyl_vector
        assert mu.is_dominant()
        assert a2.level(mu) <= 5 - a2.dual_coxeter


def test_subregular_eta_a2():
    a2 = build_root_system(CartanType.parse("A2"))
    out = enumerate_subregular_eta(a2, 2)
    weights = {tuple(int(c) for c in w.coords) for w, _ in out}
    assert weights == {(1, 0), (0, 1), (1, 1)}
    for w, wall in out:
        quantities = [int(c) for c in w.coords] + [2 - int(a2.level(w))]
        assert quantities.count(0) == 1


def test_subregular_eta_a1():
    a1 = build_root_system(CartanType.parse("A1"))
    for q in range(1, 6):
        out = enumerate_subregular_eta(a1, q)
        weights = sorted(int(w.coords[0]) for w, _ in out)
        assert weights == [0, q]


def test_subregular_eta_brute_force_d4():
    """Golden count cross-checked by direct lattice enumeration."""
    rs = build_root_system(CartanType.parse("D4"))
    q = 5
    brute = 0
    comarks = rs.comarks
    for coords in itertools.product(range(q + 1), repeat=4):
        level = sum(c * m for c, m in zip(coords, comarks))
        if level > q:
            continue
        walls = [c for c in coords] + [q - level]
        if walls.count(0) == 1:
            brute += 1
    assert len(enumerate_subregular_eta(rs, q)) == brute


def test_subregular_eta_d6_golden():
    rs = build_root_system(CartanType.parse("D6"))
    assert len(enumerate_subregular_eta(rs, 9)) == 16
    assert len(enumerate_subregular_eta(rs, 8)) == 3


def test_principal_label_counts(a1):
    for (p, q), n in {(2, 3): 1, (3, 4): 3, (4, 5): 6}.items():
        labs = principal_labels(make_admissible_level(a1, p, q))
        assert len(labs) == n
        # vacuum (rho, rho) first
        assert labs[0].nu == a1.weyl_vector and labs[0].eta == a1.weyl_vector
        # invariants: strict dominance and level bounds
        for l in labs:
            assert all(c >= 1 for c in l.nu.coords) and a1.level(l.nu) < p
            assert all(c >= 1 for c in l.eta.coords) and a1.level(l.eta) < q


def test_principal_identification_matches_minimal_model(a1):
    # classes are (r, s) ~ (p - r, q - s)
    p, q = 4, 5
    labs = principal_labels(make_admissible_level(a1, p, q))
    pairs = {(int(l.nu.coords[0]), int(l.eta.coords[0])) for l in labs}
    full = {(r, s) for r in range(1, p) for s in range(1, q)}
    for r, s in full:
        assert ((r, s) in pairs) != ((p - r, q - s) in pairs)


def test_alpha_star():
    d4 = build_root_system(CartanType.parse("D4"))
    node = alpha_star(d4).root_coords.index(1) + 1
    assert node == 2
    d6 = build_root_system(CartanType.parse("D6"))
    assert alpha_star(d6).root_coords.index(1) + 1 == 4
    e8 = build_root_system(CartanType.parse("E8"))
    assert alpha_star(e8).root_coords.index(1) + 1 == 4
    a3 = build_root_system(CartanType.parse("A3"))
    assert alpha_star(a3).root_coords.index(1) + 1 == 2
    with pytest.raises(AffineDataError):
        alpha_star(build_root_system(CartanType.parse("A1")))
    with pytest.raises(AffineDataError):
        alpha_star(build_root_system(CartanType.parse("B3")))


def test_subregular_labels_d6():
    rs = build_root_system(CartanType.parse("D6"))
    labs = subregular_labels(make_admissible_level(rs, 11, 8))
    assert len(labs) == 3
    # representative rule: on the trivalent wall where available
    assert {l.wall_id for l in labs} <= {3, 4}
    # vacuum class of (rho, rho - varpi_*) first
    assert labs[0].nu == rs.weyl_vector
    assert labs[0].eta == rs.weyl_vector - rs.fundamental_weight(3)


def test_subregular_labels_e8_count():
    rs = build_root_system(CartanType.parse("E8"))
    labs = subregular_labels(make_admissible_level(rs, 30, 29))
    assert len(labs) == 44
    assert all(l.nu == rs.weyl_vector for l in labs)


def test_subregular_rejects_bad_types():
    b3 = build_root_system(CartanType.parse("B3"))
    with pytest.raises(AffineDataError):
        subregular_labels(make_admissible_level(b3, 5, 4))
    a1 = build_root_system(CartanType.parse("A1"))
    with pytest.raises(AffineDataError):
        subregular_labels(make_admissible_level(a1, 3, 4))


def test_label_invariants_subregular():
    rs = build_root_system(CartanType.parse("D4"))
    lv = make_admissible_level(rs, 7, 5)
    for l in subregular_labels(lv):
        assert all(c >= 1 for c in l.nu.coords) and rs.level(l.nu) < lv.p
        walls = [int(c) for c in l.eta.coords] + [lv.q - int(rs.level(l.eta))]
        assert walls.count(0) == 1
        if l.wall_id == 0:
            assert rs.level(l.eta) == lv.q
        else:
            assert l.eta.coords[l.wall_id - 1] == 0
