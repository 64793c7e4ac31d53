"""Betti tables, twisted cohomology, the rescaling map, periodicity."""

import random

import pytest

from dgcalc import presets
from dgcalc.cohomology import (
    CochainSpace,
    CohomologyError,
    betti,
    circle_quasi_iso_check,
    degree_cap,
    periodicity_check,
    rescale_to_twisted,
    twist_operator,
    twisted_betti,
    validate_formal_dimension,
)
from dgcalc.derivations import Derivation, DgBundle, gauge_transform
from dgcalc.graded import Model
from dgcalc.linalg import rank
from dgcalc.sampling import random_element


def test_betti_s3_volume_bundle(s3):
    bundle = DgBundle.line(s3, s3.gen("c"), "t", 2)
    table = betti(bundle, 0, 6)
    assert table.as_pairs() == [(0, 1), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0), (6, 0)]


def test_betti_point_with_polynomial_fiber():
    pt = presets.point()
    bundle = DgBundle.line(pt, pt.zero(), "t", 2)
    table = betti(bundle, 0, 8)
    assert all(table[2 * k] == 1 for k in range(5))
    assert all(table[2 * k + 1] == 0 for k in range(4))


def test_betti_torus_bundle_stabilizes_at_two(t2):
    bundle = DgBundle.line(t2, t2.zero(), "t", 2)
    table = betti(bundle, 0, 8)
    assert all(table[j] == 2 for j in range(3, 9))
    assert table.as_pairs()[:3] == [(0, 1), (1, 2), (2, 2)]


def test_d_matrix_composes_to_zero(s2):
    bundle = DgBundle.line(s2, s2.zero(), "t", 2)
    for k in range(7):
        here = CochainSpace(bundle, k)
        there = CochainSpace(bundle, k + 1)
        n = len(here.basis)
        if not n or not there.d_matrix:
            continue
        composed = [
            [
                sum(there.d_matrix[i][l] * here.d_matrix[l][j] for l in range(len(there.basis)))
                for j in range(n)
            ]
            for i in range(len(there.d_matrix))
        ]
        assert all(all(x == 0 for x in row) for row in composed)


def test_twisted_s3_volume_vanishes(s3):
    assert twisted_betti(s3, s3.gen("c")) == (0, 0)


def test_twisted_torus_untwisted(t2):
    assert twisted_betti(t2, t2.zero()) == (2, 2)


def test_twisted_sphere_untwisted(s2):
    assert twisted_betti(s2, s2.zero()) == (2, 0)


def test_twisted_torus3_volume():
    t3 = presets.torus(3)
    vol = t3.gen("th1") * t3.gen("th2") * t3.gen("th3")
    assert twisted_betti(t3, vol) == (3, 3)
    assert twisted_betti(t3, t3.zero()) == (4, 4)


def test_twisted_product_with_volume_twist():
    # S2 x S3 with the S3 volume as twist: polynomial generator plus a real
    # twist is the hardest case for the degree-cap stabilization
    m = Model(
        [("a", 2), ("b", 3), ("c", 3)],
        formal_dimension=5,
        differential=lambda mm: {"b": mm.gen("a") * mm.gen("a")},
        name="S2xS3",
    )
    assert betti(m, 0, 5).as_pairs() == [(0, 1), (1, 0), (2, 1), (3, 1), (4, 0), (5, 1)]
    assert twisted_betti(m, m.gen("c")) == (0, 0)
    assert twisted_betti(m, m.zero()) == (2, 2)
    bundle = DgBundle.line(m, m.gen("c"), "t", 2)
    high = betti(bundle, 6, 9)
    assert all(dim == 0 for _, dim in high.as_pairs())


def test_twisted_requires_closed_form(s2):
    with pytest.raises(CohomologyError):
        twisted_betti(s2, s2.gen("b"))


def test_twisted_invariant_under_exact_shift(nil):
    rng = random.Random(21)
    h = nil.gen("x1") * nil.gen("x3") * nil.gen("x4")
    base = twisted_betti(nil, h)
    for _ in range(3):
        b = random_element(nil, 2, rng)
        assert twisted_betti(nil, h + nil.d(b)) == base


def test_rescaling_values(s3):
    bundle = DgBundle.line(s3, s3.gen("c"), "t", 2)
    t = bundle.total.gen("t")
    w = bundle.include_base(s3.gen("c"))
    assert rescale_to_twisted(bundle, w * t * t) == 2 * s3.gen("c")
    assert rescale_to_twisted(bundle, w) == s3.gen("c")
    assert rescale_to_twisted(bundle, bundle.total.one()) == s3.one()


def test_rescaling_intertwines_on_positive_powers(s3, s2):
    # phi((d + H dt)(w t^k)) == (d + H wedge)(phi(w t^k)) for k >= 1
    for base, h_el in ((s3, s3.gen("c")), (s2, s2.zero())):
        bundle = DgBundle.line(base, h_el, "t", 2)
        twist = twist_operator(base, h_el)
        rng = random.Random(22)
        for k in (1, 2, 3):
            for deg in range(0, 4):
                w = bundle.include_base(random_element(base, deg, rng))
                el = w * bundle.total.gen("t") ** k
                lhs = rescale_to_twisted(bundle, bundle.q(el))
                rhs = twist(rescale_to_twisted(bundle, el))
                assert lhs == rhs


def test_betti_agrees_with_twisted_above_dimension(t2, s2, s3):
    for base, h_el in ((t2, t2.zero()), (s2, s2.zero()), (s3, s3.gen("c"))):
        bundle = DgBundle.line(base, h_el, "t", 2)
        ev, od = twisted_betti(base, h_el)
        m = base.formal_dimension
        even_degree = m + 1 if (m + 1) % 2 == 0 else m + 2
        table = betti(bundle, even_degree, even_degree + 3)
        assert table[even_degree] == ev
        assert table[even_degree + 1] == od
        assert table[even_degree + 2] == ev


def test_periodicity(s3, t2):
    s3_bundle = DgBundle.line(s3, s3.gen("c"), "t", 2)
    assert periodicity_check(s3_bundle, 4, 1)
    t2_bundle = DgBundle.line(t2, t2.zero(), "t", 2)
    assert periodicity_check(t2_bundle, 3, 2)
    assert periodicity_check(t2_bundle, 3, 0)
    with pytest.raises(CohomologyError):
        periodicity_check(t2_bundle, 1, 1)


def test_hopf_quasi_isomorphism(s2, s3):
    ok, pairs = circle_quasi_iso_check(s2, s2.gen("a"), s3, hi=6)
    assert ok
    assert [p[1] for p in pairs] == [1, 0, 0, 1, 0, 0, 0]


def test_trivial_circle_bundle_quasi_iso(t2):
    total = Model([("th1", 1), ("th2", 1), ("q", 1)], formal_dimension=3)
    ok, _ = circle_quasi_iso_check(t2, t2.zero(), total, hi=5)
    assert ok


def test_circle_bundle_over_line_torus():
    t1 = presets.torus(1)
    t2 = presets.torus(2)
    ok, pairs = circle_quasi_iso_check(t1, t1.zero(), t2, hi=4)
    assert ok
    assert [p[1] for p in pairs][:3] == [1, 2, 1]


def test_quasi_iso_detects_mismatch(s2, s3):
    # forgetting the curvature breaks the comparison
    ok, _ = circle_quasi_iso_check(s2, s2.zero(), s3, hi=6)
    assert not ok


def test_betti_gauge_invariance(nil):
    f = nil.gen("x1") * nil.gen("x2") + nil.gen("x3") * nil.gen("x4")
    h = -2 * (nil.gen("z") * nil.gen("x3") * nil.gen("x4"))
    bundle = DgBundle.two_step(nil, f, f, h)
    rng = random.Random(23)
    b = random_element(nil, 2, rng)
    v = Derivation(bundle.total, 0, {"t": bundle.include_base(b)})
    moved = gauge_transform(bundle.q, v)
    lo, hi = 0, 7
    plain = betti(bundle, lo, hi)
    for k in range(lo, hi + 1):
        basis_k = bundle.total.basis(k)
        basis_k1 = bundle.total.basis(k + 1)
        cols = []
        for m in basis_k:
            img = moved(bundle.total.monomial_element(m))
            col = [img.terms.get(mm, 0) for mm in basis_k1]
            cols.append(col)
        mat = [[cols[j][i] for j in range(len(cols))] for i in range(len(basis_k1))]
        prev_basis = bundle.total.basis(k - 1) if k else []
        prev_cols = []
        for m in prev_basis:
            img = moved(bundle.total.monomial_element(m))
            prev_cols.append([img.terms.get(mm, 0) for mm in basis_k])
        prev = [[prev_cols[j][i] for j in range(len(prev_cols))] for i in range(len(basis_k))]
        dim = len(basis_k) - rank(mat) - rank(prev)
        assert dim == plain[k]


def test_validate_formal_dimension(nil, s2):
    validate_formal_dimension(nil)
    validate_formal_dimension(s2)
    bad = Model([("c", 3)], formal_dimension=1, name="bad")
    with pytest.raises(Exception):
        validate_formal_dimension(bad)


def test_degree_cap_env_override(s2, monkeypatch):
    assert degree_cap(s2) == 10
    monkeypatch.setenv("DGCALC_DEGREE_CAP", "14")
    assert degree_cap(s2) == 14
