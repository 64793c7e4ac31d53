"""Derivations: commutators, Maurer-Cartan checks, gauge transformations."""

import random

import pytest

from dgcalc.derivations import (
    BundleError,
    Derivation,
    DerivationError,
    DgBundle,
    candidate_two_step,
    commutator,
    gauge_transform,
    homologous_shift,
    maurer_cartan_check,
    model_differential,
)
from dgcalc.sampling import random_derivation, random_element


def weighted(model, name, el):
    """The derivation  el * d/d(name)."""
    g = model.generator_named(name)
    return Derivation(model, (el.degree() or 0) - g.degree, {name: el})


def test_commutator_of_d_with_itself(s2):
    d = model_differential(s2)
    assert commutator(d, d).is_zero()


def test_commutator_contraction_with_d_on_torus(t2):
    # iota(th1)=1, iota(th2)=0; all generators closed, so [iota, d] = 0
    iota = Derivation(t2, -1, {"th1": t2.one()})
    d = model_differential(t2)
    assert commutator(iota, d).is_zero()


def test_bracket_with_fiber_scaling_reproduces_differential(s2):
    # [Q, eta dt] = (d eta) dt on a line bundle: take eta = b, d eta = a^2
    bundle = DgBundle.line(s2, s2.zero(), "t", 2)
    eta = bundle.include_base(s2.gen("b"))
    deta = bundle.include_base(s2.d(s2.gen("b")))
    got = commutator(bundle.q, weighted(bundle.total, "t", eta))
    assert got == weighted(bundle.total, "t", deta)


def test_commutator_degree_and_ambient_checks(t2, s2):
    with pytest.raises(DerivationError):
        commutator(Derivation.zero(t2, 0), Derivation.zero(s2, 0))


def test_jacobi_identity_randomized(mixed):
    rng = random.Random(11)
    for _ in range(20):
        degs = [rng.choice([-2, -1, 0, 1]) for _ in range(3)]
        a, b, c = (random_derivation(mixed, d, rng) for d in degs)
        sign_ab = -1 if (degs[0] % 2 and degs[1] % 2) else 1
        sign_ac = -1 if (degs[0] % 2 and degs[2] % 2) else 1
        lhs = commutator(a, commutator(b, c))
        rhs = commutator(commutator(a, b), c) + sign_ab * commutator(b, commutator(a, c))
        assert lhs == rhs, (degs, sign_ab, sign_ac)


def test_leibniz_rule_randomized(mixed):
    rng = random.Random(12)
    for _ in range(20):
        deg = rng.choice([-2, -1, 0, 1, 2])
        d = random_derivation(mixed, deg, rng)
        da, db = rng.randint(1, 4), rng.randint(1, 4)
        a = random_element(mixed, da, rng)
        b = random_element(mixed, db, rng)
        sign = -1 if (deg % 2 and da % 2) else 1
        assert d(a * b) == d(a) * b + sign * (a * d(b))


def test_mc_closed_curvature_passes(s2):
    # d + F dq with F closed is homological
    DgBundle.line(s2, s2.gen("a"), "q", 1)


def test_mc_failure_witness_on_sphere(s2):
    a = s2.gen("a")
    carrier, q = candidate_two_step(s2, a, a, s2.zero())
    res = maurer_cartan_check(q)
    assert not res
    assert res.witness == "t"
    assert res.residue == carrier.include_base(a * a)
    with pytest.raises(BundleError):
        DgBundle.two_step(s2, a, a, s2.zero())


def test_mc_pass_on_sphere3_volume(s3):
    carrier, q = candidate_two_step(s3, s3.zero(), s3.zero(), s3.gen("c"))
    assert maurer_cartan_check(q)


def mc_case(model, f, fbar, h):
    _, q = candidate_two_step(model, f, fbar, h)
    return bool(maurer_cartan_check(q))


def test_mc_equivalent_to_structural_equations(nil):
    """Sweep all eight closed / non-closed combinations of (F, Fbar, H-coupling)."""
    m = nil
    x1, x2, x3, x4, z = (m.gen(n) for n in ("x1", "x2", "x3", "x4", "z"))
    closed_f = x1 * x2
    closed_fbar = x3 * x4
    bad = z * x3  # d(z x3) = x1 x2 x3
    bad_h = z * x3 * x4  # d = x1 x2 x3 x4, the volume monomial
    cases = [
        # (F, Fbar, H, eq1, eq2, eq3)
        (closed_f, closed_fbar, -bad_h, True, True, True),
        (closed_f, closed_fbar, m.zero(), True, True, False),
        (m.zero(), bad, m.zero(), True, False, True),
        (m.zero(), bad, bad_h, True, False, False),
        (bad, m.zero(), m.zero(), False, True, True),
        (bad, m.zero(), bad_h, False, True, False),
        (bad, bad, m.zero(), False, False, True),
        (bad, bad, bad_h, False, False, False),
    ]
    for f, fbar, h, e1, e2, e3 in cases:
        assert m.d(f).is_zero() == e1
        assert m.d(fbar).is_zero() == e2
        assert (m.d(h) + f * fbar).is_zero() == e3
        assert mc_case(m, f, fbar, h) == (e1 and e2 and e3)


def test_gauge_shift_of_three_form(s2):
    # with ad_V = [V, .], the familiar twist shift H -> H + dB comes from V = -B dt
    bundle = DgBundle.line(s2, s2.zero(), "t", 3)
    b_form = s2.gen("b")
    v = Derivation(bundle.total, 0, {"t": bundle.include_base(b_form)})
    assert gauge_transform(bundle.q, -1 * v).value("t") == bundle.include_base(s2.d(b_form))
    assert gauge_transform(bundle.q, v).value("t") == -bundle.include_base(s2.d(b_form))
    assert maurer_cartan_check(gauge_transform(bundle.q, v))


def test_gauge_on_correspondence_swaps_twist(t2):
    # e^{ad of qbar q dt} carries H + q Fbar to H + qbar F
    f = t2.gen("th1") * t2.gen("th2")
    fbar = t2.zero()
    corr = DgBundle.correspondence(t2, f, fbar, t2.zero())
    total = corr.total
    v = weighted(total, "t", total.gen("qbar") * total.gen("q"))
    moved = gauge_transform(corr.q, v)
    expected = corr.include_base(t2.zero()) + total.gen("qbar") * corr.include_base(f)
    assert moved.value("t") == expected
    assert moved.value("q") == corr.include_base(f)
    assert maurer_cartan_check(moved)


def test_gauge_identity_for_zero_field(s3):
    bundle = DgBundle.line(s3, s3.gen("c"), "t", 2)
    assert gauge_transform(bundle.q, Derivation.zero(bundle.total, 0)) == bundle.q


def test_gauge_rejects_non_nilpotent(s3):
    # the fiber scaling t d/dt acts on d + c dt with an adjoint orbit that never dies
    bundle = DgBundle.line(s3, s3.gen("c"), "t", 2)
    euler = Derivation(bundle.total, 0, {"t": bundle.total.gen("t")})
    with pytest.raises(DerivationError):
        gauge_transform(bundle.q, euler, nilpotency_cap=6)


def test_gauge_outputs_stay_maurer_cartan(nil):
    rng = random.Random(6)
    f = nil.gen("x1") * nil.gen("x2")
    bundle = DgBundle.two_step(nil, f, nil.zero(), nil.zero())
    for _ in range(10):
        a = random_element(nil, 1, rng)
        b = random_element(nil, 2, rng)
        abar = random_element(nil, 1, rng)
        v = (
            weighted(bundle.total, "q", bundle.include_base(a))
            + Derivation(
                bundle.total,
                0,
                {"t": bundle.include_base(b) + bundle.total.gen("q") * bundle.include_base(abar)},
            )
        )
        assert maurer_cartan_check(gauge_transform(bundle.q, v))


def test_homologous_shift_structural_transformation(nil):
    """Q + [Q, X0] transforms (F, Fbar, H) exactly like the fiber-wise move."""
    rng = random.Random(7)
    m = nil
    f = m.gen("x1") * m.gen("x2")
    fbar = m.gen("x3") * m.gen("x4")
    h = -(m.gen("z") * m.gen("x3") * m.gen("x4"))
    bundle = DgBundle.two_step(m, f, fbar, h)
    for _ in range(10):
        a = random_element(m, 1, rng)
        b = random_element(m, 2, rng)
        abar = random_element(m, 1, rng)
        x0 = Derivation(
            bundle.total,
            0,
            {
                "q": bundle.include_base(a),
                "t": bundle.include_base(b) + bundle.total.gen("q") * bundle.include_base(abar),
            },
        )
        moved = homologous_shift(bundle.q, x0)
        new_f = f + m.d(a)
        new_h = h + m.d(b) + f * abar - a * fbar
        new_fbar = fbar - m.d(abar)
        assert moved.value("q") == bundle.include_base(new_f)
        assert moved.value("t") == bundle.include_base(new_h) + bundle.total.gen(
            "q"
        ) * bundle.include_base(new_fbar)
        assert maurer_cartan_check(moved)


def test_homologous_shift_closed_a_keeps_f(t2):
    bundle = DgBundle.two_step(t2, t2.gen("th1") * t2.gen("th2"), t2.zero(), t2.zero())
    a = t2.gen("th1")  # closed
    x0 = Derivation(bundle.total, 0, {"q": bundle.include_base(a)})
    moved = homologous_shift(bundle.q, x0)
    assert moved.value("q") == bundle.q.value("q")


def test_homologous_shift_zero_is_identity(s3):
    bundle = DgBundle.two_step(s3, s3.zero(), s3.zero(), s3.gen("c"))
    assert homologous_shift(bundle.q, Derivation.zero(bundle.total, 0)) == bundle.q
