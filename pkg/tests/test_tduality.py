"""Dual pairs, the comparison map, exact sequences, high-degree isomorphism."""

import random

import pytest

from dgcalc import presets
from dgcalc.derivations import DgBundle
from dgcalc.graded import Element, Monomial
from dgcalc.sampling import random_element
from dgcalc.tduality import (
    TDualityError,
    dualize,
    les_check,
    pushforward,
    pushforward_chain_map,
    ses_verify,
    tduality_chain_map,
    tduality_iso_check,
    transport,
)

FROZEN_SIGN = 1  # intertwining sign of T under this package's conventions


def t2_pair():
    t2 = presets.torus(2)
    return dualize(DgBundle.two_step(t2, t2.gen("th1") * t2.gen("th2"), t2.zero(), t2.zero()))


def s3_pair():
    s3 = presets.sphere3()
    return dualize(DgBundle.two_step(s3, s3.zero(), s3.zero(), s3.gen("c")))


def hopf_pair():
    s2 = presets.sphere2()
    return dualize(DgBundle.two_step(s2, s2.gen("a"), s2.zero(), s2.zero()))


def trivial_pair():
    t2 = presets.torus(2)
    return dualize(DgBundle.two_step(t2, t2.zero(), t2.zero(), t2.zero()))


ALL_PAIRS = [t2_pair, s3_pair, hopf_pair, trivial_pair]


def rename(el, target):
    """Positional renaming between total models with identical generator layout."""
    return Element(target, {Monomial(m.exponents): c for m, c in el.terms.items()})


# -- dualization ----------------------------------------------------------


def test_dualize_swaps_curvatures():
    s2 = presets.sphere2()
    pair = dualize(DgBundle.two_step(s2, s2.gen("a"), s2.zero(), s2.zero()))
    assert pair.pbar.structural["F"].is_zero()
    assert pair.pbar.structural["Fbar"] == s2.gen("a")
    assert pair.pbar.structural["H"].is_zero()


def test_dualize_torus_twist():
    pair = t2_pair()
    t2 = pair.base
    vol = t2.gen("th1") * t2.gen("th2")
    # dual bundle: dqbar = 0 and twist qbar * F
    assert pair.pbar.q.value("qbar").is_zero()
    expected = pair.pbar.total.gen("qbar") * pair.pbar.include_base(vol)
    assert pair.pbar.q.value("t") == expected


def test_dualize_self_dual_renames_to_itself(nil):
    f = nil.gen("x1") * nil.gen("x2") + nil.gen("x3") * nil.gen("x4")
    h = -2 * (nil.gen("z") * nil.gen("x3") * nil.gen("x4"))
    pair = dualize(DgBundle.two_step(nil, f, f, h))
    for g in pair.p.total.generators:
        mirror = pair.pbar.total.generators[pair.p.total.index[g.name]]
        assert rename(pair.pbar.q.value(mirror.name), pair.p.total) == pair.p.q.value(g.name)


def test_dualize_rejects_wrong_shape(s3):
    bundle = DgBundle.line(s3, s3.gen("c"), "t", 2)
    with pytest.raises(TDualityError):
        dualize(bundle)


def test_double_dual_agrees_up_to_renaming():
    pair = hopf_pair()
    pair2 = dualize(pair.pbar)
    assert pair2.p is pair.pbar
    assert pair2.pbar.structural["F"] == pair.p.structural["F"]
    assert pair2.pbar.structural["Fbar"] == pair.p.structural["Fbar"]
    for k in range(7):
        for m in pair.pbar.total.basis(k):
            y = pair.pbar.total.monomial_element(m)
            back = rename(pair2.tmap(y), pair.p.total)
            # in normalized monomial order the action strips the source fiber
            # without signs and trades t-powers for the dual fiber
            t_idx = pair.pbar.total.index["t"]
            q_idx = pair.pbar.total.index["qbar"]
            expected = pair.p.total.zero()
            if m.exponents[q_idx]:
                ex = list(m.exponents)
                ex[q_idx] = 0
                expected = Element(pair.p.total, {Monomial(tuple(ex)): 1})
            elif m.exponents[t_idx]:
                j = m.exponents[t_idx]
                ex = list(m.exponents)
                ex[t_idx] -= 1
                ex[q_idx] = 1
                expected = Element(pair.p.total, {Monomial(tuple(ex)): j})
            assert back == expected


# -- pushforward ----------------------------------------------------------


def test_pushforward_strips_fiber(s2):
    bundle = DgBundle.line(s2, s2.gen("a"), "q", 1)
    w = s2.gen("b")
    assert pushforward(bundle, bundle.include_base(w) * bundle.total.gen("q")) == w
    assert pushforward(bundle, bundle.include_base(w)).is_zero()


def test_pushforward_is_chain_map(s2, nil):
    for base, theta in ((s2, s2.gen("a")), (nil, nil.gen("x1") * nil.gen("x3"))):
        bundle = DgBundle.line(base, theta, "q", 1)
        assert pushforward_chain_map(bundle).verify(7) == 1


def test_pushforward_randomized_chain_identity(s2):
    bundle = DgBundle.line(s2, s2.gen("a"), "q", 1)
    rng = random.Random(31)
    for _ in range(15):
        w = random_element(s2, rng.randint(0, 4), rng)
        el = bundle.include_base(w) * bundle.total.gen("q")
        assert pushforward(bundle, bundle.q(el)) == s2.d(pushforward(bundle, el))


def test_dual_pair_pushforward_relations(nil):
    # integrating the twisted 3-form along either circle recovers the other
    # side's curvature
    f = nil.gen("x1") * nil.gen("x2")
    fbar = nil.gen("x3") * nil.gen("x4")
    h = -(nil.gen("z") * nil.gen("x3") * nil.gen("x4"))
    e_bundle = DgBundle.line(nil, f, "q", 1)
    twist = e_bundle.include_base(h) + e_bundle.total.gen("q") * e_bundle.include_base(fbar)
    assert pushforward(e_bundle, twist) == fbar
    ebar_bundle = DgBundle.line(nil, fbar, "qbar", 1)
    mirror = ebar_bundle.include_base(h) + ebar_bundle.total.gen("qbar") * ebar_bundle.include_base(f)
    assert pushforward(ebar_bundle, mirror) == f


def test_pushforward_degree_and_kernel_counts(s3):
    bundle = DgBundle.line(s3, s3.zero(), "q", 3)
    for k in range(3, 8):
        images = set()
        killed = 0
        for m in bundle.total.basis(k):
            out = pushforward(bundle, bundle.total.monomial_element(m))
            if out.is_zero():
                killed += 1
            else:
                assert out.degree() == k - 3
        q_free = sum(
            1 for m in bundle.total.basis(k) if not m.exponents[bundle.total.index["q"]]
        )
        assert killed == q_free


# -- the comparison map -----------------------------------------------------


def test_tmap_action_on_t_powers():
    pair = t2_pair()
    w = pair.p.include_base(pair.base.gen("th1"))
    t = pair.p.total.gen("t")
    q = pair.p.total.gen("q")
    # w t^2 -> 2 w qbar t in normalized order
    assert pair.tmap(w * t * t) == 2 * (rename_to_pbar(pair, w * t) * pair.pbar.total.gen("qbar"))
    # w q t -> w t with no sign in normalized order
    assert pair.tmap(w * q * t) == rename_to_pbar(pair, w * t)
    # base forms die
    assert pair.tmap(w).is_zero()


def rename_to_pbar(pair, el):
    """Move a fiberless-in-q element of C(P) over to C(Pbar) by name/position."""
    q_idx = pair.p.total.index[pair.p.q_name]
    terms = {}
    for m, c in el.terms.items():
        assert not m.exponents[q_idx]
        terms[Monomial(m.exponents)] = c
    return Element(pair.pbar.total, terms)


def test_tmap_signed_spelling_of_the_action():
    # signed spelling: T(w t^j) = (-1)^{|w|} j qbar w t^{j-1},
    # T(q eta t^l) = (-1)^{|eta|} eta t^l; both normalize to the sign-free rules
    pair = t2_pair()
    th1 = pair.base.gen("th1")
    w = pair.p.include_base(th1)
    t = pair.p.total.gen("t")
    q = pair.p.total.gen("q")
    qbar = pair.pbar.total.gen("qbar")
    tbar = pair.pbar.total.gen("t")
    wbar = pair.pbar.include_base(th1)
    assert pair.tmap(w * t * t) == -2 * (qbar * wbar * tbar)
    assert pair.tmap(q * w * t) == -(wbar * tbar)


def test_tmap_chain_sign_frozen():
    for make in ALL_PAIRS:
        assert tduality_chain_map(make()).verify(6) == FROZEN_SIGN


def test_section_inverts_tmap():
    pair = hopf_pair()
    rng = random.Random(32)
    for k in range(1, 7):
        for m in pair.pbar.total.basis(k):
            el = pair.pbar.total.monomial_element(m)
            assert pair.tmap(pair.section(el)) == el


# -- exact sequences --------------------------------------------------------


@pytest.mark.parametrize("make", ALL_PAIRS)
def test_ses_exactness(make):
    pair = make()
    ok, rows = ses_verify(pair, 7)
    assert ok
    for row in rows:
        assert row.dim_kernel == row.dim_base
        assert row.rank_t == row.dim_target


def test_connecting_on_unit_cocycle():
    pair = hopf_pair()
    one = pair.pbar.total.one()
    # beta(1) = F for the unit cocycle
    assert pair.connecting(one) == pair.p.structural["F"]


def test_connecting_zero_cocycle():
    pair = hopf_pair()
    assert pair.connecting(pair.pbar.total.zero()).is_zero()


def test_connecting_requires_cocycle():
    pair = hopf_pair()
    # t is not a cocycle of the dual bundle: Q(t) = qbar * a != 0
    with pytest.raises(TDualityError):
        pair.connecting(pair.pbar.total.gen("t"))


def test_connecting_includes_twist_term():
    # with F = 0 the display formula would vanish identically, but exactness
    # requires beta(qbar) = H; the snake construction supplies it
    pair = s3_pair()
    qbar = pair.pbar.total.gen("qbar")
    assert pair.connecting(qbar) == pair.base.gen("c")


def test_connecting_class_invariance():
    pair = hopf_pair()
    rng = random.Random(33)
    qbar = pair.pbar.total.gen("qbar")
    cocycle = pair.pbar.include_base(pair.base.gen("a")) * qbar
    assert pair.pbar.q(cocycle).is_zero()
    base_value = pair.connecting(cocycle)
    for deg in (2,):
        for m in pair.pbar.total.basis(deg):
            shift = pair.pbar.q(pair.pbar.total.monomial_element(m))
            moved = pair.connecting(cocycle + shift)
            diff = moved - base_value
            # difference must be exact in the base model
            if diff.is_zero():
                continue
            candidates = pair.base.basis(diff.degree() - 1)
            span = [pair.base.d(pair.base.monomial_element(c)) for c in candidates]
            from dgcalc.cohomology import coordinates
            from dgcalc.linalg import rank

            target = pair.base.basis(diff.degree())
            vecs = [coordinates(s, target) for s in span]
            with_diff = vecs + [coordinates(diff, target)]
            assert rank(vecs) == rank(with_diff)


@pytest.mark.parametrize("make", ALL_PAIRS)
def test_les_rank_bookkeeping(make):
    pair = make()
    ok, rows = les_check(pair, 0, 5)
    assert ok, rows


def test_les_alternating_sum_vanishes():
    # ranks around the long exact sequence cancel over any closed window:
    # dim H^k(P) - dim H^{k-1}(Pbar) + dim H^{k+1}(M) alternates to zero once
    # the connecting ranks are subtracted; equivalent node-wise identities
    from dgcalc.cohomology import betti
    from dgcalc.tduality import les_node_ranks

    pair = hopf_pair()
    hi = 5
    hp = betti(pair.p, 0, hi + 1)
    hpb = betti(pair.pbar, 0, hi + 1)
    hm = betti(pair.base, 0, hi + 2)
    for k in range(0, hi + 1):
        rank_i, rank_t, rank_beta = les_node_ranks(pair, k)
        rank_i_up = les_node_ranks(pair, k + 1)[0]
        assert rank_i + rank_t == hp[k]
        if k >= 1:
            assert rank_t + rank_beta == hpb[k - 1]
        assert rank_beta + rank_i_up == hm[k + 1]
        # the window sum telescopes to zero
        assert (hp[k] - rank_i - rank_t) == 0


@pytest.mark.parametrize("make", ALL_PAIRS)
def test_high_degree_isomorphism(make):
    pair = make()
    fd = pair.base.formal_dimension
    for k in (fd, fd + 1):
        ok, info = tduality_iso_check(pair, k)
        assert ok, info


def test_iso_check_guards_range():
    pair = t2_pair()
    with pytest.raises(TDualityError):
        tduality_iso_check(pair, 0)


def test_dimension_threshold_is_sharp():
    # below the formal dimension the comparison genuinely fails: H^1(P) has the
    # two torus classes while H^0(dual) is just the constants
    pair = t2_pair()
    from dgcalc.cohomology import betti

    assert betti(pair.p, 1, 1)[1] == 2
    assert betti(pair.pbar, 0, 0)[0] == 1


def test_twisted_parity_matches_across_pair(nil):
    # the circle-level twisted cohomologies of a dual pair match with parities
    # exchanged; here both sides are computed as honest parity complexes
    from dgcalc.cohomology import twisted_betti

    f = nil.gen("x1") * nil.gen("x2")
    fbar = nil.gen("x3") * nil.gen("x4")
    h = -(nil.gen("z") * nil.gen("x3") * nil.gen("x4"))
    e_bundle = DgBundle.line(nil, f, "q", 1)
    ebar_bundle = DgBundle.line(nil, fbar, "qbar", 1)
    twist = e_bundle.include_base(h) + e_bundle.total.gen("q") * e_bundle.include_base(fbar)
    mirror = ebar_bundle.include_base(h) + ebar_bundle.total.gen("qbar") * ebar_bundle.include_base(f)
    ev_e, od_e = twisted_betti(e_bundle.total, twist)
    ev_eb, od_eb = twisted_betti(ebar_bundle.total, mirror)
    assert (ev_e, od_e) == (od_eb, ev_eb)
    assert ev_e == 18  # pinned: nontrivial twisted dimensions on the nil pair
