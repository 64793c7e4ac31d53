"""T-dual pairs of two-step bundles and the degree -1 comparison map.

The comparison map is built literally as pullback to the correspondence,
the gauge exponential of qbar*q d/dt, and pushforward along q.  Its explicit
action on normalized monomials is

    w t^j        ->  j w qbar t^{j-1}
    w q t^l      ->  (-1)^{|w|} w t^l        (w a base form)

which is inverted term by term to produce sections and the snake connecting
map of the short exact sequence  0 -> base forms -> C(P) -> C(Pbar)[1] -> 0.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from . import linalg
from .cohomology import CochainSpace, betti, coordinates, degree_cap, operator_matrix
from .derivations import Derivation, DgBundle, exp_apply
from .graded import Element, Model, Monomial


class TDualityError(Exception):
    pass


def transport(el: Element, target: Model) -> Element:
    """Rename-preserving move of an element between models sharing generators.

    The shared generators must appear in the same relative order on both
    sides, so no Koszul sign can arise.
    """
    source = el.model
    mapping = []
    for g in source.generators:
        mapping.append(target.index.get(g.name))
    shared = [t for t in mapping if t is not None]
    if any(b >= a for a, b in zip(shared[1:], shared)):
        raise TDualityError("generator order differs between models")
    terms: Dict[Monomial, Fraction] = {}
    for m, c in el.terms.items():
        exps = [0] * len(target.generators)
        for i, e in enumerate(m.exponents):
            if not e:
                continue
            if mapping[i] is None:
                raise TDualityError(
                    f"element uses generator {source.generators[i].name!r} missing from target"
                )
            exps[mapping[i]] = e
        terms[Monomial(tuple(exps))] = c
    return Element(target, terms)


def pushforward(bundle: DgBundle, el: Element) -> Element:
    """Integration along an odd line fiber: w q -> w, fiberless terms -> 0."""
    if bundle.shape != "line":
        raise TDualityError("pushforward expects a single-fiber bundle")
    fiber = bundle.fiber_names[0]
    if not bundle.total.generator_named(fiber).is_odd:
        raise TDualityError("pushforward integrates an odd fiber")
    coeffs = bundle.fiber_coefficients(el, fiber)
    linear = coeffs.get(1)
    if linear is None:
        return bundle.base.zero()
    return bundle.restrict_to_base(linear)


class TDualPair:
    """A two-step bundle, its dual, and the correspondence joining them."""

    def __init__(self, p: DgBundle):
        if p.shape != "two_step":
            raise TDualityError("dualization expects the two-step bundle shape")
        base = p.base
        f, fbar, h = p.structural["F"], p.structural["Fbar"], p.structural["H"]
        self.base = base
        self.p = p
        dual_fiber = "qbar" if p.q_name != "qbar" else "q"
        self.pbar = DgBundle.two_step(base, fbar, f, h, q=dual_fiber, t=p.t_name, name="dual")
        self.correspondence = DgBundle.correspondence(
            base, f, fbar, h, q=p.q_name, qbar=dual_fiber, t=p.t_name
        )
        self.dual_fiber = dual_fiber
        self._gauge = Derivation(
            self.correspondence.total,
            0,
            {
                self.correspondence.t_name: self.correspondence.total.gen(dual_fiber)
                * self.correspondence.total.gen(p.q_name)
            },
        )
        self._check_gauge_equivalence()

    def _check_gauge_equivalence(self):
        """The two pullback fields on the correspondence differ by the gauge move."""
        from .derivations import gauge_transform

        corr = self.correspondence
        moved = gauge_transform(corr.q, self._gauge)
        twist = corr.structural_total("H") + corr.total.gen(self.dual_fiber) * corr.structural_total(
            "F"
        )
        if moved.value(corr.t_name) != twist:
            raise TDualityError("correspondence twists are not gauge equivalent")

    # -- the comparison map -------------------------------------------------

    def tmap(self, el: Element) -> Element:
        """p_bar_* after the gauge exponential after pullback; degree -1."""
        corr = self.correspondence
        lifted = transport(el, corr.total)
        gauged = exp_apply(self._gauge, lifted)
        linear = corr.fiber_coefficients(gauged, self.p.q_name).get(1)
        if linear is None:
            return self.pbar.total.zero()
        return transport(linear, self.pbar.total)

    def section(self, el: Element) -> Element:
        """A preferred preimage of el under the comparison map."""
        pbar = self.pbar
        t_idx = pbar.total.index[pbar.t_name]
        out = self.p.total.zero()
        q_el = self.p.total.gen(self.p.q_name)
        for k, coeff in pbar.fiber_coefficients(el, self.dual_fiber).items():
            if k == 0:
                # w t^l lifts to (-1)^{|w t^l|- even part: |w|} q w t^l
                for m, c in coeff.terms.items():
                    base_deg = sum(
                        e * pbar.total.generators[i].degree
                        for i, e in enumerate(m.exponents)
                        if i != t_idx
                    )
                    sign = -1 if base_deg % 2 else 1
                    lifted = transport(Element(pbar.total, {m: c}), self.p.total)
                    out = out + sign * (q_el * lifted)
            elif k == 1:
                # w qbar t^i lifts to w t^{i+1} / (i+1)
                for m, c in coeff.terms.items():
                    exps = list(m.exponents)
                    power = exps[t_idx] + 1
                    exps[t_idx] = power
                    bumped = transport(
                        Element(pbar.total, {Monomial(tuple(exps)): c / power}), self.p.total
                    )
                    out = out + bumped
            else:
                raise TDualityError("unexpected fiber power in dual element")
        check = self.tmap(out)
        if check != el:
            raise TDualityError("section failed to invert the comparison map")
        return out

    def connecting(self, cocycle: Element) -> Element:
        """Snake connecting map: lift along the section and apply the upstairs field.

        Input must be a cocycle of the dual bundle; output is a closed base form.
        """
        if cocycle.model is not self.pbar.total:
            raise TDualityError("expected an element of the dual bundle")
        if not self.pbar.q(cocycle).is_zero():
            raise TDualityError("connecting map is only defined on cocycles")
        lifted = self.section(cocycle)
        out = self.p.q(lifted)
        if not self.p.is_base_valued(out):
            raise TDualityError("connecting value left the base forms")
        return self.p.restrict_to_base(out)


def dualize(p: DgBundle) -> TDualPair:
    return TDualPair(p)


class ChainMap:
    """Degree-homogeneous linear map between complexes with a pinned global sign."""

    def __init__(self, source, target, degree: int, action: Callable):
        from .cohomology import _field, _total

        self.source = source
        self.target = target
        self.degree = degree
        self.action = action
        self._source_model, self._source_q = _total(source), _field(source)
        self._target_q = _field(target)
        self.intertwine_sign: Optional[int] = None

    def verify(self, cap: int) -> int:
        """Find the global sign with action(Q x) = sign * Q(action x) on all monomials."""
        candidates = {1, -1}
        for k in range(cap + 1):
            for m in self._source_model.basis(k):
                x = self._source_model.monomial_element(m)
                lhs = self.action(self._source_q(x))
                rhs = self._target_q(self.action(x))
                for sign in list(candidates):
                    if lhs != sign * rhs:
                        candidates.discard(sign)
                if not candidates:
                    raise TDualityError(f"not a chain map up to sign (degree {k})")
        self.intertwine_sign = 1 if 1 in candidates else -1
        return self.intertwine_sign


def tduality_chain_map(pair: TDualPair) -> ChainMap:
    return ChainMap(pair.p, pair.pbar, -1, pair.tmap)


def pushforward_chain_map(bundle: DgBundle) -> ChainMap:
    """p_* for an odd line bundle, wrapped with its intertwining check."""
    fiber_degree = bundle.total.generator_named(bundle.fiber_names[0]).degree
    return ChainMap(bundle, bundle.base, -fiber_degree, lambda el: pushforward(bundle, el))


class SesRow:
    __slots__ = ("degree", "dim_p", "dim_kernel", "dim_base", "rank_t", "dim_target", "ok")

    def __init__(self, degree, dim_p, dim_kernel, dim_base, rank_t, dim_target):
        self.degree = degree
        self.dim_p = dim_p
        self.dim_kernel = dim_kernel
        self.dim_base = dim_base
        self.rank_t = rank_t
        self.dim_target = dim_target
        self.ok = dim_kernel == dim_base and rank_t == dim_target

    def as_tuple(self):
        return (
            self.degree,
            self.dim_p,
            self.dim_kernel,
            self.dim_base,
            self.rank_t,
            self.dim_target,
            self.ok,
        )


def tmap_matrix(pair: TDualPair, degree: int):
    source = pair.p.total.basis(degree)
    target = pair.pbar.total.basis(degree - 1)
    return operator_matrix(pair.p, pair.tmap, source, target), source, target


def ses_verify(pair: TDualPair, cap: Optional[int] = None) -> Tuple[bool, List[SesRow]]:
    """Exactness of 0 -> base -> C(P) -T-> C(Pbar)[1] -> 0, degree by degree.

    Checks that ker T is exactly the span of base forms and that T is onto,
    and that the inclusion of base forms is a chain map.
    """
    if cap is None:
        cap = degree_cap(pair.p)
    rows = []
    ok = True
    for k in range(cap + 1):
        mat, source, target = tmap_matrix(pair, k)
        r = linalg.rank(mat)
        dim_kernel = len(source) - r
        base_monos = pair.base.basis(k)
        # base forms must actually map to zero and include as a chain map
        for m in base_monos:
            el = pair.p.include_base(pair.base.monomial_element(m))
            if not pair.tmap(el).is_zero():
                ok = False
            upstairs = pair.p.q(el)
            downstairs = pair.p.include_base(pair.base.d(pair.base.monomial_element(m)))
            if upstairs != downstairs:
                ok = False
        row = SesRow(k, len(source), dim_kernel, len(base_monos), r, len(target))
        rows.append(row)
        ok = ok and row.ok
    return ok, rows


def cocycle_vectors(space, degree: int):
    """Kernel basis of the outgoing differential in the given degree."""
    cs = CochainSpace(space, degree)
    return linalg.kernel_basis(cs.d_matrix, len(cs.basis)), cs.basis


def boundary_vectors(space, degree: int):
    """Images of the incoming differential, as vectors in the degree basis."""
    if degree == 0:
        return []
    below = CochainSpace(space, degree - 1)
    cols = [
        [below.d_matrix[i][j] for i in range(len(below.d_matrix))]
        for j in range(len(below.basis))
    ]
    return cols


def induced_rank(image_vectors, boundaries) -> int:
    """Dimension of the span of image vectors inside cohomology (mod boundaries)."""
    b = [list(v) for v in boundaries]
    joint = [list(v) for v in image_vectors] + b
    return linalg.rank(joint) - linalg.rank(b)


def _vectors_to_elements(model: Model, vectors, basis):
    out = []
    for v in vectors:
        terms = {m: c for m, c in zip(basis, v) if c}
        out.append(Element(model, terms))
    return out


def les_node_ranks(pair: TDualPair, degree: int):
    """Induced ranks (i_*, T_*, beta_*) entering and leaving cohomology degree k.

    i_*: H^k(base) -> H^k(P);  T_*: H^k(P) -> H^{k-1}(Pbar);
    beta_*: H^{k-1}(Pbar) -> H^{k+1}(base).
    """
    k = degree
    # i_*
    zb, base_basis = cocycle_vectors(pair.base, k)
    upstairs_basis = pair.p.total.basis(k)
    included = [
        coordinates(pair.p.include_base(el), upstairs_basis)
        for el in _vectors_to_elements(pair.base, zb, base_basis)
    ]
    rank_i = induced_rank(included, boundary_vectors(pair.p, k))
    # T_*
    zp, p_basis = cocycle_vectors(pair.p, k)
    target_basis = pair.pbar.total.basis(k - 1)
    mapped = [
        coordinates(pair.tmap(el), target_basis)
        for el in _vectors_to_elements(pair.p.total, zp, p_basis)
    ]
    rank_t = induced_rank(mapped, boundary_vectors(pair.pbar, k - 1)) if k >= 1 else 0
    # beta_*
    zpb, pbar_basis = cocycle_vectors(pair.pbar, k - 1) if k >= 1 else ([], [])
    connected = []
    base_up = pair.base.basis(k + 1)
    for el in _vectors_to_elements(pair.pbar.total, zpb, pbar_basis):
        connected.append(coordinates(pair.connecting(el), base_up))
    rank_beta = induced_rank(connected, boundary_vectors(pair.base, k + 1)) if k >= 1 else 0
    return rank_i, rank_t, rank_beta


def les_check(pair: TDualPair, lo: int, hi: int) -> Tuple[bool, List[Tuple]]:
    """Exactness bookkeeping for the long exact sequence on a degree window."""
    hp = betti(pair.p, max(lo - 1, 0), hi + 1)
    hpb = betti(pair.pbar, max(lo - 1, 0), hi + 1)
    hm = betti(pair.base, max(lo - 1, 0), hi + 1)
    node_ranks = {k: les_node_ranks(pair, k) for k in range(lo, hi + 2)}
    rows = []
    ok = True
    for k in range(lo, hi + 1):
        rank_i_k, rank_t_k, rank_beta_k = node_ranks[k]
        # node H^k(P): image of i_* is the kernel of T_*
        cond_p = rank_i_k + rank_t_k == hp[k]
        # node H^{k-1}(Pbar): image of T_* is the kernel of beta_*
        cond_pb = k - 1 < max(lo - 1, 0) or rank_t_k + rank_beta_k == hpb[k - 1]
        # node H^{k+1}(base): image of beta_* is the kernel of i_* one degree up
        rank_i_up = node_ranks[k + 1][0]
        cond_m = k + 1 > hi + 1 or rank_beta_k + rank_i_up == hm[k + 1]
        rows.append((k, rank_i_k, rank_t_k, rank_beta_k, cond_p and cond_pb and cond_m))
        ok = ok and cond_p and cond_pb and cond_m
    return ok, rows


def tduality_iso_check(pair: TDualPair, k: Optional[int] = None):
    """T induces an isomorphism H^{k+1}(P) = H^k(Pbar) for k at or past the base dimension."""
    if k is None:
        k = pair.base.formal_dimension
    if k < pair.base.formal_dimension:
        raise TDualityError("isomorphism range starts at the formal dimension")
    dim_source = betti(pair.p, k + 1, k + 1)[k + 1]
    dim_target = betti(pair.pbar, k, k)[k]
    z, p_basis = cocycle_vectors(pair.p, k + 1)
    target_basis = pair.pbar.total.basis(k)
    mapped = [
        coordinates(pair.tmap(el), target_basis)
        for el in _vectors_to_elements(pair.p.total, z, p_basis)
    ]
    rank_ind = induced_rank(mapped, boundary_vectors(pair.pbar, k))
    ok = dim_source == dim_target == rank_ind
    return ok, {"dim_source": dim_source, "dim_target": dim_target, "induced_rank": rank_ind}
