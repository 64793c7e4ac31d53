"""Graded derivations and shifted-line bundles over CDGA models.

A derivation is stored by its values on generators and extends to all
elements by D(ab) = D(a) b + (-1)^{|D||a|} a D(b); derivations act from the
left throughout.  A DgBundle is a base model extended by fiber generators
whose induced degree-1 field satisfies the Maurer-Cartan equation (this is
exactly d*d = 0 for the extended model, so it is checked at construction).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional

from .graded import Element, GradedError, GradedGenerator, Model, Monomial, format_element


class DerivationError(Exception):
    pass


class BundleError(Exception):
    pass


class Derivation:
    """A graded derivation of a model's function algebra."""

    __slots__ = ("model", "degree", "values")

    def __init__(self, model: Model, degree: int, values: Mapping[str, Element]):
        self.model = model
        self.degree = degree
        vals: Dict[str, Element] = {}
        for name, v in values.items():
            if name not in model.index:
                raise DerivationError(f"value on unknown generator {name!r}")
            if v.is_zero():
                continue
            if v.model is not model:
                raise DerivationError("derivation values must live in the ambient model")
            want = model.generator_named(name).degree + degree
            if v.degree() != want:
                raise DerivationError(
                    f"value on {name} must be homogeneous of degree {want}, got {v.degree()}"
                )
            vals[name] = v
        self.values = vals

    @classmethod
    def zero(cls, model: Model, degree: int = 0) -> "Derivation":
        return cls(model, degree, {})

    def value(self, name: str) -> Element:
        return self.values.get(name, self.model.zero())

    def is_zero(self) -> bool:
        return not self.values

    def __eq__(self, other):
        # equality on generators decides equality (the algebra is free)
        return (
            isinstance(other, Derivation)
            and self.model is other.model
            and self.degree == other.degree
            and self.values == other.values
        )

    def __add__(self, other: "Derivation") -> "Derivation":
        if other.model is not self.model or other.degree != self.degree:
            raise DerivationError("can only add derivations of equal degree and model")
        out = dict(self.values)
        for k, v in other.values.items():
            out[k] = out.get(k, self.model.zero()) + v
        return Derivation(self.model, self.degree, out)

    def __sub__(self, other: "Derivation") -> "Derivation":
        return self + (-1) * other

    def __mul__(self, c) -> "Derivation":
        c = Fraction(c)
        return Derivation(self.model, self.degree, {k: v * c for k, v in self.values.items()})

    __rmul__ = __mul__

    def __call__(self, a: Element) -> Element:
        """Apply by the graded Leibniz rule, one monomial factor at a time."""
        if a.model is not self.model:
            raise DerivationError("element of a different model")
        model = self.model
        n = len(model.generators)
        out = model.zero()
        sign_flip = self.degree % 2 == 1
        for m, coeff in a.terms.items():
            prefix_parity = 0
            for i, e in enumerate(m.exponents):
                if e:
                    val = self.values.get(model.generators[i].name)
                    if val is not None:
                        front = list(m.exponents[:i]) + [0] * (n - i)
                        rest = [0] * i + [e - 1] + list(m.exponents[i + 1 :])
                        sign = -1 if (sign_flip and prefix_parity % 2) else 1
                        out = out + (
                            model.monomial_element(Monomial(tuple(front)), sign * coeff * e)
                            * val
                            * model.monomial_element(Monomial(tuple(rest)))
                        )
                prefix_parity += e * model.generators[i].degree
        return out

    def __repr__(self):
        parts = ", ".join(f"{k} -> {format_element(v)}" for k, v in sorted(self.values.items()))
        return f"Derivation(deg {self.degree}; {parts or '0'})"


def model_differential(model: Model) -> Derivation:
    """The declared differential of a model, as a degree-1 derivation."""
    return Derivation(model, 1, dict(model.differential))


def commutator(d1: Derivation, d2: Derivation) -> Derivation:
    """[D1, D2] = D1 D2 - (-1)^{|D1||D2|} D2 D1, evaluated on generators."""
    if d1.model is not d2.model:
        raise DerivationError("ambient mismatch")
    model = d1.model
    sign = -1 if (d1.degree % 2 and d2.degree % 2) else 1
    values = {}
    for g in model.generators:
        x = model.gen(g.name)
        values[g.name] = d1(d2(x)) - sign * d2(d1(x))
    return Derivation(model, d1.degree + d2.degree, values)


class MCResult:
    """Outcome of a Maurer-Cartan check; falsy iff some generator has a residue."""

    __slots__ = ("witness", "residue")

    def __init__(self, witness: Optional[str] = None, residue: Optional[Element] = None):
        self.witness = witness
        self.residue = residue

    def __bool__(self):
        return self.witness is None

    def __repr__(self):
        if self:
            return "MCResult(pass)"
        return f"MCResult(fail on {self.witness}: {format_element(self.residue)})"


def maurer_cartan_check(d: Derivation) -> MCResult:
    """[D, D]/2 = D*D must vanish on every generator; reports the first residue."""
    if d.degree != 1:
        raise DerivationError("Maurer-Cartan check applies to degree-1 derivations")
    for g in d.model.generators:
        residue = d(d(d.model.gen(g.name)))
        if not residue.is_zero():
            return MCResult(g.name, residue)
    return MCResult()


def adjoint_orbit(v: Derivation, q: Derivation, cap: int = 8):
    """[q, [v,q], [v,[v,q]], ...] until it vanishes; raises if not nilpotent within cap."""
    terms = [q]
    cur = q
    for _ in range(cap):
        cur = commutator(v, cur)
        if cur.is_zero():
            return terms
        terms.append(cur)
    raise DerivationError(f"ad_V not nilpotent within {cap} steps")


def gauge_transform(q: Derivation, v: Derivation, nilpotency_cap: int = 8) -> Derivation:
    """e^{ad_V} Q for a degree-0 vector field V with nilpotent adjoint action.

    ad_V = [V, .], so this is conjugation by e^V.  Under this convention the
    correspondence gauge qbar*q d/dt carries H + q Fbar to H + qbar F on the
    nose; the textbook twist shift H -> H + dB is gauge_transform(Q, -B d/dt).
    """
    if v.degree != 0:
        raise DerivationError("gauge transformations use degree-0 vector fields")
    total = Derivation.zero(q.model, q.degree)
    fact = Fraction(1)
    for k, term in enumerate(adjoint_orbit(v, q, nilpotency_cap)):
        if k:
            fact = fact * k
        total = total + term * (Fraction(1) / fact)
    return total


def homologous_shift(q: Derivation, x0: Derivation) -> Derivation:
    """Q + [Q, X0] for a degree-0 field X0: the infinitesimal gauge move."""
    if x0.degree != 0:
        raise DerivationError("homologous shifts use degree-0 vector fields")
    return q + commutator(q, x0)


def exp_apply(v: Derivation, a: Element, cap: int = 8) -> Element:
    """e^V applied to an element; V must be nilpotent on it within cap steps."""
    out = a
    cur = a
    fact = Fraction(1)
    for k in range(1, cap + 1):
        cur = v(cur)
        if cur.is_zero():
            return out
        fact = fact * k
        out = out + cur * (Fraction(1) / fact)
    raise DerivationError(f"derivation not nilpotent on element within {cap} steps")


def _model_with_differential(gens, formal_dimension, raw_values, name) -> Model:
    """Model whose differential is given by raw (exponents -> coefficient) data."""
    return Model(
        gens,
        formal_dimension=formal_dimension,
        differential=lambda m: {
            g: Element(m, {Monomial(e): c for e, c in terms.items()})
            for g, terms in raw_values.items()
        },
        name=name,
    )


class DgBundle:
    """A base model extended by shifted-line fibers with its homological field.

    Shapes:
      line:           one fiber t of degree n,    Q = d + Theta dt
      two_step:       q (deg 1), t (deg 2),       Q = d + F dq + (H + q Fbar) dt
      correspondence: q, qbar (deg 1), t (deg 2), Q = d + F dq + Fbar dqbar + (H + q Fbar) dt
      flux:           q (deg 3), t (deg 6),       Q = d + F4 dq + (F7 + q F4/2) dt
    """

    def __init__(self, base: Model, fiber_gens, structural, fiber_values, shape, name=""):
        self.base = base
        self.shape = shape
        self.fiber_names = tuple(g.name for g in fiber_gens)
        self.structural = dict(structural)
        gens = list(base.generators) + list(fiber_gens)
        pad = len(fiber_gens)

        # assemble Q's raw values on a throwaway algebra, then rebuild with the
        # differential installed; d*d = 0 there is the Maurer-Cartan equation
        algebra = Model(gens, formal_dimension=base.formal_dimension)
        self.total = algebra
        raw = {
            g: {m.exponents + (0,) * pad: c for m, c in el.terms.items()}
            for g, el in base.differential.items()
        }
        for fname, build in fiber_values.items():
            v = build(self)
            if not v.is_zero():
                raw[fname] = {m.exponents: c for m, c in v.terms.items()}
        try:
            self.total = _model_with_differential(
                gens, base.formal_dimension, raw, name or (base.name + "-bundle")
            )
        except GradedError as e:
            raise BundleError(f"Maurer-Cartan failure: {e}") from e
        self.q = model_differential(self.total)
        self.name = self.total.name

    # -- element transport -------------------------------------------------

    def include_base(self, el: Element) -> Element:
        if el.model is not self.base:
            raise BundleError("expected an element of the base model")
        pad = len(self.fiber_names)
        return Element(
            self.total, {Monomial(m.exponents + (0,) * pad): c for m, c in el.terms.items()}
        )

    def restrict_to_base(self, el: Element) -> Element:
        if el.model is not self.total:
            raise BundleError("expected an element of the total model")
        nbase = len(self.base.generators)
        terms = {}
        for m, c in el.terms.items():
            if any(m.exponents[nbase:]):
                raise BundleError("element has fiber-dependent terms")
            terms[Monomial(m.exponents[:nbase])] = c
        return Element(self.base, terms)

    def is_base_valued(self, el: Element) -> bool:
        nbase = len(self.base.generators)
        return all(not any(m.exponents[nbase:]) for m in el.terms)

    def fiber_coefficients(self, el: Element, fiber: str):
        """Decompose el = sum_k c_k * fiber^k with the fiber power on the right.

        Returns {k: c_k} as elements of the total model with the fiber removed;
        for an odd fiber the sign of moving it past the tail of each monomial is
        folded into the coefficient.
        """
        if el.model is not self.total:
            raise BundleError("expected an element of the total model")
        idx = self.total.index[fiber]
        odd = self.total.generators[idx].is_odd
        out: Dict[int, Dict[Monomial, Fraction]] = {}
        for m, c in el.terms.items():
            k = m.exponents[idx]
            stripped = list(m.exponents)
            stripped[idx] = 0
            if odd and k:
                tail = sum(
                    e
                    for i, e in enumerate(m.exponents)
                    if i > idx and self.total.generators[i].is_odd
                )
                if tail % 2:
                    c = -c
            out.setdefault(k, {})[Monomial(tuple(stripped))] = c
        return {k: Element(self.total, t) for k, t in sorted(out.items())}

    def structural_total(self, key: str) -> Element:
        return self.include_base(self.structural[key])

    @property
    def formal_dimension(self) -> int:
        return self.base.formal_dimension

    def __repr__(self):
        return f"DgBundle({self.shape}; {self.total!r})"

    # -- constructors --------------------------------------------------------

    @classmethod
    def line(cls, base: Model, theta: Element, fiber: str = "t", degree: int = 2, name=""):
        """R[n]-extension by a single fiber with Q(fiber) = theta."""
        return cls(
            base,
            [GradedGenerator(fiber, degree)],
            {"Theta": theta},
            {fiber: lambda b: b.include_base(theta)},
            "line",
            name,
        )

    @classmethod
    def two_step(
        cls, base: Model, f: Element, fbar: Element, h: Element, q: str = "q", t: str = "t", name=""
    ):
        bundle = cls(
            base,
            [GradedGenerator(q, 1), GradedGenerator(t, 2)],
            {"F": f, "Fbar": fbar, "H": h},
            {
                q: lambda b: b.include_base(f),
                t: lambda b: b.include_base(h) + b.total.gen(q) * b.include_base(fbar),
            },
            "two_step",
            name,
        )
        bundle.q_name, bundle.t_name = q, t
        return bundle

    @classmethod
    def correspondence(
        cls,
        base: Model,
        f: Element,
        fbar: Element,
        h: Element,
        q: str = "q",
        qbar: str = "qbar",
        t: str = "t",
        name="",
    ):
        bundle = cls(
            base,
            [GradedGenerator(q, 1), GradedGenerator(qbar, 1), GradedGenerator(t, 2)],
            {"F": f, "Fbar": fbar, "H": h},
            {
                q: lambda b: b.include_base(f),
                qbar: lambda b: b.include_base(fbar),
                t: lambda b: b.include_base(h) + b.total.gen(q) * b.include_base(fbar),
            },
            "correspondence",
            name,
        )
        bundle.q_name, bundle.qbar_name, bundle.t_name = q, qbar, t
        return bundle

    @classmethod
    def flux(cls, base: Model, f4: Element, f7: Element, q: str = "q", t: str = "t", name=""):
        bundle = cls(
            base,
            [GradedGenerator(q, 3), GradedGenerator(t, 6)],
            {"F4": f4, "F7": f7},
            {
                q: lambda b: b.include_base(f4),
                t: lambda b: b.include_base(f7)
                + b.total.gen(q) * b.include_base(f4) * Fraction(1, 2),
            },
            "flux",
            name,
        )
        bundle.q_name, bundle.t_name = q, t
        return bundle


def candidate_two_step(base: Model, f: Element, fbar: Element, h: Element, q="q", t="t"):
    """The field d + F dq + (H + q Fbar) dt over the extended algebra, unvalidated.

    Bundle constructors reject structural data that fails Maurer-Cartan, so
    probing the equation needs a carrier with zero data (always consistent)
    and an explicit candidate derivation on it.  Returns (carrier, field).
    """
    carrier = DgBundle.two_step(base, base.zero(), base.zero(), base.zero(), q, t)
    values = dict(carrier.total.differential)
    values[q] = carrier.include_base(f)
    values[t] = carrier.include_base(h) + carrier.total.gen(q) * carrier.include_base(fbar)
    return carrier, Derivation(carrier.total, 1, values)


def candidate_line(base: Model, theta: Element, fiber="t", degree=2):
    """The field d + Theta dt over the extended algebra, unvalidated."""
    carrier = DgBundle.line(base, base.zero(), fiber, degree)
    values = dict(carrier.total.differential)
    values[fiber] = carrier.include_base(theta)
    return carrier, Derivation(carrier.total, 1, values)
