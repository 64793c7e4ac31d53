"""Seeded random elements and derivations for the identity suites."""

from __future__ import annotations

import random
from fractions import Fraction

from .derivations import Derivation
from .graded import Element, Model


def random_element(model: Model, degree: int, rng: random.Random, density: float = 0.6) -> Element:
    """A random rational combination of the degree basis; may be zero."""
    terms = {}
    for m in model.basis(degree):
        if rng.random() < density:
            num = rng.randint(-3, 3)
            if num:
                terms[m] = Fraction(num, rng.randint(1, 2))
    return Element(model, terms)


def random_inhomogeneous(model: Model, degrees, rng: random.Random) -> Element:
    out = model.zero()
    for d in degrees:
        out = out + random_element(model, d, rng)
    return out


def random_derivation(model: Model, degree: int, rng: random.Random, density: float = 0.5) -> Derivation:
    """Random derivation of the given degree; values on a sparse set of generators."""
    values = {}
    for g in model.generators:
        if rng.random() < density:
            v = random_element(model, g.degree + degree, rng)
            if not v.is_zero():
                values[g.name] = v
    return Derivation(model, degree, values)


def random_contraction(model: Model, rng: random.Random) -> Derivation:
    """Degree -1 derivation supported on degree-1 generators with rational values.

    Members of such families pairwise anticommute to zero, like contractions
    against commuting coordinate fields, which the structured bracket tables
    take for granted.
    """
    values = {}
    for g in model.generators:
        if g.degree == 1 and rng.random() < 0.7:
            c = rng.randint(-2, 2)
            if c:
                values[g.name] = model.scalar(c)
    return Derivation(model, -1, values)
