"""Dense polynomials over a finite field, with Lagrange interpolation.

Coefficients are stored low-order first and padded to a fixed degree
bound, so a Poly with bound D always has exactly D coefficients and
represents a polynomial of degree < D.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .field import FieldElement, FieldSpec, random_element


@dataclass(frozen=True)
class Poly:
    spec: FieldSpec
    coeffs: tuple[FieldElement, ...]

    @property
    def bound(self) -> int:
        """Degree bound D: the polynomial has degree < D."""
        return len(self.coeffs)

    def evaluate(self, x: FieldElement) -> FieldElement:
        self.spec._check(x)
        acc = self.spec.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: "Poly") -> "Poly":
        if self.spec != other.spec:
            raise ValueError("mixed field specs in one operation")
        if self.bound != other.bound:
            raise ValueError("mismatched degree bounds")
        return Poly(self.spec, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))


def zero_poly(spec: FieldSpec, bound: int) -> Poly:
    return Poly(spec, (spec.zero(),) * bound)


def random_poly(spec: FieldSpec, bound: int, rng: random.Random) -> Poly:
    """Uniform polynomial of degree < bound (all coefficients uniform)."""
    return Poly(spec, tuple(random_element(spec, rng) for _ in range(bound)))


@dataclass(frozen=True)
class LagrangeRow:
    """Interpolation coefficients: value at target = sum lambdas[m]*y[m]."""

    nodes: tuple[FieldElement, ...]
    target: FieldElement
    lambdas: tuple[FieldElement, ...]


def _check_distinct(xs: Sequence[FieldElement]) -> None:
    if len({x.value for x in xs}) != len(xs):
        raise ValueError("interpolation nodes must be pairwise distinct")


def lagrange_coefficients(
    nodes: Sequence[FieldElement], target: FieldElement
) -> LagrangeRow:
    if not nodes:
        raise ValueError("no interpolation nodes")
    _check_distinct(nodes)
    spec = nodes[0].spec
    lambdas = []
    for m, xm in enumerate(nodes):
        num = spec.one()
        den = spec.one()
        for mm, xmm in enumerate(nodes):
            if mm == m:
                continue
            num = num * (target - xmm)
            den = den * (xm - xmm)
        lambdas.append(num / den)
    return LagrangeRow(tuple(nodes), target, tuple(lambdas))


def interpolate(points: Iterable[tuple[FieldElement, FieldElement]]) -> Poly:
    """Unique polynomial of degree < len(points) through the given points.

    O(D**2) via the master polynomial and synthetic division; no FFT.
    """
    pts = list(points)
    if not pts:
        raise ValueError("no interpolation points")
    xs = [x for x, _ in pts]
    _check_distinct(xs)
    spec = xs[0].spec
    d = len(pts)

    # master(x) = prod (x - x_m), coefficients low-order first
    master = [spec.one()]
    for xm in xs:
        nxt = [spec.zero()] * (len(master) + 1)
        for i, c in enumerate(master):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - xm * c
        master = nxt

    out = [spec.zero()] * d
    for xm, ym in pts:
        # quotient master / (x - xm) by synthetic division
        q = [spec.zero()] * d
        q[d - 1] = master[d]
        for i in range(d - 1, 0, -1):
            q[i - 1] = master[i] + xm * q[i]
        den = spec.zero()
        acc = spec.zero()
        for c in reversed(q):
            den = den * xm + c
        scale = ym / den
        out = [o + scale * c for o, c in zip(out, q)]
    return Poly(spec, tuple(out))


def random_poly_constrained(
    spec: FieldSpec,
    bound: int,
    constraints: Sequence[tuple[FieldElement, FieldElement]],
    rng: random.Random,
) -> Poly:
    """Uniform polynomial of degree < bound among those hitting the constraints.

    The remaining bound - len(constraints) degrees of freedom are fixed
    by drawing uniform values at auxiliary nodes, chosen as the lowest
    canonical representatives not already used by a constraint, in
    ascending order.  Interpolation through constraints plus auxiliary
    points then yields the polynomial, so enumerating the drawn values
    walks the admissible set exactly once each.
    """
    if len(constraints) > bound:
        raise ValueError("more constraints than degrees of freedom")
    xs = [x for x, _ in constraints]
    _check_distinct(xs)
    if spec.order < bound:
        raise ValueError(f"field of order {spec.order} has too few nodes for bound {bound}")
    used = {x.value for x in xs}
    points = list(constraints)
    rep = 0
    while len(points) < bound:
        if rep not in used:
            points.append((spec.element(rep), random_element(spec, rng)))
        rep += 1
    return interpolate(points)
