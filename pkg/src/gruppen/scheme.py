"""Core dealing scheme: n participants, each with their own secret.

A single random polynomial r of degree < D = k*(n-k+1) encodes all n
secrets at once.  Participant i owns the value of r at a designated
secret point plus n-k further values (the share).  Any k participants
jointly hold k*(n-k+1) = D values of r and can rebuild it completely,
which recovers every secret; any k-1 participants learn nothing about
the remaining secrets.  The field must have more than n*(n-k+1)
elements so all evaluation points are distinct.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .field import FieldElement, FieldSpec
from .poly import Poly, interpolate, random_poly, random_poly_constrained

LAYOUT_PARTICIPANT_MAJOR = "participant-major"
LAYOUT_SECRETS_FIRST = "secrets-first"
LAYOUTS = (LAYOUT_PARTICIPANT_MAJOR, LAYOUT_SECRETS_FIRST)


class QuorumError(ValueError):
    """Wrong set of bundles handed to a reconstruction."""


@dataclass(frozen=True)
class Params:
    """Instance parameters: n participants, threshold k, field spec."""

    n: int
    k: int
    spec: FieldSpec

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"need at least 3 participants, got n={self.n}")
        if not 2 <= self.k <= self.n - 1:
            raise ValueError(f"threshold must satisfy 2 <= k <= n-1, got k={self.k}")
        needed = self.n * (self.n - self.k + 1)
        if self.spec.order <= needed:
            raise ValueError(
                f"field order {self.spec.order} too small: need more than "
                f"n*(n-k+1) = {needed} elements for distinct evaluation points"
            )

    @property
    def degree_bound(self) -> int:
        """D = k*(n-k+1): the shared polynomial has degree < D."""
        return self.k * (self.n - self.k + 1)

    @property
    def share_len(self) -> int:
        """Elements per share: n-k, which is optimal for this access structure."""
        return self.n - self.k


def point_index(layout_id: str, n: int, k: int, i: int, j: int) -> int:
    """Canonical representative of evaluation point x(i, j).

    participant-major packs each participant's points contiguously;
    secrets-first puts the n secret points at 0..n-1 with all share
    points after them.  Both are pure functions of (n, k, i, j), so
    anyone can recompute the whole layout.
    """
    if not (1 <= i <= n and 0 <= j <= n - k):
        raise ValueError(f"point ({i},{j}) outside layout for n={n}, k={k}")
    if layout_id == LAYOUT_PARTICIPANT_MAJOR:
        return (i - 1) * (n - k + 1) + j
    if layout_id == LAYOUT_SECRETS_FIRST:
        if j == 0:
            return i - 1
        return n + (i - 1) * (n - k) + (j - 1)
    raise ValueError(f"unknown layout {layout_id!r}")


@dataclass(frozen=True)
class PointLayout:
    """All evaluation points of one instance, indexed by (participant, slot).

    Slot 0 is the secret point; slots 1..n-k are the share points.
    """

    params: Params
    layout_id: str
    points: tuple[tuple[FieldElement, ...], ...]

    def point(self, i: int, j: int) -> FieldElement:
        return self.points[i - 1][j]

    def secret_point(self, i: int) -> FieldElement:
        return self.points[i - 1][0]

    def all_points(self) -> list[FieldElement]:
        return [x for row in self.points for x in row]


def make_layout(params: Params, layout_id: str = LAYOUT_PARTICIPANT_MAJOR) -> PointLayout:
    if layout_id not in LAYOUTS:
        raise ValueError(f"unknown layout {layout_id!r} (choose from {', '.join(LAYOUTS)})")
    spec = params.spec
    rows = tuple(
        tuple(
            spec.element(point_index(layout_id, params.n, params.k, i, j))
            for j in range(params.n - params.k + 1)
        )
        for i in range(1, params.n + 1)
    )
    flat = [x.value for row in rows for x in row]
    assert len(set(flat)) == len(flat), "layout produced a repeated point"
    return PointLayout(params, layout_id, rows)


def layout_default(params: Params) -> PointLayout:
    return make_layout(params, LAYOUT_PARTICIPANT_MAJOR)


@dataclass(frozen=True)
class ParticipantBundle:
    """What one participant holds: their secret plus n-k share elements.

    The secret may be None for bundles loaded from a file that withheld
    it (e.g. a participant who lost it); such bundles cannot feed a
    reconstruction or a recovery contribution.
    """

    participant: int
    secret: FieldElement | None
    share: tuple[FieldElement, ...]


@dataclass(frozen=True)
class Dealing:
    """Result of one dealing: every participant's bundle.

    The polynomial is dealer-side data; it never travels to anyone and
    exists here only so demos and tests can check values against it.
    """

    params: Params
    layout: PointLayout
    bundles: tuple[ParticipantBundle, ...]
    polynomial: Poly | None = None

    def bundle(self, i: int) -> ParticipantBundle:
        return self.bundles[i - 1]

    def secrets(self) -> tuple[FieldElement, ...]:
        return tuple(b.secret for b in self.bundles)


def _dealing_from_poly(params: Params, layout: PointLayout, r: Poly) -> Dealing:
    bundles = []
    for i in range(1, params.n + 1):
        values = [r.evaluate(layout.point(i, j)) for j in range(params.n - params.k + 1)]
        bundles.append(ParticipantBundle(i, values[0], tuple(values[1:])))
    assert all(len(b.share) == params.share_len for b in bundles)
    return Dealing(params, layout, tuple(bundles), r)


def deal_random(params: Params, layout: PointLayout, rng: random.Random) -> Dealing:
    """Deal with uniformly random secrets (a uniform degree-<D polynomial)."""
    return _dealing_from_poly(params, layout, random_poly(params.spec, params.degree_bound, rng))


def deal_with_secrets(
    params: Params,
    layout: PointLayout,
    secrets: Sequence[FieldElement],
    rng: random.Random,
) -> Dealing:
    """Deal the given n secrets; everything else is uniform given them."""
    if len(secrets) != params.n:
        raise ValueError(f"need exactly {params.n} secrets, got {len(secrets)}")
    constraints = [(layout.secret_point(i + 1), s) for i, s in enumerate(secrets)]
    r = random_poly_constrained(params.spec, params.degree_bound, constraints, rng)
    return _dealing_from_poly(params, layout, r)


def reconstruct_all(
    params: Params, layout: PointLayout, bundles: Sequence[ParticipantBundle]
) -> tuple[Poly, tuple[FieldElement, ...]]:
    """Rebuild the polynomial and all n secrets from exactly k full bundles."""
    if len({b.participant for b in bundles}) != len(bundles):
        raise QuorumError("duplicate participant in quorum")
    if len(bundles) != params.k:
        raise QuorumError(
            f"quorum must be exactly k={params.k} bundles, got {len(bundles)}"
        )
    points = []
    for b in bundles:
        if not 1 <= b.participant <= params.n:
            raise QuorumError(f"unknown participant {b.participant}")
        if b.secret is None:
            raise QuorumError(f"bundle of participant {b.participant} withheld its secret")
        if len(b.share) != params.share_len:
            raise QuorumError(f"bundle of participant {b.participant} has a malformed share")
        points.append((layout.secret_point(b.participant), b.secret))
        for j, v in enumerate(b.share, start=1):
            points.append((layout.point(b.participant, j), v))
    r = interpolate(points)
    secrets = tuple(r.evaluate(layout.secret_point(i)) for i in range(1, params.n + 1))
    return r, secrets
