"""Dealerless setup: the participants deal the scheme to themselves.

Each participant i runs a private sub-dealing whose secret vector is
all zeros except their own secret at position i, and sends every other
participant j the share vector of that sub-dealing.  Summing the n
sub-dealings pointwise yields a dealing of the real secrets: the scheme
is linear in the polynomial, so bundles add componentwise.  Nobody ever
holds the aggregate polynomial.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .field import FieldElement
from .scheme import Dealing, Params, ParticipantBundle, PointLayout, deal_with_secrets


class IncompleteSetup(ValueError):
    """Aggregation needs exactly one contribution per participant."""


@dataclass(frozen=True)
class SetupContribution:
    """Everything participant `sender` produces during setup.

    shares_out[j-1] is the share vector destined for participant j
    (including j == sender); own_secret_kept is the secret the sender
    keeps for itself, which nobody else's sub-dealing touches.  The
    sub-polynomial stays sender-side, kept here for demos and tests.
    """

    sender: int
    shares_out: tuple[tuple[FieldElement, ...], ...]
    own_secret_kept: FieldElement
    polynomial: object | None = None


def setup_deal_own(
    params: Params,
    layout: PointLayout,
    i: int,
    secret: FieldElement,
    rng: random.Random,
) -> SetupContribution:
    """Participant i's sub-dealing: secret s_i at position i, zero elsewhere."""
    if not 1 <= i <= params.n:
        raise ValueError(f"participant {i} out of range 1..{params.n}")
    zero = params.spec.zero()
    secrets = tuple(secret if m == i else zero for m in range(1, params.n + 1))
    sub = deal_with_secrets(params, layout, secrets, rng)
    return SetupContribution(
        sender=i,
        shares_out=tuple(b.share for b in sub.bundles),
        own_secret_kept=secret,
        polynomial=sub.polynomial,
    )


def setup_aggregate(
    params: Params, layout: PointLayout, contributions: Sequence[SetupContribution]
) -> Dealing:
    """Pointwise sum of all n sub-dealings.

    This is the reference aggregation an outside auditor would run; the
    message-passing version in the harness must produce byte-identical
    bundles from the same per-party randomness.
    """
    by_sender = {c.sender: c for c in contributions}
    if len(by_sender) != len(contributions) or sorted(by_sender) != list(range(1, params.n + 1)):
        raise IncompleteSetup(
            f"need one contribution from each of 1..{params.n}, "
            f"got {sorted(c.sender for c in contributions)}"
        )
    bundles = []
    for j in range(1, params.n + 1):
        share = by_sender[1].shares_out[j - 1]
        for i in range(2, params.n + 1):
            share = tuple(a + b for a, b in zip(share, by_sender[i].shares_out[j - 1]))
        bundles.append(ParticipantBundle(j, by_sender[j].own_secret_kept, share))
    polynomial = None
    if all(c.polynomial is not None for c in contributions):
        polynomial = by_sender[1].polynomial
        for i in range(2, params.n + 1):
            polynomial = polynomial + by_sender[i].polynomial
    return Dealing(params, layout, tuple(bundles), polynomial)


def homomorphic_add(a: Dealing, b: Dealing) -> Dealing:
    """Bundle-wise sum of two dealings over the same instance and layout."""
    if a.params != b.params or a.layout.layout_id != b.layout.layout_id:
        raise ValueError("can only add dealings of the same instance and layout")
    bundles = []
    for ba, bb in zip(a.bundles, b.bundles):
        secret = ba.secret + bb.secret if ba.secret is not None and bb.secret is not None else None
        bundles.append(
            ParticipantBundle(ba.participant, secret, tuple(x + y for x, y in zip(ba.share, bb.share)))
        )
    polynomial = None
    if a.polynomial is not None and b.polynomial is not None:
        polynomial = a.polynomial + b.polynomial
    return Dealing(a.params, a.layout, tuple(bundles), polynomial)
