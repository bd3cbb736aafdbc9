"""Private recovery of a participant's lost secret (or whole bundle).

A requester p names a quorum B of k other participants.  Each member
sends linear combinations of its own bundle values so that the sum over
the quorum equals the value p lost; the shared polynomial itself is
never reconstructed by anyone.

Three modes:

  * naive: members send their interpolation sums in the clear.  p ends
    up knowing more than its own secret (see `leak_extract_demo`), so
    this mode is policed by `RecoveryLedger`.
  * masked: members first exchange pairwise random masks whose
    antisymmetric sum cancels, then send masked sums.  p learns its
    secret and nothing else.
  * full-state: the masked protocol run once per slot, so p recovers
    its complete bundle after losing everything.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

from .field import FieldElement, random_element
from .poly import lagrange_coefficients
from .scheme import Dealing, ParticipantBundle, Params, PointLayout

NAIVE = "naive"
MASKED = "masked"
FULL_STATE = "full-state"
MODES = (NAIVE, MASKED, FULL_STATE)


class ProtocolIncomplete(ValueError):
    """A round is missing messages it needs."""


class RecoveryRefused(Exception):
    """The policy gate rejected a naive-mode recovery."""


@dataclass(frozen=True)
class RecoverySession:
    params: Params
    layout: PointLayout
    requester: int
    quorum: tuple[int, ...]
    mode: str
    session_id: str = "S1"

    def __post_init__(self) -> None:
        n, k = self.params.n, self.params.k
        members = tuple(sorted(self.quorum))
        object.__setattr__(self, "quorum", members)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r} (choose from {', '.join(MODES)})")
        if not 1 <= self.requester <= n:
            raise ValueError(f"requester {self.requester} out of range 1..{n}")
        if len(set(members)) != k:
            raise ValueError(f"quorum must be {k} distinct participants, got {members}")
        if any(not 1 <= m <= n for m in members):
            raise ValueError(f"quorum member out of range 1..{n}: {members}")
        if self.requester in members:
            raise ValueError("requester cannot serve in its own quorum")

    @property
    def slots(self) -> range:
        """Slot indices recovered: only the secret, or the whole bundle."""
        if self.mode == FULL_STATE:
            return range(self.params.n - self.params.k + 1)
        return range(1)

    def member_nodes(self, i: int) -> list[FieldElement]:
        return [self.layout.point(i, j) for j in range(self.params.n - self.params.k + 1)]


@lru_cache(maxsize=None)
def recovery_lambdas(session: RecoverySession, slot: int) -> dict[tuple[int, int], FieldElement]:
    """Lagrange coefficients indexed by (member, slot-of-member) for one target.

    The nodes are all k*(n-k+1) points held by the quorum; the target is
    the requester's point for the recovered slot.  The coefficients are
    unique given the node set, so every honest implementation computes
    identical ones.
    """
    nodes = []
    keys = []
    for i in session.quorum:
        for j in range(session.params.n - session.params.k + 1):
            nodes.append(session.layout.point(i, j))
            keys.append((i, j))
    target = session.layout.point(session.requester, slot)
    row = lagrange_coefficients(nodes, target)
    return dict(zip(keys, row.lambdas))


@dataclass(frozen=True)
class Contribution:
    sender: int
    requester: int
    slot: int
    value: FieldElement


def _bundle_values(session: RecoverySession, bundle: ParticipantBundle) -> list[FieldElement]:
    if bundle.participant not in session.quorum:
        raise ValueError(f"participant {bundle.participant} is not in the quorum")
    if bundle.secret is None:
        raise ValueError(f"bundle of participant {bundle.participant} lacks its secret")
    if len(bundle.share) != session.params.share_len:
        raise ValueError(f"bundle of participant {bundle.participant} has a malformed share")
    return [bundle.secret, *bundle.share]


def _interpolation_sum(
    session: RecoverySession, bundle: ParticipantBundle, slot: int
) -> FieldElement:
    lambdas = recovery_lambdas(session, slot)
    values = _bundle_values(session, bundle)
    acc = session.params.spec.zero()
    for j, v in enumerate(values):
        acc = acc + lambdas[(bundle.participant, j)] * v
    return acc


def naive_contribution(session: RecoverySession, bundle: ParticipantBundle) -> Contribution:
    """Member's clear-text summand; the k of them add up to p's secret."""
    if session.mode != NAIVE:
        raise ValueError(f"naive contribution in a {session.mode} session")
    value = _interpolation_sum(session, bundle, 0)
    return Contribution(bundle.participant, session.requester, 0, value)


@dataclass(frozen=True)
class MaskMatrix:
    """Pairwise masks of one slot: values[(i, j)] is drawn by i, sent to j."""

    slot: int
    values: Mapping[tuple[int, int], FieldElement]

    def sent_by(self, i: int) -> dict[int, FieldElement]:
        return {j: v for (ii, j), v in self.values.items() if ii == i}

    def received_by(self, j: int) -> dict[int, FieldElement]:
        return {i: v for (i, jj), v in self.values.items() if jj == j}


def masked_round1(
    session: RecoverySession, rngs: Mapping[int, random.Random]
) -> list[MaskMatrix]:
    """Round 1 of masked modes: every member draws one mask per (slot, member).

    Each member uses its own rng; draws happen slot-major, recipient
    ascending, so a member's masks depend only on its own seed.
    """
    if session.mode == NAIVE:
        raise ValueError("naive mode has no mask round")
    missing = [i for i in session.quorum if i not in rngs]
    if missing:
        raise ProtocolIncomplete(f"no rng for quorum members {missing}")
    per_slot: list[dict[tuple[int, int], FieldElement]] = [{} for _ in session.slots]
    for i in session.quorum:
        for t in session.slots:
            for j in session.quorum:
                per_slot[t][(i, j)] = random_element(session.params.spec, rngs[i])
    return [MaskMatrix(t, values) for t, values in enumerate(per_slot)]


def masked_contribution(
    session: RecoverySession,
    bundle: ParticipantBundle,
    slot: int,
    sent: Mapping[int, FieldElement],
    received: Mapping[int, FieldElement],
) -> Contribution:
    """Member's summand blinded by its mask row minus its mask column.

    The blinding terms are antisymmetric across the quorum, so they
    cancel in the requester's total while making every single summand
    uniform on its own.
    """
    if session.mode == NAIVE:
        raise ValueError("masked contribution in a naive session")
    if slot not in session.slots:
        raise ValueError(f"slot {slot} not recovered in mode {session.mode}")
    i = bundle.participant
    for name, masks in (("sent", sent), ("received", received)):
        if set(masks) != set(session.quorum):
            raise ProtocolIncomplete(
                f"{name} masks of participant {i} do not cover the quorum"
            )
    value = _interpolation_sum(session, bundle, slot)
    for j in session.quorum:
        value = value + sent[j] - received[j]
    return Contribution(i, session.requester, slot, value)


def full_state_contributions(
    session: RecoverySession,
    bundle: ParticipantBundle,
    masks: Sequence[MaskMatrix],
) -> list[Contribution]:
    """All n-k+1 masked summands of one member, one per recovered slot."""
    if session.mode != FULL_STATE:
        raise ValueError(f"full-state contributions in a {session.mode} session")
    if len(masks) != len(session.slots):
        raise ProtocolIncomplete(f"need {len(session.slots)} mask matrices, got {len(masks)}")
    i = bundle.participant
    return [
        masked_contribution(session, bundle, t, masks[t].sent_by(i), masks[t].received_by(i))
        for t in session.slots
    ]


def combine_contributions(
    session: RecoverySession, contributions: Sequence[Contribution]
) -> dict[int, FieldElement]:
    """Requester-side totals per slot; checks every member reported once."""
    per_slot: dict[int, dict[int, FieldElement]] = {t: {} for t in session.slots}
    for c in contributions:
        if c.requester != session.requester or c.slot not in per_slot:
            raise ValueError(f"contribution {c} does not belong to this session")
        if c.sender in per_slot[c.slot]:
            raise ValueError(f"duplicate contribution from participant {c.sender}")
        per_slot[c.slot][c.sender] = c.value
    totals = {}
    for t, got in per_slot.items():
        missing = [i for i in session.quorum if i not in got]
        if missing:
            raise ProtocolIncomplete(f"slot {t} missing contributions from {missing}")
        acc = session.params.spec.zero()
        for i in session.quorum:
            acc = acc + got[i]
        totals[t] = acc
    return totals


def recover_secret(
    session: RecoverySession, contributions: Sequence[Contribution]
) -> FieldElement:
    return combine_contributions(session, contributions)[0]


def recover_full_state(
    session: RecoverySession, contributions: Sequence[Contribution]
) -> ParticipantBundle:
    totals = combine_contributions(session, contributions)
    return ParticipantBundle(
        session.requester,
        totals[0],
        tuple(totals[t] for t in session.slots if t > 0),
    )


def leak_extract_demo(
    dealing: Dealing, t_b: FieldElement, t_c: FieldElement
) -> FieldElement:
    """What a curious requester squeezes out of a naive 2-of-3 recovery.

    Fixture: n=3, k=2, secrets-first layout, so the polynomial holds the
    secrets at 0, 1, 2 and the shares at 3, 4, 5.  Participant 1 asks
    {2, 3} for its secret r(0) and receives the clear sums t_b and t_c.
    Combining them with its own share r(3):

        (2/3) * (r(3) - (2/5)*t_b - (1/4)*t_c)  ==  -r(1) + r(2)

    a nontrivial combination of the two members' secrets that no single
    participant is entitled to.  Returns the extracted value after
    asserting the identity against the dealing.
    """
    params = dealing.params
    if (params.n, params.k) != (3, 2) or dealing.layout.layout_id != "secrets-first":
        raise ValueError("demo needs the 2-of-3 secrets-first fixture")
    if params.spec.kind != "prime" or params.spec.p in (2, 3, 5):
        raise ValueError("demo constants need a prime field with p not in {2, 3, 5}")
    spec = params.spec
    e = spec.element
    share_1 = dealing.bundle(1).share[0]
    extracted = (e(2) / e(3)) * (share_1 - (e(2) / e(5)) * t_b - (e(1) / e(4)) * t_c)
    expected = -dealing.bundle(2).secret + dealing.bundle(3).secret
    assert extracted == expected, "leak identity failed on this dealing"
    return extracted


@dataclass
class RecoveryLedger:
    """Policy state for naive-mode recoveries.

    Tracks who already ran one (those participants are barred from any
    further naive stage, as requester or member) and refuses a proposed
    naive recovery if some coalition of k-1 other participants would be
    left knowing combinations of codimension below n-k+1, the level a
    fresh k-1 coalition has.  Masked modes add no knowledge to anyone
    but the requester and pass unchecked.
    """

    params: Params
    layout: PointLayout
    excluded: set[int] = field(default_factory=set)
    naive_history: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)

    def check(self, session: RecoverySession) -> None:
        """Raises RecoveryRefused if the proposed session must not run."""
        if session.mode != NAIVE:
            return
        if session.requester in self.excluded:
            raise RecoveryRefused(
                f"participant {session.requester} already ran a naive recovery "
                "and is excluded from further recovery stages"
            )
        barred = sorted(set(session.quorum) & self.excluded)
        if barred:
            raise RecoveryRefused(
                f"quorum members {barred} ran naive recoveries earlier "
                "and are excluded from further recovery stages"
            )
        floor = self.params.n - self.params.k + 1
        bad = self._worst_coalition(session)
        if bad is not None:
            coalition, codim = bad
            raise RecoveryRefused(
                f"coalition {sorted(coalition)} would be left with codimension "
                f"{codim} < {floor} after this naive recovery"
            )

    def record(self, session: RecoverySession) -> None:
        if session.mode != NAIVE:
            return
        self.excluded.add(session.requester)
        self.naive_history.append((session.requester, session.quorum))

    def _worst_coalition(self, session: RecoverySession):
        # codimension scan over k-1 coalitions drawn from everyone but the
        # requester; the proposal itself informs only the requester, whose
        # surplus is what the exclusion rule handles, so the scanned views
        # are built from the naive history alone.
        from itertools import combinations

        from . import analysis

        n, k = self.params.n, self.params.k
        floor = n - k + 1
        history = self.naive_history
        others = [i for i in range(1, n + 1) if i != session.requester]
        for coalition in combinations(others, k - 1):
            items: list[object] = []
            for m in coalition:
                for j in range(n - k + 1):
                    items.append(analysis.PointKnown(m, j))
            for idx, (req, quorum) in enumerate(history):
                if req in coalition:
                    for sender in quorum:
                        items.append(
                            analysis.ContribKnown(
                                session_id=f"H{idx}",
                                mode=NAIVE,
                                requester=req,
                                quorum=quorum,
                                sender=sender,
                                slot=0,
                            )
                        )
            view = analysis.View(self.params, self.layout.layout_id, tuple(items))
            km = analysis.km_from_view(view)
            codim = analysis.km_codim(km)
            if codim < floor:
                return coalition, codim
        return None
