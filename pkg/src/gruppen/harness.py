"""Message-level protocol runner.

Wires dealing, dealerless setup and the recovery protocols into actual
executions: parties with private rngs, wire messages, and transcripts
that can be stored, replayed, and turned into an adversary's view for
the analysis module.  Every run is deterministic given the master seed;
per-party seeds are derived by hashing, so no party's randomness
depends on another's.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import analysis
from .dealerless import setup_deal_own
from .field import FieldElement, random_element
from .recovery import (
    FULL_STATE,
    MODES,
    NAIVE,
    ProtocolIncomplete,
    RecoveryLedger,
    RecoverySession,
    full_state_contributions,
    masked_contribution,
    masked_round1,
    naive_contribution,
    recover_full_state,
    recover_secret,
)
from .scheme import Dealing, ParticipantBundle, Params, PointLayout

SETUP_SHARE = "SETUP_SHARE"
MASK = "MASK"
CONTRIB = "CONTRIB"
CONTRIB_FS = "CONTRIB_FS"
MESSAGE_KINDS = (SETUP_SHARE, MASK, CONTRIB, CONTRIB_FS)

DELIVERY_ORDERS = ("index", "reverse")


def derive_party_seed(master_seed: int, index: int) -> int:
    """Per-party seed from the master seed, independent across parties."""
    digest = hashlib.sha256(f"{master_seed}/party/{index}".encode("ascii")).digest()
    return int.from_bytes(digest, "big")


@dataclass
class Party:
    index: int
    rng: random.Random
    bundle: Optional[ParticipantBundle] = None


@dataclass(frozen=True)
class Message:
    """One wire message; `values` is a tuple of field elements."""

    session: str
    kind: str
    sender: int
    recipient: int
    slot: int
    values: tuple[FieldElement, ...]


@dataclass(frozen=True)
class SessionDescriptor:
    """Header of one protocol run inside a transcript.

    `mode` is the recovery mode for recover sessions and the delivery
    order policy for setup sessions.  `seed` is recorded for setup runs
    (recoveries draw from the parties' persistent rngs, so they carry
    none of their own).
    """

    session_id: str
    kind: str  # "setup" | "recover"
    mode: str
    requester: int  # 0 for setup sessions
    quorum: tuple[int, ...]
    seed: Optional[int] = None


@dataclass
class Transcript:
    params: Params
    layout_id: str
    sessions: list[SessionDescriptor] = field(default_factory=list)
    messages: list[Message] = field(default_factory=list)

    def next_session_id(self) -> str:
        return f"S{len(self.sessions) + 1}"

    def session(self, session_id: str) -> SessionDescriptor:
        for s in self.sessions:
            if s.session_id == session_id:
                return s
        raise KeyError(f"no session {session_id!r} in transcript")

    def messages_of(self, session_id: str) -> list[Message]:
        return [m for m in self.messages if m.session == session_id]


def make_parties(params: Params, master_seed: int) -> dict[int, Party]:
    """Fresh parties with derived rngs and no bundles yet."""
    return {
        i: Party(i, random.Random(derive_party_seed(master_seed, i)))
        for i in range(1, params.n + 1)
    }


def parties_from_dealing(dealing: Dealing, master_seed: int) -> dict[int, Party]:
    """Parties holding a dealer's bundles."""
    parties = make_parties(dealing.params, master_seed)
    for i, party in parties.items():
        party.bundle = dealing.bundle(i)
    return parties


def run_setup(
    params: Params,
    layout: PointLayout,
    master_seed: int,
    secrets: Optional[Sequence[FieldElement]] = None,
    delivery_order: str = "index",
) -> tuple[dict[int, Party], Transcript]:
    """Dealerless setup over messages: everyone sub-deals, everyone sums.

    Each party takes its own secret (position i of `secrets`, or a draw
    from its rng), deals it out with zeros at the other secret
    positions, and sends every participant (itself included) its
    sub-share vector.  A party's final share is the pointwise sum of
    the n vectors it received; its secret never leaves the party.  The
    delivery order is a scheduling knob only -- sums commute -- and
    transcripts record it so replays match exactly.
    """
    if delivery_order not in DELIVERY_ORDERS:
        raise ValueError(f"unknown delivery order {delivery_order!r} (choose from {', '.join(DELIVERY_ORDERS)})")
    n = params.n
    if secrets is not None and len(secrets) != n:
        raise ValueError(f"need one secret per participant: {n}, got {len(secrets)}")
    parties = make_parties(params, master_seed)
    transcript = Transcript(params, layout.layout_id)
    sid = transcript.next_session_id()

    own = {}
    messages = []
    for i in range(1, n + 1):
        rng = parties[i].rng
        own[i] = secrets[i - 1] if secrets is not None else random_element(params.spec, rng)
        contribution = setup_deal_own(params, layout, i, own[i], rng)
        for b in range(1, n + 1):
            messages.append(
                Message(sid, SETUP_SHARE, i, b, 0, contribution.shares_out[b - 1])
            )
    messages.sort(key=lambda m: (m.sender, m.recipient))
    if delivery_order == "reverse":
        messages.reverse()

    inbox: dict[int, list[tuple[FieldElement, ...]]] = {b: [] for b in range(1, n + 1)}
    for m in messages:
        inbox[m.recipient].append(m.values)
    for b in range(1, n + 1):
        if len(inbox[b]) != n:
            raise ProtocolIncomplete(f"party {b} received {len(inbox[b])} of {n} setup vectors")
        share = list(inbox[b][0])
        for vec in inbox[b][1:]:
            share = [a + v for a, v in zip(share, vec)]
        parties[b].bundle = ParticipantBundle(b, own[b], tuple(share))

    transcript.sessions.append(
        SessionDescriptor(sid, "setup", delivery_order, 0, tuple(range(1, n + 1)), master_seed)
    )
    transcript.messages.extend(messages)
    return parties, transcript


def run_recovery(
    parties: dict[int, Party],
    params: Params,
    layout: PointLayout,
    requester: int,
    quorum: Sequence[int],
    mode: str,
    ledger: Optional[RecoveryLedger] = None,
    transcript: Optional[Transcript] = None,
    session_seed: Optional[int] = None,
):
    """Execute one recovery over messages; returns (outcome, transcript).

    The outcome is the recovered secret, or the whole bundle in
    full-state mode.  Masks are drawn from the quorum members'
    persistent rngs, so repeating a session produces fresh masks;
    `session_seed` is transcript metadata recording how those rngs were
    seeded, for replays from files.  When a ledger is given, the
    session is checked before any message is sent (RecoveryRefused
    propagates and the transcript is untouched) and recorded after it
    completes.  The requester's party state is restored from the
    outcome.
    """
    if transcript is None:
        transcript = Transcript(params, layout.layout_id)
    elif transcript.params != params or transcript.layout_id != layout.layout_id:
        raise ValueError("transcript belongs to a different instance")
    sid = transcript.next_session_id()
    session = RecoverySession(params, layout, requester, tuple(quorum), mode, sid)
    missing = [m for m in session.quorum if parties.get(m) is None or parties[m].bundle is None]
    if missing:
        raise ProtocolIncomplete(f"quorum members {missing} hold no bundle")
    if ledger is not None:
        ledger.check(session)

    messages = []
    if mode == NAIVE:
        contributions = [naive_contribution(session, parties[m].bundle) for m in session.quorum]
    else:
        masks = masked_round1(session, {m: parties[m].rng for m in session.quorum})
        for t in session.slots:
            for i in session.quorum:
                for j in session.quorum:
                    if i != j:
                        messages.append(Message(sid, MASK, i, j, t, (masks[t].values[(i, j)],)))
        if mode == FULL_STATE:
            contributions = [
                c
                for m in session.quorum
                for c in full_state_contributions(session, parties[m].bundle, masks)
            ]
        else:
            contributions = [
                masked_contribution(
                    session,
                    parties[m].bundle,
                    0,
                    masks[0].sent_by(m),
                    masks[0].received_by(m),
                )
                for m in session.quorum
            ]
    contrib_kind = CONTRIB_FS if mode == FULL_STATE else CONTRIB
    for c in contributions:
        messages.append(Message(sid, contrib_kind, c.sender, requester, c.slot, (c.value,)))

    if mode == FULL_STATE:
        outcome = recover_full_state(session, contributions)
    else:
        outcome = recover_secret(session, contributions)

    req_party = parties.get(requester)
    if req_party is not None:
        if mode == FULL_STATE:
            req_party.bundle = outcome
        elif req_party.bundle is not None:
            req_party.bundle = ParticipantBundle(requester, outcome, req_party.bundle.share)

    if ledger is not None:
        ledger.record(session)
    transcript.sessions.append(
        SessionDescriptor(sid, "recover", mode, requester, session.quorum, session_seed)
    )
    transcript.messages.extend(messages)
    return outcome, transcript


def adversary_view(
    transcript: Transcript,
    coalition: Sequence[int],
    granted: Sequence[int] = (),
    withhold: Iterable[tuple[int, int]] = (),
) -> analysis.View:
    """Everything a coalition saw, as view items for the analysis module.

    Initial data: each member's own bundle values (minus any (i, j)
    pairs in `withhold`, e.g. a requester who lost its state), plus the
    secrets of participants listed in `granted`.  From the transcript:
    every contribution and mask message the coalition sent or received.
    Setup messages are skipped: conditioned on the final polynomial they
    are honest parties' free randomness, so about IT they carry nothing
    beyond the coalition's own bundle values, which are already in the
    initial data.  What they say about honest sub-dealings is bounded
    separately by `analysis.setup_security_report`.
    """
    params = transcript.params
    members = sorted(set(coalition))
    if any(not 1 <= m <= params.n for m in members):
        raise ValueError(f"coalition member out of range 1..{params.n}: {members}")
    skip = set(withhold)
    items: list[object] = []
    for m in members:
        for j in range(params.n - params.k + 1):
            if (m, j) not in skip:
                items.append(analysis.PointKnown(m, j))
    for g in granted:
        items.append(analysis.PointKnown(g, 0))
    for msg in transcript.messages:
        if msg.sender not in members and msg.recipient not in members:
            continue
        if msg.kind in (CONTRIB, CONTRIB_FS):
            s = transcript.session(msg.session)
            items.append(
                analysis.ContribKnown(
                    session_id=msg.session,
                    mode=s.mode,
                    requester=s.requester,
                    quorum=s.quorum,
                    sender=msg.sender,
                    slot=msg.slot,
                )
            )
        elif msg.kind == MASK:
            items.append(analysis.MaskKnown(msg.session, msg.slot, msg.sender, msg.recipient))
        elif msg.kind == SETUP_SHARE:
            continue
        else:
            raise ValueError(f"unknown message kind {msg.kind!r}")
    return analysis.View(params, transcript.layout_id, tuple(dict.fromkeys(items)))
