"""Recovery protocols and the naive-mode policy gate."""

from __future__ import annotations

import random
from itertools import combinations

import pytest

from gruppen.field import binary_field, prime_field
from gruppen.recovery import (
    FULL_STATE,
    MASKED,
    NAIVE,
    ProtocolIncomplete,
    RecoveryLedger,
    RecoveryRefused,
    RecoverySession,
    combine_contributions,
    full_state_contributions,
    leak_extract_demo,
    masked_contribution,
    masked_round1,
    naive_contribution,
    recover_full_state,
    recover_secret,
    recovery_lambdas,
)
from gruppen.scheme import (
    LAYOUT_SECRETS_FIRST,
    Params,
    ParticipantBundle,
    deal_random,
    make_layout,
)


def fixture_2of3(p=13, seed=0):
    params = Params(3, 2, prime_field(p))
    layout = make_layout(params, LAYOUT_SECRETS_FIRST)
    dealing = deal_random(params, layout, random.Random(seed))
    return params, layout, dealing


def run_masked(session, dealing, seed=100):
    rngs = {i: random.Random(seed + i) for i in session.quorum}
    masks = masked_round1(session, rngs)
    if session.mode == FULL_STATE:
        contribs = [
            c
            for i in session.quorum
            for c in full_state_contributions(session, dealing.bundle(i), masks)
        ]
    else:
        contribs = [
            masked_contribution(
                session, dealing.bundle(i), 0, masks[0].sent_by(i), masks[0].received_by(i)
            )
            for i in session.quorum
        ]
    return contribs


# ---------------------------------------------------------------------------
# session plumbing


def test_session_validation():
    params, layout, _ = fixture_2of3()
    with pytest.raises(ValueError, match="unknown mode"):
        RecoverySession(params, layout, 1, (2, 3), "cleartext")
    with pytest.raises(ValueError, match="out of range"):
        RecoverySession(params, layout, 4, (2, 3), NAIVE)
    with pytest.raises(ValueError, match="distinct"):
        RecoverySession(params, layout, 1, (2,), NAIVE)
    with pytest.raises(ValueError, match="distinct"):
        RecoverySession(params, layout, 1, (2, 2), NAIVE)
    with pytest.raises(ValueError, match="own quorum"):
        RecoverySession(params, layout, 1, (1, 2), NAIVE)
    s = RecoverySession(params, layout, 1, (3, 2), MASKED)
    assert s.quorum == (2, 3)  # stored sorted
    assert list(s.slots) == [0]
    assert list(RecoverySession(params, layout, 1, (2, 3), FULL_STATE).slots) == [0, 1]


def test_recovery_lambda_fixture_values():
    # 2-of-3, secrets-first: quorum {2,3} holds points 1, 4 and 2, 5
    params, layout, _ = fixture_2of3(p=13)
    session = RecoverySession(params, layout, 1, (2, 3), FULL_STATE)
    lam0 = recovery_lambdas(session, 0)  # target 0, the lost secret
    e = params.spec.element
    assert lam0 == {(2, 0): e(12), (2, 1): e(6), (3, 0): e(1), (3, 1): e(8)}
    lam1 = recovery_lambdas(session, 1)  # target 3, the lost share
    assert lam1 == {(2, 0): e(2), (2, 1): e(5), (3, 0): e(5), (3, 1): e(2)}


def test_recovery_lambdas_interpolate():
    # the coefficient rows really evaluate the polynomial at the target
    for n, k in [(3, 2), (4, 2), (5, 3), (6, 4)]:
        p = 97
        params = Params(n, k, prime_field(p))
        layout = make_layout(params)
        dealing = deal_random(params, layout, random.Random(n + k))
        r = dealing.polynomial
        session = RecoverySession(params, layout, n, tuple(range(1, k + 1)), FULL_STATE)
        for t in session.slots:
            lam = recovery_lambdas(session, t)
            acc = params.spec.zero()
            for (i, j), c in lam.items():
                acc = acc + c * r.evaluate(layout.point(i, j))
            assert acc == r.evaluate(layout.point(n, t))


# ---------------------------------------------------------------------------
# naive mode


def test_naive_recovers_the_secret_everywhere():
    for n, k in [(3, 2), (4, 2), (4, 3), (5, 3)]:
        params = Params(n, k, prime_field(97))
        layout = make_layout(params)
        dealing = deal_random(params, layout, random.Random(17 * n + k))
        for requester in range(1, n + 1):
            others = [i for i in range(1, n + 1) if i != requester]
            for quorum in combinations(others, k):
                session = RecoverySession(params, layout, requester, quorum, NAIVE)
                contribs = [naive_contribution(session, dealing.bundle(i)) for i in quorum]
                assert recover_secret(session, contribs) == dealing.bundle(requester).secret


def test_naive_contribution_rejects_bad_bundles():
    params, layout, dealing = fixture_2of3()
    session = RecoverySession(params, layout, 1, (2, 3), NAIVE)
    with pytest.raises(ValueError, match="not in the quorum"):
        naive_contribution(session, dealing.bundle(1))
    b2 = dealing.bundle(2)
    with pytest.raises(ValueError, match="lacks its secret"):
        naive_contribution(session, ParticipantBundle(2, None, b2.share))
    with pytest.raises(ValueError, match="malformed"):
        naive_contribution(session, ParticipantBundle(2, b2.secret, b2.share * 2))
    masked_session = RecoverySession(params, layout, 1, (2, 3), MASKED)
    with pytest.raises(ValueError, match="naive contribution"):
        naive_contribution(masked_session, b2)


# ---------------------------------------------------------------------------
# masked modes


def test_masked_recovers_the_secret():
    params, layout, dealing = fixture_2of3(p=101, seed=9)
    session = RecoverySession(params, layout, 2, (1, 3), MASKED)
    contribs = run_masked(session, dealing)
    assert recover_secret(session, contribs) == dealing.bundle(2).secret


def test_masks_blind_but_cancel():
    params, layout, dealing = fixture_2of3(p=101, seed=10)
    naive_session = RecoverySession(params, layout, 1, (2, 3), NAIVE)
    masked_session = RecoverySession(params, layout, 1, (2, 3), MASKED)
    clear = {i: naive_contribution(naive_session, dealing.bundle(i)) for i in (2, 3)}
    blinded = {c.sender: c for c in run_masked(masked_session, dealing)}
    # summands differ, totals agree
    assert any(blinded[i].value != clear[i].value for i in (2, 3))
    total_clear = clear[2].value + clear[3].value
    total_blind = blinded[2].value + blinded[3].value
    assert total_clear == total_blind == dealing.bundle(1).secret


def test_masked_binary_field():
    params = Params(4, 2, binary_field(4))
    layout = make_layout(params)
    dealing = deal_random(params, layout, random.Random(11))
    session = RecoverySession(params, layout, 3, (1, 4), MASKED)
    contribs = run_masked(session, dealing, seed=50)
    assert recover_secret(session, contribs) == dealing.bundle(3).secret


def test_full_state_restores_the_whole_bundle():
    for n, k in [(3, 2), (5, 3), (5, 2)]:
        params = Params(n, k, prime_field(97))
        layout = make_layout(params)
        dealing = deal_random(params, layout, random.Random(23 * n + k))
        quorum = tuple(range(2, k + 2))
        session = RecoverySession(params, layout, 1, quorum, FULL_STATE)
        contribs = run_masked(session, dealing, seed=7)
        restored = recover_full_state(session, contribs)
        assert restored == dealing.bundle(1)


def test_mask_round_requires_every_rng():
    params, layout, _ = fixture_2of3()
    session = RecoverySession(params, layout, 1, (2, 3), MASKED)
    with pytest.raises(ProtocolIncomplete, match=r"\[3\]"):
        masked_round1(session, {2: random.Random(0)})
    naive_session = RecoverySession(params, layout, 1, (2, 3), NAIVE)
    with pytest.raises(ValueError, match="no mask round"):
        masked_round1(naive_session, {2: random.Random(0), 3: random.Random(1)})


def test_masked_contribution_validation():
    params, layout, dealing = fixture_2of3()
    session = RecoverySession(params, layout, 1, (2, 3), MASKED)
    masks = masked_round1(session, {2: random.Random(0), 3: random.Random(1)})
    sent, received = masks[0].sent_by(2), masks[0].received_by(2)
    with pytest.raises(ValueError, match="slot 1"):
        masked_contribution(session, dealing.bundle(2), 1, sent, received)
    with pytest.raises(ProtocolIncomplete, match="sent masks"):
        masked_contribution(session, dealing.bundle(2), 0, {}, received)
    with pytest.raises(ProtocolIncomplete, match="received masks"):
        masked_contribution(session, dealing.bundle(2), 0, sent, {3: received[3]})
    naive_session = RecoverySession(params, layout, 1, (2, 3), NAIVE)
    with pytest.raises(ValueError, match="naive session"):
        masked_contribution(naive_session, dealing.bundle(2), 0, sent, received)


def test_full_state_contribution_validation():
    params, layout, dealing = fixture_2of3()
    fs = RecoverySession(params, layout, 1, (2, 3), FULL_STATE)
    masks = masked_round1(fs, {2: random.Random(0), 3: random.Random(1)})
    with pytest.raises(ProtocolIncomplete, match="mask matrices"):
        full_state_contributions(fs, dealing.bundle(2), masks[:1])
    plain = RecoverySession(params, layout, 1, (2, 3), MASKED)
    with pytest.raises(ValueError, match="full-state contributions"):
        full_state_contributions(plain, dealing.bundle(2), masks)


def test_combine_contribution_bookkeeping():
    params, layout, dealing = fixture_2of3()
    session = RecoverySession(params, layout, 1, (2, 3), NAIVE)
    c2 = naive_contribution(session, dealing.bundle(2))
    c3 = naive_contribution(session, dealing.bundle(3))
    with pytest.raises(ProtocolIncomplete, match=r"missing contributions from \[3\]"):
        combine_contributions(session, [c2])
    with pytest.raises(ValueError, match="duplicate"):
        combine_contributions(session, [c2, c2, c3])
    other = RecoverySession(params, layout, 2, (1, 3), NAIVE)
    stray = naive_contribution(other, dealing.bundle(3))
    with pytest.raises(ValueError, match="does not belong"):
        combine_contributions(session, [c2, stray])


# ---------------------------------------------------------------------------
# the leak and its gate


def test_leak_extract_demo_agrees_with_the_dealing():
    for p in (7, 11, 13, 101):
        for seed in range(5):
            params, layout, dealing = fixture_2of3(p=p, seed=seed)
            session = RecoverySession(params, layout, 1, (2, 3), NAIVE)
            t_b = naive_contribution(session, dealing.bundle(2)).value
            t_c = naive_contribution(session, dealing.bundle(3)).value
            leaked = leak_extract_demo(dealing, t_b, t_c)
            assert leaked == -dealing.bundle(2).secret + dealing.bundle(3).secret


def test_leak_demo_preconditions():
    params = Params(4, 2, prime_field(13))
    layout = make_layout(params, LAYOUT_SECRETS_FIRST)
    dealing = deal_random(params, layout, random.Random(0))
    z = params.spec.zero()
    with pytest.raises(ValueError, match="2-of-3"):
        leak_extract_demo(dealing, z, z)
    params3 = Params(3, 2, prime_field(13))
    wrong_layout = make_layout(params3, "participant-major")
    d = deal_random(params3, wrong_layout, random.Random(0))
    with pytest.raises(ValueError, match="secrets-first"):
        leak_extract_demo(d, z, z)
    binary = Params(3, 2, binary_field(3))
    bd = deal_random(binary, make_layout(binary, LAYOUT_SECRETS_FIRST), random.Random(0))
    zb = binary.spec.zero()
    with pytest.raises(ValueError, match="prime field"):
        leak_extract_demo(bd, zb, zb)


def test_ledger_allows_first_naive_then_excludes_the_requester():
    params, layout, dealing = fixture_2of3()
    ledger = RecoveryLedger(params, layout)
    first = RecoverySession(params, layout, 1, (2, 3), NAIVE)
    ledger.check(first)  # fresh ledger: no refusal
    ledger.record(first)
    again = RecoverySession(params, layout, 1, (2, 3), NAIVE, session_id="S2")
    with pytest.raises(RecoveryRefused, match="participant 1 already ran"):
        ledger.check(again)


def test_ledger_bars_past_requesters_from_quorums():
    params = Params(4, 2, prime_field(13))
    layout = make_layout(params)
    ledger = RecoveryLedger(params, layout)
    ledger.record(RecoverySession(params, layout, 1, (2, 3), NAIVE))
    proposal = RecoverySession(params, layout, 2, (1, 4), NAIVE, session_id="S2")
    with pytest.raises(RecoveryRefused, match=r"quorum members \[1\]"):
        ledger.check(proposal)


def test_ledger_codimension_scan_refuses_second_naive():
    # n=4, k=2: after participant 1 recovers naively from {2,3}, the
    # singleton coalition {1} knows its 3 points plus one independent
    # contribution, codimension 2 < 3.  Any further naive run is refused
    # even with 1 nowhere in it.
    params = Params(4, 2, prime_field(13))
    layout = make_layout(params)
    ledger = RecoveryLedger(params, layout)
    fresh = RecoverySession(params, layout, 4, (2, 3), NAIVE)
    ledger.check(fresh)  # nothing recorded yet: fine
    ledger.record(RecoverySession(params, layout, 1, (2, 3), NAIVE))
    with pytest.raises(RecoveryRefused, match=r"coalition \[1\].*codimension 2 < 3"):
        ledger.check(RecoverySession(params, layout, 4, (2, 3), NAIVE, session_id="S2"))


def test_ledger_ignores_masked_modes():
    params, layout, dealing = fixture_2of3()
    ledger = RecoveryLedger(params, layout)
    ledger.record(RecoverySession(params, layout, 1, (2, 3), NAIVE))
    for mode in (MASKED, FULL_STATE):
        session = RecoverySession(params, layout, 1, (2, 3), mode, session_id="S9")
        ledger.check(session)  # excluded participant, but masked modes pass
        ledger.record(session)
    assert ledger.excluded == {1}
    assert len(ledger.naive_history) == 1
