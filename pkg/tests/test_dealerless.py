"""Dealerless setup equals a central dealing, bundle for bundle."""

from __future__ import annotations

import random
from dataclasses import replace
from itertools import combinations

import pytest

from gruppen.dealerless import (
    IncompleteSetup,
    homomorphic_add,
    setup_aggregate,
    setup_deal_own,
)
from gruppen.field import binary_field, prime_field
from gruppen.scheme import (
    Params,
    deal_with_secrets,
    make_layout,
    reconstruct_all,
)


def make_contributions(params, layout, seed, secrets=None):
    rng = random.Random(seed)
    e = params.spec.element
    if secrets is None:
        secrets = [e(rng.randrange(params.spec.order)) for _ in range(params.n)]
    subs = [
        setup_deal_own(params, layout, i, secrets[i - 1], random.Random(seed * 100 + i))
        for i in range(1, params.n + 1)
    ]
    return secrets, subs


def test_sub_dealing_hits_only_its_own_secret_slot():
    params = Params(4, 2, prime_field(13))
    layout = make_layout(params)
    s = params.spec.element(11)
    sub = setup_deal_own(params, layout, 3, s, random.Random(0))
    r = sub.polynomial
    for m in range(1, 5):
        want = s if m == 3 else params.spec.zero()
        assert r.evaluate(layout.secret_point(m)) == want
    assert sub.own_secret_kept == s
    assert len(sub.shares_out) == 4
    for j in range(1, 5):
        assert sub.shares_out[j - 1] == tuple(
            r.evaluate(layout.point(j, t)) for t in range(1, params.share_len + 1)
        )


def test_setup_deal_own_range_check():
    params = Params(3, 2, prime_field(13))
    layout = make_layout(params)
    with pytest.raises(ValueError, match="out of range"):
        setup_deal_own(params, layout, 5, params.spec.zero(), random.Random(0))


@pytest.mark.parametrize(
    "n,k,field",
    [(3, 2, prime_field(13)), (5, 3, prime_field(17)), (4, 2, binary_field(4))],
)
def test_aggregate_is_a_dealing_of_the_kept_secrets(n, k, field):
    params = Params(n, k, field)
    layout = make_layout(params)
    secrets, subs = make_contributions(params, layout, seed=n * 7 + k)
    dealing = setup_aggregate(params, layout, subs)
    assert list(dealing.secrets()) == secrets
    r = dealing.polynomial
    for i in range(1, n + 1):
        b = dealing.bundle(i)
        assert b.secret == r.evaluate(layout.secret_point(i))
        assert b.share == tuple(r.evaluate(layout.point(i, t)) for t in range(1, n - k + 1))
    for quorum in combinations(range(1, n + 1), k):
        poly, got = reconstruct_all(params, layout, [dealing.bundle(i) for i in quorum])
        assert poly == r and list(got) == secrets


def test_aggregate_without_polynomials_still_builds_bundles():
    params = Params(3, 2, prime_field(13))
    layout = make_layout(params)
    secrets, subs = make_contributions(params, layout, seed=4)
    full = setup_aggregate(params, layout, subs)
    stripped = setup_aggregate(params, layout, [replace(c, polynomial=None) for c in subs])
    assert stripped.polynomial is None
    assert stripped.bundles == full.bundles


def test_aggregate_contribution_bookkeeping():
    params = Params(3, 2, prime_field(13))
    layout = make_layout(params)
    _, subs = make_contributions(params, layout, seed=5)
    with pytest.raises(IncompleteSetup, match=r"got \[1, 2\]"):
        setup_aggregate(params, layout, subs[:2])
    with pytest.raises(IncompleteSetup):
        setup_aggregate(params, layout, subs + subs[:1])
    with pytest.raises(IncompleteSetup):
        setup_aggregate(params, layout, [subs[0], subs[1], replace(subs[2], sender=2)])


def test_aggregate_polynomial_is_constrained_but_not_fixed():
    # same secrets, different randomness: same secret vector, different
    # polynomial and shares
    params = Params(3, 2, prime_field(101))
    layout = make_layout(params)
    e = params.spec.element
    secrets = [e(5), e(17), e(42)]
    _, subs_a = make_contributions(params, layout, seed=6, secrets=secrets)
    _, subs_b = make_contributions(params, layout, seed=7, secrets=secrets)
    a = setup_aggregate(params, layout, subs_a)
    b = setup_aggregate(params, layout, subs_b)
    assert a.secrets() == b.secrets()
    assert a.polynomial != b.polynomial


def test_homomorphic_add_matches_central_dealing_of_summed_secrets():
    params = Params(4, 3, prime_field(17))
    layout = make_layout(params)
    e = params.spec.element
    rng = random.Random(8)
    s1 = [e(rng.randrange(17)) for _ in range(4)]
    s2 = [e(rng.randrange(17)) for _ in range(4)]
    d1 = deal_with_secrets(params, layout, s1, rng)
    d2 = deal_with_secrets(params, layout, s2, rng)
    total = homomorphic_add(d1, d2)
    assert list(total.secrets()) == [a + b for a, b in zip(s1, s2)]
    assert total.polynomial == d1.polynomial + d2.polynomial
    _, got = reconstruct_all(params, layout, [total.bundle(i) for i in (1, 3, 4)])
    assert list(got) == [a + b for a, b in zip(s1, s2)]


def test_homomorphic_add_rejects_mismatched_instances():
    p13 = Params(3, 2, prime_field(13))
    d1 = deal_with_secrets(
        p13, make_layout(p13), [p13.spec.element(i) for i in (1, 2, 3)], random.Random(9)
    )
    p17 = Params(3, 2, prime_field(17))
    d2 = deal_with_secrets(
        p17, make_layout(p17), [p17.spec.element(i) for i in (1, 2, 3)], random.Random(9)
    )
    with pytest.raises(ValueError, match="same instance"):
        homomorphic_add(d1, d2)
    other_layout = deal_with_secrets(
        p13,
        make_layout(p13, "secrets-first"),
        [p13.spec.element(i) for i in (1, 2, 3)],
        random.Random(9),
    )
    with pytest.raises(ValueError, match="same instance"):
        homomorphic_add(d1, other_layout)
