"""File formats: round-trips are byte-exact, readers validate hard."""

from __future__ import annotations

import random

import pytest

from gruppen.field import binary_field, prime_field
from gruppen.files import (
    FileFormatError,
    read_bundle,
    read_bundles,
    read_secrets,
    read_transcript,
    write_bundle,
    write_secrets,
    write_transcript,
)
from gruppen.harness import parties_from_dealing, run_recovery, run_setup
from gruppen.recovery import FULL_STATE, MASKED, NAIVE
from gruppen.scheme import Params, deal_random, make_layout


@pytest.fixture
def instance():
    params = Params(3, 2, prime_field(13))
    layout = make_layout(params, "secrets-first")
    dealing = deal_random(params, layout, random.Random(1))
    return params, layout, dealing


def rewrite_line(path, match, replacement):
    lines = path.read_text().splitlines()
    out = [replacement if match in line else line for line in lines]
    path.write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# bundles


def test_bundle_round_trip_is_byte_exact(tmp_path, instance):
    params, layout, dealing = instance
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_bundle(str(a), params, layout.layout_id, dealing.bundle(2))
    got_params, got_layout, got = read_bundle(str(a))
    assert (got_params, got_layout, got) == (params, layout.layout_id, dealing.bundle(2))
    write_bundle(str(b), got_params, got_layout, got)
    assert a.read_bytes() == b.read_bytes()


def test_bundle_without_secret(tmp_path, instance):
    params, layout, dealing = instance
    path = tmp_path / "b.txt"
    write_bundle(str(path), params, layout.layout_id, dealing.bundle(1), include_secret=False)
    assert "secret:" not in path.read_text()
    _, _, got = read_bundle(str(path))
    assert got.secret is None and got.share == dealing.bundle(1).share


def test_bundle_binary_field_round_trip(tmp_path):
    params = Params(5, 2, binary_field(8))
    layout = make_layout(params)
    dealing = deal_random(params, layout, random.Random(2))
    path = tmp_path / "b.txt"
    write_bundle(str(path), params, layout.layout_id, dealing.bundle(4))
    got_params, _, got = read_bundle(str(path))
    assert got_params.spec.reduction == params.spec.reduction
    assert got == dealing.bundle(4)


def test_bundle_ignores_comments_and_blanks(tmp_path, instance):
    params, layout, dealing = instance
    path = tmp_path / "b.txt"
    write_bundle(str(path), params, layout.layout_id, dealing.bundle(3))
    decorated = "# a bundle\n\n" + path.read_text().replace("\nn:", "\n# sizes\n\nn:")
    path.write_text(decorated)
    _, _, got = read_bundle(str(path))
    assert got == dealing.bundle(3)


@pytest.mark.parametrize(
    "match,replacement,complaint",
    [
        ("gruppen-bundle:", "gruppen-bundle: 9", "version"),
        ("gruppen-bundle:", "other-format: 1", "expected 'gruppen-bundle"),
        ("field:", "field: p=6", "not prime"),
        ("k:", "k: 9", "bad instance"),
        ("layout:", "layout: diagonal", "unknown layout"),
        ("participant:", "participant: 9", "out of range"),
        ("participant:", "participant: two", "bad participant"),
        ("share:", "share: 1,2,3", "share has 3 elements"),
        ("share:", "share: zz", "bad element vector"),
        ("share:", "custom: 1", "unexpected line"),
    ],
)
def test_bundle_reader_rejections(tmp_path, instance, match, replacement, complaint):
    params, layout, dealing = instance
    path = tmp_path / "b.txt"
    write_bundle(str(path), params, layout.layout_id, dealing.bundle(1))
    rewrite_line(path, match, replacement)
    with pytest.raises(FileFormatError, match=complaint):
        read_bundle(str(path))


def test_bundle_reader_wants_participant_and_share(tmp_path, instance):
    params, layout, dealing = instance
    path = tmp_path / "b.txt"
    write_bundle(str(path), params, layout.layout_id, dealing.bundle(1))
    rewrite_line(path, "share:", "# gone")
    with pytest.raises(FileFormatError, match="participant and share"):
        read_bundle(str(path))


def test_read_bundles_consistency(tmp_path, instance):
    params, layout, dealing = instance
    paths = []
    for i in (1, 2, 3):
        p = tmp_path / f"b{i}.txt"
        write_bundle(str(p), params, layout.layout_id, dealing.bundle(i))
        paths.append(str(p))
    got_params, got_layout, bundles = read_bundles(paths)
    assert [b.participant for b in bundles] == [1, 2, 3]

    with pytest.raises(FileFormatError, match="no bundle files"):
        read_bundles([])
    with pytest.raises(FileFormatError, match="duplicate bundle"):
        read_bundles([paths[0], paths[0]])
    other = Params(3, 2, prime_field(17))
    alien = tmp_path / "alien.txt"
    d17 = deal_random(other, make_layout(other, "secrets-first"), random.Random(3))
    write_bundle(str(alien), other, "secrets-first", d17.bundle(2))
    with pytest.raises(FileFormatError, match="instance differs"):
        read_bundles([paths[0], str(alien)])


# ---------------------------------------------------------------------------
# secrets


def test_secrets_round_trip(tmp_path):
    spec = prime_field(13)
    secrets = [spec.element(v) for v in (0, 7, 12)]
    path = tmp_path / "s.txt"
    write_secrets(str(path), spec, secrets)
    assert read_secrets(str(path), spec) == secrets
    assert read_secrets(str(path), spec, count=3) == secrets
    with pytest.raises(FileFormatError, match="expected 2"):
        read_secrets(str(path), spec, count=2)
    path.write_text("q\n")
    with pytest.raises(FileFormatError):
        read_secrets(str(path), spec)


# ---------------------------------------------------------------------------
# transcripts


def full_transcript(params, layout):
    parties, transcript = run_setup(params, layout, master_seed=77)
    run_recovery(parties, params, layout, 1, (2, 3), NAIVE, transcript=transcript)
    run_recovery(parties, params, layout, 2, (1, 3), MASKED, transcript=transcript)
    parties[3].bundle = None
    run_recovery(
        parties, params, layout, 3, (1, 2), FULL_STATE,
        transcript=transcript, session_seed=5,
    )
    return transcript


def test_transcript_round_trip_is_byte_exact(tmp_path, instance):
    params, layout, _ = instance
    transcript = full_transcript(params, layout)
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    write_transcript(str(a), transcript)
    got = read_transcript(str(a))
    assert got.params == params and got.layout_id == layout.layout_id
    assert got.sessions == transcript.sessions
    assert got.messages == transcript.messages
    write_transcript(str(b), got)
    assert a.read_bytes() == b.read_bytes()


def test_transcript_records_seeds_only_where_given(tmp_path, instance):
    params, layout, _ = instance
    transcript = full_transcript(params, layout)
    path = tmp_path / "t.txt"
    write_transcript(str(path), transcript)
    text = path.read_text()
    assert "kind=setup" in text and "seed=77" in text
    got = read_transcript(str(path))
    assert got.session("S1").seed == 77
    assert got.session("S2").seed is None  # naive runs carry no seed
    assert got.session("S4").seed == 5
    assert any(m.kind == "CONTRIB_FS" for m in got.messages)


@pytest.mark.parametrize(
    "match,replacement,complaint",
    [
        ("gruppen-transcript:", "gruppen-transcript: 0", "version"),
        ("id=S2", "session: id=S2 kind=recover", "missing"),
        ("id=S2", "session: id=S2 kind=recover mode=naive requester=x quorum=2,3", "bad session"),
        ("id=S2", "session: id=S2 id=S2 kind=recover mode=naive requester=1 quorum=2,3", "bad session token"),
        ("id=S2", "session: id=S2 kind=recover mode=naive requester=1 quorum=2,3 color=red", "unknown session tokens"),
        ("S2 CONTRIB 2->1", "message: S2 WHISPER 2->1 slot=0 7", "unknown message kind"),
        ("S2 CONTRIB 2->1", "message: S2 CONTRIB 2->1 7", "bad message line"),
        ("S2 CONTRIB 2->1", "note: hi", "unexpected line"),
    ],
)
def test_transcript_reader_rejections(tmp_path, instance, match, replacement, complaint):
    params, layout, _ = instance
    path = tmp_path / "t.txt"
    write_transcript(str(path), full_transcript(params, layout))
    rewrite_line(path, match, replacement)
    with pytest.raises(FileFormatError, match=complaint):
        read_transcript(str(path))


def test_transcript_rejects_undeclared_sessions(tmp_path, instance):
    params, layout, _ = instance
    path = tmp_path / "t.txt"
    write_transcript(str(path), full_transcript(params, layout))
    rewrite_line(path, "session: id=S3", "# withdrawn")
    with pytest.raises(FileFormatError, match=r"undeclared sessions \['S3'\]"):
        read_transcript(str(path))
