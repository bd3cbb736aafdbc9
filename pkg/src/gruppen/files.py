"""Line-oriented file formats: bundles, secrets lists, transcripts.

All three formats are plain ASCII, diff-friendly, and bit-exact: field
elements are written as canonical big-endian hex at the field's fixed
width, so writing and re-reading a file reproduces the same bytes.
Headers carry the full instance (field, n, k, layout id); readers
validate everything and refuse files that disagree with each other.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .field import FieldElement, FieldSpec, field_descriptor, parse_field_descriptor
from .harness import MESSAGE_KINDS, Message, SessionDescriptor, Transcript
from .scheme import LAYOUTS, ParticipantBundle, Params

BUNDLE_MAGIC = "gruppen-bundle"
TRANSCRIPT_MAGIC = "gruppen-transcript"
FORMAT_VERSION = "1"


class FileFormatError(ValueError):
    """A file does not parse as the format it claims to be."""


def _header_lines(magic: str, params: Params, layout_id: str) -> list[str]:
    return [
        f"{magic}: {FORMAT_VERSION}",
        f"field: {field_descriptor(params.spec)}",
        f"n: {params.n}",
        f"k: {params.k}",
        f"layout: {layout_id}",
    ]


def _parse_header(lines: list[str], magic: str, path: str) -> tuple[Params, str, list[str]]:
    """Consume the common header; returns (params, layout_id, rest)."""

    def fail(msg: str):
        raise FileFormatError(f"{path}: {msg}")

    def take(key: str) -> str:
        if not lines:
            fail(f"missing '{key}:' line")
        line = lines.pop(0)
        if ":" not in line:
            fail(f"expected '{key}: ...', got {line!r}")
        got, _, value = line.partition(":")
        if got.strip() != key:
            fail(f"expected '{key}: ...', got {line!r}")
        return value.strip()

    version = take(magic)
    if version != FORMAT_VERSION:
        fail(f"unsupported {magic} version {version!r}")
    try:
        spec = parse_field_descriptor(take("field"))
    except ValueError as exc:
        fail(f"bad field descriptor: {exc}")
    try:
        n = int(take("n"))
        k = int(take("k"))
    except ValueError as exc:
        fail(f"bad n/k: {exc}")
    layout_id = take("layout")
    if layout_id not in LAYOUTS:
        fail(f"unknown layout {layout_id!r} (choose from {', '.join(LAYOUTS)})")
    try:
        return Params(n, k, spec), layout_id, lines
    except ValueError as exc:
        fail(f"bad instance: {exc}")


def _content_lines(text: str) -> list[str]:
    # blank lines and full-line # comments are not content
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def _join(values: Iterable[FieldElement]) -> str:
    return ",".join(v.to_hex() for v in values)


def _split(spec: FieldSpec, text: str, path: str) -> tuple[FieldElement, ...]:
    try:
        return tuple(spec.from_hex(part) for part in text.split(","))
    except ValueError as exc:
        raise FileFormatError(f"{path}: bad element vector {text!r}: {exc}") from None


# ---------------------------------------------------------------------------
# bundle files


def write_bundle(
    path: str,
    params: Params,
    layout_id: str,
    bundle: ParticipantBundle,
    include_secret: bool = True,
) -> None:
    lines = _header_lines(BUNDLE_MAGIC, params, layout_id)
    lines.append(f"participant: {bundle.participant}")
    if include_secret and bundle.secret is not None:
        lines.append(f"secret: {bundle.secret.to_hex()}")
    lines.append(f"share: {_join(bundle.share)}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_bundle(path: str) -> tuple[Params, str, ParticipantBundle]:
    with open(path, "r", encoding="ascii") as fh:
        lines = _content_lines(fh.read())
    params, layout_id, rest = _parse_header(lines, BUNDLE_MAGIC, path)
    fields: dict[str, str] = {}
    for line in rest:
        key, _, value = line.partition(":")
        key = key.strip()
        if key not in ("participant", "secret", "share") or key in fields:
            raise FileFormatError(f"{path}: unexpected line {line!r}")
        fields[key] = value.strip()
    if "participant" not in fields or "share" not in fields:
        raise FileFormatError(f"{path}: bundle needs participant and share lines")
    try:
        participant = int(fields["participant"])
    except ValueError:
        raise FileFormatError(f"{path}: bad participant {fields['participant']!r}") from None
    if not 1 <= participant <= params.n:
        raise FileFormatError(f"{path}: participant {participant} out of range 1..{params.n}")
    secret = None
    if "secret" in fields:
        (secret,) = _split(params.spec, fields["secret"], path)
    share = _split(params.spec, fields["share"], path)
    if len(share) != params.share_len:
        raise FileFormatError(
            f"{path}: share has {len(share)} elements, expected n-k = {params.share_len}"
        )
    return params, layout_id, ParticipantBundle(participant, secret, share)


def read_bundles(paths: Sequence[str]) -> tuple[Params, str, list[ParticipantBundle]]:
    """Read several bundle files that must describe one instance."""
    if not paths:
        raise FileFormatError("no bundle files given")
    params, layout_id, first = read_bundle(paths[0])
    bundles = [first]
    seen = {first.participant}
    for path in paths[1:]:
        p2, l2, b = read_bundle(path)
        if p2 != params or l2 != layout_id:
            raise FileFormatError(f"{path}: instance differs from {paths[0]}")
        if b.participant in seen:
            raise FileFormatError(f"{path}: duplicate bundle for participant {b.participant}")
        seen.add(b.participant)
        bundles.append(b)
    return params, layout_id, bundles


# ---------------------------------------------------------------------------
# secrets files: one hex element per line, # comments allowed


def write_secrets(path: str, spec: FieldSpec, secrets: Sequence[FieldElement]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for s in secrets:
            fh.write(s.to_hex() + "\n")


def read_secrets(path: str, spec: FieldSpec, count: Optional[int] = None) -> list[FieldElement]:
    with open(path, "r", encoding="ascii") as fh:
        lines = _content_lines(fh.read())
    try:
        secrets = [spec.from_hex(line) for line in lines]
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from None
    if count is not None and len(secrets) != count:
        raise FileFormatError(f"{path}: found {len(secrets)} secrets, expected {count}")
    return secrets


# ---------------------------------------------------------------------------
# transcript files


def _session_line(s: SessionDescriptor) -> str:
    parts = [
        f"id={s.session_id}",
        f"kind={s.kind}",
        f"mode={s.mode}",
        f"requester={s.requester}",
        "quorum=" + ",".join(str(m) for m in s.quorum),
    ]
    if s.seed is not None:
        parts.append(f"seed={s.seed}")
    return "session: " + " ".join(parts)


def _parse_session(value: str, path: str) -> SessionDescriptor:
    fields = {}
    for token in value.split():
        key, eq, val = token.partition("=")
        if not eq or key in fields:
            raise FileFormatError(f"{path}: bad session token {token!r}")
        fields[key] = val
    try:
        out = SessionDescriptor(
            session_id=fields.pop("id"),
            kind=fields.pop("kind"),
            mode=fields.pop("mode"),
            requester=int(fields.pop("requester")),
            quorum=tuple(int(m) for m in fields.pop("quorum").split(",")),
            seed=int(fields.pop("seed")) if "seed" in fields else None,
        )
    except KeyError as exc:
        raise FileFormatError(f"{path}: session line missing {exc}") from None
    except ValueError as exc:
        raise FileFormatError(f"{path}: bad session line: {exc}") from None
    if fields:
        raise FileFormatError(f"{path}: unknown session tokens {sorted(fields)}")
    return out


def _message_line(m: Message) -> str:
    return (
        f"message: {m.session} {m.kind} {m.sender}->{m.recipient} "
        f"slot={m.slot} {_join(m.values)}"
    )


def _parse_message(spec: FieldSpec, value: str, path: str) -> Message:
    parts = value.split()
    if len(parts) != 5 or "->" not in parts[2] or not parts[3].startswith("slot="):
        raise FileFormatError(f"{path}: bad message line {value!r}")
    sid, kind, route, slot, payload = parts
    if kind not in MESSAGE_KINDS:
        raise FileFormatError(f"{path}: unknown message kind {kind!r}")
    sender, _, recipient = route.partition("->")
    try:
        return Message(
            session=sid,
            kind=kind,
            sender=int(sender),
            recipient=int(recipient),
            slot=int(slot[len("slot="):]),
            values=_split(spec, payload, path),
        )
    except ValueError as exc:
        if isinstance(exc, FileFormatError):
            raise
        raise FileFormatError(f"{path}: bad message line {value!r}: {exc}") from None


def write_transcript(path: str, transcript: Transcript) -> None:
    lines = _header_lines(TRANSCRIPT_MAGIC, transcript.params, transcript.layout_id)
    lines.extend(_session_line(s) for s in transcript.sessions)
    lines.extend(_message_line(m) for m in transcript.messages)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_transcript(path: str) -> Transcript:
    with open(path, "r", encoding="ascii") as fh:
        lines = _content_lines(fh.read())
    params, layout_id, rest = _parse_header(lines, TRANSCRIPT_MAGIC, path)
    transcript = Transcript(params, layout_id)
    for line in rest:
        key, _, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if key == "session":
            transcript.sessions.append(_parse_session(value, path))
        elif key == "message":
            transcript.messages.append(_parse_message(params.spec, value, path))
        else:
            raise FileFormatError(f"{path}: unexpected line {line!r}")
    known = {s.session_id for s in transcript.sessions}
    loose = sorted({m.session for m in transcript.messages} - known)
    if loose:
        raise FileFormatError(f"{path}: messages reference undeclared sessions {loose}")
    return transcript
