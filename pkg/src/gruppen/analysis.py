"""Security analysis: what does a set of players actually know?

Everything a participant ever sees is a linear functional of the dealt
polynomial, viewed as a vector of D coefficients.  A coalition's view
therefore spans a subspace of functionals; its rank says how many
independent combinations they hold and D - rank (the codimension) how
much room is left.  This module builds those spans from protocol views
(`km_from_view`), computes exact ranks by Gaussian elimination over
GF(p), and cross-checks the linear-algebra picture against a second,
independent verifier: exhaustive enumeration of every polynomial of a
small instance with exact Shannon entropies (`entropy_oracle`,
`verify_perfectness`).

Masked contributions are not plain functionals: until the masks are
granted, each residual mask degree of freedom is tracked as a fresh
auxiliary dimension, and ranks are taken on the quotient that projects
the auxiliary part away.  Rank analysis is done over prime fields; a
binary instance is mapped onto a prime-field twin with identical
(n, k, layout) indices, which preserves the whole linear structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .field import FieldElement, FieldSpec, field_descriptor, prime_field
from .poly import lagrange_coefficients
from .recovery import FULL_STATE, MASKED, MODES, NAIVE
from .scheme import Params, PointLayout, make_layout

_CHUNK = 1 << 19


class InstanceTooLarge(ValueError):
    """The exhaustive oracle refuses instances beyond its budget."""


# ---------------------------------------------------------------------------
# views: structural descriptions of what a coalition has seen


@dataclass(frozen=True)
class PointKnown:
    """The coalition knows the polynomial's value at point (i, j)."""

    i: int
    j: int


@dataclass(frozen=True)
class ContribKnown:
    """The coalition saw one recovery contribution (sent or received)."""

    session_id: str
    mode: str
    requester: int
    quorum: tuple[int, ...]
    sender: int
    slot: int


@dataclass(frozen=True)
class MaskKnown:
    """The coalition knows one pairwise mask value of a masked session."""

    session_id: str
    slot: int
    i: int
    j: int


ViewItem = object  # PointKnown | ContribKnown | MaskKnown


@dataclass(frozen=True)
class View:
    params: Params
    layout_id: str
    items: tuple[ViewItem, ...]


# ---------------------------------------------------------------------------
# prime twin


def _next_prime(m: int) -> int:
    from .field import _is_prime

    c = max(2, m + 1)
    while not _is_prime(c):
        c += 1
    return c


def analysis_instance(params: Params, layout_id: str) -> tuple[Params, PointLayout]:
    """The instance itself if prime, else its prime-field twin.

    The twin keeps (n, k, layout id), so every point keeps its canonical
    index and every functional keeps its shape.
    """
    if params.spec.kind == "prime":
        twin = params
    else:
        p = _next_prime(params.n * (params.n - params.k + 1))
        twin = Params(params.n, params.k, prime_field(p))
    return twin, make_layout(twin, layout_id)


def vandermonde_row(spec: FieldSpec, x: FieldElement, dim: int) -> tuple[int, ...]:
    """(1, x, x^2, ..., x^(dim-1)): the functional "evaluate at x"."""
    row = []
    acc = spec.one()
    for _ in range(dim):
        row.append(acc.value)
        acc = acc * x
    return tuple(row)


# ---------------------------------------------------------------------------
# knowledge matrices


@dataclass
class KnowledgeMatrix:
    """Rows of known functionals over GF(p).

    Each row has dim coefficient entries plus one entry per auxiliary
    (mask) dimension.  Ranks are reported on the coefficient space: the
    span of combinations whose auxiliary part cancels.
    """

    spec: FieldSpec
    dim: int
    aux: tuple[object, ...]
    rows: list[tuple[str, tuple[int, ...]]]

    @property
    def width(self) -> int:
        return self.dim + len(self.aux)


def _contribution_row(
    aparams: Params,
    alayout: PointLayout,
    requester: int,
    quorum: Sequence[int],
    sender: int,
    slot: int,
) -> list[int]:
    """Coefficient row of one contribution: its lambda-weighted point rows."""
    spec = aparams.spec
    nodes = []
    keys = []
    for i in sorted(quorum):
        for j in range(aparams.n - aparams.k + 1):
            nodes.append(alayout.point(i, j))
            keys.append((i, j))
    target = alayout.point(requester, slot)
    lambdas = dict(zip(keys, lagrange_coefficients(nodes, target).lambdas))
    dim = aparams.degree_bound
    row = [0] * dim
    for j in range(aparams.n - aparams.k + 1):
        lam = lambdas[(sender, j)]
        point_row = vandermonde_row(spec, alayout.point(sender, j), dim)
        for c in range(dim):
            row[c] = (row[c] + lam.value * point_row[c]) % spec.p
    return row


def km_from_view(view: View) -> KnowledgeMatrix:
    """One row per known value; masked rows get auxiliary mask entries."""
    aparams, alayout = analysis_instance(view.params, view.layout_id)
    spec = aparams.spec
    dim = aparams.degree_bound

    aux_labels: set[tuple] = set()
    for item in view.items:
        if isinstance(item, MaskKnown):
            aux_labels.add((item.session_id, item.slot, item.i, item.j))
        elif isinstance(item, ContribKnown) and item.mode in (MASKED, FULL_STATE):
            for j in item.quorum:
                if j != item.sender:
                    aux_labels.add((item.session_id, item.slot, item.sender, j))
                    aux_labels.add((item.session_id, item.slot, j, item.sender))
    aux = tuple(sorted(aux_labels))
    aux_col = {label: dim + c for c, label in enumerate(aux)}

    rows: list[tuple[str, tuple[int, ...]]] = []
    for item in view.items:
        full = [0] * (dim + len(aux))
        if isinstance(item, PointKnown):
            point_row = vandermonde_row(spec, alayout.point(item.i, item.j), dim)
            full[:dim] = point_row
            label = f"value({item.i},{item.j})"
        elif isinstance(item, ContribKnown):
            if item.mode not in MODES:
                raise ValueError(f"cannot linearize view item {item!r}")
            full[:dim] = _contribution_row(
                aparams, alayout, item.requester, item.quorum, item.sender, item.slot
            )
            if item.mode in (MASKED, FULL_STATE):
                for j in item.quorum:
                    if j != item.sender:
                        key = (item.session_id, item.slot, item.sender, j)
                        full[aux_col[key]] = (full[aux_col[key]] + 1) % spec.p
                        key = (item.session_id, item.slot, j, item.sender)
                        full[aux_col[key]] = (full[aux_col[key]] - 1) % spec.p
            label = f"contrib({item.sender}->{item.requester},slot={item.slot})"
        elif isinstance(item, MaskKnown):
            full[aux_col[(item.session_id, item.slot, item.i, item.j)]] = 1
            label = f"mask({item.i}->{item.j},slot={item.slot})"
        else:
            raise ValueError(f"cannot linearize view item {item!r}")
        rows.append((label, tuple(full)))
    return KnowledgeMatrix(spec, dim, aux, rows)


def _echelon(rows: Iterable[Sequence[int]], p: int) -> list[tuple[int, list[int]]]:
    """Reduced row echelon form with unit pivots: (pivot column, row) pairs.

    Pivot rows are kept mutually reduced, so reducing any vector by them
    in any order leaves a canonical residual.
    """
    pivots: list[tuple[int, list[int]]] = []
    for row in rows:
        r = _reduce(row, pivots, p)
        lead = next((c for c, v in enumerate(r) if v), None)
        if lead is None:
            continue
        inv = pow(r[lead], -1, p)
        r = [(v * inv) % p for v in r]
        for idx, (col, prow) in enumerate(pivots):
            if prow[lead]:
                f = prow[lead]
                pivots[idx] = (col, [(a - f * b) % p for a, b in zip(prow, r)])
        pivots.append((lead, r))
    return pivots


def _reduce(row: Sequence[int], pivots: list[tuple[int, list[int]]], p: int) -> list[int]:
    r = [v % p for v in row]
    for col, prow in pivots:
        if r[col]:
            f = r[col]
            r = [(a - f * b) % p for a, b in zip(r, prow)]
    return r


def km_rank(km: KnowledgeMatrix) -> int:
    """Independent combinations known about the coefficient space.

    rank(full matrix) - rank(auxiliary part): exactly the combinations
    whose mask contributions cancel, i.e. real knowledge about the
    polynomial rather than about the masks.
    """
    p = km.spec.p
    full = _echelon((r for _, r in km.rows), p)
    aux_only = _echelon((r[km.dim :] for _, r in km.rows), p)
    return len(full) - len(aux_only)


def km_codim(km: KnowledgeMatrix) -> int:
    return km.dim - km_rank(km)


def km_contains(km: KnowledgeMatrix, row: Sequence[int]) -> bool:
    """Is this coefficient-space functional determined by the view?"""
    if len(row) != km.dim:
        raise ValueError(f"functional must have {km.dim} entries")
    p = km.spec.p
    pivots = _echelon((r for _, r in km.rows), p)
    padded = list(row) + [0] * len(km.aux)
    return not any(_reduce(padded, pivots, p))


def km_leaked_combination(
    km: KnowledgeMatrix, targets: Sequence[Sequence[int]]
) -> Optional[tuple[int, ...]]:
    """Nontrivial coefficients c with sum(c[m] * targets[m]) in the span.

    Returns None when only the trivial combination lies in the span.
    Used with the secret functionals of participants outside a
    coalition: any hit is information the coalition must not have.
    """
    p = km.spec.p
    pivots = _echelon((r for _, r in km.rows), p)
    width = km.dim + len(km.aux)
    residuals = []
    for t in targets:
        if len(t) != km.dim:
            raise ValueError(f"target functional must have {km.dim} entries")
        residuals.append(_reduce(list(t) + [0] * (width - km.dim), pivots, p))
    m = len(residuals)
    # find a nonzero left-kernel vector of the residual matrix: row-reduce
    # [residual | identity] and read the combination off any zeroed row
    kernel_pivots: list[tuple[int, list[int]]] = []
    for i in range(m):
        r = _reduce(residuals[i] + [int(i == t) for t in range(m)], kernel_pivots, p)
        lead = next((c for c, v in enumerate(r[:width]) if v), None)
        if lead is None:
            combo = tuple(r[width:])
            assert any(combo)
            return combo
        inv = pow(r[lead], -1, p)
        r = [(v * inv) % p for v in r]
        for idx, (col, prow) in enumerate(kernel_pivots):
            if prow[lead]:
                f = prow[lead]
                kernel_pivots[idx] = (col, [(a - f * b) % p for a, b in zip(prow, r)])
        kernel_pivots.append((lead, r))
    return None


def secret_rows(params: Params, layout_id: str, participants: Sequence[int]) -> list[tuple[int, ...]]:
    """Secret functionals of the given participants, in the analysis field."""
    aparams, alayout = analysis_instance(params, layout_id)
    return [
        vandermonde_row(aparams.spec, alayout.secret_point(i), aparams.degree_bound)
        for i in participants
    ]


# ---------------------------------------------------------------------------
# dealerless setup leakage


@dataclass
class SetupLeakageCheck:
    """What a coalition's received setup messages say about one honest party."""

    honest: int
    rank: int
    expected: int
    secret_hidden: bool

    @property
    def ok(self) -> bool:
        return self.rank == self.expected and self.secret_hidden


def setup_security_report(
    params: Params, layout_id: str, coalition: Sequence[int]
) -> list[SetupLeakageCheck]:
    """Rank test of the setup messages a coalition receives.

    An honest party's sub-polynomial is pinned at the n secret points
    and free on a (k-1)*(n-k)-dimensional space.  The coalition's
    received values are functionals on that free space; when they have
    full rank the received vector is uniform whatever the secret is, so
    the messages carry zero information about it.  secret_hidden checks
    the complementary condition directly: the secret's direction lies
    inside the image of the free space on the received coordinates.
    """
    aparams, alayout = analysis_instance(params, layout_id)
    spec = aparams.spec
    n, k = aparams.n, aparams.k
    members = sorted(set(coalition))
    if any(not 1 <= m <= n for m in members):
        raise ValueError(f"coalition member out of range 1..{n}: {members}")
    if len(members) > k - 1:
        raise ValueError(f"coalition of {len(members)} is a quorum; at most k-1 = {k-1}")
    secret_points = [alayout.secret_point(i) for i in range(1, n + 1)]
    free = aparams.degree_bound - n
    received = [alayout.point(b, j) for b in members for j in range(1, n - k + 1)]

    def z_at(x: FieldElement) -> FieldElement:
        acc = spec.one()
        for s in secret_points:
            acc = acc * (x - s)
        return acc

    def basis_at(i: int, x: FieldElement) -> FieldElement:
        # degree-<n interpolation basis over the secret points
        num = spec.one()
        den = spec.one()
        xi = alayout.secret_point(i)
        for m, s in enumerate(secret_points, start=1):
            if m == i:
                continue
            num = num * (x - s)
            den = den * (xi - s)
        return num / den

    base_rows = []
    for x in received:
        z = z_at(x)
        row = []
        acc = z
        for _ in range(free):
            row.append(acc.value)
            acc = acc * x
        base_rows.append(row)
    base_rank = len(_echelon(base_rows, spec.p))

    checks = []
    for i in range(1, n + 1):
        if i in members:
            continue
        aug_rows = [
            row + [basis_at(i, x).value] for row, x in zip(base_rows, received)
        ]
        aug_rank = len(_echelon(aug_rows, spec.p))
        checks.append(
            SetupLeakageCheck(
                honest=i,
                rank=base_rank,
                expected=len(received),
                secret_hidden=aug_rank == base_rank,
            )
        )
    return checks


# ---------------------------------------------------------------------------
# exhaustive entropy oracle


@dataclass
class EntropyReport:
    spec: FieldSpec
    dim: int
    total: int
    bits: dict[str, float]
    twinned: bool = False


def standard_variables(aparams: Params, alayout: PointLayout) -> dict[tuple, tuple[int, ...]]:
    """Functional per secret and per share coordinate of the instance."""
    dim = aparams.degree_bound
    out: dict[tuple, tuple[int, ...]] = {}
    for i in range(1, aparams.n + 1):
        out[("secret", i)] = vandermonde_row(aparams.spec, alayout.secret_point(i), dim)
        for j in range(1, aparams.n - aparams.k + 1):
            out[("share", i, j)] = vandermonde_row(aparams.spec, alayout.point(i, j), dim)
    return out


def coalition_view_labels(params: Params, coalition: Sequence[int]) -> list[tuple]:
    labels: list[tuple] = []
    for i in coalition:
        labels.append(("secret", i))
        labels.extend(("share", i, j) for j in range(1, params.n - params.k + 1))
    return labels


def _exact_entropies(
    p: int,
    dim: int,
    variables: Mapping[tuple, Sequence[int]],
    queries: Mapping[object, tuple],
    max_size: int,
) -> dict[object, float]:
    """Exact joint entropies by enumerating all p**dim polynomials.

    Counts are exact integers; the only floating point is the final
    logarithm.  Enumeration runs in chunks and merges count tables, so
    memory stays bounded.
    """
    total = p**dim
    if total > max_size:
        raise InstanceTooLarge(
            f"enumeration would visit p^D = {p}^{dim} = {total} polynomials "
            f"(limit {max_size})"
        )
    order = sorted(variables)
    col = {label: c for c, label in enumerate(order)}
    rows = np.array([list(variables[label]) for label in order], dtype=np.int64)

    counters: dict[object, dict[int, int]] = {name: {} for name in queries}
    packers = {}
    for name, labels in queries.items():
        idxs = [col[lab] for lab in labels]
        if p ** len(idxs) > 2**62:
            raise InstanceTooLarge(f"query {name!r} packs too many variables")
        packers[name] = (idxs, np.array([p**t for t in range(len(idxs))], dtype=np.int64))

    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        idx = np.arange(start, stop, dtype=np.int64)
        coeffs = np.empty((stop - start, dim), dtype=np.int64)
        for d in range(dim):
            coeffs[:, d] = idx % p
            idx //= p
        values = (coeffs @ rows.T) % p
        for name, (idxs, powers) in packers.items():
            keys = values[:, idxs] @ powers if idxs else np.zeros(stop - start, dtype=np.int64)
            uniq, cnts = np.unique(keys, return_counts=True)
            table = counters[name]
            for key, cnt in zip(uniq.tolist(), cnts.tolist()):
                table[key] = table.get(key, 0) + cnt
    out = {}
    log_total = math.log2(total)
    for name, table in counters.items():
        assert sum(table.values()) == total
        h = log_total - sum(c * math.log2(c) for c in table.values()) / total
        out[name] = h
    return out


def entropy_oracle(
    params: Params,
    layout_id: str,
    query_sets: Mapping[str, Sequence[tuple]],
    extra_functionals: Mapping[tuple, Sequence[int]] | None = None,
    max_size: int = 10_000_000,
) -> EntropyReport:
    """Shannon entropy (bits) of each queried set of scheme variables.

    Variables are the secrets ("secret", i), the share coordinates
    ("share", i, j), and any extra linear functionals supplied as
    coefficient rows.  Binary instances are analyzed on their prime
    twin, which preserves all rank-determined entropies up to the
    change of log2|F|.
    """
    aparams, alayout = analysis_instance(params, layout_id)
    variables = standard_variables(aparams, alayout)
    if extra_functionals:
        for label, row in extra_functionals.items():
            if len(row) != aparams.degree_bound:
                raise ValueError(f"functional {label!r} has wrong length")
            variables[label] = tuple(v % aparams.spec.p for v in row)
    queries = {name: tuple(labels) for name, labels in query_sets.items()}
    for name, labels in queries.items():
        unknown = [lab for lab in labels if lab not in variables]
        if unknown:
            raise ValueError(f"query {name!r} uses unknown variables {unknown}")
    bits = _exact_entropies(
        aparams.spec.p, aparams.degree_bound, variables, queries, max_size
    )
    return EntropyReport(
        spec=aparams.spec,
        dim=aparams.degree_bound,
        total=aparams.spec.p**aparams.degree_bound,
        bits=bits,
        twinned=params.spec.kind != "prime",
    )


# ---------------------------------------------------------------------------
# perfectness


@dataclass
class PerfectnessCheck:
    target: int
    coalition: tuple[int, ...]
    bits: float
    expected: float

    @property
    def deviation(self) -> float:
        return abs(self.bits - self.expected)


@dataclass
class PerfectnessReport:
    description: str
    tol: float
    checks: list[PerfectnessCheck]

    @property
    def max_deviation(self) -> float:
        return max((c.deviation for c in self.checks), default=0.0)

    @property
    def ok(self) -> bool:
        return all(c.deviation <= self.tol for c in self.checks)


def verify_perfectness(
    params: Params,
    layout_id: str,
    tol: float = 1e-9,
    max_size: int = 10_000_000,
) -> PerfectnessReport:
    """Exhaustively check that small coalitions learn exactly nothing.

    For every target i and every coalition B of at most k-1 others, the
    conditional entropy of i's secret given B's full view and all other
    secrets must still be one full field element.
    """
    aparams, alayout = analysis_instance(params, layout_id)
    n, k = params.n, params.k
    expected = math.log2(aparams.spec.order)

    cases = []
    queries: dict[object, tuple] = {}
    for i in range(1, n + 1):
        others = [m for m in range(1, n + 1) if m != i]
        for size in range(0, k):
            for coalition in combinations(others, size):
                cond = tuple(
                    coalition_view_labels(params, coalition)
                    + [("secret", m) for m in others if m not in coalition]
                )
                joint = cond + (("secret", i),)
                queries[cond] = cond
                queries[joint] = joint
                cases.append((i, coalition, cond, joint))
    bits = _exact_entropies(
        aparams.spec.p, aparams.degree_bound, standard_variables(aparams, alayout),
        queries, max_size,
    )
    checks = [
        PerfectnessCheck(i, coalition, bits[joint] - bits[cond], expected)
        for i, coalition, cond, joint in cases
    ]
    description = (
        f"{field_descriptor(aparams.spec)} n={n} k={k}"
        + (" (prime twin)" if params.spec.kind != "prime" else "")
    )
    return PerfectnessReport(description, tol, checks)


def sabotage_perfectness(spec: FieldSpec, tol: float = 1e-9) -> PerfectnessReport:
    """Negative control: a 3-player "scheme" whose shares are sums of the
    other two secrets (xor in binary fields).  Reconstruction works for
    any 2 players, but single players are NOT kept ignorant once other
    secrets leak, so this must fail the perfectness check.
    """
    order = spec.order
    if order**3 > 10_000_000:
        raise InstanceTooLarge(f"order {order} too large for the sabotage fixture")
    if spec.kind == "prime":
        add = lambda a, b: (a + b) % spec.p
    else:
        add = lambda a, b: a ^ b

    def all_vars(a: int, b: int, c: int) -> dict[tuple, int]:
        return {
            ("secret", 1): a,
            ("secret", 2): b,
            ("secret", 3): c,
            ("share", 1, 1): add(c, b),
            ("share", 2, 1): add(a, c),
            ("share", 3, 1): add(b, a),
        }

    cases = []
    queries: dict[object, tuple] = {}
    for i in (1, 2, 3):
        others = [m for m in (1, 2, 3) if m != i]
        for coalition in [()] + [(m,) for m in others]:
            cond = tuple(
                [lab for m in coalition for lab in (("secret", m), ("share", m, 1))]
                + [("secret", m) for m in others if m not in coalition]
            )
            joint = cond + (("secret", i),)
            queries[cond] = cond
            queries[joint] = joint
            cases.append((i, coalition, cond, joint))

    tables: dict[object, dict[tuple, int]] = {q: {} for q in queries}
    for a in range(order):
        for b in range(order):
            for c in range(order):
                values = all_vars(a, b, c)
                for q, labels in queries.items():
                    key = tuple(values[lab] for lab in labels)
                    tables[q][key] = tables[q].get(key, 0) + 1
    total = order**3
    log_total = math.log2(total)
    bits = {
        q: log_total - sum(cnt * math.log2(cnt) for cnt in table.values()) / total
        for q, table in tables.items()
    }
    expected = math.log2(order)
    checks = [
        PerfectnessCheck(i, coalition, bits[joint] - bits[cond], expected)
        for i, coalition, cond, joint in cases
    ]
    return PerfectnessReport(
        f"pairwise-sum sabotage over {field_descriptor(spec)}", tol, checks
    )
