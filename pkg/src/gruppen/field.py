"""Finite field arithmetic for the sharing scheme.

Two field families are supported:

  * prime fields GF(p) with p a prime below 2**31, elements represented
    by their canonical residue in [0, p), and
  * binary fields GF(2**s), elements represented by integers in [0, 2**s)
    read as polynomials over GF(2), reduced modulo a fixed irreducible
    polynomial of degree s.

A `FieldSpec` pins down one concrete field; `FieldElement` values carry
their spec and refuse mixed-spec arithmetic.  All arithmetic is exact
integer work, nothing here is constant-time.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

# Canonical reduction polynomials per degree, chosen as the irreducible
# with minimal (weight, integer value) and constant term 1.  Degrees up
# to 16 are re-derivable by the exhaustive check below; larger degrees
# are accepted from this table only.
REDUCTION_POLYS = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11B,
    9: 0x203,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x201B,
    14: 0x4021,
    15: 0x8003,
    16: 0x1002B,
    24: 0x100001B,
    32: 0x10000008D,
    48: 0x100000000002D,
    64: 0x1000000000000001B,
    96: 0x1000000000000000000000641,
    128: 0x100000000000000000000000000000087,
}

_PRIME_LIMIT = 2**31
_EXHAUSTIVE_DEGREE = 16


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _pmod(a: int, m: int) -> int:
    """Remainder of GF(2) polynomial a modulo m."""
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def _is_irreducible(f: int) -> bool:
    # trial division by every polynomial of degree 1..s/2
    s = f.bit_length() - 1
    if s == 1:
        return True
    if f & 1 == 0:
        return False
    for d in range(2, 1 << (s // 2 + 1)):
        if _pmod(f, d) == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Description of one concrete finite field.

    kind is "prime" (modulus p) or "binary" (degree s with a reduction
    polynomial given as an integer bit mask including the x**s term).
    Use `prime_field` / `binary_field` to construct validated specs.
    """

    kind: str
    p: int = 0
    s: int = 0
    reduction: int = 0

    @property
    def order(self) -> int:
        return self.p if self.kind == "prime" else 1 << self.s

    @property
    def hex_width(self) -> int:
        """Digits of the fixed-width hex encoding of one element."""
        if self.kind == "binary":
            return (self.s + 3) // 4
        return max(1, len(f"{self.p - 1:x}"))

    def element(self, value: int) -> "FieldElement":
        """Element with canonical representative value (reduced here)."""
        return FieldElement(self, value % self.order)

    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    def one(self) -> "FieldElement":
        return FieldElement(self, 1 % self.order)

    def from_int(self, value: int) -> "FieldElement":
        if not 0 <= value < self.order:
            raise ValueError(f"value {value} outside [0, {self.order})")
        return FieldElement(self, value)

    def from_bits(self, bits: str) -> "FieldElement":
        """Decode an s-bit string like "101" (most significant bit first)."""
        if self.kind != "binary":
            raise ValueError("bit-string encoding requires a binary field")
        if len(bits) != self.s or any(c not in "01" for c in bits):
            raise ValueError(f"expected a {self.s}-bit string of 0/1")
        return FieldElement(self, int(bits, 2))

    def to_bits(self, elem: "FieldElement") -> str:
        if self.kind != "binary":
            raise ValueError("bit-string encoding requires a binary field")
        self._check(elem)
        return format(elem.value, f"0{self.s}b")

    def from_hex(self, text: str) -> "FieldElement":
        value = int(text, 16)
        if value >= self.order:
            raise ValueError(f"hex value {text!r} outside field of order {self.order}")
        return FieldElement(self, value)

    def _check(self, elem: "FieldElement") -> None:
        if elem.spec != self:
            raise ValueError("mixed field specs in one operation")


def prime_field(p: int) -> FieldSpec:
    """GF(p).  p must be prime (checked by trial division) and < 2**31."""
    if p >= _PRIME_LIMIT:
        raise ValueError(f"prime modulus must be below 2**31, got {p}")
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    return FieldSpec(kind="prime", p=p)


def binary_field(s: int, reduction: int | None = None) -> FieldSpec:
    """GF(2**s) under an irreducible reduction polynomial of degree s.

    Without `reduction` the canonical table entry for s is used.  A
    custom polynomial is verified exhaustively for s <= 16; for larger
    degrees only table entries are accepted, since the exhaustive check
    is no longer affordable.
    """
    if s < 1:
        raise ValueError(f"binary field degree must be >= 1, got {s}")
    if reduction is None:
        if s not in REDUCTION_POLYS:
            raise ValueError(f"no canonical reduction polynomial for degree {s}")
        reduction = REDUCTION_POLYS[s]
    if reduction.bit_length() - 1 != s:
        raise ValueError(f"reduction polynomial must have degree {s}")
    if s <= _EXHAUSTIVE_DEGREE:
        if not _is_irreducible(reduction):
            raise ValueError(f"0x{reduction:x} is reducible over GF(2)")
    elif reduction != REDUCTION_POLYS.get(s):
        raise ValueError(
            f"cannot verify irreducibility for degree {s}; "
            "only the built-in polynomial is accepted"
        )
    return FieldSpec(kind="binary", s=s, reduction=reduction)


@dataclass(frozen=True, slots=True)
class FieldElement:
    """One field element: a spec plus its canonical integer representative."""

    spec: FieldSpec
    value: int

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self.spec._check(other)
        if self.spec.kind == "prime":
            return FieldElement(self.spec, (self.value + other.value) % self.spec.p)
        return FieldElement(self.spec, self.value ^ other.value)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self.spec._check(other)
        if self.spec.kind == "prime":
            return FieldElement(self.spec, (self.value - other.value) % self.spec.p)
        return FieldElement(self.spec, self.value ^ other.value)

    def __neg__(self) -> "FieldElement":
        if self.spec.kind == "prime":
            return FieldElement(self.spec, (-self.value) % self.spec.p)
        return self

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self.spec._check(other)
        if self.spec.kind == "prime":
            return FieldElement(self.spec, (self.value * other.value) % self.spec.p)
        return FieldElement(
            self.spec, _pmod(_clmul(self.value, other.value), self.spec.reduction)
        )

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return self * other.inverse()

    def inverse(self) -> "FieldElement":
        """Multiplicative inverse; raises ZeroDivisionError on zero."""
        if self.value == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        if self.spec.kind == "prime":
            return FieldElement(self.spec, pow(self.value, -1, self.spec.p))
        # extended Euclid over GF(2)[x]
        a, b = self.value, self.spec.reduction
        x0, x1 = 1, 0
        while a != 1:
            shift = a.bit_length() - b.bit_length()
            if shift < 0:
                a, b = b, a
                x0, x1 = x1, x0
                shift = -shift
            a ^= b << shift
            x0 ^= x1 << shift
        return FieldElement(self.spec, _pmod(x0, self.spec.reduction))

    def is_zero(self) -> bool:
        return self.value == 0

    def to_hex(self, fixed_width: bool = True) -> str:
        if fixed_width:
            return format(self.value, f"0{self.spec.hex_width}x")
        return format(self.value, "x")

    def __repr__(self) -> str:
        return f"<{self.value} in {field_descriptor(self.spec)}>"


def random_element(spec: FieldSpec, rng: random.Random) -> FieldElement:
    """Uniform element via rejection sampling on rng.getrandbits."""
    bits = (spec.order - 1).bit_length()
    while True:
        v = rng.getrandbits(bits)
        if v < spec.order:
            return FieldElement(spec, v)


def field_descriptor(spec: FieldSpec) -> str:
    """Short text form used on the command line and in file headers."""
    if spec.kind == "prime":
        return f"p={spec.p}"
    if spec.reduction == REDUCTION_POLYS.get(spec.s):
        return f"gf2={spec.s}"
    return f"gf2={spec.s} poly={spec.reduction:x}"


def parse_field_descriptor(text: str) -> FieldSpec:
    """Inverse of `field_descriptor`: "p=13", "gf2=8", "gf2=8 poly=11b"."""
    parts = text.split()
    if not parts:
        raise ValueError("empty field descriptor")
    head = parts[0]
    if head.startswith("p="):
        if len(parts) != 1:
            raise ValueError(f"bad field descriptor {text!r}")
        return prime_field(int(head[2:]))
    if head.startswith("gf2="):
        s = int(head[4:])
        reduction = None
        if len(parts) == 2 and parts[1].startswith("poly="):
            reduction = int(parts[1][5:], 16)
        elif len(parts) != 1:
            raise ValueError(f"bad field descriptor {text!r}")
        return binary_field(s, reduction)
    raise ValueError(f"bad field descriptor {text!r} (want p=<int> or gf2=<s>)")
