"""
Exact arithmetic in the ring of integers of Q or of a quadratic field Q(sqrt d).

Elements are always stored in the integral basis {1, w}, with w = sqrt(d) when
d = 2, 3 (mod 4) and w = (1 + sqrt(d))/2 when d = 1 (mod 4), so every
coordinate is an integer. The minimal polynomial of w is x^2 - t*x + n and all
products are reduced with w^2 = t*w - n.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Union

from sympy import factorint

logger = logging.getLogger(__name__)

RATIONAL = "Q"

_FIELD_PATTERN = re.compile(r"^\s*Q\s*\(\s*sqrt\s*\(?\s*(?P<d>[+-]?\d+)\s*\)?\s*\)\s*$",
                            re.IGNORECASE)


@dataclass(frozen=True)
class FieldCtx:
    """A quadratic field Q(sqrt d), or Q itself.

    Use `make_field` or `parse_field` to build one; the constructor does not
    validate `d`.

    Attributes
    ----------
    d : int
        The squarefree integer under the root, or 1 for the rational field
    """
    d: int

    @property
    def is_rational(self) -> bool:
        return self.d == 1

    @property
    def degree(self) -> int:
        return 1 if self.is_rational else 2

    @property
    def omega_trace(self) -> int:
        """t in the minimal polynomial x^2 - t*x + n of w"""
        if self.is_rational:
            return 0
        return 1 if self.d % 4 == 1 else 0

    @property
    def omega_norm(self) -> int:
        """n in the minimal polynomial x^2 - t*x + n of w"""
        if self.is_rational:
            return 0
        return (1 - self.d) // 4 if self.d % 4 == 1 else -self.d

    @property
    def discriminant(self) -> int:
        if self.is_rational:
            return 1
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def is_totally_real(self) -> bool:
        return self.d > 0

    @property
    def is_rectangular(self) -> bool:
        """True when {1, w} is an orthogonal basis of an imaginary lattice"""
        return self.d < 0 and self.d % 4 in (2, 3)

    @property
    def label(self) -> str:
        if self.is_rational:
            return RATIONAL
        return f"Q(sqrt {self.d})"

    def element(self, a: int, b: int = 0) -> QuadInt:
        """Shorthand for ``QuadInt(a, b, self)``"""
        return QuadInt(a, b, self)

    def zero(self) -> QuadInt:
        return QuadInt(0, 0, self)

    def one(self) -> QuadInt:
        return QuadInt(1, 0, self)

    def omega(self) -> QuadInt:
        if self.is_rational:
            raise ValueError("Q has no generator w")
        return QuadInt(0, 1, self)

    def roots_of_unity(self) -> list[QuadInt]:
        """The finitely many roots of unity in O_K, 1 first"""
        if self.d == -1:
            return [self.one(), self.omega(), -self.one(), -self.omega()]
        if self.d == -3:
            w = self.omega()
            return [self.one(), w, w - 1, -self.one(), -w, 1 - w]
        return [self.one(), -self.one()]

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class QuadInt:
    """The element a + b*w of O_K.

    Supports ``+``, ``-``, ``*`` and non-negative integer powers against other
    elements of the same field and against plain integers.

    Attributes
    ----------
    a : int
        Coefficient of 1
    b : int
        Coefficient of w, always 0 in the rational field
    ctx : FieldCtx
        The field this element belongs to

    Raises
    ------
    ValueError
        If `b` is nonzero in the rational field
    """
    a: int
    b: int
    ctx: FieldCtx

    def __post_init__(self):
        if self.b and self.ctx.is_rational:
            raise ValueError(f"rational field element cannot have w coordinate {self.b}")

    def _lift(self, other: Union[QuadInt, int]) -> QuadInt:
        if isinstance(other, QuadInt):
            if other.ctx != self.ctx:
                raise ValueError(f"mixed fields: {self.ctx} and {other.ctx}")
            return other
        if isinstance(other, int) and not isinstance(other, bool):
            return QuadInt(other, 0, self.ctx)
        return NotImplemented

    def __add__(self, other: Union[QuadInt, int]) -> QuadInt:
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.a + other.a, self.b + other.b, self.ctx)

    def __radd__(self, other: int) -> QuadInt:
        return self.__add__(other)

    def __sub__(self, other: Union[QuadInt, int]) -> QuadInt:
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.a - other.a, self.b - other.b, self.ctx)

    def __rsub__(self, other: int) -> QuadInt:
        return (-self).__add__(other)

    def __neg__(self) -> QuadInt:
        return QuadInt(-self.a, -self.b, self.ctx)

    def __mul__(self, other: Union[QuadInt, int]) -> QuadInt:
        other = self._lift(other)
        if other is NotImplemented:
            return other
        t, n = self.ctx.omega_trace, self.ctx.omega_norm
        bb = self.b * other.b
        return QuadInt(self.a * other.a - n * bb,
                       self.a * other.b + self.b * other.a + t * bb,
                       self.ctx)

    def __rmul__(self, other: int) -> QuadInt:
        return self.__mul__(other)

    def __pow__(self, exponent: int) -> QuadInt:
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"exponent must be a non-negative integer, got {exponent}")
        result = self.ctx.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __bool__(self) -> bool:
        return bool(self.a or self.b)

    def conj(self) -> QuadInt:
        """Galois conjugate; the identity in the rational field"""
        if self.ctx.is_rational:
            return self
        return QuadInt(self.a + self.ctx.omega_trace * self.b, -self.b, self.ctx)

    def norm(self) -> int:
        """Field norm x * conj(x), a rational integer"""
        if self.ctx.is_rational:
            return self.a
        return (self.a * self.a + self.ctx.omega_trace * self.a * self.b
                + self.ctx.omega_norm * self.b * self.b)

    def trace(self) -> int:
        """Field trace x + conj(x), a rational integer"""
        if self.ctx.is_rational:
            return self.a
        return 2 * self.a + self.ctx.omega_trace * self.b

    def canonical_key(self) -> tuple[int, int, int]:
        """Sort key (|a| + |b|, a, b) used for every deterministic tie-break"""
        return abs(self.a) + abs(self.b), self.a, self.b

    def bit_length(self) -> int:
        return max(abs(self.a).bit_length(), abs(self.b).bit_length())

    def coordinates(self) -> tuple[int, int]:
        return self.a, self.b

    def __repr__(self) -> str:
        return f"QuadInt({self.a}, {self.b}, {self.ctx.label!r})"

    def __str__(self) -> str:
        if self.ctx.is_rational or self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}w"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}w"


def make_field(d: Union[int, str]) -> FieldCtx:
    """
    Build the field context for Q(sqrt d), or for Q when passed `RATIONAL`.

    Parameters
    ----------
    d
        A squarefree integer other than 0 and 1, or the tag ``"Q"``

    Returns
    -------
    The validated field context

    Raises
    ------
    ValueError
        If `d` is 0, 1, not squarefree, or neither an integer nor ``"Q"``
    """
    if d == RATIONAL:
        return FieldCtx(1)
    if isinstance(d, bool) or not isinstance(d, int):
        raise ValueError(f"field parameter must be an integer or {RATIONAL!r}, got {d!r}")
    if d in (0, 1):
        raise ValueError(f"d = {d} does not define a quadratic field")
    if abs(d) > 1 and any(e > 1 for e in factorint(abs(d)).values()):
        raise ValueError(f"d = {d} is not squarefree")
    return FieldCtx(d)


def parse_field(text: str) -> FieldCtx:
    """
    Parse a field token such as ``"Q"``, ``"Q(sqrt -1)"``, ``"Q(sqrt(5))"``
    or ``"Q(i)"``.

    Parameters
    ----------
    text
        The field token

    Returns
    -------
    The validated field context

    Raises
    ------
    ValueError
        If the token cannot be parsed or names an excluded d
    """
    if not isinstance(text, str):
        raise ValueError(f"field must be given as a string, got {text!r}")
    token = text.strip()
    if token.upper() == RATIONAL:
        return make_field(RATIONAL)
    if token.replace(" ", "").lower() == "q(i)":
        return make_field(-1)

    match = _FIELD_PATTERN.match(token)
    if not match:
        raise ValueError(f"cannot parse field {text!r}; expected 'Q' or 'Q(sqrt d)'")
    return make_field(int(match.group("d")))
