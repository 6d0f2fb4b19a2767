"""Exact arithmetic foundations.

Laurent polynomials in ``v`` (for symbolic super quantum integer identities),
elements of cyclotomic fields (for every quantity living at ``q = e^{2 pi i/r}``)
and the bookkeeping attached to the order ``r`` of ``q``.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import flint

Rational = Union[int, Fraction]

DEFAULT_CONDUCTOR_CAP = 20000


class ConductorError(ValueError):
    """Raised when a cyclotomic conductor is incompatible or exceeds the cap."""


class ExcludedRootError(ValueError):
    """Raised for orders r of q that the theory excludes (r < 3 or r = 4)."""


def conductor_cap() -> int:
    raw = os.environ.get("QTOP_CONDUCTOR_CAP")
    if raw is None:
        return DEFAULT_CONDUCTOR_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConductorError(f"QTOP_CONDUCTOR_CAP must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ConductorError("QTOP_CONDUCTOR_CAP must be positive")
    return cap


def as_fraction(x: Rational | str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


# ---------------------------------------------------------------------------
# Laurent polynomials


def _to_fmpz_poly(coeffs: Mapping[int, int], shift: int) -> flint.fmpz_poly:
    top = max(coeffs) - shift
    dense = [0] * (top + 1)
    for e, c in coeffs.items():
        dense[e - shift] = c
    return flint.fmpz_poly(dense)


def _from_fmpz_poly(poly: flint.fmpz_poly, shift: int) -> dict[int, int]:
    return {i + shift: int(c) for i, c in enumerate(poly.coeffs()) if c != 0}


class LaurentPolynomial:
    """Element of Z[v, v^-1], stored sparsely as ``{exponent: coefficient}``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        self._c: dict[int, int] = {}
        if coeffs:
            for e, c in coeffs.items():
                c = int(c)
                if c:
                    self._c[int(e)] = c

    @classmethod
    def monomial(cls, exponent: int, coeff: int = 1) -> LaurentPolynomial:
        return cls({exponent: coeff})

    @classmethod
    def constant(cls, c: int) -> LaurentPolynomial:
        return cls({0: c})

    @property
    def coefficients(self) -> dict[int, int]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def min_exponent(self) -> int:
        return min(self._c)

    def max_exponent(self) -> int:
        return max(self._c)

    def __len__(self) -> int:
        return len(self._c)

    @staticmethod
    def _coerce(other) -> LaurentPolynomial:
        if isinstance(other, LaurentPolynomial):
            return other
        if isinstance(other, int):
            return LaurentPolynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._c)
        for e, c in other._c.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        res = LaurentPolynomial()
        res._c = out
        return res

    __radd__ = __add__

    def __neg__(self):
        res = LaurentPolynomial()
        res._c = {e: -c for e, c in self._c.items()}
        return res

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._c or not other._c:
            return LaurentPolynomial()
        if len(self._c) > 16 and len(other._c) > 16:
            sa, sb = self.min_exponent(), other.min_exponent()
            prod = _to_fmpz_poly(self._c, sa) * _to_fmpz_poly(other._c, sb)
            res = LaurentPolynomial()
            res._c = _from_fmpz_poly(prod, sa + sb)
            return res
        out: dict[int, int] = {}
        for e1, c1 in self._c.items():
            for e2, c2 in other._c.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self._c) != 1:
                raise ValueError("negative powers only exist for monomials")
            (e, c), = self._c.items()
            if c not in (1, -1):
                raise ValueError("negative powers only exist for unit monomials")
            return LaurentPolynomial({e * n: c ** (-n)})
        result = LaurentPolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def exact_div(self, other: LaurentPolynomial) -> LaurentPolynomial:
        """Quotient in Z[v, v^-1]; raises ValueError when the division is not exact."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if self.is_zero():
            return LaurentPolynomial()
        sa, sb = self.min_exponent(), other.min_exponent()
        num = _to_fmpz_poly(self._c, sa)
        den = _to_fmpz_poly(other._c, sb)
        quo, rem = divmod(num, den)
        if not rem.is_zero() or quo * den != num:
            raise ValueError("division is not exact in Z[v, v^-1]")
        res = LaurentPolynomial()
        res._c = _from_fmpz_poly(quo, sa - sb)
        return res

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __repr__(self):
        if not self._c:
            return "LaurentPolynomial(0)"
        terms = " + ".join(f"{c}*v^{e}" for e, c in sorted(self._c.items()))
        return f"LaurentPolynomial({terms})"

    def evaluate(self, x: complex) -> complex:
        return sum(c * x**e for e, c in self._c.items())

    def evaluate_at_root(self, conductor: int, k: int = 1) -> CyclotomicNumber:
        """Substitute v = zeta_M^k and return the exact cyclotomic value."""
        field = cyclotomic_field(conductor)
        dense = [0] * conductor
        for e, c in self._c.items():
            dense[(e * k) % conductor] += c
        return field.from_coeffs(dense)


V = LaurentPolynomial.monomial(1)


@lru_cache(maxsize=None)
def super_bracket(n: int) -> LaurentPolynomial:
    """The super quantum integer <n> = sum_{i<n} (-1)^(n+1+i) v^(n-1-2i)."""
    if n < 0:
        raise ValueError("super_bracket is defined for n >= 0")
    return LaurentPolynomial({n - 1 - 2 * i: (-1) ** (n + 1 + i) for i in range(n)})


@lru_cache(maxsize=None)
def super_factorial(n: int) -> LaurentPolynomial:
    if n < 0:
        raise ValueError("super_factorial is defined for n >= 0")
    if n == 0:
        return LaurentPolynomial.constant(1)
    return super_factorial(n - 1) * super_bracket(n)


@lru_cache(maxsize=None)
def super_binomial(n: int, k: int) -> LaurentPolynomial:
    """<n choose k> = <n>!/(<n-k>! <k>!), computed by exact division.

    Built incrementally as <n choose k-1> <n-k+1> / <k>, where every
    intermediate quotient is again a Laurent polynomial.
    """
    if n < 0:
        raise ValueError("super_binomial is defined for n >= 0")
    if k < 0 or k > n:
        return LaurentPolynomial()
    if k == 0 or k == n:
        return LaurentPolynomial.constant(1)
    if k > n - k:
        return super_binomial(n, n - k)
    return (super_binomial(n, k - 1) * super_bracket(n - k + 1)).exact_div(super_bracket(k))


# ---------------------------------------------------------------------------
# Cyclotomic fields


class CyclotomicField:
    """The field Q(zeta_M), elements stored as polynomials reduced mod Phi_M."""

    def __init__(self, conductor: int):
        if conductor < 1:
            raise ConductorError("conductor must be positive")
        if conductor > conductor_cap():
            raise ConductorError(
                f"conductor too large: {conductor} exceeds cap {conductor_cap()} "
                "(raise QTOP_CONDUCTOR_CAP to allow it)"
            )
        self.conductor = conductor
        self.modulus = flint.fmpq_poly(flint.fmpz_poly.cyclotomic(conductor))
        self.degree = self.modulus.degree()
        self._powers: dict[int, CyclotomicNumber] = {}
        self._embedding: list[complex] | None = None
        self._zero = CyclotomicNumber(self, flint.fmpq_poly([]))
        self._one = CyclotomicNumber(self, flint.fmpq_poly([1]))

    def __repr__(self):
        return f"CyclotomicField({self.conductor})"

    def zero(self) -> CyclotomicNumber:
        return self._zero

    def one(self) -> CyclotomicNumber:
        return self._one

    def rational(self, x: Rational) -> CyclotomicNumber:
        x = as_fraction(x)
        return CyclotomicNumber(self, flint.fmpq_poly([flint.fmpq(x.numerator, x.denominator)]))

    def from_coeffs(self, coeffs: Iterable[Rational]) -> CyclotomicNumber:
        vals = [flint.fmpq(c.numerator, c.denominator) if isinstance(c, Fraction) else c for c in coeffs]
        return CyclotomicNumber(self, flint.fmpq_poly(vals) % self.modulus)

    def zeta(self, k: int = 1) -> CyclotomicNumber:
        """zeta_M^k."""
        k %= self.conductor
        cached = self._powers.get(k)
        if cached is None:
            poly = flint.fmpq_poly([0] * k + [1]) % self.modulus
            cached = CyclotomicNumber(self, poly)
            self._powers[k] = cached
        return cached

    def root(self, x: Rational) -> CyclotomicNumber:
        """e^{2 pi i x} for rational x whose denominator divides the conductor."""
        x = as_fraction(x)
        if self.conductor % x.denominator:
            raise ConductorError(
                f"e^(2 pi i * {x}) is not in Q(zeta_{self.conductor})"
            )
        return self.zeta(x.numerator * (self.conductor // x.denominator))

    def sqrt_int(self, n: int) -> CyclotomicNumber:
        """The positive square root of n > 0, via the quadratic Gauss sum mod 4n.

        sum_{k mod 4n} zeta_{4n}^{k^2} = 2 (1 + i) sqrt(n).
        """
        if n <= 0:
            raise ValueError("sqrt_int needs a positive integer")
        m = 4 * n
        if self.conductor % m:
            raise ConductorError(f"sqrt({n}) needs conductor divisible by {m}")
        step = self.conductor // m
        acc = self.zero()
        for k in range(m):
            acc = acc + self.zeta(step * k * k)
        one_plus_i = self.one() + self.root(Fraction(1, 4))
        root = acc / (one_plus_i * 2)
        if root * root != self.rational(n):
            raise ArithmeticError("Gauss sum square root failed its self-check")
        return root

    def embedding_powers(self) -> list[complex]:
        if self._embedding is None:
            w = 2 * math.pi / self.conductor
            self._embedding = [cmath.exp(1j * w * j) for j in range(max(self.degree, 1))]
        return self._embedding


@lru_cache(maxsize=None)
def cyclotomic_field(conductor: int) -> CyclotomicField:
    return CyclotomicField(conductor)


class CyclotomicNumber:
    """Exact element of Q(zeta_M)."""

    __slots__ = ("field", "poly")

    def __init__(self, field: CyclotomicField, poly: flint.fmpq_poly):
        self.field = field
        self.poly = poly

    @property
    def conductor(self) -> int:
        return self.field.conductor

    def _coerce(self, other) -> CyclotomicNumber:
        if isinstance(other, CyclotomicNumber):
            if other.field is not self.field:
                raise ConductorError(
                    f"mixed conductors {self.conductor} and {other.conductor}; lift explicitly"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicNumber(self.field, self.poly + other.poly)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicNumber(self.field, self.poly - other.poly)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return CyclotomicNumber(self.field, -self.poly)

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicNumber(self.field, self.poly * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicNumber(self.field, (self.poly * other.poly) % self.field.modulus)

    __rmul__ = __mul__

    def inverse(self) -> CyclotomicNumber:
        if self.poly.is_zero():
            raise ZeroDivisionError("inverse of zero in a cyclotomic field")
        g, s, _ = self.poly.xgcd(self.field.modulus)
        # g is a nonzero constant since Phi_M is irreducible
        return CyclotomicNumber(self.field, (s / g) % self.field.modulus)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except ConductorError:
            return False
        if other is NotImplemented:
            return False
        return self.poly == other.poly

    def __hash__(self):
        return hash((self.conductor, str(self.poly)))

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def __bool__(self):
        return not self.poly.is_zero()

    def coefficients(self) -> list[Fraction]:
        return [Fraction(int(c.p), int(c.q)) for c in self.poly.coeffs()]

    def is_rational(self) -> bool:
        return self.poly.degree() <= 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        coeffs = self.coefficients()
        return coeffs[0] if coeffs else Fraction(0)

    def to_complex(self) -> complex:
        powers = self.field.embedding_powers()
        return sum(float(c) * powers[j] for j, c in enumerate(self.poly.coeffs()) if c != 0) + 0j

    def __complex__(self):
        return self.to_complex()

    def conjugate(self) -> CyclotomicNumber:
        """Complex conjugation zeta -> zeta^-1."""
        acc = self.field.zero()
        for j, c in enumerate(self.poly.coeffs()):
            if c != 0:
                acc = acc + self.field.zeta(-j) * Fraction(int(c.p), int(c.q))
        return acc

    def lift(self, conductor: int) -> CyclotomicNumber:
        """Embed into Q(zeta_N) for a multiple N of the current conductor."""
        if conductor % self.conductor:
            raise ConductorError(f"{conductor} is not a multiple of {self.conductor}")
        target = cyclotomic_field(conductor)
        step = conductor // self.conductor
        acc = target.zero()
        for j, c in enumerate(self.poly.coeffs()):
            if c != 0:
                acc = acc + target.zeta(step * j) * Fraction(int(c.p), int(c.q))
        return acc

    def dump(self) -> dict:
        return {
            "conductor": self.conductor,
            "coeffs": [str(c) for c in self.coefficients()],
        }

    def __repr__(self):
        return f"CyclotomicNumber(M={self.conductor}, {self.poly})"


# ---------------------------------------------------------------------------
# Root of unity parameters


def rbar_for(r: int) -> int:
    """Order of vanishing of the super quantum integers at q = e^{2 pi i/r}."""
    if r % 2:
        return 2 * r
    if r % 4 == 2:
        return r
    if r % 8 == 0:
        return r // 2
    return r // 4


@dataclass(frozen=True)
class RootParams:
    r: int
    rbar: int
    t: int
    eps: int
    rdot: int
    congruence_class: int

    @property
    def ribbon(self) -> bool:
        return self.congruence_class != 4

    @property
    def zero_mod_eight(self) -> bool:
        return self.congruence_class == 0


def root_params(r: int) -> RootParams:
    if not isinstance(r, int) or isinstance(r, bool):
        raise TypeError("r must be an integer")
    if r < 3 or r == 4:
        raise ExcludedRootError(f"excluded root order r={r} (need r >= 3 and r != 4)")
    t = math.gcd(2, r)
    return RootParams(r=r, rbar=rbar_for(r), t=t, eps=2 // t, rdot=r // t, congruence_class=r % 8)


def minimal_vanishing_index(r: int) -> int:
    """Brute-force the least n >= 1 with <n> = 0 at v = q, in exact arithmetic."""
    if r < 3:
        raise ExcludedRootError(f"excluded root order r={r}")
    n = 1
    while True:
        if super_bracket(n).evaluate_at_root(r).is_zero():
            return n
        n += 1
        if n > 4 * r:
            raise ArithmeticError("no vanishing index found")


def lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


class QContext:
    """Fixes one conductor M and produces q^z = e^{2 pi i z/r} inside Q(zeta_M)."""

    def __init__(self, params: RootParams, conductor: int):
        if conductor % params.r:
            raise ConductorError("conductor must be a multiple of r")
        self.params = params
        self.field = cyclotomic_field(conductor)

    @property
    def conductor(self) -> int:
        return self.field.conductor

    @classmethod
    def for_weights(
        cls,
        params: RootParams,
        weights: Iterable[Rational] = (),
        extra: Iterable[int] = (),
    ) -> QContext:
        """Smallest conductor holding q^x for x in weights and q^(x*y/2) for products.

        ``extra`` lists further integers that must divide the conductor.
        """
        den = lcm_all(as_fraction(w).denominator for w in weights)
        return cls(params, lcm_all([2 * params.r * den * den, *extra]))

    def q(self, z: Rational = 1) -> CyclotomicNumber:
        z = as_fraction(z)
        need = self.params.r * z.denominator
        if self.conductor % need:
            raise ConductorError(
                f"q^{z} needs conductor divisible by {need}; context has {self.conductor}"
            )
        return self.field.zeta(z.numerator * (self.conductor // need))

    def zero(self) -> CyclotomicNumber:
        return self.field.zero()

    def one(self) -> CyclotomicNumber:
        return self.field.one()

    def rational(self, x: Rational) -> CyclotomicNumber:
        return self.field.rational(x)

    def bracket(self, n: int) -> CyclotomicNumber:
        """<n> evaluated at v = q."""
        return self._eval_laurent(super_bracket(n))

    def factorial(self, n: int) -> CyclotomicNumber:
        acc = self.one()
        for i in range(1, n + 1):
            acc = acc * self.bracket(i)
        return acc

    def _eval_laurent(self, poly: LaurentPolynomial) -> CyclotomicNumber:
        acc = self.zero()
        for e, c in poly.coefficients.items():
            acc = acc + self.q(e) * c
        return acc


def q_pow(params: RootParams, z: Rational, ctx: QContext | None = None) -> CyclotomicNumber:
    """q^z = e^{2 pi i z / r} as an exact cyclotomic number.

    Without a context the conductor is r times the denominator of z.
    """
    z = as_fraction(z)
    if ctx is None:
        ctx = QContext(params, params.r * z.denominator)
    elif ctx.params.r != params.r:
        raise ValueError("context belongs to a different r")
    return ctx.q(z)


def q_complex(r: int, z: float | Fraction) -> complex:
    """Float backend: q^z = e^{2 pi i z / r}."""
    return cmath.exp(2j * math.pi * float(z) / r)


# ---------------------------------------------------------------------------
# Identities among super binomials


def _signed_monomial(e: int, negate_base: bool = False) -> LaurentPolynomial:
    """v^e, or (-v)^e when ``negate_base``."""
    return LaurentPolynomial.monomial(e, (-1) ** (e % 2) if negate_base else 1)


def super_pascal_holds(n: int, k: int) -> tuple[bool, bool]:
    """Both Pascal recursions for the super binomial <n+1 choose k>, 1 <= k <= n."""
    top = super_binomial(n + 1, k)
    first = _signed_monomial(n - k + 1, True) * super_binomial(n, k - 1) + _signed_monomial(-k) * super_binomial(n, k)
    second = _signed_monomial(k - n - 1) * super_binomial(n, k - 1) + _signed_monomial(k, True) * super_binomial(n, k)
    return top == first, top == second


def vanishing_sum(n: int) -> LaurentPolynomial:
    """sum_k (-1)^{k(k+1)/2} v^{k(n-1)} <n choose k>; equals 1 for n = 0 and 0 otherwise."""
    total = LaurentPolynomial()
    for k in range(n + 1):
        sign = -1 if (k * (k + 1) // 2) % 2 else 1
        total = total + LaurentPolynomial.monomial(k * (n - 1), sign) * super_binomial(n, k)
    return total
