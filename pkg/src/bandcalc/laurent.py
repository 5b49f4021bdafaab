"""Integer Laurent polynomials in one variable, exact arithmetic only.

Coefficients are arbitrary-precision ints keyed by exponent; no zero
coefficient is ever stored.  Equality up to units (multiplication by
+-t^k) is the working equivalence for Alexander polynomials.
"""

from __future__ import annotations

from fractions import Fraction


class LaurentPoly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, int] | None = None):
        self.coeffs: dict[int, int] = {
            e: c for e, c in (coeffs or {}).items() if c != 0
        }

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero() -> "LaurentPoly":
        return LaurentPoly()

    @staticmethod
    def one() -> "LaurentPoly":
        return LaurentPoly({0: 1})

    @staticmethod
    def const(c: int) -> "LaurentPoly":
        return LaurentPoly({0: c})

    @staticmethod
    def t_power(k: int, c: int = 1) -> "LaurentPoly":
        return LaurentPoly({k: c})

    @staticmethod
    def from_coeff_list(coeffs: list[int], min_exp: int = 0) -> "LaurentPoly":
        return LaurentPoly({min_exp + i: c for i, c in enumerate(coeffs)})

    # -- ring ops ----------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        r = dict(self.coeffs)
        for e, c in other.coeffs.items():
            r[e] = r.get(e, 0) + c
            if r[e] == 0:
                del r[e]
        return LaurentPoly(r)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        r: dict[int, int] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                v = r.get(e, 0) + c1 * c2
                if v:
                    r[e] = v
                elif e in r:
                    del r[e]
        return LaurentPoly(r)

    def scale(self, c: int) -> "LaurentPoly":
        return LaurentPoly({e: c * v for e, v in self.coeffs.items()})

    def shift(self, k: int) -> "LaurentPoly":
        return LaurentPoly({e + k: c for e, c in self.coeffs.items()})

    def substitute_inverse(self) -> "LaurentPoly":
        """t -> 1/t."""
        return LaurentPoly({-e: c for e, c in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    # -- structure ----------------------------------------------------------

    @property
    def min_exp(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    @property
    def max_exp(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    @property
    def degree_span(self) -> int:
        return self.max_exp - self.min_exp if self.coeffs else 0

    def coeff(self, e: int) -> int:
        return self.coeffs.get(e, 0)

    def evaluate(self, x: Fraction) -> Fraction:
        total = Fraction(0)
        for e, c in self.coeffs.items():
            total += c * x ** e
        return total

    def evaluate_int(self, x: int) -> Fraction:
        return self.evaluate(Fraction(x))

    def normalize(self) -> "LaurentPoly":
        """Shift so the lowest exponent is 0 and the leading coefficient > 0."""
        if not self.coeffs:
            return LaurentPoly()
        p = self.shift(-self.min_exp)
        if p.coeffs[p.max_exp] < 0:
            p = -p
        return p

    def equals_up_to_units(self, other: "LaurentPoly") -> bool:
        return self.normalize() == other.normalize()

    def div_exact(self, other: "LaurentPoly") -> "LaurentPoly":
        """Exact division in the Laurent ring; raises if not divisible."""
        if not other:
            raise ZeroDivisionError("division by zero polynomial")
        if not self:
            return LaurentPoly()
        shift = self.min_exp - other.min_exp
        num = {e - self.min_exp: c for e, c in self.coeffs.items()}
        den = {e - other.min_exp: c for e, c in other.coeffs.items()}
        dn = max(den)
        lead = den[dn]
        quo: dict[int, int] = {}
        rem = dict(num)
        while rem:
            rn = max(rem)
            if rn < dn:
                raise ArithmeticError("inexact Laurent division")
            q, r = divmod(rem[rn], lead)
            if r:
                raise ArithmeticError("inexact Laurent division")
            k = rn - dn
            quo[k] = q
            for e, c in den.items():
                v = rem.get(e + k, 0) - q * c
                if v:
                    rem[e + k] = v
                else:
                    rem.pop(e + k, None)
        return LaurentPoly(quo).shift(shift)

    # -- text form ------------------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"LaurentPoly({format_poly(self)})"


def format_poly(p: LaurentPoly) -> str:
    """Report form with ascending exponents: "t^-1 - 1 + t"."""
    if not p.coeffs:
        return "0"
    parts = []
    for e in sorted(p.coeffs):
        c = p.coeffs[e]
        if e == 0:
            mono = str(abs(c))
        else:
            t = "t" if e == 1 else f"t^{e}"
            mono = t if abs(c) == 1 else f"{abs(c)}{t}"
        if not parts:
            parts.append(("-" if c < 0 else "") + mono)
        else:
            parts.append(("- " if c < 0 else "+ ") + mono)
    return " ".join(parts)


def laurent_det(rows: list[list[LaurentPoly]]) -> LaurentPoly:
    """Determinant by fraction-free (Bareiss) elimination over Z[t, 1/t].

    Every division is exact in the ring, so no rational-function arithmetic
    appears at any point.
    """
    n = len(rows)
    if n == 0:
        return LaurentPoly.one()
    if any(len(r) != n for r in rows):
        raise ValueError("determinant needs a square matrix")
    M = [list(r) for r in rows]
    sign = 1
    prev = LaurentPoly.one()
    for k in range(n - 1):
        piv = None
        for i in range(k, n):
            if M[i][k]:
                piv = i
                break
        if piv is None:
            return LaurentPoly.zero()
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            row_i = M[i]
            for j in range(k + 1, n):
                num = row_i[j] * M[k][k] - row_i[k] * M[k][j]
                row_i[j] = num.div_exact(prev)
            row_i[k] = LaurentPoly.zero()
        prev = M[k][k]
    det = M[n - 1][n - 1]
    return det if sign > 0 else -det
