"""Arithmetic in GF(q) for prime powers q = p^s.

Elements are plain Python ints in [0, q) under the base-p positional
encoding: the element with polynomial-basis coefficients (c_0, ..., c_{s-1})
is encoded as sum(c_i * p**i).  Encoding 0 is the additive identity and
encoding 1 is the multiplicative identity regardless of the modulus.

The modulus is the lexicographically smallest monic irreducible of degree s,
where "smallest" compares the low-degree coefficients as a base-p integer.
That makes every derived quantity (primitive element, traces, subfields)
reproducible from (p, s) alone.

For extension fields up to TABLE_CAP elements, add/mul are precomputed
tables; above that, operations fall back to per-call polynomial arithmetic.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .errors import InvalidInput, CapExceeded

Q_CAP = 1 << 16        # refuse fields larger than this
TABLE_CAP = 1 << 10    # largest extension field that gets dense op tables


# ---------------------------------------------------------------------------
# primality and factoring (small inputs only)
# ---------------------------------------------------------------------------

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> list[int]:
    """Distinct prime factors by trial division; fine for n <= 2**32."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# polynomial helpers over F_p (dense coefficient lists, low degree first)
# ---------------------------------------------------------------------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    # mod is monic; reduce as we go to keep degrees < len(mod) - 1
    res = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            res[i + j] = (res[i + j] + ai * bj) % p
    return _poly_rem(res, mod, p)


def _poly_rem(a: list[int], mod: list[int], p: int) -> list[int]:
    a = a[:]
    deg_m = len(mod) - 1
    for i in range(len(a) - 1, deg_m - 1, -1):
        c = a[i]
        if c == 0:
            continue
        a[i] = 0
        for j in range(deg_m):
            a[i - deg_m + j] = (a[i - deg_m + j] - c * mod[j]) % p
    return _poly_trim(a[:deg_m])


def _poly_powmod(a: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_rem(a[:], mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _poly_trim(a[:]), _poly_trim(b[:])
    while b:
        a, b = b, _poly_divmod_rem(a, b, p)
    return a


def _poly_divmod_rem(a: list[int], b: list[int], p: int) -> list[int]:
    # remainder of a by b, b not necessarily monic
    b = _poly_trim(b[:])
    inv_lead = pow(b[-1], p - 2, p)
    a = a[:]
    while len(a) >= len(b) and _poly_trim(a):
        shift = len(a) - len(b)
        c = a[-1] * inv_lead % p
        for j, bj in enumerate(b):
            a[shift + j] = (a[shift + j] - c * bj) % p
        _poly_trim(a)
    return _poly_trim(a)


def _is_irreducible(coeffs: list[int], p: int) -> bool:
    """coeffs is monic of degree s >= 1, low degree first, length s+1."""
    s = len(coeffs) - 1
    if s == 1:
        return True
    if s <= 3:
        # degree 2 or 3: reducible iff it has a root in F_p
        return all(_poly_eval(coeffs, x, p) != 0 for x in range(p))
    # Rabin: x^(p^s) == x mod f, and gcd(x^(p^(s/r)) - x, f) = 1 for prime r | s
    x = [0, 1]
    frob = _poly_powmod(x, p ** s, coeffs, p)
    if _poly_trim([(f - g) % p for f, g in _zip_pad(frob, x)]):
        return False
    for r in factorize(s):
        sub = _poly_powmod(x, p ** (s // r), coeffs, p)
        diff = [(f - g) % p for f, g in _zip_pad(sub, x)]
        g = _poly_gcd(diff, coeffs, p)
        if len(g) != 1:
            return False
    return True


def _poly_eval(coeffs: list[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def _zip_pad(a: list[int], b: list[int]):
    n = max(len(a), len(b))
    return zip(a + [0] * (n - len(a)), b + [0] * (n - len(b)))


def smallest_irreducible(p: int, s: int) -> tuple[int, ...]:
    """Lex-smallest monic irreducible of degree s over F_p.

    Returned as coefficients (c_0, ..., c_{s-1}, 1).  Candidates are ordered
    by the integer sum(c_i * p**i) over the non-leading coefficients.
    """
    if s == 1:
        return (0, 1)
    for n in range(p ** s):
        coeffs = _digits(n, p, s) + [1]
        if _is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise InvariantViolation(f"no irreducible of degree {s} over F_{p}")


def _digits(n: int, p: int, width: int) -> list[int]:
    out = []
    for _ in range(width):
        out.append(n % p)
        n //= p
    return out


# ---------------------------------------------------------------------------
# the field object
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    """Immutable description of GF(p^s): reconstructible from (p, s, modulus)."""
    p: int
    s: int
    q: int
    modulus: tuple[int, ...]   # monic, length s+1, low degree first

    def to_json_dict(self) -> dict:
        return {"p": self.p, "s": self.s, "modulus": list(self.modulus)}


class Field:
    """Arithmetic on integer-encoded elements of GF(p^s)."""

    def __init__(self, p: int, s: int, modulus: tuple[int, ...] | None = None):
        if not isinstance(p, int) or not isinstance(s, int):
            raise InvalidInput("p and s must be integers")
        if not is_prime(p):
            raise InvalidInput(f"p = {p} is not prime")
        if s < 1:
            raise InvalidInput(f"s = {s} must be >= 1")
        q = p ** s
        if q > Q_CAP:
            raise CapExceeded(f"q = {q} exceeds the supported cap {Q_CAP}")
        if modulus is None:
            modulus = smallest_irreducible(p, s)
        else:
            modulus = tuple(int(c) % p for c in modulus[:-1]) + (int(modulus[-1]),)
            if len(modulus) != s + 1 or modulus[-1] != 1:
                raise InvalidInput("modulus must be monic of degree s")
            if not _is_irreducible(list(modulus), p):
                raise InvalidInput("modulus is reducible")
        self.p = p
        self.s = s
        self.q = q
        self.modulus = modulus
        self.spec = FieldSpec(p, s, q, modulus)

        self._add = None
        self._mul = None
        self._inv = None
        if s > 1 and q <= TABLE_CAP:
            self._build_tables()

    # -- encoding -----------------------------------------------------------

    def coeffs(self, a: int) -> tuple[int, ...]:
        """Polynomial-basis coefficients of an encoded element, low degree first."""
        self._check(a)
        return tuple(_digits(a, self.p, self.s))

    def from_coeffs(self, v) -> int:
        if len(v) != self.s:
            raise InvalidInput(f"expected {self.s} coefficients")
        return sum((int(c) % self.p) * self.p ** i for i, c in enumerate(v))

    def elements(self) -> range:
        return range(self.q)

    def units(self) -> range:
        return range(1, self.q)

    def _check(self, a: int):
        if not 0 <= a < self.q:
            raise InvalidInput(f"encoding {a} outside [0, {self.q})")

    # -- ring operations ----------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.s == 1:
            return (a + b) % self.p
        if self._add is not None:
            return self._add[a][b]
        return self._poly_add(a, b)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def neg(self, a: int) -> int:
        if self.s == 1:
            return (-a) % self.p
        p = self.p
        return sum(((-c) % p) * p ** i for i, c in enumerate(_digits(a, p, self.s)))

    def mul(self, a: int, b: int) -> int:
        if self.s == 1:
            return a * b % self.p
        if self._mul is not None:
            return self._mul[a][b]
        return self._poly_mul(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise InvalidInput("inverse of zero")
        if self.s == 1:
            return pow(a, self.p - 2, self.p)
        if self._inv is not None:
            return self._inv[a]
        # extended Euclid on polynomials
        p = self.p
        r0, r1 = list(self.modulus), _poly_trim(_digits(a, p, self.s))
        t0, t1 = [], [1]
        while r1:
            inv_lead = pow(r1[-1], p - 2, p)
            quo = [0] * (len(r0) - len(r1) + 1)
            rem = r0[:]
            while len(rem) >= len(r1) and _poly_trim(rem):
                shift = len(rem) - len(r1)
                c = rem[-1] * inv_lead % p
                quo[shift] = c
                for j, bj in enumerate(r1):
                    rem[shift + j] = (rem[shift + j] - c * bj) % p
                _poly_trim(rem)
            r0, r1 = r1, rem
            t_new = [(x - y) % p for x, y in _zip_pad(t0, _poly_mul_plain(quo, t1, p))]
            t0, t1 = t1, _poly_trim(t_new)
        # r0 is a unit constant gcd
        scale = pow(r0[0], p - 2, p)
        t0 = [c * scale % p for c in t0]
        t0 = _poly_rem(t0, list(self.modulus), p)
        return sum(c * p ** i for i, c in enumerate(t0))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def _poly_add(self, a: int, b: int) -> int:
        p = self.p
        da, db = _digits(a, p, self.s), _digits(b, p, self.s)
        return sum(((x + y) % p) * p ** i for i, (x, y) in enumerate(zip(da, db)))

    def _poly_mul(self, a: int, b: int) -> int:
        p = self.p
        prod = _poly_mulmod(_poly_trim(_digits(a, p, self.s)),
                            _poly_trim(_digits(b, p, self.s)),
                            list(self.modulus), p)
        return sum(c * p ** i for i, c in enumerate(prod))

    def _build_tables(self):
        q = self.q
        add = [[0] * q for _ in range(q)]
        mul = [[0] * q for _ in range(q)]
        for a in range(q):
            for b in range(a, q):
                v = self._poly_add(a, b)
                add[a][b] = add[b][a] = v
                w = self._poly_mul(a, b)
                mul[a][b] = mul[b][a] = w
        self._add = add
        self._mul = mul
        inv = [0] * q
        for a in range(1, q):
            row = mul[a]
            for b in range(1, q):
                if row[b] == 1:
                    inv[a] = b
                    break
        self._inv = inv

    # -- structure ----------------------------------------------------------

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise InvalidInput("order of zero")
        n = self.q - 1
        order = n
        for r in factorize(n):
            while order % r == 0 and self.pow(a, order // r) == 1:
                order //= r
        return order

    def primitive_element(self) -> int:
        """Smallest encoding whose multiplicative order is q - 1."""
        n = self.q - 1
        primes = factorize(n)
        for g in range(1, self.q):
            if all(self.pow(g, n // r) != 1 for r in primes):
                return g
        raise InvariantViolation("no primitive element found")

    def trace(self, a: int) -> int:
        """Absolute trace into F_p, returned as an int in [0, p)."""
        acc = a
        term = a
        for _ in range(self.s - 1):
            term = self.pow(term, self.p)
            acc = self.add(acc, term)
        # the trace lands in the prime subfield, whose encodings are 0..p-1
        if acc >= self.p:
            raise InvariantViolation(f"trace {acc} not in prime subfield")
        return acc

    def subfield_elements(self, t: int) -> list[int]:
        """Encodings of the subfield GF(p^t), requires t | s.  Sorted."""
        if t < 1 or self.s % t != 0:
            raise InvalidInput(f"t = {t} does not divide s = {self.s}")
        # the subfield is exactly the fixed points of x -> x^(p^t)
        e = self.p ** t
        out = [x for x in range(self.q) if self.pow(x, e) == x]
        if len(out) != e:
            raise InvariantViolation("subfield has wrong size")
        return out


def field_new(p: int, s: int) -> Field:
    """Construct GF(p^s) with the canonical modulus."""
    return Field(p, s)


def field_from_q(q: int) -> Field:
    """Construct GF(q) from a prime power, factoring q as p^s."""
    if q < 2:
        raise InvalidInput(f"q = {q} is not a prime power")
    for p in factorize(q):
        s = 0
        n = q
        while n % p == 0:
            n //= p
            s += 1
        if n != 1:
            raise InvalidInput(f"q = {q} is not a prime power")
        return Field(p, s)
    raise InvalidInput(f"q = {q} is not a prime power")


def field_from_json(d: dict) -> Field:
    try:
        return Field(int(d["p"]), int(d["s"]), tuple(d["modulus"]))
    except KeyError as e:
        raise InvalidInput(f"field json missing key {e}")


def _poly_mul_plain(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    res = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] = (res[i + j] + ai * bj) % p
    return _poly_trim(res)


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------

class AdditiveCharacter:
    """The canonical additive character x -> exp(2*pi*i * Tr(x) / p).

    Values are precomputed, so evaluation is a table lookup.  chi(0) = 1,
    and summing chi over the whole field gives 0 (orthogonality).
    """

    def __init__(self, field: Field):
        self.field = field
        p = field.p
        if p == 2:
            roots = [complex(1), complex(-1)]   # exact, avoids exp(i*pi) noise
        else:
            roots = [cmath.exp(2j * cmath.pi * k / p) for k in range(p)]
        self.table = [roots[field.trace(x)] for x in field.elements()]

    def __call__(self, a: int) -> complex:
        return self.table[a]


def additive_character(field: Field) -> AdditiveCharacter:
    return AdditiveCharacter(field)
