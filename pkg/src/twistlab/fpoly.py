"""Dense polynomials over F_p as coefficient lists, lowest degree first.

Only what the rest of the package needs: arithmetic, gcd, derivative, squarefree
decomposition and radicals (no factoring), plus parsing of polynomial strings.
"""

from __future__ import annotations

from fractions import Fraction

import sympy
from sympy.parsing.sympy_parser import implicit_multiplication, parse_expr, standard_transformations

_TRANSFORMS = standard_transformations + (implicit_multiplication,)


def trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def degree(a):
    return len(trim(a)) - 1


def add(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return trim([(x + y) % p for x, y in zip(a, b)])


def sub(a, b, p):
    return add(a, [(-c) % p for c in b], p)


def scale(a, c, p):
    return trim([(x * c) % p for x in a])


def mul(a, b, p):
    a, b = trim(a), trim(b)
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim([c % p for c in out])


def mod(a, f, p):
    """Remainder of ``a`` modulo a monic ``f``."""
    a = [c % p for c in a]
    n = len(f) - 1
    for i in range(len(a) - 1, n - 1, -1):
        c = a[i]
        if c:
            for j in range(n + 1):
                a[i - n + j] = (a[i - n + j] - c * f[j]) % p
    return trim(a[:n] if len(a) > n else a)


def divmod_(a, b, p):
    a, b = trim([c % p for c in a]), trim([c % p for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(b[-1], -1, p)
    quot = [0] * max(len(a) - len(b) + 1, 0)
    a = list(a)
    for i in range(len(a) - len(b), -1, -1):
        c = (a[i + len(b) - 1] * inv) % p
        quot[i] = c
        if c:
            for j, y in enumerate(b):
                a[i + j] = (a[i + j] - c * y) % p
    return trim(quot), trim(a[: len(b) - 1])


def exact_div(a, b, p):
    q, r = divmod_(a, b, p)
    if r:
        raise ArithmeticError("inexact polynomial division")
    return q


def powmod(a, k, f, p):
    result = [1]
    base = mod(a, f, p)
    while k:
        if k & 1:
            result = mod(mul(result, base, p), f, p)
        base = mod(mul(base, base, p), f, p)
        k >>= 1
    return result


def monic(a, p):
    a = trim(a)
    if not a:
        return a
    return scale(a, pow(a[-1], -1, p), p)


def gcd(a, b, p):
    a, b = trim([c % p for c in a]), trim([c % p for c in b])
    while b:
        a, b = b, divmod_(a, b, p)[1]
    return monic(a, p)


def deriv(a, p):
    return trim([(i * c) % p for i, c in enumerate(a)][1:])


def evaluate(a, x, p):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % p
    return acc


def squarefree_decomposition(f, p):
    """{multiplicity: squarefree factor} with f = lead * prod s_i^i (Yun plus p-th roots)."""
    f = monic(f, p)
    if len(f) <= 1:
        return {}
    out = {}
    c = gcd(f, deriv(f, p), p)
    w = exact_div(f, c, p)
    i = 1
    while len(w) > 1:
        y = gcd(w, c, p)
        z = exact_div(w, y, p)
        if len(z) > 1:
            out[i] = z
        i += 1
        w = y
        c = exact_div(c, y, p)
    if len(c) > 1:
        # what is left is a p-th power; over F_p the p-th root just drops coefficients
        root = [c[j] for j in range(0, len(c), p)]
        for k, s in squarefree_decomposition(root, p).items():
            out[k * p] = mul(out.get(k * p, [1]), s, p)
    return out


def radical(f, p):
    """Product of the distinct monic irreducible factors of f."""
    out = [1]
    for s in squarefree_decomposition(f, p).values():
        out = mul(out, s, p)
    return out


def high_multiplicity_part(f, k, p):
    """Product of irreducible factors appearing with multiplicity >= k (f = 0 -> None)."""
    if not trim(f):
        return None
    out = [1]
    for mult, s in squarefree_decomposition(f, p).items():
        if mult >= k:
            out = mul(out, s, p)
    return out


def is_squarefree(f, p):
    f = trim([c % p for c in f])
    if len(f) <= 1:
        return bool(f)
    return len(gcd(f, deriv(f, p), p)) == 1


def parse(text, p, var="x"):
    """Parse a polynomial string (``"x^2 + 3x - 1"``, ``*`` optional) or integer list over F_p."""
    if isinstance(text, (list, tuple)):
        return trim([int(c) % p for c in text])
    s = str(text).strip().replace("^", "**")
    if s.startswith("[") and s.endswith("]"):
        return trim([int(c) % p for c in s[1:-1].split(",") if c.strip()])
    sym = sympy.Symbol(var)
    expr = parse_expr(s, local_dict={var: sym}, transformations=_TRANSFORMS)
    poly = sympy.Poly(expr, sym)
    out = []
    for c in reversed(poly.all_coeffs()):
        c = Fraction(int(sympy.numer(c)), int(sympy.denom(c)))
        if c.denominator % p == 0:
            raise ValueError(f"coefficient {c} is not defined mod {p}")
        out.append((c.numerator * pow(c.denominator, -1, p)) % p)
    return trim(out)


def to_string(a, var="x"):
    terms = []
    for i in range(len(a) - 1, -1, -1):
        c = a[i]
        if not c:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        else:
            terms.append(f"{c}*{mono}")
    return " + ".join(terms) or "0"
