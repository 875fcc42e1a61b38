"""Independent scalar reference implementations used only by the tests.

Deliberately written in a different style from the package kernel: plain
Python floats, fixed high term counts, no vectorisation, no regime
switching.  Valid for small-to-moderate arguments only (|x| <~ 12 for the
oscillatory functions before cancellation bites); the tests use them in
that range and fall back to quad-based cross-checks elsewhere.
"""

import math

GAMMA = 0.57721566490153286060651209008240243104215933593992


def ref_j0(x, terms=60):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    for n in range(terms):
        if n > 0:
            term *= -t / (n * n)
        s += term
    return s


def ref_j1(x, terms=60):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    for n in range(terms):
        if n > 0:
            term *= -t / (n * (n + 1))
        s += term
    return 0.5 * x * s


def ref_i0(x, terms=120):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    for n in range(terms):
        if n > 0:
            term *= t / (n * n)
        s += term
    return s


def ref_i1(x, terms=120):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    for n in range(terms):
        if n > 0:
            term *= t / (n * (n + 1))
        s += term
    return 0.5 * x * s


def ref_y0(x, terms=60):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    h = 0.0
    for n in range(1, terms):
        term *= -t / (n * n)
        h += 1.0 / n
        s -= term * h
    return 2.0 / math.pi * ((math.log(x / 2.0) + GAMMA) * ref_j0(x, terms) + s)


def ref_k0(x, terms=120):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    h = 0.0
    for n in range(1, terms):
        term *= t / (n * n)
        h += 1.0 / n
        s += term * h
    return -(math.log(x / 2.0) + GAMMA) * ref_i0(x, terms) + s


def ref_y1(x, terms=60):
    t = x * x / 4.0
    s = 0.0
    term = 1.0  # t^k/(k!(k+1)!)
    hsum = 1.0  # H_k + H_{k+1} at k=0
    acc = term * hsum
    for k in range(1, terms):
        term *= -t / (k * (k + 1))
        hsum = sum(1.0 / j for j in range(1, k + 1)) * 2.0 + 1.0 / (k + 1)
        acc += term * hsum
    j1v = ref_j1(x, terms)
    return 2.0 / math.pi * (
        -1.0 / x + math.log(x / 2.0) * j1v
        - 0.25 * x * (acc - 2.0 * GAMMA * _ref_j1_series(x, terms))
    )


def _ref_j1_series(x, terms):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    for n in range(terms):
        if n > 0:
            term *= -t / (n * (n + 1))
        s += term
    return s


def ref_k1(x, terms=120):
    t = x * x / 4.0
    term = 1.0
    hsum = 1.0
    acc = term * hsum
    for k in range(1, terms):
        term *= t / (k * (k + 1))
        hsum = sum(1.0 / j for j in range(1, k + 1)) * 2.0 + 1.0 / (k + 1)
        acc += term * hsum
    i1v = ref_i1(x, terms)
    return (1.0 / x + math.log(x / 2.0) * i1v
            - 0.25 * x * (acc - 2.0 * GAMMA * _ref_i1_series(x, terms)))


def _ref_i1_series(x, terms):
    t = x * x / 4.0
    s = 0.0
    term = 1.0
    for n in range(terms):
        if n > 0:
            term *= t / (n * (n + 1))
        s += term
    return s


def simpson(f, a, b, n):
    """Composite Simpson with n (even) intervals; plain-Python reference."""
    if n % 2:
        n += 1
    h = (b - a) / n
    s = f(a) + f(b)
    for i in range(1, n):
        s += f(a + i * h) * (4.0 if i % 2 else 2.0)
    return s * h / 3.0
