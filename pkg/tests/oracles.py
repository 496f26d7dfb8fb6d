"""Independent reference implementations used only to check the package.

Everything here is written from the definitions, on purpose not sharing code
with the package: a memoized recursive edit distance, an exhaustive
edit-enumeration distance for tiny strings, a double-loop discovery counter
with its own name folding, a textbook Welch test with a hand-rolled
regularized incomplete beta for the t tail, and the plain rule-based score
denominator.
"""

from __future__ import annotations

import math
import unicodedata
from functools import lru_cache


# Pairwise edit similarity of every pair is below 0.55, so these are safe
# synthetic surnames wherever cross-matching must not fire at thresholds > 0.55.
DISTINCT_SURNAMES = (
    "akamatsu", "bellweather", "cortez", "draganov", "eriksen", "fontaine",
    "grigoryan", "hashimoto", "ivanova", "jablonski", "kowalczyk", "lindqvist",
    "montgomery", "novakovic", "okonkwo", "petrosyan", "quintana", "rasmussen",
    "sorensen", "takahashi", "ubertini", "vassiliou", "wozniak", "xanthopoulos",
    "yamaguchi", "zherdev", "abubakar", "bergstrom", "castellano", "dominguez",
)


def lev_recursive(a: str, b: str) -> int:
    """Top-down memoized edit distance (structurally unlike the package DP)."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        cost = 0 if a[i - 1] == b[j - 1] else 1
        return min(go(i - 1, j) + 1, go(i, j - 1) + 1, go(i - 1, j - 1) + cost)

    return go(len(a), len(b))


def lev_by_enumeration(a: str, b: str) -> int:
    """Breadth-first search over single edits; exact for short strings.

    Inserted/substituted characters are drawn from b's alphabet (plus a
    filler), which suffices: edits using other characters never help.
    """
    if a == b:
        return 0
    alphabet = set(b) | {"\x00"}
    frontier = {a}
    seen = {a}
    for distance in range(1, len(a) + len(b) + 1):
        nxt = set()
        for s in frontier:
            for i in range(len(s) + 1):
                for c in alphabet:
                    nxt.add(s[:i] + c + s[i:])        # insert
                if i < len(s):
                    nxt.add(s[:i] + s[i + 1:])        # delete
                    for c in alphabet:
                        nxt.add(s[:i] + c + s[i + 1:])  # substitute
        if b in nxt:
            return distance
        frontier = nxt - seen
        seen |= nxt
    raise AssertionError("unreachable")


_PARTICLES = {"van", "de", "del", "von", "bin", "al"}
_EXTRA_FOLDS = {
    "ø": "o", "Ø": "o", "đ": "d", "Đ": "d", "ł": "l", "Ł": "l", "ß": "ss",
    "æ": "ae", "Æ": "ae", "œ": "oe", "Œ": "oe", "ð": "d", "Ð": "d",
    "þ": "th", "Þ": "th", "ı": "i",
}


def fold_oracle(text: str) -> str:
    out = []
    for ch in text:
        if ch in _EXTRA_FOLDS:
            out.append(_EXTRA_FOLDS[ch])
            continue
        if ch in "-‐‑‒–—":
            out.append(" ")
            continue
        for piece in unicodedata.normalize("NFKD", ch):
            if unicodedata.combining(piece):
                continue
            if piece.isalpha():
                out.append(piece.lower())
            elif piece.isspace():
                out.append(" ")
    return " ".join("".join(out).split())


def family_oracle(name: str) -> str | None:
    tokens = fold_oracle(name).split()
    if not tokens:
        return None
    i = len(tokens) - 1
    while i > 0 and tokens[i - 1] in _PARTICLES:
        i -= 1
    return " ".join(tokens[i:])


def sim_oracle(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - lev_recursive(a, b) / max(len(a), len(b))


def brute_force_discovered(
    baseline: list[str], generated: list[str], epsilon: float
) -> int:
    """Double loop straight from the discovery definition."""
    generated_families = [family_oracle(g) for g in generated]
    count = 0
    for raw in baseline:
        family = family_oracle(raw)
        if family is None:
            continue
        for other in generated_families:
            if other is not None and sim_oracle(family, other) >= epsilon:
                count += 1
                break
    return count


def denominator_oracle(baseline: str, gs_count: int, oa_count: int | None) -> int:
    if baseline == "google-scholar":
        return gs_count
    return min(gs_count, oa_count)


def _betacf(a: float, b: float, x: float) -> float:
    max_iterations, eps, tiny = 300, 3e-16, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iterations + 1):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise AssertionError("continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) by continued fraction."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * betainc_reg(df / 2.0, 0.5, x)
    return tail if t > 0 else 1.0 - tail


def welch_oracle(high: list[float], low: list[float]) -> tuple[float, float, float]:
    """(t, df, one-sided p) from the textbook formulas, summed by hand."""
    n1, n2 = len(high), len(low)
    m1 = sum(high) / n1
    m2 = sum(low) / n2
    v1 = sum((x - m1) ** 2 for x in high) / (n1 - 1)
    v2 = sum((x - m2) ** 2 for x in low) / (n2 - 1)
    se2 = v1 / n1 + v2 / n2
    if se2 == 0.0:
        diff = m1 - m2
        t = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        df = float(n1 + n2 - 2)
        p = 0.5 if t == 0.0 else (0.0 if t > 0 else 1.0)
        return t, df, p
    t = (m1 - m2) / math.sqrt(se2)
    df = se2**2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    return t, df, student_t_sf(t, df)
