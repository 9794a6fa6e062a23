"""Reference implementations the tests compare the library against.

Each oracle takes a different route from the code under test: string
manipulation instead of integer bit tricks, exact fractions instead of
floats, polynomial long division instead of a shift register, and so on.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


# -- CRC-8/ATM --------------------------------------------------------------

def _crc_table() -> list[int]:
    table = []
    for byte in range(256):
        # remainder of byte(x) * x^8 mod (x^8 + x^2 + x + 1), by long division
        value = byte << 8
        for bit in range(15, 7, -1):
            if value >> bit & 1:
                value ^= 0x107 << (bit - 8)
        table.append(value)
    return table


CRC_TABLE = _crc_table()


def crc8_table(data: bytes) -> int:
    crc = 0
    for b in data:
        crc = CRC_TABLE[crc ^ b]
    return crc


def even_parity(value: int) -> int:
    return format(value, "b").count("1") % 2


# -- bitstrings ---------------------------------------------------------------

def longest_agreeing_run(a: str, b: str) -> int:
    best = run = 0
    for x, y in zip(a, b):
        run = run + 1 if x == y else 0
        best = max(best, run)
    return best


def r_contiguous_match(a: str, b: str, r: int) -> bool:
    """Window scan: some length-r window where the strings agree."""
    return any(a[i:i + r] == b[i:i + r] for i in range(len(a) - r + 1))


def brute_force_survivors(length: int, self_set: list[str], r: int) -> list[str]:
    """All strings, in counting order, that r-match no self string."""
    out = []
    for bits in itertools.product("01", repeat=length):
        s = "".join(bits)
        if not any(r_contiguous_match(s, t, r) for t in self_set):
            out.append(s)
    return out


# -- clone allocation -------------------------------------------------------------

def largest_remainder(weights: list[float], budget: int) -> list[int]:
    """Hamilton apportionment with exact arithmetic; ties to the earlier entry."""
    fr = [Fraction(w) for w in weights]
    total = sum(fr)
    if total == 0:
        quotas = [Fraction(budget, len(fr))] * len(fr)
    else:
        quotas = [w * budget / total for w in fr]
    counts = [math.floor(q) for q in quotas]
    left = budget - sum(counts)
    order = sorted(range(len(fr)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return counts


# -- case weights ------------------------------------------------------------------

def formula_weight(sensor, prev, curr, s_prev, s_curr, threshold, floor):
    """Case analysis written out branch by branch."""
    if s_prev != s_curr:
        return 1.0
    d_prev = math.dist(sensor, prev)
    d_curr = math.dist(sensor, curr)
    if d_prev == 0 or d_curr == 0:
        return 1.0
    if s_curr == 1:
        ratio = d_curr / d_prev
    else:
        ratio = d_prev / d_curr
    if ratio <= threshold:
        return 1.0
    elif ratio <= 1:
        return ratio
    else:
        return floor


def hand_weights(sensors, prev_signs, curr_signs, particles, threshold, floor):
    raw = []
    for prev, curr in particles:
        w = 1.0
        for s, a, b in zip(sensors, prev_signs, curr_signs):
            w *= formula_weight(s, prev, curr, a, b, threshold, floor)
        raw.append(w)
    total = math.fsum(raw)
    return [w / total for w in raw]


# -- geometry -----------------------------------------------------------------------

def convex_hull(points):
    """Andrew's monotone chain; counter-clockwise, no collinear points."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def in_hull(point, points, eps=1e-9) -> bool:
    hull = convex_hull(points)
    if len(hull) == 1:
        return math.dist(point, hull[0]) <= eps
    if len(hull) == 2:
        (ax, ay), (bx, by) = hull
        cross = (bx - ax) * (point[1] - ay) - (by - ay) * (point[0] - ax)
        within = min(ax, bx) - eps <= point[0] <= max(ax, bx) + eps and \
            min(ay, by) - eps <= point[1] <= max(ay, by) + eps
        return abs(cross) <= eps and within
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if (b[0] - a[0]) * (point[1] - a[1]) - (b[1] - a[1]) * (point[0] - a[0]) < -eps:
            return False
    return True


# -- landscape ---------------------------------------------------------------------

def landscape_point(x: float, y: float) -> float:
    return (15 * x * y * (1 - x) * (1 - y) * math.sin(9 * math.pi * x)
            * math.sin(9 * math.pi * y)) ** 2


# -- mode machine ------------------------------------------------------------------

MODE_TABLE = {
    ("Sensing", "AnomalyDetected"): "Recognition",
    ("Recognition", "PlanDecided"): "Response",
    ("Response", "TargetNeutralized"): "Sensing",
    ("Recognition", "Timeout"): "Sensing",
}
