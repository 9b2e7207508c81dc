"""Brute-force reference computations, written without the package's algorithms.

Everything here works upstairs on M and divides by |G| at the end:
interior index sums come from the degree of the field along the boundary,
exit-region terms from sign runs of the normal component on a dense grid,
and Euler characteristics from raw face counts.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

DENSE = 20000


def closure(tops):
    faces = set()
    for t in tops:
        t = tuple(sorted(t))
        for k in range(1, len(t) + 1):
            faces.update(combinations(t, k))
    return faces


def euler_char(tops) -> int:
    return sum((-1) ** (len(f) - 1) for f in closure(tops))


def boundary_tops(tops):
    count: dict[tuple, int] = {}
    for t in tops:
        for f in combinations(sorted(t), len(t) - 1):
            count[f] = count.get(f, 0) + 1
    return [f for f, c in count.items() if c == 1]


def relative_chi(tops, order: int) -> Fraction:
    return Fraction(euler_char(tops) - euler_char(boundary_tops(tops)), order)


def degree_on_circle(field, cx, cy, r, n=DENSE) -> int:
    """Winding of the field along a counter-clockwise circle, by summing angle steps."""
    total = 0.0
    prev = None
    for k in range(n + 1):
        th = 2 * math.pi * k / n
        fx, fy = field(cx + r * math.cos(th), cy + r * math.sin(th))
        ang = math.atan2(fy, fx)
        if prev is not None:
            d = ang - prev
            while d > math.pi:
                d -= 2 * math.pi
            while d < -math.pi:
                d += 2 * math.pi
            total += d
        prev = ang
    return round(total / (2 * math.pi))


def lhs_disk(field, order: int, radius=1.0) -> Fraction:
    return Fraction(degree_on_circle(field, 0, 0, radius), order)


def lhs_annulus(field, inner, outer, order: int) -> Fraction:
    return Fraction(degree_on_circle(field, 0, 0, outer) - degree_on_circle(field, 0, 0, inner), order)


def lhs_interval(f, a=0.0, b=1.0) -> Fraction:
    sign = lambda v: (v > 0) - (v < 0)  # noqa: E731
    return Fraction(sign(f(b)) - sign(f(a)), 2)


def exit_terms_circle(field, r, outward_sign, n=DENSE) -> tuple[int, int, int]:
    """(chi(R_-^1), chi(Gamma^1), chi(R_-^2)) on one boundary circle, upstairs.

    ``outward_sign`` is +1 when M lies inside the circle, -1 when outside.
    """
    exits, tang = [], []
    for k in range(n):
        th = 2 * math.pi * (k + 0.5) / n
        x, y = r * math.cos(th), r * math.sin(th)
        fx, fy = field(x, y)
        nc = outward_sign * (fx * math.cos(th) + fy * math.sin(th))
        exits.append(nc > 0)
        tang.append(-fx * math.sin(th) + fy * math.cos(th))
    if all(exits) or not any(exits):
        return 0, 0, 0
    runs = sum(1 for k in range(n) if exits[k] and not exits[k - 1])
    r2 = 0
    for k in range(n):
        if exits[k] != exits[k - 1]:
            t = 0.5 * (tang[k] + tang[k - 1])
            # the exit arc starts here when exits[k]; leaving it means moving backwards
            r2 += (t < 0) if exits[k] else (t > 0)
    return runs, 2 * runs, r2


def chain_terms_circles(field, circles, order: int) -> list[Fraction]:
    a = b = c = 0
    for r, side in circles:
        x, y, z = exit_terms_circle(field, r, side)
        a, b, c = a + x, b + y, c + z
    return [Fraction(a - b, order), Fraction(c, order)]


def chain_terms_interval(f, a=0.0, b=1.0) -> list[Fraction]:
    return [Fraction(int(f(b) > 0) + int(-f(a) > 0))]
