#!/usr/bin/env python3
"""Exact brute force behind the frozen block3 regression thresholds.

For J = Jrd(3, gamma_1) ... Jrd(3, gamma_k), w = (y1+y2+y3, y2+y3, y3) and
m in {0..B}^k, prints min ||J^m y - w|| computed in rational arithmetic, the
minimizing m and the exact squared distance.

    g0: gammas (2,),   y (0,0,1), B = 50 -> sqrt(2) at m = (0,)
    g1: gammas (2, 3), y (0,0,1), B = 30 -> sqrt(2) at m = (0, 0)
"""
import itertools
import math
from fractions import Fraction as F


def jrd(g):
    return [[F(g), F(1), F(0)], [F(0), F(g), F(1)], [F(0), F(0), F(g)]]


def mul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def identity():
    return [[F(int(i == j)) for j in range(3)] for i in range(3)]


def mpow(a, m):
    r = identity()
    for _ in range(m):
        r = mul(r, a)
    return r


def gap(gammas, y, bound):
    w = [y[0] + y[1] + y[2], y[1] + y[2], y[2]]
    pows = [[mpow(jrd(g), m) for m in range(bound + 1)] for g in gammas]
    best = None
    arg = None
    for ms in itertools.product(range(bound + 1), repeat=len(gammas)):
        m = identity()
        for g, e in enumerate(ms):
            m = mul(m, pows[g][e])
        v = [sum(m[i][j] * y[j] for j in range(3)) for i in range(3)]
        d = sum((v[i] - w[i]) ** 2 for i in range(3))
        if best is None or d < best:
            best, arg = d, ms
    return math.sqrt(best), arg, best


if __name__ == "__main__":
    print("g0", gap([2], [0, 0, 1], 50))
    print("g1", gap([2, 3], [0, 0, 1], 30))
