"""Exact law of the damage X on small graphs by first-step analysis.

Independent of the C++ code: enumerates configurations (0 white, 1 red,
2 blue) and solves the absorption recursion in rational arithmetic.
Prints P(X = k) for a few fixtures; the values are frozen into the tests.
"""

from fractions import Fraction
from functools import lru_cache
import itertools
import sys


def law(n, edges, lam, alpha, start_blue=()):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)

    @lru_cache(maxsize=None)
    def dist(state):
        moves = []
        for u in range(n):
            if state[u] == 1:
                moves.append((alpha, u))
                for v in adj[u]:
                    if state[v] == 0:
                        moves.append((lam, v, 1))
            elif state[u] == 2:
                for v in adj[u]:
                    if state[v] == 1:
                        moves.append((Fraction(1), v, 2))
        if not any(s == 1 for s in state):
            damage = sum(1 for i, s in enumerate(state) if s == 2 and i not in start_blue)
            return {damage: Fraction(1)}
        total = sum(m[0] for m in moves)
        out = {}
        for m in moves:
            nxt = list(state)
            if len(m) == 2:
                nxt[m[1]] = 2
            else:
                nxt[m[1]] = m[2]
            for k, p in dist(tuple(nxt)).items():
                out[k] = out.get(k, Fraction(0)) + m[0] / total * p
        return out

    init = [0] * n
    init[0] = 1
    for b in start_blue:
        init[b] = 2
    return dict(sorted(dist(tuple(init)).items()))


def path(n):
    return n, [(i, i + 1) for i in range(n - 1)]


def star(leaves):
    return leaves + 1, [(0, i) for i in range(1, leaves + 1)]


def complete(n):
    return n, list(itertools.combinations(range(n), 2))


def binary_tree(depth):
    n = 2 ** (depth + 1) - 1
    return n, [((i - 1) // 2, i) for i in range(1, n)]


def show(name, n, edges, lam, alpha, start_blue=()):
    d = law(n, edges, lam, alpha, start_blue)
    print(f"{name} lambda={lam} alpha={alpha}")
    for k, p in d.items():
        print(f"  {k} {p} {float(p):.15f}")
    mean = sum(k * p for k, p in d.items())
    print(f"  mean {mean} {float(mean):.15f}")


if __name__ == "__main__":
    one = Fraction(1)
    show("path3", *path(3), one, one)
    show("path5", *path(5), one, one)
    show("star3", *star(3), one, one)
    show("star5", *star(5), one, one)
    show("K4", *complete(4), one, one)
    show("K6", *complete(6), one, one)
    show("path2", *path(2), Fraction(2), one)
    show("binary_tree2", *binary_tree(2), one, one)
    show("star2_classical", 4, [(0, 1), (0, 2), (0, 3)], one, one, start_blue=(3,))
    sys.exit(0)
