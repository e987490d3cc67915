"""Reference computations that share no code with the package."""
import math
from collections import Counter
from itertools import permutations

import numpy as np


def entropy(labels):
    n = len(labels)
    return -sum(c / n * math.log(c / n) for c in Counter(labels).values())


def mutual_information(a, b):
    n = len(a)
    ca, cb, cab = Counter(a), Counter(b), Counter(zip(a, b))
    return sum(c / n * math.log(n * c / (ca[x] * cb[y])) for (x, y), c in cab.items())


def nmi(a, b):
    a, b = list(a), list(b)
    d = math.sqrt(entropy(a) * entropy(b))
    return 0.0 if d == 0 else mutual_information(a, b) / d


def kappa(a, b):
    n = len(a)
    po = sum(x == y for x, y in zip(a, b)) / n
    labels = set(a) | set(b)
    pe = sum(list(a).count(l) / n * list(b).count(l) / n for l in labels)
    if pe == 1:
        return 1.0 if po == 1 else 0.0
    return (po - pe) / (1 - pe)


def min_assignment_cost(costs):
    """Exhaustive minimum over assignments that fully match the smaller side."""
    costs = np.asarray(costs)
    rows, cols = costs.shape
    if rows <= cols:
        return min(sum(int(costs[s, t]) for s, t in enumerate(perm))
                   for perm in permutations(range(cols), rows))
    return min(sum(int(costs[s, t]) for t, s in enumerate(perm))
               for perm in permutations(range(rows), cols))


def best_relabel_cost(p, ref):
    """Brute-force alignment of p onto ref: min total symmetric difference."""
    p, ref = list(p), list(ref)
    src = sorted(set(p))
    tgt = sorted(set(ref))
    members = lambda labels, lab: {i for i, v in enumerate(labels) if v == lab}
    costs = [[len(members(p, s) ^ members(ref, t)) for t in tgt] for s in src]
    return min_assignment_cost(costs)


def average_linkage_reference(S, k):
    """Naive average linkage on max_offdiag(S) - S, recomputing every average from scratch."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    off = S[~np.eye(n, dtype=bool)]
    D = (off.max() if n > 1 else 0.0) - S
    groups = [[i] for i in range(n)]
    while len(groups) > k:
        best = None
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                d = np.mean([D[i, j] for i in groups[a] for j in groups[b]])
                if best is None or d < best[0] - 1e-12:
                    best = (d, a, b)
        _, a, b = best
        groups[a] = sorted(groups[a] + groups[b])
        del groups[b]
    labels = np.empty(n, dtype=int)
    for lab, g in enumerate(sorted(groups, key=min)):
        labels[g] = lab
    return labels


def optimum_is_unique(costs):
    """True when exactly one assignment attains the minimum cost (rows <= cols)."""
    costs = np.asarray(costs)
    best = min_assignment_cost(costs)
    rows, cols = costs.shape
    hits = sum(sum(int(costs[s, t]) for s, t in enumerate(perm)) == best
               for perm in permutations(range(cols), rows))
    return hits == 1
