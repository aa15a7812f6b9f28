"""Independent reference implementations shared by test modules."""
import numpy as np


def textbook_simrank(g, decay, iterations):
    """Straight transcription of the classic all-pairs recurrence."""
    n = g.n_nodes
    s = np.eye(n)
    in_nbrs = [list(g.in_neighbors(u)) for u in range(n)]
    for _ in range(iterations):
        nxt = np.zeros((n, n))
        for a in range(n):
            for b in range(n):
                if a == b:
                    nxt[a, b] = 1.0
                    continue
                ia, ib = in_nbrs[a], in_nbrs[b]
                if not ia or not ib:
                    continue
                total = sum(s[x, y] for x in ia for y in ib)
                nxt[a, b] = decay * total / (len(ia) * len(ib))
        s = nxt
    return s
