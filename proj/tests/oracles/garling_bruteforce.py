"""Exhaustive depth-3 Paley-Walsh sign-pattern search on l_inf^d (p = 2).

d_n = xi_n * v_n(history), v_n has coordinates in {+1,-1}.  Ratio is
(E||f_3||^2 / E||g_3||^2)^(1/2) where g uses an independent sign copy.
"""
import itertools
import sys
import numpy as np

def ratio_batch(labels, d, p=2.0, norm="sup"):
    # labels: (B, 7, d) for nodes [root, 0, 1, 00, 01, 10, 11]
    B = labels.shape[0]
    signs = np.array(list(itertools.product([1, -1], repeat=3)), dtype=float)  # 8 x 3
    def node(n, path):
        if n == 0:
            return 0
        if n == 1:
            return 1 + (0 if path[0] > 0 else 1)
        return 3 + 2 * (0 if path[0] > 0 else 1) + (0 if path[1] > 0 else 1)
    def nrm(x):
        if norm == "sup":
            return np.abs(x).max(axis=-1)
        return np.sqrt((x * x).sum(axis=-1))
    ef = np.zeros(B)
    eg = np.zeros(B)
    for w in signs:
        v = [labels[:, node(k, w)] for k in range(3)]
        f = sum(w[k] * v[k] for k in range(3))
        ef += nrm(f) ** p / 8
        for wt in signs:
            g = sum(wt[k] * v[k] for k in range(3))
            eg += nrm(g) ** p / 64
    return (ef / eg) ** (1 / p)

def search(d, norm="sup"):
    n = 7 * d
    best = 0.0
    best_pat = None
    chunk = 1 << 14
    # fix the first coordinate of the root label to +1 (global sign symmetry)
    total = 1 << (n - 1)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(n - 1)) & 1).astype(float)
        pats = np.concatenate([np.zeros((len(idx), 1)), bits], axis=1)
        labels = (1 - 2 * pats).reshape(-1, 7, d)
        r = ratio_batch(labels, d, norm=norm)
        i = int(np.argmax(r))
        if r[i] > best:
            best = float(r[i])
            best_pat = labels[i].copy()
    return best, best_pat

if __name__ == "__main__":
    for d in [int(a) for a in sys.argv[1:]] or [1, 2, 3]:
        b, pat = search(d)
        be, _ = search(d, norm="euclid")
        print(f"d={d} sup best={b!r} euclid best={be!r}")
        print(pat.tolist())
