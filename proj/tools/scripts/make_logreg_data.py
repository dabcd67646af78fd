"""Regenerates the small LIBSVM files in data/.

Each set is checked to be not linearly separable (LP feasibility of
y_i <w, x_i> >= 1), so the unregularized logistic loss has a finite minimizer.
"""

import argparse
import pathlib

import numpy as np
from scipy.optimize import linprog

SETS = [
    # name, samples, features, density, label noise, seed
    ("tiny_dense", 120, 8, 1.0, 0.15, 1),
    ("small_sparse", 300, 24, 0.3, 0.12, 2),
    ("medium_sparse", 600, 40, 0.15, 0.10, 3),
]


def separable(X, y):
    m, n = X.shape
    A = -(y[:, None] * X)
    res = linprog(np.zeros(n), A_ub=A, b_ub=-np.ones(m), bounds=[(None, None)] * n, method="highs")
    return res.status == 0


def make(samples, features, density, noise, seed):
    rng = np.random.default_rng(seed)
    while True:
        X = rng.normal(size=(samples, features))
        X *= rng.random(size=X.shape) < density
        X = np.round(X, 4)
        w = rng.normal(size=features)
        y = np.where(X @ w + 0.5 * rng.normal(size=samples) >= 0, 1, -1)
        flip = rng.random(samples) < noise
        y[flip] = -y[flip]
        if not separable(X, y):
            return X, y


def write(path, X, y):
    with open(path, "w", newline="\n") as f:
        for row, label in zip(X, y):
            items = [f"{j + 1}:{v:g}" for j, v in enumerate(row) if v != 0.0]
            f.write(("+1" if label > 0 else "-1") + (" " + " ".join(items) if items else "") + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[2] / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, m, n, density, noise, seed in SETS:
        X, y = make(m, n, density, noise, seed)
        write(out / f"{name}.libsvm", X, y)
        print(f"{name}: {m} samples, {n} features, nnz={int((X != 0).sum())}")


if __name__ == "__main__":
    main()
