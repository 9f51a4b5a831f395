#!/usr/bin/env python3
"""Regenerates the bundled desk-scale datasets in LIBSVM text format.

Sources are the scikit-learn built-in corpora so the files can be rebuilt
offline. Feature values are written raw; the toolkit applies [-1, 1]
scaling at training time.
"""
import os

import numpy as np
from sklearn.datasets import load_breast_cancer, load_diabetes, load_iris

HERE = os.path.dirname(os.path.abspath(__file__))


def write_libsvm(path, X, y):
    with open(path, "w") as f:
        for row, label in zip(X, y):
            feats = " ".join(
                f"{j + 1}:{v:.10g}" for j, v in enumerate(row) if v != 0.0
            )
            f.write(f"{label:g} {feats}\n")
    print(f"wrote {path}: {X.shape[0]} rows, {X.shape[1]} features")


def main():
    b = load_breast_cancer()
    write_libsvm(os.path.join(HERE, "breast.libsvm"), b.data, b.target)

    i = load_iris()
    write_libsvm(os.path.join(HERE, "iris.libsvm"), i.data, i.target + 1)

    d = load_diabetes()
    t = (d.target > np.median(d.target)).astype(int)
    write_libsvm(os.path.join(HERE, "diabetes.libsvm"), d.data, t)


if __name__ == "__main__":
    main()
