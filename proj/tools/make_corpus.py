#!/usr/bin/env python3
"""Regenerates data/corpus/seed_XX.json. Fixed RNG seed, so the output is stable."""

import json
import math
import pathlib
import random

PHI = (1 + math.sqrt(5)) / 2

SPECTRA = [
    [(1, 0), (PHI, 0)],
    [(1, 0), (-1, 0)],
    [(1, 0), (0, 1)],
    [(1, 0), (-PHI, 0)],
    [(1, 0), (2, 0)],
    [(-1, 0), (-math.sqrt(2), 0)],
    [(1, 1), (1, -1)],
    [(0.5, 1), (-1, 0.3)],
    [(1, 0), (-0.5, 0)],
    [(2, 0), (-3, 0)],
    [(1, 0), (PHI, 0), (0, 1)],
    [(1, 0), (-1, 0), (PHI, 0)],
    [(1, 0), (0, 1), (-1, -1)],
    [(1, 0), (2, 0), (3, 0)],
    [(-1, 0), (-PHI, 0), (-math.e, 0)],
    [(1, 0), (-1, 0), (0, 0.5)],
    [(1, 0), (0, 1)],
    [(1, 0), (-1, 0)],
    [(1, 0), (PHI, 0)],
    [(1, 0), (-PHI, 0), (0, math.sqrt(2))],
]


def exponents(n, degree, rng):
    k = [0] * n
    for _ in range(degree):
        k[rng.randrange(n)] += 1
    return k


def make_seed(index, lam, rng):
    n = len(lam)
    cap = 6 if n == 2 else 4
    rho = 1.0 if index % 2 == 0 else 0.5
    terms = {}
    while len(terms) < 3 + index % 2:
        m = rng.randint(1, n)
        k = tuple(exponents(n, rng.choice([2, 2, 3]), rng))
        re = round(rng.uniform(-0.7, 0.7), 6)
        im = round(rng.uniform(-0.7, 0.7), 6)
        terms[(m, k)] = (re, im)
    norm = 0.0
    for m in range(1, n + 1):
        s = sum(math.hypot(*c) * rho ** sum(k) for (mm, k), c in terms.items() if mm == m)
        norm = max(norm, s)
    return {
        "n": n,
        "lambda": [[float(a), float(b)] for a, b in lam],
        "degree_cap": cap,
        "terms": [
            {"m": m, "k": list(k), "re": c[0], "im": c[1]} for (m, k), c in sorted(terms.items())
        ],
        "rho": rho,
        "norm_hint": norm * (1 + 1e-12),
    }


def main():
    rng = random.Random(20240611)
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"
    out.mkdir(parents=True, exist_ok=True)
    for i, lam in enumerate(SPECTRA):
        doc = make_seed(i, lam, rng)
        (out / f"seed_{i + 1:02d}.json").write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
