"""Listed versus realized reflective classes, tallied by d mod 4.

A class is realized when a vector of the right norm and divisor is found for
at least one of its residues.  The census counts every listed class.

    python3 scripts/branch_classes.py 2 200
"""
import sys
from collections import Counter, defaultdict

from orthocensus.branchgeom import class_residues, realize_vector, reflective_classes


def main():
    lo, hi = (int(x) for x in sys.argv[1:3]) if len(sys.argv) > 2 else (2, 200)
    listed, realized = defaultdict(Counter), defaultdict(Counter)
    for d in range(lo, hi + 1):
        for c in reflective_classes(d):
            listed[d % 4][c.tag] += 1
            if any(realize_vector(c.u, c.m, c.r, c.s, c.k, l, search=40) is not None for l in class_residues(c)):
                realized[d % 4][c.tag] += 1
    for res in sorted(listed):
        row = ", ".join(f"{t} {realized[res][t]}/{n}" for t, n in sorted(listed[res].items()))
        print(f"d = {res} mod 4 (realized/listed): {row}")


if __name__ == "__main__":
    main()
