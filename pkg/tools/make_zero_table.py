"""Regenerate the bundled zero-ordinate tables.

Usage: python tools/make_zero_table.py COUNT OUTPUT

Needs mpmath; the package itself does not.
"""

import sys
from concurrent.futures import ProcessPoolExecutor

import mpmath


def ordinate(n):
    mpmath.mp.dps = 25
    return mpmath.nstr(mpmath.zetazero(n).imag, 16, strip_zeros=False)


def main(argv):
    count, out = int(argv[1]), argv[2]
    with ProcessPoolExecutor() as pool:
        rows = list(pool.map(ordinate, range(1, count + 1), chunksize=20))
    with open(out, "w") as fh:
        fh.write(f"# imaginary parts of the first {count} nontrivial zeta zeros\n")
        fh.write("# computed with mpmath.zetazero at 25 digits\n")
        for r in rows:
            fh.write(r + "\n")


if __name__ == "__main__":
    main(sys.argv)
