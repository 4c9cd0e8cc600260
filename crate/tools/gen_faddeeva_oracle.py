#!/usr/bin/env python3
"""Regenerates the frozen Faddeeva-function oracle table.

Evaluates w(z) = exp(-z^2) * erfc(-i z) with mpmath at 50 significant
digits on a fixed set of 200 sample points and writes them as CSV
(x, y, re_w, im_w) for the acceptance suite to compare against.

Usage: python3 tools/gen_faddeeva_oracle.py > crates/rescon-cli/tests/data/faddeeva_oracle.csv
"""

import mpmath as mp

mp.mp.dps = 50


def w(z):
    return mp.exp(-z * z) * mp.erfc(-1j * z)


def points():
    pts = []
    # upper half-plane sweep: 20 x-values x 8 heights = 160 points
    xs = [-6.0 + 12.0 * i / 19.0 for i in range(20)]
    ys = [0.0, 1e-3, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0]
    for y in ys:
        for x in xs:
            pts.append((x, y))
    # lower half-plane points kept where |x| > |y| so w stays representable
    for y in (-0.05, -0.2, -0.5, -1.0):
        for x in (-5.0, -4.0, -3.5, -3.0, -2.5, 2.5, 3.0, 3.5, 4.0, 5.0):
            pts.append((x, y))
    assert len(pts) == 200
    return pts


def main():
    print("x,y,re_w,im_w")
    for x, y in points():
        val = w(mp.mpc(x, y))
        print(f"{x!r},{y!r},{mp.nstr(val.real, 20)},{mp.nstr(val.imag, 20)}")


if __name__ == "__main__":
    main()
