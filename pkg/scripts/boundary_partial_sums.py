"""K*_4(0, 0, 3) on Z[i] sits on the edge 2 Re(s) - a = 2 of absolute convergence.

Partial sums over discs |gamma| <= R still approach the continued value, with
an O(1/R) gap; this prints the gap for growing R.
"""
import mpmath

from heckelab.lattice import Lattice, ekl_eval

with mpmath.workdps(30):
    theta = float(ekl_eval(4, 0, 0, 3, Lattice.tau(mpmath.mpc(0, 1)), 25).real)
print(f"continuation  {theta:.12f}")
for R in (50, 100, 200, 400):
    acc = 0.0
    for m in range(-R, R + 1):
        for n in range(-R, R + 1):
            r2 = m * m + n * n
            if r2 and r2 <= R * R:
                acc += (complex(m, -n) ** 4 / r2**3).real
    print(f"R={R:4d}  partial {acc:.12f}  gap*R {(theta - acc) * R:+.4f}")
