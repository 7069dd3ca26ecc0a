"""Critical moments W_n of the Q(i) curve at p = 5 and their congruences mod the chosen prime.

    python scripts/kummer_table.py [digits]
"""
import sys

from heckelab.curves import get_curve
from heckelab.katz import critical_moments, kummer_battery

digits = int(sys.argv[1]) if len(sys.argv) > 1 else 60
E = get_curve("32a2")
for a in range(4, 9):
    fam = critical_moments(E, a, 5, digits, M=3)
    print(f"a={a}{'  (f_a = 1)' if fam.trivial else ''}")
    for n in sorted(fam.W):
        print(f"  n={n}  v={fam.valuation(n)}  W mod 125 = {fam.padic[n]}  W = {fam.W[n]}")
    rep = kummer_battery(fam)
    status = "vacuous" if rep.vacuous else ("ok" if rep.passed else f"FAILED {rep.failures}")
    print(f"  pairs (n, n', valuation of difference): {list(rep.pairs)}  {status}")
