"""
How many mixed trees are there?
===============================

Allowing species on internal nodes and polytomies makes the search
space much bigger than the classic unrooted binary case.  The counts
satisfy a three-term recurrence over (species, unlabelled nodes), and a
closed-form estimate tracks the exact totals from below.
"""

from parsicompact import (
    closed_form_estimate,
    count_cubic,
    count_mixed,
    count_total_mixed,
)

# T(n, m) counts trees on n species with exactly m unlabelled internal
# nodes.  m can never exceed n - 2: every unlabelled node needs degree
# at least three, so it must buy its keep.
print("n  total_mixed   cubic        T(n, m) by m")
for n in range(1, 9):
    row = [count_mixed(n, m) for m in range(max(n - 1, 1))]
    cubic = count_cubic(n) if n >= 3 else 1
    print(f"{n}  {count_total_mixed(n):>11}  {cubic:>6}       {row}")

# The totals dwarf the cubic counts: at n = 8 there are 3 756 104 mixed
# trees against 10 395 cubic topologies.  Exhaustive mixed enumeration
# is the oracle we measure against, not a practical algorithm.
for n in (10, 14, 18):
    exact = count_total_mixed(n)
    approx = closed_form_estimate(n)
    print(f"n={n}: exact {exact:.3e}  estimate {approx:.3e}  ratio {approx/exact:.3f}")
