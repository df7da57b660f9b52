"""Compare the plain tower presentation with rank-bounded ones.

The tower for ω^(ω^k) uses trees whose node set has CB_* rank k+1; the
rank-bounded construction presents any smaller ordinal with rank at most k.
"""

from treeord import presentations as pr
from treeord import ranks as rk
from treeord.ordinals import parse_ordinal


def rank_of(P):
    return rk.cb_star_rank(rk.RegularBinaryTree.from_presentation(P))


for k in (0, 1, 2):
    P = pr.build_omega_tower(k)
    print(f"tower k={k}: {P.order_type}, rank {rank_of(P)}")

for text, k in [("w^2 + w*3 + 1", 1), ("w^w", 2), ("w^(w+1)*2 + w^3", 2)]:
    alpha = parse_ordinal(text)
    P = pr.build_rank_bounded(alpha, k)
    smallest = [str(P.decode(t)) for t in pr.sorted_elements(P, 3)][:6]
    print(f"rank-bounded {alpha} at k={k}: {P.tracks} track(s), rank {rank_of(P)}, "
          f"first elements {', '.join(smallest)}, ...")
