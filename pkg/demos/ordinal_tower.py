"""Walk through the presentation of ω^ω by finite trees.

Run with ``python demos/ordinal_tower.py``.
"""

from treeord import presentations as pr
from treeord import ranks as rk
from treeord.logic import evaluate
from treeord.ordinals import parse_ordinal
from treeord.trees import dumps

P = pr.build_omega_tower(1)
print(f"{P.name}: presents {P.order_type} with "
      f"{P.universe.num_states} universe states, {P.relations['le'][1].num_states} order states")

# small trees, listed in the order the automaton defines
for t in pr.sorted_elements(P, 4):
    print(f"  {str(P.decode(t)):>10}  {' '.join(dumps(t).split())}")

alpha = parse_ordinal("w^2*3 + w + 4")
t = P.encode(alpha)
print(f"\nencode({alpha}) has {len(t)} nodes; decodes back to {P.decode(t)}")

# first-order queries with parameters
env = {"c": P.encode(parse_ordinal("w*2"))}
print("infinitely many elements below w*2:", evaluate("Einf x. le(x,c) & !eq(x,c)", P, env))
print("every element has a successor:",
      evaluate("A x. E y. le(x,y) & !eq(x,y) & A z. (le(x,z) & !eq(x,z)) -> le(y,z)", P))

T = rk.RegularBinaryTree.from_presentation(P)
print(f"\nnodes used by the universe: CB_* rank {rk.cb_star_rank(T)}, "
      f"{rk.subtree_index(T)} distinct subtrees")
