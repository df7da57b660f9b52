"""Split an interval of ω^ω into type classes and check each box map.

Each class is a set of trees sharing the same part inside the parameters'
domain; the trees then differ only in subtrees hanging off boundary nodes,
which range over the component structures.
"""

from treeord import decomposition as dc
from treeord import presentations as pr
from treeord.ordinals import parse_ordinal

P = pr.build_omega_tower(1)
params = {"y1": P.encode(parse_ordinal("w")), "y2": P.encode(parse_ordinal("w*3 + 2"))}
report = dc.decompose(P, "le(y1,x) & le(x,y2)", params)
ok = dc.verify_report(report, budget=100)

print(f"{len(report.classes)} classes, verification {'passed' if ok else 'failed'}")
for i, c in enumerate(report.classes):
    members = dc.ta.enumerate_trees(c.automaton, 8)
    sample = ", ".join(str(P.decode(t)) for t in members[:4])
    more = ", ..." if len(members) > 4 or c.stype.U else ""
    print(f"  class {i}: boundary {list(c.stype.U) or '-'}: {sample}{more}")
