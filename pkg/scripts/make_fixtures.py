"""Generate the covariance-graph fixtures shipped with the package.

Each fixture is the second-moment graph of one of the low symbols: the two
test vertices hang off the root, mollified-kernel edges carry 2 + kappa/2,
plain heat-derivative edges carry 2, positively renormalised (Taylor
subtracted) edges carry (2, 1), and the renormalised chain kernels carry
(3 + kappa/2, -1).  The last fixture decorates the basic square with a
small-order edge joining the test vertices, as produced by one factor of
the small parameter.
"""

import json
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from kpzrg.homogeneity import Homogeneity
from kpzrg.powercount import LabelledMultigraph

HERE = os.path.join(os.path.dirname(__file__), "..", "src", "kpzrg", "fixtures")

KEPS = Homogeneity(2, Fraction(1, 2))
KPLAIN = Homogeneity(2)
QEPS = Homogeneity(3, Fraction(1, 2))
DELTA = Homogeneity(0, 1)


def dump(name, g):
    path = os.path.join(HERE, name + ".json")
    with open(path, "w") as fh:
        json.dump(g.to_json(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("wrote", path)


def dist_edges():
    return [("0", "s1", 0, 0), ("0", "s2", 0, 0)]


# squared-slope covariance square
g = LabelledMultigraph(
    ["0", "s1", "s2", "n1", "n2"], "0", ["s1", "s2"],
    dist_edges()
    + [("n1", "s1", KEPS, 0), ("n1", "s2", KEPS, 0),
       ("n2", "s1", KEPS, 0), ("n2", "s2", KEPS, 0)],
)
dump("psi2", g)

# slope times integrated slope, leading pairing
# the chain kernels need one Taylor subtraction here (r = 1), without
# which the checker rightly reports the divergence
g = LabelledMultigraph(
    ["0", "s1", "s2", "u", "v", "n1", "n2"], "0", ["s1", "s2"],
    dist_edges()
    + [("u", "s1", KPLAIN, 1), ("v", "s2", KPLAIN, 1),
       ("n1", "s1", KEPS, 0), ("n1", "s2", KEPS, 0),
       ("n2", "u", KEPS, 0), ("n2", "v", KEPS, 0)],
)
dump("psi11", g)

# slope times integrated square, chaos-5 graph
g = LabelledMultigraph(
    ["0", "s1", "s2", "u", "v", "c2", "c3", "c4"], "0", ["s1", "s2"],
    dist_edges()
    + [("u", "s1", KPLAIN, 0), ("v", "s2", KPLAIN, 0),
       ("c2", "s1", KEPS, 0), ("c2", "s2", KEPS, 0),
       ("c3", "u", KEPS, 0), ("c3", "v", KEPS, 0),
       ("c4", "u", KEPS, 0), ("c4", "v", KEPS, 0)],
)
dump("psi21_a", g)

# same symbol, renormalised-chain graph
g = LabelledMultigraph(
    ["0", "s1", "s2", "u", "v", "c3"], "0", ["s1", "s2"],
    dist_edges()
    + [("u", "s1", QEPS, -1), ("v", "s2", QEPS, -1),
       ("c3", "u", KEPS, 0), ("c3", "v", KEPS, 0)],
)
dump("psi21_b", g)

# square of the integrated square
g = LabelledMultigraph(
    ["0", "s1", "s2", "u", "v", "u2", "v2", "n1", "n2", "n3", "n4"], "0", ["s1", "s2"],
    dist_edges()
    + [("u", "s1", KPLAIN, 0), ("v", "s1", KPLAIN, 0),
       ("u2", "s2", KPLAIN, 0), ("v2", "s2", KPLAIN, 0),
       ("n1", "u", KEPS, 0), ("n1", "u2", KEPS, 0),
       ("n2", "u", KEPS, 0), ("n2", "u2", KEPS, 0),
       ("n3", "v", KEPS, 0), ("n3", "v2", KEPS, 0),
       ("n4", "v", KEPS, 0), ("n4", "v2", KEPS, 0)],
)
dump("psi22", g)

# the deep chain with a Taylor-subtracted edge
g = LabelledMultigraph(
    ["0", "s1", "s2", "b", "b2", "c", "c2", "n1", "n2", "n3", "n4"], "0", ["s1", "s2"],
    dist_edges()
    + [("b", "s1", KPLAIN, 1), ("b2", "s2", KPLAIN, 1),
       ("c", "b", KPLAIN, 0), ("c2", "b2", KPLAIN, 0),
       ("n1", "s1", KEPS, 0), ("n1", "s2", KEPS, 0),
       ("n2", "b", KEPS, 0), ("n2", "b2", KEPS, 0),
       ("n3", "c", KEPS, 0), ("n3", "c2", KEPS, 0),
       ("n4", "c", KEPS, 0), ("n4", "c2", KEPS, 0)],
)
dump("psi211", g)

# small-parameter decoration: the square plus a tiny-order edge between stars
g = LabelledMultigraph(
    ["0", "s1", "s2", "n1", "n2"], "0", ["s1", "s2"],
    dist_edges()
    + [("n1", "s1", KEPS, 0), ("n1", "s2", KEPS, 0),
       ("n2", "s1", KEPS, 0), ("n2", "s2", KEPS, 0),
       ("s1", "s2", DELTA, 0)],
)
dump("eps_psi4", g)
