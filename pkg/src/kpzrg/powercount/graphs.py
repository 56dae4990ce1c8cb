"""Labelled multigraphs and the subset power-counting conditions.

Edge labels (a_e, r_e) give the singularity order of the kernel on the edge
and its renormalisation order.  Labels are exact elements of Q + Q*kappa
(class Homogeneity) or plain floats; with floats, strict inequalities are
evaluated with a configurable margin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple, Union

from ..homogeneity import Homogeneity

Label = Union[Homogeneity, float]


class GraphValidationError(ValueError):
    pass


def _as_label(x) -> Label:
    if isinstance(x, Homogeneity):
        return x
    if isinstance(x, (int, Fraction)):
        return Homogeneity(x)
    return float(x)


def _lt(x, y, margin: float) -> bool:
    """Strict x < y; with a float on either side, require a gap of `margin`."""
    if isinstance(x, Homogeneity) and isinstance(y, Homogeneity):
        return x < y
    fx = float(x) if not isinstance(x, Homogeneity) else x.numeric(1e-9)
    fy = float(y) if not isinstance(y, Homogeneity) else y.numeric(1e-9)
    return fx < fy - margin


def _add(x, y):
    if isinstance(x, Homogeneity) and isinstance(y, Homogeneity):
        return x + y
    fx = x.numeric(1e-9) if isinstance(x, Homogeneity) else float(x)
    fy = y.numeric(1e-9) if isinstance(y, Homogeneity) else float(y)
    return fx + fy


def _label_sum(labels, scale=1):
    exact = all(isinstance(a, Homogeneity) for a in labels)
    total = Homogeneity(0) if exact else 0.0
    for a in labels:
        total = _add(total, a)
    if scale != 1:
        total = total * scale if isinstance(total, Homogeneity) else total * scale
    return total


@dataclass(frozen=True)
class Edge:
    src: object
    dst: object
    a: Label
    r: int

    def endpoints(self):
        return {self.src, self.dst}


class LabelledMultigraph:
    """Directed multigraph with a root vertex, distinguished targets and
    labelled edges.

    The distinguished edges (root -> star_i) must be present with label
    (0, 0); loops are rejected and every vertex must touch an edge.
    """

    def __init__(self, vertices, zero, stars, edges, scaling: int = 3):
        self.vertices = list(vertices)
        self.zero = zero
        self.stars = list(stars)
        self.scaling = scaling
        self.edges: List[Edge] = []
        for (u, v, a, r) in edges:
            if u == v:
                raise GraphValidationError(f"loop at vertex {u!r}")
            if u not in self.vertices or v not in self.vertices:
                raise GraphValidationError(f"edge ({u!r},{v!r}) uses unknown vertex")
            self.edges.append(Edge(u, v, _as_label(a), int(r)))
        if zero not in self.vertices:
            raise GraphValidationError("root vertex missing from vertex list")
        for s in self.stars:
            if not any(
                e.src == zero and e.dst == s and e.r == 0 and _is_zero_label(e.a)
                for e in self.edges
            ):
                raise GraphValidationError(
                    f"distinguished edge ({zero!r} -> {s!r}) with label (0,0) missing"
                )
        touched = {e.src for e in self.edges} | {e.dst for e in self.edges}
        for v in self.vertices:
            if v not in touched:
                raise GraphValidationError(f"vertex {v!r} has no incident edge")

    @property
    def v_star(self):
        return [self.zero] + self.stars

    @classmethod
    def from_json(cls, obj) -> "LabelledMultigraph":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        edges = []
        for e in obj["edges"]:
            a = e["a"]
            if isinstance(a, dict):
                a = Homogeneity(Fraction(str(a["q"])), Fraction(str(a.get("kappa", 0))))
            edges.append((e["from"], e["to"], a, e.get("r", 0)))
        return cls(
            obj["vertices"],
            obj["distinguished"]["zero"],
            obj["distinguished"]["stars"],
            edges,
            scaling=obj.get("scaling", 3),
        )

    def to_json(self) -> dict:
        def lab(a):
            if isinstance(a, Homogeneity):
                return {"q": str(a.q), "kappa": str(a.k)}
            return a

        return {
            "scaling": self.scaling,
            "vertices": self.vertices,
            "distinguished": {"zero": self.zero, "stars": self.stars},
            "edges": [
                {"from": e.src, "to": e.dst, "a": lab(e.a), "r": e.r} for e in self.edges
            ],
        }


def _is_zero_label(a: Label) -> bool:
    if isinstance(a, Homogeneity):
        return a == Homogeneity(0)
    return a == 0.0


class ConcatenatedGraph:
    """Simple directed graph with per-pair summed labels.

    Parallel edges of the multigraph between the same ordered pair are merged
    into one edge with a-labels summed; at most one member of a bundle may
    carry r != 0, and then r must be positive.
    """

    def __init__(self, g: LabelledMultigraph):
        self.source = g
        self.scaling = g.scaling
        self.zero = g.zero
        self.stars = list(g.stars)
        self.vertices = list(g.vertices)
        # bundles are unordered: kernels between the same pair multiply
        # regardless of orientation; a renormalised member fixes the direction
        bundles: Dict[frozenset, List[Edge]] = {}
        for e in g.edges:
            bundles.setdefault(frozenset((e.src, e.dst)), []).append(e)
        self.edges: List[Edge] = []
        for key, es in sorted(bundles.items(), key=lambda kv: sorted(map(str, kv[0]))):
            renorm = [e for e in es if e.r != 0]
            if len(renorm) > 1:
                raise GraphValidationError(
                    f"bundle {set(key)!r} has {len(renorm)} renormalised edges"
                )
            if renorm:
                r = renorm[0].r
                if r < 0 and len(es) > 1:
                    raise GraphValidationError(
                        f"bundle {set(key)!r} mixes r<0 with parallel edges"
                    )
                u, v = renorm[0].src, renorm[0].dst
            else:
                r = 0
                e0 = min(es, key=lambda e: (str(e.src), str(e.dst)))
                u, v = e0.src, e0.dst
            self.edges.append(Edge(u, v, _label_sum([e.a for e in es]), r))

    @property
    def v_star(self):
        return [self.zero] + self.stars


def concatenate(g: LabelledMultigraph) -> ConcatenatedGraph:
    return ConcatenatedGraph(g)


def _edge_sets(edges, subset: frozenset):
    """outgoing, incoming, internal, incident edge lists for a vertex set."""
    out, inc, internal, incident = [], [], [], []
    for e in edges:
        s_in = e.src in subset
        d_in = e.dst in subset
        if s_in or d_in:
            incident.append(e)
        if s_in and d_in:
            internal.append(e)
        elif s_in:
            out.append(e)
        elif d_in:
            inc.append(e)
    return out, inc, internal, incident


def check_assumptions(cg: ConcatenatedGraph, margin: float = 1e-9) -> dict:
    """Evaluate the structural preconditions and the four subset conditions.

    Returns a report dict with per-condition verdicts and every violating
    subset with its two sides.  Exact labels are compared exactly; float
    labels use the strictness margin.
    """
    if len(cg.vertices) > 16:
        raise GraphValidationError("subset enumeration limited to 16 vertices")
    s_abs = cg.scaling
    vstar = set(cg.v_star)
    report = {"graph_vertices": len(cg.vertices), "conditions": {}, "violations": []}

    # structural preconditions
    structural = []
    for e in cg.edges:
        if e.r > 0 and cg.zero in (e.src, e.dst):
            structural.append(f"positively renormalised edge ({e.src},{e.dst}) touches the root")
        if e.r < 0 and e.dst == cg.zero:
            structural.append(f"negatively renormalised edge ({e.src},{e.dst}) points into the root")
        if e.r != 0 and e.src in vstar and e.dst in vstar:
            structural.append(f"renormalised edge ({e.src},{e.dst}) inside the distinguished set")
    by_src: Dict[object, int] = {}
    for e in cg.edges:
        if e.r < 0:
            by_src[e.src] = by_src.get(e.src, 0) + 1
    for v, n in by_src.items():
        if n > 1:
            structural.append(f"{n} negatively renormalised edges leave vertex {v!r}")
    report["conditions"]["structural"] = not structural
    for s in structural:
        report["violations"].append({"condition": "structural", "detail": s})

    # condition 1: a_e + (r_e ^ 0) < |s|
    ok1 = True
    for e in cg.edges:
        lhs = _add(e.a, Homogeneity(min(e.r, 0)))
        if not _lt(lhs, Homogeneity(s_abs), margin):
            ok1 = False
            report["violations"].append(
                {"condition": "1", "edge": (e.src, e.dst), "lhs": str(lhs), "rhs": str(s_abs)}
            )
    report["conditions"]["1"] = ok1

    others = [v for v in cg.vertices if v != cg.zero]
    non_star = [v for v in cg.vertices if v not in vstar]

    # condition 2: internal labels of subsets of V0 with >= 3 vertices
    ok2 = True
    for n in range(3, len(others) + 1):
        for combo in combinations(others, n):
            sub = frozenset(combo)
            _, _, internal, _ = _edge_sets(cg.edges, sub)
            if not internal:
                continue
            lhs = _label_sum([e.a for e in internal])
            rhs = Homogeneity((n - 1) * s_abs)
            if not _lt(lhs, rhs, margin):
                ok2 = False
                report["violations"].append(
                    {"condition": "2", "subset": sorted(map(str, combo)),
                     "lhs": str(lhs), "rhs": str(rhs)}
                )
    report["conditions"]["2"] = ok2

    # condition 3: subsets containing the root, >= 2 vertices
    ok3 = True
    for n in range(1, len(others) + 1):
        for combo in combinations(others, n):
            sub = frozenset(combo) | {cg.zero}
            out, inc, internal, _ = _edge_sets(cg.edges, sub)
            terms = [e.a for e in internal]
            for e in out:
                if e.r > 0:
                    terms.append(_add(e.a, Homogeneity(e.r - 1)))
            rsum = sum(e.r for e in inc if e.r > 0)
            lhs = _label_sum(terms)
            lhs = _add(lhs, Homogeneity(-rsum))
            rhs = Homogeneity(n * s_abs)  # (|sub|-1)|s|
            if not _lt(lhs, rhs, margin):
                ok3 = False
                report["violations"].append(
                    {"condition": "3", "subset": sorted(map(str, sub)),
                     "lhs": str(lhs), "rhs": str(rhs)}
                )
    report["conditions"]["3"] = ok3

    # condition 4: nonempty subsets avoiding the distinguished vertices
    ok4 = True
    for n in range(1, len(non_star) + 1):
        for combo in combinations(non_star, n):
            sub = frozenset(combo)
            out, inc, internal, incident = _edge_sets(cg.edges, sub)
            inc_pos = [e for e in inc if e.r > 0]
            terms = [e.a for e in incident if e not in inc_pos]
            lhs = _label_sum(terms)
            lhs = _add(lhs, Homogeneity(sum(e.r for e in out if e.r > 0)))
            lhs = _add(lhs, Homogeneity(-sum(e.r - 1 for e in inc_pos)))
            rhs = Homogeneity(n * s_abs)
            if not _lt(rhs, lhs, margin):  # condition is lhs > rhs
                ok4 = False
                report["violations"].append(
                    {"condition": "4", "subset": sorted(map(str, combo)),
                     "lhs": str(lhs), "rhs": str(rhs)}
                )
    report["conditions"]["4"] = ok4

    report["passed"] = all(report["conditions"].values())
    return report


def naive_exponent(g: LabelledMultigraph):
    """|s| * #(vertices outside the distinguished set) - sum of all a_e."""
    n_free = len([v for v in g.vertices if v not in set(g.v_star)])
    total = _label_sum([e.a for e in g.edges])
    base = Homogeneity(g.scaling * n_free)
    if isinstance(total, Homogeneity):
        return base - total
    return float(base.numeric(0.0)) - total
