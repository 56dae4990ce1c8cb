"""Multiscale clustering trees and the node-exponent calculus.

A cluster tree is a rooted binary tree whose leaves are graph vertices and
whose inner nodes carry integer labels nondecreasing away from the root.  It
is built from space-time points by recording the merge order of a minimal
spanning tree (built greedily by ascending pairwise parabolic distance), with
label floor(-log2(distance)) maximised over the pairs first joined at the
node.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..homogeneity import Homogeneity
from .graphs import ConcatenatedGraph, _add, _label_sum


class TieError(ValueError):
    pass


def parabolic_norm(t: float, x: float) -> float:
    return abs(x) + math.sqrt(abs(t))


class ClusterTree:
    """Binary merge tree.

    Nodes 0..n-1 are leaves (in the order of `leaf_ids`); inner nodes are
    n..2n-2.  `children[j]` holds the two children of inner node j, `label[j]`
    its integer label, `parent[i]` the parent of any non-root node.
    """

    def __init__(self, leaf_ids: Sequence[object], merges: Sequence[Tuple[int, int, int]]):
        n = len(leaf_ids)
        if len(merges) != n - 1:
            raise ValueError("a binary merge tree needs exactly n-1 merges")
        self.leaf_ids = list(leaf_ids)
        self.n_leaves = n
        self.children: Dict[int, Tuple[int, int]] = {}
        self.label: Dict[int, int] = {}
        self.parent: Dict[int, int] = {}
        node = n
        for (a, b, lab) in merges:
            self.children[node] = (a, b)
            self.label[node] = lab
            self.parent[a] = node
            self.parent[b] = node
            node += 1
        self.root = 2 * n - 2 if n > 1 else 0
        self.leaf_index = {v: i for i, v in enumerate(self.leaf_ids)}
        # order preservation: labels nondecreasing away from the root
        for j, (a, b) in self.children.items():
            for c in (a, b):
                if c in self.children and self.label[c] < self.label[j]:
                    raise ValueError("labels must be nondecreasing toward the leaves")

    def inner_nodes(self) -> List[int]:
        return sorted(self.children)

    def leaves_under(self, node: int) -> List[int]:
        if node < self.n_leaves:
            return [node]
        a, b = self.children[node]
        return self.leaves_under(a) + self.leaves_under(b)

    def ancestors(self, node: int) -> List[int]:
        out = [node]
        while out[-1] in self.parent:
            out.append(self.parent[out[-1]])
        return out

    def subtree_inner(self, node: int) -> List[int]:
        """Inner nodes u with u >= node (node itself included if inner)."""
        out = []
        stack = [node]
        while stack:
            u = stack.pop()
            if u in self.children:
                out.append(u)
                stack.extend(self.children[u])
        return out


def mrca(tree: ClusterTree, a: int, b: int) -> int:
    anc = set(tree.ancestors(a))
    for u in tree.ancestors(b):
        if u in anc:
            return u
    raise ValueError("disconnected tree")


def _jitter(points: List[Tuple[float, float]], resolution: float):
    out = []
    for i, (t, x) in enumerate(points):
        h = hashlib.sha256(f"{i}:{t!r}:{x!r}".encode()).digest()
        dt = (h[0] / 255.0 - 0.5) * resolution
        dx = (h[1] / 255.0 - 0.5) * resolution
        out.append((t + dt, x + dx))
    return out


def cluster_tree(points: Sequence[Tuple[float, float]], ids=None,
                 resolution: float = 1e-12) -> ClusterTree:
    """Merge tree of the greedy minimal-spanning-tree construction.

    Pairwise parabolic distances must be distinct; tied inputs are jittered
    once by a deterministic hash-based perturbation below `resolution`, and a
    TieError is raised if ties survive.
    """
    pts = [(float(t), float(x)) for (t, x) in points]
    ids = list(ids) if ids is not None else list(range(len(pts)))

    def distances(ps):
        return {
            (i, j): parabolic_norm(ps[i][0] - ps[j][0], ps[i][1] - ps[j][1])
            for i, j in combinations(range(len(ps)), 2)
        }

    d = distances(pts)
    if len(set(d.values())) != len(d):
        pts = _jitter(pts, resolution)
        d = distances(pts)
        if len(set(d.values())) != len(d):
            raise TieError("pairwise distances remain tied after perturbation")

    n = len(pts)
    cluster_of = list(range(n))            # leaf -> cluster id
    members: Dict[int, List[int]] = {i: [i] for i in range(n)}
    tree_node: Dict[int, int] = {i: i for i in range(n)}
    merges = []
    next_tree_node = n
    next_cluster = n
    for (i, j), _dist in sorted(d.items(), key=lambda kv: kv[1]):
        ci, cj = cluster_of[i], cluster_of[j]
        if ci == cj:
            continue
        lab = max(
            math.floor(-math.log2(parabolic_norm(pts[v][0] - pts[w][0], pts[v][1] - pts[w][1])))
            for v in members[ci]
            for w in members[cj]
        )
        merges.append((tree_node[ci], tree_node[cj], lab))
        merged = members.pop(ci) + members.pop(cj)
        cid = next_cluster
        next_cluster += 1
        members[cid] = merged
        tree_node[cid] = next_tree_node
        next_tree_node += 1
        for v in merged:
            cluster_of[v] = cid
    tree = ClusterTree(ids, merges)
    tree.points = pts
    return tree


@dataclass
class EtaAssignment:
    tree: ClusterTree
    graph: ConcatenatedGraph
    eta: Dict[int, object]
    eta_tilde: Dict[int, object]
    a_minus: list
    nu_star: int

    def eta_tilde_total(self):
        return _label_sum(list(self.eta_tilde.values()))


def build_eta(cg: ConcatenatedGraph, tree: ClusterTree) -> EtaAssignment:
    """Per-inner-node exponents, with and without the improved-bound transfer.

    eta(v) = |s| + sum over concatenated edges of the three-indicator
    contribution; the improved variant moves |r_e| from the parent for edges
    whose merge node covers exactly the edge's endpoints.  The total of the
    improved exponents satisfies, exactly,
    sum eta_tilde = |s| |V \\ {root}| - sum a_e.
    """
    leaf = tree.leaf_index
    if set(leaf) != set(cg.vertices):
        raise ValueError("tree leaves must be the graph vertices")
    zero_leaf = leaf[cg.zero]
    s_abs = cg.scaling
    inner = tree.inner_nodes()
    exact = all(isinstance(e.a, Homogeneity) for e in cg.edges)
    zero_val = Homogeneity(0) if exact else 0.0
    eta = {v: _add(Homogeneity(s_abs), zero_val) for v in inner}

    contrib = {v: zero_val for v in inner}
    a_minus = []
    for e in cg.edges:
        lm, lp = leaf[e.src], leaf[e.dst]
        e_up = mrca(tree, lm, lp)
        contrib[e_up] = _add(contrib[e_up], -e.a if isinstance(e.a, Homogeneity) else -e.a)
        if e.r > 0:
            p_anchor = mrca(tree, lp, zero_leaf)
            m_anchor = mrca(tree, lm, zero_leaf)
            if _strictly_below(tree, p_anchor, e_up):
                contrib[p_anchor] = _add(contrib[p_anchor], Homogeneity(e.r))
                contrib[e_up] = _add(contrib[e_up], Homogeneity(-e.r))
            if _strictly_below(tree, m_anchor, e_up):
                adj = _add(Homogeneity(1 - e.r), -e.a if isinstance(e.a, Homogeneity) else -e.a)
                contrib[m_anchor] = _add(contrib[m_anchor], adj)
                contrib[e_up] = _add(contrib[e_up], -adj if isinstance(adj, Homogeneity) else -adj)
        if e.r < 0:
            under = tree.leaves_under(e_up)
            if sorted(under) == sorted([lm, lp]):
                a_minus.append(e)

    for v in inner:
        eta[v] = _add(eta[v], contrib[v])

    eta_tilde = dict(eta)
    for e in a_minus:
        lm, lp = leaf[e.src], leaf[e.dst]
        e_up = mrca(tree, lm, lp)
        if e_up not in tree.parent:
            raise ValueError("improved transfer needs a parent above the merge node")
        e_upup = tree.parent[e_up]
        eta_tilde[e_up] = _add(eta_tilde[e_up], Homogeneity(abs(e.r)))
        eta_tilde[e_upup] = _add(eta_tilde[e_upup], Homogeneity(-abs(e.r)))

    star_leaves = [leaf[v] for v in cg.v_star]
    nu = star_leaves[0]
    for other in star_leaves[1:]:
        nu = mrca(tree, nu, other)
    return EtaAssignment(tree, cg, eta, eta_tilde, a_minus, nu)


def _strictly_below(tree: ClusterTree, node: int, anc: int) -> bool:
    """node > anc: anc is a strict ancestor of node."""
    return node != anc and anc in tree.ancestors(node)[1:]


def verify_tree_conditions(eta: Dict[int, object], tree: ClusterTree, nu_star: int) -> dict:
    """The two summation conditions that make the label sums geometric.

    1. the subtree sum at any inner node is positive;
    2. for inner nodes on the root path of nu_star, the complement sum is
       negative whenever nonempty.
    """
    report = {"condition1": [], "condition2": []}
    for v in tree.inner_nodes():
        tot = _label_sum([eta[u] for u in tree.subtree_inner(v)])
        if not _pos(tot):
            report["condition1"].append({"node": v, "sum": str(tot)})
    anc = [u for u in tree.ancestors(nu_star) if u in tree.children]
    for v in anc:
        inside = set(tree.subtree_inner(v))
        outside = [u for u in tree.inner_nodes() if u not in inside]
        if not outside:
            continue
        tot = _label_sum([eta[u] for u in outside])
        if not _neg(tot):
            report["condition2"].append({"node": v, "sum": str(tot)})
    report["passed"] = not report["condition1"] and not report["condition2"]
    return report


def _pos(x):
    if isinstance(x, Homogeneity):
        return x > Homogeneity(0)
    return x > 0


def _neg(x):
    if isinstance(x, Homogeneity):
        return x < Homogeneity(0)
    return x < 0


def tree_label_sum(parents: np.ndarray, eta: np.ndarray, star: int,
                   lam: float, cap: int) -> float:
    """Sum over order-preserving integer labellings of prod 2^(-l_v eta_v).

    Exact dynamic programme over the tree (accelerated kernel); equivalent to,
    and tested against, literal enumeration of the labellings.
    """
    from ..kernels import tree_label_sum_arrays

    lmin_star = max(0, math.ceil(-math.log2(lam)))
    return float(tree_label_sum_arrays(np.asarray(parents), np.asarray(eta),
                                       int(star), lmin_star, int(cap)))


def tree_sum_estimate(eta: Dict[int, object], tree: ClusterTree, nu_star: int,
                      lambda_list: Sequence[float], label_cap: int = 40,
                      tail_tol: float = 1e-6) -> dict:
    """Empirical scaling exponent of the label sums.

    Evaluates the capped sum for each lambda, fits log2(I) against
    log2(lambda) by least squares, and flags the result if the geometric tail
    beyond the cap is estimated to exceed `tail_tol` relatively.
    """
    inner = tree.inner_nodes()
    index = {v: i for i, v in enumerate(inner)}
    parents = np.array(
        [index[tree.parent[v]] if v in tree.parent else -1 for v in inner], dtype=np.int64
    )
    etav = np.array([float(eta[v]) if not isinstance(eta[v], Homogeneity)
                     else eta[v].numeric(1e-9) for v in inner])
    star = index[nu_star] if nu_star in index else index[
        next(u for u in tree.ancestors(nu_star) if u in tree.children)
    ]
    vals = []
    flagged = False
    for lam in lambda_list:
        full = tree_label_sum(parents, etav, star, lam, label_cap)
        shorter = tree_label_sum(parents, etav, star, lam, label_cap - 4)
        tail = abs(full - shorter)
        if full != 0 and tail / abs(full) > tail_tol:
            flagged = True
        vals.append(full)
    logs = np.log2(np.array(vals))
    loglam = np.log2(np.array(list(lambda_list)))
    slope, intercept = np.polyfit(loglam, logs, 1)
    resid = float(np.max(np.abs(logs - (slope * loglam + intercept))))
    return {
        "lambdas": list(lambda_list),
        "values": vals,
        "slope": float(slope),
        "residual": resid,
        "tail_flagged": flagged,
    }
