"""Core-kernel decomposition of rooted maps and its exact inverse.

The core of a map is what remains after iteratively deleting degree-1
vertices; the kernel collapses the core's maximal chains of degree-2
vertices into single edges, leaving minimum degree 3.  A map, its core and
its kernel share faces and genus.  This module decomposes a non-tree map
into (kernel, chain lengths, grafted-forest code, root mark) and rebuilds
it exactly; the two operations are mutually inverse under canonical codes.

Conventions (fixed here once and used consistently by the samplers):

* corners are indexed by darts; corner(d) is the angular sector swept
  counterclockwise from d to its sigma-successor;
* the first grafted tree sits in corner(alpha(root)) of the core, i.e. to
  the right of the tip of the core's root edge;
* remaining corners follow the core's canonical BFS dart order;
* when the map's root lies in a grafted tree, the core root is chosen so
  that this tree is the first one, which makes decompose/recompose exact
  inverses (the tie-break the reconstruction statement needs).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .forest import KEEP_CORE_ROOT, ForestCode
from .maps import (
    EMPTY_MAP,
    MapError,
    MinDegreeViolation,
    ParseError,
    RootedMap,
    build_map,
    deserialize,
    serialize,
    vertex_labels,
)


class IsTree(MapError):
    """Raised when decomposing a map with an empty core (f=1, g=0)."""


class NotGoodSubset(MapError):
    pass


class InconsistentSizes(MapError):
    pass


class _DegenerateKernel:
    """Sentinel kernel for sparsity-2 maps, whose core is a bare cycle."""

    def __repr__(self):
        return "DEGENERATE_KERNEL"


DEGENERATE_KERNEL = _DegenerateKernel()


@dataclass(frozen=True)
class Decomposition:
    """Everything needed to rebuild a non-tree map.

    ``kernel`` is a canonical-form RootedMap, or None for the degenerate
    sparsity-2 family (bare-cycle core).  ``chain_lengths`` lists, per
    kernel edge in canonical order (root edge first), the number of core
    edges on its chain; for the degenerate family it is ``(c,)``.
    ``root_split`` is the (N0, N1) split of the root chain with
    N0 + N1 - 1 = chain_lengths[0] (None when degenerate).  The root mark
    lives inside ``forest``.
    """

    kernel: RootedMap | None
    chain_lengths: tuple
    root_split: tuple | None
    forest: ForestCode

    def __post_init__(self):
        if any(length < 1 for length in self.chain_lengths):
            raise InconsistentSizes("chain lengths must be positive")
        if self.kernel is None:
            if len(self.chain_lengths) != 1 or self.root_split is not None:
                raise InconsistentSizes("degenerate kernel takes a single chain and no split")
        else:
            if len(self.chain_lengths) != self.kernel.edge_count:
                raise InconsistentSizes("one chain length per kernel edge required")
            n0, n1 = self.root_split
            if n0 < 1 or n1 < 1 or n0 + n1 - 1 != self.chain_lengths[0]:
                raise InconsistentSizes("root split must be positive and match the root chain")

    @property
    def core_edge_count(self):
        return sum(self.chain_lengths)

    @property
    def defect(self):
        if self.kernel is None:
            return None
        _, degs = vertex_labels(self.kernel)
        return 2 * self.kernel.edge_count - 3 * len(degs)


def catalan(n):
    return comb(2 * n, n) // (n + 1)


# ---------------------------------------------------------------------------
# core extraction


def _peel(m):
    """Iteratively delete degree-1 vertices.

    Returns (alive flags per dart, cyclic next-alive-dart array, dart->vertex
    labels, core degrees per vertex).  The next-alive array restricted to
    alive darts is the core's rotation system.
    """
    n2 = m.dart_count
    label, degs = vertex_labels(m)
    deg = list(degs)
    nxt = list(m.sigma)
    prv = [0] * n2
    for d in range(n2):
        prv[nxt[d]] = d
    alive = bytearray(b"\x01" * n2)
    q = deque(d for d in range(n2) if deg[label[d]] == 1)
    while q:
        d = q.popleft()
        if not alive[d] or deg[label[d]] != 1:
            continue
        p = m.alpha[d]
        alive[d] = 0
        deg[label[d]] -= 1
        if not alive[p]:
            continue
        w = label[p]
        alive[p] = 0
        rn, rp = nxt[p], prv[p]
        nxt[rp] = rn
        prv[rn] = rp
        deg[w] -= 1
        if deg[w] == 1:
            q.append(rn)
    return alive, nxt, label, deg


def _corner_sweep(m, alive):
    """Read the hanging trees off every core corner.

    Returns (words, locate) where words[d] is the contour word (list of ±1)
    of the tree in corner(d) for every core dart d, and locate maps the
    original root dart, when it hangs in a tree, to (corner dart, 1-based
    contour step).
    """
    alpha, sigma = m.alpha, m.sigma
    seen = bytearray(m.dart_count)
    words = {}
    locate = None
    root = m.root
    for d in range(m.dart_count):
        if not alive[d]:
            continue
        word = []
        x = sigma[d]
        step = 0
        while not alive[x]:
            step += 1
            if seen[alpha[x]]:
                word.append(-1)
            else:
                word.append(1)
            seen[x] = 1
            if x == root:
                locate = (d, step)
            x = sigma[alpha[x]]
        words[d] = word
    return words, locate


def _core_bfs_order(alive, alpha, nxt, root):
    """Canonical BFS dart order of the core as a standalone map."""
    order = []
    seen = {root}
    q = deque([root])
    while q:
        d = q.popleft()
        order.append(d)
        for e in (nxt[d], alpha[d]):
            if e not in seen:
                seen.add(e)
                q.append(e)
    return order


def _canonicalize_submap(alpha_of, sigma_of, darts, root):
    """Canonical form of a map given as permutation callables over a dart set.

    Returns (RootedMap, old->new dart mapping), with root relabelled 0 and
    edge e on darts (2e, 2e+1).
    """
    order = []
    seen = {root}
    q = deque([root])
    while q:
        d = q.popleft()
        order.append(d)
        for e in (sigma_of(d), alpha_of(d)):
            if e not in seen:
                seen.add(e)
                q.append(e)
    if len(order) != len(darts):
        raise MapError("submap is not connected")
    new = {}
    nxt_id = 0
    for d in order:
        if d not in new:
            new[d] = nxt_id
            new[alpha_of(d)] = nxt_id + 1
            nxt_id += 2
    n2 = len(order)
    sigma = [0] * n2
    alpha = [0] * n2
    for d in darts:
        sigma[new[d]] = new[sigma_of(d)]
        alpha[new[d]] = new[alpha_of(d)]
    return RootedMap(alpha, sigma, new[root]), new


def core(m):
    """The map left after repeatedly removing degree-1 vertices.

    Returns EMPTY_MAP when m is a plane tree.  The root is transferred per
    the module conventions and the result is in canonical form.
    """
    dec_or_core = _decompose_impl(m, want="core")
    return dec_or_core


def decompose(m):
    """Full core-kernel decomposition of a non-tree map."""
    return _decompose_impl(m, want="decomposition")


def kernel(m):
    """Return (kernel-or-sentinel, decomposition); the sentinel flags s=2."""
    dec = decompose(m)
    return (dec.kernel if dec.kernel is not None else DEGENERATE_KERNEL), dec


def _decompose_impl(m, want):
    alive, nxt, label, deg = _peel(m)
    core_darts = [d for d in range(m.dart_count) if alive[d]]
    if not core_darts:
        if want == "core":
            return EMPTY_MAP
        raise IsTree("a tree has no core-kernel decomposition")

    words, locate = _corner_sweep(m, alive)

    if alive[m.root]:
        r_core = m.root
        mark = KEEP_CORE_ROOT
    else:
        if locate is None:
            raise MapError("root dart not found in any corner tree")
        x, mark = locate
        r_core = m.alpha[x]

    if want == "core":
        cmap, _ = _canonicalize_submap(
            lambda d: m.alpha[d], lambda d: nxt[d], set(core_darts), r_core
        )
        return cmap

    corner_order = _core_bfs_order(alive, m.alpha, nxt, r_core)
    first = m.alpha[r_core]
    corners = [first] + [d for d in corner_order if d != first]

    steps = []
    for d in corners:
        steps.extend(words[d])
        steps.append(-1)
    forest = ForestCode(np.asarray(steps, dtype=np.int8), mark)

    kernel_vertices = {v for v in range(len(deg)) if deg[v] >= 3}
    c = len(core_darts) // 2

    if not kernel_vertices:
        # bare-cycle core: the sparsity-2 family has no min-degree-3 kernel
        return Decomposition(kernel=None, chain_lengths=(c,), root_split=None, forest=forest)

    # walk the chains between kernel vertices
    end_darts = [d for d in core_darts if label[d] in kernel_vertices]
    chain_far = {}
    chain_len = {}
    root_info = None  # (end dart from which N0 is measured, N0)
    for a in end_darts:
        if a in chain_far:
            continue
        fwd_pos = rev_pos = 0
        length = 0
        e = a
        while True:
            length += 1
            if e == r_core:
                fwd_pos = length
            elif m.alpha[e] == r_core:
                rev_pos = length
            x = m.alpha[e]
            if label[x] in kernel_vertices:
                break
            e = nxt[x]  # the opposite core dart at this degree-2 vertex
        b = x
        chain_far[a] = b
        chain_far[b] = a
        chain_len[a] = chain_len[b] = length
        if fwd_pos:
            root_info = (a, fwd_pos)
        elif rev_pos:
            root_info = (b, length - rev_pos + 1)

    if root_info is None:
        raise MapError("core root dart not found on any chain")
    r_kernel, n0 = root_info
    length_root = chain_len[r_kernel]
    root_split = (n0, length_root - n0 + 1)

    kmap, new = _canonicalize_submap(
        lambda d: chain_far[d], lambda d: nxt[d], set(end_darts), r_kernel
    )
    chains = [0] * kmap.edge_count
    for a in end_darts:
        ei = new[a] // 2
        chains[ei] = chain_len[a]
    return Decomposition(
        kernel=kmap, chain_lengths=tuple(chains), root_split=root_split, forest=forest
    )


# ---------------------------------------------------------------------------
# defect, contraction, blow-up weights


def defect(m):
    """Sum of (deg(v) - 3) over vertices; equals 2E - 3V at min degree 3."""
    _, degs = vertex_labels(m)
    if min(degs) < 3:
        raise MinDegreeViolation(f"minimum degree {min(degs)} < 3")
    return 2 * m.edge_count - 3 * len(degs)


def blowup_weight(m):
    """Product of Catalan(deg(v) - 2) over vertices; 1 iff trivalent."""
    _, degs = vertex_labels(m)
    if min(degs) < 3:
        raise MinDegreeViolation(f"minimum degree {min(degs)} < 3")
    w = 1
    for deg in degs:
        w *= catalan(deg - 2)
    return w


def edge_of(m, d):
    """Canonical representative dart of d's edge."""
    return min(d, m.alpha[d])


def check_good_subset(m, edge_darts):
    """Validate an ordered list of contractible edges.

    Good means: pairwise distinct, none is the root edge, and together they
    form a forest (no loops, no cycle-closing edge).  Raises NotGoodSubset
    naming the first offending index and condition.
    """
    label, _ = vertex_labels(m)
    root_edge = edge_of(m, m.root)
    parent = {}

    def find(v):
        while parent.get(v, v) != v:
            parent[v] = parent.get(parent[v], parent[v])
            v = parent[v]
        return v

    seen = set()
    for i, d in enumerate(edge_darts):
        e = edge_of(m, d)
        if e == root_edge:
            raise NotGoodSubset(f"edge {i} is the root edge")
        if e in seen:
            raise NotGoodSubset(f"edge {i} repeats an earlier edge")
        seen.add(e)
        u, v = find(label[e]), find(label[m.alpha[e]])
        if u == v:
            raise NotGoodSubset(f"edge {i} closes a cycle")
        parent[u] = v
    return [edge_of(m, d) for d in edge_darts]


def contract(m, edge_darts):
    """Contract an ordered good subset of edges (removing them, merging ends).

    Faces and genus are preserved; on a min-degree-3 map the defect grows by
    exactly one per contracted edge.
    """
    edges = check_good_subset(m, edge_darts)
    n2 = m.dart_count
    sigma = list(m.sigma)
    inv = [0] * n2
    for d in range(n2):
        inv[sigma[d]] = d
    alive = bytearray(b"\x01" * n2)

    for a in edges:
        b = m.alpha[a]
        pa, sa = inv[a], sigma[a]
        pb, sb = inv[b], sigma[b]
        deg_u_one = sa == a
        deg_v_one = sb == b
        if deg_u_one and deg_v_one:
            raise NotGoodSubset("cannot contract an isolated edge")
        if deg_u_one:
            sigma[pb] = sb
            inv[sb] = pb
        elif deg_v_one:
            sigma[pa] = sa
            inv[sa] = pa
        else:
            # splice the two vertex cycles, dropping a and b
            sigma[pa] = sb
            inv[sb] = pa
            sigma[pb] = sa
            inv[sa] = pb
        alive[a] = 0
        alive[b] = 0

    keep = [d for d in range(n2) if alive[d]]
    new = {d: i for i, d in enumerate(keep)}
    alpha2 = [new[m.alpha[d]] for d in keep]
    sigma2 = [new[sigma[d]] for d in keep]
    return build_map(alpha2, sigma2, new[m.root])


def iter_good_tuples(m, d):
    """All ordered good d-tuples of edges (representative darts); small maps only."""
    reps = sorted({edge_of(m, x) for x in range(m.dart_count)})
    root_edge = edge_of(m, m.root)
    reps = [e for e in reps if e != root_edge]

    def rec(prefix):
        if len(prefix) == d:
            yield tuple(prefix)
            return
        for e in reps:
            if e in prefix:
                continue
            try:
                check_good_subset(m, prefix + [e])
            except NotGoodSubset:
                continue
            yield from rec(prefix + [e])

    yield from rec([])


def catalan_weighted_tuple_sum(m, d):
    """Sum over ordered good d-tuples of 1/(d! * prod Cat(deg-2)) after contraction.

    Exact Fraction; the crude sandwich 4^{-d} C(E/12, d) <= . <= 2^{-d} C(E, d)
    holds for trivalent maps.
    """
    total = Fraction(0)
    fact = 1
    for i in range(1, d + 1):
        fact *= i
    for tup in iter_good_tuples(m, d):
        w = blowup_weight_after_contract(m, tup)
        total += Fraction(1, fact * w)
    return total


def blowup_weight_after_contract(m, edges):
    contracted = contract(m, list(edges))
    _, degs = vertex_labels(contracted)
    w = 1
    for deg in degs:
        if deg >= 3:
            w *= catalan(deg - 2)
    return w


# ---------------------------------------------------------------------------
# recomposition


def recompose(dec, n):
    """Exact inverse of decompose: rebuild the n-edge map from its parts."""
    c = dec.core_edge_count
    steps = dec.forest.steps
    if len(steps) != 2 * n:
        raise InconsistentSizes(f"forest code has {len(steps) // 2} steps for n={n}")
    if dec.forest.tree_count != 2 * c:
        raise InconsistentSizes(
            f"forest has {dec.forest.tree_count} trees, core needs {2 * c}"
        )
    if c > n:
        raise InconsistentSizes(f"core edges {c} exceed n={n}")

    core_sigma, r_core = _build_core(dec, c)
    return _graft(core_sigma, r_core, dec.forest, n, c)


def _build_core(dec, c):
    """Expand kernel chains into the core rotation system (darts 0..2c-1)."""
    sigma = [0] * (2 * c)
    if dec.kernel is None:
        if c == 1:
            return [1, 0], 0  # the loop map
        # bare cycle: edge j joins vertex j to vertex j+1 (mod c)
        for j in range(c):
            fwd = 2 * j
            back_prev = 2 * ((j - 1) % c) + 1
            sigma[fwd] = back_prev
            sigma[back_prev] = fwd
        return sigma, 0

    kern = dec.kernel
    k = kern.edge_count
    base = []
    off = 0
    for i in range(k):
        base.append(off)
        off += 2 * dec.chain_lengths[i]
    # chain-internal rotations at the inserted degree-2 vertices
    for i in range(k):
        for j in range(1, dec.chain_lengths[i]):
            back = base[i] + 2 * (j - 1) + 1
            fwd = base[i] + 2 * j
            sigma[back] = fwd
            sigma[fwd] = back
    # kernel-vertex rotations transfer to the chain end darts
    def end_dart(kdart):
        i, side = divmod(kdart, 2)
        if side == 0:
            return base[i]
        return base[i] + 2 * (dec.chain_lengths[i] - 1) + 1

    for kd in range(2 * k):
        sigma[end_dart(kd)] = end_dart(kern.sigma[kd])
    n0 = dec.root_split[0]
    r_core = base[0] + 2 * (n0 - 1)
    return sigma, r_core


def _graft(core_sigma, r_core, forest, n, c):
    """Insert the forest's trees into the core corners and relocate the root."""
    n2 = 2 * n
    sigma = [0] * n2
    sigma[: 2 * c] = core_sigma
    alpha = [d ^ 1 for d in range(n2)]

    first = r_core ^ 1  # alpha partner in the canonical core labelling
    corners = _core_corner_order(core_sigma, r_core, first, c)

    steps = forest.steps
    pos = 0
    nxt_id = 2 * c
    mark = forest.mark
    marked_dart = None
    for ci, d in enumerate(corners):
        succ = core_sigma[d]
        last = d
        stack = []
        step_in_tree = 0
        while True:
            s = steps[pos]
            pos += 1
            if s > 0:
                step_in_tree += 1
                p = nxt_id
                nxt_id += 2
                if ci == 0 and step_in_tree == mark:
                    marked_dart = p
                if stack:
                    f, l = stack[-1]
                    sigma[l] = p
                    stack[-1] = (f, p)
                else:
                    sigma[last] = p
                    last = p
                stack.append((p + 1, p + 1))
            else:
                if not stack:
                    sigma[last] = succ
                    break
                step_in_tree += 1
                f, l = stack.pop()
                sigma[l] = f
                if ci == 0 and step_in_tree == mark:
                    marked_dart = f
    if pos != len(steps):
        raise InconsistentSizes("forest code longer than the core's corners require")

    root = r_core if mark == KEEP_CORE_ROOT else marked_dart
    if root is None:
        raise InconsistentSizes("root mark beyond the first tree's contour")
    return build_map(alpha, sigma, root)


def _core_corner_order(core_sigma, r_core, first, c):
    """Corner order: right of the root tip first, then canonical BFS order."""
    order = []
    seen = bytearray(2 * c)
    q = deque([r_core])
    seen[r_core] = 1
    while q:
        d = q.popleft()
        order.append(d)
        for e in (core_sigma[d], d ^ 1):
            if not seen[e]:
                seen[e] = 1
                q.append(e)
    return [first] + [d for d in order if d != first]


# ---------------------------------------------------------------------------
# documents


def decomposition_to_document(dec):
    doc = {
        "kernel": None if dec.kernel is None else json.loads(serialize(dec.kernel)),
        "chain_lengths": list(dec.chain_lengths),
        "root_split": None if dec.root_split is None else list(dec.root_split),
        "steps": dec.forest.to_step_string(),
        "mark": dec.forest.mark,
    }
    return json.dumps(doc, separators=(",", ":"))


def decomposition_from_document(text):
    try:
        doc = json.loads(text)
        kern = doc["kernel"]
        chains = doc["chain_lengths"]
        split = doc["root_split"]
        steps = doc["steps"]
        mark = doc["mark"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"bad decomposition document: {exc}") from None
    kernel_map = None if kern is None else deserialize(json.dumps(kern))
    forest = ForestCode.from_step_string(steps, mark)
    return Decomposition(
        kernel=kernel_map,
        chain_lengths=tuple(chains),
        root_split=None if split is None else tuple(split),
        forest=forest,
    )
