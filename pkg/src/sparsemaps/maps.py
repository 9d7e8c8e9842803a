"""Rooted combinatorial maps encoded as permutation pairs on darts.

A map on an orientable surface is stored as a pair of permutations on
``2n`` darts (half-edges): ``alpha`` is the fixed-point-free involution
swapping the two darts of each edge, and ``sigma`` rotates the darts
counterclockwise around their vertex.  A distinguished dart roots the map.
Faces are the orbits of the composite ``d -> sigma[alpha[d]]``, so the
one-edge loop map has two faces, as geometry requires.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass


class MapError(ValueError):
    """Base class for invalid-map conditions."""


class NotInvolution(MapError):
    pass


class FixedPoint(MapError):
    pass


class Disconnected(MapError):
    pass


class BadRoot(MapError):
    pass


class OddEulerCharacteristic(MapError):
    pass


class ParseError(MapError):
    pass


class MinDegreeViolation(MapError):
    pass


class _EmptyMap:
    """Sentinel for the empty map (a tree's core).  Not a RootedMap."""

    dart_count = 0

    def __repr__(self):
        return "EMPTY_MAP"

    def __reduce__(self):
        return (_empty_map_instance, ())


def _empty_map_instance():
    return EMPTY_MAP


EMPTY_MAP = _EmptyMap()


class RootedMap:
    """Immutable rooted map.  Use :func:`build_map` to validate inputs."""

    __slots__ = ("alpha", "sigma", "root")

    def __init__(self, alpha, sigma, root):
        object.__setattr__(self, "alpha", tuple(alpha))
        object.__setattr__(self, "sigma", tuple(sigma))
        object.__setattr__(self, "root", int(root))

    def __setattr__(self, name, value):
        raise AttributeError("RootedMap is immutable")

    @property
    def dart_count(self):
        return len(self.alpha)

    @property
    def edge_count(self):
        return len(self.alpha) // 2

    def __eq__(self, other):
        if not isinstance(other, RootedMap):
            return NotImplemented
        return (self.alpha, self.sigma, self.root) == (other.alpha, other.sigma, other.root)

    def __hash__(self):
        return hash((self.alpha, self.sigma, self.root))

    def __repr__(self):
        return f"RootedMap(darts={self.dart_count}, root={self.root})"


@dataclass(frozen=True)
class EulerSignature:
    """Euler parameters of a map; ``sparsity`` is faces + 2*genus."""

    edges: int
    faces: int
    genus: int
    vertices: int
    sparsity: int


def _check_permutation(perm, n, name):
    seen = bytearray(n)
    for x in perm:
        if not isinstance(x, int) or not (0 <= x < n) or seen[x]:
            raise ParseError(f"{name} is not a permutation of 0..{n - 1}")
        seen[x] = 1


def build_map(alpha, sigma, root):
    """Validate and build a RootedMap.

    Raises NotInvolution, FixedPoint, Disconnected or BadRoot naming the
    violated invariant.  The dart count must be an even number >= 2.
    """
    alpha = tuple(alpha)
    sigma = tuple(sigma)
    n = len(alpha)
    if n < 2 or n % 2 != 0 or len(sigma) != n:
        raise ParseError("alpha and sigma must have equal even length >= 2")
    _check_permutation(alpha, n, "alpha")
    _check_permutation(sigma, n, "sigma")
    for d in range(n):
        if alpha[d] == d:
            raise FixedPoint(f"alpha fixes dart {d}")
        if alpha[alpha[d]] != d:
            raise NotInvolution(f"alpha is not an involution at dart {d}")
    if not (0 <= root < n):
        raise BadRoot(f"root dart {root} out of range 0..{n - 1}")
    # connectivity: <alpha, sigma> must act transitively on darts
    seen = bytearray(n)
    stack = [0]
    seen[0] = 1
    count = 1
    while stack:
        d = stack.pop()
        for e in (alpha[d], sigma[d]):
            if not seen[e]:
                seen[e] = 1
                count += 1
                stack.append(e)
    if count != n:
        raise Disconnected(f"only {count} of {n} darts reachable from dart 0")
    return RootedMap(alpha, sigma, root)


def orbits(perm):
    """Cycles of a permutation, as dart tuples in traversal order."""
    n = len(perm)
    seen = bytearray(n)
    out = []
    for d in range(n):
        if seen[d]:
            continue
        cyc = []
        x = d
        while not seen[x]:
            seen[x] = 1
            cyc.append(x)
            x = perm[x]
        out.append(tuple(cyc))
    return out


def faces(m):
    """Face cycles: orbits of sigma∘alpha (alpha applied first)."""
    alpha, sigma = m.alpha, m.sigma
    return orbits([sigma[alpha[d]] for d in range(m.dart_count)])


def vertices(m):
    """Vertex cycles: orbits of sigma."""
    return orbits(m.sigma)


def vertex_labels(m):
    """Array mapping each dart to a vertex index, plus dart-counted degrees."""
    n = m.dart_count
    label = [-1] * n
    degs = []
    for i, cyc in enumerate(orbits(m.sigma)):
        for d in cyc:
            label[d] = i
        degs.append(len(cyc))
    return label, degs


def degrees(m):
    """Dart-counted vertex degrees (a loop contributes 2)."""
    return [len(c) for c in vertices(m)]


def euler_signature(m):
    """Compute (n, f, g, v, s) of a map; genus must come out integral."""
    n = m.edge_count
    f = len(faces(m))
    v = len(vertices(m))
    chi = v - n + f
    if chi % 2 != 0:
        raise OddEulerCharacteristic(f"v - n + f = {chi} is odd")
    g = (2 - chi) // 2
    if g < 0:
        raise OddEulerCharacteristic(f"negative genus from v={v}, n={n}, f={f}")
    return EulerSignature(edges=n, faces=f, genus=g, vertices=v, sparsity=f + 2 * g)


def canonical_dart_order(m, root=None):
    """BFS discovery order of darts from the root.

    From each dart the successors sigma[d] then alpha[d] are explored, which
    makes the order invariant under dart relabelings fixing the root.
    """
    if root is None:
        root = m.root
    alpha, sigma = m.alpha, m.sigma
    n = m.dart_count
    seen = bytearray(n)
    order = []
    q = deque([root])
    seen[root] = 1
    while q:
        d = q.popleft()
        order.append(d)
        for e in (sigma[d], alpha[d]):
            if not seen[e]:
                seen[e] = 1
                q.append(e)
    return order


def canonical_form(m):
    """Relabel darts canonically: root becomes dart 0, edge e gets darts (2e, 2e+1).

    Two rooted maps are isomorphic (by a relabeling fixing the root and
    conjugating both permutations) iff their canonical forms are equal.
    """
    order = canonical_dart_order(m)
    n = m.dart_count
    new = [-1] * n
    nxt = 0
    for d in order:
        if new[d] < 0:
            new[d] = nxt
            new[m.alpha[d]] = nxt + 1
            nxt += 2
    sigma = [0] * n
    for d in range(n):
        sigma[new[d]] = new[m.sigma[d]]
    alpha = [0] * n
    for e in range(n // 2):
        alpha[2 * e] = 2 * e + 1
        alpha[2 * e + 1] = 2 * e
    return RootedMap(alpha, sigma, new[m.root])


def canonical_encode(m):
    """Byte code identifying a rooted map up to dart relabeling."""
    cf = canonical_form(m)
    # alpha is the canonical pairing and root is 0 after canonical_form,
    # except that the root may be dart 0's partner only if... it is always 0:
    # the root is discovered first, so it receives label 0.
    return b" ".join(b"%d" % d for d in cf.sigma)


def relabel(m, perm):
    """Apply a dart relabeling d -> perm[d]; used by tests."""
    n = m.dart_count
    alpha = [0] * n
    sigma = [0] * n
    for d in range(n):
        alpha[perm[d]] = perm[m.alpha[d]]
        sigma[perm[d]] = perm[m.sigma[d]]
    return build_map(alpha, sigma, perm[m.root])


def serialize(m):
    """Text document for a map: fields darts, alpha, sigma, root."""
    doc = {
        "darts": m.dart_count,
        "alpha": list(m.alpha),
        "sigma": list(m.sigma),
        "root": m.root,
    }
    return json.dumps(doc, separators=(",", ":")).encode()


def deserialize(data):
    """Inverse of :func:`serialize`; re-validates every invariant."""
    if isinstance(data, bytes):
        try:
            data = data.decode()
        except UnicodeDecodeError as exc:
            raise ParseError(f"not utf-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad map document: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("map document must be an object")
    try:
        darts = doc["darts"]
        alpha = doc["alpha"]
        sigma = doc["sigma"]
        root = doc["root"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field: {exc}") from None
    if not isinstance(alpha, list) or not isinstance(sigma, list):
        raise ParseError("alpha and sigma must be arrays")
    if darts != len(alpha):
        raise ParseError("dart count does not match alpha length")
    return build_map(alpha, sigma, root)


def to_dot(m):
    """DOT export: one node per vertex orbit, one edge per alpha orbit.

    The root edge is drawn red and labelled with the root dart.
    """
    label, _ = vertex_labels(m)
    lines = ["graph rootedmap {"]
    for i in range(max(label) + 1):
        lines.append(f'  v{i} [label="{i}"];')
    seen = set()
    for d in range(m.dart_count):
        if d in seen:
            continue
        p = m.alpha[d]
        seen.add(d)
        seen.add(p)
        attrs = f' [label="{d}|{p}"'
        if d == m.root or p == m.root:
            attrs += f', color=red, penwidth=2.0, taillabel="root={m.root}"'
        attrs += "]"
        lines.append(f"  v{label[d]} -- v{label[p]}{attrs};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# Small named maps used across the test-suite and documentation.

def loop_map():
    """One vertex, one loop edge: 2 faces, genus 0."""
    return build_map((1, 0), (1, 0), 0)


def bridge_map():
    """Two vertices joined by one edge (the smallest tree): 1 face, genus 0."""
    return build_map((1, 0), (0, 1), 0)


def torus_map():
    """One vertex, two interleaved loops: 1 face, genus 1."""
    return build_map((1, 0, 3, 2), (2, 3, 1, 0), 0)
