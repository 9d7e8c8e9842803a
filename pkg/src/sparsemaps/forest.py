"""Lattice-path encoding of grafted forests.

An ordered forest of ``2c`` plane trees with ``n - c`` edges in total is
encoded by a ±1 path of length ``2n`` that hits ``-2c`` for the first time
at its last step: each tree contributes its contour (up on first visit of
an edge, down on the way back) followed by one terminating down step.

The code also carries a root mark in ``{0, ..., A-1}`` where ``A`` is the
first hitting time of -1.  Mark 0 means "keep the root of the host map's
core"; mark ``j >= 1`` designates the oriented edge traversed at contour
step ``j`` of the first tree (there are ``A - 1 = 2*t_1`` of them).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KEEP_CORE_ROOT = 0


class ForestCodeError(ValueError):
    pass


@dataclass(frozen=True)
class ForestCode:
    """A marked first-passage ±1 path; see the module docstring."""

    steps: np.ndarray  # int8 array of +1/-1, length 2n
    mark: int

    def __post_init__(self):
        steps = np.ascontiguousarray(self.steps, dtype=np.int8)
        object.__setattr__(self, "steps", steps)
        if steps.ndim != 1 or len(steps) % 2 != 0 or len(steps) == 0:
            raise ForestCodeError("steps must be a nonempty flat array of even length")
        if not np.all((steps == 1) | (steps == -1)):
            raise ForestCodeError("steps must be +1/-1")
        walk = np.cumsum(steps, dtype=np.int64)
        end = int(walk[-1])
        if end >= 0 or end % 2 != 0:
            raise ForestCodeError(f"path must end at an even negative level, got {end}")
        if len(walk) > 1 and np.min(walk[:-1]) <= end:
            raise ForestCodeError("path must hit its final level for the first time at the end")
        a = self.first_tree_end
        if not (0 <= self.mark < a):
            raise ForestCodeError(f"mark {self.mark} outside 0..{a - 1}")

    @property
    def tree_count(self):
        return -int(np.sum(self.steps))

    @property
    def edge_total(self):
        return (len(self.steps) - self.tree_count) // 2

    @property
    def first_tree_end(self):
        """First hitting time A of -1; the first tree has (A-1)/2 edges."""
        walk = np.cumsum(self.steps, dtype=np.int64)
        return int(np.argmax(walk == -1)) + 1

    def tree_sizes(self):
        """Edge counts of the 2c trees, in forest order."""
        walk = np.cumsum(self.steps, dtype=np.int64)
        run_min = np.minimum.accumulate(walk)
        prev_min = np.concatenate(([0], run_min[:-1]))
        ends = np.flatnonzero(walk < prev_min)  # first hitting times of -1, -2, ...
        sizes = np.diff(np.concatenate(([-1], ends))) - 1
        return [int(s) // 2 for s in sizes]

    def __eq__(self, other):
        if not isinstance(other, ForestCode):
            return NotImplemented
        return self.mark == other.mark and np.array_equal(self.steps, other.steps)

    def to_step_string(self):
        return "".join("U" if s > 0 else "D" for s in self.steps)

    @classmethod
    def from_step_string(cls, text, mark):
        bad = set(text) - {"U", "D"}
        if bad:
            raise ForestCodeError(f"bad step characters: {sorted(bad)}")
        steps = np.fromiter((1 if ch == "U" else -1 for ch in text), dtype=np.int8, count=len(text))
        return cls(steps, mark)


def vervaat_first_passage(bridge_steps):
    """Cyclic shift of a ±1 bridge at the first time of its overall minimum.

    The result hits the bridge's final level for the first time at its last
    step (cycle lemma).  A uniform bridge maps to the first-tree-size-biased
    first-passage path, which is exactly the path marginal of the uniform
    marked code.
    """
    steps = np.ascontiguousarray(bridge_steps, dtype=np.int8)
    walk = np.cumsum(steps, dtype=np.int64)
    m = int(np.argmin(walk)) + 1
    if m == len(steps):
        return steps.copy()
    return np.concatenate((steps[m:], steps[:m]))


def dyck_to_tree_map(steps, build):
    """Build a plane tree as a rooted map from a Dyck word (+1/-1, sum 0).

    The tree's root vertex carries the first child edge; the returned map is
    rooted at the dart of the first edge pointing away from the root vertex.
    Needs at least one edge.
    """
    steps = np.asarray(steps)
    t = len(steps) // 2
    if t == 0:
        raise ForestCodeError("cannot build a 0-edge tree map")
    n_darts = 2 * t
    sigma = [0] * n_darts
    alpha = [0] * n_darts
    for e in range(t):
        alpha[2 * e] = 2 * e + 1
        alpha[2 * e + 1] = 2 * e
    # stack holds (first_dart, last_dart) of the rotation under construction
    # at each vertex on the path from the root
    nxt = 0
    stack = [(-1, -1)]
    for s in steps:
        if s > 0:
            p = nxt
            nxt += 2
            first, last = stack[-1]
            if last >= 0:
                sigma[last] = p
            else:
                first = p
            stack[-1] = (first, p)
            stack.append((p + 1, p + 1))
        else:
            first, last = stack.pop()
            sigma[last] = first
    first, last = stack.pop()
    if last < 0:
        raise ForestCodeError("empty Dyck word")
    sigma[last] = first
    return build(alpha, sigma, 0)
