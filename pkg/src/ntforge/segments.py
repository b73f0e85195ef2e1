"""Initial segments, the sigma map, and the induced partition of a right LCM
semigroup.

For a finite subset F of P, a subset C is an initial segment when the iterated
right LCM sigma(C) exists and C = {t in F : t <= sigma(C)}.  The cells

    P_{F,C} = {s in P : sigma(C) <= s and f !<= s for all f in F \\ C}

over the initial segments C partition P; equivalently s lies in the cell of
C = {t in F : t <= s}.  All predicates are invariant under replacing sigma(C)
by a unit translate, which the test suite checks rather than assumes.
"""

from __future__ import annotations

import itertools


def leq(p, q) -> bool:
    """p <= q in the right-ideal preorder, i.e. q in pP."""
    return p.sg.left_divide(p, q) is not None


def unit_equivalent(p, q):
    """The unit x with p = q*x, or None."""
    sg = p.sg
    sg.check_same(q)
    for x in sg.units():
        if q * x == p:
            return x
    return None


def sigma(C):
    """Canonical iterated right LCM of a finite set; e for the empty set.

    None when some intermediate ideal intersection is empty.  The result is
    independent of fold order up to units; folding in sort order makes it
    deterministic.
    """
    C = list(C)
    if not C:
        raise ValueError("sigma of an unanchored empty set; pass the semigroup")
    sg = C[0].sg
    return sigma_in(sg, C)


def sigma_in(sg, C):
    acc = sg.identity()
    for t in sorted(C, key=sg.sort_key):
        acc = sg.right_lcm(acc, t)
        if acc is None:
            return None
    return acc


class Segment:
    """An initial segment C of F together with its canonical sigma(C)."""

    __slots__ = ("C", "sig")

    def __init__(self, C, sig):
        self.C = frozenset(C)
        self.sig = sig

    def __repr__(self):
        body = ",".join(sorted(repr(t) for t in self.C))
        return f"<segment {{{body}}} sigma={self.sig!r}>"


def is_initial_segment(sg, F, C) -> bool:
    sig = sigma_in(sg, C)
    if sig is None:
        return False
    return set(C) == {t for t in F if leq(t, sig)}


def initial_segments(sg, F, max_size: int = 10):
    """All initial segments of F, by exhaustive enumeration over subsets."""
    F = list(dict.fromkeys(F))
    if len(F) > max_size:
        raise ValueError(f"|F| = {len(F)} exceeds the enumeration bound {max_size}")
    segs = []
    for k in range(len(F) + 1):
        for C in itertools.combinations(F, k):
            if is_initial_segment(sg, F, C):
                segs.append(Segment(C, sigma_in(sg, C)))
    return segs


def partition_member(s, F, C) -> bool:
    """Whether s lies in the cell P_{F,C} of the partition induced by F."""
    sg = s.sg
    if not is_initial_segment(sg, F, C):
        raise ValueError(f"{sorted(map(repr, C))} is not an initial segment of F")
    sig = sigma_in(sg, C)
    if not leq(sig, s):
        return False
    return all(not leq(f, s) for f in set(F) - set(C))


def segment_of(sg, F, s):
    """The unique initial segment whose cell contains s: C = {t in F : t <= s}."""
    return frozenset(t for t in F if leq(t, s))


class PartitionReport:
    def __init__(self, ok, segments, checked, failures):
        self.ok = ok
        self.segments = segments
        self.checked = checked
        self.failures = failures

    def __repr__(self):
        verdict = "pass" if self.ok else "fail"
        return (
            f"<partition {verdict}: {len(self.segments)} segments, "
            f"{self.checked} elements, {len(self.failures)} failures>"
        )


def check_partition(sg, F, depth: int) -> PartitionReport:
    """Verify the cells P_{F,C} partition all elements of length <= depth.

    Each element must land in exactly one cell, and that cell's segment must
    be {t in F : t <= s}.
    """
    segs = initial_segments(sg, F)
    failures = []
    checked = 0
    for s in sg.elements(depth):
        checked += 1
        hits = [seg for seg in segs if partition_member(s, F, seg.C)]
        if len(hits) != 1:
            failures.append((s, f"lies in {len(hits)} cells"))
            continue
        if hits[0].C != segment_of(sg, F, s):
            failures.append((s, "cell disagrees with {t in F : t <= s}"))
    return PartitionReport(not failures, segs, checked, failures)
