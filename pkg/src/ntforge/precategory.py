"""Finite-dimensional right-tensor C*-precategories over a right LCM semigroup.

Two backends share one arrow model:

* :class:`ColoredProductSystem` -- morphism spaces L(p,q) are direct sums of
  full rectangular matrix blocks, one per "color", with block shapes given by
  a multiplicative dimension function on the semigroup.  Right tensoring by r
  is Kronecker ampliation with the identity on the right factor.
* :class:`ZeroTensorBackend` -- objects are naturals, off-diagonal morphism
  spaces are zero, diagonal ones are full matrix algebras, and tensoring by
  any r != e is the zero map.  This backend exists to witness failures of
  tensor-nondegeneracy.

Ideals are determined by their diagonal parts; in the block model that means
a subset of colors.  The structural checks (well-alignment, nondegeneracy,
essentiality) are sampled or exhaustive rank tests at a chosen depth.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from .linalg import rank_of_span, spectral_norm


class Arrow:
    """A morphism p <- q: one complex matrix block per slot (color)."""

    __slots__ = ("backend", "range", "source", "blocks")

    def __init__(self, backend, range_, source, blocks):
        shapes = backend.shape(range_, source)
        blocks = tuple(np.ascontiguousarray(b, dtype=complex) for b in blocks)
        if len(blocks) != len(shapes):
            raise ValueError(f"expected {len(shapes)} blocks, got {len(blocks)}")
        for b, sh in zip(blocks, shapes):
            if b.shape != sh:
                raise ValueError(f"block shape {b.shape} != {sh} for ({range_!r},{source!r})")
        for b in blocks:
            b.setflags(write=False)
        self.backend = backend
        self.range = range_
        self.source = source
        self.blocks = blocks

    def _like(self, other):
        if self.backend is not other.backend:
            raise ValueError("arrows from different backends")

    def __add__(self, other):
        self._like(other)
        if (self.range, self.source) != (other.range, other.source):
            raise ValueError("object mismatch in arrow sum")
        return Arrow(
            self.backend, self.range, self.source,
            [x + y for x, y in zip(self.blocks, other.blocks)],
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return Arrow(self.backend, self.range, self.source, [scalar * b for b in self.blocks])

    __rmul__ = __mul__

    def adjoint(self):
        return self.backend._adjoint(self)

    def rtensor(self, r):
        return self.backend._rtensor(self, r)

    def compose(self, other):
        self._like(other)
        if self.source != other.range:
            raise ValueError(
                f"object mismatch: cannot compose source {self.source!r} with range {other.range!r}"
            )
        return self.backend._compose(self, other)

    def norm(self):
        return max((spectral_norm(b) for b in self.blocks), default=0.0)

    def is_zero(self, tol=1e-12):
        return self.norm() <= tol

    def flat(self):
        return np.concatenate([np.ravel(b) for b in self.blocks]) if self.blocks else np.zeros(0)

    def __repr__(self):
        return f"<arrow {self.range!r}<-{self.source!r} norm={self.norm():.3g}>"


def compose(a: Arrow, b: Arrow) -> Arrow:
    return a.compose(b)


def rtensor(a: Arrow, r) -> Arrow:
    return a.rtensor(r)


def adjoint(a: Arrow) -> Arrow:
    return a.adjoint()


class ColorIdeal:
    """The ideal of arrows supported on a fixed subset of slots."""

    __slots__ = ("colors",)

    def __init__(self, colors):
        self.colors = frozenset(colors)

    def __repr__(self):
        return f"<ideal colors={sorted(self.colors)}>"


def full_ideal(backend) -> ColorIdeal:
    return ColorIdeal(range(backend.slot_count))


class _BackendBase:
    """Shared arrow constructors; subclasses define shapes and the product."""

    sg = None
    slot_count = 0

    def shape(self, p, q):
        raise NotImplementedError

    def zero(self, p, q) -> Arrow:
        return Arrow(self, p, q, [np.zeros(sh, dtype=complex) for sh in self.shape(p, q)])

    def identity_arrow(self, p) -> Arrow:
        blocks = []
        for rows, cols in self.shape(p, p):
            assert rows == cols
            blocks.append(np.eye(rows, dtype=complex))
        return Arrow(self, p, p, blocks)

    def arrow(self, p, q, blocks) -> Arrow:
        return Arrow(self, p, q, blocks)

    def basis(self, p, q, ideal=None):
        """Matrix-unit arrows spanning L(p,q) (or K(p,q) when ideal given)."""
        colors = range(self.slot_count) if ideal is None else sorted(ideal.colors)
        shapes = self.shape(p, q)
        out = []
        for c in colors:
            rows, cols = shapes[c]
            for i in range(rows):
                for j in range(cols):
                    blocks = [np.zeros(sh, dtype=complex) for sh in shapes]
                    blocks[c][i, j] = 1.0
                    out.append(Arrow(self, p, q, blocks))
        return out

    def random_arrow(self, p, q, rng, ideal=None) -> Arrow:
        colors = set(range(self.slot_count)) if ideal is None else ideal.colors
        shapes = self.shape(p, q)
        blocks = []
        for c, sh in enumerate(shapes):
            if c in colors:
                blocks.append(
                    np.array(
                        [[complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(sh[1])]
                         for _ in range(sh[0])]
                    ).reshape(sh)
                )
            else:
                blocks.append(np.zeros(sh, dtype=complex))
        return Arrow(self, p, q, blocks)

    def space_dim(self, p, q, ideal=None) -> int:
        colors = range(self.slot_count) if ideal is None else sorted(ideal.colors)
        shapes = self.shape(p, q)
        return sum(shapes[c][0] * shapes[c][1] for c in colors)


class ColoredProductSystem(_BackendBase):
    """Block-matrix morphism spaces with a multiplicative dimension function.

    gen_dims maps each generator (in sg.generators() order) to its per-color
    dimension tuple; dim(p) is the product over the abelianized generator
    exponents of p.  Validation rejects dimension data that the semigroup's
    relations make non-multiplicative (the absorption monoid forces dimension
    1 on its absorbed generator).
    """

    kind = "colored"

    def __init__(self, sg, gen_dims=(), colors=None, check_depth=3):
        self.sg = sg
        gens = sg.generators()
        gen_dims = [tuple(int(d) for d in row) for row in gen_dims]
        if len(gen_dims) != len(gens):
            raise ValueError(f"need dims for all {len(gens)} generators, got {len(gen_dims)}")
        if colors is None:
            if not gen_dims:
                raise ValueError("colors must be given explicitly when there are no generators")
            colors = len(gen_dims[0])
        if any(len(row) != colors for row in gen_dims):
            raise ValueError("all generator dim tuples must have one entry per color")
        if any(d < 1 for row in gen_dims for d in row):
            raise ValueError("dims must be >= 1")
        self.slot_count = int(colors)
        self.gen_dims = gen_dims
        self._dim_cache = {}
        self._validate(check_depth)

    def dim(self, p):
        cached = self._dim_cache.get(p)
        if cached is None:
            exps = self.sg.gen_exponents(p)
            cached = tuple(
                int(np.prod([row[c] ** e for row, e in zip(self.gen_dims, exps)], initial=1))
                for c in range(self.slot_count)
            )
            self._dim_cache[p] = cached
        return cached

    def shape(self, p, q):
        dp, dq = self.dim(p), self.dim(q)
        return [(dp[c], dq[c]) for c in range(self.slot_count)]

    def _validate(self, depth):
        e = self.sg.identity()
        if self.dim(e) != (1,) * self.slot_count:
            raise ValueError("identity must have dimension 1 in every color")
        els = self.sg.elements(depth)
        for p, q in itertools.product(els, repeat=2):
            want = tuple(a * b for a, b in zip(self.dim(p), self.dim(q)))
            if self.dim(p * q) != want:
                raise ValueError(
                    f"dimension function is not multiplicative on the pair "
                    f"({p!r}, {q!r}): dim({p * q!r}) = {self.dim(p * q)}, "
                    f"dim({p!r})*dim({q!r}) = {want}"
                )

    def _compose(self, a, b):
        return Arrow(self, a.range, b.source, [x @ y for x, y in zip(a.blocks, b.blocks)])

    def _adjoint(self, a):
        return Arrow(self, a.source, a.range, [b.conj().T for b in a.blocks])

    def _rtensor(self, a, r):
        dr = self.dim(r)
        return Arrow(
            self, a.range * r, a.source * r,
            [np.kron(b, np.eye(dr[c], dtype=complex)) for c, b in enumerate(a.blocks)],
        )


class ZeroTensorBackend(_BackendBase):
    """Objects 0,1,2,... with L(n,m) = 0 for n != m and zero right tensoring.

    Diagonal spaces are full matrix algebras of the given sizes.  Tensoring by
    r != 0 is the zero map, so the full ideal is not tensor-nondegenerate --
    the point of this backend.
    """

    kind = "zero"
    slot_count = 1

    def __init__(self, dims, sg=None):
        from .semigroups import DirectSumN

        self.sg = sg if sg is not None else DirectSumN(1)
        self.dims = [int(d) for d in dims]
        if any(d < 1 for d in self.dims):
            raise ValueError("object dims must be >= 1")

    def _d(self, p):
        n = p.data[0]
        if n >= len(self.dims):
            return self.dims[-1]
        return self.dims[n]

    def shape(self, p, q):
        return [(self._d(p), self._d(q))]

    def in_space(self, a, tol=1e-12):
        return a.range == a.source or a.norm() <= tol

    def basis(self, p, q, ideal=None):
        if p != q:
            return []
        return super().basis(p, q, ideal)

    def random_arrow(self, p, q, rng, ideal=None):
        if p != q:
            return self.zero(p, q)
        return super().random_arrow(p, q, rng, ideal)

    def space_dim(self, p, q, ideal=None):
        return 0 if p != q else super().space_dim(p, q, ideal)

    def _compose(self, a, b):
        # off-diagonal arrows are zero, so plain block product is the truth
        return Arrow(self, a.range, b.source, [a.blocks[0] @ b.blocks[0]])

    def _adjoint(self, a):
        return Arrow(self, a.source, a.range, [a.blocks[0].conj().T])

    def _rtensor(self, a, r):
        if r == self.sg.identity():
            return a
        return self.zero(a.range * r, a.source * r)


def ideal_membership(a: Arrow, K: ColorIdeal, tol=1e-12) -> bool:
    """a lies in K(range, source): blocks off the ideal's colors vanish."""
    return all(
        c in K.colors or spectral_norm(b) <= tol for c, b in enumerate(a.blocks)
    )


class StructureReport:
    def __init__(self, name, ok, checked, failures):
        self.name = name
        self.ok = ok
        self.checked = checked
        self.failures = failures

    def __repr__(self):
        verdict = "pass" if self.ok else "fail"
        return f"<{self.name} {verdict}: {self.checked} checks, {len(self.failures)} failures>"


def check_well_aligned(backend, K: ColorIdeal, depth: int, seed=0, samples=2, tol=1e-12):
    """Aligned products of ideal arrows stay in the ideal, and K tensor 1 <= K.

    For q,s admitting right LCM r and arrows a in K(p,q), b in K(s,t), the
    product (a x 1_{q^-1 r})(b x 1_{s^-1 r}) must lie in K(p q^-1 r, t s^-1 r).
    """
    sg = backend.sg
    rng = random.Random(seed)
    els = sg.elements(depth)
    failures = []
    checked = 0
    for q, s in itertools.product(els, repeat=2):
        r = sg.right_lcm(q, s)
        if r is None:
            continue
        qr, sr = sg.left_divide(q, r), sg.left_divide(s, r)
        pts = [(q, s)] + [(rng.choice(els), rng.choice(els)) for _ in range(samples)]
        for p, t in pts:
            a = backend.random_arrow(p, q, rng, ideal=K)
            b = backend.random_arrow(s, t, rng, ideal=K)
            prod = a.rtensor(qr).compose(b.rtensor(sr))
            checked += 1
            if (prod.range, prod.source) != (p * qr, t * sr):
                failures.append(((p, q, s, t), "aligned product has wrong objects"))
            elif not ideal_membership(prod, K, tol):
                failures.append(((p, q, s, t), "aligned product escapes the ideal"))
            checked += 1
            rr = rng.choice(els)
            if not ideal_membership(a.rtensor(rr), K, tol):
                failures.append(((p, q, rr), "K tensor 1 escapes the ideal"))
    return StructureReport("well-aligned", not failures, checked, failures)


def check_nondegenerate(backend, K: ColorIdeal, depth: int, tol=1e-8):
    """(K(p,p) x 1_r) K(pr,pr) spans K(pr,pr), for non-unit p; rank test."""
    sg = backend.sg
    els = sg.elements(depth)
    failures = []
    checked = 0
    for p in els:
        if sg.is_unit(p):
            continue
        for r in els:
            pr = p * r
            target = backend.space_dim(pr, pr, ideal=K)
            if target == 0:
                continue
            checked += 1
            left = [u.rtensor(r) for u in backend.basis(p, p, ideal=K)]
            right = backend.basis(pr, pr, ideal=K)
            prods = [l.compose(v).flat() for l in left for v in right]
            if rank_of_span(prods, tol) < target:
                failures.append(((p, r), f"span deficient (target {target})"))
    return StructureReport("tensor-nondegenerate", not failures, checked, failures)


def check_essential(backend, K: ColorIdeal, depth: int):
    """K(p,p) essential in L(p,p): no nonzero block outside the ideal's colors."""
    sg = backend.sg
    failures = []
    checked = 0
    for p in sg.elements(depth):
        checked += 1
        shapes = backend.shape(p, p)
        bad = [
            c for c in range(backend.slot_count)
            if c not in K.colors and shapes[c][0] * shapes[c][1] > 0
        ]
        if bad:
            failures.append((p, f"colors {bad} annihilate the ideal"))
    return StructureReport("essential", not failures, checked, failures)


def check_factorization(backend, depth: int, tol=1e-8):
    """L(p,p) L(p,q) spans L(p,q) (finite-dimensional Cohen factorization)."""
    sg = backend.sg
    els = sg.elements(depth)
    failures = []
    checked = 0
    for p, q in itertools.product(els, repeat=2):
        target = backend.space_dim(p, q)
        if target == 0:
            continue
        checked += 1
        prods = [
            a.compose(b).flat()
            for a in backend.basis(p, p)
            for b in backend.basis(p, q)
        ]
        if rank_of_span(prods, tol) < target:
            failures.append(((p, q), "factorization span deficient"))
    return StructureReport("factorization", not failures, checked, failures)
