"""Group-indexed fiber bundles and their precategory dictionary.

Over a finite group every morphism space is determined by its grade gh^-1, so
the whole structure compresses to a family of fibers B_g with a graded product
and involution.  Both directions of the dictionary are implemented:

  * ``bundle_from_precategory``: B_g := L(g,e), product (b_g (x) 1_h) b_h,
    star b_g^* (x) 1_{g^-1};
  * ``precategory_from_bundle``: L(g,h) := B_{gh^-1} with identity
    right-tensoring maps.

The round trip is the identity on the nose; the opposite composite is
isomorphic to the original precategory via the maps (x)1_h.  Crossed products
appear as the special case L(g,h) = A with plain multiplication and
a (x) 1_r := alpha_r(a).

The regular representation acts by left convolution on the direct sum of the
fibers with the Hilbert-Schmidt inner product; for a finite group this is a
faithful picture of the (reduced = full) cross-sectional algebra.
"""

from __future__ import annotations

import itertools

import numpy as np

from .analysis import CheckReport, ConcreteRep
from .linalg import spectral_norm
from .precategory import _BackendBase
from .semigroups import FiniteGroup


class BlockAction:
    """Action of a finite group on a block algebra ⊕_c M_{d_c}.

    Each alpha_g permutes the slots and conjugates by a unitary per slot:
    alpha_g(a)[c] = U[g][c] @ a[perm[g][c]] @ U[g][c]^*.  Every automorphism
    of a finite-dimensional C*-algebra has this shape.
    """

    def __init__(self, group: FiniteGroup, dims, perms, unitaries):
        self.group = group
        self.dims = [int(d) for d in dims]
        self.perms = perms
        self.unitaries = {
            g: [np.ascontiguousarray(u, dtype=complex) for u in us]
            for g, us in unitaries.items()
        }
        for g in group.elements(1):
            if g not in perms or g not in self.unitaries:
                raise ValueError(f"action data missing for {g!r}")
            for c, src in enumerate(perms[g]):
                if self.dims[c] != self.dims[src]:
                    raise ValueError("slot permutation must preserve dimensions")
        self._check_homomorphism()

    def apply(self, g, blocks):
        perm = self.perms[g]
        us = self.unitaries[g]
        return [us[c] @ blocks[perm[c]] @ us[c].conj().T for c in range(len(self.dims))]

    def _basis_blocks(self):
        for c, d in enumerate(self.dims):
            for i in range(d):
                for j in range(d):
                    blocks = [np.zeros((dd, dd), dtype=complex) for dd in self.dims]
                    blocks[c][i, j] = 1.0
                    yield blocks

    def _check_homomorphism(self, tol=1e-12):
        g_all = self.group.elements(1)
        e = self.group.identity()
        for blocks in self._basis_blocks():
            for c, blk in enumerate(self.apply(e, blocks)):
                if spectral_norm(blk - blocks[c]) > tol:
                    raise ValueError("action is not a homomorphism: alpha_e != id")
            for g, h in itertools.product(g_all, repeat=2):
                lhs = self.apply(g, self.apply(h, blocks))
                rhs = self.apply(g * h, blocks)
                for x, y in zip(lhs, rhs):
                    if spectral_norm(x - y) > tol:
                        raise ValueError(
                            f"action is not a homomorphism at ({g!r}, {h!r})"
                        )


def trivial_action(group, dims) -> BlockAction:
    els = group.elements(1)
    perm = tuple(range(len(dims)))
    eyes = [np.eye(d, dtype=complex) for d in dims]
    return BlockAction(group, dims, {g: perm for g in els}, {g: eyes for g in els})


def swap_action(group, dim=1) -> BlockAction:
    """The nontrivial element of an order-2 group swaps two slots of size dim."""
    els = group.elements(1)
    if len(els) != 2:
        raise ValueError("swap action needs a group of order 2")
    e = group.identity()
    (u,) = [g for g in els if g != e]
    dims = (dim, dim)
    eyes = [np.eye(dim, dtype=complex)] * 2
    return BlockAction(group, dims, {e: (0, 1), u: (1, 0)}, {e: eyes, u: eyes})


def conjugation_action(group, unitaries_for) -> BlockAction:
    """Inner-type action: each g conjugates slotwise by given unitaries."""
    els = group.elements(1)
    dims = [u.shape[0] for u in unitaries_for[group.identity()]]
    perm = tuple(range(len(dims)))
    return BlockAction(group, dims, {g: perm for g in els}, unitaries_for)


class CrossedProductBackend(_BackendBase):
    """L(g,h) = A as blocks, plain composition, a (x) 1_r := alpha_r(a)."""

    kind = "crossed"

    def __init__(self, action: BlockAction):
        if not isinstance(action.group, FiniteGroup):
            raise ValueError("crossed products here need a finite group")
        # chained tensoring applies the automorphisms in reverse group order,
        # so the composition law forces them to commute pointwise
        if not action.group.is_abelian():
            for blocks in action._basis_blocks():
                for g, h in itertools.product(action.group.elements(1), repeat=2):
                    lhs = action.apply(g, action.apply(h, blocks))
                    rhs = action.apply(h, action.apply(g, blocks))
                    if any(spectral_norm(x - y) > 1e-12 for x, y in zip(lhs, rhs)):
                        raise ValueError(
                            "tensoring by automorphisms needs a commuting image "
                            f"(fails at ({g!r}, {h!r}))"
                        )
        self.action = action
        self.sg = action.group
        self.slot_count = len(action.dims)

    def shape(self, p, q):
        return [(d, d) for d in self.action.dims]

    def _compose(self, a, b):
        from .precategory import Arrow

        return Arrow(self, a.range, b.source, [x @ y for x, y in zip(a.blocks, b.blocks)])

    def _adjoint(self, a):
        from .precategory import Arrow

        return Arrow(self, a.source, a.range, [x.conj().T for x in a.blocks])

    def _rtensor(self, a, r):
        from .precategory import Arrow

        self.sg.check_same(r)
        return Arrow(
            self, a.range * r, a.source * r, self.action.apply(r, a.blocks)
        )


class BundleFiberFamily:
    """Fibers B_g with graded product and involution, closed over a backend."""

    def __init__(self, group: FiniteGroup, backend):
        self.group = group
        self.backend = backend
        self.elements = group.elements(1)

    def shape(self, g):
        return self.backend.shape(g, self.group.identity())

    def fiber_dim(self, g):
        return sum(r * c for r, c in self.shape(g))

    def mul(self, g, a_blocks, h, b_blocks):
        """(b_g (x) 1_h) b_h in B_{gh}."""
        e = self.group.identity()
        x = self.backend.arrow(g, e, a_blocks).rtensor(h)
        y = self.backend.arrow(h, e, b_blocks)
        return x.compose(y).blocks

    def star(self, g, a_blocks):
        """b_g^* (x) 1_{g^-1} in B_{g^-1}."""
        e = self.group.identity()
        a = self.backend.arrow(g, e, a_blocks)
        return a.adjoint().rtensor(self.group.inverse(g)).blocks

    def basis(self, g):
        e = self.group.identity()
        return [a.blocks for a in self.backend.basis(g, e)]

    def random_fiber(self, g, rng):
        e = self.group.identity()
        return self.backend.random_arrow(g, e, rng).blocks

    def zero_fiber(self, g):
        return [np.zeros(sh, dtype=complex) for sh in self.shape(g)]

    def fiber_norm(self, blocks):
        return max((spectral_norm(b) for b in blocks), default=0.0)


def bundle_from_precategory(backend) -> BundleFiberFamily:
    if not isinstance(backend.sg, FiniteGroup):
        raise ValueError("fiber bundles need a finite group instance")
    return BundleFiberFamily(backend.sg, backend)


class BundleBackend(_BackendBase):
    """L(g,h) := B_{gh^-1}; composition via the bundle product, identity
    right-tensoring (grades are invariant under right translation)."""

    kind = "bundle"

    def __init__(self, bundle: BundleFiberFamily):
        self.bundle = bundle
        self.sg = bundle.group
        self.slot_count = bundle.backend.slot_count

    def _grade(self, g, h):
        return g * self.sg.inverse(h)

    def shape(self, p, q):
        return self.bundle.shape(self._grade(p, q))

    def _compose(self, a, b):
        from .precategory import Arrow

        s = self._grade(a.range, a.source)
        t = self._grade(b.range, b.source)
        blocks = self.bundle.mul(s, a.blocks, t, b.blocks)
        return Arrow(self, a.range, b.source, blocks)

    def _adjoint(self, a):
        from .precategory import Arrow

        s = self._grade(a.range, a.source)
        return Arrow(self, a.source, a.range, self.bundle.star(s, a.blocks))

    def _rtensor(self, a, r):
        from .precategory import Arrow

        self.sg.check_same(r)
        return Arrow(self, a.range * r, a.source * r, [b.copy() for b in a.blocks])


def precategory_from_bundle(bundle: BundleFiberFamily) -> BundleBackend:
    return BundleBackend(bundle)


def semidirect_bundle(action: BlockAction) -> BundleFiberFamily:
    """The crossed-product bundle of the action (fibers all equal to A)."""
    return bundle_from_precategory(CrossedProductBackend(action))


def group_algebra_bundle(group: FiniteGroup) -> BundleFiberFamily:
    return semidirect_bundle(trivial_action(group, [1]))


def check_bundle_laws(bundle: BundleFiberFamily, samples=4, seed=0, tol=1e-10):
    """Associativity, involution laws, and the C*-identity on B_e."""
    import random

    rng = random.Random(seed)
    G = bundle.elements
    e = bundle.group.identity()
    inv = bundle.group.inverse
    failures = []
    for _ in range(samples):
        g, h, k = (rng.choice(G) for _ in range(3))
        a, b, c = (
            bundle.random_fiber(g, rng),
            bundle.random_fiber(h, rng),
            bundle.random_fiber(k, rng),
        )
        lhs = bundle.mul(g * h, bundle.mul(g, a, h, b), k, c)
        rhs = bundle.mul(g, a, h * k, bundle.mul(h, b, k, c))
        if bundle.fiber_norm([x - y for x, y in zip(lhs, rhs)]) > tol:
            failures.append(("associativity", g, h, k))
        dstar = bundle.star(inv(g), bundle.star(g, a))
        if bundle.fiber_norm([x - y for x, y in zip(dstar, a)]) > tol:
            failures.append(("star-involutive", g))
        lhs = bundle.star(g * h, bundle.mul(g, a, h, b))
        rhs = bundle.mul(inv(h), bundle.star(h, b), inv(g), bundle.star(g, a))
        if bundle.fiber_norm([x - y for x, y in zip(lhs, rhs)]) > tol:
            failures.append(("star-antimultiplicative", g, h))
        # B_e is an honest C*-algebra: tensoring by e is the identity, so the
        # fiber norm is the C*-norm for the e-graded product
        ae = bundle.random_fiber(e, rng)
        aa = bundle.mul(e, bundle.star(e, ae), e, ae)
        want = bundle.fiber_norm(ae) ** 2
        if abs(bundle.fiber_norm(aa) - want) > tol * max(1.0, want):
            failures.append(("cstar-identity", e))
    return CheckReport("bundle-laws", not failures, {"failures": failures})


# -- regular representation -----------------------------------------------------


def regular_representation(bundle: BundleFiberFamily) -> ConcreteRep:
    """Left convolution on H = ⊕_g B_g with Hilbert-Schmidt coordinates."""
    G = sorted(bundle.elements, key=bundle.group.sort_key)
    offsets = {}
    total = 0
    for g in G:
        offsets[g] = total
        total += bundle.fiber_dim(g)
    backend = precategory_from_bundle(bundle)

    def vec(blocks):
        return np.concatenate([np.ravel(b) for b in blocks])

    def phi(arrow):
        s = backend._grade(arrow.range, arrow.source)
        m = np.zeros((total, total), dtype=complex)
        for k in G:
            out = s * k
            col = offsets[k]
            for j, basis_blocks in enumerate(bundle.basis(k)):
                image = bundle.mul(s, arrow.blocks, k, basis_blocks)
                m[offsets[out] : offsets[out] + bundle.fiber_dim(out), col + j] = vec(image)
        return m

    return ConcreteRep(backend, total, phi, nica=True, label="regular")


def section_star(bundle: BundleFiberFamily, fam):
    out = {}
    for g, blocks in fam.items():
        out[bundle.group.inverse(g)] = bundle.star(g, blocks)
    return out


def section_conv(bundle: BundleFiberFamily, fam1, fam2):
    out = {}
    for (g, a), (h, b) in itertools.product(fam1.items(), fam2.items()):
        gh = g * h
        blocks = bundle.mul(g, a, h, b)
        if gh in out:
            out[gh] = [x + y for x, y in zip(out[gh], blocks)]
        else:
            out[gh] = blocks
    return out


def section_matrix(bundle: BundleFiberFamily, fam, rep: ConcreteRep = None):
    rep = rep if rep is not None else regular_representation(bundle)
    backend = rep.backend
    e = bundle.group.identity()
    total = np.zeros((rep.dim, rep.dim), dtype=complex)
    for g, blocks in fam.items():
        total += rep.phi(backend.arrow(g, e, blocks))
    return total


def section_norm(bundle: BundleFiberFamily, fam, rep: ConcreteRep = None) -> float:
    """Reduced (= full, by finiteness) norm of a finitely supported section."""
    return spectral_norm(section_matrix(bundle, fam, rep))


def regular_spectrum(bundle: BundleFiberFamily, fam, rep: ConcreteRep = None):
    return np.sort_complex(np.linalg.eigvals(section_matrix(bundle, fam, rep)))


def image_algebra_rank(bundle: BundleFiberFamily, rep: ConcreteRep = None, tol=1e-8):
    """Linear dimension of the image of ⊕_g B_g under the representation."""
    rep = rep if rep is not None else regular_representation(bundle)
    backend = rep.backend
    e = bundle.group.identity()
    cols = []
    for g in bundle.elements:
        for blocks in bundle.basis(g):
            cols.append(np.ravel(rep.phi(backend.arrow(g, e, blocks))))
    M = np.column_stack(cols)
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
