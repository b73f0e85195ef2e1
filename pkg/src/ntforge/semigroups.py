"""Normal-form arithmetic for right LCM semigroups.

A right LCM semigroup here is a left-cancellative monoid in which the
intersection of two principal right ideals ``pP`` and ``qP`` is either empty
or again principal, ``rP``.  The generator ``r`` of the intersection -- a
right least common multiple of ``p`` and ``q`` -- is determined up to right
multiplication by an invertible element, and every instance in this module
returns a canonical representative (the normal form that is least in the
instance's total sort order).

Shipped instances:

* :class:`DirectSumN` -- vectors in N^k under addition.
* :class:`FreeProduct` -- reduced alternating words over factors with
  trivial unit groups (free monoids arise as free products of copies of N).
* :class:`UnitExtension` -- the direct product of a trivial-unit instance
  with a finite abelian group, giving a nontrivial unit group.
* :class:`AbsorptionMonoid` -- pairs (k, m) with the absorbing rule
  ``(k,m)(l,n) = (k+l, n)`` for ``l > 0``; left cancellative but not right
  cancellative, and any two elements admit a right LCM.
* :class:`FiniteGroup` -- multiplication-table groups, where every element
  is a unit and every pair has ideal intersection equal to the whole group.

Elements are immutable and hashable; equality is equality of normal forms.
"""

from __future__ import annotations

import itertools
import re


class Element:
    """An element of a semigroup instance, stored in canonical normal form."""

    __slots__ = ("sg", "data")

    def __init__(self, sg, data):
        self.sg = sg
        self.data = data

    def __mul__(self, other):
        return self.sg.mul(self, other)

    def __eq__(self, other):
        return (
            isinstance(other, Element)
            and self.sg.tag == other.sg.tag
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.sg.tag, self.data))

    def __repr__(self):
        return self.sg.format(self)

    @property
    def length(self):
        return self.sg.length(self)


class MismatchError(ValueError):
    """Raised when elements of different semigroup instances are mixed."""


class RightLcmSemigroup:
    """Base class; concrete instances implement the abstract hooks below."""

    tag = "?"
    #: right cancellativity (left cancellativity always holds)
    right_cancellative = True

    # -- abstract hooks -----------------------------------------------------

    def identity(self) -> Element:
        raise NotImplementedError

    def mul(self, p: Element, q: Element) -> Element:
        raise NotImplementedError

    def left_divide(self, p: Element, w: Element):
        """The unique r with p*r == w, or None.  Uniqueness is left cancellation."""
        raise NotImplementedError

    def units(self):
        raise NotImplementedError

    def generators(self):
        raise NotImplementedError

    def length(self, p: Element) -> int:
        raise NotImplementedError

    def elements(self, depth: int):
        """All elements of word length <= depth, sorted by sort_key."""
        raise NotImplementedError

    def sort_key(self, p: Element):
        raise NotImplementedError

    def parse(self, text: str) -> Element:
        raise NotImplementedError

    def format(self, p: Element) -> str:
        raise NotImplementedError

    def gen_exponents(self, p: Element):
        """Abelianized generator multiplicities of p, aligned with generators()."""
        raise NotImplementedError

    def _raw_lcm(self, p: Element, q: Element):
        """Some generator of pP & qP, or None; canonicalized by right_lcm."""
        raise NotImplementedError

    # -- shared layer -------------------------------------------------------

    def check_same(self, *els):
        for el in els:
            if el.sg.tag != self.tag:
                raise MismatchError(f"element {el!r} is not from instance {self.tag}")

    def el(self, data) -> Element:
        return Element(self, data)

    def is_unit(self, p: Element) -> bool:
        return any(p == x for x in self.units())

    def right_lcm(self, p: Element, q: Element):
        """Canonical generator of pP & qP, or None when the intersection is empty.

        Canonical means least sort_key within the unit orbit {r*x : x in P*}.
        """
        self.check_same(p, q)
        r = self._raw_lcm(p, q)
        if r is None:
            return None
        return min((r * x for x in self.units()), key=self.sort_key)


class DirectSumN(RightLcmSemigroup):
    """N^k under componentwise addition; right LCM is the componentwise max."""

    def __init__(self, rank: int):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        self.rank = rank
        self.tag = f"N^{rank}"

    def identity(self):
        return self.el((0,) * self.rank)

    def mul(self, p, q):
        self.check_same(p, q)
        return self.el(tuple(a + b for a, b in zip(p.data, q.data)))

    def left_divide(self, p, w):
        self.check_same(p, w)
        diff = tuple(b - a for a, b in zip(p.data, w.data))
        return self.el(diff) if all(d >= 0 for d in diff) else None

    def _raw_lcm(self, p, q):
        return self.el(tuple(max(a, b) for a, b in zip(p.data, q.data)))

    def units(self):
        return (self.identity(),)

    def generators(self):
        out = []
        for i in range(self.rank):
            v = [0] * self.rank
            v[i] = 1
            out.append(self.el(tuple(v)))
        return out

    def length(self, p):
        return sum(p.data)

    def elements(self, depth):
        vs = [
            v
            for v in itertools.product(range(depth + 1), repeat=self.rank)
            if sum(v) <= depth
        ]
        return sorted((self.el(v) for v in vs), key=self.sort_key)

    def sort_key(self, p):
        return (sum(p.data), p.data)

    def gen_exponents(self, p):
        return p.data

    def parse(self, text):
        text = text.strip()
        if text == "e":
            return self.identity()
        if self.rank == 1 and not text.startswith("("):
            return self.el((int(text),))
        body = text.strip("()")
        parts = tuple(int(t) for t in body.split(","))
        if len(parts) != self.rank:
            raise ValueError(f"expected {self.rank} components in {text!r}")
        return self.el(parts)

    def format(self, p):
        if self.rank == 1:
            return str(p.data[0])
        return "(" + ",".join(str(c) for c in p.data) + ")"


class FiniteGroup(RightLcmSemigroup):
    """A group given by a multiplication table; every element is a unit."""

    def __init__(self, name, names, table):
        # table: dict (a, b) -> c on element names
        self.name = name
        self.names = tuple(names)
        self.table = dict(table)
        self.tag = f"group({name})"
        ident = None
        for x in self.names:
            if all(
                self.table[(x, y)] == y and self.table[(y, x)] == y
                for y in self.names
            ):
                ident = x
                break
        if ident is None:
            raise ValueError("multiplication table has no identity")
        self._ident = ident
        self._inv = {}
        for x in self.names:
            for y in self.names:
                if self.table[(x, y)] == ident:
                    self._inv[x] = y
        if set(self._inv) != set(self.names):
            raise ValueError("multiplication table is not a group")

    def identity(self):
        return self.el(self._ident)

    def mul(self, p, q):
        self.check_same(p, q)
        return self.el(self.table[(p.data, q.data)])

    def inverse(self, p):
        return self.el(self._inv[p.data])

    def left_divide(self, p, w):
        self.check_same(p, w)
        return self.inverse(p) * w

    def _raw_lcm(self, p, q):
        # pP & qP is the whole group; any element generates it.
        return self.identity()

    def units(self):
        return tuple(self.el(n) for n in self.names)

    def generators(self):
        return []

    def length(self, p):
        return 0

    def elements(self, depth):
        return sorted(self.units(), key=self.sort_key)

    def sort_key(self, p):
        # identity first, then by name; keeps canonical LCM == identity
        return (0 if p.data == self._ident else 1, p.data)

    def gen_exponents(self, p):
        return ()

    def parse(self, text):
        text = text.strip()
        if text == "e" and self._ident != "e" and text not in self.names:
            return self.identity()
        if text not in self.names:
            raise ValueError(f"unknown element {text!r} of {self.name}")
        return self.el(text)

    def format(self, p):
        return p.data

    def is_abelian(self):
        return all(
            self.table[(x, y)] == self.table[(y, x)]
            for x in self.names
            for y in self.names
        )


def cyclic_group(n: int) -> FiniteGroup:
    names = [str(i) for i in range(n)]
    table = {(str(a), str(b)): str((a + b) % n) for a in range(n) for b in range(n)}
    return FiniteGroup(f"Z{n}", names, table)


def klein_group() -> FiniteGroup:
    # Z/2 x Z/2 with names e,a,b,c
    names = ["e", "a", "b", "c"]
    idx = {n: i for i, n in enumerate(names)}
    bits = {0: (0, 0), 1: (1, 0), 2: (0, 1), 3: (1, 1)}
    rev = {v: k for k, v in bits.items()}
    table = {}
    for x in names:
        for y in names:
            bx, by = bits[idx[x]], bits[idx[y]]
            table[(x, y)] = names[rev[((bx[0] + by[0]) % 2, (bx[1] + by[1]) % 2)]]
    return FiniteGroup("Z2xZ2", names, table)


def symmetric_group_3() -> FiniteGroup:
    perms = list(itertools.permutations((0, 1, 2)))
    names = {p: "e" if p == (0, 1, 2) else "s" + "".join(map(str, p)) for p in perms}
    table = {}
    for a in perms:
        for b in perms:
            c = tuple(a[b[i]] for i in range(3))
            table[(names[a], names[b])] = names[c]
    return FiniteGroup("S3", list(names.values()), table)


BUILTIN_GROUPS = {
    "Z1": lambda: cyclic_group(1),
    "Z2": lambda: cyclic_group(2),
    "Z3": lambda: cyclic_group(3),
    "Z4": lambda: cyclic_group(4),
    "Z5": lambda: cyclic_group(5),
    "Z6": lambda: cyclic_group(6),
    "Z2xZ2": klein_group,
    "S3": symmetric_group_3,
}


class FreeProduct(RightLcmSemigroup):
    """Free product of right LCM semigroups with trivial unit groups.

    Elements are reduced alternating words: tuples of blocks (i, x) where x is
    a non-identity normal form from factor i and adjacent blocks come from
    distinct factors.  A free monoid is the free product of copies of N; when
    every factor is a copy of N the instance parses and prints letter words
    like "ab" and "a^2b".
    """

    def __init__(self, factors, names=None):
        self.factors = list(factors)
        for f in self.factors:
            if len(f.units()) != 1:
                raise ValueError("free product factors must have trivial units")
        self.names = list(names) if names else [f"p{i}" for i in range(len(factors))]
        self._letters = all(
            isinstance(f, DirectSumN) and f.rank == 1 for f in self.factors
        ) and all(len(n) == 1 for n in self.names)
        self.tag = "free(" + ",".join(
            f"{n}:{f.tag}" for n, f in zip(self.names, self.factors)
        ) + ")"

    def identity(self):
        return self.el(())

    def _block_el(self, block):
        i, x = block
        return Element(self.factors[i], x)

    def mul(self, p, q):
        self.check_same(p, q)
        a, b = p.data, q.data
        if not a:
            return self.el(b)
        if not b:
            return self.el(a)
        (i, x), (j, y) = a[-1], b[0]
        if i != j:
            return self.el(a + b)
        f = self.factors[i]
        merged = f.mul(Element(f, x), Element(f, y))
        return self.el(a[:-1] + ((i, merged.data),) + b[1:])

    def left_divide(self, p, w):
        self.check_same(p, w)
        a, b = p.data, w.data
        n, m = len(a), len(b)
        if n == 0:
            return self.el(b)
        if n > m or a[: n - 1] != b[: n - 1]:
            return None
        (i, x), (j, y) = a[n - 1], b[n - 1]
        if i != j:
            return None
        f = self.factors[i]
        d = f.left_divide(Element(f, x), Element(f, y))
        if d is None:
            return None
        if d == f.identity():
            return self.el(b[n:])
        return self.el(((i, d.data),) + b[n:])

    def _raw_lcm(self, p, q):
        a, b = p.data, q.data
        if len(a) > len(b):
            a, b = b, a
        n = len(a)
        if n == 0:
            return self.el(b)
        if a[: n - 1] != b[: n - 1]:
            return None
        (i, x), (j, y) = a[n - 1], b[n - 1]
        if i != j:
            return None
        f = self.factors[i]
        if len(b) > n:
            # common multiples exist iff the last block of the shorter word
            # divides the matching block of the longer one, and then the
            # longer word generates the intersection
            if f.left_divide(Element(f, x), Element(f, y)) is None:
                return None
            return self.el(b)
        r = f.right_lcm(Element(f, x), Element(f, y))
        if r is None:
            return None
        return self.el(a[: n - 1] + ((i, r.data),))

    def units(self):
        return (self.identity(),)

    def generators(self):
        out = []
        for i, f in enumerate(self.factors):
            for g in f.generators():
                out.append(self.el(((i, g.data),)))
        return out

    def length(self, p):
        return sum(
            self.factors[i].length(Element(self.factors[i], x)) for i, x in p.data
        )

    def elements(self, depth):
        factor_chunks = [
            [
                el
                for el in f.elements(depth)
                if el != f.identity()
            ]
            for f in self.factors
        ]

        out = []

        def grow(word, used, last):
            out.append(self.el(word))
            for i, chunk in enumerate(factor_chunks):
                if i == last:
                    continue
                for x in chunk:
                    l = self.factors[i].length(x)
                    if used + l <= depth:
                        grow(word + ((i, x.data),), used + l, i)

        grow((), 0, -1)
        return sorted(out, key=self.sort_key)

    def sort_key(self, p):
        key = tuple(
            (i, self.factors[i].sort_key(Element(self.factors[i], x)))
            for i, x in p.data
        )
        return (self.length(p), key)

    def gen_exponents(self, p):
        offsets = []
        total = 0
        for f in self.factors:
            offsets.append(total)
            total += len(f.generators())
        exps = [0] * total
        for i, x in p.data:
            fexp = self.factors[i].gen_exponents(Element(self.factors[i], x))
            for k, v in enumerate(fexp):
                exps[offsets[i] + k] += v
        return tuple(exps)

    _token = re.compile(r"\s*([a-zA-Z])(?:\^(\d+))?")

    def parse(self, text):
        text = text.strip()
        if text in ("", "e"):
            return self.identity()
        if not self._letters:
            raise ValueError(
                "string parsing is only available for free monoids over letters"
            )
        pos = 0
        word = self.identity()
        while pos < len(text):
            m = self._token.match(text, pos)
            if not m:
                raise ValueError(f"cannot parse word {text!r} at position {pos}")
            letter, exp = m.group(1), int(m.group(2) or 1)
            if letter not in self.names:
                raise ValueError(f"unknown letter {letter!r} in {text!r}")
            i = self.names.index(letter)
            word = word * self.el(((i, (exp,)),))
            pos = m.end()
        return word

    def format(self, p):
        if not p.data:
            return "e"
        if self._letters:
            parts = []
            for i, x in p.data:
                exp = x[0]
                parts.append(self.names[i] if exp == 1 else f"{self.names[i]}^{exp}")
            return "".join(parts)
        return " ".join(
            f"{self.names[i]}:{self.factors[i].format(Element(self.factors[i], x))}"
            for i, x in p.data
        )


def free_monoid(letters) -> FreeProduct:
    letters = list(letters)
    return FreeProduct([DirectSumN(1) for _ in letters], names=letters)


class UnitExtension(RightLcmSemigroup):
    """Direct product of a trivial-unit instance with a finite abelian group.

    The unit group is {e} x U, so right LCMs are only determined up to the
    U-component; the canonical representative carries the least unit.
    """

    def __init__(self, base, unit_group: FiniteGroup):
        if len(base.units()) != 1:
            raise ValueError("base of a unit extension must have trivial units")
        if not unit_group.is_abelian():
            raise ValueError("unit group must be abelian")
        self.base = base
        self.u = unit_group
        self.tag = f"ext({base.tag};{unit_group.tag})"

    def identity(self):
        return self.el((self.base.identity().data, self.u.identity().data))

    def _split(self, p):
        b, u = p.data
        return Element(self.base, b), Element(self.u, u)

    def mul(self, p, q):
        self.check_same(p, q)
        pb, pu = self._split(p)
        qb, qu = self._split(q)
        return self.el(((pb * qb).data, (pu * qu).data))

    def left_divide(self, p, w):
        self.check_same(p, w)
        pb, pu = self._split(p)
        wb, wu = self._split(w)
        d = self.base.left_divide(pb, wb)
        if d is None:
            return None
        return self.el((d.data, self.u.left_divide(pu, wu).data))

    def _raw_lcm(self, p, q):
        pb, _ = self._split(p)
        qb, _ = self._split(q)
        r = self.base.right_lcm(pb, qb)
        if r is None:
            return None
        return self.el((r.data, self.u.identity().data))

    def units(self):
        e = self.base.identity().data
        return tuple(self.el((e, x.data)) for x in self.u.units())

    def generators(self):
        eu = self.u.identity().data
        return [self.el((g.data, eu)) for g in self.base.generators()]

    def length(self, p):
        b, _ = self._split(p)
        return self.base.length(b)

    def elements(self, depth):
        out = [
            self.el((b.data, x.data))
            for b in self.base.elements(depth)
            for x in self.u.units()
        ]
        return sorted(out, key=self.sort_key)

    def sort_key(self, p):
        b, x = self._split(p)
        return (self.base.sort_key(b), self.u.sort_key(x))

    def gen_exponents(self, p):
        b, _ = self._split(p)
        return self.base.gen_exponents(b)

    def parse(self, text):
        text = text.strip()
        if text == "e":
            return self.identity()
        body = text.strip("()")
        base_part, unit_part = body.rsplit(",", 1)
        return self.el(
            (self.base.parse(base_part).data, self.u.parse(unit_part).data)
        )

    def format(self, p):
        b, x = self._split(p)
        return f"({self.base.format(b)},{self.u.format(x)})"


class AbsorptionMonoid(RightLcmSemigroup):
    """Pairs (k, m) of naturals with (k,m)(l,n) = (k+l, n) if l > 0 else (k, m+n).

    The second generator is absorbed by the first: (0,1)(1,0) = (1,0) =
    (0,2)(1,0), so the monoid is not right cancellative, while left
    cancellation and the existence of right LCMs for every pair both hold.
    """

    right_cancellative = False
    tag = "absorb"

    def identity(self):
        return self.el((0, 0))

    def mul(self, p, q):
        self.check_same(p, q)
        k, m = p.data
        l, n = q.data
        return self.el((k + l, n) if l > 0 else (k, m + n))

    def left_divide(self, p, w):
        self.check_same(p, w)
        k, m = p.data
        kk, mm = w.data
        if kk > k:
            return self.el((kk - k, mm))
        if kk == k and mm >= m:
            return self.el((0, mm - m))
        return None

    def _raw_lcm(self, p, q):
        # pP = {(K, N) : K > k} | {(k, M) : M >= m}
        (k, m), (kk, mm) = p.data, q.data
        if k == kk:
            return self.el((k, max(m, mm)))
        return self.el((kk, mm)) if k < kk else self.el((k, m))

    def units(self):
        return (self.identity(),)

    def generators(self):
        return [self.el((1, 0)), self.el((0, 1))]

    def length(self, p):
        return p.data[0] + p.data[1]

    def elements(self, depth):
        out = [
            self.el((k, m))
            for k in range(depth + 1)
            for m in range(depth + 1 - k)
        ]
        return sorted(out, key=self.sort_key)

    def sort_key(self, p):
        return (self.length(p), p.data)

    def gen_exponents(self, p):
        return p.data

    def parse(self, text):
        text = text.strip()
        if text == "e":
            return self.identity()
        k, m = text.strip("()").split(",")
        return self.el((int(k), int(m)))

    def format(self, p):
        return f"({p.data[0]},{p.data[1]})"


# -- controlled maps --------------------------------------------------------


class SemigroupHom:
    """A map between instances, checked against the controlled-map axioms."""

    def __init__(self, domain, codomain, fn, name="theta"):
        self.domain = domain
        self.codomain = codomain
        self.fn = fn
        self.name = name

    def __call__(self, p):
        return self.fn(p)


def controlled_abelianization(src: FreeProduct):
    """Letter-counting map from a free monoid onto N^k.

    Identity on each factor; transports right LCMs and is injective on pairs
    that admit one.
    """
    if not all(isinstance(f, DirectSumN) and f.rank == 1 for f in src.factors):
        raise ValueError("abelianization is implemented for free monoids")
    dst = DirectSumN(len(src.factors))

    def fn(p):
        v = [0] * len(src.factors)
        for i, x in p.data:
            v[i] += x[0]
        return dst.el(tuple(v))

    return SemigroupHom(src, dst, fn, name="abelianization")


class ControlledMapReport:
    def __init__(self, ok, checked, failures):
        self.ok = ok
        self.checked = checked
        self.failures = failures

    def __repr__(self):
        verdict = "pass" if self.ok else "fail"
        return f"<controlled-map {verdict}: {self.checked} pairs, {len(self.failures)} failures>"


def check_controlled_map(theta: SemigroupHom, depth: int) -> ControlledMapReport:
    """Verify the controlled-map axioms on all pairs up to word length depth.

    For each pair (s, t) admitting a right LCM r the image pair must satisfy
    theta(s)P' & theta(t)P' = theta(r)P', and theta must be injective on such
    pairs; unit groups must map onto unit groups; the homomorphism law is
    checked on all sampled pairs.
    """
    dom, cod = theta.domain, theta.codomain
    failures = []
    els = dom.elements(depth)
    if theta(dom.identity()) != cod.identity():
        failures.append(("identity", "theta(e) != e"))
    dom_unit_images = {theta(x) for x in dom.units()}
    if dom_unit_images != set(cod.units()):
        failures.append(("units", "theta(P*) != P'*"))
    checked = 0
    for s, t in itertools.product(els, repeat=2):
        checked += 1
        if theta(s * t) != theta(s) * theta(t):
            failures.append((f"hom s={s!r} t={t!r}", "theta(st) != theta(s)theta(t)"))
            continue
        r = dom.right_lcm(s, t)
        if r is None:
            continue
        if theta(s) == theta(t) and s != t:
            failures.append((f"s={s!r} t={t!r}", "equal images on a comparable pair"))
        rr = cod.right_lcm(theta(s), theta(t))
        if rr is None:
            failures.append((f"s={s!r} t={t!r}", "image pair has no LCM"))
            continue
        # theta(r) must generate the same ideal as rr, i.e. differ by a unit
        if not any(rr * x == theta(r) for x in cod.units()):
            failures.append(
                (f"s={s!r} t={t!r}", f"LCM not transported: {theta(r)!r} vs {rr!r}")
            )
    return ControlledMapReport(not failures, checked, failures)


# -- instance registry (used by the CLI and scenario files) ------------------


def make_semigroup(spec: dict) -> RightLcmSemigroup:
    """Build an instance from a scenario description (see the cli module)."""
    kind = spec["kind"]
    if kind == "direct_sum":
        return DirectSumN(int(spec.get("rank", 1)))
    if kind == "free_monoid":
        return free_monoid(spec["letters"])
    if kind == "free_product":
        factors = [make_semigroup(s) for s in spec["factors"]]
        return FreeProduct(factors, names=spec.get("names"))
    if kind == "absorption":
        return AbsorptionMonoid()
    if kind == "unit_extension":
        base = make_semigroup(spec["base"])
        return UnitExtension(base, make_group(spec["units"]))
    if kind == "finite_group":
        return make_group(spec)
    raise ValueError(f"unknown semigroup kind {kind!r}")


def make_group(spec) -> FiniteGroup:
    if isinstance(spec, str):
        name = spec
        if name not in BUILTIN_GROUPS:
            raise ValueError(f"unknown group {name!r}; builtins: {sorted(BUILTIN_GROUPS)}")
        return BUILTIN_GROUPS[name]()
    if spec.get("name") in BUILTIN_GROUPS and "table" not in spec:
        return BUILTIN_GROUPS[spec["name"]]()
    names = spec["elements"]
    table = {
        (a, b): spec["table"][i][j]
        for i, a in enumerate(names)
        for j, b in enumerate(names)
    }
    return FiniteGroup(spec.get("name", "G"), names, table)


INSTANCE_KINDS = {
    "direct_sum": "N^k vectors under addition (rank parameter)",
    "free_monoid": "free monoid on letters (free product of copies of N)",
    "free_product": "free product of trivial-unit instances",
    "absorption": "pairs (k,m), (k,m)(l,n)=(k+l,n) for l>0; not right cancellative",
    "unit_extension": "base instance times a finite abelian unit group",
    "finite_group": "multiplication-table group; builtins " + ", ".join(sorted(BUILTIN_GROUPS)),
}
