"""Finite relational structures, embeddings, and copies of tuples.

Everything downstream (amalgamation search, arrow decisions, LP witnesses,
flow windows) is built on the types here.  All values are immutable and
hashable; enumeration orders are deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache


class StructureError(ValueError):
    """Malformed structure, signature, or embedding data."""


@dataclass(frozen=True)
class Signature:
    """An ordered list of relation symbols with arities.

    Symbol order is part of identity: two signatures are equal only if
    they list the same symbols, with the same arities, in the same order.
    """

    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate symbol names in signature: {names}")
        for name, arity in self.symbols:
            if arity < 1:
                raise StructureError(f"symbol {name!r} has non-positive arity {arity}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def arity(self, name: str) -> int:
        for sym, arity in self.symbols:
            if sym == name:
                return arity
        raise StructureError(f"unknown symbol {name!r}")

    def index(self, name: str) -> int:
        for i, (sym, _) in enumerate(self.symbols):
            if sym == name:
                return i
        raise StructureError(f"unknown symbol {name!r}")

    def is_subsignature_of(self, other: "Signature") -> bool:
        """True if every symbol here occurs in `other` with the same arity."""
        table = dict(other.symbols)
        return all(table.get(name) == arity for name, arity in self.symbols)


def signature(*symbols: tuple[str, int]) -> Signature:
    return Signature(tuple(symbols))


EMPTY_SIGNATURE = signature()


@dataclass(frozen=True)
class FinStructure:
    """A finite relational structure on universe {0, ..., size-1}.

    Tables are stored per symbol (aligned with the signature order) as
    sorted, duplicate-free tuples of index tuples.
    """

    sig: Signature
    size: int
    tables: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        if self.size < 0:
            raise StructureError("negative universe size")
        if len(self.tables) != len(self.sig.symbols):
            raise StructureError("table count does not match signature")
        for (name, arity), table in zip(self.sig.symbols, self.tables):
            if list(table) != sorted(set(table)):
                raise StructureError(f"table for {name!r} not sorted/duplicate-free")
            for t in table:
                if len(t) != arity:
                    raise StructureError(f"tuple {t} has wrong arity for {name!r}")
                if any(not (0 <= x < self.size) for x in t):
                    raise StructureError(f"tuple {t} out of range for size {self.size}")

    @property
    def points(self) -> range:
        return range(self.size)

    def table(self, name: str) -> tuple[tuple[int, ...], ...]:
        return self.tables[self.sig.index(name)]

    def relabel(self, perm: tuple[int, ...]) -> "FinStructure":
        """Image of this structure under the permutation old -> new."""
        if sorted(perm) != list(self.points):
            raise StructureError(f"{perm} is not a permutation of {self.size} points")
        tables = tuple(
            tuple(sorted(tuple(perm[x] for x in t) for t in table))
            for table in self.tables
        )
        return FinStructure(self.sig, self.size, tables)


def structure(sig: Signature, size: int, tables: dict[str, list[tuple[int, ...]]] | None = None) -> FinStructure:
    """Build a structure from a symbol->tuples dict, normalizing tables."""
    tables = dict(tables or {})
    unknown = set(tables) - set(sig.names)
    if unknown:
        raise StructureError(f"tables given for unknown symbols: {sorted(unknown)}")
    packed = tuple(
        tuple(sorted(set(map(tuple, tables.get(name, ())))))
        for name, _ in sig.symbols
    )
    return FinStructure(sig, size, packed)


@lru_cache(maxsize=None)
def table_sets(s: FinStructure) -> tuple[frozenset[tuple[int, ...]], ...]:
    """Per-symbol tuple sets, cached for membership tests in hot loops."""
    return tuple(frozenset(table) for table in s.tables)


@lru_cache(maxsize=None)
def _tuples_through_point(s: FinStructure) -> tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]:
    """For each point, the (symbol index, tuple) pairs whose tuple mentions it."""
    through: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in s.points]
    for si, table in enumerate(s.tables):
        for t in table:
            for p in set(t):
                through[p].append((si, t))
    return tuple(tuple(lst) for lst in through)


@dataclass(frozen=True)
class Embedding:
    """An injective map between same-signature structures that preserves
    and reflects every relation (the embedding condition for relational
    structures)."""

    src: FinStructure
    dst: FinStructure
    map: tuple[int, ...]

    def __post_init__(self):
        if self.src.sig != self.dst.sig:
            raise StructureError("embedding across different signatures")
        if len(self.map) != self.src.size:
            raise StructureError("map length does not match source size")
        if any(not (0 <= x < self.dst.size) for x in self.map):
            raise StructureError("map value out of range")
        if len(set(self.map)) != len(self.map):
            raise StructureError("map is not injective")
        image = set(self.map)
        dst_sets = table_sets(self.dst)
        src_sets = table_sets(self.src)
        for si in range(len(self.src.sig.symbols)):
            for t in self.src.tables[si]:
                if tuple(self.map[x] for x in t) not in dst_sets[si]:
                    raise StructureError(f"relation tuple {t} not preserved")
            inv = {b: a for a, b in enumerate(self.map)}
            for u in self.dst.tables[si]:
                if all(x in image for x in u):
                    if tuple(inv[x] for x in u) not in src_sets[si]:
                        raise StructureError(f"relation tuple {u} not reflected")

    def __call__(self, point: int) -> int:
        return self.map[point]

    def apply_tuple(self, t: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(self.map[x] for x in t)


def identity_embedding(s: FinStructure) -> Embedding:
    return Embedding(s, s, tuple(s.points))


def compose(f: Embedding, g: Embedding) -> Embedding:
    """The embedding f o g (apply g first)."""
    if g.dst != f.src:
        raise StructureError("compose: destination of g is not source of f")
    return Embedding(g.src, f.dst, tuple(f.map[x] for x in g.map))


def _extends(a: FinStructure, b: FinStructure, partial: list[int], point: int, image: int) -> bool:
    """Can `point -> image` extend the partial map (a prefix assignment)
    without breaking preservation or reflection?"""
    a_sets = table_sets(a)
    b_sets = table_sets(b)
    assigned = point + 1  # points 0..point now have images
    mapped = partial + [image]
    image_set = set(mapped)
    inv = {v: k for k, v in enumerate(mapped)}
    for si, t in _tuples_through_point(a)[point]:
        if all(x < assigned for x in t):
            if tuple(mapped[x] for x in t) not in b_sets[si]:
                return False
    for si, u in _tuples_through_point(b)[image]:
        if all(x in image_set for x in u):
            if tuple(inv[x] for x in u) not in a_sets[si]:
                return False
    return True


def enumerate_embeddings(a: FinStructure, b: FinStructure) -> list[Embedding]:
    """All embeddings of a into b, each exactly once, in lexicographic
    order of their map arrays."""
    if a.sig != b.sig:
        raise StructureError("enumerate_embeddings: signature mismatch")
    out: list[Embedding] = []

    def rec(partial: list[int], used: set[int]):
        point = len(partial)
        if point == a.size:
            out.append(Embedding(a, b, tuple(partial)))
            return
        for image in b.points:
            if image in used:
                continue
            if _extends(a, b, partial, point, image):
                partial.append(image)
                used.add(image)
                rec(partial, used)
                partial.pop()
                used.remove(image)

    rec([], set())
    return out


@lru_cache(maxsize=None)
def emb_list(a: FinStructure, b: FinStructure) -> tuple[Embedding, ...]:
    """Cached tuple of enumerate_embeddings(a, b); the canonical embedding
    order used for coloring domains throughout."""
    return tuple(enumerate_embeddings(a, b))


def automorphisms(s: FinStructure) -> list[Embedding]:
    """Every self-embedding of a finite structure is bijective, so this is
    exactly the automorphism group."""
    return enumerate_embeddings(s, s)


def reduct(s: FinStructure, sig0: Signature) -> FinStructure:
    """Same universe, tables restricted to the subsignature sig0."""
    if not sig0.is_subsignature_of(s.sig):
        raise StructureError("reduct: not a subsignature")
    tables = tuple(s.tables[s.sig.index(name)] for name, _ in sig0.symbols)
    return FinStructure(sig0, s.size, tables)


def induced_substructure(b: FinStructure, points) -> tuple[FinStructure, Embedding]:
    """The induced structure on a subset of points (relabeled to an initial
    segment in increasing order) plus its inclusion embedding."""
    pts = sorted(set(points))
    for p in pts:
        if not (0 <= p < b.size):
            raise StructureError(f"point {p} out of range")
    index = {p: i for i, p in enumerate(pts)}
    keep = set(pts)
    tables = tuple(
        tuple(sorted(tuple(index[x] for x in t) for t in table if all(x in keep for x in t)))
        for table in b.tables
    )
    sub = FinStructure(b.sig, len(pts), tables)
    return sub, Embedding(sub, b, tuple(pts))


@dataclass(frozen=True)
class TupleCopy:
    """A tuple in some target structure with the same equality pattern and
    quantifier-free type as a reference tuple."""

    base: tuple[int, ...]
    image: tuple[int, ...]

    def __post_init__(self):
        if len(self.base) != len(self.image):
            raise StructureError("base and image lengths differ")
        for i in range(len(self.base)):
            for j in range(i + 1, len(self.base)):
                if (self.base[i] == self.base[j]) != (self.image[i] == self.image[j]):
                    raise StructureError("equality patterns of base and image differ")


def copies_of_tuple(a: FinStructure, abar: tuple[int, ...], b: FinStructure) -> list[TupleCopy]:
    """All tuples in b with the same qf-type and equality pattern as abar
    (a tuple of points of a, repetitions allowed), in deterministic order.

    A zero-length tuple has exactly one copy in any structure.  When abar
    enumerates a injectively, the list is in bijection with the embeddings
    of the induced structure on abar's coordinates into b.
    """
    if a.sig != b.sig:
        raise StructureError("copies_of_tuple: signature mismatch")
    for x in abar:
        if not (0 <= x < a.size):
            raise StructureError(f"tuple point {x} out of range")
    support, incl = induced_substructure(a, set(abar))
    pos = {p: i for i, p in enumerate(incl.map)}
    out = []
    for e in enumerate_embeddings(support, b):
        image = tuple(e.map[pos[x]] for x in abar)
        out.append(TupleCopy(tuple(abar), image))
    return out


def subsets_of(items) -> list[tuple]:
    """All sub-tuples of a sequence, shortest first, lexicographic within length."""
    items = list(items)
    out = []
    for r in range(len(items) + 1):
        out.extend(itertools.combinations(items, r))
    return out


def one_point_extensions(s: FinStructure, sig: Signature) -> list[FinStructure]:
    """Every structure on one more point whose restriction to the old
    points is s: all assignments of tuples through the new point."""
    if sig != s.sig:
        raise StructureError("extension signature must match")
    n = s.size + 1
    new = n - 1
    per_symbol = []
    for (_, arity), table in zip(sig.symbols, s.tables):
        fresh = [t for t in itertools.product(range(n), repeat=arity) if new in t]
        per_symbol.append([tuple(sorted(table + picked)) for picked in subsets_of(fresh)])
    return [FinStructure(sig, n, combo) for combo in itertools.product(*per_symbol)]


def is_isomorphic_bruteforce(a: FinStructure, b: FinStructure) -> bool:
    """Isomorphism by exhaustive search over all bijections.  Test oracle;
    use canonical forms for real work."""
    if a.sig != b.sig or a.size != b.size:
        return False
    for perm in itertools.permutations(range(b.size)):
        if a.relabel(perm).tables == b.tables:
            return True
    return False
