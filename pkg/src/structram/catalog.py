"""Built-in class catalog and common small structures.

Named built-ins: `set`, `linorder`, `graph`, `ordered_graph`, `digraph`,
`tournament`, plus fixture classes used by failing-path tests
(`even_graph`, where heredity fails, and `ap_fail`, a three-member
digraph catalog with a span no member completes).

User classes are given as (signature, forbidden substructure list):
A is a member iff no listed F embeds into A.  Such classes are hereditary
by construction, so sizes are generated by one-point extensions.
"""

from __future__ import annotations

import itertools

from .canon import canonical_form
from .fraisse import ClassSpec
from .structures import (
    EMPTY_SIGNATURE,
    FinStructure,
    Signature,
    enumerate_embeddings,
    one_point_extensions,
    signature,
    structure,
    subsets_of,
)

GRAPH_SIG = signature(("edge", 2))
ORDER_SIG = signature(("lt", 2))
ORDERED_GRAPH_SIG = signature(("edge", 2), ("lt", 2))
DIGRAPH_SIG = signature(("arc", 2))


def pure_set(n: int) -> FinStructure:
    return structure(EMPTY_SIGNATURE, n)


def chain(n: int) -> FinStructure:
    """The linear order 0 < 1 < ... < n-1."""
    lt = [(i, j) for i in range(n) for j in range(n) if i < j]
    return structure(ORDER_SIG, n, {"lt": lt})


def graph_from_edges(n: int, edges) -> FinStructure:
    """Symmetric irreflexive edge relation, stored in both directions."""
    table = []
    for u, v in edges:
        if u == v:
            raise ValueError("loops not allowed in graphs")
        table.append((u, v))
        table.append((v, u))
    return structure(GRAPH_SIG, n, {"edge": table})


def complete_graph(n: int) -> FinStructure:
    return graph_from_edges(n, itertools.combinations(range(n), 2))


def path_graph(n: int) -> FinStructure:
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def edgeless_graph(n: int) -> FinStructure:
    return graph_from_edges(n, [])


def ordered_graph(n: int, edges) -> FinStructure:
    """A graph together with the natural order on its points."""
    g = graph_from_edges(n, edges)
    lt = [(i, j) for i in range(n) for j in range(n) if i < j]
    return structure(ORDERED_GRAPH_SIG, n, {"edge": g.table("edge"), "lt": lt})


def digraph_from_arcs(n: int, arcs) -> FinStructure:
    return structure(DIGRAPH_SIG, n, {"arc": list(arcs)})


# --- membership predicates ----------------------------------------------

def is_graph(s: FinStructure) -> bool:
    if s.sig != GRAPH_SIG:
        return False
    edges = set(s.table("edge"))
    return all(u != v and (v, u) in edges for u, v in edges)


def is_linear_order(s: FinStructure) -> bool:
    if s.sig != ORDER_SIG:
        return False
    lt = set(s.table("lt"))
    for i in range(s.size):
        if (i, i) in lt:
            return False
        for j in range(s.size):
            if i != j and ((i, j) in lt) == ((j, i) in lt):
                return False
            for k in range(s.size):
                if (i, j) in lt and (j, k) in lt and (i, k) not in lt:
                    return False
    return True


def is_ordered_graph(s: FinStructure) -> bool:
    if s.sig != ORDERED_GRAPH_SIG:
        return False
    from .structures import reduct

    return is_graph(reduct(s, GRAPH_SIG)) and is_linear_order(reduct(s, ORDER_SIG))


def is_digraph(s: FinStructure) -> bool:
    if s.sig != DIGRAPH_SIG:
        return False
    return all(u != v for u, v in s.table("arc"))


def is_tournament(s: FinStructure) -> bool:
    if s.sig != DIGRAPH_SIG:
        return False
    arcs = set(s.table("arc"))
    for i in range(s.size):
        if (i, i) in arcs:
            return False
        for j in range(i + 1, s.size):
            if ((i, j) in arcs) == ((j, i) in arcs):
                return False
    return True


# --- generators ----------------------------------------------------------

def _dedupe(structures) -> list[FinStructure]:
    """Canonical representatives, one per iso class, in canonical order."""
    by_key = {}
    for s in structures:
        c = canonical_form(s).structure
        by_key[(c.size, c.tables)] = c
    return [by_key[k] for k in sorted(by_key)]


def hereditary_generator(sig: Signature, membership):
    """Size-by-size generator for a hereditary class: members of size n are
    found among one-point extensions of members of size n-1."""
    cache: dict[int, list[FinStructure]] = {}

    def generate(n: int) -> list[FinStructure]:
        if n < 0:
            return []
        if n == 0:
            empty = structure(sig, 0)
            return [empty] if membership(empty) else []
        if n not in cache:
            smaller = generate(n - 1)
            candidates = []
            for s in smaller:
                candidates.extend(x for x in one_point_extensions(s, sig) if membership(x))
            cache[n] = _dedupe(candidates)
        return cache[n]

    return generate


def _unique_per_size(builder):
    def generate(n: int) -> list[FinStructure]:
        if n < 0:
            return []
        return [canonical_form(builder(n)).structure]

    return generate


def _ordered_graph_generator(n: int) -> list[FinStructure]:
    """Ordered graphs are rigid, so labeled graphs with the natural order
    enumerate the iso classes exactly once."""
    if n < 0:
        return []
    out = []
    for picked in subsets_of(itertools.combinations(range(n), 2)):
        out.append(ordered_graph(n, picked))
    return _dedupe(out)


def forbidden_substructure_class(
    sig: Signature,
    forbidden: list[FinStructure],
    name: str = "user",
    size_bound: int = 5,
) -> ClassSpec:
    """A is a member iff no forbidden F embeds into A."""

    def membership(s: FinStructure) -> bool:
        if s.sig != sig:
            return False
        return not any(
            f.size <= s.size and enumerate_embeddings(f, s) for f in forbidden
        )

    return ClassSpec(
        name=name,
        sig=sig,
        membership=membership,
        size_bound=size_bound,
        generator=hereditary_generator(sig, membership),
    )


def _finite_catalog_class(name, sig, members, size_bound) -> ClassSpec:
    reps = _dedupe(members)
    keys = {(c.size, c.tables) for c in reps}

    def membership(s: FinStructure) -> bool:
        if s.sig != sig:
            return False
        c = canonical_form(s).structure
        return s.size == 0 or (c.size, c.tables) in keys

    def generate(n: int) -> list[FinStructure]:
        return [c for c in reps if c.size == n]

    return ClassSpec(name=name, sig=sig, membership=membership, size_bound=size_bound, generator=generate)


def builtin_class(name: str, size_bound: int = 5) -> ClassSpec:
    """Look up a named built-in class."""
    if name == "set":
        return ClassSpec(
            name="set",
            sig=EMPTY_SIGNATURE,
            membership=lambda s: s.sig == EMPTY_SIGNATURE,
            size_bound=size_bound,
            generator=_unique_per_size(pure_set),
        )
    if name == "linorder":
        return ClassSpec(
            name="linorder",
            sig=ORDER_SIG,
            membership=lambda s: s.size == 0 or is_linear_order(s),
            size_bound=size_bound,
            generator=_unique_per_size(chain),
        )
    if name == "graph":
        return ClassSpec(
            name="graph",
            sig=GRAPH_SIG,
            membership=lambda s: s.sig == GRAPH_SIG and (s.size == 0 or is_graph(s)),
            size_bound=size_bound,
            generator=hereditary_generator(GRAPH_SIG, is_graph),
        )
    if name == "ordered_graph":
        return ClassSpec(
            name="ordered_graph",
            sig=ORDERED_GRAPH_SIG,
            membership=lambda s: s.size == 0 or is_ordered_graph(s),
            size_bound=size_bound,
            generator=_ordered_graph_generator,
        )
    if name == "digraph":
        return ClassSpec(
            name="digraph",
            sig=DIGRAPH_SIG,
            membership=lambda s: s.sig == DIGRAPH_SIG and (s.size == 0 or is_digraph(s)),
            size_bound=size_bound,
            generator=hereditary_generator(DIGRAPH_SIG, is_digraph),
        )
    if name == "tournament":
        return ClassSpec(
            name="tournament",
            sig=DIGRAPH_SIG,
            membership=lambda s: s.size == 0 or is_tournament(s),
            size_bound=size_bound,
            generator=hereditary_generator(DIGRAPH_SIG, is_tournament),
        )
    if name == "even_graph":
        # Fixture: heredity fails (a 2-point member has a 1-point subset).
        def even_membership(s: FinStructure) -> bool:
            return s.sig == GRAPH_SIG and s.size % 2 == 0 and (s.size == 0 or is_graph(s))

        base = hereditary_generator(GRAPH_SIG, is_graph)
        return ClassSpec(
            name="even_graph",
            sig=GRAPH_SIG,
            membership=even_membership,
            size_bound=size_bound,
            generator=lambda n: [s for s in base(n) if n % 2 == 0],
        )
    if name == "ap_fail":
        # Fixture: three-member digraph catalog.  The span gluing the
        # source of one arc to the target of another has no amalgam here
        # (it would need a point with both an outgoing and an incoming arc).
        members = [
            digraph_from_arcs(1, []),
            digraph_from_arcs(2, []),
            digraph_from_arcs(2, [(0, 1)]),
        ]
        return _finite_catalog_class("ap_fail", DIGRAPH_SIG, members, size_bound=2)
    raise KeyError(f"unknown built-in class {name!r}")


BUILTIN_CLASS_NAMES = (
    "set",
    "linorder",
    "graph",
    "ordered_graph",
    "digraph",
    "tournament",
    "even_graph",
    "ap_fail",
)


STRUCTURE_ZOO = {
    "K1": complete_graph(1),
    "K2": complete_graph(2),
    "K3": complete_graph(3),
    "K4": complete_graph(4),
    "P3": path_graph(3),
    "E2": edgeless_graph(2),
    "E3": edgeless_graph(3),
}
