"""Line-based text format for structures.

One structure per block::

    structure <name>
    signature <sym>/<arity> [<sym>/<arity> ...]
    size <n>
    <sym> <t1> <t2> ...      (one line per symbol with a non-empty table,
                              tuples comma-separated, e.g. `edge 0,1 1,2`)
    end

Parsers reject duplicate tuples, out-of-range indices, and unknown
symbols with positional (line-numbered) error messages.
"""

from __future__ import annotations

from .structures import FinStructure, Signature, StructureError, structure


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def parse_structures(text: str) -> list[tuple[str, FinStructure]]:
    """Parse every `structure ... end` block, returning (name, structure) pairs."""
    out: list[tuple[str, FinStructure]] = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if not line or line.startswith("#"):
            i += 1
            continue
        if not line.startswith("structure "):
            raise ParseError(i + 1, f"expected 'structure <name>', got {line!r}")
        name = line.split(None, 1)[1].strip()
        block_start = i
        i += 1
        sig = None
        size = None
        tables: dict[str, list[tuple[int, ...]]] = {}
        seen_symbols: set[str] = set()
        closed = False
        while i < len(lines):
            raw = lines[i].strip()
            lno = i + 1
            i += 1
            if not raw or raw.startswith("#"):
                continue
            if raw == "end":
                closed = True
                break
            head, _, rest = raw.partition(" ")
            if head == "signature":
                if sig is not None:
                    raise ParseError(lno, "duplicate signature line")
                symbols = []
                for part in rest.split():
                    sym, slash, arity_s = part.partition("/")
                    if not slash or not sym:
                        raise ParseError(lno, f"malformed symbol spec {part!r}")
                    try:
                        arity = int(arity_s)
                    except ValueError:
                        raise ParseError(lno, f"bad arity in {part!r}") from None
                    symbols.append((sym, arity))
                try:
                    sig = Signature(tuple(symbols))
                except StructureError as exc:
                    raise ParseError(lno, str(exc)) from None
            elif head == "size":
                if size is not None:
                    raise ParseError(lno, "duplicate size line")
                try:
                    size = int(rest)
                except ValueError:
                    raise ParseError(lno, f"bad size {rest!r}") from None
                if size < 0:
                    raise ParseError(lno, "negative size")
            else:
                if sig is None or size is None:
                    raise ParseError(lno, "table line before signature/size")
                if head not in sig.names:
                    raise ParseError(lno, f"unknown symbol {head!r}")
                if head in seen_symbols:
                    raise ParseError(lno, f"duplicate table line for {head!r}")
                seen_symbols.add(head)
                arity = sig.arity(head)
                tuples: list[tuple[int, ...]] = []
                seen: set[tuple[int, ...]] = set()
                for tok in rest.split():
                    try:
                        t = tuple(int(x) for x in tok.split(","))
                    except ValueError:
                        raise ParseError(lno, f"bad tuple {tok!r}") from None
                    if len(t) != arity:
                        raise ParseError(lno, f"tuple {tok!r} has arity {len(t)}, expected {arity}")
                    if any(not (0 <= x < size) for x in t):
                        raise ParseError(lno, f"tuple {tok!r} out of range for size {size}")
                    if t in seen:
                        raise ParseError(lno, f"duplicate tuple {tok!r}")
                    seen.add(t)
                    tuples.append(t)
                tables[head] = tuples
        if not closed:
            raise ParseError(block_start + 1, f"structure {name!r} has no 'end'")
        if sig is None or size is None:
            raise ParseError(block_start + 1, f"structure {name!r} missing signature or size")
        out.append((name, structure(sig, size, tables)))
    return out


def parse_structure(text: str) -> FinStructure:
    """Parse exactly one structure block."""
    parsed = parse_structures(text)
    if len(parsed) != 1:
        raise ParseError(1, f"expected exactly one structure block, found {len(parsed)}")
    return parsed[0][1]


def format_structure(name: str, s: FinStructure) -> str:
    lines = [f"structure {name}"]
    lines.append("signature " + " ".join(f"{sym}/{arity}" for sym, arity in s.sig.symbols))
    lines.append(f"size {s.size}")
    for (sym, _), table in zip(s.sig.symbols, s.tables):
        if table:
            lines.append(sym + " " + " ".join(",".join(map(str, t)) for t in table))
    lines.append("end")
    return "\n".join(lines) + "\n"
