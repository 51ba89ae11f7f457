"""Plain-text input formats: automorphisms, train-track maps, subgroup generators.

All formats are line based; ``#`` starts a comment.  Errors name the line.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

from .automorphism import Automorphism, MappingTorusElement
from .traintrack import GraphMap, MarkedGraph
from .words import Basis, WordError


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<input>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _read(path) -> tuple:
    p = Path(path)
    return p.read_text(), str(p)


def _arrow(line: str, no: int, source: str) -> tuple:
    if "->" not in line:
        raise ParseError(f"expected 'x -> word', got {line!r}", no, source)
    lhs, rhs = (s.strip() for s in line.split("->", 1))
    if not lhs or not rhs:
        raise ParseError(f"empty side in {line!r}", no, source)
    return lhs, rhs


def parse_automorphism(text: str, source: str = "<input>") -> Automorphism:
    """``rank N`` then ``x -> word`` per generator, optionally ``inverse:`` and the same again."""
    basis = None
    fwd, inv = {}, None
    for no, line in _lines(text):
        if basis is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "rank" or not parts[1].isdigit():
                raise ParseError("first line must be 'rank N'", no, source)
            try:
                basis = Basis.standard(int(parts[1]))
            except WordError as e:
                raise ParseError(str(e), no, source) from None
            continue
        if line == "inverse:":
            if inv is not None:
                raise ParseError("duplicate inverse block", no, source)
            inv = {}
            continue
        lhs, rhs = _arrow(line, no, source)
        if lhs not in basis.symbols:
            raise ParseError(f"unknown generator {lhs!r}", no, source)
        table = fwd if inv is None else inv
        if lhs in table:
            raise ParseError(f"generator {lhs!r} assigned twice", no, source)
        try:
            table[lhs] = basis.parse(rhs)
        except WordError as e:
            raise ParseError(str(e), no, source) from None
    if basis is None:
        raise ParseError("empty automorphism file", None, source)
    for name, table in (("images", fwd), ("inverse images", inv)):
        if table is not None and set(table) != set(basis.symbols):
            missing = ", ".join(s for s in basis.symbols if s not in table)
            raise ParseError(f"missing {name} for {missing}", None, source)
    try:
        return Automorphism(basis, tuple(fwd[s] for s in basis.symbols),
                            None if inv is None else tuple(inv[s] for s in basis.symbols))
    except WordError as e:
        raise ParseError(str(e), None, source) from None


def parse_traintrack(text: str, source: str = "<input>") -> GraphMap:
    """``graph rose N`` or ``vertex``/``edge name u v`` lines, then ``map e -> path`` lines."""
    rose = None
    vertices, edges, images = [], [], {}
    for no, line in _lines(text):
        parts = line.split()
        head = parts[0]
        if head == "graph":
            if len(parts) != 3 or parts[1] != "rose" or not parts[2].isdigit():
                raise ParseError("expected 'graph rose N'", no, source)
            rose = int(parts[2])
        elif head == "vertex":
            vertices.extend(parts[1:])
        elif head == "edge":
            if len(parts) != 4:
                raise ParseError("expected 'edge name u v'", no, source)
            edges.append((parts[1], parts[2], parts[3]))
        elif head == "map":
            lhs, rhs = _arrow(line[3:], no, source)
            images[lhs] = (rhs, no)
        else:
            raise ParseError(f"unknown directive {head!r}", no, source)
    try:
        if rose is not None:
            if edges or vertices:
                raise ParseError("rose shortcut cannot be mixed with explicit edges", None, source)
            graph = MarkedGraph.rose(Basis.standard(rose))
        else:
            if not edges:
                raise ParseError("no graph given", None, source)
            basis = Basis(tuple(e[0] for e in edges))
            graph = MarkedGraph(basis, tuple(vertices), tuple((u, v) for _, u, v in edges))
    except WordError as e:
        raise ParseError(str(e), None, source) from None
    basis = graph.basis
    paths = []
    for s in basis.symbols:
        if s not in images:
            raise ParseError(f"no image for edge {s!r}", None, source)
        rhs, no = images[s]
        try:
            paths.append(basis.parse(rhs, reduced=False))
        except WordError as e:
            raise ParseError(str(e), no, source) from None
    extra = set(images) - set(basis.symbols)
    if extra:
        raise ParseError(f"map for unknown edge {sorted(extra)[0]!r}", images[sorted(extra)[0]][1], source)
    try:
        return GraphMap(graph, tuple(paths))
    except WordError as e:
        raise ParseError(str(e), None, source) from None


def parse_subgroup(text: str, basis: Basis, source: str = "<input>") -> list:
    gens = []
    for no, line in _lines(text):
        try:
            gens.append(basis.parse(line))
        except WordError as e:
            raise ParseError(str(e), no, source) from None
    return gens


def parse_element(spec: str, basis: Basis) -> MappingTorusElement:
    """``w,m`` as in ``ab,-1``; ``1`` is the empty word."""
    parts = spec.split(",")
    if len(parts) != 2:
        raise ParseError(f"element spec must be 'w,m', got {spec!r}")
    try:
        m = int(parts[1])
    except ValueError:
        raise ParseError(f"exponent in {spec!r} is not an integer") from None
    try:
        return MappingTorusElement(basis.parse(parts[0]), m)
    except WordError as e:
        raise ParseError(str(e)) from None


def load_automorphism(path) -> Automorphism:
    return parse_automorphism(*_read(path))


def load_traintrack(path) -> GraphMap:
    return parse_traintrack(*_read(path))


def load_subgroup(path, basis: Basis) -> list:
    text, source = _read(path)
    return parse_subgroup(text, basis, source)
