"""Nets, routing instances, the text instance format and a seeded generator."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .grid import GridGraph, InvalidInstanceError, Vertex, canonical_edge


class InstanceParseError(InvalidInstanceError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Net:
    id: int
    terminals: tuple[Vertex, ...]

    def __post_init__(self):
        terms = tuple(sorted(Vertex(*t) for t in self.terminals))
        if len(terms) < 2:
            raise InvalidInstanceError(f"net {self.id} needs at least 2 terminals")
        if len(set(terms)) != len(terms):
            raise InvalidInstanceError(f"net {self.id} repeats a terminal")
        object.__setattr__(self, "terminals", terms)


@dataclass(frozen=True)
class Netlist:
    nets: tuple[Net, ...]
    grid: GridGraph

    def __post_init__(self):
        nets = tuple(self.nets)
        if not nets:
            raise InvalidInstanceError("netlist is empty")
        for expected, net in enumerate(nets, start=1):
            if net.id != expected:
                raise InvalidInstanceError(f"net ids must be 1..{len(nets)} in order, found {net.id} at position {expected}")
            for t in net.terminals:
                if not self.grid.contains(t):
                    raise InvalidInstanceError(f"net {net.id}: terminal {tuple(t)} out of bounds")
        object.__setattr__(self, "nets", nets)

    def __len__(self):
        return len(self.nets)

    def __iter__(self):
        return iter(self.nets)

    def __getitem__(self, i):
        return self.nets[i]


@dataclass(frozen=True)
class Instance:
    grid: GridGraph
    netlist: Netlist
    width: int

    def __post_init__(self):
        if int(self.width) < 1:
            raise InvalidInstanceError(f"channel width must be >= 1, got {self.width}")
        if self.netlist.grid is not self.grid and self.netlist.grid != self.grid:
            raise InvalidInstanceError("netlist refers to a different grid")

    @property
    def nets(self) -> tuple[Net, ...]:
        return self.netlist.nets

    @property
    def n_nets(self) -> int:
        return len(self.netlist)

    def terminal_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR layout of terminal vertex indices, as consumed by the kernels."""
        ptr = [0]
        flat = []
        for net in self.nets:
            flat.extend(self.grid.vertex_index(t) for t in net.terminals)
            ptr.append(len(flat))
        return np.array(ptr, dtype=np.int32), np.array(flat, dtype=np.int32)

    def digest(self) -> str:
        return hashlib.sha256(serialize_instance(self).encode("utf-8")).hexdigest()


def make_instance(rows: int, cols: int, width: int, nets: Iterable[Sequence], weights=None) -> Instance:
    """Convenience constructor; ``nets`` is a sequence of terminal lists, ids assigned 1..n."""
    grid = GridGraph(rows, cols, 1.0, weights)
    netlist = Netlist(tuple(Net(i, tuple(t)) for i, t in enumerate(nets, start=1)), grid)
    return Instance(grid, netlist, width)


_TERMINAL = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def _int(tok: str, lineno: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InstanceParseError(f"expected integer, got {tok!r}", lineno, col) from None


def parse_instance(text: str) -> Instance:
    """Parse the line-oriented instance format::

        grid <rows> <cols>
        width <W>
        weight <r1> <c1> <r2> <c2> <w_e>
        net <id> (<r>,<c>) (<r>,<c>) ...
    """
    dims = None
    width = None
    weights = {}
    nets: dict[int, tuple[Vertex, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        col0 = len(line) - len(line.lstrip()) + 1
        directive, _, rest = stripped.partition(" ")
        args = rest.split()
        argcol = col0 + len(directive) + 1
        if directive == "grid":
            if len(args) != 2:
                raise InstanceParseError("'grid' takes <rows> <cols>", lineno, col0)
            if dims is not None:
                raise InstanceParseError("duplicate 'grid' directive", lineno, col0)
            dims = (_int(args[0], lineno, argcol), _int(args[1], lineno, argcol))
        elif directive == "width":
            if len(args) != 1:
                raise InstanceParseError("'width' takes <W>", lineno, col0)
            width = _int(args[0], lineno, argcol)
            if width < 1:
                raise InstanceParseError(f"channel width must be >= 1, got {width}", lineno, argcol)
        elif directive == "weight":
            if len(args) != 5:
                raise InstanceParseError("'weight' takes <r1> <c1> <r2> <c2> <w_e>", lineno, col0)
            r1, c1, r2, c2 = (_int(a, lineno, argcol) for a in args[:4])
            try:
                w = float(args[4])
            except ValueError:
                raise InstanceParseError(f"expected number, got {args[4]!r}", lineno, argcol) from None
            weights[canonical_edge((r1, c1), (r2, c2))] = w
        elif directive == "net":
            if not args:
                raise InstanceParseError("'net' takes <id> and terminals", lineno, col0)
            net_id = _int(args[0], lineno, argcol)
            if net_id in nets:
                raise InstanceParseError(f"duplicate net id {net_id}", lineno, argcol)
            tail = rest.strip()[len(args[0]):]
            leftover = _TERMINAL.sub("", tail).strip()
            if leftover:
                pos = line.find(leftover.split()[0]) + 1
                raise InstanceParseError(f"cannot parse terminal near {leftover!r}", lineno, pos)
            nets[net_id] = tuple(Vertex(int(r), int(c)) for r, c in _TERMINAL.findall(tail))
        else:
            raise InstanceParseError(f"unknown directive {directive!r}", lineno, col0)

    if dims is None:
        raise InstanceParseError("missing 'grid' directive")
    if width is None:
        raise InstanceParseError("missing 'width' directive")
    if not nets:
        raise InstanceParseError("no nets defined")
    try:
        grid = GridGraph(dims[0], dims[1], 1.0, weights)
    except ValueError as exc:
        raise InstanceParseError(str(exc)) from None
    ordered = []
    for expected, net_id in enumerate(sorted(nets), start=1):
        if net_id != expected:
            raise InstanceParseError(f"net ids must be consecutive from 1; missing {expected}")
        ordered.append(Net(net_id, nets[net_id]))
    for net in ordered:
        for t in net.terminals:
            if not grid.contains(t):
                raise InstanceParseError(f"net {net.id}: terminal ({t.row},{t.col}) out of bounds")
    return Instance(grid, Netlist(tuple(ordered), grid), width)


def serialize_instance(inst: Instance) -> str:
    g = inst.grid
    lines = [f"grid {g.rows} {g.cols}", f"width {inst.width}"]
    for i, w in enumerate(g.weight):
        if w != 1.0:
            a, b = g.edge(i)
            lines.append(f"weight {a.row} {a.col} {b.row} {b.col} {float(w)!r}")
    for net in sorted(inst.nets, key=lambda n: n.id):
        terms = " ".join(f"({t.row},{t.col})" for t in net.terminals)
        lines.append(f"net {net.id} {terms}")
    return "\n".join(lines) + "\n"


def generate_random(rows: int, cols: int, n_nets: int, terminals_per_net=(2, 4),
                    seed: int = 0, width: int | None = None) -> Instance:
    """Seeded synthetic instance with uniformly placed terminals.

    Each net draws its terminal count uniformly from the inclusive range and
    samples that many distinct vertices.  ``width`` defaults to ``n_nets``,
    which is always feasible.
    """
    lo, hi = (int(x) for x in terminals_per_net)
    if rows < 2 or cols < 2:
        raise InvalidInstanceError(f"grid must be at least 2x2, got {rows}x{cols}")
    if n_nets < 1:
        raise InvalidInstanceError("need at least one net")
    if lo < 2 or hi < lo:
        raise InvalidInstanceError(f"bad terminal range {terminals_per_net}")
    if hi > rows * cols:
        raise InvalidInstanceError(f"{hi} terminals per net do not fit on {rows * cols} vertices")
    rng = np.random.default_rng(seed)
    grid = GridGraph(rows, cols)
    nets = []
    for i in range(1, n_nets + 1):
        k = int(rng.integers(lo, hi + 1))
        picks = rng.choice(rows * cols, size=k, replace=False)
        nets.append(Net(i, tuple(grid.vertex(p) for p in picks)))
    return Instance(grid, Netlist(tuple(nets), grid), n_nets if width is None else width)
