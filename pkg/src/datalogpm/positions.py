"""Finite-position analyses: finite rank (dependency graph) and existential dependency graphs."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

import networkx as nx

from .core import Atom, Tgd, Variable


@dataclass(frozen=True, order=True)
class Position:
    predicate: str
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"position index must be >= 1: {self.predicate}[{self.index}]")

    def __str__(self):
        return f"{self.predicate}[{self.index}]"

    @classmethod
    def parse(cls, text: str) -> "Position":
        text = text.strip()
        pred, _, rest = text.partition("[")
        if not rest.endswith("]") or not pred:
            raise ValueError(f"bad position {text!r}, expected pred[i]")
        return cls(pred.strip(), int(rest[:-1]))


def positions_of(a: Atom, term) -> List[Position]:
    return [Position(a.predicate, i + 1) for i, t in enumerate(a.args) if t == term]


def body_positions(tgd: Tgd, v: Variable) -> List[Position]:
    out = []
    for a in tgd.body:
        out.extend(p for p in positions_of(a, v) if p not in out)
    return out


def head_positions(tgd: Tgd, v: Variable) -> List[Position]:
    return positions_of(tgd.head, v)


def program_positions(tgds: Iterable[Tgd]) -> Set[Position]:
    out = set()
    for t in tgds:
        for a in (*t.body, t.head):
            out.update(Position(a.predicate, i + 1) for i in range(a.arity))
    return out


METHODS = ("none", "rank", "edg", "user")


@dataclass(frozen=True)
class FinitePositionSet:
    positions: FrozenSet[Position]
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "positions", frozenset(self.positions))

    def __contains__(self, p: Position) -> bool:
        return p in self.positions

    def __iter__(self):
        return iter(sorted(self.positions))

    def __len__(self):
        return len(self.positions)

    def union(self, extra: Iterable[Position]) -> "FinitePositionSet":
        return FinitePositionSet(self.positions | frozenset(extra), self.method)


@dataclass
class DependencyGraph:
    nodes: Set[Position]
    regular_edges: Set[Tuple[Position, Position]] = field(default_factory=set)
    special_edges: Set[Tuple[Position, Position]] = field(default_factory=set)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for u, v in self.regular_edges:
            g.add_edge(u, v)
        for u, v in self.special_edges:
            g.add_edge(u, v)
        return g


def build_dependency_graph(tgds: Sequence[Tgd]) -> DependencyGraph:
    g = DependencyGraph(program_positions(tgds))
    for t in tgds:
        ex_positions = [p for z in t.existential_vars for p in head_positions(t, z)]
        for x in t.frontier_vars:
            for p in body_positions(t, x):
                for q in head_positions(t, x):
                    g.regular_edges.add((p, q))
                for r in ex_positions:
                    g.special_edges.add((p, r))
    return g


def infinite_rank_positions(g: DependencyGraph) -> Set[Position]:
    """Positions reachable from a strongly connected component that contains a special edge."""
    nxg = g.to_networkx()
    comp_of = {}
    for i, comp in enumerate(nx.strongly_connected_components(nxg)):
        for n in comp:
            comp_of[n] = i
    bad_comps = {comp_of[u] for u, v in g.special_edges if comp_of[u] == comp_of[v]}
    seeds = [n for n in nxg if comp_of[n] in bad_comps]
    out = set(seeds)
    for s in seeds:
        out |= nx.descendants(nxg, s)
    return out


def finite_rank_positions(tgds: Sequence[Tgd]) -> FinitePositionSet:
    g = build_dependency_graph(tgds)
    return FinitePositionSet(g.nodes - infinite_rank_positions(g), "rank")


# -- existential dependency graph -------------------------------------------

EdgNode = Tuple[str, Variable]  # (rule id, existential variable)


@dataclass
class ExistentialDependencyGraph:
    nodes: List[EdgNode]
    edges: Set[Tuple[EdgNode, EdgNode]]
    move_sets: Dict[EdgNode, FrozenSet[Position]]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.to_networkx())

    def cyclic_closure(self) -> Set[EdgNode]:
        """Nodes on a cycle plus everything reachable from one."""
        g = self.to_networkx()
        on_cycle = set()
        for comp in nx.strongly_connected_components(g):
            if len(comp) > 1 or any(g.has_edge(n, n) for n in comp):
                on_cycle |= comp
        out = set(on_cycle)
        for n in on_cycle:
            out |= nx.descendants(g, n)
        return out


def _frontier_positions(tgds: Sequence[Tgd]):
    """(tgd, frontier var, body positions, head positions) for every frontier variable."""
    out = []
    for t in tgds:
        for x in t.frontier_vars:
            out.append((t, x, frozenset(body_positions(t, x)), head_positions(t, x)))
    return out


def move_set(start: Iterable[Position], frontier) -> FrozenSet[Position]:
    moved = set(start)
    changed = True
    while changed:
        changed = False
        for _, _, bpos, hpos in frontier:
            if bpos <= moved and not moved.issuperset(hpos):
                moved.update(hpos)
                changed = True
    return frozenset(moved)


def build_edg(tgds: Sequence[Tgd]) -> ExistentialDependencyGraph:
    frontier = _frontier_positions(tgds)
    nodes: List[EdgNode] = []
    moves: Dict[EdgNode, FrozenSet[Position]] = {}
    for t in tgds:
        for z in t.existential_vars:
            node = (t.id, z)
            nodes.append(node)
            moves[node] = move_set(head_positions(t, z), frontier)
    triggered: Dict[str, List[FrozenSet[Position]]] = {}
    for t, _, bpos, _ in frontier:
        triggered.setdefault(t.id, []).append(bpos)
    edges = set()
    for z in nodes:
        for z2 in nodes:
            if any(bpos <= moves[z] for bpos in triggered.get(z2[0], [])):
                edges.add((z, z2))
    return ExistentialDependencyGraph(nodes, edges, moves)


def ext_finite_positions(tgds: Sequence[Tgd]) -> FinitePositionSet:
    edg = build_edg(tgds)
    unbounded = set()
    for node in edg.cyclic_closure():
        unbounded |= edg.move_sets[node]
    return FinitePositionSet(program_positions(tgds) - unbounded, "edg")


def no_finite_positions() -> FinitePositionSet:
    return FinitePositionSet(frozenset(), "none")


def nullable_positions(tgds: Sequence[Tgd]) -> Set[Position]:
    """Positions that can ever hold a null: existential head positions closed under regular edges."""
    g = build_dependency_graph(tgds)
    seeds = {p for t in tgds for z in t.existential_vars for p in head_positions(t, z)}
    succ: Dict[Position, Set[Position]] = {}
    for u, v in g.regular_edges:
        succ.setdefault(u, set()).add(v)
    out, todo = set(seeds), list(seeds)
    while todo:
        p = todo.pop()
        for q in succ.get(p, ()):
            if q not in out:
                out.add(q)
                todo.append(q)
    return out


def load_user_positions(path, tgds: Sequence[Tgd]) -> FinitePositionSet:
    """Read ``pred[i]`` lines (``%`` comments allowed) as a user-asserted finite-position set."""
    known = program_positions(tgds)
    out = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("%", 1)[0].strip()
        if not line:
            continue
        for chunk in line.replace(",", " ").split():
            p = Position.parse(chunk)
            if p not in known:
                raise ValueError(f"{path}:{lineno}: {p} is not a position of the rules")
            out.add(p)
    return FinitePositionSet(frozenset(out), "user")


def finite_positions(tgds: Sequence[Tgd], method: str) -> FinitePositionSet:
    """Resolve a method name (none | rank | edg) to its position set."""
    if method == "none":
        return no_finite_positions()
    if method == "rank":
        return finite_rank_positions(tgds)
    if method == "edg":
        return ext_finite_positions(tgds)
    raise ValueError(f"unknown finite-position method {method!r}")


def _dot_id(x) -> str:
    return '"' + str(x).replace('"', r'\"') + '"'


def dependency_graph_dot(g: DependencyGraph) -> str:
    lines = ["digraph dependency {"]
    for n in sorted(g.nodes):
        lines.append(f"  {_dot_id(n)};")
    for u, v in sorted(g.regular_edges):
        lines.append(f"  {_dot_id(u)} -> {_dot_id(v)};")
    for u, v in sorted(g.special_edges):
        lines.append(f'  {_dot_id(u)} -> {_dot_id(v)} [style=dashed, label="*"];')
    lines.append("}")
    return "\n".join(lines)


def edg_dot(edg: ExistentialDependencyGraph) -> str:
    label = {n: f"{n[0]}.{n[1].name}" for n in edg.nodes}
    lines = ["digraph edg {"]
    for n in edg.nodes:
        moves = ", ".join(map(str, sorted(edg.move_sets[n])))
        lines.append(f"  {_dot_id(label[n])} [tooltip={_dot_id(moves)}];")
    for u, v in sorted(edg.edges, key=lambda e: (label[e[0]], label[e[1]])):
        lines.append(f"  {_dot_id(label[u])} -> {_dot_id(label[v])};")
    lines.append("}")
    return "\n".join(lines)
