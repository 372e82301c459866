"""Rooted hypernym trees and path-based class similarity.

The tree is read from a tab-separated edge list (``parent<TAB>child`` per
line, ``#`` comments and blank lines ignored). Similarity between two nodes
is ``1 / (1 + d)`` where ``d`` is the number of edges on the unique tree path
between them, so identical nodes score 1.0 and the score decays toward 0 with
distance. Callers that want a different similarity in (0, 1] can build a
weight matrix directly instead of going through a taxonomy.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import ValidationError


@dataclass(frozen=True)
class Taxonomy:
    """Immutable rooted tree over string node identifiers.

    ``parent`` maps every non-root node to its parent; ``depth`` maps every
    node to its edge distance from the root. Queries are pure, so a parsed
    taxonomy is safe to share across threads.
    """

    root: str
    parent: dict[str, str]
    depth: dict[str, int] = field(repr=False)

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.depth)

    def __contains__(self, node: str) -> bool:
        return node in self.depth


@dataclass(frozen=True)
class LabelMap:
    """Binds dataset class indices 0..n-1 to taxonomy node identifiers."""

    class_names: tuple[str, ...]
    nodes: tuple[str, ...]

    def __post_init__(self):
        if len(self.class_names) != len(self.nodes):
            raise ValidationError("shape-mismatch", "names and nodes differ in length")
        if not self.class_names:
            raise ValidationError("empty-input", "label map has no classes")

    def __len__(self) -> int:
        return len(self.class_names)


def _identifier(token: str, lineno: int) -> str:
    if not token or any(c.isspace() for c in token):
        raise ValidationError(
            "malformed-line", f"node identifier {token!r} is empty or has whitespace", line=lineno
        )
    return token


def parse_taxonomy(text: str) -> Taxonomy:
    """Parse a tab-separated edge list into a validated Taxonomy.

    Edge order does not matter. Raises ValidationError with kinds
    ``duplicate-edge``, ``multiple-parents``, ``multiple-roots``,
    ``cycle-detected``, ``empty-input`` or ``malformed-line``; line numbers
    are attached where applicable.
    """
    parent: dict[str, str] = {}
    edge_line: dict[tuple[str, str], int] = {}
    nodes: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValidationError(
                "malformed-line", f"expected 'parent<TAB>child', got {raw!r}", line=lineno
            )
        p = _identifier(parts[0].strip(), lineno)
        c = _identifier(parts[1].strip(), lineno)
        if (p, c) in edge_line:
            raise ValidationError(
                "duplicate-edge",
                f"edge {p!r} -> {c!r} already given on line {edge_line[(p, c)]}",
                line=lineno,
            )
        edge_line[(p, c)] = lineno
        if c in parent:
            raise ValidationError(
                "multiple-parents", f"node {c!r} has parents {parent[c]!r} and {p!r}", line=lineno
            )
        if p == c:
            raise ValidationError("cycle-detected", f"self-edge on node {p!r}", line=lineno)
        parent[c] = p
        nodes.add(p)
        nodes.add(c)

    if not nodes:
        raise ValidationError("empty-input", "no edges found")

    roots = sorted(nodes - parent.keys())
    if len(roots) > 1:
        raise ValidationError("multiple-roots", f"parentless nodes: {', '.join(roots)}")
    if not roots:
        # every node has a parent, so the finite parent chain must loop
        start = next(iter(nodes))
        raise ValidationError(
            "cycle-detected", f"no root; cycle reachable from {start!r}",
            line=_cycle_line(start, parent, edge_line),
        )
    root = roots[0]

    depth: dict[str, int] = {root: 0}
    for node in nodes:
        chain = []
        cur = node
        while cur not in depth:
            if cur in chain:
                raise ValidationError(
                    "cycle-detected", f"cycle through node {cur!r}",
                    line=_cycle_line(cur, parent, edge_line),
                )
            chain.append(cur)
            cur = parent[cur]
        base = depth[cur]
        for offset, member in enumerate(reversed(chain), start=1):
            depth[member] = base + offset

    return Taxonomy(root=root, parent=parent, depth=depth)


def _cycle_line(node: str, parent: dict[str, str], edge_line: dict) -> int | None:
    return edge_line.get((parent.get(node, ""), node))


def _require_node(tax: Taxonomy, node: str) -> None:
    if node not in tax.depth:
        raise ValidationError("unknown-node", f"node {node!r} is not in the taxonomy")


def shortest_path_length(tax: Taxonomy, a: str, b: str) -> int:
    """Edge count of the unique tree path between a and b (0 iff a == b)."""
    _require_node(tax, a)
    _require_node(tax, b)
    da, db = tax.depth[a], tax.depth[b]
    steps = 0
    while da > db:
        a = tax.parent[a]
        da -= 1
        steps += 1
    while db > da:
        b = tax.parent[b]
        db -= 1
        steps += 1
    while a != b:
        a = tax.parent[a]
        b = tax.parent[b]
        steps += 2
    return steps


def path_similarity(tax: Taxonomy, a: str, b: str) -> float:
    """Similarity in (0, 1]: 1 / (1 + path length); 1.0 iff a == b."""
    return 1.0 / (1.0 + shortest_path_length(tax, a, b))


def parse_label_map(text: str) -> LabelMap:
    """Parse the ``index,name,node`` CSV binding class indices to nodes."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty-input", "label map file is empty") from None
    if [h.strip() for h in header] != ["index", "name", "node"]:
        raise ValidationError(
            "malformed-line", f"expected header 'index,name,node', got {','.join(header)!r}", line=1
        )
    rows: dict[int, tuple[str, str]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ValidationError("malformed-line", f"expected 3 fields, got {len(row)}", line=lineno)
        try:
            idx = int(row[0])
        except ValueError:
            raise ValidationError("malformed-line", f"bad index {row[0]!r}", line=lineno) from None
        if idx in rows:
            raise ValidationError("duplicate-class-index", f"index {idx} repeated", line=lineno)
        rows[idx] = (row[1].strip(), row[2].strip())
    if not rows:
        raise ValidationError("empty-input", "label map has no classes")
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise ValidationError(
            "bad-class-index", f"indices must be 0..{n - 1} without gaps, got {sorted(rows)}"
        )
    names = tuple(rows[i][0] for i in range(n))
    nodes = tuple(rows[i][1] for i in range(n))
    return LabelMap(class_names=names, nodes=nodes)


def validate_label_map(labels: LabelMap, tax: Taxonomy) -> None:
    """Check that every mapped node exists in the taxonomy."""
    for name, node in zip(labels.class_names, labels.nodes):
        if node not in tax.depth:
            raise ValidationError(
                "unknown-node", f"class {name!r} maps to unknown taxonomy node {node!r}"
            )
