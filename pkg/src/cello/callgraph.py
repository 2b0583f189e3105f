"""Cached callgraph loading and two-hop lineage queries.

The graph arrives as JSON produced at ingestion time by an external
documentation tool: {nodes: [{id, path}], edges: [[caller, callee]]}.
Lineage is one hop in each direction — immediate callers and immediate
callees — rendered as a deterministic natural-language summary for prompt
enrichment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import CallGraphError


@dataclass
class CallGraph:
    nodes: dict[str, str]              # id -> defining path
    edges: list[tuple[str, str]]       # (caller, callee)

    def __contains__(self, identifier: str) -> bool:
        return identifier in self.nodes

    def to_json(self) -> str:
        doc = {
            "nodes": [{"id": i, "path": self.nodes[i]} for i in sorted(self.nodes)],
            "edges": [[a, b] for a, b in sorted(set(self.edges))],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class Lineage:
    target: str
    callers: frozenset[str]
    callees: frozenset[str]


def load_callgraph(document: bytes | str) -> CallGraph:
    """Parse and validate a callgraph document.

    Every edge endpoint must be a declared node; offenders are listed in
    the error so the producing tool can be fixed.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise CallGraphError(f"callgraph is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise CallGraphError("callgraph must have 'nodes' and 'edges' keys")
    nodes: dict[str, str] = {}
    for entry in doc["nodes"]:
        node_id = entry["id"]
        if node_id in nodes:
            raise CallGraphError(f"duplicate node id: {node_id}")
        nodes[node_id] = entry.get("path", "")
    edges: list[tuple[str, str]] = []
    dangling: list[str] = []
    for pair in doc["edges"]:
        caller, callee = pair[0], pair[1]
        for endpoint in (caller, callee):
            if endpoint not in nodes:
                dangling.append(endpoint)
        edges.append((caller, callee))
    if dangling:
        raise CallGraphError(
            "edges reference undeclared nodes: " + ", ".join(sorted(set(dangling))))
    return CallGraph(nodes=nodes, edges=edges)


def two_hop_lineage(graph: CallGraph, target: str) -> Lineage:
    """Immediate callers and callees of target."""
    if target not in graph.nodes:
        raise CallGraphError(f"unknown function: {target}")
    callers = frozenset(a for a, b in graph.edges if b == target)
    callees = frozenset(b for a, b in graph.edges if a == target)
    return Lineage(target=target, callers=callers, callees=callees)


def summarize_lineage(lineage: Lineage) -> str:
    callers = ", ".join(sorted(lineage.callers)) or "no known callers"
    callees = ", ".join(sorted(lineage.callees)) or "no known callees"
    return (f"Function {lineage.target} is called by: {callers}. "
            f"It calls: {callees}.")
