"""Graphviz DOT rendering of designs and trail hierarchies.

Primary paths are drawn solid and protection paths dashed. Trail
hierarchies put each trail in its own cluster, the truck trail laid out as a
left-to-right chain, with entity labels showing merged expressions.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .grouping import CppDesign
from .trails import BRANCH, DIRECT, REAL, TrailHierarchy

_PALETTE = ("blue", "red", "darkgreen", "orange", "purple", "brown", "magenta", "teal", "navy", "olive")


def _q(text: object) -> str:
    s = str(text).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def topology_dot(design: CppDesign) -> str:
    """Physical topology with every demand's primary (solid) and protection (dashed) path."""
    topo = design.topology
    out = ["graph topology {", "  layout=neato;", "  overlap=false;", "  node [shape=circle];"]
    for n in sorted(topo.nodes):
        out.append(f"  {_q(n)};")
    for l in topo.links.values():
        out.append(f"  {_q(l.a)} -- {_q(l.b)} [color=gray, label={_q(f'{l.link_id} ({_num(l.length)})')}];")
    for k, (d, pair) in enumerate(sorted(design.spp.pairs.items())):
        colour = _PALETTE[k % len(_PALETTE)]
        g = design.group_of(d)
        tag = f"{d}" if g is None else f"{d} g{g.group_id}"
        for path, style, kind in ((pair.primary, "solid", "p"), (pair.protection, "dashed", "q")):
            for a, b in zip(path.nodes, path.nodes[1:]):
                out.append(
                    f"  {_q(a)} -- {_q(b)} [style={style}, penwidth=2, color={colour}, "
                    f"label={_q(kind + tag)}];"
                )
    out.append("}")
    return "\n".join(out) + "\n"


def hierarchy_dot(hierarchy: TrailHierarchy) -> str:
    """One cluster per trail; entities hang off their trail node."""
    gid = hierarchy.group_id
    out = [f"graph {_q(f'group_{gid}_trails')} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for t in hierarchy.trails:
        prefix = f"t{t.trail_id}"
        title = "truck trail" if t.level == 0 else f"branch trail {t.trail_id} (level {t.level})"
        if t.origin_complement is not None:
            title += f" origin: {t.origin_complement}"
        out.append(f"  subgraph {_q(f'cluster_{prefix}')} {{")
        out.append(f"    label={_q(title)};")
        for k, v in enumerate(t.vertices):
            out.append(f"    {_q(f'{prefix}_{k}')} [label={_q(v[0])}];")
        for k, l in enumerate(t.links):
            out.append(f"    {_q(f'{prefix}_{k}')} -- {_q(f'{prefix}_{k + 1}')} [label={_q(l)}];")
        for j, e in enumerate(t.entities):
            name = f"{prefix}_e{j}"
            shape = {REAL: "box", DIRECT: "box", BRANCH: "diamond"}[e.kind]
            style = ", style=dashed" if e.kind == DIRECT else ""
            label = e.label if not e.omitted else f"{e.label} (omits {', '.join(map(str, e.omitted))})"
            out.append(f"    {_q(name)} [shape={shape}{style}, label={_q(label)}];")
            out.append(f"    {_q(f'{prefix}_{e.position}')} -- {_q(name)} [style=dotted];")
        out.append("  }")
    for t in hierarchy.trails:
        if t.parent is None:
            continue
        parent = hierarchy.trail(t.parent[0])
        k = parent.nodes.index(t.parent[1])
        out.append(f"  {_q(f't{parent.trail_id}_{k}')} -- {_q(f't{t.trail_id}_0')} [style=bold, color=gray];")
    out.append("}")
    return "\n".join(out) + "\n"


def export_dot(design: CppDesign, hierarchies: Iterable[TrailHierarchy] | Mapping[int, TrailHierarchy] = ()) -> dict[str, str]:
    """DOT documents keyed by file stem: ``topology`` plus ``group_<id>_trails`` per hierarchy."""
    if isinstance(hierarchies, Mapping):
        hierarchies = hierarchies.values()
    docs = {"topology": topology_dot(design)}
    for h in sorted(hierarchies, key=lambda h: h.group_id):
        docs[f"group_{h.group_id}_trails"] = hierarchy_dot(h)
    return docs
