"""Edge-list and report files."""
from __future__ import annotations

import json
from pathlib import Path

from .construct import FtSpanner
from .metric import Metric


def write_edges(sp: FtSpanner, path, m: Metric | None = None) -> None:
    """One JSON object per line, sorted by (u, v); weights in the metric's original units."""
    scale = 1.0 if m is None else m.scale
    lines = []
    for (u, v), (w, kind, level) in sorted(sp.edges.items()):
        rec = {"u": u, "v": v, "w": w * scale, "kind": kind, "level": level}
        lines.append(json.dumps(rec))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_edges(path, n: int, m: Metric | None = None) -> FtSpanner:
    """Load an edge list; with ``m`` given, weights are re-read from the metric."""
    sp = FtSpanner(n=n)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
            u, v = int(rec["u"]), int(rec["v"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad edge record") from exc
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"{path}:{lineno}: vertex id out of range for n={n}")
        w = float(m.dist[u, v]) if m is not None else float(rec.get("w", 0.0))
        sp.add(u, v, w, rec.get("kind", "unknown"), int(rec.get("level", 0)))
    return sp


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
