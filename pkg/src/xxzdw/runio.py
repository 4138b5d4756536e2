"""Run manifests, result serialization, caching, and SVG plots.

Every CLI run is identified by a content hash of (subcommand, resolved
parameters, package version); identical manifests produce bit-identical
outputs, which the cache exploits by replaying stored bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def run_id(subcommand: str, params: dict) -> str:
    payload = canonical_json({"cmd": subcommand, "params": params, "version": __version__})
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    run_id: str
    subcommand: str
    params: dict
    created: float = field(default_factory=time.time)
    outputs: list = field(default_factory=list)

    def as_dict(self):
        return {"run_id": self.run_id, "subcommand": self.subcommand,
                "params": self.params, "created": self.created,
                "outputs": self.outputs, "version": __version__}


def record_json(manifest: RunManifest, method: str, entries, extra: dict | None = None) -> str:
    rec = {
        "run_id": manifest.run_id,
        "params": manifest.params,
        "method": method,
        "entries": [{"x": x, "value": v, "abs_error": e} for x, v, e in entries],
    }
    if extra:
        rec.update(extra)
    return json.dumps(rec, indent=1, sort_keys=True)


def entries_csv(entries) -> str:
    lines = ["x,value,abs_error"]
    for x, v, e in entries:
        lines.append(f"{x},{v!r},{e!r}")
    return "\n".join(lines) + "\n"


def entries_svg(entries, title: str = "", width: int = 640, height: int = 400) -> str:
    """Minimal self-contained step/line chart."""
    xs = [float(x) for x, _, _ in entries]
    vs = [float(v) for _, v, _ in entries]
    if not xs:
        xs, vs = [0.0, 1.0], [0.0, 0.0]
    x0, x1 = min(xs), max(xs)
    v0, v1 = min(vs + [0.0]), max(vs + [1e-12])
    if x1 == x0:
        x1 = x0 + 1.0
    if v1 == v0:
        v1 = v0 + 1.0
    pad = 45

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - v0) / (v1 - v0) * (height - 2 * pad)

    pts = " ".join(f"{px(x):.2f},{py(v):.2f}" for x, v in zip(xs, vs))
    ticks = []
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        vv = v0 + frac * (v1 - v0)
        ticks.append(f'<text x="{px(xv):.1f}" y="{height - pad + 16}" font-size="11" '
                     f'text-anchor="middle">{xv:.4g}</text>')
        ticks.append(f'<text x="{pad - 6}" y="{py(vv):.1f}" font-size="11" '
                     f'text-anchor="end">{vv:.4g}</text>')
    return f"""<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">
<rect width="100%" height="100%" fill="white"/>
<text x="{width / 2}" y="20" font-size="13" text-anchor="middle">{title}</text>
<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>
<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>
{chr(10).join(ticks)}
<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>
</svg>
"""


class ResultCache:
    """File cache keyed by run id; hits replay stored bytes exactly."""

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def path(self, rid: str) -> Path:
        return self.dir / f"{rid}.json"

    def get(self, rid: str):
        p = self.path(rid)
        if p.exists():
            return json.loads(p.read_text())
        return None

    def put(self, rid: str, artifacts: dict):
        tmp = self.path(rid).with_suffix(".tmp")
        tmp.write_text(json.dumps(artifacts, sort_keys=True))
        os.replace(tmp, self.path(rid))


def write_artifacts(out_dir, manifest: RunManifest, artifacts: dict):
    """Write {suffix: text} artifact dict; returns file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for suffix, text in artifacts.items():
        p = out / f"{manifest.subcommand}-{manifest.run_id}.{suffix}"
        p.write_text(text)
        paths.append(str(p))
    manifest.outputs = paths
    return paths
