"""Deterministic SVG renders of a world state, plus PNG rasterization."""
from __future__ import annotations

import io
import math
from xml.sax.saxutils import escape

from . import geometry as geo
from .geometry import Shape

SCALE = 200.0  # pixels per meter
PAD = 20.0

COLORS = {
    "static-tall": "#5b5b5b",
    "static-low": "#d9cbb0",
    "surface": "#f6f1e4",
    "space": "#e9eef6",
    "joint": "#8a5a2b",
    "movable": "#3f8f4f",
    "robot": "#2f5fa7",
    "bbox": "#d02020",
}


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _xy(p) -> tuple[float, float]:
    from .world import WORLD_H

    return PAD + p[0] * SCALE, PAD + (WORLD_H - p[1]) * SCALE


def _shape_svg(s: Shape, fill: str, extra: str = "") -> str:
    if len(s.verts) == 1:
        x, y = _xy(s.verts[0])
        return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(s.radius * SCALE)}" fill="{fill}"{extra}/>'
    if len(s.verts) == 2 or s.radius > 0:
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in map(_xy, s.verts))
        w = _fmt(max(2 * s.radius * SCALE, 1.0))
        return (
            f'<polyline points="{pts}" fill="none" stroke="{fill}" stroke-width="{w}" '
            f'stroke-linecap="round"{extra}/>'
        )
    pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in map(_xy, s.verts))
    return f'<polygon points="{pts}" fill="{fill}"{extra}/>'


def _bbox(label: str, aabb, kind: str) -> list[str]:
    x0, y0, x1, y1 = aabb
    (px0, py1), (px1, py0) = _xy((x0, y0)), _xy((x1, y1))
    return [
        f'<rect class="bbox {kind}" data-name="{escape(label)}" x="{_fmt(px0)}" y="{_fmt(py0)}" '
        f'width="{_fmt(px1 - px0)}" height="{_fmt(py1 - py0)}" fill="none" stroke="{COLORS["bbox"]}" '
        'stroke-width="1"/>',
        f'<text x="{_fmt(px0 + 2)}" y="{_fmt(py0 - 2)}" font-size="9" font-family="monospace">'
        f"{escape(label.replace('_', ' '))}</text>",
    ]


def render_svg(state, title: str = "") -> str:
    """Top-down render with labeled boxes for every movable, joint and surface."""
    from .world import SURFACE, WORLD_H, WORLD_W, attachments

    scene = state.scene
    w, h = WORLD_W * SCALE + 2 * PAD, WORLD_H * SCALE + 2 * PAD
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'<rect x="0" y="0" width="{_fmt(w)}" height="{_fmt(h)}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    for s in scene.statics:
        out.append(_shape_svg(s.shape, COLORS["static-tall" if s.tall else "static-low"]))
    for r in scene.regions:
        shape = state.region_shape(r.id)
        kind = "surface" if r.kind == SURFACE else "space"
        dash = "" if r.kind == SURFACE else ' stroke="#7a8aa6" stroke-dasharray="4 3"'
        out.append(_shape_svg(shape, COLORS[kind], dash))
    for j in scene.joints:
        s = state.joint_shape(j.id)
        if s is not None:
            out.append(_shape_svg(s, COLORS["joint"]))
        hx, hy = state.handle_point(j.id)
        out.append(_shape_svg(geo.disc(hx, hy, 0.015), COLORS["joint"]))
    for mid, s in state.resting_bodies:
        out.append(_shape_svg(s, COLORS["movable"]))
    q = state.base
    out.append(_shape_svg(geo.disc(q[0], q[1], scene.robot.base_radius), COLORS["robot"], ' fill-opacity="0.6"'))
    tip = (q[0] + scene.robot.base_radius * math.cos(q[2]), q[1] + scene.robot.base_radius * math.sin(q[2]))
    out.append(_shape_svg(geo.capsule((q[0], q[1]), tip, 0.01), "#ffffff"))
    for _, s in attachments(state, q):
        out.append(_shape_svg(s, COLORS["movable"], ' fill-opacity="0.7"'))

    # annotation layer: one labeled box per movable, joint and surface
    for m in scene.movables:
        out += _bbox(m.id, state.movable_shape(m.id).aabb, "movable")
    for j in scene.joints:
        s = state.joint_shape(j.id)
        if s is None:
            hx, hy = state.handle_point(j.id)
            s = geo.disc(hx, hy, 0.03)
        out += _bbox(j.id, s.aabb, "joint")
    for r in scene.surfaces:
        out += _bbox(r.id, state.region_shape(r.id).aabb, "surface")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_to_png(state) -> bytes:
    """Raster render for image-capable chat endpoints."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt
    from matplotlib.patches import Circle, Polygon, Rectangle

    from .world import WORLD_H, WORLD_W

    fig, ax = plt.subplots(figsize=(WORLD_W * 2, WORLD_H * 2), dpi=80)
    ax.set_xlim(0, WORLD_W)
    ax.set_ylim(0, WORLD_H)
    ax.set_aspect("equal")
    ax.axis("off")

    def draw(s: Shape, color, **kw):
        if len(s.verts) == 1:
            ax.add_patch(Circle(s.verts[0], s.radius, color=color, **kw))
        elif len(s.verts) == 2:
            ax.plot(*zip(*s.verts), color=color, linewidth=max(1.0, s.radius * 160), **kw)
        else:
            ax.add_patch(Polygon(s.verts, closed=True, color=color, **kw))

    scene = state.scene
    for s in scene.statics:
        draw(s.shape, COLORS["static-tall" if s.tall else "static-low"])
    for r in scene.regions:
        draw(state.region_shape(r.id), COLORS["surface" if r.kind == "surface" else "space"])
    for j in scene.joints:
        s = state.joint_shape(j.id)
        if s is not None:
            draw(s, COLORS["joint"])
    for _, s in state.resting_bodies:
        draw(s, COLORS["movable"])
    draw(geo.disc(state.base[0], state.base[1], scene.robot.base_radius), COLORS["robot"], alpha=0.6)
    labeled = [(m.id, state.movable_shape(m.id).aabb) for m in scene.movables]
    labeled += [(r.id, state.region_shape(r.id).aabb) for r in scene.surfaces]
    for j in scene.joints:
        s = state.joint_shape(j.id)
        if s is None:
            h = state.handle_point(j.id)
            s = geo.disc(h[0], h[1], 0.03)
        labeled.append((j.id, s.aabb))
    for name, (x0, y0, x1, y1) in labeled:
        ax.add_patch(Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False, edgecolor=COLORS["bbox"], linewidth=0.8))
        ax.text(x0, y1 + 0.01, name.replace("_", " "), fontsize=6)
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    return buf.getvalue()
