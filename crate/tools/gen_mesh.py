#!/usr/bin/env python3
"""Generate the geometry-fitting coarse mesh for a reactor geometry file.

Needs the `triangle` package (pip install triangle). The output is the plain
text format read by `tokamak-uq`:

    nodes N
    x y axis_flag gamma_flag        (N lines)
    elements M
    v1 v2 v3 region_tag             (M lines, counter-clockwise)

Region tags: 0 vacuum, 1 inside limiter, 2 between walls, 100+i coil i.
"""

import argparse
import json
import math

import numpy as np
import triangle


def point_in_polygon(poly, p):
    inside = False
    j = len(poly) - 1
    for i in range(len(poly)):
        (xi, yi), (xj, yj) = poly[i], poly[j]
        if (yi > p[1]) != (yj > p[1]):
            xc = xi + (p[1] - yi) * (xj - xi) / (yj - yi)
            if p[0] < xc:
                inside = not inside
        j = i
    return inside


def interior_point(poly, avoid):
    """A point inside `poly` but outside every polygon in `avoid`."""
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    for fy in np.linspace(0.05, 0.95, 37):
        y = min(ys) + fy * (max(ys) - min(ys))
        for fx in np.linspace(0.02, 0.98, 97):
            x = min(xs) + fx * (max(xs) - min(xs))
            if point_in_polygon(poly, (x, y)) and not any(point_in_polygon(a, (x, y)) for a in avoid):
                return (x, y)
    raise ValueError("no interior point found")


def build(geom, h_plasma, h_wall, h_coil, h_far, n_arc):
    rho = geom["gamma_radius"]
    verts = []
    segs = []
    index = {}

    def vid(p):
        key = (round(p[0], 12), round(p[1], 12))
        if key not in index:
            index[key] = len(verts)
            verts.append(p)
        return index[key]

    def add_loop(pts, closed=True):
        ids = [vid(p) for p in pts]
        n = len(ids) if closed else len(ids) - 1
        for k in range(n):
            segs.append((ids[k], ids[(k + 1) % len(ids)]))

    # Gamma arc from the bottom pole to the top pole, then the axis back down.
    arc = [(rho * math.cos(t), rho * math.sin(t)) for t in np.linspace(-math.pi / 2, math.pi / 2, n_arc + 1)]
    arc[0] = (0.0, -rho)
    arc[-1] = (0.0, rho)
    n_axis = int(math.ceil(2 * rho / h_far))
    axis = [(0.0, rho - 2 * rho * k / n_axis) for k in range(1, n_axis)]
    add_loop(arc + axis)

    limiter = [tuple(p) for p in geom["limiter"]]
    vessel = [tuple(p) for p in geom["vessel_outer"]]
    add_loop(limiter)
    if vessel:
        add_loop(vessel)
    coil_rects = []
    for c in geom["coils"]:
        (x, y), w, h = c["center"], c["width"], c["height"]
        rect = [(x - w / 2, y - h / 2), (x + w / 2, y - h / 2), (x + w / 2, y + h / 2), (x - w / 2, y + h / 2)]
        coil_rects.append(rect)
        add_loop(rect)

    a_plasma = math.sqrt(3) / 4 * h_plasma**2
    a_wall = math.sqrt(3) / 4 * h_wall**2
    a_coil = math.sqrt(3) / 4 * h_coil**2
    regions = []
    lp = interior_point(limiter, [])
    regions.append([lp[0], lp[1], 1, a_plasma])
    if vessel:
        bp = interior_point(vessel, [limiter])
        regions.append([bp[0], bp[1], 2, a_wall])
    for i, (c, rect) in enumerate(zip(geom["coils"], coil_rects)):
        regions.append([c["center"][0], c["center"][1], 100 + i, a_coil])
    vp = interior_point(arc + axis, [vessel or limiter] + coil_rects)
    regions.append([vp[0], vp[1], 0, -1])

    a_far = math.sqrt(3) / 4 * h_far**2
    pslg = dict(vertices=np.array(verts), segments=np.array(segs), regions=np.array(regions))
    out = triangle.triangulate(pslg, "pq30Aaa%.6fY" % a_far)
    return out, rho


def write(out, rho, path):
    v = out["vertices"]
    t = out["triangles"]
    attr = out["triangle_attributes"][:, 0].astype(int)
    with open(path, "w") as f:
        f.write("nodes %d\n" % len(v))
        for x, y in v:
            axis = 1 if x == 0.0 else 0
            gamma = 1 if abs(math.hypot(x, y) - rho) < 1e-9 * rho else 0
            f.write("%r %r %d %d\n" % (float(x), float(y), axis, gamma))
        f.write("elements %d\n" % len(t))
        for tri, a in zip(t, attr):
            f.write("%d %d %d %d\n" % (tri[0], tri[1], tri[2], a))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("geometry")
    ap.add_argument("output")
    ap.add_argument("--h-plasma", type=float, default=0.26)
    ap.add_argument("--h-wall", type=float, default=0.4)
    ap.add_argument("--h-coil", type=float, default=0.45)
    ap.add_argument("--h-far", type=float, default=1.4)
    ap.add_argument("--n-arc", type=int, default=48)
    a = ap.parse_args()
    geom = json.load(open(a.geometry))
    out, rho = build(geom, a.h_plasma, a.h_wall, a.h_coil, a.h_far, a.n_arc)
    write(out, rho, a.output)
    print("%d nodes, %d elements" % (len(out["vertices"]), len(out["triangles"])))


if __name__ == "__main__":
    main()
