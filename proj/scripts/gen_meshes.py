#!/usr/bin/env python3
"""Generate the bundled fixture triangulations under data/meshes/.

Horseshoe meshes are built in the (along-spine, distance-to-spine) chart of
the horseshoe, triangulated there, mapped back to the plane and then made
locally Delaunay with Lawson flips.  Vertex counts are chosen so the meshes
have 90/74, 158/114 and 286/186 triangles/vertices.

Usage: python3 scripts/gen_meshes.py [outdir]
"""
import math
import sys
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

R_SPINE = 0.5
HALF_WIDTH = 0.4          # r - r0 with r0 = 0.1
ARM = 3.0
Q = math.pi * R_SPINE / 2.0


def chart_to_xy(a, d):
    if a >= Q:
        return a - Q, R_SPINE + d
    if a <= -Q:
        return -Q - a, -R_SPINE - d
    t = a / R_SPINE
    rho = R_SPINE + d
    return -rho * math.cos(t), rho * math.sin(t)


def farthest_points(seed_pts, cand, count):
    chosen = []
    dmin = np.min(np.linalg.norm(cand[:, None, :] - seed_pts[None, :, :], axis=2), axis=1)
    for _ in range(count):
        k = int(np.argmax(dmin))
        chosen.append(k)
        dmin = np.minimum(dmin, np.linalg.norm(cand - cand[k], axis=1))
    return cand[chosen]


def ccw(p, tri):
    a, b, c = p[tri[0]], p[tri[1]], p[tri[2]]
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def orient(p, tris):
    out = []
    for t in tris:
        t = list(t)
        if ccw(p, t) < 0:
            t[1], t[2] = t[2], t[1]
        out.append(t)
    return out


def in_circle(p, a, b, c, d):
    m = np.array([[p[a][0] - p[d][0], p[a][1] - p[d][1], (p[a][0] - p[d][0]) ** 2 + (p[a][1] - p[d][1]) ** 2],
                  [p[b][0] - p[d][0], p[b][1] - p[d][1], (p[b][0] - p[d][0]) ** 2 + (p[b][1] - p[d][1]) ** 2],
                  [p[c][0] - p[d][0], p[c][1] - p[d][1], (p[c][0] - p[d][0]) ** 2 + (p[c][1] - p[d][1]) ** 2]])
    return np.linalg.det(m) > 1e-14


def lawson_flips(p, tris):
    tris = [list(t) for t in tris]
    changed = True
    sweeps = 0
    while changed and sweeps < 200:
        changed = False
        sweeps += 1
        edges = {}
        for ti, t in enumerate(tris):
            for e in range(3):
                u, v = t[e], t[(e + 1) % 3]
                edges.setdefault((min(u, v), max(u, v)), []).append(ti)
        for (u, v), owners in edges.items():
            if len(owners) != 2:
                continue
            t1, t2 = tris[owners[0]], tris[owners[1]]
            if (u not in t2) or (v not in t2) or (u not in t1) or (v not in t1):
                continue  # stale after an earlier flip in this sweep
            w1 = [x for x in t1 if x not in (u, v)][0]
            w2 = [x for x in t2 if x not in (u, v)][0]
            if not in_circle(p, *t1, w2):
                continue
            n1, n2 = [w1, w2, u], [w2, w1, v]
            if ccw(p, n1) <= 0:
                n1 = [w1, u, w2]
            if ccw(p, n2) <= 0:
                n2 = [w2, v, w1]
            if ccw(p, n1) <= 1e-12 or ccw(p, n2) <= 1e-12:
                continue
            tris[owners[0]], tris[owners[1]] = n1, n2
            changed = True
            break
    return tris


def edge_counts(tris):
    edges = {}
    for t in tris:
        for e in range(3):
            u, v = t[e], t[(e + 1) % 3]
            k = (min(u, v), max(u, v))
            edges[k] = edges.get(k, 0) + 1
    return edges


def shape_params(p, tris):
    out = []
    for t in tris:
        a, b, c = (np.asarray(p[i]) for i in t)
        la, lb, lc = np.linalg.norm(b - c), np.linalg.norm(a - c), np.linalg.norm(a - b)
        area = 0.5 * abs(ccw(p, t))
        s = 0.5 * (la + lb + lc)
        out.append(max(la, lb, lc) / (area / s))
    return np.array(out)


def horseshoe(n_arm, n_outer, n_inner, n_interior, seed=1):
    amax = Q + ARM
    chart = []
    for n_bend, d in ((n_outer, HALF_WIDTH), (n_inner, -HALF_WIDTH)):
        a_vals = list(np.linspace(-amax, -Q, n_arm + 1))[:-1]
        a_vals += list(np.linspace(-Q, Q, n_bend + 1))[:-1]
        a_vals += list(np.linspace(Q, amax, n_arm + 1))
        chart += [(a, d) for a in a_vals]
    chart += [(-amax, 0.0), (amax, 0.0)]
    boundary = np.array([chart_to_xy(a, d) for a, d in chart])

    rng = np.random.default_rng(seed)
    ca = rng.uniform(-amax, amax, 40000)
    cd = rng.uniform(-HALF_WIDTH, HALF_WIDTH, 40000)
    keep = (np.abs(cd) < HALF_WIDTH * 0.8) & (np.abs(ca) < amax - 0.08)
    cand_chart = np.stack([ca[keep], cd[keep]], axis=1)
    cand_xy = np.array([chart_to_xy(a, d) for a, d in cand_chart])
    chosen = farthest_points(boundary, cand_xy, n_interior)
    # recover chart coordinates of the chosen interior points
    idx = [int(np.argmin(np.linalg.norm(cand_xy - c, axis=1))) for c in chosen]
    chart_all = np.vstack([np.array(chart), cand_chart[idx]])
    xy = np.vstack([boundary, chosen])

    tri = Delaunay(chart_all)
    assert len(tri.coplanar) == 0
    tris = orient(xy, tri.simplices.tolist())
    assert all(ccw(xy, t) > 0 for t in tris), "inverted triangle after mapping"
    tris = lawson_flips(xy, tris)
    return xy, tris, len(boundary)


def lattice(cells=4):
    xs = np.linspace(0.0, 1.0, cells + 1)
    pts = np.array([(x, y) for y in xs for x in xs])
    tris = []
    for j in range(cells):
        for i in range(cells):
            v00 = j * (cells + 1) + i
            v10, v01, v11 = v00 + 1, v00 + cells + 1, v00 + cells + 2
            tris += [[v00, v10, v11], [v00, v11, v01]]
    return pts, tris, 4 * cells


US_OUTLINE = [
    (-124.6, 48.4), (-123.0, 46.2), (-124.2, 42.0), (-124.3, 40.3), (-122.4, 37.2),
    (-120.6, 34.6), (-117.1, 32.6), (-114.7, 32.7), (-111.0, 31.3), (-108.2, 31.3),
    (-106.5, 31.8), (-104.5, 29.6), (-103.0, 29.0), (-101.4, 29.8), (-99.5, 27.5),
    (-97.4, 25.9), (-97.3, 27.8), (-94.7, 29.4), (-93.8, 29.7), (-90.2, 29.1),
    (-89.4, 30.3), (-86.5, 30.4), (-84.3, 30.0), (-82.7, 27.5), (-81.1, 25.2),
    (-80.0, 26.9), (-81.3, 30.7), (-79.0, 33.6), (-75.5, 35.2), (-76.0, 37.0),
    (-74.0, 40.4), (-71.0, 41.5), (-70.0, 41.8), (-70.7, 43.1), (-67.0, 44.8),
    (-67.8, 47.1), (-69.2, 47.4), (-71.5, 45.0), (-75.0, 45.0), (-76.6, 43.6),
    (-79.2, 43.3), (-82.5, 41.7), (-83.5, 46.0), (-88.3, 48.3), (-95.2, 49.0),
]


def us_like(n_boundary=70, n_interior=97, seed=3):
    poly = np.array(US_OUTLINE)
    seg = np.linalg.norm(np.roll(poly, -1, axis=0) - poly, axis=1)
    total = seg.sum()
    # distribute boundary points by arc length, keeping polygon corners
    per = np.maximum(1, np.round(seg / total * n_boundary).astype(int))
    while per.sum() > n_boundary:
        per[np.argmax(per)] -= 1
    while per.sum() < n_boundary:
        per[np.argmax(seg / per)] += 1
    boundary = []
    for i, k in enumerate(per):
        a, b = poly[i], poly[(i + 1) % len(poly)]
        for s in range(k):
            boundary.append(a + (b - a) * s / k)
    boundary = np.array(boundary)

    from matplotlib.path import Path as MPath
    path = MPath(poly)
    rng = np.random.default_rng(seed)
    cand = np.stack([rng.uniform(-125, -67, 60000), rng.uniform(25, 49.5, 60000)], axis=1)
    cand = cand[path.contains_points(cand, radius=-0.8)]
    interior = farthest_points(boundary, cand, n_interior)
    xy = np.vstack([boundary, interior])
    tri = Delaunay(xy)
    tris = []
    for t in tri.simplices.tolist():
        c = xy[t].mean(axis=0)
        if path.contains_point(c):
            tris.append(t)
    tris = orient(xy, tris)
    return xy, tris, len(boundary)


def check(name, xy, tris, n_boundary, expect=None):
    ec = edge_counts(tris)
    nb = sum(1 for v in ec.values() if v == 1)
    bad = sum(1 for v in ec.values() if v > 2)
    used = {v for t in tris for v in t}
    nu = shape_params(xy, tris)
    print(f"{name}: V={len(xy)} T={len(tris)} boundary_edges={nb} (expected {n_boundary}) "
          f"bad={bad} unused={len(xy) - len(used)} max_nu={nu.max():.2f}")
    assert bad == 0 and nb == n_boundary and len(used) == len(xy)
    if expect:
        assert (len(tris), len(xy)) == expect, (len(tris), len(xy))


def write(outdir, name, xy, tris):
    with open(outdir / f"{name}_vertices.csv", "w") as f:
        f.write("x,y\n")
        for x, y in xy:
            f.write(f"{x:.17g},{y:.17g}\n")
    with open(outdir / f"{name}_triangles.csv", "w") as f:
        f.write("v1,v2,v3\n")
        for t in tris:
            f.write(f"{t[0]},{t[1]},{t[2]}\n")


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "meshes"
    outdir.mkdir(parents=True, exist_ok=True)
    specs = {
        "tri1": ((10, 9, 3, 18), (90, 74)),
        "tri2": ((12, 12, 4, 46), (158, 114)),
        "tri3": ((15, 14, 6, 102), (286, 186)),
    }
    for name, (args, expect) in specs.items():
        xy, tris, nb = horseshoe(*args)
        check(name, xy, tris, nb, expect)
        write(outdir, name, xy, tris)
    xy, tris, nb = lattice()
    check("lattice", xy, tris, nb, (32, 25))
    write(outdir, "lattice", xy, tris)
    xy, tris, nb = us_like()
    check("usa", xy, tris, nb, (262, 167))
    write(outdir, "usa", xy, tris)


if __name__ == "__main__":
    main()
