#!/usr/bin/env python3
"""Write a procedural demo object (bumpy sphere) as an ASCII OBJ file."""

import argparse
from pathlib import Path

from depthforge.geometry import write_obj
from depthforge.meshes import bumpy_sphere


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="output .obj path")
    ap.add_argument("--subdivisions", type=int, default=3)
    ap.add_argument("--radius", type=float, default=80.0)
    ap.add_argument("--bump", type=float, default=0.35)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    mesh = bumpy_sphere(args.subdivisions, args.radius, args.bump, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(write_obj(mesh))
    print(f"wrote {out} ({mesh.n_vertices} vertices, {mesh.n_triangles} triangles)")


if __name__ == "__main__":
    main()
