#!/usr/bin/env python3
"""Convert the LASA handwriting .mat files into the plain-text corpus layout.

Each shape has 7 demonstrations of 1000 samples. Output is one CSV per demo
(`<Shape>_<k>.csv`, header `t,x,y`) plus `manifest.json`.

    python3 tools/lasa_to_corpus.py --mat-dir .../DataSet --out data/lasa \
        --stride 10 --train GShape,CShape,NShape --test JShape
"""
import argparse
import json
import os

import numpy as np
from scipy.io import loadmat


def demos_of(path):
    mat = loadmat(path)
    out = []
    for demo in mat["demos"][0]:
        rec = demo[0][0]
        fields = rec.dtype.names
        pos = np.asarray(rec[fields.index("pos")], dtype=float)
        t = np.asarray(rec[fields.index("t")], dtype=float).reshape(-1)
        out.append((t, pos))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mat-dir", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--stride", type=int, default=10)
    ap.add_argument("--shapes", default="", help="comma list; default all")
    ap.add_argument("--train", default="", help="shapes whose demos go to train_ids")
    ap.add_argument("--test", default="", help="shapes whose demos go to test_ids")
    args = ap.parse_args()

    shapes = sorted(f[:-4] for f in os.listdir(args.mat_dir) if f.endswith(".mat"))
    if args.shapes:
        keep = set(args.shapes.split(","))
        shapes = [s for s in shapes if s in keep]
    train = set(filter(None, args.train.split(",")))
    test = set(filter(None, args.test.split(",")))
    os.makedirs(args.out, exist_ok=True)

    train_ids, test_ids = [], []
    for shape in shapes:
        for k, (t, pos) in enumerate(demos_of(os.path.join(args.mat_dir, shape + ".mat")), 1):
            ident = f"{shape}_{k}"
            idx = np.arange(0, pos.shape[1], args.stride)
            with open(os.path.join(args.out, ident + ".csv"), "w") as fh:
                fh.write("t,x,y\n")
                for i in idx:
                    fh.write(f"{t[i]:.17g},{pos[0, i]:.17g},{pos[1, i]:.17g}\n")
            if shape in train:
                train_ids.append(ident)
            elif shape in test:
                test_ids.append(ident)

    manifest = {"name": "lasa_handwriting", "n": 2, "train_ids": train_ids, "test_ids": test_ids}
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
