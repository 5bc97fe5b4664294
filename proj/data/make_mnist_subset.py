#!/usr/bin/env python3
"""Build a class-balanced MNIST subset in IDX format.

The source is the 5000-image MNIST sample bundled with the `mlxtend`
wheel (mlxtend/data/data/mnist_5k.csv.gz, BSD-3 licensed, originally from
the MNIST database). The first `--per-class` images of each digit, in file
order, are written as standard big-endian IDX files.

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 data/make_mnist_subset.py /tmp/mlx/mlxtend-*.whl --per-class 100
"""
import argparse
import gzip
import struct
import zipfile
from pathlib import Path


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("--per-class", type=int, default=100)
    ap.add_argument("--out", default=str(Path(__file__).parent))
    args = ap.parse_args()

    raw = zipfile.ZipFile(args.wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    rows = gzip.decompress(raw).decode().strip().split("\n")

    counts = [0] * 10
    images, labels = [], []
    for row in rows:
        values = [int(float(v)) for v in row.split(",")]
        label = values[-1]
        if counts[label] >= args.per_class:
            continue
        counts[label] += 1
        images.append(bytes(values[:-1]))
        labels.append(label)

    out = Path(args.out)
    n = len(images)
    with open(out / f"mnist-{n}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for img in images:
            f.write(img)
    with open(out / f"mnist-{n}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(labels))
    print(f"wrote {n} images, per-class counts {counts}")


if __name__ == "__main__":
    main()
