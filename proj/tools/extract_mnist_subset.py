#!/usr/bin/env python3
"""Write the 5,000-image MNIST subset bundled with mlxtend as IDX files.

The mlxtend wheel ships ``mnist_5k.csv.gz`` (500 training images per digit,
784 pixel columns followed by the label). This script converts it to the
standard big-endian IDX container so the C++ loader reads it like any other
MNIST distribution:

    python3 tools/extract_mnist_subset.py --wheel mlxtend-*.whl --out data/mnist5k

Without ``--wheel`` the installed ``mlxtend`` package is used.
"""

import argparse
import gzip
import io
import pathlib
import struct
import zipfile

import numpy as np

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_csv_bytes(wheel):
    if wheel:
        with zipfile.ZipFile(wheel) as zf:
            return gzip.decompress(zf.read(MEMBER))
    import mlxtend  # noqa: PLC0415

    path = pathlib.Path(mlxtend.__file__).parent / "data" / "data" / "mnist_5k.csv.gz"
    return gzip.decompress(path.read_bytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wheel", help="path to an mlxtend wheel")
    ap.add_argument("--out", default="data/mnist5k")
    args = ap.parse_args()

    table = np.loadtxt(io.BytesIO(read_csv_bytes(args.wheel)), delimiter=",")
    pixels = table[:, :784].astype(np.uint8)
    labels = table[:, 784].astype(np.uint8)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = len(labels)
    with open(out / "mnist5k-images-idx3-ubyte", "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        fh.write(pixels.tobytes())
    with open(out / "mnist5k-labels-idx1-ubyte", "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, n))
        fh.write(labels.tobytes())
    print(f"wrote {n} images to {out}")


if __name__ == "__main__":
    main()
