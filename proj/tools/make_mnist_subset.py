#!/usr/bin/env python3
"""Write a small MNIST subset in IDX format.

Source: the `mnist` npm package (src/digits/<d>.json, 784 floats per image in
[0, 1] rounded to three decimals). Images are re-quantized to u8 and written as
train/test IDX files. Output is deterministic.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist-subset
"""
import json
import pathlib
import struct
import sys

TRAIN_PER_DIGIT = 400
TEST_PER_DIGIT = 100


def write_idx(path, type_code, dims, payload):
    with open(path, "wb") as f:
        f.write(bytes([0, 0, type_code, len(dims)]))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(payload)


def main():
    src = pathlib.Path(sys.argv[1])
    out = pathlib.Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    per_digit = {}
    for d in range(10):
        data = json.loads((src / f"{d}.json").read_text())["data"]
        images = [data[i:i + 784] for i in range(0, len(data), 784)]
        per_digit[d] = images
    splits = {"train": (0, TRAIN_PER_DIGIT), "t10k": (TRAIN_PER_DIGIT, TRAIN_PER_DIGIT + TEST_PER_DIGIT)}
    for name, (lo, hi) in splits.items():
        pixels = bytearray()
        labels = bytearray()
        # interleave digits so any prefix is class-balanced
        for i in range(lo, hi):
            for d in range(10):
                img = per_digit[d][i]
                pixels.extend(min(255, max(0, round(v * 255))) for v in img)
                labels.append(d)
        n = len(labels)
        write_idx(out / f"{name}-images-idx3-ubyte", 0x08, [n, 28, 28], bytes(pixels))
        write_idx(out / f"{name}-labels-idx1-ubyte", 0x08, [n], bytes(labels))
        print(name, n)


if __name__ == "__main__":
    main()
