"""Build the bundled MNIST subset (IDX format) from the `mnist` npm package.

The npm package (https://www.npmjs.com/package/mnist, MIT) ships 10,000 MNIST
digits as JSON arrays of pixel intensities rounded to three decimals. Rounding
to three decimals keeps round(v * 255) equal to the original byte, so the IDX
files written here carry the original 8-bit pixels.

usage: python3 make_mnist_subset.py <npm-package-dir> <out-dir>
"""
import json
import random
import struct
import sys
from pathlib import Path

TRAIN = 1000
TEST = 500
SEED = 20190521


def main(pkg, out):
    samples = []
    for digit in range(10):
        raw = json.loads((Path(pkg) / "src" / "digits" / f"{digit}.json").read_text())["data"]
        for i in range(len(raw) // 784):
            pixels = bytes(round(v * 255) for v in raw[i * 784:(i + 1) * 784])
            samples.append((pixels, digit))
    random.Random(SEED).shuffle(samples)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for prefix, part in (("train", samples[:TRAIN]), ("t10k", samples[TRAIN:TRAIN + TEST])):
        with open(out / f"{prefix}-images-idx3-ubyte", "wb") as f:
            f.write(struct.pack(">IIII", 0x803, len(part), 28, 28))
            for pixels, _ in part:
                f.write(pixels)
        with open(out / f"{prefix}-labels-idx1-ubyte", "wb") as f:
            f.write(struct.pack(">II", 0x801, len(part)))
            f.write(bytes(label for _, label in part))
    print(f"pool={len(samples)} train={TRAIN} test={TEST}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
