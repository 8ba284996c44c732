#!/usr/bin/env python3
"""Builds the bundled INT8 LeNet fixture and its MNIST holdout set.

Source images: the npm package `mnist@1.1.0` (10,000 MNIST digits stored as
pixel/255 rounded to 3 decimals in src/digits/<d>.json). Get it with

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz

The digits are shuffled with a fixed seed; NUM_TRAIN go to training and the
rest are written as IDX files for evaluation. Training is float (PyTorch),
quantization is post-training: symmetric per-tensor int8 weights, int8
activations with zero point 0 (all activations follow a ReLU), int32 biases.

The script ends by running an integer reference of the exact-multiplier
pipeline and storing its logits for the first images, which the C++ tests
compare against.
"""

import argparse
import json
import struct
import zlib
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

SEED = 20240917
NUM_TRAIN = 8000
INPUT_SCALE = 1.0 / 127.0
GOLDEN_IMAGES = 32


def load_npm_digits(root: Path):
    images, labels = [], []
    for d in range(10):
        flat = json.loads((root / f"{d}.json").read_text())["data"]
        arr = np.rint(np.asarray(flat, dtype=np.float64) * 255.0).clip(0, 255).astype(np.uint8)
        arr = arr.reshape(-1, 28 * 28)
        images.append(arr)
        labels.append(np.full(len(arr), d, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    # Drop exact duplicates, keeping first occurrence.
    _, first = np.unique(images, axis=0, return_index=True)
    keep = np.sort(first)
    return images[keep], labels[keep]


class LeNet(nn.Module):
    def __init__(self):
        super().__init__()
        self.c1 = nn.Conv2d(1, 6, 5)
        self.c2 = nn.Conv2d(6, 16, 5)
        self.f1 = nn.Linear(256, 64)
        self.f2 = nn.Linear(64, 10)

    def forward(self, x, taps=None):
        x = F.relu(self.c1(x))
        if taps is not None:
            taps.append(x)
        x = F.max_pool2d(x, 2)
        x = F.relu(self.c2(x))
        if taps is not None:
            taps.append(x)
        x = F.max_pool2d(x, 2).flatten(1)
        x = F.relu(self.f1(x))
        if taps is not None:
            taps.append(x)
        return self.f2(x)


def train(model, x, y, epochs):
    torch.manual_seed(SEED)
    opt = torch.optim.Adam(model.parameters(), lr=2e-3)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, epochs)
    n = len(x)
    for ep in range(epochs):
        model.train()
        perm = torch.randperm(n)
        total = 0.0
        for i in range(0, n, 64):
            idx = perm[i : i + 64]
            xb = x[idx]
            # Small random shifts as augmentation.
            dx, dy = np.random.randint(-2, 3, size=2)
            xb = torch.roll(xb, shifts=(int(dy), int(dx)), dims=(2, 3))
            loss = F.cross_entropy(model(xb), y[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        sched.step()
        print(f"epoch {ep + 1}: loss {total / n:.4f}")


def round_half_away(v):
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def quantize_weight(w):
    scale = float(np.abs(w).max()) / 127.0
    q = np.clip(round_half_away(w / scale), -127, 127).astype(np.int8)
    return q, scale


def im2col(x, kh, kw):
    c, h, w = x.shape
    oh, ow = h - kh + 1, w - kw + 1
    cols = np.empty((oh * ow, c * kh * kw), dtype=np.int64)
    for oy in range(oh):
        for ox in range(ow):
            cols[oy * ow + ox] = x[:, oy : oy + kh, ox : ox + kw].reshape(-1)
    return cols, oh, ow


def requant(acc, mult, relu):
    q = round_half_away(acc.astype(np.float64) * mult)
    return np.clip(q, 0 if relu else -128, 127).astype(np.int64)


def int_forward(layers, pixels):
    """Integer reference with the same rounding rules as the C++ runtime."""
    x = np.clip(round_half_away((pixels.astype(np.float64) / 255.0) / INPUT_SCALE), -128, 127)
    x = x.astype(np.int64).reshape(1, 28, 28)
    s_in = INPUT_SCALE
    for L in layers:
        if L["type"] == "conv2d":
            cols, oh, ow = im2col(x, *L["kernel"])
            w = L["q"].astype(np.int64).reshape(L["q"].shape[0], -1)
            acc = cols @ w.T + L["b"][None, :]
            mult = (s_in * L["w_scale"]) / L["out_scale"]
            x = requant(acc, mult, True).T.reshape(-1, oh, ow)
            s_in = L["out_scale"]
        elif L["type"] == "maxpool":
            c, h, w = x.shape
            x = x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))
        elif L["type"] == "flatten":
            x = x.reshape(-1)
        elif L["type"] == "dense":
            acc = L["q"].astype(np.int64) @ x + L["b"]
            if L["out_scale"] is None:
                return acc.astype(np.float64) * (s_in * L["w_scale"])
            x = requant(acc, (s_in * L["w_scale"]) / L["out_scale"], True)
            s_in = L["out_scale"]
    raise AssertionError("model has no logits layer")


def write_idx(path: Path, images, labels_path: Path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--digits", type=Path, required=True, help="package/src/digits directory of mnist@1.1.0")
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    ap.add_argument("--epochs", type=int, default=12)
    args = ap.parse_args()

    np.random.seed(SEED)
    torch.manual_seed(SEED)
    torch.set_num_threads(1)

    images, labels = load_npm_digits(args.digits)
    order = np.random.RandomState(SEED).permutation(len(images))
    images, labels = images[order], labels[order]
    tr_x, tr_y = images[:NUM_TRAIN], labels[:NUM_TRAIN]
    te_x, te_y = images[NUM_TRAIN:], labels[NUM_TRAIN:]
    print(f"{len(images)} unique digits: {len(tr_x)} train, {len(te_x)} holdout")

    def to_tensor(a):
        return torch.tensor(a.reshape(-1, 1, 28, 28), dtype=torch.float32) / 255.0

    model = LeNet()
    train(model, to_tensor(tr_x), torch.tensor(tr_y, dtype=torch.long), args.epochs)
    model.eval()

    # Activation ranges from a calibration slice of the training data.
    with torch.no_grad():
        taps = []
        model(to_tensor(tr_x[:2000]), taps)
        act_scales = [float(np.percentile(t.numpy(), 99.99)) / 127.0 for t in taps]
        float_acc = (model(to_tensor(te_x)).argmax(1).numpy() == te_y).mean() * 100

    params = [
        ("conv2d", model.c1, act_scales[0]),
        ("conv2d", model.c2, act_scales[1]),
        ("dense", model.f1, act_scales[2]),
        ("dense", model.f2, None),
    ]
    blob = bytearray()
    layers, manifest_layers = [], []
    s_in = INPUT_SCALE
    for kind, mod, out_scale in params:
        w = mod.weight.detach().numpy().astype(np.float64)
        b = mod.bias.detach().numpy().astype(np.float64)
        q, w_scale = quantize_weight(w)
        bq = round_half_away(b / (s_in * w_scale)).astype(np.int32)
        w_off = len(blob)
        blob += q.tobytes()
        b_off = len(blob)
        blob += bq.astype("<i4").tobytes()
        entry = {
            "type": kind,
            "relu": out_scale is not None,
            "weight": {"offset": w_off, "shape": list(q.shape), "scale": w_scale, "zero_point": 0},
            "bias": {"offset": b_off, "count": int(len(bq))},
            "output": None if out_scale is None else {"scale": out_scale, "zero_point": 0},
        }
        if kind == "conv2d":
            entry.update(in_channels=q.shape[1], out_channels=q.shape[0], kernel=[q.shape[2], q.shape[3]],
                         stride=1, padding=0)
        else:
            entry.update(in_features=q.shape[1], out_features=q.shape[0])
        layers.append({"type": kind, "q": q, "b": bq.astype(np.int64), "w_scale": w_scale, "out_scale": out_scale,
                       "kernel": list(q.shape[2:]) if kind == "conv2d" else None})
        manifest_layers.append(entry)
        if kind == "conv2d":
            manifest_layers.append({"type": "maxpool", "size": 2, "stride": 2})
            layers.append({"type": "maxpool"})
        if mod is model.c2:
            manifest_layers.append({"type": "flatten"})
            layers.append({"type": "flatten"})
        if out_scale is not None:
            s_in = out_scale
    order_types = [l["type"] for l in manifest_layers]
    assert order_types == ["conv2d", "maxpool", "conv2d", "maxpool", "flatten", "dense", "dense"], order_types

    args.out.mkdir(parents=True, exist_ok=True)
    blob_name = "lenet5_int8.bin"
    (args.out / blob_name).write_bytes(bytes(blob))
    manifest = {
        "format": "adam-int8-model",
        "version": 1,
        "name": "lenet5-mnist-int8",
        "input": {"shape": [1, 28, 28], "scale": INPUT_SCALE, "zero_point": 0},
        "blob": {"path": blob_name, "size": len(blob), "crc32": zlib.crc32(bytes(blob)) & 0xFFFFFFFF},
        "layers": manifest_layers,
    }
    (args.out / "lenet5_int8.json").write_text(json.dumps(manifest, indent=2) + "\n")
    write_idx(args.out / "mnist-holdout-images.idx3-ubyte", te_x, args.out / "mnist-holdout-labels.idx1-ubyte", te_y)

    logits = np.stack([int_forward(layers, img) for img in te_x])
    int_acc = (logits.argmax(1) == te_y).mean() * 100
    print(f"holdout accuracy: float {float_acc:.2f}%, int8 reference {int_acc:.2f}%")
    golden = {
        "description": "integer reference logits (exact multiplier) for the first holdout images",
        "accuracy_percent": int_acc,
        "logits": [[float(v) for v in row] for row in logits[:GOLDEN_IMAGES]],
        "predictions": [int(v) for v in logits.argmax(1)],
    }
    (args.out / "lenet5_reference.json").write_text(json.dumps(golden) + "\n")


if __name__ == "__main__":
    main()
