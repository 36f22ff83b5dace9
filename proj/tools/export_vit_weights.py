#!/usr/bin/env python3
"""Convert a pretrained ViT-S/14-family checkpoint into the NBC1 container
read by the C++ semantic-token provider.

Input: a PyTorch state dict (.pth), or a torch.hub model name with --hub
(e.g. --hub facebookresearch/dinov2:dinov2_vits14). LayerScale gammas, when
present, are folded into the attention projection / MLP output weights, so the
C++ side stays a plain pre-norm transformer.

Container entry names and shapes (all float32 except meta.heads, a float64
scalar):
    patch_embed.weight            D x 3 x 196
    patch_embed.bias              1 x 1 x D
    cls_token                     1 x 1 x D
    pos_embed.cls                 1 x 1 x D
    pos_embed.grid                D x g x g
    meta.heads                    1 x 1 x 1 (f64)
    blocks.<i>.norm1.weight/bias  1 x 1 x D
    blocks.<i>.attn.qkv.weight    1 x 3D x D      (rows = output features)
    blocks.<i>.attn.qkv.bias      1 x 1 x 3D
    blocks.<i>.attn.proj.weight   1 x D x D
    blocks.<i>.attn.proj.bias     1 x 1 x D
    blocks.<i>.norm2.weight/bias  1 x 1 x D
    blocks.<i>.mlp.fc1.weight     1 x 4D x D
    blocks.<i>.mlp.fc1.bias       1 x 1 x 4D
    blocks.<i>.mlp.fc2.weight     1 x D x 4D
    blocks.<i>.mlp.fc2.bias       1 x 1 x D
"""

import argparse
import math
import struct
import sys

import numpy as np

MAGIC = 0x3143424E  # "NBC1"
VERSION = 1
DTYPE_F32 = 0
DTYPE_F64 = 1


def write_container(path, entries):
    """entries: dict name -> (dtype_code, (c, h, w), bytes)."""
    blob = bytearray()
    blob += struct.pack("<IIII", MAGIC, VERSION, len(entries), 0)
    for name in sorted(entries):
        dtype, (c, h, w), payload = entries[name]
        raw = name.encode("utf-8")
        blob += struct.pack("<I", len(raw))
        blob += raw
        blob += struct.pack("<IIII", dtype, c, h, w)
        blob += payload
    with open(path, "wb") as f:
        f.write(blob)


def tensor_entry(arr, c, h, w):
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if arr.size != c * h * w:
        raise SystemExit(f"shape mismatch: {arr.size} values for {c}x{h}x{w}")
    return (DTYPE_F32, (c, h, w), arr.tobytes())


def scalar_entry(v):
    return (DTYPE_F64, (1, 1, 1), np.float64(v).tobytes())


def load_state_dict(args):
    try:
        import torch
    except ImportError:
        raise SystemExit("this exporter needs pytorch: pip install torch")
    if args.hub:
        repo, _, name = args.hub.partition(":")
        if not name:
            raise SystemExit("--hub expects repo:model, e.g. "
                             "facebookresearch/dinov2:dinov2_vits14")
        model = torch.hub.load(repo, name)
        return {k: v for k, v in model.state_dict().items()}
    sd = torch.load(args.checkpoint, map_location="cpu", weights_only=True)
    for key in ("state_dict", "model", "teacher"):
        if isinstance(sd, dict) and key in sd and isinstance(sd[key], dict):
            sd = sd[key]
    return sd


def strip_prefixes(sd):
    for prefix in ("module.", "backbone."):
        if all(k.startswith(prefix) for k in sd):
            sd = {k[len(prefix):]: v for k, v in sd.items()}
    return sd


def to_numpy(t):
    return t.detach().cpu().float().numpy()


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--checkpoint", help="path to a .pth state dict")
    src.add_argument("--hub", help="torch.hub source, repo:model")
    ap.add_argument("--out", required=True, help="output .bin container")
    ap.add_argument("--heads", type=int, default=6,
                    help="attention heads (6 for ViT-S)")
    args = ap.parse_args()

    sd = strip_prefixes(load_state_dict(args))
    if any("register_tokens" in k for k in sd):
        raise SystemExit("register-token variants are not supported; export a "
                         "plain ViT-S/14 checkpoint")

    def get(*names):
        for n in names:
            if n in sd:
                return to_numpy(sd[n])
        raise SystemExit(f"checkpoint is missing {names[0]}")

    pw = get("patch_embed.proj.weight")          # (D, 3, 14, 14)
    if pw.shape[1:] != (3, 14, 14):
        raise SystemExit(f"expected a /14 patch embed, got {pw.shape}")
    d = pw.shape[0]
    pb = get("patch_embed.proj.bias")            # (D,)
    cls = get("cls_token").reshape(d)            # (1, 1, D)
    pos = get("pos_embed").reshape(-1, d)        # (1, 1+g*g, D)
    g = int(math.isqrt(pos.shape[0] - 1))
    if 1 + g * g != pos.shape[0]:
        raise SystemExit(f"pos_embed grid is not square: {pos.shape}")

    entries = {
        "patch_embed.weight": tensor_entry(pw.reshape(d, 3, 196), d, 3, 196),
        "patch_embed.bias": tensor_entry(pb, 1, 1, d),
        "cls_token": tensor_entry(cls, 1, 1, d),
        "pos_embed.cls": tensor_entry(pos[0], 1, 1, d),
        # (g*g, D) -> (D, g, g)
        "pos_embed.grid": tensor_entry(
            pos[1:].reshape(g, g, d).transpose(2, 0, 1), d, g, g),
        "meta.heads": scalar_entry(args.heads),
    }

    n_blocks = 0
    while f"blocks.{n_blocks}.norm1.weight" in sd:
        n_blocks += 1
    if n_blocks < 4:
        raise SystemExit(f"found only {n_blocks} transformer blocks")

    for i in range(n_blocks):
        p = f"blocks.{i}."
        qkv_w = get(p + "attn.qkv.weight")       # (3D, D)
        qkv_b = get(p + "attn.qkv.bias")
        proj_w = get(p + "attn.proj.weight")     # (D, D)
        proj_b = get(p + "attn.proj.bias")
        fc1_w = get(p + "mlp.fc1.weight")        # (4D, D)
        fc1_b = get(p + "mlp.fc1.bias")
        fc2_w = get(p + "mlp.fc2.weight")        # (D, 4D)
        fc2_b = get(p + "mlp.fc2.bias")

        # Fold LayerScale into the branch outputs: y = gamma * (W x + b).
        if p + "ls1.gamma" in sd:
            g1 = to_numpy(sd[p + "ls1.gamma"]).reshape(-1, 1)
            proj_w = proj_w * g1
            proj_b = proj_b * g1.reshape(-1)
        if p + "ls2.gamma" in sd:
            g2 = to_numpy(sd[p + "ls2.gamma"]).reshape(-1, 1)
            fc2_w = fc2_w * g2
            fc2_b = fc2_b * g2.reshape(-1)

        hidden = fc1_w.shape[0]
        entries[p + "norm1.weight"] = tensor_entry(get(p + "norm1.weight"), 1, 1, d)
        entries[p + "norm1.bias"] = tensor_entry(get(p + "norm1.bias"), 1, 1, d)
        entries[p + "attn.qkv.weight"] = tensor_entry(qkv_w, 1, 3 * d, d)
        entries[p + "attn.qkv.bias"] = tensor_entry(qkv_b, 1, 1, 3 * d)
        entries[p + "attn.proj.weight"] = tensor_entry(proj_w, 1, d, d)
        entries[p + "attn.proj.bias"] = tensor_entry(proj_b, 1, 1, d)
        entries[p + "norm2.weight"] = tensor_entry(get(p + "norm2.weight"), 1, 1, d)
        entries[p + "norm2.bias"] = tensor_entry(get(p + "norm2.bias"), 1, 1, d)
        entries[p + "mlp.fc1.weight"] = tensor_entry(fc1_w, 1, hidden, d)
        entries[p + "mlp.fc1.bias"] = tensor_entry(fc1_b, 1, 1, hidden)
        entries[p + "mlp.fc2.weight"] = tensor_entry(fc2_w, 1, d, hidden)
        entries[p + "mlp.fc2.bias"] = tensor_entry(fc2_b, 1, 1, d)

    write_container(args.out, entries)
    print(f"wrote {len(entries)} entries (D={d}, {n_blocks} blocks, "
          f"pos grid {g}x{g}) to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
