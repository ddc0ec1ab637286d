"""Versioned binary checkpoints for the generator and the discriminator.

Layout (little-endian)::

    magic     4 bytes  b"FGCK"
    version   u16
    kind      u8       1 = generator, 2 = discriminator
    shape     4 x u32  (n, d, T, heads) or (in_dim, hidden, C, 0)
    blocks    u32 count, then per block:
                name   u16 length + UTF-8
                ndim   u8
                dims   ndim x u32
                data   float32 values, row-major
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from fairgen.fair.discriminator import Discriminator
from fairgen.generator.sequence import GeneratorModel
from fairgen.util.binary import BinaryReader, BinaryWriter

log = logging.getLogger(__name__)

MAGIC = b"FGCK"
VERSION = 1
KIND_GENERATOR = 1
KIND_DISCRIMINATOR = 2


def _shape_fields(model: nn.Module) -> tuple[int, tuple[int, int, int, int]]:
    if isinstance(model, GeneratorModel):
        return KIND_GENERATOR, (model.n, model.dim, model.max_len, model.heads)
    if isinstance(model, Discriminator):
        return KIND_DISCRIMINATOR, (model.in_dim, model.hidden, model.num_classes, 0)
    raise TypeError(f"cannot checkpoint {type(model).__name__}")


def encode_checkpoint(model: nn.Module) -> bytes:
    kind, shape = _shape_fields(model)
    w = BinaryWriter()
    w.raw(MAGIC)
    w.u16(VERSION)
    w.u8(kind)
    for value in shape:
        w.u32(value)
    state = model.state_dict()
    w.u32(len(state))
    for name, tensor in state.items():
        arr = tensor.detach().cpu().numpy()
        w.string(name)
        w.u8(arr.ndim)
        for dim in arr.shape:
            w.u32(dim)
        w.f32_array(arr.ravel())
    return w.getvalue()


def save_checkpoint(model: nn.Module, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(encode_checkpoint(model))
    log.debug("wrote checkpoint %s", p)
    return p


def _read_blocks(r: BinaryReader) -> dict[str, np.ndarray]:
    blocks: dict[str, np.ndarray] = {}
    for _ in range(r.u32()):
        name = r.read_string(r.u16())
        dims = tuple(r.u32() for _ in range(r.u8()))
        blocks[name] = r.f32_array(int(np.prod(dims, dtype=np.int64))).reshape(dims)
    if r.remaining:
        raise ValueError(f"{r.remaining} trailing bytes after checkpoint blocks")
    return blocks


def decode_checkpoint(data: bytes | str | Path) -> nn.Module:
    """Rebuild a :class:`GeneratorModel` or :class:`Discriminator` from checkpoint bytes."""
    with BinaryReader(data) as r:
        magic = r.read_bytes(4)
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint (magic {magic!r})")
        version = r.u16()
        if version != VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        kind = r.u8()
        a, b, c, d = (r.u32() for _ in range(4))
        blocks = _read_blocks(r)

    if kind == KIND_GENERATOR:
        ff_dim = blocks["ff.0.weight"].shape[0]
        model: nn.Module = GeneratorModel(a, dim=b, heads=d, max_len=c, ff_dim=ff_dim)
    elif kind == KIND_DISCRIMINATOR:
        model = Discriminator(a, hidden=b, num_classes=c)
    else:
        raise ValueError(f"unknown checkpoint kind {kind}")

    expected = model.state_dict()
    if set(expected) != set(blocks):
        missing = sorted(set(expected) ^ set(blocks))
        raise ValueError(f"checkpoint blocks do not match the model: {missing}")
    state = {}
    for name, arr in blocks.items():
        if tuple(expected[name].shape) != arr.shape:
            raise ValueError(f"block {name!r} has shape {arr.shape}, expected {tuple(expected[name].shape)}")
        state[name] = torch.as_tensor(arr.copy(), dtype=expected[name].dtype)
    model.load_state_dict(state)
    return model


def load_checkpoint(path: str | Path) -> nn.Module:
    return decode_checkpoint(Path(path))
