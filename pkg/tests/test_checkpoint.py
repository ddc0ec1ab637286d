"""Tests for the binary checkpoint format."""

import struct
from pathlib import Path

import pytest
import torch

from fairgen.fair.discriminator import Discriminator, build_discriminator
from fairgen.generator.checkpoint import (
    MAGIC,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from fairgen.generator.sequence import GeneratorModel, build_generator
from fairgen.util.binary import BinaryReader, BinaryWriter

pytestmark = pytest.mark.unit


def _generator() -> GeneratorModel:
    return build_generator(12, seed=2, dim=8, heads=2, max_len=5, ff_dim=24)


class TestBinaryCodec:
    def test_primitives(self) -> None:
        """Unsigned integers and length-prefixed strings should survive a write and read."""
        w = BinaryWriter()
        w.u8(7)
        w.u16(0xBEEF)
        w.u32(0xDEADBEEF)
        w.string("héllo")
        r = BinaryReader(w.getvalue())
        assert r.u8() == 7
        assert r.u16() == 0xBEEF
        assert r.u32() == 0xDEADBEEF
        assert r.read_string(r.u16()) == "héllo"
        assert r.remaining == 0

    def test_little_endian(self) -> None:
        """Integers should be written little-endian."""
        w = BinaryWriter()
        w.u32(1)
        assert w.getvalue() == struct.pack("<I", 1)

    def test_short_read(self) -> None:
        """Reading past the end should report how many bytes were needed."""
        with pytest.raises(ValueError, match="need 4 bytes"):
            BinaryReader(b"\x00\x01").u32()


class TestGeneratorCheckpoint:
    def test_header(self) -> None:
        """The generator header should carry magic, version, kind and the four shape fields."""
        data = encode_checkpoint(_generator())
        r = BinaryReader(data)
        assert r.read_bytes(4) == MAGIC
        assert r.u16() == 1
        assert r.u8() == 1
        assert [r.u32() for _ in range(4)] == [12, 8, 5, 2]

    def test_rebuilds_identical_model(self, tmp_path: Path) -> None:
        """A saved generator should load with identical shape and weights."""
        model = _generator()
        path = save_checkpoint(model, tmp_path / "model" / "generator.ckpt")
        again = load_checkpoint(path)
        assert isinstance(again, GeneratorModel)
        assert (again.n, again.dim, again.max_len, again.heads, again.ff_dim) == (12, 8, 5, 2, 24)
        for (name, a), (_, b) in zip(model.state_dict().items(), again.state_dict().items()):
            assert torch.equal(a, b), name
        assert encode_checkpoint(again) == path.read_bytes()

    def test_same_outputs(self) -> None:
        """A decoded generator should produce the same logits."""
        model = _generator().eval()
        again = decode_checkpoint(encode_checkpoint(model)).eval()
        seq = torch.tensor([[0, 3, 5, 11]])
        with torch.no_grad():
            torch.testing.assert_close(model(seq), again(seq))


class TestDiscriminatorCheckpoint:
    def test_rebuilds(self) -> None:
        """A decoded discriminator should keep its shape and outputs."""
        d = build_discriminator(8, 3, hidden=16, seed=4)
        again = decode_checkpoint(encode_checkpoint(d))
        assert isinstance(again, Discriminator)
        assert (again.in_dim, again.hidden, again.num_classes) == (8, 16, 3)
        x = torch.randn(5, 8)
        torch.testing.assert_close(d(x), again(x))


class TestCorruptCheckpoints:
    def test_bad_magic(self) -> None:
        """A file with the wrong magic should be rejected."""
        data = b"XXXX" + encode_checkpoint(_generator())[4:]
        with pytest.raises(ValueError, match="not a checkpoint"):
            decode_checkpoint(data)

    def test_unknown_version(self) -> None:
        """An unknown format version should be named in the error."""
        data = bytearray(encode_checkpoint(_generator()))
        data[4:6] = struct.pack("<H", 99)
        with pytest.raises(ValueError, match="version 99"):
            decode_checkpoint(bytes(data))

    def test_trailing_bytes(self) -> None:
        """Extra bytes after the last tensor should be rejected."""
        with pytest.raises(ValueError, match="trailing"):
            decode_checkpoint(encode_checkpoint(_generator()) + b"\x00")

    def test_truncated(self) -> None:
        """A truncated file should fail with a short-read error."""
        with pytest.raises(ValueError, match="need"):
            decode_checkpoint(encode_checkpoint(_generator())[:-3])

    def test_unsupported_module(self) -> None:
        """Only generator and discriminator modules can be encoded."""
        with pytest.raises(TypeError):
            encode_checkpoint(torch.nn.Linear(2, 2))
