"""Little-endian binary reader/writer for model checkpoints."""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np


class BinaryReader:
    """Reads little-endian binary data with cursor tracking and helpful errors."""

    __slots__ = ("_data", "_pos", "_end", "_path")

    def __init__(self, source: Union[bytes, memoryview, str, Path]) -> None:
        if isinstance(source, (str, Path)):
            path = Path(source)
            self._data = memoryview(path.read_bytes())
            self._path: str | None = str(path)
        else:
            self._data = memoryview(source) if not isinstance(source, memoryview) else source
            self._path = None
        self._pos: int = 0
        self._end: int = len(self._data)

    # -- context manager --

    def __enter__(self) -> BinaryReader:
        return self

    def __exit__(self, *_: object) -> None:
        self._data.release()

    # -- cursor --

    def tell(self) -> int:
        return self._pos

    @property
    def remaining(self) -> int:
        """Number of unread bytes from the current position."""
        return self._end - self._pos

    def require(self, n: int) -> None:
        """Raise if fewer than *n* bytes remain at the current position."""
        if self._end - self._pos < n:
            raise ValueError(
                f"need {n} bytes at offset {self._pos}, but only {self._end - self._pos} remain"
            )

    # -- primitive reads (little-endian) --

    def read_bytes(self, n: int) -> bytes:
        self.require(n)
        result = bytes(self._data[self._pos : self._pos + n])
        self._pos += n
        return result

    def _read_fmt(self, fmt: str, size: int) -> int:
        self.require(size)
        (value,) = struct.unpack_from(fmt, self._data, self._pos)
        self._pos += size
        return value

    def u8(self) -> int:
        return self._read_fmt("<B", 1)

    def u16(self) -> int:
        return self._read_fmt("<H", 2)

    def u32(self) -> int:
        return self._read_fmt("<I", 4)

    def read_string(self, n: int) -> str:
        """Read *n* bytes and decode as UTF-8."""
        return self.read_bytes(n).decode("utf-8")

    def f32_array(self, count: int) -> np.ndarray:
        """Read *count* little-endian float32 values into a fresh array."""
        raw = self.read_bytes(4 * count)
        return np.frombuffer(raw, dtype="<f4").astype(np.float32)

    def __repr__(self) -> str:
        src = self._path or "bytes"
        return f"BinaryReader({src}, pos={self.tell()}, remaining={self.remaining})"


class BinaryWriter:
    """Accumulates little-endian binary data; mirror of :class:`BinaryReader`."""

    __slots__ = ("_parts",)

    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def raw(self, data: bytes) -> None:
        self._parts.append(bytes(data))

    def u8(self, value: int) -> None:
        self._parts.append(struct.pack("<B", value))

    def u16(self, value: int) -> None:
        self._parts.append(struct.pack("<H", value))

    def u32(self, value: int) -> None:
        self._parts.append(struct.pack("<I", value))

    def string(self, text: str) -> None:
        """Write a u16 length prefix followed by UTF-8 bytes."""
        data = text.encode("utf-8")
        self.u16(len(data))
        self._parts.append(data)

    def f32_array(self, values: np.ndarray) -> None:
        self._parts.append(np.ascontiguousarray(values, dtype="<f4").tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self._parts)
