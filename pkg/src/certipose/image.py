"""Bit-packed binary images with NetPBM I/O.

Pixels are addressed 1-based as (qx, qy) in [1..w] x [1..h]; pixel (qx, qy)
covers the square [qx-1/2, qx+1/2] x [qy-1/2, qy+1/2] in continuous pixel
coordinates.  Storage is row-major by qy then qx, each row padded to a byte
boundary with zero bits (the same layout NetPBM P4 uses).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BinaryImage"]


@dataclass(frozen=True)
class BinaryImage:
    width: int
    height: int
    packed: np.ndarray  # uint8, shape (height, ceil(width / 8))

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        packed = np.ascontiguousarray(np.asarray(self.packed, dtype=np.uint8))
        expect = (self.height, (self.width + 7) // 8)
        if packed.shape != expect:
            raise ValueError(f"packed shape {packed.shape} != expected {expect}")
        object.__setattr__(self, "packed", packed)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zeros(width: int, height: int) -> "BinaryImage":
        return BinaryImage(width, height, np.zeros((height, (width + 7) // 8), dtype=np.uint8))

    @staticmethod
    def from_bool(arr: np.ndarray) -> "BinaryImage":
        """From an (h, w) boolean array indexed [qy-1, qx-1]."""
        arr = np.asarray(arr, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("expected a 2-d boolean array")
        h, w = arr.shape
        return BinaryImage(w, h, np.packbits(arr, axis=1))

    @staticmethod
    def from_on_pixels(width: int, height: int, pixels) -> "BinaryImage":
        arr = np.zeros((height, width), dtype=bool)
        for qx, qy in pixels:
            if not (1 <= qx <= width and 1 <= qy <= height):
                raise ValueError(f"pixel ({qx},{qy}) outside [1..{width}]x[1..{height}]")
            arr[qy - 1, qx - 1] = True
        return BinaryImage.from_bool(arr)

    @staticmethod
    def from_rect(width: int, height: int, qx0: int, qx1: int, qy0: int, qy1: int) -> "BinaryImage":
        """All pixels with qx in [qx0..qx1], qy in [qy0..qy1], clipped to bounds."""
        arr = np.zeros((height, width), dtype=bool)
        x0, x1 = max(qx0, 1), min(qx1, width)
        y0, y1 = max(qy0, 1), min(qy1, height)
        if x0 <= x1 and y0 <= y1:
            arr[y0 - 1:y1, x0 - 1:x1] = True
        return BinaryImage.from_bool(arr)

    # -- queries --------------------------------------------------------------

    def to_bool(self) -> np.ndarray:
        return np.unpackbits(self.packed, axis=1, count=self.width).astype(bool)

    def get(self, qx: int, qy: int) -> bool:
        if not (1 <= qx <= self.width and 1 <= qy <= self.height):
            raise IndexError(f"pixel ({qx},{qy}) out of range")
        byte = self.packed[qy - 1, (qx - 1) // 8]
        return bool((byte >> (7 - (qx - 1) % 8)) & 1)

    def count(self) -> int:
        return int(np.unpackbits(self.packed).sum())

    def on_pixels(self) -> list[tuple[int, int]]:
        ys, xs = np.nonzero(self.to_bool())
        return [(int(x) + 1, int(y) + 1) for y, x in zip(ys, xs)]

    def l1_distance(self, other: "BinaryImage") -> int:
        self._check_same_size(other)
        return int(np.unpackbits(self.packed ^ other.packed).sum())

    def intersects(self, other: "BinaryImage") -> bool:
        self._check_same_size(other)
        return bool(np.any(self.packed & other.packed))

    def count_outside(self, other: "BinaryImage") -> int:
        """Number of on-pixels of self that are off in other."""
        self._check_same_size(other)
        return int(np.unpackbits(self.packed & ~other.packed).sum())

    def subset_of(self, other: "BinaryImage") -> bool:
        return self.count_outside(other) == 0

    def _check_same_size(self, other: "BinaryImage"):
        if (self.width, self.height) != (other.width, other.height):
            raise ValueError("image size mismatch")

    # -- combination ----------------------------------------------------------

    def __or__(self, other: "BinaryImage") -> "BinaryImage":
        self._check_same_size(other)
        return BinaryImage(self.width, self.height, self.packed | other.packed)

    def __and__(self, other: "BinaryImage") -> "BinaryImage":
        self._check_same_size(other)
        return BinaryImage(self.width, self.height, self.packed & other.packed)

    def minus(self, other: "BinaryImage") -> "BinaryImage":
        self._check_same_size(other)
        return BinaryImage(self.width, self.height, self.packed & ~other.packed)

    def __eq__(self, other) -> bool:
        return (isinstance(other, BinaryImage)
                and (self.width, self.height) == (other.width, other.height)
                and bool(np.array_equal(self.packed, other.packed)))

    def __hash__(self):
        return hash((self.width, self.height, self.packed.tobytes()))

    # -- NetPBM ---------------------------------------------------------------

    def save_pbm(self, path, fmt: str = "P4"):
        if fmt not in ("P1", "P4"):
            raise ValueError("fmt must be 'P1' or 'P4'")
        with open(path, "wb") as fh:
            fh.write(f"{fmt}\n{self.width} {self.height}\n".encode("ascii"))
            if fmt == "P4":
                fh.write(self.packed.tobytes())
            else:
                bits = self.to_bool().astype(np.uint8)
                body = "\n".join(" ".join(map(str, row)) for row in bits)
                fh.write(body.encode("ascii") + b"\n")

    @staticmethod
    def load_pbm(path) -> "BinaryImage":
        with open(path, "rb") as fh:
            data = fh.read()
        magic, rest = data.split(None, 1)
        if magic not in (b"P1", b"P4"):
            raise ValueError(f"not a PBM file: magic {magic!r}")
        # header tokens may be interleaved with '#' comments
        tokens: list[bytes] = []
        pos = 0
        while len(tokens) < 2:
            while pos < len(rest) and rest[pos:pos + 1].isspace():
                pos += 1
            if rest[pos:pos + 1] == b"#":
                pos = rest.index(b"\n", pos) + 1
                continue
            end = pos
            while end < len(rest) and not rest[end:end + 1].isspace():
                end += 1
            tokens.append(rest[pos:end])
            pos = end
        w, h = int(tokens[0]), int(tokens[1])
        if magic == b"P4":
            pos += 1  # exactly one whitespace byte after the header
            row_bytes = (w + 7) // 8
            raw = np.frombuffer(rest[pos:pos + h * row_bytes], dtype=np.uint8)
            if raw.size != h * row_bytes:
                raise ValueError("truncated P4 payload")
            packed = raw.reshape(h, row_bytes).copy()
            # force zero padding bits so bitwise ops stay canonical
            if w % 8:
                packed[:, -1] &= np.uint8(0xFF << (8 - w % 8) & 0xFF)
            return BinaryImage(w, h, packed)
        digits = [c for c in rest[pos:].split() if c in (b"0", b"1")]
        if len(digits) != w * h:
            raise ValueError(f"P1 payload has {len(digits)} digits, expected {w * h}")
        arr = np.array([d == b"1" for d in digits], dtype=bool).reshape(h, w)
        return BinaryImage.from_bool(arr)
