"""Frame/clip data model and bit-exact YUV4MPEG2 container I/O.

Internal pixel format is fixed: 8-bit planar 4:2:0. A frame owns three
read-only numpy planes; frames and clips are immutable after construction
and safe to share across workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    GeometryMismatch,
    MalformedHeader,
    OddGeometry,
    OutOfBounds,
    TruncatedFrame,
    UnsupportedColorspace,
)
from .taxonomy import TextureClass

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_MARKER = b"FRAME"

# 4:2:0 colorspace tags accepted on input; output always uses plain C420.
_ACCEPTED_C420 = {"420", "420jpeg", "420mpeg2", "420paldv"}


def _frozen_plane(data: np.ndarray) -> np.ndarray:
    plane = np.ascontiguousarray(data, dtype=np.uint8)
    plane.flags.writeable = False
    return plane


@dataclass(frozen=True, eq=False)
class Frame:
    """One 8-bit 4:2:0 picture: full-resolution luma, half-resolution chroma."""

    luma: np.ndarray
    chroma_u: np.ndarray
    chroma_v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "luma", _frozen_plane(self.luma))
        object.__setattr__(self, "chroma_u", _frozen_plane(self.chroma_u))
        object.__setattr__(self, "chroma_v", _frozen_plane(self.chroma_v))
        h, w = self.luma.shape
        if h % 2 or w % 2:
            raise OddGeometry(f"frame dimensions must be even, got {w}x{h}")
        if h < 2 or w < 2:
            raise OddGeometry(f"frame dimensions must be at least 2x2, got {w}x{h}")
        expected = (h // 2, w // 2)
        if self.chroma_u.shape != expected or self.chroma_v.shape != expected:
            raise GeometryMismatch(
                f"chroma planes must be {expected} for {w}x{h} luma, got "
                f"{self.chroma_u.shape} and {self.chroma_v.shape}")

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def bit_depth(self) -> int:
        return 8

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (self.luma.shape == other.luma.shape
                and np.array_equal(self.luma, other.luma)
                and np.array_equal(self.chroma_u, other.chroma_u)
                and np.array_equal(self.chroma_v, other.chroma_v))


def make_frame(luma, chroma_u=None, chroma_v=None) -> Frame:
    """Build a Frame; missing chroma planes default to neutral gray (128)."""
    luma = np.asarray(luma, dtype=np.uint8)
    h, w = luma.shape
    if chroma_u is None:
        chroma_u = np.full((h // 2, w // 2), 128, dtype=np.uint8)
    if chroma_v is None:
        chroma_v = np.full((h // 2, w // 2), 128, dtype=np.uint8)
    return Frame(luma, chroma_u, chroma_v)


@dataclass(frozen=True, eq=False)
class Clip:
    """An ordered frame sequence with a rational frame rate and optional label."""

    name: str
    frames: tuple[Frame, ...]
    fps_num: int = 25
    fps_den: int = 1
    label: TextureClass | None = None

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise GeometryMismatch("clip must contain at least one frame")
        if self.fps_num <= 0 or self.fps_den <= 0:
            raise MalformedHeader(f"frame rate must be positive, got "
                                  f"{self.fps_num}:{self.fps_den}")
        w, h = self.frames[0].width, self.frames[0].height
        for i, f in enumerate(self.frames):
            if f.width != w or f.height != h:
                raise GeometryMismatch(
                    f"frame {i} is {f.width}x{f.height}, expected {w}x{h}")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    def __len__(self) -> int:
        return len(self.frames)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Clip):
            return NotImplemented
        return (self.name == other.name
                and self.fps_num == other.fps_num
                and self.fps_den == other.fps_den
                and self.label == other.label
                and len(self.frames) == len(other.frames)
                and all(a == b for a, b in zip(self.frames, other.frames)))


# ---------------------------------------------------------------------------
# YUV4MPEG2 container
# ---------------------------------------------------------------------------

def read_y4m(data: bytes, name: str = "clip",
             label: TextureClass | None = None) -> Clip:
    """Parse a YUV4MPEG2 byte stream into a Clip.

    Only 4:2:0 colorspaces are accepted. ``name`` and ``label`` are sidecar
    metadata (the container does not carry them); pass them from the manifest.
    """
    nl = data.find(b"\n")
    if nl < 0:
        raise MalformedHeader("no end-of-header newline found")
    header = data[:nl]
    fields = header.split(b" ")
    if fields[0] != Y4M_MAGIC:
        raise MalformedHeader(f"bad magic {fields[0][:16]!r}")

    width = height = None
    fps_num = fps_den = None
    for tok in fields[1:]:
        if not tok:
            raise MalformedHeader("empty header parameter")
        tag, val = chr(tok[0]), tok[1:].decode("ascii", "replace")
        if tag == "W":
            width = _parse_pos_int(val, "width")
        elif tag == "H":
            height = _parse_pos_int(val, "height")
        elif tag == "F":
            if ":" not in val:
                raise MalformedHeader(f"bad frame rate {val!r}")
            n, d = val.split(":", 1)
            fps_num = _parse_pos_int(n, "fps numerator")
            fps_den = _parse_pos_int(d, "fps denominator")
        elif tag == "C":
            if val not in _ACCEPTED_C420:
                raise UnsupportedColorspace(f"colorspace C{val} is not 4:2:0")
        # I (interlacing), A (aspect) and X (comments) are accepted and ignored.

    if width is None or height is None:
        raise MalformedHeader("header missing W or H")
    if fps_num is None:
        raise MalformedHeader("header missing F")
    if width % 2 or height % 2:
        raise OddGeometry(f"stream geometry {width}x{height} is odd")

    y_size = width * height
    c_size = (width // 2) * (height // 2)
    frame_size = y_size + 2 * c_size

    frames = []
    pos = nl + 1
    while pos < len(data):
        marker_end = data.find(b"\n", pos)
        if marker_end < 0:
            raise TruncatedFrame("unterminated FRAME marker")
        marker = data[pos:marker_end]
        if not marker.startswith(FRAME_MARKER):
            raise MalformedHeader(f"expected FRAME marker, got {marker[:16]!r}")
        pos = marker_end + 1
        payload = data[pos:pos + frame_size]
        if len(payload) < frame_size:
            raise TruncatedFrame(
                f"frame {len(frames)}: got {len(payload)} of {frame_size} bytes")
        buf = np.frombuffer(payload, dtype=np.uint8)
        frames.append(Frame(
            buf[:y_size].reshape(height, width),
            buf[y_size:y_size + c_size].reshape(height // 2, width // 2),
            buf[y_size + c_size:].reshape(height // 2, width // 2),
        ))
        pos += frame_size

    if not frames:
        raise TruncatedFrame("stream contains no frames")
    return Clip(name=name, frames=tuple(frames),
                fps_num=fps_num, fps_den=fps_den, label=label)


def write_y4m(clip: Clip) -> bytes:
    """Serialize a Clip to a minimal YUV4MPEG2 stream (W, H, F header only).

    read_y4m(write_y4m(c)) reproduces c sample for sample, and
    write_y4m(read_y4m(s)) == s for any stream s in this minimal form.
    """
    parts = [b"YUV4MPEG2 W%d H%d F%d:%d\n"
             % (clip.width, clip.height, clip.fps_num, clip.fps_den)]
    for f in clip.frames:
        parts.append(b"FRAME\n")
        parts.append(f.luma.tobytes())
        parts.append(f.chroma_u.tobytes())
        parts.append(f.chroma_v.tobytes())
    return b"".join(parts)


def read_y4m_file(path, name=None, label=None) -> Clip:
    with open(path, "rb") as fh:
        data = fh.read()
    if name is None:
        import os
        name = os.path.splitext(os.path.basename(path))[0]
    return read_y4m(data, name=name, label=label)


def write_y4m_file(clip: Clip, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_y4m(clip))


def read_raw_420(data: bytes, width: int, height: int, fps_num: int = 25,
                 fps_den: int = 1, name: str = "clip",
                 label: TextureClass | None = None) -> Clip:
    """Parse headerless planar 4:2:0 bytes; geometry is supplied externally."""
    if width <= 0 or height <= 0 or width % 2 or height % 2:
        raise OddGeometry(f"raw geometry {width}x{height} must be positive and even")
    y_size = width * height
    c_size = (width // 2) * (height // 2)
    frame_size = y_size + 2 * c_size
    if not data or len(data) % frame_size:
        raise TruncatedFrame(
            f"raw payload of {len(data)} bytes is not a multiple of {frame_size}")
    frames = []
    for off in range(0, len(data), frame_size):
        buf = np.frombuffer(data[off:off + frame_size], dtype=np.uint8)
        frames.append(Frame(
            buf[:y_size].reshape(height, width),
            buf[y_size:y_size + c_size].reshape(height // 2, width // 2),
            buf[y_size + c_size:].reshape(height // 2, width // 2),
        ))
    return Clip(name=name, frames=tuple(frames),
                fps_num=fps_num, fps_den=fps_den, label=label)


def extract_patch(frame: Frame, x: int, y: int, w: int, h: int) -> Frame:
    """Crop a w×h sub-frame at even-aligned (x, y); chroma is cropped at half coordinates."""
    if x % 2 or y % 2 or w % 2 or h % 2:
        raise OddGeometry(f"patch geometry must be even, got x={x} y={y} w={w} h={h}")
    if w <= 0 or h <= 0:
        raise OutOfBounds(f"patch size must be positive, got {w}x{h}")
    if x < 0 or y < 0 or x + w > frame.width or y + h > frame.height:
        raise OutOfBounds(
            f"patch {w}x{h}@({x},{y}) exceeds frame {frame.width}x{frame.height}")
    cx, cy, cw, ch = x // 2, y // 2, w // 2, h // 2
    return Frame(frame.luma[y:y + h, x:x + w],
                 frame.chroma_u[cy:cy + ch, cx:cx + cw],
                 frame.chroma_v[cy:cy + ch, cx:cx + cw])


def _parse_pos_int(text: str, what: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise MalformedHeader(f"bad {what} {text!r}") from None
    if value <= 0:
        raise MalformedHeader(f"{what} must be positive, got {value}")
    return value
