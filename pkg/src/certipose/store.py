"""Persisted candidate store: manifest + one binary record per candidate.

The on-disk layout is documented in STORE_FORMAT.md.  All numeric payloads
are little-endian, reals are 64-bit IEEE, and bitmaps stay bit-packed
row-major, so a save/load/save round trip is byte-identical.  The manifest
carries SHA-256 digests of every record and of the target geometry; loads
verify them and refuse anything that does not match.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import StoreCorrupt
from .forward import (
    HullConfig,
    PoseCandidateArtifacts,
    UncertainPose,
    VertexEnclosure,
)
from .geometry import CameraParams, HPolytope2, Target
from .image import BinaryImage
from .sets import Interval, PolyZonotope

__all__ = ["CandidateRecord", "CandidateStore", "FORMAT_VERSION"]

FORMAT_VERSION = 1

_DTYPE_CODES = {0: "<f8", 1: "<i8", 2: "u1"}
_CODE_OF = {np.dtype("float64"): 0, np.dtype("int64"): 1, np.dtype("uint8"): 2}


def _pack_array(a: np.ndarray) -> bytes:
    a = np.ascontiguousarray(a)
    code = _CODE_OF[a.dtype]
    head = struct.pack("<BB", code, a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape)
    return head + a.astype(_DTYPE_CODES[code], copy=False).tobytes()


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise StoreCorrupt("truncated candidate record")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def array(self) -> np.ndarray:
        code, ndim = struct.unpack("<BB", self.take(2))
        if code not in _DTYPE_CODES:
            raise StoreCorrupt(f"unknown dtype code {code}")
        shape = struct.unpack(f"<{ndim}I", self.take(4 * ndim))
        dt = np.dtype(_DTYPE_CODES[code])
        count = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(self.take(count * dt.itemsize), dtype=dt)
        out = data.reshape(shape)
        return out.astype(np.float64) if code == 0 else out


def _pack_image(img: BinaryImage) -> bytes:
    return struct.pack("<II", img.width, img.height) + _pack_array(img.packed)


def _read_image(r: _Reader) -> BinaryImage:
    w, h = struct.unpack("<II", r.take(8))
    return BinaryImage(w, h, r.array())


def _pack_pz(pz: PolyZonotope) -> bytes:
    return b"".join([
        _pack_array(pz.offset), _pack_array(pz.dep), _pack_array(pz.indep),
        _pack_array(pz.expmat), _pack_array(pz.ids),
    ])


def _read_pz(r: _Reader) -> PolyZonotope:
    return PolyZonotope(r.array(), r.array(), r.array(), r.array(), r.array())


@dataclass(frozen=True)
class CandidateRecord:
    """One pose box plus its precomputed artifacts (None when unresolved)."""

    pose: UncertainPose
    artifacts: PoseCandidateArtifacts | None
    depth_capped: bool = False

    def to_bytes(self) -> bytes:
        parts = [_pack_array(self.pose.center), _pack_array(self.pose.radius),
                 struct.pack("<BB", int(self.artifacts is not None), int(self.depth_capped))]
        art = self.artifacts
        if art is not None:
            parts.append(_pack_image(art.outer_image))
            parts.append(struct.pack("<I", len(art.polygon_images)))
            for img in art.polygon_images:
                parts.append(_pack_image(img))
            parts.append(struct.pack("<I", len(art.hulls)))
            for hull in art.hulls:
                parts.append(_pack_array(hull.A))
                parts.append(_pack_array(hull.b))
            parts.append(struct.pack("<I", len(art.vertex_enclosures)))
            for encl in art.vertex_enclosures:
                parts.append(struct.pack("<I", len(encl)))
                for ve in encl:
                    parts.append(_pack_pz(ve.set))
                    parts.append(_pack_image(ve.bitmap))
                    parts.append(struct.pack("<B", int(ve.fully_in_image)))
            parts.append(struct.pack("<d", art.error_ratio))
            parts.append(struct.pack("<Q", art.pixel_tests))
        return b"".join(parts)

    @staticmethod
    def from_bytes(buf: bytes, cam: CameraParams) -> "CandidateRecord":
        r = _Reader(buf)
        center, radius = r.array(), r.array()
        pose = UncertainPose.from_center_radius(center, radius)
        has_art, capped = struct.unpack("<BB", r.take(2))
        if not has_art:
            return CandidateRecord(pose, None, bool(capped))
        outer = _read_image(r)
        polygon_images = tuple(_read_image(r) for _ in range(r.u32()))
        hulls = tuple(HPolytope2(r.array(), r.array()) for _ in range(r.u32()))
        enclosures = []
        for _ in range(r.u32()):
            ves = []
            for _ in range(r.u32()):
                pz = _read_pz(r)
                bitmap = _read_image(r)
                inside = bool(r.u8())
                rebuilt = VertexEnclosure.from_set(pz, cam)
                if rebuilt.bitmap != bitmap or rebuilt.fully_in_image != inside:
                    raise StoreCorrupt("vertex enclosure invariants violated on load")
                ves.append(rebuilt)
            enclosures.append(tuple(ves))
        error_ratio = r.f64()
        pixel_tests = struct.unpack("<Q", r.take(8))[0]
        if r.pos != len(buf):
            raise StoreCorrupt("trailing bytes in candidate record")
        art = PoseCandidateArtifacts(pose, outer, polygon_images, hulls,
                                     tuple(enclosures), error_ratio, pixel_tests)
        return CandidateRecord(pose, art, bool(capped))


@dataclass(frozen=True)
class CandidateStore:
    camera: CameraParams
    target: Target
    pose_space: Interval
    epsilon_rate: float
    max_depth: int
    split_dims: int
    hull_cfg: HullConfig
    records: tuple

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def target_fingerprint(self) -> str:
        return self.target.fingerprint()

    def pose_space_volume(self) -> float:
        return float(np.prod(self.pose_space.hi - self.pose_space.lo))

    def manifest_dict(self, record_hashes) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "camera": {"focal": self.camera.focal, "width": self.camera.width,
                       "height": self.camera.height},
            "target_fingerprint": self.target_fingerprint,
            "pose_space": {"lo": self.pose_space.lo.tolist(),
                           "hi": self.pose_space.hi.tolist()},
            "epsilon_rate": self.epsilon_rate,
            "max_depth": self.max_depth,
            "split_dims": self.split_dims,
            "hull_cfg": {"edges": self.hull_cfg.edges, "corners": self.hull_cfg.corners,
                         "refine": self.hull_cfg.refine},
            "candidate_count": len(self.records),
            "unresolved": sum(1 for rec in self.records if rec.artifacts is None),
            "depth_capped": sum(1 for rec in self.records if rec.depth_capped),
            "record_sha256": record_hashes,
        }

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        root = Path(path)
        (root / "candidates").mkdir(parents=True, exist_ok=True)
        self.target.save_json(root / "target.json")
        hashes = []
        for i, rec in enumerate(self.records):
            blob = rec.to_bytes()
            hashes.append(hashlib.sha256(blob).hexdigest())
            (root / "candidates" / f"cand_{i:06d}.bin").write_bytes(blob)
        manifest = self.manifest_dict(hashes)
        with open(root / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def load(path) -> "CandidateStore":
        root = Path(path)
        try:
            with open(root / "manifest.json") as fh:
                manifest = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreCorrupt(f"cannot read manifest: {exc}") from exc
        if manifest.get("format_version") != FORMAT_VERSION:
            raise StoreCorrupt(f"unsupported store format {manifest.get('format_version')}")
        target = Target.load_json(root / "target.json")
        if target.fingerprint() != manifest["target_fingerprint"]:
            raise StoreCorrupt("target geometry does not match its fingerprint")
        cam = CameraParams(manifest["camera"]["focal"], manifest["camera"]["width"],
                           manifest["camera"]["height"])
        space = Interval(np.array(manifest["pose_space"]["lo"]),
                         np.array(manifest["pose_space"]["hi"]))
        hull_cfg = HullConfig(**manifest["hull_cfg"])
        records = []
        for i, expect in enumerate(manifest["record_sha256"]):
            blob = (root / "candidates" / f"cand_{i:06d}.bin").read_bytes()
            if hashlib.sha256(blob).hexdigest() != expect:
                raise StoreCorrupt(f"candidate {i} fails its integrity check")
            records.append(CandidateRecord.from_bytes(blob, cam))
        if len(records) != manifest["candidate_count"]:
            raise StoreCorrupt("candidate count mismatch")
        return CandidateStore(cam, target, space, manifest["epsilon_rate"],
                              manifest["max_depth"], manifest["split_dims"],
                              hull_cfg, tuple(records))
