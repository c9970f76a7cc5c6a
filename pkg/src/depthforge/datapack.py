"""On-disk formats and dataset orchestration.

Tensors travel as raw little-endian float32 ("DPZ1") files: a 16-byte header
(magic, height, width, channels) followed by the row-major channel-last
payload. That format is the interchange boundary between this engine and any
trainer; 16-bit PNGs are export-only, for visual inspection.

generate_dataset renders every (object, viewpoint) record, optionally
augments it into a training triple, and writes a JSON manifest. Output bytes
are a pure function of (config, master_seed): per-record seeds are derived by
a splittable hash, so worker count and scheduling never change the results.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import augment as aug
from .geometry import TriangleMesh, load_mesh
from .render import DepthPatch, ForegroundMask, RenderConfig, render_views
from .seeds import derive_seed, make_rng
from .viewsphere import ViewSphereConfig, sample_viewpoints

MAGIC = b"DPZ1"
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid generation configuration (maps to CLI exit code 1)."""


class FormatError(ValueError):
    """Malformed tensor file; the message names the byte offset."""


def _payload(data) -> np.ndarray:
    if isinstance(data, DepthPatch):
        arr = data.values
    elif isinstance(data, ForegroundMask):
        arr = data.values.astype(np.float32)
    else:
        arr = np.asarray(data, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError("tensor must be (H, W) or (H, W, C)")
    return np.ascontiguousarray(arr, dtype=np.float32)


def write_tensor(data) -> bytes:
    """Serialize a patch, mask or array to DPZ1 bytes."""
    arr = _payload(data)
    h, w, c = arr.shape
    return MAGIC + struct.pack("<III", h, w, c) + arr.astype("<f4").tobytes()


def read_tensor(data: bytes) -> np.ndarray:
    """Parse DPZ1 bytes into an (H, W) or (H, W, C) float32 array, bit-exactly."""
    if len(data) < 16:
        raise FormatError(f"truncated header at offset {len(data)} (need 16 bytes)")
    if data[:4] != MAGIC:
        raise FormatError(f"unsupported magic {data[:4]!r} at offset 0")
    h, w, c = struct.unpack("<III", data[4:16])
    expected = 16 + h * w * c * 4
    if len(data) != expected:
        raise FormatError(
            f"truncated payload at offset {len(data)} (expected {expected} bytes)")
    arr = np.frombuffer(data[16:], dtype="<f4").reshape(h, w, c)
    return arr[:, :, 0] if c == 1 else arr


def read_tensor_file(path: str | Path) -> np.ndarray:
    return read_tensor(Path(path).read_bytes())


def export_png16(data) -> bytes:
    """Encode values in [0, 1] as a 16-bit grayscale PNG (v -> round(v*65535))."""
    from PIL import Image

    arr = _payload(data)
    if arr.shape[2] != 1:
        raise ValueError("PNG export needs a single-channel image")
    flat = arr[:, :, 0].astype(np.float64)
    if flat.size and (flat.min() < 0.0 or flat.max() > 1.0):
        raise ValueError("PNG export requires values in [0, 1]")
    pixels = np.round(flat * 65535.0).astype(np.uint16)
    img = Image.fromarray(pixels)  # uint16 -> 16-bit grayscale
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def import_png16(data: bytes) -> np.ndarray:
    """Decode a 16-bit grayscale PNG back to float32 values in [0, 1]."""
    from PIL import Image

    img = Image.open(io.BytesIO(data))
    arr = np.asarray(img, dtype=np.float64)
    return (arr / 65535.0).astype(np.float32)


@dataclass(frozen=True)
class MeshSpec:
    path: str
    class_id: int
    symmetry: str = "regular"


@dataclass
class GenerationConfig:
    dataset_name: str
    master_seed: int
    output_dir: str
    meshes: list[MeshSpec]
    viewsphere: ViewSphereConfig = field(default_factory=ViewSphereConfig)
    render: RenderConfig = field(default_factory=RenderConfig)
    augmentation: aug.AugmentationConfig = field(default_factory=aug.AugmentationConfig)
    emit_pairs: bool = True
    workers: int = 1

    def validate(self):
        if not self.meshes:
            raise ConfigError("config needs at least one mesh")
        if self.render.patch_size != self.augmentation.patch_size:
            raise ConfigError("render.patch_size and augmentation.patch_size differ")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def config_from_dict(doc: dict, base_dir: Path | None = None) -> GenerationConfig:
    """Build a GenerationConfig from parsed JSON, resolving mesh paths."""
    try:
        meshes = [MeshSpec(**m) for m in doc.get("meshes", [])]
        if base_dir is not None:
            meshes = [dataclasses.replace(
                m, path=str((base_dir / m.path).resolve())
                if not Path(m.path).is_absolute() else m.path) for m in meshes]
        for section, cls in (("viewsphere", ViewSphereConfig),
                             ("render", RenderConfig),
                             ("augmentation", aug.AugmentationConfig)):
            raw = doc.get(section, {})
            if not isinstance(raw, dict):
                raise ConfigError(f"section {section!r} must be an object")
            doc[section] = _coerce_dataclass(cls, raw)
        cfg = GenerationConfig(
            dataset_name=doc["dataset_name"],
            master_seed=int(doc["master_seed"]),
            output_dir=str(doc["output_dir"]),
            meshes=meshes,
            viewsphere=doc["viewsphere"],
            render=doc["render"],
            augmentation=doc["augmentation"],
            emit_pairs=bool(doc.get("emit_pairs", True)),
            workers=int(doc.get("workers", 1)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid config: {e}") from e
    cfg.validate()
    return cfg


def _coerce_dataclass(cls, raw: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in raw:
            continue
        v = raw[f.name]
        if isinstance(v, list):
            v = tuple(v)
        kwargs[f.name] = v
    try:
        return cls(**kwargs)
    except ValueError as e:
        raise ConfigError(f"invalid {cls.__name__}: {e}") from e


def _config_doc(cfg: GenerationConfig) -> dict:
    return {
        "dataset_name": cfg.dataset_name,
        "master_seed": cfg.master_seed,
        "output_dir": cfg.output_dir,
        "meshes": [dataclasses.asdict(m) for m in cfg.meshes],
        "viewsphere": dataclasses.asdict(cfg.viewsphere),
        "render": dataclasses.asdict(cfg.render),
        "augmentation": dataclasses.asdict(cfg.augmentation),
        "emit_pairs": cfg.emit_pairs,
        "workers": cfg.workers,
    }


def _warm_raster_kernel():
    from ._raster import rasterize

    verts = np.array([[0.0, 0.0, 500.0], [10.0, 0.0, 500.0], [0.0, 10.0, 500.0]])
    rasterize(verts, np.array([[0, 1, 2]], dtype=np.int64), 64.0, 32.0, 32.0, 64, 64)


# worker globals, set once per process via the pool initializer
_WORKER: dict = {}


def _init_worker(meshes: dict[int, TriangleMesh], cfg_doc: dict, out_dir: str):
    _WORKER["meshes"] = meshes
    _WORKER["render"] = RenderConfig(**cfg_doc["render"])
    _WORKER["augmentation"] = _coerce_dataclass(
        aug.AugmentationConfig, cfg_doc["augmentation"])
    _WORKER["master_seed"] = cfg_doc["master_seed"]
    _WORKER["emit_pairs"] = cfg_doc["emit_pairs"]
    _WORKER["out"] = Path(out_dir)


def _process_record(task: tuple) -> dict:
    record_id, class_id, mesh_key, viewpoint = task
    mesh = _WORKER["meshes"][mesh_key]
    render_cfg: RenderConfig = _WORKER["render"]
    out: Path = _WORKER["out"]
    record: dict = {
        "id": record_id,
        "class_id": class_id,
        "pose": list(viewpoint.camera_pose.rotation.as_array()),
        "viewpoint_index": viewpoint.vertex_index,
        "in_plane": viewpoint.in_plane,
        "files": {},
        "all_background": False,
        "error": None,
    }
    try:
        view = render_views(mesh, [viewpoint], render_cfg)[0]
        record["all_background"] = view.all_background
        clean_rel = f"clean/{record_id:06d}.dpz"
        (out / clean_rel).write_bytes(write_tensor(view.patch))
        record["files"]["clean"] = clean_rel
        if _WORKER["emit_pairs"]:
            rng = make_rng(derive_seed(_WORKER["master_seed"], record_id))
            z = aug.sample_augmentation_vector(_WORKER["augmentation"], rng)
            pair = aug.augment(view.patch, z, class_id=class_id,
                               pose=viewpoint.camera_pose.rotation,
                               viewpoint_index=viewpoint.vertex_index,
                               in_plane=viewpoint.in_plane)
            aug_rel = f"aug/{record_id:06d}.dpz"
            mask_rel = f"mask/{record_id:06d}.dpz"
            (out / aug_rel).write_bytes(write_tensor(pair.augmented))
            (out / mask_rel).write_bytes(write_tensor(pair.mask))
            record["files"]["augmented"] = aug_rel
            record["files"]["mask"] = mask_rel
    except Exception as e:  # per-record failure: collect, do not abort the run
        record["error"] = f"{type(e).__name__}: {e}"
    return record


def generate_dataset(cfg: GenerationConfig, sensor_hook=None) -> dict:
    """Render and (optionally) augment every record; returns the manifest dict.

    Output is byte-identical for identical (config, master_seed) regardless
    of worker count. Per-record failures are collected into the records and
    flag the manifest as partial.
    """
    cfg.validate()
    meshes: dict[int, TriangleMesh] = {}
    for i, spec in enumerate(cfg.meshes):
        path = Path(spec.path)
        if not path.exists():
            raise ConfigError(f"mesh file not found: {path}")
        try:
            meshes[i] = load_mesh(path.read_bytes())
        except ValueError as e:
            raise ConfigError(f"mesh {path}: {e}") from e

    tasks = []
    record_id = 0
    for i, spec in enumerate(cfg.meshes):
        vs_cfg = dataclasses.replace(cfg.viewsphere, symmetry=spec.symmetry)
        for vp in sample_viewpoints(vs_cfg):
            tasks.append((record_id, spec.class_id, i, vp))
            record_id += 1

    out = Path(cfg.output_dir)
    for sub in ("clean", "aug", "mask") if cfg.emit_pairs else ("clean",):
        (out / sub).mkdir(parents=True, exist_ok=True)

    cfg_doc = _config_doc(cfg)
    if sensor_hook is not None:
        records = _run_with_hook(tasks, meshes, cfg, cfg_doc, out, sensor_hook)
    elif cfg.workers > 1 and len(tasks) > 1:
        _warm_raster_kernel()  # compile before forking so children inherit it
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_worker,
                                 initargs=(meshes, cfg_doc, str(out))) as pool:
            records = list(pool.map(_process_record, tasks, chunksize=32))
    else:
        _init_worker(meshes, cfg_doc, str(out))
        records = [_process_record(t) for t in tasks]

    partial = any(r["error"] for r in records)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "dataset_name": cfg.dataset_name,
        "master_seed": cfg.master_seed,
        "viewsphere": cfg_doc["viewsphere"],
        "render": cfg_doc["render"],
        "augmentation": cfg_doc["augmentation"],
        "emit_pairs": cfg.emit_pairs,
        "partial": partial,
        "records": records,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest


def _run_with_hook(tasks, meshes, cfg, cfg_doc, out, sensor_hook) -> list[dict]:
    # sensor simulation runs in-process (hooks are arbitrary callables)
    _init_worker(meshes, cfg_doc, str(out))
    records = []
    for task in tasks:
        record_id, class_id, mesh_key, vp = task
        rng = make_rng(derive_seed(cfg.master_seed, record_id))
        z = aug.sample_augmentation_vector(cfg.augmentation, rng)
        if not (cfg.emit_pairs and z.apply_sensor):
            records.append(_process_record(task))
            continue
        record = {"id": record_id, "class_id": class_id,
                  "pose": list(vp.camera_pose.rotation.as_array()),
                  "viewpoint_index": vp.vertex_index, "in_plane": vp.in_plane,
                  "files": {}, "all_background": False, "error": None}
        try:
            view = render_views(meshes[mesh_key], [vp], cfg.render)[0]
            record["all_background"] = view.all_background
            source = sensor_hook(meshes[mesh_key], vp)
            pair = aug.augment(view.patch, z, source=source, class_id=class_id,
                               pose=vp.camera_pose.rotation,
                               viewpoint_index=vp.vertex_index, in_plane=vp.in_plane)
            for kind, data in (("clean", view.patch), ("augmented", pair.augmented),
                               ("mask", pair.mask)):
                sub = {"clean": "clean", "augmented": "aug", "mask": "mask"}[kind]
                rel = f"{sub}/{record_id:06d}.dpz"
                (out / rel).write_bytes(write_tensor(data))
                record["files"][kind] = rel
        except Exception as e:
            record["error"] = f"{type(e).__name__}: {e}"
        records.append(record)
    return records


def load_manifest(path: str | Path, check_files: bool = True) -> dict:
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(f"unsupported manifest schema {doc.get('schema_version')!r}")
    if check_files:
        root = path.parent
        for rec in doc["records"]:
            for rel in rec["files"].values():
                if not (root / rel).exists():
                    raise FileNotFoundError(f"manifest references missing file {rel}")
    return doc


def dataset_tree_sha256(root: str | Path) -> str:
    """SHA-256 over every file (relative path + contents), sorted by path."""
    root = Path(root)
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(path.relative_to(root).as_posix().encode())
        digest.update(b"\0")
        digest.update(path.read_bytes())
    return digest.hexdigest()
