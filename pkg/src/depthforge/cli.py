"""Command-line interface.

Subcommands: render (clean patches only), pairs (training triples), augment
(add triples to an existing clean dataset), export-png, eval (descriptor
retrieval report), noise-preview. Generation runs off a JSON config file;
every config field can be overridden by a flag of the same name.

Exit codes: 0 success, 1 config error, 2 partial generation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import types
import typing
from pathlib import Path

import numpy as np

from . import augment as aug
from . import datapack
from .datapack import ConfigError, GenerationConfig
from .evalkit import DescriptorEntry, evaluate
from .geometry import Quaternion
from .noise import NOISE_KINDS, NoiseSpec, fill_field
from .render import RenderConfig
from .seeds import derive_seed, make_rng
from .viewsphere import ViewSphereConfig, vertex_counts

_CONFIG_SECTIONS = (("viewsphere", ViewSphereConfig),
                    ("render", RenderConfig),
                    ("augmentation", aug.AugmentationConfig))


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _unwrap_optional(tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return tp


def _parse_value(text: str, tp):
    tp = _unwrap_optional(tp)
    if text.lower() in ("none", "null"):
        return None
    if tp is bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if tp is int:
        return int(text)
    if tp is float:
        return float(text)
    if typing.get_origin(tp) is tuple:
        parts = [p for p in text.split(",") if p != ""]
        args = typing.get_args(tp)
        elem = args[0] if args else str
        if elem is float or elem is int:
            return tuple(elem(p) for p in parts)
        return tuple(parts)
    return text


def _add_config_overrides(parser: argparse.ArgumentParser):
    seen = set()
    for _, cls in _CONFIG_SECTIONS:
        for f in dataclasses.fields(cls):
            if f.name in seen:
                continue  # shared fields (patch_size) set every section
            seen.add(f.name)
            parser.add_argument(_flag(f.name), dest=f"cfg_{f.name}", default=None,
                                metavar="V", help=f"override {f.name}")
    parser.add_argument("--dataset-name", default=None)
    parser.add_argument("--master-seed", type=int, default=None)
    parser.add_argument("--output-dir", default=None)
    parser.add_argument("--workers", type=int, default=None)


def _load_generation_config(args, emit_pairs: bool) -> GenerationConfig:
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e

    for section, cls in _CONFIG_SECTIONS:
        doc.setdefault(section, {})
        hints = typing.get_type_hints(cls)
        for f in dataclasses.fields(cls):
            raw = getattr(args, f"cfg_{f.name}", None)
            if raw is not None:
                doc[section][f.name] = _parse_value(raw, hints[f.name])
    for name in ("dataset_name", "master_seed", "output_dir", "workers"):
        v = getattr(args, name, None)
        if v is not None:
            doc[name] = v
    doc["emit_pairs"] = emit_pairs
    return datapack.config_from_dict(doc, base_dir=path.parent)


def _cmd_generate(args, emit_pairs: bool) -> int:
    cfg = _load_generation_config(args, emit_pairs)
    counts = vertex_counts(cfg.viewsphere)
    print(f"view sphere: {counts['total_vertices']} vertices, "
          f"{counts['hemisphere_vertices']} on the {cfg.viewsphere.hemisphere} hemisphere")
    manifest = datapack.generate_dataset(cfg)
    n_err = sum(1 for r in manifest["records"] if r["error"])
    print(f"wrote {len(manifest['records'])} records to {cfg.output_dir} "
          f"({n_err} failed)")
    return 2 if manifest["partial"] else 0


def _cmd_augment(args) -> int:
    manifest_path = Path(args.manifest)
    doc = datapack.load_manifest(manifest_path, check_files=True)
    root = manifest_path.parent
    aug_cfg = datapack._coerce_dataclass(aug.AugmentationConfig, doc["augmentation"])
    render_doc = doc["render"]
    for sub in ("aug", "mask"):
        (root / sub).mkdir(exist_ok=True)
    failures = 0
    for rec in doc["records"]:
        if rec["error"]:
            failures += 1
            continue
        values = datapack.read_tensor_file(root / rec["files"]["clean"])
        znear, zfar = RenderConfig(**render_doc).resolve_window(
            ViewSphereConfig(**doc["viewsphere"]).radius)
        from .render import DepthPatch

        patch = DepthPatch(values, znear, zfar)
        rng = make_rng(derive_seed(doc["master_seed"], rec["id"]))
        z = aug.sample_augmentation_vector(aug_cfg, rng)
        pair = aug.augment(patch, z)
        for kind, sub, data in (("augmented", "aug", pair.augmented),
                                ("mask", "mask", pair.mask)):
            rel = f"{sub}/{rec['id']:06d}.dpz"
            (root / rel).write_bytes(datapack.write_tensor(data))
            rec["files"][kind] = rel
    doc["emit_pairs"] = True
    manifest_path.write_text(json.dumps(doc, indent=1, sort_keys=True))
    print(f"augmented {len(doc['records']) - failures} records "
          f"({failures} skipped)")
    return 2 if failures else 0


def _cmd_export_png(args) -> int:
    src = Path(args.input)
    out = Path(args.out)
    if src.suffix == ".json":
        doc = datapack.load_manifest(src, check_files=True)
        out.mkdir(parents=True, exist_ok=True)
        for rec in doc["records"]:
            for kind, rel in rec["files"].items():
                arr = datapack.read_tensor_file(src.parent / rel)
                png = datapack.export_png16(arr)
                dest = out / f"{rec['id']:06d}_{kind}.png"
                dest.write_bytes(png)
        print(f"exported {len(doc['records'])} records to {out}")
    else:
        arr = datapack.read_tensor_file(src)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(datapack.export_png16(arr))
        print(f"wrote {out}")
    return 0


def _load_descriptors(path: Path) -> list[tuple[np.ndarray, int, Quaternion]]:
    doc = json.loads(path.read_text())
    out = []
    for e in doc["entries"]:
        w, x, y, z = e["pose"]
        out.append((np.asarray(e["feature"], dtype=np.float64), int(e["class_id"]),
                    Quaternion(w, x, y, z).normalized()))
    return out


def _cmd_eval(args) -> int:
    db = [DescriptorEntry(f, c, q) for f, c, q in _load_descriptors(Path(args.db))]
    queries = _load_descriptors(Path(args.queries))
    report = evaluate(db, queries)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0


def _cmd_noise_preview(args) -> int:
    spec = NoiseSpec(args.kind, args.frequency, args.seed, octaves=args.octaves)
    field = fill_field(spec, args.size, args.size)
    png = datapack.export_png16((field.values + 1.0) / 2.0)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(png)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render clean depth patches")
    p_render.add_argument("--config", required=True)
    _add_config_overrides(p_render)

    p_pairs = sub.add_parser("pairs", help="render + augment training triples")
    p_pairs.add_argument("--config", required=True)
    _add_config_overrides(p_pairs)

    p_aug = sub.add_parser("augment", help="augment an existing clean dataset")
    p_aug.add_argument("--manifest", required=True)

    p_png = sub.add_parser("export-png", help="export tensors as 16-bit PNGs")
    p_png.add_argument("--input", required=True, help=".dpz file or manifest.json")
    p_png.add_argument("--out", required=True)

    p_eval = sub.add_parser("eval", help="descriptor retrieval evaluation")
    p_eval.add_argument("--db", required=True)
    p_eval.add_argument("--queries", required=True)
    p_eval.add_argument("--out", default=None)

    p_noise = sub.add_parser("noise-preview", help="render a noise field to PNG")
    p_noise.add_argument("--kind", choices=NOISE_KINDS, default="perlin")
    p_noise.add_argument("--frequency", type=float, default=0.02)
    p_noise.add_argument("--seed", type=int, default=0)
    p_noise.add_argument("--octaves", type=int, default=1)
    p_noise.add_argument("--size", type=int, default=256)
    p_noise.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "render":
            return _cmd_generate(args, emit_pairs=False)
        if args.command == "pairs":
            return _cmd_generate(args, emit_pairs=True)
        if args.command == "augment":
            return _cmd_augment(args)
        if args.command == "export-png":
            return _cmd_export_png(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "noise-preview":
            return _cmd_noise_preview(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
