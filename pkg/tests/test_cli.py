import json

import numpy as np
import pytest

from depthforge import datapack
from depthforge.cli import main
from depthforge.geometry import write_obj
from depthforge.meshes import bumpy_sphere


@pytest.fixture()
def workspace(tmp_path):
    mesh = tmp_path / "blob.obj"
    mesh.write_text(write_obj(bumpy_sphere(subdivisions=1, radius=80.0, seed=4)))
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "dataset_name": "cli-test",
        "master_seed": 7,
        "output_dir": str(tmp_path / "out"),
        "meshes": [{"path": "blob.obj", "class_id": 0}],
        "viewsphere": {"subdivisions": 1, "in_plane_degrees": [0.0]},
    }))
    return tmp_path


class TestGenerateCommands:
    def test_pairs_end_to_end(self, workspace, capsys):
        rc = main(["pairs", "--config", str(workspace / "config.json")])
        assert rc == 0
        out = workspace / "out"
        doc = datapack.load_manifest(out / "manifest.json", check_files=True)
        assert len(doc["records"]) == 25
        assert "wrote 25 records" in capsys.readouterr().out

    def test_render_then_augment(self, workspace):
        rc = main(["render", "--config", str(workspace / "config.json")])
        assert rc == 0
        manifest = workspace / "out" / "manifest.json"
        doc = json.loads(manifest.read_text())
        assert all(set(r["files"]) == {"clean"} for r in doc["records"])
        rc = main(["augment", "--manifest", str(manifest)])
        assert rc == 0
        doc = datapack.load_manifest(manifest, check_files=True)
        assert all(set(r["files"]) == {"clean", "augmented", "mask"}
                   for r in doc["records"])

    def test_augment_matches_inline_pairs(self, workspace, tmp_path):
        # render + augment must equal a one-shot pairs run (same seeds)
        cfg = json.loads((workspace / "config.json").read_text())
        cfg["output_dir"] = str(tmp_path / "direct")
        direct_cfg = tmp_path / "direct.json"
        direct_cfg.write_text(json.dumps(cfg))
        assert main(["pairs", "--config", str(direct_cfg)]) == 0
        assert main(["render", "--config", str(workspace / "config.json")]) == 0
        assert main(["augment", "--manifest", str(workspace / "out" / "manifest.json")]) == 0
        a = (tmp_path / "direct" / "aug" / "000003.dpz").read_bytes()
        b = (workspace / "out" / "aug" / "000003.dpz").read_bytes()
        assert a == b

    def test_flag_overrides_config_field(self, workspace):
        rc = main(["pairs", "--config", str(workspace / "config.json"),
                   "--subdivisions", "0", "--in-plane-degrees", "0,15"])
        assert rc == 0
        doc = json.loads((workspace / "out" / "manifest.json").read_text())
        assert doc["viewsphere"]["subdivisions"] == 0
        assert len(doc["records"]) == 8 * 2  # 8 upper vertices x 2 rolls

    def test_missing_config_is_exit_1(self, tmp_path, capsys):
        rc = main(["pairs", "--config", str(tmp_path / "none.json")])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_invalid_json_is_exit_1(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert main(["pairs", "--config", str(bad)]) == 1

    def test_bad_mesh_gives_partial_exit_2(self, workspace):
        (workspace / "blob.obj").write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")
        rc = main(["pairs", "--config", str(workspace / "config.json")])
        assert rc == 1  # parse failure surfaces as a config error at load time


class TestUtilityCommands:
    def test_export_png_single(self, workspace, tmp_path):
        main(["pairs", "--config", str(workspace / "config.json")])
        src = workspace / "out" / "clean" / "000000.dpz"
        out = tmp_path / "patch.png"
        assert main(["export-png", "--input", str(src), "--out", str(out)]) == 0
        arr = datapack.import_png16(out.read_bytes())
        ref = datapack.read_tensor(src.read_bytes())
        assert np.abs(arr - ref).max() <= 1.0 / 65535

    def test_noise_preview(self, tmp_path):
        out = tmp_path / "noise.png"
        rc = main(["noise-preview", "--kind", "cellular", "--frequency", "0.05",
                   "--seed", "3", "--size", "32", "--out", str(out)])
        assert rc == 0
        assert datapack.import_png16(out.read_bytes()).shape == (32, 32)

    def test_eval_command(self, tmp_path, capsys):
        entries = {"entries": [
            {"feature": [0.0, 0.0], "class_id": 0, "pose": [1, 0, 0, 0]},
            {"feature": [5.0, 0.0], "class_id": 1, "pose": [1, 0, 0, 0]},
        ]}
        db = tmp_path / "db.json"
        db.write_text(json.dumps(entries))
        queries = tmp_path / "q.json"
        queries.write_text(json.dumps(entries))
        report_path = tmp_path / "report.json"
        rc = main(["eval", "--db", str(db), "--queries", str(queries),
                   "--out", str(report_path)])
        assert rc == 0
        doc = json.loads(report_path.read_text())
        assert doc["accuracy"] == 1.0
        assert doc["angular_median_deg"] == 0.0
