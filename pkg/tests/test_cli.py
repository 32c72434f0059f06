"""Command-line interface tests: subcommands, config handling, exit codes."""

import json
import subprocess
import sys

import pytest

from certipose.cli import main
from certipose.image import BinaryImage

CONFIG_TOML = """\
[target]
name = "stripes"

[camera]
focal = 125.0
width = 100
height = 100

[pose_space]
position = [[-5.0, 5.0], [-5.0, 5.0], [80.0, 120.0]]
angles_deg = [[3.0, 20.0], [-1.0, 1.0], [-1.0, 1.0]]

[partition]
epsilon_rate = 0.5
max_depth = 3

[experiment]
samples = 3
volume_samples = 2000
seed = 5
"""


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "exp.toml"
    path.write_text(CONFIG_TOML)
    return path


@pytest.fixture(scope="module")
def cli_store(tmp_path_factory, config_path):
    store_dir = tmp_path_factory.mktemp("stores") / "cli_store"
    rc = main(["precompute", "--config", str(config_path), "--store", str(store_dir)])
    assert rc == 0
    return store_dir


class TestBasicCommands:
    def test_targets_lists_and_exports(self, tmp_path, capsys):
        rc = main(["targets", "--out", str(tmp_path / "geo")])
        assert rc == 0
        out = capsys.readouterr().out
        for name in ("digits", "letter", "sign", "stripes"):
            assert name in out
            assert (tmp_path / "geo" / f"{name}.json").exists()

    def test_render_writes_loadable_pbm(self, tmp_path):
        out = tmp_path / "img.pbm"
        rc = main(["render", "--target", "stripes", "--pose", "0,0,100,10,0,0",
                   "--out", str(out)])
        assert rc == 0
        img = BinaryImage.load_pbm(out)
        assert img.count() > 0

    def test_render_ascii_format(self, tmp_path):
        out = tmp_path / "img.pbm"
        rc = main(["render", "--target", "stripes", "--pose", "0,0,100,10,0,0",
                   "--format", "P1", "--out", str(out)])
        assert rc == 0
        assert out.read_bytes().startswith(b"P1")

    def test_partition_reports_counts(self, config_path, tmp_path, capsys):
        out = tmp_path / "boxes.json"
        rc = main(["partition", "--config", str(config_path), "--out", str(out)])
        assert rc == 0
        boxes = json.loads(out.read_text())
        assert len(boxes) >= 1
        assert {"center", "radius", "errorRatio"} <= set(boxes[0])

    def test_denoise_identity_on_clean_image(self, tmp_path):
        src = tmp_path / "clean.pbm"
        dst = tmp_path / "denoised.pbm"
        main(["render", "--target", "stripes", "--pose", "0,0,100,10,0,0",
              "--out", str(src)])
        rc = main(["denoise", str(src), str(dst)])
        assert rc == 0
        assert BinaryImage.load_pbm(src) == BinaryImage.load_pbm(dst)


class TestEstimateCommand:
    def test_estimate_writes_json_and_overlay(self, cli_store, tmp_path):
        img_path = tmp_path / "obs.pbm"
        main(["render", "--target", "stripes", "--pose", "0,0,100,10,0,0",
              "--out", str(img_path)])
        out = tmp_path / "result.json"
        overlay = tmp_path / "overlay.json"
        rc = main(["estimate", str(img_path), "--store", str(cli_store),
                   "--out", str(out), "--emit-overlay", str(overlay)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["summary"]["candidates"] >= 1
        assert isinstance(json.loads(overlay.read_text()), list)

    def test_store_env_var_default(self, cli_store, tmp_path, monkeypatch):
        monkeypatch.setenv("CERTIPOSE_STORE", str(cli_store))
        img_path = tmp_path / "obs.pbm"
        main(["render", "--target", "stripes", "--pose", "0,0,100,10,0,0",
              "--out", str(img_path)])
        rc = main(["estimate", str(img_path), "--out", str(tmp_path / "res.json")])
        assert rc == 0

    def test_missing_store_is_config_error(self, tmp_path, monkeypatch):
        monkeypatch.delenv("CERTIPOSE_STORE", raising=False)
        img_path = tmp_path / "obs.pbm"
        main(["render", "--target", "stripes", "--pose", "0,0,100,10,0,0",
              "--out", str(img_path)])
        assert main(["estimate", str(img_path)]) == 2

    def test_corrupt_store_is_store_error(self, cli_store, tmp_path):
        import shutil
        bad = tmp_path / "bad_store"
        shutil.copytree(cli_store, bad)
        victim = sorted((bad / "candidates").glob("*.bin"))[0]
        victim.write_bytes(b"garbage")
        img_path = tmp_path / "obs.pbm"
        main(["render", "--target", "stripes", "--pose", "0,0,100,10,0,0",
              "--out", str(img_path)])
        rc = main(["estimate", str(img_path), "--store", str(bad)])
        assert rc == 3

    def test_wrong_image_size_is_store_error(self, cli_store, tmp_path):
        img_path = tmp_path / "small.pbm"
        BinaryImage.zeros(32, 32).save_pbm(img_path)
        rc = main(["estimate", str(img_path), "--store", str(cli_store)])
        assert rc == 3


class TestExperimentCommand:
    def test_outputs_and_reproducibility(self, cli_store, config_path, tmp_path):
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        for out in (out1, out2):
            rc = main(["experiment", "--config", str(config_path),
                       "--store", str(cli_store), "--out", str(out),
                       "--stable-output"])
            assert rc == 0
        csv1 = (out1 / "experiment.csv").read_bytes()
        csv2 = (out2 / "experiment.csv").read_bytes()
        assert csv1 == csv2
        header = csv1.decode().splitlines()[0]
        assert header == ("sample,contained,candidatesAfterFilter,timeFilter_s,"
                          "timeRefine_s,normVolFilter,normVolOurs")
        assert (out1 / "volumes.png").stat().st_size > 0
        assert (out1 / "scene_000.png").stat().st_size > 0

    def test_contained_column_true_for_all_samples(self, cli_store, config_path, tmp_path):
        out = tmp_path / "run"
        rc = main(["experiment", "--config", str(config_path), "--store", str(cli_store),
                   "--out", str(out), "--samples", "4"])
        assert rc == 0
        lines = (out / "experiment.csv").read_text().splitlines()[1:]
        assert len(lines) == 4
        assert all(line.split(",")[1] == "true" for line in lines)

    def test_threads_flag_matches_sequential(self, cli_store, config_path, tmp_path):
        seq = tmp_path / "seq"
        par = tmp_path / "par"
        for out, threads in ((seq, "1"), (par, "2")):
            rc = main(["experiment", "--config", str(config_path),
                       "--store", str(cli_store), "--out", str(out),
                       "--stable-output", "--threads", threads])
            assert rc == 0
        assert (seq / "experiment.csv").read_bytes() == (par / "experiment.csv").read_bytes()

    def test_bad_config_exit_code(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[partition]\nepsilon_rate = -1.0\n")
        assert main(["partition", "--config", str(bad)]) == 2

    def test_missing_config_exit_code(self):
        assert main(["partition", "--config", "/nonexistent/x.toml"]) == 2


class TestConsoleScript:
    def test_entry_point_help(self):
        proc = subprocess.run([sys.executable, "-m", "certipose.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "certipose" in proc.stdout
