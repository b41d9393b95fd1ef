import os
import subprocess
import sys

import numpy as np
import pytest

from tafibench.cli import main
from tafibench.media import read_y4m_file, write_y4m_file
from tafibench.taxonomy import TextureClass
from tafibench.texgen import make_default_spec, synth_clip
from tafibench.tuning import load_profiles

SMALL = ["--width", "64", "--height", "64", "--frames", "8"]


def _synth(tmp_path, per_class=1):
    rc = main(["synth", "--out", str(tmp_path), "--per-class", str(per_class),
               "--seed", "5"] + SMALL + ["--workers", "1"])
    assert rc == 0
    return tmp_path / "train.manifest.csv", tmp_path / "test.manifest.csv"


def _fast_cfg(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("tuning.triplets_per_round = 4\n"
                   "tuning.rounds = 2\n"
                   "tuning.patch = 48\n"
                   "bench.workers = 1\n")
    return cfg


def test_synth_writes_manifests_and_clips(tmp_path):
    train, test = _synth(tmp_path)
    assert train.exists() and test.exists()
    lines = train.read_text().strip().splitlines()
    assert len(lines) == 1 + 3  # header + one clip per class
    clip_files = list((tmp_path / "clips" / "train").glob("*.y4m"))
    assert len(clip_files) == 3


def test_synth_deterministic(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    _synth(a_dir)
    _synth(b_dir)
    for name in os.listdir(a_dir / "clips" / "train"):
        a = (a_dir / "clips" / "train" / name).read_bytes()
        b = (b_dir / "clips" / "train" / name).read_bytes()
        assert a == b


def test_full_cli_flow(tmp_path, capsys):
    train, test = _synth(tmp_path)
    cfg = _fast_cfg(tmp_path)
    profiles_path = tmp_path / "profiles.txt"
    rc = main(["tune", "--manifest", str(train), "--out", str(profiles_path),
               "--seed", "3", "--config", str(cfg), "--workers", "1"])
    assert rc == 0
    profiles = load_profiles(profiles_path)
    assert set(profiles.profiles) == {"baseline", "static", "dyndis", "dyncon",
                                      "mixed"}

    out_dir = tmp_path / "report"
    rc = main(["evaluate", "--manifest", str(test), "--profiles",
               str(profiles_path), "--out", str(out_dir), "--workers", "1"])
    assert rc == 0
    assert (out_dir / "scores_flat.csv").exists()
    assert (out_dir / "comparison.txt").exists()

    rc = main(["stats", "--scores", str(out_dir / "scores_flat.csv"),
               "--out", str(tmp_path / "stats2.txt")])
    assert rc == 0
    assert "anova across classes" in (tmp_path / "stats2.txt").read_text()


def test_cli_classify(tmp_path, capsys):
    _, test = _synth(tmp_path)
    rc = main(["classify", "--manifest", str(test),
               "--out", str(tmp_path / "pred.csv")])
    assert rc == 0
    lines = (tmp_path / "pred.csv").read_text().strip().splitlines()
    assert lines[0] == "clip_id,predicted,label"
    assert len(lines) == 4


def test_cli_interpolate_triplet_and_clip(tmp_path):
    clip = synth_clip(make_default_spec(TextureClass.STATIC, seed=4, width=64,
                                        height=64, n_frames=6))
    src = tmp_path / "in.y4m"
    write_y4m_file(clip, src)
    mid = tmp_path / "mid.y4m"
    rc = main(["interpolate", "--input", str(src), "--output", str(mid),
               "--triplet", "2", "--dump-motion", str(tmp_path / "mf.txt")])
    assert rc == 0
    assert len(read_y4m_file(mid)) == 1
    motion_text = (tmp_path / "mf.txt").read_text()
    assert motion_text.splitlines()[0].startswith("64 64")

    recon = tmp_path / "recon.y4m"
    rc = main(["interpolate", "--input", str(src), "--output", str(recon)])
    assert rc == 0
    out = read_y4m_file(recon)
    assert len(out) == 6
    assert out.frames[0] == clip.frames[0]


def test_cli_input_error_exit_code(tmp_path):
    rc = main(["evaluate", "--manifest", str(tmp_path / "missing.csv"),
               "--profiles", str(tmp_path / "nope.txt"),
               "--out", str(tmp_path / "r")])
    assert rc == 1


def test_cli_bad_usage_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["synth"])   # missing required --out
    assert exc.value.code == 1


def test_cli_tool_error_exit_code(tmp_path):
    train, test = _synth(tmp_path)
    cfg = tmp_path / "vmaf.cfg"
    cfg.write_text("tuning.triplets_per_round = 4\n"
                   "tuning.rounds = 1\n"
                   "tuning.patch = 48\n"
                   "bench.workers = 1\n"
                   f"vmaf.command = {sys.executable} -c \"import sys; sys.exit(3)\"\n")
    profiles_path = tmp_path / "profiles.txt"
    assert main(["tune", "--manifest", str(train), "--out", str(profiles_path),
                 "--config", str(cfg), "--workers", "1"]) == 0
    rc = main(["evaluate", "--manifest", str(test), "--profiles",
               str(profiles_path), "--out", str(tmp_path / "rep"),
               "--config", str(cfg)])
    assert rc == 2


def test_cli_show_config(capsys):
    assert main(["show-config"]) == 0
    out = capsys.readouterr().out
    assert "stats.alpha" in out and "tuning.rounds" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tafibench.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "synth" in proc.stdout and "evaluate" in proc.stdout