import os

import numpy as np
import pytest

from hemishuffle import io as hio
from hemishuffle.cli import RunConfig, main, parse, to_config


def test_pnm_roundtrip(tmp_path):
    g = (np.arange(12, dtype=np.uint8) * 20).reshape(3, 4)
    path = tmp_path / "a.pgm"
    hio.write_image(path, g, "hello\nworld")
    np.testing.assert_array_equal(hio.read_image(path), g)
    rgb = np.random.default_rng(0).integers(0, 255, (4, 5, 3)).astype(np.uint8)
    hio.write_image(tmp_path / "b.ppm", rgb)
    np.testing.assert_array_equal(hio.read_image(tmp_path / "b.ppm"), rgb)
    w = np.array([[0, 65535], [1, 300]], dtype=np.uint16)
    hio.write_image(tmp_path / "c.pgm", w)
    np.testing.assert_array_equal(hio.read_image(tmp_path / "c.pgm"), w)
    with pytest.raises(ValueError):
        hio.write_image(tmp_path / "d.bmp", g)
    with pytest.raises(ValueError):
        hio.encode_pnm(g.astype(float))


def test_png_roundtrip(tmp_path):
    pytest.importorskip("PIL")
    rgb = np.zeros((3, 3, 3), dtype=np.uint8)
    rgb[1, 1] = [10, 20, 30]
    hio.write_image(tmp_path / "a.png", rgb)
    np.testing.assert_array_equal(hio.read_image(tmp_path / "a.png"), rgb)


def test_read_sweep_csv_repairs_partial_line(tmp_path):
    p = tmp_path / "s.csv"
    good = ",".join(hio.SWEEP_HEADER) + "\n" + hio.sweep_row(10, 20, 30, 0.5, 0.01, 5, 50)
    p.write_text(good + "10,30,30,0.4")
    rows = hio.read_sweep_csv(p)
    assert len(rows) == 1
    assert p.read_text() == good
    p.write_text("nonsense\n")
    with pytest.raises(hio.PartialFileError):
        hio.read_sweep_csv(p)


def test_config_roundtrip(tmp_path):
    argv = ["sweep", "--gamma", "120", "--step", "45", "--eps", "0.02", "--iters", "30",
            "--res", "40", "--fold", "--csv", str(tmp_path / "x.csv")]
    args = parse(argv)
    cfg = to_config(args)
    text = cfg.to_text()
    assert RunConfig.from_text(text) == cfg
    path = tmp_path / "run.cfg"
    path.write_text(text)
    again = parse(["sweep", "--config", str(path)])
    for k, v in vars(args).items():
        if k != "config":
            assert getattr(again, k) == v, k
    # flags override the file
    assert parse(["sweep", "--config", str(path), "--res", "41"]).res == 41


def test_config_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("command = sweep\nnot_an_option = 3\n")
    assert main(["sweep", "--config", str(path)]) == 2
    path.write_text("command = eset\n")
    assert main(["sweep", "--config", str(path), "--gamma", "10"]) == 2
    assert main(["sweep", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_exit_codes(tmp_path, capsys):
    assert main(["eset", "--alpha", "nan", "--beta", "1", "--gamma", "1"]) == 2
    assert main(["eset", "--alpha", "10", "--beta", "10"]) == 2
    assert main(["eset", "--alpha", "10", "--beta", "10", "--gamma", "10", "--eps", "-1"]) == 2
    assert main(["eset", "--alpha", "10", "--beta", "10", "--gamma", "10",
                 "--out", "/nonexistent/dir/x.pgm"]) == 2
    assert main(["atoms", "--alpha", "90", "--beta", "90", "--gamma", "90", "--threads", "0"]) == 2
    assert main(["nope"]) == 2


def test_atoms_and_theta_commands(capsys):
    assert main(["atoms", "--alpha", "57", "--beta", "57", "--gamma", "120"]) == 0
    out = capsys.readouterr().out
    assert "A1 = 3.42808" in out
    assert main(["theta", "--alpha", "57", "--beta", "57", "--gamma", "120", "--itinerary", "41^2"]) == 0


def test_eset_outputs(tmp_path):
    out = tmp_path / "e.pgm"
    fh = tmp_path / "f.pgm"
    csv = tmp_path / "g.csv"
    rc = main(["eset", "--alpha", "57", "--beta", "57", "--gamma", "120", "--eps", "0.01", "--iters", "50",
               "--res", "40", "--out", str(out), "--first-hit", str(fh), "--csv", str(csv), "--threads", "1"])
    assert rc == 0
    img = hio.read_image(out)
    assert img.shape == (40, 40)
    assert hio.read_image(fh).dtype == np.uint16
    assert csv.read_text().splitlines()[0] == ",".join(hio.GRID_HEADER)


def test_sweep_resume_is_byte_identical(tmp_path):
    base = ["sweep", "--gamma", "120", "--step", "60", "--eps", "0.02", "--iters", "40", "--res", "40",
            "--threads", "1"]
    full = tmp_path / "full.csv"
    assert main(base + ["--csv", str(full)]) == 0
    part = tmp_path / "part.csv"
    lines = full.read_text().splitlines(keepends=True)
    part.write_text("".join(lines[:3]) + lines[3][:7])
    assert main(base + ["--csv", str(part)]) == 0
    assert part.read_bytes() == full.read_bytes()
    # a different run against the same file is refused
    assert main(base[:-4] + ["--iters", "41", "--csv", str(part)]) == 2


def test_mix_command(tmp_path):
    prefix = str(tmp_path / "m")
    rc = main(["mix", "--alpha", "57", "--beta", "57", "--gamma", "120", "--res", "30",
               "--checkpoints", "0,3", "--out-prefix", prefix, "--field", "both"])
    assert rc == 0
    assert os.path.exists(prefix + "_0.ppm") and os.path.exists(prefix + "_3.ppm")
    assert main(["mix", "--alpha", "57", "--beta", "57", "--gamma", "120", "--field", "image",
                 "--out-prefix", prefix]) == 2


def test_branches_and_verify(tmp_path, capsys):
    csv = tmp_path / "b.csv"
    assert main(["branches", "--j-max", "2", "--points", "10", "--csv", str(csv)]) == 0
    assert len(csv.read_text().splitlines()) > 10
    assert main(["verify", "--check", "areas", "--check", "branches"]) == 0
    assert "PASS" in capsys.readouterr().out
