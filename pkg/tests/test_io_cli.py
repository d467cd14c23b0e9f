import json

import numpy as np
import pytest

from vectorheat import io, models, vdm
from vectorheat.cli import main
from vectorheat.errors import InputError


def test_spectra_round_trip(tmp_path, sphere):
    tangent, scalar = models.analytic_spectra(sphere, 24, models.sample(sphere, 50))
    path = tmp_path / "s.json"
    io.save_spectra(path, tangent, scalar)
    t2, s2 = io.load_spectra(path)
    np.testing.assert_array_equal(t2.eigenvalues, tangent.eigenvalues)
    np.testing.assert_array_equal(t2.fields, tangent.fields)
    np.testing.assert_array_equal(s2.functions, scalar.functions)
    np.testing.assert_allclose(t2.cloud.ambient, tangent.cloud.ambient, atol=1e-15)
    assert t2.model.to_dict() == tangent.model.to_dict()


def test_corrupted_spectra_rejected(tmp_path, circle):
    tangent, _ = models.analytic_spectra(circle, 5, models.sample(circle, 8))
    doc = io.spectra_to_dict(tangent)
    bad = dict(doc, version="other")
    with pytest.raises(InputError):
        io.spectra_from_dict(bad)
    frames = np.array(doc["frames"])
    with pytest.raises(InputError):
        io.spectra_from_dict(dict(doc, frames=(2 * frames).tolist()))
    with pytest.raises(InputError):
        io.spectra_from_dict(dict(doc, multiplicities=[5]))
    (tmp_path / "junk.json").write_text("{not json")
    with pytest.raises(InputError):
        io.load_spectra(tmp_path / "junk.json")


def test_csv_precision(tmp_path):
    io.write_csv(tmp_path / "a.csv", [[1 / 3, 2.0]])
    assert (tmp_path / "a.csv").read_text().strip() == "0.333333333333,2"
    np.testing.assert_allclose(io.read_csv_matrix(tmp_path / "a.csv"), [[1 / 3, 2]], rtol=1e-11)


def test_cli_spectrum_writes_file(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["spectrum", "--model", "circle", "--n", "32", "--count", "9", "--out", str(out)]) == 0
    tangent, scalar = io.load_spectra(out)
    assert list(tangent.eigenvalues[:5]) == [0, 1, 1, 4, 4]
    assert "lambda_j" in capsys.readouterr().out


def test_cli_discrete_against_analytic(capsys):
    code = main(["spectrum", "--model", "circle", "--source", "discrete", "--n", "400", "--count", "5", "--against-analytic"])
    assert code == 0
    assert capsys.readouterr().out.count("[PASS]") == 2


def test_cli_bad_input(tmp_path, capsys):
    assert main(["embed", "--model", "circle", "--t", "-1"]) == 2
    (tmp_path / "bad.json").write_text("[]")
    assert main(["dist", "--spectrum", str(tmp_path / "bad.json")]) == 2
    assert main(["embed", "--model", "circle", "--n", "16", "--count", "9", "--K", "2"]) == 2
    with pytest.raises(SystemExit):
        main(["embed", "--model", "klein"])


def test_cli_dist_matrix(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["dist", "--model", "sphere2", "--n", "50", "--count", "24", "--t", "0.3", "--out", str(out)]) == 0
    D = io.read_csv_matrix(out)
    assert D.shape == (50, 50)
    np.testing.assert_array_equal(D, D.T)
    np.testing.assert_array_equal(np.diag(D), 0)
    tangent, _ = models.analytic_spectra(models.make_model("sphere2"), 24, models.sample(models.make_model("sphere2"), 50))
    assert D[0, 7] == pytest.approx(vdm.vdm_distance(tangent, 0.3, 0, 7), rel=1e-10)


def test_cli_embed_json(tmp_path):
    out = tmp_path / "e.json"
    assert main(["embed", "--model", "flat_torus", "--n", "16", "--count", "9", "--t", "0.2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["K"] == 9 and np.array(doc["coords"]).shape == (16, 81)


def test_cli_verify(capsys):
    assert main(["verify", "--model", "circle", "--n", "64", "--count", "41", "--configs", "5"]) == 0
    out = capsys.readouterr().out
    assert "ratio=1" in out
    assert main(["verify", "--model", "flat_torus", "--n", "64", "--count", "120", "--configs", "3", "--t", "0.5"]) == 0
    assert "ratio=2" in capsys.readouterr().out


def test_cli_verify_strict_fails_on_torus():
    args = ["verify", "--model", "flat_torus", "--n", "64", "--count", "120", "--configs", "2", "--t", "0.5", "--strict"]
    assert main(args) == 1


def test_cli_compare(tmp_path):
    out = tmp_path / "cmp.json"
    args = ["compare", "--model", "flat_torus", "--periods", "6.283185307179586", "4", "--relabel", "--budget", "6"]
    assert main(args + ["--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "isometric-consistent" and doc["upper"] < 1e-6
    args = ["compare", "--model", "sphere2", "--model-b", "flat_torus", "--match-volume", "--budget", "2"]
    assert main(args + ["--out", str(out)]) == 3
    assert json.loads(out.read_text())["lower"] > 0.1


def test_cli_report(capsys):
    assert main(["report", "--model", "flat_torus", "--n", "16", "--count", "200", "--t", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,Z_TM,Z_M,ratio"
    assert float(lines[1].split(",")[-1]) == pytest.approx(2, rel=1e-9)


def test_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("VECTORHEAT_CACHE", str(tmp_path))
    args = ["spectrum", "--model", "circle", "--n", "16", "--count", "5"]
    assert main(args) == 0
    files = list(tmp_path.glob("*.json"))
    assert len(files) == 1
    mtime = files[0].stat().st_mtime_ns
    assert main(args) == 0
    assert files[0].stat().st_mtime_ns == mtime


def test_serial_flag_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["dist", "--model", "circle", "--n", "40", "--count", "21", "--serial"]
    assert main(base + ["--out", str(a)]) == 0 and main(base + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
