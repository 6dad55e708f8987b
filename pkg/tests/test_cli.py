import json
import subprocess
import sys
import time

import numpy as np
import pytest

from corrinfo.cli import main
from corrinfo.grid import Volume
from corrinfo.io.curves import read_curves
from corrinfo.io.mrc import read_mrc, write_mrc


@pytest.fixture
def halves(tmp_path):
    rng = np.random.default_rng(7)
    k = np.fft.fftfreq(32)
    kz, ky, kx = np.meshgrid(k, k, k, indexing="ij")
    base = np.fft.ifftn(np.fft.fftn(rng.standard_normal((32,) * 3)) * np.exp(-(kx**2 + ky**2 + kz**2) / 0.02)).real
    base /= base.std()
    a = Volume(base + 0.5 * rng.standard_normal(base.shape), 1.1)
    b = Volume(base + 0.5 * rng.standard_normal(base.shape), 1.1)
    write_mrc(a, tmp_path / "a.mrc")
    write_mrc(b, tmp_path / "b.mrc")
    return tmp_path / "a.mrc", tmp_path / "b.mrc"


def _params_line(err):
    lines = [ln for ln in err.splitlines() if ln.startswith("corrinfo params ")]
    assert len(lines) == 1
    return json.loads(lines[0][len("corrinfo params "):])


def test_fsc_to_file_and_plot(halves, tmp_path, capsys):
    a, b = halves
    assert main(["fsc", str(a), str(b), "-o", str(tmp_path / "f.csv"), "--plot", str(tmp_path / "f.svg")]) == 0
    cap = capsys.readouterr()
    params = _params_line(cap.err)
    assert params["command"] == "fsc" and params["step"] == 1.1 and params["shell_width"] == pytest.approx(1 / 35.2)
    crossing = json.loads(cap.out.strip().splitlines()[-1])
    assert crossing["crossed"] and crossing["resolution"] == pytest.approx(1 / crossing["frequency"])
    cf = read_curves(tmp_path / "f.csv")
    assert set(cf.curves) == {"fsc", "half_bit"} and cf.step == 1.1
    assert (tmp_path / "f.svg").stat().st_size > 0


def test_fsc_stdout(halves, capsys):
    a, b = halves
    assert main(["fsc", str(a), str(b)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "shell,freq_abs,freq_frac_nyquist,value,flags"
    assert len(out) == 1 + 17


def test_fsi_and_gic(halves, tmp_path, capsys):
    a, b = halves
    assert main(["fsi", str(a), str(b), "-o", str(tmp_path / "i.json"), "--kappa", "0.3"]) == 0
    assert read_curves(tmp_path / "i.json").single.kind == "fsi"
    capsys.readouterr()
    assert main(["gic", str(a), str(b), "--band", "0.1", "0.5"]) == 0
    cap = capsys.readouterr()
    doc = json.loads(cap.out)
    assert doc["gic_bits"] > 0 and doc["band"] == [0.1, 0.5] and doc["caveat"]
    assert _params_line(cap.err)["f_lo"] == 0.1


def test_lid_map(halves, tmp_path, capsys):
    a, b = halves
    assert main(["lid", str(a), str(b), "--window", "16", "--stride", "8", "-o", str(tmp_path / "l.mrc")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["evaluated_voxels"] > 0
    assert read_mrc(tmp_path / "l.mrc").dims == (32, 32, 32)


def test_tie(tmp_path, capsys):
    rng = np.random.default_rng(3)
    sig = rng.standard_normal((24, 24))
    for tag, gain in (("o", 1.0), ("i", 2.0)):
        names = []
        for j in range(2):
            for h in "ab":
                name = f"{tag}{j}{h}.npy"
                np.save(tmp_path / name, gain * sig + rng.standard_normal(sig.shape))
                names.append(name)
        (tmp_path / f"{tag}.json").write_text(json.dumps({"step": 1.0, "pairs": [names[:2], names[2:]]}))
    out = tmp_path / "t.csv"
    assert main(["tie", str(tmp_path / "o.json"), str(tmp_path / "i.json"), "--relative", "-o", str(out)]) == 0
    cf = read_curves(out)
    assert {"tie", "fri_out", "fri_in", "envelope_out"} == set(cf.curves)


def test_pic(tmp_path, capsys):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(128)
    np.savetxt(tmp_path / "p1.csv", x, delimiter=",")
    (tmp_path / "p2.raw").write_bytes((x + 0.1 * rng.standard_normal(128)).astype("<f4").tobytes())
    assert main(["pic", str(tmp_path / "p1.csv"), str(tmp_path / "p2.raw"), "--bandwidth", "0.5", "--length", "128"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["ccc_real"] == pytest.approx(doc["ccc_fourier"], abs=1e-9)
    assert doc["pic_real_bits"] / 0.5 == pytest.approx(doc["pic_fourier_bits"] / 128)


def test_check_strict_exit(tmp_path, capsys):
    rng = np.random.default_rng(1)
    np.save(tmp_path / "noise.npy", rng.standard_normal((32, 32, 32)))
    assert main(["check", str(tmp_path / "noise.npy")]) == 0
    assert main(["check", str(tmp_path / "noise.npy"), "--strict", "-o", str(tmp_path / "r.json")]) == 3
    ids = [r["check_id"] for r in json.loads((tmp_path / "r.json").read_text())]
    assert ids == ["A", "G", "H"]


def test_resample(halves, tmp_path, capsys):
    a, _ = halves
    assert main(["resample", str(a), "--to-step", "0.88", "-o", str(tmp_path / "r.mrc")]) == 0
    v = read_mrc(tmp_path / "r.mrc")
    assert v.dims == (40, 40, 40) and v.step == pytest.approx(0.88)


def test_exit_codes(halves, tmp_path, capsys):
    a, _ = halves
    assert main([]) == 1
    assert main(["fsc", str(a)]) == 1
    assert main(["fsc", "--bogus", str(a), str(a)]) == 1
    assert main(["fsc", str(a), str(tmp_path / "missing.mrc")]) == 2
    (tmp_path / "junk.mrc").write_bytes(b"\0" * 2000)
    assert main(["fsc", str(a), str(tmp_path / "junk.mrc")]) == 2
    assert main(["fetch-emdb", "EMD-xyz", "--cache-dir", str(tmp_path)]) == 2
    assert main(["--version"]) == 0


def test_config_precedence(halves, tmp_path, capsys):
    a, b = halves
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"fsc": {"symmetry": 4, "fill-linear": 0.9}}))
    assert main(["--config", str(cfg), "fsc", str(a), str(b)]) == 0
    p = _params_line(capsys.readouterr().err)
    assert p["symmetry"] == 4 and p["fill_linear"] == 0.9
    assert main(["--config", str(cfg), "fsc", str(a), str(b), "--symmetry", "2"]) == 0
    p = _params_line(capsys.readouterr().err)
    assert p["symmetry"] == 2 and p["fill_linear"] == 0.9
    cfg.write_text(json.dumps({"fsc": {"no_such_option": 1}}))
    assert main(["--config", str(cfg), "fsc", str(a), str(b)]) == 1
    cfg.write_text("{not json")
    assert main(["--config", str(cfg), "fsc", str(a), str(b)]) == 1


def test_model_experiment_then_plot_end_to_end(tmp_path):
    t0 = time.perf_counter()
    csv_path, svg, replot = tmp_path / "m.csv", tmp_path / "m.svg", tmp_path / "p.svg"
    run = subprocess.run(
        [sys.executable, "-m", "corrinfo.cli", "model-experiment", "--dims", "48", "--seed", "3",
         "-o", str(csv_path), "--plot", str(svg)],
        capture_output=True, text=True, check=False,
    )
    assert run.returncode == 0, run.stderr
    summary = json.loads(run.stdout)
    assert summary["additivity_rel_error"] < 1e-9
    assert _params_line(run.stderr)["noise_seed"] == 3 + 1_000_003
    run2 = subprocess.run(
        [sys.executable, "-m", "corrinfo.cli", "plot", str(csv_path), "--panels", "-o", str(replot)],
        capture_output=True, text=True, check=False,
    )
    assert run2.returncode == 0, run2.stderr
    assert svg.stat().st_size > 0 and replot.stat().st_size > 0
    assert time.perf_counter() - t0 < 120
