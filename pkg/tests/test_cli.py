import numpy as np
import pytest

from polarcat.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    td = tmp_path_factory.mktemp("cli")
    rc = main(["construct", "--scheme", "polar", "--block-length", "64",
               "--info-bits", "32", "--crc", "-", "--list-size", "1",
               "--design-ebn0-db", "2.0", "--out", str(td / "polar.txt")])
    assert rc == 0
    rc = main(["construct", "--scheme", "concat", "--n-columns", "8",
               "--column-length", "8", "--info-bits", "32", "--crc", "10011",
               "--list-target", "4", "--design-ebn0-db", "2.0",
               "--out", str(td / "concat.txt")])
    assert rc == 0
    return td


def test_construct_outputs_exist_and_parse(workdir, capsys):
    from polarcat.specfiles import load_spec_file
    polar = load_spec_file(workdir / "polar.txt")
    concat = load_spec_file(workdir / "concat.txt")
    assert polar.spec.block_length == 64
    assert concat.total_info == 32


def test_encode_decode_round_trip_concat(workdir):
    rng = np.random.default_rng(0)
    msg = "".join(str(b) for b in rng.integers(0, 2, 32))
    (workdir / "msg.txt").write_text(msg + "\n")
    rc = main(["encode", "--spec", str(workdir / "concat.txt"),
               "--in", str(workdir / "msg.txt"),
               "--out", str(workdir / "cw.txt")])
    assert rc == 0
    bits = (workdir / "cw.txt").read_text().split()[0]
    assert len(bits) == 64
    llrs = " ".join("20.0" if c == "0" else "-20.0" for c in bits)
    (workdir / "llr.txt").write_text(llrs + "\n")
    rc = main(["decode", "--spec", str(workdir / "concat.txt"),
               "--in", str(workdir / "llr.txt"),
               "--out", str(workdir / "dec.txt")])
    assert rc == 0
    assert (workdir / "dec.txt").read_text().strip() == msg


def test_encode_decode_round_trip_polar(workdir):
    rng = np.random.default_rng(1)
    msg = "".join(str(b) for b in rng.integers(0, 2, 32))
    (workdir / "pmsg.txt").write_text(msg + "\n")
    assert main(["encode", "--spec", str(workdir / "polar.txt"),
                 "--in", str(workdir / "pmsg.txt"),
                 "--out", str(workdir / "pcw.txt")]) == 0
    bits = (workdir / "pcw.txt").read_text().split()[0]
    llrs = " ".join("20.0" if c == "0" else "-20.0" for c in bits)
    (workdir / "pllr.txt").write_text(llrs + "\n")
    assert main(["decode", "--spec", str(workdir / "polar.txt"),
                 "--in", str(workdir / "pllr.txt"),
                 "--out", str(workdir / "pdec.txt")]) == 0
    assert (workdir / "pdec.txt").read_text().strip() == msg


def test_simulate_writes_outputs(workdir, capsys):
    out = workdir / "sim"
    rc = main(["simulate", "--scheme", "plain-polar",
               "--spec", str(workdir / "polar.txt"), "--snrs", "3.0",
               "--max-frames", "300", "--target-errors", "30",
               "--seed", "1", "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "Eb/N0" in captured.out and "Es/N0" in captured.out
    csv = (out / "results.csv").read_text().splitlines()
    assert csv[0].startswith("snr_db,frames,frame_errors")
    assert (out / "plot_results.py").exists()


def test_bad_spec_reports_error(workdir, capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("polar\n8 4\n0000\ncrc -\nlist 1\n")  # short mask
    rc = main(["simulate", "--scheme", "plain-polar", "--spec", str(bad),
               "--snrs", "1.0", "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_bad_bits_file(workdir, capsys, tmp_path):
    msg = tmp_path / "m.txt"
    msg.write_text("01012\n")
    rc = main(["encode", "--spec", str(workdir / "concat.txt"),
               "--in", str(msg), "--out", str(tmp_path / "o.txt")])
    assert rc == 2
    assert "0/1" in capsys.readouterr().err


def test_construct_with_family_file(tmp_path, capsys):
    fam = tmp_path / "family.txt"
    fam.write_text("4 0\n\n4 1\n1111\n\n4 4\n1000\n0100\n0010\n0001\n")
    rc = main(["construct", "--scheme", "concat", "--n-columns", "4",
               "--column-length", "4", "--info-bits", "8", "--crc", "-",
               "--channel", "bsc", "--crossover", "0.05",
               "--family-file", str(fam), "--out", str(tmp_path / "g.txt")])
    assert rc == 0
    from polarcat.specfiles import load_spec_file
    spec = load_spec_file(tmp_path / "g.txt")
    assert spec.total_info == 8
    assert "predicted union-bound" in capsys.readouterr().out
