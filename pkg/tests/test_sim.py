import os

import pytest

from polarcat.channel import ChannelParam, snr_to_sigma
from polarcat.construction import construct_concat_spec, construct_polar_spec
from polarcat.crc import CRC4, CRC8
from polarcat.sim import (
    CSV_HEADER,
    SimConfig,
    emit_outputs,
    parse_results_csv,
    result_to_csv,
    run_sweep,
    write_plot_script,
)
from polarcat.specfiles import PolarFileSpec, SpecFormatError, save_spec_file


@pytest.fixture(scope="module")
def small_specs(tmp_path_factory):
    """A small polar code (plain + CRC list) and a small concat code."""
    td = tmp_path_factory.mktemp("specs")
    ch = ChannelParam(kind="awgn", sigma=snr_to_sigma(2.0, 0.5))
    plain = PolarFileSpec(spec=construct_polar_spec(ch, 64, 32),
                          payload_bits=32, crc=None, list_size=1)
    scl = PolarFileSpec(spec=construct_polar_spec(ch, 64, 32 + 8),
                        payload_bits=32, crc=CRC8, list_size=8)
    concat = construct_concat_spec(ch, "polar", 8, 8, 32, crc=CRC4,
                                   list_target=4.0).spec
    paths = {}
    for name, obj in (("plain", plain), ("scl", scl), ("concat", concat)):
        paths[name] = str(td / f"{name}.txt")
        save_spec_file(obj, paths[name])
    return paths


def test_config_validation(small_specs):
    with pytest.raises(ValueError):
        SimConfig(scheme="magic", spec_path=small_specs["plain"], snrs_db=(1.0,))
    with pytest.raises(ValueError):
        SimConfig(scheme="plain-polar", spec_path=small_specs["plain"], snrs_db=())
    with pytest.raises(ValueError):
        SimConfig(scheme="plain-polar", spec_path=small_specs["plain"],
                  snrs_db=(1.0,), max_frames=0)


def test_single_worker_runs_are_byte_identical(small_specs):
    cfg = SimConfig(scheme="plain-polar", spec_path=small_specs["plain"],
                    snrs_db=(2.0, 3.0), max_frames=800,
                    target_frame_errors=40, seed=5)
    csv1 = result_to_csv(run_sweep(cfg))
    csv2 = result_to_csv(run_sweep(cfg))
    assert csv1 == csv2


def test_worker_count_does_not_change_results(small_specs):
    base = dict(scheme="scl-crc", spec_path=small_specs["scl"],
                snrs_db=(2.5,), max_frames=2500, target_frame_errors=30, seed=9)
    r1 = run_sweep(SimConfig(**base, workers=1))
    r2 = run_sweep(SimConfig(**base, workers=3))
    assert result_to_csv(r1) == result_to_csv(r2)


def test_widening_max_frames_keeps_matched_prefix(small_specs):
    base = dict(scheme="plain-polar", spec_path=small_specs["plain"],
                snrs_db=(2.0,), target_frame_errors=25, seed=7)
    short = run_sweep(SimConfig(**base, max_frames=900))
    long = run_sweep(SimConfig(**base, max_frames=5000))
    # the stopping frame is inside both budgets, so the rows are identical
    assert result_to_csv(short) == result_to_csv(long)


def test_noiseless_sentinel_point(small_specs):
    cfg = SimConfig(scheme="plain-polar", spec_path=small_specs["plain"],
                    snrs_db=(14.0,), max_frames=400, target_frame_errors=100,
                    seed=1)
    rows = run_sweep(cfg).rows
    assert rows[0].frames == 400
    assert rows[0].frame_errors == 0
    assert rows[0].fer == 0.0


def test_cross_seed_consistency(small_specs):
    base = dict(scheme="plain-polar", spec_path=small_specs["plain"],
                snrs_db=(2.0,), max_frames=4000, target_frame_errors=10 ** 9)
    f1 = run_sweep(SimConfig(**base, seed=1)).rows[0]
    f2 = run_sweep(SimConfig(**base, seed=2)).rows[0]
    sig = (f1.fer * (1 - f1.fer) / f1.frames) ** 0.5 + \
        (f2.fer * (1 - f2.fer) / f2.frames) ** 0.5
    assert abs(f1.fer - f2.fer) <= 3 * sig


def test_concat_scheme_runs_and_reports_lists(small_specs):
    cfg = SimConfig(scheme="concat", spec_path=small_specs["concat"],
                    snrs_db=(2.0,), max_frames=600, target_frame_errors=50,
                    seed=2)
    row = run_sweep(cfg).rows[0]
    assert row.avg_list_size >= 1.0
    assert row.op_count_mean > 0


def test_csv_round_trip_exact(small_specs):
    cfg = SimConfig(scheme="scl-crc", spec_path=small_specs["scl"],
                    snrs_db=(2.0, 4.0), max_frames=600,
                    target_frame_errors=20, seed=3)
    result = run_sweep(cfg)
    text = result_to_csv(result)
    rows = parse_results_csv(text)
    assert rows == result.rows


def test_emit_outputs_and_plot_script(tmp_path, small_specs):
    cfg = SimConfig(scheme="plain-polar", spec_path=small_specs["plain"],
                    snrs_db=(3.0,), max_frames=200, target_frame_errors=100,
                    seed=4)
    result = run_sweep(cfg)
    paths = emit_outputs(result, tmp_path / "out")
    assert os.path.exists(paths["csv"])
    text = open(paths["csv"]).read()
    assert text.splitlines()[0] == CSV_HEADER
    script = open(paths["plot"]).read()
    compile(script, paths["plot"], "exec")  # syntactically valid
    assert "results.csv" in script

    overlay = tmp_path / "overlay.py"
    write_plot_script([paths["csv"], "other.csv"], overlay)
    body = overlay.read_text()
    assert "other.csv" in body and "results.csv" in body


def test_emit_rejects_empty_result(tmp_path, small_specs):
    from polarcat.sim import SimResult
    empty = SimResult(scheme="plain-polar", payload_bits=8, block_length=16)
    with pytest.raises(ValueError):
        emit_outputs(empty, tmp_path)


def test_emit_unwritable_directory(tmp_path, small_specs):
    cfg = SimConfig(scheme="plain-polar", spec_path=small_specs["plain"],
                    snrs_db=(6.0,), max_frames=50, target_frame_errors=100,
                    seed=8)
    result = run_sweep(cfg)
    blocker = tmp_path / "file"
    blocker.write_text("occupied")
    with pytest.raises(OSError):
        emit_outputs(result, blocker / "nested")


def test_scheme_spec_mismatches(small_specs, tmp_path):
    with pytest.raises(ValueError):
        run_sweep(SimConfig(scheme="concat", spec_path=small_specs["plain"],
                            snrs_db=(1.0,)))
    with pytest.raises(ValueError):
        run_sweep(SimConfig(scheme="plain-polar", spec_path=small_specs["concat"],
                            snrs_db=(1.0,)))
    with pytest.raises(ValueError):
        run_sweep(SimConfig(scheme="scl-crc", spec_path=small_specs["plain"],
                            snrs_db=(1.0,)))
    bad = tmp_path / "bad.txt"
    bad.write_text("polar\n8 4\nxxxx1111\ncrc -\nlist 1\n")
    with pytest.raises(SpecFormatError):
        run_sweep(SimConfig(scheme="plain-polar", spec_path=str(bad),
                            snrs_db=(1.0,)))
