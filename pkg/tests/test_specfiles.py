import numpy as np
import pytest

from polarcat.concat import ConcatSpec
from polarcat.crc import CRC4, CRC8
from polarcat.inner_codes import InnerCode
from polarcat.polar import PolarSpec
from polarcat.specfiles import (
    PolarFileSpec,
    SpecFormatError,
    detect_format,
    dump_concat_spec,
    dump_polar_spec,
    load_spec_file,
    parse_concat_spec,
    parse_polar_spec,
    save_spec_file,
)

CONCAT_TEXT = """\
# toy code
8 2 5
1 2
2 4
- 10011
2
generator 8 2
10000000
01000000
polar 8 7
10000000
"""


def _sample_concat():
    fam = (InnerCode.from_generator(np.array([[1, 0, 0, 0], [0, 1, 0, 0]],
                                             dtype=np.uint8)),
           InnerCode.polar_column(PolarSpec.from_frozen_mask(
               np.array([True, False, False, False]))))
    return ConcatSpec(column_length=4, n_columns=2, total_info=5, family=fam,
                      assignments=(0, 1), list_sizes=(2, 4),
                      column_crcs=(None, None))


def test_parse_concat_text():
    spec = parse_concat_spec(CONCAT_TEXT)
    assert (spec.column_length, spec.n_columns, spec.total_info) == (8, 2, 5)
    assert spec.assignments == (0, 1)
    assert spec.list_sizes == (2, 4)
    assert spec.column_crcs[0] is None
    assert spec.column_crcs[1].to_string() == "10011"
    assert spec.columns[0].dimension == 2
    # polar column: 7 unfrozen minus the 4 CRC bits leaves 3 net info bits
    assert spec.columns[1].kind == "polar"
    assert spec.columns[1].dimension == 3


def test_concat_round_trip():
    spec = _sample_concat()
    text = dump_concat_spec(spec)
    again = parse_concat_spec(text)
    assert dump_concat_spec(again) == text
    assert again.total_info == spec.total_info
    assert again.list_sizes == spec.list_sizes


def test_concat_parse_errors_carry_line_numbers():
    bad = CONCAT_TEXT.replace("1 2", "1 2 3", 1)
    with pytest.raises(SpecFormatError) as err:
        parse_concat_spec(bad)
    assert err.value.line == 3  # assignment line (after comment + header)

    bad = CONCAT_TEXT.replace("01000000", "01x00000")
    with pytest.raises(SpecFormatError) as err:
        parse_concat_spec(bad)
    assert "0/1" in str(err.value)

    with pytest.raises(SpecFormatError):
        parse_concat_spec(CONCAT_TEXT + "\nleftover\n")

    with pytest.raises(SpecFormatError):
        parse_concat_spec(CONCAT_TEXT.replace("polar 8 7", "polar 8 6"))


def test_concat_semantic_error_total_info():
    bad = CONCAT_TEXT.replace("8 2 5", "8 2 6")
    with pytest.raises(SpecFormatError):
        parse_concat_spec(bad)


def test_polar_round_trip():
    mask = np.zeros(16, dtype=bool)
    mask[:6] = True
    pfs = PolarFileSpec(spec=PolarSpec.from_frozen_mask(mask), payload_bits=2,
                        crc=CRC8, list_size=8)
    text = dump_polar_spec(pfs)
    again = parse_polar_spec(text)
    assert dump_polar_spec(again) == text
    assert again.payload_bits == 2
    assert again.crc.to_string() == CRC8.to_string()
    assert again.list_size == 8


def test_polar_file_validation():
    mask = np.zeros(8, dtype=bool)
    with pytest.raises(ValueError):
        PolarFileSpec(spec=PolarSpec.from_frozen_mask(mask), payload_bits=8,
                      crc=CRC4, list_size=1)  # 8 + 4 != 8 unfrozen
    with pytest.raises(ValueError):
        PolarFileSpec(spec=PolarSpec.from_frozen_mask(mask), payload_bits=8,
                      crc=None, list_size=0)


def test_polar_parse_errors():
    with pytest.raises(SpecFormatError):
        parse_polar_spec("concat\n")
    text = "polar\n8 4\n11110000\ncrc -\nlist x\n"
    with pytest.raises(SpecFormatError) as err:
        parse_polar_spec(text)
    assert err.value.line == 5


def test_detect_and_file_round_trip(tmp_path):
    assert detect_format("polar\n8 4\n...") == "polar"
    assert detect_format("4 2 5\n...") == "concat"
    cpath = tmp_path / "c.txt"
    save_spec_file(_sample_concat(), cpath)
    assert isinstance(load_spec_file(cpath), ConcatSpec)
    mask = np.zeros(8, dtype=bool)
    ppath = tmp_path / "p.txt"
    save_spec_file(PolarFileSpec(spec=PolarSpec.from_frozen_mask(mask),
                                 payload_bits=8, crc=None, list_size=2), ppath)
    assert isinstance(load_spec_file(ppath), PolarFileSpec)
