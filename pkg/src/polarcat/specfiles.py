"""Plain-text code descriptions.

Concatenated format (whitespace separated, '#' comments allowed)::

    M N K
    a_1 ... a_N          one 1-based family index per column
    L_1 ... L_N          per-column list sizes
    c_1 ... c_N          per-column CRC polynomial bits ("10011") or "-"
    q                    number of family entries, then q blocks of either
    generator M K        followed by K rows of M characters '0'/'1', or
    polar M U            followed by the frozen mask ('1' = frozen), U unfrozen

Standalone polar format (used by the plain and list+CRC reference schemes)::

    polar
    N K                  K = payload bits, net of any CRC
    <frozen mask>
    crc 100000111        or "crc -"
    list 8
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .concat import ConcatSpec
from .crc import CrcConfig
from .inner_codes import InnerCode
from .polar import PolarSpec


class SpecFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class _Cursor:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, what: str) -> tuple[str, int]:
        while self.pos < len(self.lines):
            raw = self.lines[self.pos]
            self.pos += 1
            stripped = raw.split("#", 1)[0].strip()
            if stripped:
                return stripped, self.pos
        raise SpecFormatError(f"unexpected end of file, expected {what}",
                              len(self.lines))

    def done(self) -> bool:
        return all(not ln.split("#", 1)[0].strip() for ln in self.lines[self.pos:])


def _ints(text: str, count: int, what: str, line: int) -> list[int]:
    parts = text.split()
    if len(parts) != count:
        raise SpecFormatError(f"expected {count} {what}, found {len(parts)}", line)
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise SpecFormatError(f"bad integer in {what}: {exc}", line) from None


def _mask(text: str, length: int, line: int) -> np.ndarray:
    if len(text) != length or set(text) - {"0", "1"}:
        raise SpecFormatError(
            f"mask must be {length} characters of 0/1, got {text!r}", line)
    return np.array([c == "1" for c in text])


def parse_concat_spec(text: str) -> ConcatSpec:
    cur = _Cursor(text)
    head, line = cur.next("header 'M N K'")
    m_len, n_cols, k_total = _ints(head, 3, "header values", line)
    assign_text, line = cur.next("assignment line")
    assigns = _ints(assign_text, n_cols, "assignments", line)
    list_text, line = cur.next("list-size line")
    lists = _ints(list_text, n_cols, "list sizes", line)
    crc_text, line = cur.next("CRC line")
    crc_parts = crc_text.split()
    if len(crc_parts) != n_cols:
        raise SpecFormatError(
            f"expected {n_cols} CRC entries, found {len(crc_parts)}", line)
    crcs = []
    for part in crc_parts:
        if part == "-":
            crcs.append(None)
        else:
            try:
                crcs.append(CrcConfig.from_string(part))
            except ValueError as exc:
                raise SpecFormatError(f"bad CRC polynomial {part!r}: {exc}",
                                      line) from None
    q_text, line = cur.next("family count")
    (q,) = _ints(q_text, 1, "family count", line)
    family = []
    for _ in range(q):
        head, line = cur.next("family block header")
        parts = head.split()
        if parts[0] == "generator":
            if len(parts) != 3:
                raise SpecFormatError('generator header must be "generator M K"', line)
            length, dim = int(parts[1]), int(parts[2])
            if length != m_len:
                raise SpecFormatError(
                    f"family code length {length} != column length {m_len}", line)
            rows = []
            for _ in range(dim):
                row, rline = cur.next("generator row")
                rows.append(_mask(row, length, rline).astype(np.uint8))
            gen = np.array(rows, dtype=np.uint8).reshape((dim, length))
            try:
                family.append(InnerCode(length=length, dimension=dim, generator=gen))
            except ValueError as exc:
                raise SpecFormatError(str(exc), line) from None
        elif parts[0] == "polar":
            if len(parts) != 3:
                raise SpecFormatError('polar header must be "polar M U"', line)
            length, unfrozen = int(parts[1]), int(parts[2])
            if length != m_len:
                raise SpecFormatError(
                    f"polar column length {length} != column length {m_len}", line)
            mask_text, mline = cur.next("frozen mask")
            mask = _mask(mask_text, length, mline)
            if int(np.count_nonzero(~mask)) != unfrozen:
                raise SpecFormatError(
                    f"mask has {int(np.count_nonzero(~mask))} unfrozen positions, "
                    f"header says {unfrozen}", mline)
            family.append(InnerCode.polar_column(PolarSpec.from_frozen_mask(mask)))
        else:
            raise SpecFormatError(
                f"family block must start with 'generator' or 'polar', got {parts[0]!r}",
                line)
    if not cur.done():
        raise SpecFormatError("trailing content after family blocks", cur.pos + 1)
    try:
        return ConcatSpec(
            column_length=m_len, n_columns=n_cols, total_info=k_total,
            family=tuple(family),
            assignments=tuple(a - 1 for a in assigns),
            list_sizes=tuple(lists), column_crcs=tuple(crcs))
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from None


def dump_concat_spec(spec: ConcatSpec) -> str:
    out = [f"{spec.column_length} {spec.n_columns} {spec.total_info}"]
    out.append(" ".join(str(a + 1) for a in spec.assignments))
    out.append(" ".join(str(l) for l in spec.list_sizes))
    out.append(" ".join(c.to_string() if c is not None else "-"
                        for c in spec.column_crcs))
    out.append(str(len(spec.family)))
    for code in spec.family:
        if code.kind == "polar":
            cspec = code.column_spec
            out.append(f"polar {cspec.block_length} {cspec.info_count}")
            out.append("".join("1" if f else "0" for f in cspec.frozen_mask))
        else:
            out.append(f"generator {code.length} {code.dimension}")
            for row in code.generator:
                out.append("".join(str(int(b)) for b in row))
    return "\n".join(out) + "\n"


@dataclass
class PolarFileSpec:
    """A standalone polar code plus the decoder knobs the schemes need."""

    spec: PolarSpec
    payload_bits: int
    crc: CrcConfig | None
    list_size: int

    def __post_init__(self):
        r = 0 if self.crc is None else self.crc.degree
        if self.payload_bits + r != self.spec.info_count:
            raise ValueError(
                f"payload {self.payload_bits} + crc {r} != unfrozen "
                f"{self.spec.info_count}")
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")


def parse_polar_spec(text: str) -> PolarFileSpec:
    cur = _Cursor(text)
    tag, line = cur.next("format tag 'polar'")
    if tag != "polar":
        raise SpecFormatError(f"expected 'polar' tag, got {tag!r}", line)
    head, line = cur.next("header 'N K'")
    block, payload = _ints(head, 2, "header values", line)
    mask_text, mline = cur.next("frozen mask")
    mask = _mask(mask_text, block, mline)
    crc_text, cline = cur.next("crc line")
    parts = crc_text.split()
    if len(parts) != 2 or parts[0] != "crc":
        raise SpecFormatError('expected "crc <poly|->"', cline)
    crc = None if parts[1] == "-" else CrcConfig.from_string(parts[1])
    list_text, lline = cur.next("list line")
    parts = list_text.split()
    if len(parts) != 2 or parts[0] != "list":
        raise SpecFormatError('expected "list <size>"', lline)
    try:
        list_size = int(parts[1])
    except ValueError:
        raise SpecFormatError(f"bad list size {parts[1]!r}", lline) from None
    if not cur.done():
        raise SpecFormatError("trailing content after list line", cur.pos + 1)
    try:
        return PolarFileSpec(spec=PolarSpec.from_frozen_mask(mask),
                             payload_bits=payload, crc=crc, list_size=list_size)
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from None


def dump_polar_spec(pfs: PolarFileSpec) -> str:
    out = ["polar", f"{pfs.spec.block_length} {pfs.payload_bits}"]
    out.append("".join("1" if f else "0" for f in pfs.spec.frozen_mask))
    out.append(f"crc {pfs.crc.to_string() if pfs.crc is not None else '-'}")
    out.append(f"list {pfs.list_size}")
    return "\n".join(out) + "\n"


def detect_format(text: str) -> str:
    first = text.lstrip().split("\n", 1)[0].split("#", 1)[0].strip()
    return "polar" if first == "polar" else "concat"


def load_spec_file(path):
    """Returns a PolarFileSpec or a ConcatSpec depending on the file."""
    text = Path(path).read_text()
    if detect_format(text) == "polar":
        return parse_polar_spec(text)
    return parse_concat_spec(text)


def save_spec_file(obj, path):
    text = dump_polar_spec(obj) if isinstance(obj, PolarFileSpec) \
        else dump_concat_spec(obj)
    Path(path).write_text(text)
