"""
FASTA documents exchanged between the sequence generator and the predictor
"""

from typing import Iterable, List, Tuple

from ..domain.models import AMINO_ACIDS, CandidateSequence
from ..errors import ArgumentError, FastaParseError

LINE_WIDTH = 60

_ALPHABET = frozenset(AMINO_ACIDS)


def compile_fasta(selected: Iterable[CandidateSequence]) -> str:
    """One '>' header per sequence, residues wrapped at 60 columns, order kept"""
    selected = list(selected)
    if not selected:
        raise ArgumentError("cannot compile an empty FASTA document")

    lines: List[str] = []
    for seq in selected:
        lines.append(f">{seq.id}")
        residues = seq.residues
        lines.extend(residues[i:i + LINE_WIDTH] for i in range(0, len(residues), LINE_WIDTH))
    return "\n".join(lines) + "\n"


def parse_fasta(doc: str) -> List[Tuple[str, str]]:
    """
    Parse a FASTA document into ordered (id, residues) pairs.

    Body lines are stripped and concatenated. Blank lines are ignored.

    Raises:
        FastaParseError: content before the first header, an empty header or
            body, or a residue outside the 20-letter alphabet; the error names
            the offending 1-based line.
    """
    records: List[Tuple[str, str]] = []
    current_id = None
    header_line = 0
    body: List[str] = []

    def close() -> None:
        if current_id is None:
            return
        if not body:
            raise FastaParseError(header_line, f"empty sequence body for '{current_id}'")
        records.append((current_id, "".join(body)))

    for lineno, raw in enumerate(doc.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            close()
            current_id = line[1:].strip()
            if not current_id:
                raise FastaParseError(lineno, "header without an id")
            header_line = lineno
            body = []
            continue
        if current_id is None:
            raise FastaParseError(lineno, "content before the first header")
        bad = sorted(set(line) - _ALPHABET)
        if bad:
            raise FastaParseError(lineno, f"illegal residue character '{bad[0]}'")
        body.append(line)

    close()
    return records
