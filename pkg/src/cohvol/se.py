"""SINR to spectral-efficiency lookup (floor-style, CQI-like table)."""
import bisect
import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple


class SeRow(NamedTuple):
    min_sinr_db: float
    spectral_efficiency: float
    label: str
    source: str = "calibration"


@dataclass(frozen=True)
class SeTable:
    rows: tuple

    def __post_init__(self):
        rows = tuple(SeRow(*r) for r in self.rows)
        if not rows:
            raise ValueError("SE table needs at least one row")
        for a, b in zip(rows, rows[1:]):
            if not (b.min_sinr_db > a.min_sinr_db and b.spectral_efficiency > a.spectral_efficiency):
                raise ValueError(f"SE table must be strictly increasing: {a.label!r} -> {b.label!r}")
        object.__setattr__(self, "rows", rows)

    def lookup(self, sinr_db):
        """Row with the highest threshold not above ``sinr_db`` (None below the table)."""
        if math.isnan(sinr_db):
            return None
        i = bisect.bisect_right([r.min_sinr_db for r in self.rows], sinr_db)
        return self.rows[i - 1] if i else None


def parse_table(text):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    return SeTable(tuple(SeRow(float(r["min_sinr_db"]), float(r["spectral_efficiency"]), r["label"],
                               r.get("source") or "calibration") for r in reader))


def load_table(path=None):
    """Table from ``path``, or the bundled default."""
    if path is None:
        text = resources.files("cohvol").joinpath("data/se_table.csv").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_table(text)


_DEFAULT = None


def default_table():
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_table()
    return _DEFAULT


def sinr_to_se(sinr_db, table=None):
    """Spectral efficiency in bps/Hz; 0 below the first row (outage)."""
    row = (table or default_table()).lookup(float(sinr_db))
    return 0.0 if row is None else row.spectral_efficiency
