"""Line-delimited trace output.

One CSV record per line with the fixed header
``t_ns,kind,uav,pkt,x,y,z,detail``. Empty cells mean "not applicable".
Quoting follows the csv module's minimal dialect: a cell containing a comma,
quote or newline is wrapped in double quotes and inner quotes are doubled.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

FIELDS = ("t_ns", "kind", "uav", "pkt", "x", "y", "z", "detail")
KINDS = ("pos", "pkt_gen", "mac_tx", "mac_rx", "ack", "drop", "deliver", "energy", "conn")


def _num(v) -> str:
    return "" if v is None else f"{v:.3f}"


class TraceWriter:
    def __init__(self, path: str | Path | None = None, stream=None):
        if stream is None:
            path = Path(path)
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                stream = open(path, "w", newline="", encoding="utf-8")
            except OSError as exc:
                raise OSError(f"cannot open trace file {path}: {exc}") from exc
            self._owned = True
        else:
            self._owned = False
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(FIELDS)
        self.count = 0

    def emit(self, t_ns: int, kind: str, uav=None, pkt=None, pos=None, detail: str = ""):
        x = y = z = None
        if pos is not None:
            x, y, z = pos
        self.writer.writerow((t_ns, kind, "" if uav is None else uav, "" if pkt is None else pkt,
                              _num(x), _num(y), _num(z), detail))
        self.count += 1

    def close(self):
        if self._owned:
            self.stream.close()


def read_trace(path_or_text) -> list[dict[str, str]]:
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text):
        text = Path(path_or_text).read_text(encoding="utf-8")
    else:
        text = path_or_text
    return list(csv.DictReader(io.StringIO(text)))
