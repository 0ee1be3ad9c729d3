"""
Run reports: one row per operation, printed as an aligned table and saved as JSON.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

# lambda tags a row may carry
LAMBDA_METHODS = ("exact", "power", "cert")


@dataclass
class ReportRow:
    operation: str
    dim: int
    degree: int
    lambda_value: Optional[float] = None
    method: Optional[str] = None
    note: str = ""

    def __post_init__(self):
        if self.lambda_value is not None and self.method not in LAMBDA_METHODS:
            raise ValueError(f"lambda value needs a method tag from {LAMBDA_METHODS}, got {self.method!r}")


@dataclass
class RunReport:
    """What a command did: echo, seed, timing and the per-step rows."""
    command: str
    seed: Optional[int] = None
    wall_time: float = 0.0
    rows: List[ReportRow] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)

    def add(self, operation: str, dim: int, degree: int, lambda_value: Optional[float] = None,
            method: Optional[str] = None, note: str = "") -> ReportRow:
        row = ReportRow(operation, dim, degree, lambda_value, method, note)
        self.rows.append(row)
        return row

    def to_table(self) -> str:
        headers = ["operation", "dim", "degree", "lambda", "method", "note"]
        body = [[
            row.operation,
            str(row.dim),
            str(row.degree),
            "-" if row.lambda_value is None else f"{row.lambda_value:.12f}",
            row.method or "-",
            row.note,
        ] for row in self.rows]
        widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(headers)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)),
                 "  ".join("-" * w for w in widths)]
        lines += ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)) for r in body]
        return "\n".join(line.rstrip() for line in lines)

    def to_document(self) -> Dict[str, Any]:
        """Machine-readable form. Wall time is left out so reruns are byte-identical."""
        return {
            "command": self.command,
            "seed": self.seed,
            "rows": [asdict(row) for row in self.rows],
            **({"extra": self.extra} if self.extra else {}),
        }

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_document(), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
