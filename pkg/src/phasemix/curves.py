"""Grid-sampled curves and their CSV round trip.

One abscissa column plus any number of value columns, with metadata
carried in leading `# key=value` comment lines. Floats are written with
repr's shortest round-trip form, so parse(format(curve)) reproduces the
arrays bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelValidationError

__all__ = ["CurveGrid"]


def _clean_name(name: str) -> str:
    if not name or any(ch in name for ch in ",\n\r#"):
        raise ModelValidationError(f"invalid column name {name!r}")
    return name


@dataclass(frozen=True)
class CurveGrid:
    """A set of curves sampled on a shared grid."""

    abscissa_name: str
    abscissa: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        xs = np.asarray(self.abscissa, dtype=float)
        _clean_name(self.abscissa_name)
        cols = {}
        for name, vals in self.columns.items():
            _clean_name(name)
            v = np.asarray(vals, dtype=float)
            if v.shape != xs.shape:
                raise ModelValidationError(
                    f"column {name!r} has shape {v.shape}, abscissa has {xs.shape}"
                )
            cols[name] = v
        for key, val in self.metadata.items():
            if "\n" in key or "\n" in str(val) or "=" in key:
                raise ModelValidationError(f"invalid metadata entry {key!r}")
        object.__setattr__(self, "abscissa", xs)
        object.__setattr__(self, "columns", cols)

    @property
    def n_points(self) -> int:
        return self.abscissa.shape[0]

    def format_csv(self) -> str:
        lines = [f"# {key}={val}" for key, val in self.metadata.items()]
        lines.append(",".join([self.abscissa_name, *self.columns]))
        names = list(self.columns)
        for k in range(self.n_points):
            row = [repr(float(self.abscissa[k]))]
            row.extend(repr(float(self.columns[name][k])) for name in names)
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.format_csv())

    @classmethod
    def parse_csv(cls, text: str) -> "CurveGrid":
        metadata: dict[str, str] = {}
        header: list[str] | None = None
        rows: list[list[float]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                key, sep, val = body.partition("=")
                if not sep:
                    raise ModelValidationError(
                        f"line {lineno}: metadata comment without '=': {raw!r}"
                    )
                metadata[key.strip()] = val.strip()
                continue
            if header is None:
                header = [h.strip() for h in line.split(",")]
                if len(header) < 2:
                    raise ModelValidationError(
                        f"line {lineno}: header needs an abscissa and at "
                        f"least one value column"
                    )
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ModelValidationError(
                    f"line {lineno}: {len(parts)} fields, header has {len(header)}"
                )
            try:
                rows.append([float(tok) for tok in parts])
            except ValueError as exc:
                raise ModelValidationError(
                    f"line {lineno}: non-numeric field in {raw!r}"
                ) from exc
        if header is None:
            raise ModelValidationError("no header line found")
        data = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))
        return cls(
            abscissa_name=header[0],
            abscissa=data[:, 0],
            columns={name: data[:, k + 1] for k, name in enumerate(header[1:])},
            metadata=metadata,
        )

    @classmethod
    def read_csv(cls, path) -> "CurveGrid":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse_csv(fh.read())
