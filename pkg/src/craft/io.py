"""CSV + JSON-schema reading and writing.

Numeric values are written with ``repr``, the shortest string that parses
back to the same double, so ``read_csv(emit(ds))`` reproduces ``ds``
exactly.  Every file is written to a temporary sibling and renamed into
place, so readers never see a partial file.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

from .data import Dataset, Schema, ingest
from .errors import ConfigError, EmptyDataset, SchemaError


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _open_error(path, exc: OSError) -> ConfigError:
    return ConfigError(f"cannot read {path}: {exc.strerror or exc}")


def read_schema(path) -> Schema:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise _open_error(path, exc) from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: schema must be a JSON object")
    return Schema.from_dict(obj)


def read_csv(path, schema: Schema) -> Dataset:
    """Parse a CSV whose header names the schema columns (in any order)."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise EmptyDataset(f"{path}: file is empty")
            return ingest(schema, list(reader), header=header)
    except OSError as exc:
        raise _open_error(path, exc) from None


def dataset_rows(data: Dataset):
    """Header plus string rows in schema order, label last."""
    header = list(data.schema.names)
    if data.schema.label_column:
        header.append(data.schema.label_column)
    cat_pos = {int(d): j for j, d in enumerate(data.cat_features)}
    num_pos = {int(d): j for j, d in enumerate(data.num_features)}
    rows = []
    for n in range(data.N):
        row = []
        for d, col in enumerate(data.schema.columns):
            if d in cat_pos:
                row.append(col.categories[data.cat[n, cat_pos[d]]])
            else:
                row.append(repr(float(data.num[n, num_pos[d]])))
        if data.schema.label_column:
            row.append(data.label_names[data.labels[n]] if data.labels is not None else "")
        rows.append(row)
    return header, rows


def emit(data: Dataset, csv_path, schema_path) -> None:
    """Write ``data`` as a schema JSON and a CSV that :func:`read_csv` reads back.

    The schema is written first; an empty dataset then raises
    :class:`EmptyDataset` without creating the CSV.
    """
    atomic_write_text(schema_path, json.dumps(data.schema.to_dict(), indent=2) + "\n")
    if data.N < 1:
        raise EmptyDataset(f"refusing to write {csv_path}: dataset has no rows")
    header, rows = dataset_rows(data)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(csv_path, buf.getvalue())
