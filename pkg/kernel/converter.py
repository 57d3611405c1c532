import json
import math
import os
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd


def convert_value(value):
    """JSON-safe form of a result value: complex as {re, im}, non-finite floats as strings."""
    if hasattr(value, "to_record"):
        return convert_value(value.to_record())

    if isinstance(value, pd.DataFrame):
        return [convert_value(row) for row in value.to_dict(orient="records")]

    if isinstance(value, np.ndarray):
        return [convert_value(v) for v in value.tolist()]

    if isinstance(value, np.generic):
        return convert_value(value.item())

    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value

    if isinstance(value, float):
        return value if math.isfinite(value) else ("inf" if value > 0 else "-inf" if value < 0 else "nan")

    if isinstance(value, complex):
        return {"re": convert_value(value.real), "im": convert_value(value.imag)}

    if isinstance(value, dict):
        return {str(k): convert_value(v) for k, v in value.items()}

    if isinstance(value, (list, tuple)):
        return [convert_value(v) for v in value]

    return str(value)


def _csv_cell(value):
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(convert_value(value))
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j"
    return value


def records_to_frame(rows: Iterable[dict], columns: Sequence[str]) -> pd.DataFrame:
    frame = pd.DataFrame([{c: _csv_cell(row.get(c)) for c in columns} for row in rows], columns=list(columns))
    return frame


def write_records(rows: List[dict], columns: Sequence[str], fmt: str, path: Optional[str] = None) -> str:
    """Serialize rows as JSON records or CSV with the fixed column order; write to path or return the text."""
    if fmt == "csv":
        text = records_to_frame(rows, columns).to_csv(index=False, float_format="%.17g")
    else:
        text = json.dumps([convert_value({c: row.get(c) for c in columns}) for row in rows], indent=2) + "\n"
    if path:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w") as f:
            f.write(text)
    return text
