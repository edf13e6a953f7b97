"""
JSON file formats for symbols, test functions and atomic measures, plus the
report and CSV writers shared by the command line.

    symbol   {"dim": d, "degree": D, "coeffs": [n][row][col] -> [re, im]}
    vector   {"dim": d, "degree": D, "coeffs": [n][row] -> [re, im]}
    measure  {"atoms": [{"re": .., "im": .., "mass": ..}, ...]}

A plain real number is accepted wherever an [re, im] pair is expected.
"""
import csv
import json
import logging
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, TextIO

import numpy as np

from core.coefficients import OperatorSymbol, VectorPolynomial
from core.errors import DimensionMismatchError, HankelLabError, MalformedFileError
from core.spaces import GridMeasure

logger = logging.getLogger(__name__)

CSV_FIELDS = ["experiment", "alpha", "N", "value", "witness"]


def _read_json(path: str) -> Dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise MalformedFileError(f"cannot read {path}: {e.strerror or e}")
    except json.JSONDecodeError as e:
        raise MalformedFileError(f"{path} is not valid JSON: {e.msg} at line {e.lineno}")
    if not isinstance(data, dict):
        raise MalformedFileError(f"{path}: top level must be an object")
    return data


def _complex_array(raw, path: str) -> np.ndarray:
    try:
        array = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise MalformedFileError(f"{path}: coefficients must be numbers or [re, im] pairs")
    return array


def _decode(raw, path: str, rank: int) -> np.ndarray:
    """Numeric array of `rank` axes, with an optional trailing [re, im] axis"""
    array = _complex_array(raw, path)
    if array.ndim == rank + 1 and array.shape[-1] == 2:
        return array[..., 0] + 1j * array[..., 1]
    if array.ndim == rank:
        return array.astype(complex)
    raise MalformedFileError(f"{path}: coefficients have shape {array.shape}, expected rank {rank} (+ [re, im])")


def _header(data: Dict, path: str):
    try:
        dim = int(data["dim"])
        degree = int(data["degree"])
        coeffs = data["coeffs"]
    except KeyError as e:
        raise MalformedFileError(f"{path}: missing field {e.args[0]!r}")
    except (TypeError, ValueError):
        raise MalformedFileError(f"{path}: 'dim' and 'degree' must be integers")
    if dim < 1 or degree < 0:
        raise MalformedFileError(f"{path}: need dim >= 1 and degree >= 0, got {dim}, {degree}")
    return dim, degree, coeffs


def load_symbol(path: str) -> OperatorSymbol:
    data = _read_json(path)
    dim, degree, raw = _header(data, path)
    coeffs = _decode(raw, path, 3)
    if coeffs.shape != (degree + 1, dim, dim):
        raise DimensionMismatchError(
            f"{path}: declared degree {degree}, dim {dim} but coefficients have shape {coeffs.shape}")
    try:
        symbol = OperatorSymbol(coeffs, rank_one=bool(data.get("rank_one", False)))
    except HankelLabError as e:
        raise MalformedFileError(f"{path}: {e}")
    logger.debug(f"[IO] loaded symbol {path}: dim={dim} degree={degree}")
    return symbol


def load_vector(path: str) -> VectorPolynomial:
    data = _read_json(path)
    dim, degree, raw = _header(data, path)
    coeffs = _decode(raw, path, 2)
    if coeffs.shape != (degree + 1, dim):
        raise DimensionMismatchError(
            f"{path}: declared degree {degree}, dim {dim} but coefficients have shape {coeffs.shape}")
    try:
        return VectorPolynomial(coeffs)
    except HankelLabError as e:
        raise MalformedFileError(f"{path}: {e}")


def load_measure(path: str) -> GridMeasure:
    data = _read_json(path)
    atoms = data.get("atoms")
    if not isinstance(atoms, list):
        raise MalformedFileError(f"{path}: 'atoms' must be a list")
    try:
        points = [complex(float(a["re"]), float(a["im"])) for a in atoms]
        masses = [float(a["mass"]) for a in atoms]
    except (KeyError, TypeError, ValueError):
        raise MalformedFileError(f"{path}: every atom needs numeric 're', 'im' and 'mass'")
    try:
        return GridMeasure(np.array(points, dtype=complex), np.array(masses, dtype=float))
    except HankelLabError as e:
        raise MalformedFileError(f"{path}: {e}")


def _pairs(array: np.ndarray) -> List:
    return np.stack([array.real, array.imag], axis=-1).tolist()


def symbol_to_dict(phi: OperatorSymbol) -> Dict:
    out = {"dim": phi.dim, "degree": phi.degree, "coeffs": _pairs(phi.coeffs)}
    if phi.rank_one:
        out["rank_one"] = True
    return out


def vector_to_dict(f: VectorPolynomial) -> Dict:
    return {"dim": f.dim, "degree": f.degree, "coeffs": _pairs(f.coeffs)}


def measure_to_dict(mu: GridMeasure) -> Dict:
    return {"atoms": [{"re": float(p.real), "im": float(p.imag), "mass": float(m)}
                      for p, m in zip(mu.points, mu.masses)]}


def save_json(data: Dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(data))


def dumps(data: Dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def complex_pair(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def finite_or_none(x: Optional[float]) -> Optional[float]:
    if x is None or not np.isfinite(x):
        return None
    return float(x)


def make_report(command: str, payload: Dict, schema: int, timestamp: bool = True) -> Dict:
    report = {"schema": schema, "command": command}
    report.update(payload)
    if timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return report


def write_csv(rows: Iterable[Dict], stream: TextIO) -> int:
    writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    count = 0
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in CSV_FIELDS})
        count += 1
    return count


def csv_row(experiment: str, alpha, N, value, witness: str = "") -> Dict:
    return {
        "experiment": experiment,
        "alpha": "" if alpha is None else repr(float(alpha)),
        "N": "" if N is None else int(N),
        "value": repr(float(value)),
        "witness": witness,
    }
