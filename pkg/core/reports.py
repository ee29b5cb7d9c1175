#!/usr/bin/env python3
"""
Report and Input Schemas
JSON readers for symbols, tuples, coefficient maps, points and Pick problems,
plus the versioned report envelope written by every CLI command.
"""

import dataclasses
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from config import Config
from .errors import ValidationError
from .symbol import FreeSymbol
from .words import Word

logger = logging.getLogger(__name__)


# ===== READING =====

def load_json(path: str) -> Any:
    """Read a JSON file; decoding problems become ValidationError with the position"""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", field=str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                              field=str(path)) from exc


def parse_complex(value: Any, where: str) -> complex:
    if isinstance(value, bool):
        raise ValidationError("expected a number", field=where)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict) and 're' in value:
        re, im = value.get('re', 0.0), value.get('im', 0.0)
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
            return complex(re, im)
    raise ValidationError(f"expected a number or {{re, im}}, got {value!r}", field=where)


def parse_symbol(data: Any) -> FreeSymbol:
    return FreeSymbol.from_json(data)


def parse_coefficient_map(data: Any, where: str = "coeffs") -> Dict[Word, complex]:
    """[{"word": [0, 1], "re": 1.0, "im": 0.0}, ...]"""
    if isinstance(data, dict) and 'coeffs' in data:
        data = data['coeffs']
    if not isinstance(data, list):
        raise ValidationError("coefficient map must be a list", field=where)
    result: Dict[Word, complex] = {}
    for idx, entry in enumerate(data):
        spot = f"{where}[{idx}]"
        if not isinstance(entry, dict) or 'word' not in entry:
            raise ValidationError("entry needs a 'word'", field=spot)
        w = Word.from_json(entry['word'])
        if w in result:
            raise ValidationError(f"duplicate word {w.to_json()}", field=f"{spot}.word")
        result[w] = parse_complex({'re': entry.get('re', 0.0), 'im': entry.get('im', 0.0)}, spot)
    return result


def parse_matrix(data: Any, where: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(row, list) for row in data):
        raise ValidationError("matrix must be a non-empty list of rows", field=where)
    width = len(data[0])
    rows = []
    for i, row in enumerate(data):
        if len(row) != width:
            raise ValidationError(f"row {i} has {len(row)} entries, expected {width}", field=where)
        rows.append([parse_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(rows, dtype=complex)


def parse_tuple(data: Any):
    """{"d": 2, "mats": [matrix, ...]} with row-major complex entries"""
    from engines.tuples import OperatorTuple

    if not isinstance(data, dict) or 'mats' not in data:
        raise ValidationError("tuple must be an object with 'mats'", field="tuple")
    mats = [parse_matrix(m, f"mats[{i}]") for i, m in enumerate(data['mats'])]
    d = data.get('d')
    if d is not None and any(m.shape != (d, d) for m in mats):
        raise ValidationError(f"every matrix must be {d}x{d}", field="d")
    return OperatorTuple(mats)


def parse_point(data: Any, where: str = "point") -> np.ndarray:
    if isinstance(data, dict) and 'point' in data:
        data = data['point']
    if not isinstance(data, list) or not data:
        raise ValidationError("point must be a non-empty list", field=where)
    return np.array([parse_complex(x, f"{where}[{i}]") for i, x in enumerate(data)], dtype=complex)


def parse_pick_problem(data: Any):
    """{"nodes": [[z, ...], ...], "targets": [scalar or matrix, ...]}"""
    from engines.kernel import PickProblem

    if not isinstance(data, dict) or 'nodes' not in data or 'targets' not in data:
        raise ValidationError("Pick problem needs 'nodes' and 'targets'", field="problem")
    nodes = [parse_point(x, f"nodes[{i}]") for i, x in enumerate(data['nodes'])]
    if not nodes or len({len(x) for x in nodes}) != 1:
        raise ValidationError("nodes must share one coordinate count", field="nodes")
    targets = []
    for i, t in enumerate(data['targets']):
        if isinstance(t, list):
            targets.append(parse_matrix(t, f"targets[{i}]"))
        else:
            targets.append(np.array([[parse_complex(t, f"targets[{i}]")]]))
    if len(targets) != len(nodes):
        raise ValidationError(f"{len(nodes)} nodes but {len(targets)} targets", field="targets")
    if len({t.shape for t in targets}) != 1:
        raise ValidationError("targets must share one size", field="targets")
    return PickProblem(np.array(nodes), np.array(targets))


# ===== WRITING =====

def complex_to_json(z: complex) -> Dict[str, float]:
    return {'re': _float(z.real), 'im': _float(z.imag)}


def _float(x: float) -> Any:
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _reportable(f: dataclasses.Field, value: Any) -> bool:
    # hidden fields hold matrices and operator objects; hidden lists and nested reports still go out
    if f.repr:
        return True
    return isinstance(value, (list, tuple, dict)) or (
        dataclasses.is_dataclass(value) and not isinstance(value, type))


def to_jsonable(obj: Any) -> Any:
    """Convert numpy values, complex numbers, words, enums and dataclasses to JSON types"""
    if isinstance(obj, Word):
        return obj.to_json()
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(complex(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj) if _reportable(f, getattr(obj, f.name))}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def build_report(command: str, result: Any, symbol: Optional[FreeSymbol] = None,
                 level: Optional[int] = None, interior_degree: Optional[int] = None,
                 seed: Optional[int] = None) -> Dict[str, Any]:
    """Versioned envelope: schema, symbol hash, truncation, tolerances, seed and result"""
    return {
        'schema': Config.SCHEMA,
        'command': command,
        'symbol_hash': symbol.fingerprint() if symbol is not None else None,
        'truncation_degree': symbol.truncation_degree if symbol is not None else None,
        'level': level,
        'interior_degree': interior_degree,
        'tolerances': Config.get_tolerances(),
        'seed': seed,
        'result': to_jsonable(result),
    }


class ReportEncoder(json.JSONEncoder):
    """Writes every float with 17 significant digits"""

    def iterencode(self, o: Any, _one_shot: bool = False):
        def floatstr(x: float) -> str:
            if not math.isfinite(x):
                raise ValueError(f"non-finite float {x!r} in report")
            return format(x, '.16e')

        encoder = json.encoder.encode_basestring_ascii if self.ensure_ascii else json.encoder.encode_basestring
        markers: Optional[Dict[int, Any]] = {} if self.check_circular else None
        return json.encoder._make_iterencode(
            markers, self.default, encoder, self.indent, floatstr, self.key_separator,
            self.item_separator, self.sort_keys, self.skipkeys, _one_shot)(o, 0)


def dump_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, cls=ReportEncoder)


def write_report(report: Dict[str, Any], out: Optional[str]) -> str:
    text = dump_report(report)
    if out:
        Path(out).write_text(text + '\n', encoding='utf-8')
        logger.info(f"💾 Report written to {out}")
    return text
