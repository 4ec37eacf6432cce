"""Loading factor-triple descriptions from JSON.

Schema::

    {"alphabet": ["a", "b", "c"],
     "transitions": [["a", "b"], ...]   or   "full": true,
     "code": {"a": "0", "b": "0", "c": "1"},
     "order": ["a", "b", "c"]}

``code`` defaults to the identity and ``order`` to the alphabet order.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidArgument
from .factor import MPWOrder
from .shift import FactorCode, ShiftSpace

__all__ = ["System", "SchemaError", "parse_system", "load_system"]


class SchemaError(InvalidArgument):
    """A system description that does not validate; ``location`` names the field or line."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True)
class System:
    space: ShiftSpace
    code: FactorCode
    order: MPWOrder
    digest: str
    warnings: tuple[str, ...] = field(default=())


def _symbols(value, where: str) -> list[str]:
    if not isinstance(value, list) or not value:
        raise SchemaError(where, "expected a nonempty list of symbols")
    out = []
    for i, s in enumerate(value):
        if not isinstance(s, (str, int)) or isinstance(s, bool):
            raise SchemaError(f"{where}[{i}]", "symbols must be strings or integers")
        out.append(str(s))
    if len(set(out)) != len(out):
        raise SchemaError(where, "duplicate symbol")
    return out


def parse_system(text: str, source: str = "<system>") -> System:
    """Validate a JSON system description, reporting the offending line or field."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}:{exc.lineno}:{exc.colno}", exc.msg) from None
    if not isinstance(data, dict):
        raise SchemaError(source, "top level must be an object")
    unknown = set(data) - {"alphabet", "transitions", "full", "code", "order", "name", "description"}
    if unknown:
        raise SchemaError(f"{source}:{sorted(unknown)[0]}", "unknown field")
    if "alphabet" not in data:
        raise SchemaError(f"{source}:alphabet", "missing field")
    alphabet = _symbols(data["alphabet"], f"{source}:alphabet")
    known = set(alphabet)

    full = data.get("full", False)
    if not isinstance(full, bool):
        raise SchemaError(f"{source}:full", "expected true or false")
    if full and "transitions" in data:
        raise SchemaError(f"{source}:transitions", "give either 'full' or 'transitions'")
    if full:
        pairs = [(s, t) for s in alphabet for t in alphabet]
    else:
        raw = data.get("transitions")
        if not isinstance(raw, list):
            raise SchemaError(f"{source}:transitions", "expected a list of [source, target] pairs")
        pairs = []
        for i, pair in enumerate(raw):
            where = f"{source}:transitions[{i}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(where, "expected a [source, target] pair")
            s, t = str(pair[0]), str(pair[1])
            for sym in (s, t):
                if sym not in known:
                    raise SchemaError(where, f"unknown symbol {sym!r}")
            pairs.append((s, t))

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            space = ShiftSpace(tuple(alphabet), frozenset(pairs))
        except InvalidArgument as exc:
            raise SchemaError(f"{source}:transitions", str(exc)) from None
    notes = tuple(str(w.message) for w in caught)

    raw_code = data.get("code")
    if raw_code is None:
        code = FactorCode.identity(space)
    else:
        if not isinstance(raw_code, dict):
            raise SchemaError(f"{source}:code", "expected an object mapping symbols to labels")
        for s in raw_code:
            if s not in known:
                raise SchemaError(f"{source}:code.{s}", "symbol not in the alphabet")
        for s in alphabet:
            if s not in raw_code:
                raise SchemaError(f"{source}:code", f"missing symbol {s!r}")
        code = FactorCode({s: str(raw_code[s]) for s in alphabet})

    raw_order = data.get("order")
    if raw_order is None:
        order = MPWOrder(tuple(alphabet))
    else:
        listed = _symbols(raw_order, f"{source}:order")
        for s in listed:
            if s not in known:
                raise SchemaError(f"{source}:order", f"symbol {s!r} not in the alphabet")
        for s in alphabet:
            if s not in listed:
                raise SchemaError(f"{source}:order", f"missing symbol {s!r}")
        order = MPWOrder(tuple(listed))

    digest = hashlib.sha256(text.encode()).hexdigest()
    return System(space, code, order, digest, notes)


def load_system(path) -> System:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(str(path), f"cannot read file ({exc.strerror})") from None
    return parse_system(text, str(path))
