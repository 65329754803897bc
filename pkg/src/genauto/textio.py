"""Line-oriented automaton files.

Example::

    # tit-for-tat
    alphabet = C D
    states = 2
    mode = stochastic
    entry = 1 0
    exit = 1 0
    matrix C = 1 0 ; 1 0
    matrix D = 0 1 ; 0 1

An optional ``semiring = real|boolean`` line selects the carrier (real by default).
"""

from __future__ import annotations

import os
from pathlib import Path

from .algebra import SEMIRINGS, Mode, WeightedAutomaton, make_automaton
from .errors import GenautoError, ParseError

_MODES = {"stochastic": Mode.STOCHASTIC, "general": Mode.GENERAL}


def _numbers(text, lineno, path):
    try:
        return [float(tok) for tok in text.split()]
    except ValueError:
        raise ParseError(f"bad number in {text!r}", lineno, path) from None


def parse_automaton(text: str, path=None) -> WeightedAutomaton:
    fields = {}
    matrices = {}
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        key, value = (part.strip() for part in line.split("=", 1))
        words = key.split()
        if len(words) == 2 and words[0] == "matrix":
            letter = words[1]
            if letter in matrices:
                raise ParseError(f"duplicate matrix for letter {letter!r}", lineno, path)
            rows = [r for r in value.split(";")]
            matrices[letter] = (lineno, [_numbers(r, lineno, path) for r in rows])
            continue
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", lineno, path)
        if key == "alphabet":
            fields[key] = (lineno, value.split())
        elif key == "states":
            try:
                fields[key] = (lineno, int(value))
            except ValueError:
                raise ParseError(f"states must be an integer, got {value!r}", lineno, path) from None
        elif key == "mode":
            if value not in _MODES:
                raise ParseError(f"mode must be stochastic or general, got {value!r}", lineno, path)
            fields[key] = (lineno, _MODES[value])
        elif key == "semiring":
            if value not in SEMIRINGS:
                raise ParseError(f"unknown semiring {value!r}", lineno, path)
            fields[key] = (lineno, SEMIRINGS[value])
        elif key in ("entry", "exit"):
            fields[key] = (lineno, _numbers(value, lineno, path))
        else:
            raise ParseError(f"unknown key {key!r}", lineno, path)

    for required in ("alphabet", "states", "entry", "exit"):
        if required not in fields:
            raise ParseError(f"missing required key {required!r}", last_line, path)
    alphabet = fields["alphabet"][1]
    n = fields["states"][1]
    for letter, (lineno, rows) in matrices.items():
        if letter not in alphabet:
            raise ParseError(f"matrix for letter {letter!r} outside the alphabet", lineno, path)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ParseError(f"matrix {letter!r} is not {n}x{n}", lineno, path)
    for key in ("entry", "exit"):
        lineno, vec = fields[key]
        if len(vec) != n:
            raise ParseError(f"{key} has {len(vec)} values, expected {n}", lineno, path)
    mode = fields.get("mode", (None, Mode.GENERAL))[1]
    semiring = fields.get("semiring", (None, SEMIRINGS["real"]))[1]
    try:
        return make_automaton(
            alphabet,
            fields["entry"][1],
            {a: m[1] for a, m in matrices.items()},
            fields["exit"][1],
            mode=mode,
            semiring=semiring,
        )
    except GenautoError as exc:
        raise type(exc)(f"{path}: {exc}" if path else str(exc)) from None
    except ValueError as exc:
        raise ParseError(str(exc), None, path) from None


def _fmt(x) -> str:
    x = float(x)
    if x.is_integer():
        return str(int(x))
    return repr(x)


def format_automaton(A: WeightedAutomaton, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append("alphabet = " + " ".join(str(a) for a in A.alphabet))
    lines.append(f"states = {A.n}")
    lines.append(f"mode = {A.mode.value}")
    if A.semiring.name != "real":
        lines.append(f"semiring = {A.semiring.name}")
    lines.append("entry = " + " ".join(_fmt(x) for x in A.entry))
    lines.append("exit = " + " ".join(_fmt(x) for x in A.exit))
    for letter, m in zip(A.alphabet, A.matrices):
        rows = " ; ".join(" ".join(_fmt(x) for x in row) for row in m)
        lines.append(f"matrix {letter} = {rows}")
    return "\n".join(lines) + "\n"


def load_automaton(path: str | os.PathLike) -> WeightedAutomaton:
    path = Path(path)
    return parse_automaton(path.read_text(), path=str(path))


def save_automaton(A: WeightedAutomaton, path: str | os.PathLike, comment: str | None = None) -> None:
    Path(path).write_text(format_automaton(A, comment))
