"""JSON-lines trace files: one header line, then one sample per line.

Needle header: {"kind": "needle", "target", "skin_point", "skin_normal"}
with samples {"t", "tip", "dir", "hand"?}; moxa header: {"kind": "moxa",
"target", "target_pos", "skin_normal"} with samples {"t", "head"}. Vectors
are [x, y, z] lists in cm; hand maps the four tracked joints (thumb_tip,
index_tip, thumb_proximal, index_proximal) to positions.
"""
from __future__ import annotations

import io
import json
from typing import Union

from .errors import InputError
from .manipulation import MoxaSample, MoxaSession, NeedleSample, NeedleSession

Session = Union[NeedleSession, MoxaSession]


def _vec(x) -> list[float]:
    return [float(v) for v in x]


def dumps(session: Session) -> str:
    lines = []
    if isinstance(session, NeedleSession):
        lines.append(json.dumps({
            "kind": "needle",
            "target": session.target,
            "skin_point": _vec(session.skin_point),
            "skin_normal": _vec(session.skin_normal),
        }, sort_keys=True))
        for s in session.samples:
            rec = {"t": float(s.t), "tip": _vec(s.tip), "dir": _vec(s.direction)}
            if s.hand is not None:
                rec["hand"] = {k: _vec(v) for k, v in sorted(s.hand.items())}
            lines.append(json.dumps(rec, sort_keys=True))
    elif isinstance(session, MoxaSession):
        lines.append(json.dumps({
            "kind": "moxa",
            "target": session.target,
            "target_pos": _vec(session.target_pos),
            "skin_normal": _vec(session.skin_normal),
        }, sort_keys=True))
        for s in session.samples:
            lines.append(json.dumps({"t": float(s.t), "head": _vec(s.head)}, sort_keys=True))
    else:
        raise InputError(f"not a session: {type(session).__name__}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Session:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("trace file is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise InputError(f"trace header is not valid JSON: {exc}") from None
    kind = header.get("kind")
    if kind == "needle":
        return _load_needle(header, lines[1:])
    if kind == "moxa":
        return _load_moxa(header, lines[1:])
    raise InputError(f"trace header kind must be 'needle' or 'moxa', got {kind!r}")


def _parse_samples(lines):
    for i, ln in enumerate(lines, start=2):
        try:
            yield json.loads(ln)
        except json.JSONDecodeError as exc:
            raise InputError(f"trace line {i} is not valid JSON: {exc}") from None


def _load_needle(header: dict, lines) -> NeedleSession:
    samples = []
    for rec in _parse_samples(lines):
        try:
            samples.append(NeedleSample(
                t=float(rec["t"]), tip=rec["tip"], direction=rec["dir"],
                hand=rec.get("hand")))
        except KeyError as exc:
            raise InputError(f"needle sample missing field {exc.args[0]!r}") from None
    try:
        return NeedleSession(
            samples=tuple(samples), target=header["target"],
            skin_point=header["skin_point"], skin_normal=header["skin_normal"])
    except KeyError as exc:
        raise InputError(f"needle header missing field {exc.args[0]!r}") from None


def _load_moxa(header: dict, lines) -> MoxaSession:
    samples = []
    for rec in _parse_samples(lines):
        try:
            samples.append(MoxaSample(t=float(rec["t"]), head=rec["head"]))
        except KeyError as exc:
            raise InputError(f"moxa sample missing field {exc.args[0]!r}") from None
    try:
        return MoxaSession(
            samples=tuple(samples), target=header["target"],
            target_pos=header["target_pos"], skin_normal=header["skin_normal"])
    except KeyError as exc:
        raise InputError(f"moxa header missing field {exc.args[0]!r}") from None


def save(session: Session, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(session))


def load(path) -> Session:
    if isinstance(path, io.TextIOBase):
        return loads(path.read())
    with open(path, encoding="utf-8") as f:
        return loads(f.read())
