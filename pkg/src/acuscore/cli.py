"""Command-line surface: locate acupoints, score trace sessions, generate
synthetic traces.

Exit codes: 0 success, 2 bad input data, 3 bad configuration. With
``--json-errors`` failures print one structured JSON object to stderr.
All outputs are deterministic: identical inputs give byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report as report_mod
from . import synth as synth_mod
from . import traces
from .anatomy import AcupointTable, SkeletonFrame, locate_all
from .config import GlobalConfig, load_config
from .errors import AcuscoreError, ConfigError, InputError
from .projection import back_project

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3


def _fail(args, exc: Exception, code: int) -> int:
    if getattr(args, "json_errors", False):
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"error: {exc}\n")
    return code


def _load_skeleton(path: str, cfg: GlobalConfig, pixel_space: bool) -> SkeletonFrame:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"skeleton file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"skeleton file {path} is not valid JSON: {exc}") from None
    if pixel_space:
        if cfg.intrinsics is None:
            raise ConfigError("--intrinsics requires an intrinsics block in the config")
        joints = {}
        for name, uvz in obj.get("joints", {}).items():
            u, v, z = (float(x) for x in uvz)
            joints[name] = [float(c) for c in back_project(u, v, z, cfg.intrinsics)]
        obj = dict(obj, joints=joints)
    return SkeletonFrame.from_json(obj)


def cmd_locate(args) -> int:
    cfg = load_config(args.config)
    table = AcupointTable.load(args.table) if args.table else cfg.table
    frame = _load_skeleton(args.skeleton, cfg, args.intrinsics)
    positions, failures = locate_all(table, frame)

    if args.format == "csv":
        lines = ["id,x,y,z"]
        lines += [f"{aid},{p[0]!r},{p[1]!r},{p[2]!r}" for aid, p in positions.items()]
        payload = "\n".join(lines) + "\n"
    else:
        doc = {
            "table_version": table.version,
            "acupoints": {aid: [round(float(c), 6) for c in p]
                          for aid, p in positions.items()},
            "failures": failures,
        }
        payload = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)

    if failures:
        detail = "; ".join(f"{aid}: {msg}" for aid, msg in failures.items())
        return _fail(args, InputError(f"{len(failures)} acupoint(s) failed: {detail}"),
                     EXIT_INPUT)
    return EXIT_OK


def _summary_line(rep: report_mod.SessionReport, c: float) -> str:
    parts = [rep.technique]
    for score in rep.scores:
        label = rep.labels.get(score.name, {})
        actual = label.get("actual") or label.get("class") or "-"
        parts.append(f"{score.name}={actual}:{score.total:g}/{c:g}")
    for err in rep.errors:
        parts.append(f"{err['stage']}!{err['error']}")
    return " ".join(parts)


def _score_one(trace_path, args, cfg: GlobalConfig, out_path) -> int:
    if trace_path == "-":
        session = traces.loads(sys.stdin.read())
        session_id = "stdin"
    else:
        session = traces.load(trace_path)
        session_id = Path(trace_path).stem
    rep = report_mod.evaluate_session(
        session,
        target_method=args.target_method,
        target_type=args.target_type,
        cfg=cfg.scoring,
        thresholds=cfg.thresholds,
        session_id=session_id,
    )
    if args.format == "csv":
        blobs = report_mod.emit(rep, "csv")
        base = Path(out_path) if out_path else Path(f"{session_id}.report")
        for name, blob in blobs.items():
            Path(f"{base}.{name}.csv").write_bytes(blob)
        sys.stdout.write(_summary_line(rep, cfg.scoring.c) + "\n")
    else:
        blob = report_mod.emit(rep, "json")
        if out_path:
            Path(out_path).write_bytes(blob)
            sys.stdout.write(_summary_line(rep, cfg.scoring.c) + "\n")
        else:
            sys.stderr.write(_summary_line(rep, cfg.scoring.c) + "\n")
            sys.stdout.buffer.write(blob)
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = load_config(args.config)
    if args.batch:
        batch_dir = Path(args.batch)
        if not batch_dir.is_dir():
            raise InputError(f"--batch expects a directory, got {args.batch}")
        trace_files = sorted(batch_dir.glob("*.jsonl"))
        if not trace_files:
            raise InputError(f"no *.jsonl traces in {args.batch}")
        out_dir = Path(args.out) if args.out else batch_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        for tf in trace_files:
            _score_one(str(tf), args, cfg, out_dir / f"{tf.stem}.report.json")
        return EXIT_OK
    if not args.trace:
        raise InputError("score needs a trace file (or --batch DIR)")
    return _score_one(args.trace, args, cfg, args.out)


def cmd_synth(args) -> int:
    load_config(args.config)  # validate config even though synth ignores it
    try:
        obj = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"spec file not found: {args.spec}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"spec file {args.spec} is not valid JSON: {exc}") from None
    if args.seed is not None:
        obj["seed"] = args.seed
    spec = synth_mod.SynthSpec.from_json(obj)
    session = synth_mod.generate(spec)
    text = traces.dumps(session)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acuscore",
        description="Locate acupoints, classify and score manipulation traces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="global config JSON (or env ACU_CONFIG)")
        p.add_argument("--json-errors", action="store_true",
                       help="print failures as structured JSON on stderr")

    p_locate = sub.add_parser("locate", help="resolve acupoints from a skeleton frame")
    p_locate.add_argument("skeleton", help="skeleton frame JSON file")
    p_locate.add_argument("--table", help="acupoint table JSON (default: packaged)")
    p_locate.add_argument("--intrinsics", action="store_true",
                          help="treat joints as [u, v, z_cam] pixels and back-project")
    p_locate.add_argument("--format", choices=("json", "csv"), default="json")
    p_locate.add_argument("--out", help="output path (default: stdout)")
    common(p_locate)
    p_locate.set_defaults(func=cmd_locate)

    p_score = sub.add_parser("score", help="classify and score a trace session")
    p_score.add_argument("trace", nargs="?", help="trace JSON-lines file ('-' = stdin)")
    p_score.add_argument("--batch", help="score every *.jsonl in a directory")
    p_score.add_argument("--target-method", choices=("reinforce", "reduce"),
                         help="target reinforce/reduce method for needle techniques")
    p_score.add_argument("--target-type", choices=("mild", "sparrow", "whirling"),
                         help="target moxibustion type")
    p_score.add_argument("--format", choices=("json", "csv"), default="json")
    p_score.add_argument("--out", help="report path (single) or directory (--batch)")
    common(p_score)
    p_score.set_defaults(func=cmd_score)

    p_synth = sub.add_parser("synth", help="generate a synthetic labeled trace")
    p_synth.add_argument("spec", help="synth spec JSON file")
    p_synth.add_argument("--seed", type=int, help="override the spec's seed")
    p_synth.add_argument("--out", help="trace output path (default: stdout)")
    common(p_synth)
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(args, exc, EXIT_CONFIG)
    except AcuscoreError as exc:
        return _fail(args, exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
