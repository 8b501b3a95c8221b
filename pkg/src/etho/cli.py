"""The ``etho`` command line: ingest data, define and run behaviors,
evaluate, plot, retrieve module docs, manage sessions, serve HTTP.

Exit codes: 1 usage, 2 validation (any EthoError, with a positioned
diagnostic on stderr), 3 runtime (I/O and unexpected failures). The CLI and
the HTTP service share one engine and one canonical JSON serializer, so
their outputs are byte-identical for identical inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import behaviors, dsl, plots, retrieval, session, trackdata
from .errors import EthoError, EthoSyntaxError, SchemaError
from .events import EventDict, events_to_json, load_events

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def canonical_json_bytes(obj) -> bytes:
    """The one serializer shared by CLI files and HTTP bodies."""
    return (json.dumps(obj, separators=(",", ":"), sort_keys=True) + "\n").encode("utf-8")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def load_bundle(path) -> tuple[trackdata.Dataset, trackdata.ObjectSet]:
    """A dataset bundle is a directory with dataset.json and optional objects.json."""
    path = Path(path)
    ds_file = path / "dataset.json"
    if not ds_file.exists():
        raise SchemaError(f"no dataset.json in bundle {path}")
    d = trackdata.load_dataset(ds_file, "json")
    obj_file = path / "objects.json"
    objects = trackdata.load_objects(obj_file) if obj_file.exists() else trackdata.ObjectSet({})
    return d, objects


def _parse_param_value(raw: str):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    if "," in raw:
        return tuple(p.strip() for p in raw.split(","))
    return raw


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise _UsageError(f"--param must look like key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        out[key.strip()] = _parse_param_value(raw.strip())
    return out


def _load_session(path) -> session.SessionState:
    path = Path(path)
    if path.exists():
        return session.load_state(path)
    return session.SessionState()


def cmd_ingest(args) -> int:
    frame_size = None
    if args.frame_size:
        w, h = args.frame_size.lower().split("x")
        frame_size = (int(w), int(h))
    d = trackdata.load_dataset(
        args.keypoints,
        "csv",
        frame_size=frame_size,
        fps=args.fps,
        px_per_cm=args.px_per_cm,
        dataset_id=args.id,
        min_confidence=args.min_confidence,
    )
    objects = trackdata.load_objects(args.objects) if args.objects else trackdata.ObjectSet({})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trackdata.save_dataset(d, out / "dataset.json", "json")
    trackdata.save_objects(objects, out / "objects.json")
    print(
        f"ingested {d.id}: {len(d.animal_ids)} animals, {d.n_frames} frames, "
        f"{len(d.bodypart_names)} bodyparts, {len(objects)} objects -> {out}"
    )
    return 0


def cmd_define(args) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    state = _load_session(args.session)
    try:
        defs = dsl.parse(source)
        state.registry = dsl.compile_defs(defs, state.registry)
    except EthoSyntaxError as e:
        print(e.render(args.file), file=sys.stderr)
        return EXIT_VALIDATION
    session.save_state(state, args.session)
    print("defined: " + ", ".join(d.name for d in defs))
    return 0


def cmd_run(args) -> int:
    d, objects = load_bundle(args.dataset)
    registry = dsl.BehaviorRegistry()
    state = None
    if args.session:
        state = _load_session(args.session)
        registry = state.registry
        if len(state.objects):
            merged = dict(objects.objects)
            for name, obj in state.objects.objects.items():
                merged.setdefault(name, obj)
            objects = trackdata.ObjectSet(merged)
    overrides = _parse_params(args.param)
    result = registry.run(args.behavior, d, objects, overrides or None)
    payload = canonical_json_bytes(events_to_json(result))
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


def load_labels(path) -> np.ndarray:
    """Ground-truth CSV: header frame,label with label in {0,1}."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["frame", "label"]:
            raise SchemaError(f"labels CSV must have header 'frame,label', got {header!r}")
        rows = {}
        for row_num, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            try:
                frame, label = int(row[0]), int(row[1])
            except (ValueError, IndexError):
                raise SchemaError("frame and label must be integers", row=row_num) from None
            if label not in (0, 1):
                raise SchemaError(f"label must be 0 or 1, got {label}", row=row_num)
            if frame in rows:
                raise SchemaError(f"duplicate frame {frame}", row=row_num)
            rows[frame] = label
    if not rows or sorted(rows) != list(range(len(rows))):
        raise SchemaError("label frames must be dense from 0")
    return np.array([rows[f] for f in range(len(rows))], dtype=bool)


def cmd_eval(args) -> int:
    pred = load_events(args.pred)
    gt = load_labels(args.gt)
    report = behaviors.evaluate_f1(pred, gt, task=args.task)
    sys.stdout.buffer.write(canonical_json_bytes(report.to_json()))
    return 0


def _named_events(specs) -> list[tuple[str, EventDict]]:
    out = []
    for spec in specs:
        if "=" in spec and not Path(spec).exists():
            name, path = spec.split("=", 1)
        else:
            name, path = Path(spec).stem, spec
        out.append((name, load_events(path)))
    return out


def cmd_ethogram(args) -> int:
    named = _named_events(args.events)
    plots.export_ethogram(named, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_traj(args) -> int:
    d, _ = load_bundle(args.dataset)
    events = load_events(args.events) if args.events else None
    bodyparts = args.bodyparts.split(",") if args.bodyparts else ["all"]
    path = Path(args.out)
    path.write_bytes(plots.render_trajectory(d, args.animal, bodyparts, events).encode("utf-8"))
    print(f"wrote {args.out}")
    return 0


def cmd_retrieve(args) -> int:
    registry = retrieval.default_registry() if args.builtin_docs else retrieval.ModuleRegistry()
    if args.docs:
        retrieval.load_directory(registry, args.docs)
    results = registry.query(retrieval.RetrievalQuery(args.query, args.k))
    sys.stdout.buffer.write(
        canonical_json_bytes({"results": [{"name": n, "score": s} for n, s in results]})
    )
    return 0


def cmd_session(args) -> int:
    if args.action == "save":
        state = _load_session(args.session) if args.session else session.SessionState()
        session.save_state(state, args.path)
        print(f"saved session state to {args.path}")
    else:
        state = session.load_state(args.path)
        summary = {
            "budget": state.short.budget,
            "short_items": len(state.short.items),
            "tokens": state.short.total_tokens,
            "symbols": sorted(state.long.entries),
            "behaviors": sorted(state.registry.programs),
            "objects": trackdata.get_object_names(state.objects),
        }
        sys.stdout.buffer.write(canonical_json_bytes(summary))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="etho", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate keypoints + objects into a dataset bundle")
    p.add_argument("--keypoints", required=True)
    p.add_argument("--objects")
    p.add_argument("--out", required=True)
    p.add_argument("--frame-size", help="WxH in pixels; inferred from data when omitted")
    p.add_argument("--fps", type=float)
    p.add_argument("--px-per-cm", type=float)
    p.add_argument("--id")
    p.add_argument("--min-confidence", type=float, default=0.0)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("define", help="compile an .etho file into a session")
    p.add_argument("--file", required=True)
    p.add_argument("--session", required=True)
    p.set_defaults(func=cmd_define)

    p = sub.add_parser("run", help="run a behavior over a dataset bundle")
    p.add_argument("--behavior", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--session")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="frame-level F1 of events against labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--task", default="")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ethogram", help="render events as a raster SVG")
    p.add_argument("--events", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ethogram)

    p = sub.add_parser("traj", help="render a trajectory SVG")
    p.add_argument("--dataset", required=True)
    p.add_argument("--animal", required=True)
    p.add_argument("--bodyparts")
    p.add_argument("--events")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_traj)

    p = sub.add_parser("retrieve", help="rank integration-module docs for a query")
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=retrieval.DEFAULT_K)
    p.add_argument("--docs", help="extra directory of module-doc JSON files")
    p.add_argument("--no-builtin-docs", dest="builtin_docs", action="store_false")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("session", help="save or load a session state file")
    p.add_argument("action", choices=["save", "load"])
    p.add_argument("--path", required=True)
    p.add_argument("--session")
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as e:
        print(f"etho: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except EthoError as e:
        print(f"etho: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"etho: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:  # anything unexpected is a runtime failure
        print(f"etho: internal error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
