"""Bridge CLI: export embeddings from a checkpoint, import them back."""

from __future__ import annotations

import argparse
import json
import sys

from .bridge import BridgeError, export_embeddings, import_embeddings


def cmd_export(args) -> int:
    manifest = export_embeddings(
        args.checkpoint, args.vocab_file, args.out,
        embedding_key=args.embedding_key, model_id=args.model_id,
    )
    print(json.dumps(manifest.__dict__, indent=2, sort_keys=True))
    return 0


def cmd_import(args) -> int:
    report = import_embeddings(
        args.assembled, args.skeleton, args.out, embedding_key=args.embedding_key
    )
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embgraft-bridge",
        description="Move embedding matrices between checkpoints and portable files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="checkpoint -> matrix + vocab + manifest")
    p.add_argument("--checkpoint", required=True, help="checkpoint directory")
    p.add_argument("--vocab-file", required=True,
                   help="tokens, one per line, in tokenizer id order")
    p.add_argument("--embedding-key", default=None)
    p.add_argument("--model-id", default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="assembled matrix -> checkpoint skeleton")
    p.add_argument("--assembled", required=True,
                   help="directory with manifest.json + e_t.ofat (full mode)")
    p.add_argument("--skeleton", required=True, help="source checkpoint directory")
    p.add_argument("--embedding-key", default=None)
    p.add_argument("--out", required=True, help="output checkpoint directory")
    p.set_defaults(func=cmd_import)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
