"""Command line surface: embed-export --in FILE --kind KIND --out STORE --model TAG."""

from __future__ import annotations

import argparse
import sys

from .errors import ExportError, UsageError
from .exporter import ExportManifest, export_embeddings, verify_store
from .inputs import DEFAULT_CHUNK_WORDS, KINDS

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through UsageError for exit 1.
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="embed-export", description=__doc__.splitlines()[0])
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="FILE", help="input file; repeat for several")
    parser.add_argument("--kind", choices=KINDS, required=True,
                        help="how to read inputs: whole corpus sentences, "
                             "chunked lyrics, or one query per line")
    parser.add_argument("--chunk-words", type=int, default=DEFAULT_CHUNK_WORDS,
                        help="lyric window size in words; must match the "
                             "engine's annotator setting")
    parser.add_argument("--out", required=True, help="store file to write")
    parser.add_argument("--model", required=True,
                        help="encoder tag: a sentence-transformers model name, "
                             "or hash:<label> for the offline stand-in")
    parser.add_argument("--update", action="store_true",
                        help="merge into an existing store instead of replacing "
                             "it; lets runs over different kinds share one file")
    parser.add_argument("--verify", action="store_true",
                        help="after writing, re-read inputs and confirm coverage")
    return parser


def _note(message: str) -> None:
    sys.stderr.write(message + "\n")


def _run(args) -> int:
    try:
        manifest = ExportManifest(
            inputs=tuple(args.inputs),
            kind=args.kind,
            chunk_words=args.chunk_words,
            model_tag=args.model,
            out_path=args.out,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    result = export_embeddings(manifest, update=args.update)
    sys.stdout.write(f"texts\t{result.texts}\n")
    sys.stdout.write(f"rows\t{result.unique}\n")
    _note(f"store written to {result.out_path}")

    if args.verify:
        report = verify_store(manifest.out_path, manifest)
        sys.stdout.write(f"verified\t{report.summary()}\n")
        for digest in report.missing:
            sys.stdout.write(f"missing\t{digest}\n")
        if not report.ok:
            raise ExportError(f"store {manifest.out_path} is missing {len(report.missing)} key(s)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        return _run(parser.parse_args(argv))
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: file not found: {exc.filename}\n")
        return EXIT_DATA
    except (ExportError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
