"""Command-line pipeline orchestrator.

Verbs: ``factorize``, ``subword-vectors``, ``transplant``, ``assemble``,
``run`` (chains all stages), ``analyze`` (spectrum report) and ``params``
(parameter budget). ``run`` reads a single JSON config; flags override
config fields. Exit codes: 0 success, 1 runtime failure, 2 config error
(the message names the offending field).

Progress goes to stderr as ``stage=<name> rows=<n> seconds=<t>`` lines;
artifacts are deterministic, so re-running an identical config overwrites
with identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import assembler, factorizer, store, subword_space, transplanter, util
from .segmenter import DEFAULT_MARKER, EXTERNAL, Segmenter, load_external_segmentations

logger = logging.getLogger("embgraft")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class PipelineConfig:
    source_embeddings: Path
    source_vocab: Path
    target_vocab: Path
    word_vectors: Path
    output_dir: Path
    source_segmentations: Path | None = None
    target_segmentations: Path | None = None
    boundary_marker: str = DEFAULT_MARKER
    latent_dim: int | None = None  # None = identity factorization
    k: int = 10
    tau: float = 0.1
    seed: int = 0
    emit_provenance: bool = False
    mode: str = assembler.FULL


_INPUT_PATH_FIELDS = (
    "source_embeddings", "source_vocab", "target_vocab", "word_vectors",
    "source_segmentations", "target_segmentations",
)
_REQUIRED_FIELDS = (
    "source_embeddings", "source_vocab", "target_vocab", "word_vectors", "output_dir",
)


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Parse + validate the pipeline config; `overrides` wins over the file.

    Relative paths are resolved against the config file's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")

    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown config field")
    merged = dict(raw)
    overridden = set()
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
            overridden.add(key)

    for field in _REQUIRED_FIELDS:
        if merged.get(field) in (None, ""):
            raise ConfigError(field, "is required")

    def resolve(field):
        # config-file paths are relative to the config; flag overrides are
        # relative to the caller's working directory
        value = merged.get(field)
        if value is None:
            return None
        p = Path(value)
        if p.is_absolute():
            return p
        return Path.cwd() / p if field in overridden else path.parent / p

    for field in _INPUT_PATH_FIELDS:
        p = resolve(field)
        if p is not None and not p.is_file():
            raise ConfigError(field, f"file not found: {p}")

    def as_int(field, value, minimum=None):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(field, f"must be an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(field, f"must be >= {minimum}, got {value}")
        return value

    latent = merged.get("latent_dim")
    if latent is not None:
        latent = as_int("latent_dim", latent, minimum=1)
    k = as_int("k", merged.get("k", 10), minimum=1)
    seed = as_int("seed", merged.get("seed", 0), minimum=0)
    if seed >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")
    tau = merged.get("tau", 0.1)
    if not isinstance(tau, (int, float)) or isinstance(tau, bool) or not tau > 0:
        raise ConfigError("tau", f"must be a positive number, got {tau!r}")
    mode = merged.get("mode", assembler.FULL)
    if mode not in (assembler.FULL, assembler.FACTORIZED):
        raise ConfigError("mode", f"must be 'full' or 'factorized', got {mode!r}")
    marker = merged.get("boundary_marker", DEFAULT_MARKER)
    if not isinstance(marker, str):
        raise ConfigError("boundary_marker", "must be a string")
    emit = merged.get("emit_provenance", False)
    if not isinstance(emit, bool):
        raise ConfigError("emit_provenance", "must be true or false")

    return PipelineConfig(
        source_embeddings=resolve("source_embeddings"),
        source_vocab=resolve("source_vocab"),
        target_vocab=resolve("target_vocab"),
        word_vectors=resolve("word_vectors"),
        output_dir=resolve("output_dir"),
        source_segmentations=resolve("source_segmentations"),
        target_segmentations=resolve("target_segmentations"),
        boundary_marker=marker,
        latent_dim=latent,
        k=k,
        tau=float(tau),
        seed=seed,
        emit_provenance=emit,
        mode=mode,
    )


def config_echo(cfg: PipelineConfig) -> dict:
    """The semantic knobs worth reproducing a run from (no local paths)."""
    return {
        "k": cfg.k,
        "tau": cfg.tau,
        "seed": cfg.seed,
        "latent_dim": cfg.latent_dim,
        "mode": cfg.mode,
        "boundary_marker": cfg.boundary_marker,
        "emit_provenance": cfg.emit_provenance,
    }


def _log_stage(name: str, rows: int, started: float) -> None:
    logger.info("stage=%s rows=%d seconds=%.3f", name, rows, time.perf_counter() - started)


def _make_segmenter(vocab, marker, external_path) -> Segmenter:
    if external_path is not None:
        table = load_external_segmentations(external_path)
        return Segmenter(vocab, boundary_marker=marker, mode=EXTERNAL, external_map=table)
    return Segmenter(vocab, boundary_marker=marker)


def run_pipeline(cfg: PipelineConfig, threads: int = 1) -> dict:
    """Execute all stages in memory and write the output directory.

    Returns a deterministic summary dict (counts, coverage, output file
    digests); wall times appear only on stderr.
    """
    t0 = time.perf_counter()
    embeddings = store.load_matrix(cfg.source_embeddings)
    source_vocab = store.load_vocab(cfg.source_vocab)
    target_vocab = store.load_vocab(cfg.target_vocab)
    words = store.load_word_vectors(cfg.word_vectors)
    if embeddings.shape[0] != len(source_vocab):
        raise ValueError(
            f"source embeddings have {embeddings.shape[0]} rows for "
            f"{len(source_vocab)} source tokens"
        )
    _log_stage("load", embeddings.shape[0] + len(words.vocab), t0)

    t0 = time.perf_counter()
    fe = factorizer.factorize(embeddings, cfg.latent_dim)
    _log_stage("factorize", fe.vocab_size, t0)

    t0 = time.perf_counter()
    seg_src = _make_segmenter(source_vocab, cfg.boundary_marker, cfg.source_segmentations)
    u_src = subword_space.build_subword_vectors(
        subword_space.build_occurrence_index(words, seg_src, source_vocab),
        words, source_vocab,
    )
    _log_stage("subword-vectors-source", len(source_vocab), t0)

    t0 = time.perf_counter()
    seg_tgt = _make_segmenter(target_vocab, cfg.boundary_marker, cfg.target_segmentations)
    u_tgt = subword_space.build_subword_vectors(
        subword_space.build_occurrence_index(words, seg_tgt, target_vocab),
        words, target_vocab,
    )
    _log_stage("subword-vectors-target", len(target_vocab), t0)

    t0 = time.perf_counter()
    tconfig = transplanter.TransplantConfig(k=cfg.k, tau=cfg.tau, seed=cfg.seed)
    coords_t, report = transplanter.transplant(
        fe.coords, u_src, u_tgt, source_vocab, target_vocab, tconfig, threads=threads
    )
    _log_stage("transplant", len(target_vocab), t0)

    t0 = time.perf_counter()
    report_bytes = util.canonical_json(report.as_dict(cfg.emit_provenance)).encode("utf-8")
    ae = assembler.assemble(
        coords_t, fe, cfg.mode,
        config_echo=config_echo(cfg),
        report_digest=util.sha256_hex(report_bytes),
    )
    written = assembler.write_assembled(ae, cfg.output_dir, report_json=report_bytes)
    _log_stage("assemble", coords_t.shape[0], t0)

    return {
        "output_dir": str(cfg.output_dir),
        "mode": cfg.mode,
        "counts": report.as_dict()["counts"],
        "coverage": report.coverage,
        "config": config_echo(cfg),
        "outputs": {
            p.name: util.sha256_hex(p.read_bytes()) for p in sorted(written)
        },
    }


# ---------------------------------------------------------------- commands


def cmd_params(args) -> int:
    result = factorizer.count_params(args.vocab, args.dim, args.latent)
    print(result["embedding_params"])
    return 0


def cmd_analyze(args) -> int:
    matrix = store.load_matrix(args.embeddings)
    bound = min(matrix.shape[0] - 1, matrix.shape[1])
    components = args.components if args.components is not None else bound
    report = factorizer.explained_variance(matrix, components)
    payload = {
        "singular_values": [float(v) for v in report.singular_values],
        "explained_variance": [float(v) for v in report.explained_variance],
        "frobenius_norm": report.frobenius_norm,
    }
    if args.out:
        util.write_json(payload, args.out)
    else:
        sys.stdout.write(util.canonical_json(payload))
    return 0


def cmd_factorize(args) -> int:
    t0 = time.perf_counter()
    matrix = store.load_matrix(args.embeddings)
    fe = factorizer.factorize(matrix, args.latent)
    factorizer.save_factorization(fe, args.out)
    _log_stage("factorize", fe.vocab_size, t0)
    return 0


def cmd_subword_vectors(args) -> int:
    t0 = time.perf_counter()
    vocab = store.load_vocab(args.vocab)
    words = store.load_word_vectors(args.word_vectors)
    seg = _make_segmenter(vocab, args.marker, args.external_segmentations)
    vectors = subword_space.build_subword_vectors(
        subword_space.build_occurrence_index(words, seg, vocab), words, vocab
    )
    subword_space.save_subword_vectors(vectors, args.out)
    _log_stage("subword-vectors", len(vocab), t0)
    return 0


def cmd_transplant(args) -> int:
    t0 = time.perf_counter()
    coords = store.load_matrix(args.source_coords)
    source_vocab = store.load_vocab(args.source_vocab)
    target_vocab = store.load_vocab(args.target_vocab)
    u_src = subword_space.load_subword_vectors(args.source_subwords, source_vocab)
    u_tgt = subword_space.load_subword_vectors(args.target_subwords, target_vocab)
    tconfig = transplanter.TransplantConfig(k=args.k, tau=args.tau, seed=args.seed)
    coords_t, report = transplanter.transplant(
        coords, u_src, u_tgt, source_vocab, target_vocab, tconfig, threads=args.threads
    )
    store.save_matrix(coords_t, args.out)
    Path(args.report).write_bytes(
        util.canonical_json(report.as_dict(args.emit_provenance)).encode("utf-8")
    )
    _log_stage("transplant", len(target_vocab), t0)
    return 0


def cmd_assemble(args) -> int:
    t0 = time.perf_counter()
    coords = store.load_matrix(args.coords)
    fe = factorizer.load_factorization(args.factorization)
    echo = None
    if args.config:
        echo = config_echo(load_config(args.config))
    report_bytes = None
    digest = None
    if args.report:
        report_bytes = Path(args.report).read_bytes()
        digest = util.sha256_hex(report_bytes)
    ae = assembler.assemble(coords, fe, args.mode, config_echo=echo, report_digest=digest)
    assembler.write_assembled(ae, args.out, report_json=report_bytes)
    _log_stage("assemble", coords.shape[0], t0)
    return 0


def cmd_run(args) -> int:
    overrides = {
        "output_dir": args.out,
        "latent_dim": args.latent,
        "k": args.k,
        "tau": args.tau,
        "seed": args.seed,
        "mode": args.mode,
        "emit_provenance": True if args.emit_provenance else None,
    }
    cfg = load_config(args.config, overrides)
    summary = run_pipeline(cfg, threads=args.threads)
    if args.summary:
        util.write_json(summary, args.summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embgraft",
        description="Transplant a pretrained embedding matrix onto an extended vocabulary.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print the embedding parameter budget")
    p.add_argument("--vocab", type=int, required=True, help="vocabulary size")
    p.add_argument("--dim", type=int, required=True, help="model embedding dimension")
    p.add_argument("--latent", type=int, default=None, help="latent dimension (omit for full)")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("analyze", help="PCA explained-variance report for a matrix")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--components", type=int, default=None)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("factorize", help="factorize an embedding matrix")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--latent", type=int, default=None,
                   help="latent dimension (omit for identity factorization)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("subword-vectors", help="build subword vectors for a vocabulary")
    p.add_argument("--vocab", required=True)
    p.add_argument("--word-vectors", required=True)
    p.add_argument("--external-segmentations", default=None)
    p.add_argument("--marker", default=DEFAULT_MARKER)
    p.add_argument("--out", required=True, help="output matrix file (sidecar derived)")
    p.set_defaults(func=cmd_subword_vectors)

    p = sub.add_parser("transplant", help="initialize target coordinates")
    p.add_argument("--source-coords", required=True)
    p.add_argument("--source-vocab", required=True)
    p.add_argument("--target-vocab", required=True)
    p.add_argument("--source-subwords", required=True)
    p.add_argument("--target-subwords", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--emit-provenance", action="store_true")
    p.add_argument("--out", required=True, help="output coordinate matrix file")
    p.add_argument("--report", required=True, help="output report JSON file")
    p.set_defaults(func=cmd_transplant)

    p = sub.add_parser("assemble", help="produce the final embedding artifact")
    p.add_argument("--coords", required=True, help="target coordinate matrix")
    p.add_argument("--factorization", required=True, help="directory from 'factorize'")
    p.add_argument("--mode", choices=[assembler.FACTORIZED, assembler.FULL], required=True)
    p.add_argument("--config", default=None, help="pipeline config to echo in the manifest")
    p.add_argument("--report", default=None, help="transplant report to embed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("run", help="run the whole pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override output_dir")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--latent", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", choices=[assembler.FACTORIZED, assembler.FULL], default=None)
    p.add_argument("--emit-provenance", action="store_true")
    p.add_argument("--summary", default=None, help="write a machine-readable summary here")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
