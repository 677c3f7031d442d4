"""Command-line interface: mine, split, generate, train-reranker, rerank, eval, report.

Every subcommand accepts ``--config FILE`` (a JSON object whose keys mirror
the long flag names with underscores); explicit flags win over the config
file, which wins over built-in defaults. Each run writes the resolved
configuration next to its primary output so a run can be reproduced from its
artifacts alone. Credentials are only ever read from environment variables
named by ``--credential-env``.

Exit codes: 0 success, 2 config/input error, 3 total generation failure,
4 training divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .candidates import (
    CandidateFileError,
    GenerationError,
    GeneratorBackend,
    PromptTemplate,
    SamplingConfig,
    generate_candidates,
    load_shots,
    read_candidate_file,
    write_candidate_file,
)
from .evaluation import EmbeddingProvider, evaluate, read_summary, write_records, write_summary
from .identifiers import Placeholder
from .mining import (
    MiningStats,
    SplitSpec,
    discover_files,
    make_splits,
    mine_files,
    read_examples,
    write_examples,
)
from .report import load_training_log, render_eval_report, render_training_report
from .reranker import (
    ModelLoadError,
    ScoringConfig,
    TrainConfig,
    TrainingDivergedError,
    load_model,
    mine_training_pairs,
    rerank,
    save_model,
    train_reranker,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ALL_ERRORED = 3
EXIT_DIVERGED = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _fail(message: str, code: int = EXIT_CONFIG) -> CliError:
    return CliError(code, message)


def _atomic_write_json(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge CLI flags over --config file contents over defaults."""
    merged = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise _fail(f"cannot read config file {config_path}: {exc}")
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise _fail(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _write_config_sidecar(primary_output: Path, command: str, options: dict) -> None:
    sidecar = primary_output.with_name(primary_output.name + ".config.json")
    _atomic_write_json(sidecar, {"command": command, "options": options})


def _require(options: dict, *keys: str) -> None:
    for key in keys:
        if options.get(key) is None:
            raise _fail(f"missing required option --{key.replace('_', '-')}")


def _read_examples_checked(path: str):
    if not path or not Path(path).is_file():
        raise _fail(f"input file not found: {path}")
    try:
        return list(read_examples(path))
    except (OSError, ValueError, KeyError) as exc:
        raise _fail(f"cannot read examples from {path}: {exc}")


# --- mine ---------------------------------------------------------------------

MINE_DEFAULTS = {
    "input_dir": None,
    "manifest": None,
    "out": None,
    "max_functions": None,
    "placeholder": "<ID_1>",
}


def cmd_mine(args: argparse.Namespace) -> int:
    options = _resolve(args, MINE_DEFAULTS)
    _require(options, "out")
    if bool(options["input_dir"]) == bool(options["manifest"]):
        raise _fail("exactly one of --input-dir or --manifest is required")
    source = options["input_dir"] or options["manifest"]
    if not Path(source).exists():
        raise _fail(f"input not readable: {source}")
    try:
        placeholder = Placeholder.parse(options["placeholder"])
    except ValueError as exc:
        raise _fail(str(exc))

    entries = discover_files(input_dir=options["input_dir"], manifest=options["manifest"])
    stats = MiningStats()
    out = Path(options["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    count = write_examples(
        out, mine_files(entries, stats, max_examples=options["max_functions"], placeholder=placeholder)
    )
    _atomic_write_json(out.with_name(out.name + ".manifest.json"), stats.as_dict())
    _write_config_sidecar(out, "mine", options)
    print(
        f"mined {count} examples from {stats.files_parsed}/{stats.files_seen} files "
        f"({stats.functions_extracted} functions, {stats.files_skipped} files skipped, "
        f"{stats.examples_skipped_collision} collision skips)"
    )
    return EXIT_OK


# --- split --------------------------------------------------------------------

SPLIT_DEFAULTS = {
    "in_path": None,
    "out_dir": None,
    "train_count": None,
    "pool_skip": None,
    "pool_size": None,
    "val_size": None,
    "seed": 42,
}


def cmd_split(args: argparse.Namespace) -> int:
    options = _resolve(args, SPLIT_DEFAULTS)
    _require(options, "in_path", "out_dir", "train_count", "pool_skip", "pool_size", "val_size")
    examples = _read_examples_checked(options["in_path"])
    try:
        spec = SplitSpec(
            train_count=options["train_count"],
            pool_skip=options["pool_skip"],
            pool_size=options["pool_size"],
            val_size=options["val_size"],
            seed=options["seed"],
        )
    except ValueError as exc:
        raise _fail(str(exc))
    out_dir = Path(options["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    result = make_splits(
        iter(examples), spec, out_dir / "train.jsonl", out_dir / "pool.jsonl", out_dir / "val.jsonl"
    )
    _atomic_write_json(
        out_dir / "split.manifest.json",
        {"train": result.train, "pool": result.pool, "val": result.val, "exhausted": result.exhausted},
    )
    _write_config_sidecar(out_dir / "split", "split", options)
    print(f"split: train={result.train} pool={result.pool} val={result.val} exhausted={result.exhausted}")
    return EXIT_OK


# --- generate -------------------------------------------------------------------

GENERATE_DEFAULTS = {
    "in_path": None,
    "out": None,
    "backend": None,  # "http" | "file"
    "endpoint": None,
    "model": None,
    "credential_env": "NAMEREPAIR_API_KEY",
    "candidates_in": None,
    "shots": 0,
    "shots_file": None,
    "k": 10,
    "temperature": 0.8,
    "top_p": 0.9,
    "max_tokens": 64,
    "samples_mode": "n",
    "parser": "json_mapping",
    "jobs": 1,
    "retry_base_delay": 1.0,
}


def _build_generator(options: dict) -> GeneratorBackend:
    if options["backend"] == "http":
        _require(options, "endpoint", "model")
        return GeneratorBackend.http(
            endpoint=options["endpoint"],
            model=options["model"],
            credential_env=options["credential_env"],
            samples_mode=options["samples_mode"],
            retry_base_delay=options["retry_base_delay"],
        )
    if options["backend"] == "file":
        _require(options, "candidates_in")
        if not Path(options["candidates_in"]).is_file():
            raise _fail(f"candidate file not found: {options['candidates_in']}")
        return GeneratorBackend.from_file(options["candidates_in"])
    raise _fail(f"--backend must be http or file, got {options['backend']!r}")


def _build_template(options: dict) -> PromptTemplate:
    from .candidates import NUMBERED_SYSTEM_TEXT

    numbered = options["parser"] == "numbered"
    if options["shots"] == 0:
        return PromptTemplate(system_text=NUMBERED_SYSTEM_TEXT) if numbered else PromptTemplate()
    if options["shots"] == 3:
        if numbered:
            raise _fail("--parser numbered supports zero-shot prompting only")
        if not options["shots_file"]:
            raise _fail("--shots 3 requires --shots-file with three exemplars")
        shots = load_shots(options["shots_file"])
        if len(shots) != 3:
            raise _fail(f"shots file must contain exactly 3 exemplars, found {len(shots)}")
        return PromptTemplate(shots=shots)
    raise _fail("--shots must be 0 or 3")


def cmd_generate(args: argparse.Namespace) -> int:
    options = _resolve(args, GENERATE_DEFAULTS)
    _require(options, "in_path", "out", "backend")
    backend = _build_generator(options)
    template = _build_template(options)
    try:
        cfg = SamplingConfig(
            k=options["k"],
            temperature=options["temperature"],
            top_p=options["top_p"],
            max_tokens=options["max_tokens"],
        )
    except ValueError as exc:
        raise _fail(str(exc))
    examples = _read_examples_checked(options["in_path"])

    out = Path(options["out"])
    done: dict[str, dict] = {}
    if out.is_file():
        with open(out, "r", encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                obj = json.loads(line)
                if "error" not in obj:  # errored entries are retried on resume
                    done[obj["id"]] = obj

    todo = [ex for ex in examples if ex.id not in done]

    def run_one(example) -> dict:
        try:
            cands = generate_candidates(backend, template, example, cfg, parser=options["parser"])
        except GenerationError as exc:
            return {"id": example.id, "candidates": [], "error": str(exc)}
        return {
            "id": example.id,
            "candidates": [
                {"name": c.name, "logprob": c.gen_logprob} for c in cands
            ],
        }

    if options["jobs"] > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=options["jobs"]) as pool:
            fresh = list(pool.map(run_one, todo))
    else:
        fresh = [run_one(ex) for ex in todo]

    by_id = dict(done)
    by_id.update({row["id"]: row for row in fresh})
    rows = [by_id[ex.id] for ex in examples if ex.id in by_id]

    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=True, separators=(",", ":")))
            handle.write("\n")
    os.replace(tmp, out)

    errored = sum(1 for row in fresh if "error" in row)
    ordering = "logprob" if options["backend"] == "http" else "file"
    _atomic_write_json(
        out.with_name(out.name + ".manifest.json"),
        {
            "backend": options["backend"],
            "samples_mode": options["samples_mode"],
            "candidate_ordering": ordering,
            "examples": len(examples),
            "generated": len(fresh) - errored,
            "resumed": len(done),
            "errored": errored,
        },
    )
    _write_config_sidecar(out, "generate", options)
    print(f"generate: {len(fresh) - errored} generated, {len(done)} resumed, {errored} errored")
    if todo and errored == len(todo):
        raise _fail("all examples errored during generation", EXIT_ALL_ERRORED)
    return EXIT_OK


# --- train-reranker --------------------------------------------------------------

TRAIN_DEFAULTS = {
    "train": None,
    "candidates": None,
    "out": None,
    "log": None,
    "steps": 2000,
    "batch": 32,
    "lr": 2e-4,
    "warmup": 1000,
    "schedule": "warmup_cosine",
    "dropout": 0.1,
    "seed": 0,
    "dim": 64,
    "k": 10,
    "context_window": 64,
    "in_batch_negatives": False,
}


def cmd_train_reranker(args: argparse.Namespace) -> int:
    options = _resolve(args, TRAIN_DEFAULTS)
    _require(options, "train", "candidates", "out")
    examples = _read_examples_checked(options["train"])
    if not Path(options["candidates"]).is_file():
        raise _fail(f"candidate file not found: {options['candidates']}")
    try:
        table = read_candidate_file(options["candidates"])
    except CandidateFileError as exc:
        raise _fail(str(exc))

    pairs, report = mine_training_pairs(
        examples, lambda ex: table.get(ex.id, []), k=options["k"], context_window=options["context_window"]
    )
    if not pairs:
        raise _fail("no training pairs could be mined from the inputs")
    try:
        cfg = TrainConfig(
            steps=options["steps"],
            batch_size=options["batch"],
            peak_lr=options["lr"],
            warmup_steps=min(options["warmup"], options["steps"]),
            schedule=options["schedule"],
            dropout_rate=options["dropout"],
            seed=options["seed"],
            in_batch_negatives=options["in_batch_negatives"],
        )
        scoring = ScoringConfig(context_window=options["context_window"])
    except ValueError as exc:
        raise _fail(str(exc))

    try:
        model, log = train_reranker(pairs, cfg, dim=options["dim"], scoring=scoring)
    except TrainingDivergedError as exc:
        raise _fail(str(exc), EXIT_DIVERGED)

    out = Path(options["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    log_path = Path(options["log"]) if options["log"] else out.with_name(out.name + ".log.jsonl")
    tmp = log_path.with_name(log_path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        for entry in log:
            handle.write(json.dumps(entry, separators=(",", ":")))
            handle.write("\n")
    os.replace(tmp, log_path)
    _write_config_sidecar(out, "train-reranker", options)
    final_loss = log[-1]["loss"] if log else float("nan")
    print(
        f"trained on {report.pairs} pairs ({report.zero_negative_pairs} without negatives); "
        f"final loss {final_loss:.6f}" if log else f"saved initialization ({report.pairs} pairs, 0 steps)"
    )
    return EXIT_OK


# --- rerank ----------------------------------------------------------------------

RERANK_DEFAULTS = {
    "in_candidates": None,
    "examples": None,
    "model": None,
    "out": None,
}


def cmd_rerank(args: argparse.Namespace) -> int:
    options = _resolve(args, RERANK_DEFAULTS)
    _require(options, "in_candidates", "examples", "model", "out")
    try:
        model = load_model(options["model"])
    except ModelLoadError as exc:
        raise _fail(str(exc))
    examples = {ex.id: ex for ex in _read_examples_checked(options["examples"])}
    if not Path(options["in_candidates"]).is_file():
        raise _fail(f"candidate file not found: {options['in_candidates']}")

    rows = []
    with open(options["in_candidates"], "r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                rows.append(json.loads(line))
    try:
        table = read_candidate_file(options["in_candidates"])
    except CandidateFileError as exc:
        raise _fail(str(exc))

    out_rows = []
    for row in rows:
        example_id = row["id"]
        if example_id not in examples:
            raise _fail(f"candidate id {example_id!r} has no matching example in {options['examples']}")
        cands = table[example_id]
        if cands:
            cands = rerank(model, model.scoring, examples[example_id], cands)
        out_rows.append((example_id, cands))

    out = Path(options["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    write_candidate_file(out, out_rows)
    _write_config_sidecar(out, "rerank", options)
    print(f"reranked {len(out_rows)} candidate lists")
    return EXIT_OK


# --- eval ------------------------------------------------------------------------

EVAL_DEFAULTS = {
    "val": None,
    "candidates": None,
    "out_summary": None,
    "out_records": None,
    "embedder": "builtin",
    "embed_endpoint": None,
    "embed_model": None,
    "embed_dim": 384,
    "credential_env": "NAMEREPAIR_API_KEY",
    "rerank_model": None,
    "k": 10,
    "retry_base_delay": 1.0,
}


def _build_embedder(options: dict) -> EmbeddingProvider:
    if options["embedder"] == "builtin":
        return EmbeddingProvider.builtin()
    if options["embedder"] == "http":
        _require(options, "embed_endpoint")
        return EmbeddingProvider.http(
            endpoint=options["embed_endpoint"],
            model=options["embed_model"],
            dim=options["embed_dim"],
            credential_env=options["credential_env"],
            retry_base_delay=options["retry_base_delay"],
        )
    raise _fail(f"--embedder must be builtin or http, got {options['embedder']!r}")


def cmd_eval(args: argparse.Namespace) -> int:
    options = _resolve(args, EVAL_DEFAULTS)
    _require(options, "val", "candidates", "out_summary", "out_records")
    examples = _read_examples_checked(options["val"])
    if not Path(options["candidates"]).is_file():
        raise _fail(f"candidate file not found: {options['candidates']}")
    try:
        table = read_candidate_file(options["candidates"])
    except CandidateFileError as exc:
        raise _fail(str(exc))
    embedder = _build_embedder(options)

    reranker_fn = None
    if options["rerank_model"]:
        try:
            model = load_model(options["rerank_model"])
        except ModelLoadError as exc:
            raise _fail(str(exc))
        reranker_fn = lambda ex, cands: rerank(model, model.scoring, ex, cands)  # noqa: E731

    config_echo = {
        "backend": "file",
        "candidates": str(options["candidates"]),
        "k": options["k"],
        "reranker": bool(options["rerank_model"]),
        "embedder": "builtin_ngram" if options["embedder"] == "builtin" else "http_embedding",
    }
    summary, records = evaluate(
        examples,
        lambda ex: table.get(ex.id, []),
        embedder,
        reranker=reranker_fn,
        k=options["k"],
        config=config_echo,
    )
    out_summary = Path(options["out_summary"])
    out_summary.parent.mkdir(parents=True, exist_ok=True)
    write_summary(summary, out_summary)
    write_records(records, options["out_records"])
    _write_config_sidecar(out_summary, "eval", options)
    print(
        f"eval: n={summary.n} ok={summary.n_ok} errored={summary.n_errored} "
        f"exact={summary.exact_pct:.1f}% top5={summary.top5_pct:.1f}% partial={summary.partial_mean:.2f}"
    )
    return EXIT_OK


# --- report ----------------------------------------------------------------------

REPORT_DEFAULTS = {
    "train_log": None,
    "eval_summary": None,
    "eval_records": None,
    "out_dir": None,
}


def cmd_report(args: argparse.Namespace) -> int:
    options = _resolve(args, REPORT_DEFAULTS)
    _require(options, "out_dir")
    if not options["train_log"] and not options["eval_summary"]:
        raise _fail("report needs --train-log and/or --eval-summary")
    out_dir = Path(options["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if options["train_log"]:
        if not Path(options["train_log"]).is_file():
            raise _fail(f"training log not found: {options['train_log']}")
        written += render_training_report(load_training_log(options["train_log"]), out_dir)
    if options["eval_summary"]:
        if not Path(options["eval_summary"]).is_file():
            raise _fail(f"summary not found: {options['eval_summary']}")
        summary = read_summary(options["eval_summary"])
        records = []
        if options["eval_records"]:
            from .evaluation import read_records

            records = list(read_records(options["eval_records"]))
        written += render_eval_report(summary, records, out_dir)
    _write_config_sidecar(out_dir / "report", "report", options)
    print("report wrote: " + ", ".join(str(p) for p in written))
    return EXIT_OK


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="namerepair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine masked examples from a C++ corpus")
    p.add_argument("--input-dir")
    p.add_argument("--manifest")
    p.add_argument("--out")
    p.add_argument("--max-functions", type=int)
    p.add_argument("--placeholder")
    p.add_argument("--config")
    p.set_defaults(handler=cmd_mine)

    p = sub.add_parser("split", help="write train/pool/val splits")
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out-dir")
    p.add_argument("--train-count", type=int)
    p.add_argument("--pool-skip", type=int)
    p.add_argument("--pool-size", type=int)
    p.add_argument("--val-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("generate", help="produce candidate names for masked examples")
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out")
    p.add_argument("--backend", choices=["http", "file"])
    p.add_argument("--endpoint")
    p.add_argument("--model")
    p.add_argument("--credential-env")
    p.add_argument("--candidates-in")
    p.add_argument("--shots", type=int, choices=[0, 3])
    p.add_argument("--shots-file")
    p.add_argument("--k", type=int)
    p.add_argument("--temperature", type=float)
    p.add_argument("--top-p", type=float)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--samples-mode", choices=["n", "repeat"])
    p.add_argument("--parser", choices=["json_mapping", "numbered"])
    p.add_argument("--jobs", type=int)
    p.add_argument("--retry-base-delay", type=float)
    p.add_argument("--config")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("train-reranker", help="train the dual-encoder reranker")
    p.add_argument("--train")
    p.add_argument("--candidates")
    p.add_argument("--out")
    p.add_argument("--log")
    p.add_argument("--steps", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--warmup", type=int)
    p.add_argument("--schedule", choices=["warmup_cosine", "constant"])
    p.add_argument("--dropout", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--context-window", type=int)
    p.add_argument("--in-batch-negatives", action="store_const", const=True)
    p.add_argument("--config")
    p.set_defaults(handler=cmd_train_reranker)

    p = sub.add_parser("rerank", help="reorder candidate lists with a trained model")
    p.add_argument("--in-candidates")
    p.add_argument("--examples")
    p.add_argument("--model")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(handler=cmd_rerank)

    p = sub.add_parser("eval", help="score candidates against gold names")
    p.add_argument("--val")
    p.add_argument("--candidates")
    p.add_argument("--out-summary")
    p.add_argument("--out-records")
    p.add_argument("--embedder", choices=["builtin", "http"])
    p.add_argument("--embed-endpoint")
    p.add_argument("--embed-model")
    p.add_argument("--embed-dim", type=int)
    p.add_argument("--credential-env")
    p.add_argument("--rerank-model")
    p.add_argument("--k", type=int)
    p.add_argument("--retry-base-delay", type=float)
    p.add_argument("--config")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("report", help="render figures and CSV tables from run outputs")
    p.add_argument("--train-log")
    p.add_argument("--eval-summary")
    p.add_argument("--eval-records")
    p.add_argument("--out-dir")
    p.add_argument("--config")
    p.set_defaults(handler=cmd_report)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
