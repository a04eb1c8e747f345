"""Command-line front end.

Every text output starts with ``#ddahash-<kind> v1 <fingerprint>`` followed
by ``#config <json>``.  The fingerprint is the first 16 hex digits of the
SHA-256 of that JSON, which holds every option that can change the answers
(the seed included) but not output paths or the worker count.  Binary
outputs (models, projection dumps, scalers) carry their own magic bytes and
have a text sidecar log instead.

Exit status is 0 on success, 1 for library errors and 2 for usage errors;
diagnostics go to stderr as ``ddahash: error: <kind>: <message>``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import bench, dataio, hasher, index, irma, nn, radon
from ._accel import backend
from .codes import BinaryCode, load_codes, pack_rows, save_codes
from .errors import DdaHashError, FormatError, InvalidArgumentError

logger = logging.getLogger("ddahash")

# options that only say where or how fast things are written
_NOT_CONFIG = {"func", "out", "log", "timings", "threads", "verbose", "scaler_out"}


def run_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    return json.loads(json.dumps(cfg, sort_keys=True, default=str))


def fingerprint(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def header_lines(kind: str, args) -> list[str]:
    cfg = run_config(args)
    return [f"#ddahash-{kind} v1 {fingerprint(cfg)}", "#config " + json.dumps(cfg, sort_keys=True)]


def write_text(path, kind, args, body_lines) -> None:
    lines = header_lines(kind, args) + list(body_lines)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_text_body(path, kind: str) -> list[str]:
    """Body lines of a text output, checking the ``#ddahash-<kind>`` header."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    magic = f"#ddahash-{kind} v1"
    if not lines or not lines[0].startswith(magic):
        found = lines[0][: len(magic)] if lines else ""
        raise FormatError(f"{path}: expected header {magic!r}, found {found!r}", path, magic, found)
    return [ln for ln in lines[1:] if ln.strip() and not ln.startswith("#")]


def _emit(args, kind, body):
    """Print a report and, with ``--out``, also save it with a header."""
    for line in body:
        print(line)
    if args.out:
        write_text(args.out, kind, args, body)


# --------------------------------------------------------------------------
# synth
# --------------------------------------------------------------------------


def cmd_synth(args):
    if not args.out:
        raise InvalidArgumentError("synth needs --out DIR")
    data = dataio.generate_synthetic(args.n, args.classes, args.size, args.seed, args.noise, args.jitter)
    train, test = dataio.write_synthetic(args.out, data, args.test_fraction, args.seed)
    write_text(Path(args.out) / "synth.info", "synth", args, [f"train {train.name}", f"test {test.name}"])
    print(f"wrote {len(data.ids)} images: {train} {test}")


# --------------------------------------------------------------------------
# train / encode
# --------------------------------------------------------------------------


def _load_inputs(args, scaler=None):
    """``(ids, matrix)`` from ``--manifest`` images or a ``--projections`` dump."""
    if args.manifest:
        m = dataio.read_manifest(args.manifest)
        return m.ids, dataio.preprocess_many(m.load_images(), args.image_size)
    sets = radon.load_projections(args.projections)
    p = np.stack([s.flat() for s in sets])
    if scaler is None:
        return [s.image_id for s in sets], p
    return [s.image_id for s in sets], scaler.transform(p)


def _train_geometry(args):
    if args.geometry:
        return hasher.parse_geometry(args.geometry), None
    preset = hasher.PRESETS[args.preset]
    return [tuple(p) for p in preset.geometry], preset


def cmd_train(args):
    if not args.out:
        raise InvalidArgumentError("train needs --out MODEL")
    geo, preset = _train_geometry(args)
    if args.preset == "rabc" and not args.projections:
        raise InvalidArgumentError("the rabc preset trains on Radon projections; pass --projections")
    optimizer = args.optimizer or (preset.finetune_optimizer if preset else "rmsprop")
    ft_epochs = args.finetune_epochs
    if ft_epochs is None:
        ft_epochs = preset.finetune_epochs if preset else args.epochs

    scaler = None
    if args.projections:
        _, raw = _load_inputs(args)
        scaler = radon.fit_scaler(raw)
        x = scaler.transform(raw)
        scaler_path = args.scaler_out or str(args.out) + ".scaler"
        radon.save_scaler(scaler_path, scaler)
    else:
        _, x = _load_inputs(args)
    if x.shape[1] != geo[0][0]:
        raise InvalidArgumentError(f"inputs have {x.shape[1]} values but the geometry starts at {geo[0][0]}")

    log_path = args.log or str(args.out) + ".log"
    log = header_lines("trainlog", args) + ["#stage layer epoch loss elapsed_s"]
    t0 = time.perf_counter()

    def record(stage, layer, epoch, loss):
        log.append(f"{stage} {layer} {epoch + 1} {loss!r} {time.perf_counter() - t0:.3f}")
        logger.info("%s layer %s epoch %d loss %.6f", stage, layer, epoch + 1, loss)

    rng = nn.make_rng(args.seed)
    enc, dec = hasher.layer_train(
        x, geo, rng, args.epochs, args.batch_size, args.dropout_p,
        on_epoch=lambda i, e, loss: record("pretrain", i, e, loss),
    )
    if args.no_finetune:
        model = hasher.build_dda(geo, enc, dec, not args.no_dropout, args.dropout_p, args.output_activation)
    else:
        model = hasher.fine_tune(
            x, geo, enc, dec, optimizer, not args.no_dropout, rng, ft_epochs, args.batch_size,
            args.dropout_p, args.output_activation, on_epoch=lambda e, loss: record("finetune", "-", e, loss),
        )
    dataio.save_model(args.out, model)
    log.append(f"#wall_s {time.perf_counter() - t0:.3f}")
    Path(log_path).write_text("\n".join(log) + "\n", encoding="utf-8")
    print(f"model {args.out}: {model.layers}")


def cmd_encode(args):
    if not args.out:
        raise InvalidArgumentError("encode needs --out CODES")
    model = dataio.load_model(args.model)
    encoder = hasher.as_encoder(model)
    scaler = None
    if args.projections:
        if not args.scaler:
            raise InvalidArgumentError("encoding projections needs the --scaler fitted at training time")
        scaler = radon.load_scaler(args.scaler)
    elif args.image_size is None:
        side = math.isqrt(encoder.n_inputs)
        if side * side != encoder.n_inputs:
            raise InvalidArgumentError(f"model input {encoder.n_inputs} is not a square image; pass --image-size")
        args.image_size = side
    ids, x = _load_inputs(args, scaler)
    if x.shape[1] != encoder.n_inputs:
        raise InvalidArgumentError(f"inputs have {x.shape[1]} values, the model expects {encoder.n_inputs}")
    k = encoder.n_outputs
    codes = [BinaryCode(row, k) for row in hasher.encode(encoder, x)]
    save_codes(args.out, ids, codes, fingerprint(run_config(args)), [header_lines("codes", args)[1][1:]])
    print(f"wrote {len(codes)} {k}-bit codes to {args.out}")


# --------------------------------------------------------------------------
# radon / index
# --------------------------------------------------------------------------


def cmd_radon(args):
    if not args.out:
        raise InvalidArgumentError("radon needs --out PROJECTIONS")
    m = dataio.read_manifest(args.manifest)
    sets = radon.project_images(m.load_images(), m.ids, args.angles, args.size, args.threads)
    radon.save_projections(args.out, sets)
    if args.codes:
        save_codes(args.codes, m.ids, [radon.radon_barcode(s) for s in sets],
                   fingerprint(run_config(args)), [header_lines("codes", args)[1][1:]])
    print(f"projected {len(sets)} images at {args.angles} angles")


def _database(path) -> index.CodeDatabase:
    ids, codes = load_codes(path)
    if not codes:
        raise InvalidArgumentError(f"{path}: no codes")
    return index.CodeDatabase.from_codes(ids, codes)


def cmd_index(args):
    idx = index.HashIndex(_database(args.short), _database(args.long))
    buckets = idx.buckets()
    width = (idx.key_bits + 3) // 4
    body = [f"{key:0{width}x} {len(ids)} {' '.join(ids)}" for key, ids in buckets.items()]
    if args.out:
        write_text(args.out, "index", args, body)
    sizes = [len(v) for v in buckets.values()]
    print(f"{len(idx)} entries in {len(buckets)} of {1 << idx.key_bits} buckets; largest bucket {max(sizes)}")


# --------------------------------------------------------------------------
# retrieve
# --------------------------------------------------------------------------

STRATEGIES = ("exhaustive", "semantic-hash", "combined", "pearson")
_NEEDS = {
    "exhaustive": ("queries", "db"),
    "semantic-hash": ("queries", "db", "query_short", "db_short"),
    "combined": ("queries", "db", "query_second", "db_second"),
    "pearson": ("query_manifest", "db_manifest"),
}


def _check_strategy_inputs(args, parser):
    need = _NEEDS[args.strategy]
    missing = [n for n in need if not getattr(args, n)]
    extra = [n for names in _NEEDS.values() for n in names if n not in need and getattr(args, n)]
    if missing:
        parser.error(f"strategy {args.strategy} needs " + ", ".join("--" + n.replace("_", "-") for n in missing))
    if extra:
        parser.error(f"strategy {args.strategy} does not take " + ", ".join("--" + n.replace("_", "-") for n in sorted(set(extra))))


def _retrievers(args):
    """``(query ids, function(k) -> (retrieved id or None, distance, candidates, via))``."""
    s = args.strategy
    if s == "pearson":
        qm, dm = dataio.read_manifest(args.query_manifest), dataio.read_manifest(args.db_manifest)
        qx = dataio.preprocess_many(qm.load_images(), args.image_size)
        dx = dataio.preprocess_many(dm.load_images(), args.image_size)

        def one(k):
            hit = index.pearson_retrieve(qx[k], dx, dm.ids)
            return hit.image_id, repr(1.0 - hit.distance), hit.candidates, "scan"

        return qm.ids, one

    q_ids, q_codes = load_codes(args.queries)
    db = _database(args.db)
    if s == "exhaustive":

        def one(k):
            hit = index.exhaustive_search(q_codes[k], db)
            return hit.image_id, str(hit.distance), hit.candidates, "scan"

        return q_ids, one

    if s == "combined":
        q2_ids, q2_codes = load_codes(args.query_second)
        db2 = _database(args.db_second)
        if q2_ids != q_ids:
            raise InvalidArgumentError("--queries and --query-second must list the same ids in the same order")

        def one(k):
            hit = index.combined_search(q_codes[k], q2_codes[k], db, db2)
            return hit.image_id, repr(hit.distance), hit.candidates, "scan"

        return q_ids, one

    qs_ids, qs_codes = load_codes(args.query_short)
    if qs_ids != q_ids:
        raise InvalidArgumentError("--queries and --query-short must list the same ids in the same order")
    idx = index.HashIndex(_database(args.db_short), db)

    def one(k):
        hit = index.semantic_hash_retrieve(qs_codes[k], q_codes[k], idx, args.bit_flips, args.exact)
        if hit is not None:
            return hit.image_id, str(hit.distance), hit.candidates, "hash"
        if args.no_fallback:
            return None, "-", 0, "none"
        hit = index.exhaustive_search(q_codes[k], db)
        return hit.image_id, str(hit.distance), hit.candidates, "fallback"

    return q_ids, one


def cmd_retrieve(args):
    if not args.out:
        raise InvalidArgumentError("retrieve needs --out RESULTS")
    q_ids, one = _retrievers(args)
    body = ["#query retrieved distance candidates via"]
    timings = ["#query latency_ns"]
    for k, qid in enumerate(q_ids):
        t0 = time.perf_counter_ns()
        rid, dist, n, via = one(k)
        timings.append(f"{qid} {time.perf_counter_ns() - t0}")
        body.append(f"{qid} {rid or '-'} {dist} {n} {via}")
    write_text(args.out, "results", args, body)
    if args.timings:
        write_text(args.timings, "timings", args, timings)
    print(f"{len(q_ids)} queries -> {args.out}")


def read_results(path) -> list[tuple[str, str | None]]:
    out = []
    for ln in read_text_body(path, "results"):
        parts = ln.split()
        out.append((parts[0], None if parts[1] == "-" else parts[1]))
    return out


# --------------------------------------------------------------------------
# evaluate
# --------------------------------------------------------------------------


def _irma_lookup(paths) -> dict:
    codes = {}
    for p in paths:
        codes.update(irma.load_irma_codes(p))
    return codes


def cmd_evaluate(args):
    results = read_results(args.results)
    codes = _irma_lookup(args.irma)
    unanswered = [q for q, r in results if r is None]
    if unanswered:
        raise InvalidArgumentError(f"queries without a retrieved image: {unanswered[:10]}")
    missing = sorted({i for pair in results for i in pair if i not in codes})
    if missing:
        raise InvalidArgumentError(f"no IRMA code for ids {missing[:10]}" + (" ..." if len(missing) > 10 else ""))
    if args.branch_table:
        table = irma.load_branch_table(args.branch_table)
    else:
        table = irma.build_branch_table(codes.values(), args.prefix_conditioned)
    per = np.zeros(len(irma.STRUCTURE_LENGTHS))
    wrong = 0
    for q, r in results:
        e = irma.structure_errors(codes[q], codes[r], table)
        per += e
        wrong += sum(e) > 0
    body = [f"E_total {float(per.sum())!r}", f"queries {len(results)}", f"imperfect {wrong}"]
    body += [f"E_{name} {float(v)!r}" for name, v in zip(irma.STRUCTURE_NAMES, per)]
    body.append(f"max_per_query {irma.max_image_error(table)!r}")
    _emit(args, "evaluation", body)


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------


def _bench_inputs(args):
    if args.db_long:
        needed = [args.db_short, args.query_short, args.query_long]
        if not all(needed):
            raise InvalidArgumentError("bench from files needs --db-short, --db-long, --query-short and --query-long")
        short, long = _database(args.db_short), _database(args.db_long)
        _, qs = load_codes(args.query_short)
        _, ql = load_codes(args.query_long)
        return index.HashIndex(short, long), qs, ql
    rng = nn.make_rng(args.seed)
    n, nq = args.db_size, args.n_queries
    ids = [f"db{i}" for i in range(n)]
    short = index.CodeDatabase(ids, pack_rows(rng.integers(0, 2, (n, args.short_bits))), args.short_bits)
    long = index.CodeDatabase(ids, pack_rows(rng.integers(0, 2, (n, args.long_bits))), args.long_bits)
    qs = [BinaryCode(r, args.short_bits) for r in pack_rows(rng.integers(0, 2, (nq, args.short_bits)))]
    ql = [BinaryCode(r, args.long_bits) for r in pack_rows(rng.integers(0, 2, (nq, args.long_bits)))]
    return index.HashIndex(short, long), qs, ql


def run_bench(idx, q_short, q_long, runs, flips, encoders=None, query_images=None):
    """Time every strategy over all queries ``runs`` times.

    Returns ``(timings, answers)``; a timing sample is the mean seconds per
    query in one run.  With ``encoders=(short, long)`` and ``query_images``
    the query codes are recomputed inside every timed run.
    """
    nq = len(q_long)

    def codes():
        if encoders is None:
            return q_short, q_long
        return hasher.encode_codes(encoders[0], query_images), hasher.encode_codes(encoders[1], query_images)

    answers = {}

    def exhaustive():
        _, ql = codes()
        return tuple(index.exhaustive_search(q, idx.long).index for q in ql)

    def semantic(h):
        def go():
            qs, ql = codes()
            out = []
            for a, b in zip(qs, ql):
                hit = index.semantic_hash_retrieve(a, b, idx, h)
                out.append(-1 if hit is None else hit.index)
            return tuple(out)

        return go

    jobs = [(f"exhaustive-{idx.long.length}", exhaustive)] + [(f"semantic-hash-H{h}", semantic(h)) for h in flips]
    timings = []
    for name, fn in jobs:

        def timed(fn=fn, name=name):
            got = fn()
            if answers.setdefault(name, got) != got:
                raise DdaHashError(f"{name} returned different answers across repetitions")

        t = bench.time_runs(name, timed, runs)
        timings.append(bench.Timing(name, tuple(s / nq for s in t.samples)))
    return timings, answers


def query_latencies(idx, q_short, q_long, flips) -> dict:
    """One extra pass timing every query on its own, in nanoseconds."""
    jobs = {f"exhaustive-{idx.long.length}": lambda a, b: index.exhaustive_search(b, idx.long)}
    for h in flips:
        jobs[f"semantic-hash-H{h}"] = lambda a, b, h=h: index.semantic_hash_retrieve(a, b, idx, h)
    out = {}
    for name, fn in jobs.items():
        ns = np.empty(len(q_long), dtype=np.int64)
        for k, (a, b) in enumerate(zip(q_short, q_long)):
            t0 = time.perf_counter_ns()
            fn(a, b)
            ns[k] = time.perf_counter_ns() - t0
        out[name] = ns
    return out


def cmd_bench(args):
    if args.runs < 2:
        raise InvalidArgumentError(f"--runs must be >= 2, got {args.runs}")
    idx, qs, ql = _bench_inputs(args)
    encoders = images = None
    if args.include_encoding:
        if not (args.short_model and args.long_model and args.query_manifest):
            raise InvalidArgumentError("--include-encoding needs --short-model, --long-model and --query-manifest")
        encoders = (hasher.as_encoder(dataio.load_model(args.short_model)), hasher.as_encoder(dataio.load_model(args.long_model)))
        m = dataio.read_manifest(args.query_manifest)
        images = dataio.preprocess_many(m.load_images(), math.isqrt(encoders[1].n_inputs))
    timings, answers = run_bench(idx, qs, ql, args.runs, args.bit_flips, encoders, images)
    base = timings[0]
    exh = answers[base.name]
    body = [f"backend {backend()}", f"database {len(idx)}", f"queries {len(ql)}", f"runs {args.runs}"]
    for t in timings:
        lo, hi = t.ci()
        body.append(f"strategy {t.name} mean_ns {t.mean * 1e9:.1f} ci95_ns {lo * 1e9:.1f} {hi * 1e9:.1f}")
    for t in timings[1:]:
        agree = sum(a == b for a, b in zip(answers[t.name], exh))
        body.append(f"speedup {t.name} vs {base.name} {bench.speedup(base, t):.3f} agree {agree}/{len(exh)}")
    for name, ns in query_latencies(idx, qs, ql, args.bit_flips).items():
        p50, p90, p99 = np.percentile(ns, [50, 90, 99])
        body.append(f"latency {name} p50_ns {p50:.0f} p90_ns {p90:.0f} p99_ns {p99:.0f} max_ns {ns.max()}")
    _emit(args, "bench", body)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    common.add_argument("--out", help="output path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ddahash", description="Binary image codes and Hamming retrieval.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic labelled image set")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--noise", type=float, default=0.2)
    p.add_argument("--jitter", type=float, default=0.08)
    p.add_argument("--test-fraction", type=float, default=0.125)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="pretrain and fine-tune a de-noising autoencoder")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="training images")
    src.add_argument("--projections", help="Radon projection dump (RABC training)")
    arch = p.add_mutually_exclusive_group(required=True)
    arch.add_argument("--preset", choices=sorted(hasher.PRESETS))
    arch.add_argument("--geometry", help="encoder geometry, e.g. 1024x768,768x512 or 1024-768-512")
    p.add_argument("--optimizer", choices=["rmsprop", "adam"], help="fine-tune optimizer (default from preset)")
    p.add_argument("--epochs", type=int, default=hasher.EPOCHS, help="pretraining epochs per layer")
    p.add_argument("--finetune-epochs", type=int, help="default: preset value, else --epochs")
    p.add_argument("--batch-size", type=int, default=hasher.BATCH_SIZE)
    p.add_argument("--dropout-p", type=float, default=hasher.DROPOUT_P)
    p.add_argument("--no-dropout", action="store_true", help="no dropout before the coding layer")
    p.add_argument("--no-finetune", action="store_true", help="stop after layer-wise pretraining")
    p.add_argument("--output-activation", choices=["softmax", "sigmoid"], default="softmax")
    p.add_argument("--image-size", type=int, default=32)
    p.add_argument("--log", help="training log (default <out>.log)")
    p.add_argument("--scaler-out", help="fitted projection scaler (default <out>.scaler)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", parents=[common], help="binary codes from a trained model")
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest")
    src.add_argument("--projections")
    p.add_argument("--scaler", help="projection scaler written by train")
    p.add_argument("--image-size", type=int, help="default: inferred from the model")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("radon", parents=[common], help="Radon projections and barcodes")
    p.add_argument("--manifest", required=True)
    p.add_argument("--angles", type=int, default=radon.N_ANGLES)
    p.add_argument("--size", type=int, default=radon.IMAGE_SIZE)
    p.add_argument("--codes", help="also write median barcodes here")
    p.set_defaults(func=cmd_radon)

    p = sub.add_parser("index", parents=[common], help="build and describe a semantic hash table")
    p.add_argument("--short", required=True, help="short (key) codes")
    p.add_argument("--long", required=True, help="long (re-ranking) codes")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("retrieve", parents=[common], help="first-hit retrieval for a set of queries")
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--queries", help="query codes (long codes for semantic-hash)")
    p.add_argument("--db", help="database codes (long codes for semantic-hash)")
    p.add_argument("--query-short")
    p.add_argument("--db-short")
    p.add_argument("--query-second", help="second query code file for combined")
    p.add_argument("--db-second", help="second database code file for combined")
    p.add_argument("--query-manifest")
    p.add_argument("--db-manifest")
    p.add_argument("--image-size", type=int, default=32)
    p.add_argument("--bit-flips", type=int, default=2, help="Hamming radius H of the probe")
    p.add_argument("--exact", action="store_true", help="probe only keys at distance exactly H")
    p.add_argument("--no-fallback", action="store_true", help="leave queries unanswered when no bucket is hit")
    p.add_argument("--timings", help="per-query latencies in ns")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("evaluate", parents=[common], help="IRMA error of a results file")
    p.add_argument("--results", required=True)
    p.add_argument("--irma", nargs="+", required=True, help="manifests or 'id;code' files")
    p.add_argument("--branch-table", help="'j,i,count' lines; default: derived from the codes")
    p.add_argument("--prefix-conditioned", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", parents=[common], help="time exhaustive against semantic-hash retrieval")
    p.add_argument("--runs", type=int, default=bench.DEFAULT_RUNS)
    p.add_argument("--bit-flips", type=int, nargs="+", default=[2])
    p.add_argument("--db-short")
    p.add_argument("--db-long")
    p.add_argument("--query-short")
    p.add_argument("--query-long")
    p.add_argument("--db-size", type=int, default=12677, help="random database size when no files are given")
    p.add_argument("--n-queries", type=int, default=100)
    p.add_argument("--short-bits", type=int, default=16)
    p.add_argument("--long-bits", type=int, default=512)
    p.add_argument("--include-encoding", action="store_true", help="time query encoding too")
    p.add_argument("--short-model")
    p.add_argument("--long-model")
    p.add_argument("--query-manifest")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command == "retrieve":
        _check_strategy_inputs(args, parser)
    try:
        args.func(args)
    except (DdaHashError, OSError) as exc:
        print(f"ddahash: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
