"""Composable pipeline subcommands over JSON-lines interchange files.

Exit codes: 0 success, 1 usage error, 2 missing or invalid input,
3 internal invariant violation.
"""

from __future__ import annotations

import hashlib
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import bio as bio_mod
from . import encode as encode_mod
from . import evaluate as eval_mod
from . import jsonl
from . import keys as keys_mod
from . import lsh as lsh_mod
from . import records as records_mod
from . import synth as synth_mod
from .align import AlignConfig, LabeledSequence
from .align import align as align_tokens
from .align import tokenize_words
from .errors import EmptyCorpus, InputError, OmissisForgeError
from .kernels import thread_cap


@click.group()
def cli():
    """Pair clear/redacted documents and build tagged training data."""


def _parse_range(raw: str, flag: str) -> tuple[int, int]:
    try:
        lo, hi = (int(part) for part in raw.split(","))
    except ValueError:
        raise click.BadParameter(f"{flag} wants 'lo,hi', got {raw!r}")
    return lo, hi


def _parse_hooks(specs: tuple[str, ...]) -> dict[str, str] | None:
    if not specs:
        return None
    hooks = {}
    for spec in specs:
        ext, _, command = spec.partition("=")
        if not ext.startswith(".") or not command:
            raise click.BadParameter(f"--extractor wants '.ext=command {{path}}', got {spec!r}")
        hooks[ext.lower()] = command
    return hooks


@cli.command()
@click.option("--input", "input_dir", required=True, help="Directory tree of text files.")
@click.option("--output", required=True, help="Corpus store to write (JSON lines).")
@click.option("--variant", type=click.Choice(["clear", "obfuscated", "unknown"]), default="unknown")
@click.option("--report", default=None, help="Where to write skipped-file records.")
@click.option("--id-base", default=0, show_default=True, help="First id to assign.")
@click.option("--extractor", multiple=True, help="Per-extension hook: '.pdf=pdftotext {path} -'.")
def ingest(input_dir, output, variant, report, id_base, extractor):
    """Normalize a directory of documents into an id-addressed store."""
    store, issues = records_mod.ingest_tree(
        input_dir, variant=records_mod.Variant(variant), extractor_hooks=_parse_hooks(extractor)
    )
    if id_base:
        store = records_mod.CorpusStore.build(
            records_mod.DocRecord(r.id + id_base, r.filename, r.text, r.variant) for r in store
        )
    store.save(output)
    if report:
        jsonl.write_jsonl(report, (issue.to_json() for issue in issues))
    click.echo(f"ingested {len(store)} documents, skipped {len(issues)}")


def _signatures(
    store: records_mod.CorpusStore, shingle_k: int, num_perms: int, seed: int
) -> dict[int, lsh_mod.MinHashSignature]:
    def sketch(rec: records_mod.DocRecord):
        tokens = tokenize_words(rec.text)
        return rec.id, lsh_mod.minhash(lsh_mod.shingle(tokens, shingle_k), num_perms, seed)

    docs = list(store)
    if len(docs) > 1:
        with ThreadPoolExecutor(max_workers=min(thread_cap(), len(docs))) as pool:
            return dict(pool.map(sketch, docs))
    return dict(sketch(rec) for rec in docs)


@cli.command()
@click.option("--clear", "clear_path", required=True, help="Clear-side corpus store.")
@click.option("--obf", "obf_path", required=True, help="Redacted-side corpus store.")
@click.option("--output", required=True, help="Accepted pairs (JSON lines).")
@click.option("--candidates", "candidates_path", default=None, help="Candidate lists per clear doc.")
@click.option("--unmatched", "unmatched_path", default=None, help="Unmatched-document report.")
@click.option("--threshold", default=0.95, show_default=True)
@click.option("--num-perms", default=128, show_default=True)
@click.option("--shingle-k", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
def match(clear_path, obf_path, output, candidates_path, unmatched_path,
          threshold, num_perms, shingle_k, seed):
    """Find each clear document's redacted twin (LSH + decision keys)."""
    clear_store = records_mod.CorpusStore.load(clear_path)
    obf_store = records_mod.CorpusStore.load(obf_path)
    clear_ids = {rec.id for rec in clear_store}
    overlap = clear_ids & {rec.id for rec in obf_store}
    if overlap:
        raise InputError(
            f"stores share {len(overlap)} ids (e.g. {min(overlap)}); "
            "re-ingest the redacted side with --id-base"
        )

    signatures = _signatures(clear_store, shingle_k, num_perms, seed)
    signatures.update(_signatures(obf_store, shingle_k, num_perms, seed))
    index = lsh_mod.build_index(signatures, threshold)

    obf_by_id = {rec.id: rec for rec in obf_store}
    candidate_lists = []
    resolutions = []
    for rec in clear_store:
        cands = lsh_mod.query_candidates(index, rec.id)
        candidate_lists.append(cands)
        partners = [obf_by_id[i] for i in cands.candidates if i in obf_by_id]
        resolutions.append(keys_mod.resolve(rec, partners))
    pairs, unmatched = keys_mod.resolve_corpus(resolutions)

    jsonl.write_jsonl(output, (p.to_json() for p in pairs))
    if candidates_path:
        jsonl.write_jsonl(candidates_path, (c.to_json() for c in candidate_lists))
    if unmatched_path:
        jsonl.write_jsonl(unmatched_path, (u.to_json() for u in unmatched))
    click.echo(f"matched {len(pairs)} pairs, {len(unmatched)} unmatched")


@cli.command(name="align")
@click.option("--clear", "clear_path", required=True)
@click.option("--obf", "obf_path", required=True)
@click.option("--pairs", "pairs_path", required=True, help="Accepted pairs from 'match'.")
@click.option("--output", required=True, help="Labeled sequences (JSON lines).")
@click.option("--window", default=10, show_default=True)
def align_cmd(clear_path, obf_path, pairs_path, output, window):
    """Recover per-token labels for every matched pair."""
    clear_store = records_mod.CorpusStore.load(clear_path)
    obf_store = records_mod.CorpusStore.load(obf_path)
    cfg = AlignConfig(window=window)

    def labeled(row):
        clear_rec = clear_store[int(row["clear_id"])]
        obf_rec = obf_store[int(row["obf_id"])]
        seq = align_tokens(
            tokenize_words(clear_rec.text),
            tokenize_words(obf_rec.text),
            cfg,
        )
        return {
            "clear_id": clear_rec.id,
            "obf_id": obf_rec.id,
            "pairs": [[t, l] for t, l in seq.items],
        }

    count = jsonl.write_jsonl(output, (labeled(row) for row in jsonl.read_jsonl(pairs_path)))
    click.echo(f"aligned {count} pairs")


@cli.command()
@click.option("--input", "input_path", required=True, help="Aligned sequences.")
@click.option("--output", required=True, help="Tagged documents (JSON lines).")
def annotate(input_path, output):
    """Convert labeled sequences to B/I/O tags."""

    def tagged(row):
        seq = LabeledSequence(items=[(t, l) for t, l in row["pairs"]])
        return bio_mod.to_bio(seq, doc_id=int(row["clear_id"])).to_json()

    count = jsonl.write_jsonl(output, (tagged(row) for row in jsonl.read_jsonl(input_path)))
    click.echo(f"annotated {count} documents")


def _load_bio_docs(path: str) -> list[bio_mod.BioDoc]:
    docs = []
    for row in jsonl.read_jsonl(path):
        try:
            docs.append(bio_mod.BioDoc.from_json(row))
        except (KeyError, OmissisForgeError) as exc:
            raise InputError(f"malformed tagged document in {path}: {exc}") from exc
    return docs


@cli.command()
@click.option("--input", "input_path", required=True, help="Tagged documents.")
@click.option("--output", default=None, help="Stats JSON (default: stdout).")
def stats(input_path, output):
    """Per-tag totals and per-document averages."""
    docs = _load_bio_docs(input_path)
    if not docs:
        raise EmptyCorpus(f"no documents in {input_path}")
    result = bio_mod.label_stats(docs).to_json()
    if output:
        jsonl.write_json(output, result)
    else:
        click.echo(jsonl.dumps(result))


@cli.command()
@click.option("--input", "input_path", required=True, help="Tagged documents.")
@click.option("--vocab", "vocab_path", required=True, help="One token per line, id = line number.")
@click.option("--output", required=True, help="Encoded chunks (JSON lines).")
@click.option("--l-max", default=512, show_default=True)
@click.option("--reserve-special", is_flag=True, help="Wrap chunks in [CLS]/[SEP].")
def encode(input_path, vocab_path, output, l_max, reserve_special):
    """Encode tagged documents into fixed-length chunks."""
    vocab = encode_mod.SubwordVocab.load(vocab_path)
    docs = _load_bio_docs(input_path)

    def chunks():
        for doc in docs:
            doc_id = doc.doc_id if doc.doc_id is not None else 0
            yield from encode_mod.encode_document(
                doc.tokens, doc.tags, vocab, doc_id, l_max=l_max, reserve_special=reserve_special
            )

    count = jsonl.write_jsonl(output, (c.to_json() for c in chunks()))
    click.echo(f"wrote {count} chunks")


@cli.command()
@click.option("--freq", default=None, help="Comma-separated class frequencies.")
@click.option("--input", "input_path", default=None, help="Tagged documents to count.")
@click.option("--output", default=None, help="Weights JSON (default: stdout).")
def weights(freq, input_path, output):
    """Balanced class weights from frequencies or a tagged corpus."""
    if freq is None and input_path is None:
        raise click.UsageError("need --freq or --input")
    if freq is not None:
        try:
            frequencies = [int(part) for part in freq.split(",")]
        except ValueError:
            raise click.BadParameter(f"--freq wants integers, got {freq!r}")
    else:
        stats_ = bio_mod.label_stats(_load_bio_docs(input_path))
        frequencies = list(stats_.totals)
    result = eval_mod.balanced_weights(frequencies).to_json()
    if output:
        jsonl.write_json(output, result)
    else:
        click.echo(jsonl.dumps(result))


def _metrics_json(metrics: eval_mod.TokenMetrics, class_weights) -> dict:
    out = metrics.to_json()
    out["weights"] = None if class_weights is None else list(class_weights.weights)
    return out


@cli.command()
@click.option("--pred", "pred_path", default=None, help="Prediction dump (JSON lines).")
@click.option("--dataset", "dataset_path", default=None, help="Encoded chunks with gold labels.")
@click.option("--probs", "probs_path", default=None, help="Probability dump (JSON) for loss.")
@click.option("--weights", "weights_path", default=None, help="Weights JSON from 'weights'.")
@click.option("--output", default=None, help="Metrics JSON (default: stdout).")
def evaluate(pred_path, dataset_path, probs_path, weights_path, output):
    """Score a prediction dump, or compute reference loss from probabilities."""
    class_weights = None
    if weights_path:
        loaded = jsonl.read_json(weights_path)
        class_weights = eval_mod.ClassWeights(
            frequencies=tuple(loaded.get("frequencies", ())),
            weights=tuple(loaded["weights"]),
        )

    if probs_path:
        if class_weights is None:
            raise click.UsageError("--probs needs --weights")
        dump = jsonl.read_json(probs_path)
        probs = dump["probabilities"]
        labels = [int(l) for l in dump["labels"]]
        loss = eval_mod.weighted_ce_loss(probs, labels, class_weights)
        preds = [max(range(len(row)), key=row.__getitem__) for row in probs]
        metrics = eval_mod.token_metrics(preds, labels)
        result = _metrics_json(metrics, class_weights)
        result["loss"] = loss
    elif pred_path and dataset_path:
        gold_by_key = {}
        for chunk_ in encode_mod.read_dataset(dataset_path):
            gold_by_key[(chunk_.doc_id, chunk_.chunk_index)] = chunk_.labels
        preds: list[int] = []
        gold: list[int] = []
        for row in jsonl.read_jsonl(pred_path):
            key = (int(row["doc_id"]), int(row["chunk_index"]))
            if key not in gold_by_key:
                raise InputError(f"prediction for unknown chunk {key}")
            labels = gold_by_key[key]
            values = [int(v) for v in row["pred"]]
            if len(values) != len(labels):
                raise InputError(f"chunk {key}: {len(values)} predictions vs {len(labels)} labels")
            preds.extend(values)
            gold.extend(labels)
        if not preds:
            raise InputError(f"no predictions in {pred_path}")
        metrics = eval_mod.token_metrics(preds, gold)
        if class_weights is None:
            counted = [g for g in gold if g != eval_mod.IGNORE_LABEL]
            frequencies = [counted.count(c) for c in range(3)]
            if all(f > 0 for f in frequencies):
                class_weights = eval_mod.balanced_weights(frequencies)
        result = _metrics_json(metrics, class_weights)
    else:
        raise click.UsageError("need --pred with --dataset, or --probs with --weights")

    if output:
        jsonl.write_json(output, result)
    else:
        click.echo(jsonl.dumps(result))


@cli.command()
@click.option("--output", "output_dir", required=True, help="Directory for the corpus files.")
@click.option("--docs", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--tokens", default="200,600", show_default=True, help="Tokens per document (lo,hi).")
@click.option("--spans", default="0,20", show_default=True, help="Redaction spans per document.")
@click.option("--span-len", default="1,5", show_default=True, help="Span length range.")
@click.option("--noise", type=click.Choice(["none", "insert", "delete"]), default="none")
@click.option("--noise-rate", default=0.0, show_default=True)
@click.option("--window", default=10, show_default=True)
def synth(output_dir, docs, seed, tokens, spans, span_len, noise, noise_rate, window):
    """Generate a paired synthetic corpus with gold tags."""
    spec = synth_mod.SynthSpec(
        doc_count=docs,
        tokens_per_doc=_parse_range(tokens, "--tokens"),
        spans_per_doc=_parse_range(spans, "--spans"),
        span_length=_parse_range(span_len, "--span-len"),
        noise=noise,
        noise_rate=noise_rate,
        seed=seed,
        window=window,
    )
    pairs = synth_mod.generate(spec)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_mod.CorpusStore.build(p.clear for p in pairs).save(out / "clear.jsonl")
    records_mod.CorpusStore.build(p.obf for p in pairs).save(out / "obf.jsonl")
    jsonl.write_jsonl(out / "gold.jsonl", (p.gold.to_json() for p in pairs))
    click.echo(f"generated {len(pairs)} pairs under {out}")


def _split_hash(seed: int, doc_id: int) -> bytes:
    return hashlib.blake2b(f"{seed}:{doc_id}".encode(), digest_size=8).digest()


@cli.command()
@click.option("--input", "input_path", required=True, help="Encoded chunks.")
@click.option("--train-output", required=True)
@click.option("--eval-output", required=True)
@click.option("--split", "fraction", default=0.80, show_default=True)
@click.option("--seed", default=0, show_default=True)
def split(input_path, train_output, eval_output, fraction, seed):
    """Partition chunks by document so no document straddles the split."""
    if not 0.0 < fraction < 1.0:
        raise click.BadParameter(f"--split must be in (0, 1), got {fraction}")
    rows = list(jsonl.read_jsonl(input_path))
    if not rows:
        raise InputError(f"no chunks in {input_path}")
    doc_ids = sorted({int(row["doc_id"]) for row in rows})
    ordered = sorted(doc_ids, key=lambda d: _split_hash(seed, d))
    train_count = round(fraction * len(doc_ids))
    train_docs = set(ordered[:train_count])
    jsonl.write_jsonl(train_output, (r for r in rows if int(r["doc_id"]) in train_docs))
    jsonl.write_jsonl(eval_output, (r for r in rows if int(r["doc_id"]) not in train_docs))
    click.echo(f"split {len(doc_ids)} documents into {train_count} train / "
               f"{len(doc_ids) - train_count} eval")


@cli.command()
@click.option("--clear", "clear_dir", required=True, help="Directory of clear documents.")
@click.option("--obf", "obf_dir", required=True, help="Directory of redacted documents.")
@click.option("--output", "output_dir", required=True, help="Directory for every artifact.")
@click.option("--vocab", "vocab_path", default=None, help="Existing vocabulary file.")
@click.option("--threshold", default=0.95, show_default=True)
@click.option("--num-perms", default=128, show_default=True)
@click.option("--shingle-k", default=3, show_default=True)
@click.option("--window", default=10, show_default=True)
@click.option("--l-max", default=512, show_default=True)
@click.option("--split", "fraction", default=0.80, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.pass_context
def pipeline(ctx, clear_dir, obf_dir, output_dir, vocab_path, threshold, num_perms,
             shingle_k, window, l_max, fraction, seed):
    """Chain ingest, match, align, annotate, encode, weights, and split."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    clear_store, clear_issues = records_mod.ingest_tree(clear_dir, records_mod.Variant.CLEAR)
    obf_store, obf_issues = records_mod.ingest_tree(obf_dir, records_mod.Variant.OBFUSCATED)
    obf_store = records_mod.CorpusStore.build(
        records_mod.DocRecord(r.id + len(clear_store), r.filename, r.text, r.variant)
        for r in obf_store
    )
    clear_store.save(out / "clear.jsonl")
    obf_store.save(out / "obf.jsonl")
    jsonl.write_jsonl(
        out / "ingest_report.jsonl",
        (issue.to_json() for issue in (*clear_issues, *obf_issues)),
    )

    ctx.invoke(
        match,
        clear_path=str(out / "clear.jsonl"),
        obf_path=str(out / "obf.jsonl"),
        output=str(out / "pairs.jsonl"),
        candidates_path=str(out / "candidates.jsonl"),
        unmatched_path=str(out / "unmatched.jsonl"),
        threshold=threshold,
        num_perms=num_perms,
        shingle_k=shingle_k,
        seed=seed,
    )
    ctx.invoke(
        align_cmd,
        clear_path=str(out / "clear.jsonl"),
        obf_path=str(out / "obf.jsonl"),
        pairs_path=str(out / "pairs.jsonl"),
        output=str(out / "aligned.jsonl"),
        window=window,
    )
    ctx.invoke(annotate, input_path=str(out / "aligned.jsonl"), output=str(out / "annotated.jsonl"))
    ctx.invoke(stats, input_path=str(out / "annotated.jsonl"), output=str(out / "stats.json"))

    if vocab_path is None:
        docs = _load_bio_docs(str(out / "annotated.jsonl"))
        vocab = encode_mod.vocab_for_words(tok for doc in docs for tok in doc.tokens)
        vocab_path = str(out / "vocab.txt")
        vocab.save(vocab_path)
    ctx.invoke(
        encode,
        input_path=str(out / "annotated.jsonl"),
        vocab_path=vocab_path,
        output=str(out / "chunks.jsonl"),
        l_max=l_max,
        reserve_special=False,
    )
    ctx.invoke(
        weights,
        freq=None,
        input_path=str(out / "annotated.jsonl"),
        output=str(out / "weights.json"),
    )
    ctx.invoke(
        split,
        input_path=str(out / "chunks.jsonl"),
        train_output=str(out / "train.jsonl"),
        eval_output=str(out / "eval.jsonl"),
        fraction=fraction,
        seed=seed,
    )
    click.echo(f"pipeline artifacts under {out}")


def main(argv: list[str] | None = None) -> None:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)
    except OmissisForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(exc.exit_code)
    sys.exit(0)


if __name__ == "__main__":
    main()
