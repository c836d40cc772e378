/**
 * Loading and batching of the encoded-chunk dataset.
 *
 * Input is the pipeline's JSON-lines format: one object per chunk with
 * input_ids, attention_mask, token_type_ids and labels, all of equal
 * length, plus doc_id / chunk_index provenance. Labels use -100 for
 * positions excluded from the loss.
 */

import * as fs from "node:fs";

export const IGNORE_LABEL = -100;

export class SchemaMismatchError extends Error {}

export interface ChunkRecord {
  docId: number;
  chunkIndex: number;
  inputIds: Int32Array;
  attentionMask: Int8Array;
  tokenTypeIds: Int8Array;
  labels: Int32Array;
}

export interface Batch {
  size: number;
  seqLen: number;
  /** flattened [size * seqLen] */
  inputIds: Int32Array;
  attentionMask: Int8Array;
  labels: Int32Array;
  docIds: number[];
  chunkIndexes: number[];
}

function requireArray(row: Record<string, unknown>, field: string, line: number): number[] {
  const value = row[field];
  if (!Array.isArray(value) || !value.every((x) => typeof x === "number")) {
    throw new SchemaMismatchError(`line ${line}: field '${field}' must be a number array`);
  }
  return value as number[];
}

export function loadDataset(path: string): ChunkRecord[] {
  if (!fs.existsSync(path)) {
    throw new SchemaMismatchError(`no such dataset file: ${path}`);
  }
  const records: ChunkRecord[] = [];
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, index) => {
    if (!line.trim()) return;
    let row: Record<string, unknown>;
    try {
      row = JSON.parse(line);
    } catch (err) {
      throw new SchemaMismatchError(`line ${index + 1}: bad JSON (${err})`);
    }
    if (typeof row.doc_id !== "number" || typeof row.chunk_index !== "number") {
      throw new SchemaMismatchError(`line ${index + 1}: doc_id/chunk_index missing`);
    }
    const inputIds = requireArray(row, "input_ids", index + 1);
    const attentionMask = requireArray(row, "attention_mask", index + 1);
    const tokenTypeIds = requireArray(row, "token_type_ids", index + 1);
    const labels = requireArray(row, "labels", index + 1);
    const n = inputIds.length;
    if (attentionMask.length !== n || tokenTypeIds.length !== n || labels.length !== n) {
      throw new SchemaMismatchError(`line ${index + 1}: field lengths disagree`);
    }
    records.push({
      docId: row.doc_id,
      chunkIndex: row.chunk_index,
      inputIds: Int32Array.from(inputIds),
      attentionMask: Int8Array.from(attentionMask),
      tokenTypeIds: Int8Array.from(tokenTypeIds),
      labels: Int32Array.from(labels),
    });
  });
  if (records.length === 0) {
    throw new SchemaMismatchError(`dataset is empty: ${path}`);
  }
  const seqLen = records[0].inputIds.length;
  for (const rec of records) {
    if (rec.inputIds.length !== seqLen) {
      throw new SchemaMismatchError("chunks have mixed sequence lengths");
    }
  }
  return records;
}

/** Deterministic PRNG (mulberry32) so shuffles reproduce across runs. */
export function prng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function shuffled<T>(items: readonly T[], seed: number): T[] {
  const out = items.slice();
  const rand = prng(seed);
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

export function toBatches(records: readonly ChunkRecord[], batchSize: number): Batch[] {
  if (batchSize < 1) throw new RangeError(`batch size must be >= 1, got ${batchSize}`);
  const seqLen = records[0].inputIds.length;
  const batches: Batch[] = [];
  for (let start = 0; start < records.length; start += batchSize) {
    const slice = records.slice(start, start + batchSize);
    const batch: Batch = {
      size: slice.length,
      seqLen,
      inputIds: new Int32Array(slice.length * seqLen),
      attentionMask: new Int8Array(slice.length * seqLen),
      labels: new Int32Array(slice.length * seqLen),
      docIds: slice.map((r) => r.docId),
      chunkIndexes: slice.map((r) => r.chunkIndex),
    };
    slice.forEach((rec, row) => {
      batch.inputIds.set(rec.inputIds, row * seqLen);
      batch.attentionMask.set(rec.attentionMask, row * seqLen);
      batch.labels.set(rec.labels, row * seqLen);
    });
    batches.push(batch);
  }
  return batches;
}
