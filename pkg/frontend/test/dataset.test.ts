import assert from "node:assert/strict";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { test } from "node:test";

import { SchemaMismatchError, loadDataset, shuffled, toBatches } from "../src/dataset.js";

function writeChunks(rows: object[]): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-ds-"));
  const file = path.join(dir, "chunks.jsonl");
  fs.writeFileSync(file, rows.map((r) => JSON.stringify(r)).join("\n") + "\n");
  return file;
}

function chunkRow(docId: number, chunkIndex: number, n = 8): object {
  const ids = Array.from({ length: n }, (_, i) => (i < n - 2 ? i + 1 : 0));
  return {
    doc_id: docId,
    chunk_index: chunkIndex,
    input_ids: ids,
    attention_mask: ids.map((v) => (v !== 0 ? 1 : 0)),
    token_type_ids: ids.map(() => 0),
    labels: ids.map((v, i) => (v !== 0 ? i % 3 : -100)),
  };
}

test("loads a single chunk with all four arrays", () => {
  const file = writeChunks([chunkRow(0, 0, 512)]);
  const records = loadDataset(file);
  assert.equal(records.length, 1);
  assert.equal(records[0].inputIds.length, 512);
  assert.equal(records[0].attentionMask.length, 512);
  assert.equal(records[0].tokenTypeIds.length, 512);
  assert.equal(records[0].labels.length, 512);
});

test("ignore-label count survives loading", () => {
  const row = chunkRow(3, 1, 64) as { labels: number[] };
  const file = writeChunks([row]);
  const records = loadDataset(file);
  const expected = row.labels.filter((l) => l === -100).length;
  let got = 0;
  for (const l of records[0].labels) if (l === -100) got += 1;
  assert.equal(got, expected);
});

test("schema violations are rejected", () => {
  assert.throws(() => loadDataset("/nonexistent/chunks.jsonl"), SchemaMismatchError);
  const missingField = writeChunks([{ doc_id: 0, chunk_index: 0, input_ids: [1] }]);
  assert.throws(() => loadDataset(missingField), SchemaMismatchError);
  const badLengths = writeChunks([
    {
      doc_id: 0,
      chunk_index: 0,
      input_ids: [1, 2],
      attention_mask: [1],
      token_type_ids: [0, 0],
      labels: [0, 1],
    },
  ]);
  assert.throws(() => loadDataset(badLengths), SchemaMismatchError);
});

test("seeded shuffle reproduces exactly and reorders", () => {
  const file = writeChunks(Array.from({ length: 40 }, (_, i) => chunkRow(i, 0, 16)));
  const records = loadDataset(file);
  const keys = (rs: typeof records) => rs.map((r) => r.docId).join(",");
  assert.equal(keys(shuffled(records, 123)), keys(shuffled(records, 123)));
  assert.notEqual(keys(shuffled(records, 123)), keys(shuffled(records, 124)));
  assert.notEqual(keys(shuffled(records, 123)), keys(records));
});

test("batches cover every record in order with flattened arrays", () => {
  const file = writeChunks(Array.from({ length: 10 }, (_, i) => chunkRow(i, 0, 16)));
  const records = loadDataset(file);
  const batches = toBatches(records, 4);
  assert.deepEqual(batches.map((b) => b.size), [4, 4, 2]);
  assert.equal(batches[0].inputIds.length, 4 * 16);
  assert.deepEqual(batches[2].docIds, [8, 9]);
});
