/**
 * Loss parity: the trainer's weighted cross-entropy on a fixed 4-chunk batch
 * must equal the pipeline's reference loss on the exported probabilities to
 * within 1e-5.
 */

import assert from "node:assert/strict";
import * as fs from "node:fs";
import * as path from "node:path";
import { test } from "node:test";

import { loadDataset, toBatches } from "../src/dataset.js";
import { softmaxRows, weightedCrossEntropy } from "../src/loss.js";
import { TokenClassifier } from "../src/model.js";
import { loadClassWeights } from "../src/train.js";
import { mustRun, stageCorpus } from "./helpers.js";

test("adapter loss matches the pipeline reference within 1e-5", () => {
  const corpus = stageCorpus(50, 9);
  const weights = loadClassWeights(corpus.weightsPath);
  const records = loadDataset(corpus.trainPath).slice(0, 4);
  assert.equal(records.length, 4);
  const [batch] = toBatches(records, 4);

  const model = TokenClassifier.init(
    { vocabSize: corpus.vocabSize, embedDim: 16, numClasses: 3 },
    7,
  );
  const logits = model.forwardLogits(batch.inputIds);
  const { loss: adapterLoss } = weightedCrossEntropy(logits, batch.labels, weights);

  const probs = softmaxRows(logits, batch.inputIds.length, 3);
  const rows: number[][] = [];
  for (let i = 0; i < batch.inputIds.length; i++) {
    rows.push([probs[i * 3], probs[i * 3 + 1], probs[i * 3 + 2]]);
  }
  const probsPath = path.join(corpus.dir, "probs.json");
  fs.writeFileSync(
    probsPath,
    JSON.stringify({ probabilities: rows, labels: Array.from(batch.labels) }),
  );

  const stdout = mustRun([
    "evaluate", "--probs", probsPath, "--weights", corpus.weightsPath,
  ]);
  const reference = JSON.parse(stdout);
  assert.ok(typeof reference.loss === "number");
  assert.ok(
    Math.abs(reference.loss - adapterLoss) <= 1e-5,
    `adapter ${adapterLoss} vs reference ${reference.loss}`,
  );

  // a zero-weight class cannot contribute to the loss
  const zeroed = weights.slice();
  zeroed[2] = 0;
  const { loss: zeroClassLoss } = weightedCrossEntropy(logits, batch.labels, zeroed);
  const onlyTwo = Int32Array.from(batch.labels, (l) => (l === 2 ? -100 : l));
  const { loss: droppedLoss } = weightedCrossEntropy(logits, onlyTwo, weights.slice(0, 3));
  assert.ok(Math.abs(zeroClassLoss - droppedLoss) <= 1e-12);
});
