/**
 * Smoke training: one epoch on the 50-document synthetic corpus must end
 * with a training loss strictly below its initial value; the emitted
 * metrics JSON must match the pipeline's evaluation schema; and the
 * prediction dump must be scoreable by the pipeline's `evaluate`
 * subcommand.
 */

import assert from "node:assert/strict";
import * as fs from "node:fs";
import * as path from "node:path";
import { test } from "node:test";

import { TokenClassifier } from "../src/model.js";
import { MissingBaseModelError } from "../src/model.js";
import { TRAIN_DEFAULTS, fineTune } from "../src/train.js";
import { mustRun, stageCorpus } from "./helpers.js";

test("one epoch on 50 synthetic documents", () => {
  const corpus = stageCorpus(50, 9);
  const basePath = path.join(corpus.dir, "base.json");
  TokenClassifier.init({ vocabSize: corpus.vocabSize, embedDim: 16, numClasses: 3 }, 3).save(
    basePath,
  );

  const outDir = path.join(corpus.dir, "run");
  const result = fineTune(
    { ...TRAIN_DEFAULTS, epochs: 1 },
    corpus.trainPath,
    corpus.evalPath,
    corpus.weightsPath,
    basePath,
    outDir,
  );

  assert.ok(
    result.finalLoss < result.initialLoss,
    `final ${result.finalLoss} not below initial ${result.initialLoss}`,
  );

  const [epoch] = result.epochs;
  assert.ok(fs.existsSync(epoch.checkpointPath), "per-epoch checkpoint missing");
  assert.ok(epoch.metricsPath && fs.existsSync(epoch.metricsPath), "metrics JSON missing");
  const metrics = JSON.parse(fs.readFileSync(epoch.metricsPath!, "utf-8"));
  assert.deepEqual(
    Object.keys(metrics).sort(),
    ["accuracy", "f1", "per_class_f1", "precision", "recall", "weights"],
  );
  assert.ok(metrics.accuracy >= 0 && metrics.accuracy <= 1);
  assert.equal(metrics.per_class_f1.length, 3);

  // the prediction dump scores through the pipeline's evaluate subcommand
  assert.ok(epoch.predictionsPath && fs.existsSync(epoch.predictionsPath));
  const stdout = mustRun([
    "evaluate", "--pred", epoch.predictionsPath!, "--dataset", corpus.evalPath,
  ]);
  const scored = JSON.parse(stdout);
  assert.deepEqual(
    Object.keys(scored).sort(),
    ["accuracy", "f1", "per_class_f1", "precision", "recall", "weights"],
  );
  assert.ok(Math.abs(scored.accuracy - metrics.accuracy) <= 1e-9);
  assert.ok(Math.abs(scored.f1 - metrics.f1) <= 1e-9);
});

test("training refuses to run without a base model", () => {
  const corpus = stageCorpus(4, 12);
  assert.throws(
    () =>
      fineTune(
        { ...TRAIN_DEFAULTS, epochs: 1 },
        corpus.trainPath,
        null,
        corpus.weightsPath,
        path.join(corpus.dir, "no-such-base.json"),
        path.join(corpus.dir, "run"),
      ),
    MissingBaseModelError,
  );
});
