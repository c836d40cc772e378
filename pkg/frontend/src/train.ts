/**
 * Fine-tuning loop over the encoded-chunk dataset.
 *
 * Defaults follow the adapter contract: 3 epochs, per-device batch 8,
 * AdamW at 5e-5 with moment coefficients 0.9/0.999, 500 warm-up steps,
 * weight decay 0.01, evaluation batch 64, evaluation and a checkpoint at
 * the end of every epoch. Class weights come from the pipeline's weights
 * JSON; the loss matches its reference weighted cross-entropy.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { Batch, ChunkRecord, loadDataset, shuffled, toBatches } from "./dataset.js";
import { softmaxRows, weightedCrossEntropy } from "./loss.js";
import { MetricsReport, tokenMetrics } from "./metrics.js";
import { MissingBaseModelError, TokenClassifier } from "./model.js";
import { ADAMW_DEFAULTS, AdamW } from "./optim.js";

export interface TrainConfig {
  epochs: number;
  perDeviceBatch: number;
  learningRate: number;
  beta1: number;
  beta2: number;
  warmupSteps: number;
  weightDecay: number;
  evalBatch: number;
  seed: number;
}

export const TRAIN_DEFAULTS: TrainConfig = {
  epochs: 3,
  perDeviceBatch: 8,
  learningRate: ADAMW_DEFAULTS.learningRate,
  beta1: ADAMW_DEFAULTS.beta1,
  beta2: ADAMW_DEFAULTS.beta2,
  warmupSteps: 500,
  weightDecay: ADAMW_DEFAULTS.weightDecay,
  evalBatch: 64,
  seed: 0,
};

export interface EpochReport {
  epoch: number;
  trainLoss: number;
  evalLoss: number | null;
  metrics: MetricsReport | null;
  checkpointPath: string;
  metricsPath: string | null;
  predictionsPath: string | null;
}

export interface TrainResult {
  initialLoss: number;
  finalLoss: number;
  epochs: EpochReport[];
  summaryPath: string;
}

export function loadClassWeights(weightsPath: string): number[] {
  if (!fs.existsSync(weightsPath)) {
    throw new Error(`no weights file at ${weightsPath}`);
  }
  const raw = JSON.parse(fs.readFileSync(weightsPath, "utf-8"));
  if (!Array.isArray(raw.weights) || raw.weights.length === 0) {
    throw new Error(`weights file ${weightsPath} has no 'weights' array`);
  }
  return raw.weights.map(Number);
}

function meanLoss(model: TokenClassifier, batches: readonly Batch[], weights: number[]): number {
  let total = 0;
  let counted = 0;
  for (const batch of batches) {
    const logits = model.forwardLogits(batch.inputIds);
    const { loss, counted: n } = weightedCrossEntropy(logits, batch.labels, weights);
    total += loss * n;
    counted += n;
  }
  return total / counted;
}

function writePredictions(
  model: TokenClassifier,
  batches: readonly Batch[],
  outPath: string,
): { pred: Int32Array; gold: Int32Array } {
  const numClasses = model.config.numClasses;
  const lines: string[] = [];
  const predAll: number[] = [];
  const goldAll: number[] = [];
  for (const batch of batches) {
    const logits = model.forwardLogits(batch.inputIds);
    const probs = softmaxRows(logits, batch.inputIds.length, numClasses);
    for (let row = 0; row < batch.size; row++) {
      const pred: number[] = [];
      for (let j = 0; j < batch.seqLen; j++) {
        const base = (row * batch.seqLen + j) * numClasses;
        let best = 0;
        for (let c = 1; c < numClasses; c++) {
          if (probs[base + c] > probs[base + best]) best = c;
        }
        pred.push(best);
        predAll.push(best);
        goldAll.push(batch.labels[row * batch.seqLen + j]);
      }
      lines.push(
        JSON.stringify({
          doc_id: batch.docIds[row],
          chunk_index: batch.chunkIndexes[row],
          pred,
        }),
      );
    }
  }
  fs.writeFileSync(outPath, lines.join("\n") + "\n");
  return { pred: Int32Array.from(predAll), gold: Int32Array.from(goldAll) };
}

export function fineTune(
  config: TrainConfig,
  trainPath: string,
  evalPath: string | null,
  weightsPath: string,
  basePath: string,
  outDir: string,
): TrainResult {
  if (!fs.existsSync(basePath)) {
    throw new MissingBaseModelError(`no base model at ${basePath}`);
  }
  fs.mkdirSync(outDir, { recursive: true });

  const model = TokenClassifier.load(basePath);
  const weights = loadClassWeights(weightsPath);
  if (weights.length !== model.config.numClasses) {
    throw new Error(
      `${weights.length} class weights vs model with ${model.config.numClasses} classes`,
    );
  }
  const trainRecords = loadDataset(trainPath);
  const evalRecords: ChunkRecord[] | null = evalPath ? loadDataset(evalPath) : null;

  const stepsPerEpoch = Math.ceil(trainRecords.length / config.perDeviceBatch);
  const optimizer = new AdamW(model.parameters(), {
    learningRate: config.learningRate,
    beta1: config.beta1,
    beta2: config.beta2,
    eps: 1e-8,
    weightDecay: config.weightDecay,
    warmupSteps: config.warmupSteps,
    totalSteps: stepsPerEpoch * config.epochs,
  });

  const fullTrainBatches = toBatches(trainRecords, config.perDeviceBatch);
  const initialLoss = meanLoss(model, fullTrainBatches, weights);

  const grads = {
    embedding: new Float64Array(model.embedding.length),
    headWeight: new Float64Array(model.headWeight.length),
    headBias: new Float64Array(model.headBias.length),
  };
  const gradList = [grads.embedding, grads.headWeight, grads.headBias];

  const epochs: EpochReport[] = [];
  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    const ordered = shuffled(trainRecords, config.seed + epoch);
    let runningLoss = 0;
    let runningCount = 0;
    for (const batch of toBatches(ordered, config.perDeviceBatch)) {
      const logits = model.forwardLogits(batch.inputIds);
      const { loss, gradLogits, counted } = weightedCrossEntropy(logits, batch.labels, weights);
      gradList.forEach((g) => g.fill(0));
      model.backward(batch.inputIds, gradLogits, grads);
      optimizer.update(model.parameters(), gradList);
      runningLoss += loss * counted;
      runningCount += counted;
    }

    const checkpointPath = path.join(outDir, `checkpoint-epoch${epoch}.json`);
    model.save(checkpointPath);

    let evalLoss: number | null = null;
    let metrics: MetricsReport | null = null;
    let metricsPath: string | null = null;
    let predictionsPath: string | null = null;
    if (evalRecords) {
      const evalBatches = toBatches(evalRecords, config.evalBatch);
      evalLoss = meanLoss(model, evalBatches, weights);
      predictionsPath = path.join(outDir, `predictions-epoch${epoch}.jsonl`);
      const { pred, gold } = writePredictions(model, evalBatches, predictionsPath);
      metrics = tokenMetrics(pred, gold, model.config.numClasses, weights);
      metricsPath = path.join(outDir, `metrics-epoch${epoch}.json`);
      fs.writeFileSync(metricsPath, JSON.stringify(metrics, null, 2) + "\n");
    }

    epochs.push({
      epoch,
      trainLoss: runningLoss / runningCount,
      evalLoss,
      metrics,
      checkpointPath,
      metricsPath,
      predictionsPath,
    });
  }

  const finalLoss = meanLoss(model, fullTrainBatches, weights);
  const summaryPath = path.join(outDir, "summary.json");
  fs.writeFileSync(
    summaryPath,
    JSON.stringify(
      {
        initial_loss: initialLoss,
        final_loss: finalLoss,
        epochs: epochs.map((e) => ({
          epoch: e.epoch,
          train_loss: e.trainLoss,
          eval_loss: e.evalLoss,
          checkpoint: e.checkpointPath,
          metrics: e.metricsPath,
          predictions: e.predictionsPath,
        })),
      },
      null,
      2,
    ) + "\n",
  );
  return { initialLoss, finalLoss, epochs, summaryPath };
}
