/**
 * Trainer CLI.
 *
 *   init-base --vocab-size N [--dim 16] [--classes 3] [--seed 0] --output base.json
 *   train --train chunks.jsonl [--eval eval.jsonl] --weights weights.json
 *         --base base.json --out-dir out/ [--epochs 3] [--batch 8] [--lr 5e-5]
 *         [--warmup 500] [--weight-decay 0.01] [--eval-batch 64] [--seed 0]
 *   predict --model ckpt.json --dataset chunks.jsonl --output preds.jsonl
 */

import { loadDataset, toBatches } from "./dataset.js";
import { softmaxRows } from "./loss.js";
import { TokenClassifier } from "./model.js";
import { TRAIN_DEFAULTS, fineTune } from "./train.js";

import * as fs from "node:fs";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`expected '--flag value' pairs, got '${argv.slice(i).join(" ")}'`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

function required(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) throw new Error(`missing required flag --${name}`);
  return value;
}

function num(flags: Map<string, string>, name: string, fallback: number): number {
  const raw = flags.get(name);
  return raw === undefined ? fallback : Number(raw);
}

function cmdInitBase(flags: Map<string, string>): void {
  const model = TokenClassifier.init(
    {
      vocabSize: Number(required(flags, "vocab-size")),
      embedDim: num(flags, "dim", 16),
      numClasses: num(flags, "classes", 3),
    },
    num(flags, "seed", 0),
  );
  const output = required(flags, "output");
  model.save(output);
  console.log(`base model written to ${output}`);
}

function cmdTrain(flags: Map<string, string>): void {
  const result = fineTune(
    {
      epochs: num(flags, "epochs", TRAIN_DEFAULTS.epochs),
      perDeviceBatch: num(flags, "batch", TRAIN_DEFAULTS.perDeviceBatch),
      learningRate: num(flags, "lr", TRAIN_DEFAULTS.learningRate),
      beta1: num(flags, "beta1", TRAIN_DEFAULTS.beta1),
      beta2: num(flags, "beta2", TRAIN_DEFAULTS.beta2),
      warmupSteps: num(flags, "warmup", TRAIN_DEFAULTS.warmupSteps),
      weightDecay: num(flags, "weight-decay", TRAIN_DEFAULTS.weightDecay),
      evalBatch: num(flags, "eval-batch", TRAIN_DEFAULTS.evalBatch),
      seed: num(flags, "seed", TRAIN_DEFAULTS.seed),
    },
    required(flags, "train"),
    flags.get("eval") ?? null,
    required(flags, "weights"),
    required(flags, "base"),
    required(flags, "out-dir"),
  );
  console.log(
    `trained ${result.epochs.length} epoch(s): loss ${result.initialLoss.toFixed(6)} -> ` +
      `${result.finalLoss.toFixed(6)}; summary at ${result.summaryPath}`,
  );
}

function cmdPredict(flags: Map<string, string>): void {
  const model = TokenClassifier.load(required(flags, "model"));
  const records = loadDataset(required(flags, "dataset"));
  const output = required(flags, "output");
  const lines: string[] = [];
  for (const batch of toBatches(records, num(flags, "batch", 64))) {
    const logits = model.forwardLogits(batch.inputIds);
    const probs = softmaxRows(logits, batch.inputIds.length, model.config.numClasses);
    for (let row = 0; row < batch.size; row++) {
      const pred: number[] = [];
      for (let j = 0; j < batch.seqLen; j++) {
        const base = (row * batch.seqLen + j) * model.config.numClasses;
        let best = 0;
        for (let c = 1; c < model.config.numClasses; c++) {
          if (probs[base + c] > probs[base + best]) best = c;
        }
        pred.push(best);
      }
      lines.push(
        JSON.stringify({ doc_id: batch.docIds[row], chunk_index: batch.chunkIndexes[row], pred }),
      );
    }
  }
  fs.writeFileSync(output, lines.join("\n") + "\n");
  console.log(`predictions written to ${output}`);
}

function main(): void {
  const [command, ...rest] = process.argv.slice(2);
  try {
    const flags = parseFlags(rest);
    switch (command) {
      case "init-base":
        cmdInitBase(flags);
        break;
      case "train":
        cmdTrain(flags);
        break;
      case "predict":
        cmdPredict(flags);
        break;
      default:
        console.error("usage: cli.js <init-base|train|predict> --flag value ...");
        process.exit(1);
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(2);
  }
}

main();
