/**
 * Token-level metrics in the same JSON schema the pipeline's `evaluate`
 * subcommand emits: accuracy, precision, recall, f1, per_class_f1, weights.
 * Precision/recall pool the begin/inside classes {1, 2} micro-style;
 * confusing one positive class for the other counts as an error.
 */

import { IGNORE_LABEL } from "./dataset.js";

export interface MetricsReport {
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
  per_class_f1: number[];
  weights: number[] | null;
}

function f1Of(precision: number, recall: number): number {
  return precision + recall > 0 ? (2 * precision * recall) / (precision + recall) : 0;
}

export function tokenMetrics(
  pred: Int32Array | number[],
  gold: Int32Array | number[],
  numClasses = 3,
  weights: number[] | null = null,
): MetricsReport {
  if (pred.length !== gold.length) {
    throw new RangeError(`${pred.length} predictions vs ${gold.length} gold labels`);
  }
  const confusion: number[][] = Array.from({ length: numClasses }, () =>
    new Array<number>(numClasses).fill(0),
  );
  let counted = 0;
  for (let i = 0; i < gold.length; i++) {
    const g = gold[i];
    if (g === IGNORE_LABEL) continue;
    confusion[g][pred[i]] += 1;
    counted += 1;
  }
  if (counted === 0) {
    throw new RangeError("every position is ignore-labeled");
  }
  let correct = 0;
  for (let c = 0; c < numClasses; c++) correct += confusion[c][c];

  const perClassF1: number[] = [];
  for (let c = 0; c < numClasses; c++) {
    let fp = 0;
    let fn = 0;
    for (let o = 0; o < numClasses; o++) {
      if (o === c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
    }
    const tp = confusion[c][c];
    const precision = tp + fp > 0 ? tp / (tp + fp) : 0;
    const recall = tp + fn > 0 ? tp / (tp + fn) : 0;
    perClassF1.push(f1Of(precision, recall));
  }

  let tp = 0;
  let fp = 0;
  let fn = 0;
  for (const c of [1, 2]) {
    if (c >= numClasses) continue;
    tp += confusion[c][c];
    for (let o = 0; o < numClasses; o++) {
      if (o === c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
    }
  }
  const precision = tp + fp > 0 ? tp / (tp + fp) : 0;
  const recall = tp + fn > 0 ? tp / (tp + fn) : 0;

  return {
    accuracy: correct / counted,
    precision,
    recall,
    f1: f1Of(precision, recall),
    per_class_f1: perClassF1,
    weights,
  };
}
