/**
 * Weighted cross-entropy over token positions, mirroring the pipeline's
 * reference loss: mean of w * (-log p) normalized by the summed weights of
 * the counted positions; labels of -100 are excluded entirely.
 */

import { IGNORE_LABEL } from "./dataset.js";

export interface LossResult {
  loss: number;
  /** d(loss)/d(logits), flattened [positions * numClasses] */
  gradLogits: Float64Array;
  counted: number;
}

/** Row-wise stable softmax over flattened [positions * numClasses] logits. */
export function softmaxRows(logits: Float64Array, positions: number, numClasses: number): Float64Array {
  const probs = new Float64Array(logits.length);
  for (let i = 0; i < positions; i++) {
    const base = i * numClasses;
    let max = -Infinity;
    for (let c = 0; c < numClasses; c++) max = Math.max(max, logits[base + c]);
    let sum = 0;
    for (let c = 0; c < numClasses; c++) {
      const e = Math.exp(logits[base + c] - max);
      probs[base + c] = e;
      sum += e;
    }
    for (let c = 0; c < numClasses; c++) probs[base + c] /= sum;
  }
  return probs;
}

export function weightedCrossEntropy(
  logits: Float64Array,
  labels: Int32Array,
  classWeights: readonly number[],
): LossResult {
  const numClasses = classWeights.length;
  const positions = labels.length;
  if (logits.length !== positions * numClasses) {
    throw new RangeError(`${logits.length} logits vs ${positions} positions * ${numClasses} classes`);
  }
  const probs = softmaxRows(logits, positions, numClasses);
  let weightSum = 0;
  let lossSum = 0;
  let counted = 0;
  for (let i = 0; i < positions; i++) {
    const label = labels[i];
    if (label === IGNORE_LABEL) continue;
    if (label < 0 || label >= numClasses) {
      throw new RangeError(`label ${label} outside [0, ${numClasses})`);
    }
    const w = classWeights[label];
    weightSum += w;
    lossSum += w * -Math.log(probs[i * numClasses + label]);
    counted += 1;
  }
  if (counted === 0) {
    throw new RangeError("every position is ignore-labeled");
  }
  const gradLogits = new Float64Array(logits.length);
  for (let i = 0; i < positions; i++) {
    const label = labels[i];
    if (label === IGNORE_LABEL) continue;
    const scale = classWeights[label] / weightSum;
    const base = i * numClasses;
    for (let c = 0; c < numClasses; c++) {
      gradLogits[base + c] = scale * (probs[base + c] - (c === label ? 1 : 0));
    }
  }
  return { loss: lossSum / weightSum, gradLogits, counted };
}
