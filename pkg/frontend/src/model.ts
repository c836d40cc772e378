/**
 * Token classifier: an embedding table with a linear tagging head.
 *
 * The trainer fine-tunes from a locally available base checkpoint (JSON);
 * any checkpoint in this format works as the base.
 */

import * as fs from "node:fs";

import { prng } from "./dataset.js";

export class MissingBaseModelError extends Error {}

export interface ModelConfig {
  vocabSize: number;
  embedDim: number;
  numClasses: number;
}

export class TokenClassifier {
  readonly config: ModelConfig;
  embedding: Float64Array; // [vocabSize * embedDim]
  headWeight: Float64Array; // [numClasses * embedDim]
  headBias: Float64Array; // [numClasses]

  constructor(config: ModelConfig, embedding: Float64Array, headWeight: Float64Array, headBias: Float64Array) {
    this.config = config;
    if (embedding.length !== config.vocabSize * config.embedDim) {
      throw new RangeError("embedding size disagrees with config");
    }
    if (headWeight.length !== config.numClasses * config.embedDim) {
      throw new RangeError("head size disagrees with config");
    }
    if (headBias.length !== config.numClasses) {
      throw new RangeError("bias size disagrees with config");
    }
    this.embedding = embedding;
    this.headWeight = headWeight;
    this.headBias = headBias;
  }

  static init(config: ModelConfig, seed: number): TokenClassifier {
    const rand = prng(seed);
    const gauss = () => {
      // Box-Muller from two uniforms
      const u = Math.max(rand(), 1e-12);
      const v = rand();
      return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
    };
    const scale = 1 / Math.sqrt(config.embedDim);
    const embedding = new Float64Array(config.vocabSize * config.embedDim);
    for (let i = 0; i < embedding.length; i++) embedding[i] = gauss() * scale;
    const headWeight = new Float64Array(config.numClasses * config.embedDim);
    for (let i = 0; i < headWeight.length; i++) headWeight[i] = gauss() * scale;
    const headBias = new Float64Array(config.numClasses);
    return new TokenClassifier(config, embedding, headWeight, headBias);
  }

  /** Flattened [positions * numClasses] logits for a flat id array. */
  forwardLogits(inputIds: Int32Array): Float64Array {
    const { embedDim, numClasses, vocabSize } = this.config;
    const logits = new Float64Array(inputIds.length * numClasses);
    for (let i = 0; i < inputIds.length; i++) {
      const id = inputIds[i];
      if (id < 0 || id >= vocabSize) {
        throw new RangeError(`token id ${id} outside vocabulary of ${vocabSize}`);
      }
      const embBase = id * embedDim;
      const outBase = i * numClasses;
      for (let c = 0; c < numClasses; c++) {
        let acc = this.headBias[c];
        const wBase = c * embedDim;
        for (let d = 0; d < embedDim; d++) {
          acc += this.headWeight[wBase + d] * this.embedding[embBase + d];
        }
        logits[outBase + c] = acc;
      }
    }
    return logits;
  }

  /** Accumulate parameter gradients for d(loss)/d(logits). */
  backward(
    inputIds: Int32Array,
    gradLogits: Float64Array,
    grads: { embedding: Float64Array; headWeight: Float64Array; headBias: Float64Array },
  ): void {
    const { embedDim, numClasses } = this.config;
    for (let i = 0; i < inputIds.length; i++) {
      const id = inputIds[i];
      const embBase = id * embedDim;
      const outBase = i * numClasses;
      for (let c = 0; c < numClasses; c++) {
        const g = gradLogits[outBase + c];
        if (g === 0) continue;
        grads.headBias[c] += g;
        const wBase = c * embedDim;
        for (let d = 0; d < embedDim; d++) {
          grads.headWeight[wBase + d] += g * this.embedding[embBase + d];
          grads.embedding[embBase + d] += g * this.headWeight[wBase + d];
        }
      }
    }
  }

  parameters(): Float64Array[] {
    return [this.embedding, this.headWeight, this.headBias];
  }

  save(path: string): void {
    fs.writeFileSync(
      path,
      JSON.stringify({
        config: this.config,
        embedding: Array.from(this.embedding),
        headWeight: Array.from(this.headWeight),
        headBias: Array.from(this.headBias),
      }),
    );
  }

  static load(path: string): TokenClassifier {
    if (!fs.existsSync(path)) {
      throw new MissingBaseModelError(`no model checkpoint at ${path}`);
    }
    const raw = JSON.parse(fs.readFileSync(path, "utf-8"));
    return new TokenClassifier(
      raw.config,
      Float64Array.from(raw.embedding),
      Float64Array.from(raw.headWeight),
      Float64Array.from(raw.headBias),
    );
  }
}
