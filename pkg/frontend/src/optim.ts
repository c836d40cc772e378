/**
 * AdamW with decoupled weight decay and a linear warm-up / linear decay
 * learning-rate schedule: the rate ramps from zero over the warm-up steps,
 * then decays linearly toward zero at the final step.
 */

export interface AdamWConfig {
  learningRate: number;
  beta1: number;
  beta2: number;
  eps: number;
  weightDecay: number;
  warmupSteps: number;
  totalSteps: number;
}

export const ADAMW_DEFAULTS = {
  learningRate: 5e-5,
  beta1: 0.9,
  beta2: 0.999,
  eps: 1e-8,
  weightDecay: 0.01,
};

export class AdamW {
  private readonly config: AdamWConfig;
  private readonly m: Float64Array[];
  private readonly v: Float64Array[];
  private step_ = 0;

  constructor(paramShapes: readonly Float64Array[], config: AdamWConfig) {
    this.config = config;
    this.m = paramShapes.map((p) => new Float64Array(p.length));
    this.v = paramShapes.map((p) => new Float64Array(p.length));
  }

  get step(): number {
    return this.step_;
  }

  learningRateAt(step: number): number {
    const { learningRate, warmupSteps, totalSteps } = this.config;
    if (warmupSteps > 0 && step <= warmupSteps) {
      return (learningRate * step) / warmupSteps;
    }
    if (totalSteps <= warmupSteps) {
      return learningRate;
    }
    const remaining = (totalSteps - step) / (totalSteps - warmupSteps);
    return learningRate * Math.max(remaining, 0);
  }

  update(params: readonly Float64Array[], grads: readonly Float64Array[]): void {
    this.step_ += 1;
    const { beta1, beta2, eps, weightDecay } = this.config;
    const lr = this.learningRateAt(this.step_);
    const biasCorrection1 = 1 - Math.pow(beta1, this.step_);
    const biasCorrection2 = 1 - Math.pow(beta2, this.step_);
    for (let p = 0; p < params.length; p++) {
      const param = params[p];
      const grad = grads[p];
      const m = this.m[p];
      const v = this.v[p];
      for (let i = 0; i < param.length; i++) {
        const g = grad[i];
        m[i] = beta1 * m[i] + (1 - beta1) * g;
        v[i] = beta2 * v[i] + (1 - beta2) * g * g;
        const mHat = m[i] / biasCorrection1;
        const vHat = v[i] / biasCorrection2;
        param[i] -= lr * (mHat / (Math.sqrt(vHat) + eps) + weightDecay * param[i]);
      }
    }
  }
}
