/**
 * Shared scaffolding: drives the pipeline CLI (the primary component) through
 * its public subcommands and file formats to stage corpora for the trainer.
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

export function runPrimary(args: string[]): { status: number; stdout: string; stderr: string } {
  const proc = spawnSync("python3", ["-m", "omissis_forge", ...args], {
    encoding: "utf-8",
    env: { ...process.env, OMISSIS_FORGE_JIT: "0" },
  });
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

export function mustRun(args: string[]): string {
  const { status, stdout, stderr } = runPrimary(args);
  if (status !== 0) {
    throw new Error(`primary CLI failed (${status}): ${args.join(" ")}\n${stderr}`);
  }
  return stdout;
}

export interface StagedCorpus {
  dir: string;
  chunksPath: string;
  trainPath: string;
  evalPath: string;
  weightsPath: string;
  vocabSize: number;
}

/** Vocabulary file in the pipeline's format: one token per line, id = line number. */
export function writeVocab(goldPath: string, vocabPath: string): number {
  const tokens = new Set<string>();
  for (const line of fs.readFileSync(goldPath, "utf-8").split("\n")) {
    if (!line.trim()) continue;
    const row = JSON.parse(line);
    for (const token of row.tokens as string[]) tokens.add(token.toLowerCase());
  }
  const specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"];
  const body = [...tokens].filter((t) => !specials.includes(t)).sort();
  const lines = [...specials, ...body];
  fs.writeFileSync(vocabPath, lines.join("\n") + "\n");
  return lines.length;
}

/** 50-document synthetic corpus, encoded and split through the pipeline CLI. */
export function stageCorpus(docs = 50, seed = 9): StagedCorpus {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-corpus-"));
  const corpusDir = path.join(dir, "corpus");
  mustRun([
    "synth", "--output", corpusDir, "--docs", String(docs), "--seed", String(seed),
    "--tokens", "150,400", "--spans", "1,8",
  ]);
  const goldPath = path.join(corpusDir, "gold.jsonl");
  const vocabPath = path.join(dir, "vocab.txt");
  const vocabSize = writeVocab(goldPath, vocabPath);

  const chunksPath = path.join(dir, "chunks.jsonl");
  mustRun(["encode", "--input", goldPath, "--vocab", vocabPath, "--output", chunksPath]);

  const trainPath = path.join(dir, "train.jsonl");
  const evalPath = path.join(dir, "eval.jsonl");
  mustRun([
    "split", "--input", chunksPath, "--train-output", trainPath,
    "--eval-output", evalPath, "--split", "0.8", "--seed", "0",
  ]);

  const weightsPath = path.join(dir, "weights.json");
  mustRun(["weights", "--input", goldPath, "--output", weightsPath]);

  return { dir, chunksPath, trainPath, evalPath, weightsPath, vocabSize };
}
