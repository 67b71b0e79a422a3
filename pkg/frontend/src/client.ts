/**
 * Subprocess client for the hypertok engine.
 *
 * Everything crosses the boundary through the engine's stable external
 * interfaces: token/code JSONL on stdin/stdout and the session-replay
 * JSON endpoint.  No compression logic lives on this side.
 */

import { spawnSync } from "node:child_process";

import { HypertokError, errorFromCli } from "./errors.js";
import { BoundSession } from "./session.js";

export interface EngineParams {
  vocabSize: number;
  maxMerge?: number;
  capacity?: number | null;
}

export interface EncodedDoc {
  codes: number[];
  codebookEntries: number;
}

export interface TokenDocInput {
  id: string;
  tokens: number[];
  bytes?: number;
}

export interface WindowRecord {
  doc_id: string;
  window_index: number;
  base_tokens: number;
  compressed_tokens: number;
  entries_created: number;
  entries_reused: number;
}

export interface EfficiencyReport {
  bytes: number;
  base_tokens: number;
  compressed_tokens: number;
  eta_base: number;
  eta_z2z: number;
  compression_rate_pct: number;
  reuse_rate: number;
  window: number;
  per_window: WindowRecord[];
}

export interface SessionStep {
  code: number;
  flat: number[];
  new_entry: { id: number; tokens: number[] } | null;
}

export interface SessionReplayResult {
  prompt_codes: number[];
  history: number[];
  prompt_len: number;
  next_id: number;
  codebook_entries: number;
  steps: SessionStep[];
  output_tokens: number[];
  reuse_rate: number;
  canonicality: { position: number; pair: [number, number]; available_id: number }[];
}

export interface ClientOptions {
  /** Python interpreter used to launch the engine (default: python3). */
  python?: string;
}

const MAX_BUFFER = 1 << 28; // JSONL batches can run to tens of megabytes

function vocabArgs(params: EngineParams): string[] {
  const args = ["--vocab-size", String(params.vocabSize)];
  if (params.maxMerge !== undefined) {
    args.push("--max-merge", String(params.maxMerge));
  }
  if (params.capacity !== undefined && params.capacity !== null) {
    args.push("--capacity", String(params.capacity));
  }
  return args;
}

export class HypertokClient {
  private readonly python: string;

  constructor(options: ClientOptions = {}) {
    this.python = options.python ?? process.env.HYPERTOK_PYTHON ?? "python3";
  }

  /** Run one engine subcommand, feeding stdin and returning stdout. */
  runCli(args: string[], stdin = ""): string {
    const proc = spawnSync(this.python, ["-m", "hypertok.cli", ...args], {
      input: stdin,
      encoding: "utf-8",
      maxBuffer: MAX_BUFFER,
    });
    if (proc.error) {
      throw new HypertokError("Internal", `failed to launch engine: ${proc.error.message}`);
    }
    if (proc.status !== 0) {
      throw errorFromCli(proc.stderr ?? "", proc.status);
    }
    return proc.stdout;
  }

  /** Compress several streams in one engine call, preserving order. */
  encodeAllMany(streams: number[][], params: EngineParams): EncodedDoc[] {
    const lines = streams
      .map((tokens, i) => JSON.stringify({ id: String(i), tokens }))
      .join("\n");
    const stdout = this.runCli(
      ["compress", ...vocabArgs(params), "--threads", "1", "--input", "-", "--output", "-"],
      lines.length ? lines + "\n" : "",
    );
    const docs = stdout
      .split("\n")
      .filter((line) => line.length > 0)
      .map((line) => JSON.parse(line) as { id: string; codes: number[]; codebook_entries: number });
    if (docs.length !== streams.length) {
      throw new HypertokError("Internal", "engine returned a different document count");
    }
    return docs.map((doc) => ({ codes: doc.codes, codebookEntries: doc.codebook_entries }));
  }

  /** Mirror of the engine's encode_all over one stream. */
  encodeAll(tokens: number[], params: EngineParams): EncodedDoc {
    return this.encodeAllMany([tokens], params)[0];
  }

  /** Decompress several code streams in one engine call. */
  decodeAllMany(
    docs: { codes: number[]; codebookEntries?: number }[],
    params: EngineParams,
  ): number[][] {
    const lines = docs
      .map((doc, i) =>
        JSON.stringify(
          doc.codebookEntries === undefined
            ? { id: String(i), codes: doc.codes }
            : { id: String(i), codes: doc.codes, codebook_entries: doc.codebookEntries },
        ),
      )
      .join("\n");
    const stdout = this.runCli(
      ["decompress", ...vocabArgs(params), "--threads", "1", "--input", "-", "--output", "-"],
      lines.length ? lines + "\n" : "",
    );
    const out = stdout
      .split("\n")
      .filter((line) => line.length > 0)
      .map((line) => (JSON.parse(line) as { tokens: number[] }).tokens);
    if (out.length !== docs.length) {
      throw new HypertokError("Internal", "engine returned a different document count");
    }
    return out;
  }

  /** Mirror of the engine's decode_all over one stream. */
  decodeAll(codes: number[], params: EngineParams, codebookEntries?: number): number[] {
    return this.decodeAllMany([{ codes, codebookEntries }], params)[0];
  }

  /** Mirror of corpus_report via `stats --format json`. */
  corpusReport(
    docs: TokenDocInput[],
    params: EngineParams & { window?: number },
  ): EfficiencyReport {
    const lines = docs.map((doc) => JSON.stringify(doc)).join("\n");
    const args = ["stats", ...vocabArgs(params), "--format", "json", "--input", "-", "--output", "-"];
    if (params.window !== undefined) {
      args.push("--window", String(params.window));
    }
    const stdout = this.runCli(args, lines.length ? lines + "\n" : "");
    return JSON.parse(stdout) as EfficiencyReport;
  }

  /** Replay a session history through the engine (used by BoundSession). */
  sessionReplay(request: {
    base_vocab_size: number;
    max_merge?: number;
    capacity_limit?: number | null;
    prompt_tokens: number[];
    generated_codes: number[];
  }): SessionReplayResult {
    const stdout = this.runCli(
      ["session-replay", "--input", "-", "--output", "-"],
      JSON.stringify(request),
    );
    return JSON.parse(stdout) as SessionReplayResult;
  }

  /** Mirror of open_session: a fresh single-owner session handle. */
  openSession(params: EngineParams): BoundSession {
    return new BoundSession(this, params);
  }
}
