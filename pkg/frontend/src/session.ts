/**
 * Session handle mirroring the engine's inference-time state machine.
 *
 * The handle keeps only (params, prompt, generated codes); every query
 * replays that history through the engine's session-replay endpoint,
 * which is exact because sessions are fully reconstructable from their
 * history.  Mutating a finalized handle raises — the boundary enforces
 * single-owner use even though the engine itself keeps sessions readable.
 */

import type { EngineParams, HypertokClient, SessionReplayResult, SessionStep } from "./client.js";
import { HypertokError } from "./errors.js";

export interface StepInfo {
  code: number;
  flatTokens: number[];
  newEntry: { id: number; tokens: number[] } | null;
}

export class BoundSession {
  private promptTokens: number[] = [];
  private promptIngested = false;
  private generated: number[] = [];
  private finalized = false;
  private cachedOutput: number[] | null = null;

  constructor(
    private readonly client: HypertokClient,
    private readonly params: EngineParams,
  ) {}

  private replay(): SessionReplayResult {
    return this.client.sessionReplay({
      base_vocab_size: this.params.vocabSize,
      max_merge: this.params.maxMerge,
      capacity_limit: this.params.capacity ?? null,
      prompt_tokens: this.promptTokens,
      generated_codes: this.generated,
    });
  }

  private assertLive(): void {
    if (this.finalized) {
      throw new HypertokError("SessionFinalized", "session already finalized");
    }
  }

  /** Compress the prompt into the session; returns the prompt codes. */
  ingestPrompt(tokens: number[]): number[] {
    this.assertLive();
    if (this.promptIngested || this.generated.length > 0) {
      throw new HypertokError(
        "SessionAlreadyStarted",
        "prompt already ingested or generation begun",
      );
    }
    this.promptTokens = [...tokens];
    this.promptIngested = true;
    try {
      return this.replay().prompt_codes;
    } catch (err) {
      this.promptTokens = [];
      this.promptIngested = false;
      throw err;
    }
  }

  /** Append one generated code (base or hypertoken). */
  appendGenerated(code: number): StepInfo {
    this.assertLive();
    this.generated.push(code);
    let result: SessionReplayResult;
    try {
      result = this.replay();
    } catch (err) {
      this.generated.pop();
      throw err;
    }
    const step: SessionStep = result.steps[result.steps.length - 1];
    return { code: step.code, flatTokens: step.flat, newEntry: step.new_entry };
  }

  /** Flattened base tokens of the generated segment; seals the handle. */
  finalizeOutput(): number[] {
    if (this.cachedOutput === null) {
      this.cachedOutput = this.replay().output_tokens;
      this.finalized = true;
    }
    return [...this.cachedOutput];
  }

  canonicalityReport(): SessionReplayResult["canonicality"] {
    return this.replay().canonicality;
  }

  history(): number[] {
    return this.replay().history;
  }
}
