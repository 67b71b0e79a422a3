export { HypertokClient } from "./client.js";
export type {
  ClientOptions,
  EfficiencyReport,
  EncodedDoc,
  EngineParams,
  SessionReplayResult,
  SessionStep,
  TokenDocInput,
  WindowRecord,
} from "./client.js";
export { BoundSession } from "./session.js";
export type { StepInfo } from "./session.js";
export { HypertokError } from "./errors.js";
