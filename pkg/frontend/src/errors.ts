/**
 * Typed errors mirroring the engine's taxonomy one-to-one.
 *
 * The CLI reports failures as `error[Name]: message` on stderr with exit
 * code 2 (validation) or 3 (internal); the bindings surface them as
 * HypertokError with `code` set to the primary error name.
 */

export class HypertokError extends Error {
  /** Primary-side error class name, e.g. "UnknownCode" or "ParseError". */
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.code = code;
    this.name = `HypertokError(${code})`;
  }
}

const STDERR_PATTERN = /error\[(\w+)\]: ([\s\S]*?)\s*$/;

export function errorFromCli(stderr: string, exitCode: number | null): HypertokError {
  const match = STDERR_PATTERN.exec(stderr);
  if (match) {
    return new HypertokError(match[1], match[2]);
  }
  return new HypertokError(
    "Internal",
    `engine exited with code ${exitCode}: ${stderr.trim()}`,
  );
}
