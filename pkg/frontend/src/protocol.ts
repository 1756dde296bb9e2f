/**
 * Wire vocabulary for the modeguard live service.
 *
 * Everything the cockpit knows about the protocol lives here: the eight
 * flight modes, the pilot input levels, the health toggle groups, and the
 * zod schemas that gate every byte coming off the socket. Nothing else in
 * the package is allowed to JSON.parse a server reply directly; if a reply
 * does not fit these schemas the cockpit refuses to render it.
 */

import { z } from "zod";

/** The complete mode enum. The UI never displays a string outside it. */
export const MODES = [
  "POWER_OFF",
  "STANDBY",
  "GROUND_ERROR",
  "LOITER",
  "ALTITUDE_HOLD",
  "STABILIZE",
  "RTL",
  "AL",
] as const;

export type Mode = (typeof MODES)[number];

export const MODE_SET: ReadonlySet<string> = new Set(MODES);

/** Stick positions the rc selector can send, in display order. */
export const STICK_LEVELS = [
  { event: "MIE3", caption: "arm" },
  { event: "MIE4", caption: "disarm" },
  { event: "MIE5", caption: "neutral" },
] as const;

/** Three-position mode switch. */
export const SWITCH_LEVELS = [
  { event: "MIE6", caption: "normal" },
  { event: "MIE7", caption: "return" },
  { event: "MIE8", caption: "land" },
] as const;

/**
 * One toggle group per exclusive health group, mirroring the service's
 * catalog: two-way groups read healthy/failed, the battery is three-way.
 * `initial` is the level a fresh session holds before any injection, so
 * the toggles start out telling the truth.
 */
export interface HealthOption {
  readonly event: string;
  readonly caption: string;
}

export interface HealthGroup {
  readonly label: string;
  readonly options: readonly HealthOption[];
  readonly initial: string;
}

export const HEALTH_GROUPS: readonly HealthGroup[] = [
  {
    label: "INS",
    options: [
      { event: "ATE1", caption: "healthy" },
      { event: "ATE2", caption: "failed" },
    ],
    initial: "ATE1",
  },
  {
    label: "GPS",
    options: [
      { event: "ATE3", caption: "healthy" },
      { event: "ATE4", caption: "failed" },
    ],
    initial: "ATE3",
  },
  {
    label: "barometer",
    options: [
      { event: "ATE5", caption: "healthy" },
      { event: "ATE6", caption: "failed" },
    ],
    initial: "ATE5",
  },
  {
    label: "compass",
    options: [
      { event: "ATE7", caption: "healthy" },
      { event: "ATE8", caption: "failed" },
    ],
    initial: "ATE7",
  },
  {
    label: "propulsors",
    options: [
      { event: "ATE9", caption: "healthy" },
      { event: "ATE10", caption: "failed" },
    ],
    initial: "ATE9",
  },
  {
    label: "RC",
    options: [
      { event: "ATE11", caption: "linked" },
      { event: "ATE12", caption: "lost" },
    ],
    initial: "ATE11",
  },
  {
    label: "battery",
    options: [
      { event: "ATE13", caption: "normal" },
      { event: "ATE14", caption: "return-only" },
      { event: "ATE15", caption: "critical" },
    ],
    initial: "ATE13",
  },
  {
    label: "altitude",
    options: [
      { event: "ATE16", caption: "touchdown" },
      { event: "ATE17", caption: "airborne" },
    ],
    initial: "ATE17",
  },
  {
    label: "distance",
    options: [
      { event: "ATE18", caption: "near base" },
      { event: "ATE19", caption: "far out" },
    ],
    initial: "ATE19",
  },
  {
    label: "throttle",
    options: [
      { event: "ATE20", caption: "cut" },
      { event: "ATE21", caption: "raised" },
    ],
    initial: "ATE21",
  },
];

export function healthGroup(label: string): HealthGroup {
  const found = HEALTH_GROUPS.find((g) => g.label === label);
  if (!found) throw new ProtocolError(`unknown health group: ${label}`);
  return found;
}

/** Raised when a server reply violates the wire contract. */
export class ProtocolError extends Error {}

const modeSchema = z.enum(MODES);

/** One supervisory decision, as published on /events and in log_tail. */
export const decisionRecordSchema = z.object({
  period: z.number().int().nonnegative(),
  mode: modeSchema,
  mce: z.string().regex(/^MCE[1-8]$/).nullable(),
  consumed: z.array(z.string()),
});

export type DecisionRecord = z.infer<typeof decisionRecordSchema>;

/** Terminal stream record: the session hit a fault and halted. */
export const faultRecordSchema = z.object({
  period: z.number().int().nonnegative(),
  fault: z.string(),
});

export type FaultRecord = z.infer<typeof faultRecordSchema>;

export type StreamRecord =
  | { kind: "decision"; record: DecisionRecord }
  | { kind: "fault"; record: FaultRecord };

/** Reply shape of GET /state and of the POST /rc and /inject acks. */
export const stateSnapshotSchema = z.object({
  mode: modeSchema,
  state: z.number().int().nonnegative(),
  period: z.number().int().nonnegative(),
  log_tail: z.array(decisionRecordSchema),
  fault: z.string().optional(),
});

export type StateSnapshot = z.infer<typeof stateSnapshotSchema>;

export interface RcCommand {
  stick?: string;
  switch?: string;
  power?: string;
}

export interface FaultCommand {
  group: string;
  event: string;
}

function describeZodError(err: z.ZodError): string {
  const first = err.issues[0];
  if (!first) return "schema violation";
  const path = first.path.length ? ` at ${first.path.join(".")}` : "";
  return `${first.message}${path}`;
}

export function parseSnapshot(data: unknown): StateSnapshot {
  const result = stateSnapshotSchema.safeParse(data);
  if (!result.success) {
    throw new ProtocolError(
      `malformed state snapshot: ${describeZodError(result.error)}`,
    );
  }
  return result.data;
}

/**
 * Classify one NDJSON line off /events. A record carrying a `fault` key is
 * the halt notice, anything else must be a decision record.
 */
export function parseStreamLine(line: string): StreamRecord {
  let data: unknown;
  try {
    data = JSON.parse(line);
  } catch {
    throw new ProtocolError(`stream line is not JSON: ${line.slice(0, 80)}`);
  }
  if (typeof data === "object" && data !== null && "fault" in data) {
    const result = faultRecordSchema.safeParse(data);
    if (!result.success) {
      throw new ProtocolError(
        `malformed fault record: ${describeZodError(result.error)}`,
      );
    }
    return { kind: "fault", record: result.data };
  }
  const result = decisionRecordSchema.safeParse(data);
  if (!result.success) {
    throw new ProtocolError(
      `malformed decision record: ${describeZodError(result.error)}`,
    );
  }
  return { kind: "decision", record: result.data };
}

/**
 * The service reports user errors as {"error": msg} (400 and 409) and
 * request-shape errors through validation details (422). Reduce any of
 * them to one sentence for inline display.
 */
export function describeErrorBody(status: number, body: string): string {
  try {
    const data: unknown = JSON.parse(body);
    if (typeof data === "object" && data !== null) {
      const record = data as Record<string, unknown>;
      if (typeof record["error"] === "string") return record["error"];
      if (Array.isArray(record["detail"])) {
        const first: unknown = record["detail"][0];
        if (typeof first === "object" && first !== null) {
          const msg = (first as Record<string, unknown>)["msg"];
          if (typeof msg === "string") return `invalid request: ${msg}`;
        }
        return "invalid request";
      }
    }
  } catch {
    // fall through to the generic line
  }
  return `request failed with status ${status}`;
}

/**
 * Split a byte stream into trimmed non-empty lines. The /events endpoint
 * is newline-delimited JSON over a plain GET, not server-sent events, so
 * the cockpit reads the response body incrementally and cuts on "\n".
 */
export async function* ndjsonLines(
  stream: ReadableStream<Uint8Array>,
): AsyncGenerator<string> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  let pending = "";
  try {
    while (true) {
      const { done, value } = await reader.read();
      if (done) break;
      pending += decoder.decode(value, { stream: true });
      let cut = pending.indexOf("\n");
      while (cut >= 0) {
        const line = pending.slice(0, cut).trim();
        pending = pending.slice(cut + 1);
        if (line) yield line;
        cut = pending.indexOf("\n");
      }
    }
    const rest = (pending + decoder.decode()).trim();
    if (rest) yield rest;
  } finally {
    reader.releaseLock();
  }
}
