/**
 * Connection and state management for the cockpit.
 *
 * One CockpitClient owns one session with the live service. It attaches to
 * the push stream first, hydrates from GET /state once the stream is up,
 * and from then on folds every network event (stream record, command ack,
 * failure) through a single synchronous update queue, so listeners observe
 * one total order of state changes. There is no polling anywhere: after
 * hydration the only reads are the stream itself and the snapshots that
 * ride back on command acknowledgements.
 */

import {
  HEALTH_GROUPS,
  ProtocolError,
  describeErrorBody,
  ndjsonLines,
  parseSnapshot,
  parseStreamLine,
} from "./protocol.js";
import type {
  DecisionRecord,
  FaultCommand,
  Mode,
  RcCommand,
  StateSnapshot,
} from "./protocol.js";

export interface CockpitState {
  /** True while the push stream is attached and hydrated. */
  connected: boolean;
  /** Connection-level notice for the banner; null when all is well. */
  banner: string | null;
  /** Last server-confirmed mode; null before first hydration. */
  mode: Mode | null;
  /** Supervisor state index from the last snapshot. */
  state: number | null;
  /** Latest decision period seen from the server. */
  period: number | null;
  /** Scrolling decision log, strictly increasing in period. */
  log: readonly DecisionRecord[];
  /** Halt reason once the session dies; the client stops reconnecting. */
  fault: string | null;
  /** True while a command POST is outstanding; controls stay disabled. */
  busy: boolean;
  /** Structured error from the last failed command, rendered inline. */
  lastError: string | null;
  /** Pilot input levels the cockpit has set, confirmed by acks. */
  stick: string;
  switch: string;
  health: Readonly<Record<string, string>>;
}

export interface CockpitClientOptions {
  /** Injectable fetch for tests; defaults to the global. */
  fetchFn?: typeof fetch;
  /** First reconnect delay; doubles per failure up to the cap. */
  reconnectDelayMs?: number;
  maxReconnectDelayMs?: number;
  /** Rows kept in the scrolling log. */
  logLimit?: number;
}

export type Listener = (state: CockpitState) => void;

function initialHealth(): Record<string, string> {
  const held: Record<string, string> = {};
  for (const group of HEALTH_GROUPS) held[group.label] = group.initial;
  return held;
}

function sleep(ms: number, signal: AbortSignal): Promise<void> {
  return new Promise((resolve) => {
    if (signal.aborted) return resolve();
    const timer = setTimeout(done, ms);
    signal.addEventListener("abort", done, { once: true });
    function done(): void {
      clearTimeout(timer);
      signal.removeEventListener("abort", done);
      resolve();
    }
  });
}

export class CockpitClient {
  readonly baseUrl: string;

  private readonly fetchFn: typeof fetch;
  private readonly reconnectDelayMs: number;
  private readonly maxReconnectDelayMs: number;
  private readonly logLimit: number;

  private current: CockpitState;
  private listeners = new Set<Listener>();
  private queue: Array<(draft: CockpitState) => void> = [];
  private draining = false;

  private running = false;
  private halted = false;
  private aborter: AbortController | null = null;
  private loop: Promise<void> | null = null;

  constructor(baseUrl: string, options: CockpitClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = options.fetchFn ?? fetch;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 500;
    this.maxReconnectDelayMs = options.maxReconnectDelayMs ?? 5000;
    this.logLimit = options.logLimit ?? 500;
    this.current = {
      connected: false,
      banner: null,
      mode: null,
      state: null,
      period: null,
      log: [],
      fault: null,
      busy: false,
      lastError: null,
      stick: "MIE5",
      switch: "MIE6",
      health: initialHealth(),
    };
  }

  get state(): CockpitState {
    return this.current;
  }

  /** Register a listener; it is called immediately with the current state. */
  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    listener(this.current);
    return () => {
      this.listeners.delete(listener);
    };
  }

  /**
   * Attach to the service. Resolves after the first successful hydration;
   * the stream loop keeps running in the background and reconnects with
   * exponential backoff whenever the connection drops. Call close() to
   * stop for good.
   */
  async connect(): Promise<void> {
    if (this.running) return;
    this.running = true;
    this.halted = false;
    this.aborter = new AbortController();
    let firstHydration: () => void;
    const hydrated = new Promise<void>((resolve) => {
      firstHydration = resolve;
    });
    this.loop = this.runLoop(() => firstHydration());
    await hydrated;
  }

  /** Detach cleanly. Safe to call twice. */
  close(): void {
    if (!this.running) return;
    this.running = false;
    this.aborter?.abort();
    this.apply((draft) => {
      draft.connected = false;
      draft.banner = null;
    });
  }

  /** Wait until the scrolling log holds a row at or past `period`. */
  waitForLogPeriod(period: number, timeoutMs = 10_000): Promise<void> {
    return new Promise((resolve, reject) => {
      let done = false;
      // subscribe() fires the listener immediately, possibly before the
      // unsubscribe handle exists; the done flag covers that first call.
      let unsubscribe: (() => void) | null = null;
      const timer = setTimeout(() => {
        done = true;
        unsubscribe?.();
        reject(new Error(`log never reached period ${period}`));
      }, timeoutMs);
      unsubscribe = this.subscribe((state) => {
        if (done) return;
        const last = state.log[state.log.length - 1];
        if (last && last.period >= period) {
          done = true;
          clearTimeout(timer);
          unsubscribe?.();
          resolve();
        }
      });
      if (done) unsubscribe();
    });
  }

  /**
   * Send pilot input levels. Resolves with the post-tick snapshot the
   * service acknowledges with; the cockpit state reflects it before the
   * promise settles. Rejects (and records an inline error) on a structured
   * error reply.
   */
  sendRc(command: RcCommand): Promise<StateSnapshot> {
    return this.post("/rc", command, (draft, sent) => {
      const rc = sent as RcCommand;
      if (rc.stick) draft.stick = rc.stick;
      if (rc.switch) draft.switch = rc.switch;
    });
  }

  /** Pin one health group to a level, same ack contract as sendRc. */
  sendFault(command: FaultCommand): Promise<StateSnapshot> {
    return this.post("/inject", command, (draft, sent) => {
      const fault = sent as FaultCommand;
      draft.health = { ...draft.health, [fault.group]: fault.event };
    });
  }

  // ------------------------------------------------------------------
  // update queue

  /**
   * Every state change in the package funnels through here. Mutations are
   * queued and drained in arrival order by whichever call got there first,
   * so a listener never observes a half-applied change and all listeners
   * see the same sequence.
   */
  private apply(mutation: (draft: CockpitState) => void): void {
    this.queue.push(mutation);
    if (this.draining) return;
    this.draining = true;
    try {
      while (this.queue.length > 0) {
        const next = this.queue.shift();
        if (!next) break;
        const draft: CockpitState = { ...this.current, log: [...this.current.log] };
        next(draft);
        this.current = draft;
        for (const listener of this.listeners) {
          try {
            listener(this.current);
          } catch (err) {
            console.error("cockpit listener failed", err);
          }
        }
      }
    } finally {
      this.draining = false;
    }
  }

  /**
   * Fold server-confirmed rows into the scrolling log, keeping periods
   * strictly increasing. Stale rows (hydration overlap, a record that also
   * rode back on an ack) are dropped, never reordered.
   */
  private mergeLog(draft: CockpitState, rows: readonly DecisionRecord[]): void {
    const log = draft.log as DecisionRecord[];
    for (const row of rows) {
      const last = log[log.length - 1];
      if (last && row.period <= last.period) continue;
      log.push(row);
    }
    if (log.length > this.logLimit) log.splice(0, log.length - this.logLimit);
  }

  private applySnapshot(snapshot: StateSnapshot): void {
    this.apply((draft) => {
      draft.mode = snapshot.mode;
      draft.state = snapshot.state;
      draft.period = snapshot.period;
      this.mergeLog(draft, snapshot.log_tail);
      if (snapshot.fault) {
        draft.fault = snapshot.fault;
        draft.banner = `session halted: ${snapshot.fault}`;
      }
    });
    if (snapshot.fault) this.halted = true;
  }

  // ------------------------------------------------------------------
  // stream loop

  private async runLoop(onFirstHydration: () => void): Promise<void> {
    const signal = this.aborter?.signal;
    if (!signal) return;
    let delay = this.reconnectDelayMs;
    while (this.running && !this.halted) {
      try {
        await this.streamOnce(signal, onFirstHydration);
        delay = this.reconnectDelayMs;
      } catch (err) {
        if (!this.running) break;
        const reason =
          err instanceof ProtocolError
            ? err.message
            : "connection lost";
        this.apply((draft) => {
          draft.connected = false;
          draft.banner = `${reason}, retrying`;
        });
        await sleep(delay, signal);
        delay = Math.min(delay * 2, this.maxReconnectDelayMs);
        continue;
      }
      if (this.running && !this.halted) {
        // The server closed the stream without a fault record; treat it
        // like a drop and reconnect.
        this.apply((draft) => {
          draft.connected = false;
          draft.banner = "connection lost, retrying";
        });
        await sleep(delay, signal);
        delay = Math.min(delay * 2, this.maxReconnectDelayMs);
      }
    }
  }

  /** One attach-hydrate-read cycle. Returns when the stream ends. */
  private async streamOnce(
    signal: AbortSignal,
    onFirstHydration: () => void,
  ): Promise<void> {
    const response = await this.fetchFn(`${this.baseUrl}/events`, { signal });
    if (!response.ok || !response.body) {
      throw new Error(`stream refused with status ${response.status}`);
    }
    // The stream is attached; records buffer inside the response body
    // while we hydrate, so nothing published in between is lost.
    const snapshot = await this.fetchState(signal);
    this.apply((draft) => {
      draft.connected = true;
      draft.banner = null;
    });
    this.applySnapshot(snapshot);
    onFirstHydration();
    if (this.halted) return;

    try {
      for await (const line of ndjsonLines(response.body)) {
        const item = parseStreamLine(line);
        if (item.kind === "fault") {
          this.halted = true;
          this.apply((draft) => {
            draft.fault = item.record.fault;
            draft.banner = `session halted: ${item.record.fault}`;
            draft.connected = false;
          });
          return;
        }
        this.apply((draft) => {
          this.mergeLog(draft, [item.record]);
          if (draft.period === null || item.record.period > draft.period) {
            draft.period = item.record.period;
            draft.mode = item.record.mode;
          }
        });
      }
    } catch (err) {
      if (!this.running) return;
      throw err;
    }
  }

  private async fetchState(signal: AbortSignal): Promise<StateSnapshot> {
    const response = await this.fetchFn(`${this.baseUrl}/state`, { signal });
    if (!response.ok) {
      throw new Error(`state refused with status ${response.status}`);
    }
    return parseSnapshot(await response.json());
  }

  // ------------------------------------------------------------------
  // commands

  private async post(
    path: string,
    body: RcCommand | FaultCommand,
    onAccepted: (draft: CockpitState, sent: RcCommand | FaultCommand) => void,
  ): Promise<StateSnapshot> {
    if (this.current.busy) {
      throw new Error("a command is already in flight");
    }
    this.apply((draft) => {
      draft.busy = true;
      draft.lastError = null;
    });
    try {
      const response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      if (!response.ok) {
        const message = describeErrorBody(
          response.status,
          await response.text(),
        );
        this.apply((draft) => {
          draft.lastError = message;
        });
        throw new Error(message);
      }
      const snapshot = parseSnapshot(await response.json());
      this.apply((draft) => onAccepted(draft, body));
      this.applySnapshot(snapshot);
      return snapshot;
    } finally {
      this.apply((draft) => {
        draft.busy = false;
      });
    }
  }
}
