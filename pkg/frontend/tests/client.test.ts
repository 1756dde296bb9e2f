/**
 * CockpitClient behavior against a scripted service double: hydration
 * through the stream-then-state handshake, reconnection with a visible
 * banner, the strictly increasing log, command acks, and inline errors.
 */

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { CockpitClient } from "../src/client.js";
import type { CockpitState } from "../src/client.js";
import { StubService } from "./stub-service.js";

function record(
  period: number,
  mode: string,
  mce: string | null = "MCE2",
  consumed: string[] = ["MIE5"],
): Record<string, unknown> {
  return { period, mode, mce, consumed };
}

function snapshot(
  mode: string,
  state: number,
  period: number,
  tail: unknown[] = [],
  fault?: string,
): Record<string, unknown> {
  const body: Record<string, unknown> = { mode, state, period, log_tail: tail };
  if (fault !== undefined) body["fault"] = fault;
  return body;
}

/** Resolve once the client state satisfies the predicate. */
function waitFor(
  client: CockpitClient,
  what: string,
  predicate: (state: CockpitState) => boolean,
  timeoutMs = 5000,
): Promise<CockpitState> {
  return new Promise((resolve, reject) => {
    let done = false;
    let unsubscribe: (() => void) | null = null;
    const timer = setTimeout(() => {
      done = true;
      unsubscribe?.();
      reject(new Error(`timed out waiting for ${what}`));
    }, timeoutMs);
    unsubscribe = client.subscribe((state) => {
      if (done) return;
      if (predicate(state)) {
        done = true;
        clearTimeout(timer);
        unsubscribe?.();
        resolve(state);
      }
    });
    if (done) unsubscribe();
  });
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

describe("CockpitClient", () => {
  let stub: StubService;
  let base: string;
  let clients: CockpitClient[];

  beforeEach(async () => {
    stub = new StubService();
    base = await stub.start();
    clients = [];
  });

  afterEach(async () => {
    for (const client of clients) client.close();
    await stub.stop();
  });

  function makeClient(reconnectDelayMs = 30): CockpitClient {
    const client = new CockpitClient(base, {
      reconnectDelayMs,
      maxReconnectDelayMs: 200,
    });
    clients.push(client);
    return client;
  }

  it("hydrates from the state snapshot once the stream attaches", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 3, [
      record(2, "STANDBY", "MCE2", ["MIE5", "MIE6"]),
      record(3, "STANDBY"),
    ]);
    const client = makeClient();
    await client.connect();

    expect(client.state.connected).toBe(true);
    expect(client.state.banner).toBeNull();
    expect(client.state.mode).toBe("STANDBY");
    expect(client.state.state).toBe(2);
    expect(client.state.period).toBe(3);
    expect(client.state.log.map((row) => row.period)).toEqual([2, 3]);
    // The stream goes up before the snapshot is read, so no tick can fall
    // between hydration and the first streamed record.
    const paths = stub.requests.map((request) => request.path);
    expect(paths.indexOf("/events")).toBeLessThan(paths.indexOf("/state"));
  });

  it("applies stream records in order and advances the mode", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 0, [record(0, "STANDBY")]);
    const client = makeClient();
    await client.connect();

    stub.publish(record(1, "LOITER", "MCE4", ["MIE3", "ATE1"]));
    stub.publish(record(2, "ALTITUDE_HOLD", "MCE5", ["ATE4"]));
    const state = await waitFor(client, "period 2", (s) => s.period === 2);

    expect(state.mode).toBe("ALTITUDE_HOLD");
    expect(state.log.map((row) => row.period)).toEqual([0, 1, 2]);
    expect(state.log[1]?.mode).toBe("LOITER");
  });

  it("keeps the log strictly increasing under stale or duplicate rows", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 1, [
      record(0, "STANDBY"),
      record(1, "STANDBY"),
    ]);
    const client = makeClient();
    await client.connect();

    stub.publish(record(1, "LOITER", "MCE4")); // duplicate period, late copy
    stub.publish(record(0, "GROUND_ERROR", "MCE3")); // stale row
    stub.publish(record(2, "LOITER", "MCE4", ["MIE3"]));
    const state = await waitFor(client, "period 2", (s) => s.period === 2);

    expect(state.log.map((row) => row.period)).toEqual([0, 1, 2]);
    expect(state.log[0]?.mode).toBe("STANDBY");
    expect(state.log[1]?.mode).toBe("STANDBY");
    expect(state.mode).toBe("LOITER");
  });

  it("reconnects with backoff and shows a banner while down", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 0, [record(0, "STANDBY")]);
    const client = makeClient(25);
    await client.connect();

    stub.dropStreams();
    const down = await waitFor(client, "the banner", (s) => s.banner !== null);
    expect(down.connected).toBe(false);
    expect(down.banner).toContain("retrying");

    const up = await waitFor(client, "reconnection", (s) => s.connected);
    expect(up.banner).toBeNull();
    expect(stub.streamConnects).toBeGreaterThanOrEqual(2);
    // Rehydration folded the same tail back in without duplicating rows.
    expect(up.log.map((row) => row.period)).toEqual([0]);
  });

  it("halts for good when the stream publishes a fault record", async () => {
    stub.snapshot = snapshot("LOITER", 29, 4, [record(4, "LOITER", "MCE4")]);
    const client = makeClient(10);
    await client.connect();

    stub.publish({ period: 5, fault: "period 5: no mode command is enabled" });
    const state = await waitFor(client, "the fault", (s) => s.fault !== null);

    expect(state.banner).toContain("session halted");
    expect(state.banner).toContain("period 5");
    expect(state.connected).toBe(false);
    const connectsAtHalt = stub.streamConnects;
    await sleep(80);
    expect(stub.streamConnects).toBe(connectsAtHalt);
  });

  it("halts immediately when hydration reports a halted session", async () => {
    stub.snapshot = snapshot("AL", 213, 9, [record(9, "AL", "MCE8")], "period 9: stuck");
    const client = makeClient(10);
    await client.connect();

    expect(client.state.fault).toBe("period 9: stuck");
    expect(client.state.banner).toContain("session halted");
    await sleep(60);
    expect(stub.streamConnects).toBe(1);
  });

  it("never lets a mode outside the enum reach the state", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 0, [record(0, "STANDBY")]);
    const client = makeClient(20);
    const seen: Array<string | null> = [];
    client.subscribe((state) => seen.push(state.mode));
    await client.connect();

    stub.publish(record(1, "WARP", "MCE4"));
    const state = await waitFor(client, "the rejection", (s) => s.banner !== null);

    expect(state.banner).toContain("malformed decision record");
    expect(seen).not.toContain("WARP");
    expect(client.state.log.every((row) => row.period <= 0)).toBe(true);
    // The violation is treated as a broken stream: the client reattaches.
    await waitFor(client, "reconnection", (s) => s.connected);
  });

  it("resolves sendRc with the post-tick ack and reflects it", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 1, [record(1, "STANDBY")]);
    stub.rcReplies.push({
      status: 200,
      body: snapshot("LOITER", 29, 2, [record(2, "LOITER", "MCE4", ["MIE3", "ATE1"])]),
    });
    stub.commandDelayMs = 40;
    const client = makeClient();
    await client.connect();
    const sawBusy: boolean[] = [];
    client.subscribe((state) => sawBusy.push(state.busy));

    const ack = await client.sendRc({ stick: "MIE3" });

    expect(ack.mode).toBe("LOITER");
    expect(ack.period).toBe(2);
    expect(client.state.mode).toBe("LOITER");
    expect(client.state.stick).toBe("MIE3");
    expect(client.state.busy).toBe(false);
    expect(client.state.lastError).toBeNull();
    expect(sawBusy).toContain(true);
    expect(client.state.log.map((row) => row.period)).toEqual([1, 2]);
    const post = stub.requests.find((request) => request.path === "/rc");
    expect(post?.body).toEqual({ stick: "MIE3" });
  });

  it("surfaces a structured error inline and keeps the mode", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 1, [record(1, "STANDBY")]);
    stub.rcReplies.push({ status: 400, body: { error: "unknown stick: X" } });
    const client = makeClient();
    await client.connect();

    await expect(client.sendRc({ stick: "X" })).rejects.toThrow("unknown stick: X");

    expect(client.state.lastError).toBe("unknown stick: X");
    expect(client.state.busy).toBe(false);
    expect(client.state.mode).toBe("STANDBY");
    expect(client.state.stick).toBe("MIE5");
  });

  it("refuses a second command while one is in flight", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 1, [record(1, "STANDBY")]);
    stub.rcReplies.push({
      status: 200,
      body: snapshot("LOITER", 29, 2, [record(2, "LOITER", "MCE4")]),
    });
    stub.commandDelayMs = 120;
    const client = makeClient();
    await client.connect();

    const first = client.sendRc({ stick: "MIE3" });
    await sleep(10);
    await expect(client.sendRc({ stick: "MIE4" })).rejects.toThrow(
      "already in flight",
    );
    const ack = await first;
    expect(ack.mode).toBe("LOITER");
    expect(client.state.lastError).toBeNull();
    expect(stub.requests.filter((request) => request.path === "/rc")).toHaveLength(1);
  });

  it("pins the health toggle on a fault ack", async () => {
    stub.snapshot = snapshot("LOITER", 29, 3, [record(3, "LOITER", "MCE4")]);
    stub.injectReplies.push({
      status: 200,
      body: snapshot("ALTITUDE_HOLD", 215, 4, [record(4, "ALTITUDE_HOLD", "MCE5", ["ATE4"])]),
    });
    const client = makeClient();
    await client.connect();

    const ack = await client.sendFault({ group: "GPS", event: "ATE4" });

    expect(ack.mode).toBe("ALTITUDE_HOLD");
    expect(client.state.health["GPS"]).toBe("ATE4");
    expect(client.state.health["INS"]).toBe("ATE1");
    expect(client.state.mode).toBe("ALTITUDE_HOLD");
  });

  it("keeps retrying until the service appears", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 0, [record(0, "STANDBY")]);
    const port = Number(new URL(base).port);
    await stub.stop();

    const client = makeClient(20);
    const connected = client.connect();
    await sleep(60); // a few refused attempts
    stub = new StubService();
    stub.snapshot = snapshot("STANDBY", 2, 0, [record(0, "STANDBY")]);
    await stub.start(port);

    await connected;
    expect(client.state.connected).toBe(true);
    expect(client.state.mode).toBe("STANDBY");
  });

  it("detaches cleanly on close", async () => {
    stub.snapshot = snapshot("STANDBY", 2, 0, [record(0, "STANDBY")]);
    const client = makeClient(10);
    await client.connect();

    client.close();
    expect(client.state.connected).toBe(false);
    expect(client.state.banner).toBeNull();

    const before = client.state;
    stub.publish(record(1, "LOITER", "MCE4"));
    await sleep(50);
    expect(client.state).toBe(before);
    expect(stub.streamConnects).toBe(1);
  });
});
