/**
 * End-to-end walkthrough against the real service running the bundled
 * supervisor: synthesize the failsafe, serve it at a one-second decision
 * period, then fly the scripted sequence through the cockpit client and
 * hold every acknowledged mode against the supervisor's answers. Each
 * command's ack is the first post-tick snapshot, so an ack carrying the
 * expected mode proves the cockpit displayed it within one tick. The
 * final check replays the cockpit's scrolling log against the service's
 * own log row for row.
 */

import { execFile, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { createServer } from "node:net";
import type { AddressInfo } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CockpitClient } from "../src/client.js";
import { parseSnapshot } from "../src/protocol.js";
import type { Mode, StateSnapshot } from "../src/protocol.js";

const run = promisify(execFile);

const SETUP_TIMEOUT = 180_000;
const WALK_TIMEOUT = 120_000;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as AddressInfo).port;
      probe.close(() => resolve(port));
    });
  });
}

async function waitUntilServing(base: string, deadlineMs: number): Promise<void> {
  const deadline = Date.now() + deadlineMs;
  let lastError = "no reply yet";
  while (Date.now() < deadline) {
    try {
      const reply = await fetch(`${base}/state`);
      if (reply.ok) return;
      lastError = `status ${reply.status}`;
    } catch (err) {
      lastError = String(err);
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service never came up: ${lastError}`);
}

let workDir: string;
let service: ChildProcess | null = null;
let serviceExit: Promise<number | null> | null = null;
let serviceOutput = "";
let base: string;
let client: CockpitClient;
const ackPeriods: number[] = [];

beforeAll(async () => {
  workDir = await mkdtemp(join(tmpdir(), "cockpit-walkthrough-"));
  const modelDir = join(workDir, "model");
  const supBase = join(workDir, "failsafe");

  await run("python3", ["-m", "modeguard.cli", "model", "--out", modelDir], {
    timeout: 60_000,
  });
  await run(
    "python3",
    [
      "-m",
      "modeguard.cli",
      "synth",
      "--plant",
      join(modelDir, "plant.aut"),
      "--spec",
      join(modelDir, "spec*.aut"),
      "--out",
      supBase,
    ],
    { timeout: 120_000 },
  );

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  service = spawn(
    "python3",
    [
      "-m",
      "modeguard.cli",
      "serve",
      `${supBase}.sup`,
      "--port",
      String(port),
      "--delta",
      "1.0",
      "--log-file",
      join(workDir, "service-log.json"),
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  service.stdout?.on("data", (chunk: Buffer) => {
    serviceOutput += chunk.toString("utf8");
  });
  service.stderr?.on("data", (chunk: Buffer) => {
    serviceOutput += chunk.toString("utf8");
  });
  serviceExit = new Promise((resolve) => {
    service?.on("exit", (code) => resolve(code));
  });
  await waitUntilServing(base, 30_000);

  client = new CockpitClient(base, { reconnectDelayMs: 200 });
  await client.connect();
}, SETUP_TIMEOUT);

afterAll(async () => {
  client?.close();
  if (service && serviceExit) {
    service.kill("SIGTERM");
    await serviceExit;
  }
  if (workDir) await rm(workDir, { recursive: true, force: true });
}, 60_000);

describe("scripted cockpit walkthrough", () => {
  it("hydrates into the booted session", () => {
    expect(client.state.connected).toBe(true);
    expect(client.state.mode).toBe("STANDBY");
    expect(client.state.log[0]).toEqual({
      period: 0,
      mode: "STANDBY",
      mce: "MCE2",
      consumed: ["MIE1"],
    });
    expect(serviceOutput).toContain("serving on");
  });

  it(
    "displays each expected mode within one tick of its command",
    async () => {
      const steps: Array<{
        label: string;
        send: () => Promise<StateSnapshot>;
        expected: Mode;
      }> = [
        {
          label: "arm gesture",
          send: () => client.sendRc({ stick: "MIE3" }),
          expected: "LOITER",
        },
        {
          label: "release the stick",
          send: () => client.sendRc({ stick: "MIE5" }),
          expected: "LOITER",
        },
        {
          label: "GPS goes unhealthy",
          send: () => client.sendFault({ group: "GPS", event: "ATE4" }),
          expected: "ALTITUDE_HOLD",
        },
        {
          label: "RC link lost without navigation",
          send: () => client.sendFault({ group: "RC", event: "ATE12" }),
          expected: "AL",
        },
        {
          label: "return switch while still degraded",
          send: () => client.sendRc({ switch: "MIE7" }),
          expected: "AL",
        },
        {
          label: "GPS restored, heading home",
          send: () => client.sendFault({ group: "GPS", event: "ATE3" }),
          expected: "RTL",
        },
        {
          label: "RC link restored, return continues",
          send: () => client.sendFault({ group: "RC", event: "ATE11" }),
          expected: "RTL",
        },
      ];

      for (const step of steps) {
        const before = client.state.period ?? 0;
        const ack = await step.send();
        // The ack is the first post-tick snapshot after the command, so
        // finding the expected mode in it is the within-one-tick proof.
        expect(ack.mode, step.label).toBe(step.expected);
        expect(ack.period, step.label).toBeGreaterThan(before);
        expect(ack.period, step.label).toBeLessThanOrEqual(before + 2);
        expect(client.state.mode, step.label).toBe(step.expected);
        expect(client.state.busy).toBe(false);
        expect(client.state.lastError).toBeNull();
        ackPeriods.push(ack.period);
      }

      expect(client.state.health["GPS"]).toBe("ATE3");
      expect(client.state.health["RC"]).toBe("ATE11");
      expect(client.state.switch).toBe("MIE7");
    },
    WALK_TIMEOUT,
  );

  it(
    "holds a scrolling log identical to the service log",
    async () => {
      const lastPeriod = client.state.period ?? 0;
      await client.waitForLogPeriod(lastPeriod, 15_000);

      const reply = await fetch(`${base}/state`);
      expect(reply.ok).toBe(true);
      const server = parseSnapshot(await reply.json());

      const clientRows = client.state.log;
      const serverRows = server.log_tail;
      expect(clientRows.length).toBeGreaterThan(0);
      expect(serverRows.length).toBeGreaterThan(0);

      // Compare over the window both sides hold: the service tail is
      // capped, and ticks keep coming while we fetch, so bound the window
      // by the walkthrough's final period on both sides.
      const firstClient = clientRows[0]?.period ?? 0;
      const firstServer = serverRows[0]?.period ?? 0;
      const from = Math.max(firstClient, firstServer);
      const mine = clientRows.filter(
        (row) => row.period >= from && row.period <= lastPeriod,
      );
      const theirs = serverRows.filter(
        (row) => row.period >= from && row.period <= lastPeriod,
      );
      // Every acknowledged command tick of the walkthrough is in the
      // compared window; nothing of interest was aged out of either side.
      expect(ackPeriods).toHaveLength(7);
      const held = new Set(mine.map((row) => row.period));
      for (const period of ackPeriods) expect(held.has(period)).toBe(true);
      expect(mine).toEqual(theirs);

      // The log carried every period in the window: strictly increasing
      // by exactly one, no skips, no rewrites.
      for (let i = 1; i < mine.length; i += 1) {
        expect(mine[i]?.period).toBe((mine[i - 1]?.period ?? 0) + 1);
      }
    },
    WALK_TIMEOUT,
  );
});
