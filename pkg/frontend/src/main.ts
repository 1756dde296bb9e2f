/**
 * Browser entry point. Owns the single rendering pass: one subscription on
 * the client repaints the cockpit container whenever the serialized update
 * queue publishes a new state, and one delegated change handler turns radio
 * flips into commands. No timers, no polling.
 */

import { CockpitClient } from "./client.js";
import { renderCockpit } from "./view.js";

function requireElement<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id} in the page`);
  return el as T;
}

function start(): void {
  const baseUrlInput = requireElement<HTMLInputElement>("base-url");
  const connectButton = requireElement<HTMLButtonElement>("connect");
  const container = requireElement<HTMLDivElement>("cockpit");

  let client: CockpitClient | null = null;
  let unsubscribe: (() => void) | null = null;

  function repaint(): void {
    if (!client) return;
    container.innerHTML = renderCockpit(client.state);
    const log = container.querySelector(".decision-log tbody");
    if (log) log.scrollTop = log.scrollHeight;
  }

  connectButton.addEventListener("click", () => {
    unsubscribe?.();
    client?.close();
    client = new CockpitClient(baseUrlInput.value.trim());
    unsubscribe = client.subscribe(repaint);
    client.connect().catch((err) => {
      console.error("connect failed", err);
    });
  });

  container.addEventListener("change", (event) => {
    if (!client) return;
    const input = event.target;
    if (!(input instanceof HTMLInputElement) || input.type !== "radio") return;
    const settle = (promise: Promise<unknown>): void => {
      // Rejections land in state.lastError and render inline; swallowing
      // here only silences the duplicate unhandled-rejection noise.
      promise.catch(() => undefined);
    };
    if (input.name === "stick") {
      settle(client.sendRc({ stick: input.value }));
    } else if (input.name === "switch") {
      settle(client.sendRc({ switch: input.value }));
    } else if (input.name.startsWith("health-")) {
      const group = input.name.slice("health-".length);
      settle(client.sendFault({ group, event: input.value }));
    }
  });
}

start();
