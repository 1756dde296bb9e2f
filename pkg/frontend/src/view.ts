/**
 * Pure HTML renderers for the cockpit.
 *
 * Every function maps a CockpitState to a markup string and nothing else;
 * the DOM glue in main.ts owns the single rendering pass that applies
 * them. Keeping these pure lets the test suite assert on exact markup
 * without a browser.
 */

import { HEALTH_GROUPS, MODE_SET, ProtocolError, STICK_LEVELS, SWITCH_LEVELS } from "./protocol.js";
import type { CockpitState } from "./client.js";
import type { DecisionRecord } from "./protocol.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * The mode display. Refuses to render anything outside the eight-mode
 * enum; the schemas upstream already guarantee this, and the view is the
 * last line of defense.
 */
export function renderModeDisplay(state: CockpitState): string {
  if (state.mode === null) {
    return '<div class="mode-display mode-unknown">&mdash;</div>';
  }
  if (!MODE_SET.has(state.mode)) {
    throw new ProtocolError(`refusing to display unknown mode: ${state.mode}`);
  }
  const period = state.period === null ? "" : `<span class="period">period ${state.period}</span>`;
  return (
    `<div class="mode-display mode-${state.mode}">` +
    `<span class="mode-name">${state.mode}</span>${period}</div>`
  );
}

/** Connection banner; empty string while the stream is live and quiet. */
export function renderBanner(state: CockpitState): string {
  if (state.banner === null) return "";
  return `<div class="banner" role="alert">${escapeHtml(state.banner)}</div>`;
}

/** Inline error from the last rejected command. */
export function renderCommandError(state: CockpitState): string {
  if (state.lastError === null) return "";
  return `<div class="command-error">${escapeHtml(state.lastError)}</div>`;
}

function radio(
  name: string,
  value: string,
  caption: string,
  checked: boolean,
  disabled: boolean,
): string {
  const checkedAttr = checked ? " checked" : "";
  const disabledAttr = disabled ? " disabled" : "";
  return (
    `<label class="level"><input type="radio" name="${name}" value="${value}"` +
    `${checkedAttr}${disabledAttr}> ${escapeHtml(caption)}</label>`
  );
}

/**
 * The rc selector: the three-position stick gesture and the three-position
 * mode switch. Controls freeze while a command is in flight or the stream
 * is down.
 */
export function renderRcSelector(state: CockpitState): string {
  const frozen = state.busy || !state.connected;
  const stick = STICK_LEVELS.map((level) =>
    radio("stick", level.event, level.caption, state.stick === level.event, frozen),
  ).join("");
  const mode = SWITCH_LEVELS.map((level) =>
    radio("switch", level.event, level.caption, state.switch === level.event, frozen),
  ).join("");
  return (
    '<fieldset class="rc-selector"><legend>rc</legend>' +
    `<div class="level-group" data-control="stick"><span class="group-label">stick</span>${stick}</div>` +
    `<div class="level-group" data-control="switch"><span class="group-label">switch</span>${mode}</div>` +
    "</fieldset>"
  );
}

/**
 * One radio group per exclusive health group, battery three-way. Checked
 * positions mirror the levels the session is holding.
 */
export function renderFaultToggles(state: CockpitState): string {
  const frozen = state.busy || !state.connected;
  const groups = HEALTH_GROUPS.map((group) => {
    const held = state.health[group.label];
    const options = group.options
      .map((option) =>
        radio(
          `health-${group.label}`,
          option.event,
          option.caption,
          held === option.event,
          frozen,
        ),
      )
      .join("");
    return (
      `<div class="level-group" data-health-group="${group.label}">` +
      `<span class="group-label">${escapeHtml(group.label)}</span>${options}</div>`
    );
  }).join("");
  return `<fieldset class="fault-toggles"><legend>health</legend>${groups}</fieldset>`;
}

function renderLogRow(row: DecisionRecord): string {
  if (!MODE_SET.has(row.mode)) {
    throw new ProtocolError(`refusing to display unknown mode: ${row.mode}`);
  }
  const consumed = row.consumed.map(escapeHtml).join(" ");
  const mce = row.mce === null ? "&mdash;" : escapeHtml(row.mce);
  return (
    `<tr data-period="${row.period}"><td>${row.period}</td>` +
    `<td class="consumed">${consumed}</td><td>${mce}</td>` +
    `<td class="mode-${row.mode}">${row.mode}</td></tr>`
  );
}

/** The scrolling decision log, newest row last. */
export function renderLog(state: CockpitState): string {
  const rows = state.log.map(renderLogRow).join("");
  return (
    '<table class="decision-log"><thead><tr>' +
    "<th>period</th><th>consumed</th><th>command</th><th>mode</th>" +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

/** The whole cockpit, one string. */
export function renderCockpit(state: CockpitState): string {
  return (
    renderBanner(state) +
    renderModeDisplay(state) +
    renderCommandError(state) +
    renderRcSelector(state) +
    renderFaultToggles(state) +
    renderLog(state)
  );
}
