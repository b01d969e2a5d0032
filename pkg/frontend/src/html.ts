// ViewModel -> HTML string. Kept free of DOM APIs so snapshot tests can
// run in plain Node; app.ts injects the result and wires clicks through
// data-* attributes. Tiles always carry their color as text, never color
// swatches alone.

import { ViewModel } from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function attr(enabled: boolean): string {
  return enabled ? "" : " disabled";
}

function projectsPanel(vm: ViewModel): string {
  const entries = vm.projects
    .map((entry) => {
      const tiles = entry.tiles
        .map(
          (tile) =>
            `<button class="tile color-${tile.color}${tile.done ? " done" : ""}"` +
            ` data-action="project_task" data-size="${entry.size}" data-color="${tile.color}"` +
            `${attr(tile.enabled)}>${tile.color}${tile.done ? " &#10003;" : ""}</button>`,
        )
        .join("");
      return (
        `<div class="project" data-size="${entry.size}">` +
        `<h3>${entry.size} <span class="points">${entry.points} pts</span>` +
        ` <span class="progress">${entry.tasksDone}/${entry.tasksTotal}</span></h3>` +
        `<div class="tiles">${tiles}</div></div>`
      );
    })
    .join("");
  return `<section class="panel projects"><h2>Projects</h2>${entries}</section>`;
}

function immunitiesPanel(vm: ViewModel): string {
  const tiles = vm.immunities
    .map((tile) => {
      const state = tile.held
        ? `<span class="state held">held</span>`
        : tile.overdue
          ? `<span class="state overdue">overdue</span>`
          : `<span class="state lost">repair within ${tile.roundsLeft}</span>`;
      return (
        `<div class="immunity color-${tile.color}" data-color="${tile.color}">` +
        `<span class="label">${tile.color}</span>${state}` +
        `<button class="tile" data-action="immunity_task" data-color="${tile.color}"` +
        `${attr(tile.repairEnabled)}>repair</button></div>`
      );
    })
    .join("");
  return `<section class="panel immunities"><h2>Immunities</h2>${tiles}</section>`;
}

function capabilitiesPanel(vm: ViewModel): string {
  const tiles = vm.capabilities
    .map(
      (tile) =>
        `<div class="capability color-${tile.color}${tile.available ? "" : " unavailable"}">` +
        `${tile.color}: ${tile.available ? "available" : "lost"}</div>`,
    )
    .join("");
  return `<section class="panel capabilities"><h2>Capabilities</h2>${tiles}</section>`;
}

function scoreboardPanel(vm: ViewModel): string {
  const rows = vm.scoreboard
    .map((row) => {
      const label = row.name ? escapeHtml(row.name) : row.playerId;
      const flags = [
        row.compliant ? "compliant" : "noncompliant",
        row.sanctioned ? "sanctioned" : null,
      ]
        .filter((f) => f !== null)
        .join(", ");
      return (
        `<tr class="${row.you ? "you" : ""}${row.compliant ? "" : " noncompliant"}">` +
        `<td>${label}${row.you ? " (you)" : ""}</td><td>${row.score}</td>` +
        `<td>${row.immunitiesHeld}/3</td><td>${flags}</td></tr>`
      );
    })
    .join("");
  return (
    `<section class="panel scoreboard"><h2>Scoreboard</h2>` +
    `<table><thead><tr><th>player</th><th>score</th><th>immunities</th><th>status</th></tr></thead>` +
    `<tbody>${rows}</tbody></table></section>`
  );
}

function controlsPanel(vm: ViewModel): string {
  const c = vm.controls;
  const timer =
    c.secondsLeft === null
      ? ""
      : `<span class="timer" data-deadline-ms="${c.deadlineMs}">${c.secondsLeft}s</span>`;
  const banner = c.forcedSkip
    ? `<p class="notice sanctioned">You are sanctioned: pass is your only move this round.</p>`
    : "";
  const rejection = c.rejection
    ? `<p class="notice rejection">Last action was rejected: ${escapeHtml(c.rejection)}. Pick again.</p>`
    : "";
  const waiting = c.locked
    ? `<p class="notice waiting">Action sent; waiting for the round to resolve.</p>`
    : "";
  const targets = c.peerTargets
    .map((target) => {
      const label = target.name ? escapeHtml(target.name) : target.playerId;
      return (
        `<button class="target" data-action="peer_sanction" data-target="${target.playerId}"` +
        `${attr(target.enabled)}>sanction ${label}</button>`
      );
    })
    .join("");
  return (
    `<section class="panel controls">` +
    `<h2>Round ${c.round}/${c.totalRounds} <span class="regime">${c.regime} sanctions</span> ${timer}</h2>` +
    banner +
    rejection +
    waiting +
    `<div class="peer-targets">${targets}</div>` +
    `<button class="pass" data-action="skip"${attr(c.passEnabled)}>pass</button>` +
    `</section>`
  );
}

export function viewModelToHtml(vm: ViewModel): string {
  return (
    `<div class="dashboard" data-round="${vm.round}" data-seat="${vm.seat}">` +
    projectsPanel(vm) +
    immunitiesPanel(vm) +
    capabilitiesPanel(vm) +
    scoreboardPanel(vm) +
    controlsPanel(vm) +
    `</div>`
  );
}
