// Browser entry point: join form, dashboard rendering, click dispatch,
// countdown repaint, survey and game-over screens. All game logic lives
// server-side; this file only moves wire data into the pure renderer and
// user clicks back onto the wire.

import { viewModelToHtml, escapeHtml } from "./html.js";
import {
  GameOverBody,
  RoomStateBody,
  RoundBeginBody,
  ServerMessage,
  SurveyPromptBody,
  WireAction,
} from "./protocol.js";
import { GameClient } from "./socket.js";
import { render } from "./viewmodel.js";

interface UiState {
  names: Record<number, string | null>;
  currentRound: RoundBeginBody | null;
  locked: boolean;
  rejection: string | null;
  gameOver: GameOverBody | null;
  survey: SurveyPromptBody | null;
  surveyDone: Set<string>;
  status: string;
}

const state: UiState = {
  names: {},
  currentRound: null,
  locked: false,
  rejection: null,
  gameOver: null,
  survey: null,
  surveyDone: new Set(),
  status: "idle",
};

let client: GameClient | null = null;

function byId<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (!element) {
    throw new Error(`missing #${id}`);
  }
  return element as T;
}

function tokenStorageKey(roomCode: string): string {
  return `normgame-token-${roomCode}`;
}

function storedToken(roomCode: string): string | null {
  try {
    return window.sessionStorage.getItem(tokenStorageKey(roomCode));
  } catch {
    return null;
  }
}

function rememberToken(roomCode: string, token: string): void {
  try {
    window.sessionStorage.setItem(tokenStorageKey(roomCode), token);
  } catch {
    // private-mode storage failures only cost reconnect convenience
  }
}

function redraw(): void {
  const app = byId<HTMLDivElement>("app");
  if (state.gameOver) {
    app.innerHTML = gameOverHtml(state.gameOver, state.survey);
    return;
  }
  if (!state.currentRound) {
    app.innerHTML = `<p class="status">${escapeHtml(state.status)}</p>`;
    return;
  }
  const body = state.currentRound;
  const vm = render({
    view: body.view,
    enabledActions: body.enabled_actions,
    forcedSkip: body.forced_skip,
    deadlineMs: body.deadline_ms,
    nowMs: Date.now(),
    names: state.names,
    locked: state.locked,
    rejection: state.rejection,
  });
  app.innerHTML = viewModelToHtml(vm);
}

function gameOverHtml(over: GameOverBody, survey: SurveyPromptBody | null): string {
  const scores = Object.entries(over.final_scores)
    .sort((a, b) => b[1] - a[1])
    .map(([pid, score]) => {
      return `<tr><td>${escapeHtml(pid)}</td><td>${score}</td></tr>`;
    })
    .join("");
  const surveyHtml = survey
    ? survey.items
        .filter((item) => !state.surveyDone.has(item.id))
        .map((item) => {
          const options = [];
          for (let v = item.min; v <= item.max; v += 1) {
            options.push(`<button class="likert" data-survey-item="${item.id}" data-survey-value="${v}">${v}</button>`);
          }
          return (
            `<div class="survey-item"><p>${escapeHtml(item.text)}</p>` +
            `<span class="scale-label">${escapeHtml(item.min_label)}</span>` +
            options.join("") +
            `<span class="scale-label">${escapeHtml(item.max_label)}</span></div>`
          );
        })
        .join("")
    : "";
  const thanks =
    survey && survey.items.every((item) => state.surveyDone.has(item.id))
      ? `<p class="notice">Survey recorded, thanks for playing.</p>`
      : "";
  return (
    `<div class="game-over"><h2>Game over after ${over.rounds} rounds</h2>` +
    `<p>${over.attack_count} attacks landed. Final scores:</p>` +
    `<table><tbody>${scores}</tbody></table>` +
    surveyHtml +
    thanks +
    `</div>`
  );
}

function fatalBanner(detail: string): void {
  const banner = byId<HTMLDivElement>("fatal");
  banner.textContent = `Cannot play: ${detail}. Reload after upgrading.`;
  banner.style.display = "block";
}

function handleMessage(message: ServerMessage): void {
  switch (message.type) {
    case "joined":
      rememberToken(message.roomCode ?? "", message.body.seat_token);
      state.status = `seated as ${message.body.name ?? message.body.player_id}`;
      break;
    case "room_state":
      applyRoomState(message.body);
      break;
    case "round_begin":
      state.currentRound = message.body;
      state.locked = false;
      state.rejection = null;
      break;
    case "action_ack":
      if (message.body.kind === "survey" && message.body.item) {
        state.surveyDone.add(message.body.item);
      }
      break;
    case "action_rejected":
      if (message.body.reason === "already_acted") {
        state.locked = true;
      } else {
        state.locked = false;
        state.rejection = message.body.reason;
      }
      break;
    case "round_result":
      state.locked = false;
      break;
    case "game_over":
      state.gameOver = message.body;
      state.currentRound = null;
      break;
    case "survey_prompt":
      state.survey = message.body;
      break;
    case "error":
      state.status = `error: ${message.body.reason}`;
      break;
    default:
      break;
  }
  redraw();
}

function applyRoomState(body: RoomStateBody): void {
  state.names = {};
  for (const seat of body.seats) {
    state.names[seat.seat] = seat.name;
  }
}

function actionFromClick(element: HTMLElement): WireAction | null {
  const kind = element.dataset.action;
  if (!kind) {
    return null;
  }
  const action: WireAction = { kind: kind as WireAction["kind"] };
  if (element.dataset.size) {
    action.size = element.dataset.size as WireAction["size"];
  }
  if (element.dataset.color) {
    action.color = element.dataset.color as WireAction["color"];
  }
  if (element.dataset.target) {
    action.target = element.dataset.target;
  }
  return action;
}

function onAppClick(event: Event): void {
  const origin = event.target as HTMLElement | null;
  if (!origin || !client) {
    return;
  }
  const surveyButton = origin.closest<HTMLElement>("[data-survey-item]");
  if (surveyButton) {
    const item = surveyButton.dataset.surveyItem ?? "";
    const value = Number(surveyButton.dataset.surveyValue);
    client.answerSurvey(item, value);
    return;
  }
  const actionButton = origin.closest<HTMLElement>("[data-action]");
  if (!actionButton || actionButton.hasAttribute("disabled")) {
    return;
  }
  const action = actionFromClick(actionButton);
  if (!action || !state.currentRound || state.locked) {
    return;
  }
  if (client.submitAction(state.currentRound.round, action)) {
    state.locked = true;
    state.rejection = null;
    redraw();
  }
}

function connect(roomCode: string, name: string): void {
  const scheme = window.location.protocol === "https:" ? "wss" : "ws";
  const url = `${scheme}://${window.location.host}/ws`;
  client = new GameClient({
    url,
    roomCode,
    onMessage: handleMessage,
    onStatus: (status) => {
      state.status = status;
      redraw();
    },
    onFatal: (_reason, detail) => fatalBanner(detail),
  });
  const token = storedToken(roomCode);
  client.start(token ? { seatToken: token } : { name });
  byId<HTMLFormElement>("join-form").style.display = "none";
}

export function main(): void {
  const form = byId<HTMLFormElement>("join-form");
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const roomCode = byId<HTMLInputElement>("room-code").value.trim().toUpperCase();
    const name = byId<HTMLInputElement>("player-name").value.trim();
    if (roomCode && name) {
      connect(roomCode, name);
    }
  });
  byId<HTMLDivElement>("app").addEventListener("click", onAppClick);
  // Repaint for the countdown; cheap enough at 2Hz and the deadline itself
  // is server data, so drift only affects the displayed number.
  window.setInterval(() => {
    if (state.currentRound && !state.gameOver) {
      redraw();
    }
  }, 500);
  redraw();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  main();
}
