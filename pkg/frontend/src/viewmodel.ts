// Pure projection from one round's server data to the five dashboard
// panels. Every enablement flag comes from the server's enabled-action
// list; nothing here re-derives game rules to decide what is clickable.

import {
  Color,
  PlayerViewWire,
  ProjectSize,
  WireAction,
  actionKey,
} from "./protocol.js";

export const COLOR_ORDER: readonly Color[] = ["blue", "red", "yellow"];
export const SIZE_ORDER: readonly ProjectSize[] = ["small", "medium", "large"];

export interface TaskTile {
  color: Color;
  done: boolean;
  enabled: boolean;
}

export interface ProjectPanelEntry {
  size: ProjectSize;
  points: number;
  tasksTotal: number;
  tasksDone: number;
  tiles: TaskTile[];
}

export interface ImmunityTile {
  color: Color;
  held: boolean;
  deadlineRound: number | null;
  /** Rounds until the repair deadline passes; negative when overdue. */
  roundsLeft: number | null;
  overdue: boolean;
  repairEnabled: boolean;
}

export interface CapabilityTile {
  color: Color;
  available: boolean;
}

export interface ScoreboardRow {
  playerId: string;
  seat: number;
  name: string | null;
  you: boolean;
  score: number;
  compliant: boolean;
  sanctioned: boolean;
  immunitiesHeld: number;
}

export interface PeerTarget {
  playerId: string;
  name: string | null;
  enabled: boolean;
}

export interface ControlsPanel {
  round: number;
  totalRounds: number;
  regime: string;
  deadlineMs: number | null;
  secondsLeft: number | null;
  forcedSkip: boolean;
  locked: boolean;
  rejection: string | null;
  passEnabled: boolean;
  peerTargets: PeerTarget[];
}

export interface ViewModel {
  gameId: string;
  round: number;
  seat: number;
  projects: ProjectPanelEntry[];
  immunities: ImmunityTile[];
  capabilities: CapabilityTile[];
  scoreboard: ScoreboardRow[];
  controls: ControlsPanel;
}

export interface RenderInputs {
  view: PlayerViewWire;
  enabledActions: WireAction[];
  forcedSkip: boolean;
  deadlineMs: number | null;
  /** Client sampling instant for the countdown; display only, the
   * server-sent deadline stays authoritative. */
  nowMs: number;
  /** seat index -> display name, from the latest room_state. */
  names: Record<number, string | null>;
  /** An action for this round is in flight or acknowledged. */
  locked: boolean;
  rejection: string | null;
}

function enabledSet(actions: WireAction[]): Set<string> {
  return new Set(actions.map(actionKey));
}

// Display-only echo of the server's compliance rule for the viewer's own
// row; never used for enablement (peers carry a server-sent flag already).
function selfCompliant(view: PlayerViewWire): boolean {
  for (const color of COLOR_ORDER) {
    const slot = view.player.slots[color];
    if (slot.status !== "held" && slot.deadline_round !== null && view.round > slot.deadline_round) {
      return false;
    }
  }
  return true;
}

export function render(inputs: RenderInputs): ViewModel {
  const { view, forcedSkip, deadlineMs, nowMs, names, locked, rejection } = inputs;
  const enabled = enabledSet(inputs.enabledActions);
  const can = (action: WireAction) => !locked && enabled.has(actionKey(action));

  const projects: ProjectPanelEntry[] = SIZE_ORDER.map((size) => {
    const project = view.player.projects[size];
    const completed = new Set(project.completed);
    return {
      size,
      points: view.config.project_scores[size],
      tasksTotal: project.required.length,
      tasksDone: project.completed.length,
      tiles: project.required.map((color) => ({
        color,
        done: completed.has(color),
        enabled: !completed.has(color) && can({ kind: "project_task", size, color }),
      })),
    };
  });

  const immunities: ImmunityTile[] = COLOR_ORDER.map((color) => {
    const slot = view.player.slots[color];
    const held = slot.status === "held";
    const roundsLeft =
      held || slot.deadline_round === null ? null : slot.deadline_round - view.round;
    return {
      color,
      held,
      deadlineRound: held ? null : slot.deadline_round,
      roundsLeft,
      overdue: roundsLeft !== null && roundsLeft < 0,
      repairEnabled: can({ kind: "immunity_task", color }),
    };
  });

  const capabilities: CapabilityTile[] = COLOR_ORDER.map((color) => ({
    color,
    available: view.player.slots[color].capability_available,
  }));

  const heldCount = (flags: Record<Color, boolean>) =>
    COLOR_ORDER.filter((c) => flags[c]).length;

  const rows: ScoreboardRow[] = [
    {
      playerId: view.player.player_id,
      seat: view.seat,
      name: names[view.seat] ?? null,
      you: true,
      score: view.player.score,
      compliant: selfCompliant(view),
      sanctioned: view.player.sanction.kind !== "none",
      immunitiesHeld: COLOR_ORDER.filter((c) => view.player.slots[c].status === "held").length,
    },
    ...view.peers.map((peer) => ({
      playerId: peer.player_id,
      seat: peer.seat,
      name: names[peer.seat] ?? null,
      you: false,
      score: peer.score,
      compliant: peer.compliant,
      sanctioned: peer.sanctioned,
      immunitiesHeld: heldCount(peer.immunities),
    })),
  ].sort((a, b) => a.seat - b.seat);

  const secondsLeft =
    deadlineMs === null ? null : Math.max(0, Math.ceil((deadlineMs - nowMs) / 1000));

  const controls: ControlsPanel = {
    round: view.round,
    totalRounds: view.config.rounds,
    regime: view.config.regime,
    deadlineMs,
    secondsLeft,
    forcedSkip,
    locked,
    rejection,
    passEnabled: can({ kind: "skip" }),
    peerTargets: view.peers.map((peer) => ({
      playerId: peer.player_id,
      name: names[peer.seat] ?? null,
      enabled: can({ kind: "peer_sanction", target: peer.player_id }),
    })),
  };

  return {
    gameId: view.game_id,
    round: view.round,
    seat: view.seat,
    projects,
    immunities,
    capabilities,
    scoreboard: rows,
    controls,
  };
}

/** Every action the rendered model would let the user click, in wire form.
 * Exists so tests can assert the panel mirrors the server list exactly. */
export function clickableActions(vm: ViewModel): WireAction[] {
  const out: WireAction[] = [];
  for (const entry of vm.projects) {
    for (const tile of entry.tiles) {
      if (tile.enabled) {
        out.push({ kind: "project_task", size: entry.size, color: tile.color });
      }
    }
  }
  for (const tile of vm.immunities) {
    if (tile.repairEnabled) {
      out.push({ kind: "immunity_task", color: tile.color });
    }
  }
  for (const target of vm.controls.peerTargets) {
    if (target.enabled) {
      out.push({ kind: "peer_sanction", target: target.playerId });
    }
  }
  if (vm.controls.passEnabled) {
    out.push({ kind: "skip" });
  }
  return out;
}
