import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  RoomStateBody,
  RoundBeginBody,
  ServerMessage,
  WireAction,
  actionKey,
} from "../src/protocol.js";
import {
  COLOR_ORDER,
  RenderInputs,
  ViewModel,
  clickableActions,
  render,
} from "../src/viewmodel.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixtures = join(here, "fixtures");
const transcript = JSON.parse(readFileSync(join(fixtures, "transcript.json"), "utf8")) as {
  seat: number;
  messages: ServerMessage[];
};

// A fixed sampling instant keeps the countdown deterministic: 30s before
// each frame's own deadline.
function inputsFor(body: RoundBeginBody, names: Record<number, string | null>): RenderInputs {
  return {
    view: body.view,
    enabledActions: body.enabled_actions,
    forcedSkip: body.forced_skip,
    deadlineMs: body.deadline_ms,
    nowMs: (body.deadline_ms ?? 30_000) - 30_000,
    names,
    locked: false,
    rejection: null,
  };
}

interface Frame {
  round: number;
  body: RoundBeginBody;
  names: Record<number, string | null>;
}

function collectFrames(): Frame[] {
  const frames: Frame[] = [];
  let names: Record<number, string | null> = {};
  for (const message of transcript.messages) {
    if (message.type === "room_state") {
      names = {};
      for (const seat of (message.body as RoomStateBody).seats) {
        names[seat.seat] = seat.name;
      }
    } else if (message.type === "round_begin") {
      frames.push({ round: message.body.round, body: message.body, names: { ...names } });
    }
  }
  return frames;
}

const frames = collectFrames();

describe("rendering the recorded game", () => {
  it("has a full game of frames to work with", () => {
    expect(frames.length).toBe(8);
    expect(frames.some((f) => f.body.forced_skip)).toBe(true);
    expect(frames.some((f) => !f.body.forced_skip)).toBe(true);
  });

  it("mirrors the server's enabled actions exactly, frame by frame", () => {
    for (const frame of frames) {
      const vm = render(inputsFor(frame.body, frame.names));
      const rendered = clickableActions(vm).map(actionKey).sort();
      const wire = frame.body.enabled_actions.map(actionKey).sort();
      expect(rendered, `round ${frame.round}`).toEqual(wire);
    }
  });

  it("shows only the pass control when the server forces a skip", () => {
    const sanctionedFrames = frames.filter((f) => f.body.forced_skip);
    expect(sanctionedFrames.length).toBeGreaterThan(0);
    for (const frame of sanctionedFrames) {
      const vm = render(inputsFor(frame.body, frame.names));
      expect(vm.controls.passEnabled).toBe(true);
      expect(vm.controls.forcedSkip).toBe(true);
      const clickable = clickableActions(vm);
      expect(clickable).toEqual([{ kind: "skip" }]);
      for (const project of vm.projects) {
        for (const tile of project.tiles) {
          expect(tile.enabled).toBe(false);
        }
      }
      for (const tile of vm.immunities) {
        expect(tile.repairEnabled).toBe(false);
      }
    }
  });

  it("counts down each lost immunity in rounds against its deadline", () => {
    let lostSeen = 0;
    for (const frame of frames) {
      const vm = render(inputsFor(frame.body, frame.names));
      for (const color of COLOR_ORDER) {
        const slot = frame.body.view.player.slots[color];
        const tile = vm.immunities.find((t) => t.color === color)!;
        if (slot.status === "held") {
          expect(tile.held).toBe(true);
          expect(tile.roundsLeft).toBeNull();
        } else {
          lostSeen += 1;
          expect(tile.held).toBe(false);
          expect(tile.roundsLeft).toBe((slot.deadline_round ?? 0) - frame.round);
          expect(tile.overdue).toBe((tile.roundsLeft ?? 0) < 0);
        }
      }
    }
    expect(lostSeen).toBeGreaterThan(0);
  });

  it("mirrors capability availability and peer flags from the wire", () => {
    for (const frame of frames) {
      const vm = render(inputsFor(frame.body, frame.names));
      for (const color of COLOR_ORDER) {
        const tile = vm.capabilities.find((t) => t.color === color)!;
        expect(tile.available).toBe(frame.body.view.player.slots[color].capability_available);
      }
      expect(vm.scoreboard.length).toBe(4);
      expect(vm.scoreboard.map((r) => r.seat)).toEqual([0, 1, 2, 3]);
      for (const peer of frame.body.view.peers) {
        const row = vm.scoreboard.find((r) => r.playerId === peer.player_id)!;
        expect(row.you).toBe(false);
        expect(row.score).toBe(peer.score);
        expect(row.compliant).toBe(peer.compliant);
        expect(row.sanctioned).toBe(peer.sanctioned);
      }
      const self = vm.scoreboard.find((r) => r.you)!;
      expect(self.playerId).toBe(frame.body.view.player.player_id);
      expect(self.score).toBe(frame.body.view.player.score);
    }
  });

  it("computes the countdown from the server deadline, not local math", () => {
    const frame = frames[0];
    const base = inputsFor(frame.body, frame.names);
    expect(render(base).controls.secondsLeft).toBe(30);
    expect(render({ ...base, nowMs: base.nowMs + 29_500 }).controls.secondsLeft).toBe(1);
    // Past the deadline the display clamps instead of going negative.
    expect(render({ ...base, nowMs: base.nowMs + 120_000 }).controls.secondsLeft).toBe(0);
    expect(render({ ...base, deadlineMs: null }).controls.secondsLeft).toBeNull();
  });

  it("locks every control while a submission is in flight", () => {
    for (const frame of frames) {
      const vm = render({ ...inputsFor(frame.body, frame.names), locked: true });
      expect(clickableActions(vm)).toEqual([]);
      expect(vm.controls.locked).toBe(true);
    }
  });

  it("surfaces a rejection reason for the next attempt", () => {
    const frame = frames.find((f) => !f.body.forced_skip)!;
    const vm = render({ ...inputsFor(frame.body, frame.names), rejection: "wrong_round" });
    expect(vm.controls.rejection).toBe("wrong_round");
    expect(clickableActions(vm).length).toBeGreaterThan(0);
  });

  it("renders deterministically", () => {
    for (const frame of frames.slice(0, 3)) {
      const a = render(inputsFor(frame.body, frame.names));
      const b = render(inputsFor(frame.body, frame.names));
      expect(JSON.stringify(b)).toBe(JSON.stringify(a));
    }
  });
});

describe("golden view models", () => {
  const goldenPath = join(fixtures, "viewmodels.golden.json");

  function currentFrames(): ViewModel[] {
    return frames.map((frame) => render(inputsFor(frame.body, frame.names)));
  }

  it("matches the checked-in golden rendering of the whole game", () => {
    const current = currentFrames();
    if (process.env.REGEN_GOLDEN === "1" || !existsSync(goldenPath)) {
      writeFileSync(goldenPath, JSON.stringify(current, null, 1) + "\n");
    }
    const golden = JSON.parse(readFileSync(goldenPath, "utf8")) as ViewModel[];
    expect(current).toEqual(golden);
  });
});

describe("enablement comes only from the server list", () => {
  it("an empty action list renders a fully inert dashboard", () => {
    const frame = frames.find((f) => !f.body.forced_skip)!;
    const vm = render({ ...inputsFor(frame.body, frame.names), enabledActions: [] });
    expect(clickableActions(vm)).toEqual([]);
    expect(vm.controls.passEnabled).toBe(false);
  });

  it("an action the view cannot explain still renders (server is boss)", () => {
    const frame = frames.find((f) => !f.body.forced_skip)!;
    const extra: WireAction = { kind: "peer_sanction", target: frame.body.view.peers[0].player_id };
    const withExtra = [
      ...frame.body.enabled_actions.filter((a) => actionKey(a) !== actionKey(extra)),
      extra,
    ];
    const vm = render({ ...inputsFor(frame.body, frame.names), enabledActions: withExtra });
    const target = vm.controls.peerTargets.find((t) => t.playerId === extra.target)!;
    expect(target.enabled).toBe(true);
  });
});
