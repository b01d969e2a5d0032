import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  PROTOCOL_VERSION,
  actionKey,
  actionsEqual,
  buildEnvelope,
  parseServerMessage,
} from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));
const transcript = JSON.parse(
  readFileSync(join(here, "fixtures", "transcript.json"), "utf8"),
) as { messages: { type: string }[] };

describe("parseServerMessage", () => {
  it("accepts every message in the recorded transcript", () => {
    expect(transcript.messages.length).toBeGreaterThan(20);
    for (const raw of transcript.messages) {
      const result = parseServerMessage(JSON.stringify(raw));
      expect(result.ok, `rejected ${raw.type}`).toBe(true);
      if (result.ok) {
        expect(result.message.type).toBe(raw.type);
      }
    }
  });

  it("covers the full message vocabulary in one recording", () => {
    const seen = new Set(transcript.messages.map((m) => m.type));
    for (const required of [
      "joined",
      "room_state",
      "round_begin",
      "round_result",
      "action_ack",
      "action_rejected",
      "game_over",
      "survey_prompt",
    ]) {
      expect(seen.has(required), `transcript never contains ${required}`).toBe(true);
    }
  });

  it("rejects garbage without throwing", () => {
    expect(parseServerMessage("not json").ok).toBe(false);
    expect(parseServerMessage("[1,2]").ok).toBe(false);
    expect(parseServerMessage("42").ok).toBe(false);
    const missingType = JSON.stringify({ protocolVersion: 1, body: {} });
    const parsed = parseServerMessage(missingType);
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) {
      expect(parsed.error).toBe("bad_envelope");
    }
  });

  it("flags a version mismatch distinctly so the UI can block", () => {
    const future = JSON.stringify({
      type: "round_begin",
      roomCode: "X",
      protocolVersion: PROTOCOL_VERSION + 1,
      requestId: null,
      body: {},
    });
    const parsed = parseServerMessage(future);
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) {
      expect(parsed.error).toBe("version_mismatch");
      expect(parsed.detail).toContain(String(PROTOCOL_VERSION + 1));
    }
  });

  it("rejects known-shaped envelopes of unknown type", () => {
    const odd = JSON.stringify({
      type: "telemetry",
      roomCode: "X",
      protocolVersion: PROTOCOL_VERSION,
      requestId: null,
      body: {},
    });
    const parsed = parseServerMessage(odd);
    expect(parsed.ok).toBe(false);
    if (!parsed.ok) {
      expect(parsed.error).toBe("unknown_type");
    }
  });
});

describe("buildEnvelope", () => {
  it("produces exactly the keys the server expects", () => {
    const raw = buildEnvelope("submit_action", "UIDEMO", "q7", {
      round: 3,
      action: { kind: "skip" },
    });
    const parsed = JSON.parse(raw);
    expect(Object.keys(parsed).sort()).toEqual([
      "body",
      "protocolVersion",
      "requestId",
      "roomCode",
      "type",
    ]);
    expect(parsed.protocolVersion).toBe(PROTOCOL_VERSION);
    expect(parsed.requestId).toBe("q7");
    expect(parsed.body.action.kind).toBe("skip");
  });
});

describe("action identity", () => {
  it("compares all four wire fields", () => {
    expect(actionsEqual({ kind: "skip" }, { kind: "skip" })).toBe(true);
    expect(
      actionsEqual(
        { kind: "project_task", size: "small", color: "red" },
        { kind: "project_task", size: "small", color: "red" },
      ),
    ).toBe(true);
    expect(
      actionsEqual(
        { kind: "project_task", size: "small", color: "red" },
        { kind: "project_task", size: "medium", color: "red" },
      ),
    ).toBe(false);
    expect(
      actionsEqual({ kind: "peer_sanction", target: "p2" }, { kind: "peer_sanction", target: "p3" }),
    ).toBe(false);
  });

  it("keys collide exactly when actions are equal", () => {
    const a = { kind: "immunity_task" as const, color: "blue" as const };
    const b = { kind: "immunity_task" as const, color: "blue" as const };
    const c = { kind: "immunity_task" as const, color: "red" as const };
    expect(actionKey(a)).toBe(actionKey(b));
    expect(actionKey(a)).not.toBe(actionKey(c));
  });
});
