import { describe, expect, it } from "vitest";

import { PROTOCOL_VERSION } from "../src/protocol.js";
import { GameClient, SocketLike } from "../src/socket.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  deliver(message: unknown): void {
    this.onmessage?.({ data: JSON.stringify(message) });
  }

  drop(): void {
    this.onclose?.();
  }

  sentJson(): any[] {
    return this.sent.map((s) => JSON.parse(s));
  }
}

function envelope(type: string, body: unknown, requestId: string | null = null) {
  return { type, roomCode: "UIDEMO", protocolVersion: PROTOCOL_VERSION, requestId, body };
}

interface Harness {
  client: GameClient;
  sockets: FakeSocket[];
  scheduled: { fn: () => void; delayMs: number }[];
  messages: string[];
  fatals: string[];
  statuses: string[];
}

function harness(overrides: Partial<ConstructorParameters<typeof GameClient>[0]> = {}): Harness {
  const sockets: FakeSocket[] = [];
  const scheduled: Harness["scheduled"] = [];
  const messages: string[] = [];
  const fatals: string[] = [];
  const statuses: string[] = [];
  const client = new GameClient({
    url: "ws://test/ws",
    roomCode: "UIDEMO",
    factory: () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    },
    schedule: (fn, delayMs) => scheduled.push({ fn, delayMs }),
    onMessage: (m) => messages.push(m.type),
    onFatal: (reason) => fatals.push(reason),
    onStatus: (s) => statuses.push(s),
    ...overrides,
  });
  return { client, sockets, scheduled, messages, fatals, statuses };
}

function joinedBody(token = "tok-1") {
  return {
    seat: 0,
    player_id: "p0",
    seat_token: token,
    name: "dana",
    reconnected: false,
  };
}

describe("joining", () => {
  it("sends a name join with protocol version and request id on open", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    expect(h.sockets.length).toBe(1);
    h.sockets[0].open();
    const sent = h.sockets[0].sentJson();
    expect(sent.length).toBe(1);
    expect(sent[0].type).toBe("join");
    expect(sent[0].protocolVersion).toBe(PROTOCOL_VERSION);
    expect(sent[0].roomCode).toBe("UIDEMO");
    expect(sent[0].requestId).toBe("q1");
    expect(sent[0].body).toEqual({ name: "dana" });
  });

  it("remembers the seat token from the joined message", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver(envelope("joined", joinedBody("tok-9")));
    expect(h.client.seatToken).toBe("tok-9");
    expect(h.messages).toEqual(["joined"]);
  });
});

describe("single submission per round", () => {
  function openClient(): Harness {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver(envelope("joined", joinedBody()));
    return h;
  }

  it("locks after one submit until the next round begins", () => {
    const h = openClient();
    expect(h.client.submitAction(2, { kind: "skip" })).toBe(true);
    expect(h.client.submitAction(2, { kind: "skip" })).toBe(false);
    expect(h.client.submitAction(2, { kind: "immunity_task", color: "red" })).toBe(false);
    const submits = h.sockets[0].sentJson().filter((m) => m.type === "submit_action");
    expect(submits.length).toBe(1);

    h.sockets[0].deliver(envelope("action_ack", { round: 2, action: { kind: "skip" } }, "q2"));
    expect(h.client.submitAction(2, { kind: "skip" })).toBe(false);

    h.sockets[0].deliver(envelope("round_begin", { round: 3 }));
    expect(h.client.submitAction(3, { kind: "skip" })).toBe(true);
  });

  it("unlocks after a voiding rejection so the user can try again", () => {
    const h = openClient();
    expect(h.client.submitAction(2, { kind: "skip" })).toBe(true);
    h.sockets[0].deliver(envelope("action_rejected", { reason: "wrong_round", round: 3 }));
    expect(h.client.submitAction(3, { kind: "skip" })).toBe(true);
    const submits = h.sockets[0].sentJson().filter((m) => m.type === "submit_action");
    expect(submits.length).toBe(2);
    expect(new Set(submits.map((m) => m.requestId)).size).toBe(2);
  });

  it("keeps the lock when the server says already_acted", () => {
    const h = openClient();
    expect(h.client.submitAction(2, { kind: "skip" })).toBe(true);
    h.sockets[0].deliver(envelope("action_rejected", { reason: "already_acted" }));
    expect(h.client.submitAction(2, { kind: "skip" })).toBe(false);
  });

  it("refuses to submit before the connection is open", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    expect(h.client.submitAction(1, { kind: "skip" })).toBe(false);
  });
});

describe("reconnection", () => {
  it("reconnects with the seat token after an unexpected drop", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver(envelope("joined", joinedBody("tok-R")));

    h.sockets[0].drop();
    expect(h.client.currentStatus).toBe("reconnecting");
    expect(h.scheduled.length).toBe(1);
    h.scheduled[0].fn();
    expect(h.sockets.length).toBe(2);
    h.sockets[1].open();
    const rejoin = h.sockets[1].sentJson()[0];
    expect(rejoin.type).toBe("join");
    expect(rejoin.body).toEqual({ seat_token: "tok-R" });
  });

  it("gives up without a token instead of rejoining as a new player", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].drop();
    expect(h.client.currentStatus).toBe("failed");
    expect(h.scheduled.length).toBe(0);
  });

  it("stops retrying when the server stays unreachable", () => {
    const h = harness({ maxReconnectAttempts: 2 });
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver(envelope("joined", joinedBody()));
    // Each retry socket dies before it ever opens.
    h.sockets[0].drop();
    for (let attempt = 0; attempt < 2; attempt += 1) {
      expect(h.client.currentStatus).toBe("reconnecting");
      h.scheduled[h.scheduled.length - 1].fn();
      h.sockets[h.sockets.length - 1].drop();
    }
    expect(h.client.currentStatus).toBe("failed");
    expect(h.scheduled.length).toBe(2);
  });

  it("does not reconnect after a deliberate stop", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver(envelope("joined", joinedBody()));
    h.client.stop();
    expect(h.sockets[0].closed).toBe(true);
    h.sockets[0].drop();
    expect(h.scheduled.length).toBe(0);
    expect(h.client.currentStatus).toBe("closed");
  });
});

describe("protocol version safety", () => {
  it("freezes the client when the server speaks a newer protocol", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver({
      type: "round_begin",
      roomCode: "UIDEMO",
      protocolVersion: PROTOCOL_VERSION + 1,
      requestId: null,
      body: {},
    });
    expect(h.fatals).toEqual(["version_mismatch"]);
    expect(h.client.isOpen).toBe(false);
    expect(h.client.submitAction(1, { kind: "skip" })).toBe(false);
    // Later messages are dead to a frozen client.
    h.sockets[0].deliver(envelope("round_begin", { round: 1 }));
    expect(h.messages).toEqual([]);
  });

  it("freezes on a server-sent version_mismatch error too", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver(envelope("error", { reason: "version_mismatch", detail: "server speaks protocol 1" }));
    expect(h.fatals).toEqual(["version_mismatch"]);
  });
});

describe("surveys", () => {
  it("sends survey answers over the shared envelope", () => {
    const h = harness();
    h.client.start({ name: "dana" });
    h.sockets[0].open();
    h.sockets[0].deliver(envelope("joined", joinedBody()));
    expect(h.client.answerSurvey("sanction_influence", 4)).toBe(true);
    const sent = h.sockets[0].sentJson();
    const survey = sent.find((m) => m.type === "survey_answer");
    expect(survey.body).toEqual({ item: "sanction_influence", value: 4 });
  });
});
