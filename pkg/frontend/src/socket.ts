// Connection state machine: join and reconnect with the seat token, one
// action submission per round, request-id tagging. The socket constructor
// and timer are injectable so tests can drive everything synchronously.

import {
  PROTOCOL_VERSION,
  ServerMessage,
  WireAction,
  buildEnvelope,
  parseServerMessage,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(code?: number): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;
export type Scheduler = (fn: () => void, delayMs: number) => void;

export type ClientStatus = "idle" | "connecting" | "open" | "reconnecting" | "closed" | "failed";

export interface GameClientOptions {
  url: string;
  roomCode: string;
  factory?: SocketFactory;
  schedule?: Scheduler;
  reconnectDelayMs?: number;
  maxReconnectAttempts?: number;
  onMessage?: (message: ServerMessage) => void;
  onStatus?: (status: ClientStatus) => void;
  onFatal?: (reason: string, detail: string) => void;
}

const defaultFactory: SocketFactory = (url) => new WebSocket(url) as unknown as SocketLike;

export class GameClient {
  readonly roomCode: string;

  private readonly url: string;
  private readonly factory: SocketFactory;
  private readonly schedule: Scheduler;
  private readonly reconnectDelayMs: number;
  private readonly maxReconnectAttempts: number;
  private readonly onMessage: (message: ServerMessage) => void;
  private readonly onStatus: (status: ClientStatus) => void;
  private readonly onFatal: (reason: string, detail: string) => void;

  private socket: SocketLike | null = null;
  private status: ClientStatus = "idle";
  private requestCounter = 0;
  private pendingJoinName: string | null = null;
  private reconnectAttempts = 0;
  private closedByUs = false;
  private frozen = false;

  private _seatToken: string | null = null;
  /** Round with an unrevoked submission; cleared by the next round or a
   * rejection that voids the attempt. */
  private submittedRound: number | null = null;

  constructor(options: GameClientOptions) {
    this.url = options.url;
    this.roomCode = options.roomCode;
    this.factory = options.factory ?? defaultFactory;
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1500;
    this.maxReconnectAttempts = options.maxReconnectAttempts ?? 8;
    this.onMessage = options.onMessage ?? (() => undefined);
    this.onStatus = options.onStatus ?? (() => undefined);
    this.onFatal = options.onFatal ?? (() => undefined);
  }

  get seatToken(): string | null {
    return this._seatToken;
  }

  get currentStatus(): ClientStatus {
    return this.status;
  }

  get isOpen(): boolean {
    return this.status === "open" && !this.frozen;
  }

  /** Connect and claim a seat by name (or by stored token when given). */
  start(options: { name?: string; seatToken?: string } = {}): void {
    this.pendingJoinName = options.name ?? null;
    if (options.seatToken) {
      this._seatToken = options.seatToken;
    }
    this.closedByUs = false;
    this.open("connecting");
  }

  stop(): void {
    this.closedByUs = true;
    if (this.socket) {
      this.socket.close();
      this.socket = null;
    }
    this.setStatus("closed");
  }

  submitAction(round: number, action: WireAction): boolean {
    if (!this.isOpen || this.submittedRound === round) {
      return false;
    }
    this.submittedRound = round;
    this.sendEnvelope("submit_action", { round, action });
    return true;
  }

  answerSurvey(item: string, value: number): boolean {
    if (!this.isOpen) {
      return false;
    }
    this.sendEnvelope("survey_answer", { item, value });
    return true;
  }

  private open(status: ClientStatus): void {
    this.setStatus(status);
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.reconnectAttempts = 0;
      this.setStatus("open");
      if (this._seatToken) {
        this.sendEnvelope("join", { seat_token: this._seatToken });
      } else {
        this.sendEnvelope("join", { name: this.pendingJoinName ?? "player" });
      }
    };
    socket.onmessage = (event) => this.receive(event.data);
    socket.onclose = () => {
      if (this.socket !== socket) {
        return;
      }
      this.socket = null;
      if (this.closedByUs || this.frozen) {
        this.setStatus("closed");
        return;
      }
      if (this._seatToken === null || this.reconnectAttempts >= this.maxReconnectAttempts) {
        this.setStatus("failed");
        return;
      }
      this.reconnectAttempts += 1;
      this.setStatus("reconnecting");
      this.schedule(() => {
        if (!this.closedByUs && !this.frozen && this.socket === null) {
          this.open("reconnecting");
        }
      }, this.reconnectDelayMs);
    };
    socket.onerror = () => undefined;
  }

  private receive(raw: string): void {
    if (this.frozen) {
      return;
    }
    const result = parseServerMessage(raw);
    if (!result.ok) {
      if (result.error === "version_mismatch") {
        this.freeze("version_mismatch", result.detail);
      }
      return;
    }
    const message = result.message;
    switch (message.type) {
      case "joined":
        this._seatToken = message.body.seat_token;
        break;
      case "round_begin":
        if (this.submittedRound !== null && this.submittedRound !== message.body.round) {
          this.submittedRound = null;
        }
        break;
      case "action_rejected":
        // already_acted means the server holds a submission for us, so the
        // lock stays; anything else voids the attempt and re-enables.
        if (message.body.reason !== "already_acted") {
          this.submittedRound = null;
        }
        break;
      case "error":
        if (message.body.reason === "version_mismatch") {
          this.freeze("version_mismatch", message.body.detail);
          return;
        }
        break;
      default:
        break;
    }
    this.onMessage(message);
  }

  private freeze(reason: string, detail: string): void {
    this.frozen = true;
    this.onFatal(reason, detail);
    if (this.socket) {
      this.socket.close();
      this.socket = null;
    }
    this.setStatus("failed");
  }

  private sendEnvelope(
    type: "join" | "submit_action" | "survey_answer",
    body: Parameters<typeof buildEnvelope>[3],
  ): void {
    if (!this.socket || this.frozen) {
      return;
    }
    this.requestCounter += 1;
    this.socket.send(buildEnvelope(type, this.roomCode, `q${this.requestCounter}`, body));
  }

  private setStatus(status: ClientStatus): void {
    if (this.status !== status) {
      this.status = status;
      this.onStatus(status);
    }
  }
}

export function protocolVersion(): number {
  return PROTOCOL_VERSION;
}
